use serde::{Deserialize, Serialize};

/// Axis-parallel cube, i.e. a closed ball of the `ℓ∞_k` metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub half_edge: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, half_edge: f64) -> Self {
        Self { center, half_edge }
    }

    /// Cube `[lo, lo + edge]^k`.
    pub fn from_corner(lo: &[f64], edge: f64) -> Self {
        Self {
            center: lo.iter().map(|l| l + 0.5 * edge).collect(),
            half_edge: 0.5 * edge,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn edge(&self) -> f64 {
        2.0 * self.half_edge
    }

    /// Closed cubes meet.
    pub fn intersects(&self, other: &Cube) -> bool {
        self.center
            .iter()
            .zip(&other.center)
            .all(|(a, b)| (a - b).abs() <= self.half_edge + other.half_edge)
    }

    /// Concentric cube with `factor` times the edge.
    pub fn dilate(&self, factor: f64) -> Cube {
        Cube::new(self.center.clone(), self.half_edge * factor)
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.center
            .iter()
            .zip(&other.center)
            .all(|(a, b)| (a - b).abs() + other.half_edge <= self.half_edge * (1.0 + 1e-12))
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.center
            .iter()
            .zip(p)
            .all(|(c, x)| (c - x).abs() <= self.half_edge)
    }
}

/// Greedy 5r-covering selection: scan cubes by decreasing edge (ties by
/// input order) and keep each one disjoint from everything kept so far.
pub fn vitali_select_indices(cubes: &[Cube]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    order.sort_by(|&a, &b| cubes[b].half_edge.total_cmp(&cubes[a].half_edge).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&j| !cubes[i].intersects(&cubes[j])) {
            kept.push(i);
        }
    }
    kept
}

pub fn vitali_select(cubes: &[Cube]) -> Vec<Cube> {
    vitali_select_indices(cubes)
        .into_iter()
        .map(|i| cubes[i].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_families() {
        assert!(vitali_select(&[]).is_empty());
        let q = Cube::from_corner(&[0.0, 0.0], 1.0);
        assert_eq!(vitali_select(std::slice::from_ref(&q)), vec![q.clone()]);
        let r = Cube::from_corner(&[3.0, 0.0], 1.0);
        assert_eq!(vitali_select(&[q.clone(), r.clone()]).len(), 2);
    }

    #[test]
    fn overlapping_pair() {
        let q1 = Cube::from_corner(&[0.0, 0.0], 1.0);
        let q2 = Cube::from_corner(&[0.5, 0.5], 0.9);
        let sel = vitali_select(&[q2.clone(), q1.clone()]);
        assert_eq!(sel, vec![q1.clone()]);
        let five = q1.dilate(5.0);
        assert_eq!(five, Cube::from_corner(&[-2.0, -2.0], 5.0));
        assert!(five.contains_cube(&q2));
    }
}
