use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::Serialize;

use super::Stratification;
use crate::error::{contract, Error, Result};
use crate::measure::{Ball, Cover};
use crate::metric_core::{box_indices, Metric, SampledMap};

/// Grid-aligned cube `Q = lo + [0, steps]^k` in index units; edge `steps * h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverCube {
    pub lo: Vec<i64>,
    pub steps: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalCover {
    pub cover: Cover,
    /// `C` in the radius `C L d / m`, either supplied or the smallest value
    /// that makes every ball contain its part of `f(K_j ∩ Q)`.
    pub constant: f64,
    pub edge: f64,
    pub lipschitz: f64,
    pub j: usize,
    pub m: usize,
    /// Chosen fiber representative (grid point number) per box.
    pub representatives: Vec<usize>,
    /// Number of grid points of `K_j ∩ Q`.
    pub members: usize,
    /// Points of `K_j ∩ Q` whose image misses their ball.
    pub misses: Vec<usize>,
}

/// Covers `f(K_j ∩ Q)` by `m^j` balls of radius `C L d / m`.
///
/// The first `j` coordinates of `Q` are split into `m^j` slabs. In every slab
/// the fiber (fixed first `j` coordinates) with the fewest grid points outside
/// `K_j` is chosen, ties broken lexicographically, and the ball is centred at
/// the image of its first `K_j` point.
pub fn critical_cover(
    f: &SampledMap,
    metric: &dyn Metric,
    strat: &Stratification,
    j: usize,
    m: usize,
    cube: &CoverCube,
    constant: Option<f64>,
) -> Result<CriticalCover> {
    let k = f.k();
    if j >= k || strat.k != k {
        return Err(contract(format!("stratum index {j} out of range for k = {k}")));
    }
    if m == 0 || cube.steps < m as i64 || cube.lo.len() != k {
        return Err(contract(
            "cube must have k coordinates and at least m steps per edge",
        ));
    }
    let in_kj: HashSet<usize> = strat.stratum(j).iter().copied().collect();
    let hi: Vec<i64> = cube.lo.iter().map(|l| l + cube.steps).collect();
    let nodes = box_indices(&cube.lo, &hi);
    let total = nodes.len();
    let positions: Vec<Option<usize>> = nodes.iter().map(|n| f.position(n)).collect();
    let is_member = |p: &Option<usize>| p.is_some_and(|p| in_kj.contains(&p));
    let members = positions.iter().filter(|p| is_member(p)).count();
    let limit = (m as f64).powi(-(k as i32));
    let outside = total - members;
    if outside as f64 >= limit * total as f64 {
        return Err(Error::CubeTooCoarse {
            outside,
            total,
            limit,
        });
    }

    let slab = |idx: &[i64]| -> Vec<usize> {
        (0..j)
            .map(|a| (((idx[a] - cube.lo[a]) as usize * m) / cube.steps as usize).min(m - 1))
            .collect()
    };
    // fiber key (first j indices) -> (non-member count, nodes in order)
    let mut fibers: BTreeMap<Vec<i64>, (usize, Vec<usize>)> = BTreeMap::new();
    for (n, idx) in nodes.iter().enumerate() {
        let e = fibers.entry(idx[..j].to_vec()).or_default();
        if !is_member(&positions[n]) {
            e.0 += 1;
        }
        e.1.push(n);
    }
    let boxes = box_indices(&vec![0; j], &vec![m as i64 - 1; j]);
    let mut chosen: BTreeMap<Vec<usize>, &Vec<usize>> = BTreeMap::new();
    let mut best: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (key, (bad, fiber)) in &fibers {
        let b = slab(key);
        if best.get(&b).is_none_or(|&cur| *bad < cur) {
            best.insert(b.clone(), *bad);
            chosen.insert(b, fiber);
        }
    }

    let mut representatives = Vec::with_capacity(boxes.len());
    let mut centers = Vec::with_capacity(boxes.len());
    for b in &boxes {
        let b: Vec<usize> = b.iter().map(|&v| v as usize).collect();
        let fiber = chosen[&b];
        let rep = fiber
            .iter()
            .find(|&&n| is_member(&positions[n]))
            .or_else(|| fiber.iter().find(|&&n| positions[n].is_some()))
            .and_then(|&n| positions[n]);
        let rep = match rep {
            Some(r) => r,
            None => return Err(contract("selected fiber has no sampled point")),
        };
        representatives.push(rep);
        centers.push(f.value(rep).to_vec());
    }
    let box_of = |n: usize| -> usize { slab(&nodes[n]).iter().fold(0, |acc, &s| acc * m + s) };

    let edge = cube.steps as f64 * f.h();
    let lipschitz = f.lipschitz();
    let unit = lipschitz * edge / m as f64;
    let dists: Vec<(usize, usize, f64)> = (0..total)
        .filter(|&n| is_member(&positions[n]))
        .map(|n| {
            let p = positions[n].unwrap();
            let b = box_of(n);
            (p, b, metric.distance(f.value(p), &centers[b]))
        })
        .collect();
    let constant = constant.unwrap_or_else(|| {
        let worst = dists.iter().fold(0.0f64, |w, d| w.max(d.2));
        if unit > 0.0 {
            worst / unit
        } else {
            0.0
        }
    });
    let radius = (constant * unit).max(f64::MIN_POSITIVE);
    let misses = dists
        .iter()
        .filter(|d| d.2 > radius * (1.0 + 1e-12))
        .map(|d| d.0)
        .collect();
    let balls = centers
        .into_iter()
        .map(|center| Ball { center, radius })
        .collect();
    Ok(CriticalCover {
        cover: Cover::new(balls, k as f64)?,
        constant,
        edge,
        lipschitz,
        j,
        m,
        representatives,
        members,
        misses,
    })
}

/// Writes offending points as CSV rows `point, x_1..x_k, f_1..f_N`.
pub fn write_misses_csv<W: Write>(f: &SampledMap, misses: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["point".to_string()];
    header.extend((1..=f.k()).map(|i| format!("x{i}")));
    header.extend((1..=f.target_dim()).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for &p in misses {
        let mut row = vec![p.to_string()];
        row.extend(f.point(p).iter().map(|v| v.to_string()));
        row.extend(f.value(p).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{stratify_critical, JetOptions};
    use crate::metric_core::{Euclidean, SupNorm};

    #[test]
    fn flat_map_eight_balls() {
        let h = 1.0 / 64.0;
        let f = SampledMap::on_box(&[-4, -4], &[68, 68], h, &SupNorm, |x| vec![x[0], 0.0]).unwrap();
        let s = stratify_critical(&f, &JetOptions::default()).unwrap();
        let cube = CoverCube {
            lo: vec![0, 0],
            steps: 64,
        };
        let c = critical_cover(&f, &SupNorm, &s, 1, 8, &cube, None).unwrap();
        assert_eq!(c.cover.len(), 8);
        assert_eq!(c.members, 65 * 65);
        assert!(c.misses.is_empty());
        assert!(c.constant <= 1.0 + 1e-12);
        for idx in box_indices(&[0, 0], &[64, 64]) {
            let p = f.position(&idx).unwrap();
            assert!(c.cover.covers(&SupNorm, f.value(p)));
        }
        let tight = critical_cover(&f, &SupNorm, &s, 1, 8, &cube, Some(0.5 * c.constant)).unwrap();
        assert!(!tight.misses.is_empty());
        let mut buf = Vec::new();
        write_misses_csv(&f, &tight.misses, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), tight.misses.len() + 1);
    }

    #[test]
    fn constant_map_single_ball() {
        let h = 0.05;
        let f = SampledMap::on_box(&[-3, -3], &[23, 23], h, &Euclidean, |_| vec![1.0, 2.0]).unwrap();
        let s = stratify_critical(&f, &JetOptions::default()).unwrap();
        let cube = CoverCube {
            lo: vec![0, 0],
            steps: 20,
        };
        let c = critical_cover(&f, &Euclidean, &s, 0, 4, &cube, Some(1.0)).unwrap();
        assert_eq!(c.cover.len(), 1);
        assert_eq!(c.cover.balls()[0].center, vec![1.0, 2.0]);
        assert!(c.misses.is_empty());
        assert_eq!(c.members, 21 * 21);
    }

    #[test]
    fn regular_points_make_cube_too_coarse() {
        let h = 0.05;
        let f = SampledMap::on_box(&[0, 0], &[20, 20], h, &Euclidean, |x| x.to_vec()).unwrap();
        let s = stratify_critical(&f, &JetOptions::default()).unwrap();
        let cube = CoverCube {
            lo: vec![0, 0],
            steps: 20,
        };
        assert!(matches!(
            critical_cover(&f, &Euclidean, &s, 1, 2, &cube, None),
            Err(Error::CubeTooCoarse { .. })
        ));
    }
}
