use super::{Metric, SampledMap, SupNorm};
use crate::error::{contract, Error, Result};

/// Distinct target points `y_1..y_k` plus a base point `y_0`.
#[derive(Debug, Clone)]
pub struct LandmarkSet {
    points: Vec<Vec<f64>>,
    base: Vec<f64>,
}

impl LandmarkSet {
    /// Validates pairwise distinctness under `metric`.
    pub fn new(points: Vec<Vec<f64>>, base: Vec<f64>, metric: &dyn Metric) -> Result<Self> {
        if points.is_empty() {
            return Err(contract("landmark set is empty"));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = metric.distance(&points[i], &points[j]);
                if !(d > 0.0) {
                    return Err(Error::InvalidLandmark(format!("landmarks {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { points, base })
    }

    /// Landmarks without a distinguished base; the first point serves as base.
    pub fn from_points(points: Vec<Vec<f64>>, metric: &dyn Metric) -> Result<Self> {
        let base = points.first().cloned().unwrap_or_default();
        Self::new(points, base, metric)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `g(x) = (d(f(x), y_1), ..., d(f(x), y_k))`, returned as a map into `ℓ∞_k`.
pub fn landmark_projection(
    f: &SampledMap,
    metric: &dyn Metric,
    landmarks: &LandmarkSet,
) -> Result<SampledMap> {
    if landmarks.len() != f.k() {
        return Err(contract(format!(
            "projection needs exactly k = {} landmarks, got {}",
            f.k(),
            landmarks.len()
        )));
    }
    let values = f
        .values()
        .iter()
        .map(|v| landmarks.points().iter().map(|y| metric.distance(v, y)).collect())
        .collect();
    f.with_values(values, &SupNorm)
}

/// `x ↦ (d(f(x), y_i) - d(y_i, y_0))_{i=1..N}` into `ℓ∞_N`.
///
/// Never expands distances; isometric on pairs whose images are landmarks.
pub fn kuratowski_embed(
    f: &SampledMap,
    metric: &dyn Metric,
    landmarks: &[Vec<f64>],
    base: &[f64],
) -> Result<SampledMap> {
    if landmarks.is_empty() {
        return Err(contract("Kuratowski embedding needs at least one landmark"));
    }
    let offsets: Vec<f64> = landmarks.iter().map(|y| metric.distance(y, base)).collect();
    let values = f
        .values()
        .iter()
        .map(|v| {
            landmarks
                .iter()
                .zip(&offsets)
                .map(|(y, off)| metric.distance(v, y) - off)
                .collect()
        })
        .collect();
    f.with_values(values, &SupNorm)
}

/// Largest loss `d(f(x_i), f(x_j)) - |e(x_i) - e(x_j)|_∞` over pairs of the
/// sampled indices, where `e` is an embedding of `f` such as
/// [`kuratowski_embed`].
pub fn kuratowski_defect(
    f: &SampledMap,
    metric: &dyn Metric,
    e: &SampledMap,
    sample: &[usize],
) -> Result<f64> {
    if e.len() != f.len() {
        return Err(contract("embedding and map have different grids"));
    }
    if let Some(&i) = sample.iter().find(|&&i| i >= f.len()) {
        return Err(contract(format!("sample index {i} out of range")));
    }
    let mut worst = 0.0f64;
    for (a, &i) in sample.iter().enumerate() {
        for &j in &sample[a + 1..] {
            let loss = metric.distance(f.value(i), f.value(j)) - SupNorm.distance(e.value(i), e.value(j));
            worst = worst.max(loss);
        }
    }
    Ok(worst)
}

/// Up to `n` well-spread image points, chosen by farthest-point traversal
/// starting from the first sample. Deterministic.
pub fn image_landmarks(f: &SampledMap, metric: &dyn Metric, n: usize) -> Vec<Vec<f64>> {
    let values = f.values();
    if values.is_empty() || n == 0 {
        return Vec::new();
    }
    let mut chosen = vec![0usize];
    let mut gap: Vec<f64> = values.iter().map(|v| metric.distance(v, &values[0])).collect();
    while chosen.len() < n {
        let (far, &d) = gap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty");
        if d == 0.0 {
            break;
        }
        chosen.push(far);
        for (g, v) in gap.iter_mut().zip(values) {
            *g = g.min(metric.distance(v, &values[far]));
        }
    }
    chosen.into_iter().map(|i| values[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::Euclidean;

    #[test]
    fn distance_to_origin() {
        let f = SampledMap::on_box(&[0], &[4], 0.25, &Euclidean, |x| vec![x[0]]).unwrap();
        let y = LandmarkSet::from_points(vec![vec![0.0]], &Euclidean).unwrap();
        let g = landmark_projection(&f, &Euclidean, &y).unwrap();
        for i in 0..g.len() {
            assert!((g.value(i)[0] - f.value(i)[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn distance_to_offset_point() {
        // g(t) = sqrt(t^2 + 1) at t = 0, 0.5, 1
        let f = SampledMap::on_box(&[0], &[2], 0.5, &Euclidean, |x| vec![x[0], 0.0]).unwrap();
        let y = LandmarkSet::from_points(vec![vec![0.0, 1.0]], &Euclidean).unwrap();
        let g = landmark_projection(&f, &Euclidean, &y).unwrap();
        let expect = [1.0, 1.118_033_988_749_895, std::f64::consts::SQRT_2];
        for (i, e) in expect.iter().enumerate() {
            assert!((g.value(i)[0] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_map_projection() {
        let y1 = vec![1.0, 0.0];
        let y2 = vec![0.0, 2.0];
        let f = SampledMap::on_box(&[0, 0], &[2, 2], 0.5, &Euclidean, |_| y1.clone()).unwrap();
        let set = LandmarkSet::from_points(vec![y1.clone(), y2.clone()], &Euclidean).unwrap();
        let g = landmark_projection(&f, &Euclidean, &set).unwrap();
        let d12 = 5.0_f64.sqrt();
        for v in g.values() {
            assert_eq!(v[0], 0.0);
            assert!((v[1] - d12).abs() < 1e-15);
        }
    }

    #[test]
    fn coincident_landmarks_rejected() {
        let err = LandmarkSet::from_points(vec![vec![1.0], vec![1.0]], &Euclidean).unwrap_err();
        assert!(matches!(err, Error::InvalidLandmark(_)));
    }

    #[test]
    fn wrong_landmark_count() {
        let f = SampledMap::on_box(&[0, 0], &[1, 1], 1.0, &Euclidean, |x| x.to_vec()).unwrap();
        let y = LandmarkSet::from_points(vec![vec![0.0, 0.0]], &Euclidean).unwrap();
        assert!(landmark_projection(&f, &Euclidean, &y).is_err());
    }

    #[test]
    fn kuratowski_single_landmark_at_base() {
        let f = SampledMap::on_box(&[0, 0], &[3, 3], 0.5, &Euclidean, |x| vec![x[0], x[1], 1.0]).unwrap();
        let y0 = vec![0.0, 0.0, 0.0];
        let e = kuratowski_embed(&f, &Euclidean, std::slice::from_ref(&y0), &y0).unwrap();
        for (v, w) in f.values().iter().zip(e.values()) {
            assert!((Euclidean.distance(v, &y0) - w[0]).abs() < 1e-15);
        }
        assert!(e.lipschitz() <= 1.0 + 1e-12);
    }

    #[test]
    fn kuratowski_exact_on_landmark_images() {
        let f = SampledMap::on_box(&[0], &[20], 0.05, &Euclidean, |x| {
            vec![x[0].cos(), x[0].sin(), x[0] * x[0]]
        })
        .unwrap();
        let landmarks = f.values().to_vec();
        let e = kuratowski_embed(&f, &Euclidean, &landmarks, &landmarks[0]).unwrap();
        for i in 0..f.len() {
            for j in 0..f.len() {
                let want = Euclidean.distance(f.value(i), f.value(j));
                let got = SupNorm.distance(e.value(i), e.value(j));
                assert!((want - got).abs() < 1e-12, "{i} {j}: {want} vs {got}");
            }
        }
    }

    #[test]
    fn kuratowski_defect_on_a_line() {
        let f = SampledMap::on_box(&[0], &[10], 0.1, &Euclidean, |x| vec![x[0]]).unwrap();
        let all: Vec<usize> = (0..f.len()).collect();
        let end = kuratowski_embed(&f, &Euclidean, &[vec![0.0]], &[0.0]).unwrap();
        assert!(kuratowski_defect(&f, &Euclidean, &end, &all).unwrap() < 1e-15);
        let mid = kuratowski_embed(&f, &Euclidean, &[vec![0.5]], &[0.5]).unwrap();
        assert!((kuratowski_defect(&f, &Euclidean, &mid, &all).unwrap() - 1.0).abs() < 1e-12);
        assert!(kuratowski_defect(&f, &Euclidean, &mid, &[11]).is_err());
    }

    #[test]
    fn kuratowski_constant_and_empty() {
        let f = SampledMap::on_box(&[0], &[3], 1.0, &Euclidean, |_| vec![2.0]).unwrap();
        let e = kuratowski_embed(&f, &Euclidean, &[vec![0.0], vec![5.0]], &[1.0]).unwrap();
        assert!(e.values().windows(2).all(|w| w[0] == w[1]));
        assert!(kuratowski_embed(&f, &Euclidean, &[], &[1.0]).is_err());
    }

    #[test]
    fn landmarks_are_spread() {
        let f = SampledMap::on_box(&[0], &[100], 0.01, &Euclidean, |x| vec![x[0]]).unwrap();
        let lm = image_landmarks(&f, &Euclidean, 3);
        assert_eq!(lm, vec![vec![0.0], vec![1.0], vec![0.5]]);
    }
}
