use std::collections::HashMap;

use serde::Serialize;

use super::{horizontal_length, HorizontalPathG};
use crate::error::{contract, Result};
use crate::heisenberg::{cc_distance_h, h_group, h_inverse, HPoint};
use crate::metric_core::Metric;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BldReport {
    pub curves: usize,
    /// Curves of zero horizontal length, left out of the ratios.
    pub skipped: usize,
    pub warnings: Vec<String>,
    /// `ℓ_Y(Φ∘γ) / ℓ_X(γ)` per used curve.
    pub ratios: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Smallest `C` with all ratios in `[1/C, C]`.
    pub implied_c: f64,
    /// Smallest `C_Φ` with `ℓ(γ) ≤ C_Φ ℓ(Φ∘γ)`.
    pub implied_c_phi: f64,
    pub supplied_c: f64,
    pub pass: bool,
}

/// Length ratios of `Φ∘γ` (chord sums over the path nodes, measured in
/// `target`) to the horizontal length of `γ`.
pub fn weak_bld_estimate(
    phi: &dyn Fn(&[f64]) -> Vec<f64>,
    target: &dyn Metric,
    curves: &[HorizontalPathG],
    c: f64,
) -> Result<BldReport> {
    if !(c >= 1.0) {
        return Err(contract(format!("distortion bound must be >= 1, got {c}")));
    }
    let mut ratios = Vec::with_capacity(curves.len());
    let mut warnings = Vec::new();
    for (i, curve) in curves.iter().enumerate() {
        let lx = horizontal_length(curve);
        if !(lx > 0.0) {
            warnings.push(format!("curve {i} has zero horizontal length; skipped"));
            continue;
        }
        let image: Vec<Vec<f64>> = curve.positions.iter().map(|p| phi(p)).collect();
        let ly: f64 = image.windows(2).map(|w| target.distance(&w[0], &w[1])).sum();
        ratios.push(ly / lx);
    }
    let ratio_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_max = ratios.iter().copied().fold(0.0, f64::max);
    let implied_c = ratio_max.max(1.0 / ratio_min);
    Ok(BldReport {
        curves: curves.len(),
        skipped: warnings.len(),
        warnings,
        pass: !ratios.is_empty() && ratios.iter().all(|r| *r >= 1.0 / c && *r <= c),
        ratios,
        ratio_min,
        ratio_max,
        implied_c,
        implied_c_phi: 1.0 / ratio_min,
        supplied_c: c,
    })
}

/// `Σ d_cc(p_i, p_{i+1})` over consecutive points of `H^n`, each term the
/// optimized upper bound. Left-invariance lets increments that agree to
/// 1e-12 share one optimization.
pub fn chord_cc_length(points: &[HPoint], segments: usize, iterations: usize) -> Result<f64> {
    let mut memo: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut total = 0.0;
    for w in points.windows(2) {
        let inc = h_group(&h_inverse(&w[0]), &w[1])?;
        let key: Vec<i64> = inc.to_vec().iter().map(|v| (v * 1e12).round() as i64).collect();
        let d = match memo.get(&key) {
            Some(d) => *d,
            None => {
                let d = cc_distance_h(&HPoint::identity(inc.n()), &inc, segments, iterations)?.upper;
                memo.insert(key, d);
                d
            }
        };
        total += d;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc_spaces::VectorFieldSystem;
    use crate::metric_core::Euclidean;
    use crate::stats::loglog_slope;

    fn curves(sys: &VectorFieldSystem) -> Vec<HorizontalPathG> {
        let dirs = [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [-0.3, 0.5]];
        dirs.iter()
            .map(|d| {
                HorizontalPathG::polyline(sys, &[vec![0.0, 0.0], vec![d[0], d[1]], vec![d[0], 0.0]]).unwrap()
            })
            .collect()
    }

    #[test]
    fn identity_and_scaling() {
        let e = VectorFieldSystem::euclidean(vec![-2.0; 2], vec![2.0; 2]).unwrap();
        let cs = curves(&e);
        let id = weak_bld_estimate(&|p| p.to_vec(), &Euclidean, &cs, 1.0 + 1e-12).unwrap();
        assert!(id.pass);
        assert!(id.ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
        let two = weak_bld_estimate(&|p| p.iter().map(|v| 2.0 * v).collect(), &Euclidean, &cs, 2.5).unwrap();
        assert!(two.ratios.iter().all(|r| (r - 2.0).abs() < 1e-12));
        assert!(two.pass);
        assert!((two.implied_c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_curves_are_skipped() {
        let e = VectorFieldSystem::euclidean(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        let still = HorizontalPathG::new(&e, vec![0.0; 2], vec![0.0, 1.0], vec![vec![0.0, 0.0]]).unwrap();
        let mut cs = curves(&e);
        cs.push(still);
        let r = weak_bld_estimate(&|p| p.to_vec(), &Euclidean, &cs, 2.0).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.ratios.len(), 4);
    }

    #[test]
    fn composition_bounds_multiply() {
        let e = VectorFieldSystem::euclidean(vec![-9.0; 2], vec![9.0; 2]).unwrap();
        let cs = curves(&e);
        let f1 = |p: &[f64]| vec![2.0 * p[0], p[1]];
        let f2 = |p: &[f64]| vec![p[0], 3.0 * p[1]];
        let r1 = weak_bld_estimate(&f1, &Euclidean, &cs, 10.0).unwrap();
        let mapped: Vec<HorizontalPathG> = cs
            .iter()
            .map(|c| {
                HorizontalPathG::polyline(&e, &c.positions.iter().map(|p| f1(p)).collect::<Vec<_>>()).unwrap()
            })
            .collect();
        let r2 = weak_bld_estimate(&f2, &Euclidean, &mapped, 10.0).unwrap();
        let r = weak_bld_estimate(&|p| f2(&f1(p)), &Euclidean, &cs, 10.0).unwrap();
        assert!(r.ratio_min >= r1.ratio_min * r2.ratio_min * (1.0 - 1e-12));
        assert!(r.ratio_max <= r1.ratio_max * r2.ratio_max * (1.0 + 1e-12));
    }

    #[test]
    fn heisenberg_chart_has_finite_distortion() {
        let h = VectorFieldSystem::heisenberg(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let cs: Vec<HorizontalPathG> = (0..5)
            .map(|i| {
                let a = i as f64 * 0.7;
                HorizontalPathG::new(
                    &h,
                    vec![0.0; 3],
                    vec![0.0, 0.5, 1.0],
                    vec![vec![0.5 * a.cos(), 0.5 * a.sin()], vec![-0.4 * a.sin(), 0.3]],
                )
                .unwrap()
            })
            .collect();
        let r = weak_bld_estimate(&|p| p.to_vec(), &Euclidean, &cs, 10.0).unwrap();
        assert!(r.pass);
        assert!(r.implied_c <= h.conditioning().length_constant());
    }

    #[test]
    fn t_axis_chords_grow_like_square_root() {
        let ns = [8usize, 16, 32, 64];
        let lens: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let pts: Vec<HPoint> = (0..=n)
                    .map(|i| HPoint::new(vec![0.0, 0.0], i as f64 / n as f64).unwrap())
                    .collect();
                chord_cc_length(&pts, 16, 400).unwrap()
            })
            .collect();
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let slope = loglog_slope(&x, &lens).unwrap();
        assert!((slope - 0.5).abs() < 0.1, "{slope}");
    }
}
