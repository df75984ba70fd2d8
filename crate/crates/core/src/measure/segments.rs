use rand::Rng;
use rayon::prelude::*;

use super::{riesz_ball_constant, Cube, GridSet};
use crate::error::{contract, Result};
use crate::metric_core::euclidean_distance;
use crate::stats::{median, rng_stream};

/// Outcome of the segment-intersection experiment around one base point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SegmentStat {
    pub median: f64,
    /// Fraction of sampled `y` with `I_x(y) <= threshold`.
    pub fraction_below: f64,
    /// `2 C(n) H^n(E)^{1/n}` with `C(n)` the equal-measure-ball constant.
    pub threshold: f64,
    pub samples: usize,
}

/// `H^1([x, y] ∩ E)`, exact for a cell union: the segment is split at every
/// grid-plane crossing and each piece is classified by its midpoint.
pub fn segment_intersection_length(e: &GridSet, x: &[f64], y: &[f64]) -> f64 {
    let len = euclidean_distance(x, y);
    if len == 0.0 || e.is_empty() {
        return 0.0;
    }
    let h = e.h();
    let mut ts = vec![0.0, 1.0];
    for a in 0..e.k() {
        let d = y[a] - x[a];
        if d == 0.0 {
            continue;
        }
        let o = e.origin()[a];
        let (s0, s1) = if d > 0.0 { (x[a], y[a]) } else { (y[a], x[a]) };
        let first = ((s0 - o) / h).floor() as i64 + 1;
        let last = ((s1 - o) / h).ceil() as i64 - 1;
        for i in first..=last {
            let t = (o + i as f64 * h - x[a]) / d;
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    let mut inside = 0.0;
    let mut mid = vec![0.0; x.len()];
    for w in ts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        for a in 0..x.len() {
            mid[a] = x[a] + tm * (y[a] - x[a]);
        }
        if e.contains_point(&mid) {
            inside += dt;
        }
    }
    inside * len
}

/// Draws `samples` uniform points `y ∈ Q` and reports how often the segment
/// `[x, y]` meets `E` in length at most `2 C(n) H^n(E)^{1/n}`.
pub fn segment_intersection_stat(
    e: &GridSet,
    cube: &Cube,
    x: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SegmentStat> {
    let n = e.k();
    if samples < 100 {
        return Err(contract(format!("need at least 100 samples, got {samples}")));
    }
    if cube.dim() != n || x.len() != n {
        return Err(contract("cube, set and base point dimensions differ"));
    }
    let threshold = 2.0 * riesz_ball_constant(n) * e.measure().powf(1.0 / n as f64);
    let lo: Vec<f64> = cube.center.iter().map(|c| c - cube.half_edge).collect();
    let side = 2.0 * cube.half_edge;
    let mut lengths: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(seed, i as u64);
            let y: Vec<f64> = lo.iter().map(|l| l + side * rng.random::<f64>()).collect();
            segment_intersection_length(e, x, &y)
        })
        .collect();
    let below = lengths.iter().filter(|&&l| l <= threshold).count();
    Ok(SegmentStat {
        median: median(&mut lengths),
        fraction_below: below as f64 / samples as f64,
        threshold,
        samples,
    })
}
