//! Hausdorff content estimation and the integral estimates behind the
//! diameter bound: Riesz potentials, the Poincaré-type deviation, the
//! segment-intersection statistic, and greedy 5r-covering selection.

mod grid_set;
mod poincare;
mod riesz;
mod segments;
mod vitali;

pub use grid_set::GridSet;
pub use poincare::{poincare_deviation, PoincareBound};
pub use riesz::{cell_kernel_integral, riesz_ball_constant, riesz_potential, RieszPotential};
pub use segments::{segment_intersection_length, segment_intersection_stat, SegmentStat};
pub use vitali::{vitali_select, vitali_select_indices, Cube};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::metric_core::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A finite ball cover together with the exponent `s` of its content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    balls: Vec<Ball>,
    s: f64,
}

impl Cover {
    pub fn new(balls: Vec<Ball>, s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(contract(format!("content exponent must be >= 0, got {s}")));
        }
        if let Some(b) = balls.iter().find(|b| !(b.radius > 0.0) || !b.radius.is_finite()) {
            return Err(contract(format!(
                "ball radius must be positive, got {}",
                b.radius
            )));
        }
        Ok(Self { balls, s })
    }

    /// `Σ r_i^s`.
    pub fn content(&self) -> f64 {
        self.balls.iter().map(|b| b.radius.powf(self.s)).sum()
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn covers(&self, metric: &dyn Metric, p: &[f64]) -> bool {
        self.balls
            .iter()
            .any(|b| metric.distance(&b.center, p) <= b.radius)
    }
}

/// Content of a uniform-radius cover at one resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub resolution: f64,
    pub value: f64,
    pub ball_count: usize,
}

/// Greedy farthest-point cover: every point ends up within `r` of a center.
pub fn greedy_cover(points: &[Vec<f64>], metric: &dyn Metric, r: f64) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(contract("cannot cover an empty point cloud"));
    }
    if !(r > 0.0) {
        return Err(contract(format!("cover resolution must be positive, got {r}")));
    }
    let mut centers = vec![0usize];
    let mut gap: Vec<f64> = points
        .par_iter()
        .map(|p| metric.distance(p, &points[0]))
        .collect();
    loop {
        let (far, &d) = gap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty");
        if d <= r {
            return Ok(centers);
        }
        centers.push(far);
        let c = &points[far];
        gap.par_iter_mut().zip(points.par_iter()).for_each(|(g, p)| {
            let dp = metric.distance(p, c);
            if dp < *g {
                *g = dp;
            }
        });
    }
}

/// Upper estimate of `H^s_∞` of a point cloud from a greedy radius-`r` cover.
pub fn hausdorff_content(
    points: &[Vec<f64>],
    metric: &dyn Metric,
    s: f64,
    r: f64,
) -> Result<ContentEstimate> {
    if !(s >= 0.0) {
        return Err(contract(format!("content exponent must be >= 0, got {s}")));
    }
    let centers = greedy_cover(points, metric, r)?;
    Ok(ContentEstimate {
        resolution: r,
        value: centers.len() as f64 * r.powf(s),
        ball_count: centers.len(),
    })
}

/// The greedy cover itself, as a [`Cover`].
pub fn greedy_ball_cover(points: &[Vec<f64>], metric: &dyn Metric, s: f64, r: f64) -> Result<Cover> {
    let centers = greedy_cover(points, metric, r)?;
    Cover::new(
        centers
            .into_iter()
            .map(|i| Ball {
                center: points[i].clone(),
                radius: r,
            })
            .collect(),
        s,
    )
}

pub fn content_series(
    points: &[Vec<f64>],
    metric: &dyn Metric,
    s: f64,
    radii: &[f64],
) -> Result<Vec<ContentEstimate>> {
    radii
        .iter()
        .map(|&r| hausdorff_content(points, metric, s, r))
        .collect()
}

/// Writes `r,value,ball_count` rows.
pub fn write_content_csv<W: Write>(series: &[ContentEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "value", "ball_count"])?;
    for e in series {
        w.write_record([
            e.resolution.to_string(),
            e.value.to_string(),
            e.ball_count.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::Euclidean;
    use rand::Rng;

    fn unit_segment(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = crate::stats::rng_stream(seed, 0);
        (0..n).map(|_| vec![rng.random::<f64>(), 0.0]).collect()
    }

    #[test]
    fn single_point() {
        let e = hausdorff_content(&[vec![0.3, 0.1]], &Euclidean, 1.5, 0.1).unwrap();
        assert_eq!(e.ball_count, 1);
        assert!((e.value - 0.1_f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn segment_length_content() {
        let pts = unit_segment(1000, 11);
        let mut prev = f64::INFINITY;
        for r in [0.1, 0.05, 0.025] {
            let e = hausdorff_content(&pts, &Euclidean, 1.0, r).unwrap();
            assert!((0.5..=1.5).contains(&e.value), "r={r}: {}", e.value);
            // N(r) sits between 1/(2r) and 1/r + 1 for greedy covers of an interval
            assert!(e.ball_count as f64 >= 1.0 / (2.0 * r) - 1.0);
            assert!(e.ball_count as f64 <= 1.0 / r + 1.0);
            assert!(e.value <= prev * 1.25);
            prev = e.value;
        }
    }

    #[test]
    fn segment_area_content_vanishes() {
        let pts = unit_segment(1000, 12);
        let radii = [0.1, 0.05, 0.025, 0.0125];
        let series = content_series(&pts, &Euclidean, 2.0, &radii).unwrap();
        let vals: Vec<f64> = series.iter().map(|e| e.value).collect();
        let slope = crate::stats::loglog_slope(&radii, &vals).unwrap();
        assert!((slope - 1.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn cover_membership_and_csv() {
        let pts = unit_segment(200, 3);
        let cover = greedy_ball_cover(&pts, &Euclidean, 1.0, 0.05).unwrap();
        assert!(pts.iter().all(|p| cover.covers(&Euclidean, p)));
        let mut buf = Vec::new();
        let series = content_series(&pts, &Euclidean, 1.0, &[0.1, 0.05]).unwrap();
        write_content_csv(&series, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("r,value,ball_count"));
    }

    #[test]
    fn contract_errors() {
        assert!(hausdorff_content(&[], &Euclidean, 1.0, 0.1).is_err());
        assert!(hausdorff_content(&[vec![0.0]], &Euclidean, 1.0, 0.0).is_err());
        assert!(Cover::new(
            vec![Ball {
                center: vec![0.0],
                radius: 0.0
            }],
            1.0
        )
        .is_err());
    }
}
