use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{cc_distance_general, VectorFieldSystem};
use crate::control::PathOptions;
use crate::error::{contract, Result};
use crate::metric_core::{euclidean_distance, Metric};
use crate::stats::rng_stream;

/// Something that produces a short curve between two points.
pub trait CurveFinder: Sync {
    /// Length of the best curve found, `None` on failure.
    fn find(&self, x: &[f64], y: &[f64]) -> Option<f64>;
}

/// Disk removed from a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstacle {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Shortest polylines in a box of `R^n` minus optional ball obstacles:
/// vertex energy descent with projection onto the admissible set, started
/// from the straight segment bent to either side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolylineFinder {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub obstacles: Vec<Obstacle>,
    pub vertices: usize,
    pub iterations: usize,
}

impl PolylineFinder {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self {
            lo,
            hi,
            obstacles: Vec::new(),
            vertices: 64,
            iterations: 20_000,
        }
    }

    pub fn with_obstacle(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.obstacles.push(Obstacle { center, radius });
        self
    }

    pub fn admissible(&self, p: &[f64]) -> bool {
        let in_box = p
            .iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((x, a), b)| x >= a && x <= b);
        in_box
            && self
                .obstacles
                .iter()
                .all(|o| euclidean_distance(p, &o.center) >= o.radius * (1.0 - 1e-12))
    }

    fn project(&self, p: &mut [f64]) {
        for o in &self.obstacles {
            let d = euclidean_distance(p, &o.center);
            if d < o.radius && d > 0.0 {
                for (x, c) in p.iter_mut().zip(&o.center) {
                    *x = c + (*x - c) * o.radius / d;
                }
            }
        }
        for ((x, a), b) in p.iter_mut().zip(&self.lo).zip(&self.hi) {
            *x = x.clamp(*a, *b);
        }
    }

    fn relax(&self, mut pts: Vec<Vec<f64>>) -> Option<f64> {
        let last = pts.len() - 1;
        for p in pts.iter_mut() {
            self.project(p);
        }
        for _ in 0..self.iterations {
            let mut moved = 0.0f64;
            for i in 1..last {
                for a in 0..pts[i].len() {
                    let target = 0.5 * (pts[i - 1][a] + pts[i + 1][a]);
                    let step = target - pts[i][a];
                    pts[i][a] += step;
                    moved = moved.max(step.abs());
                }
                let mut p = std::mem::take(&mut pts[i]);
                self.project(&mut p);
                pts[i] = p;
            }
            if moved < 1e-13 {
                break;
            }
        }
        pts.iter()
            .all(|p| self.admissible(p))
            .then(|| pts.windows(2).map(|w| euclidean_distance(&w[0], &w[1])).sum())
    }
}

impl CurveFinder for PolylineFinder {
    fn find(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        if !self.admissible(x) || !self.admissible(y) {
            return None;
        }
        let n = self.vertices.max(2);
        let d = euclidean_distance(x, y);
        // bend direction: any unit vector orthogonal to y − x
        let dir: Vec<f64> = y.iter().zip(x).map(|(b, a)| (b - a) / d.max(1e-300)).collect();
        let mut perp = vec![0.0; x.len()];
        let axis = (0..x.len())
            .min_by(|&i, &j| dir[i].abs().total_cmp(&dir[j].abs()))
            .unwrap_or(0);
        perp[axis] = 1.0;
        let dot: f64 = perp.iter().zip(&dir).map(|(p, q)| p * q).sum();
        for (p, q) in perp.iter_mut().zip(&dir) {
            *p -= dot * q;
        }
        let pn = perp.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        [1.0, -1.0]
            .iter()
            .filter_map(|side| {
                let pts: Vec<Vec<f64>> = (0..=n)
                    .map(|i| {
                        let s = i as f64 / n as f64;
                        let bump = side * 0.5 * d * (std::f64::consts::PI * s).sin() / pn;
                        x.iter()
                            .zip(y)
                            .zip(&perp)
                            .map(|((a, b), p)| a + s * (b - a) + bump * p)
                            .collect()
                    })
                    .collect();
                self.relax(pts)
            })
            .min_by(f64::total_cmp)
    }
}

/// Horizontal length of the optimized CC path of a vector-field system.
pub struct CcFinder {
    pub system: VectorFieldSystem,
    pub options: PathOptions,
}

impl CurveFinder for CcFinder {
    fn find(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        cc_distance_general(&self.system, x, y, &self.options)
            .ok()
            .map(|e| e.upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    /// `None` when the finder failed on this pair.
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiconvexityReport {
    pub pairs: Vec<PairResult>,
    /// `max length / distance` over pairs with a curve.
    pub m_estimate: f64,
    pub failed: usize,
}

/// Estimates the quasiconvexity constant from `pair_budget` seeded random
/// pairs of `points`.
pub fn quasiconvexity_probe(
    metric: &dyn Metric,
    points: &[Vec<f64>],
    pair_budget: usize,
    finder: &dyn CurveFinder,
    seed: u64,
) -> Result<QuasiconvexityReport> {
    if pair_budget < 10 {
        return Err(contract(format!(
            "pair budget must be at least 10, got {pair_budget}"
        )));
    }
    if points.len() < 2 {
        return Err(contract("need at least two sample points"));
    }
    let mut rng = rng_stream(seed, 0);
    let mut chosen = Vec::with_capacity(pair_budget);
    while chosen.len() < pair_budget {
        let i = rng.random_range(0..points.len());
        let j = rng.random_range(0..points.len());
        if i != j && metric.distance(&points[i], &points[j]) > 0.0 {
            chosen.push((i, j));
        }
    }
    let pairs: Vec<PairResult> = chosen
        .par_iter()
        .map(|&(i, j)| PairResult {
            x: points[i].clone(),
            y: points[j].clone(),
            distance: metric.distance(&points[i], &points[j]),
            length: finder.find(&points[i], &points[j]),
        })
        .collect();
    let failed = pairs.iter().filter(|p| p.length.is_none()).count();
    let m_estimate = pairs
        .iter()
        .filter_map(|p| p.length.map(|l| l / p.distance))
        .fold(0.0, f64::max);
    Ok(QuasiconvexityReport {
        pairs,
        m_estimate,
        failed,
    })
}
