//! Shortest horizontal paths by optimizing piecewise-constant controls.
//!
//! A path is `M` equal steps on `[0, 1]` with control `a_j ∈ R^m` held on
//! step `j`. The search minimizes the energy `Σ |a_j|²` subject to hitting
//! the target: a tangential gradient step followed by a Newton projection
//! `a ← a − Jᵀ(JJᵀ)⁻¹ c` back onto the endpoint constraint `c(a) = 0`.
//! Energy minimizers have constant speed, so their length `Σ |a_j| / M`
//! is the reported upper bound.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_core::euclidean_distance;
use crate::stats::rng_stream;

/// Driftless control system `γ' = Σ a_i X_i(γ)`.
pub trait ControlSystem: Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;

    /// `n × m` matrix whose columns are the fields at `p`.
    fn frame(&self, p: &[f64]) -> DMatrix<f64>;

    /// States at the `M + 1` nodes; `controls` holds `M` blocks of `m` values.
    fn trajectory(&self, start: &[f64], controls: &[f64]) -> Vec<Vec<f64>>;

    fn endpoint(&self, start: &[f64], controls: &[f64]) -> Vec<f64> {
        self.trajectory(start, controls)
            .pop()
            .unwrap_or_else(|| start.to_vec())
    }

    /// Derivative of the endpoint in the controls (forward differences
    /// unless overridden).
    fn endpoint_jacobian(&self, start: &[f64], controls: &[f64]) -> DMatrix<f64> {
        let base = self.endpoint(start, controls);
        let mut a = controls.to_vec();
        let mut jac = DMatrix::zeros(base.len(), a.len());
        for c in 0..a.len() {
            let step = 1e-7 * a[c].abs().max(1.0);
            a[c] = controls[c] + step;
            let e = self.endpoint(start, &a);
            a[c] = controls[c];
            for r in 0..base.len() {
                jac[(r, c)] = (e[r] - base[r]) / step;
            }
        }
        jac
    }

    /// Whether a state may be visited (domain membership).
    fn admissible(&self, _p: &[f64]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathOptions {
    pub segments: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Accepted endpoint error relative to `|q − p|`.
    pub tolerance: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            segments: 32,
            iterations: 400,
            restarts: 4,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSolution {
    /// One control vector per step.
    pub controls: Vec<Vec<f64>>,
    pub positions: Vec<Vec<f64>>,
    pub length: f64,
    /// Sup-norm endpoint error.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSearch {
    pub best: PathSolution,
    /// Best accepted length after each restart (non-increasing).
    pub best_by_restart: Vec<f64>,
    /// Endpoint error reached by each restart.
    pub residuals: Vec<f64>,
    pub seed: u64,
}

/// Best-of-restarts shortest horizontal path from `start` to `target`.
pub fn optimize_path(
    sys: &dyn ControlSystem,
    start: &[f64],
    target: &[f64],
    opts: &PathOptions,
) -> Result<PathSearch> {
    let m = sys.control_dim();
    let segs = opts.segments.max(1);
    let diam = euclidean_distance(start, target);
    if diam == 0.0 {
        let controls = vec![0.0; segs * m];
        let best = PathSolution {
            controls: vec![vec![0.0; m]; segs],
            positions: sys.trajectory(start, &controls),
            length: 0.0,
            residual: 0.0,
            iterations: 0,
        };
        return Ok(PathSearch {
            best,
            best_by_restart: vec![0.0; opts.restarts.max(1)],
            residuals: vec![0.0; opts.restarts.max(1)],
            seed: opts.seed,
        });
    }
    let accept = opts.tolerance * diam;
    let runs: Vec<Option<PathSolution>> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| single_run(sys, start, target, segs, opts.iterations, opts.seed, r))
        .collect();
    let mut best: Option<PathSolution> = None;
    let mut best_by_restart = Vec::with_capacity(runs.len());
    let mut residuals = Vec::with_capacity(runs.len());
    for run in runs {
        residuals.push(run.as_ref().map_or(f64::INFINITY, |s| s.residual));
        if let Some(s) = run {
            let ok = s.residual <= accept && s.positions.iter().all(|p| sys.admissible(p));
            if ok && best.as_ref().is_none_or(|b| s.length < b.length) {
                best = Some(s);
            }
        }
        best_by_restart.push(best.as_ref().map_or(f64::INFINITY, |b| b.length));
    }
    match best {
        Some(best) => Ok(PathSearch {
            best,
            best_by_restart,
            residuals,
            seed: opts.seed,
        }),
        None => Err(Error::NoPathFound {
            residual: residuals.iter().copied().fold(f64::INFINITY, f64::min),
        }),
    }
}

fn single_run(
    sys: &dyn ControlSystem,
    start: &[f64],
    target: &[f64],
    segs: usize,
    iterations: usize,
    seed: u64,
    restart: usize,
) -> Option<PathSolution> {
    let m = sys.control_dim();
    let mut rng = rng_stream(seed, restart as u64);
    let delta: Vec<f64> = target.iter().zip(start).map(|(q, p)| q - p).collect();
    let base = sys
        .frame(start)
        .pseudo_inverse(1e-12)
        .ok()
        .map(|pinv| pinv * DVector::from_vec(delta.clone()))
        .unwrap_or_else(|| DVector::zeros(m));
    let diam = euclidean_distance(start, target);
    let spread = if restart == 0 { 0.05 } else { 0.5 } * base.amax().max(diam.sqrt());
    let mut a: Vec<f64> = (0..segs * m)
        .map(|i| base[i % m] + spread * rng.random_range(-1.0..1.0))
        .collect();
    let ftol = 1e-12 * (1.0 + amax(start).max(amax(target)));
    a = restore(sys, start, target, a, ftol)?;
    let energy = |a: &[f64]| a.iter().map(|v| v * v).sum::<f64>();
    let mut alpha = 0.25;
    let mut done = 0;
    for it in 0..iterations {
        done = it + 1;
        let j = sys.endpoint_jacobian(start, &a);
        let g = DVector::from_column_slice(&a);
        let gram = &j * j.transpose();
        let Some(y) = gram.clone().cholesky().map(|c| c.solve(&(&j * &g))) else {
            break;
        };
        let pg = &g - j.transpose() * y;
        if pg.norm() <= 1e-10 * g.norm() {
            break;
        }
        let trial: Vec<f64> = a.iter().zip(pg.iter()).map(|(v, d)| v - alpha * d).collect();
        match restore(sys, start, target, trial, ftol) {
            Some(t) if energy(&t) < energy(&a) => {
                a = t;
                alpha = (alpha * 2.0).min(1.0);
            }
            _ => {
                alpha *= 0.5;
                if alpha < 1e-10 {
                    break;
                }
            }
        }
    }
    let positions = sys.trajectory(start, &a);
    let end = positions.last()?;
    let residual = end
        .iter()
        .zip(target)
        .map(|(e, t)| (e - t).abs())
        .fold(0.0, f64::max);
    let controls: Vec<Vec<f64>> = a.chunks(m).map(<[f64]>::to_vec).collect();
    let length = controls
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum::<f64>()
        / segs as f64;
    Some(PathSolution {
        controls,
        positions,
        length,
        residual,
        iterations: done,
    })
}

fn amax(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimum-norm Newton projection onto `endpoint(a) = target`.
fn restore(
    sys: &dyn ControlSystem,
    start: &[f64],
    target: &[f64],
    mut a: Vec<f64>,
    ftol: f64,
) -> Option<Vec<f64>> {
    let resid = |a: &[f64]| -> DVector<f64> {
        let e = sys.endpoint(start, a);
        DVector::from_iterator(e.len(), e.iter().zip(target).map(|(e, t)| e - t))
    };
    let mut c = resid(&a);
    for _ in 0..40 {
        let cn = c.amax();
        if cn <= ftol {
            return Some(a);
        }
        let j = sys.endpoint_jacobian(start, &a);
        let gram = &j * j.transpose();
        let y = gram.pseudo_inverse(1e-14).ok()? * &c;
        let step = j.transpose() * y;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = a.iter().zip(step.iter()).map(|(v, d)| v - lambda * d).collect();
            let ct = resid(&trial);
            if ct.amax() < cn {
                a = trial;
                c = ct;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                return None;
            }
        }
    }
    (c.amax() <= ftol * 1e3).then_some(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coordinate frame of `R^n`.
    struct Flat(usize);

    impl ControlSystem for Flat {
        fn state_dim(&self) -> usize {
            self.0
        }
        fn control_dim(&self) -> usize {
            self.0
        }
        fn frame(&self, _p: &[f64]) -> DMatrix<f64> {
            DMatrix::identity(self.0, self.0)
        }
        fn trajectory(&self, start: &[f64], controls: &[f64]) -> Vec<Vec<f64>> {
            let segs = controls.len() / self.0;
            let mut p = start.to_vec();
            let mut out = vec![p.clone()];
            for c in controls.chunks(self.0) {
                for (x, v) in p.iter_mut().zip(c) {
                    *x += v / segs as f64;
                }
                out.push(p.clone());
            }
            out
        }
    }

    #[test]
    fn straight_line_in_the_plane() {
        let s = optimize_path(&Flat(2), &[0.0, 0.0], &[3.0, 4.0], &PathOptions::default()).unwrap();
        assert!((s.best.length - 5.0).abs() < 1e-9);
        assert!(s.best.residual < 1e-9);
        assert!(s.best_by_restart.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_displacement() {
        let s = optimize_path(
            &Flat(3),
            &[1.0, 2.0, 3.0],
            &[1.0, 2.0, 3.0],
            &PathOptions::default(),
        )
        .unwrap();
        assert_eq!(s.best.length, 0.0);
    }
}
