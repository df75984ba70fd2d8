use std::collections::BTreeMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use super::{gauge_flat, group_flat, inverse_flat, koranyi_flat, HPoint};
use crate::control::{optimize_path, ControlSystem, PathOptions};
use crate::error::{contract, Result};
use crate::stats::rng_stream;

/// Horizontal curve with piecewise-constant controls in the frame
/// `X_i, Y_i`. On a step of length `Δ` with control `a` the curve moves by
/// right multiplication with `(Δ a, 0)`, which is the exact flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizontalPathH {
    pub times: Vec<f64>,
    pub controls: Vec<Vec<f64>>,
    pub start: HPoint,
    pub positions: Vec<HPoint>,
}

impl HorizontalPathH {
    pub fn new(start: HPoint, times: Vec<f64>, controls: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != controls.len() + 1 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(contract(
                "time grid must be increasing with one more node than controls",
            ));
        }
        if controls.iter().any(|c| c.len() != start.z.len()) {
            return Err(contract(
                "each control needs one coefficient per horizontal field",
            ));
        }
        let mut p = start.to_vec();
        let mut positions = vec![start.clone()];
        for (c, w) in controls.iter().zip(times.windows(2)) {
            let mut step: Vec<f64> = c.iter().map(|a| a * (w[1] - w[0])).collect();
            step.push(0.0);
            p = group_flat(&p, &step);
            positions.push(HPoint::from_slice(&p)?);
        }
        Ok(Self {
            times,
            controls,
            start,
            positions,
        })
    }

    /// `ℓ_H = Σ_j |a_j| Δt_j`.
    pub fn horizontal_length(&self) -> f64 {
        self.controls
            .iter()
            .zip(self.times.windows(2))
            .map(|(c, w)| c.iter().map(|v| v * v).sum::<f64>().sqrt() * (w[1] - w[0]))
            .sum()
    }

    pub fn endpoint(&self) -> &HPoint {
        self.positions.last().unwrap_or(&self.start)
    }
}

/// `H^n` as a control system on flat `[z..., t]` states.
#[derive(Debug, Clone, Copy)]
pub struct HeisenbergSystem {
    pub n: usize,
}

impl ControlSystem for HeisenbergSystem {
    fn state_dim(&self) -> usize {
        2 * self.n + 1
    }

    fn control_dim(&self) -> usize {
        2 * self.n
    }

    fn frame(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut f = DMatrix::zeros(2 * n + 1, 2 * n);
        for i in 0..n {
            f[(i, i)] = 1.0;
            f[(2 * n, i)] = 2.0 * p[n + i];
            f[(n + i, n + i)] = 1.0;
            f[(2 * n, n + i)] = -2.0 * p[i];
        }
        f
    }

    fn trajectory(&self, start: &[f64], controls: &[f64]) -> Vec<Vec<f64>> {
        let m = 2 * self.n;
        let dt = 1.0 / (controls.len() / m) as f64;
        let mut p = start.to_vec();
        let mut out = vec![p.clone()];
        for c in controls.chunks(m) {
            let mut step: Vec<f64> = c.iter().map(|a| a * dt).collect();
            step.push(0.0);
            p = group_flat(&p, &step);
            out.push(p.clone());
        }
        out
    }

    fn endpoint_jacobian(&self, start: &[f64], controls: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let m = 2 * n;
        let segs = controls.len() / m;
        let dt = 1.0 / segs as f64;
        let mut jac = DMatrix::zeros(m + 1, controls.len());
        // suffix sums of the controls after step j
        let mut suffix = vec![vec![0.0; m]; segs + 1];
        for j in (0..segs).rev() {
            for i in 0..m {
                suffix[j][i] = suffix[j + 1][i] + controls[j * m + i];
            }
        }
        let mut z = start[..m].to_vec();
        for j in 0..segs {
            let s = &suffix[j + 1];
            for i in 0..n {
                let (u, v) = (j * m + i, j * m + n + i);
                jac[(i, u)] = dt;
                jac[(n + i, v)] = dt;
                jac[(m, u)] = 2.0 * dt * z[n + i] - 2.0 * dt * dt * s[n + i];
                jac[(m, v)] = -2.0 * dt * z[i] + 2.0 * dt * dt * s[i];
            }
            for i in 0..m {
                z[i] += dt * controls[j * m + i];
            }
        }
        jac
    }
}

/// Empirical bi-Lipschitz constant between the CC upper bound and `d_K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BilipEstimate {
    /// `slack * max(max_ratio, 1 / min_ratio)`.
    pub constant: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub segments: usize,
    pub slack: f64,
}

const BILIP_SAMPLES: usize = 32;
const BILIP_SEGMENTS: usize = 24;
const BILIP_SLACK: f64 = 1.02;

static BILIP_CACHE: Mutex<BTreeMap<usize, BilipEstimate>> = Mutex::new(BTreeMap::new());

/// Ratios `cc upper bound / d_K` over a fixed sample of the unit gauge
/// sphere of `H^n`, computed once per `n` and cached.
pub fn c_bilip(n: usize) -> BilipEstimate {
    if let Some(e) = BILIP_CACHE.lock().map(|c| c.get(&n).copied()).ok().flatten() {
        return e;
    }
    let estimate = measure_bilip(n);
    if let Ok(mut cache) = BILIP_CACHE.lock() {
        cache.entry(n).or_insert(estimate);
    }
    estimate
}

fn measure_bilip(n: usize) -> BilipEstimate {
    let d = 2 * n + 1;
    let mut rng = rng_stream(0xb11b, n as u64);
    let mut sample = Vec::with_capacity(BILIP_SAMPLES);
    let mut pole = vec![0.0; d];
    pole[d - 1] = 1.0;
    sample.push(pole);
    let mut east = vec![0.0; d];
    east[0] = 1.0;
    sample.push(east);
    while sample.len() < BILIP_SAMPLES {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = gauge_flat(&v);
        if g > 0.1 {
            let r = 1.0 / g;
            let mut u: Vec<f64> = v[..d - 1].iter().map(|x| x * r).collect();
            u.push(v[d - 1] * r * r);
            sample.push(u);
        }
    }
    let sys = HeisenbergSystem { n };
    let opts = PathOptions {
        segments: BILIP_SEGMENTS,
        iterations: 400,
        restarts: 4,
        seed: 0xb11b,
        tolerance: 1e-9,
    };
    let origin = vec![0.0; d];
    let ratios: Vec<f64> = sample
        .iter()
        .filter_map(|q| optimize_path(&sys, &origin, q, &opts).ok())
        .map(|s| s.best.length)
        .collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    BilipEstimate {
        constant: BILIP_SLACK * max_ratio.max(1.0 / min_ratio),
        min_ratio,
        max_ratio,
        samples: ratios.len(),
        segments: BILIP_SEGMENTS,
        slack: BILIP_SLACK,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcBound {
    pub upper: f64,
    pub lower: f64,
    pub residual: f64,
    pub c_bilip: f64,
    pub path: HorizontalPathH,
    pub best_by_restart: Vec<f64>,
}

/// Upper bound on `d_cc(p, q)` from an optimized horizontal path with
/// `segments` steps, and the lower bound `d_K(p, q) / c_bilip`.
pub fn cc_distance_h(p: &HPoint, q: &HPoint, segments: usize, iterations: usize) -> Result<CcBound> {
    if segments < 8 {
        return Err(contract(format!("need at least 8 path segments, got {segments}")));
    }
    if p.z.len() != q.z.len() {
        return Err(contract("Heisenberg dimension mismatch"));
    }
    let n = p.n();
    let pv = p.to_vec();
    let w = group_flat(&inverse_flat(&pv), &q.to_vec());
    let opts = PathOptions {
        segments,
        iterations,
        restarts: 4,
        seed: 0x4845,
        tolerance: 1e-9,
    };
    let search = optimize_path(&HeisenbergSystem { n }, &vec![0.0; 2 * n + 1], &w, &opts)?;
    let times = (0..=segments).map(|j| j as f64 / segments as f64).collect();
    let path = HorizontalPathH::new(p.clone(), times, search.best.controls.clone())?;
    let c = if w.iter().all(|v| *v == 0.0) {
        1.0
    } else {
        c_bilip(n).constant
    };
    Ok(CcBound {
        upper: search.best.length,
        lower: koranyi_flat(&pv, &q.to_vec()) / c,
        residual: search.best.residual,
        c_bilip: c,
        path,
        best_by_restart: search.best_by_restart,
    })
}
