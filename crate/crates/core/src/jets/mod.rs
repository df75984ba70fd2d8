//! Approximate derivatives of sampled maps and the constructions built on
//! them: critical-set stratification, the area formula check, straightening
//! maps and the m^j-ball covering of critical strata.

mod area;
mod cover;
mod straighten;

pub use area::{area_formula_check, AreaCheck, JacobianSource};
pub use cover::{critical_cover, write_misses_csv, CoverCube, CriticalCover};
pub use straighten::{
    builtin_straightening_maps, straightening_map, FnMap, Permutation, SmoothMap, Straightening,
};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::metric_core::SampledMap;

/// Knobs of the least-squares jet estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JetOptions {
    /// Fit radius; `None` means `3h`.
    pub radius: Option<f64>,
    /// Relative singular value cutoff.
    pub tol: f64,
    /// Jets with a larger normalized residual are reported as unresolved.
    pub residual_threshold: f64,
    /// Minimal fraction of the full-grid ball that must be present.
    pub min_fill: f64,
}

impl Default for JetOptions {
    fn default() -> Self {
        Self {
            radius: None,
            tol: 1e-6,
            residual_threshold: 0.1,
            min_fill: 0.6,
        }
    }
}

impl JetOptions {
    pub fn radius_for(&self, h: f64) -> f64 {
        self.radius.unwrap_or(3.0 * h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxJet {
    pub base: Vec<f64>,
    /// Row `i` is the estimated gradient of component `i`.
    pub derivative: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    /// Max absolute fit residual over the neighbourhood divided by the radius.
    pub residual: f64,
}

impl ApproxJet {
    pub fn matrix(&self) -> DMatrix<f64> {
        rows_to_matrix(&self.derivative)
    }

    /// `sqrt(det(DᵀD))`, the k-dimensional Jacobian.
    pub fn jacobian(&self) -> f64 {
        jacobian_factor(&self.matrix())
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Nonincreasing singular values.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn rank_of(sv: &[f64], tol: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Number of singular values above `tol * σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(contract(format!("rank tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(rank_of(&singular_values(m), tol))
}

/// `sqrt(det(DᵀD))` for an `m × k` matrix; zero when `m < k`.
pub fn jacobian_factor(d: &DMatrix<f64>) -> f64 {
    if d.nrows() < d.ncols() {
        return 0.0;
    }
    if d.nrows() == d.ncols() {
        return d.determinant().abs();
    }
    (d.transpose() * d).determinant().max(0.0).sqrt()
}

/// Least-squares jet of `f` at grid point number `point`.
///
/// Only centrally symmetric pairs `x ± u` of the neighbourhood enter the
/// fit, so quadratic terms of `f` do not bias the derivative. Points whose
/// symmetric neighbourhood fills less than `min_fill` of the full grid ball
/// (for instance the boundary layer of a box) are not density points.
pub fn approx_jet(f: &SampledMap, point: usize, opts: &JetOptions) -> Result<ApproxJet> {
    let k = f.k();
    let h = f.h();
    let rho = opts.radius_for(h);
    if !(rho > 0.0) {
        return Err(contract(format!("fit radius must be positive, got {rho}")));
    }
    let reach = (rho / h + 1e-9).floor() as i64;
    let center = f.grid_index(point).to_vec();
    let fx = f.value(point);
    let n = f.target_dim();

    let mut expected = 0usize;
    let mut offsets: Vec<Vec<f64>> = Vec::new();
    let mut increments: Vec<Vec<f64>> = Vec::new();
    let mut offset = vec![-reach; k];
    'outer: loop {
        let dist = h * offset.iter().map(|&o| (o * o) as f64).sum::<f64>().sqrt();
        if dist <= rho * (1.0 + 1e-12) {
            expected += 1;
            // each pair {x + u, x - u} is visited once, from its positive member
            if offset.iter().find(|&&o| o != 0).is_some_and(|&o| o > 0) {
                let plus: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
                let minus: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c - o).collect();
                if let (Some(p), Some(q)) = (f.position(&plus), f.position(&minus)) {
                    for (r, sign) in [(p, 1.0), (q, -1.0)] {
                        offsets.push(offset.iter().map(|&o| sign * o as f64 * h).collect());
                        increments.push(f.value(r).iter().zip(fx).map(|(a, b)| a - b).collect());
                    }
                }
            }
        }
        for a in (0..k).rev() {
            if offset[a] < reach {
                offset[a] += 1;
                continue 'outer;
            }
            offset[a] = -reach;
        }
        break;
    }
    let present = offsets.len() + 1;
    if (present as f64) < opts.min_fill * expected as f64 {
        return Err(Error::InsufficientDensity {
            index: point,
            detail: format!("{present} of {expected} neighbourhood points present"),
        });
    }
    let a = DMatrix::from_fn(offsets.len(), k, |i, j| offsets[i][j]);
    let b = DMatrix::from_fn(increments.len(), n, |i, j| increments[i][j]);
    let svd = a.clone().svd(true, true);
    let sa = svd.singular_values.max();
    if offsets.len() < k || svd.singular_values.iter().any(|&s| !(s > 1e-12 * sa.max(h))) {
        return Err(Error::InsufficientDensity {
            index: point,
            detail: "fit neighbourhood does not span the domain".into(),
        });
    }
    let dt = svd
        .solve(&b, 0.0)
        .map_err(|e| contract(format!("least-squares solve failed: {e}")))?;
    let d = dt.transpose();
    let resid = &a * &dt - &b;
    let residual = resid.iter().fold(0.0f64, |m, r| m.max(r.abs())) / rho;
    let sv = singular_values(&d);
    Ok(ApproxJet {
        base: f.point(point),
        numerical_rank: rank_of(&sv, opts.tol),
        singular_values: sv,
        derivative: matrix_to_rows(&d),
        residual,
    })
}

/// Jets at every grid point, in grid order.
pub fn all_jets(f: &SampledMap, opts: &JetOptions) -> Vec<Result<ApproxJet>> {
    (0..f.len())
        .into_par_iter()
        .map(|i| approx_jet(f, i, opts))
        .collect()
}

/// Partition of a sampled domain by resolved jet rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratification {
    pub k: usize,
    /// `strata[j]` lists the grid points of rank `j < k`.
    pub strata: Vec<Vec<usize>>,
    pub regular: Vec<usize>,
    pub unresolved: Vec<usize>,
}

impl Stratification {
    pub fn stratum(&self, j: usize) -> &[usize] {
        &self.strata[j]
    }

    pub fn total(&self) -> usize {
        self.strata.iter().map(Vec::len).sum::<usize>() + self.regular.len() + self.unresolved.len()
    }

    pub fn resolved(&self) -> usize {
        self.total() - self.unresolved.len()
    }

    /// Rank of a resolved point.
    pub fn rank_of(&self, point: usize) -> Option<usize> {
        if self.regular.binary_search(&point).is_ok() {
            return Some(self.k);
        }
        self.strata.iter().position(|s| s.binary_search(&point).is_ok())
    }

    /// Largest rank among resolved points, `None` if nothing resolved.
    pub fn max_rank(&self) -> Option<usize> {
        if !self.regular.is_empty() {
            return Some(self.k);
        }
        self.strata.iter().rposition(|s| !s.is_empty())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Assigns every grid point to `K_rank`, `regular` or `unresolved`.
pub fn stratify_critical(f: &SampledMap, opts: &JetOptions) -> Result<Stratification> {
    if opts.radius_for(f.h()) < 2.0 * f.h() * (1.0 - 1e-12) {
        return Err(contract("fit radius must be at least 2h"));
    }
    let k = f.k();
    let mut out = Stratification {
        k,
        strata: vec![Vec::new(); k],
        regular: Vec::new(),
        unresolved: Vec::new(),
    };
    for (i, jet) in all_jets(f, opts).into_iter().enumerate() {
        match jet {
            Ok(j) if j.residual <= opts.residual_threshold => {
                if j.numerical_rank >= k {
                    out.regular.push(i);
                } else {
                    out.strata[j.numerical_rank].push(i);
                }
            }
            _ => out.unresolved.push(i),
        }
    }
    Ok(out)
}
