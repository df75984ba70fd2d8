//! The Heisenberg group `H^n` in exponential coordinates `(z, t)`,
//! `z = (x_1..x_n, y_1..y_n)`.
//!
//! Conventions used throughout (and echoed in every report header):
//!
//! * law `(z, t)·(w, s) = (z + w, t + s + 2 Σ (y_i u_i − x_i v_i))`
//! * left-invariant frame `X_i = ∂x_i + 2 y_i ∂t`, `Y_i = ∂y_i − 2 x_i ∂t`
//! * dilations `δ_r(z, t) = (r z, r² t)`
//! * Korányi gauge `‖(z, t)‖ = (|z|⁴ + t²)^{1/4}`, `d_K(p, q) = ‖p⁻¹ q‖`

mod path;
mod profile;

pub use path::{c_bilip, cc_distance_h, BilipEstimate, CcBound, HeisenbergSystem, HorizontalPathH};
pub use profile::{h_lipschitz_profile, low_rank_check, write_profile_csv, LowRankCheck, ProfileRow};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::metric_core::{Metric, TargetKind};

/// Group element, serialized as `[z..., t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct HPoint {
    pub z: Vec<f64>,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: Vec<f64>, t: f64) -> Result<Self> {
        if z.is_empty() || !z.len().is_multiple_of(2) {
            return Err(contract(format!(
                "horizontal part needs 2n > 0 coordinates, got {}",
                z.len()
            )));
        }
        if !t.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(contract("Heisenberg coordinates must be finite"));
        }
        Ok(Self { z, t })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![0.0; 2 * n],
            t: 0.0,
        }
    }

    /// From the flat layout `[z..., t]`.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v.split_last() {
            Some((&t, z)) => Self::new(z.to_vec(), t),
            None => Err(contract("empty Heisenberg coordinate vector")),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.z.clone();
        v.push(self.t);
        v
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }
}

impl From<HPoint> for Vec<f64> {
    fn from(p: HPoint) -> Self {
        p.to_vec()
    }
}

impl TryFrom<Vec<f64>> for HPoint {
    type Error = crate::error::Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        HPoint::from_slice(&v)
    }
}

/// `Σ (y_i u_i − x_i v_i)` for `z = (x, y)`, `w = (u, v)`.
pub(crate) fn symplectic(z: &[f64], w: &[f64]) -> f64 {
    let n = z.len() / 2;
    (0..n).map(|i| z[n + i] * w[i] - z[i] * w[n + i]).sum()
}

/// Group product on flat `[z..., t]` vectors of equal length.
pub(crate) fn group_flat(p: &[f64], q: &[f64]) -> Vec<f64> {
    let d = p.len() - 1;
    let mut out: Vec<f64> = p[..d].iter().zip(&q[..d]).map(|(a, b)| a + b).collect();
    out.push(p[d] + q[d] + 2.0 * symplectic(&p[..d], &q[..d]));
    out
}

pub(crate) fn inverse_flat(p: &[f64]) -> Vec<f64> {
    p.iter().map(|v| -v).collect()
}

pub(crate) fn gauge_flat(p: &[f64]) -> f64 {
    let d = p.len() - 1;
    let z2: f64 = p[..d].iter().map(|v| v * v).sum();
    (z2 * z2 + p[d] * p[d]).sqrt().sqrt()
}

/// `d_K(p, q) = ‖p⁻¹ q‖` on flat vectors.
pub(crate) fn koranyi_flat(p: &[f64], q: &[f64]) -> f64 {
    let d = p.len() - 1;
    let mut dz2 = 0.0;
    for i in 0..d {
        dz2 += (q[i] - p[i]) * (q[i] - p[i]);
    }
    // p⁻¹ q = (q_z − p_z, q_t − p_t + 2 ω(−p_z, q_z))
    let dt = q[d] - p[d] - 2.0 * symplectic(&p[..d], &q[..d]);
    (dz2 * dz2 + dt * dt).sqrt().sqrt()
}

fn same_n(p: &HPoint, q: &HPoint) -> Result<()> {
    if p.z.len() != q.z.len() {
        return Err(contract(format!(
            "Heisenberg dimension mismatch: H^{} vs H^{}",
            p.n(),
            q.n()
        )));
    }
    Ok(())
}

pub fn h_group(p: &HPoint, q: &HPoint) -> Result<HPoint> {
    same_n(p, q)?;
    HPoint::from_slice(&group_flat(&p.to_vec(), &q.to_vec()))
}

pub fn h_inverse(p: &HPoint) -> HPoint {
    HPoint {
        z: p.z.iter().map(|v| -v).collect(),
        t: -p.t,
    }
}

pub fn h_dilate(p: &HPoint, r: f64) -> Result<HPoint> {
    if !(r > 0.0) {
        return Err(contract(format!("dilation factor must be positive, got {r}")));
    }
    Ok(HPoint {
        z: p.z.iter().map(|v| r * v).collect(),
        t: r * r * p.t,
    })
}

pub fn gauge(p: &HPoint) -> f64 {
    gauge_flat(&p.to_vec())
}

pub fn koranyi_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    same_n(p, q)?;
    Ok(koranyi_flat(&p.to_vec(), &q.to_vec()))
}

/// The Korányi metric on flat `[z..., t]` points.
#[derive(Debug, Clone, Copy, Default)]
pub struct Koranyi;

impl Metric for Koranyi {
    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        koranyi_flat(p, q)
    }

    fn kind(&self) -> TargetKind {
        TargetKind::Heisenberg
    }
}

/// Human-readable statement of the conventions above.
pub fn conventions() -> BTreeMap<String, String> {
    [
        ("coordinates", "(x_1..x_n, y_1..y_n, t)"),
        ("group_law", "(z,t)(w,s) = (z+w, t+s+2*sum(y_i u_i - x_i v_i))"),
        ("frame", "X_i = d/dx_i + 2 y_i d/dt, Y_i = d/dy_i - 2 x_i d/dt"),
        ("dilation", "delta_r(z,t) = (r z, r^2 t)"),
        ("gauge", "|(z,t)| = (|z|^4 + t^2)^(1/4)"),
        ("koranyi_distance", "d_K(p,q) = |p^-1 q|"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}
