//! Metric-space abstractions shared by every other module.
//!
//! Target points are plain coordinate slices; the [`Metric`] implementation
//! decides how to read them (Euclidean vector, truncated sup-norm sequence,
//! Heisenberg element `[z.., t]`, or a point of a Carnot–Carathéodory space).

mod extension;
mod projection;
mod sampled_map;

pub use extension::{mcshane_extend, McShane};
pub use projection::{
    image_landmarks, kuratowski_defect, kuratowski_embed, landmark_projection, LandmarkSet,
};
pub use sampled_map::{box_indices, SampledMap, SampledMapDocument};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Tag identifying how target coordinates are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Euclidean,
    Linf,
    Heisenberg,
    Cc,
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TargetKind::Euclidean => "euclidean",
            TargetKind::Linf => "linf",
            TargetKind::Heisenberg => "heisenberg",
            TargetKind::Cc => "cc",
        };
        f.write_str(s)
    }
}

/// A distance oracle on some point representation.
pub trait Metric: Send + Sync {
    fn distance(&self, p: &[f64], q: &[f64]) -> f64;
    fn kind(&self) -> TargetKind;
}

impl<M: Metric + ?Sized> Metric for &M {
    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        (**self).distance(p, q)
    }
    fn kind(&self) -> TargetKind {
        (**self).kind()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        euclidean_distance(p, q)
    }
    fn kind(&self) -> TargetKind {
        TargetKind::Euclidean
    }
}

/// Sup-norm distance on `ℓ∞_N`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SupNorm;

impl Metric for SupNorm {
    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        sup_distance(p, q)
    }
    fn kind(&self) -> TargetKind {
        TargetKind::Linf
    }
}

/// `max_i |u_i - v_i|`, checked.
pub fn linf_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(contract(format!(
            "length mismatch in sup-norm distance: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(contract("sup-norm distance of empty sequences"));
    }
    Ok(sup_distance(u, v))
}

pub(crate) fn sup_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

pub(crate) fn euclidean_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
