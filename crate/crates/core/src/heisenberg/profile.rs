use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::koranyi_flat;
use crate::error::{contract, Result};
use crate::jets::{stratify_critical, JetOptions, Stratification};
use crate::metric_core::{SampledMap, TargetKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub scale: f64,
    pub max_ratio: f64,
}

/// `max d_K(f(x), f(y)) / |x − y|` over axis pairs at distance `s = 2^i h`,
/// for `i < levels`.
pub fn h_lipschitz_profile(f: &SampledMap, levels: usize) -> Result<Vec<ProfileRow>> {
    if f.target() != TargetKind::Heisenberg {
        return Err(contract("profile needs a map into the Heisenberg group"));
    }
    (0..levels)
        .map(|level| {
            let stride = 1i64 << level;
            let scale = f.h() * stride as f64;
            let max_ratio = (0..f.len())
                .into_par_iter()
                .map(|i| {
                    let mut idx = f.grid_index(i).to_vec();
                    let mut best = 0.0f64;
                    for a in 0..idx.len() {
                        idx[a] += stride;
                        if let Some(j) = f.position(&idx) {
                            best = best.max(koranyi_flat(f.value(i), f.value(j)) / scale);
                        }
                        idx[a] -= stride;
                    }
                    best
                })
                .reduce(|| 0.0, f64::max);
            Ok(ProfileRow { scale, max_ratio })
        })
        .collect()
}

/// CSV with columns `scale,max_ratio`.
pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowRankCheck {
    /// Largest resolved jet rank, `None` when nothing resolved.
    pub max_rank: Option<usize>,
    pub resolved: usize,
    pub unresolved: usize,
    pub stratification: Stratification,
}

/// Jets of `f` read in the identity chart `H^n → R^{2n+1}`.
pub fn low_rank_check(f: &SampledMap, opts: &JetOptions) -> Result<LowRankCheck> {
    let stratification = stratify_critical(f, opts)?;
    Ok(LowRankCheck {
        max_rank: stratification.max_rank(),
        resolved: stratification.resolved(),
        unresolved: stratification.unresolved.len(),
        stratification,
    })
}
