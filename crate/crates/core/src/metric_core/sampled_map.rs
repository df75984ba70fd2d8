use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Metric, TargetKind};
use crate::error::{contract, Error, Result};

/// A map sampled on an `h`-grid of a domain set `E ⊂ R^k`.
///
/// Domain point `i` is `indices[i] * h`; integer indices keep membership and
/// slicing exact. The Lipschitz estimate is the largest ratio
/// `d(f(x), f(y)) / |x - y|` over grid-adjacent pairs.
#[derive(Debug, Clone)]
pub struct SampledMap {
    k: usize,
    h: f64,
    indices: Vec<Vec<i64>>,
    values: Vec<Vec<f64>>,
    target: TargetKind,
    lipschitz: f64,
    lookup: HashMap<Vec<i64>, usize>,
}

/// JSON wire form `{k, h, indices, values, target}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SampledMapDocument {
    pub k: usize,
    pub h: f64,
    pub indices: Vec<Vec<i64>>,
    pub values: Vec<Vec<f64>>,
    pub target: TargetKind,
}

/// All integer points of the box `lo..=hi`, last coordinate fastest.
pub fn box_indices(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    assert_eq!(lo.len(), hi.len());
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.to_vec();
    loop {
        out.push(cur.clone());
        let mut axis = lo.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cur[axis] < hi[axis] {
                cur[axis] += 1;
                cur[axis + 1..].copy_from_slice(&lo[axis + 1..]);
                break;
            }
        }
    }
}

impl SampledMap {
    pub fn new(
        k: usize,
        h: f64,
        indices: Vec<Vec<i64>>,
        values: Vec<Vec<f64>>,
        metric: &dyn Metric,
    ) -> Result<Self> {
        if k == 0 {
            return Err(contract("domain dimension must be positive"));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(contract(format!("grid spacing must be positive, got {h}")));
        }
        if indices.len() != values.len() {
            return Err(contract(format!(
                "{} domain points but {} values",
                indices.len(),
                values.len()
            )));
        }
        if let Some(bad) = indices.iter().find(|ix| ix.len() != k) {
            return Err(contract(format!("grid index {bad:?} is not {k}-dimensional")));
        }
        if let Some(first) = values.first() {
            let dim = first.len();
            if values.iter().any(|v| v.len() != dim) {
                return Err(contract("target values have differing dimensions"));
            }
            if values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(contract("target values must be finite"));
            }
        }
        let mut lookup = HashMap::with_capacity(indices.len());
        for (i, ix) in indices.iter().enumerate() {
            if lookup.insert(ix.clone(), i).is_some() {
                return Err(contract(format!("duplicate domain point {ix:?}")));
            }
        }
        let mut map = SampledMap {
            k,
            h,
            indices,
            values,
            target: metric.kind(),
            lipschitz: 0.0,
            lookup,
        };
        map.lipschitz = map.estimate_lipschitz(metric);
        Ok(map)
    }

    /// Samples `f` at every listed grid index.
    pub fn from_fn<F>(k: usize, h: f64, indices: Vec<Vec<i64>>, metric: &dyn Metric, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let values = indices
            .iter()
            .map(|ix| {
                let x: Vec<f64> = ix.iter().map(|&i| i as f64 * h).collect();
                f(&x)
            })
            .collect();
        Self::new(k, h, indices, values, metric)
    }

    /// Samples `f` on the full grid box `lo..=hi` (in index units).
    pub fn on_box<F>(lo: &[i64], hi: &[i64], h: f64, metric: &dyn Metric, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        Self::from_fn(lo.len(), h, box_indices(lo, hi), metric, f)
    }

    /// Same grid, new values, new target metric.
    pub fn with_values(&self, values: Vec<Vec<f64>>, metric: &dyn Metric) -> Result<Self> {
        Self::new(self.k, self.h, self.indices.clone(), values, metric)
    }

    fn estimate_lipschitz(&self, metric: &dyn Metric) -> f64 {
        let mut best = 0.0_f64;
        let mut probe = vec![0_i64; self.k];
        for (i, ix) in self.indices.iter().enumerate() {
            probe.copy_from_slice(ix);
            for axis in 0..self.k {
                probe[axis] += 1;
                if let Some(&j) = self.lookup.get(&probe) {
                    let d = metric.distance(&self.values[i], &self.values[j]);
                    best = best.max(d / self.h);
                }
                probe[axis] -= 1;
            }
        }
        best
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn target(&self) -> TargetKind {
        self.target
    }

    pub fn target_dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn indices(&self) -> &[Vec<i64>] {
        &self.indices
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn grid_index(&self, i: usize) -> &[i64] {
        &self.indices[i]
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.indices[i].iter().map(|&a| a as f64 * self.h).collect()
    }

    pub fn position(&self, index: &[i64]) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    /// Grid-adjacent pairs `(i, j)` with `j` one step above `i` along some axis.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut probe = vec![0_i64; self.k];
        for (i, ix) in self.indices.iter().enumerate() {
            probe.copy_from_slice(ix);
            for axis in 0..self.k {
                probe[axis] += 1;
                if let Some(&j) = self.lookup.get(&probe) {
                    out.push((i, j));
                }
                probe[axis] -= 1;
            }
        }
        out
    }

    pub fn to_document(&self) -> SampledMapDocument {
        SampledMapDocument {
            k: self.k,
            h: self.h,
            indices: self.indices.clone(),
            values: self.values.clone(),
            target: self.target,
        }
    }

    pub fn from_document(doc: SampledMapDocument, metric: &dyn Metric) -> Result<Self> {
        if doc.target != metric.kind() {
            return Err(Error::InconsistentData(format!(
                "document target `{}` does not match metric `{}`",
                doc.target,
                metric.kind()
            )));
        }
        Self::new(doc.k, doc.h, doc.indices, doc.values, metric)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(json: &str, metric: &dyn Metric) -> Result<Self> {
        Self::from_document(serde_json::from_str(json)?, metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::{Euclidean, SupNorm};

    #[test]
    fn box_enumeration() {
        let pts = box_indices(&[0, -1], &[1, 1]);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![0, -1]);
        assert_eq!(pts[5], vec![1, 1]);
        assert!(box_indices(&[1], &[0]).is_empty());
    }

    #[test]
    fn lipschitz_of_linear_map() {
        let f = SampledMap::on_box(&[0, 0], &[10, 10], 0.1, &Euclidean, |x| {
            vec![3.0 * x[0], -2.0 * x[1]]
        })
        .unwrap();
        assert!((f.lipschitz() - 3.0).abs() < 1e-12);
        assert_eq!(f.len(), 121);
        assert_eq!(f.adjacent_pairs().len(), 2 * 10 * 11);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SampledMap::new(1, 0.1, vec![vec![0], vec![0]], vec![vec![0.0]; 2], &Euclidean).is_err());
        assert!(SampledMap::new(1, 0.1, vec![vec![0]], vec![], &Euclidean).is_err());
        assert!(SampledMap::new(1, -1.0, vec![vec![0]], vec![vec![0.0]], &Euclidean).is_err());
        assert!(SampledMap::new(2, 0.1, vec![vec![0]], vec![vec![0.0]], &Euclidean).is_err());
    }

    #[test]
    fn json_round_trip_checks_target() {
        let f = SampledMap::on_box(&[0], &[4], 0.25, &SupNorm, |x| vec![x[0], 1.0]).unwrap();
        let json = f.to_json().unwrap();
        assert!(json.contains("\"target\":\"linf\""));
        let g = SampledMap::from_json(&json, &SupNorm).unwrap();
        assert_eq!(g.to_document(), f.to_document());
        assert!(SampledMap::from_json(&json, &Euclidean).is_err());
    }
}
