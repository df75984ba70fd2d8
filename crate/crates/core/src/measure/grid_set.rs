use std::collections::HashSet;

use crate::error::{contract, Result};

/// A union of grid cells `Π [origin_a + i_a h, origin_a + (i_a + 1) h]`.
#[derive(Debug, Clone)]
pub struct GridSet {
    k: usize,
    h: f64,
    origin: Vec<f64>,
    cells: Vec<Vec<i64>>,
    lookup: HashSet<Vec<i64>>,
}

impl GridSet {
    pub fn new(k: usize, h: f64, origin: Vec<f64>, cells: Vec<Vec<i64>>) -> Result<Self> {
        if k == 0 || !(h > 0.0) || origin.len() != k {
            return Err(contract(
                "grid set needs k >= 1, h > 0 and a k-dimensional origin",
            ));
        }
        if cells.iter().any(|c| c.len() != k) {
            return Err(contract("grid cell index of wrong dimension"));
        }
        let lookup: HashSet<Vec<i64>> = cells.iter().cloned().collect();
        let mut cells: Vec<Vec<i64>> = lookup.iter().cloned().collect();
        cells.sort();
        Ok(Self {
            k,
            h,
            origin,
            cells,
            lookup,
        })
    }

    pub fn empty(k: usize, h: f64) -> Self {
        Self::new(k, h, vec![0.0; k], Vec::new()).expect("valid empty grid set")
    }

    /// Cells of the box `lo..=hi` (cell indices) whose centers satisfy `keep`.
    pub fn from_predicate<F>(h: f64, origin: Vec<f64>, lo: &[i64], hi: &[i64], keep: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool,
    {
        let k = lo.len();
        let mut cells = Vec::new();
        for idx in crate::metric_core::box_indices(lo, hi) {
            let c: Vec<f64> = idx
                .iter()
                .zip(&origin)
                .map(|(&i, o)| o + (i as f64 + 0.5) * h)
                .collect();
            if keep(&c) {
                cells.push(idx);
            }
        }
        Self::new(k, h, origin, cells)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn cells(&self) -> &[Vec<i64>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Lebesgue measure of the union.
    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.h.powi(self.k as i32)
    }

    pub fn contains_cell(&self, cell: &[i64]) -> bool {
        self.lookup.contains(cell)
    }

    pub fn cell_of(&self, p: &[f64]) -> Vec<i64> {
        p.iter()
            .zip(&self.origin)
            .map(|(x, o)| ((x - o) / self.h).floor() as i64)
            .collect()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.lookup.contains(&self.cell_of(p))
    }

    pub fn cell_lo(&self, cell: &[i64]) -> Vec<f64> {
        cell.iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + i as f64 * self.h)
            .collect()
    }

    pub fn cell_center(&self, cell: &[i64]) -> Vec<f64> {
        cell.iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + (i as f64 + 0.5) * self.h)
            .collect()
    }
}
