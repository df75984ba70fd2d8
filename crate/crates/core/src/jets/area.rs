use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{all_jets, jacobian_factor, JetOptions};
use crate::error::{contract, Error, Result};
use crate::metric_core::{box_indices, SampledMap};

/// Where the Jacobian on the left-hand side comes from.
pub enum JacobianSource<'a> {
    /// Exact derivative `x ↦ Dg(x)` (rows are component gradients).
    Analytic(&'a (dyn Fn(&[f64]) -> DMatrix<f64> + Sync)),
    /// Least-squares jets of the sampled map.
    Jets(JetOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub unresolved: usize,
}

/// Compares `∫_E |J_g|` with `∫ N_g(y, E) dH^k(y)` for a sampled map into
/// `R^m`.
///
/// The left side is a trapezoid sum over the grid. The right side uses the
/// piecewise-linear interpolant on the Kuhn triangulation of every complete
/// grid cell: for `m = k` each image simplex is rasterized on a target grid
/// of spacing `target_resolution` (one jittered point per cell) and every
/// covered point is counted once per simplex; for `m > k` the simplex
/// k-volumes are summed.
pub fn area_formula_check(
    g: &SampledMap,
    source: &JacobianSource<'_>,
    target_resolution: f64,
) -> Result<AreaCheck> {
    let k = g.k();
    let m = g.target_dim();
    if m < k {
        return Err(contract(format!(
            "target dimension {m} below domain dimension {k}"
        )));
    }
    if !(target_resolution > 0.0) {
        return Err(contract("target resolution must be positive"));
    }
    let h = g.h();
    let jac: Vec<Option<f64>> = match source {
        JacobianSource::Analytic(d) => (0..g.len())
            .into_par_iter()
            .map(|i| Some(jacobian_factor(&d(&g.point(i)))))
            .collect(),
        JacobianSource::Jets(opts) => all_jets(g, opts)
            .into_iter()
            .map(|j| match j {
                Ok(j) if j.residual <= opts.residual_threshold => Some(j.jacobian()),
                _ => None,
            })
            .collect(),
    };
    let unresolved = jac.iter().filter(|j| j.is_none()).count();
    if unresolved as f64 > 0.01 * g.len() as f64 {
        return Err(Error::UnreliableCheck {
            unresolved,
            total: g.len(),
        });
    }
    let lhs: f64 = (0..g.len())
        .map(|i| jac[i].unwrap_or(0.0) * trapezoid_weight(g, i))
        .sum::<f64>()
        * h.powi(k as i32);

    let simplices = kuhn_simplices(k);
    let corners = box_indices(&vec![0; k], &vec![1; k]);
    // per-cell values are collected first so the sum order is fixed
    let per_cell: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let base = g.grid_index(i);
            let mut cell = Vec::with_capacity(corners.len());
            for c in &corners {
                let idx: Vec<i64> = base.iter().zip(c).map(|(b, o)| b + o).collect();
                match g.position(&idx) {
                    Some(p) => cell.push(g.value(p)),
                    None => return 0.0,
                }
            }
            simplices
                .iter()
                .map(|s| {
                    let verts: Vec<&[f64]> = s.iter().map(|&v| cell[v]).collect();
                    if m == k {
                        rasterized_volume(&verts, target_resolution)
                    } else {
                        simplex_volume(&verts)
                    }
                })
                .sum::<f64>()
        })
        .collect();
    let rhs: f64 = per_cell.iter().sum();
    Ok(AreaCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs() / lhs.max(1e-12),
        unresolved,
    })
}

/// Product over axes of half the number of present axis neighbours.
fn trapezoid_weight(g: &SampledMap, i: usize) -> f64 {
    let idx = g.grid_index(i);
    let mut w = 1.0;
    let mut probe = idx.to_vec();
    for a in 0..idx.len() {
        let mut present = 0;
        for s in [-1, 1] {
            probe[a] = idx[a] + s;
            if g.position(&probe).is_some() {
                present += 1;
            }
        }
        probe[a] = idx[a];
        w *= 0.5 * present as f64;
    }
    w
}

/// Vertices of the `k!` Kuhn simplices of the unit cube, as positions in the
/// `box_indices(0, 1)` corner ordering (last coordinate fastest).
fn kuhn_simplices(k: usize) -> Vec<Vec<usize>> {
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..k)
                    .filter(|a| !p.contains(a))
                    .map(|a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    perms
        .into_iter()
        .map(|p| {
            let mut corner = vec![0usize; k];
            let code = |c: &[usize]| c.iter().fold(0, |acc, &b| 2 * acc + b);
            let mut verts = vec![code(&corner)];
            for a in p {
                corner[a] = 1;
                verts.push(code(&corner));
            }
            verts
        })
        .collect()
}

fn edge_matrix(verts: &[&[f64]]) -> DMatrix<f64> {
    let m = verts[0].len();
    let k = verts.len() - 1;
    DMatrix::from_fn(m, k, |r, c| verts[c + 1][r] - verts[0][r])
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// k-volume of a simplex with `k + 1` vertices in `R^m`.
fn simplex_volume(verts: &[&[f64]]) -> f64 {
    let k = verts.len() - 1;
    jacobian_factor(&edge_matrix(verts)) / factorial(k)
}

/// Deterministic point of target cell `node`, uniform in the cell over the
/// hash. One jittered point per cell makes the count an unbiased estimate of
/// the simplex volume for any simplex, with no aliasing against the domain
/// grid.
fn cell_jitter(node: &[i64], axis: usize) -> f64 {
    let mut z = 0x9e37_79b9_7f4a_7c15u64 ^ axis as u64;
    for &c in node {
        z = (z ^ c as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z ^= z >> 31;
    }
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// `δ^k` times the number of jittered target points strictly inside a
/// full-dimensional simplex.
fn rasterized_volume(verts: &[&[f64]], delta: f64) -> f64 {
    let k = verts.len() - 1;
    let e = edge_matrix(verts);
    let Some(inv) = e.clone().try_inverse() else {
        return 0.0;
    };
    let lo: Vec<i64> = (0..k)
        .map(|a| {
            let m = verts.iter().map(|v| v[a]).fold(f64::INFINITY, f64::min);
            (m / delta).floor() as i64
        })
        .collect();
    let hi: Vec<i64> = (0..k)
        .map(|a| {
            let m = verts.iter().map(|v| v[a]).fold(f64::NEG_INFINITY, f64::max);
            (m / delta).floor() as i64
        })
        .collect();
    let mut count = 0usize;
    let mut y = vec![0.0; k];
    for node in box_indices(&lo, &hi) {
        for a in 0..k {
            y[a] = (node[a] as f64 + cell_jitter(&node, a)) * delta - verts[0][a];
        }
        let mut sum = 0.0;
        let mut inside = true;
        for r in 0..k {
            let l: f64 = (0..k).map(|c| inv[(r, c)] * y[c]).sum();
            if !(l > 0.0) {
                inside = false;
                break;
            }
            sum += l;
        }
        if inside && sum < 1.0 {
            count += 1;
        }
    }
    count as f64 * delta.powi(k as i32)
}
