use super::cell_kernel_integral;
use crate::error::{contract, Error, Result};
use crate::metric_core::{box_indices, euclidean_distance, SampledMap};

/// Both sides of `|u(x) - u_D| <= (diam D)^k / (k H^k(D)) ∫_D |∇u(y)| |x-y|^{1-k} dy`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PoincareBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl PoincareBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + slack) + 1e-12
    }
}

/// Evaluates the Poincaré-type deviation bound for nodal samples of `u` on a
/// full axis-aligned grid box `D`.
///
/// `u_D` uses the tensor trapezoid rule, `∇u` central differences at cell
/// midpoints, and `u(x)` multilinear interpolation.
pub fn poincare_deviation(u: &SampledMap, x: &[f64]) -> Result<PoincareBound> {
    let k = u.k();
    if u.target_dim() != 1 {
        return Err(contract("Poincaré deviation needs a scalar function"));
    }
    if x.len() != k {
        return Err(contract("query point dimension mismatch"));
    }
    let (lo, hi) = bounding_box(u);
    let expected: usize = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).product();
    if expected != u.len() || lo.iter().zip(&hi).any(|(a, b)| a == b) {
        return Err(Error::UnsupportedDomain(
            "samples do not fill an axis-aligned box with nonempty interior".into(),
        ));
    }
    let h = u.h();
    let dlo: Vec<f64> = lo.iter().map(|&i| i as f64 * h).collect();
    let dhi: Vec<f64> = hi.iter().map(|&i| i as f64 * h).collect();
    if x.iter()
        .zip(dlo.iter().zip(&dhi))
        .any(|(xi, (a, b))| xi < a || xi > b)
    {
        return Err(contract("query point outside the domain box"));
    }
    let at = |ix: &[i64]| u.value(u.position(ix).expect("full box"))[0];

    let measure: f64 = dlo.iter().zip(&dhi).map(|(a, b)| b - a).product();
    let diam = euclidean_distance(&dlo, &dhi);

    let mut integral_u = 0.0;
    for ix in box_indices(&lo, &hi) {
        let w: f64 = ix
            .iter()
            .zip(lo.iter().zip(&hi))
            .map(|(i, (a, b))| if i == a || i == b { 0.5 * h } else { h })
            .product();
        integral_u += w * at(&ix);
    }
    let mean = integral_u / measure;

    let ux = interpolate(&at, &lo, &hi, h, x);

    let cell_hi: Vec<i64> = hi.iter().map(|b| b - 1).collect();
    let cell_vol = h.powi(k as i32);
    let mut weighted = 0.0;
    let mut corner = vec![0_i64; k];
    for cell in box_indices(&lo, &cell_hi) {
        let mut grad = vec![0.0; k];
        for (axis, g) in grad.iter_mut().enumerate() {
            let mut acc = 0.0;
            let edges = 1usize << (k - 1);
            for mask in 0..edges {
                let mut bit = 0;
                for a in 0..k {
                    if a == axis {
                        corner[a] = cell[a];
                    } else {
                        corner[a] = cell[a] + ((mask >> bit) & 1) as i64;
                        bit += 1;
                    }
                }
                let start = at(&corner);
                corner[axis] += 1;
                acc += (at(&corner) - start) / h;
            }
            *g = acc / edges as f64;
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            continue;
        }
        let clo: Vec<f64> = cell.iter().map(|&i| i as f64 * h).collect();
        let chi: Vec<f64> = clo.iter().map(|c| c + h).collect();
        let touches = clo.iter().zip(&chi).zip(x).all(|((a, b), xi)| xi >= a && xi <= b);
        let kernel = if touches || k == 1 {
            cell_kernel_integral(&clo, &chi, x)
        } else {
            let c: Vec<f64> = clo.iter().map(|c| c + 0.5 * h).collect();
            cell_vol * euclidean_distance(&c, x).powi(1 - k as i32)
        };
        weighted += gnorm * kernel;
    }

    Ok(PoincareBound {
        lhs: (ux - mean).abs(),
        rhs: diam.powi(k as i32) / (k as f64 * measure) * weighted,
    })
}

fn bounding_box(u: &SampledMap) -> (Vec<i64>, Vec<i64>) {
    let k = u.k();
    let mut lo = vec![i64::MAX; k];
    let mut hi = vec![i64::MIN; k];
    for ix in u.indices() {
        for a in 0..k {
            lo[a] = lo[a].min(ix[a]);
            hi[a] = hi[a].max(ix[a]);
        }
    }
    (lo, hi)
}

fn interpolate(at: &dyn Fn(&[i64]) -> f64, lo: &[i64], hi: &[i64], h: f64, x: &[f64]) -> f64 {
    let k = x.len();
    let mut base = vec![0_i64; k];
    let mut frac = vec![0.0; k];
    for a in 0..k {
        let s = x[a] / h;
        let mut b = s.floor() as i64;
        if b >= hi[a] {
            b = hi[a] - 1;
        }
        b = b.max(lo[a]);
        base[a] = b;
        frac[a] = (s - b as f64).clamp(0.0, 1.0);
    }
    let mut total = 0.0;
    let mut corner = vec![0_i64; k];
    for mask in 0..(1usize << k) {
        let mut w = 1.0;
        for a in 0..k {
            let up = (mask >> a) & 1 == 1;
            corner[a] = base[a] + up as i64;
            w *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        if w != 0.0 {
            total += w * at(&corner);
        }
    }
    total
}
