use super::GridSet;
use crate::error::{contract, Result};
use crate::stats::{unit_ball_volume, unit_sphere_area};

/// `C(k)` with `∫_B |x - y|^{1-k} dy = C(k) H^k(B)^{1/k}` for a ball `B`
/// centred at `x`. Equals `2√π` for `k = 2`.
pub fn riesz_ball_constant(k: usize) -> f64 {
    unit_sphere_area(k) / unit_ball_volume(k).powf(1.0 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RieszPotential {
    pub value: f64,
    /// Set when at least one cell touching `x` used the cell-averaged kernel.
    pub regularized: bool,
}

/// Midpoint quadrature of `∫_E |x - y|^{1-k} dy` over a cell union.
///
/// Cells whose closure contains `x` are integrated exactly (`k <= 2`) or by
/// local refinement (`k >= 3`).
pub fn riesz_potential(e: &GridSet, x: &[f64]) -> Result<RieszPotential> {
    let k = e.k();
    if x.len() != k {
        return Err(contract(format!(
            "query point has dimension {}, set has {k}",
            x.len()
        )));
    }
    let h = e.h();
    let vol = h.powi(k as i32);
    let mut value = 0.0;
    let mut regularized = false;
    for cell in e.cells() {
        let lo = e.cell_lo(cell);
        let touches = lo.iter().zip(x).all(|(l, xi)| *xi >= *l && *xi <= l + h);
        if touches {
            let hi: Vec<f64> = lo.iter().map(|l| l + h).collect();
            value += cell_kernel_integral(&lo, &hi, x);
            regularized = true;
        } else if k == 1 {
            value += vol;
        } else {
            let c = e.cell_center(cell);
            let r = crate::metric_core::euclidean_distance(&c, x);
            value += vol * r.powi(1 - k as i32);
        }
    }
    Ok(RieszPotential { value, regularized })
}

/// `∫_{[lo, hi]} |x - y|^{1-k} dy` for an axis-aligned box in `R^k`.
pub fn cell_kernel_integral(lo: &[f64], hi: &[f64], x: &[f64]) -> f64 {
    match lo.len() {
        1 => hi[0] - lo[0],
        2 => {
            let u0 = lo[0] - x[0];
            let u1 = hi[0] - x[0];
            let v0 = lo[1] - x[1];
            let v1 = hi[1] - x[1];
            inverse_distance_primitive(u1, v1)
                - inverse_distance_primitive(u0, v1)
                - inverse_distance_primitive(u1, v0)
                + inverse_distance_primitive(u0, v0)
        }
        _ => extrapolated_kernel_integral(lo, hi, x, 7),
    }
}

/// `a ln(b + sqrt(a^2 + b^2))`, continuous through `a = 0`.
fn log_term(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let r = a.hypot(b);
    let s = if b >= 0.0 { b + r } else { a * a / (r - b) };
    a * s.ln()
}

/// Mixed primitive of `1 / sqrt(u^2 + v^2)`.
fn inverse_distance_primitive(u: f64, v: f64) -> f64 {
    log_term(u, v) + log_term(v, u)
}

/// Leaves containing `x` carry an error linear in their size, so two
/// refinement depths are combined to cancel it.
fn extrapolated_kernel_integral(lo: &[f64], hi: &[f64], x: &[f64], depth: u32) -> f64 {
    2.0 * refined_kernel_integral(lo, hi, x, depth) - refined_kernel_integral(lo, hi, x, depth - 1)
}

fn refined_kernel_integral(lo: &[f64], hi: &[f64], x: &[f64], depth: u32) -> f64 {
    let k = lo.len();
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let size = lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let gap = lo
        .iter()
        .zip(hi)
        .zip(x)
        .map(|((a, b), xi)| (a - xi).max(xi - b).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    if gap > 2.0 * size {
        let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        return vol * crate::metric_core::euclidean_distance(&c, x).powi(1 - k as i32);
    }
    if depth == 0 {
        if gap == 0.0 {
            // Equal-volume ball centred at x.
            return riesz_ball_constant(k) * vol.powf(1.0 / k as f64);
        }
        let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        return vol * crate::metric_core::euclidean_distance(&c, x).powi(1 - k as i32);
    }
    let mut total = 0.0;
    for mask in 0..(1usize << k) {
        let mut clo = lo.to_vec();
        let mut chi = hi.to_vec();
        for a in 0..k {
            let mid = 0.5 * (lo[a] + hi[a]);
            if mask >> a & 1 == 0 {
                chi[a] = mid;
            } else {
                clo[a] = mid;
            }
        }
        total += refined_kernel_integral(&clo, &chi, x, depth - 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Polar quadrature around x: `∫_box dy/|x-y| = ∫_0^{2π} δ(θ) dθ` when x
    /// lies in the box, δ the distance to the boundary along θ.
    fn polar_oracle(lo: [f64; 2], hi: [f64; 2], x: [f64; 2]) -> f64 {
        let n = 200_000;
        let mut sum = 0.0;
        for i in 0..n {
            let th = (i as f64 + 0.5) / n as f64 * 2.0 * PI;
            let (c, s) = (th.cos(), th.sin());
            let mut delta = f64::INFINITY;
            for (d, l, h, xi) in [(c, lo[0], hi[0], x[0]), (s, lo[1], hi[1], x[1])] {
                if d > 0.0 {
                    delta = delta.min((h - xi) / d);
                } else if d < 0.0 {
                    delta = delta.min((l - xi) / d);
                }
            }
            sum += delta;
        }
        sum * 2.0 * PI / n as f64
    }

    #[test]
    fn ball_constant_values() {
        assert!((riesz_ball_constant(2) - 2.0 * PI.sqrt()).abs() < 1e-14);
        assert!((riesz_ball_constant(1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_cell_integral_matches_polar_oracle() {
        for (lo, hi, x) in [
            ([0.0, 0.0], [1.0, 1.0], [0.5, 0.5]),
            ([0.0, 0.0], [1.0, 1.0], [1.0, 0.5]),
            ([0.0, 0.0], [2.0, 0.5], [0.0, 0.0]),
            ([-1.0, -0.3], [0.2, 0.4], [0.1, 0.35]),
        ] {
            let got = cell_kernel_integral(&lo, &hi, &x);
            let want = polar_oracle(lo, hi, x);
            assert!((got - want).abs() < 1e-5 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn exact_cell_integral_far_from_box() {
        // Compare with fine midpoint rule when x is outside.
        let (lo, hi, x) = ([0.0, 0.0], [1.0, 1.0], [2.0, -1.0]);
        let n = 1000;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let y = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                sum += 1.0 / ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt();
            }
        }
        sum /= (n * n) as f64;
        assert!((cell_kernel_integral(&lo, &hi, &x) - sum).abs() < 1e-7);
    }

    #[test]
    fn empty_set_potential() {
        let e = GridSet::empty(2, 0.1);
        let p = riesz_potential(&e, &[0.0, 0.0]).unwrap();
        assert_eq!(p.value, 0.0);
        assert!(!p.regularized);
    }

    #[test]
    fn unit_disk_potential() {
        let h = 0.005;
        let n = (1.0 / h) as i64 + 1;
        let e = GridSet::from_predicate(h, vec![0.0, 0.0], &[-n, -n], &[n, n], |c| {
            c[0] * c[0] + c[1] * c[1] <= 1.0
        })
        .unwrap();
        let p = riesz_potential(&e, &[0.0, 0.0]).unwrap();
        assert!(p.regularized);
        assert!((p.value - 2.0 * PI).abs() < 0.005 * 2.0 * PI, "{}", p.value);
    }

    #[test]
    fn unit_interval_potential() {
        let e = GridSet::from_predicate(0.01, vec![0.0], &[0], &[99], |_| true).unwrap();
        let p = riesz_potential(&e, &[0.0]).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refined_3d_cube_matches_reference() {
        // unit cube centred at x; reference 8 ∫ 0.5/|ω|_∞ dω over an octant
        // of the sphere (scipy dblquad)
        let v = cell_kernel_integral(&[-0.5; 3], &[0.5; 3], &[0.0; 3]);
        assert!((v - 7.6741246069573075).abs() < 0.01 * 7.674, "{v}");
        assert!(v < riesz_ball_constant(3));
    }
}
