//! Small numerical helpers shared by the experiments: log-log regression,
//! seeded random streams, and a few closed-form constants.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};

/// Least-squares fit `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(contract(format!(
            "line fit needs two or more paired samples (got {} and {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(contract("line fit with constant abscissa"));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Slope of `log y` against `log x`. All values must be positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(contract("log-log fit requires positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    Ok(fit_line(&lx, &ly)?.slope)
}

/// Deterministic stream `stream` derived from a root seed.
///
/// Every Monte Carlo loop that may run in parallel draws sample `i` from
/// `rng_stream(root, i)`, so results do not depend on scheduling.
pub fn rng_stream(root: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng
}

/// Gamma function at `n / 2` for a positive integer `n`.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0, "gamma_half needs n >= 1");
    let (mut value, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = n as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Lebesgue measure of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half(k + 2)
}

/// Surface measure of the unit sphere `S^{k-1}` in `R^k`.
pub fn unit_sphere_area(k: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half(k)
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let mid = values.len() / 2;
    if values.len().is_multiple_of(2) {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}
