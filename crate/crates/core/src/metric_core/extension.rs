use super::euclidean_distance;
use crate::error::{contract, Error, Result};

const LIPSCHITZ_SLACK: f64 = 1e-9;

/// McShane extension `x ↦ min_{y ∈ E} (f(y) + L |x - y|)` of an
/// `L`-Lipschitz scalar function known on a finite set `E ⊂ R^k`.
#[derive(Debug, Clone)]
pub struct McShane {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    lipschitz: f64,
}

impl McShane {
    /// Checks the Lipschitz condition on every pair of `E`.
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>, lipschitz: f64) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(contract(format!(
                "McShane extension needs matching nonempty data ({} points, {} values)",
                points.len(),
                values.len()
            )));
        }
        if !(lipschitz >= 0.0) {
            return Err(contract("Lipschitz constant must be nonnegative"));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(contract("points of E have differing dimensions"));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let dx = euclidean_distance(&points[i], &points[j]);
                let df = (values[i] - values[j]).abs();
                if df > lipschitz * dx + LIPSCHITZ_SLACK {
                    return Err(Error::InconsistentData(format!(
                        "|f(x_{i}) - f(x_{j})| = {df:.6e} exceeds L|x_{i} - x_{j}| = {:.6e}",
                        lipschitz * dx
                    )));
                }
            }
        }
        Ok(Self {
            points,
            values,
            lipschitz,
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(y, fy)| fy + self.lipschitz * euclidean_distance(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// One-shot form of [`McShane::eval`].
pub fn mcshane_extend(points: &[Vec<f64>], values: &[f64], lipschitz: f64, x: &[f64]) -> Result<f64> {
    Ok(McShane::new(points.to_vec(), values.to_vec(), lipschitz)?.eval(x))
}
