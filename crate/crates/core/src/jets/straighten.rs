use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{contract, Error, Result};
use crate::stats::rng_stream;

/// A smooth map `R^k → R^N` with a Jacobian.
pub trait SmoothMap: Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;

    /// Central differences unless overridden.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        central_differences(self, x)
    }
}

fn central_differences<M: SmoothMap + ?Sized>(map: &M, x: &[f64]) -> DMatrix<f64> {
    let k = map.dim_in();
    let mut d = DMatrix::zeros(map.dim_out(), k);
    let mut xp = x.to_vec();
    for c in 0..k {
        let step = 1e-6 * x[c].abs().max(1.0);
        xp[c] = x[c] + step;
        let fp = map.eval(&xp);
        xp[c] = x[c] - step;
        let fm = map.eval(&xp);
        xp[c] = x[c];
        for r in 0..d.nrows() {
            d[(r, c)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    d
}

type EvalFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacFn = Box<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Closure-backed [`SmoothMap`].
pub struct FnMap {
    pub name: String,
    dim_in: usize,
    dim_out: usize,
    f: EvalFn,
    df: Option<JacFn>,
}

impl FnMap {
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim_in,
            dim_out,
            f: Box::new(f),
            df: None,
        }
    }

    pub fn with_jacobian(mut self, df: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.df = Some(Box::new(df));
        self
    }
}

impl SmoothMap for FnMap {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.df {
            Some(df) => df(x),
            None => central_differences(self, x),
        }
    }
}

/// The two nonlinear test maps with their straightening index `j`.
pub fn builtin_straightening_maps() -> Vec<(FnMap, usize)> {
    let cubic = FnMap::new("cubic", 2, 2, |x| vec![x[0].powi(3) + x[0], x[1] * x[1]])
        .with_jacobian(|x| DMatrix::from_row_slice(2, 2, &[3.0 * x[0] * x[0] + 1.0, 0.0, 0.0, 2.0 * x[1]]));
    let trig = FnMap::new("trig", 3, 4, |x| {
        vec![
            x[0].sin() + x[1] * x[2],
            x[1] + x[0] * x[0],
            x[0] * x[1],
            x[2].powi(3),
        ]
    })
    .with_jacobian(|x| {
        DMatrix::from_row_slice(
            4,
            3,
            &[
                x[0].cos(),
                x[2],
                x[1],
                2.0 * x[0],
                1.0,
                0.0,
                x[1],
                x[0],
                0.0,
                0.0,
                0.0,
                3.0 * x[2] * x[2],
            ],
        )
    });
    vec![(cubic, 1), (trig, 2)]
}

/// Reordering of input and output coordinates.
///
/// New input coordinate `a` is old coordinate `input[a]`; new component `i`
/// is old component `output[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
}

impl Permutation {
    pub fn identity(k: usize, n: usize) -> Self {
        Self {
            input: (0..k).collect(),
            output: (0..n).collect(),
        }
    }

    fn is_valid(&self, k: usize, n: usize) -> bool {
        let ok = |p: &[usize], len: usize| {
            let mut seen = vec![false; len];
            p.len() == len
                && p.iter()
                    .all(|&i| i < len && !std::mem::replace(&mut seen[i], true))
        };
        ok(&self.input, k) && ok(&self.output, n)
    }
}

/// `H(x) = (ĝ_1(x), …, ĝ_j(x), x_{j+1}, …, x_k)` where `ĝ` is `g` recentred
/// at `x0` (so `H(0) = 0`) and permuted, together with a Newton inverse that
/// is valid on `B(0, epsilon)`.
pub struct Straightening<'a> {
    g: &'a dyn SmoothMap,
    x0: Vec<f64>,
    g0: Vec<f64>,
    j: usize,
    perm: Permutation,
    epsilon: f64,
}

/// Smallest radius tried before giving up.
pub const EPSILON_MIN: f64 = 1e-6;
const TEST_POINTS: usize = 25;
const NEWTON_TOL: f64 = 1e-13;

impl<'a> Straightening<'a> {
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> usize {
        self.g.dim_in()
    }

    fn unpermute(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.x0.clone();
        for (a, &src) in self.perm.input.iter().enumerate() {
            y[src] += x[a];
        }
        y
    }

    /// Recentred, permuted `g`.
    pub fn g_hat(&self, x: &[f64]) -> Vec<f64> {
        let v = self.g.eval(&self.unpermute(x));
        self.perm.output.iter().map(|&i| v[i] - self.g0[i]).collect()
    }

    fn g_hat_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.g.jacobian(&self.unpermute(x));
        DMatrix::from_fn(self.perm.output.len(), self.k(), |i, a| {
            d[(self.perm.output[i], self.perm.input[a])]
        })
    }

    pub fn h(&self, x: &[f64]) -> Vec<f64> {
        let gh = self.g_hat(x);
        (0..self.k())
            .map(|i| if i < self.j { gh[i] } else { x[i] })
            .collect()
    }

    pub fn h_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let k = self.k();
        let dg = self.g_hat_jacobian(x);
        DMatrix::from_fn(k, k, |i, a| {
            if i < self.j {
                dg[(i, a)]
            } else if i == a {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Damped Newton solve of `H(y) = x` started from the linearization at 0.
    pub fn h_inverse(&self, x: &[f64]) -> Option<Vec<f64>> {
        let target = DVector::from_column_slice(x);
        let lin = self.h_jacobian(&vec![0.0; self.k()]).lu();
        let mut y = lin.solve(&target)?;
        let resid = |y: &DVector<f64>| DVector::from_vec(self.h(y.as_slice())) - &target;
        let mut r = resid(&y);
        for _ in 0..100 {
            let rn = r.amax();
            if rn <= NEWTON_TOL * (1.0 + target.amax()) {
                return Some(y.as_slice().to_vec());
            }
            let step = self.h_jacobian(y.as_slice()).lu().solve(&r)?;
            let mut lambda = 1.0;
            loop {
                let trial = &y - lambda * &step;
                let rt = resid(&trial);
                if rt.amax() < rn {
                    y = trial;
                    r = rt;
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-4 {
                    return None;
                }
            }
        }
        None
    }

    /// `max_{i ≤ j} |(ĝ ∘ H^{-1})_i(x) − x_i|`, infinite if inversion fails.
    pub fn residual(&self, x: &[f64]) -> f64 {
        match self.h_inverse(x) {
            Some(y) => {
                let gh = self.g_hat(&y);
                (0..self.j).map(|i| (gh[i] - x[i]).abs()).fold(0.0, f64::max)
            }
            None => f64::INFINITY,
        }
    }

    /// The deterministic test points of `B(0, epsilon)`: the origin and 24
    /// points drawn uniformly from the ball.
    pub fn test_points(&self) -> Vec<Vec<f64>> {
        test_points(self.k(), self.epsilon)
    }

    pub fn max_residual(&self) -> f64 {
        self.test_points()
            .iter()
            .map(|x| self.residual(x))
            .fold(0.0, f64::max)
    }
}

fn test_points(k: usize, eps: f64) -> Vec<Vec<f64>> {
    let mut rng = rng_stream(0x5eed, k as u64);
    let mut pts = vec![vec![0.0; k]];
    while pts.len() < TEST_POINTS {
        let u: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            pts.push(u.iter().map(|v| v * eps).collect());
        }
    }
    pts
}

/// Builds the straightening map of `g` at `x0` fixing the first `j`
/// (permuted) components, and finds the radius on which it can be inverted.
pub fn straightening_map<'a>(
    g: &'a dyn SmoothMap,
    x0: &[f64],
    j: usize,
    perm: &Permutation,
) -> Result<Straightening<'a>> {
    let k = g.dim_in();
    let n = g.dim_out();
    if x0.len() != k {
        return Err(contract(format!(
            "base point has {} coordinates, expected {k}",
            x0.len()
        )));
    }
    if j == 0 || j > k.min(n) {
        return Err(contract(format!(
            "straightening index must lie in 1..={}, got {j}",
            k.min(n)
        )));
    }
    if !perm.is_valid(k, n) {
        return Err(contract("permutation does not match the map dimensions"));
    }
    let mut s = Straightening {
        g,
        x0: x0.to_vec(),
        g0: g.eval(x0),
        j,
        perm: perm.clone(),
        epsilon: 1.0,
    };
    let minor = s.g_hat_jacobian(&vec![0.0; k]).view((0, 0), (j, j)).into_owned();
    let sv = minor.singular_values();
    if !(sv.min() > 1e-10 * sv.max().max(1.0)) {
        return Err(Error::NeedsPermutation { j });
    }
    while s.epsilon >= EPSILON_MIN {
        if s.max_residual() < 1e-10 {
            return Ok(s);
        }
        s.epsilon *= 0.5;
    }
    Err(Error::StraighteningFailed {
        epsilon_min: EPSILON_MIN,
    })
}
