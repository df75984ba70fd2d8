//! Carnot–Carathéodory spaces given by vector fields on a box: horizontal
//! norms and lengths, CC distance upper bounds, weak-BLD ratios and
//! quasiconvexity probes.

mod bld;
mod quasi;

pub use bld::{chord_cc_length, weak_bld_estimate, BldReport};
pub use quasi::{
    quasiconvexity_probe, CcFinder, CurveFinder, Obstacle, PairResult, PolylineFinder, QuasiconvexityReport,
};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control::{optimize_path, ControlSystem, PathOptions};
use crate::error::{contract, Error, Result};
use crate::metric_core::{box_indices, euclidean_distance, Metric, TargetKind};

type FrameFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Field conditioning measured on a sample grid of the domain, widened by
/// the Lipschitz bound to hold on the whole box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conditioning {
    pub samples: usize,
    pub min_field_norm: f64,
    pub min_singular: f64,
    pub max_singular: f64,
    /// Certified lower bound of `min_i |X_i|` on the box.
    pub field_norm_bound: f64,
    /// Certified bounds on the singular values of the frame on the box.
    pub singular_lower: f64,
    pub singular_upper: f64,
}

impl Conditioning {
    /// `C` with `C⁻¹ ℓ ≤ ℓ_H ≤ C ℓ` on the box.
    pub fn length_constant(&self) -> f64 {
        self.singular_upper.max(1.0 / self.singular_lower)
    }
}

/// Vector fields `X_1..X_m` on a box `Ω ⊂ R^n`.
#[derive(Clone)]
pub struct VectorFieldSystem {
    pub name: String,
    n: usize,
    m: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    lipschitz: f64,
    frame: FrameFn,
    conditioning: Conditioning,
}

impl std::fmt::Debug for VectorFieldSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorFieldSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("conditioning", &self.conditioning)
            .finish()
    }
}

const SAMPLES_PER_AXIS: [i64; 4] = [0, 129, 33, 17];

impl VectorFieldSystem {
    /// `frame(p)` returns the `n × m` matrix with columns `X_i(p)`;
    /// `lipschitz` bounds the Lipschitz constant of every field on the box.
    pub fn new(
        name: impl Into<String>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        m: usize,
        lipschitz: f64,
        frame: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n || lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            return Err(contract("domain box needs lo < hi in every coordinate"));
        }
        if m == 0 || m > n {
            return Err(contract(format!("need 1 <= m <= n fields, got m = {m}, n = {n}")));
        }
        let per_axis = SAMPLES_PER_AXIS.get(n).copied().unwrap_or(9);
        let spacing: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) / (per_axis - 1) as f64)
            .collect();
        let cover_radius = 0.5 * spacing.iter().map(|s| s * s).sum::<f64>().sqrt();
        let mut min_norm = f64::INFINITY;
        let mut min_sv = f64::INFINITY;
        let mut max_sv = 0.0f64;
        let nodes = box_indices(&vec![0; n], &vec![per_axis - 1; n]);
        for idx in &nodes {
            let p: Vec<f64> = (0..n).map(|a| lo[a] + idx[a] as f64 * spacing[a]).collect();
            let f = frame(&p);
            if f.nrows() != n || f.ncols() != m {
                return Err(contract("frame evaluator returned a matrix of the wrong shape"));
            }
            for c in f.column_iter() {
                min_norm = min_norm.min(c.norm());
            }
            let sv = f.singular_values();
            min_sv = min_sv.min(sv.min());
            max_sv = max_sv.max(sv.max());
        }
        let slack = lipschitz * cover_radius;
        let conditioning = Conditioning {
            samples: nodes.len(),
            min_field_norm: min_norm,
            min_singular: min_sv,
            max_singular: max_sv,
            field_norm_bound: min_norm - slack,
            singular_lower: min_sv - (m as f64).sqrt() * slack,
            singular_upper: max_sv + (m as f64).sqrt() * slack,
        };
        if !(conditioning.field_norm_bound > 0.0) {
            return Err(Error::DegenerateSystem(format!(
                "a field may vanish on the box (sampled min |X_i| = {min_norm:.3e}, Lipschitz slack {slack:.3e})"
            )));
        }
        if !(conditioning.singular_lower > 0.0) {
            return Err(Error::DegenerateSystem(format!(
                "fields may be dependent on the box (sampled min singular value {min_sv:.3e})"
            )));
        }
        Ok(Self {
            name: name.into(),
            n,
            m,
            lo,
            hi,
            lipschitz,
            frame: Arc::new(frame),
            conditioning,
        })
    }

    /// Coordinate frame of `R^n`.
    pub fn euclidean(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = lo.len();
        Self::new("euclidean", lo, hi, n, 0.0, move |_| DMatrix::identity(n, n))
    }

    /// `X = ∂x + 2y ∂t`, `Y = ∂y − 2x ∂t` on a box of `R^3`.
    pub fn heisenberg(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new("heisenberg", lo, hi, 2, 2.0, |p| {
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 2.0 * p[1], -2.0 * p[0]])
        })
    }

    /// `X_1 = ∂x`, `X_2 = x ∂y` on a box of `R^2`.
    pub fn grushin(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new("grushin", lo, hi, 2, 1.0, |p| {
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, p[0]])
        })
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let (lo, hi) = (cfg.lo.clone(), cfg.hi.clone());
        match cfg.name.as_str() {
            "euclidean" => Self::euclidean(lo, hi),
            "heisenberg" if lo.len() == 3 => Self::heisenberg(lo, hi),
            "grushin" if lo.len() == 2 => Self::grushin(lo, hi),
            "heisenberg" | "grushin" => Err(contract(format!(
                "system `{}` has a fixed dimension; box has {} coordinates",
                cfg.name,
                lo.len()
            ))),
            other => Err(contract(format!("unknown built-in system `{other}`"))),
        }
    }

    /// Parses a `[system]` table, e.g. `name = "grushin"`, `lo = [0.5, -1]`,
    /// `hi = [2, 1]`.
    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            system: SystemConfig,
        }
        let doc: Doc = toml::from_str(text)?;
        Self::from_config(&doc.system)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field_count(&self) -> usize {
        self.m
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn conditioning(&self) -> &Conditioning {
        &self.conditioning
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.n
            && p.iter().zip(&self.lo).zip(&self.hi).all(|((x, a), b)| {
                let tol = 1e-9 * (b - a);
                *x >= a - tol && *x <= b + tol
            })
    }

    pub fn diameter(&self) -> f64 {
        euclidean_distance(&self.lo, &self.hi)
    }

    pub fn frame_at(&self, p: &[f64]) -> DMatrix<f64> {
        (self.frame)(p)
    }

    fn velocity(&self, p: &[f64], a: &[f64]) -> Vec<f64> {
        (self.frame_at(p) * DVector::from_column_slice(a))
            .as_slice()
            .to_vec()
    }

    /// One step of length `dt` with constant control, explicit midpoint with
    /// substeps so that `h L |a|_1 ≤ 0.01`.
    fn flow(&self, p: &[f64], a: &[f64], dt: f64) -> Vec<f64> {
        let speed: f64 = a.iter().map(|v| v.abs()).sum();
        let subs = ((dt * self.lipschitz * speed) / 0.01).ceil().max(1.0) as usize;
        let h = dt / subs as f64;
        let mut x = p.to_vec();
        for _ in 0..subs {
            let k1 = self.velocity(&x, a);
            let mid: Vec<f64> = x.iter().zip(&k1).map(|(x, k)| x + 0.5 * h * k).collect();
            let k2 = self.velocity(&mid, a);
            for (x, k) in x.iter_mut().zip(&k2) {
                *x += h * k;
            }
        }
        x
    }
}

impl ControlSystem for VectorFieldSystem {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn control_dim(&self) -> usize {
        self.m
    }

    fn frame(&self, p: &[f64]) -> DMatrix<f64> {
        self.frame_at(p)
    }

    fn trajectory(&self, start: &[f64], controls: &[f64]) -> Vec<Vec<f64>> {
        let dt = 1.0 / (controls.len() / self.m) as f64;
        let mut p = start.to_vec();
        let mut out = vec![p.clone()];
        for a in controls.chunks(self.m) {
            p = self.flow(&p, a, dt);
            out.push(p.clone());
        }
        out
    }

    fn admissible(&self, p: &[f64]) -> bool {
        self.contains(p)
    }
}

/// TOML form of a built-in system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub name: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// `|v|_H`: the length of the coefficient vector `a` with `v = Σ a_i X_i(p)`.
pub fn horizontal_norm(sys: &VectorFieldSystem, p: &[f64], v: &[f64]) -> Result<f64> {
    if p.len() != sys.n || v.len() != sys.n {
        return Err(contract("point and vector must live in the ambient space"));
    }
    let f = sys.frame_at(p);
    let rhs = DVector::from_column_slice(v);
    let a = f
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| contract(format!("least-squares solve failed: {e}")))?;
    let residual = (&f * &a - &rhs).norm();
    if residual > 1e-9 * rhs.norm().max(1.0) {
        return Err(Error::NotHorizontal { residual });
    }
    Ok(a.norm())
}

/// Horizontal curve with piecewise-constant controls, integrated by the
/// system's midpoint scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizontalPathG {
    pub times: Vec<f64>,
    pub controls: Vec<Vec<f64>>,
    pub start: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
}

impl HorizontalPathG {
    pub fn new(
        sys: &VectorFieldSystem,
        start: Vec<f64>,
        times: Vec<f64>,
        controls: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if times.len() != controls.len() + 1 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(contract(
                "time grid must be increasing with one more node than controls",
            ));
        }
        if start.len() != sys.n || controls.iter().any(|c| c.len() != sys.m) {
            return Err(contract("path dimensions do not match the system"));
        }
        let mut positions = vec![start.clone()];
        for (a, w) in controls.iter().zip(times.windows(2)) {
            let next = sys.flow(positions.last().unwrap(), a, w[1] - w[0]);
            positions.push(next);
        }
        Ok(Self {
            times,
            controls,
            start,
            positions,
        })
    }

    /// Polyline through `points` in a system whose frame is the identity,
    /// traversed in unit time.
    pub fn polyline(sys: &VectorFieldSystem, points: &[Vec<f64>]) -> Result<Self> {
        if points.len() < 2 {
            return Err(contract("a polyline needs two points"));
        }
        let segs = points.len() - 1;
        let dt = 1.0 / segs as f64;
        let times = (0..=segs).map(|j| j as f64 * dt).collect();
        let controls = points
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| (b - a) / dt).collect())
            .collect();
        Self::new(sys, points[0].clone(), times, controls)
    }

    pub fn end(&self) -> &[f64] {
        self.positions.last().unwrap_or(&self.start)
    }

    /// Euclidean chord sum over the nodes.
    pub fn euclidean_length(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| euclidean_distance(&w[0], &w[1]))
            .sum()
    }
}

/// `ℓ_H = Σ_j |a_j| Δt_j`.
pub fn horizontal_length(path: &HorizontalPathG) -> f64 {
    path.controls
        .iter()
        .zip(path.times.windows(2))
        .map(|(a, w)| a.iter().map(|v| v * v).sum::<f64>().sqrt() * (w[1] - w[0]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcEstimate {
    pub upper: f64,
    pub path: HorizontalPathG,
    pub residual: f64,
    pub best_by_restart: Vec<f64>,
    pub restart_residuals: Vec<f64>,
    pub seed: u64,
}

/// Best-of-restarts upper bound on `d_cc(p, q)`. Paths that leave the box
/// are discarded; the endpoint must be hit within `tolerance · |q − p|`.
pub fn cc_distance_general(
    sys: &VectorFieldSystem,
    p: &[f64],
    q: &[f64],
    opts: &PathOptions,
) -> Result<CcEstimate> {
    if !sys.contains(p) || !sys.contains(q) {
        return Err(contract("endpoints must lie in the domain box"));
    }
    let search = optimize_path(sys, p, q, opts)?;
    let segs = search.best.controls.len();
    let times = (0..=segs).map(|j| j as f64 / segs as f64).collect();
    let path = HorizontalPathG {
        times,
        controls: search.best.controls.clone(),
        start: p.to_vec(),
        positions: search.best.positions.clone(),
    };
    Ok(CcEstimate {
        upper: search.best.length,
        path,
        residual: search.best.residual,
        best_by_restart: search.best_by_restart,
        restart_residuals: search.residuals,
        seed: opts.seed,
    })
}

/// `d_cc` upper bound as a metric oracle; failed searches give `+∞`.
#[derive(Debug, Clone)]
pub struct CcMetric {
    pub system: VectorFieldSystem,
    pub options: PathOptions,
}

impl Metric for CcMetric {
    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        cc_distance_general(&self.system, p, q, &self.options).map_or(f64::INFINITY, |e| e.upper)
    }

    fn kind(&self) -> TargetKind {
        TargetKind::Cc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0; n], vec![1.0; n])
    }

    #[test]
    fn horizontal_norm_examples() {
        let (lo, hi) = unit(3);
        let h = VectorFieldSystem::heisenberg(lo, hi).unwrap();
        let p = [0.3, -0.4, 0.1];
        assert_eq!(horizontal_norm(&h, &p, &[0.0; 3]).unwrap(), 0.0);
        let f = h.frame_at(&p);
        let v: Vec<f64> = (3.0 * f.column(0) + 4.0 * f.column(1)).as_slice().to_vec();
        assert!((horizontal_norm(&h, &p, &v).unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(
            horizontal_norm(&h, &p, &[0.0, 0.0, 1.0]),
            Err(Error::NotHorizontal { .. })
        ));
        let (lo, hi) = unit(2);
        let e = VectorFieldSystem::euclidean(lo, hi).unwrap();
        assert_eq!(horizontal_norm(&e, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn horizontal_length_examples() {
        let (lo, hi) = unit(3);
        let h = VectorFieldSystem::heisenberg(lo, hi).unwrap();
        let path =
            HorizontalPathG::new(&h, vec![0.0; 3], vec![0.0, 0.5, 1.0], vec![vec![1.0, 0.0]; 2]).unwrap();
        assert_eq!(horizontal_length(&path), 1.0);
        assert!(euclidean_distance(path.end(), &[1.0, 0.0, 0.0]) < 1e-14);
        let still = HorizontalPathG::new(&h, vec![0.1; 3], vec![0.0, 1.0], vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(horizontal_length(&still), 0.0);
        let (lo, hi) = unit(2);
        let e = VectorFieldSystem::euclidean(lo, hi).unwrap();
        let seg = HorizontalPathG::polyline(&e, &[vec![0.0, 0.0], vec![0.6, 0.8]]).unwrap();
        assert!((horizontal_length(&seg) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_flow_matches_exact_heisenberg_flow() {
        use crate::heisenberg::HPoint;
        use crate::heisenberg::HorizontalPathH;
        let (lo, hi) = unit(3);
        let h = VectorFieldSystem::heisenberg(lo, hi).unwrap();
        let controls = vec![vec![0.3, -0.2], vec![-0.5, 0.4], vec![0.1, 0.6]];
        let times = vec![0.0, 0.3, 0.7, 1.0];
        let g = HorizontalPathG::new(&h, vec![0.1, 0.2, 0.0], times.clone(), controls.clone()).unwrap();
        let e = HorizontalPathH::new(HPoint::from_slice(&[0.1, 0.2, 0.0]).unwrap(), times, controls).unwrap();
        for (a, b) in g.end().iter().zip(e.endpoint().to_vec()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grushin_admission() {
        assert!(matches!(
            VectorFieldSystem::grushin(vec![-1.0, -1.0], vec![1.0, 1.0]),
            Err(Error::DegenerateSystem(_))
        ));
        assert!(matches!(
            VectorFieldSystem::grushin(vec![-0.3, -1.0], vec![2.0, 1.0]),
            Err(Error::DegenerateSystem(_))
        ));
        let g = VectorFieldSystem::grushin(vec![0.5, -1.0], vec![2.0, 2.0]).unwrap();
        assert!(g.conditioning().field_norm_bound > 0.0);
    }

    #[test]
    fn toml_config() {
        let s = VectorFieldSystem::from_toml(
            "[system]\nname = \"heisenberg\"\nlo = [-1, -1, -1]\nhi = [1, 1, 1]\n",
        )
        .unwrap();
        assert_eq!((s.dim(), s.field_count()), (3, 2));
        assert!(
            VectorFieldSystem::from_toml("[system]\nname = \"grushin\"\nlo = [-1, -1]\nhi = [1, 1]\n")
                .is_err()
        );
        assert!(VectorFieldSystem::from_toml("[system]\nname = \"nope\"\nlo = [0]\nhi = [1]\n").is_err());
    }

    #[test]
    fn cc_distance_examples() {
        let opts = PathOptions {
            segments: 16,
            ..PathOptions::default()
        };
        let (lo, hi) = unit(2);
        let e = VectorFieldSystem::euclidean(lo, hi).unwrap();
        assert_eq!(
            cc_distance_general(&e, &[0.2, 0.2], &[0.2, 0.2], &opts)
                .unwrap()
                .upper,
            0.0
        );
        let d = cc_distance_general(&e, &[0.0, 0.0], &[1.0, 0.0], &opts).unwrap();
        assert!((d.upper - 1.0).abs() < 0.01);
        assert!(d.best_by_restart.windows(2).all(|w| w[1] <= w[0]));
        let g = VectorFieldSystem::grushin(vec![0.5, -0.5], vec![2.0, 1.5]).unwrap();
        let d = cc_distance_general(&g, &[1.0, 0.0], &[1.0, 1.0], &opts).unwrap();
        assert!(d.upper <= 1.02, "{}", d.upper);
        assert!(d.residual <= 1e-6);
    }

    #[test]
    fn length_sandwich() {
        let (lo, hi) = unit(3);
        let h = VectorFieldSystem::heisenberg(lo, hi).unwrap();
        let c = h.conditioning().length_constant();
        let path = HorizontalPathG::new(
            &h,
            vec![0.0; 3],
            vec![0.0, 0.25, 0.5, 1.0],
            vec![vec![0.4, 0.1], vec![-0.2, 0.5], vec![0.3, -0.3]],
        )
        .unwrap();
        let lh = horizontal_length(&path);
        let l = path.euclidean_length();
        assert!(l / c < lh && lh <= c * l);
    }
}
