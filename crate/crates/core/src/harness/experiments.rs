use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;

use super::report::ReportBuilder;
use super::ExperimentConfig;
use crate::cc_spaces::{chord_cc_length, weak_bld_estimate, HorizontalPathG, VectorFieldSystem};
use crate::error::Result;
use crate::heisenberg::{h_lipschitz_profile, low_rank_check, HPoint, Koranyi};
use crate::jets::{
    all_jets, area_formula_check, builtin_straightening_maps, critical_cover, straightening_map,
    stratify_critical, CoverCube, JacobianSource, JetOptions, Permutation, SmoothMap, Stratification,
};
use crate::measure::{content_series, segment_intersection_stat, Cube, GridSet};
use crate::metric_core::{
    image_landmarks, kuratowski_defect, kuratowski_embed, landmark_projection, Euclidean, LandmarkSet,
    Metric, SampledMap, SupNorm,
};
use crate::stats::{loglog_slope, rng_stream};

type PointFn = dyn Fn(&[f64]) -> Vec<f64> + Sync;

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

/// Distinct values of a sampled map.
fn image_points(f: &SampledMap) -> Vec<Vec<f64>> {
    let mut seen = BTreeSet::new();
    f.values()
        .iter()
        .filter(|v| seen.insert(v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        .cloned()
        .collect()
}

fn unit_square(n: usize, metric: &dyn Metric, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<SampledMap> {
    let n = n as i64;
    SampledMap::on_box(&[0, 0], &[n, n], 1.0 / n as f64, metric, f)
}

fn strata_rows(f: &SampledMap, s: &Stratification) -> Vec<Vec<f64>> {
    (0..f.len())
        .map(|i| {
            let mut row = f.point(i);
            row.push(s.rank_of(i).map_or(-1.0, |r| r as f64));
            row
        })
        .collect()
}

fn low_rank_fraction(s: &Stratification) -> f64 {
    let resolved = s.resolved();
    if resolved == 0 {
        return 0.0;
    }
    (resolved - s.regular.len()) as f64 / resolved as f64
}

pub(super) fn equivalence(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const NULL_F: &str = "H^k(f(E)) = 0";
    const NULL_G: &str = "H^k(g(E)) = 0 for landmark projections g";
    const RANK: &str = "ap rank Dg < k almost everywhere";
    let grid = cfg.usize("grid")?;
    let radii = cfg.f64_list("radii")?;
    let rank_min = cfg.f64("rank_fraction_min")?;
    let target = cfg.f64("content_slope")?;
    let tol = cfg.f64("content_slope_tolerance")?;
    let slope_min = cfg.f64("content_slope_min")?;
    let kura_counts = cfg.usize_list("kuratowski_landmarks")?;
    let kura_sample = cfg.usize("kuratowski_sample")?;
    let opts = JetOptions {
        tol: cfg.f64("rank_tol")?,
        ..JetOptions::default()
    };

    let helix = |x: &[f64]| vec![(2.0 * x[0]).cos(), (2.0 * x[0]).sin(), x[0]];
    // horizontal lift of s -> (s, s^2)
    let lift = |x: &[f64]| vec![x[0], x[0] * x[0], -2.0 * x[0].powi(3) / 3.0];
    let cases: [(&str, &dyn Metric, &PointFn); 2] =
        [("euclidean", &Euclidean, &helix), ("heisenberg", &Koranyi, &lift)];

    for (name, metric, map) in cases {
        let f = unit_square(grid, metric, map)?;
        let landmarks = LandmarkSet::from_points(image_landmarks(&f, metric, 2), metric)?;
        let g = landmark_projection(&f, metric, &landmarks)?;
        let cf = content_series(&image_points(&f), metric, 2.0, &radii)?;
        let cg = content_series(&image_points(&g), &SupNorm, 2.0, &radii)?;
        let slope_f = loglog_slope(&radii, &cf.iter().map(|c| c.value).collect::<Vec<_>>())?;
        let slope_g = loglog_slope(&radii, &cg.iter().map(|c| c.value).collect::<Vec<_>>())?;
        let strat = stratify_critical(&g, &opts)?;
        let frac = low_rank_fraction(&strat);
        let expected = format!(">= {slope_min} and within {target} +- {tol}");
        let ok = |s: f64| s >= slope_min && within(s, target, tol);
        b.check(
            format!("{name}.content_slope_f"),
            NULL_F,
            slope_f,
            expected.clone(),
            ok(slope_f),
        );
        b.check(
            format!("{name}.content_slope_g"),
            NULL_G,
            slope_g,
            expected,
            ok(slope_g),
        );
        b.check(
            format!("{name}.low_rank_fraction"),
            RANK,
            frac,
            format!(">= {rank_min}"),
            frac >= rank_min,
        );
        b.metric(format!("{name}.resolved_points"), strat.resolved() as f64, RANK);
        let agree = ok(slope_f) && ok(slope_g) && frac >= rank_min;
        b.check(
            format!("{name}.conditions_agree"),
            "equivalence of the null conditions",
            agree as u8 as f64,
            "1",
            agree,
        );
        let table = format!("content_{name}");
        let rows = radii
            .iter()
            .zip(cf.iter().zip(&cg))
            .map(|(r, (a, c))| vec![*r, a.value, c.value, a.ball_count as f64, c.ball_count as f64])
            .collect();
        b.table(
            &table,
            &["r", "content_f", "content_g", "balls_f", "balls_g"],
            rows,
        );
        let step = f.len().div_ceil(kura_sample.max(1));
        let sample: Vec<usize> = (0..f.len()).step_by(step).collect();
        let mut kura_rows = Vec::new();
        for &n in &kura_counts {
            let lm = image_landmarks(&f, metric, n);
            let e = kuratowski_embed(&f, metric, &lm, &lm[0])?;
            let defect = kuratowski_defect(&f, metric, &e, &sample)?;
            b.metric(
                format!("{name}.kuratowski_defect_{n}"),
                defect,
                "Kuratowski embedding defect",
            );
            kura_rows.push(vec![n as f64, defect]);
        }
        b.table(&format!("kuratowski_{name}"), &["landmarks", "defect"], kura_rows);
        b.figure(
            "decay",
            &table,
            "r",
            "content_f",
            Some(&format!("{name}.content_slope_f")),
        );
        b.figure(
            "decay",
            &table,
            "r",
            "content_g",
            Some(&format!("{name}.content_slope_g")),
        );
    }

    // rank-2 control: every condition must report a non-null image
    let radii = cfg.f64_list("control_radii")?;
    let slope_max = cfg.f64("control_slope_max")?;
    let f = unit_square(cfg.usize("control_grid")?, &Euclidean, |x| vec![x[0], x[1], 0.0])?;
    let landmarks = LandmarkSet::from_points(vec![vec![-1.0, 0.5, 0.0], vec![0.5, -1.0, 0.0]], &Euclidean)?;
    let g = landmark_projection(&f, &Euclidean, &landmarks)?;
    let cf = content_series(&image_points(&f), &Euclidean, 2.0, &radii)?;
    let cg = content_series(&image_points(&g), &SupNorm, 2.0, &radii)?;
    let slope_f = loglog_slope(&radii, &cf.iter().map(|c| c.value).collect::<Vec<_>>())?;
    let slope_g = loglog_slope(&radii, &cg.iter().map(|c| c.value).collect::<Vec<_>>())?;
    let strat = stratify_critical(&g, &opts)?;
    let full = 1.0 - low_rank_fraction(&strat);
    b.check(
        "control.content_slope_f",
        NULL_F,
        slope_f,
        format!("<= {slope_max}"),
        slope_f <= slope_max,
    );
    b.check(
        "control.content_slope_g",
        NULL_G,
        slope_g,
        format!("<= {slope_max}"),
        slope_g <= slope_max,
    );
    b.check(
        "control.full_rank_fraction",
        RANK,
        full,
        format!(">= {rank_min}"),
        full >= rank_min,
    );
    Ok(())
}

pub(super) fn diameter(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "diam f(D) <= C(k) L H^k(D \\ A)^(1/k)";
    let widths = cfg.f64_list("widths")?;
    let tol = cfg.f64("exponent_tolerance")?;
    let spread_max = cfg.f64("constant_spread_max")?;
    let mut rows = Vec::new();
    for (k, n) in [(1usize, cfg.usize("grid_1d")?), (2, cfg.usize("grid_2d")?)] {
        let mut measures = Vec::new();
        let mut diams = Vec::new();
        for &delta in &widths {
            // ramp of height delta on B(center, delta), constant elsewhere
            let ramp = move |x: &[f64]| {
                let r = x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>().sqrt();
                let v = (delta - r).max(0.0);
                vec![v, -0.5 * v]
            };
            let hi = vec![n as i64; k];
            let f = SampledMap::on_box(&vec![0; k], &hi, 1.0 / n as f64, &SupNorm, ramp)?;
            let moving = (0..f.len())
                .filter(|&i| {
                    let mut idx = f.grid_index(i).to_vec();
                    (0..k).any(|a| {
                        idx[a] += 1;
                        let up = f.position(&idx);
                        idx[a] -= 2;
                        let down = f.position(&idx);
                        idx[a] += 1;
                        match (up, down) {
                            (Some(u), Some(d)) => f.value(u) != f.value(d),
                            (Some(o), None) | (None, Some(o)) => f.value(o) != f.value(i),
                            (None, None) => false,
                        }
                    })
                })
                .count();
            let measure = moving as f64 * f.h().powi(k as i32);
            let diam = (0..2)
                .map(|c| {
                    let (lo, hi) = f
                        .values()
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(v[c]), hi.max(v[c]))
                        });
                    hi - lo
                })
                .fold(0.0, f64::max);
            let ratio = diam / (f.lipschitz() * measure.powf(1.0 / k as f64));
            rows.push(vec![k as f64, delta, measure, diam, f.lipschitz(), ratio]);
            measures.push(measure);
            diams.push(diam);
        }
        let slope = loglog_slope(&measures, &diams)?;
        let want = 1.0 / k as f64;
        b.check(
            format!("k{k}.exponent"),
            A,
            slope,
            format!("{want} +- {tol}"),
            within(slope, want, tol),
        );
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r[5]).collect();
    let c_fit = ratios.iter().copied().fold(0.0, f64::max);
    let spread = c_fit / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    b.metric("fitted_constant", c_fit, A);
    b.check(
        "constant_spread",
        A,
        spread,
        format!("<= {spread_max}"),
        spread <= spread_max,
    );
    let worst = rows
        .iter()
        .map(|r| r[3] - c_fit * r[4] * r[2].powf(1.0 / r[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    b.check(
        "bound_excess",
        A,
        worst,
        "<= 0 with the fitted constant",
        worst <= 1e-12,
    );
    b.table(
        "instances",
        &["k", "width", "measure", "diameter", "lipschitz", "ratio"],
        rows,
    );
    b.figure("decay", "instances", "measure", "diameter", None);
    Ok(())
}

pub(super) fn segment_majority(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "more than half of the segments [x, y] meet E in length <= C H^n(E)^(1/n)";
    let instances = cfg.usize("instances")?;
    let segments = cfg.usize("segments")?;
    let n = cfg.usize("grid")? as i64;
    let cap = cfg.f64("measure_fraction_max")?;
    let need = cfg.f64("fraction_min")?;
    let h = 1.0 / n as f64;
    let cube = Cube::from_corner(&[0.0, 0.0], 1.0);
    let mut rows = Vec::with_capacity(instances);
    for i in 0..instances {
        let mut rng = rng_stream(cfg.seed, i as u64);
        let area = rng.random_range(0.1 * cap..cap);
        let disks = rng.random_range(1..=5usize);
        let radius = (area / (disks as f64 * std::f64::consts::PI)).sqrt();
        let centers: Vec<[f64; 2]> = (0..disks)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let mut e = GridSet::from_predicate(h, vec![0.0, 0.0], &[0, 0], &[n - 1, n - 1], |c| {
            centers
                .iter()
                .any(|d| (c[0] - d[0]).powi(2) + (c[1] - d[1]).powi(2) <= radius * radius)
        })?;
        if e.is_empty() {
            e = GridSet::new(2, h, vec![0.0, 0.0], vec![vec![n / 2, n / 2]])?;
        }
        let mut cells = e.cells().to_vec();
        while cells.len() as f64 * h * h > cap {
            cells.pop();
        }
        let e = GridSet::new(2, h, vec![0.0, 0.0], cells)?;
        // half of the instances put x at a disk center
        let x = if i % 2 == 1 {
            centers[0].to_vec()
        } else {
            vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]
        };
        let stat = segment_intersection_stat(
            &e,
            &cube,
            &x,
            segments,
            cfg.seed ^ (i as u64).wrapping_mul(0x9e37_79b9),
        )?;
        rows.push(vec![
            i as f64,
            e.measure(),
            stat.fraction_below,
            stat.median,
            stat.threshold,
        ]);
    }
    let worst = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    let max_measure = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    let median_ratio = rows.iter().map(|r| r[3] / r[4]).fold(0.0, f64::max);
    b.metric("max_measure", max_measure, A);
    b.metric("max_median_over_threshold", median_ratio, A);
    b.metric(
        "threshold_constant",
        2.0 * crate::measure::riesz_ball_constant(2),
        A,
    );
    b.check(
        "min_fraction_below",
        A,
        worst,
        format!("> {need} in every instance"),
        worst > need,
    );
    b.table(
        "instances",
        &["instance", "measure", "fraction_below", "median", "threshold"],
        rows,
    );
    b.figure("histogram", "instances", "fraction_below", "instance", None);
    Ok(())
}

pub(super) fn covering_decay(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "f(K_j cap Q) is covered by m^j balls of radius C L d / m";
    let j = cfg.usize("j")?;
    let ms = cfg.usize_list("boxes")?;
    let steps = cfg.usize("steps")? as i64;
    let pad = cfg.usize("padding")? as i64;
    let target = cfg.f64("slope")?;
    let tol = cfg.f64("slope_tolerance")?;
    let h = 1.0 / steps as f64;
    let f = SampledMap::on_box(&[-pad, -pad], &[steps + pad, steps + pad], h, &Euclidean, |x| {
        vec![(2.0 * x[0]).cos(), (2.0 * x[0]).sin(), x[0]]
    })?;
    let strat = stratify_critical(&f, &JetOptions::default())?;
    let cube = CoverCube {
        lo: vec![0, 0],
        steps,
    };
    // one constant for every m: the largest of the per-m fitted values
    let mut constant = 0.0f64;
    for &m in &ms {
        constant = constant.max(critical_cover(&f, &Euclidean, &strat, j, m, &cube, None)?.constant);
    }
    let mut rows = Vec::new();
    let mut counts_ok = true;
    let mut misses = 0usize;
    for &m in &ms {
        let c = critical_cover(&f, &Euclidean, &strat, j, m, &cube, Some(constant))?;
        counts_ok &= c.cover.len() == m.pow(j as u32);
        misses += c.misses.len();
        let content: f64 = c.cover.balls().iter().map(|ball| ball.radius.powi(2)).sum();
        rows.push(vec![
            m as f64,
            c.cover.len() as f64,
            c.cover.balls()[0].radius,
            content,
            c.misses.len() as f64,
        ]);
    }
    b.metric("fitted_constant", constant, A);
    b.metric("lipschitz", f.lipschitz(), A);
    b.metric("cube_side", steps as f64 * h, A);
    b.check("ball_count_is_m_pow_j", A, counts_ok as u8 as f64, "1", counts_ok);
    b.check("missed_points", A, misses as f64, "0", misses == 0);
    let slope = loglog_slope(
        &rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        &rows.iter().map(|r| r[3]).collect::<Vec<_>>(),
    )?;
    b.check(
        "content_slope",
        A,
        slope,
        format!("{target} +- {tol}"),
        within(slope, target, tol),
    );
    b.table("covers", &["m", "balls", "radius", "content", "misses"], rows);
    b.figure("decay", "covers", "m", "content", Some("content_slope"));
    Ok(())
}

pub(super) fn heisenberg_unrect(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const LOW: &str = "rank ap Df(x) <= n for Lipschitz f into H^n";
    const PURE: &str = "H^k(f(E)) = 0 for Lipschitz f into H^n, k > n";
    let grid = cfg.usize("grid")?;
    let levels = cfg.usize("levels")?;
    let target = cfg.f64("blowup_exponent")?;
    let tol = cfg.f64("blowup_tolerance")?;
    let opts = JetOptions {
        tol: cfg.f64("rank_tol")?,
        ..JetOptions::default()
    };
    let lift = |s: f64| vec![s, s * s, -2.0 * s.powi(3) / 3.0];
    let maps: [(&str, Box<PointFn>); 3] = [
        ("curve", Box::new(move |x: &[f64]| lift(x[0]))),
        (
            "sheared_curve",
            Box::new(move |x: &[f64]| lift(x[0] + 0.5 * x[1])),
        ),
        ("line", Box::new(|x: &[f64]| vec![x[0] - x[1], 0.0, 0.0])),
    ];
    let n = 1usize;
    let mut worst = 0usize;
    for (name, map) in maps.iter() {
        let f = unit_square(grid, &Koranyi, map.as_ref())?;
        let check = low_rank_check(&f, &opts)?;
        let rank = check.max_rank.unwrap_or(0);
        worst = worst.max(rank);
        b.metric(format!("{name}.max_rank"), rank as f64, LOW);
        b.metric(format!("{name}.resolved"), check.resolved as f64, LOW);
        b.metric(format!("{name}.lipschitz"), f.lipschitz(), PURE);
        if *name == "curve" {
            b.table(
                "strata_curve",
                &["x1", "x2", "rank"],
                strata_rows(&f, &check.stratification),
            );
            b.figure("strata", "strata_curve", "x1", "x2", None);
        }
    }
    b.check(
        "max_resolved_rank",
        LOW,
        worst as f64,
        format!("<= {n}"),
        worst <= n,
    );

    let plane = unit_square(grid, &Koranyi, |x| vec![x[0], x[1], 0.0])?;
    let rows = h_lipschitz_profile(&plane, levels)?;
    let slope = loglog_slope(
        &rows.iter().map(|r| r.scale).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.max_ratio).collect::<Vec<_>>(),
    )?;
    let plane_rank = low_rank_check(&plane, &opts)?.max_rank.unwrap_or(0);
    b.metric("plane.max_rank", plane_rank as f64, LOW);
    b.check(
        "plane.blowup_exponent",
        PURE,
        slope,
        format!("{target} +- {tol}"),
        within(slope, target, tol),
    );
    b.table(
        "plane_profile",
        &["scale", "max_ratio"],
        rows.iter().map(|r| vec![r.scale, r.max_ratio]).collect(),
    );
    b.figure(
        "decay",
        "plane_profile",
        "scale",
        "max_ratio",
        Some("plane.blowup_exponent"),
    );
    Ok(())
}

pub(super) fn bld_jacobian(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "weak BLD implies |J_f| >= c > 0 almost everywhere";
    let grid = cfg.usize("grid")?;
    let count = cfg.usize("curves")?;
    let slack = cfg.f64("jacobian_slack")?;
    let need = cfg.f64("fraction_min")?;
    let degenerate_max = cfg.f64("degenerate_ratio_max")?;
    let sys = VectorFieldSystem::euclidean(vec![0.0, 0.0], vec![1.0, 1.0])?;
    let mut rng = rng_stream(cfg.seed, 0);
    let mut curves = Vec::with_capacity(count);
    for _ in 0..count {
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        curves.push(HorizontalPathG::polyline(&sys, &pts)?);
    }
    let (c, s) = (0.7f64.cos(), 0.7f64.sin());
    let maps: [(&str, Box<PointFn>); 3] = [
        ("identity", Box::new(|x: &[f64]| x.to_vec())),
        (
            "rotation",
            Box::new(move |x: &[f64]| vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]),
        ),
        ("scaling", Box::new(|x: &[f64]| vec![2.0 * x[0], 2.0 * x[1]])),
    ];
    let opts = JetOptions::default();
    let mut rows = Vec::new();
    for (idx, (name, map)) in maps.iter().enumerate() {
        let report = weak_bld_estimate(map.as_ref(), &Euclidean, &curves, 1.0)?;
        let c_fit = report.implied_c * (1.0 + slack);
        let lower = c_fit.powi(-2);
        let f = unit_square(grid, &Euclidean, map.as_ref())?;
        let jac: Vec<f64> = all_jets(&f, &opts)
            .into_iter()
            .filter_map(|j| j.ok().filter(|j| j.residual <= opts.residual_threshold))
            .map(|j| j.jacobian())
            .collect();
        let above = jac.iter().filter(|&&v| v > lower).count() as f64 / jac.len().max(1) as f64;
        b.metric(format!("{name}.bld_constant"), c_fit, A);
        b.metric(format!("{name}.jacobian_lower_bound"), lower, A);
        b.metric(format!("{name}.resolved"), jac.len() as f64, A);
        b.check(
            format!("{name}.fraction_above_bound"),
            A,
            above,
            format!(">= {need}"),
            above >= need && !jac.is_empty(),
        );
        for v in jac.iter().step_by(7) {
            rows.push(vec![idx as f64, *v]);
        }
    }
    // (x1, x2) -> (x1, 0) crushes vertical segments
    let vertical: Vec<HorizontalPathG> = (0..8)
        .map(|i| {
            let a = (i as f64 + 0.5) / 8.0;
            HorizontalPathG::polyline(&sys, &[vec![a, 0.1], vec![a, 0.5], vec![a, 0.9]])
        })
        .collect::<Result<_>>()?;
    let degenerate = weak_bld_estimate(&|x: &[f64]| vec![x[0], 0.0], &Euclidean, &vertical, 1.0)?;
    b.check(
        "degenerate.vertical_ratio_min",
        "maps with Jacobian zero on a positive-measure set are not weak BLD",
        degenerate.ratio_min,
        format!("<= {degenerate_max}"),
        degenerate.ratio_min <= degenerate_max,
    );
    b.table("jacobians", &["map", "jacobian"], rows);
    b.figure("histogram", "jacobians", "jacobian", "map", None);
    Ok(())
}

pub(super) fn taxis_length(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "segments of the t-axis have infinite CC length";
    let tau = cfg.f64("tau")?;
    let ns = cfg.usize_list("refinements")?;
    let segments = cfg.usize("segments")?;
    let iterations = cfg.usize("iterations")?;
    let target = cfg.f64("slope")?;
    let tol = cfg.f64("slope_tolerance")?;
    let factor = cfg.f64("length_factor_min")?;
    let mut rows = Vec::new();
    for &n in &ns {
        let pts: Vec<HPoint> = (0..=n)
            .map(|i| HPoint::new(vec![0.0, 0.0], tau * i as f64 / n as f64))
            .collect::<Result<_>>()?;
        rows.push(vec![n as f64, chord_cc_length(&pts, segments, iterations)?]);
    }
    let slope = loglog_slope(
        &rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        &rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
    )?;
    let last = rows.last().map_or(0.0, |r| r[1]);
    b.check(
        "refinement_slope",
        A,
        slope,
        format!("{target} +- {tol}"),
        within(slope, target, tol),
    );
    b.check(
        "finest_length_over_euclidean",
        A,
        last / tau,
        format!("> {factor}"),
        last / tau > factor,
    );
    b.table("chord_lengths", &["n", "length"], rows);
    b.figure("decay", "chord_lengths", "n", "length", Some("refinement_slope"));
    Ok(())
}

pub(super) fn area_formula(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "integral of |J_g| over E equals integral of the multiplicity N(g, E, y)";
    let h = cfg.f64("h")?;
    let delta = cfg.f64("target_resolution")?;
    let gap_max = cfg.f64("gap_max")?;
    let n = (1.0 / h).round() as usize;
    type Case<'a> = (
        &'a str,
        &'a dyn Fn(&[f64]) -> Vec<f64>,
        &'a (dyn Fn(&[f64]) -> DMatrix<f64> + Sync),
    );
    let linear_d = |_: &[f64]| DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
    let fold_d =
        |x: &[f64]| DMatrix::from_row_slice(2, 2, &[if x[0] >= 0.5 { 1.0 } else { -1.0 }, 0.0, 0.0, 1.0]);
    let diffeo_d = |x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.3 * x[1].cos(), 0.3 * x[0].cos(), 1.0]);
    let cases: [Case; 3] = [
        ("linear", &|x| vec![2.0 * x[0], 2.0 * x[1]], &linear_d),
        ("fold", &|x| vec![(x[0] - 0.5).abs(), x[1]], &fold_d),
        (
            "diffeomorphism",
            &|x| vec![x[0] + 0.3 * x[1].sin(), x[1] + 0.3 * x[0].sin()],
            &diffeo_d,
        ),
    ];
    let mut rows = Vec::new();
    for (idx, (name, g, dg)) in cases.into_iter().enumerate() {
        let sampled = unit_square(n, &Euclidean, g)?;
        let r = area_formula_check(&sampled, &JacobianSource::Analytic(dg), delta)?;
        b.metric(format!("{name}.lhs"), r.lhs, A);
        b.metric(format!("{name}.rhs"), r.rhs, A);
        b.check(
            format!("{name}.gap"),
            A,
            r.gap,
            format!("< {gap_max}"),
            r.gap < gap_max,
        );
        rows.push(vec![idx as f64, r.lhs, r.rhs, r.gap]);
    }
    b.table("area", &["map", "lhs", "rhs", "gap"], rows);
    Ok(())
}

pub(super) fn straightening(cfg: &ExperimentConfig, b: &mut ReportBuilder) -> Result<()> {
    const A: &str = "g o H^-1 fixes the first j variables on B(0, epsilon)";
    let bound = cfg.f64("residual_max")?;
    let mut rows = Vec::new();
    for (idx, (map, j)) in builtin_straightening_maps().into_iter().enumerate() {
        let x0 = vec![0.0; map.dim_in()];
        let perm = Permutation::identity(map.dim_in(), map.dim_out());
        let s = straightening_map(&map, &x0, j, &perm)?;
        let residual = s.max_residual();
        let points = s.test_points();
        b.metric(format!("{}.epsilon", map.name), s.epsilon(), A);
        b.metric(format!("{}.test_points", map.name), points.len() as f64, A);
        b.check(
            format!("{}.max_residual", map.name),
            A,
            residual,
            format!("< {bound}"),
            residual < bound,
        );
        for p in &points {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            rows.push(vec![idx as f64, norm, s.residual(p)]);
        }
    }
    b.table("residuals", &["map", "radius", "residual"], rows);
    b.figure("histogram", "residuals", "residual", "map", None);
    Ok(())
}
