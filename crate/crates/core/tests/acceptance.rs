//! Acceptance suite: every experiment E1–E9 at the shipped configuration,
//! plus the metric invariant suite. Each criterion prints one line
//! `[PASS] <id>` or `[FAIL] <id>` followed by its verdicts.
//!
//! Run with `cargo test -p gmt-rect --test acceptance -- --nocapture`.

use gmt_rect::harness::{run_experiment, ExperimentConfig, ExperimentReport};
use gmt_rect::heisenberg::Koranyi;
use gmt_rect::heisenberg::{gauge, h_dilate, h_group, h_inverse, koranyi_distance, HPoint};
use gmt_rect::metric_core::{kuratowski_embed, Metric, SampledMap, SupNorm};
use gmt_rect::stats::rng_stream;
use rand::Rng;

fn line(id: &str, pass: bool, detail: &str) {
    println!("[{}] {id}{detail}", if pass { "PASS" } else { "FAIL" });
}

fn experiment(id: &str) -> ExperimentReport {
    let cfg = ExperimentConfig::load(id, None, None).expect("shipped config");
    let report = run_experiment(&cfg).unwrap_or_else(|e| {
        line(id, false, &format!(": {e}"));
        panic!("{id} could not run: {e}");
    });
    line(
        id,
        report.passed(),
        &format!(" ({} ms)", report.timestamp.runtime_ms),
    );
    for v in &report.verdicts {
        println!(
            "    {} {} = {:.6e} (expected {})",
            if v.pass { "ok  " } else { "FAIL" },
            v.assertion,
            v.measured,
            v.expected
        );
    }
    report
}

fn assert_passed(report: &ExperimentReport) {
    let failed: Vec<_> = report.verdicts.iter().filter(|v| !v.pass).collect();
    assert!(failed.is_empty(), "{} failed: {failed:#?}", report.id);
}

#[test]
fn e1_equivalence() {
    assert_passed(&experiment("E1_equivalence"));
}

#[test]
fn e2_diameter() {
    assert_passed(&experiment("E2_diameter"));
}

#[test]
fn e3_si_majority() {
    let r = experiment("E3_si_majority");
    assert_eq!(r.table("instances").unwrap().rows.len(), 100);
    assert!(r.metric("max_measure").unwrap() <= 0.1 + 1e-12);
    assert!((r.metric("threshold_constant").unwrap() - 4.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    assert_passed(&r);
}

#[test]
fn e4_covering_decay() {
    let r = experiment("E4_covering_decay");
    let ms: Vec<f64> = r.table("covers").unwrap().rows.iter().map(|row| row[0]).collect();
    assert_eq!(ms, vec![2.0, 4.0, 8.0, 16.0]);
    assert_passed(&r);
}

#[test]
fn e5_heisenberg_unrect() {
    assert_passed(&experiment("E5_heisenberg_unrect"));
}

#[test]
fn e6_bld_jacobian() {
    assert_passed(&experiment("E6_bld_jacobian"));
}

#[test]
fn e7_taxis_length() {
    let r = experiment("E7_taxis_length");
    assert_eq!(r.table("chord_lengths").unwrap().rows.last().unwrap()[0], 512.0);
    assert_passed(&r);
}

#[test]
fn e8_area_formula() {
    let r = experiment("E8_area_formula");
    assert_eq!(r.config.f64("h").unwrap(), 0.005);
    assert_passed(&r);
}

#[test]
fn e9_straightening() {
    let r = experiment("E9_straightening");
    assert_eq!(r.metric("cubic.test_points"), Some(25.0));
    assert_eq!(r.metric("trig.test_points"), Some(25.0));
    assert_passed(&r);
}

fn random_point(rng: &mut impl Rng, n: usize) -> HPoint {
    let z = (0..2 * n).map(|_| rng.random_range(-3.0..3.0)).collect();
    HPoint::new(z, rng.random_range(-3.0..3.0)).unwrap()
}

#[test]
fn metric_invariant_suite() {
    let mut rng = rng_stream(0xacce, 0);
    let mut ok = true;

    let mut worst_triangle = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let n = rng.random_range(1..=3);
        let (p, q, r) = (
            random_point(&mut rng, n),
            random_point(&mut rng, n),
            random_point(&mut rng, n),
        );
        let excess = koranyi_distance(&p, &r).unwrap()
            - koranyi_distance(&p, &q).unwrap()
            - koranyi_distance(&q, &r).unwrap();
        worst_triangle = worst_triangle.max(excess);
    }
    let pass = worst_triangle <= 1e-12;
    line(
        "metric.triangle_inequality",
        pass,
        &format!(" (max excess {worst_triangle:.3e} over 1e5 triples)"),
    );
    ok &= pass;

    let mut worst_group = 0.0f64;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=3);
        let (p, q, r) = (
            random_point(&mut rng, n),
            random_point(&mut rng, n),
            random_point(&mut rng, n),
        );
        let left = h_group(&h_group(&p, &q).unwrap(), &r).unwrap().to_vec();
        let right = h_group(&p, &h_group(&q, &r).unwrap()).unwrap().to_vec();
        let e = HPoint::identity(n);
        let unit = h_group(&p, &e).unwrap().to_vec();
        let inv = h_group(&p, &h_inverse(&p)).unwrap().to_vec();
        let scale = 1.0
            + p.to_vec()
                .iter()
                .chain(&q.to_vec())
                .chain(&r.to_vec())
                .map(|v| v.abs())
                .fold(0.0, f64::max);
        for (a, b) in left.iter().zip(&right).chain(unit.iter().zip(&p.to_vec())) {
            worst_group = worst_group.max((a - b).abs() / (scale * scale));
        }
        worst_group = worst_group.max(inv.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let pass = worst_group <= 1e-12;
    line(
        "metric.group_axioms",
        pass,
        &format!(" (max defect {worst_group:.3e})"),
    );
    ok &= pass;

    let mut worst_gauge = 0.0f64;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=3);
        let p = random_point(&mut rng, n);
        let q = random_point(&mut rng, n);
        let lambda = rng.random_range(0.01..100.0);
        let g = gauge(&p);
        worst_gauge = worst_gauge
            .max((gauge(&h_dilate(&p, lambda).unwrap()) - lambda * g).abs() / (lambda * g).max(1e-300));
        let d = koranyi_distance(&p, &q).unwrap();
        let dl = koranyi_distance(&h_dilate(&p, lambda).unwrap(), &h_dilate(&q, lambda).unwrap()).unwrap();
        worst_gauge = worst_gauge.max((dl - lambda * d).abs() / (lambda * d).max(1e-300));
        let w = random_point(&mut rng, n);
        let dw = koranyi_distance(&h_group(&w, &p).unwrap(), &h_group(&w, &q).unwrap()).unwrap();
        worst_gauge = worst_gauge.max((dw - d).abs() / d.max(1e-300));
    }
    let pass = worst_gauge <= 1e-9;
    line(
        "metric.gauge_homogeneity",
        pass,
        &format!(" (max relative defect {worst_gauge:.3e})"),
    );
    ok &= pass;

    let f = SampledMap::on_box(&[-8, -8], &[8, 8], 0.125, &Koranyi, |x| {
        vec![x[0], x[1].sin(), x[0] * x[1]]
    })
    .unwrap();
    let landmarks: Vec<Vec<f64>> = (0..12).map(|i| f.value(i * 23 % f.len()).to_vec()).collect();
    let base = f.value(0).to_vec();
    let k = kuratowski_embed(&f, &Koranyi, &landmarks, &base).unwrap();
    let mut worst_expansion = f64::NEG_INFINITY;
    for i in 0..f.len() {
        for j in (i + 1..f.len()).step_by(5) {
            let e = SupNorm.distance(k.value(i), k.value(j)) - Koranyi.distance(f.value(i), f.value(j));
            worst_expansion = worst_expansion.max(e);
        }
    }
    let pass = worst_expansion <= 1e-12;
    line(
        "metric.kuratowski_non_expansive",
        pass,
        &format!(" (max expansion {worst_expansion:.3e})"),
    );
    ok &= pass;

    line("metric invariant suite", ok, "");
    assert!(ok);
}
