use gmt_rect::cc_spaces::{cc_distance_general, quasiconvexity_probe, CcFinder, CcMetric, VectorFieldSystem};
use gmt_rect::control::PathOptions;
use gmt_rect::heisenberg::{c_bilip, cc_distance_h, koranyi_distance, HPoint};
use gmt_rect::metric_core::Metric;

fn unit_box() -> VectorFieldSystem {
    VectorFieldSystem::heisenberg(vec![-1.0; 3], vec![1.0; 3]).unwrap()
}

fn light() -> PathOptions {
    PathOptions {
        segments: 12,
        iterations: 200,
        ..PathOptions::default()
    }
}

fn sample_points() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.0, 0.0],
        vec![0.4, 0.0, 0.0],
        vec![0.0, 0.3, 0.1],
        vec![-0.3, 0.2, -0.1],
        vec![0.2, -0.2, 0.05],
    ]
}

#[test]
fn heisenberg_box_is_a_length_space() {
    let options = light();
    let metric = CcMetric {
        system: unit_box(),
        options,
    };
    let finder = CcFinder {
        system: unit_box(),
        options,
    };
    let r = quasiconvexity_probe(&metric, &sample_points(), 10, &finder, 2).unwrap();
    assert_eq!(r.failed, 0);
    assert!((r.m_estimate - 1.0).abs() < 0.01, "{}", r.m_estimate);
}

#[test]
fn general_and_group_estimates_agree() {
    let sys = unit_box();
    let bilip = c_bilip(1).constant;
    let opts = PathOptions::default();
    let pts = sample_points();
    for q in &pts[1..] {
        let general = cc_distance_general(&sys, &pts[0], q, &opts).unwrap().upper;
        let hp = HPoint::from_slice(q).unwrap();
        let group = cc_distance_h(&HPoint::identity(1), &hp, 32, 400).unwrap();
        assert!(
            (general - group.upper).abs() <= 0.02 * group.upper,
            "{general} vs {}",
            group.upper
        );
        let dk = koranyi_distance(&HPoint::identity(1), &hp).unwrap();
        assert!(general >= dk / bilip * (1.0 - 1e-9));
    }
}

#[test]
fn estimates_are_nearly_symmetric() {
    let metric = CcMetric {
        system: unit_box(),
        options: light(),
    };
    let pts = sample_points();
    for (a, b) in [(1, 2), (2, 3), (3, 4)] {
        let ab = metric.distance(&pts[a], &pts[b]);
        let ba = metric.distance(&pts[b], &pts[a]);
        assert!((ab - ba).abs() <= 0.02 * ab.max(ba), "{ab} vs {ba}");
    }
}
