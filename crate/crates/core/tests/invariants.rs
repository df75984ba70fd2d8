use gmt_rect::cc_spaces::{horizontal_norm, VectorFieldSystem};
use gmt_rect::heisenberg::{h_dilate, h_group, koranyi_distance, HPoint, Koranyi};
use gmt_rect::jets::numerical_rank;
use gmt_rect::measure::{greedy_cover, hausdorff_content, vitali_select, Cube};
use gmt_rect::metric_core::{
    kuratowski_embed, landmark_projection, Euclidean, LandmarkSet, McShane, Metric, SampledMap, SupNorm,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn hpoint() -> impl Strategy<Value = HPoint> {
    (prop::collection::vec(-5.0..5.0f64, 2), -5.0..5.0f64).prop_map(|(z, t)| HPoint::new(z, t).unwrap())
}

fn cloud(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dim), 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn koranyi_triangle_and_symmetry(p in hpoint(), q in hpoint(), r in hpoint()) {
        let pq = koranyi_distance(&p, &q).unwrap();
        prop_assert!((pq - koranyi_distance(&q, &p).unwrap()).abs() <= 1e-12 * (1.0 + pq));
        prop_assert!(koranyi_distance(&p, &r).unwrap() <= pq + koranyi_distance(&q, &r).unwrap() + 1e-12);
    }

    #[test]
    fn koranyi_left_invariant_and_homogeneous(p in hpoint(), q in hpoint(), w in hpoint(), s in 0.05..20.0f64) {
        let d = koranyi_distance(&p, &q).unwrap();
        let dw = koranyi_distance(&h_group(&w, &p).unwrap(), &h_group(&w, &q).unwrap()).unwrap();
        prop_assert!((d - dw).abs() <= 1e-9 * (1.0 + d));
        let ds = koranyi_distance(&h_dilate(&p, s).unwrap(), &h_dilate(&q, s).unwrap()).unwrap();
        prop_assert!((ds - s * d).abs() <= 1e-9 * (1.0 + s * d));
    }

    #[test]
    fn greedy_cover_reaches_every_point(pts in cloud(3), r in 0.05..1.0f64) {
        let centers = greedy_cover(&pts, &Euclidean, r).unwrap();
        for p in &pts {
            prop_assert!(centers.iter().any(|&c| Euclidean.distance(p, &pts[c]) <= r));
        }
        let c1 = hausdorff_content(&pts, &Euclidean, 1.0, r.min(1.0)).unwrap();
        let c2 = hausdorff_content(&pts, &Euclidean, 2.0, r.min(1.0)).unwrap();
        prop_assert!(c2.value <= c1.value);
    }

    #[test]
    fn mcshane_extends_and_stays_lipschitz(pts in cloud(2), x in prop::collection::vec(-2.0..2.0f64, 2), y in prop::collection::vec(-2.0..2.0f64, 2)) {
        let values: Vec<f64> = pts.iter().map(|p| (p[0] - 0.3).abs() + 0.5 * p[1]).collect();
        let l = 1.5f64.sqrt() + 1e-9;
        let ext = McShane::new(pts.clone(), values.clone(), l).unwrap();
        for (p, v) in pts.iter().zip(&values) {
            prop_assert!((ext.eval(p) - v).abs() <= 1e-12);
        }
        prop_assert!((ext.eval(&x) - ext.eval(&y)).abs() <= l * Euclidean.distance(&x, &y) + 1e-12);
    }

    #[test]
    fn projections_do_not_expand(a in -2.0..2.0f64, b in -2.0..2.0f64, i in 0usize..81, j in 0usize..81) {
        let f = SampledMap::on_box(&[-4, -4], &[4, 4], 0.25, &Koranyi, |x| {
            vec![a * x[0], x[1], b * x[0] * x[1]]
        })
        .unwrap();
        let lm = LandmarkSet::from_points(vec![f.value(3).to_vec(), f.value(77).to_vec()], &Koranyi).unwrap();
        let g = landmark_projection(&f, &Koranyi, &lm).unwrap();
        let k = kuratowski_embed(&f, &Koranyi, &[f.value(10).to_vec(), f.value(50).to_vec()], f.value(0)).unwrap();
        let d = Koranyi.distance(f.value(i), f.value(j));
        prop_assert!(SupNorm.distance(g.value(i), g.value(j)) <= d + 1e-12);
        prop_assert!(SupNorm.distance(k.value(i), k.value(j)) <= d + 1e-12);
    }

    #[test]
    fn vitali_selection_is_disjoint_and_five_times_covers(
        cubes in prop::collection::vec((prop::collection::vec(-3.0..3.0f64, 2), 0.05..1.0f64), 1..30)
    ) {
        let cubes: Vec<Cube> = cubes.into_iter().map(|(c, r)| Cube::new(c, r)).collect();
        let kept = vitali_select(&cubes);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(!a.intersects(b));
            }
        }
        for c in &cubes {
            prop_assert!(kept.iter().any(|k| k.dilate(5.0).contains_cube(c)));
        }
    }

    #[test]
    fn horizontal_norm_reads_coefficients(x in -0.9..0.9f64, y in -0.9..0.9f64, t in -0.9..0.9f64, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let sys = VectorFieldSystem::heisenberg(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let p = [x, y, t];
        let frame = sys.frame_at(&p);
        let v: Vec<f64> = (0..3).map(|i| a * frame[(i, 0)] + b * frame[(i, 1)]).collect();
        let n = horizontal_norm(&sys, &p, &v).unwrap();
        prop_assert!((n - (a * a + b * b).sqrt()).abs() <= 1e-9 * (1.0 + n));
    }

    #[test]
    fn rank_is_scale_invariant(entries in prop::collection::vec(-1.0..1.0f64, 6), s in 1e-3..1e3f64) {
        let m = DMatrix::from_row_slice(3, 2, &entries);
        let r = numerical_rank(&m, 1e-6).unwrap();
        prop_assert!(r <= 2);
        prop_assert_eq!(r, numerical_rank(&(m * s), 1e-6).unwrap());
    }
}
