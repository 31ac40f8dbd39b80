use std::f64::consts::PI;

use diffeo_metric::catalog::y_space;
use diffeo_metric::constructions::euclidean;
use diffeo_metric::distance::{
    path_length, pseudodistance_upper, Curve, Joint, PathSegment, PiecewisePath, SearchConfig,
};
use diffeo_metric::mapping::{
    euclidean_distance, mapping_distance_lower_bound, mapping_distance_upper_bound, LoopPoint,
};
use diffeo_metric::metric::{pullback, WeakMetric};
use diffeo_metric::quadrature::CompositeRule;
use diffeo_metric::space::{ChartMap, SmoothMap, TangentDouble};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn straight_length_is_euclidean(a in prop::array::uniform3(coord()), b in prop::array::uniform3(coord())) {
        let s = euclidean(3, None).unwrap();
        let path = PiecewisePath::single(PathSegment::new(0, Curve::straight(&a, &b)));
        let len = path_length(&s.space, &s.metric, &path, &CompositeRule::default()).unwrap();
        let truth = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!((len - truth).abs() <= 1e-10);
    }

    #[test]
    fn reversal_keeps_length(depth in 0.05..3.0f64, start in -1.0..1.0f64) {
        let y = y_space().unwrap();
        let turn = 1.0 + depth;
        let path = PiecewisePath::new(
            vec![
                PathSegment::new(0, Curve::straight(&[start], &[turn])),
                PathSegment::new(1, Curve::straight(&[turn], &[start])),
            ],
            vec![Joint::Glue { entry: 0, forward: true }],
        ).unwrap();
        path.validate(&y.space).unwrap();
        let rule = CompositeRule::default();
        let fwd = path_length(&y.space, &y.metric, &path, &rule).unwrap();
        let back = path_length(&y.space, &y.metric, &path.reversed(), &rule).unwrap();
        prop_assert!((fwd - back).abs() <= 1e-12);
        prop_assert!((fwd - 2.0 * (turn - start)).abs() <= 1e-10);
    }

    #[test]
    fn quotient_equality_is_an_equivalence(a in -3.0..3.0f64, b in -3.0..3.0f64, i in 0..2usize, j in 0..2usize) {
        let y = y_space().unwrap();
        let s = &y.space;
        let (p, q) = (s.point(i, vec![a]), s.point(j, vec![b]));
        prop_assert!(s.points_equal(&p, &p).unwrap());
        prop_assert_eq!(s.points_equal(&p, &q).unwrap(), s.points_equal(&q, &p).unwrap());
        let expected = a == b && (i == j || a > 1.0);
        prop_assert_eq!(s.points_equal(&p, &q).unwrap(), expected);
    }

    #[test]
    fn affine_pullback_is_congruence(m in prop::array::uniform4(-2.0..2.0f64), r in prop::array::uniform2(coord()), v in prop::array::uniform2(-1.0..1.0f64)) {
        let s = euclidean(2, None).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &m);
        let phi = SmoothMap::global(s.space.id, s.space.clone(), 0, ChartMap::affine(a.clone(), vec![0.5, -0.5]));
        let pulled = pullback(&phi, &s.space, &WeakMetric::standard(&s.space)).unwrap();
        let got = pulled.eval(&TangentDouble::diagonal(0, r.to_vec(), v.to_vec())).unwrap();
        let av = &a * nalgebra::DVector::from_column_slice(&v);
        prop_assert!((got - av.dot(&av)).abs() <= 1e-6 * (1.0 + av.dot(&av)));
    }

    #[test]
    fn loop_distance_sandwich(cx in -2.0..2.0f64, cy in -2.0..2.0f64, radius in 0.1..2.0f64, px in -2.0..2.0f64) {
        let n = euclidean(2, None).unwrap();
        let rule = CompositeRule::new(8, 8);
        let f0 = LoopPoint::constant(0, vec![px, 0.0]);
        let f1 = LoopPoint::circle([cx, cy], radius);
        let lo = mapping_distance_lower_bound(&f0, &f1, &euclidean_distance, &rule);
        let hi = mapping_distance_upper_bound(&n, &f0, &f1, &rule).unwrap();
        prop_assert!(lo <= hi + 1e-9, "{} > {}", lo, hi);
        prop_assert!(lo >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn plane_bounds_match_the_straight_line(a in prop::array::uniform2(coord()), b in prop::array::uniform2(coord())) {
        let s = euclidean(2, None).unwrap();
        let cfg = SearchConfig { levels: 2, ..SearchConfig::default() };
        let rep = pseudodistance_upper(&s.space, &s.metric, &s.space.point(0, a.to_vec()), &s.space.point(0, b.to_vec()), &cfg).unwrap();
        let truth = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        prop_assert!(rep.bound >= truth - 1e-9 && rep.bound <= truth + 1e-6, "{} vs {}", rep.bound, truth);
    }
}

#[test]
fn circle_lower_bound_closed_form() {
    let rule = CompositeRule::default();
    let lo = mapping_distance_lower_bound(
        &LoopPoint::constant(0, vec![0.0, 0.0]),
        &LoopPoint::circle([0.0, 0.0], 1.0),
        &euclidean_distance,
        &rule,
    );
    assert!((lo - (2.0 * PI).sqrt()).abs() <= 1e-12);
}
