//! The L² metric on loops in the plane: the constant-loop section and
//! distance bounds between loops.

use std::f64::consts::PI;

use diffeo_metric::constructions::euclidean;
use diffeo_metric::mapping::{
    circle_scale, euclidean_distance, mapping_distance_lower_bound, mapping_distance_upper_bound,
    mapping_metric_eval, section_pullback, LoopPoint,
};
use diffeo_metric::metric::{compare_metrics, CheckConfig};
use diffeo_metric::quadrature::CompositeRule;

fn main() -> diffeo_metric::Result<()> {
    let n = euclidean(2, None)?;
    let rule = CompositeRule::default();

    let s_g = section_pullback(&n, &rule)?;
    let rep = compare_metrics(
        &n.space,
        &s_g,
        &n.metric.scaled(2.0 * PI),
        &CheckConfig::default(),
    )?;
    println!(
        "|s*g − 2π g_N| ≤ {:e} over {} evaluations",
        rep.max_deviation, rep.samples
    );

    let circles = circle_scale([0.0, 0.0], 1.0);
    println!(
        "radial speed² of circles: {:.9}",
        mapping_metric_eval(&n, &circles, &[0.5], &[1.0], &[1.0], &rule)?
    );

    let p = LoopPoint::constant(0, vec![0.0, 0.0]);
    let q = LoopPoint::constant(0, vec![1.0, 0.0]);
    let lo = mapping_distance_lower_bound(&p, &q, &euclidean_distance, &rule);
    let hi = mapping_distance_upper_bound(&n, &p, &q, &rule)?;
    println!(
        "constant loops 1 apart: {lo:.9} ≤ d ≤ {hi:.9}, √(2π) = {:.9}",
        (2.0 * PI).sqrt()
    );

    let unit = LoopPoint::circle([0.0, 0.0], 1.0);
    let lo = mapping_distance_lower_bound(&p, &unit, &euclidean_distance, &rule);
    let hi = mapping_distance_upper_bound(&n, &p, &unit, &rule)?;
    println!("origin to unit circle:  {lo:.9} ≤ d ≤ {hi:.9}");
    Ok(())
}
