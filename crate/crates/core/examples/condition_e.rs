//! Certifying that loop families evaluate pointwise into a chosen plot family.

use std::f64::consts::PI;

use diffeo_metric::constructions::euclidean;
use diffeo_metric::mapping::{
    all_plots_recognizer, circle_scale, condition_e_check, identity_recognizer, section_plot,
};
use diffeo_metric::space::ChartDomain;

fn main() {
    let n = euclidean(2, None).expect("plane");
    let thetas: Vec<f64> = (0..8).map(|k| k as f64 * PI / 4.0).collect();
    let id = identity_recognizer(1e-12);

    let rep = condition_e_check(
        &section_plot(&n, 0),
        &id,
        &thetas,
        &ChartDomain::euclidean(2).grid(3, 1.0),
    );
    println!(
        "constant loops, identity family: passed={} checked={} radius={:?}",
        rep.passed,
        rep.checked,
        rep.certified.first().map(|c| c.radius)
    );

    let grid = ChartDomain::euclidean(1).grid(3, 1.0);
    let rep = condition_e_check(&circle_scale([0.0, 0.0], 1.0), &id, &thetas, &grid);
    println!(
        "scaled circles, identity family: passed={} failures={}",
        rep.passed,
        rep.failures.len()
    );
    let rep = condition_e_check(
        &circle_scale([0.0, 0.0], 1.0),
        &all_plots_recognizer(),
        &thetas,
        &grid,
    );
    println!("scaled circles, all plots: passed={}", rep.passed);
}
