//! Adjunction spaces: gluing lines and planes along intervals.

use diffeo_metric::catalog::{glue_along_interval, m_space};
use diffeo_metric::constructions::euclidean;
use diffeo_metric::metric::{check_naturality, glue_naturality_pairs, CheckConfig};
use diffeo_metric::space::Interval;

fn main() -> diffeo_metric::Result<()> {
    let line = euclidean(1, None)?;
    let y = glue_along_interval(&line, &line, Interval::open(1.0, f64::INFINITY))?;
    println!(
        "Y: {} plots, {} glue records",
        y.space.plots.len(),
        y.space.glue.len()
    );

    let m = m_space()?;
    let s = &m.space;
    println!(
        "M: [2] on the line == (2, 0) in the plane ? {}",
        s.points_equal(&s.point(0, vec![2.0]), &s.point(1, vec![2.0, 0.0]))?
    );
    println!(
        "M: [2] on the line == (2, 1) in the plane ? {}",
        s.points_equal(&s.point(0, vec![2.0]), &s.point(1, vec![2.0, 1.0]))?
    );

    let rep = check_naturality(
        s,
        &m.metric,
        &glue_naturality_pairs(s),
        &CheckConfig::default(),
    )?;
    println!(
        "naturality across the glue: passed={} deviation={:e}",
        rep.passed, rep.max_deviation
    );

    // gluing a line onto a plane with a metric that disagrees on the overlap
    let stretched = euclidean(
        2,
        Some(std::sync::Arc::new(|_: &[f64]| {
            Ok(nalgebra::DMatrix::from_diagonal_element(2, 2, 4.0))
        })),
    )?;
    match glue_along_interval(&line, &stretched, Interval::open(0.0, 1.0)) {
        Ok(_) => println!("unexpected: incompatible metrics glued"),
        Err(e) => println!("incompatible metrics rejected: {e}"),
    }
    Ok(())
}
