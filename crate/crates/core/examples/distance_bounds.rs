//! Upper bounds on the path-length distance in glued spaces, level by level.

use diffeo_metric::catalog::{m_space, plus_space, y_space};
use diffeo_metric::constructions::RiemannianSpace;
use diffeo_metric::distance::{pseudodistance_upper, SearchConfig};
use diffeo_metric::reproduce::trace_csv;

fn run(
    name: &str,
    s: &RiemannianSpace,
    from: (usize, Vec<f64>),
    to: (usize, Vec<f64>),
    levels: usize,
) -> diffeo_metric::Result<()> {
    let cfg = SearchConfig {
        levels,
        ..SearchConfig::default()
    };
    let report = pseudodistance_upper(
        &s.space,
        &s.metric,
        &s.space.point(from.0, from.1),
        &s.space.point(to.0, to.1),
        &cfg,
    )?;
    println!(
        "{name}: bound {:.9} via {} ({} candidates)",
        report.bound, report.path_id, report.candidates
    );
    print!("{}", trace_csv(&report.trace));
    Ok(())
}

fn main() -> diffeo_metric::Result<()> {
    // [1_1] and [1_2] are distinct points at distance zero
    run("Y", &y_space()?, (0, vec![1.0]), (1, vec![1.0]), 6)?;
    run("+", &plus_space()?, (0, vec![-2.0]), (1, vec![3.0]), 3)?;
    // infimum 1 + √2 is approached, not attained
    run("M", &m_space()?, (0, vec![0.0]), (1, vec![2.0, 1.0]), 5)?;
    Ok(())
}
