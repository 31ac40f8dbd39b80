//! Pulling the Euclidean metric back along chart maps, and the checks built on it.

use std::sync::Arc;

use diffeo_metric::metric::{isometry_check, pullback, CheckConfig, WeakMetric};
use diffeo_metric::space::{ChartDomain, ChartMap, DiffeoSpace, Plot, SmoothMap, TangentDouble};
use nalgebra::DMatrix;

fn main() -> diffeo_metric::Result<()> {
    let line = Arc::new(DiffeoSpace::new(
        "R",
        vec![Plot::new("id", ChartDomain::euclidean(1))],
    ));
    let g = WeakMetric::standard(&line);

    let double = SmoothMap::global(
        line.id,
        line.clone(),
        0,
        ChartMap::affine(DMatrix::from_element(1, 1, 2.0), vec![0.0]),
    );
    let pulled = pullback(&double, &line, &g)?;
    println!(
        "(2x)*g at v = w = 1: {}",
        pulled.eval(&TangentDouble::diagonal(0, vec![0.3], vec![1.0]))?
    );

    let shift = SmoothMap::global(
        line.id,
        line.clone(),
        0,
        ChartMap::affine(DMatrix::identity(1, 1), vec![3.0]),
    );
    let cfg = CheckConfig::default();
    let ok = isometry_check(&shift, &line, &g, &g, &cfg)?;
    let bad = isometry_check(&double, &line, &g, &g, &cfg)?;
    println!(
        "x + 3 isometry: passed={} deviation={:e}",
        ok.passed, ok.max_deviation
    );
    println!(
        "2x    isometry: passed={} deviation={}",
        bad.passed, bad.max_deviation
    );

    // the unit circle inside the plane
    let circle = Arc::new(DiffeoSpace::new(
        "S1",
        vec![Plot::new("angle", ChartDomain::euclidean(1))],
    ));
    let plane = Arc::new(DiffeoSpace::new(
        "R2",
        vec![Plot::new("id", ChartDomain::euclidean(2))],
    ));
    let wrap = ChartMap::from_fn(ChartDomain::euclidean(1), ChartDomain::euclidean(2), |r| {
        vec![r[0].cos(), r[0].sin()]
    });
    let arc = pullback(
        &SmoothMap::global(circle.id, plane.clone(), 0, wrap),
        &circle,
        &WeakMetric::standard(&plane),
    )?;
    println!(
        "circle speed²: {:.12}",
        arc.eval(&TangentDouble::diagonal(0, vec![1.0], vec![1.0]))?
    );
    Ok(())
}
