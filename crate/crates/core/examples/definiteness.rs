//! Grid definiteness checks, including a degenerate metric that fails.

use std::sync::Arc;

use diffeo_metric::catalog::warped_exp;
use diffeo_metric::constructions::euclidean;
use diffeo_metric::metric::{definiteness_check, GridSpec, TensorField, DEFINITENESS_TOL};
use nalgebra::DMatrix;

fn main() -> diffeo_metric::Result<()> {
    let grid = GridSpec {
        points_per_axis: 21,
        window: 1.0,
    };
    let w = warped_exp()?;
    let rep = definiteness_check(&w.space, &w.metric, &grid, DEFINITENESS_TOL);
    println!(
        "R ×_(e^2x) R: {:?}, min eigenvalue {:.6} (e^-2 = {:.6})",
        rep.verdict,
        rep.min_eigenvalue.unwrap(),
        (-2.0f64).exp()
    );

    // x² dx² vanishes on the line x = 0
    let field: TensorField = Arc::new(|r: &[f64]| Ok(DMatrix::from_element(1, 1, r[0] * r[0])));
    let flat = euclidean(1, Some(field))?;
    let rep = definiteness_check(
        &flat.space,
        &flat.metric,
        &GridSpec::default(),
        DEFINITENESS_TOL,
    );
    println!(
        "x² dx²: {:?}, first witness {:?}",
        rep.verdict,
        rep.witnesses.first().map(|w| &w.r)
    );
    Ok(())
}
