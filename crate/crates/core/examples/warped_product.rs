//! Warped products, and the unwarped case agreeing with the product metric.

use diffeo_metric::constructions::{euclidean, product, warped_product, WarpSpec};
use diffeo_metric::metric::{compare_metrics, CheckConfig};
use diffeo_metric::space::TangentDouble;

fn main() -> diffeo_metric::Result<()> {
    let x = euclidean(1, None)?;
    let y = euclidean(1, None)?;
    let warped = warped_product(&x, &y, &WarpSpec::exp2x(&x.space))?;
    for r in [-1.0, 0.0, 1.0] {
        let t = TangentDouble::diagonal(0, vec![r, 5.0], vec![0.0, 1.0]);
        println!(
            "e^2x warp at x = {r:>4}: g(∂y, ∂y) = {:.6}",
            warped.metric.eval(&t)?
        );
    }

    let flat = warped_product(&x, &y, &WarpSpec::constant(&x.space, 1.0))?;
    let prod = product(&x, &y)?;
    let cfg = CheckConfig {
        samples: 500,
        tol: 0.0,
        ..CheckConfig::default()
    };
    let rep = compare_metrics(
        &flat.space,
        &flat.metric,
        &prod.metric.rebind(&flat.space)?,
        &cfg,
    )?;
    println!(
        "f ≡ 1 vs product over {} evaluations: max deviation {}",
        rep.samples, rep.max_deviation
    );
    Ok(())
}
