//! Plot-wise Lipschitz constants and their consistency with distance bounds.

use diffeo_metric::catalog::{warped_exp, y_space};
use diffeo_metric::distance::{lipschitz_consistency, lipschitz_probe, SearchConfig};

fn main() -> diffeo_metric::Result<()> {
    let w = warped_exp()?;
    let region = [(0.0, 1.0), (-1.0, 1.0)];
    println!(
        "k̂ on [0,1]×[-1,1] for the e^2x warp: {:.9} (e = {:.9})",
        lipschitz_probe(&w.space, &w.metric, 0, &region)?,
        std::f64::consts::E
    );

    let y = y_space()?;
    let cfg = SearchConfig {
        levels: 2,
        ..SearchConfig::default()
    };
    let rep = lipschitz_consistency(&y.space, &y.metric, 0, &[(-2.0, 2.0)], 20, 1e-6, &cfg)?;
    println!(
        "Y, plot 1: k̂ = {}, worst excess {:e}, passed {}",
        rep.k_hat, rep.max_excess, rep.passed
    );
    Ok(())
}
