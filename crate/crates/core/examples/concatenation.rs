//! Concatenating pairs of based loops and comparing the result with the
//! wedge metric, under the plain and the pulled-back volume on the circle.

use diffeo_metric::constructions::euclidean;
use diffeo_metric::mapping::{based_circle, concatenation_deviation, constant_family, WedgePlot};
use diffeo_metric::quadrature::CompositeRule;
use diffeo_metric::reproduce::concatenation_sweep;

fn main() -> diffeo_metric::Result<()> {
    let n = euclidean(2, None)?;
    let rule = CompositeRule::default();
    let w = WedgePlot::new(
        based_circle([0.0, 0.0]),
        constant_family(vec![0.0, 0.0], 1),
        1e-12,
    )?;
    let d = concatenation_deviation(&n, &w, &[0.5], &[1.0], &[1.0], &rule)?;
    println!(
        "circle ∨ point: wedge {:.9}, concatenated {:.9}, pulled-back volume {:.9}",
        d.wedge, d.concatenated, d.pulled_back
    );

    let (plain, pulled) = concatenation_sweep(50, 0, &rule)?;
    println!("50 random families: worst relative gap {plain:.3e} with dθ, {pulled:.3e} with the pulled-back volume");
    Ok(())
}
