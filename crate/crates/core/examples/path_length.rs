//! Piecewise paths across plots, their lengths and bump smoothing.

use std::f64::consts::PI;
use std::sync::Arc;

use diffeo_metric::catalog::y_space;
use diffeo_metric::constructions::euclidean;
use diffeo_metric::distance::{path_length, Curve, Joint, PathSegment, PiecewisePath};
use diffeo_metric::quadrature::CompositeRule;

fn main() -> diffeo_metric::Result<()> {
    let rule = CompositeRule::default();
    let plane = euclidean(2, None)?;
    let straight = PiecewisePath::single(PathSegment::new(
        0,
        Curve::straight(&[0.0, 0.0], &[3.0, 4.0]),
    ));
    println!(
        "straight (0,0)→(3,4): {:.12}",
        path_length(&plane.space, &plane.metric, &straight, &rule)?
    );

    let circle = Curve::Custom {
        value: Arc::new(|t| vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]),
        derivative: Some(Arc::new(|t: f64| {
            vec![
                -2.0 * PI * (2.0 * PI * t).sin(),
                2.0 * PI * (2.0 * PI * t).cos(),
            ]
        })),
    };
    let round = PiecewisePath::single(PathSegment::new(0, circle));
    println!(
        "unit circle: {:.12} (2π = {:.12})",
        path_length(&plane.space, &plane.metric, &round, &rule)?,
        2.0 * PI
    );

    // in Y: walk out to 1.25 on the first line, cross, walk back on the second
    let y = y_space()?;
    let detour = PiecewisePath::new(
        vec![
            PathSegment::new(0, Curve::straight(&[1.0], &[1.25])),
            PathSegment::new(1, Curve::straight(&[1.25], &[1.0])),
        ],
        vec![Joint::Glue {
            entry: 0,
            forward: true,
        }],
    )?;
    detour.validate(&y.space)?;
    println!(
        "Y detour of depth 0.25: {:.12}",
        path_length(&y.space, &y.metric, &detour, &rule)?
    );
    let smooth = detour.smoothed();
    println!(
        "after smoothing:         {:.12}",
        path_length(&y.space, &y.metric, &smooth, &rule)?
    );
    Ok(())
}
