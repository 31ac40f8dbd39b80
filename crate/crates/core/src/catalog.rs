//! Named example spaces: the glued lines `Y` and `+`, the plane with a
//! glued half-line `M`, and the exponentially warped plane.

use std::sync::Arc;

use crate::constructions::{
    adjunction, euclidean, warped_product, GlueSpec, Identification, RiemannianSpace, WarpSpec,
    COMPAT_TOL,
};
use crate::error::{Error, Result};
use crate::metric::GridSpec;
use crate::space::{ChartDomain, ChartMap, DiffeoSpace, GlueRegion, Interval, Plot, SmoothMap};

/// `left ⨿_A right`, where `A` is the interval (or single point) `along`
/// placed on the first axis of each side. Both sides must have a single plot.
pub fn glue_along_interval(
    left: &RiemannianSpace,
    right: &RiemannianSpace,
    along: Interval,
) -> Result<RiemannianSpace> {
    let (n, m) = match (&left.space.plots[..], &right.space.plots[..]) {
        ([l], [r]) if l.dim() >= 1 && r.dim() >= 1 => (l.dim(), r.dim()),
        _ => {
            return Err(Error::Construction(
                "interval gluing needs single-plot sides of dimension ≥ 1".into(),
            ))
        }
    };
    let point = along.lo == along.hi;
    if !point && !(along.lo < along.hi) {
        return Err(Error::Construction(format!(
            "empty glue interval {along:?}"
        )));
    }
    let a_domain = if point {
        ChartDomain::euclidean(0)
    } else {
        ChartDomain::boxed(vec![(along.lo, along.hi)])
    };
    let a = Arc::new(DiffeoSpace::new(
        "A",
        vec![Plot::new("A", a_domain.clone())],
    ));
    let embed = |dim: usize| {
        let c = along.lo;
        ChartMap::from_fn(a_domain.clone(), ChartDomain::euclidean(dim), move |r| {
            let mut out = vec![0.0; dim];
            out[0] = if point { c } else { r[0] };
            out
        })
        .with_jacobian(move |_| {
            let cols = if point { 0 } else { 1 };
            let mut j = nalgebra::DMatrix::zeros(dim, cols);
            if cols == 1 {
                j[(0, 0)] = 1.0;
            }
            j
        })
    };
    let i = SmoothMap::global(a.id, left.space.clone(), 0, embed(n));
    let j = SmoothMap::global(a.id, right.space.clone(), 0, embed(m));
    let mut axes = vec![along];
    axes.extend(std::iter::repeat_n(Interval::point(0.0), n - 1));
    let first_axis = |from: usize, to: usize| {
        ChartMap::from_fn(
            ChartDomain::euclidean(from),
            ChartDomain::euclidean(to),
            move |r| {
                let mut out = vec![0.0; to];
                out[0] = r[0];
                out
            },
        )
        .with_jacobian(move |_| {
            let mut j = nalgebra::DMatrix::zeros(to, from);
            j[(0, 0)] = 1.0;
            j
        })
    };
    let spec = GlueSpec {
        a,
        i,
        j,
        identifications: vec![Identification {
            x_plot: 0,
            region: GlueRegion::new(axes),
            y_plot: 0,
            transfer: first_axis(n, m),
            inverse: first_axis(m, n),
        }],
        tol_compat: COMPAT_TOL,
        grid: GridSpec::default(),
    };
    adjunction(left, right, &spec)
}

/// `Y = ℝ₁ ⨿_{(1,∞)} ℝ₂` with the standard metric on both copies.
pub fn y_space() -> Result<RiemannianSpace> {
    glue_along_interval(
        &euclidean(1, None)?,
        &euclidean(1, None)?,
        Interval::open(1.0, f64::INFINITY),
    )
}

/// `+ = ℝ₁ ⨿_{0} ℝ₂`.
pub fn plus_space() -> Result<RiemannianSpace> {
    glue_along_interval(
        &euclidean(1, None)?,
        &euclidean(1, None)?,
        Interval::point(0.0),
    )
}

/// `M = ℝ ⨿_{(1,∞)} ℝ²`, the half-line `(1,∞)` glued onto the first axis of the plane.
pub fn m_space() -> Result<RiemannianSpace> {
    glue_along_interval(
        &euclidean(1, None)?,
        &euclidean(2, None)?,
        Interval::open(1.0, f64::INFINITY),
    )
}

/// `ℝ ×_f ℝ` with `f(x) = e^{2x}`.
pub fn warped_exp() -> Result<RiemannianSpace> {
    let x = euclidean(1, None)?;
    let warp = WarpSpec::exp2x(&x.space);
    warped_product(&x, &euclidean(1, None)?, &warp)
}
