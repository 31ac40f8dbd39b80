//! Builders for weak Riemannian diffeological spaces: Euclidean spaces,
//! subspaces, sums, (warped) products and adjunction spaces.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, symmetrize};
use crate::metric::{pullback, GridSpec, TensorField, WeakMetric};
use crate::space::{
    ChartDomain, ChartMap, DiffeoSpace, Equality, GlueEntry, GlueRegion, Interval, Plot, ScalarFn,
    SmoothMap, SpaceRef, TangentDouble,
};

/// Compatibility tolerance for gluing metrics along a common subspace.
pub const COMPAT_TOL: f64 = 1e-9;

/// A space together with a weak Riemannian metric on it.
#[derive(Debug, Clone)]
pub struct RiemannianSpace {
    pub space: SpaceRef,
    pub metric: WeakMetric,
}

impl RiemannianSpace {
    pub fn new(space: DiffeoSpace, metric_fields: Vec<TensorField>) -> Result<Self> {
        let metric = WeakMetric::new(&space, metric_fields)?;
        Ok(Self {
            space: Arc::new(space),
            metric,
        })
    }
}

fn require_glue_equality(space: &DiffeoSpace, what: &str) -> Result<()> {
    match space.equality {
        Equality::Glue => Ok(()),
        Equality::ViaMap(_) => Err(Error::Construction(format!(
            "{what}: {} compares points through an inclusion; present it by a glue table first",
            space.name
        ))),
    }
}

fn check_tensor_field(field: &TensorField, domain: &ChartDomain, label: &str) -> Result<()> {
    for r in domain.grid(5, 2.0) {
        let g = field(&r)?;
        let scale = 1.0 + g.norm();
        if (&g - g.transpose()).norm() > 1e-12 * scale {
            return Err(Error::Construction(format!(
                "{label}: tensor is not symmetric at {r:?}"
            )));
        }
        if let Some((lambda, _)) = jacobi_eigen(&symmetrize(&g)).min() {
            if lambda < -1e-12 * scale {
                return Err(Error::Construction(format!(
                    "{label}: tensor is not positive at {r:?} (eigenvalue {lambda})"
                )));
            }
        }
    }
    Ok(())
}

/// `ℝⁿ` with its identity plot; the metric is `tensor` or the identity.
pub fn euclidean(n: usize, tensor: Option<TensorField>) -> Result<RiemannianSpace> {
    let space = DiffeoSpace::new(
        format!("R{n}"),
        vec![Plot::new("id", ChartDomain::euclidean(n))],
    );
    let field = match tensor {
        Some(t) => {
            check_tensor_field(&t, &space.plots[0].domain, "euclidean")?;
            t
        }
        None => Arc::new(move |_: &[f64]| Ok(DMatrix::identity(n, n))),
    };
    RiemannianSpace::new(space, vec![field])
}

/// Positive smooth function on a space, given plot-wise.
#[derive(Clone)]
pub struct WarpSpec {
    pub per_plot: Vec<ScalarFn>,
}

impl std::fmt::Debug for WarpSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WarpSpec({} plots)", self.per_plot.len())
    }
}

impl WarpSpec {
    pub fn constant(space: &DiffeoSpace, c: f64) -> Self {
        Self::uniform(space, move |_| c)
    }

    /// The same coordinate expression on every plot.
    pub fn uniform<F>(space: &DiffeoSpace, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let f: ScalarFn = Arc::new(f);
        Self {
            per_plot: vec![f; space.plots.len()],
        }
    }

    /// `x ↦ e^{2x₀}`.
    pub fn exp2x(space: &DiffeoSpace) -> Self {
        Self::uniform(space, |r| (2.0 * r[0]).exp())
    }
}

/// `X ×_f Y` with metric `g_X ∘ π₁ + (f ∘ π₁) · (g_Y ∘ π₂)`.
///
/// The generating family is the family of pairs `(P_X, P_Y)` on product
/// domains, indexed `i · |G_Y| + j`.
pub fn warped_product(
    x: &RiemannianSpace,
    y: &RiemannianSpace,
    warp: &WarpSpec,
) -> Result<RiemannianSpace> {
    require_glue_equality(&x.space, "warped product")?;
    require_glue_equality(&y.space, "warped product")?;
    if warp.per_plot.len() != x.space.plots.len() {
        return Err(Error::Construction(
            "warp function must be given on every plot of the base".into(),
        ));
    }
    for (k, (plot, f)) in x.space.plots.iter().zip(&warp.per_plot).enumerate() {
        for r in plot.domain.grid(9, 2.0) {
            let value = f(&r);
            if !(value > 0.0) {
                return Err(Error::Construction(format!(
                    "warp function is {value} ≤ 0 on plot {k} at {r:?}"
                )));
            }
        }
    }
    for e in &x.space.glue {
        for r in e.region.anchors(5, 1e-6, 2.0) {
            let (a, b) = (
                (warp.per_plot[e.from])(&r),
                (warp.per_plot[e.to])(&e.transfer.apply(&r)),
            );
            if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
                return Err(Error::Construction(format!(
                    "warp function disagrees across the glue of plots {} and {} at {r:?}",
                    e.from, e.to
                )));
            }
        }
    }

    let (xs, ys) = (&x.space, &y.space);
    let ny = ys.plots.len();
    let mut plots = Vec::new();
    let mut fields: Vec<TensorField> = Vec::new();
    for (i, px) in xs.plots.iter().enumerate() {
        for (j, py) in ys.plots.iter().enumerate() {
            plots.push(Plot::new(
                format!("{}×{}", px.name, py.name),
                px.domain.product(&py.domain),
            ));
            let (gx, gy, f) = (x.metric.clone(), y.metric.clone(), warp.per_plot[i].clone());
            let split = px.dim();
            fields.push(Arc::new(move |r: &[f64]| {
                let (r1, r2) = r.split_at(split);
                let a = gx.gram(i, r1)?;
                let b = gy.gram(j, r2)? * f(r1);
                let mut m = DMatrix::zeros(r.len(), r.len());
                m.view_mut((0, 0), a.shape()).copy_from(&a);
                m.view_mut(a.shape(), b.shape()).copy_from(&b);
                Ok(m)
            }));
        }
    }
    let mut glue = Vec::new();
    for e in &xs.glue {
        for (j, py) in ys.plots.iter().enumerate() {
            let id = ChartMap::identity(py.domain.clone());
            let mut axes = e.region.axes.clone();
            axes.extend(std::iter::repeat_n(Interval::full(), py.dim()));
            glue.push(GlueEntry {
                from: e.from * ny + j,
                region: GlueRegion::new(axes),
                to: e.to * ny + j,
                transfer: e.transfer.product(&id),
                inverse: e.inverse.product(&id),
            });
        }
    }
    for e in &ys.glue {
        for (i, px) in xs.plots.iter().enumerate() {
            let id = ChartMap::identity(px.domain.clone());
            let mut axes: Vec<Interval> = std::iter::repeat_n(Interval::full(), px.dim()).collect();
            axes.extend(e.region.axes.iter().copied());
            glue.push(GlueEntry {
                from: i * ny + e.from,
                region: GlueRegion::new(axes),
                to: i * ny + e.to,
                transfer: id.product(&e.transfer),
                inverse: id.product(&e.inverse),
            });
        }
    }
    let space = DiffeoSpace::new(format!("{}×{}", xs.name, ys.name), plots).with_glue(glue);
    RiemannianSpace::new(space, fields)
}

/// Unwarped product (`f ≡ 1`).
pub fn product(x: &RiemannianSpace, y: &RiemannianSpace) -> Result<RiemannianSpace> {
    warped_product(x, y, &WarpSpec::constant(&x.space, 1.0))
}

/// One identification record of an adjunction: `(x_plot, r) ~ (y_plot, transfer(r))`
/// for `r ∈ region`.
#[derive(Debug, Clone)]
pub struct Identification {
    pub x_plot: usize,
    pub region: GlueRegion,
    pub y_plot: usize,
    pub transfer: ChartMap,
    pub inverse: ChartMap,
}

/// Data of a pushout `X ⨿_A Y` along two inductions `i: A → X`, `j: A → Y`.
#[derive(Debug, Clone)]
pub struct GlueSpec {
    pub a: SpaceRef,
    pub i: SmoothMap,
    pub j: SmoothMap,
    pub identifications: Vec<Identification>,
    pub tol_compat: f64,
    pub grid: GridSpec,
}

/// Worst violation of `i*g_X = j*g_Y` found on the compatibility grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub max_deviation: f64,
    pub worst: Option<TangentDouble>,
    pub points_checked: usize,
}

/// Compares `i*g_X` and `j*g_Y` on the grid of `A`. At each grid point the
/// worst unit vector is the extreme eigenvector of the Gram difference.
pub fn compatibility(
    x: &RiemannianSpace,
    y: &RiemannianSpace,
    spec: &GlueSpec,
) -> Result<CompatibilityReport> {
    let gi = pullback(&spec.i, &spec.a, &x.metric)?;
    let gj = pullback(&spec.j, &spec.a, &y.metric)?;
    let mut report = CompatibilityReport {
        max_deviation: 0.0,
        worst: None,
        points_checked: 0,
    };
    for (k, plot) in spec.a.plots.iter().enumerate() {
        if plot.dim() == 0 {
            continue;
        }
        for r in plot
            .domain
            .grid(spec.grid.points_per_axis, spec.grid.window.max(2.0))
        {
            let diff = gi.gram(k, &r)? - gj.gram(k, &r)?;
            let eig = jacobi_eigen(&symmetrize(&diff));
            let (lo, vlo) = eig.min().expect("nonempty");
            let (hi, vhi) = eig.max().expect("nonempty");
            let (dev, v) = if lo.abs() > hi.abs() {
                (lo.abs(), vlo)
            } else {
                (hi.abs(), vhi)
            };
            report.points_checked += 1;
            if dev > report.max_deviation || report.worst.is_none() {
                report.max_deviation = report.max_deviation.max(dev);
                report.worst = Some(TangentDouble::diagonal(k, r.clone(), v));
            }
        }
    }
    Ok(report)
}

/// The adjunction space `Z = X ⨿_A Y` with the glued metric.
///
/// Plots of `Z` are the plots of `X` followed by those of `Y`; each keeps the
/// metric of its side. Construction fails if the metrics disagree on `A`
/// beyond `tol_compat`, or if the identification records do not identify
/// `i(a)` with `j(a)`.
pub fn adjunction(
    x: &RiemannianSpace,
    y: &RiemannianSpace,
    spec: &GlueSpec,
) -> Result<RiemannianSpace> {
    require_glue_equality(&x.space, "adjunction")?;
    require_glue_equality(&y.space, "adjunction")?;
    if spec.i.target().id != x.space.id || spec.j.target().id != y.space.id {
        return Err(Error::Construction(
            "adjunction: i must land in X and j in Y".into(),
        ));
    }
    if spec.i.source() != spec.a.id || spec.j.source() != spec.a.id {
        return Err(Error::Construction(
            "adjunction: i and j must start at A".into(),
        ));
    }

    let compat = compatibility(x, y, spec)?;
    if compat.max_deviation > spec.tol_compat {
        return Err(Error::Construction(format!(
            "metrics disagree on the glued subspace by {} (tolerance {}) at {:?}",
            compat.max_deviation, spec.tol_compat, compat.worst
        )));
    }
    check_induction(&spec.i, &spec.a)?;
    check_induction(&spec.j, &spec.a)?;

    let nx = x.space.plots.len();
    let mut plots: Vec<Plot> = x
        .space
        .plots
        .iter()
        .map(|p| Plot::new(format!("X.{}", p.name), p.domain.clone()))
        .collect();
    plots.extend(
        y.space
            .plots
            .iter()
            .map(|p| Plot::new(format!("Y.{}", p.name), p.domain.clone())),
    );
    let mut glue = x.space.glue.clone();
    glue.extend(y.space.glue.iter().map(|e| GlueEntry {
        from: e.from + nx,
        to: e.to + nx,
        ..e.clone()
    }));
    glue.extend(spec.identifications.iter().map(|id| GlueEntry {
        from: id.x_plot,
        region: id.region.clone(),
        to: id.y_plot + nx,
        transfer: id.transfer.clone(),
        inverse: id.inverse.clone(),
    }));
    let z = DiffeoSpace::new(format!("{}⨿{}", x.space.name, y.space.name), plots).with_glue(glue);

    // i(a) = j(a) in Z
    let mut checked = 0;
    for (k, plot) in spec.a.plots.iter().enumerate() {
        let mut pts = plot.domain.grid(10, 8.0);
        if plot.dim() == 0 {
            pts = vec![Vec::new()];
        }
        for r in pts.into_iter().take(100) {
            let a = spec.a.point(k, r.clone());
            let (xi, yj) = (spec.i.apply_point(&a)?, spec.j.apply_point(&a)?);
            let (px, cx) = xi.chart_rep().expect("chart point");
            let (py, cy) = yj.chart_rep().expect("chart point");
            let zi = z.point(px, cx.to_vec());
            let zj = z.point(py + nx, cy.to_vec());
            if !z.points_equal(&zi, &zj)? {
                return Err(Error::Construction(format!(
                    "identification records do not identify i(a) with j(a) at a = {r:?}"
                )));
            }
            checked += 1;
        }
    }
    debug_assert!(checked > 0 || spec.a.plots.is_empty());

    let mut fields = x.metric.fields().to_vec();
    fields.extend(y.metric.fields().iter().cloned());
    RiemannianSpace::new(z, fields)
}

/// Spot check that `map` is an immersion on grid samples of `a`.
fn check_induction(map: &SmoothMap, a: &SpaceRef) -> Result<()> {
    for (k, plot) in a.plots.iter().enumerate() {
        if plot.dim() == 0 {
            continue;
        }
        for r in plot.domain.grid(4, 4.0) {
            let fac = map.oracle(k, &r).ok_or_else(|| Error::Factorization {
                plot: k,
                point: r.clone(),
            })?;
            let j = fac.chart_map.jacobian(&r)?;
            let gram = j.transpose() * &j;
            let (lambda, _) = jacobi_eigen(&gram).min().expect("nonempty");
            if lambda <= 1e-12 {
                return Err(Error::Construction(format!(
                    "glue map is not an induction: singular derivative on plot {k} at {r:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Subspace `A ⊂ X` given by an induction `inclusion: A → X`: the plots of
/// `a` form the pulled-back generating family, points are compared through
/// their images, and the metric is the pullback.
pub fn subspace(
    x: &RiemannianSpace,
    a: &DiffeoSpace,
    inclusion: &SmoothMap,
) -> Result<RiemannianSpace> {
    if inclusion.source() != a.id || inclusion.target().id != x.space.id {
        return Err(Error::Construction(
            "subspace: inclusion must map A into X".into(),
        ));
    }
    let mut sub = a.clone();
    sub.equality = Equality::ViaMap(inclusion.clone());
    let sub = Arc::new(sub);
    let metric = pullback(inclusion, &sub, &x.metric)?;
    Ok(RiemannianSpace { space: sub, metric })
}

/// Disjoint union. Plot indices of summand `k` are shifted by the number of
/// plots before it.
pub fn sum(parts: &[RiemannianSpace]) -> Result<RiemannianSpace> {
    if parts.is_empty() {
        return Err(Error::Construction("sum of no spaces".into()));
    }
    let mut plots = Vec::new();
    let mut glue = Vec::new();
    let mut fields = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        require_glue_equality(&part.space, "sum")?;
        let offset = plots.len();
        plots.extend(part.space.plots.iter().map(|p| {
            Plot::new(
                if parts.len() == 1 {
                    p.name.clone()
                } else {
                    format!("{k}.{}", p.name)
                },
                p.domain.clone(),
            )
        }));
        glue.extend(part.space.glue.iter().map(|e| GlueEntry {
            from: e.from + offset,
            to: e.to + offset,
            ..e.clone()
        }));
        fields.extend(part.metric.fields().iter().cloned());
    }
    let name = parts
        .iter()
        .map(|p| p.space.name.as_str())
        .collect::<Vec<_>>()
        .join("⨿");
    RiemannianSpace::new(DiffeoSpace::new(name, plots).with_glue(glue), fields)
}
