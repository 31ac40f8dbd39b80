//! Metrics on spaces of smooth loops `S¹ → N`, integrated against `dθ`.

mod condition_e;
mod families;
mod wedge;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::constructions::RiemannianSpace;
use crate::error::{Error, Result};
use crate::linalg::{congruence, dist, max_abs_diff, symmetric_form};
use crate::metric::{TensorField, WeakMetric};
use crate::quadrature::CompositeRule;
use crate::space::{central_difference, ChartDomain};

pub use condition_e::{
    all_plots_recognizer, condition_e_check, identity_recognizer, ConditionEReport, Recognizer,
    RestrictedPlot, CERTIFY_RADII,
};
pub use families::{
    based_circle, circle_scale, constant_family, figure, polynomial_family,
    random_polynomial_family, section_plot,
};
pub use wedge::{
    concatenate, concatenation_deviation, l_convert, nu_convert, pinch, pinch_derivative,
    wedge_metric_eval, ConcatenationDeviation, WedgeArg, WedgeConvention, WedgeMap, WedgePlot,
    WedgePoint,
};

/// Total volume of `S¹` under `dθ`.
pub const LOOP_VOLUME: f64 = 2.0 * PI;

/// Finite-difference step for `r`-Jacobians of loop families.
pub const FAMILY_FD_STEP: f64 = 1e-6;

pub type LoopFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
pub type AdjointFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;
pub type AdjointJacobianFn = Arc<dyn Fn(&[f64], f64) -> DMatrix<f64> + Send + Sync>;

/// A smooth loop `S¹ → N` landing in one plot of `N`, in its coordinates.
/// `θ` ranges over `[0, 2π]`.
#[derive(Clone)]
pub struct LoopPoint {
    pub plot: usize,
    pub f: LoopFn,
}

impl fmt::Debug for LoopPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LoopPoint(plot {}, f(0) = {:?})",
            self.plot,
            (self.f)(0.0)
        )
    }
}

impl LoopPoint {
    pub fn new<F>(plot: usize, f: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            plot,
            f: Arc::new(f),
        }
    }

    pub fn constant(plot: usize, y: Vec<f64>) -> Self {
        Self::new(plot, move |_| y.clone())
    }

    /// `θ ↦ c + R (cos θ, sin θ)`.
    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        Self::new(0, move |t| {
            vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
    }

    /// `θ ↦ a (sin θ, sin θ cos θ)`.
    pub fn figure(a: f64) -> Self {
        Self::new(0, move |t| vec![a * t.sin(), a * t.sin() * t.cos()])
    }

    pub fn eval(&self, theta: f64) -> Vec<f64> {
        (self.f)(theta)
    }

    /// Closes up to `tol` in value and first derivative at `θ = 0 ≡ 2π`.
    pub fn check_periodic(&self, tol: f64) -> Result<()> {
        let h = 1e-5;
        let (a, b) = (self.eval(0.0), self.eval(2.0 * PI));
        if max_abs_diff(&a, &b) > tol {
            return Err(Error::Precondition(format!(
                "loop does not close: {a:?} vs {b:?}"
            )));
        }
        let d0: Vec<f64> = self
            .eval(h)
            .iter()
            .zip(&a)
            .map(|(x, y)| (x - y) / h)
            .collect();
        let d1: Vec<f64> = b
            .iter()
            .zip(self.eval(2.0 * PI - h))
            .map(|(x, y)| (x - y) / h)
            .collect();
        let gap = max_abs_diff(&d0, &d1);
        if gap > 1e-3 + tol {
            return Err(Error::Precondition(format!(
                "loop has a corner at the basepoint (derivative gap {gap})"
            )));
        }
        Ok(())
    }
}

/// A plot `U → C^∞(S¹, N)` given by its smooth adjoint `U × S¹ → N`
/// (landing in plot `target_plot` of `N`).
#[derive(Clone)]
pub struct MappingPlot {
    pub domain: ChartDomain,
    pub target_plot: usize,
    pub adjoint: AdjointFn,
    /// `∂/∂r` of the adjoint at `(r, θ)`; central differences if absent.
    pub jacobian: Option<AdjointJacobianFn>,
}

impl fmt::Debug for MappingPlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappingPlot")
            .field("dim", &self.domain.dim())
            .field("target_plot", &self.target_plot)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl MappingPlot {
    pub fn new<F>(domain: ChartDomain, target_plot: usize, adjoint: F) -> Self
    where
        F: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            domain,
            target_plot,
            adjoint: Arc::new(adjoint),
            jacobian: None,
        }
    }

    pub fn with_jacobian<F>(mut self, j: F) -> Self
    where
        F: Fn(&[f64], f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn eval(&self, r: &[f64], theta: f64) -> Vec<f64> {
        (self.adjoint)(r, theta)
    }

    /// The loop `P(r)`.
    pub fn loop_at(&self, r: &[f64]) -> LoopPoint {
        let adj = self.adjoint.clone();
        let r = r.to_vec();
        LoopPoint {
            plot: self.target_plot,
            f: Arc::new(move |t| adj(&r, t)),
        }
    }

    pub fn r_jacobian(&self, r: &[f64], theta: f64) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(r, theta),
            None => {
                let m = self.eval(r, theta).len();
                let adj = self.adjoint.clone();
                central_difference(&|s: &[f64]| adj(s, theta), r, m, FAMILY_FD_STEP)
            }
        }
    }
}

/// `∫₀^{2π} w(θ) · Jᵀ G J dθ`, with `J = ∂_r P(r, θ)` and `G` the Gram
/// matrix of `g_N` at `P(r, θ)`. The panels of `rule` are split evenly
/// between `[0, π]` and `[π, 2π]`.
pub(crate) fn weighted_gram(
    target: &RiemannianSpace,
    p: &MappingPlot,
    r: &[f64],
    rule: &CompositeRule,
    weight: &dyn Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    if !p.domain.contains(r) {
        return Err(Error::Domain {
            plot: 0,
            point: r.to_vec(),
        });
    }
    let tdom = &target.space.plot(p.target_plot)?.domain;
    let d = r.len();
    let mut acc = DMatrix::zeros(d, d);
    let half = CompositeRule::new(rule.order, rule.panels.div_ceil(2));
    for (a, b) in [(0.0, PI), (PI, 2.0 * PI)] {
        for (theta, wq) in half.points(a, b) {
            let w = weight(theta);
            if w == 0.0 {
                continue;
            }
            let y = p.eval(r, theta);
            if !tdom.contains(&y) {
                return Err(Error::Evaluation {
                    theta,
                    reason: format!("loop leaves plot {} at {y:?}", p.target_plot),
                });
            }
            let g = target.metric.gram(p.target_plot, &y)?;
            let j = p.r_jacobian(r, theta);
            if j.nrows() != y.len() || j.ncols() != d {
                return Err(Error::Evaluation {
                    theta,
                    reason: format!(
                        "jacobian has shape {:?}, expected ({}, {d})",
                        j.shape(),
                        y.len()
                    ),
                });
            }
            acc += congruence(&g, &j) * (wq * w);
        }
    }
    Ok(acc)
}

/// Gram matrix of `g(P)_r` for a plot of the loop space.
pub fn mapping_gram(
    target: &RiemannianSpace,
    p: &MappingPlot,
    r: &[f64],
    rule: &CompositeRule,
) -> Result<DMatrix<f64>> {
    weighted_gram(target, p, r, rule, &|_| 1.0)
}

/// `g(P)_r(v, w) = ∫₀^{2π} g_N(ev_θ ∘ P)_r(v, w) dθ`.
pub fn mapping_metric_eval(
    target: &RiemannianSpace,
    p: &MappingPlot,
    r: &[f64],
    v: &[f64],
    w: &[f64],
    rule: &CompositeRule,
) -> Result<f64> {
    if v.len() != r.len() || w.len() != r.len() {
        return Err(Error::Usage(
            "tangent vectors do not match the plot dimension".into(),
        ));
    }
    Ok(symmetric_form(&mapping_gram(target, p, r, rule)?, v, w))
}

/// The constant loop at `y`: `s(y)(θ) = y`.
pub fn section_s(plot: usize, y: &[f64]) -> LoopPoint {
    LoopPoint::constant(plot, y.to_vec())
}

/// `s*g` as a metric on `N`: on each plot `Q`, the loop-space metric of
/// `s ∘ Q` (computed by quadrature).
pub fn section_pullback(target: &RiemannianSpace, rule: &CompositeRule) -> Result<WeakMetric> {
    let fields = (0..target.space.plots.len())
        .map(|q| {
            let t = target.clone();
            let rule = rule.clone();
            let plot = section_plot(&t, q);
            Arc::new(move |r: &[f64]| mapping_gram(&t, &plot, r, &rule)) as TensorField
        })
        .collect();
    WeakMetric::new(&target.space, fields)
}

/// `(2π)^{-1/2} ∫₀^{2π} d_N(f₀(θ), f₁(θ)) dθ`, a lower bound on the
/// loop-space distance when `d_N` is the distance of `N`.
pub fn mapping_distance_lower_bound(
    f0: &LoopPoint,
    f1: &LoopPoint,
    d_n: &dyn Fn(&[f64], &[f64]) -> f64,
    rule: &CompositeRule,
) -> f64 {
    let mut total = 0.0;
    let half = CompositeRule::new(rule.order, rule.panels.div_ceil(2));
    for (a, b) in [(0.0, PI), (PI, 2.0 * PI)] {
        total += half.integrate(a, b, |t| d_n(&f0.eval(t), &f1.eval(t)));
    }
    total / LOOP_VOLUME.sqrt()
}

/// Euclidean distance, the `d_N` of `ℝⁿ` with the standard metric.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b)
}

/// The path `t ↦ (1 − t) f₀ + t f₁` in the loop space, as a plot with a
/// one-dimensional domain containing `[0, 1]`.
pub fn straight_homotopy(f0: &LoopPoint, f1: &LoopPoint) -> Result<MappingPlot> {
    if f0.plot != f1.plot {
        return Err(Error::Precondition("loops live in different plots".into()));
    }
    let (a, b) = (f0.f.clone(), f1.f.clone());
    let (a2, b2) = (f0.f.clone(), f1.f.clone());
    Ok(MappingPlot::new(
        ChartDomain::boxed(vec![(-0.5, 1.5)]),
        f0.plot,
        move |r, t| {
            let (x, y) = (a(t), b(t));
            x.iter()
                .zip(&y)
                .map(|(p, q)| (1.0 - r[0]) * p + r[0] * q)
                .collect()
        },
    )
    .with_jacobian(move |_, t| {
        let (x, y) = (a2(t), b2(t));
        DMatrix::from_iterator(x.len(), 1, x.iter().zip(&y).map(|(p, q)| q - p))
    }))
}

/// `∫₀¹ (g(H)_t(1, 1))^{1/2} dt` for a path `H` in the loop space; `rule`
/// integrates over `θ`, `t_rule` over `t`.
pub fn mapping_path_length(
    target: &RiemannianSpace,
    h: &MappingPlot,
    rule: &CompositeRule,
    t_rule: &CompositeRule,
) -> Result<f64> {
    if h.domain.dim() != 1 || !h.domain.contains(&[0.0]) || !h.domain.contains(&[1.0]) {
        return Err(Error::InvalidPath(
            "loop-space paths need a one-dimensional domain containing [0, 1]".into(),
        ));
    }
    t_rule.try_integrate(0.0, 1.0, |t| {
        let g = mapping_gram(target, h, &[t], rule)?;
        Ok(g[(0, 0)].max(0.0).sqrt())
    })
}

/// Length of the straight homotopy: an upper bound on the loop-space
/// distance. The `t`-integral uses the order of `rule` with 4 panels.
pub fn mapping_distance_upper_bound(
    target: &RiemannianSpace,
    f0: &LoopPoint,
    f1: &LoopPoint,
    rule: &CompositeRule,
) -> Result<f64> {
    mapping_path_length(
        target,
        &straight_homotopy(f0, f1)?,
        rule,
        &CompositeRule::new(rule.order, 4),
    )
}
