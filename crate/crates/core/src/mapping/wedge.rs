//! Maps on the wedge `S¹ ∨ S¹` and the concatenation of loop pairs
//! through the pinch map built from the bump `b`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{mapping_gram, weighted_gram, LoopPoint, MappingPlot};
use crate::bump::{bump_b, bump_b_derivative};
use crate::constructions::RiemannianSpace;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, symmetric_form};
use crate::quadrature::CompositeRule;

/// A point of `S¹ ∨ S¹`: an angle on the left or the right circle.
/// `Left(0)` and `Right(0)` are the same (attaching) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WedgeArg {
    Left(f64),
    Right(f64),
}

/// A smooth map `S¹ ∨ S¹ → N` into one plot of `N`.
#[derive(Clone)]
pub struct WedgeMap {
    pub plot: usize,
    pub f: Arc<dyn Fn(WedgeArg) -> Vec<f64> + Send + Sync>,
}

impl fmt::Debug for WedgeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WedgeMap(plot {})", self.plot)
    }
}

impl WedgeMap {
    pub fn eval(&self, x: WedgeArg) -> Vec<f64> {
        (self.f)(x)
    }
}

/// A pair of loops with a common basepoint `left(0) = right(0)`.
#[derive(Debug, Clone)]
pub struct WedgePoint {
    pub left: LoopPoint,
    pub right: LoopPoint,
}

impl WedgePoint {
    pub fn new(left: LoopPoint, right: LoopPoint, eps: f64) -> Result<Self> {
        let (a, b) = (left.eval(0.0), right.eval(0.0));
        if left.plot != right.plot || max_abs_diff(&a, &b) > eps {
            return Err(Error::Construction(format!(
                "basepoints differ: {a:?} vs {b:?}"
            )));
        }
        Ok(Self { left, right })
    }
}

/// `l(γ) = (γ ∘ i, γ ∘ j)`.
pub fn l_convert(gamma: &WedgeMap) -> WedgePoint {
    let (g1, g2) = (gamma.f.clone(), gamma.f.clone());
    WedgePoint {
        left: LoopPoint {
            plot: gamma.plot,
            f: Arc::new(move |t| g1(WedgeArg::Left(t))),
        },
        right: LoopPoint {
            plot: gamma.plot,
            f: Arc::new(move |t| g2(WedgeArg::Right(t))),
        },
    }
}

/// The map on `S¹ ∨ S¹` that is `z.left` on the left circle and `z.right`
/// on the right one.
pub fn nu_convert(z: &WedgePoint, eps: f64) -> Result<WedgeMap> {
    let z = WedgePoint::new(z.left.clone(), z.right.clone(), eps)?;
    let (l, r) = (z.left.f.clone(), z.right.f.clone());
    Ok(WedgeMap {
        plot: z.left.plot,
        f: Arc::new(move |x| match x {
            WedgeArg::Left(t) => l(t),
            WedgeArg::Right(t) => r(t),
        }),
    })
}

/// The pinch `p: S¹ → S¹ ∨ S¹`: `b(θ)` on the left circle for `θ ∈ [0, π]`,
/// `b(θ − π)` on the right one for `θ ∈ [π, 2π]`.
pub fn pinch(theta: f64) -> WedgeArg {
    if theta <= PI {
        WedgeArg::Left(bump_b(theta))
    } else {
        WedgeArg::Right(bump_b(theta - PI))
    }
}

/// Speed of the pinch: `b′(θ)` or `b′(θ − π)`.
pub fn pinch_derivative(theta: f64) -> f64 {
    if theta <= PI {
        bump_b_derivative(theta)
    } else {
        bump_b_derivative(theta - PI)
    }
}

/// A plot of `C^∞(S¹ ∨ S¹, N)` as two loop families with the same
/// basepoint for every `r`.
#[derive(Debug, Clone)]
pub struct WedgePlot {
    pub left: MappingPlot,
    pub right: MappingPlot,
}

impl WedgePlot {
    /// Checks basepoint coherence on a grid of the common domain.
    pub fn new(left: MappingPlot, right: MappingPlot, eps: f64) -> Result<Self> {
        if left.domain.dim() != right.domain.dim() || left.target_plot != right.target_plot {
            return Err(Error::Construction(
                "wedge components need the same domain dimension and target plot".into(),
            ));
        }
        for r in left.domain.grid(5, 2.0) {
            if !right.domain.contains(&r) {
                continue;
            }
            let (a, b) = (left.eval(&r, 0.0), right.eval(&r, 0.0));
            if max_abs_diff(&a, &b) > eps {
                return Err(Error::Construction(format!(
                    "basepoints differ at r = {r:?}: {a:?} vs {b:?}"
                )));
            }
        }
        Ok(Self { left, right })
    }
}

/// `c ∘ P = p* P`, the loop family traversing the left loop on `[0, π]`
/// and the right one on `[π, 2π]`.
pub fn concatenate(w: &WedgePlot) -> MappingPlot {
    let (l, r) = (w.left.clone(), w.right.clone());
    let (lj, rj) = (w.left.clone(), w.right.clone());
    MappingPlot::new(
        w.left.domain.clone(),
        w.left.target_plot,
        move |x, t| match pinch(t) {
            WedgeArg::Left(s) => l.eval(x, s),
            WedgeArg::Right(s) => r.eval(x, s),
        },
    )
    .with_jacobian(move |x, t| match pinch(t) {
        WedgeArg::Left(s) => lj.r_jacobian(x, s),
        WedgeArg::Right(s) => rj.r_jacobian(x, s),
    })
}

/// Which metric the wedge mapping space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WedgeConvention {
    /// `g_∨(P) = g(P_left) + g(P_right)`.
    Vee,
    /// `g_∨(P) + g_N(ev₀ ∘ P)`: the attaching point is counted once more.
    AttachedTwice,
}

pub fn wedge_metric_eval(
    target: &RiemannianSpace,
    w: &WedgePlot,
    r: &[f64],
    v: &[f64],
    u: &[f64],
    rule: &CompositeRule,
    convention: WedgeConvention,
) -> Result<f64> {
    if v.len() != r.len() || u.len() != r.len() {
        return Err(Error::Usage(
            "tangent vectors do not match the plot dimension".into(),
        ));
    }
    let gram = mapping_gram(target, &w.left, r, rule)? + mapping_gram(target, &w.right, r, rule)?;
    let mut value = symmetric_form(&gram, v, u);
    if convention == WedgeConvention::AttachedTwice {
        let y = w.left.eval(r, 0.0);
        let g = target.metric.gram(w.left.target_plot, &y)?;
        let j = w.left.r_jacobian(r, 0.0);
        value += symmetric_form(&crate::linalg::congruence(&g, &j), v, u);
    }
    Ok(value)
}

/// The concatenated metric against the wedge metric at one tangent double.
#[derive(Debug, Clone, Serialize)]
pub struct ConcatenationDeviation {
    /// `g(c ∘ P)_r(v, w)` with the volume `dθ`.
    pub concatenated: f64,
    /// The same integrand against the pulled-back volume `p′(θ) dθ`.
    pub pulled_back: f64,
    /// `g_∨(P)_r(v, w)`.
    pub wedge: f64,
    /// `|concatenated − wedge| / |wedge|`.
    pub relative: f64,
    /// `|pulled_back − wedge| / |wedge|`.
    pub relative_pulled_back: f64,
}

pub fn concatenation_deviation(
    target: &RiemannianSpace,
    w: &WedgePlot,
    r: &[f64],
    v: &[f64],
    u: &[f64],
    rule: &CompositeRule,
) -> Result<ConcatenationDeviation> {
    let c = concatenate(w);
    let concatenated = symmetric_form(&mapping_gram(target, &c, r, rule)?, v, u);
    let pulled_back = symmetric_form(
        &weighted_gram(target, &c, r, rule, &pinch_derivative)?,
        v,
        u,
    );
    let wedge = wedge_metric_eval(target, w, r, v, u, rule, WedgeConvention::Vee)?;
    let scale = wedge.abs().max(f64::MIN_POSITIVE);
    Ok(ConcatenationDeviation {
        concatenated,
        pulled_back,
        wedge,
        relative: (concatenated - wedge).abs() / scale,
        relative_pulled_back: (pulled_back - wedge).abs() / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::euclidean;
    use crate::mapping::{based_circle, constant_family, mapping_metric_eval};
    use approx::assert_relative_eq;

    fn r2() -> RiemannianSpace {
        euclidean(2, None).unwrap()
    }

    #[test]
    fn constant_components_concatenate_to_a_constant() {
        let y = vec![1.0, -2.0];
        let w = WedgePlot::new(
            constant_family(y.clone(), 1),
            constant_family(y.clone(), 1),
            1e-12,
        )
        .unwrap();
        let c = concatenate(&w);
        for k in 0..40 {
            assert_eq!(c.eval(&[0.3], k as f64 * 0.16), y);
        }
        let rule = CompositeRule::default();
        assert_eq!(
            wedge_metric_eval(
                &r2(),
                &w,
                &[0.3],
                &[1.0],
                &[1.0],
                &rule,
                WedgeConvention::Vee
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn circle_then_rest() {
        let y = [0.0, 0.0];
        let w = WedgePlot::new(based_circle(y), constant_family(y.to_vec(), 1), 1e-12).unwrap();
        let c = concatenate(&w);
        let r = [1.0];
        // left loop on [0, π]: at θ = π/2 the pinch is halfway round
        let mid = c.eval(&r, PI / 2.0);
        assert_relative_eq!(mid[0], 2.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(mid[1], 0.0, epsilon = 1e-12);
        for k in 0..10 {
            assert!(max_abs_diff(&c.eval(&r, PI + 0.3 * k as f64), &y) <= 1e-15);
        }
    }

    #[test]
    fn wedge_value_is_two_pi_plus_zero() {
        let y = [0.0, 0.0];
        let w = WedgePlot::new(based_circle(y), constant_family(y.to_vec(), 1), 1e-12).unwrap();
        let v = wedge_metric_eval(
            &r2(),
            &w,
            &[0.5],
            &[1.0],
            &[1.0],
            &CompositeRule::default(),
            WedgeConvention::Vee,
        )
        .unwrap();
        assert_relative_eq!(v, 2.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn same_family_twice_doubles() {
        let f = based_circle([1.0, 1.0]);
        let w = WedgePlot::new(f.clone(), f.clone(), 1e-12).unwrap();
        let rule = CompositeRule::default();
        let one = mapping_metric_eval(&r2(), &f, &[0.2], &[1.0], &[1.0], &rule).unwrap();
        let both = wedge_metric_eval(
            &r2(),
            &w,
            &[0.2],
            &[1.0],
            &[1.0],
            &rule,
            WedgeConvention::Vee,
        )
        .unwrap();
        assert_relative_eq!(both, 2.0 * one, epsilon = 1e-12);
    }

    #[test]
    fn attached_twice_adds_the_basepoint_term() {
        let moving = crate::mapping::section_plot(&euclidean(2, None).unwrap(), 0);
        let w = WedgePlot::new(moving.clone(), moving, 1e-12).unwrap();
        let rule = CompositeRule::default();
        let (r, v) = ([0.1, 0.2], [1.0, 0.0]);
        let vee = wedge_metric_eval(&r2(), &w, &r, &v, &v, &rule, WedgeConvention::Vee).unwrap();
        let twice = wedge_metric_eval(&r2(), &w, &r, &v, &v, &rule, WedgeConvention::AttachedTwice)
            .unwrap();
        assert_relative_eq!(vee, 4.0 * PI, epsilon = 1e-12);
        assert_relative_eq!(twice - vee, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn incoherent_basepoints_are_rejected() {
        let err = WedgePlot::new(
            constant_family(vec![0.0, 0.0], 1),
            constant_family(vec![0.0, 1.0], 1),
            1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
    }

    #[test]
    fn pulled_back_volume_recovers_the_wedge_metric() {
        let w = WedgePlot::new(
            based_circle([0.0, 0.0]),
            constant_family(vec![0.0, 0.0], 1),
            1e-12,
        )
        .unwrap();
        let d =
            concatenation_deviation(&r2(), &w, &[0.5], &[1.0], &[1.0], &CompositeRule::default())
                .unwrap();
        assert!(d.relative_pulled_back < 1e-8, "{d:?}");
    }

    #[test]
    fn conversions_are_inverse() {
        let gamma = WedgeMap {
            plot: 0,
            f: Arc::new(|x| match x {
                WedgeArg::Left(t) => vec![t.sin(), 1.0 - t.cos()],
                WedgeArg::Right(t) => vec![(2.0 * t).sin(), 0.0],
            }),
        };
        let z = l_convert(&gamma);
        let back = nu_convert(&z, 1e-12).unwrap();
        for k in 0..30 {
            let t = 0.21 * k as f64;
            for x in [WedgeArg::Left(t), WedgeArg::Right(t)] {
                assert!(max_abs_diff(&gamma.eval(x), &back.eval(x)) <= 1e-9);
            }
            assert_eq!(z.left.eval(t), gamma.eval(WedgeArg::Left(t)));
        }
        let c = LoopPoint::constant(0, vec![2.0, 3.0]);
        let zc = l_convert(&nu_convert(&WedgePoint::new(c.clone(), c, 0.0).unwrap(), 0.0).unwrap());
        assert_eq!(zc.left.eval(1.0), vec![2.0, 3.0]);
        assert_eq!(zc.right.eval(4.0), vec![2.0, 3.0]);
    }

    #[test]
    fn conversion_rejects_incoherent_pairs() {
        let z = WedgePoint {
            left: LoopPoint::constant(0, vec![0.0]),
            right: LoopPoint::constant(0, vec![1.0]),
        };
        assert!(nu_convert(&z, 1e-9).is_err());
    }
}
