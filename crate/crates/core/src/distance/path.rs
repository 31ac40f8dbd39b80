use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bump::{smooth_step, smooth_step_derivative};
use crate::error::{Error, Result};
use crate::metric::WeakMetric;
use crate::quadrature::CompositeRule;
use crate::space::DiffeoSpace;

pub type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A curve `[0, 1] → U_P` in chart coordinates.
#[derive(Clone)]
pub enum Curve {
    /// Catmull–Rom spline through the control points at uniform parameters.
    Spline { points: Vec<Vec<f64>> },
    /// Arbitrary curve; derivative by central differences unless given.
    Custom {
        value: CurveFn,
        derivative: Option<CurveFn>,
    },
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Spline { points } => f.debug_struct("Spline").field("points", points).finish(),
            Curve::Custom { derivative, .. } => {
                write!(f, "Custom(analytic derivative: {})", derivative.is_some())
            }
        }
    }
}

impl Curve {
    pub fn straight(a: &[f64], b: &[f64]) -> Self {
        Curve::Spline {
            points: vec![a.to_vec(), b.to_vec()],
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            Curve::Spline { points } => spline_eval(points, t).0,
            Curve::Custom { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Vec<f64> {
        match self {
            Curve::Spline { points } => spline_eval(points, t).1,
            Curve::Custom {
                derivative: Some(d),
                ..
            } => d(t),
            Curve::Custom { value, .. } => {
                let h = 1e-6;
                let (a, b) = ((t - h).max(0.0), (t + h).min(1.0));
                let (fa, fb) = (value(a), value(b));
                fa.iter().zip(&fb).map(|(x, y)| (y - x) / (b - a)).collect()
            }
        }
    }

    pub fn reversed(&self) -> Curve {
        match self {
            Curve::Spline { points } => Curve::Spline {
                points: points.iter().rev().cloned().collect(),
            },
            Curve::Custom { value, derivative } => {
                let v = value.clone();
                Curve::Custom {
                    value: Arc::new(move |t| v(1.0 - t)),
                    derivative: derivative.clone().map(|d| {
                        Arc::new(move |t: f64| d(1.0 - t).into_iter().map(|x| -x).collect())
                            as CurveFn
                    }),
                }
            }
        }
    }
}

/// Value and derivative of the uniform Catmull–Rom spline through `points`.
/// End tangents are one-sided differences, so equally spaced collinear
/// points give a constant-speed straight line.
fn spline_eval(points: &[Vec<f64>], t: f64) -> (Vec<f64>, Vec<f64>) {
    let k = points.len();
    assert!(k >= 1, "spline needs at least one control point");
    let dim = points[0].len();
    if k == 1 {
        return (points[0].clone(), vec![0.0; dim]);
    }
    let pieces = (k - 1) as f64;
    let s = t.clamp(0.0, 1.0) * pieces;
    let i = (s.floor() as usize).min(k - 2);
    let u = s - i as f64;
    let tangent = |j: usize| -> Vec<f64> {
        let (a, b, scale) = if j == 0 {
            (&points[0], &points[1], 1.0)
        } else if j == k - 1 {
            (&points[k - 2], &points[k - 1], 1.0)
        } else {
            (&points[j - 1], &points[j + 1], 0.5)
        };
        a.iter().zip(b).map(|(x, y)| scale * (y - x)).collect()
    };
    let (m0, m1) = (tangent(i), tangent(i + 1));
    let (p0, p1) = (&points[i], &points[i + 1]);
    let (u2, u3) = (u * u, u * u * u);
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let d00 = 6.0 * u2 - 6.0 * u;
    let d10 = 3.0 * u2 - 4.0 * u + 1.0;
    let d01 = -6.0 * u2 + 6.0 * u;
    let d11 = 3.0 * u2 - 2.0 * u;
    let value = (0..dim)
        .map(|c| h00 * p0[c] + h10 * m0[c] + h01 * p1[c] + h11 * m1[c])
        .collect();
    let deriv = (0..dim)
        .map(|c| pieces * (d00 * p0[c] + d10 * m0[c] + d01 * p1[c] + d11 * m1[c]))
        .collect();
    (value, deriv)
}

/// A curve inside one generating plot. With `smoothed`, the curve is read
/// through the flat smooth step `ψ`, so every derivative vanishes at both
/// ends and segments join smoothly; the length is unchanged.
#[derive(Debug, Clone)]
pub struct PathSegment {
    pub plot: usize,
    pub curve: Curve,
    pub smoothed: bool,
}

impl PathSegment {
    pub fn new(plot: usize, curve: Curve) -> Self {
        Self {
            plot,
            curve,
            smoothed: false,
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        if self.smoothed {
            self.curve.eval(smooth_step(t))
        } else {
            self.curve.eval(t)
        }
    }

    pub fn derivative(&self, t: f64) -> Vec<f64> {
        if self.smoothed {
            let ds = smooth_step_derivative(t);
            self.curve
                .derivative(smooth_step(t))
                .into_iter()
                .map(|x| x * ds)
                .collect()
        } else {
            self.curve.derivative(t)
        }
    }

    pub fn start(&self) -> Vec<f64> {
        self.curve.eval(0.0)
    }

    pub fn end(&self) -> Vec<f64> {
        self.curve.eval(1.0)
    }

    /// Parameters where the curve is only finitely smooth (spline knots),
    /// including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let knots: Vec<f64> = match &self.curve {
            Curve::Spline { points } if points.len() > 2 => {
                let pieces = points.len() - 1;
                (0..=pieces).map(|i| i as f64 / pieces as f64).collect()
            }
            _ => vec![0.0, 1.0],
        };
        if self.smoothed {
            knots.into_iter().map(inverse_smooth_step).collect()
        } else {
            knots
        }
    }

    /// `∫₀¹ (g(P)_{c(t)}(c′, c′))^{1/2} dt`, with the rule's panels spread
    /// over the spline pieces so no panel straddles a knot. Leaving the plot
    /// domain at a quadrature node is an error.
    pub fn length(&self, g: &WeakMetric, space: &DiffeoSpace, rule: &CompositeRule) -> Result<f64> {
        let domain = &space.plot(self.plot)?.domain;
        let knots = self.breakpoints();
        let pieces = knots.len() - 1;
        let sub = CompositeRule::new(rule.order, rule.panels.div_ceil(pieces));
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += sub.try_integrate(w[0], w[1], |t| {
                let c = self.eval(t);
                if !domain.contains(&c) {
                    return Err(Error::InvalidPath(format!(
                        "segment in plot {} leaves its domain at t = {t}: {c:?}",
                        self.plot
                    )));
                }
                let d = self.derivative(t);
                let gram = g.gram(self.plot, &c)?;
                Ok(crate::linalg::symmetric_form(&gram, &d, &d).max(0.0).sqrt())
            })?;
        }
        Ok(total)
    }

    pub fn reversed(&self) -> PathSegment {
        PathSegment {
            plot: self.plot,
            curve: self.curve.reversed(),
            smoothed: self.smoothed,
        }
    }
}

fn inverse_smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if smooth_step(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// How consecutive segments are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Joint {
    /// Through glue record `entry`; `forward` means from its `from` plot to its `to` plot.
    /// The joint may slide inside the glue region.
    Glue { entry: usize, forward: bool },
    /// A fixed point shared by both segments.
    Fixed,
}

impl Joint {
    fn reversed(self) -> Joint {
        match self {
            Joint::Glue { entry, forward } => Joint::Glue {
                entry,
                forward: !forward,
            },
            Joint::Fixed => Joint::Fixed,
        }
    }
}

/// A path through a space as a chain of chart curves. Segment `k` occupies
/// the global parameter range `[k/n, (k+1)/n]`.
#[derive(Debug, Clone)]
pub struct PiecewisePath {
    pub segments: Vec<PathSegment>,
    pub joints: Vec<Joint>,
}

impl PiecewisePath {
    pub fn single(segment: PathSegment) -> Self {
        Self {
            segments: vec![segment],
            joints: Vec::new(),
        }
    }

    pub fn new(segments: Vec<PathSegment>, joints: Vec<Joint>) -> Result<Self> {
        if segments.is_empty() || joints.len() + 1 != segments.len() {
            return Err(Error::InvalidPath(format!(
                "{} segments need {} joints, got {}",
                segments.len(),
                segments.len().saturating_sub(1),
                joints.len()
            )));
        }
        Ok(Self { segments, joints })
    }

    pub fn start(&self) -> (usize, Vec<f64>) {
        let s = &self.segments[0];
        (s.plot, s.start())
    }

    pub fn end(&self) -> (usize, Vec<f64>) {
        let s = self.segments.last().expect("nonempty path");
        (s.plot, s.end())
    }

    pub fn reversed(&self) -> PiecewisePath {
        PiecewisePath {
            segments: self
                .segments
                .iter()
                .rev()
                .map(PathSegment::reversed)
                .collect(),
            joints: self.joints.iter().rev().map(|j| j.reversed()).collect(),
        }
    }

    /// `self` followed by `other`, attached at a fixed joint.
    pub fn concat(&self, other: &PiecewisePath) -> PiecewisePath {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        let mut joints = self.joints.clone();
        joints.push(Joint::Fixed);
        joints.extend(other.joints.iter().copied());
        PiecewisePath { segments, joints }
    }

    pub fn smoothed(&self) -> PiecewisePath {
        let mut out = self.clone();
        for s in &mut out.segments {
            s.smoothed = true;
        }
        out
    }

    /// Checks that every segment stays in its plot domain (at 33 sample
    /// parameters) and that consecutive endpoints are equal points.
    pub fn validate(&self, space: &DiffeoSpace) -> Result<()> {
        for (k, seg) in self.segments.iter().enumerate() {
            let domain = &space.plot(seg.plot)?.domain;
            for i in 0..=32 {
                let t = i as f64 / 32.0;
                let c = seg.eval(t);
                if !domain.contains(&c) {
                    return Err(Error::InvalidPath(format!(
                        "segment {k} leaves the domain of plot {} at t = {t}",
                        seg.plot
                    )));
                }
            }
        }
        for (k, pair) in self.segments.windows(2).enumerate() {
            let a = space.point(pair[0].plot, pair[0].end());
            let b = space.point(pair[1].plot, pair[1].start());
            if !space.points_equal(&a, &b)? {
                return Err(Error::InvalidPath(format!(
                    "joint {k} is broken: plot {} at {:?} ≠ plot {} at {:?}",
                    pair[0].plot,
                    pair[0].end(),
                    pair[1].plot,
                    pair[1].start()
                )));
            }
        }
        Ok(())
    }

    /// Validation plus agreement of the endpoints with `from` and `to`.
    pub fn validate_endpoints(
        &self,
        space: &DiffeoSpace,
        from: &crate::space::Point,
        to: &crate::space::Point,
    ) -> Result<()> {
        self.validate(space)?;
        let (sp, sc) = self.start();
        let (ep, ec) = self.end();
        if !space.points_equal(&space.point(sp, sc), from)? {
            return Err(Error::InvalidPath(
                "path does not start at the declared point".into(),
            ));
        }
        if !space.points_equal(&space.point(ep, ec), to)? {
            return Err(Error::InvalidPath(
                "path does not end at the declared point".into(),
            ));
        }
        Ok(())
    }

    /// Witness description: control points per segment (sampled points for
    /// custom curves).
    pub fn to_witness(&self) -> WitnessPath {
        WitnessPath {
            segments: self
                .segments
                .iter()
                .map(|s| WitnessSegment {
                    plot: s.plot,
                    smoothed: s.smoothed,
                    kind: match s.curve {
                        Curve::Spline { .. } => "catmull-rom".into(),
                        Curve::Custom { .. } => "sampled".into(),
                    },
                    control_points: match &s.curve {
                        Curve::Spline { points } => points.clone(),
                        Curve::Custom { value, .. } => {
                            (0..=16).map(|i| value(i as f64 / 16.0)).collect()
                        }
                    },
                })
                .collect(),
            joints: self.joints.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSegment {
    pub plot: usize,
    pub smoothed: bool,
    pub kind: String,
    pub control_points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPath {
    pub segments: Vec<WitnessSegment>,
    pub joints: Vec<Joint>,
}

impl WitnessPath {
    pub fn to_path(&self) -> Result<PiecewisePath> {
        let segments = self
            .segments
            .iter()
            .map(|s| PathSegment {
                plot: s.plot,
                curve: Curve::Spline {
                    points: s.control_points.clone(),
                },
                smoothed: s.smoothed,
            })
            .collect();
        PiecewisePath::new(segments, self.joints.clone())
    }
}

/// `ℓ(γ) = Σ_k ∫ (g(P_k)_{c_k(t)}(c_k′, c_k′))^{1/2} dt` after validating `γ`.
pub fn path_length(
    space: &DiffeoSpace,
    g: &WeakMetric,
    path: &PiecewisePath,
    rule: &CompositeRule,
) -> Result<f64> {
    path.validate(space)?;
    path.segments.iter().map(|s| s.length(g, space, rule)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::euclidean;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn straight_segment_length() {
        let r2 = euclidean(2, None).unwrap();
        let path = PiecewisePath::single(PathSegment::new(
            0,
            Curve::straight(&[0.0, 0.0], &[3.0, 4.0]),
        ));
        let l = path_length(&r2.space, &r2.metric, &path, &CompositeRule::default()).unwrap();
        assert_relative_eq!(l, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn constant_path_has_zero_length() {
        let r2 = euclidean(2, None).unwrap();
        let path = PiecewisePath::single(PathSegment::new(
            0,
            Curve::Spline {
                points: vec![vec![1.0, 1.0]],
            },
        ));
        assert_eq!(
            path_length(&r2.space, &r2.metric, &path, &CompositeRule::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn full_circle_has_length_two_pi() {
        let r2 = euclidean(2, None).unwrap();
        let curve = Curve::Custom {
            value: Arc::new(|t| vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]),
            derivative: Some(Arc::new(|t| {
                vec![
                    -2.0 * PI * (2.0 * PI * t).sin(),
                    2.0 * PI * (2.0 * PI * t).cos(),
                ]
            })),
        };
        let path = PiecewisePath::single(PathSegment::new(0, curve));
        let l = path_length(&r2.space, &r2.metric, &path, &CompositeRule::default()).unwrap();
        assert_relative_eq!(l, 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn spline_interpolates_control_points() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 2.0],
            vec![3.0, -1.0],
            vec![4.0, 0.5],
        ];
        let c = Curve::Spline {
            points: pts.clone(),
        };
        for (k, p) in pts.iter().enumerate() {
            let v = c.eval(k as f64 / 3.0);
            assert_relative_eq!(v[0], p[0], epsilon = 1e-12);
            assert_relative_eq!(v[1], p[1], epsilon = 1e-12);
        }
        // derivative against central differences
        for t in [0.1, 0.37, 0.5, 0.81] {
            let h = 1e-6;
            let (a, b) = (c.eval(t - h), c.eval(t + h));
            let d = c.derivative(t);
            for i in 0..2 {
                assert_relative_eq!(d[i], (b[i] - a[i]) / (2.0 * h), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn smoothing_keeps_length() {
        let r2 = euclidean(2, None).unwrap();
        let path = PiecewisePath::single(PathSegment::new(
            0,
            Curve::straight(&[0.0, 0.0], &[3.0, 4.0]),
        ));
        let l = path_length(
            &r2.space,
            &r2.metric,
            &path.smoothed(),
            &CompositeRule::default(),
        )
        .unwrap();
        assert_relative_eq!(l, 5.0, epsilon = 1e-9);
        let d = path.smoothed().segments[0].derivative(0.0);
        assert_eq!(d, vec![0.0, 0.0]);
    }

    #[test]
    fn broken_joint_is_reported() {
        let r1 = euclidean(1, None).unwrap();
        let path = PiecewisePath::new(
            vec![
                PathSegment::new(0, Curve::straight(&[0.0], &[1.0])),
                PathSegment::new(0, Curve::straight(&[1.5], &[2.0])),
            ],
            vec![Joint::Fixed],
        )
        .unwrap();
        let err = path_length(&r1.space, &r1.metric, &path, &CompositeRule::default()).unwrap_err();
        assert!(
            matches!(err, Error::InvalidPath(ref m) if m.contains("joint 0")),
            "{err}"
        );
    }

    #[test]
    fn reversal_preserves_length() {
        let r2 = euclidean(2, None).unwrap();
        let path = PiecewisePath::single(PathSegment::new(
            0,
            Curve::Spline {
                points: vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, -1.0]],
            },
        ));
        let rule = CompositeRule::default();
        let a = path_length(&r2.space, &r2.metric, &path, &rule).unwrap();
        let b = path_length(&r2.space, &r2.metric, &path.reversed(), &rule).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-13);
    }
}
