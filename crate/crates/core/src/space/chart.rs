use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// An open box in `ℝⁿ`, optionally refined by a membership predicate.
#[derive(Clone)]
pub struct ChartDomain {
    bounds: Vec<(f64, f64)>,
    membership: Option<Predicate>,
}

impl fmt::Debug for ChartDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartDomain")
            .field("bounds", &self.bounds)
            .field("membership", &self.membership.is_some())
            .finish()
    }
}

impl ChartDomain {
    /// All of `ℝⁿ`.
    pub fn euclidean(dim: usize) -> Self {
        Self::boxed(vec![(f64::NEG_INFINITY, f64::INFINITY); dim])
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Self {
        Self {
            bounds,
            membership: None,
        }
    }

    pub fn with_membership(mut self, pred: Predicate) -> Self {
        self.membership = Some(pred);
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, r: &[f64]) -> bool {
        r.len() == self.dim()
            && r.iter()
                .zip(&self.bounds)
                .all(|(x, (lo, hi))| x.is_finite() && *x > *lo && *x < *hi)
            && self.membership.as_ref().is_none_or(|m| m(r))
    }

    /// Distance from `r` to the nearest box face (`+∞` for `ℝⁿ`).
    pub fn boundary_distance(&self, r: &[f64]) -> f64 {
        r.iter()
            .zip(&self.bounds)
            .map(|(x, (lo, hi))| (x - lo).min(hi - x))
            .fold(f64::INFINITY, f64::min)
    }

    /// The box clipped to `[-window, window]` on each axis.
    pub fn window(&self, window: f64) -> Vec<(f64, f64)> {
        self.bounds
            .iter()
            .map(|(lo, hi)| (lo.max(-window), hi.min(window)))
            .collect()
    }

    /// Tensor grid with `n` points per axis over the windowed box, keeping
    /// only points that lie in the (open) domain.
    pub fn grid(&self, n: usize, window: f64) -> Vec<Vec<f64>> {
        grid_points(&self.window(window), n)
            .into_iter()
            .filter(|p| self.contains(p))
            .collect()
    }

    /// Uniform sample from the windowed box shrunk by `margin`, retried until
    /// the membership predicate accepts.
    pub fn sample<R: Rng>(&self, rng: &mut R, window: f64, margin: f64) -> Option<Vec<f64>> {
        let bounds = self.window(window);
        for _ in 0..1000 {
            let p: Vec<f64> = bounds
                .iter()
                .map(|(lo, hi)| {
                    let (a, b) = (lo + margin, hi - margin);
                    if a >= b {
                        0.5 * (lo + hi)
                    } else {
                        rng.gen_range(a..b)
                    }
                })
                .collect();
            if self.contains(&p) {
                return Some(p);
            }
        }
        None
    }

    pub fn product(&self, other: &ChartDomain) -> ChartDomain {
        let mut bounds = self.bounds.clone();
        bounds.extend_from_slice(&other.bounds);
        let split = self.dim();
        let (a, b) = (self.membership.clone(), other.membership.clone());
        let mut out = ChartDomain::boxed(bounds);
        if a.is_some() || b.is_some() {
            out.membership = Some(Arc::new(move |r: &[f64]| {
                a.as_ref().is_none_or(|m| m(&r[..split]))
                    && b.as_ref().is_none_or(|m| m(&r[split..]))
            }));
        }
        out
    }
}

/// Points of a tensor grid with `n` points per axis (`n == 1` gives midpoints).
pub fn grid_points(bounds: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            if n <= 1 || lo == hi {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Clone)]
pub enum JacobianMode {
    Analytic(MatrixFn),
    FiniteDifference { step: f64 },
}

impl fmt::Debug for JacobianMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JacobianMode::Analytic(_) => write!(f, "Analytic"),
            JacobianMode::FiniteDifference { step } => write!(f, "FiniteDifference({step})"),
        }
    }
}

/// A smooth map between chart domains together with access to its Jacobian.
#[derive(Clone)]
pub struct ChartMap {
    source: ChartDomain,
    target: ChartDomain,
    value: VectorFn,
    jacobian: JacobianMode,
}

impl fmt::Debug for ChartMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMap")
            .field("source", &self.source)
            .field("target", &self.target)
            .field("jacobian", &self.jacobian)
            .finish()
    }
}

impl ChartMap {
    /// A map whose Jacobian is taken by central differences with the default step.
    pub fn new(source: ChartDomain, target: ChartDomain, value: VectorFn) -> Self {
        Self {
            source,
            target,
            value,
            jacobian: JacobianMode::FiniteDifference {
                step: DEFAULT_FD_STEP,
            },
        }
    }

    pub fn from_fn<F>(source: ChartDomain, target: ChartDomain, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(source, target, Arc::new(f))
    }

    pub fn with_jacobian<F>(mut self, j: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = JacobianMode::Analytic(Arc::new(j));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.jacobian = JacobianMode::FiniteDifference { step };
        self
    }

    pub fn identity(domain: ChartDomain) -> Self {
        let n = domain.dim();
        Self::new(domain.clone(), domain, Arc::new(|r: &[f64]| r.to_vec()))
            .with_jacobian(move |_| DMatrix::identity(n, n))
    }

    /// `r ↦ A r + b` on all of `ℝⁿ`.
    pub fn affine(a: DMatrix<f64>, b: Vec<f64>) -> Self {
        let (m, n) = a.shape();
        assert_eq!(b.len(), m);
        let lin = a.clone();
        Self::from_fn(
            ChartDomain::euclidean(n),
            ChartDomain::euclidean(m),
            move |r| {
                (0..m)
                    .map(|i| b[i] + (0..n).map(|j| lin[(i, j)] * r[j]).sum::<f64>())
                    .collect()
            },
        )
        .with_jacobian(move |_| a.clone())
    }

    pub fn source(&self) -> &ChartDomain {
        &self.source
    }

    pub fn target(&self) -> &ChartDomain {
        &self.target
    }

    pub fn jacobian_mode(&self) -> &JacobianMode {
        &self.jacobian
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        (self.value)(r)
    }

    pub fn value_fn(&self) -> VectorFn {
        self.value.clone()
    }

    /// `target.dim × source.dim` Jacobian at `r`.
    pub fn jacobian(&self, r: &[f64]) -> Result<DMatrix<f64>> {
        if r.len() != self.source.dim() {
            return Err(Error::Usage(format!(
                "jacobian: point has dimension {}, map source has {}",
                r.len(),
                self.source.dim()
            )));
        }
        match &self.jacobian {
            JacobianMode::Analytic(j) => {
                let m = j(r);
                if m.shape() != (self.target.dim(), self.source.dim()) {
                    return Err(Error::Usage(format!(
                        "analytic jacobian has shape {:?}, expected {:?}",
                        m.shape(),
                        (self.target.dim(), self.source.dim())
                    )));
                }
                Ok(m)
            }
            JacobianMode::FiniteDifference { step } => {
                if self.source.boundary_distance(r) <= *step {
                    return Err(Error::Boundary {
                        point: r.to_vec(),
                        step: *step,
                    });
                }
                Ok(central_difference(
                    &*self.value,
                    r,
                    self.target.dim(),
                    *step,
                ))
            }
        }
    }

    /// `(r₁, r₂) ↦ (self(r₁), other(r₂))`.
    pub fn product(&self, other: &ChartMap) -> ChartMap {
        let split = self.source.dim();
        let (f, g) = (self.value.clone(), other.value.clone());
        let value: VectorFn = Arc::new(move |r: &[f64]| {
            let mut out = f(&r[..split]);
            out.extend(g(&r[split..]));
            out
        });
        let jacobian = match (&self.jacobian, &other.jacobian) {
            (JacobianMode::Analytic(jf), JacobianMode::Analytic(jg)) => {
                let (jf, jg) = (jf.clone(), jg.clone());
                JacobianMode::Analytic(Arc::new(move |r: &[f64]| {
                    let (a, b) = (jf(&r[..split]), jg(&r[split..]));
                    let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
                    m.view_mut((0, 0), a.shape()).copy_from(&a);
                    m.view_mut(a.shape(), b.shape()).copy_from(&b);
                    m
                }))
            }
            (JacobianMode::FiniteDifference { step }, _)
            | (_, JacobianMode::FiniteDifference { step }) => {
                JacobianMode::FiniteDifference { step: *step }
            }
        };
        ChartMap {
            source: self.source.product(&other.source),
            target: self.target.product(&other.target),
            value,
            jacobian,
        }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ChartMap) -> ChartMap {
        let (f, g) = (self.value.clone(), next.value.clone());
        let value: VectorFn = Arc::new(move |r: &[f64]| g(&f(r)));
        let jacobian = match (&self.jacobian, &next.jacobian) {
            (JacobianMode::Analytic(jf), JacobianMode::Analytic(jg)) => {
                let (jf, jg, f) = (jf.clone(), jg.clone(), self.value.clone());
                JacobianMode::Analytic(Arc::new(move |r: &[f64]| jg(&f(r)) * jf(r)))
            }
            (JacobianMode::FiniteDifference { step }, _)
            | (_, JacobianMode::FiniteDifference { step }) => {
                JacobianMode::FiniteDifference { step: *step }
            }
        };
        ChartMap {
            source: self.source.clone(),
            target: next.target.clone(),
            value,
            jacobian,
        }
    }
}

/// Central-difference Jacobian of `f: ℝⁿ → ℝᵐ` at `r`.
pub fn central_difference(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    r: &[f64],
    m: usize,
    h: f64,
) -> DMatrix<f64> {
    let n = r.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut x = r.to_vec();
    for j in 0..n {
        x[j] = r[j] + h;
        let fp = f(&x);
        x[j] = r[j] - h;
        let fm = f(&x);
        x[j] = r[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// One axis of a glue region: an interval that may be open or closed at
/// either end. A closed degenerate interval `[a, a]` is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn point(a: f64) -> Self {
        Self {
            lo: a,
            hi: a,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn full() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo
        };
        let below = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi
        };
        above && below
    }

    /// The closed interval that stays `margin` away from every finite open end.
    pub fn shrunk(&self, margin: f64) -> (f64, f64) {
        let lo = if self.lo_open && self.lo.is_finite() {
            self.lo + margin
        } else {
            self.lo
        };
        let hi = if self.hi_open && self.hi.is_finite() {
            self.hi - margin
        } else {
            self.hi
        };
        (lo, hi)
    }
}

/// Per-axis product of intervals: the coordinates (in the source plot of a
/// glue record) where the identification applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueRegion {
    pub axes: Vec<Interval>,
}

impl GlueRegion {
    pub fn new(axes: Vec<Interval>) -> Self {
        Self { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, r: &[f64]) -> bool {
        r.len() == self.axes.len() && r.iter().zip(&self.axes).all(|(x, i)| i.contains(*x))
    }

    /// Clamps `r` into the region shrunk by `margin` at open finite ends.
    /// Returns `None` if the shrunk region is empty on some axis.
    pub fn clamp(&self, r: &[f64], margin: f64) -> Option<Vec<f64>> {
        r.iter()
            .zip(&self.axes)
            .map(|(x, i)| {
                let (lo, hi) = i.shrunk(margin);
                (lo <= hi).then(|| x.clamp(lo, hi))
            })
            .collect()
    }

    /// `k` anchor points per axis spread over the shrunk region, clipped to
    /// `[-window, window]` on unbounded sides.
    pub fn anchors(&self, k: usize, margin: f64, window: f64) -> Vec<Vec<f64>> {
        let bounds: Option<Vec<(f64, f64)>> = self
            .axes
            .iter()
            .map(|i| {
                let (lo, hi) = i.shrunk(margin);
                let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => (lo, hi),
                    (true, false) => (lo, window.max(lo + 1.0)),
                    (false, true) => ((-window).min(hi - 1.0), hi),
                    (false, false) => (-window, window),
                };
                (lo <= hi).then_some((lo, hi))
            })
            .collect();
        match bounds {
            Some(b) => grid_points(&b, k),
            None => Vec::new(),
        }
    }
}
