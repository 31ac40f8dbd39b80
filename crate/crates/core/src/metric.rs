//! Weak Riemannian metrics: one symmetric positive 2-tensor field per
//! generating plot, compatible under precomposition by chart maps.

use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{congruence, dist, jacobi_eigen, mat_vec, symmetric_form, symmetrize};
use crate::sampling;
use crate::space::{
    factorize_map, ChartMap, DiffeoSpace, LocalFactorization, SmoothMap, SpaceId, SpaceRef,
    TangentDouble,
};

/// Gram matrix of `g(P)_r` on the standard basis of the plot domain.
pub type TensorField = Arc<dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync>;

/// Eigenvalue threshold below which a Gram matrix counts as degenerate.
pub const DEFINITENESS_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct WeakMetric {
    space: SpaceId,
    fields: Vec<TensorField>,
}

impl fmt::Debug for WeakMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakMetric")
            .field("space", &self.space)
            .field("plots", &self.fields.len())
            .finish()
    }
}

impl WeakMetric {
    pub fn new(space: &DiffeoSpace, fields: Vec<TensorField>) -> Result<Self> {
        if fields.len() != space.plots.len() {
            return Err(Error::Construction(format!(
                "{} tensor fields for {} generating plots",
                fields.len(),
                space.plots.len()
            )));
        }
        Ok(Self {
            space: space.id,
            fields,
        })
    }

    /// Same Gram matrix at every point of every plot.
    pub fn constant(space: &DiffeoSpace, gram: DMatrix<f64>) -> Result<Self> {
        let field: TensorField = Arc::new(move |_| Ok(gram.clone()));
        Self::new(space, vec![field; space.plots.len()])
    }

    /// The identity tensor on every plot.
    pub fn standard(space: &DiffeoSpace) -> Self {
        let fields = space
            .plots
            .iter()
            .map(|p| {
                let n = p.dim();
                Arc::new(move |_: &[f64]| Ok(DMatrix::identity(n, n))) as TensorField
            })
            .collect();
        Self {
            space: space.id,
            fields,
        }
    }

    /// Rebinds the same fields to another space with the same plot layout.
    pub fn rebind(&self, space: &DiffeoSpace) -> Result<Self> {
        Self::new(space, self.fields.clone())
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn field(&self, plot: usize) -> Result<&TensorField> {
        self.fields
            .get(plot)
            .ok_or_else(|| Error::Usage(format!("metric has no tensor for plot {plot}")))
    }

    pub fn fields(&self) -> &[TensorField] {
        &self.fields
    }

    pub fn gram(&self, plot: usize, r: &[f64]) -> Result<DMatrix<f64>> {
        let g = (self.field(plot)?)(r)?;
        if g.nrows() != r.len() || g.ncols() != r.len() {
            return Err(Error::Usage(format!(
                "tensor of plot {plot} has shape {:?} at a point of dimension {}",
                g.shape(),
                r.len()
            )));
        }
        Ok(g)
    }

    /// `g(P)_r(v, w)`.
    pub fn eval(&self, t: &TangentDouble) -> Result<f64> {
        let g = self.gram(t.plot, &t.r)?;
        if t.v.len() != t.r.len() || t.w.len() != t.r.len() {
            return Err(Error::Usage(
                "tangent vectors do not match the plot dimension".into(),
            ));
        }
        Ok(symmetric_form(&g, &t.v, &t.w))
    }

    /// `c · g`.
    pub fn scaled(&self, c: f64) -> WeakMetric {
        let fields = self
            .fields
            .iter()
            .map(|f| {
                let f = f.clone();
                Arc::new(move |r: &[f64]| Ok(f(r)? * c)) as TensorField
            })
            .collect();
        WeakMetric {
            space: self.space,
            fields,
        }
    }
}

/// `g(P)_r(v, w)` for `t = [P, r, v, w]`.
pub fn metric_eval(g: &WeakMetric, t: &TangentDouble) -> Result<f64> {
    g.eval(t)
}

struct CachedFactorization {
    plot: usize,
    center: Vec<f64>,
    fac: LocalFactorization,
}

/// The pullback `φ*g`: on a plot `P` near `r`, with `φ∘P = Q∘h`, the tensor
/// is `Jhᵀ · g(Q)_{h(r)} · Jh`. Factorizations are cached per ball.
pub fn pullback(map: &SmoothMap, source: &SpaceRef, g_target: &WeakMetric) -> Result<WeakMetric> {
    if g_target.space != map.target().id {
        return Err(Error::Usage(
            "pullback: metric does not live on the map's target".into(),
        ));
    }
    // the oracle has to answer on every generating plot
    for (k, plot) in source.plots.iter().enumerate() {
        let probe = plot
            .domain
            .grid(3, 1.0)
            .into_iter()
            .next()
            .or_else(|| plot.domain.sample(&mut sampling::rng(k as u64), 1.0, 0.0));
        if let Some(r) = probe {
            factorize_map(map, source, k, &r).map_err(|e| Error::Pullback {
                plot: k,
                point: r.clone(),
                reason: e.to_string(),
            })?;
        }
    }
    let cache: Arc<Mutex<Vec<CachedFactorization>>> = Arc::new(Mutex::new(Vec::new()));
    let fields = (0..source.plots.len())
        .map(|plot| {
            let (map, source, g, cache) =
                (map.clone(), source.clone(), g_target.clone(), cache.clone());
            Arc::new(move |r: &[f64]| {
                let hit = cache
                    .lock()
                    .expect("factorization cache poisoned")
                    .iter()
                    .find(|c| c.plot == plot && dist(&c.center, r) < c.fac.radius)
                    .map(|c| c.fac.clone());
                let fac = match hit {
                    Some(f) => f,
                    None => {
                        let f =
                            factorize_map(&map, &source, plot, r).map_err(|e| Error::Pullback {
                                plot,
                                point: r.to_vec(),
                                reason: e.to_string(),
                            })?;
                        cache.lock().expect("factorization cache poisoned").push(
                            CachedFactorization {
                                plot,
                                center: r.to_vec(),
                                fac: f.clone(),
                            },
                        );
                        f
                    }
                };
                let pulled = |e: Error| Error::Pullback {
                    plot,
                    point: r.to_vec(),
                    reason: e.to_string(),
                };
                let jac = fac.chart_map.jacobian(r).map_err(pulled)?;
                let inner = g
                    .gram(fac.target_plot, &fac.chart_map.apply(r))
                    .map_err(pulled)?;
                Ok(congruence(&inner, &jac))
            }) as TensorField
        })
        .collect();
    Ok(WeakMetric {
        space: source.id,
        fields,
    })
}

/// Sampling parameters shared by the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub samples: usize,
    pub tol: f64,
    /// Sample points are drawn from each domain clipped to `[-window, window]`.
    pub window: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            tol: 1e-6,
            window: 2.0,
            seed: 7,
        }
    }
}

/// Worst absolute deviation between two tensor evaluations over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub tol: f64,
    pub passed: bool,
    pub worst: Option<TangentDouble>,
}

impl DeviationReport {
    fn empty(tol: f64) -> Self {
        Self {
            samples: 0,
            max_deviation: 0.0,
            tol,
            passed: true,
            worst: None,
        }
    }

    fn record(&mut self, deviation: f64, at: &TangentDouble) {
        self.samples += 1;
        if deviation > self.max_deviation || self.worst.is_none() {
            self.max_deviation = self.max_deviation.max(deviation);
            self.worst = Some(at.clone());
        }
        self.passed = self.max_deviation <= self.tol;
    }
}

/// A chart map `f` with `Q ∘ f = P` between generating plots of one space.
#[derive(Debug, Clone)]
pub struct NaturalityPair {
    pub source_plot: usize,
    pub target_plot: usize,
    pub map: ChartMap,
}

/// Checks `g(P)_r(v,w) = g(Q)_{f(r)}(Jf·v, Jf·w)` at random samples. Each
/// sample point is first verified to satisfy `P(r) = Q(f(r))`.
pub fn check_naturality(
    space: &DiffeoSpace,
    g: &WeakMetric,
    pairs: &[NaturalityPair],
    cfg: &CheckConfig,
) -> Result<DeviationReport> {
    let mut report = DeviationReport::empty(cfg.tol);
    let mut rng = sampling::rng(cfg.seed);
    for pair in pairs {
        let p_domain = &space.plot(pair.source_plot)?.domain;
        for _ in 0..cfg.samples {
            let Some(r) = pair.map.source().sample(&mut rng, cfg.window, 1e-3) else {
                return Err(Error::Precondition(
                    "naturality pair has an empty sampling region".into(),
                ));
            };
            if !p_domain.contains(&r) {
                continue;
            }
            let fr = pair.map.apply(&r);
            let lhs_point = space.eval_plot(pair.source_plot, &r)?;
            let rhs_point = space.eval_plot(pair.target_plot, &fr)?;
            if !space.points_equal(&lhs_point, &rhs_point)? {
                return Err(Error::Precondition(format!(
                    "Q∘f ≠ P at {r:?} for plots {} → {}",
                    pair.source_plot, pair.target_plot
                )));
            }
            let n = r.len();
            let v = sampling::unit_vector(&mut rng, n);
            let w = sampling::unit_vector(&mut rng, n);
            let jac = pair.map.jacobian(&r)?;
            let gp = g.gram(pair.source_plot, &r)?;
            let gq = g.gram(pair.target_plot, &fr)?;
            for (a, b) in [(&v, &w), (&v, &v)] {
                let lhs = symmetric_form(&gp, a, b);
                let rhs = symmetric_form(&gq, &mat_vec(&jac, a), &mat_vec(&jac, b));
                let t = TangentDouble::new(pair.source_plot, r.clone(), a.clone(), b.clone());
                report.record((lhs - rhs).abs(), &t);
            }
        }
    }
    Ok(report)
}

/// Naturality pairs for every glue record with a nonempty open region.
pub fn glue_naturality_pairs(space: &DiffeoSpace) -> Vec<NaturalityPair> {
    use crate::space::ChartDomain;
    space
        .glue
        .iter()
        .filter_map(|e| {
            let bounds: Vec<(f64, f64)> = e.region.axes.iter().map(|i| (i.lo, i.hi)).collect();
            if bounds.iter().any(|(lo, hi)| lo >= hi) {
                return None;
            }
            let domain = ChartDomain::boxed(bounds);
            let t = e.transfer.value_fn();
            let mut map = ChartMap::new(domain, e.transfer.target().clone(), t);
            if let crate::space::JacobianMode::Analytic(j) = e.transfer.jacobian_mode() {
                let j = j.clone();
                map = map.with_jacobian(move |r| j(r));
            }
            Some(NaturalityPair {
                source_plot: e.from,
                target_plot: e.to,
                map,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Definite,
    Indefinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub plot: usize,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub window: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_axis: 11,
            window: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessReport {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub grid: GridSpec,
    pub tol: f64,
    pub points_checked: usize,
    /// Smallest Gram eigenvalue seen on the grid.
    pub min_eigenvalue: Option<f64>,
    pub errors: Vec<String>,
}

impl DefinitenessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const MAX_WITNESSES: usize = 32;

/// Grid certification of definiteness: the minimum eigenvalue of the
/// symmetrized Gram matrix must exceed `tol` at every grid point of every
/// generating plot.
pub fn definiteness_check(
    space: &DiffeoSpace,
    g: &WeakMetric,
    grid: &GridSpec,
    tol: f64,
) -> DefinitenessReport {
    let mut witnesses = Vec::new();
    let mut errors = Vec::new();
    let mut min_eig: Option<f64> = None;
    let mut checked = 0;
    for (k, plot) in space.plots.iter().enumerate() {
        if plot.dim() == 0 {
            continue;
        }
        for r in plot.domain.grid(grid.points_per_axis, grid.window) {
            match g.gram(k, &r) {
                Ok(gram) => {
                    checked += 1;
                    let eig = jacobi_eigen(&symmetrize(&gram));
                    let (lambda, v) = eig.min().expect("nonempty Gram matrix");
                    min_eig = Some(min_eig.map_or(lambda, |m| m.min(lambda)));
                    if lambda <= tol {
                        witnesses.push(Witness {
                            plot: k,
                            r,
                            v,
                            min_eigenvalue: lambda,
                        });
                    }
                }
                Err(e) => errors.push(format!("plot {k} at {r:?}: {e}")),
            }
        }
    }
    witnesses.sort_by(|a, b| a.min_eigenvalue.total_cmp(&b.min_eigenvalue));
    witnesses.truncate(MAX_WITNESSES);
    let verdict = if !errors.is_empty() {
        Verdict::Inconclusive
    } else if witnesses.is_empty() {
        Verdict::Definite
    } else {
        Verdict::Indefinite
    };
    DefinitenessReport {
        verdict,
        witnesses,
        grid: *grid,
        tol,
        points_checked: checked,
        min_eigenvalue: min_eig,
        errors,
    }
}

/// Compares `φ*g_Y` with `g_X` at random tangent pairs of the source.
pub fn isometry_check(
    map: &SmoothMap,
    source: &SpaceRef,
    g_source: &WeakMetric,
    g_target: &WeakMetric,
    cfg: &CheckConfig,
) -> Result<DeviationReport> {
    let pulled = pullback(map, source, g_target)?;
    compare_metrics(source, &pulled, g_source, cfg)
}

/// Max `|g₁(P)_r(v,w) − g₂(P)_r(v,w)|` over random samples of every plot.
pub fn compare_metrics(
    space: &DiffeoSpace,
    g1: &WeakMetric,
    g2: &WeakMetric,
    cfg: &CheckConfig,
) -> Result<DeviationReport> {
    let mut report = DeviationReport::empty(cfg.tol);
    let mut rng = sampling::rng(cfg.seed);
    for (k, plot) in space.plots.iter().enumerate() {
        for _ in 0..cfg.samples {
            let Some(r) = plot.domain.sample(&mut rng, cfg.window, 1e-3) else {
                break;
            };
            let n = r.len();
            let v = sampling::unit_vector(&mut rng, n);
            let w = sampling::unit_vector(&mut rng, n);
            for (a, b) in [(&v, &w), (&v, &v)] {
                let t = TangentDouble::new(k, r.clone(), a.clone(), b.clone());
                let d = (g1.eval(&t)? - g2.eval(&t)?).abs();
                report.record(d, &t);
            }
        }
    }
    Ok(report)
}

/// Naturality under random precompositions: for `cfg.samples` quadratic
/// maps `f(s) = c + A s + B(s, s)` into the plots of `space` (cycling
/// through them), compares the metric on `P ∘ f` obtained by [`pullback`]
/// (finite-difference Jacobian) with `J_fᵀ g(P)_{f(s)} J_f` from the exact
/// Jacobian.
pub fn check_random_precompositions(
    space: &SpaceRef,
    g: &WeakMetric,
    cfg: &CheckConfig,
) -> Result<DeviationReport> {
    use crate::space::{ChartDomain, Plot};
    use rand::Rng;
    let mut report = DeviationReport::empty(cfg.tol);
    let mut rng = sampling::rng(cfg.seed);
    let plots: Vec<usize> = (0..space.plots.len())
        .filter(|&k| space.plots[k].dim() > 0)
        .collect();
    if plots.is_empty() {
        return Ok(report);
    }
    for i in 0..cfg.samples {
        let plot = plots[i % plots.len()];
        let domain = &space.plots[plot].domain;
        let n = domain.dim();
        let Some(c) = domain.sample(&mut rng, cfg.window, 1e-2) else {
            return Err(Error::Precondition(format!(
                "plot {plot} has no interior points to sample"
            )));
        };
        let rho = (0.5 * domain.boundary_distance(&c)).min(0.25);
        let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let b: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let (c1, a1, b1) = (c.clone(), a.clone(), b.clone());
        let f = move |s: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|o| {
                    let lin: f64 = (0..n).map(|j| a1[o * n + j] * s[j]).sum();
                    let quad: f64 = (0..n)
                        .flat_map(|j| (0..n).map(move |k| (j, k)))
                        .map(|(j, k)| b1[(o * n + j) * n + k] * s[j] * s[k])
                        .sum();
                    c1[o] + lin + quad
                })
                .collect()
        };
        let exact_jacobian = move |s: &[f64]| {
            DMatrix::from_fn(n, n, |o, j| {
                a[o * n + j]
                    + (0..n)
                        .map(|k| (b[(o * n + j) * n + k] + b[(o * n + k) * n + j]) * s[k])
                        .sum::<f64>()
            })
        };
        let box_domain = ChartDomain::boxed(vec![(-rho, rho); n]);
        let v_space: SpaceRef = Arc::new(DiffeoSpace::new(
            "V",
            vec![Plot::new("s", box_domain.clone())],
        ));
        let chart = ChartMap::from_fn(box_domain, domain.clone(), f.clone());
        let map = SmoothMap::global(v_space.id, space.clone(), plot, chart);
        let pulled = pullback(&map, &v_space, g)?;
        let s: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-0.5 * rho..0.5 * rho))
            .collect();
        let v = sampling::unit_vector(&mut rng, n);
        let w = sampling::unit_vector(&mut rng, n);
        let expected = congruence(&g.gram(plot, &f(&s))?, &exact_jacobian(&s));
        let got = pulled.gram(0, &s)?;
        for (x, y) in [(&v, &w), (&v, &v)] {
            let d = (symmetric_form(&got, x, y) - symmetric_form(&expected, x, y)).abs();
            report.record(
                d,
                &TangentDouble::new(
                    plot,
                    f(&s),
                    mat_vec(&exact_jacobian(&s), x),
                    mat_vec(&exact_jacobian(&s), y),
                ),
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ChartDomain, Plot};
    use approx::assert_relative_eq;

    fn euclid(n: usize) -> SpaceRef {
        Arc::new(DiffeoSpace::new(
            format!("R{n}"),
            vec![Plot::new("id", ChartDomain::euclidean(n))],
        ))
    }

    #[test]
    fn euclidean_inner_products() {
        let s = euclid(2);
        let g = WeakMetric::standard(&s);
        let t = TangentDouble::new(0, vec![0.0, 0.0], vec![3.0, 4.0], vec![3.0, 4.0]);
        assert_eq!(metric_eval(&g, &t).unwrap(), 25.0);
        let t = TangentDouble::new(0, vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]);
        assert_eq!(metric_eval(&g, &t).unwrap(), 0.0);
    }

    #[test]
    fn unknown_plot_is_a_usage_error() {
        let s = euclid(1);
        let g = WeakMetric::standard(&s);
        let t = TangentDouble::diagonal(3, vec![0.0], vec![1.0]);
        assert!(matches!(g.eval(&t), Err(Error::Usage(_))));
    }

    #[test]
    fn doubling_pulls_back_to_four() {
        let s = euclid(1);
        let g = WeakMetric::standard(&s);
        let f = ChartMap::from_fn(ChartDomain::euclidean(1), ChartDomain::euclidean(1), |r| {
            vec![2.0 * r[0]]
        });
        let phi = SmoothMap::global(s.id, s.clone(), 0, f);
        let pulled = pullback(&phi, &s, &g).unwrap();
        let v = pulled
            .eval(&TangentDouble::diagonal(0, vec![0.7], vec![1.0]))
            .unwrap();
        assert_relative_eq!(v, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn circle_pullback_is_unit_speed() {
        let circle = Arc::new(DiffeoSpace::new(
            "S1",
            vec![Plot::new("angle", ChartDomain::euclidean(1))],
        ));
        let plane = euclid(2);
        let h = ChartMap::from_fn(ChartDomain::euclidean(1), ChartDomain::euclidean(2), |r| {
            vec![r[0].cos(), r[0].sin()]
        });
        let incl = SmoothMap::global(circle.id, plane.clone(), 0, h);
        let g = pullback(&incl, &circle, &WeakMetric::standard(&plane)).unwrap();
        for theta in [-2.0, 0.0, 0.4, 1.9] {
            let v = g
                .eval(&TangentDouble::diagonal(0, vec![theta], vec![1.0]))
                .unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn identity_pullback_is_exact() {
        let s = euclid(2);
        let g = WeakMetric::standard(&s);
        let id = SmoothMap::global(
            s.id,
            s.clone(),
            0,
            ChartMap::identity(ChartDomain::euclidean(2)),
        );
        let pulled = pullback(&id, &s, &g).unwrap();
        let report = compare_metrics(
            &s,
            &pulled,
            &g,
            &CheckConfig {
                tol: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.max_deviation, 0.0);
    }

    #[test]
    fn pullback_requires_factorizations() {
        let s = euclid(1);
        let bad = SmoothMap::new(s.id, s.clone(), |_, _| None);
        assert!(matches!(
            pullback(&bad, &s, &WeakMetric::standard(&s)),
            Err(Error::Pullback { .. })
        ));
    }

    #[test]
    fn definiteness_of_standard_and_zero() {
        let s = euclid(3);
        let report = definiteness_check(
            &s,
            &WeakMetric::standard(&s),
            &GridSpec::default(),
            DEFINITENESS_TOL,
        );
        assert_eq!(report.verdict, Verdict::Definite);
        assert_relative_eq!(report.min_eigenvalue.unwrap(), 1.0, epsilon = 1e-14);

        let zero = WeakMetric::constant(&s, DMatrix::zeros(3, 3)).unwrap();
        let report = definiteness_check(&s, &zero, &GridSpec::default(), DEFINITENESS_TOL);
        assert_eq!(report.verdict, Verdict::Indefinite);
        assert_eq!(report.witnesses[0].min_eigenvalue, 0.0);
    }

    #[test]
    fn degenerate_on_axis_is_indefinite_at_zero() {
        let s = euclid(2);
        let field: TensorField = Arc::new(|r: &[f64]| {
            Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                1.0,
                r[0] * r[0],
            ])))
        });
        let g = WeakMetric::new(&s, vec![field]).unwrap();
        let report = definiteness_check(&s, &g, &GridSpec::default(), DEFINITENESS_TOL);
        assert_eq!(report.verdict, Verdict::Indefinite);
        assert!(report.witnesses.iter().all(|w| w.r[0] == 0.0));
        let w = &report.witnesses[0];
        assert_relative_eq!(w.v[1].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn failing_tensor_makes_report_inconclusive() {
        let s = euclid(1);
        let field: TensorField = Arc::new(|r: &[f64]| {
            if r[0] > 0.5 {
                Err(Error::Evaluation {
                    theta: 0.0,
                    reason: "boom".into(),
                })
            } else {
                Ok(DMatrix::identity(1, 1))
            }
        });
        let g = WeakMetric::new(&s, vec![field]).unwrap();
        let report = definiteness_check(&s, &g, &GridSpec::default(), DEFINITENESS_TOL);
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn report_json_shape() {
        let s = euclid(1);
        let report = definiteness_check(
            &s,
            &WeakMetric::standard(&s),
            &GridSpec::default(),
            DEFINITENESS_TOL,
        );
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["verdict"], "definite");
        assert!(v["witnesses"].is_array());
        assert_eq!(v["grid"]["points_per_axis"], 11);
        assert_eq!(v["tol"], 1e-8);
    }

    #[test]
    fn isometry_of_translation_and_failure_of_scaling() {
        let s = euclid(1);
        let g = WeakMetric::standard(&s);
        let shift = SmoothMap::global(
            s.id,
            s.clone(),
            0,
            ChartMap::affine(DMatrix::identity(1, 1), vec![3.0]),
        );
        let ok = isometry_check(&shift, &s, &g, &g, &CheckConfig::default()).unwrap();
        assert!(ok.passed);
        let double = SmoothMap::global(
            s.id,
            s.clone(),
            0,
            ChartMap::affine(DMatrix::from_element(1, 1, 2.0), vec![0.0]),
        );
        let bad = isometry_check(&double, &s, &g, &g, &CheckConfig::default()).unwrap();
        assert!(!bad.passed);
        assert_relative_eq!(bad.max_deviation, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn naturality_under_rotation() {
        let s = euclid(2);
        let g = WeakMetric::standard(&s);
        let (c, sn) = (
            std::f64::consts::FRAC_PI_4.cos(),
            std::f64::consts::FRAC_PI_4.sin(),
        );
        let rot = ChartMap::affine(
            DMatrix::from_row_slice(2, 2, &[c, -sn, sn, c]),
            vec![0.0, 0.0],
        );
        // P := Q ∘ rot is the generating plot itself read through the rotation
        let rotated = Arc::new(
            DiffeoSpace::new(
                "R2 twice",
                vec![
                    Plot::new("rot", ChartDomain::euclidean(2)),
                    Plot::new("id", ChartDomain::euclidean(2)),
                ],
            )
            .with_glue(vec![crate::space::GlueEntry {
                from: 0,
                region: crate::space::GlueRegion::new(vec![crate::space::Interval::full(); 2]),
                to: 1,
                transfer: rot.clone(),
                inverse: ChartMap::affine(
                    DMatrix::from_row_slice(2, 2, &[c, sn, -sn, c]),
                    vec![0.0, 0.0],
                ),
            }]),
        );
        let g2 = WeakMetric::standard(&rotated);
        let pairs = [NaturalityPair {
            source_plot: 0,
            target_plot: 1,
            map: rot,
        }];
        let report = check_naturality(
            &rotated,
            &g2,
            &pairs,
            &CheckConfig {
                tol: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
        let _ = g;
    }

    #[test]
    fn broken_metric_fails_naturality_by_the_gap() {
        let s = DiffeoSpace::new(
            "R twice",
            vec![
                Plot::new("P", ChartDomain::euclidean(1)),
                Plot::new("Q", ChartDomain::euclidean(1)),
            ],
        )
        .with_glue(vec![crate::space::GlueEntry::identity(
            0,
            1,
            crate::space::GlueRegion::new(vec![crate::space::Interval::full()]),
        )]);
        let f1: TensorField = Arc::new(|_| Ok(DMatrix::from_element(1, 1, 1.0)));
        let f2: TensorField = Arc::new(|_| Ok(DMatrix::from_element(1, 1, 3.5)));
        let g = WeakMetric::new(&s, vec![f1, f2]).unwrap();
        let pairs = [NaturalityPair {
            source_plot: 0,
            target_plot: 1,
            map: ChartMap::identity(ChartDomain::euclidean(1)),
        }];
        let report = check_naturality(&s, &g, &pairs, &CheckConfig::default()).unwrap();
        assert!(!report.passed);
        assert_relative_eq!(report.max_deviation, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn naturality_precondition_violation() {
        let s = euclid(1);
        let g = WeakMetric::standard(&s);
        let pairs = [NaturalityPair {
            source_plot: 0,
            target_plot: 0,
            map: ChartMap::affine(DMatrix::identity(1, 1), vec![1.0]),
        }];
        assert!(matches!(
            check_naturality(&s, &g, &pairs, &CheckConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn random_precompositions_are_natural() {
        let s = euclid(2);
        let g = WeakMetric::new(
            &s,
            vec![Arc::new(|r: &[f64]| {
                Ok(DMatrix::from_row_slice(
                    2,
                    2,
                    &[1.0 + r[0] * r[0], 0.3, 0.3, 2.0],
                ))
            }) as TensorField],
        )
        .unwrap();
        let report = check_random_precompositions(
            &s,
            &g,
            &CheckConfig {
                samples: 30,
                tol: 1e-4,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.samples, 60);
    }
}
