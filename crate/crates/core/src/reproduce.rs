//! Named worked examples, each run as a set of checked records.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{m_space, plus_space, warped_exp, y_space};
use crate::constructions::{euclidean, product, warped_product, RiemannianSpace, WarpSpec};
use crate::distance::{
    bound_to_json, path_length, pseudodistance_upper, Curve, DistanceReport, LevelRecord,
    PathSegment, PiecewisePath, SearchConfig, WitnessPath,
};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, max_abs_diff, symmetrize};
use crate::mapping::{
    concatenation_deviation, mapping_gram, random_polynomial_family, section_plot,
    section_pullback, section_s, WedgePlot,
};
use crate::metric::{
    compare_metrics, definiteness_check, CheckConfig, GridSpec, Verdict, DEFINITENESS_TOL,
};
use crate::quadrature::CompositeRule;
use crate::sampling::{self, uniform_vector, unit_vector};

pub const TARGETS: [&str; 8] = [
    "euclidean",
    "y-space",
    "plus-space",
    "m-space",
    "loop-section",
    "concatenation",
    "warped",
    "wedge-sum-of-mapping-spaces",
];

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub op: String,
    pub inputs: Value,
    pub value: Value,
    pub tolerance: f64,
    /// `None` for informational records.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl Record {
    pub fn check(op: &str, inputs: Value, value: Value, tolerance: f64, passed: bool) -> Self {
        Self {
            op: op.into(),
            inputs,
            value,
            tolerance,
            passed: Some(passed),
        }
    }

    pub fn info(op: &str, inputs: Value, value: Value, tolerance: f64) -> Self {
        Self {
            op: op.into(),
            inputs,
            value,
            tolerance,
            passed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub target: String,
    pub passed: bool,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<LevelRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessPath>,
}

impl Outcome {
    pub fn from_records(target: &str, records: Vec<Record>) -> Self {
        Self {
            target: target.into(),
            passed: records.iter().all(|r| r.passed != Some(false)),
            records,
            trace: None,
            witness: None,
        }
    }

    fn with_report(mut self, report: &DistanceReport) -> Self {
        self.trace = Some(report.trace.clone());
        self.witness = report.best_path.as_ref().map(|p| p.to_witness());
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReproduceOptions {
    pub levels: Option<usize>,
    /// Overrides the headline tolerance of the target.
    pub tol: Option<f64>,
    pub seed: u64,
}

/// `level,bound,path_id` rows, bounds with 17 significant digits and `inf`
/// for unreachable points.
pub fn trace_csv(trace: &[LevelRecord]) -> String {
    let mut out = String::from("level,bound,path_id\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{}\n",
            r.level,
            format_bound(r.bound),
            r.path_id
        ));
    }
    out
}

pub fn format_bound(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn reproduce(name: &str, opts: &ReproduceOptions) -> Result<Outcome> {
    match name {
        "euclidean" => euclidean_target(opts),
        "y-space" => y_space_target(opts),
        "plus-space" => plus_space_target(opts),
        "m-space" => m_space_target(opts),
        "loop-section" => loop_section_target(opts),
        "concatenation" => concatenation_target(opts),
        "warped" => warped_target(opts),
        "wedge-sum-of-mapping-spaces" => wedge_sum_target(opts),
        other => Err(Error::Usage(format!(
            "unknown reproduce target {other:?}; expected one of {}",
            TARGETS.join(", ")
        ))),
    }
}

fn search(opts: &ReproduceOptions, default_levels: usize) -> SearchConfig {
    SearchConfig {
        levels: opts.levels.unwrap_or(default_levels),
        seed: opts.seed,
        ..SearchConfig::default()
    }
}

fn distance(
    s: &RiemannianSpace,
    from: (usize, Vec<f64>),
    to: (usize, Vec<f64>),
    cfg: &SearchConfig,
) -> Result<DistanceReport> {
    let x = s.space.point(from.0, from.1);
    let y = s.space.point(to.0, to.1);
    pseudodistance_upper(&s.space, &s.metric, &x, &y, cfg)
}

fn euclidean_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let r2 = euclidean(2, None)?;
    let cfg = search(opts, SearchConfig::default().levels);
    let tol = opts.tol.unwrap_or(1e-6);
    let report = distance(&r2, (0, vec![0.0, 0.0]), (0, vec![3.0, 4.0]), &cfg)?;
    let straight = PiecewisePath::single(PathSegment::new(
        0,
        Curve::straight(&[0.0, 0.0], &[3.0, 4.0]),
    ));
    let len = path_length(&r2.space, &r2.metric, &straight, &cfg.report_rule)?;
    let inputs = json!({"space": "R2", "from": [0.0, 0.0], "to": [3.0, 4.0], "levels": cfg.levels});
    let records = vec![
        Record::check(
            "pseudodistance_upper",
            inputs.clone(),
            bound_to_json(report.bound),
            tol,
            report.bound >= 5.0 - 1e-12 && report.bound <= 5.0 + tol,
        ),
        Record::check(
            "path_length",
            json!({"path": "straight"}),
            json!(len),
            1e-8,
            (len - 5.0).abs() <= 1e-8,
        ),
    ];
    Ok(Outcome::from_records("euclidean", records).with_report(&report))
}

fn y_space_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let y = y_space()?;
    let cfg = search(opts, 6);
    let report = distance(&y, (0, vec![1.0]), (1, vec![1.0]), &cfg)?;
    let mut records = Vec::new();
    let monotone = report.trace.windows(2).all(|w| w[1].bound <= w[0].bound);
    records.push(Record::check(
        "trace_nonincreasing",
        json!({"levels": cfg.levels}),
        json!(report
            .trace
            .iter()
            .map(|r| bound_to_json(r.bound))
            .collect::<Vec<_>>()),
        0.0,
        monotone,
    ));
    for r in &report.trace {
        let limit = 2f64.powi(2 - r.level as i32) + 1e-6;
        records.push(Record::check(
            "level_bound",
            json!({"level": r.level}),
            bound_to_json(r.bound),
            limit,
            r.bound <= limit,
        ));
    }
    let final_tol = opts.tol.unwrap_or(0.04 * 2f64.powi(6 - cfg.levels as i32));
    records.push(Record::check(
        "pseudodistance_upper",
        json!({"space": "Y", "from": "1:1", "to": "2:1", "levels": cfg.levels}),
        bound_to_json(report.bound),
        final_tol,
        report.bound <= final_tol,
    ));
    Ok(Outcome::from_records("y-space", records).with_report(&report))
}

/// `d` on `+`: `|a − b|` on one line, `|a| + |b|` across the glue point.
pub fn plus_distance(a: (usize, f64), b: (usize, f64)) -> f64 {
    if a.0 == b.0 {
        (a.1 - b.1).abs()
    } else {
        a.1.abs() + b.1.abs()
    }
}

fn plus_space_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let plus = plus_space()?;
    let cfg = search(opts, SearchConfig::default().levels);
    let tol = opts.tol.unwrap_or(1e-4);
    let report = distance(&plus, (0, vec![-2.0]), (1, vec![3.0]), &cfg)?;
    let mut records = vec![Record::check(
        "pseudodistance_upper",
        json!({"space": "+", "from": "1:-2", "to": "2:3", "levels": cfg.levels}),
        bound_to_json(report.bound),
        tol,
        report.bound >= 5.0 - 1e-12 && report.bound <= 5.0 + tol,
    )];
    let light = SearchConfig {
        levels: 2,
        ..cfg.clone()
    };
    let mut rng = sampling::rng(opts.seed ^ 0x5eed);
    let mut sampled = 0;
    while sampled < 6 {
        let a = (rng.gen_range(0..2usize), rng.gen_range(-3.0..3.0));
        let b = (rng.gen_range(0..2usize), rng.gen_range(-3.0..3.0));
        let truth = plus_distance(a, b);
        if truth <= 1e-3 {
            continue;
        }
        sampled += 1;
        let bound = distance(&plus, (a.0, vec![a.1]), (b.0, vec![b.1]), &light)?.bound;
        records.push(Record::check(
            "positivity",
            json!({"from": format!("{}:{}", a.0 + 1, a.1), "to": format!("{}:{}", b.0 + 1, b.1), "true_distance": truth}),
            bound_to_json(bound),
            1e-3,
            bound > 1e-3 && bound >= truth - 1e-9,
        ));
    }
    Ok(Outcome::from_records("plus-space", records).with_report(&report))
}

fn m_space_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let m = m_space()?;
    let cfg = search(opts, SearchConfig::default().levels);
    let report = distance(&m, (0, vec![0.0]), (1, vec![2.0, 1.0]), &cfg)?;
    let truth = 1.0 + SQRT_2;
    let slack = opts.tol.unwrap_or(2.0 * cfg.margin(cfg.levels));
    Ok(Outcome::from_records(
        "m-space",
        vec![Record::check(
            "pseudodistance_upper",
            json!({"space": "M", "from": "1:0", "to": "2:2,1", "levels": cfg.levels, "infimum": truth}),
            bound_to_json(report.bound),
            slack,
            report.bound >= truth - 1e-9 && report.bound <= truth + slack,
        )],
    )
    .with_report(&report))
}

fn loop_section_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let n = euclidean(2, None)?;
    let rule = CompositeRule::default();
    let tol = opts.tol.unwrap_or(1e-6);
    let pulled = section_pullback(&n, &rule)?;
    let cfg = CheckConfig {
        samples: 50,
        tol,
        window: 2.0,
        seed: opts.seed,
    };
    let dev = compare_metrics(&n.space, &pulled, &n.metric.scaled(2.0 * PI), &cfg)?;
    let mut rng = sampling::rng(opts.seed);
    let mut ev_err: f64 = 0.0;
    for _ in 0..100 {
        let y = uniform_vector(&mut rng, 2, 2.0);
        let theta = rng.gen_range(0.0..2.0 * PI);
        ev_err = ev_err.max(max_abs_diff(&section_s(0, &y).eval(theta), &y));
    }
    let records = vec![
        Record::check(
            "section_pullback",
            json!({"target": "R2", "tangent_doubles": dev.samples, "expected": "2π·g_N"}),
            json!(dev.max_deviation),
            tol,
            dev.passed,
        ),
        Record::check(
            "ev_section",
            json!({"samples": 100}),
            json!(ev_err),
            1e-15,
            ev_err <= 1e-15,
        ),
    ];
    Ok(Outcome::from_records("loop-section", records))
}

/// Worst relative gaps `(dθ, pulled-back volume)` between `g(c ∘ P)` and
/// `g_∨(P)` at `samples` random tangent doubles of one wedge plot.
pub fn concatenation_deviation_sweep(
    target: &RiemannianSpace,
    w: &WedgePlot,
    samples: usize,
    seed: u64,
    rule: &CompositeRule,
) -> Result<(f64, f64)> {
    let mut rng = sampling::rng(seed);
    let dim = w.left.domain.dim();
    let (mut plain, mut pulled): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let Some(r) = w.left.domain.sample(&mut rng, 1.0, 1e-3) else {
            return Err(Error::Precondition("wedge plot has an empty domain".into()));
        };
        let v = unit_vector(&mut rng, dim);
        let u = unit_vector(&mut rng, dim);
        let d = concatenation_deviation(target, w, &r, &v, &u, rule)?;
        plain = plain.max(d.relative);
        pulled = pulled.max(d.relative_pulled_back);
    }
    Ok((plain, pulled))
}

/// Worst relative gaps over `families` random polynomial wedge families
/// into `ℝ²`, one tangent double each.
pub fn concatenation_sweep(families: usize, seed: u64, rule: &CompositeRule) -> Result<(f64, f64)> {
    let n = euclidean(2, None)?;
    let mut rng = sampling::rng(seed);
    let (mut plain, mut pulled): (f64, f64) = (0.0, 0.0);
    for _ in 0..families {
        let dim = rng.gen_range(1..=2usize);
        let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let left = random_polynomial_family(&mut rng, y, dim, 3);
        let right = random_polynomial_family(&mut rng, y, dim, 3);
        let w = WedgePlot::new(left, right, 1e-12)?;
        let (a, b) = concatenation_deviation_sweep(&n, &w, 1, rng.gen(), rule)?;
        plain = plain.max(a);
        pulled = pulled.max(b);
    }
    Ok((plain, pulled))
}

fn concatenation_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let tol = opts.tol.unwrap_or(1e-6);
    let (plain, pulled) = concatenation_sweep(50, opts.seed, &CompositeRule::default())?;
    let inputs = json!({"families": 50, "target": "R2", "modes": 3});
    let records = vec![
        Record::check(
            "concatenation_isometry",
            inputs.clone(),
            json!(plain),
            tol,
            plain <= tol,
        ),
        Record::info(
            "concatenation_pulled_back_volume",
            inputs,
            json!(pulled),
            tol,
        ),
    ];
    Ok(Outcome::from_records("concatenation", records))
}

fn warped_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let w = warped_exp()?;
    let grid = GridSpec {
        points_per_axis: 21,
        window: 1.0,
    };
    let rep = definiteness_check(&w.space, &w.metric, &grid, DEFINITENESS_TOL);
    let floor = 1f64.min((-2.0f64).exp()) - 1e-9;
    let min_eig = rep.min_eigenvalue.unwrap_or(f64::NAN);
    let x = euclidean(1, None)?;
    let flat = warped_product(&x, &euclidean(1, None)?, &WarpSpec::constant(&x.space, 1.0))?;
    let prod = product(&x, &euclidean(1, None)?)?;
    let cfg = CheckConfig {
        samples: 500,
        tol: opts.tol.unwrap_or(0.0),
        window: 2.0,
        seed: opts.seed,
    };
    let dev = compare_metrics(
        &flat.space,
        &flat.metric,
        &prod.metric.rebind(&flat.space)?,
        &cfg,
    )?;
    let records = vec![
        Record::check(
            "definiteness_check",
            json!({"space": "R ×_{e^{2x}} R", "window": 1.0, "grid": 21, "verdict": rep.verdict}),
            json!(min_eig),
            floor,
            rep.verdict == Verdict::Definite && min_eig >= floor,
        ),
        Record::check(
            "warped_const1_vs_product",
            json!({"tangent_doubles": dev.samples}),
            json!(dev.max_deviation),
            cfg.tol,
            dev.passed,
        ),
    ];
    Ok(Outcome::from_records("warped", records))
}

fn wedge_sum_target(opts: &ReproduceOptions) -> Result<Outcome> {
    let n = euclidean(2, None)?;
    let rule = CompositeRule::default();
    let tol = opts.tol.unwrap_or(1e-6);
    let cfg = CheckConfig {
        samples: 50,
        tol: 1e-9,
        window: 2.0,
        seed: opts.seed,
    };
    // each side is C^∞(S¹, N) with its loop-space metric; both attach along s
    let left = section_pullback(&n, &rule)?;
    let right = section_pullback(&n, &rule)?;
    let compat = compare_metrics(&n.space, &left, &right, &cfg)?;
    let iota = compare_metrics(
        &n.space,
        &left,
        &n.metric.scaled(2.0 * PI),
        &CheckConfig { tol, ..cfg },
    )?;
    let def = definiteness_check(&n.space, &left, &GridSpec::default(), DEFINITENESS_TOL);
    let sec = section_plot(&n, 0);
    let mut min_eig = f64::INFINITY;
    for r in n.space.plots[0].domain.grid(5, 1.0) {
        let g = mapping_gram(&n, &sec, &r, &rule)?;
        min_eig = min_eig.min(
            jacobi_eigen(&symmetrize(&g))
                .min()
                .map_or(f64::NAN, |m| m.0),
        );
    }
    let records = vec![
        Record::check(
            "compatibility",
            json!({"glue": "s: N → C^∞(S¹, N)", "tangent_doubles": compat.samples}),
            json!(compat.max_deviation),
            cfg.tol,
            compat.passed,
        ),
        Record::check(
            "injection_pullback",
            json!({"expected": "2π·g_N", "tangent_doubles": iota.samples}),
            json!(iota.max_deviation),
            tol,
            iota.passed,
        ),
        Record::check(
            "definiteness_check",
            json!({"metric": "ι*g", "verdict": def.verdict}),
            json!(def.min_eigenvalue),
            DEFINITENESS_TOL,
            def.verdict == Verdict::Definite,
        ),
        Record::check(
            "loop_gram_min_eigenvalue",
            json!({"family": "section", "grid": 5}),
            json!(min_eig),
            DEFINITENESS_TOL,
            min_eig > DEFINITENESS_TOL,
        ),
    ];
    Ok(Outcome::from_records(
        "wedge-sum-of-mapping-spaces",
        records,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_full_precision() {
        let rows = vec![
            LevelRecord {
                level: 1,
                bound: 0.1,
                path_id: "p0".into(),
            },
            LevelRecord {
                level: 2,
                bound: f64::INFINITY,
                path_id: "none".into(),
            },
        ];
        let csv = trace_csv(&rows);
        assert_eq!(
            csv,
            "level,bound,path_id\n1,1.0000000000000001e-1,p0\n2,inf,none\n"
        );
        let back: f64 = csv
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn plus_distance_oracle() {
        assert_eq!(plus_distance((0, -2.0), (1, 3.0)), 5.0);
        assert_eq!(plus_distance((1, -2.0), (1, 3.0)), 5.0);
        assert_eq!(plus_distance((0, 1.0), (1, 1.0)), 2.0);
    }

    #[test]
    fn unknown_target_is_usage() {
        assert!(matches!(
            reproduce("torus", &ReproduceOptions::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn cheap_targets_pass() {
        for t in ["loop-section", "warped", "wedge-sum-of-mapping-spaces"] {
            let o = reproduce(t, &ReproduceOptions::default()).unwrap();
            assert!(o.passed, "{t}: {:?}", o.records);
        }
    }
}
