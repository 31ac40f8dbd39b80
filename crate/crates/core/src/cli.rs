//! The `diffeo` command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or parse error.
//! `DIFFEO_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::distance::{bound_to_json, pseudodistance_upper, SearchConfig};
use crate::error::{Error, Result};
use crate::mapping::{all_plots_recognizer, condition_e_check, identity_recognizer};
use crate::metric::{
    check_naturality, check_random_precompositions, compare_metrics, definiteness_check,
    glue_naturality_pairs, CheckConfig, GridSpec, Verdict, DEFINITENESS_TOL,
};
use crate::quadrature::CompositeRule;
use crate::reproduce::{
    concatenation_deviation_sweep, reproduce, trace_csv, Outcome, Record, ReproduceOptions, TARGETS,
};
use crate::scene::{load_scene, Scene};
use crate::space::{ChartDomain, Point};

#[derive(Debug, Parser)]
#[command(
    name = "diffeo",
    version,
    about = "Weak Riemannian metrics on diffeological spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecognizerKind {
    /// Only the identity plot of the target.
    Identity,
    /// Every plot.
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper bounds on the path-length distance between two points.
    Distance {
        #[arg(long)]
        space: PathBuf,
        /// `branch:x,y,...` with 1-based branch, or `x,y,...` on the first plot.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV of per-level bounds.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Witness path as JSON control points.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Grid check that every Gram matrix is positive definite.
    CheckDefiniteness {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = DEFINITENESS_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        window: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Compares two metrics on the same plots, or for a wedge loop-space
    /// scene the concatenated metric with the wedge metric.
    CheckIsometry {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Metric naturality on glue transitions and random precompositions.
    CheckNaturality {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Certifies that each evaluation of a loop family is locally a plot of
    /// the recognized family.
    CheckConditionE {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_enum, default_value_t = RecognizerKind::Identity)]
        recognizer: RecognizerKind,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 8)]
        thetas: usize,
        #[arg(long, default_value_t = 3)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Runs a named worked example.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(TARGETS))]
        target: String,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV trace for distance targets, JSON records otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

/// Parses `branch:x,y` (1-based branch) or `x,y` (first plot).
pub fn parse_point(text: &str) -> Result<(usize, Vec<f64>)> {
    let (plot, coords) = match text.split_once(':') {
        Some((b, c)) => {
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad branch in point {text:?}")))?;
            if b == 0 {
                return Err(Error::Usage(format!(
                    "branches are numbered from 1 in point {text:?}"
                )));
            }
            (b - 1, c)
        }
        None => (0, text),
    };
    let coords = coords
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Usage(format!("bad coordinates in point {text:?}")))?;
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::Usage(format!(
            "coordinates must be finite in point {text:?}"
        )));
    }
    Ok((plot, coords))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::Construction(_)
        | Error::Domain { .. } => 2,
        _ => 1,
    }
}

/// Runs the command line and returns the exit code. Reports go to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let threads = std::env::var("DIFFEO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| execute(&cli.command, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_scene(path: &Path) -> Result<Scene> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_scene(&text)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable report") + "\n"
}

fn emit(out: &mut dyn Write, outcome: &Outcome, json: bool, file: Option<&Path>) -> Result<bool> {
    if let Some(path) = file {
        write_file(path, &pretty(outcome))?;
    }
    if json {
        write!(out, "{}", pretty(outcome))?;
    } else {
        summarize(out, outcome)?;
    }
    Ok(outcome.passed)
}

fn summarize(out: &mut dyn Write, o: &Outcome) -> Result<()> {
    for r in &o.records {
        let status = match r.passed {
            Some(true) => "ok  ",
            Some(false) => "FAIL",
            None => "info",
        };
        writeln!(
            out,
            "{status} {} value={} tolerance={:e}",
            r.op, r.value, r.tolerance
        )?;
    }
    writeln!(
        out,
        "{}: {}",
        o.target,
        if o.passed { "passed" } else { "failed" }
    )?;
    Ok(())
}

fn check_config(samples: usize, tol: f64, seed: u64) -> CheckConfig {
    CheckConfig {
        samples,
        tol,
        seed,
        ..CheckConfig::default()
    }
}

fn execute(cmd: &Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Distance {
            space,
            from,
            to,
            levels,
            seed,
            out: csv,
            witness,
            json,
        } => {
            let s = read_scene(space)?;
            let s = s.space()?;
            let point = |text: &str| -> Result<Point> {
                let (plot, coords) = parse_point(text)?;
                let p = s
                    .space
                    .plot(plot)
                    .map_err(|_| Error::Usage(format!("point {text:?} names a missing branch")))?;
                if !p.domain.contains(&coords) {
                    return Err(Error::Usage(format!(
                        "point {text:?} is outside its plot domain"
                    )));
                }
                Ok(s.space.point(plot, coords))
            };
            let cfg = SearchConfig {
                levels: *levels,
                seed: *seed,
                ..SearchConfig::default()
            };
            let report =
                pseudodistance_upper(&s.space, &s.metric, &point(from)?, &point(to)?, &cfg)?;
            if let Some(path) = csv {
                write_file(path, &trace_csv(&report.trace))?;
            }
            let witness_json = report.best_path.as_ref().map(|p| p.to_witness());
            if let Some(path) = witness {
                write_file(path, &pretty(&witness_json))?;
            }
            if *json {
                let record = Record::info(
                    "pseudodistance_upper",
                    json!({"space": space.display().to_string(), "from": from, "to": to, "levels": levels, "seed": seed}),
                    bound_to_json(report.bound),
                    0.0,
                );
                write!(
                    out,
                    "{}",
                    pretty(
                        &json!({"record": record, "path_id": report.path_id, "trace": report.trace, "witness": witness_json})
                    )
                )?;
            } else {
                write!(out, "{}", trace_csv(&report.trace))?;
            }
            Ok(true)
        }
        Command::CheckDefiniteness {
            space,
            tol,
            grid,
            window,
            out: file,
            json,
        } => {
            let s = read_scene(space)?;
            let s = s.space()?;
            let rep = definiteness_check(
                &s.space,
                &s.metric,
                &GridSpec {
                    points_per_axis: *grid,
                    window: *window,
                },
                *tol,
            );
            let record = Record::check(
                "definiteness_check",
                json!({"space": space.display().to_string(), "grid": grid, "window": window, "verdict": rep.verdict, "witnesses": rep.witnesses, "errors": rep.errors}),
                json!(rep.min_eigenvalue),
                *tol,
                rep.verdict == Verdict::Definite,
            );
            emit(
                out,
                &single("check-definiteness", record),
                *json,
                file.as_deref(),
            )
        }
        Command::CheckIsometry {
            space,
            against,
            tol,
            samples,
            seed,
            out: file,
            json,
        } => {
            let scene = read_scene(space)?;
            let record = match (&scene, against) {
                (Scene::WedgeLoops { target, wedge }, None) => {
                    let (worst, worst_pulled) = concatenation_deviation_sweep(
                        target,
                        wedge,
                        *samples,
                        *seed,
                        &CompositeRule::default(),
                    )?;
                    Record::check(
                        "concatenation_isometry",
                        json!({"space": space.display().to_string(), "samples": samples, "pulled_back_volume_deviation": worst_pulled}),
                        json!(worst),
                        *tol,
                        worst <= *tol,
                    )
                }
                (Scene::WedgeLoops { .. }, Some(_)) => {
                    return Err(Error::Usage(
                        "--against is not used with wedge loop-space scenes".into(),
                    ))
                }
                (_, None) => {
                    return Err(Error::Usage(
                        "--against is required for space scenes".into(),
                    ))
                }
                (s, Some(other)) => {
                    let a = s.space()?;
                    let b_scene = read_scene(other)?;
                    let b = b_scene.space()?;
                    let layout = |x: &crate::constructions::RiemannianSpace| {
                        x.space.plots.iter().map(|p| p.dim()).collect::<Vec<_>>()
                    };
                    if layout(a) != layout(b) {
                        return Err(Error::Usage(
                            "the two scenes have different plot layouts".into(),
                        ));
                    }
                    let rep = compare_metrics(
                        &a.space,
                        &a.metric,
                        &b.metric.rebind(&a.space)?,
                        &check_config(*samples, *tol, *seed),
                    )?;
                    Record::check(
                        "compare_metrics",
                        json!({"space": space.display().to_string(), "against": other.display().to_string(), "tangent_doubles": rep.samples, "worst": rep.worst}),
                        json!(rep.max_deviation),
                        *tol,
                        rep.passed,
                    )
                }
            };
            emit(
                out,
                &single("check-isometry", record),
                *json,
                file.as_deref(),
            )
        }
        Command::CheckNaturality {
            space,
            tol,
            samples,
            seed,
            out: file,
            json,
        } => {
            let scene = read_scene(space)?;
            let s = scene.space()?;
            let cfg = check_config(*samples, *tol, *seed);
            let pairs = glue_naturality_pairs(&s.space);
            let glue = check_naturality(&s.space, &s.metric, &pairs, &cfg)?;
            let random = check_random_precompositions(&s.space, &s.metric, &cfg)?;
            let records = vec![
                Record::check(
                    "glue_naturality",
                    json!({"pairs": pairs.len(), "samples": glue.samples}),
                    json!(glue.max_deviation),
                    *tol,
                    glue.passed,
                ),
                Record::check(
                    "random_precompositions",
                    json!({"maps": samples, "samples": random.samples}),
                    json!(random.max_deviation),
                    *tol,
                    random.passed,
                ),
            ];
            emit(
                out,
                &Outcome::from_records("check-naturality", records),
                *json,
                file.as_deref(),
            )
        }
        Command::CheckConditionE {
            space,
            recognizer,
            tol,
            thetas,
            grid,
            out: file,
            json,
        } => {
            let scene = read_scene(space)?;
            let Scene::Loops { family, .. } = &scene else {
                return Err(Error::Usage(
                    "check-condition-e needs a loopspace scene".into(),
                ));
            };
            let rec = match recognizer {
                RecognizerKind::Identity => identity_recognizer(*tol),
                RecognizerKind::All => all_plots_recognizer(),
            };
            let theta_grid: Vec<f64> = (0..*thetas)
                .map(|k| 2.0 * std::f64::consts::PI * k as f64 / *thetas as f64)
                .collect();
            let r_grid = ChartDomain::euclidean(family.domain.dim()).grid(*grid, 1.0);
            let r_grid: Vec<Vec<f64>> = r_grid
                .into_iter()
                .filter(|r| family.domain.contains(r))
                .collect();
            let rep = condition_e_check(family, &rec, &theta_grid, &r_grid);
            let record = Record::check(
                "condition_e",
                json!({"space": space.display().to_string(), "recognizer": format!("{recognizer:?}").to_lowercase(), "checked": rep.checked, "failures": rep.failures}),
                json!(rep.failures.len()),
                0.0,
                rep.passed,
            );
            emit(
                out,
                &single("check-condition-e", record),
                *json,
                file.as_deref(),
            )
        }
        Command::Reproduce {
            target,
            levels,
            tol,
            seed,
            out: file,
            json,
        } => {
            let outcome = reproduce(
                target,
                &ReproduceOptions {
                    levels: *levels,
                    tol: *tol,
                    seed: *seed,
                },
            )?;
            if let Some(path) = file {
                match &outcome.trace {
                    Some(trace) => write_file(path, &trace_csv(trace))?,
                    None => write_file(path, &pretty(&outcome))?,
                }
            }
            emit(out, &outcome, *json, None)
        }
    }
}

fn single(target: &str, record: Record) -> Outcome {
    Outcome::from_records(target, vec![record])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("0,0").unwrap(), (0, vec![0.0, 0.0]));
        assert_eq!(parse_point("2:1.5").unwrap(), (1, vec![1.5]));
        assert_eq!(parse_point("1:-2, 3").unwrap(), (0, vec![-2.0, 3.0]));
        assert!(parse_point("0:1").is_err());
        assert!(parse_point("a:1").is_err());
        assert!(parse_point("1:x").is_err());
        assert!(parse_point("inf").is_err());
    }

    #[test]
    fn in_process_run() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["diffeo", "reproduce", "warped"], &mut out, &mut err),
            0
        );
        assert!(String::from_utf8(out)
            .unwrap()
            .ends_with("warped: passed\n"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["diffeo", "check-definiteness"], &mut out, &mut err), 2);
        assert!(!err.is_empty());
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["diffeo", "--help"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("reproduce"));
    }
}
