use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{transition_graph, TransitionGraph};
use super::path::{Curve, Joint, PathSegment, PiecewisePath};
use crate::error::{Error, Result};
use crate::metric::WeakMetric;
use crate::quadrature::CompositeRule;
use crate::sampling;
use crate::space::{DiffeoSpace, Point};

/// Smoothing is kept only if it changes the length by less than this.
pub const SMOOTHING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Control points per segment, endpoints included.
    pub control_points: usize,
    pub levels: usize,
    /// Anchor points per axis of each glue region.
    pub anchors: usize,
    /// Longest plot sequence tried.
    pub max_charts: usize,
    pub initial_step: f64,
    pub step_decay: f64,
    pub decays: usize,
    /// Sweep cap per step size.
    pub max_sweeps: usize,
    pub opt_rule: CompositeRule,
    pub report_rule: CompositeRule,
    /// Distance kept from open glue-region ends at level 1; halved per level.
    pub glue_margin: f64,
    /// Anchors on unbounded glue regions stay within `[-window, window]`.
    pub window: f64,
    pub seed: u64,
    /// Also search `y → x` and keep the reversed path if shorter.
    pub symmetric: bool,
    pub smoothing: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            control_points: 8,
            levels: 5,
            anchors: 16,
            max_charts: 4,
            initial_step: 0.25,
            step_decay: 0.5,
            decays: 12,
            max_sweeps: 64,
            opt_rule: CompositeRule::new(8, 16),
            report_rule: CompositeRule::new(8, 32),
            glue_margin: 0.5,
            window: 8.0,
            seed: 0,
            symmetric: true,
            smoothing: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("control_points", self.control_points, 2),
            ("levels", self.levels, 1),
            ("anchors", self.anchors, 1),
            ("max_charts", self.max_charts, 1),
            ("max_sweeps", self.max_sweeps, 1),
        ];
        for (name, v, min) in counts {
            if v < min {
                return Err(Error::Usage(format!(
                    "{name} must be at least {min}, got {v}"
                )));
            }
        }
        if !(self.initial_step > 0.0
            && self.step_decay > 0.0
            && self.step_decay < 1.0
            && self.glue_margin > 0.0)
        {
            return Err(Error::Usage(
                "step, decay and margin must be positive, decay below 1".into(),
            ));
        }
        Ok(())
    }

    /// Glue margin at `level` (1-based): `glue_margin · 2^{1-level}`.
    pub fn margin(&self, level: usize) -> f64 {
        self.glue_margin * 0.5f64.powi(level as i32 - 1)
    }

    fn steps(&self) -> Vec<f64> {
        (0..=self.decays)
            .map(|i| self.initial_step * self.step_decay.powi(i as i32))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    #[serde(serialize_with = "super::serialize_bound")]
    pub bound: f64,
    pub path_id: String,
}

#[derive(Debug, Clone)]
pub struct DistanceReport {
    /// Length of `best_path`, or `∞` when no route joins the points.
    pub bound: f64,
    pub best_path: Option<PiecewisePath>,
    pub path_id: String,
    /// Nonincreasing per-level bounds.
    pub trace: Vec<LevelRecord>,
    pub candidates: usize,
}

impl DistanceReport {
    fn unreachable(levels: usize) -> Self {
        Self {
            bound: f64::INFINITY,
            best_path: None,
            path_id: "none".into(),
            trace: (1..=levels)
                .map(|level| LevelRecord {
                    level,
                    bound: f64::INFINITY,
                    path_id: "none".into(),
                })
                .collect(),
            candidates: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum JointState {
    /// `a` holds coordinates on the `from` side of glue record `entry`.
    Glue {
        entry: usize,
        forward: bool,
        a: Vec<f64>,
    },
    Fixed,
}

/// Optimizable form of a path: all control points of every segment, plus
/// the free coordinates of each glue joint.
#[derive(Debug, Clone)]
struct State {
    plots: Vec<usize>,
    points: Vec<Vec<Vec<f64>>>,
    joints: Vec<JointState>,
}

#[derive(Debug, Clone, Copy)]
enum Coord {
    Interior { seg: usize, idx: usize, axis: usize },
    Joint { joint: usize, axis: usize },
}

impl State {
    fn from_path(path: &PiecewisePath, space: &DiffeoSpace, control_points: usize) -> Self {
        let points: Vec<Vec<Vec<f64>>> = path
            .segments
            .iter()
            .map(|s| match &s.curve {
                Curve::Spline { points } if points.len() >= 2 => points.clone(),
                _ => (0..control_points)
                    .map(|i| s.eval(i as f64 / (control_points - 1) as f64))
                    .collect(),
            })
            .collect();
        let joints = path
            .joints
            .iter()
            .enumerate()
            .map(|(j, joint)| match *joint {
                Joint::Glue { entry, forward } if entry < space.glue.len() => {
                    let a = if forward {
                        points[j].last().cloned().unwrap_or_default()
                    } else {
                        points[j + 1][0].clone()
                    };
                    JointState::Glue { entry, forward, a }
                }
                _ => JointState::Fixed,
            })
            .collect();
        State {
            plots: path.segments.iter().map(|s| s.plot).collect(),
            points,
            joints,
        }
    }

    fn to_path(&self) -> PiecewisePath {
        PiecewisePath {
            segments: self
                .plots
                .iter()
                .zip(&self.points)
                .map(|(&plot, pts)| {
                    PathSegment::new(
                        plot,
                        Curve::Spline {
                            points: pts.clone(),
                        },
                    )
                })
                .collect(),
            joints: self
                .joints
                .iter()
                .map(|j| match j {
                    JointState::Glue { entry, forward, .. } => Joint::Glue {
                        entry: *entry,
                        forward: *forward,
                    },
                    JointState::Fixed => Joint::Fixed,
                })
                .collect(),
        }
    }

    fn coords(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        for (seg, pts) in self.points.iter().enumerate() {
            for idx in 1..pts.len().saturating_sub(1) {
                for axis in 0..pts[idx].len() {
                    out.push(Coord::Interior { seg, idx, axis });
                }
            }
        }
        for (joint, j) in self.joints.iter().enumerate() {
            if let JointState::Glue { a, .. } = j {
                for axis in 0..a.len() {
                    out.push(Coord::Joint { joint, axis });
                }
            }
        }
        out
    }

    /// Moves joint `j` to `a`, writes the induced endpoints of the two
    /// adjacent segments, and drags their interior points along with an
    /// affine blend so straight segments stay straight.
    fn set_joint(&mut self, space: &DiffeoSpace, j: usize, new_a: Vec<f64>) {
        let JointState::Glue { entry, forward, a } = &mut self.joints[j] else {
            return;
        };
        let e = &space.glue[*entry];
        let from_side = new_a.clone();
        let to_side = e.transfer.apply(&new_a);
        let (left, right) = if *forward {
            (from_side, to_side)
        } else {
            (to_side, from_side)
        };
        *a = new_a;
        let shift = |pts: &mut Vec<Vec<f64>>, new_end: Vec<f64>, at_end: bool| {
            let n = pts.len();
            let old = if at_end {
                pts[n - 1].clone()
            } else {
                pts[0].clone()
            };
            let delta: Vec<f64> = new_end.iter().zip(&old).map(|(x, y)| x - y).collect();
            for (i, p) in pts.iter_mut().enumerate() {
                let s = i as f64 / (n - 1) as f64;
                let w = if at_end { s } else { 1.0 - s };
                for (c, d) in p.iter_mut().zip(&delta) {
                    *c += w * d;
                }
            }
            let k = if at_end { n - 1 } else { 0 };
            pts[k] = new_end;
        };
        shift(&mut self.points[j], left, true);
        shift(&mut self.points[j + 1], right, false);
    }
}

struct Objective<'a> {
    space: &'a DiffeoSpace,
    g: &'a WeakMetric,
    rule: &'a CompositeRule,
}

impl Objective<'_> {
    fn segment(&self, state: &State, k: usize) -> f64 {
        let seg = PathSegment::new(
            state.plots[k],
            Curve::Spline {
                points: state.points[k].clone(),
            },
        );
        seg.length(self.g, self.space, self.rule)
            .unwrap_or(f64::INFINITY)
    }

    fn all(&self, state: &State) -> Vec<f64> {
        (0..state.plots.len())
            .map(|k| self.segment(state, k))
            .collect()
    }
}

/// Coordinate descent with geometric step decay. Never returns a state
/// with a larger total (optimization) length than its input.
fn descend(state: &mut State, obj: &Objective, cfg: &SearchConfig, margin: f64, seed: u64) {
    let mut lengths = obj.all(state);
    let mut coords = state.coords();
    if coords.is_empty() {
        return;
    }
    coords.shuffle(&mut sampling::rng(seed));
    let improves = |new: f64, old: f64| new < old - 1e-15 * (1.0 + old.abs());
    for step in cfg.steps() {
        for _ in 0..cfg.max_sweeps {
            let mut improved = false;
            for &c in &coords {
                for dir in [1.0, -1.0] {
                    let mut trial = state.clone();
                    let touched: Vec<usize> = match c {
                        Coord::Interior { seg, idx, axis } => {
                            trial.points[seg][idx][axis] += dir * step;
                            vec![seg]
                        }
                        Coord::Joint { joint, axis } => {
                            let JointState::Glue { entry, a, .. } = &trial.joints[joint] else {
                                continue;
                            };
                            let mut moved = a.clone();
                            moved[axis] += dir * step;
                            let Some(clamped) = obj.space.glue[*entry].region.clamp(&moved, margin)
                            else {
                                continue;
                            };
                            if clamped == *a {
                                continue;
                            }
                            trial.set_joint(obj.space, joint, clamped);
                            vec![joint, joint + 1]
                        }
                    };
                    let old: f64 = touched.iter().map(|&k| lengths[k]).sum();
                    let fresh: Vec<f64> = touched.iter().map(|&k| obj.segment(&trial, k)).collect();
                    let new: f64 = fresh.iter().sum();
                    if improves(new, old) {
                        *state = trial;
                        for (&k, l) in touched.iter().zip(fresh) {
                            lengths[k] = l;
                        }
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// Clamps every glue joint into its region shrunk by `margin`.
fn clamp_joints(state: &mut State, space: &DiffeoSpace, margin: f64) {
    for j in 0..state.joints.len() {
        if let JointState::Glue { entry, a, .. } = &state.joints[j] {
            if let Some(c) = space.glue[*entry].region.clamp(a, margin) {
                if c != *a {
                    state.set_joint(space, j, c);
                }
            }
        }
    }
}

/// A route: a representative of each endpoint and the glue steps between
/// their plots.
#[derive(Debug, Clone)]
struct Route {
    start: (usize, Vec<f64>),
    end: (usize, Vec<f64>),
    steps: Vec<(usize, bool)>,
}

impl Route {
    fn label(&self) -> String {
        let mut s = format!("p{}", self.start.0);
        for &(entry, forward) in &self.steps {
            s.push_str(&format!("/g{entry}{}", if forward { "+" } else { "-" }));
        }
        s.push_str(&format!("/p{}", self.end.0));
        s
    }
}

fn straight(a: &[f64], b: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
        })
        .collect()
}

fn two_point_length(obj: &Objective, plot: usize, a: &[f64], b: &[f64]) -> f64 {
    PathSegment::new(plot, Curve::straight(a, b))
        .length(obj.g, obj.space, obj.rule)
        .unwrap_or(f64::INFINITY)
}

/// Initial joints by dynamic programming over the anchors of each glue
/// step, scoring straight chart segments.
fn seed_route(
    route: &Route,
    graph: &TransitionGraph,
    obj: &Objective,
    cfg: &SearchConfig,
) -> Option<State> {
    let space = obj.space;
    let mut plots = vec![route.start.0];
    for &(entry, forward) in &route.steps {
        let e = &space.glue[entry];
        plots.push(if forward { e.to } else { e.from });
    }
    let sides = |entry: usize, forward: bool, a: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let t = space.glue[entry].transfer.apply(a);
        if forward {
            (a.to_vec(), t)
        } else {
            (t, a.to_vec())
        }
    };
    let anchors: Vec<&Vec<Vec<f64>>> = route
        .steps
        .iter()
        .map(|&(entry, _)| {
            &graph
                .edges
                .iter()
                .find(|e| e.entry == entry)
                .expect("route uses graph edges")
                .anchors
        })
        .collect();
    // cost[a] = best length up to the left side of anchor a of the current joint
    let mut choice: Vec<Vec<usize>> = Vec::new();
    let mut cost: Vec<f64> = vec![0.0];
    let mut prev_right: Vec<Vec<f64>> = vec![route.start.1.clone()];
    for (j, &(entry, forward)) in route.steps.iter().enumerate() {
        let mut next_cost = Vec::with_capacity(anchors[j].len());
        let mut next_choice = Vec::with_capacity(anchors[j].len());
        let mut next_right = Vec::with_capacity(anchors[j].len());
        for a in anchors[j] {
            let (left, right) = sides(entry, forward, a);
            let (best, arg) = prev_right
                .iter()
                .zip(&cost)
                .enumerate()
                .map(|(i, (p, c))| (c + two_point_length(obj, plots[j], p, &left), i))
                .fold(
                    (f64::INFINITY, 0),
                    |acc, x| if x.0 < acc.0 { x } else { acc },
                );
            next_cost.push(best);
            next_choice.push(arg);
            next_right.push(right);
        }
        cost = next_cost;
        choice.push(next_choice);
        prev_right = next_right;
    }
    let last = plots.len() - 1;
    let (total, mut arg) = prev_right
        .iter()
        .zip(&cost)
        .enumerate()
        .map(|(i, (p, c))| (c + two_point_length(obj, plots[last], p, &route.end.1), i))
        .fold(
            (f64::INFINITY, 0),
            |acc, x| if x.0 < acc.0 { x } else { acc },
        );
    if !total.is_finite() {
        return None;
    }
    let mut picked = vec![0; route.steps.len()];
    for j in (0..route.steps.len()).rev() {
        picked[j] = arg;
        arg = choice[j][arg];
    }
    let mut ends: Vec<Vec<f64>> = vec![route.start.1.clone()];
    let mut joints = Vec::new();
    for (j, &(entry, forward)) in route.steps.iter().enumerate() {
        let a = anchors[j][picked[j]].clone();
        let (left, right) = sides(entry, forward, &a);
        ends.push(left);
        ends.push(right);
        joints.push(JointState::Glue { entry, forward, a });
    }
    ends.push(route.end.1.clone());
    let points = ends
        .chunks(2)
        .map(|pair| straight(&pair[0], &pair[1], cfg.control_points))
        .collect();
    Some(State {
        plots,
        points,
        joints,
    })
}

fn routes(
    space: &DiffeoSpace,
    graph: &TransitionGraph,
    x: &Point,
    y: &Point,
    max_charts: usize,
) -> Result<Vec<Route>> {
    let (Some((xp, xc)), Some((yp, yc))) = (x.chart_rep(), y.chart_rep()) else {
        return Err(Error::Usage("distance needs chart points".into()));
    };
    for (p, c) in [(xp, xc), (yp, yc)] {
        if !space.plot(p)?.domain.contains(c) {
            return Err(Error::Domain {
                plot: p,
                point: c.to_vec(),
            });
        }
    }
    let xs = space.representatives(xp, xc);
    let ys = space.representatives(yp, yc);
    let mut out = Vec::new();
    for s in &xs {
        for e in &ys {
            for steps in graph.routes(s.0, e.0, max_charts) {
                out.push(Route {
                    start: s.clone(),
                    end: e.clone(),
                    steps: steps
                        .iter()
                        .map(|st| (graph.edges[st.edge].entry, st.forward))
                        .collect(),
                });
            }
        }
    }
    Ok(out)
}

struct Candidate {
    label: String,
    per_level: Vec<(f64, PiecewisePath)>,
}

fn report_length(
    space: &DiffeoSpace,
    g: &WeakMetric,
    path: &PiecewisePath,
    rule: &CompositeRule,
) -> f64 {
    super::path::path_length(space, g, path, rule).unwrap_or(f64::INFINITY)
}

fn run_route(
    route: &Route,
    graph: &TransitionGraph,
    space: &DiffeoSpace,
    g: &WeakMetric,
    cfg: &SearchConfig,
    idx: usize,
) -> Option<Candidate> {
    let obj = Objective {
        space,
        g,
        rule: &cfg.opt_rule,
    };
    let mut state = seed_route(route, graph, &obj, cfg)?;
    let mut per_level = Vec::with_capacity(cfg.levels);
    for level in 1..=cfg.levels {
        let margin = cfg.margin(level);
        clamp_joints(&mut state, space, margin);
        descend(
            &mut state,
            &obj,
            cfg,
            margin,
            cfg.seed ^ ((idx as u64) << 16) ^ level as u64,
        );
        let path = state.to_path();
        per_level.push((report_length(space, g, &path, &cfg.report_rule), path));
    }
    Some(Candidate {
        label: route.label(),
        per_level,
    })
}

/// Upper bounds on the infimum of path lengths from `x` to `y`, refined
/// over `cfg.levels` levels. The bound is `∞` when no plot sequence joins
/// the points.
pub fn pseudodistance_upper(
    space: &DiffeoSpace,
    g: &WeakMetric,
    x: &Point,
    y: &Point,
    cfg: &SearchConfig,
) -> Result<DistanceReport> {
    pseudodistance_upper_with(space, g, x, y, cfg, &[])
}

/// Like [`pseudodistance_upper`], with extra candidate paths (for example
/// concatenations of earlier witnesses). Extras that do not join `x` to `y`
/// are rejected with an error.
pub fn pseudodistance_upper_with(
    space: &DiffeoSpace,
    g: &WeakMetric,
    x: &Point,
    y: &Point,
    cfg: &SearchConfig,
    extra: &[PiecewisePath],
) -> Result<DistanceReport> {
    cfg.validate()?;
    if cfg.symmetric {
        let one_way = SearchConfig {
            symmetric: false,
            ..cfg.clone()
        };
        let fwd = pseudodistance_upper_with(space, g, x, y, &one_way, extra)?;
        let reversed: Vec<PiecewisePath> = extra.iter().map(PiecewisePath::reversed).collect();
        let back = pseudodistance_upper_with(space, g, y, x, &one_way, &reversed)?;
        return Ok(merge(fwd, back));
    }
    for path in extra {
        path.validate_endpoints(space, x, y)?;
    }
    let graph = transition_graph(space, cfg.anchors, cfg.margin(1), cfg.window);
    let routes = routes(space, &graph, x, y, cfg.max_charts)?;
    let mut candidates: Vec<Candidate> = routes
        .par_iter()
        .enumerate()
        .filter_map(|(i, r)| run_route(r, &graph, space, g, cfg, i))
        .collect();
    for (i, path) in extra.iter().enumerate() {
        let refined = refine_path(space, g, path, cfg)?;
        let l = report_length(space, g, &refined, &cfg.report_rule);
        candidates.push(Candidate {
            label: format!("extra{i}"),
            per_level: vec![(l, refined); cfg.levels],
        });
    }
    if candidates.is_empty() {
        return Ok(DistanceReport::unreachable(cfg.levels));
    }
    let count = candidates.len();
    let mut report = DistanceReport::unreachable(cfg.levels);
    report.candidates = count;
    let mut best: Option<(f64, PiecewisePath, String)> = None;
    for level in 0..cfg.levels {
        let winner = candidates
            .iter()
            .filter(|c| c.per_level[level].0.is_finite())
            .min_by(|a, b| a.per_level[level].0.total_cmp(&b.per_level[level].0));
        if let Some(c) = winner {
            let (mut len, mut path) = c.per_level[level].clone();
            if cfg.smoothing {
                let smooth = path.smoothed();
                let ls = report_length(space, g, &smooth, &cfg.report_rule);
                if (ls - len).abs() < SMOOTHING_TOL {
                    len = ls;
                    path = smooth;
                }
            }
            if best.as_ref().is_none_or(|b| len < b.0) {
                best = Some((len, path, c.label.clone()));
            }
        }
        if let Some((len, _, label)) = &best {
            report.trace[level] = LevelRecord {
                level: level + 1,
                bound: *len,
                path_id: label.clone(),
            };
        }
    }
    if let Some((len, path, label)) = best {
        report.bound = len;
        report.best_path = Some(path);
        report.path_id = label;
    }
    Ok(report)
}

/// Per-level minimum of a forward search and a reversed one; ties keep
/// the forward path.
fn merge(fwd: DistanceReport, back: DistanceReport) -> DistanceReport {
    let trace = fwd
        .trace
        .iter()
        .zip(&back.trace)
        .map(|(f, b)| {
            if b.bound < f.bound {
                LevelRecord {
                    level: f.level,
                    bound: b.bound,
                    path_id: format!("rev:{}", b.path_id),
                }
            } else {
                f.clone()
            }
        })
        .collect();
    let candidates = fwd.candidates + back.candidates;
    if back.bound < fwd.bound {
        DistanceReport {
            bound: back.bound,
            best_path: back.best_path.map(|p| p.reversed()),
            path_id: format!("rev:{}", back.path_id),
            trace,
            candidates,
        }
    } else {
        DistanceReport {
            trace,
            candidates,
            ..fwd
        }
    }
}

/// Shortens `path` by coordinate descent on interior control points and
/// glue joints (kept `cfg.margin(cfg.levels)` inside open region ends).
/// The result is valid, has the same endpoints, and is never longer than
/// the input beyond `1e-12`; otherwise the input is returned.
pub fn refine_path(
    space: &DiffeoSpace,
    g: &WeakMetric,
    path: &PiecewisePath,
    cfg: &SearchConfig,
) -> Result<PiecewisePath> {
    path.validate(space)?;
    let before = report_length(space, g, path, &cfg.report_rule);
    let obj = Objective {
        space,
        g,
        rule: &cfg.opt_rule,
    };
    let mut state = State::from_path(path, space, cfg.control_points);
    let margin = cfg.margin(cfg.levels);
    descend(&mut state, &obj, cfg, margin, cfg.seed);
    let out = state.to_path();
    if out.validate(space).is_err() {
        return Ok(path.clone());
    }
    let after = report_length(space, g, &out, &cfg.report_rule);
    Ok(if after <= before + 1e-12 {
        out
    } else {
        path.clone()
    })
}
