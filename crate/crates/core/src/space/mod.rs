//! Diffeological spaces presented by a generating family of plots.
//!
//! A point is stored as a representative `(plot, coords)`: the image of
//! `coords` under the generating plot `plot`. Quotients and gluings are
//! described by a glue table of identification records; two representatives
//! name the same point iff they are related by the transitive closure of that
//! table, with coordinates compared at tolerance [`DEFAULT_EPS_EQ`].

mod chart;
mod smooth_map;

pub use chart::{
    central_difference, grid_points, ChartDomain, ChartMap, GlueRegion, Interval, JacobianMode,
    MatrixFn, Predicate, ScalarFn, VectorFn, DEFAULT_FD_STEP,
};
pub use smooth_map::{factorize_map, FactorizationOracle, LocalFactorization, SmoothMap};

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_abs_diff;

/// Coordinate tolerance for point equality.
pub const DEFAULT_EPS_EQ: f64 = 1e-9;

/// Representatives reachable through the glue closure are capped at this count.
const MAX_REPRESENTATIVES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceId(pub u64);

impl SpaceId {
    pub fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        SpaceId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "space#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PointRep {
    Chart { plot: usize, coords: Vec<f64> },
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub space: SpaceId,
    pub rep: PointRep,
}

impl Point {
    pub fn chart(space: SpaceId, plot: usize, coords: Vec<f64>) -> Self {
        Point {
            space,
            rep: PointRep::Chart { plot, coords },
        }
    }

    /// `(plot, coords)` for chart representatives.
    pub fn chart_rep(&self) -> Option<(usize, &[f64])> {
        match &self.rep {
            PointRep::Chart { plot, coords } => Some((*plot, coords)),
            PointRep::Label(_) => None,
        }
    }
}

/// A generating plot. Its value at `r` is the point with representative `(index, r)`.
#[derive(Debug, Clone)]
pub struct Plot {
    pub name: String,
    pub domain: ChartDomain,
}

impl Plot {
    pub fn new(name: impl Into<String>, domain: ChartDomain) -> Self {
        Self {
            name: name.into(),
            domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
}

/// Identifies `(from, r)` with `(to, transfer(r))` for every `r` in `region`.
/// `inverse` recovers `r` from the `to` side.
#[derive(Debug, Clone)]
pub struct GlueEntry {
    pub from: usize,
    pub region: GlueRegion,
    pub to: usize,
    pub transfer: ChartMap,
    pub inverse: ChartMap,
}

impl GlueEntry {
    /// Both sides share coordinates on `region`.
    pub fn identity(from: usize, to: usize, region: GlueRegion) -> Self {
        let dim = region.dim();
        let id = ChartMap::identity(ChartDomain::euclidean(dim));
        Self {
            from,
            region,
            to,
            transfer: id.clone(),
            inverse: id,
        }
    }

    /// The `from`-side coordinates of `coords` on the `to` side, if `coords`
    /// is in the image of the region.
    pub fn pull_back(&self, coords: &[f64], eps: f64) -> Option<Vec<f64>> {
        let r = self.inverse.apply(coords);
        (self.region.contains(&r) && max_abs_diff(&self.transfer.apply(&r), coords) <= eps)
            .then_some(r)
    }
}

/// How two representatives are compared.
#[derive(Clone)]
pub enum Equality {
    /// Transitive closure of the glue table.
    Glue,
    /// Equality of images under an injective map (subspaces).
    ViaMap(SmoothMap),
}

impl fmt::Debug for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equality::Glue => write!(f, "Glue"),
            Equality::ViaMap(m) => write!(f, "ViaMap({})", m.target().id),
        }
    }
}

/// Element `[P, r, v, w]` of the space of tangent pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentDouble {
    pub plot: usize,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl TangentDouble {
    pub fn new(plot: usize, r: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Self {
        Self { plot, r, v, w }
    }

    /// `[P, r, v, v]`.
    pub fn diagonal(plot: usize, r: Vec<f64>, v: Vec<f64>) -> Self {
        Self {
            plot,
            r,
            w: v.clone(),
            v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiffeoSpace {
    pub id: SpaceId,
    pub name: String,
    pub plots: Vec<Plot>,
    pub glue: Vec<GlueEntry>,
    pub eps_eq: f64,
    pub equality: Equality,
}

impl DiffeoSpace {
    pub fn new(name: impl Into<String>, plots: Vec<Plot>) -> Self {
        Self {
            id: SpaceId::fresh(),
            name: name.into(),
            plots,
            glue: Vec::new(),
            eps_eq: DEFAULT_EPS_EQ,
            equality: Equality::Glue,
        }
    }

    pub fn with_glue(mut self, glue: Vec<GlueEntry>) -> Self {
        self.glue = glue;
        self
    }

    pub fn plot(&self, index: usize) -> Result<&Plot> {
        self.plots
            .get(index)
            .ok_or_else(|| Error::Usage(format!("{} has no plot {index}", self.name)))
    }

    /// The point `P_index(r)`, normalized to the lowest plot index among its
    /// glue-equivalent representatives.
    pub fn eval_plot(&self, plot: usize, r: &[f64]) -> Result<Point> {
        if !self.plot(plot)?.domain.contains(r) {
            return Err(Error::Domain {
                plot,
                point: r.to_vec(),
            });
        }
        let canonical = match self.equality {
            Equality::Glue => self
                .representatives(plot, r)
                .into_iter()
                .min_by_key(|(p, _)| *p)
                .expect("closure contains the starting representative"),
            Equality::ViaMap(_) => (plot, r.to_vec()),
        };
        Ok(Point::chart(self.id, canonical.0, canonical.1))
    }

    /// The non-normalized point `(plot, r)`.
    pub fn point(&self, plot: usize, r: Vec<f64>) -> Point {
        Point::chart(self.id, plot, r)
    }

    /// Every representative glue-equivalent to `(plot, coords)`, starting
    /// with the input itself, in breadth-first order.
    pub fn representatives(&self, plot: usize, coords: &[f64]) -> Vec<(usize, Vec<f64>)> {
        let mut seen: Vec<(usize, Vec<f64>)> = vec![(plot, coords.to_vec())];
        let mut cursor = 0;
        while cursor < seen.len() && seen.len() < MAX_REPRESENTATIVES {
            let (p, c) = seen[cursor].clone();
            cursor += 1;
            for entry in &self.glue {
                let mut found = Vec::new();
                if entry.from == p && entry.region.contains(&c) {
                    found.push((entry.to, entry.transfer.apply(&c)));
                }
                if entry.to == p {
                    if let Some(r) = entry.pull_back(&c, self.eps_eq) {
                        found.push((entry.from, r));
                    }
                }
                for cand in found {
                    let dup = seen
                        .iter()
                        .any(|(q, d)| *q == cand.0 && max_abs_diff(d, &cand.1) <= self.eps_eq);
                    if !dup && self.plots[cand.0].domain.contains(&cand.1) {
                        seen.push(cand);
                    }
                }
            }
        }
        seen
    }

    pub fn points_equal(&self, p: &Point, q: &Point) -> Result<bool> {
        if p.space != self.id || q.space != self.id {
            return Err(Error::Usage(format!(
                "points of {} and {} compared in {}",
                p.space, q.space, self.id
            )));
        }
        match (&p.rep, &q.rep) {
            (PointRep::Label(a), PointRep::Label(b)) => Ok(a == b),
            (
                PointRep::Chart {
                    plot: pa,
                    coords: ca,
                },
                PointRep::Chart {
                    plot: pb,
                    coords: cb,
                },
            ) => match &self.equality {
                Equality::Glue => Ok(self.representatives(*pa, ca).iter().any(|(plot, c)| {
                    plot == pb && c.len() == cb.len() && max_abs_diff(c, cb) <= self.eps_eq
                })),
                Equality::ViaMap(map) => {
                    let target = map.target();
                    target.points_equal(&map.apply_point(p)?, &map.apply_point(q)?)
                }
            },
            _ => Ok(false),
        }
    }
}

/// Shared handle to a space.
pub type SpaceRef = Arc<DiffeoSpace>;

#[cfg(test)]
mod tests {
    use super::*;

    fn two_lines(region: GlueRegion) -> DiffeoSpace {
        DiffeoSpace::new(
            "glued",
            vec![
                Plot::new("R1", ChartDomain::euclidean(1)),
                Plot::new("R2", ChartDomain::euclidean(1)),
            ],
        )
        .with_glue(vec![GlueEntry::identity(0, 1, region)])
    }

    #[test]
    fn euclidean_identity_plot() {
        let s = DiffeoSpace::new("R2", vec![Plot::new("id", ChartDomain::euclidean(2))]);
        let p = s.eval_plot(0, &[1.0, 2.0]).unwrap();
        assert_eq!(p.chart_rep(), Some((0, &[1.0, 2.0][..])));
    }

    #[test]
    fn y_space_glued_region() {
        let y = two_lines(GlueRegion::new(vec![Interval::open(1.0, f64::INFINITY)]));
        let a = y.eval_plot(0, &[2.0]).unwrap();
        let b = y.eval_plot(1, &[2.0]).unwrap();
        assert!(y.points_equal(&a, &b).unwrap());
        // canonical representative is the lowest plot index
        assert_eq!(b.chart_rep(), Some((0, &[2.0][..])));
        let one1 = y.eval_plot(0, &[1.0]).unwrap();
        let one2 = y.eval_plot(1, &[1.0]).unwrap();
        assert!(!y.points_equal(&one1, &one2).unwrap());
    }

    #[test]
    fn plus_space_glued_at_origin() {
        let plus = two_lines(GlueRegion::new(vec![Interval::point(0.0)]));
        let z1 = plus.point(0, vec![0.0]);
        let z2 = plus.point(1, vec![0.0]);
        assert!(plus.points_equal(&z1, &z2).unwrap());
        assert!(!plus
            .points_equal(&plus.point(0, vec![1.0]), &plus.point(1, vec![1.0]))
            .unwrap());
        assert!(plus.points_equal(&z1, &z1).unwrap());
    }

    #[test]
    fn mismatched_spaces_are_a_usage_error() {
        let a = DiffeoSpace::new("a", vec![Plot::new("id", ChartDomain::euclidean(1))]);
        let b = DiffeoSpace::new("b", vec![Plot::new("id", ChartDomain::euclidean(1))]);
        let err = a.points_equal(&a.point(0, vec![0.0]), &b.point(0, vec![0.0]));
        assert!(matches!(err, Err(Error::Usage(_))));
    }

    #[test]
    fn out_of_domain_is_a_domain_error() {
        let s = DiffeoSpace::new(
            "interval",
            vec![Plot::new("id", ChartDomain::boxed(vec![(0.0, 1.0)]))],
        );
        assert!(matches!(s.eval_plot(0, &[2.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn transfer_with_offset_is_transitive() {
        // three copies of R, 0~1 via x↦x+1 on (0,∞), 1~2 via x↦x+1 on (1,∞)
        let shift = || {
            (
                ChartMap::affine(nalgebra::DMatrix::identity(1, 1), vec![1.0]),
                ChartMap::affine(nalgebra::DMatrix::identity(1, 1), vec![-1.0]),
            )
        };
        let (t0, i0) = shift();
        let (t1, i1) = shift();
        let s = DiffeoSpace::new(
            "chain",
            (0..3)
                .map(|k| Plot::new(format!("R{k}"), ChartDomain::euclidean(1)))
                .collect(),
        )
        .with_glue(vec![
            GlueEntry {
                from: 0,
                region: GlueRegion::new(vec![Interval::open(0.0, f64::INFINITY)]),
                to: 1,
                transfer: t0,
                inverse: i0,
            },
            GlueEntry {
                from: 1,
                region: GlueRegion::new(vec![Interval::open(1.0, f64::INFINITY)]),
                to: 2,
                transfer: t1,
                inverse: i1,
            },
        ]);
        let a = s.point(0, vec![0.5]);
        let c = s.point(2, vec![2.5]);
        assert!(s.points_equal(&a, &c).unwrap());
        assert!(s.points_equal(&c, &a).unwrap());
    }
}
