use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ChartMap, DiffeoSpace, Point, PointRep, SpaceId, SpaceRef};
use crate::error::{Error, Result};

/// Number of points at which a returned factorization is cross-checked.
pub const FACTORIZATION_SAMPLES: usize = 25;

/// `φ ∘ P = Q ∘ h` on the ball of `radius` around the query point.
#[derive(Debug, Clone)]
pub struct LocalFactorization {
    pub radius: f64,
    pub target_plot: usize,
    pub chart_map: ChartMap,
}

pub type FactorizationOracle =
    Arc<dyn Fn(usize, &[f64]) -> Option<LocalFactorization> + Send + Sync>;

/// A smooth map between spaces, known through local factorizations of
/// `φ ∘ P` through the target's generating family.
#[derive(Clone)]
pub struct SmoothMap {
    source: SpaceId,
    target: SpaceRef,
    oracle: FactorizationOracle,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("source", &self.source)
            .field("target", &self.target.id)
            .finish()
    }
}

impl SmoothMap {
    pub fn new<F>(source: SpaceId, target: SpaceRef, oracle: F) -> Self
    where
        F: Fn(usize, &[f64]) -> Option<LocalFactorization> + Send + Sync + 'static,
    {
        Self {
            source,
            target,
            oracle: Arc::new(oracle),
        }
    }

    /// Every plot factors globally through `target_plot` via `chart_map`.
    pub fn global(
        source: SpaceId,
        target: SpaceRef,
        target_plot: usize,
        chart_map: ChartMap,
    ) -> Self {
        Self::new(source, target, move |_, _| {
            Some(LocalFactorization {
                radius: f64::INFINITY,
                target_plot,
                chart_map: chart_map.clone(),
            })
        })
    }

    /// Plot `k` of the source factors globally through `per_plot[k]`.
    pub fn per_plot(source: SpaceId, target: SpaceRef, per_plot: Vec<(usize, ChartMap)>) -> Self {
        Self::new(source, target, move |plot, _| {
            per_plot.get(plot).map(|(q, h)| LocalFactorization {
                radius: f64::INFINITY,
                target_plot: *q,
                chart_map: h.clone(),
            })
        })
    }

    pub fn source(&self) -> SpaceId {
        self.source
    }

    pub fn target(&self) -> &SpaceRef {
        &self.target
    }

    /// Raw oracle call, without cross-checking.
    pub fn oracle(&self, plot: usize, r: &[f64]) -> Option<LocalFactorization> {
        (self.oracle)(plot, r)
    }

    /// `φ(p)` for a chart point of the source.
    pub fn apply_point(&self, p: &Point) -> Result<Point> {
        if p.space != self.source {
            return Err(Error::Usage(format!(
                "map from {} applied to a point of {}",
                self.source, p.space
            )));
        }
        match &p.rep {
            PointRep::Chart { plot, coords } => {
                let fac = self
                    .oracle(*plot, coords)
                    .ok_or_else(|| Error::Factorization {
                        plot: *plot,
                        point: coords.clone(),
                    })?;
                self.target
                    .eval_plot(fac.target_plot, &fac.chart_map.apply(coords))
            }
            PointRep::Label(_) => Err(Error::Usage(
                "labelled points have no chart factorization".into(),
            )),
        }
    }

    /// `ψ ∘ φ`, factorizing by composing chart maps.
    pub fn then(&self, next: &SmoothMap) -> Result<SmoothMap> {
        if next.source != self.target.id {
            return Err(Error::Usage("composition of non-composable maps".into()));
        }
        let (first, second) = (self.clone(), next.clone());
        Ok(SmoothMap::new(
            self.source,
            next.target.clone(),
            move |plot, r| {
                let a = first.oracle(plot, r)?;
                let mid = a.chart_map.apply(r);
                let b = second.oracle(a.target_plot, &mid)?;
                Some(LocalFactorization {
                    // the second ball lives in intermediate coordinates; keep the
                    // first radius, which is conservative for the maps used here
                    radius: a.radius,
                    target_plot: b.target_plot,
                    chart_map: a.chart_map.then(&b.chart_map),
                })
            },
        ))
    }
}

/// Calls the oracle for `(plot, r)` and cross-checks the answer: at
/// [`FACTORIZATION_SAMPLES`] points `r'` of the ball (clipped to radius 0.5
/// and to the plot domain), `Q(h(r'))` must equal `φ(P(r'))` as computed by a
/// fresh oracle call at `r'`.
pub fn factorize_map(
    map: &SmoothMap,
    source: &DiffeoSpace,
    plot: usize,
    r: &[f64],
) -> Result<LocalFactorization> {
    if source.id != map.source {
        return Err(Error::Usage(format!(
            "map source is {}, not {}",
            map.source, source.id
        )));
    }
    let domain = &source.plot(plot)?.domain;
    if !domain.contains(r) {
        return Err(Error::Domain {
            plot,
            point: r.to_vec(),
        });
    }
    let fac = map.oracle(plot, r).ok_or_else(|| Error::Factorization {
        plot,
        point: r.to_vec(),
    })?;
    let target = map.target();
    let radius = fac.radius.min(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ plot as u64);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < FACTORIZATION_SAMPLES && attempts < 50 * FACTORIZATION_SAMPLES {
        attempts += 1;
        let candidate: Vec<f64> = if checked == 0 {
            r.to_vec()
        } else {
            r.iter()
                .map(|x| x + radius * rng.gen_range(-1.0..1.0) / (r.len().max(1) as f64).sqrt())
                .collect()
        };
        if !domain.contains(&candidate) {
            continue;
        }
        let via_h = target.eval_plot(fac.target_plot, &fac.chart_map.apply(&candidate))?;
        let direct = map.apply_point(&source.point(plot, candidate.clone()))?;
        if !target.points_equal(&via_h, &direct)? {
            return Err(Error::Precondition(format!(
                "factorization of plot {plot} at {r:?} disagrees with the map at {candidate:?}"
            )));
        }
        checked += 1;
        if r.is_empty() {
            // a 0-dimensional ball is a single point
            break;
        }
    }
    Ok(fac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ChartDomain, GlueEntry, GlueRegion, Interval, Plot};

    fn line() -> SpaceRef {
        Arc::new(DiffeoSpace::new(
            "R",
            vec![Plot::new("id", ChartDomain::euclidean(1))],
        ))
    }

    #[test]
    fn inclusion_line_into_plane_factors_globally() {
        let src = line();
        let plane = Arc::new(DiffeoSpace::new(
            "R2",
            vec![Plot::new("id", ChartDomain::euclidean(2))],
        ));
        let h = ChartMap::from_fn(ChartDomain::euclidean(1), ChartDomain::euclidean(2), |r| {
            vec![r[0], 0.0]
        });
        let incl = SmoothMap::global(src.id, plane.clone(), 0, h);
        let fac = factorize_map(&incl, &src, 0, &[0.0]).unwrap();
        assert_eq!(fac.radius, f64::INFINITY);
        assert_eq!(fac.target_plot, 0);
        assert_eq!(fac.chart_map.apply(&[3.0]), vec![3.0, 0.0]);
    }

    #[test]
    fn quotient_onto_y_space_factors_through_first_copy() {
        let copies = Arc::new(DiffeoSpace::new(
            "R1+R2",
            vec![
                Plot::new("R1", ChartDomain::euclidean(1)),
                Plot::new("R2", ChartDomain::euclidean(1)),
            ],
        ));
        let y = Arc::new(
            DiffeoSpace::new(
                "Y",
                vec![
                    Plot::new("R1", ChartDomain::euclidean(1)),
                    Plot::new("R2", ChartDomain::euclidean(1)),
                ],
            )
            .with_glue(vec![GlueEntry::identity(
                0,
                1,
                GlueRegion::new(vec![Interval::open(1.0, f64::INFINITY)]),
            )]),
        );
        let id = ChartMap::identity(ChartDomain::euclidean(1));
        let quotient = SmoothMap::per_plot(copies.id, y.clone(), vec![(0, id.clone()), (1, id)]);
        let fac = factorize_map(&quotient, &copies, 0, &[5.0]).unwrap();
        assert_eq!(fac.target_plot, 0);
        let img = quotient.apply_point(&copies.point(1, vec![5.0])).unwrap();
        assert!(y.points_equal(&img, &y.point(0, vec![5.0])).unwrap());
    }

    #[test]
    fn constant_map_to_a_point() {
        let src = line();
        let pt = Arc::new(DiffeoSpace::new(
            "pt",
            vec![Plot::new("const", ChartDomain::euclidean(0))],
        ));
        let h = ChartMap::from_fn(
            ChartDomain::euclidean(1),
            ChartDomain::euclidean(0),
            |_| vec![],
        );
        let c = SmoothMap::global(src.id, pt, 0, h);
        let fac = factorize_map(&c, &src, 0, &[7.0]).unwrap();
        assert_eq!(fac.chart_map.apply(&[7.0]), Vec::<f64>::new());
    }

    #[test]
    fn missing_factorization_is_an_error() {
        let src = line();
        let map = SmoothMap::new(src.id, line(), |_, _| None);
        assert!(matches!(
            factorize_map(&map, &src, 0, &[0.0]),
            Err(Error::Factorization { .. })
        ));
    }

    #[test]
    fn inconsistent_oracle_is_detected() {
        let src = line();
        // answers with a map that is only right at the query point's own ball center
        let map = SmoothMap::new(src.id, line(), |_, r| {
            let c = r[0];
            Some(LocalFactorization {
                radius: 1.0,
                target_plot: 0,
                chart_map: ChartMap::from_fn(
                    ChartDomain::euclidean(1),
                    ChartDomain::euclidean(1),
                    move |x| vec![c * x[0]],
                ),
            })
        });
        assert!(matches!(
            factorize_map(&map, &src, 0, &[2.0]),
            Err(Error::Precondition(_))
        ));
    }
}
