use serde::Serialize;

use super::solver::{pseudodistance_upper, SearchConfig};
use crate::error::{Error, Result};
use crate::linalg::{dist, jacobi_eigen};
use crate::metric::WeakMetric;
use crate::sampling;
use crate::space::{grid_points, DiffeoSpace};

/// Grid points per axis used by [`lipschitz_probe`]; the box corners are
/// always among them.
pub const PROBE_GRID: usize = 21;

/// `k̂ = max (g(P)_r(v, v))^{1/2}` over unit `v` and grid points `r` of
/// `region` (a box inside the plot domain), using the largest Gram
/// eigenvalue at each point.
pub fn lipschitz_probe(
    space: &DiffeoSpace,
    g: &WeakMetric,
    plot: usize,
    region: &[(f64, f64)],
) -> Result<f64> {
    let domain = &space.plot(plot)?.domain;
    if region.len() != domain.dim() {
        return Err(Error::Usage(format!(
            "region has {} axes, plot {plot} has dimension {}",
            region.len(),
            domain.dim()
        )));
    }
    let mut k: f64 = 0.0;
    for r in grid_points(region, PROBE_GRID) {
        if !domain.contains(&r) {
            return Err(Error::Domain { plot, point: r });
        }
        if let Some((lmax, _)) = jacobi_eigen(&g.gram(plot, &r)?).max() {
            k = k.max(lmax.max(0.0).sqrt());
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub plot: usize,
    pub k_hat: f64,
    pub pairs: usize,
    /// `max (bound(P(r), P(r′)) − k̂ |r − r′|)` over sampled pairs.
    pub max_excess: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Samples `pairs` point pairs in `region` and checks
/// `bound(P(r), P(r′)) ≤ k̂ |r − r′| + tol`.
pub fn lipschitz_consistency(
    space: &DiffeoSpace,
    g: &WeakMetric,
    plot: usize,
    region: &[(f64, f64)],
    pairs: usize,
    tol: f64,
    cfg: &SearchConfig,
) -> Result<LipschitzReport> {
    let k_hat = lipschitz_probe(space, g, plot, region)?;
    let mut rng = sampling::rng(cfg.seed);
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let draw = |rng: &mut _| -> Vec<f64> {
            region
                .iter()
                .map(|&(lo, hi)| rand::Rng::gen_range(rng, lo..=hi))
                .collect()
        };
        let (r, s) = (draw(&mut rng), draw(&mut rng));
        let rep = pseudodistance_upper(
            space,
            g,
            &space.point(plot, r.clone()),
            &space.point(plot, s.clone()),
            cfg,
        )?;
        max_excess = max_excess.max(rep.bound - k_hat * dist(&r, &s));
    }
    Ok(LipschitzReport {
        plot,
        k_hat,
        pairs,
        max_excess,
        tol,
        passed: max_excess <= tol,
    })
}
