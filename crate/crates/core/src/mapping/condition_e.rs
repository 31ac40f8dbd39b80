//! Grid certification that every evaluation `ev_θ ∘ P` is locally in a
//! chosen generating family of `N`.

use std::sync::Arc;

use serde::Serialize;

use super::MappingPlot;
use crate::linalg::max_abs_diff;
use crate::space::VectorFn;

/// Candidate neighborhood radii, tried from largest to smallest.
pub const CERTIFY_RADII: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

/// `ev_θ ∘ P` restricted to the ball of `radius` around `center`.
#[derive(Clone)]
pub struct RestrictedPlot {
    pub theta: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub target_plot: usize,
    pub map: VectorFn,
}

impl RestrictedPlot {
    /// The center and the points `center ± radius/2 · eᵢ`, `center ± radius · eᵢ / (1 + 1e-9)`.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.center.clone()];
        for i in 0..self.center.len() {
            for s in [-1.0, -0.5, 0.5, 1.0] {
                let mut p = self.center.clone();
                p[i] += s * self.radius / (1.0 + 1e-9);
                out.push(p);
            }
        }
        out
    }
}

/// Decides whether a restricted plot belongs to the generating family.
pub type Recognizer = Arc<dyn Fn(&RestrictedPlot) -> bool + Send + Sync>;

/// The family `{id_U}` of a single identity plot: accepts a restriction
/// that agrees with the identity at its probe points.
pub fn identity_recognizer(tol: f64) -> Recognizer {
    Arc::new(move |p: &RestrictedPlot| {
        p.probe_points().iter().all(|s| {
            let y = (p.map)(s);
            y.len() == s.len() && max_abs_diff(&y, s) <= tol
        })
    })
}

/// The family of all plots.
pub fn all_plots_recognizer() -> Recognizer {
    Arc::new(|_| true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certified {
    pub r: Vec<f64>,
    pub theta: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub r: Vec<f64>,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionEReport {
    pub passed: bool,
    pub checked: usize,
    pub certified: Vec<Certified>,
    pub failures: Vec<Failure>,
}

/// For each `(r, θ)` of the grids, looks for a radius in [`CERTIFY_RADII`]
/// (inside the plot domain) on which `recognizer` accepts `ev_θ ∘ P`.
pub fn condition_e_check(
    p: &MappingPlot,
    recognizer: &Recognizer,
    theta_grid: &[f64],
    r_grid: &[Vec<f64>],
) -> ConditionEReport {
    let mut certified = Vec::new();
    let mut failures = Vec::new();
    for r in r_grid {
        for &theta in theta_grid {
            let room = p.domain.boundary_distance(r);
            let adj = p.adjoint.clone();
            let found = p.domain.contains(r).then(|| {
                CERTIFY_RADII
                    .iter()
                    .copied()
                    .filter(|&rho| rho < room)
                    .find(|&rho| {
                        let adj = adj.clone();
                        recognizer(&RestrictedPlot {
                            theta,
                            center: r.clone(),
                            radius: rho,
                            target_plot: p.target_plot,
                            map: Arc::new(move |s| adj(s, theta)),
                        })
                    })
            });
            match found.flatten() {
                Some(radius) => certified.push(Certified {
                    r: r.clone(),
                    theta,
                    radius,
                }),
                None => failures.push(Failure {
                    r: r.clone(),
                    theta,
                }),
            }
        }
    }
    ConditionEReport {
        passed: failures.is_empty(),
        checked: r_grid.len() * theta_grid.len(),
        certified,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::euclidean;
    use crate::mapping::{circle_scale, section_plot};
    use crate::space::ChartDomain;

    fn grids() -> (Vec<f64>, Vec<Vec<f64>>) {
        let thetas = (0..8)
            .map(|k| k as f64 * std::f64::consts::PI / 4.0)
            .collect();
        (thetas, ChartDomain::euclidean(2).grid(3, 1.0))
    }

    #[test]
    fn section_family_satisfies_the_condition() {
        let n = euclidean(2, None).unwrap();
        let (t, r) = grids();
        let rep = condition_e_check(&section_plot(&n, 0), &identity_recognizer(1e-12), &t, &r);
        assert!(rep.passed);
        assert_eq!(rep.checked, 72);
        assert!(rep.certified.iter().all(|c| c.radius == 0.5));
    }

    #[test]
    fn nonidentity_family_fails() {
        let (t, _) = grids();
        let r: Vec<Vec<f64>> = vec![vec![0.0], vec![0.5]];
        let rep = condition_e_check(
            &circle_scale([0.0, 0.0], 1.0),
            &identity_recognizer(1e-12),
            &t,
            &r,
        );
        assert!(!rep.passed);
        assert_eq!(rep.failures.len(), 16);
    }

    #[test]
    fn everything_passes_with_all_plots() {
        let (t, _) = grids();
        let rep = condition_e_check(
            &circle_scale([0.0, 0.0], 1.0),
            &all_plots_recognizer(),
            &t,
            &[vec![0.3]],
        );
        assert!(rep.passed);
    }
}
