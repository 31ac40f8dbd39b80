//! Named loop families `U → C^∞(S¹, ℝⁿ)`.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;

use super::MappingPlot;
use crate::constructions::RiemannianSpace;
use crate::sampling::uniform_vector;
use crate::space::ChartDomain;

/// `P(r)(θ) = y` for all `r ∈ ℝ^dim`.
pub fn constant_family(y: Vec<f64>, dim: usize) -> MappingPlot {
    let n = y.len();
    MappingPlot::new(ChartDomain::euclidean(dim), 0, move |_, _| y.clone())
        .with_jacobian(move |_, _| DMatrix::zeros(n, dim))
}

/// `P(r)(θ) = c + R r (cos θ, sin θ)`.
pub fn circle_scale(center: [f64; 2], radius: f64) -> MappingPlot {
    MappingPlot::new(ChartDomain::euclidean(1), 0, move |r, t| {
        vec![
            center[0] + radius * r[0] * t.cos(),
            center[1] + radius * r[0] * t.sin(),
        ]
    })
    .with_jacobian(move |_, t| {
        DMatrix::from_column_slice(2, 1, &[radius * t.cos(), radius * t.sin()])
    })
}

/// `P(r)(θ) = a r (sin θ, sin θ cos θ)`, a figure eight through the origin.
pub fn figure(a: f64) -> MappingPlot {
    MappingPlot::new(ChartDomain::euclidean(1), 0, move |r, t| {
        vec![a * r[0] * t.sin(), a * r[0] * t.sin() * t.cos()]
    })
    .with_jacobian(move |_, t| {
        DMatrix::from_column_slice(2, 1, &[a * t.sin(), a * t.sin() * t.cos()])
    })
}

/// Circles through `y`: `P(r)(θ) = y + r (1 − cos θ, sin θ) / √2`. Every
/// loop is based at `y`, and `∫ |∂_r P|² dθ = 2π`.
pub fn based_circle(y: [f64; 2]) -> MappingPlot {
    MappingPlot::new(ChartDomain::euclidean(1), 0, move |r, t| {
        vec![
            y[0] + r[0] * (1.0 - t.cos()) / SQRT_2,
            y[1] + r[0] * t.sin() / SQRT_2,
        ]
    })
    .with_jacobian(|_, t| {
        DMatrix::from_column_slice(2, 1, &[(1.0 - t.cos()) / SQRT_2, t.sin() / SQRT_2])
    })
}

/// Polynomial family based at `y`: with `σ = Σᵢ rᵢ`,
/// `P(r)(θ)_c = y_c + Σ_k σ^k (α_{c,k} (cos kθ − 1) + β_{c,k} sin kθ)`,
/// where `coeffs[c] = [α_{c,1}, β_{c,1}, α_{c,2}, β_{c,2}, …]`.
pub fn polynomial_family(coeffs: &[Vec<f64>], y: [f64; 2], dim: usize) -> MappingPlot {
    let c1 = coeffs.to_vec();
    let c2 = coeffs.to_vec();
    let term = |t: f64, k: usize, a: f64, b: f64| {
        a * ((k as f64 * t).cos() - 1.0) + b * (k as f64 * t).sin()
    };
    MappingPlot::new(ChartDomain::euclidean(dim), 0, move |r, t| {
        let s: f64 = r.iter().sum();
        c1.iter()
            .enumerate()
            .map(|(c, cs)| {
                y[c] + cs
                    .chunks(2)
                    .enumerate()
                    .map(|(i, ab)| {
                        s.powi(i as i32 + 1)
                            * term(t, i + 1, ab[0], ab.get(1).copied().unwrap_or(0.0))
                    })
                    .sum::<f64>()
            })
            .collect()
    })
    .with_jacobian(move |r, t| {
        let s: f64 = r.iter().sum();
        let rows: Vec<f64> = c2
            .iter()
            .map(|cs| {
                cs.chunks(2)
                    .enumerate()
                    .map(|(i, ab)| {
                        let k = i as i32 + 1;
                        k as f64
                            * s.powi(k - 1)
                            * term(t, i + 1, ab[0], ab.get(1).copied().unwrap_or(0.0))
                    })
                    .sum::<f64>()
            })
            .collect();
        DMatrix::from_fn(rows.len(), dim, |c, _| rows[c])
    })
}

/// A [`polynomial_family`] into `ℝ²` with `degree` Fourier modes and
/// coefficients uniform in `[-1, 1]`.
pub fn random_polynomial_family<R: Rng>(
    rng: &mut R,
    y: [f64; 2],
    dim: usize,
    degree: usize,
) -> MappingPlot {
    let coeffs: Vec<Vec<f64>> = (0..2)
        .map(|_| uniform_vector(rng, 2 * degree, 1.0))
        .collect();
    polynomial_family(&coeffs, y, dim)
}

/// `s ∘ Q` for the identity plot `Q` of plot `q` of `N`: `(r, θ) ↦ r`.
pub fn section_plot(target: &RiemannianSpace, q: usize) -> MappingPlot {
    let domain = target.space.plots[q].domain.clone();
    let n = domain.dim();
    MappingPlot::new(domain, q, |r, _| r.to_vec())
        .with_jacobian(move |_, _| DMatrix::identity(n, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &MappingPlot, r: &[f64]) {
        let plain = MappingPlot {
            jacobian: None,
            ..p.clone()
        };
        for k in 0..12 {
            let t = 0.5 * k as f64;
            let (a, b) = (p.r_jacobian(r, t), plain.r_jacobian(r, t));
            assert!((a - b).abs().max() < 1e-7, "θ = {t}");
        }
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        fd_check(&circle_scale([1.0, 2.0], 0.5), &[0.3]);
        fd_check(&figure(1.3), &[0.8]);
        fd_check(&based_circle([1.0, -1.0]), &[2.0]);
        fd_check(
            &polynomial_family(
                &[vec![0.5, -0.2, 0.3, 0.1], vec![0.7, 0.0, -0.4, 0.2]],
                [0.0, 1.0],
                2,
            ),
            &[0.4, -0.1],
        );
    }

    #[test]
    fn polynomial_family_is_based() {
        let p = polynomial_family(
            &[vec![0.5, -0.2, 0.3, 0.1], vec![0.7, 0.0, -0.4, 0.2]],
            [0.0, 1.0],
            1,
        );
        for r in [-1.0, 0.0, 2.5] {
            assert_eq!(p.eval(&[r], 0.0), vec![0.0, 1.0]);
        }
    }
}
