//! Smooth monotone step functions built from `exp(-1/t)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn flat_derivative(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// `ψ(t) = φ(t) / (φ(t) + φ(1 − t))`: 0 for `t ≤ 0`, 1 for `t ≥ 1`,
/// smooth, increasing, and symmetric: `ψ(1 − t) = 1 − ψ(t)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (a, b) = (flat(t), flat(1.0 - t));
    a / (a + b)
}

pub fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (flat(t), flat(1.0 - t));
    let (da, db) = (flat_derivative(t), flat_derivative(1.0 - t));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// The bump `b: ℝ → [0, 2π]`: 0 on `(-∞, π/4]`, 2π on `[3π/4, ∞)`.
pub fn bump_b(s: f64) -> f64 {
    2.0 * PI * smooth_step((s - FRAC_PI_4) / FRAC_PI_2)
}

pub fn bump_b_derivative(s: f64) -> f64 {
    2.0 * PI * smooth_step_derivative((s - FRAC_PI_4) / FRAC_PI_2) / FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_pinned_values() {
        assert_eq!(bump_b(0.0), 0.0);
        assert_eq!(bump_b(FRAC_PI_4), 0.0);
        assert_eq!(bump_b(PI), 2.0 * PI);
        assert_eq!(bump_b(3.0 * FRAC_PI_4), 2.0 * PI);
        assert_relative_eq!(bump_b(FRAC_PI_2), PI, epsilon = 1e-15);
    }

    #[test]
    fn bump_is_monotone() {
        let mut prev = bump_b(-1.0);
        for k in 0..=4000 {
            let s = -1.0 + 5.0 * k as f64 / 4000.0;
            let b = bump_b(s);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        for k in 1..50 {
            let s = FRAC_PI_4 + FRAC_PI_2 * k as f64 / 50.0;
            let h = 1e-6;
            let fd = (bump_b(s + h) - bump_b(s - h)) / (2.0 * h);
            assert_relative_eq!(
                bump_b_derivative(s),
                fd,
                epsilon = 1e-6,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn derivative_integrates_to_total_rise() {
        let rule = crate::quadrature::CompositeRule::new(8, 64);
        let total = rule.integrate(0.0, PI, bump_b_derivative);
        assert_relative_eq!(total, 2.0 * PI, epsilon = 1e-10);
    }
}
