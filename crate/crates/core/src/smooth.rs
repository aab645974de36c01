//! The one smooth-transition primitive used across the crate: the
//! bump-quotient step built from `g(u) = exp(-1/u)`.

fn g(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// C-infinity step centred at zero: 0 for `u <= -width`, 1 for `u >= width`,
/// and exactly 1/2 at `u = 0`.
///
/// `width` must be positive.
pub fn bump_transition(u: f64, width: f64) -> f64 {
    let a = g(u + width);
    let b = g(width - u);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

/// Time cutoff: 1 on `[-1, 1]`, 0 outside `[-2, 2]`, smooth in between.
pub fn time_cutoff(t: f64) -> f64 {
    bump_transition(1.5 - t.abs(), 0.5)
}

/// Derivative of [`time_cutoff`], evaluated in closed form.
pub fn time_cutoff_derivative(t: f64) -> f64 {
    // d/du of a/(a+b) with a = g(u+w), b = g(w-u); g'(u) = g(u)/u^2.
    let w = 0.5;
    let u = 1.5 - t.abs();
    let (p, q) = (u + w, w - u);
    if p <= 0.0 || q <= 0.0 {
        return 0.0;
    }
    let a = g(p);
    let b = g(q);
    let da = a / (p * p);
    let db = -b / (q * q);
    let s = a + b;
    let dpsi_du = (da * s - a * (da + db)) / (s * s);
    // du/dt = -sign(t)
    -t.signum() * dpsi_du
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_limits_and_midpoint() {
        assert_eq!(bump_transition(-0.5, 0.5), 0.0);
        assert_eq!(bump_transition(-0.9, 0.5), 0.0);
        assert_eq!(bump_transition(0.5, 0.5), 1.0);
        assert_eq!(bump_transition(0.0, 0.5), 0.5);
        let x = 0.17;
        let s = bump_transition(x, 0.5) + bump_transition(-x, 0.5);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_shape() {
        for &t in &[0.0, 0.3, -1.0, 1.0] {
            assert_eq!(time_cutoff(t), 1.0);
        }
        for &t in &[2.0, -2.0, 2.5] {
            assert_eq!(time_cutoff(t), 0.0);
        }
        let mid = time_cutoff(1.5);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_derivative_matches_finite_differences() {
        let h = 1e-6;
        for &t in &[-1.8, -1.5, -1.2, 1.1, 1.4, 1.7, 1.95] {
            let fd = (time_cutoff(t + h) - time_cutoff(t - h)) / (2.0 * h);
            assert!((fd - time_cutoff_derivative(t)).abs() < 1e-7, "t = {t}");
        }
        assert_eq!(time_cutoff_derivative(0.5), 0.0);
    }
}
