//! Smooth compactly supported profiles.

/// `exp(-1/t)` for `t > 0`, else 0, with its derivative.
fn g(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else {
        let v = (-1.0 / t).exp();
        (v, v / (t * t))
    }
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, strictly increasing
/// between. Returns value and derivative.
pub fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let (a, da) = g(t);
    let (b, db) = g(1.0 - t);
    let s = a + b;
    (a / s, (da * b + a * db) / (s * s))
}

/// C-infinity bump `exp(1 - 1/(1 - u^2))` on `(-1, 1)`, 1 at 0, 0 outside.
/// Returns value and derivative.
pub fn bump(u: f64) -> (f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - u * u;
    let v = (1.0 - 1.0 / w).exp();
    (v, v * (-2.0 * u / (w * w)))
}

/// Largest `|bump'|`, attained near `|u| = 0.58`.
pub const BUMP_MAX_SLOPE: f64 = 2.1704;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_values_and_derivative() {
        assert_eq!(smooth_step(-0.5).0, 0.0);
        assert_eq!(smooth_step(1.5).0, 1.0);
        assert!((smooth_step(0.5).0 - 0.5).abs() < 1e-15);
        for t in [0.1, 0.3, 0.7, 0.95] {
            let h = 1e-6;
            let fd = (smooth_step(t + h).0 - smooth_step(t - h).0) / (2.0 * h);
            assert!((fd - smooth_step(t).1).abs() < 1e-7);
        }
    }

    #[test]
    fn bump_slope_bound() {
        let max = (1..20000)
            .map(|k| bump(-1.0 + k as f64 / 10000.0).1.abs())
            .fold(0.0, f64::max);
        assert!(max <= BUMP_MAX_SLOPE && max > BUMP_MAX_SLOPE - 1e-3);
        let h = 1e-6;
        let fd = (bump(0.4 + h).0 - bump(0.4 - h).0) / (2.0 * h);
        assert!((fd - bump(0.4).1).abs() < 1e-7);
    }
}
