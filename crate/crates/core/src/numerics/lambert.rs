//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{domain, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Above this exponent `e^y` is no longer representable and the log-domain
/// solver is used.
pub const LOG_DOMAIN_THRESHOLD: f64 = 700.0;

/// `W₀(x)` for `x ≥ −1/e`, refined with Halley iterations.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("lambert_w0 of NaN"));
    }
    if x < BRANCH_POINT {
        // accept round-off right at the branch point
        if x >= BRANCH_POINT - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(domain(format!("lambert_w0 requires x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let p2 = 2.0 * (E * x + 1.0);
    if p2 < 1e-12 {
        // series about the branch point
        let p = p2.max(0.0).sqrt();
        return Ok(-1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p);
    }

    let mut w = if p2 < 0.5 {
        let p = p2.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        // Winitzki's approximation
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// `W₀(e^y)` for any real `y`, including arguments whose exponential
/// overflows. Solves `w + ln w = y` directly when `y` exceeds
/// [`LOG_DOMAIN_THRESHOLD`].
pub fn lambert_w0_exp(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y == f64::INFINITY {
        return f64::INFINITY;
    }
    if y <= LOG_DOMAIN_THRESHOLD {
        // e^y > 0 > -1/e, always in the domain
        return lambert_w0(y.exp()).unwrap_or(0.0);
    }
    let ly = y.ln();
    let mut w = y - ly + ly / y;
    for _ in 0..32 {
        let g = w + w.ln() - y;
        let next = w - g / (1.0 + 1.0 / w);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next;
        w = next;
        if done {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(x: f64) -> f64 {
        let w = lambert_w0(x).unwrap();
        (w * w.exp() - x).abs()
    }

    #[test]
    fn anchors() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(lambert_w0(-0.4).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn near_branch_point() {
        for k in 1..12 {
            let x = BRANCH_POINT + 10f64.powi(-k);
            assert!(residual(x) <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn log_domain_matches_direct() {
        for y in [-30.0, -1.0, 0.0, 2.5, 50.0, 300.0, 699.0] {
            let direct = lambert_w0(f64::exp(y)).unwrap();
            assert!((lambert_w0_exp(y) - direct).abs() <= 1e-13 * direct.abs().max(1e-300));
        }
        // continuity across the switch
        let below = lambert_w0_exp(LOG_DOMAIN_THRESHOLD);
        let above = lambert_w0_exp(LOG_DOMAIN_THRESHOLD + 1e-9);
        assert!((below - above).abs() < 1e-8);
        for y in [800.0, 1e4, 1e8, 1e200] {
            let w = lambert_w0_exp(y);
            assert!((w + w.ln() - y).abs() <= 1e-12 * y);
        }
    }

    proptest! {
        #[test]
        fn defining_identity(log10x in -6.0f64..30.0) {
            let x = 10f64.powf(log10x);
            prop_assert!(residual(x) <= 1e-12 * x.max(1.0));
        }

        #[test]
        fn negative_arguments(x in -0.367_879f64..0.0) {
            prop_assert!(residual(x) <= 1e-12);
        }
    }
}
