//! Special functions needed by the uncertainty estimates and the
//! misspecification threshold.

/// Digamma function ψ(x) for x > 0.
///
/// Lifts the argument past 10 with ψ(x) = ψ(x+1) − 1/x, then applies the
/// asymptotic expansion. Absolute error is below 1e-12 for x ≥ 1e-3.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "digamma is only defined here for x > 0");
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number coefficients B_2k / (2k).
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    acc + x.ln() - 0.5 * inv - series
}

/// Lower branch W₋₁ of the Lambert W function on [−1/e, 0).
///
/// Solves w·eʷ = x for w ≤ −1 by bisection followed by Newton polishing.
/// Returns `None` outside the domain.
pub fn lambert_w_m1(x: f64) -> Option<f64> {
    let branch_point = -(-1.0f64).exp();
    if !(x >= branch_point && x < 0.0) {
        return None;
    }
    if (x - branch_point).abs() < 1e-300 {
        return Some(-1.0);
    }
    let f = |w: f64| w * w.exp() - x;
    // f is decreasing on (−∞, −1]: f(−1) ≤ 0 and f → −x > 0 as w → −∞.
    let hi = -1.0;
    let mut lo = -2.0;
    while f(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e4 {
            return None;
        }
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    let mut w = 0.5 * (a + b);
    for _ in 0..3 {
        let ew = w.exp();
        let deriv = ew * (1.0 + w);
        if deriv.abs() < 1e-300 {
            break;
        }
        let next = w - (w * ew - x) / deriv;
        if !next.is_finite() || next > -1.0 {
            break;
        }
        w = next;
    }
    Some(w)
}
