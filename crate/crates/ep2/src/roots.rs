//! Scalar root isolation by sign-change bracketing and bisection.
//!
//! Used instead of closed-form sextic/cubic solving throughout; bisection to
//! near machine precision is robust and needs no discriminant case analysis.

/// Bisects a sign change of `f` on `[lo, hi]` down to floating point
/// resolution. Returns `None` when `f(lo)` and `f(hi)` have the same strict
/// sign. Exact zeros at the endpoints are returned directly.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Doubles `hi` geometrically from `start` until `f` changes sign against
/// `f(start)`, then returns the bracket. `None` if no change within `steps`
/// doublings.
pub(crate) fn grow_bracket_up(f: impl Fn(f64) -> f64, start: f64, steps: usize) -> Option<(f64, f64)> {
    let fstart = f(start);
    if fstart == 0.0 {
        return Some((start, start));
    }
    let mut hi = start;
    for _ in 0..steps {
        let next = hi * 2.0;
        let fnext = f(next);
        if fnext == 0.0 || fnext.signum() != fstart.signum() {
            return Some((hi, next));
        }
        hi = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0).is_none());
    }

    #[test]
    fn grows_brackets() {
        let (lo, hi) = grow_bracket_up(|x| x - 100.0, 1.0, 60).unwrap();
        assert!(lo <= 100.0 && hi >= 100.0);
        let r = bisect(|x| x - 100.0, lo, hi).unwrap();
        assert!((r - 100.0).abs() < 1e-12);
    }
}
