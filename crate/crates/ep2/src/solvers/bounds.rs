//! Construction of constant upper and lower solutions in the attractive
//! regime (`c < 0`).

use crate::difference::GridFunction;
use crate::error::Error;
use crate::model::{g_unchecked, BoundarySpec, Parameters};

fn g_all_below(p: &Parameters, t: f64) -> bool {
    (1..p.n).all(|x| g_unchecked(p, x, t) < 0.0)
}

fn g_all_above(p: &Parameters, t: f64) -> bool {
    (1..p.n).all(|x| g_unchecked(p, x, t) > 0.0)
}

fn g_all_nonneg(p: &Parameters, t: f64) -> bool {
    (1..p.n).all(|x| g_unchecked(p, x, t) >= 0.0)
}

/// Searches a constant lower solution downward from `start` by halving.
fn search_lower(p: &Parameters, bc: &BoundarySpec, start: f64) -> Result<f64, Error> {
    let mut t = start;
    for _ in 0..400 {
        let boundary_ok = match bc {
            BoundarySpec::Dirichlet { d0, dn } => t <= d0.min(*dn),
            BoundarySpec::Robin { f0, fn_ } => f0.eval(t) <= 0.0 && fn_.eval(t) >= 0.0,
        };
        if boundary_ok && g_all_below(p, t) {
            return Ok(t);
        }
        t *= 0.5;
    }
    Err(Error::Hypothesis(match bc {
        BoundarySpec::Dirichlet { .. } => {
            "no constant lower solution found: G_x(alpha) < 0 and alpha <= min(D0, DN) \
             unattainable (homogeneous data are handled by the limit procedure)"
                .into()
        }
        BoundarySpec::Robin { .. } => {
            "no constant lower solution found: f_0(alpha) <= 0 <= f_N(alpha) violated on the \
             search grid"
                .into()
        }
    }))
}

/// Searches a constant upper solution upward from `start` by doubling.
fn search_upper(p: &Parameters, bc: &BoundarySpec, start: f64) -> Result<f64, Error> {
    let mut t = start;
    for _ in 0..400 {
        let boundary_ok = match bc {
            BoundarySpec::Dirichlet { d0, dn } => t >= d0.max(*dn),
            BoundarySpec::Robin { f0, fn_ } => f0.eval(t) >= 0.0 && fn_.eval(t) <= 0.0,
        };
        if boundary_ok && g_all_above(p, t) {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::Hypothesis(match bc {
        BoundarySpec::Dirichlet { .. } => {
            "no constant upper solution found: G_x(beta) > 0 unattainable on the search grid".into()
        }
        BoundarySpec::Robin { .. } => {
            "no constant upper solution found: f_0(beta) >= 0 >= f_N(beta) violated on the \
             search grid"
                .into()
        }
    }))
}

/// Builds constant lower/upper solutions `alpha <= beta` for the attractive
/// problem, selected by regime:
///
/// * `a > 0`: geometric searches succeed because `G_x(t) -> -inf` as
///   `t -> 0+` and `-> +inf` as `t -> inf`;
/// * `a = 0`, `b > 0`: same searches;
/// * `a < 0`, `b > 0` with `4b³ >= -27ca²`: the upper solution comes from
///   `beta(b) = sqrt(-2b/(3a))`, the maximiser of `a z⁶ + b z⁴`, or from any
///   larger value still dominating the boundary data inside the admissible
///   interval.
pub fn build_bounds(p: &Parameters, bc: &BoundarySpec) -> Result<(GridFunction, GridFunction), Error> {
    if p.c >= 0.0 {
        return Err(Error::Hypothesis(format!(
            "attractive regime (c < 0) required, got c = {}",
            p.c
        )));
    }
    let beta = if p.a > 0.0 || (p.a == 0.0 && p.b > 0.0) {
        search_upper(p, bc, 1.0)?
    } else if p.a == 0.0 {
        return Err(Error::Hypothesis(format!(
            "b > 0 required when a = 0, got b = {}",
            p.b
        )));
    } else {
        // a < 0: constant upper solutions exist only under the cubic
        // discriminant condition.
        if p.b <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "b > 0 required when a < 0, got b = {}",
                p.b
            )));
        }
        let margin = 4.0 * p.b.powi(3) + 27.0 * p.c * p.a * p.a;
        if margin < 0.0 {
            return Err(Error::Hypothesis(
                "beta-cond: 4b^3 >= -27ca^2 violated".into(),
            ));
        }
        let beta_b = (-2.0 * p.b / (3.0 * p.a)).sqrt();
        match bc {
            BoundarySpec::Dirichlet { d0, dn } => {
                let beta = beta_b.max(d0.max(*dn));
                if !g_all_nonneg(p, beta) {
                    return Err(Error::Hypothesis(format!(
                        "beta(b) = {beta_b} does not dominate the Dirichlet data and \
                         max(D0, DN) = {} lies outside the admissible interval",
                        d0.max(*dn)
                    )));
                }
                beta
            }
            BoundarySpec::Robin { f0, fn_ } => {
                // Scan the admissible interval [beta(b), M_c] for the Robin
                // sign condition; the interval is widest at beta(b).
                let mut hi = beta_b;
                while g_all_nonneg(p, hi * 1.01) {
                    hi *= 1.01;
                    if hi > beta_b * 1e6 {
                        break;
                    }
                }
                let mut lo = beta_b;
                while lo > beta_b * 1e-6 && g_all_nonneg(p, lo * 0.99) {
                    lo *= 0.99;
                }
                let mut found = None;
                let steps = 128;
                for k in 0..=steps {
                    let t = lo + (hi - lo) * k as f64 / steps as f64;
                    if g_all_nonneg(p, t) && f0.eval(t) >= 0.0 && fn_.eval(t) <= 0.0 {
                        found = Some(t);
                        break;
                    }
                }
                found.ok_or_else(|| {
                    Error::Hypothesis(
                        "f_0(beta) >= 0 >= f_N(beta) fails everywhere on the admissible \
                         interval"
                            .into(),
                    )
                })?
            }
        }
    };
    let alpha = search_lower(p, bc, (1.0f64).min(beta * 0.5))?;
    Ok((
        GridFunction::constant(p.n, alpha)?,
        GridFunction::constant(p.n, beta)?,
    ))
}

/// Constant `beta` with `G_x(beta) >= 0` for all interior x, disregarding
/// boundary data; used by the homogeneous limit procedure.
pub(crate) fn constant_upper_ignoring_data(p: &Parameters) -> Result<f64, Error> {
    if p.a > 0.0 || (p.a == 0.0 && p.b > 0.0) {
        let mut t = 1.0;
        for _ in 0..400 {
            if g_all_nonneg(p, t) {
                return Ok(t);
            }
            t *= 2.0;
        }
        Err(Error::Hypothesis(
            "no constant upper solution found on the search grid".into(),
        ))
    } else if p.a < 0.0 && p.b > 0.0 {
        let beta_b = (-2.0 * p.b / (3.0 * p.a)).sqrt();
        if g_all_nonneg(p, beta_b) {
            Ok(beta_b)
        } else {
            Err(Error::Hypothesis(
                "beta-cond: 4b^3 >= -27ca^2 violated".into(),
            ))
        }
    } else {
        Err(Error::Hypothesis(
            "no upper-solution regime applies (need a > 0, or b > 0)".into(),
        ))
    }
}
