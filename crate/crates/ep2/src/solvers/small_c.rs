//! Continuation for the doubly positive regime `a > 0`, `c > 0` with small c.
//!
//! The construction works on `Q_x(u) = u_x³ [a u_x³ + (2+bx) u_x - (u_{x-1}+u_{x+1})]`
//! inside a box whose lower faces come from an inductive chain of values
//! `ε_x` with `a t³ + (2+bx) t` below the neighbouring threshold on
//! `(0, ε_x]`, and whose upper face R satisfies `a R³ + (2+bx) R > 2R`.
//! Phase one deforms the identity-minus-midpoint map into Q to find a root
//! of the c = 0 system inside the box; phase two continues that root in c
//! towards the requested value, reporting the largest c reached when the
//! root escapes the box first.

use super::homotopy::track_path;
use super::tridiag::Tridiag;
use super::{
    damped_newton, dirichlet_block_jacobian, dirichlet_block_residual, robin_block_jacobian,
    robin_block_residual, NewtonOpts, NewtonStatus, SolveReport, SolverConfig, TraceEntry,
};
use crate::difference::GridFunction;
use crate::error::Error;
use crate::model::{BoundarySpec, Parameters, RobinFunction};
use crate::roots::{bisect, grow_bracket_up};
use crate::solvers::Method;

/// Largest t with `a t³ + p t < target` on all of `(0, t]`, shrunk by 1%.
/// For a > 0 and target > 0 the crossing is unique because the cubic is
/// eventually increasing and starts at 0.
fn chain_value(a: f64, lin: f64, target: f64) -> Result<f64, Error> {
    debug_assert!(target > 0.0);
    let h = |t: f64| a * t * t * t + lin * t - target;
    let mut seed = (target / a.max(1e-300)).cbrt().max(1e-6);
    // Walk the seed below the crossing before growing a bracket.
    for _ in 0..200 {
        if h(seed) < 0.0 {
            break;
        }
        seed *= 0.5;
    }
    if h(seed) >= 0.0 {
        return Err(Error::Hypothesis(format!(
            "no epsilon with a t^3 + {lin} t < {target} on (0, eps]"
        )));
    }
    let (lo, hi) = grow_bracket_up(h, seed, 400)
        .ok_or_else(|| Error::Hypothesis("epsilon chain bracket not found".into()))?;
    let root = bisect(h, lo, hi).ok_or_else(|| Error::Hypothesis("epsilon chain bisection failed".into()))?;
    Ok(0.99 * root)
}

/// Lower-face chain for the Dirichlet cases, indexed 1..=N-1.
fn epsilon_chain(p: &Parameters, d0: f64, dn: f64) -> Result<Vec<f64>, Error> {
    let n = p.n;
    let mut eps = vec![0.0; n];
    let lin = |x: usize| 2.0 + p.b * x as f64;
    if d0 > 0.0 {
        eps[1] = chain_value(p.a, lin(1), d0)?;
        for x in 2..n {
            eps[x] = chain_value(p.a, lin(x), eps[x - 1])?;
        }
    } else if dn > 0.0 {
        eps[n - 1] = chain_value(p.a, lin(n - 1), dn)?;
        for x in (1..n - 1).rev() {
            eps[x] = chain_value(p.a, lin(x), eps[x + 1])?;
        }
    } else {
        let pl = lin(n - 1);
        if p.b >= -2.0 / (n as f64 - 1.0) {
            return Err(Error::Hypothesis("b < -2/(N-1) violated".into()));
        }
        // a t^3 + pl t < 0 exactly on (0, sqrt(-pl/a)).
        eps[n - 1] = 0.99 * (-pl / p.a).sqrt();
        for x in (1..n - 1).rev() {
            eps[x] = chain_value(p.a, lin(x), eps[x + 1])?;
        }
    }
    Ok(eps)
}

/// Upper face: `a R² + b x > 0` for every interior x, with margin, above all
/// lower faces and the boundary data.
fn upper_face(p: &Parameters, eps: &[f64], d0: f64, dn: f64) -> f64 {
    let need_sq = (1..p.n)
        .map(|x| -p.b * x as f64 / p.a)
        .fold(0.0f64, f64::max);
    let eps_max = eps.iter().cloned().fold(0.0, f64::max);
    let mut r = 2.0 * need_sq.max(0.0).sqrt().max(1.0).max(eps_max).max(d0).max(dn);
    while !(1..p.n).all(|x| p.a * r * r + p.b * x as f64 > 0.0) {
        r *= 2.0;
    }
    r
}

struct QSystem<'a> {
    p: &'a Parameters,
    d0: f64,
    dn: f64,
}

impl QSystem<'_> {
    fn neighbors(&self, w: &[f64], k: usize) -> (f64, f64) {
        let m = w.len();
        let left = if k == 0 { self.d0 } else { w[k - 1] };
        let right = if k == m - 1 { self.dn } else { w[k + 1] };
        (left, right)
    }

    fn rows(&self, w: &[f64]) -> Vec<f64> {
        let p = self.p;
        (0..w.len())
            .map(|k| {
                let x = k + 1;
                let t = w[k];
                let (l, r) = self.neighbors(w, k);
                let t3 = t * t * t;
                t3 * (p.a * t3 + (2.0 + p.b * x as f64) * t - (l + r))
            })
            .collect()
    }

    fn jacobian(&self, w: &[f64]) -> Tridiag {
        let p = self.p;
        let m = w.len();
        let mut j = Tridiag::new(m);
        for k in 0..m {
            let x = k + 1;
            let t = w[k];
            let (l, r) = self.neighbors(w, k);
            let t2 = t * t;
            let t3 = t2 * t;
            j.d[k] =
                6.0 * p.a * t3 * t2 + 4.0 * (2.0 + p.b * x as f64) * t3 - 3.0 * (l + r) * t2;
            if k + 1 < m {
                j.du[k] = -t3;
            }
            if k > 0 {
                j.dl[k - 1] = -t3;
            }
        }
        j
    }
}

struct QTildeSystem<'a> {
    p: &'a Parameters,
    f0: &'a RobinFunction,
    fn_: &'a RobinFunction,
}

impl QTildeSystem<'_> {
    fn rows(&self, u: &[f64]) -> Vec<f64> {
        let p = self.p;
        let n = u.len() - 1;
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(self.f0.eval(u[0]) + u[0] - u[1]);
        for x in 1..n {
            let t = u[x];
            let t3 = t * t * t;
            rows.push(t3 * (p.a * t3 + (2.0 + p.b * x as f64) * t - (u[x - 1] + u[x + 1])));
        }
        rows.push(-self.fn_.eval(u[n]) + u[n] - u[n - 1]);
        rows
    }

    fn jacobian(&self, u: &[f64]) -> Tridiag {
        let p = self.p;
        let n = u.len() - 1;
        let mut j = Tridiag::new(n + 1);
        j.d[0] = self.f0.deriv(u[0]) + 1.0;
        j.du[0] = -1.0;
        for x in 1..n {
            let t = u[x];
            let t2 = t * t;
            let t3 = t2 * t;
            j.dl[x - 1] = -t3;
            j.d[x] = 6.0 * p.a * t3 * t2 + 4.0 * (2.0 + p.b * x as f64) * t3
                - 3.0 * (u[x - 1] + u[x + 1]) * t2;
            j.du[x] = -t3;
        }
        j.dl[n - 1] = -1.0;
        j.d[n] = -self.fn_.deriv(u[n]) + 1.0;
        j
    }
}

#[allow(clippy::too_many_arguments)]
fn run_phases(
    p: &Parameters,
    bc: &BoundarySpec,
    rows: &dyn Fn(&[f64]) -> Vec<f64>,
    jacobian: &dyn Fn(&[f64]) -> Tridiag,
    c_mask: &dyn Fn(usize) -> f64,
    lower: &[f64],
    radius: f64,
    assemble: &dyn Fn(&[f64]) -> Vec<f64>,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    let c_target = p.c;
    let feasible = |w: &[f64]| w.iter().zip(lower).all(|(&v, &lo)| v > lo && v < radius);
    let midpoint: Vec<f64> = lower.iter().map(|&lo| 0.5 * (lo + radius)).collect();
    let scale = 1.0 + c_target.abs() + p.a * radius.powi(6);
    let corrector_tol = 1e-10 * scale;

    // Phase one: deform the identity centred at the midpoint into Q.
    let mid = midpoint.clone();
    let phase1 = track_path(
        midpoint,
        0.0,
        1.0,
        &|w, l| {
            rows(w)
                .iter()
                .zip(w.iter().zip(&mid))
                .map(|(&q, (&wi, &vi))| l * q + (1.0 - l) * (wi - vi))
                .collect()
        },
        &|w, l| {
            let mut j = jacobian(w);
            for v in j.d.iter_mut() {
                *v = l * *v + (1.0 - l);
            }
            for v in j.dl.iter_mut().chain(j.du.iter_mut()) {
                *v *= l;
            }
            j
        },
        &|w, _l| {
            rows(w)
                .iter()
                .zip(w.iter().zip(&mid))
                .map(|(&q, (&wi, &vi))| q - (wi - vi))
                .collect()
        },
        &feasible,
        corrector_tol,
        cfg,
    )
    .map_err(|u| Error::PathLost { lambda: u.lambda, last: assemble(&u.last) })?;

    // Phase two: continue the c = 0 root in c while it stays in the box.
    let phase2 = track_path(
        phase1.x.clone(),
        0.0,
        c_target,
        &|w, c| {
            rows(w)
                .iter()
                .enumerate()
                .map(|(k, &q)| q + c * c_mask(k))
                .collect()
        },
        &|w, _c| jacobian(w),
        &|w, _c| (0..w.len()).map(c_mask).collect(),
        &feasible,
        corrector_tol,
        cfg,
    );

    let finish = |w: Vec<f64>,
                  c_now: f64,
                  iterations: usize,
                  mut trace: Vec<TraceEntry>|
     -> Result<(SolveReport, usize), Error> {
        let p_now = Parameters { c: c_now, ..*p };
        let opts = NewtonOpts {
            tol: cfg.tol_residual,
            max_iter: cfg.max_iter,
            backtrack: cfg.newton_backtrack_factor,
            positivity_floor: Some(cfg.positivity_fraction),
            feasible: Some(&feasible),
        };
        let polish = match bc {
            BoundarySpec::Dirichlet { d0, dn } => damped_newton(
                w,
                |v| dirichlet_block_residual(&p_now, *d0, *dn, v),
                |v| dirichlet_block_jacobian(&p_now, v),
                &opts,
            ),
            BoundarySpec::Robin { f0, fn_ } => damped_newton(
                w,
                |v| robin_block_residual(&p_now, f0, fn_, v),
                |v| robin_block_jacobian(&p_now, f0, fn_, v),
                &opts,
            ),
        };
        if !matches!(polish.status, NewtonStatus::Converged) {
            return Err(Error::Budget {
                report: Box::new(super::finish_report(
                    &p_now,
                    bc,
                    assemble(&polish.x).iter().map(|v| v.max(1e-300)).collect(),
                    Method::SmallCHomotopy,
                    iterations + polish.iterations,
                    None,
                    polish.trace,
                )?),
            });
        }
        trace.extend(polish.trace.iter().copied());
        let alpha = GridFunction::new(assemble(lower).to_vec())?;
        let beta_vals = assemble(&vec![radius; lower.len()]);
        let beta = GridFunction::new(beta_vals)?;
        let report = super::finish_report(
            &p_now,
            bc,
            assemble(&polish.x),
            Method::SmallCHomotopy,
            iterations + polish.iterations,
            Some((alpha, beta)),
            trace,
        )?;
        Ok((report, polish.iterations))
    };

    match phase2 {
        Ok(out) => {
            let mut trace = phase1.trace;
            trace.extend(out.trace.iter().copied());
            let (report, _) = finish(out.x, c_target, phase1.iterations + out.iterations, trace)?;
            Ok(report)
        }
        Err(under) => {
            let c_max = under.lambda;
            let mut trace = phase1.trace;
            trace.extend(under.trace.iter().copied());
            if c_max == 0.0 {
                return Err(Error::PathLost { lambda: 0.0, last: assemble(&under.last) });
            }
            let (report, _) = finish(
                under.last,
                c_max,
                phase1.iterations + under.iterations,
                trace,
            )?;
            Err(Error::CMaxReached { c_max, report: Box::new(report) })
        }
    }
}

/// Continuation solve for `a > 0`, `c > 0`. Dirichlet data need `D_0 > 0` or
/// `D_N > 0`, or `b < -2/(N-1)` in the doubly homogeneous case; Robin data
/// need anchors `r_0, r_N` with `f_0(r_0) + r_0 <= 0 <= f_N(r_N) - r_N` plus
/// the linear growth conditions. When the requested c is out of reach the
/// error carries the largest c attained and its solution.
pub fn small_c_homotopy_solve(
    p: &Parameters,
    bc: &BoundarySpec,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    cfg.validate()?;
    if p.a <= 0.0 || p.c <= 0.0 {
        return Err(Error::Domain(format!(
            "small-c continuation requires a > 0 and c > 0, got a = {}, c = {}",
            p.a, p.c
        )));
    }
    match bc {
        BoundarySpec::Dirichlet { d0, dn } => {
            let eps = epsilon_chain(p, *d0, *dn)?;
            let radius = upper_face(p, &eps, *d0, *dn);
            let sys = QSystem { p, d0: *d0, dn: *dn };
            let lower: Vec<f64> = (1..p.n).map(|x| eps[x]).collect();
            let (d0, dn) = (*d0, *dn);
            run_phases(
                p,
                bc,
                &|w| sys.rows(w),
                &|w| sys.jacobian(w),
                &|_k| 1.0,
                &lower,
                radius,
                &move |w| super::assemble_dirichlet(d0, w, dn),
                cfg,
            )
        }
        BoundarySpec::Robin { f0, fn_ } => {
            let r0 = find_anchor(|s| f0.eval(s) + s <= 0.0).ok_or_else(|| {
                Error::Hypothesis("f_0(r_0) + r_0 <= 0 has no witness on the search grid".into())
            })?;
            let rn = find_anchor(|s| fn_.eval(s) - s >= 0.0).ok_or_else(|| {
                Error::Hypothesis("f_N(r_N) - r_N >= 0 has no witness on the search grid".into())
            })?;
            let mut eps = vec![0.0; p.n + 1];
            eps[0] = r0;
            eps[p.n] = rn;
            let lin = |x: usize| 2.0 + p.b * x as f64;
            for x in 1..p.n {
                eps[x] = chain_value(p.a, lin(x), eps[x - 1])?;
            }
            // Growth conditions as in the repulsive Robin proof.
            let mut radius = None;
            let mut r = 2.0f64.max(upper_face(p, &eps, 0.0, 0.0));
            for _ in 0..=60 {
                let m0 = (f0.eval(r) + r) / r;
                let mn = (r - fn_.eval(r)) / r;
                if m0 > 1e-6 && mn > 1e-6 {
                    radius = Some(r);
                    break;
                }
                r *= 2.0;
            }
            let radius = radius.ok_or_else(|| {
                Error::Hypothesis(
                    "growth conditions liminf f_0(R)/R > -1, limsup f_N(R)/R < 1 not \
                     witnessed on the search sequence"
                        .into(),
                )
            })?;
            let sys = QTildeSystem { p, f0, fn_ };
            let n = p.n;
            run_phases(
                p,
                bc,
                &|u| sys.rows(u),
                &|u| sys.jacobian(u),
                &move |k| if k == 0 || k == n { 0.0 } else { 1.0 },
                &eps,
                radius,
                &|u| u.to_vec(),
                cfg,
            )
        }
    }
}

fn find_anchor(ok: impl Fn(f64) -> bool) -> Option<f64> {
    // Largest witness on a descending log grid.
    for k in 0..=120 {
        let s = 10f64.powf(2.0 - 8.0 * k as f64 / 120.0);
        if ok(s) {
            return Some(s);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::newton_solve;

    #[test]
    fn epsilon_chain_matches_hand_bisection() {
        // a = 1, b = -1, D0 = 1: eps_1 solves t^3 + t = 1 (root ~ 0.6823),
        // then shrinks by 1%.
        let p = Parameters::new(1.0, -1.0, 0.1, 3).unwrap();
        let eps = epsilon_chain(&p, 1.0, 0.0).unwrap();
        let root = bisect(|t: f64| t * t * t + t - 1.0, 0.0, 1.0).unwrap();
        assert!((eps[1] - 0.99 * root).abs() < 1e-9, "{} vs {}", eps[1], 0.99 * root);
        assert!(eps[2] > 0.0);
    }

    #[test]
    fn rejects_boundary_of_hypothesis() {
        // b = -2/(N-1) exactly: strict inequality required.
        let n = 4;
        let p = Parameters::new(1.0, -2.0 / (n as f64 - 1.0), 0.1, n).unwrap();
        let bc = BoundarySpec::dirichlet(0.0, 0.0).unwrap();
        match small_c_homotopy_solve(&p, &bc, &SolverConfig::default()) {
            Err(Error::Hypothesis(msg)) => assert!(msg.contains("b < -2/(N-1)")),
            other => panic!("expected hypothesis rejection, got {other:?}"),
        }
    }

    #[test]
    fn zero_c_seed_agrees_with_newton() {
        // Solve at a small c and compare against damped Newton started from
        // the continuation answer's neighbourhood; both must agree.
        let p = Parameters::new(1.0, -1.0, 0.05, 3).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 0.0).unwrap();
        let rep = small_c_homotopy_solve(&p, &bc, &SolverConfig::default()).unwrap();
        assert!(rep.residual_inf <= 1e-10);
        let seed = GridFunction::constant(3, 0.5).unwrap();
        if let Ok(newton) = newton_solve(&p, &bc, &seed, &SolverConfig::default()) {
            assert!(newton.solution.sup_distance(&rep.solution) <= 1e-7);
        }
        // The solution stays inside the constructed box.
        let (alpha, beta) = rep.bounds_used.as_ref().unwrap();
        for x in 1..3 {
            assert!(rep.solution[x] > alpha[x] && rep.solution[x] < beta[x]);
        }
    }

    #[test]
    fn unreachable_c_reports_c_max() {
        let p = Parameters::new(1.0, -1.0, 1e6, 3).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 0.0).unwrap();
        match small_c_homotopy_solve(&p, &bc, &SolverConfig::default()) {
            Err(Error::CMaxReached { c_max, report }) => {
                assert!(c_max > 0.0 && c_max < 1e6);
                assert!(report.residual_inf <= 1e-10);
            }
            other => panic!("expected CMaxReached, got {other:?}"),
        }
    }
}
