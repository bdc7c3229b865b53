//! Predictor-corrector continuation for the repulsive polynomial system.
//!
//! The target system is `P_x(u) = a u_x⁶ + (2+bx) u_x⁴ - (u_{x-1}+u_{x+1}) u_x³ + c`
//! deformed through `H(u, λ)_x = a u_x⁶ + λ [(2+bx) u_x⁴ - (u_{x-1}+u_{x+1}) u_x³] + c`,
//! which at `λ = 0` has the single positive root `u* = (-c/a)^{1/6}` (hence
//! the sign requirement `a c < 0`). Nonlinear Robin rows extend the homotopy
//! with `λ f_0(u_0) + u_0 - u_1` and `-λ f_N(u_N) + u_N - u_{N-1}`.

use super::tridiag::Tridiag;
use super::{
    damped_newton, dirichlet_block_jacobian, dirichlet_block_residual, robin_block_jacobian,
    robin_block_residual, NewtonOpts, NewtonStatus, SolveReport, SolverConfig, TraceEntry,
};
use crate::difference::GridFunction;
use crate::error::Error;
use crate::model::{BoundarySpec, Parameters};
use crate::solvers::Method;

pub(crate) struct TrackOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
}

pub(crate) struct TrackUnderflow {
    pub lambda: f64,
    pub last: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
}

/// Tracks a root of `h(·, λ) = 0` from `lambda0` to `lambda1` with a
/// first-order predictor, a damped Newton corrector at fixed λ, and
/// adaptive step halving/doubling. Every accepted point must satisfy
/// `feasible` strictly; the path is declared lost when the step underflows.
#[allow(clippy::too_many_arguments)]
pub(crate) fn track_path(
    start: Vec<f64>,
    lambda0: f64,
    lambda1: f64,
    h: &dyn Fn(&[f64], f64) -> Vec<f64>,
    jac: &dyn Fn(&[f64], f64) -> Tridiag,
    dh_dlambda: &dyn Fn(&[f64], f64) -> Vec<f64>,
    feasible: &dyn Fn(&[f64]) -> bool,
    corrector_tol: f64,
    cfg: &SolverConfig,
) -> Result<TrackOutcome, TrackUnderflow> {
    let span = (lambda1 - lambda0).abs();
    let max_step = 0.25 * span;
    let min_step = cfg.homotopy_min_step * span.max(1.0);
    let mut x = start;
    let mut lambda = lambda0;
    let mut step = cfg.homotopy_initial_step.min(span);
    let mut iterations = 0usize;
    let mut trace = Vec::new();
    let mut easy_streak = 0usize;
    while lambda < lambda1 {
        let dl = step.min(lambda1 - lambda);
        let target = lambda + dl;
        // Tangent predictor; on a singular Jacobian fall back to the
        // corrector alone.
        let mut pred = x.clone();
        if let Ok(dx) = jac(&x, lambda).solve(dh_dlambda(&x, lambda).iter().map(|v| -v * dl).collect())
        {
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            if feasible(&cand) {
                pred = cand;
            }
        }
        let opts = NewtonOpts {
            tol: corrector_tol,
            max_iter: 25,
            backtrack: cfg.newton_backtrack_factor,
            positivity_floor: Some(cfg.positivity_fraction),
            feasible: Some(feasible),
        };
        let out = damped_newton(pred, |w| Some(h(w, target)), |w| jac(w, target), &opts);
        iterations += out.iterations;
        if matches!(out.status, NewtonStatus::Converged) && feasible(&out.x) {
            x = out.x;
            lambda = target;
            let (lo, hi) = x
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            trace.push(TraceEntry {
                residual_inf: out.residual_inf,
                min_value: lo,
                max_value: hi,
                delta: lambda,
            });
            if out.iterations <= 3 {
                easy_streak += 1;
                if easy_streak >= 3 {
                    step = (step * 2.0).min(max_step.max(min_step));
                    easy_streak = 0;
                }
            } else {
                easy_streak = 0;
            }
        } else {
            easy_streak = 0;
            step *= 0.5;
            if step < min_step {
                return Err(TrackUnderflow { lambda, last: x, iterations, trace });
            }
        }
    }
    Ok(TrackOutcome { x, iterations, trace })
}

struct DirichletHomotopy<'a> {
    p: &'a Parameters,
    d0: f64,
    dn: f64,
}

impl DirichletHomotopy<'_> {
    fn neighbors(&self, w: &[f64], k: usize) -> (f64, f64) {
        let m = w.len();
        let left = if k == 0 { self.d0 } else { w[k - 1] };
        let right = if k == m - 1 { self.dn } else { w[k + 1] };
        (left, right)
    }

    fn h(&self, w: &[f64], lambda: f64) -> Vec<f64> {
        let p = self.p;
        (0..w.len())
            .map(|k| {
                let x = k + 1;
                let t = w[k];
                let (l, r) = self.neighbors(w, k);
                let t3 = t * t * t;
                p.a * t3 * t3
                    + lambda * ((2.0 + p.b * x as f64) * t3 * t - (l + r) * t3)
                    + p.c
            })
            .collect()
    }

    fn jac(&self, w: &[f64], lambda: f64) -> Tridiag {
        let p = self.p;
        let m = w.len();
        let mut j = Tridiag::new(m);
        for k in 0..m {
            let x = k + 1;
            let t = w[k];
            let (l, r) = self.neighbors(w, k);
            let t2 = t * t;
            let t3 = t2 * t;
            j.d[k] = 6.0 * p.a * t3 * t2
                + lambda * (4.0 * (2.0 + p.b * x as f64) * t3 - 3.0 * (l + r) * t2);
            if k + 1 < m {
                j.du[k] = -lambda * t3;
            }
            if k > 0 {
                j.dl[k - 1] = -lambda * t3;
            }
        }
        j
    }

    fn dh(&self, w: &[f64], _lambda: f64) -> Vec<f64> {
        let p = self.p;
        (0..w.len())
            .map(|k| {
                let x = k + 1;
                let t = w[k];
                let (l, r) = self.neighbors(w, k);
                let t3 = t * t * t;
                (2.0 + p.b * x as f64) * t3 * t - (l + r) * t3
            })
            .collect()
    }
}

struct RobinHomotopy<'a> {
    p: &'a Parameters,
    f0: &'a crate::model::RobinFunction,
    fn_: &'a crate::model::RobinFunction,
}

impl RobinHomotopy<'_> {
    fn h(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        let p = self.p;
        let n = u.len() - 1;
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(lambda * self.f0.eval(u[0]) + u[0] - u[1]);
        for x in 1..n {
            let t = u[x];
            let t3 = t * t * t;
            rows.push(
                p.a * t3 * t3
                    + lambda * ((2.0 + p.b * x as f64) * t3 * t - (u[x - 1] + u[x + 1]) * t3)
                    + p.c,
            );
        }
        rows.push(-lambda * self.fn_.eval(u[n]) + u[n] - u[n - 1]);
        rows
    }

    fn jac(&self, u: &[f64], lambda: f64) -> Tridiag {
        let p = self.p;
        let n = u.len() - 1;
        let mut j = Tridiag::new(n + 1);
        j.d[0] = lambda * self.f0.deriv(u[0]) + 1.0;
        j.du[0] = -1.0;
        for x in 1..n {
            let t = u[x];
            let t2 = t * t;
            let t3 = t2 * t;
            j.dl[x - 1] = -lambda * t3;
            j.d[x] = 6.0 * p.a * t3 * t2
                + lambda
                    * (4.0 * (2.0 + p.b * x as f64) * t3 - 3.0 * (u[x - 1] + u[x + 1]) * t2);
            j.du[x] = -lambda * t3;
        }
        j.dl[n - 1] = -1.0;
        j.d[n] = -lambda * self.fn_.deriv(u[n]) + 1.0;
        j
    }

    fn dh(&self, u: &[f64], _lambda: f64) -> Vec<f64> {
        let p = self.p;
        let n = u.len() - 1;
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(self.f0.eval(u[0]));
        for x in 1..n {
            let t = u[x];
            let t3 = t * t * t;
            rows.push((2.0 + p.b * x as f64) * t3 * t - (u[x - 1] + u[x + 1]) * t3);
        }
        rows.push(-self.fn_.eval(u[n]));
        rows
    }
}

fn max_abs_linear_coeff(p: &Parameters) -> f64 {
    (1..p.n)
        .map(|x| (2.0 + p.b * x as f64).abs())
        .fold(0.0, f64::max)
}

/// Box radius certifying that the homotopy cannot vanish on the outer faces:
/// the degree-six term dominates everything else at `u_x = R`.
fn certified_radius(p: &Parameters, base: f64) -> Result<f64, Error> {
    let m2b = max_abs_linear_coeff(p);
    let mut r = base.max(1.0);
    for _ in 0..200 {
        if p.a.abs() * r.powi(6) > 2.0 * ((m2b + 2.0) * r.powi(4) + p.c.abs()) {
            return Ok(r);
        }
        r *= 2.0;
    }
    Err(Error::Domain("could not certify a box radius".into()))
}

/// Continuation solve for the mixed-sign regimes `a < 0 < c` and
/// `c < 0 < a`, including homogeneous Dirichlet data.
pub fn homotopy_solve(p: &Parameters, bc: &BoundarySpec, cfg: &SolverConfig) -> Result<SolveReport, Error> {
    cfg.validate()?;
    if p.a * p.c >= 0.0 {
        return Err(Error::Domain(format!(
            "homotopy requires a*c < 0 (start root (-c/a)^(1/6) undefined), got a = {}, c = {}",
            p.a, p.c
        )));
    }
    let u_star = (-p.c / p.a).powf(1.0 / 6.0);
    let corrector_tol = 1e-9 * (1.0 + p.c.abs() + p.a.abs() * u_star.powi(6));
    match bc {
        BoundarySpec::Dirichlet { d0, dn } => {
            let radius = certified_radius(p, (2.0 * u_star).max(1.5 * d0.max(*dn)))?;
            let sys = DirichletHomotopy { p, d0: *d0, dn: *dn };
            let feasible = move |w: &[f64]| w.iter().all(|&v| v > 0.0 && v < radius);
            let start = vec![u_star; p.n - 1];
            let tracked = track_path(
                start,
                0.0,
                1.0,
                &|w, l| sys.h(w, l),
                &|w, l| sys.jac(w, l),
                &|w, l| sys.dh(w, l),
                &feasible,
                corrector_tol,
                cfg,
            )
            .map_err(|u| Error::PathLost {
                lambda: u.lambda,
                last: super::assemble_dirichlet(*d0, &u.last, *dn),
            })?;
            let opts = NewtonOpts {
                tol: cfg.tol_residual,
                max_iter: cfg.max_iter,
                backtrack: cfg.newton_backtrack_factor,
                positivity_floor: Some(cfg.positivity_fraction),
                feasible: Some(&feasible),
            };
            let polish = damped_newton(
                tracked.x,
                |w| dirichlet_block_residual(p, *d0, *dn, w),
                |w| dirichlet_block_jacobian(p, w),
                &opts,
            );
            let mut trace = tracked.trace;
            trace.extend(polish.trace.iter().copied());
            let bounds = Some((
                GridFunction::constant(p.n, 0.0)?,
                GridFunction::constant(p.n, radius)?,
            ));
            let report = super::finish_report(
                p,
                bc,
                super::assemble_dirichlet(*d0, &polish.x, *dn),
                Method::Homotopy,
                tracked.iterations + polish.iterations,
                bounds,
                trace,
            )?;
            match polish.status {
                NewtonStatus::Converged => Ok(report),
                NewtonStatus::Singular => Err(Error::Singular),
                _ => Err(Error::Budget { report: Box::new(report) }),
            }
        }
        BoundarySpec::Robin { f0, fn_ } => {
            // Witness the growth hypotheses on a geometric sequence R_n and
            // the small-eta sign condition; the box is (eta, R)^{N+1}.
            let m2b = max_abs_linear_coeff(p);
            let mut radius = None;
            let mut r = (2.0 * u_star).max(1.0);
            for _ in 0..=60 {
                let m0 = (f0.eval(r) + r) / r;
                let mn = (r - fn_.eval(r)) / r;
                if m0 > 1e-6
                    && mn > 1e-6
                    && p.a.abs() * r.powi(6) > 2.0 * ((m2b + 2.0) * r.powi(4) + p.c.abs())
                {
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
            let mut eta = None;
            let mut e = 0.5 * u_star.min(1.0);
            for _ in 0..=80 {
                if f0.eval(e) <= 0.0
                    && fn_.eval(e) >= 0.0
                    && p.a.abs() * e.powi(6) + m2b * e.powi(4) + 2.0 * radius * e.powi(3)
                        <= 0.5 * p.c.abs()
                {
                    eta = Some(e);
                    break;
                }
                e *= 0.5;
            }
            let eta = eta.ok_or_else(|| {
                Error::Hypothesis(
                    "f_0(eta) <= 0 <= f_N(eta) not satisfied for small eta".into(),
                )
            })?;
            let sys = RobinHomotopy { p, f0, fn_ };
            let feasible = move |w: &[f64]| w.iter().all(|&v| v > eta && v < radius);
            let start = vec![u_star; p.n + 1];
            let tracked = track_path(
                start,
                0.0,
                1.0,
                &|w, l| sys.h(w, l),
                &|w, l| sys.jac(w, l),
                &|w, l| sys.dh(w, l),
                &feasible,
                corrector_tol,
                cfg,
            )
            .map_err(|u| Error::PathLost { lambda: u.lambda, last: u.last })?;
            let opts = NewtonOpts {
                tol: cfg.tol_residual,
                max_iter: cfg.max_iter,
                backtrack: cfg.newton_backtrack_factor,
                positivity_floor: Some(cfg.positivity_fraction),
                feasible: Some(&feasible),
            };
            let polish = damped_newton(
                tracked.x,
                |w| robin_block_residual(p, f0, fn_, w),
                |w| robin_block_jacobian(p, f0, fn_, w),
                &opts,
            );
            let mut trace = tracked.trace;
            trace.extend(polish.trace.iter().copied());
            let bounds = Some((
                GridFunction::constant(p.n, eta)?,
                GridFunction::constant(p.n, radius)?,
            ));
            let report = super::finish_report(
                p,
                bc,
                polish.x.clone(),
                Method::Homotopy,
                tracked.iterations + polish.iterations,
                bounds,
                trace,
            )?;
            match polish.status {
                NewtonStatus::Converged => Ok(report),
                NewtonStatus::Singular => Err(Error::Singular),
                _ => Err(Error::Budget { report: Box::new(report) }),
            }
        }
    }
}
