//! Truncation method between an ordered pair of lower/upper solutions.
//!
//! The auxiliary problem `Δ²u_{x-1} - u_x = G_x(T_x(u_x)) - T_x(u_x)` with
//! `T_x(u) = clamp(u, alpha_x, beta_x)` has a bounded right-hand side, so it
//! is solvable without positivity safeguards; any solution that lies inside
//! the bounds solves the original problem. The solver runs damped Newton on
//! the truncated system and falls back to Picard iteration on the constant
//! tridiagonal operator `Δ² - I` when Newton stagnates, then verifies the
//! bounds a posteriori.

use super::tridiag::Tridiag;
use super::{damped_newton, NewtonOpts, NewtonStatus, SolveReport, SolverConfig, TraceEntry};
use crate::analysis::check_lower_upper;
use crate::difference::{norm_inf, GridFunction};
use crate::error::Error;
use crate::model::{g_prime, g_unchecked, residual, BoundarySpec, Parameters};
use crate::solvers::Method;

struct Truncated<'a> {
    p: &'a Parameters,
    bc: &'a BoundarySpec,
    alpha: &'a GridFunction,
    beta: &'a GridFunction,
}

impl Truncated<'_> {
    fn clamp(&self, i: usize, v: f64) -> f64 {
        v.max(self.alpha[i]).min(self.beta[i])
    }

    fn unclamped(&self, i: usize, v: f64) -> bool {
        v > self.alpha[i] && v < self.beta[i]
    }

    /// Full grid vector from the unknown block.
    fn assemble(&self, w: &[f64]) -> Vec<f64> {
        match self.bc {
            BoundarySpec::Dirichlet { d0, dn } => super::assemble_dirichlet(*d0, w, *dn),
            BoundarySpec::Robin { .. } => w.to_vec(),
        }
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let u = self.assemble(w);
        let n = self.p.n;
        let mut rows = Vec::with_capacity(w.len());
        if let BoundarySpec::Robin { f0, .. } = self.bc {
            rows.push((u[1] - u[0]) - f0.eval(self.clamp(0, u[0])));
        }
        for x in 1..n {
            let t = self.clamp(x, u[x]);
            rows.push(u[x + 1] - 2.0 * u[x] + u[x - 1] - u[x] - g_unchecked(self.p, x, t) + t);
        }
        if let BoundarySpec::Robin { fn_, .. } = self.bc {
            rows.push((u[n] - u[n - 1]) - fn_.eval(self.clamp(n, u[n])));
        }
        rows
    }

    fn jacobian(&self, w: &[f64]) -> Tridiag {
        let n = self.p.n;
        let u = self.assemble(w);
        match self.bc {
            BoundarySpec::Dirichlet { .. } => {
                let m = n - 1;
                let mut j = Tridiag::new(m);
                for k in 0..m {
                    let x = k + 1;
                    let t = self.clamp(x, u[x]);
                    j.d[k] = if self.unclamped(x, u[x]) {
                        -3.0 - (g_prime(self.p, x, t) - 1.0)
                    } else {
                        -3.0
                    };
                    if k + 1 < m {
                        j.du[k] = 1.0;
                        j.dl[k] = 1.0;
                    }
                }
                j
            }
            BoundarySpec::Robin { f0, fn_ } => {
                let mut j = Tridiag::new(n + 1);
                j.d[0] = if self.unclamped(0, u[0]) {
                    -1.0 - f0.deriv(self.clamp(0, u[0]))
                } else {
                    -1.0
                };
                j.du[0] = 1.0;
                for x in 1..n {
                    let t = self.clamp(x, u[x]);
                    j.dl[x - 1] = 1.0;
                    j.d[x] = if self.unclamped(x, u[x]) {
                        -3.0 - (g_prime(self.p, x, t) - 1.0)
                    } else {
                        -3.0
                    };
                    j.du[x] = 1.0;
                }
                j.dl[n - 1] = -1.0;
                j.d[n] = if self.unclamped(n, u[n]) {
                    1.0 - fn_.deriv(self.clamp(n, u[n]))
                } else {
                    1.0
                };
                j
            }
        }
    }

    /// One Picard sweep: solves the constant linear operator against the
    /// truncated right-hand side frozen at `w`.
    fn picard_step(&self, w: &[f64]) -> Result<Vec<f64>, Error> {
        let n = self.p.n;
        let u = self.assemble(w);
        match self.bc {
            BoundarySpec::Dirichlet { d0, dn } => {
                let m = n - 1;
                let mut j = Tridiag::new(m);
                let mut rhs = vec![0.0; m];
                for k in 0..m {
                    let x = k + 1;
                    j.d[k] = -3.0;
                    if k + 1 < m {
                        j.du[k] = 1.0;
                        j.dl[k] = 1.0;
                    }
                    let t = self.clamp(x, u[x]);
                    rhs[k] = g_unchecked(self.p, x, t) - t;
                    if x == 1 {
                        rhs[k] -= d0;
                    }
                    if x == n - 1 {
                        rhs[k] -= dn;
                    }
                }
                j.solve(rhs)
            }
            BoundarySpec::Robin { f0, fn_ } => {
                let mut j = Tridiag::new(n + 1);
                let mut rhs = vec![0.0; n + 1];
                j.d[0] = -1.0;
                j.du[0] = 1.0;
                rhs[0] = f0.eval(self.clamp(0, u[0]));
                for x in 1..n {
                    j.dl[x - 1] = 1.0;
                    j.d[x] = -3.0;
                    j.du[x] = 1.0;
                    let t = self.clamp(x, u[x]);
                    rhs[x] = g_unchecked(self.p, x, t) - t;
                }
                j.dl[n - 1] = -1.0;
                j.d[n] = 1.0;
                rhs[n] = fn_.eval(self.clamp(n, u[n]));
                j.solve(rhs)
            }
        }
    }
}

/// Solves between a validated pair of lower/upper solutions, returning a
/// solution trapped in `[alpha, beta]` componentwise.
pub fn lower_upper_solve(
    p: &Parameters,
    bc: &BoundarySpec,
    alpha: &GridFunction,
    beta: &GridFunction,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    cfg.validate()?;
    if alpha.n() != p.n || beta.n() != p.n {
        return Err(Error::Validation("bound grid size mismatch".into()));
    }
    if !alpha.is_positive() {
        return Err(Error::Validation("lower solution must be strictly positive".into()));
    }
    for x in 0..=p.n {
        if alpha[x] > beta[x] {
            return Err(Error::Validation(format!(
                "alpha <= beta violated at index {x}: {} > {}",
                alpha[x], beta[x]
            )));
        }
    }
    let chk = check_lower_upper(p, bc, alpha, beta);
    if !chk.lower_ok {
        let (i, v) = chk.lower_violations[0];
        return Err(Error::Hypothesis(format!(
            "alpha is not a lower solution (first violation at index {i}, magnitude {v:.3e})"
        )));
    }
    if !chk.upper_ok {
        let (i, v) = chk.upper_violations[0];
        return Err(Error::Hypothesis(format!(
            "beta is not an upper solution (first violation at index {i}, magnitude {v:.3e})"
        )));
    }

    let sys = Truncated { p, bc, alpha, beta };
    let mid: Vec<f64> = match bc {
        BoundarySpec::Dirichlet { .. } => (1..p.n)
            .map(|x| 0.5 * (alpha[x] + beta[x]))
            .collect(),
        BoundarySpec::Robin { .. } => (0..=p.n)
            .map(|x| 0.5 * (alpha[x] + beta[x]))
            .collect(),
    };

    let opts = NewtonOpts {
        tol: cfg.tol_residual,
        max_iter: cfg.max_iter,
        backtrack: cfg.newton_backtrack_factor,
        positivity_floor: None,
        feasible: None,
    };
    let mut total_iterations = 0usize;
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut out = damped_newton(mid, |w| Some(sys.residual(w)), |w| sys.jacobian(w), &opts);
    total_iterations += out.iterations;
    trace.extend(out.trace.iter().copied());

    if !matches!(out.status, NewtonStatus::Converged) {
        // Picard fallback on the invertible constant operator, then a final
        // Newton polish.
        let mut v = out.x;
        for _ in 0..cfg.max_iter {
            let next = sys.picard_step(&v)?;
            total_iterations += 1;
            let diff = v
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let rn = norm_inf(&sys.residual(&next));
            let (lo, hi) = next
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            trace.push(TraceEntry { residual_inf: rn, min_value: lo, max_value: hi, delta: diff });
            v = next;
            if diff <= 1e-2 * cfg.tol_residual.max(1e-14) {
                break;
            }
        }
        out = damped_newton(v, |w| Some(sys.residual(w)), |w| sys.jacobian(w), &opts);
        total_iterations += out.iterations;
        trace.extend(out.trace.iter().copied());
        if !matches!(out.status, NewtonStatus::Converged) {
            let full = sys.assemble(&out.x);
            let report = super::finish_report(
                p,
                bc,
                full.iter().map(|v| v.max(1e-300)).collect(),
                Method::LowerUpper,
                total_iterations,
                Some((alpha.clone(), beta.clone())),
                trace,
            );
            return match report {
                Ok(rep) => Err(Error::Budget { report: Box::new(rep) }),
                Err(e) => Err(e),
            };
        }
    }

    // A posteriori bound check: the truncated solution must already lie in
    // [alpha, beta]; tiny rounding excursions are snapped back.
    let mut full = sys.assemble(&out.x);
    let slack = 1e-9 * (1.0 + beta.max_value().abs());
    for (x, v) in full.iter_mut().enumerate() {
        if *v < alpha[x] {
            if alpha[x] - *v > slack {
                return Err(Error::BoundViolation { index: x, value: *v, bound: alpha[x] });
            }
            *v = alpha[x];
        }
        if *v > beta[x] {
            if *v - beta[x] > slack {
                return Err(Error::BoundViolation { index: x, value: *v, bound: beta[x] });
            }
            *v = beta[x];
        }
    }
    let u = GridFunction::new(full)?;
    let rows = residual(p, bc, &u)?;
    let rn = norm_inf(&rows);
    if rn > cfg.tol_residual {
        let report = SolveReport {
            solution: u,
            method: Method::LowerUpper,
            residual_inf: rn,
            iterations: total_iterations,
            bounds_used: Some((alpha.clone(), beta.clone())),
            trace: Some(trace),
        };
        return Err(Error::Budget { report: Box::new(report) });
    }
    Ok(SolveReport {
        solution: u,
        method: Method::LowerUpper,
        residual_inf: rn,
        iterations: total_iterations,
        bounds_used: Some((alpha.clone(), beta.clone())),
        trace: Some(trace),
    })
}
