//! Constructive solution methods: truncation with upper/lower solutions,
//! damped positive Newton, homotopy continuation (repulsive and small-c
//! variants), variational minimization and the homogeneous Dirichlet limit.

mod bounds;
mod homogeneous;
mod homotopy;
mod lower_upper;
mod newton;
mod small_c;
mod tridiag;
mod variational;

pub use bounds::build_bounds;
pub use homogeneous::homogeneous_limit_solve;
pub use homotopy::homotopy_solve;
pub use lower_upper::lower_upper_solve;
pub use newton::newton_solve;
pub use small_c::small_c_homotopy_solve;
pub use variational::variational_solve;

use crate::difference::{norm_inf, GridFunction};
use crate::error::Error;
use crate::model::{g_prime, g_unchecked, residual, BoundarySpec, Parameters, RobinFunction};
use tridiag::Tridiag;

/// Solution method identifiers, also used as the `method` key in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LowerUpper,
    Newton,
    Homotopy,
    SmallCHomotopy,
    Variational,
    HomogeneousLimit,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::LowerUpper => "lower_upper",
            Method::Newton => "newton",
            Method::Homotopy => "homotopy",
            Method::SmallCHomotopy => "small_c_homotopy",
            Method::Variational => "variational",
            Method::HomogeneousLimit => "homogeneous_limit",
        }
    }

    pub fn from_str(s: &str) -> Option<Method> {
        Some(match s {
            "lower_upper" => Method::LowerUpper,
            "newton" => Method::Newton,
            "homotopy" => Method::Homotopy,
            "small_c_homotopy" => Method::SmallCHomotopy,
            "variational" => Method::Variational,
            "homogeneous_limit" => Method::HomogeneousLimit,
            _ => return None,
        })
    }
}

/// One entry of a per-iteration trace.
///
/// `delta` is a method-specific progress measure: accepted step size for
/// Newton-type iterations, functional decrease for descent, the continuation
/// parameter for homotopies, and the stage sup-difference for the
/// homogeneous limit.
#[derive(Debug, Clone, Copy)]
pub struct TraceEntry {
    /// Residual infinity norm of the iterate (in the system being solved).
    pub residual_inf: f64,
    /// Smallest entry of the unknown block at this iterate.
    pub min_value: f64,
    /// Largest entry of the unknown block at this iterate.
    pub max_value: f64,
    /// Method-specific progress measure.
    pub delta: f64,
}

/// Outcome of a successful solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// The computed positive solution on the full grid.
    pub solution: GridFunction,
    /// Which method produced it.
    pub method: Method,
    /// Infinity norm of the boundary value problem residual at the solution.
    pub residual_inf: f64,
    /// Total inner iterations spent.
    pub iterations: usize,
    /// Bracketing bounds used, when the method has them.
    pub bounds_used: Option<(GridFunction, GridFunction)>,
    /// Per-iteration history.
    pub trace: Option<Vec<TraceEntry>>,
}

/// Tuning knobs shared by all solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Success threshold on the residual infinity norm.
    pub tol_residual: f64,
    /// Iteration budget per solve (per stage for staged methods).
    pub max_iter: usize,
    /// Newton line-search backtracking factor in (0, 1).
    pub newton_backtrack_factor: f64,
    /// Initial continuation step.
    pub homotopy_initial_step: f64,
    /// Smallest continuation step before the path is declared lost.
    pub homotopy_min_step: f64,
    /// Fraction-to-boundary rule: updates may not drop an entry below this
    /// fraction of its current value.
    pub positivity_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iter: 200,
            newton_backtrack_factor: 0.5,
            homotopy_initial_step: 0.05,
            homotopy_min_step: 1e-6,
            positivity_fraction: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let ok = self.tol_residual > 0.0
            && self.max_iter > 0
            && self.newton_backtrack_factor > 0.0
            && self.newton_backtrack_factor < 1.0
            && self.homotopy_initial_step > 0.0
            && self.homotopy_min_step > 0.0
            && self.positivity_fraction > 0.0
            && self.positivity_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation("invalid solver configuration".into()))
        }
    }
}

pub(crate) enum NewtonStatus {
    Converged,
    Budget,
    Stagnated,
    Singular,
}

pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub status: NewtonStatus,
}

pub(crate) struct NewtonOpts<'a> {
    pub tol: f64,
    pub max_iter: usize,
    pub backtrack: f64,
    /// When set, candidate entries must stay above `floor * current entry`.
    pub positivity_floor: Option<f64>,
    /// Extra feasibility predicate for candidates (e.g. box membership).
    pub feasible: Option<&'a dyn Fn(&[f64]) -> bool>,
}

fn block_minmax(x: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Damped Newton iteration on a system with tridiagonal Jacobian.
///
/// A step is accepted only if it satisfies the positivity floor, the extra
/// feasibility predicate and strictly decreases the residual infinity norm;
/// otherwise it is backtracked.
pub(crate) fn damped_newton(
    x0: Vec<f64>,
    mut f: impl FnMut(&[f64]) -> Option<Vec<f64>>,
    mut jac: impl FnMut(&[f64]) -> Tridiag,
    opts: &NewtonOpts,
) -> NewtonOutcome {
    let mut x = x0;
    let mut trace = Vec::new();
    let mut r = match f(&x) {
        Some(r) => r,
        None => {
            return NewtonOutcome {
                residual_inf: f64::INFINITY,
                iterations: 0,
                trace,
                status: NewtonStatus::Stagnated,
                x,
            }
        }
    };
    let mut rn = norm_inf(&r);
    let (lo, hi) = block_minmax(&x);
    trace.push(TraceEntry { residual_inf: rn, min_value: lo, max_value: hi, delta: 0.0 });
    if rn <= opts.tol {
        return NewtonOutcome { x, residual_inf: rn, iterations: 0, trace, status: NewtonStatus::Converged };
    }
    for it in 1..=opts.max_iter {
        let j = jac(&x);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = match j.solve(rhs) {
            Ok(s) => s,
            Err(_) => {
                return NewtonOutcome { x, residual_inf: rn, iterations: it - 1, trace, status: NewtonStatus::Singular }
            }
        };
        let mut tau = 1.0;
        let mut accepted: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + tau * si).collect();
            let floor_ok = match opts.positivity_floor {
                Some(frac) => cand.iter().zip(&x).all(|(ci, xi)| *ci >= frac * *xi),
                None => true,
            };
            let feasible_ok = opts.feasible.map_or(true, |p| p(&cand));
            if floor_ok && feasible_ok {
                if let Some(rc) = f(&cand) {
                    let rcn = norm_inf(&rc);
                    if rcn < rn {
                        accepted = Some((cand, rc, rcn));
                        break;
                    }
                }
            }
            tau *= opts.backtrack;
        }
        match accepted {
            Some((cand, rc, rcn)) => {
                let step_norm = tau * norm_inf(&step);
                x = cand;
                r = rc;
                rn = rcn;
                let (lo, hi) = block_minmax(&x);
                trace.push(TraceEntry { residual_inf: rn, min_value: lo, max_value: hi, delta: step_norm });
                if rn <= opts.tol {
                    return NewtonOutcome { x, residual_inf: rn, iterations: it, trace, status: NewtonStatus::Converged };
                }
            }
            None => {
                return NewtonOutcome { x, residual_inf: rn, iterations: it - 1, trace, status: NewtonStatus::Stagnated }
            }
        }
    }
    let its = opts.max_iter;
    NewtonOutcome { x, residual_inf: rn, iterations: its, trace, status: NewtonStatus::Budget }
}

// ---------------------------------------------------------------------------
// Shared residual/Jacobian assembly for the untruncated problem.
// ---------------------------------------------------------------------------

/// Assembles the full grid vector for a Dirichlet problem from the interior
/// unknown block.
pub(crate) fn assemble_dirichlet(d0: f64, w: &[f64], dn: f64) -> Vec<f64> {
    let mut u = Vec::with_capacity(w.len() + 2);
    u.push(d0);
    u.extend_from_slice(w);
    u.push(dn);
    u
}

/// Interior residual rows for a Dirichlet problem; `None` if an unknown is
/// not strictly positive.
pub(crate) fn dirichlet_block_residual(p: &Parameters, d0: f64, dn: f64, w: &[f64]) -> Option<Vec<f64>> {
    if w.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let u = assemble_dirichlet(d0, w, dn);
    let mut rows = Vec::with_capacity(w.len());
    for x in 1..=w.len() {
        rows.push(u[x + 1] - 2.0 * u[x] + u[x - 1] - g_unchecked(p, x, u[x]));
    }
    Some(rows)
}

pub(crate) fn dirichlet_block_jacobian(p: &Parameters, w: &[f64]) -> Tridiag {
    let m = w.len();
    let mut j = Tridiag::new(m);
    for k in 0..m {
        let x = k + 1;
        j.d[k] = -2.0 - g_prime(p, x, w[k]);
        if k + 1 < m {
            j.du[k] = 1.0;
            j.dl[k] = 1.0;
        }
    }
    j
}

/// Full residual rows for a Robin problem (all N+1 entries are unknown);
/// `None` if any entry is not strictly positive.
pub(crate) fn robin_block_residual(
    p: &Parameters,
    f0: &RobinFunction,
    fn_: &RobinFunction,
    u: &[f64],
) -> Option<Vec<f64>> {
    if u.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let n = u.len() - 1;
    let mut rows = Vec::with_capacity(n + 1);
    rows.push((u[1] - u[0]) - f0.eval(u[0]));
    for x in 1..n {
        rows.push(u[x + 1] - 2.0 * u[x] + u[x - 1] - g_unchecked(p, x, u[x]));
    }
    rows.push((u[n] - u[n - 1]) - fn_.eval(u[n]));
    Some(rows)
}

pub(crate) fn robin_block_jacobian(
    p: &Parameters,
    f0: &RobinFunction,
    fn_: &RobinFunction,
    u: &[f64],
) -> Tridiag {
    let n = u.len() - 1;
    let mut j = Tridiag::new(n + 1);
    j.d[0] = -1.0 - f0.deriv(u[0]);
    j.du[0] = 1.0;
    for x in 1..n {
        j.dl[x - 1] = 1.0;
        j.d[x] = -2.0 - g_prime(p, x, u[x]);
        j.du[x] = 1.0;
    }
    j.dl[n - 1] = -1.0;
    j.d[n] = 1.0 - fn_.deriv(u[n]);
    j
}

/// Builds a report from a converged unknown block, recomputing the
/// authoritative residual through the full boundary value problem.
pub(crate) fn finish_report(
    p: &Parameters,
    bc: &BoundarySpec,
    full: Vec<f64>,
    method: Method,
    iterations: usize,
    bounds_used: Option<(GridFunction, GridFunction)>,
    trace: Vec<TraceEntry>,
) -> Result<SolveReport, Error> {
    let u = GridFunction::new(full)?;
    let rows = residual(p, bc, &u)?;
    Ok(SolveReport {
        solution: u,
        method,
        residual_inf: norm_inf(&rows),
        iterations,
        bounds_used,
        trace: Some(trace),
    })
}

/// Regime-based method dispatch used by the CLI's `auto` mode and by the
/// continuum study:
/// homogeneous attractive Dirichlet data go to the limit procedure, any
/// other attractive problem to the truncation method, the mixed-sign
/// repulsive case to the homotopy (falling back to the variational method),
/// and the doubly positive case to the small-c continuation.
pub fn solve_auto(p: &Parameters, bc: &BoundarySpec, cfg: &SolverConfig) -> Result<SolveReport, Error> {
    if p.c == 0.0 {
        return Err(Error::Validation("c must be nonzero".into()));
    }
    if p.c < 0.0 {
        if let Some((d0, dn)) = bc.as_dirichlet() {
            if d0 == 0.0 && dn == 0.0 {
                return homogeneous_limit_solve(p, cfg);
            }
        }
        let (alpha, beta) = build_bounds(p, bc)?;
        return lower_upper_solve(p, bc, &alpha, &beta, cfg);
    }
    // c > 0 from here.
    if p.a < 0.0 {
        match homotopy_solve(p, bc, cfg) {
            Ok(rep) => Ok(rep),
            Err(e) => {
                log::info!("homotopy failed ({e}); falling back to variational descent");
                variational_solve(p, bc, cfg).map_err(|_| e)
            }
        }
    } else if p.a > 0.0 {
        small_c_homotopy_solve(p, bc, cfg)
    } else {
        Err(Error::Validation(
            "no applicable method for a = 0 with c > 0".into(),
        ))
    }
}
