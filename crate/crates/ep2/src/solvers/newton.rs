//! Damped Newton iteration on the full residual with a fraction-to-boundary
//! positivity rule: no accepted step may drop an entry below
//! `positivity_fraction` times its current value, which keeps every iterate
//! strictly positive and the singular term finite.

use super::{
    damped_newton, dirichlet_block_jacobian, dirichlet_block_residual, robin_block_jacobian,
    robin_block_residual, NewtonOpts, NewtonStatus, SolveReport, SolverConfig,
};
use crate::difference::GridFunction;
use crate::error::Error;
use crate::model::{BoundarySpec, Parameters};
use crate::solvers::Method;

/// Root-finding on the residual of the boundary value problem starting from
/// a strictly positive initial guess. Dirichlet endpoints are taken from the
/// boundary data; the interior of `u0` seeds the iteration.
pub fn newton_solve(
    p: &Parameters,
    bc: &BoundarySpec,
    u0: &GridFunction,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    cfg.validate()?;
    if u0.n() != p.n {
        return Err(Error::Validation("initial guess grid size mismatch".into()));
    }
    let opts = NewtonOpts {
        tol: cfg.tol_residual,
        max_iter: cfg.max_iter,
        backtrack: cfg.newton_backtrack_factor,
        positivity_floor: Some(cfg.positivity_fraction),
        feasible: None,
    };
    let (start, assemble): (Vec<f64>, Box<dyn Fn(&[f64]) -> Vec<f64>>) = match bc {
        BoundarySpec::Dirichlet { d0, dn } => {
            if !u0.interior_positive() {
                return Err(Error::Validation("initial guess must be strictly positive".into()));
            }
            let (d0, dn) = (*d0, *dn);
            (
                u0.interior().to_vec(),
                Box::new(move |w: &[f64]| super::assemble_dirichlet(d0, w, dn)),
            )
        }
        BoundarySpec::Robin { .. } => {
            if !u0.is_positive() {
                return Err(Error::Validation("initial guess must be strictly positive".into()));
            }
            (u0.values().to_vec(), Box::new(|w: &[f64]| w.to_vec()))
        }
    };
    let out = match bc {
        BoundarySpec::Dirichlet { d0, dn } => damped_newton(
            start,
            |w| dirichlet_block_residual(p, *d0, *dn, w),
            |w| dirichlet_block_jacobian(p, w),
            &opts,
        ),
        BoundarySpec::Robin { f0, fn_ } => damped_newton(
            start,
            |w| robin_block_residual(p, f0, fn_, w),
            |w| robin_block_jacobian(p, f0, fn_, w),
            &opts,
        ),
    };
    let report = super::finish_report(
        p,
        bc,
        assemble(&out.x),
        Method::Newton,
        out.iterations,
        None,
        out.trace,
    )?;
    match out.status {
        NewtonStatus::Converged => Ok(report),
        NewtonStatus::Singular => Err(Error::Singular),
        NewtonStatus::Budget | NewtonStatus::Stagnated => {
            Err(Error::Budget { report: Box::new(report) })
        }
    }
}
