//! The discrete Ermakov-Painlevé II equation
//! `Δ²u_{x-1} = a u_x³ + b x u_x + c / u_x³`, its boundary conditions,
//! the equivalent polynomial system and the variational functionals.

use crate::difference::GridFunction;
use crate::error::Error;

/// Coefficients of the equation together with the grid size.
///
/// The sign of `c` classifies the singular term: `c < 0` attractive,
/// `c > 0` repulsive. `c = 0` is accepted for plain evaluation but
/// rejected by the regime-classified solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Coefficient of `u³`.
    pub a: f64,
    /// Coefficient of `x u`.
    pub b: f64,
    /// Coefficient of `1/u³`.
    pub c: f64,
    /// Grid size N >= 2.
    pub n: usize,
}

impl Parameters {
    pub fn new(a: f64, b: f64, c: f64, n: usize) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::Validation(format!("grid size N must be >= 2, got {n}")));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Validation("coefficients must be finite".into()));
        }
        Ok(Self { a, b, c, n })
    }

    /// Attractive singularity (`c < 0`).
    pub fn attractive(&self) -> bool {
        self.c < 0.0
    }

    /// Repulsive singularity (`c > 0`).
    pub fn repulsive(&self) -> bool {
        self.c > 0.0
    }
}

/// Declared monotonicity of a Robin boundary function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    None,
}

/// A Robin boundary function `f(s) = Σ p_k s^{e_k}` with integer exponents
/// `e_k` in `{-3, ..., 3}`, defined for `s > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinFunction {
    terms: Vec<(f64, i32)>,
    monotonicity: Monotonicity,
}

impl RobinFunction {
    /// Builds the function and, when a monotonicity is declared, rejects it
    /// if a scan of `f'` on a log grid over `(1e-6, 1e6)` contradicts the
    /// declaration.
    pub fn new(terms: Vec<(f64, i32)>, monotonicity: Monotonicity) -> Result<Self, Error> {
        for &(p, e) in &terms {
            if !p.is_finite() {
                return Err(Error::Validation("Robin coefficient must be finite".into()));
            }
            if !(-3..=3).contains(&e) {
                return Err(Error::Validation(format!(
                    "Robin exponent {e} outside {{-3, ..., 3}}"
                )));
            }
        }
        let f = Self { terms, monotonicity };
        if monotonicity != Monotonicity::None {
            for k in 0..=120 {
                let s = 10f64.powf(-6.0 + 12.0 * k as f64 / 120.0);
                let d = f.deriv(s);
                let scale: f64 = f
                    .terms
                    .iter()
                    .map(|&(p, e)| (p * e as f64 * s.powi(e - 1)).abs())
                    .sum();
                let tol = 1e-12 * (1.0 + scale);
                let contradicted = match monotonicity {
                    Monotonicity::Nondecreasing => d < -tol,
                    Monotonicity::Nonincreasing => d > tol,
                    Monotonicity::None => false,
                };
                if contradicted {
                    return Err(Error::Validation(format!(
                        "declared monotonicity contradicted: f'({s:.3e}) = {d:.3e}"
                    )));
                }
            }
        }
        Ok(f)
    }

    /// The zero function.
    pub fn zero() -> Self {
        Self { terms: Vec::new(), monotonicity: Monotonicity::None }
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn terms(&self) -> &[(f64, i32)] {
        &self.terms
    }

    /// Evaluates `f(s)`, `s > 0`.
    pub fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|&(p, e)| p * s.powi(e)).sum()
    }

    /// Evaluates `f'(s)`.
    pub fn deriv(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, e)| p * e as f64 * s.powi(e - 1))
            .sum()
    }

    /// Antiderivative `F(s)`. Terms with exponent >= 0 integrate from 0;
    /// terms with exponent <= -1 integrate from 1 instead (the integral
    /// from 0 diverges). The base-point shift only changes F by a constant,
    /// so gradients, which are all the solvers use, are unaffected.
    pub fn antiderivative(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, e)| {
                if e >= 0 {
                    p * s.powi(e + 1) / (e + 1) as f64
                } else if e == -1 {
                    p * s.ln()
                } else {
                    p * (s.powi(e + 1) - 1.0) / (e + 1) as f64
                }
            })
            .sum()
    }
}

/// Kind of boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Robin,
}

/// Boundary data: fixed endpoint values, or nonlinear Robin relations
/// `Δu_0 = f_0(u_0)`, `Δu_{N-1} = f_N(u_N)`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Dirichlet { d0: f64, dn: f64 },
    Robin { f0: RobinFunction, fn_: RobinFunction },
}

impl BoundarySpec {
    /// Dirichlet data; both values must be finite and nonnegative.
    /// The doubly homogeneous case `d0 = dn = 0` is only meaningful for
    /// the homogeneous-limit solver.
    pub fn dirichlet(d0: f64, dn: f64) -> Result<Self, Error> {
        if !(d0.is_finite() && dn.is_finite()) || d0 < 0.0 || dn < 0.0 {
            return Err(Error::Validation(format!(
                "Dirichlet data must be finite and >= 0, got ({d0}, {dn})"
            )));
        }
        Ok(BoundarySpec::Dirichlet { d0, dn })
    }

    pub fn robin(f0: RobinFunction, fn_: RobinFunction) -> Self {
        BoundarySpec::Robin { f0, fn_ }
    }

    pub fn kind(&self) -> BoundaryKind {
        match self {
            BoundarySpec::Dirichlet { .. } => BoundaryKind::Dirichlet,
            BoundarySpec::Robin { .. } => BoundaryKind::Robin,
        }
    }

    pub fn as_dirichlet(&self) -> Option<(f64, f64)> {
        match self {
            BoundarySpec::Dirichlet { d0, dn } => Some((*d0, *dn)),
            _ => None,
        }
    }

    pub fn as_robin(&self) -> Option<(&RobinFunction, &RobinFunction)> {
        match self {
            BoundarySpec::Robin { f0, fn_ } => Some((f0, fn_)),
            _ => None,
        }
    }
}

/// Right-hand side `G_x(t) = a t³ + b x t + c / t³`, `t > 0`.
pub fn g(p: &Parameters, x: usize, t: f64) -> Result<f64, Error> {
    if t <= 0.0 {
        return Err(Error::Domain(format!("G_{x} requires t > 0, got {t}")));
    }
    Ok(g_unchecked(p, x, t))
}

pub(crate) fn g_unchecked(p: &Parameters, x: usize, t: f64) -> f64 {
    let t3 = t * t * t;
    p.a * t3 + p.b * x as f64 * t + p.c / t3
}

/// `G_x'(t) = 3 a t² + b x - 3 c / t⁴`.
pub(crate) fn g_prime(p: &Parameters, x: usize, t: f64) -> f64 {
    let t2 = t * t;
    3.0 * p.a * t2 + p.b * x as f64 - 3.0 * p.c / (t2 * t2)
}

fn check_sizes(p: &Parameters, u: &GridFunction) -> Result<(), Error> {
    if u.n() != p.n {
        return Err(Error::Validation(format!(
            "grid size mismatch: parameters have N = {}, function has N = {}",
            p.n,
            u.n()
        )));
    }
    Ok(())
}

/// Residual of the full boundary value problem; length N+1.
///
/// Interior rows are `Δ²u_{x-1} - G_x(u_x)`. Dirichlet rows are
/// `u_0 - D_0` and `u_N - D_N`; Robin rows are `Δu_0 - f_0(u_0)` and
/// `Δu_{N-1} - f_N(u_N)`. A solution has residual identically zero.
///
/// Interior values must be strictly positive; for Robin conditions the
/// endpoints must be positive as well.
pub fn residual(p: &Parameters, bc: &BoundarySpec, u: &GridFunction) -> Result<Vec<f64>, Error> {
    check_sizes(p, u)?;
    let n = p.n;
    let mut rows = vec![0.0; n + 1];
    for x in 1..n {
        if u[x] <= 0.0 {
            return Err(Error::NonpositiveEntry { index: x, value: u[x] });
        }
        rows[x] = (u[x + 1] - 2.0 * u[x] + u[x - 1]) - g_unchecked(p, x, u[x]);
    }
    match bc {
        BoundarySpec::Dirichlet { d0, dn } => {
            rows[0] = u[0] - d0;
            rows[n] = u[n] - dn;
        }
        BoundarySpec::Robin { f0, fn_ } => {
            for &i in &[0, n] {
                if u[i] <= 0.0 {
                    return Err(Error::NonpositiveEntry { index: i, value: u[i] });
                }
            }
            rows[0] = (u[1] - u[0]) - f0.eval(u[0]);
            rows[n] = (u[n] - u[n - 1]) - fn_.eval(u[n]);
        }
    }
    Ok(rows)
}

/// Infinity norm of the residual.
pub fn residual_inf(p: &Parameters, bc: &BoundarySpec, u: &GridFunction) -> Result<f64, Error> {
    Ok(crate::difference::norm_inf(&residual(p, bc, u)?))
}

/// Polynomial system `P_x(u) = a u_x⁶ + (2+bx) u_x⁴ - (u_{x-1}+u_{x+1}) u_x³ + c`
/// for the Dirichlet problem, x = 1..N-1, with the boundary data substituted
/// for `u_0` and `u_N`. Total in `u`; for `u_x > 0` and endpoints equal to the
/// data, `P_x(u) = -u_x³ R_x` where `R` is [`residual`].
pub fn p_system(p: &Parameters, bc: &BoundarySpec, u: &GridFunction) -> Result<Vec<f64>, Error> {
    check_sizes(p, u)?;
    let (d0, dn) = bc
        .as_dirichlet()
        .ok_or_else(|| Error::Validation("P is defined for Dirichlet conditions".into()))?;
    let n = p.n;
    let mut rows = Vec::with_capacity(n - 1);
    for x in 1..n {
        let t = u[x];
        let left = if x == 1 { d0 } else { u[x - 1] };
        let right = if x == n - 1 { dn } else { u[x + 1] };
        let t3 = t * t * t;
        rows.push(p.a * t3 * t3 + (2.0 + p.b * x as f64) * t3 * t - (left + right) * t3 + p.c);
    }
    Ok(rows)
}

/// `Q_x(u) = P_x(u) - c = u_x³ [a u_x³ + (2+bx) u_x - (u_{x-1}+u_{x+1})]`.
pub fn q_system(p: &Parameters, bc: &BoundarySpec, u: &GridFunction) -> Result<Vec<f64>, Error> {
    check_sizes(p, u)?;
    let (d0, dn) = bc
        .as_dirichlet()
        .ok_or_else(|| Error::Validation("Q is defined for Dirichlet conditions".into()))?;
    let n = p.n;
    let mut rows = Vec::with_capacity(n - 1);
    for x in 1..n {
        let t = u[x];
        let left = if x == 1 { d0 } else { u[x - 1] };
        let right = if x == n - 1 { dn } else { u[x + 1] };
        let t3 = t * t * t;
        rows.push(t3 * (p.a * t3 + (2.0 + p.b * x as f64) * t - (left + right)));
    }
    Ok(rows)
}

fn check_dirichlet_endpoints(d0: f64, dn: f64, u: &GridFunction) -> Result<(), Error> {
    let n = u.n();
    if u[0] != d0 || u[n] != dn {
        return Err(Error::Validation(format!(
            "functional requires u_0 = D_0 and u_N = D_N exactly, got u_0 = {}, u_N = {}",
            u[0], u[n]
        )));
    }
    Ok(())
}

/// Value of the variational functional.
///
/// For Dirichlet data the endpoints of `u` must equal the data and the
/// value is
/// `𝓘(u) = ½ Σ (Δu)² + (a/4) Σ u⁴ + (b/2) Σ x u² - (c/2) Σ u⁻²`
/// with interior sums. For Robin conditions the endpoints are free and
/// `𝓙(u) = 𝓘(u) + F_0(u_0) - F_N(u_N)` is returned.
pub fn functional_value(p: &Parameters, bc: &BoundarySpec, u: &GridFunction) -> Result<f64, Error> {
    check_sizes(p, u)?;
    let n = p.n;
    for x in 1..n {
        if u[x] <= 0.0 {
            return Err(Error::NonpositiveEntry { index: x, value: u[x] });
        }
    }
    let mut val = 0.0;
    for x in 1..=n {
        let d = u[x] - u[x - 1];
        val += 0.5 * d * d;
    }
    for x in 1..n {
        let t = u[x];
        let t2 = t * t;
        val += 0.25 * p.a * t2 * t2 + 0.5 * p.b * x as f64 * t2 - 0.5 * p.c / t2;
    }
    match bc {
        BoundarySpec::Dirichlet { d0, dn } => {
            check_dirichlet_endpoints(*d0, *dn, u)?;
        }
        BoundarySpec::Robin { f0, fn_ } => {
            for &i in &[0, n] {
                if u[i] <= 0.0 {
                    return Err(Error::NonpositiveEntry { index: i, value: u[i] });
                }
            }
            val += f0.antiderivative(u[0]) - fn_.antiderivative(u[n]);
        }
    }
    Ok(val)
}

/// Gradient of the variational functional.
///
/// Dirichlet: length N-1, row x is
/// `2u_x - (u_{x-1}+u_{x+1}) + a u_x³ + b x u_x + c/u_x³`, which equals the
/// negated interior residual row. Robin: length N+1 with endpoint rows
/// `f_0(u_0) + u_0 - u_1` and `-f_N(u_N) + u_N - u_{N-1}`.
pub fn functional_gradient(
    p: &Parameters,
    bc: &BoundarySpec,
    u: &GridFunction,
) -> Result<Vec<f64>, Error> {
    check_sizes(p, u)?;
    let n = p.n;
    let interior_row = |x: usize| -> Result<f64, Error> {
        if u[x] <= 0.0 {
            return Err(Error::NonpositiveEntry { index: x, value: u[x] });
        }
        Ok(2.0 * u[x] - (u[x - 1] + u[x + 1]) + g_unchecked(p, x, u[x]))
    };
    match bc {
        BoundarySpec::Dirichlet { d0, dn } => {
            check_dirichlet_endpoints(*d0, *dn, u)?;
            (1..n).map(interior_row).collect()
        }
        BoundarySpec::Robin { f0, fn_ } => {
            for &i in &[0, n] {
                if u[i] <= 0.0 {
                    return Err(Error::NonpositiveEntry { index: i, value: u[i] });
                }
            }
            let mut rows = Vec::with_capacity(n + 1);
            rows.push(f0.eval(u[0]) + u[0] - u[1]);
            for x in 1..n {
                rows.push(interior_row(x)?);
            }
            rows.push(-fn_.eval(u[n]) + u[n] - u[n - 1]);
            Ok(rows)
        }
    }
}

/// Scale factor for identity tolerances: `1 + ‖u‖∞⁶ + |c| (min u)⁻³`,
/// matching the worst-case magnitude of the terms involved.
pub fn identity_scale(p: &Parameters, u: &GridFunction) -> f64 {
    let sup = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_pos = u
        .values()
        .iter()
        .cloned()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let singular = if min_pos.is_finite() {
        p.c.abs() / (min_pos * min_pos * min_pos)
    } else {
        0.0
    };
    1.0 + sup.powi(6) + singular
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn positive_grid(rng: &mut ChaCha8Rng, n: usize) -> GridFunction {
        GridFunction::from_fn(n, |_| rng.gen_range(0.3..3.0)).unwrap()
    }

    #[test]
    fn g_values() {
        let p = Parameters::new(1.0, 0.0, -1.0, 4).unwrap();
        assert_eq!(g(&p, 1, 1.0).unwrap(), 0.0);
        let p = Parameters::new(0.0, 1.0, -1.0, 4).unwrap();
        assert_eq!(g(&p, 2, 1.0).unwrap(), 1.0);
        assert!(g(&p, 1, 0.0).is_err());
    }

    #[test]
    fn g_matches_independent_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..500 {
            let p = Parameters::new(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(2..10),
            )
            .unwrap();
            let x = rng.gen_range(1..p.n);
            let t: f64 = rng.gen_range(0.05..5.0);
            // Second evaluator in the variable w = t^2.
            let w = t * t;
            let other = (p.a * w + p.b * x as f64) * t + p.c / (t * w);
            let direct = g(&p, x, t).unwrap();
            assert!((direct - other).abs() <= 1e-13 * (1.0 + direct.abs().max(other.abs())));
        }
    }

    #[test]
    fn residual_constant_solution() {
        let p = Parameters::new(1.0, 0.0, -1.0, 2).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u = GridFunction::constant(2, 1.0).unwrap();
        let r = residual(&p, &bc, &u).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_hand_value() {
        let p = Parameters::new(1.0, 0.0, -1.0, 2).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u = GridFunction::new(vec![1.0, 2.0, 1.0]).unwrap();
        let r = residual(&p, &bc, &u).unwrap();
        assert!((r[1] - (-9.875)).abs() < 1e-14);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[2], 0.0);
    }

    #[test]
    fn residual_rejects_nonpositive_interior() {
        let p = Parameters::new(1.0, 0.0, -1.0, 3).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u = GridFunction::new(vec![1.0, 0.5, -0.25, 1.0]).unwrap();
        match residual(&p, &bc, &u) {
            Err(Error::NonpositiveEntry { index: 2, .. }) => {}
            other => panic!("expected nonpositive entry at 2, got {other:?}"),
        }
    }

    #[test]
    fn p_system_values() {
        let p = Parameters::new(1.0, 0.0, -1.0, 2).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u = GridFunction::constant(2, 1.0).unwrap();
        assert_eq!(p_system(&p, &bc, &u).unwrap(), vec![0.0]);
        // A vanishing coordinate reduces P_x to the constant c.
        let p2 = Parameters::new(1.0, 0.5, 2.5, 3).unwrap();
        let bc2 = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u2 = GridFunction::new(vec![1.0, 0.0, 2.0, 1.0]).unwrap();
        let rows = p_system(&p2, &bc2, &u2).unwrap();
        assert_eq!(rows[0], 2.5);
    }

    #[test]
    fn p_is_negated_cubic_scaled_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(2..8);
            let p = Parameters::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                n,
            )
            .unwrap();
            let u = positive_grid(&mut rng, n);
            let bc = BoundarySpec::dirichlet(u[0], u[n]).unwrap();
            let rows_p = p_system(&p, &bc, &u).unwrap();
            let rows_r = residual(&p, &bc, &u).unwrap();
            let scale = identity_scale(&p, &u);
            for x in 1..n {
                let t = u[x];
                assert!((rows_p[x - 1] + t * t * t * rows_r[x]).abs() <= 1e-12 * scale);
                // Sign correspondence for positive coordinates.
                if rows_r[x].abs() > 1e-12 * scale {
                    assert_eq!(rows_p[x - 1] > 0.0, rows_r[x] < 0.0);
                }
            }
        }
    }

    #[test]
    fn q_values_and_shift_identity() {
        let p = Parameters::new(1.0, 0.0, -1.0, 2).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u = GridFunction::constant(2, 1.0).unwrap();
        assert_eq!(q_system(&p, &bc, &u).unwrap(), vec![1.0]);
        let u0 = GridFunction::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(q_system(&p, &bc, &u0).unwrap(), vec![0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.gen_range(2..8);
            let p = Parameters::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                n,
            )
            .unwrap();
            let u = positive_grid(&mut rng, n);
            let bc = BoundarySpec::dirichlet(u[0], u[n]).unwrap();
            let ps = p_system(&p, &bc, &u).unwrap();
            let qs = q_system(&p, &bc, &u).unwrap();
            for (pv, qv) in ps.iter().zip(&qs) {
                assert_eq!(*pv, qv + p.c);
            }
        }
    }

    #[test]
    fn functional_hand_values() {
        let p = Parameters::new(1.0, 0.0, -1.0, 2).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let u = GridFunction::constant(2, 1.0).unwrap();
        assert!((functional_value(&p, &bc, &u).unwrap() - 0.75).abs() < 1e-15);

        let p = Parameters::new(0.0, 0.0, -2.0, 2).unwrap();
        assert!((functional_value(&p, &bc, &u).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn functional_scales_linearly_in_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = rng.gen_range(2..8);
            let c = rng.gen_range(-3.0..-0.1);
            let p1 = Parameters::new(1.0, 0.5, c, n).unwrap();
            let p2 = Parameters::new(1.0, 0.5, 2.0 * c, n).unwrap();
            let u = positive_grid(&mut rng, n);
            let bc = BoundarySpec::dirichlet(u[0], u[n]).unwrap();
            let v1 = functional_value(&p1, &bc, &u).unwrap();
            let v2 = functional_value(&p2, &bc, &u).unwrap();
            let inv2: f64 = u.interior().iter().map(|t| 1.0 / (t * t)).sum();
            let expect = v1 - (p2.c - p1.c) / 2.0 * inv2;
            assert!((v2 - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn gradient_is_negated_interior_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let n = rng.gen_range(2..10);
            let p = Parameters::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                n,
            )
            .unwrap();
            let u = positive_grid(&mut rng, n);
            let bc = BoundarySpec::dirichlet(u[0], u[n]).unwrap();
            let grad = functional_gradient(&p, &bc, &u).unwrap();
            let res = residual(&p, &bc, &u).unwrap();
            let scale = identity_scale(&p, &u);
            for x in 1..n {
                assert!((grad[x - 1] + res[x]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let n = rng.gen_range(2..8);
            let p = Parameters::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                n,
            )
            .unwrap();
            let u = positive_grid(&mut rng, n);
            let bc = BoundarySpec::dirichlet(u[0], u[n]).unwrap();
            let grad = functional_gradient(&p, &bc, &u).unwrap();
            let h = 1e-6;
            for x in 1..n {
                let mut up = u.values().to_vec();
                let mut dn = u.values().to_vec();
                up[x] += h;
                dn[x] -= h;
                let fu = functional_value(&p, &bc, &GridFunction::new(up).unwrap()).unwrap();
                let fd = functional_value(&p, &bc, &GridFunction::new(dn).unwrap()).unwrap();
                let fdiff = (fu - fd) / (2.0 * h);
                assert!(
                    (fdiff - grad[x - 1]).abs() <= 1e-6 * grad[x - 1].abs().max(1.0),
                    "fd {fdiff} vs grad {}",
                    grad[x - 1]
                );
            }
        }
    }

    #[test]
    fn robin_gradient_rows() {
        let f0 = RobinFunction::new(vec![(1.0, 1), (-1.0, 0)], Monotonicity::Nondecreasing).unwrap();
        let fn_ = RobinFunction::new(vec![(-1.0, 1), (1.0, 0)], Monotonicity::Nonincreasing).unwrap();
        let p = Parameters::new(1.0, 0.2, -1.0, 3).unwrap();
        let bc = BoundarySpec::robin(f0.clone(), fn_.clone());
        let u = GridFunction::new(vec![0.8, 1.1, 0.9, 1.2]).unwrap();
        let grad = functional_gradient(&p, &bc, &u).unwrap();
        assert_eq!(grad.len(), 4);
        assert!((grad[0] - (f0.eval(0.8) + 0.8 - 1.1)).abs() < 1e-15);
        assert!((grad[3] - (-fn_.eval(1.2) + 1.2 - 0.9)).abs() < 1e-15);
        // Endpoint rows against finite differences of the Robin functional.
        let h = 1e-6;
        for (i, row) in [(0usize, grad[0]), (3usize, grad[3])] {
            let mut up = u.values().to_vec();
            let mut dn = u.values().to_vec();
            up[i] += h;
            dn[i] -= h;
            let fu = functional_value(&p, &bc, &GridFunction::new(up).unwrap()).unwrap();
            let fd = functional_value(&p, &bc, &GridFunction::new(dn).unwrap()).unwrap();
            assert!(((fu - fd) / (2.0 * h) - row).abs() <= 1e-6 * row.abs().max(1.0));
        }
    }

    #[test]
    fn robin_function_validation() {
        assert!(RobinFunction::new(vec![(1.0, 4)], Monotonicity::None).is_err());
        // Declared nondecreasing but strictly decreasing.
        assert!(RobinFunction::new(vec![(-1.0, 1)], Monotonicity::Nondecreasing).is_err());
        let f = RobinFunction::new(vec![(2.0, 2), (0.5, -2)], Monotonicity::None).unwrap();
        let s = 1.7;
        assert!((f.eval(s) - (2.0 * s * s + 0.5 / (s * s))).abs() < 1e-14);
        assert!((f.deriv(s) - (4.0 * s - 1.0 / (s * s * s))).abs() < 1e-14);
        // d/ds F(s) = f(s).
        let h = 1e-6;
        let fd = (f.antiderivative(s + h) - f.antiderivative(s - h)) / (2.0 * h);
        assert!((fd - f.eval(s)).abs() < 1e-8);
    }

    #[test]
    fn coercivity_witness_attractive() {
        // a > 0 > c, Dirichlet: the functional blows up along rays where a
        // single coordinate goes to 0 or to infinity.
        let p = Parameters::new(1.0, 0.3, -1.0, 4).unwrap();
        let bc = BoundarySpec::dirichlet(1.0, 1.0).unwrap();
        let base = GridFunction::constant(4, 1.0).unwrap();
        let eval_at = |t: f64| {
            let mut v = base.values().to_vec();
            v[2] = t;
            functional_value(&p, &bc, &GridFunction::new(v).unwrap()).unwrap()
        };
        let mut prev = eval_at(1.0);
        let mut t = 1.0;
        for _ in 0..12 {
            t *= 2.0;
            let v = eval_at(t);
            if t >= 4.0 {
                assert!(v > prev);
            }
            prev = v;
        }
        prev = eval_at(1.0);
        t = 1.0;
        for _ in 0..12 {
            t *= 0.5;
            let v = eval_at(t);
            if t <= 0.25 {
                assert!(v > prev);
            }
            prev = v;
        }
    }
}
