//! Discrete derivative operators, norms and the first eigenvalue of the
//! negative discrete Laplacian with zero Dirichlet data.
//!
//! Functions on the grid `{0, ..., N}` are stored as `N + 1` real values.
//! The forward difference is `Δu_x = u_{x+1} - u_x` and the second
//! difference is `Δ²u_{x-1} = u_{x+1} - 2 u_x + u_{x-1}`.

use crate::error::Error;
use std::f64::consts::PI;
use std::ops::Index;

/// A real-valued function on the grid `{0, ..., N}`, N >= 2.
///
/// Positivity is not enforced by the type; callers that need strictly
/// positive values check with [`GridFunction::is_positive`] or
/// [`GridFunction::interior_positive`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps `values` as a grid function; requires at least 3 entries
    /// (grid size N >= 2) and finite values.
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        if values.len() < 3 {
            return Err(Error::Validation(format!(
                "grid function needs at least 3 values (N >= 2), got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "grid function value at index {i} is not finite"
            )));
        }
        Ok(Self { values })
    }

    /// Constant function with value `value` on `{0, ..., n}`.
    pub fn constant(n: usize, value: f64) -> Result<Self, Error> {
        Self::new(vec![value; n + 1])
    }

    /// Builds a grid function by evaluating `f` at x = 0..=n.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self, Error> {
        Self::new((0..=n).map(f).collect())
    }

    /// Assembles a grid function from boundary values and interior values.
    pub fn from_parts(left: f64, interior: &[f64], right: f64) -> Result<Self, Error> {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(left);
        values.extend_from_slice(interior);
        values.push(right);
        Self::new(values)
    }

    /// Grid size N (the last index).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// All N+1 values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The interior values `u_1, ..., u_{N-1}`.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    /// True when every entry is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    /// True when every interior entry is strictly positive.
    pub fn interior_positive(&self) -> bool {
        self.interior().iter().all(|&v| v > 0.0)
    }

    /// Smallest entry.
    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest entry.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup-norm distance to another grid function of the same size.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for GridFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// First differences `Δu_x = u_{x+1} - u_x`, x = 0..N-1.
pub fn delta(u: &GridFunction) -> Vec<f64> {
    u.values().windows(2).map(|w| w[1] - w[0]).collect()
}

/// Second differences `Δ²u_{x-1} = u_{x+1} - 2 u_x + u_{x-1}`, x = 1..N-1.
pub fn delta2(u: &GridFunction) -> Vec<f64> {
    u.values()
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .collect()
}

/// Euclidean norm of a raw value sequence. The same routine serves u,
/// Δu and Δ²u, mirroring the overloaded `‖·‖₂` notation.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Infinity norm of a raw value sequence.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// First eigenvalue `λ₁ = 4 sin²(π / 2N)` of `-Δ²` with zero Dirichlet data.
pub fn lambda1(n: usize) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::Domain(format!("lambda1 requires N >= 2, got {n}")));
    }
    let s = (PI / (2.0 * n as f64)).sin();
    Ok(4.0 * s * s)
}

/// Residual of the summation-by-parts identity
/// `Σ_{x=1}^{N-1} Δ²u_{x-1} u_x = Δu_{N-1} u_{N-1} - Δu_0 u_1 - Σ_{x=1}^{N-2} (Δu_x)²`.
///
/// The identity is algebraic, so up to rounding the result is zero.
pub fn summation_by_parts_residual(u: &GridFunction) -> f64 {
    let n = u.n();
    let du = delta(u);
    let d2u = delta2(u);
    let lhs: f64 = (1..n).map(|x| d2u[x - 1] * u[x]).sum();
    let tail: f64 = (1..n.saturating_sub(1)).map(|x| du[x] * du[x]).sum();
    let rhs = du[n - 1] * u[n - 1] - du[0] * u[1] - tail;
    (lhs - rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> GridFunction {
        GridFunction::from_fn(n, |_| rng.gen_range(-3.0..3.0)).unwrap()
    }

    #[test]
    fn delta_zero_and_simple() {
        let u = GridFunction::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(delta(&u), vec![0.0, 0.0]);
        let u = GridFunction::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(delta(&u), vec![1.0, 2.0]);
    }

    #[test]
    fn delta_telescopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(2..20);
            let u = random_grid(&mut rng, n);
            let du = delta(&u);
            let mut acc = u[0];
            for x in 1..=n {
                acc = u[0] + du[..x].iter().sum::<f64>();
                assert!((acc - u[x]).abs() <= 1e-12 * (1.0 + u[x].abs()));
            }
            let _ = acc;
        }
    }

    #[test]
    fn delta2_constant_and_quadratic() {
        let u = GridFunction::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(delta2(&u), vec![0.0]);
        let u = GridFunction::new(vec![0.0, 1.0, 4.0, 9.0]).unwrap();
        assert_eq!(delta2(&u), vec![2.0, 2.0]);
    }

    #[test]
    fn delta2_composes_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.gen_range(2..20);
            let u = random_grid(&mut rng, n);
            let du = delta(&u);
            let d2u = delta2(&u);
            for x in 1..n {
                let expect = du[x] - du[x - 1];
                assert!((d2u[x - 1] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn norm2_values() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(norm2(&[0.0, 0.0, 0.0]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v: Vec<f64> = (0..rng.gen_range(1..30))
                .map(|_| rng.gen_range(-5.0..5.0))
                .collect();
            let sq: f64 = v.iter().map(|x| x * x).sum();
            let n = norm2(&v);
            assert!((n * n - sq).abs() <= 1e-12 * (1.0 + sq));
        }
    }

    #[test]
    fn lambda1_values() {
        assert!((lambda1(2).unwrap() - 2.0).abs() < 1e-14);
        assert!((lambda1(3).unwrap() - 1.0).abs() < 1e-14);
        // Small-angle regime: lambda1(N) * N^2 -> pi^2.
        let n = 1000usize;
        let scaled = lambda1(n).unwrap() * (n * n) as f64 / (PI * PI);
        assert!((scaled - 1.0).abs() < 1e-5);
        assert!(lambda1(1).is_err());
    }

    #[test]
    fn summation_by_parts_exact_cases() {
        let u = GridFunction::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(summation_by_parts_residual(&u), 0.0);
        let u = GridFunction::new(vec![0.0, 1.0, 0.0]).unwrap();
        // lhs = (0 - 2 + 0) * 1 = -2, rhs = (0-1)*1 - (1-0)*1 = -2.
        assert_eq!(summation_by_parts_residual(&u), 0.0);
    }

    #[test]
    fn summation_by_parts_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let n = rng.gen_range(2..33);
            let u = random_grid(&mut rng, n);
            let scale = 1.0 + norm2(u.values()).powi(2);
            assert!(summation_by_parts_residual(&u) <= 1e-12 * scale);
        }
    }

    // Projects a random vector onto one of the two boundary classes of
    // the discrete calculus inequalities.
    fn project(rng: &mut ChaCha8Rng, n: usize, zero_ends: bool) -> GridFunction {
        let mut v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if zero_ends {
            v[0] = 0.0;
            v[n] = 0.0;
        } else {
            v[0] = v[1];
            v[n] = v[n - 1];
        }
        GridFunction::new(v).unwrap()
    }

    #[test]
    fn cauchy_schwarz_inequality_both_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &zero_ends in &[true, false] {
            for _ in 0..500 {
                let n = rng.gen_range(2..33);
                let u = project(&mut rng, n, zero_ends);
                let du = norm2(&delta(&u));
                let d2u = norm2(&delta2(&u));
                let nu = norm2(u.values());
                let scale = 1.0 + nu * nu + du * du + d2u * d2u;
                assert!(du * du <= nu * d2u + 1e-12 * scale);
            }
        }
    }

    #[test]
    fn poincare_inequalities_zero_dirichlet() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let n = rng.gen_range(2..33);
            let u = project(&mut rng, n, true);
            let l1 = lambda1(n).unwrap();
            let du = norm2(&delta(&u));
            let d2u = norm2(&delta2(&u));
            let nu = norm2(u.values());
            let scale = 1.0 + nu * nu + du * du + d2u * d2u;
            assert!(l1 * nu * nu <= du * du + 1e-12 * scale);
            assert!(nu <= d2u / l1 + 1e-12 * scale);
        }
    }

    #[test]
    fn eigenvector_attains_lambda1() {
        for n in 2..=32 {
            let u = GridFunction::from_fn(n, |x| (PI * x as f64 / n as f64).sin()).unwrap();
            let l1 = lambda1(n).unwrap();
            let du2 = norm2(&delta(&u)).powi(2);
            let nu2 = norm2(u.values()).powi(2);
            assert!((l1 * nu2 - du2).abs() <= 1e-10 * du2);
        }
    }
}
