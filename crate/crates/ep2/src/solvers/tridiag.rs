//! Tridiagonal linear solves with partial pivoting.
//!
//! Every Jacobian in this crate couples `u_{x-1}, u_x, u_{x+1}` only, so a
//! banded LU with row interchanges (one superdiagonal of fill-in) covers all
//! linear algebra needs.

use crate::error::Error;

/// A tridiagonal matrix: `dl` is the subdiagonal (length n-1), `d` the
/// diagonal (length n), `du` the superdiagonal (length n-1).
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    pub dl: Vec<f64>,
    pub d: Vec<f64>,
    pub du: Vec<f64>,
}

impl Tridiag {
    pub fn new(n: usize) -> Self {
        Self { dl: vec![0.0; n.saturating_sub(1)], d: vec![0.0; n], du: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    /// Matrix-vector product, used by tests as an oracle-free check.
    #[cfg(test)]
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = self.d[i] * x[i];
            if i > 0 {
                y[i] += self.dl[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y[i] += self.du[i] * x[i + 1];
            }
        }
        y
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting
    /// between adjacent rows. Consumes the matrix.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>, Error> {
        let n = self.len();
        assert_eq!(b.len(), n);
        if n == 0 {
            return Ok(b);
        }
        if n == 1 {
            if self.d[0] == 0.0 {
                return Err(Error::Singular);
            }
            b[0] /= self.d[0];
            return Ok(b);
        }
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n - 1 {
            if self.dl[i].abs() <= self.d[i].abs() {
                if self.d[i] == 0.0 {
                    return Err(Error::Singular);
                }
                let fact = self.dl[i] / self.d[i];
                self.d[i + 1] -= fact * self.du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = self.d[i] / self.dl[i];
                self.d[i] = self.dl[i];
                let temp = self.d[i + 1];
                self.d[i + 1] = self.du[i] - fact * temp;
                if i < n - 2 {
                    du2[i] = self.du[i + 1];
                    self.du[i + 1] = -fact * du2[i];
                }
                self.du[i] = temp;
                b.swap(i, i + 1);
                b[i + 1] -= fact * b[i];
            }
        }
        if self.d[n - 1] == 0.0 {
            return Err(Error::Singular);
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - du2[i] * b[i + 2]) / self.d[i];
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_system(rng: &mut ChaCha8Rng, n: usize, dominant: bool) -> (Tridiag, Vec<f64>) {
        let mut t = Tridiag::new(n);
        for i in 0..n {
            t.d[i] = rng.gen_range(-2.0..2.0);
            if dominant {
                t.d[i] += if t.d[i] >= 0.0 { 6.0 } else { -6.0 };
            }
        }
        for i in 0..n - 1 {
            t.dl[i] = rng.gen_range(-2.0..2.0);
            t.du[i] = rng.gen_range(-2.0..2.0);
        }
        let b = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        (t, b)
    }

    #[test]
    fn solves_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for &dominant in &[true, false] {
            for _ in 0..200 {
                let n = rng.gen_range(1..40);
                let (t, b) = random_system(&mut rng, n, dominant);
                let x = match t.clone().solve(b.clone()) {
                    Ok(x) => x,
                    Err(Error::Singular) => continue,
                    Err(e) => panic!("{e}"),
                };
                let r = t.matvec(&x);
                let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for i in 0..n {
                    assert!(
                        (r[i] - b[i]).abs() <= 1e-9 * scale,
                        "n={n} row {i}: {} vs {}",
                        r[i],
                        b[i]
                    );
                }
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // Diagonal zero but matrix invertible: requires the interchange path.
        let t = Tridiag { dl: vec![1.0], d: vec![0.0, 1.0], du: vec![1.0] };
        let x = t.clone().solve(vec![2.0, 3.0]).unwrap();
        let r = t.matvec(&x);
        assert!((r[0] - 2.0).abs() < 1e-12 && (r[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_singular() {
        let t = Tridiag { dl: vec![0.0], d: vec![0.0, 0.0], du: vec![0.0] };
        assert!(matches!(t.solve(vec![1.0, 1.0]), Err(Error::Singular)));
    }
}
