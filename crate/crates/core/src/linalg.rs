//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Determinant by cofactor expansion, valid for sizes 0..=3.
pub fn small_det(m: &CMatrix) -> C64 {
    match m.nrows() {
        0 => ONE,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => det(m),
    }
}

/// Logarithm of the modulus and the phase of the determinant, from an LU
/// factorization with partial pivoting.
///
/// Returns `(f64::NEG_INFINITY, 0)` for a singular matrix.
pub fn log_det(m: &CMatrix) -> (f64, C64) {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.nrows() == 0 {
        return (0.0, ONE);
    }
    let lu = m.clone().lu();
    let mut phase: C64 = lu.p().determinant();
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        let a = d.norm();
        if a == 0.0 {
            return (f64::NEG_INFINITY, ZERO);
        }
        log_abs += a.ln();
        phase *= d / a;
    }
    (log_abs, phase)
}

/// Determinant via LU with logarithmic accumulation of the pivots.
pub fn det(m: &CMatrix) -> C64 {
    if m.nrows() <= 3 {
        return small_det(m);
    }
    let (log_abs, phase) = log_det(m);
    if log_abs == f64::NEG_INFINITY {
        ZERO
    } else {
        phase * log_abs.exp()
    }
}

/// 2-norm condition number (ratio of extreme singular values).
///
/// The empty matrix has condition 1; a singular one has condition `inf`.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `a * x = b` with a single LU factorization.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    if a.nrows() == 0 {
        return Some(b.clone());
    }
    a.clone().lu().solve(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: C64,
    comp: C64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: C64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn small_and_lu_determinants_agree() {
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new((i * 3 + j) as f64 + 0.5, (i as f64) - (j as f64)));
        let (l, p) = log_det(&m);
        let lu = p * l.exp();
        assert!((small_det(&m) - lu).norm() < 1e-12 * small_det(&m).norm().max(1.0));
    }

    #[test]
    fn determinant_of_permutation_and_singular() {
        let p = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert_eq!(det(&p), c(-1.0));
        let mut s = CMatrix::from_element(5, 5, c(1.0));
        s[(0, 0)] = c(2.0);
        assert!(det(&s).norm() < 1e-12);
        assert_eq!(det(&CMatrix::zeros(0, 0)), ONE);
    }

    #[test]
    fn large_determinant_does_not_overflow_in_log_form() {
        let m = CMatrix::from_diagonal_element(400, 400, c(10.0));
        let (l, p) = log_det(&m);
        assert!((l - 400.0 * 10f64.ln()).abs() < 1e-9);
        assert!((p - ONE).norm() < 1e-12);
    }

    #[test]
    fn condition_of_identity_and_singular() {
        assert!((condition_number(&identity(4)) - 1.0).abs() < 1e-12);
        assert!(condition_number(&CMatrix::zeros(3, 3)).is_infinite());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(c(1e16));
        for _ in 0..10 {
            s.add(c(1.0));
        }
        s.add(c(-1e16));
        assert_eq!(s.value(), c(10.0));
    }
}
