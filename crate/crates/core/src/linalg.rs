//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `|v><v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Tr(A B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `<v|M|v>`
pub fn expectation(m: &CMatrix, v: &CVector) -> Complex64 {
    v.dotc(&(m * v))
}

/// Largest entrywise modulus of `A - A^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let mut vals: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Real coordinates of a Hermitian matrix, isometric for the Frobenius norm:
/// diagonal entries, then `sqrt(2) Re` and `sqrt(2) Im` of the strict upper
/// triangle in row-major order.
pub fn hermitian_to_real(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            out.push(s * m[(i, j)].re);
            out.push(s * m[(i, j)].im);
        }
    }
    out
}

/// Real coordinates of `|v><v|` in the layout of [`hermitian_to_real`].
pub fn projector_to_real(v: &CVector) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(v[i].norm_sqr());
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            let z = v[i] * v[j].conj();
            out.push(s * z.re);
            out.push(s * z.im);
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `N! / prod(n_k!)`, computed in floating point.
pub fn multinomial(counts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut acc = 1.0f64;
    for &c in counts {
        for i in 1..=c {
            total += 1;
            acc = acc * total as f64 / i as f64;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10, 0), 1);
    }

    #[test]
    fn multinomial_matches_factorials() {
        assert_eq!(multinomial(&[2, 1]), 3.0);
        assert_eq!(multinomial(&[1, 1, 1]), 6.0);
        assert_eq!(multinomial(&[3, 0]), 1.0);
        assert_eq!(multinomial(&[2, 2]), 6.0);
    }

    #[test]
    fn real_embedding_is_isometric() {
        let v = CVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let m = outer(&v);
        let r = hermitian_to_real(&m);
        let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - m.norm()).abs() < 1e-14);
        assert_eq!(r, projector_to_real(&v));
    }
}
