//! The symmetric subspace of `(C^d)^{\otimes N}` in occupation-number coordinates.
//!
//! Basis vectors are labelled by occupation vectors `n = (n_0, .., n_{d-1})`
//! with `sum n_k = N`, listed in lexicographically decreasing order, so for
//! `d = 2, N = 2` the order is `(2,0), (1,1), (0,2)`. The basis vector for `n`
//! is the normalized uniform superposition of all product strings with those
//! counts. Multi-copy states are stored in these `C(N+d-1, N)` coordinates;
//! the `d^N` full-space representation is only built for cross-checks and is
//! size-guarded.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    binomial, hermiticity_defect, min_eigenvalue, multinomial, outer, trace, CMatrix, CVector, ONE,
    ZERO,
};
use crate::qudit::{DensityOperator, Dimension, PureState, EXACT_TOL, POSITIVITY_TOL};

/// Largest full-space dimension `d^N` that will be materialized densely.
pub const FULL_SPACE_LIMIT: usize = 4096;

/// Number of copies of each single-qudit level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<usize>);

impl OccupationVector {
    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// `C(N + d - 1, N)`
pub fn sym_dimension(d: Dimension, copies: usize) -> usize {
    binomial(copies + d.get() - 1, copies)
}

/// `d^N`, or `None` on overflow.
pub fn full_dimension(d: Dimension, copies: usize) -> Option<usize> {
    d.get().checked_pow(u32::try_from(copies).ok()?)
}

pub fn check_full_space(d: Dimension, copies: usize) -> Result<usize> {
    match full_dimension(d, copies) {
        Some(size) if size <= FULL_SPACE_LIMIT => Ok(size),
        Some(size) => Err(Error::SizeGuard {
            size,
            limit: FULL_SPACE_LIMIT,
        }),
        None => Err(Error::SizeGuard {
            size: usize::MAX,
            limit: FULL_SPACE_LIMIT,
        }),
    }
}

/// Canonical occupation-number basis for `N` qudits of dimension `d`.
#[derive(Debug, Clone)]
pub struct SymmetricBasis {
    d: Dimension,
    copies: usize,
    states: Vec<OccupationVector>,
    sqrt_multinomials: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

impl PartialEq for SymmetricBasis {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.copies == other.copies
    }
}

impl SymmetricBasis {
    pub fn new(d: Dimension, copies: usize) -> Self {
        let mut states = Vec::with_capacity(sym_dimension(d, copies));
        let mut current = vec![0usize; d.get()];
        push_compositions(copies, 0, &mut current, &mut states);
        let sqrt_multinomials = states.iter().map(|n| multinomial(&n.0).sqrt()).collect();
        let index = states
            .iter()
            .enumerate()
            .map(|(i, n)| (n.0.clone(), i))
            .collect();
        SymmetricBasis {
            d,
            copies,
            states,
            sqrt_multinomials,
            index,
        }
    }

    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// `C(N + d - 1, N)`
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupationVector] {
        &self.states
    }

    pub fn index_of(&self, counts: &[usize]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    /// Coordinates of `|psi>^{\otimes N}`:
    /// `sqrt(multinomial(N; n)) * prod_k psi_k^{n_k}` for each `n`.
    pub fn embed(&self, psi: &PureState) -> CVector {
        let amps = psi.amplitudes();
        // powers[k][p] = psi_k^p
        let powers: Vec<Vec<Complex64>> = amps
            .iter()
            .map(|&a| {
                let mut row = Vec::with_capacity(self.copies + 1);
                let mut acc = ONE;
                for _ in 0..=self.copies {
                    row.push(acc);
                    acc *= a;
                }
                row
            })
            .collect();
        CVector::from_iterator(
            self.len(),
            self.states
                .iter()
                .zip(&self.sqrt_multinomials)
                .map(|(n, &s)| {
                    n.0.iter()
                        .enumerate()
                        .fold(Complex64::new(s, 0.0), |acc, (k, &nk)| acc * powers[k][nk])
                }),
        )
    }

    /// Isometry `V` from symmetric coordinates into the `d^N` product space.
    /// Subsystem 1 is the most significant digit of the full-space index.
    pub fn isometry(&self) -> Result<CMatrix> {
        let full = check_full_space(self.d, self.copies)?;
        let d = self.d.get();
        let mut v = CMatrix::zeros(full, self.len());
        let mut counts = vec![0usize; d];
        for x in 0..full {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut rem = x;
            for _ in 0..self.copies {
                counts[rem % d] += 1;
                rem /= d;
            }
            let col = self.index[&counts];
            v[(x, col)] = Complex64::new(1.0 / self.sqrt_multinomials[col], 0.0);
        }
        Ok(v)
    }
}

fn push_compositions(
    remaining: usize,
    slot: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<OccupationVector>,
) {
    let last = current.len() - 1;
    if slot == last {
        current[slot] = remaining;
        out.push(OccupationVector(current.clone()));
        return;
    }
    for take in (0..=remaining).rev() {
        current[slot] = take;
        push_compositions(remaining - take, slot + 1, current, out);
    }
    current[slot] = 0;
}

/// Coordinates of `|psi>^{\otimes N}` in a freshly built canonical basis.
pub fn embed_product_state(psi: &PureState, copies: usize) -> Result<CVector> {
    if copies == 0 {
        return Err(Error::InvalidArgument(
            "copy count must be at least 1".into(),
        ));
    }
    Ok(SymmetricBasis::new(psi.dim(), copies).embed(psi))
}

/// Density operator supported on the symmetric subspace.
#[derive(Debug, Clone)]
pub struct SymmetricState {
    basis: Arc<SymmetricBasis>,
    matrix: CMatrix,
}

impl SymmetricState {
    /// Checks Hermiticity, unit trace (1e-12) and positivity (-1e-10).
    pub fn new(basis: Arc<SymmetricBasis>, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: matrix.nrows(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > EXACT_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > EXACT_TOL || tr.im.abs() > EXACT_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = min_eigenvalue(&matrix);
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(SymmetricState { basis, matrix })
    }

    pub(crate) fn from_parts_unchecked(basis: Arc<SymmetricBasis>, matrix: CMatrix) -> Self {
        SymmetricState { basis, matrix }
    }

    /// `|Psi><Psi|` for a normalized symmetric-coordinate vector.
    pub fn from_vector(basis: Arc<SymmetricBasis>, coords: &CVector) -> Result<Self> {
        if coords.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coords.len(),
            });
        }
        let norm = coords.norm();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(SymmetricState {
            basis,
            matrix: outer(coords),
        })
    }

    /// `|psi><psi|^{\otimes N}`
    pub fn product(psi: &PureState, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidArgument(
                "copy count must be at least 1".into(),
            ));
        }
        let basis = Arc::new(SymmetricBasis::new(psi.dim(), copies));
        let coords = basis.embed(psi);
        Ok(SymmetricState {
            matrix: outer(&coords),
            basis,
        })
    }

    /// `S_N / Tr S_N`
    pub fn maximally_mixed(d: Dimension, copies: usize) -> Self {
        let basis = Arc::new(SymmetricBasis::new(d, copies));
        let n = basis.len();
        SymmetricState {
            matrix: CMatrix::identity(n, n).unscale(n as f64),
            basis,
        }
    }

    /// Pulls a full-space operator back to symmetric coordinates, `V^dagger rho V`.
    /// Fails unless the operator is a state supported on the symmetric subspace.
    pub fn from_full(d: Dimension, copies: usize, full: &CMatrix) -> Result<Self> {
        let basis = Arc::new(SymmetricBasis::new(d, copies));
        let v = basis.isometry()?;
        if full.nrows() != v.nrows() {
            return Err(Error::DimensionMismatch {
                expected: v.nrows(),
                found: full.nrows(),
            });
        }
        let sym = v.adjoint() * full * &v;
        let tr = trace(&sym).re;
        let full_tr = trace(full).re;
        if (tr - full_tr).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "operator has weight {:e} outside the symmetric subspace",
                full_tr - tr
            )));
        }
        Self::new(basis, sym)
    }

    pub fn basis(&self) -> &Arc<SymmetricBasis> {
        &self.basis
    }

    pub fn dim(&self) -> Dimension {
        self.basis.d
    }

    pub fn copies(&self) -> usize {
        self.basis.copies
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `V rho V^dagger` on the `d^N` product space.
    pub fn to_full(&self) -> Result<CMatrix> {
        let v = self.basis.isometry()?;
        Ok(&v * &self.matrix * v.adjoint())
    }

    /// `<Psi|rho|Psi>` for a symmetric-coordinate vector.
    pub fn expectation(&self, coords: &CVector) -> f64 {
        crate::linalg::expectation(&self.matrix, coords).re
    }
}

/// Projector onto the symmetric subspace of the full `d^N` space.
///
/// Uses the coset identity `S_N = (1/N) sum_{k=1}^{N} P_(k N) (S_{N-1} x I)`,
/// which equals the average of all `N!` permutation operators.
pub fn symmetrizer(d: Dimension, copies: usize) -> Result<CMatrix> {
    if copies == 0 {
        return Err(Error::InvalidArgument(
            "copy count must be at least 1".into(),
        ));
    }
    check_full_space(d, copies)?;
    let dd = d.get();
    let mut s = CMatrix::identity(dd, dd);
    for n in 2..=copies {
        let lifted = s.kronecker(&CMatrix::identity(dd, dd));
        let size = lifted.nrows();
        let mut acc = lifted.clone();
        for k in 0..n - 1 {
            for x in 0..size {
                let src = swap_digits(x, k, n - 1, dd, n);
                for y in 0..size {
                    acc[(x, y)] += lifted[(src, y)];
                }
            }
        }
        s = acc.unscale(n as f64);
    }
    Ok(s)
}

/// Full-space index with the subsystem digits at positions `a` and `b` swapped.
/// Position 0 is the most significant digit.
pub(crate) fn swap_digits(x: usize, a: usize, b: usize, d: usize, copies: usize) -> usize {
    if a == b {
        return x;
    }
    let pa = d.pow((copies - 1 - a) as u32);
    let pb = d.pow((copies - 1 - b) as u32);
    let da = (x / pa) % d;
    let db = (x / pb) % d;
    x - da * pa - db * pb + db * pa + da * pb
}

/// One-particle reduced state of a symmetric state.
///
/// Computed from the second-quantized form
/// `rho_red[j][i] = (1/N) Tr(rho a_i^dagger a_j)`.
pub fn reduce_single_particle(rho: &SymmetricState) -> DensityOperator {
    let basis = &rho.basis;
    let d = basis.d.get();
    let copies = basis.copies as f64;
    let mut red = CMatrix::from_element(d, d, ZERO);
    let mut target = vec![0usize; d];
    for (col, n) in basis.states.iter().enumerate() {
        let n = &n.0;
        for j in 0..d {
            if n[j] == 0 {
                continue;
            }
            for i in 0..d {
                target.copy_from_slice(n);
                target[j] -= 1;
                target[i] += 1;
                let row = basis.index[&target];
                let amp = ((n[j] * target[i]) as f64).sqrt();
                // Tr(rho A) = sum_{n,m} rho[n][m] A[m][n], with A = a_i^dag a_j.
                red[(j, i)] += rho.matrix[(col, row)] * amp;
            }
        }
    }
    DensityOperator::from_matrix_unchecked(red.unscale(copies))
}

/// Partial trace of a full-space operator over every subsystem except `keep`.
pub fn partial_trace_keep(
    full: &CMatrix,
    d: Dimension,
    copies: usize,
    keep: usize,
) -> Result<CMatrix> {
    let size = check_full_space(d, copies)?;
    if full.nrows() != size || keep >= copies {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: full.nrows(),
        });
    }
    let dd = d.get();
    let stride = dd.pow((copies - 1 - keep) as u32);
    let mut out = CMatrix::from_element(dd, dd, ZERO);
    for x in 0..size {
        let a = (x / stride) % dd;
        let rest = x - a * stride;
        for b in 0..dd {
            let y = rest + b * stride;
            out[(a, b)] += full[(x, y)];
        }
    }
    Ok(out)
}

/// `|psi>^{\otimes N}` in the full product space.
pub fn full_product_vector(psi: &PureState, copies: usize) -> Result<CVector> {
    check_full_space(psi.dim(), copies)?;
    let mut v = psi.amplitudes().clone();
    for _ in 1..copies {
        v = crate::linalg::kron_vec(&v, psi.amplitudes());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::qudit::haar_random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(sym_dimension(dim(2), 1), 2);
        assert_eq!(sym_dimension(dim(2), 3), 4);
        assert_eq!(sym_dimension(dim(3), 2), 6);
        assert_eq!(sym_dimension(dim(3), 0), 1);
    }

    #[test]
    fn basis_order_is_lex_decreasing() {
        let b = SymmetricBasis::new(dim(2), 2);
        let got: Vec<&[usize]> = b.states().iter().map(|n| n.counts()).collect();
        assert_eq!(got, vec![&[2, 0][..], &[1, 1], &[0, 2]]);
        let b3 = SymmetricBasis::new(dim(3), 2);
        let got: Vec<Vec<usize>> = b3.states().iter().map(|n| n.counts().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        let mut sorted = got.clone();
        sorted.sort_by(|a, b| b.cmp(a));
        sorted.dedup();
        assert_eq!(sorted, got);
    }

    #[test]
    fn basis_length_matches_binomial() {
        for d in 2..=4 {
            for n in 0..=5 {
                let b = SymmetricBasis::new(dim(d), n);
                assert_eq!(b.len(), sym_dimension(dim(d), n));
                assert!(b.states().iter().all(|s| s.total() == n));
            }
        }
    }

    #[test]
    fn embed_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = haar_random_state(dim(3), &mut rng);
        let one = embed_product_state(&psi, 1).unwrap();
        assert!((&one - psi.amplitudes()).norm() < 1e-15);

        let h = 1.0 / 2f64.sqrt();
        let plus =
            PureState::from_slice(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let two = embed_product_state(&plus, 2).unwrap();
        let want = [0.5, h, 0.5];
        for (got, w) in two.iter().zip(want) {
            assert!((got - Complex64::new(w, 0.0)).norm() < 1e-15);
        }

        for d in 2..=4 {
            let psi = haar_random_state(dim(d), &mut rng);
            assert!((embed_product_state(&psi, 3).unwrap().norm() - 1.0).abs() < EXACT_TOL);
        }
        assert!(embed_product_state(&psi, 0).is_err());
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Average of all N! permutation operators, built entry by entry.
    fn brute_symmetrizer(d: usize, n: usize) -> CMatrix {
        let size = d.pow(n as u32);
        let perms = permutations(n);
        let mut s = CMatrix::zeros(size, size);
        for p in &perms {
            for x in 0..size {
                let digits: Vec<usize> = (0..n)
                    .map(|i| (x / d.pow((n - 1 - i) as u32)) % d)
                    .collect();
                let y = (0..n).fold(0, |acc, i| acc * d + digits[p[i]]);
                s[(y, x)] += ONE;
            }
        }
        s.unscale(perms.len() as f64)
    }

    #[test]
    fn symmetrizer_matches_permutation_average() {
        for (d, n) in [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3)] {
            let s = symmetrizer(dim(d), n).unwrap();
            assert!(
                max_abs_diff(&s, &brute_symmetrizer(d, n)) < 1e-14,
                "d={d} n={n}"
            );
        }
    }

    #[test]
    fn symmetrizer_is_rank_limited_projector() {
        for (d, n) in [(2, 1), (2, 2), (3, 2), (2, 5), (4, 3), (3, 4)] {
            let s = symmetrizer(dim(d), n).unwrap();
            assert!(max_abs_diff(&(&s * &s), &s) < EXACT_TOL);
            assert!(max_abs_diff(&s.adjoint(), &s) < EXACT_TOL);
            assert!((trace(&s).re - sym_dimension(dim(d), n) as f64).abs() < EXACT_TOL);
            if n == 1 {
                assert!(max_abs_diff(&s, &CMatrix::identity(d, d)) < EXACT_TOL);
            }
        }
    }

    #[test]
    fn qubit_pair_symmetrizer_kills_singlet() {
        let s = symmetrizer(dim(2), 2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let singlet = CVector::from_vec(vec![
            ZERO,
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            ZERO,
        ]);
        assert!((&s * singlet).norm() < EXACT_TOL);
        let eig = crate::linalg::hermitian_eigenvalues(&s);
        assert_eq!(eig.iter().filter(|&&e| (e - 1.0).abs() < 1e-10).count(), 3);
    }

    #[test]
    fn symmetrizer_size_guard() {
        assert!(matches!(
            symmetrizer(dim(2), 13),
            Err(Error::SizeGuard { .. })
        ));
        assert!(matches!(
            symmetrizer(dim(5), 6),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn isometry_spans_symmetrizer() {
        for (d, n) in [(2, 3), (3, 2), (3, 3)] {
            let v = SymmetricBasis::new(dim(d), n).isometry().unwrap();
            let s = symmetrizer(dim(d), n).unwrap();
            assert!(max_abs_diff(&(&v * v.adjoint()), &s) < EXACT_TOL);
            let k = v.ncols();
            assert!(max_abs_diff(&(v.adjoint() * &v), &CMatrix::identity(k, k)) < EXACT_TOL);
        }
    }

    #[test]
    fn embedding_agrees_with_full_tensor_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (d, n) in [(2, 3), (3, 2), (3, 3), (4, 2)] {
            let psi = haar_random_state(dim(d), &mut rng);
            let full = full_product_vector(&psi, n).unwrap();
            let s = symmetrizer(dim(d), n).unwrap();
            assert!((&s * &full - &full).norm() < EXACT_TOL);
            let basis = SymmetricBasis::new(dim(d), n);
            let coords = basis.isometry().unwrap().adjoint() * &full;
            assert!((coords - basis.embed(&psi)).norm() < EXACT_TOL);
        }
    }

    #[test]
    fn reduction_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, n) in [(2, 1), (2, 4), (3, 3), (4, 2)] {
            let psi = haar_random_state(dim(d), &mut rng);
            let st = SymmetricState::product(&psi, n).unwrap();
            let red = reduce_single_particle(&st);
            assert!(max_abs_diff(red.matrix(), psi.projector().matrix()) < EXACT_TOL);
        }
    }

    #[test]
    fn reduction_of_maximally_mixed_pair() {
        let st = SymmetricState::maximally_mixed(dim(2), 2);
        let red = reduce_single_particle(&st);
        let half = CMatrix::identity(2, 2).unscale(2.0);
        assert!(max_abs_diff(red.matrix(), &half) < EXACT_TOL);
    }

    #[test]
    fn reduction_matches_full_partial_trace_on_every_site() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (d, n) in [(2, 3), (3, 2), (3, 3)] {
            let basis = Arc::new(SymmetricBasis::new(dim(d), n));
            let k = basis.len();
            // random mixed state on the symmetric subspace
            let g = CMatrix::from_fn(k, k, |_, _| {
                Complex64::new(
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng),
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng),
                )
            });
            let m = &g * g.adjoint();
            let m = m.unscale(trace(&m).re);
            let m = (&m + m.adjoint()).scale(0.5);
            let st = SymmetricState::new(basis, m).unwrap();
            let red = reduce_single_particle(&st);
            assert!((trace(red.matrix()).re - 1.0).abs() < EXACT_TOL);
            let full = st.to_full().unwrap();
            for site in 0..n {
                let pt = partial_trace_keep(&full, dim(d), n, site).unwrap();
                assert!(max_abs_diff(&pt, red.matrix()) < EXACT_TOL, "site {site}");
            }
        }
    }

    #[test]
    fn from_full_rejects_antisymmetric_support() {
        let h = 1.0 / 2f64.sqrt();
        let singlet = CVector::from_vec(vec![
            ZERO,
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            ZERO,
        ]);
        assert!(SymmetricState::from_full(dim(2), 2, &outer(&singlet)).is_err());
        let plus = full_product_vector(&PureState::basis(dim(2), 1).unwrap(), 2).unwrap();
        assert!(SymmetricState::from_full(dim(2), 2, &outer(&plus)).is_ok());
    }

    #[test]
    fn swap_digits_is_involution() {
        for x in 0..27 {
            let y = swap_digits(x, 0, 2, 3, 3);
            assert_eq!(swap_digits(y, 0, 2, 3, 3), x);
        }
        assert_eq!(swap_digits(1, 0, 1, 2, 2), 2);
    }
}
