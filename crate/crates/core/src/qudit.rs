//! Single-qudit states, the SU(d) generator basis and generalized Bloch vectors.
//!
//! A density operator on `C^d` is written as
//! `rho = I/d + (1/2) sum_i lambda_i tau_i` with `Tr tau_i = 0` and
//! `Tr(tau_i tau_j) = 2 delta_ij`. Pure states have `|lambda| = sqrt(2(1 - 1/d))`.
//! A universal channel acts on `lambda` as a plain rescaling by a shrinking
//! factor `eta`, and the single-copy fidelity with a pure input is then
//! `F = (1 + (d - 1) eta) / d`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    self, binomial, hermiticity_defect, min_eigenvalue, outer, trace, CMatrix, CVector, ONE,
};

/// Tolerance for deterministic linear-algebra identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Eigenvalues above `-POSITIVITY_TOL` count as nonnegative.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Hilbert-space dimension of a single qudit, at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Dimension(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Length of a generalized Bloch vector, `d^2 - 1`.
    pub fn bloch_len(self) -> usize {
        self.0 * self.0 - 1
    }

    /// Bloch-vector length of any pure state, `sqrt(2(1 - 1/d))`.
    pub fn pure_bloch_norm(self) -> f64 {
        (2.0 * (1.0 - 1.0 / self.0 as f64)).sqrt()
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Normalized state vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Wraps amplitudes that are already normalized to within `1e-12`.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        Dimension::new(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        Dimension::new(amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(PureState {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|k>`.
    pub fn basis(d: Dimension, k: usize) -> Result<Self> {
        if k >= d.get() {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for d = {d}"
            )));
        }
        let mut v = CVector::zeros(d.get());
        v[k] = ONE;
        Ok(PureState { amplitudes: v })
    }

    pub fn dim(&self) -> Dimension {
        Dimension(self.amplitudes.len())
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|<self|other>|^2`
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: outer(&self.amplitudes),
        }
    }
}

/// Density operator on a single qudit (or any finite space).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Checks Hermiticity and unit trace at `1e-12`, positivity at `-1e-10`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
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
        Ok(DensityOperator { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityOperator { matrix }
    }

    pub fn maximally_mixed(d: Dimension) -> Self {
        let n = d.get();
        DensityOperator {
            matrix: CMatrix::identity(n, n).unscale(n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }
}

/// Ordered generalized Gell-Mann basis of `su(d)`.
///
/// Order: the `d(d-1)/2` symmetric off-diagonal matrices `|j><k| + |k><j|`
/// for `j < k` in lexicographic order, then the antisymmetric ones
/// `-i|j><k| + i|k><j|` in the same order, then the `d - 1` diagonal matrices
/// `sqrt(2/(l(l+1))) (sum_{m<l} |m><m| - l |l><l|)` for `l = 1..d-1`.
/// For `d = 2` this is `(sigma_x, sigma_y, sigma_z)`.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    d: Dimension,
    generators: Vec<CMatrix>,
}

impl GeneratorBasis {
    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

pub fn build_generator_basis(d: Dimension) -> GeneratorBasis {
    let n = d.get();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .collect();
    let mut generators = Vec::with_capacity(d.bloch_len());
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(n, n);
        m[(j, k)] = ONE;
        m[(k, j)] = ONE;
        generators.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(n, n);
        m[(j, k)] = Complex64::new(0.0, -1.0);
        m[(k, j)] = Complex64::new(0.0, 1.0);
        generators.push(m);
    }
    for l in 1..n {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..l {
            m[(i, i)] = Complex64::new(scale, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * scale, 0.0);
        generators.push(m);
    }
    GeneratorBasis { d, generators }
}

/// Real coordinates `lambda_i` of a state in a [`GeneratorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    coords: Vec<f64>,
}

impl BlochVector {
    pub fn new(coords: Vec<f64>) -> Self {
        BlochVector { coords }
    }

    pub fn zeros(d: Dimension) -> Self {
        BlochVector {
            coords: vec![0.0; d.bloch_len()],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> BlochVector {
        BlochVector {
            coords: self.coords.iter().map(|x| x * factor).collect(),
        }
    }

    /// Least-squares `eta` in `self ~ eta * input`.
    pub fn ratio_along(&self, input: &BlochVector) -> Result<f64> {
        let nn = input.dot(input);
        if nn < EXACT_TOL {
            return Err(Error::ZeroBlochProbe);
        }
        Ok(self.dot(input) / nn)
    }
}

/// Scalar contraction of the Bloch vector under a universal channel.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ShrinkingFactor(pub f64);

impl ShrinkingFactor {
    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `lambda_i = Tr(rho tau_i)`.
pub fn bloch_from_density(rho: &DensityOperator, basis: &GeneratorBasis) -> Result<BlochVector> {
    check_dims(basis.d.get(), rho.dim())?;
    let coords = basis
        .generators
        .iter()
        .map(|t| linalg::trace_product(&rho.matrix, t).re)
        .collect();
    Ok(BlochVector { coords })
}

/// `I/d + (1/2) sum_i lambda_i tau_i`; fails if the result is not positive.
pub fn density_from_bloch(lambda: &BlochVector, basis: &GeneratorBasis) -> Result<DensityOperator> {
    check_dims(basis.d.bloch_len(), lambda.coords.len())?;
    let n = basis.d.get();
    let mut m = CMatrix::identity(n, n).unscale(n as f64);
    for (c, t) in lambda.coords.iter().zip(&basis.generators) {
        m += t.scale(0.5 * c);
    }
    let min = min_eigenvalue(&m);
    if min < -POSITIVITY_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(DensityOperator { matrix: m })
}

/// `eta |psi><psi| + (1 - eta) I/d` for `eta` in `[0, 1]`.
pub fn apply_shrink(psi: &PureState, eta: ShrinkingFactor) -> Result<DensityOperator> {
    let e = eta.get();
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::ShrinkOutOfRange(e));
    }
    Ok(shrink_density(&psi.projector(), e))
}

/// `eta rho + (1 - eta) I/d` with no range check on `eta`.
pub fn shrink_density(rho: &DensityOperator, eta: f64) -> DensityOperator {
    let n = rho.dim();
    let mut m = rho.matrix.scale(eta);
    let diag = (1.0 - eta) / n as f64;
    for i in 0..n {
        m[(i, i)] += diag;
    }
    DensityOperator { matrix: m }
}

/// `<psi|rho|psi>`
pub fn fidelity_pure(psi: &PureState, rho: &DensityOperator) -> Result<f64> {
    check_dims(psi.amplitudes.len(), rho.dim())?;
    Ok(linalg::expectation(&rho.matrix, &psi.amplitudes).re)
}

/// `F = (1 + (d - 1) eta) / d`
pub fn fidelity_from_eta(eta: ShrinkingFactor, d: Dimension) -> f64 {
    let d = d.get() as f64;
    (1.0 + (d - 1.0) * eta.get()) / d
}

/// Inverse of [`fidelity_from_eta`]: `eta = (d F - 1) / (d - 1)`.
pub fn eta_from_fidelity(fidelity: f64, d: Dimension) -> Result<ShrinkingFactor> {
    let df = d.get() as f64;
    if !(1.0 / df - POSITIVITY_TOL..=1.0 + POSITIVITY_TOL).contains(&fidelity) {
        return Err(Error::FidelityOutOfRange {
            fidelity,
            d: d.get(),
        });
    }
    Ok(ShrinkingFactor((df * fidelity - 1.0) / (df - 1.0)))
}

/// Unitarily invariant random pure state from normalized complex Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(d: Dimension, rng: &mut R) -> PureState {
    loop {
        let v = CVector::from_fn(d.get(), |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Random full-rank mixed state `G G^dagger / Tr(G G^dagger)` with a complex Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(d: Dimension, rng: &mut R) -> DensityOperator {
    let n = d.get();
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    let mut m = m.unscale(tr);
    // Clean the antihermitian round-off so the state passes the 1e-12 checks.
    m = (&m + m.adjoint()).scale(0.5);
    DensityOperator { matrix: m }
}

/// Haar average of `|<phi|psi>|^(2k)`, equal to `1 / C(k + d - 1, k)`.
pub fn overlap_moment(d: Dimension, k: usize) -> f64 {
    1.0 / binomial(k + d.get() - 1, k) as f64
}
