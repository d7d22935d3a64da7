//! Decomposition of symmetric states into tensor powers with real weights.
//!
//! Any state on the symmetric subspace of `L` qudits can be written as
//! `sum_i alpha_i |psi_i><psi_i|^{\otimes L}` with real `alpha_i` summing to 1,
//! some possibly negative. The weights are found by least squares over an
//! overcomplete frame of pure states.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_diff, hermitian_to_real, outer, projector_to_real, CMatrix};
use crate::qudit::{DensityOperator, Dimension, PureState};
use crate::symmetric::{SymmetricBasis, SymmetricState};

/// Tolerance on the reconstruction residual and on `sum alpha - 1`.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

/// `sum_i alpha_i |psi_i><psi_i|^{\otimes L}` with `sum_i alpha_i = 1`.
#[derive(Debug, Clone)]
pub struct PseudoMixture {
    basis: Arc<SymmetricBasis>,
    terms: Vec<(f64, PureState)>,
    residual: f64,
}

impl PseudoMixture {
    /// Builds a mixture from explicit terms; fails if the weights do not sum to 1.
    pub fn new(basis: Arc<SymmetricBasis>, terms: Vec<(f64, PureState)>) -> Result<Self> {
        let total: f64 = terms.iter().map(|(a, _)| a).sum();
        if (total - 1.0).abs() > DECOMPOSITION_TOL {
            return Err(Error::InvalidArgument(format!(
                "pseudo-mixture weights sum to {total}, not 1"
            )));
        }
        if let Some((_, bad)) = terms.iter().find(|(_, p)| p.dim() != basis.dim()) {
            return Err(Error::DimensionMismatch {
                expected: basis.dim().get(),
                found: bad.dim().get(),
            });
        }
        Ok(PseudoMixture {
            basis,
            terms,
            residual: 0.0,
        })
    }

    pub fn terms(&self) -> &[(f64, PureState)] {
        &self.terms
    }

    pub fn copies(&self) -> usize {
        self.basis.copies()
    }

    pub fn dim(&self) -> Dimension {
        self.basis.dim()
    }

    /// Frobenius residual of the fit that produced this mixture (0 if built directly).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a).sum()
    }

    /// `sum |alpha_i|`; equals 1 iff the mixture is an ordinary convex one.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a.abs()).sum()
    }

    /// The `L`-copy operator `sum_i alpha_i |psi_i><psi_i|^{\otimes L}`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.basis.len();
        let mut m = CMatrix::zeros(n, n);
        for (a, psi) in &self.terms {
            m += outer(&self.basis.embed(psi)).scale(*a);
        }
        m
    }

    /// `sum_i alpha_i |psi_i><psi_i|`
    pub fn single_particle(&self) -> CMatrix {
        let d = self.basis.dim().get();
        let mut m = CMatrix::zeros(d, d);
        for (a, psi) in &self.terms {
            m += outer(psi.amplitudes()).scale(*a);
        }
        m
    }
}

/// Fits `rho` by a pseudo-mixture over `frame`.
///
/// Solves the least-squares system whose columns are the real coordinates of
/// `|psi_i><psi_i|^{\otimes L}`, with one extra row enforcing `sum alpha = 1`,
/// taking the minimum-norm solution. A frame that does not span the Hermitian
/// operators on the subspace is reported through [`Error::Infeasible`].
pub fn pseudo_mixture_decompose(
    rho: &SymmetricState,
    frame: &[PureState],
) -> Result<PseudoMixture> {
    let basis = rho.basis().clone();
    let dsym = basis.len();
    let required = dsym * dsym;
    if frame.len() < required {
        return Err(Error::FrameTooSmall {
            found: frame.len(),
            required,
        });
    }
    if let Some(bad) = frame.iter().find(|p| p.dim() != basis.dim()) {
        return Err(Error::DimensionMismatch {
            expected: basis.dim().get(),
            found: bad.dim().get(),
        });
    }
    let rows = required + 1;
    let mut a = DMatrix::<f64>::zeros(rows, frame.len());
    for (col, psi) in frame.iter().enumerate() {
        let coords = projector_to_real(&basis.embed(psi));
        for (row, x) in coords.into_iter().enumerate() {
            a[(row, col)] = x;
        }
        a[(required, col)] = 1.0;
    }
    let mut b = DVector::<f64>::from_vec(hermitian_to_real(rho.matrix()));
    b = b.insert_row(required, 1.0);

    let svd = a.svd(true, true);
    let alpha = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut pm = PseudoMixture {
        basis,
        terms: frame
            .iter()
            .cloned()
            .zip(alpha.iter().copied())
            .map(|(p, a)| (a, p))
            .collect(),
        residual: 0.0,
    };
    pm.residual = frobenius_diff(&pm.reconstruct(), rho.matrix());
    let sum_gap = (pm.weight_sum() - 1.0).abs();
    let worst = pm.residual.max(sum_gap);
    if worst > DECOMPOSITION_TOL {
        return Err(Error::Infeasible {
            residual: worst,
            tolerance: DECOMPOSITION_TOL,
        });
    }
    Ok(pm)
}

/// Pushes a pseudo-mixture through the single-copy shrink map
/// `psi -> eta |psi><psi| + (1 - eta) I/d`, term by term.
pub fn apply_pseudo_mixture_channel(pm: &PseudoMixture, eta: f64) -> DensityOperator {
    let d = pm.dim().get();
    let mut m = CMatrix::zeros(d, d);
    let mixed = (1.0 - eta) / d as f64;
    for (a, psi) in &pm.terms {
        m += outer(psi.amplitudes()).scale(a * eta);
        for i in 0..d {
            m[(i, i)] += a * mixed;
        }
    }
    DensityOperator::from_matrix_unchecked(m)
}
