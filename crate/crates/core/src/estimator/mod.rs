//! Finite covariant measurements for estimating a pure qudit state from
//! `N` identical copies.
//!
//! A [`Povm`] is a list of candidate states `psi_mu` with weights `c_mu`; its
//! elements are `c_mu |psi_mu><psi_mu|^{\otimes N}` on the symmetric subspace.
//! On outcome `mu` the estimate `psi_mu` is announced. Completeness alone fixes
//! the Haar-averaged fidelity at `(N + 1)/(N + d)`; pointwise input
//! independence additionally needs the `(N + 1)`-copy frame operator to be
//! proportional to the identity (see [`moment_resolution_residual`]).

pub mod frames;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_to_real, outer, projector_to_real, CMatrix, CVector};
use crate::montecarlo::{haar_average, Estimate, Welford};
use crate::nnls::nnls;
use crate::qudit::{
    bloch_from_density, build_generator_basis, overlap_moment, DensityOperator, Dimension,
    PureState, ShrinkingFactor,
};
use crate::symmetric::{sym_dimension, SymmetricBasis, SymmetricState};

use self::frames::phase_lattice_design;

/// Completeness residual accepted for a constructed measurement.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Candidate state announced on an outcome, with its element weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePoint {
    pub candidate: PureState,
    pub weight: f64,
}

/// Measurement on `N` symmetric copies with rank-one elements
/// `c_mu |psi_mu><psi_mu|^{\otimes N}`.
#[derive(Debug, Clone)]
pub struct Povm {
    basis: Arc<SymmetricBasis>,
    points: Vec<FramePoint>,
    embedded: Vec<CVector>,
}

impl Povm {
    /// Assembles a measurement without checking completeness or signs;
    /// see [`validate_povm`].
    pub fn from_points(d: Dimension, copies: usize, points: Vec<FramePoint>) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidArgument(
                "copy count must be at least 1".into(),
            ));
        }
        if let Some(bad) = points.iter().find(|p| p.candidate.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d.get(),
                found: bad.candidate.dim().get(),
            });
        }
        if let Some(bad) = points.iter().find(|p| !p.weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite weight {}",
                bad.weight
            )));
        }
        let basis = Arc::new(SymmetricBasis::new(d, copies));
        let embedded = points.iter().map(|p| basis.embed(&p.candidate)).collect();
        Ok(Povm {
            basis,
            points,
            embedded,
        })
    }

    pub fn dim(&self) -> Dimension {
        self.basis.dim()
    }

    pub fn copies(&self) -> usize {
        self.basis.copies()
    }

    pub fn points(&self) -> &[FramePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// `sum_mu c_mu |psi_mu><psi_mu|^{\otimes N}` in symmetric coordinates.
    pub fn frame_operator(&self) -> CMatrix {
        let n = self.basis.len();
        let mut m = CMatrix::zeros(n, n);
        for (p, v) in self.points.iter().zip(&self.embedded) {
            m += outer(v).scale(p.weight);
        }
        m
    }

    /// Same candidates with every weight multiplied by `factor`.
    fn rescaled(mut self, factor: f64) -> Self {
        for p in &mut self.points {
            p.weight *= factor;
        }
        self
    }
}

/// Solves for nonnegative weights making `frame` a complete measurement on
/// `N` copies.
///
/// The minimum-norm least-squares solution is used when it is already
/// nonnegative (this keeps symmetric frames uniformly weighted); otherwise
/// the weights come from nonnegative least squares. A frame that cannot reach
/// the identity within [`COMPLETENESS_TOL`] is reported as infeasible.
pub fn build_covariant_povm(d: Dimension, copies: usize, frame: &[PureState]) -> Result<Povm> {
    if copies == 0 {
        return Err(Error::InvalidArgument(
            "copy count must be at least 1".into(),
        ));
    }
    let dsym = sym_dimension(d, copies);
    let required = dsym * dsym;
    if frame.len() < required {
        return Err(Error::FrameTooSmall {
            found: frame.len(),
            required,
        });
    }
    let basis = SymmetricBasis::new(d, copies);
    let mut a = DMatrix::<f64>::zeros(required, frame.len());
    for (col, psi) in frame.iter().enumerate() {
        if psi.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d.get(),
                found: psi.dim().get(),
            });
        }
        for (row, x) in projector_to_real(&basis.embed(psi)).into_iter().enumerate() {
            a[(row, col)] = x;
        }
    }
    let b = DVector::from_vec(hermitian_to_real(&CMatrix::identity(dsym, dsym)));

    let min_norm = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let weights = if min_norm.iter().all(|&w| w >= 0.0) && (&a * &min_norm - &b).norm() <= 1e-12 {
        min_norm
    } else {
        nnls(&a, &b).x
    };

    let points = frame
        .iter()
        .zip(weights.iter())
        .map(|(psi, &w)| FramePoint {
            candidate: psi.clone(),
            weight: w,
        })
        .collect();
    let povm = Povm::from_points(d, copies, points)?;
    let report = validate_povm(&povm);
    if report.completeness_residual > COMPLETENESS_TOL {
        return Err(Error::Infeasible {
            residual: report.completeness_residual,
            tolerance: COMPLETENESS_TOL,
        });
    }
    Ok(povm)
}

/// Complete measurement from a Haar-random frame. Starts at `2 D^2` points
/// and doubles the frame (up to 5 times) while the weights are infeasible.
pub fn haar_povm<R: Rng + ?Sized>(d: Dimension, copies: usize, rng: &mut R) -> Result<Povm> {
    let dsym = sym_dimension(d, copies);
    let mut size = 2 * dsym * dsym;
    let mut last = None;
    for _ in 0..6 {
        let frame = frames::haar_frame(d, size, rng);
        match build_covariant_povm(d, copies, &frame) {
            Ok(p) => return Ok(p),
            Err(e @ Error::Infeasible { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
        size *= 2;
    }
    Err(last.expect("at least one attempt"))
}

/// Deterministic complete measurement whose frame is an `(N + 1)`-design, so
/// its estimation fidelity is the same for every input state.
pub fn design_povm(d: Dimension, copies: usize) -> Result<Povm> {
    let frame = phase_lattice_design(d, copies + 1)?;
    let points = frame
        .points
        .into_iter()
        .map(|(candidate, weight)| FramePoint { candidate, weight })
        .collect();
    // Tracing out one copy of I_{N+1} leaves (D_{N+1}/D_N) I_N.
    let scale = sym_dimension(d, copies) as f64 / sym_dimension(d, copies + 1) as f64;
    let povm = Povm::from_points(d, copies, points)?.rescaled(scale);
    let report = validate_povm(&povm);
    if !report.passed {
        return Err(Error::Infeasible {
            residual: report.completeness_residual,
            tolerance: COMPLETENESS_TOL,
        });
    }
    Ok(povm)
}

/// Diagnostics for a measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmReport {
    /// Smallest element weight; elements are PSD iff this is nonnegative.
    pub min_weight: f64,
    /// Frobenius norm of `sum_mu E_mu - I` on the symmetric subspace.
    pub completeness_residual: f64,
    pub weight_sum: f64,
    /// `C(N + d - 1, N)`, which `weight_sum` must equal for a complete measurement.
    pub expected_weight_sum: f64,
    pub passed: bool,
}

pub fn validate_povm(povm: &Povm) -> PovmReport {
    let n = povm.basis.len();
    let residual = (povm.frame_operator() - CMatrix::identity(n, n)).norm();
    let min_weight = povm
        .points
        .iter()
        .map(|p| p.weight)
        .fold(f64::INFINITY, f64::min);
    let min_weight = if povm.points.is_empty() {
        0.0
    } else {
        min_weight
    };
    PovmReport {
        min_weight,
        completeness_residual: residual,
        weight_sum: povm.weight_sum(),
        expected_weight_sum: n as f64,
        passed: !povm.points.is_empty() && min_weight >= 0.0 && residual <= COMPLETENESS_TOL,
    }
}

/// Frobenius distance of the `order`-copy frame operator from
/// `(sum c / D_order) I`. Zero at `order = N + 1` means the estimation
/// fidelity does not depend on the input.
pub fn moment_resolution_residual(povm: &Povm, order: usize) -> f64 {
    let basis = SymmetricBasis::new(povm.dim(), order);
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    for p in &povm.points {
        m += outer(&basis.embed(&p.candidate)).scale(p.weight);
    }
    let target = CMatrix::identity(n, n).scale(povm.weight_sum() / n as f64);
    (m - target).norm()
}

/// `p_mu = c_mu |<psi_mu|psi>|^{2N}`
pub fn outcome_distribution(povm: &Povm, psi: &PureState) -> Vec<f64> {
    let copies = povm.copies() as i32;
    povm.points
        .iter()
        .map(|p| p.weight * p.candidate.overlap(psi).powi(copies))
        .collect()
}

/// Index of an outcome drawn by cumulative-sum inversion in frame order.
pub fn sample_outcome_index<R: Rng + ?Sized>(povm: &Povm, psi: &PureState, rng: &mut R) -> usize {
    let probs = outcome_distribution(povm, psi);
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_nonzero
}

pub fn sample_outcome<'a, R: Rng + ?Sized>(
    povm: &'a Povm,
    psi: &PureState,
    rng: &mut R,
) -> &'a FramePoint {
    &povm.points[sample_outcome_index(povm, psi, rng)]
}

/// `sum_mu p_mu(psi) |<psi|psi_mu>|^2`
pub fn estimation_fidelity_exact(povm: &Povm, psi: &PureState) -> f64 {
    let copies = povm.copies() as i32;
    povm.points
        .iter()
        .map(|p| p.weight * p.candidate.overlap(psi).powi(copies + 1))
        .sum()
}

/// How [`average_fidelity`] averages over inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// `sum_mu c_mu * overlap_moment(d, N + 1)`
    Exact,
    MonteCarlo {
        samples: u64,
        seed: u64,
    },
}

/// Haar-averaged estimation fidelity.
pub fn average_fidelity(povm: &Povm, mode: AverageMode) -> Estimate {
    match mode {
        AverageMode::Exact => {
            Estimate::exact(povm.weight_sum() * overlap_moment(povm.dim(), povm.copies() + 1))
        }
        AverageMode::MonteCarlo { samples, seed } => {
            haar_average(povm.dim(), samples, seed, |psi| {
                estimation_fidelity_exact(povm, psi)
            })
        }
    }
}

/// `N / (N + d)`, the shrinking factor of optimal estimation on `N` copies.
pub fn estimation_shrinking_factor(d: Dimension, copies: usize) -> ShrinkingFactor {
    let n = copies as f64;
    ShrinkingFactor(n / (n + d.get() as f64))
}

/// What is prepared after an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preparation {
    /// The announced candidate `|psi_mu>`.
    #[default]
    Candidate,
    /// `I/d`, regardless of the outcome.
    MaximallyMixed,
}

/// Measure with a [`Povm`], then prepare a single qudit.
#[derive(Debug, Clone, Copy)]
pub struct MeasurePrepare<'a> {
    povm: &'a Povm,
    preparation: Preparation,
}

/// How [`MeasurePrepare::shrink_report`] evaluates the channel output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaMode {
    Exact,
    /// Empirical average of `shots` prepared states per probe.
    Sampled {
        shots: u64,
        seed: u64,
    },
}

/// Fitted shrinking factor of a channel over a set of probe states.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkReport {
    pub eta_mean: f64,
    /// max - min over probes
    pub eta_spread: f64,
    /// Standard error of `eta_mean` over probes.
    pub eta_std_error: f64,
    pub probes: usize,
}

impl<'a> MeasurePrepare<'a> {
    pub fn new(povm: &'a Povm) -> Self {
        MeasurePrepare {
            povm,
            preparation: Preparation::Candidate,
        }
    }

    pub fn with_preparation(mut self, preparation: Preparation) -> Self {
        self.preparation = preparation;
        self
    }

    pub fn povm(&self) -> &Povm {
        self.povm
    }

    fn prepare(&self, probs: impl Iterator<Item = (usize, f64)>) -> DensityOperator {
        let d = self.povm.dim().get();
        let mut m = CMatrix::zeros(d, d);
        match self.preparation {
            Preparation::Candidate => {
                for (i, p) in probs {
                    m += outer(self.povm.points[i].candidate.amplitudes()).scale(p);
                }
            }
            Preparation::MaximallyMixed => {
                let total: f64 = probs.map(|(_, p)| p).sum();
                m = CMatrix::identity(d, d).scale(total / d as f64);
            }
        }
        DensityOperator::from_matrix_unchecked(m)
    }

    /// Exact output on `|psi>^{\otimes N}`.
    pub fn output_for_product(&self, psi: &PureState) -> DensityOperator {
        self.prepare(outcome_distribution(self.povm, psi).into_iter().enumerate())
    }

    /// Exact output on an arbitrary symmetric state,
    /// `sum_mu Tr(E_mu rho) prep_mu`.
    pub fn output_for_state(&self, rho: &SymmetricState) -> Result<DensityOperator> {
        if rho.dim() != self.povm.dim() || rho.copies() != self.povm.copies() {
            return Err(Error::InvalidArgument(format!(
                "state on {} copies of d = {} does not match POVM on {} copies of d = {}",
                rho.copies(),
                rho.dim(),
                self.povm.copies(),
                self.povm.dim()
            )));
        }
        let probs = self
            .povm
            .points
            .iter()
            .zip(&self.povm.embedded)
            .map(|(p, v)| p.weight * rho.expectation(v));
        Ok(self.prepare(probs.enumerate()))
    }

    /// Average of `shots` prepared states drawn from the outcome distribution.
    pub fn sampled_output<R: Rng + ?Sized>(
        &self,
        psi: &PureState,
        shots: u64,
        rng: &mut R,
    ) -> DensityOperator {
        let mut counts = vec![0u64; self.povm.len()];
        for _ in 0..shots {
            counts[sample_outcome_index(self.povm, psi, rng)] += 1;
        }
        let n = shots.max(1) as f64;
        self.prepare(
            counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(i, c)| (i, c as f64 / n)),
        )
    }

    /// Fits `eta` per probe as the ratio of output to input Bloch vectors.
    pub fn shrink_report(&self, probes: &[PureState], mode: EtaMode) -> Result<ShrinkReport> {
        if probes.len() < 5 {
            return Err(Error::InvalidArgument(format!(
                "need at least 5 probes, got {}",
                probes.len()
            )));
        }
        let basis = build_generator_basis(self.povm.dim());
        let mut stats = Welford::default();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, psi) in probes.iter().enumerate() {
            if psi.dim() != self.povm.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.povm.dim().get(),
                    found: psi.dim().get(),
                });
            }
            let out = match mode {
                EtaMode::Exact => self.output_for_product(psi),
                EtaMode::Sampled { shots, seed } => {
                    let mut rng = crate::montecarlo::stream(seed, k as u64);
                    self.sampled_output(psi, shots, &mut rng)
                }
            };
            let lin = bloch_from_density(&psi.projector(), &basis)?;
            let lout = bloch_from_density(&out, &basis)?;
            let eta = lout.ratio_along(&lin)?;
            stats.push(eta);
            lo = lo.min(eta);
            hi = hi.max(eta);
        }
        Ok(ShrinkReport {
            eta_mean: stats.mean(),
            eta_spread: hi - lo,
            eta_std_error: stats.std_error(),
            probes: probes.len(),
        })
    }
}

/// Shrinking factor of the measure-and-prepare channel built on `povm`.
pub fn measure_prepare_channel_eta(
    povm: &Povm,
    probes: &[PureState],
    mode: EtaMode,
) -> Result<ShrinkReport> {
    MeasurePrepare::new(povm).shrink_report(probes, mode)
}
