//! Experiments tying optimal cloning to optimal estimation.
//!
//! - Estimating from `N` copies and then preparing `L` copies of the estimate
//!   is itself an `N -> L` cloner, so its single-particle fidelity is bounded
//!   by the optimal cloner fidelity for every `L`.
//! - Cloning `N -> L` and then estimating on the `L` outputs is an estimation
//!   strategy on `N` copies. Shrinking factors of such concatenations multiply:
//!   `eta_total = eta_clone(N, L) * eta_est(L) = N/(N + d)` for every `L`.
//!
//! Together the two bounds pin the optimal estimation fidelity at
//! `(N + 1)/(N + d)`, the `L -> infinity` cloner fidelity.

use serde::Serialize;

use crate::cloner::{
    clone, cloner_fidelity, cloner_fidelity_asymptotic, cloner_shrinking_factor,
    cloner_shrinking_factor_asymptotic, ClonerSpec,
};
use crate::error::{Error, Result};
use crate::estimator::{
    average_fidelity, design_povm, estimation_shrinking_factor, measure_prepare_channel_eta,
    outcome_distribution, validate_povm, AverageMode, EtaMode, MeasurePrepare, Povm,
};
use crate::linalg::{max_abs_diff, outer, CMatrix};
use crate::montecarlo::Welford;
use crate::pseudo_mixture::pseudo_mixture_decompose;
use crate::qudit::{
    bloch_from_density, build_generator_basis, fidelity_from_eta, fidelity_pure, shrink_density,
    DensityOperator, Dimension, PureState,
};
use crate::symmetric::{reduce_single_particle, sym_dimension, SymmetricBasis, SymmetricState};

/// Largest symmetric dimension for which prepared `L`-copy states are
/// built explicitly; beyond it the single-particle reduction is used directly.
const EXPLICIT_PREPARATION_LIMIT: usize = 512;

/// Clone `N -> L`, then estimate on the `L` outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcatenationResult {
    pub d: usize,
    pub n: usize,
    pub l: usize,
    /// `N(L + d)/(L(N + d))`
    pub eta_clone: f64,
    /// Fitted shrinking factor of the estimator on `L` product copies.
    pub eta_estimate: f64,
    /// Fitted shrinking factor of the whole chain, averaged over probes.
    pub eta_total: f64,
    /// max - min of the per-probe total shrinking factor.
    pub eta_total_spread: f64,
    pub total_fidelity: f64,
}

impl ConcatenationResult {
    /// `|eta_total - eta_clone * eta_estimate|`
    pub fn multiplication_gap(&self) -> f64 {
        (self.eta_total - self.eta_clone * self.eta_estimate).abs()
    }

    /// `|total_fidelity - fidelity_from_eta(eta_total)|`
    pub fn fidelity_gap(&self) -> f64 {
        let d = Dimension::new(self.d).expect("validated on construction");
        (self.total_fidelity - fidelity_from_eta(crate::ShrinkingFactor(self.eta_total), d)).abs()
    }
}

/// Which direction of the sandwich an [`InequalityRecord`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Estimate-then-prepare fidelity <= cloner fidelity `F(N, L)`.
    EstimationBelowCloning,
    /// `F(N, infinity)` <= fidelity of the best constructed estimator.
    AsymptoticCloningBelowEstimation,
}

/// `lhs <= rhs` with `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub bound: Bound,
    pub d: usize,
    pub n: usize,
    /// Number of prepared copies; absent for the asymptotic bound.
    pub l: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityRecord {
    fn new(bound: Bound, d: Dimension, n: usize, l: Option<usize>, lhs: f64, rhs: f64) -> Self {
        InequalityRecord {
            bound,
            d: d.get(),
            n,
            l,
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

fn require_valid(povm: &Povm, d: Dimension, copies: usize) -> Result<()> {
    if povm.dim() != d || povm.copies() != copies {
        return Err(Error::InvalidArgument(format!(
            "POVM acts on {} copies of d = {}, expected {} copies of d = {}",
            povm.copies(),
            povm.dim(),
            copies,
            d
        )));
    }
    let report = validate_povm(povm);
    if !report.passed {
        return Err(Error::InvalidArgument(format!(
            "invalid POVM (completeness residual {:e}, min weight {:e})",
            report.completeness_residual, report.min_weight
        )));
    }
    Ok(())
}

/// Clones each probe `N -> L`, measures the `L` outputs with `povm_l`, and
/// prepares the announced candidate.
pub fn clone_then_estimate(
    d: Dimension,
    n: usize,
    l: usize,
    povm_l: &Povm,
    probes: &[PureState],
) -> Result<ConcatenationResult> {
    let spec = ClonerSpec::new(d, n, l)?;
    require_valid(povm_l, d, l)?;
    let basis = build_generator_basis(d);
    let channel = MeasurePrepare::new(povm_l);
    let mut eta = Welford::default();
    let mut fid = Welford::default();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for psi in probes {
        let cloned = clone(&SymmetricState::product(psi, n)?, l)?;
        let out = channel.output_for_state(&cloned)?;
        let lin = bloch_from_density(&psi.projector(), &basis)?;
        let e = bloch_from_density(&out, &basis)?.ratio_along(&lin)?;
        eta.push(e);
        lo = lo.min(e);
        hi = hi.max(e);
        fid.push(fidelity_pure(psi, &out)?);
    }
    let estimate = measure_prepare_channel_eta(povm_l, probes, EtaMode::Exact)?;
    Ok(ConcatenationResult {
        d: d.get(),
        n,
        l,
        eta_clone: cloner_shrinking_factor(spec).get(),
        eta_estimate: estimate.eta_mean,
        eta_total: eta.mean(),
        eta_total_spread: hi - lo,
        total_fidelity: fid.mean(),
    })
}

/// One row of [`limit_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub l: usize,
    pub total_fidelity: f64,
    /// `(1/d)(1 + (d - 1) eta_clone(N, L) eta_est(L))` from closed forms.
    pub predicted: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub d: usize,
    pub n: usize,
    pub rows: Vec<LimitRow>,
    /// `fidelity_from_eta(N/(N + d), d)`, i.e. `eta_est(infinity) = 1`.
    pub asymptotic_fidelity: f64,
    /// `(N + 1)/(N + d)`
    pub closed_form: f64,
    pub substitution_gap: f64,
}

impl LimitReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.deviation)
            .fold(self.substitution_gap, f64::max)
    }
}

/// Runs [`clone_then_estimate`] for each `L`, using the design measurement on
/// `L` copies, and compares with the closed-form concatenation.
pub fn limit_check(
    d: Dimension,
    n: usize,
    l_values: &[usize],
    probes: &[PureState],
) -> Result<LimitReport> {
    if l_values.is_empty() || l_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "L values must be nonempty and strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let povm = design_povm(d, l)?;
        let res = clone_then_estimate(d, n, l, &povm, probes)?;
        let eta_c = cloner_shrinking_factor(ClonerSpec::new(d, n, l)?).get();
        let eta_e = estimation_shrinking_factor(d, l).get();
        let predicted = fidelity_from_eta(crate::ShrinkingFactor(eta_c * eta_e), d);
        rows.push(LimitRow {
            l,
            total_fidelity: res.total_fidelity,
            predicted,
            deviation: (res.total_fidelity - predicted).abs(),
        });
    }
    let asymptotic = fidelity_from_eta(cloner_shrinking_factor_asymptotic(d, n), d);
    let closed = cloner_fidelity_asymptotic(d, n);
    Ok(LimitReport {
        d: d.get(),
        n,
        rows,
        asymptotic_fidelity: asymptotic,
        closed_form: closed,
        substitution_gap: (asymptotic - closed).abs(),
    })
}

/// Measures `N` copies with `povm_n`, prepares `L` copies of the announced
/// candidate, and compares the single-particle fidelity with the `N -> L`
/// cloner.
pub fn estimate_then_prepare_as_cloner(
    d: Dimension,
    n: usize,
    l: usize,
    povm_n: &Povm,
    probes: &[PureState],
) -> Result<InequalityRecord> {
    let spec = ClonerSpec::new(d, n, l)?;
    require_valid(povm_n, d, n)?;
    if probes.is_empty() {
        return Err(Error::InvalidArgument("no probe states".into()));
    }
    let explicit = sym_dimension(d, l) <= EXPLICIT_PREPARATION_LIMIT;
    let basis = explicit.then(|| std::sync::Arc::new(SymmetricBasis::new(d, l)));
    let mut fid = Welford::default();
    for psi in probes {
        let probs = outcome_distribution(povm_n, psi);
        let reduced = match &basis {
            Some(basis) => {
                let k = basis.len();
                let mut prepared = CMatrix::zeros(k, k);
                for (p, point) in probs.iter().zip(povm_n.points()) {
                    if *p != 0.0 {
                        prepared += outer(&basis.embed(&point.candidate)).scale(*p);
                    }
                }
                let state = SymmetricState::from_parts_unchecked(basis.clone(), prepared);
                reduce_single_particle(&state)
            }
            None => {
                let mut m = CMatrix::zeros(d.get(), d.get());
                for (p, point) in probs.iter().zip(povm_n.points()) {
                    m += outer(point.candidate.amplitudes()).scale(*p);
                }
                DensityOperator::from_matrix_unchecked(m)
            }
        };
        fid.push(fidelity_pure(psi, &reduced)?);
    }
    Ok(InequalityRecord::new(
        Bound::EstimationBelowCloning,
        d,
        n,
        Some(l),
        fid.mean(),
        cloner_fidelity(spec),
    ))
}

/// `F_clone(N, infinity) <= ` exact average fidelity of the design measurement.
pub fn opposite_inequality(d: Dimension, n: usize) -> Result<InequalityRecord> {
    let povm = design_povm(d, n)?;
    opposite_inequality_with(&povm)
}

/// Same as [`opposite_inequality`] for a caller-supplied measurement.
pub fn opposite_inequality_with(povm: &Povm) -> Result<InequalityRecord> {
    let d = povm.dim();
    let n = povm.copies();
    require_valid(povm, d, n)?;
    Ok(InequalityRecord::new(
        Bound::AsymptoticCloningBelowEstimation,
        d,
        n,
        None,
        cloner_fidelity_asymptotic(d, n),
        average_fidelity(povm, AverageMode::Exact).mean,
    ))
}

/// Measure-and-prepare acting on an entangled symmetric input.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    /// `L/(L + d)`
    pub eta: f64,
    pub output: DensityOperator,
    /// `eta rho_red + (1 - eta) I/d`
    pub expected: DensityOperator,
    /// Entrywise max-norm of `output - expected`.
    pub max_deviation: f64,
}

/// Applies the exact measure-and-prepare channel of `povm_l` to a state on
/// the symmetric subspace and compares with the shrunk one-particle reduction.
pub fn symmetric_input_extension(
    d: Dimension,
    l: usize,
    povm_l: &Povm,
    input: &SymmetricState,
) -> Result<ExtensionReport> {
    require_valid(povm_l, d, l)?;
    let output = MeasurePrepare::new(povm_l).output_for_state(input)?;
    let eta = estimation_shrinking_factor(d, l).get();
    let expected = shrink_density(&reduce_single_particle(input), eta);
    let max_deviation = max_abs_diff(output.matrix(), expected.matrix());
    Ok(ExtensionReport {
        eta,
        output,
        expected,
        max_deviation,
    })
}

/// Compares the channel's direct action on `input` with the term-by-term
/// action on a pseudo-mixture decomposition of it over `frame`; returns the
/// entrywise max deviation.
pub fn linearity_transport(
    povm_l: &Povm,
    input: &SymmetricState,
    frame: &[PureState],
) -> Result<f64> {
    let channel = MeasurePrepare::new(povm_l);
    let direct = channel.output_for_state(input)?;
    let pm = pseudo_mixture_decompose(input, frame)?;
    let d = povm_l.dim().get();
    let mut via_terms = CMatrix::zeros(d, d);
    for (alpha, psi) in pm.terms() {
        via_terms += channel.output_for_product(psi).matrix().scale(*alpha);
    }
    Ok(max_abs_diff(direct.matrix(), &via_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::haar_states;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn qubit_one_to_two_concatenation() {
        let probes = haar_states(dim(2), 8, 1, 0);
        let povm = design_povm(dim(2), 2).unwrap();
        let r = clone_then_estimate(dim(2), 1, 2, &povm, &probes).unwrap();
        assert!((r.eta_clone - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.eta_estimate - 0.5).abs() < 1e-8);
        assert!((r.eta_total - 1.0 / 3.0).abs() < 1e-8);
        assert!((r.total_fidelity - 2.0 / 3.0).abs() < 1e-8);
        assert!(r.multiplication_gap() < 1e-8);
        assert!(r.fidelity_gap() < 1e-8);
    }

    #[test]
    fn qubit_one_to_three_concatenation() {
        let probes = haar_states(dim(2), 8, 2, 0);
        let povm = design_povm(dim(2), 3).unwrap();
        let r = clone_then_estimate(dim(2), 1, 3, &povm, &probes).unwrap();
        assert!((r.eta_clone - 5.0 / 9.0).abs() < 1e-12);
        assert!((r.eta_estimate - 0.6).abs() < 1e-8);
        assert!((r.eta_total - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn no_cloning_step_reduces_to_estimation() {
        let probes = haar_states(dim(3), 6, 3, 0);
        let povm = design_povm(dim(3), 2).unwrap();
        let r = clone_then_estimate(dim(3), 2, 2, &povm, &probes).unwrap();
        assert!((r.eta_clone - 1.0).abs() < 1e-15);
        assert!((r.eta_total - r.eta_estimate).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_or_invalid_povm() {
        let probes = haar_states(dim(2), 6, 3, 0);
        let povm = design_povm(dim(2), 2).unwrap();
        assert!(clone_then_estimate(dim(2), 1, 3, &povm, &probes).is_err());
        let mut points = povm.points().to_vec();
        points[0].weight *= 2.0;
        let bad = Povm::from_points(dim(2), 2, points).unwrap();
        assert!(clone_then_estimate(dim(2), 1, 2, &bad, &probes).is_err());
    }

    #[test]
    fn limit_rows() {
        let probes = haar_states(dim(2), 5, 4, 0);
        let rep = limit_check(dim(2), 1, &[1, 2, 3, 4], &probes).unwrap();
        for row in &rep.rows {
            assert!((row.total_fidelity - 2.0 / 3.0).abs() < 1e-8);
        }
        assert!(rep.max_deviation() < 1e-8);
        assert!(rep.substitution_gap < 1e-15);

        let probes = haar_states(dim(3), 5, 4, 1);
        let rep = limit_check(dim(3), 2, &[2, 3], &probes).unwrap();
        for row in &rep.rows {
            assert!((row.total_fidelity - 0.6).abs() < 1e-8);
        }
        assert!(limit_check(dim(2), 1, &[2, 2], &probes).is_err());
    }

    #[test]
    fn estimate_then_prepare_bounds() {
        let probes = haar_states(dim(2), 10, 5, 0);
        let povm = design_povm(dim(2), 1).unwrap();
        let r = estimate_then_prepare_as_cloner(dim(2), 1, 2, &povm, &probes).unwrap();
        assert!((r.lhs - 2.0 / 3.0).abs() < 1e-10);
        assert!((r.rhs - 5.0 / 6.0).abs() < 1e-15);
        assert!(r.holds(1e-9));

        let far = estimate_then_prepare_as_cloner(dim(2), 1, 1_000_000, &povm, &probes).unwrap();
        assert!(far.holds(1e-9));
        assert!(far.slack < 1e-5);

        let same = estimate_then_prepare_as_cloner(dim(2), 1, 1, &povm, &probes).unwrap();
        assert!((same.rhs - 1.0).abs() < 1e-15 && same.holds(0.0));
    }

    #[test]
    fn opposite_direction() {
        for (d, n, want) in [(2, 1, 2.0 / 3.0), (3, 1, 0.5), (2, 3, 0.8)] {
            let r = opposite_inequality(dim(d), n).unwrap();
            assert!((r.lhs - want).abs() < 1e-12);
            assert!((r.rhs - want).abs() < 1e-9);
            assert!(r.holds(1e-9));
        }
    }

    #[test]
    fn extension_to_cloner_output() {
        let psi = haar_states(dim(2), 1, 6, 0).remove(0);
        let cloned = clone(&SymmetricState::product(&psi, 1).unwrap(), 2).unwrap();
        let povm = design_povm(dim(2), 2).unwrap();
        let rep = symmetric_input_extension(dim(2), 2, &povm, &cloned).unwrap();
        assert!((rep.eta - 0.5).abs() < 1e-15);
        assert!(rep.max_deviation < 1e-8);
        // reduced state has fidelity 5/6, then shrinks by 1/2
        let f = fidelity_pure(&psi, &rep.output).unwrap();
        assert!(
            (f - fidelity_from_eta(crate::ShrinkingFactor(2.0 / 3.0 * 0.5), dim(2))).abs() < 1e-8
        );
    }

    #[test]
    fn extension_on_maximally_mixed_input() {
        let povm = design_povm(dim(2), 2).unwrap();
        let input = SymmetricState::maximally_mixed(dim(2), 2);
        let rep = symmetric_input_extension(dim(2), 2, &povm, &input).unwrap();
        let half = CMatrix::identity(2, 2).unscale(2.0);
        assert!(max_abs_diff(rep.output.matrix(), &half) < 1e-8);
    }

    #[test]
    fn extension_on_product_input_matches_channel() {
        let povm = design_povm(dim(3), 2).unwrap();
        let psi = haar_states(dim(3), 1, 8, 0).remove(0);
        let input = SymmetricState::product(&psi, 2).unwrap();
        let rep = symmetric_input_extension(dim(3), 2, &povm, &input).unwrap();
        let direct = MeasurePrepare::new(&povm).output_for_product(&psi);
        assert!(max_abs_diff(rep.output.matrix(), direct.matrix()) < 1e-12);
        assert!(rep.max_deviation < 1e-8);
    }

    #[test]
    fn linearity_transport_on_entangled_input() {
        let psi = haar_states(dim(2), 1, 9, 0).remove(0);
        let cloned = clone(&SymmetricState::product(&psi, 1).unwrap(), 2).unwrap();
        let povm = design_povm(dim(2), 2).unwrap();
        let frame = haar_states(dim(2), 40, 10, 0);
        assert!(linearity_transport(&povm, &cloned, &frame).unwrap() < 1e-8);
    }
}
