//! Optimal universal `N -> M` cloning of qudits.
//!
//! The channel is `T(rho) = (D_N / D_M) S_M (rho x I^{M-N}) S_M`, where `S_M`
//! projects onto the symmetric subspace of `M` qudits and `D_K` is its
//! dimension. Each single-particle output has fidelity
//! `(M - N + N(M + d)) / (M(N + d))` with the pure input.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{kron, trace, CMatrix};
use crate::qudit::{fidelity_pure, Dimension, PureState, ShrinkingFactor};
use crate::symmetric::{
    check_full_space, reduce_single_particle, sym_dimension, symmetrizer, SymmetricBasis,
    SymmetricState,
};

/// Dimension and copy numbers of a cloning task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClonerSpec {
    d: Dimension,
    inputs: usize,
    outputs: usize,
}

impl ClonerSpec {
    pub fn new(d: Dimension, inputs: usize, outputs: usize) -> Result<Self> {
        if inputs == 0 || outputs < inputs {
            return Err(Error::InvalidCopies {
                n: inputs,
                m: outputs,
            });
        }
        Ok(ClonerSpec { d, inputs, outputs })
    }

    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }
}

/// `(M - N + N(M + d)) / (M(N + d))`
pub fn cloner_fidelity(spec: ClonerSpec) -> f64 {
    let d = spec.d.get() as f64;
    let n = spec.inputs as f64;
    let m = spec.outputs as f64;
    (m - n + n * (m + d)) / (m * (n + d))
}

/// `(N + 1) / (N + d)`, the `M -> infinity` limit of [`cloner_fidelity`].
pub fn cloner_fidelity_asymptotic(d: Dimension, inputs: usize) -> f64 {
    let n = inputs as f64;
    (n + 1.0) / (n + d.get() as f64)
}

/// `N(M + d) / (M(N + d))`
pub fn cloner_shrinking_factor(spec: ClonerSpec) -> ShrinkingFactor {
    let d = spec.d.get() as f64;
    let n = spec.inputs as f64;
    let m = spec.outputs as f64;
    ShrinkingFactor(n * (m + d) / (m * (n + d)))
}

/// `N / (N + d)`
pub fn cloner_shrinking_factor_asymptotic(d: Dimension, inputs: usize) -> ShrinkingFactor {
    let n = inputs as f64;
    ShrinkingFactor(n / (n + d.get() as f64))
}

/// Applies the optimal cloner to a state on `N` copies, producing `M` copies.
///
/// Works in symmetric coordinates: with `V_K` the isometry of the symmetric
/// subspace and `W_r` the rows of `V_M` whose trailing `M - N` digits equal `r`,
/// the output is `(D_N/D_M) sum_r (V_N^dag W_r)^dag rho (V_N^dag W_r)`.
pub fn clone(input: &SymmetricState, outputs: usize) -> Result<SymmetricState> {
    let d = input.dim();
    let inputs = input.copies();
    ClonerSpec::new(d, inputs, outputs)?;
    check_full_space(d, outputs)?;
    if outputs == inputs {
        return Ok(input.clone());
    }
    let in_basis = input.basis();
    let out_basis = Arc::new(SymmetricBasis::new(d, outputs));
    let v_in = in_basis.isometry()?;
    let v_out = out_basis.isometry()?;
    let head = v_in.nrows();
    let tail = v_out.nrows() / head;

    let dm = out_basis.len();
    let mut out = CMatrix::zeros(dm, dm);
    let mut w = CMatrix::zeros(head, dm);
    for r in 0..tail {
        for x in 0..head {
            for b in 0..dm {
                w[(x, b)] = v_out[(x * tail + r, b)];
            }
        }
        let a = v_in.adjoint() * &w;
        out += a.adjoint() * input.matrix() * &a;
    }
    let norm = sym_dimension(d, inputs) as f64 / dm as f64;
    out = out.scale(norm);
    let tr = trace(&out).re;
    out = out.unscale(tr);
    out = (&out + out.adjoint()).scale(0.5);
    Ok(SymmetricState::from_parts_unchecked(out_basis, out))
}

/// Full-space form `(D_N/D_M) S_M (rho x I) S_M`, used as a cross-check.
pub fn clone_full_space(input: &SymmetricState, outputs: usize) -> Result<CMatrix> {
    let d = input.dim();
    let inputs = input.copies();
    ClonerSpec::new(d, inputs, outputs)?;
    check_full_space(d, outputs)?;
    let rho = input.to_full()?;
    let rest = d.get().pow((outputs - inputs) as u32);
    let lifted = kron(&rho, &CMatrix::identity(rest, rest));
    let s = symmetrizer(d, outputs)?;
    let norm = sym_dimension(d, inputs) as f64 / sym_dimension(d, outputs) as f64;
    Ok((&s * lifted * &s).scale(norm))
}

/// Single-particle fidelity of the simulated cloner on `|psi>^{\otimes N}`.
pub fn simulated_fidelity(psi: &PureState, spec: ClonerSpec) -> Result<f64> {
    let input = SymmetricState::product(psi, spec.inputs)?;
    let out = clone(&input, spec.outputs)?;
    fidelity_pure(psi, &reduce_single_particle(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::qudit::{
        bloch_from_density, build_generator_basis, eta_from_fidelity, haar_random_state,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn spec(d: usize, n: usize, m: usize) -> ClonerSpec {
        ClonerSpec::new(dim(d), n, m).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert!((cloner_fidelity(spec(2, 1, 2)) - 5.0 / 6.0).abs() < 1e-15);
        assert!((cloner_fidelity(spec(3, 1, 2)) - 0.75).abs() < 1e-15);
        for d in 2..=5 {
            for n in 1..=4 {
                assert!((cloner_fidelity(spec(d, n, n)) - 1.0).abs() < 1e-15);
                assert!((cloner_shrinking_factor(spec(d, n, n)).get() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn asymptotic_values() {
        assert!((cloner_fidelity_asymptotic(dim(2), 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cloner_fidelity_asymptotic(dim(3), 2) - 0.6).abs() < 1e-15);
        assert!((cloner_fidelity_asymptotic(dim(2), 1_000_000) - 1.0).abs() < 1e-5);
        let big = spec(2, 1, 1_000_000);
        assert!((cloner_fidelity(big) - cloner_fidelity_asymptotic(dim(2), 1)).abs() < 1e-6);
    }

    #[test]
    fn shrinking_factor_matches_fidelity_inversion() {
        assert!((cloner_shrinking_factor(spec(2, 1, 2)).get() - 2.0 / 3.0).abs() < 1e-15);
        for d in 2..=4 {
            for n in 1..=3 {
                for m in n..n + 5 {
                    let s = spec(d, n, m);
                    let via_f = eta_from_fidelity(cloner_fidelity(s), dim(d)).unwrap();
                    assert!((via_f.get() - cloner_shrinking_factor(s).get()).abs() < 1e-14);
                }
            }
        }
        let limit = cloner_shrinking_factor_asymptotic(dim(2), 1).get();
        assert!((limit - 1.0 / 3.0).abs() < 1e-15);
        assert!((cloner_shrinking_factor(spec(2, 1, 1_000_000)).get() - limit).abs() < 1e-5);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            ClonerSpec::new(dim(2), 0, 2),
            Err(Error::InvalidCopies { .. })
        ));
        assert!(matches!(
            ClonerSpec::new(dim(2), 3, 2),
            Err(Error::InvalidCopies { .. })
        ));
        let st = SymmetricState::maximally_mixed(dim(2), 3);
        assert!(clone(&st, 2).is_err());
        assert!(matches!(clone(&st, 13), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn identity_when_no_extra_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = haar_random_state(dim(3), &mut rng);
        let st = SymmetricState::product(&psi, 2).unwrap();
        let out = clone(&st, 2).unwrap();
        assert!(max_abs_diff(out.matrix(), st.matrix()) < 1e-12);
    }

    #[test]
    fn qubit_one_to_two() {
        let psi = PureState::basis(dim(2), 0).unwrap();
        let f = simulated_fidelity(&psi, spec(2, 1, 2)).unwrap();
        assert!((f - 5.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn qutrit_one_to_three_is_universal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let psi = haar_random_state(dim(3), &mut rng);
            let f = simulated_fidelity(&psi, spec(3, 1, 3)).unwrap();
            assert!((f - 2.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_path_matches_full_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for (d, n, m) in [(2, 1, 3), (2, 2, 4), (3, 1, 2), (3, 2, 3)] {
            let psi = haar_random_state(dim(d), &mut rng);
            let st = SymmetricState::product(&psi, n).unwrap();
            let sym = clone(&st, m).unwrap().to_full().unwrap();
            let full = clone_full_space(&st, m).unwrap();
            assert!(max_abs_diff(&sym, &full) < 1e-10, "({d},{n},{m})");
            let s = symmetrizer(dim(d), m).unwrap();
            assert!(max_abs_diff(&(&s * &full * &s), &full) < 1e-10);
        }
    }

    #[test]
    fn output_bloch_vector_is_parallel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (d, n, m) in [(2, 1, 2), (3, 2, 4), (3, 1, 3)] {
            let basis = build_generator_basis(dim(d));
            let psi = haar_random_state(dim(d), &mut rng);
            let out = clone(&SymmetricState::product(&psi, n).unwrap(), m).unwrap();
            let lin = bloch_from_density(&psi.projector(), &basis).unwrap();
            let lout = bloch_from_density(&reduce_single_particle(&out), &basis).unwrap();
            let eta = cloner_shrinking_factor(spec(d, n, m)).get();
            for (a, b) in lout.coords().iter().zip(lin.coords()) {
                assert!((a - eta * b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mixed_input_keeps_unit_trace() {
        let st = SymmetricState::maximally_mixed(dim(3), 2);
        let out = clone(&st, 4).unwrap();
        assert!((trace(out.matrix()).re - 1.0).abs() < 1e-12);
        // the maximally mixed symmetric state is a fixed point up to size
        let n = out.matrix().nrows();
        assert!(max_abs_diff(out.matrix(), &CMatrix::identity(n, n).unscale(n as f64)) < 1e-12);
    }
}
