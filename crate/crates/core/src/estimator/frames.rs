//! Frames of candidate states for building finite measurements.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{multinomial, CVector};
use crate::nnls::nnls;
use crate::qudit::{haar_random_state, Dimension, PureState};
use crate::symmetric::SymmetricBasis;

/// Eigenstates of `sigma_x`, `sigma_y`, `sigma_z`, in the order
/// `|+x>, |-x>, |+y>, |-y>, |0>, |1>`.
pub fn pauli_eigenstates() -> Vec<PureState> {
    let h = 1.0 / 2f64.sqrt();
    let c = |a: f64, b: f64, re: f64, im: f64| {
        PureState::from_slice(&[Complex64::new(a, 0.0), Complex64::new(b * re, b * im)])
            .expect("normalized by construction")
    };
    vec![
        c(h, h, 1.0, 0.0),
        c(h, h, -1.0, 0.0),
        c(h, h, 0.0, 1.0),
        c(h, h, 0.0, -1.0),
        c(1.0, 0.0, 0.0, 0.0),
        c(0.0, 1.0, 1.0, 0.0),
    ]
}

/// Qubit states whose Bloch vectors are the vertices of a regular
/// tetrahedron, `(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)` over `sqrt(3)`.
pub fn tetrahedron() -> Vec<PureState> {
    let s = 1.0 / 3f64.sqrt();
    [
        (1.0, 1.0, 1.0),
        (1.0, -1.0, -1.0),
        (-1.0, 1.0, -1.0),
        (-1.0, -1.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| qubit_from_bloch(x * s, y * s, z * s))
    .collect()
}

/// Pure qubit state with the given unit Bloch vector.
pub fn qubit_from_bloch(x: f64, y: f64, z: f64) -> PureState {
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    PureState::from_slice(&[
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
    .expect("normalized by construction")
}

pub fn haar_frame<R: Rng + ?Sized>(d: Dimension, size: usize, rng: &mut R) -> Vec<PureState> {
    (0..size).map(|_| haar_random_state(d, rng)).collect()
}

/// Weighted pure states with `sum_i w_i |psi_i><psi_i|^{\otimes t} = I_t`,
/// the identity on the symmetric subspace of `t` copies.
#[derive(Debug, Clone)]
pub struct WeightedFrame {
    pub order: usize,
    pub points: Vec<(PureState, f64)>,
}

/// Builds a weighted frame resolving the identity on `t` symmetric copies.
///
/// Points are `psi_k = sqrt(p_k) e^{i phi_k}` with `p` on the lattice
/// `{m / K : sum m = K}` of the probability simplex and phases on the grid
/// `2 pi j / (t + 1)`. Averaging over the phase grid removes every
/// off-diagonal entry of `|psi><psi|^{\otimes t}` in the occupation basis, so
/// only the diagonal has to be matched; that is a small nonnegative
/// least-squares problem in the lattice weights. `K` grows from `t` until it
/// resolves exactly. The resulting frame is a `t`-design, which also makes it
/// complete for every `s <= t` copies after rescaling.
pub fn phase_lattice_design(d: Dimension, order: usize) -> Result<WeightedFrame> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "design order must be at least 1".into(),
        ));
    }
    let rows = SymmetricBasis::new(d, order);
    let target = DVector::from_element(rows.len(), 1.0);
    let mut last_residual = f64::INFINITY;
    for k in order..=4 * order + 4 {
        let lattice = SymmetricBasis::new(d, k);
        let probs: Vec<Vec<f64>> = lattice
            .states()
            .iter()
            .map(|m| m.counts().iter().map(|&c| c as f64 / k as f64).collect())
            .collect();
        let a = DMatrix::from_fn(rows.len(), probs.len(), |r, c| {
            let n = rows.states()[r].counts();
            n.iter()
                .zip(&probs[c])
                .fold(multinomial(n), |acc, (&e, &p)| acc * p.powi(e as i32))
        });
        let sol = nnls(&a, &target);
        last_residual = sol.residual;
        if sol.residual > 1e-12 {
            continue;
        }
        let mut points = Vec::new();
        for (p, &w) in probs.iter().zip(sol.x.iter()) {
            if w <= 0.0 {
                continue;
            }
            points.extend(phase_orbit(p, order, w));
        }
        return Ok(WeightedFrame { order, points });
    }
    Err(Error::Infeasible {
        residual: last_residual,
        tolerance: 1e-12,
    })
}

/// States with moduli `sqrt(p)` and every grid phase on the support of `p`
/// (the first supported level keeps phase 0). The weight is split evenly.
fn phase_orbit(p: &[f64], order: usize, weight: f64) -> Vec<(PureState, f64)> {
    let support: Vec<usize> = (0..p.len()).filter(|&k| p[k] > 0.0).collect();
    let free = &support[1..];
    let grid = order + 1;
    let count = grid.pow(free.len() as u32);
    let w = weight / count as f64;
    (0..count)
        .map(|mut idx| {
            let mut amps = CVector::from_fn(p.len(), |k, _| Complex64::new(p[k].sqrt(), 0.0));
            for &k in free {
                let j = idx % grid;
                idx /= grid;
                amps[k] = Complex64::from_polar(p[k].sqrt(), 2.0 * PI * j as f64 / grid as f64);
            }
            (PureState::normalized(amps).expect("nonzero amplitudes"), w)
        })
        .collect()
}
