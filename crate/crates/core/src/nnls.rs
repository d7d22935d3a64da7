//! Nonnegative least squares (Lawson-Hanson active set).

use nalgebra::{DMatrix, DVector};

/// Solution of `min |A x - b|` subject to `x >= 0`.
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(passive);
    let svd = sub.svd(true, true);
    svd.solve(b, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(passive.len()))
}

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    let max_outer = 3 * n + 10;
    let scale = a.amax().max(1.0) * b.amax().max(1.0);
    let tol = 1e-13 * scale * (a.nrows().max(n) as f64);

    let mut x = DVector::<f64>::zeros(n);
    let mut in_passive = vec![false; n];
    let mut iterations = 0;

    loop {
        let w = a.tr_mul(&(b - a * &x));
        let candidate = (0..n)
            .filter(|&j| !in_passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        if w[j] <= tol || iterations >= max_outer {
            break;
        }
        in_passive[j] = true;
        iterations += 1;

        loop {
            let passive: Vec<usize> = (0..n).filter(|&i| in_passive[i]).collect();
            let z = solve_passive(a, b, &passive);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &i) in passive.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            // Step from x towards z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for (k, &i) in passive.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[i] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            for (k, &i) in passive.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
            }
            let mut moved = false;
            for &i in &passive {
                if x[i] <= 1e-15 * scale {
                    x[i] = 0.0;
                    in_passive[i] = false;
                    moved = true;
                }
            }
            if !moved {
                // Numerical stall: drop the most negative direction.
                let worst = passive
                    .iter()
                    .enumerate()
                    .min_by(|a, b| z[a.0].total_cmp(&z[b.0]))
                    .map(|(_, &i)| i);
                if let Some(i) = worst {
                    x[i] = 0.0;
                    in_passive[i] = false;
                }
            }
            if !in_passive.iter().any(|&p| p) {
                break;
            }
        }
    }

    let residual = (a * &x - b).norm();
    NnlsSolution {
        x,
        residual,
        iterations,
    }
}
