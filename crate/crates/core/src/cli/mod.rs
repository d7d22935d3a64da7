//! Command-line front end.
//!
//! Every subcommand produces a report (CSV or JSON) and an exit status:
//! [`EXIT_OK`] when every check in scope passed, [`EXIT_FAILED`] otherwise,
//! [`EXIT_USAGE`] for malformed arguments, [`EXIT_IO`] for file-system errors
//! and [`EXIT_SCHEMA`] for unreadable POVM files. Failures are also written to
//! stderr as one JSON object per line.
//!
//! Reports go to `--output` if given, else to `$QCLONING_OUT_DIR/<command>.<ext>`
//! if that variable is set, else to stdout.
//!
//! All randomness comes from `--seed`. The job for grid point `(d, N, K)` and
//! purpose `p` uses sub-seed `first_u64(stream(seed, job_id))` with
//! `job_id = d << 40 | N << 24 | K << 8 | p`, so results do not depend on
//! thread scheduling. Rows are always sorted by `(d, N, M/L)`.

pub mod format;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::cloner::{
    clone, clone_full_space, cloner_fidelity, cloner_fidelity_asymptotic, cloner_shrinking_factor,
    ClonerSpec,
};
use crate::error::{Error, Result};
use crate::estimator::frames::{pauli_eigenstates, tetrahedron};
use crate::estimator::{
    average_fidelity, build_covariant_povm, design_povm, estimation_fidelity_exact, haar_povm,
    measure_prepare_channel_eta, moment_resolution_residual, validate_povm, AverageMode, EtaMode,
    Povm,
};
use crate::io::{load_povm, povm_to_json};
use crate::linalg::max_abs_diff;
use crate::montecarlo::{haar_states, stream};
use crate::qudit::{
    bloch_from_density, build_generator_basis, fidelity_from_eta, Dimension, ShrinkingFactor,
};
use crate::symmetric::{reduce_single_particle, sym_dimension, symmetrizer, SymmetricState};
use crate::theorem::{
    clone_then_estimate, estimate_then_prepare_as_cloner, opposite_inequality_with,
    symmetric_input_extension,
};

use self::format::{parse_list, sig15};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QCLONING_OUT_DIR";

/// Full-space size up to which the cloner is cross-checked against the
/// explicit `S_M (rho x I) S_M` construction.
const ORACLE_LIMIT: usize = 729;

#[derive(Debug, Parser)]
#[command(
    name = "qcloning",
    version,
    about = "Optimal qudit cloning and state estimation laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report path (defaults to $QCLONING_OUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Tolerance for exact closed-form comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_exact: f64,

    /// Tolerance for derived identities (equality gap, multiplication law, matrices).
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_identity: f64,

    /// Number of standard errors allowed for Monte Carlo comparisons.
    #[arg(long, global = true, default_value_t = 3.0)]
    pub sigmas: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameKind {
    /// Phase-lattice design (deterministic, pointwise universal).
    Design,
    /// Haar-random frame with solved weights.
    Haar,
    /// Qubit Pauli eigenstates (d = 2, N = 1).
    Pauli,
    /// Qubit tetrahedron (d = 2, N = 1).
    Tetrahedron,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form cloner and estimation fidelities.
    Table {
        #[arg(long, default_value = "2,3")]
        d: String,
        #[arg(long, default_value = "1..3")]
        n: String,
        #[arg(long, default_value = "1..5")]
        m: String,
    },
    /// Simulate the optimal cloner and compare with its closed form.
    VerifyCloner {
        #[arg(long, default_value = "2,3")]
        d: String,
        #[arg(long, default_value = "1..3")]
        n: String,
        /// Output copy numbers (default N..N+3 for each N).
        #[arg(long)]
        m: Option<String>,
        /// Haar-random inputs per grid point.
        #[arg(long, default_value_t = 50)]
        probes: usize,
    },
    /// Build measurements and check their fidelity and shrinking factor.
    VerifyEstimation {
        #[arg(long, default_value = "2,3")]
        d: String,
        #[arg(long, default_value = "1..3")]
        n: String,
        /// Monte Carlo samples per measurement.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 50)]
        probes: usize,
    },
    /// Both bounds, the multiplication law and the symmetric-input extension.
    VerifyTheorem {
        #[arg(long, default_value = "2,3")]
        d: String,
        #[arg(long, default_value = "1..3")]
        n: String,
        /// Intermediate copy numbers (default N..N+3 for each N).
        #[arg(long)]
        l: Option<String>,
        #[arg(long, default_value_t = 8)]
        probes: usize,
    },
    /// Construct a complete measurement and write it as a POVM file.
    PovmBuild {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FrameKind::Design)]
        frame: FrameKind,
    },
    /// Load a POVM file and check positivity and completeness.
    PovmValidate { path: PathBuf },
}

/// A failed check, reported machine-readably.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub point: String,
    pub value: f64,
    pub tolerance: f64,
}

/// Rendered report plus the checks that failed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: &'static str,
    pub body: String,
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Serialize)]
struct JsonReport<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    tolerances: Tolerances,
    passed: bool,
    failures: &'a [Failure],
    records: &'a [T],
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Tolerances {
    exact: f64,
    identity: f64,
    sigmas: f64,
}

struct Checker {
    failures: Vec<Failure>,
}

impl Checker {
    fn new() -> Self {
        Checker {
            failures: Vec::new(),
        }
    }

    /// Records a failure unless `value <= tolerance`.
    fn at_most(&mut self, check: &str, point: &str, value: f64, tolerance: f64) -> bool {
        let ok = value <= tolerance;
        if !ok {
            self.failures.push(Failure {
                check: check.into(),
                point: point.into(),
                value,
                tolerance,
            });
        }
        ok
    }
}

fn dims(text: &str) -> Result<Vec<Dimension>> {
    parse_list(text)
        .map_err(Error::InvalidArgument)?
        .into_iter()
        .map(Dimension::new)
        .collect()
}

fn copies(text: &str) -> Result<Vec<usize>> {
    let v = parse_list(text).map_err(Error::InvalidArgument)?;
    if v.contains(&0) {
        return Err(Error::InvalidArgument(
            "copy numbers must be at least 1".into(),
        ));
    }
    Ok(v)
}

/// Output copy numbers for input count `n`: the explicit list filtered to
/// `>= n`, or `n..=n+3`.
fn targets(explicit: &Option<Vec<usize>>, n: usize) -> Vec<usize> {
    match explicit {
        Some(v) => v.iter().copied().filter(|&m| m >= n).collect(),
        None => (n..=n + 3).collect(),
    }
}

fn job_id(d: Dimension, n: usize, k: usize, purpose: u64) -> u64 {
    ((d.get() as u64) << 40) | ((n as u64) << 24) | ((k as u64) << 8) | purpose
}

fn sub_seed(root: u64, job: u64) -> u64 {
    stream(root, job).next_u64()
}

fn render<T: Serialize>(
    cli: &Cli,
    command: &'static str,
    records: &[T],
    failures: Vec<Failure>,
    csv_header: &str,
    csv_row: impl Fn(&T) -> Vec<String>,
) -> Outcome {
    let body = match cli.format {
        Format::Json => {
            let report = JsonReport {
                command,
                seed: cli.seed,
                tolerances: Tolerances {
                    exact: cli.tol_exact,
                    identity: cli.tol_identity,
                    sigmas: cli.sigmas,
                },
                passed: failures.is_empty(),
                failures: &failures,
                records,
            };
            let mut s = serde_json::to_string_pretty(&report).expect("plain data serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from(csv_header);
            s.push('\n');
            for r in records {
                s.push_str(&csv_row(r).join(","));
                s.push('\n');
            }
            s
        }
    };
    Outcome {
        command,
        body,
        failures,
    }
}

#[derive(Debug, Serialize)]
struct TableRow {
    d: usize,
    n: usize,
    m: usize,
    f_clone: f64,
    eta_clone: f64,
    f_est_asymptotic: f64,
}

fn table(cli: &Cli, d: &str, n: &str, m: &str) -> Result<Outcome> {
    let (ds, ns, ms) = (dims(d)?, copies(n)?, copies(m)?);
    let mut rows = Vec::new();
    for &d in &ds {
        for &n in &ns {
            for &m in ms.iter().filter(|&&m| m >= n) {
                let spec = ClonerSpec::new(d, n, m)?;
                rows.push(TableRow {
                    d: d.get(),
                    n,
                    m,
                    f_clone: cloner_fidelity(spec),
                    eta_clone: cloner_shrinking_factor(spec).get(),
                    f_est_asymptotic: cloner_fidelity_asymptotic(d, n),
                });
            }
        }
    }
    Ok(render(
        cli,
        "table",
        &rows,
        Vec::new(),
        "d,N,M,F_clone,eta_clone,F_est_asymptotic",
        |r| {
            vec![
                r.d.to_string(),
                r.n.to_string(),
                r.m.to_string(),
                sig15(r.f_clone),
                sig15(r.eta_clone),
                sig15(r.f_est_asymptotic),
            ]
        },
    ))
}

#[derive(Debug, Serialize)]
struct ClonerRow {
    d: usize,
    n: usize,
    m: usize,
    f_closed_form: f64,
    f_simulated_mean: f64,
    f_simulated_spread: f64,
    max_deviation: f64,
    eta_closed_form: f64,
    bloch_deviation: f64,
    max_trace_error: f64,
    /// `max |S_M rho S_M - rho|` of the full-space output, when small enough to build.
    support_deviation: Option<f64>,
}

fn verify_cloner(
    cli: &Cli,
    d: &str,
    n: &str,
    m: &Option<String>,
    probes: usize,
) -> Result<Outcome> {
    let (ds, ns) = (dims(d)?, copies(n)?);
    let explicit = m.as_deref().map(copies).transpose()?;
    let mut jobs = Vec::new();
    for &d in &ds {
        for &n in &ns {
            for m in targets(&explicit, n) {
                jobs.push(ClonerSpec::new(d, n, m)?);
            }
        }
    }
    let seed = cli.seed;
    let rows: Vec<Result<ClonerRow>> = jobs
        .par_iter()
        .map(|&spec| {
            let d = spec.dim();
            let (n, m) = (spec.inputs(), spec.outputs());
            let basis = build_generator_basis(d);
            let want = cloner_fidelity(spec);
            let eta = cloner_shrinking_factor(spec).get();
            let inputs = haar_states(d, probes.max(1), sub_seed(seed, job_id(d, n, m, 1)), 0);
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            let (mut worst, mut bloch, mut trace_err) = (0.0f64, 0.0f64, 0.0f64);
            let mut support = None;
            for (k, psi) in inputs.iter().enumerate() {
                let input = SymmetricState::product(psi, n)?;
                let out = clone(&input, m)?;
                let red = reduce_single_particle(&out);
                let f = crate::qudit::fidelity_pure(psi, &red)?;
                lo = lo.min(f);
                hi = hi.max(f);
                sum += f;
                worst = worst.max((f - want).abs());
                trace_err = trace_err.max((crate::linalg::trace(out.matrix()).re - 1.0).abs());
                let lin = bloch_from_density(&psi.projector(), &basis)?;
                let lout = bloch_from_density(&red, &basis)?;
                for (a, b) in lout.coords().iter().zip(lin.coords()) {
                    bloch = bloch.max((a - eta * b).abs());
                }
                let full = d.get().pow(m as u32);
                if k == 0 && full <= ORACLE_LIMIT {
                    let rho = clone_full_space(&input, m)?;
                    let s = symmetrizer(d, m)?;
                    support = Some(max_abs_diff(&(&s * &rho * &s), &rho));
                }
            }
            Ok(ClonerRow {
                d: d.get(),
                n,
                m,
                f_closed_form: want,
                f_simulated_mean: sum / inputs.len() as f64,
                f_simulated_spread: hi - lo,
                max_deviation: worst,
                eta_closed_form: eta,
                bloch_deviation: bloch,
                max_trace_error: trace_err,
                support_deviation: support,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut check = Checker::new();
    for r in &rows {
        let at = format!("d={},N={},M={}", r.d, r.n, r.m);
        check.at_most("cloner_fidelity", &at, r.max_deviation, cli.tol_exact);
        check.at_most(
            "cloner_universality",
            &at,
            r.f_simulated_spread,
            cli.tol_exact,
        );
        check.at_most("bloch_covariance", &at, r.bloch_deviation, cli.tol_exact);
        check.at_most("trace_preservation", &at, r.max_trace_error, 1e-12);
        if let Some(s) = r.support_deviation {
            check.at_most("symmetric_support", &at, s, 1e-10);
        }
    }
    Ok(render(
        cli,
        "verify-cloner",
        &rows,
        check.failures,
        "d,N,M,F_closed_form,F_simulated_mean,F_simulated_spread,max_deviation,eta_closed_form,bloch_deviation,max_trace_error,support_deviation",
        |r| {
            vec![
                r.d.to_string(),
                r.n.to_string(),
                r.m.to_string(),
                sig15(r.f_closed_form),
                sig15(r.f_simulated_mean),
                sig15(r.f_simulated_spread),
                sig15(r.max_deviation),
                sig15(r.eta_closed_form),
                sig15(r.bloch_deviation),
                sig15(r.max_trace_error),
                r.support_deviation.map(sig15).unwrap_or_default(),
            ]
        },
    ))
}

#[derive(Debug, Serialize)]
struct EstimationRow {
    d: usize,
    n: usize,
    frame: &'static str,
    outcomes: usize,
    completeness_residual: f64,
    min_weight: f64,
    weight_sum: f64,
    f_closed_form: f64,
    f_exact: f64,
    f_monte_carlo: f64,
    f_monte_carlo_std_error: f64,
    /// max - min of the pointwise fidelity over probes
    f_pointwise_spread: f64,
    moment_residual: f64,
    eta_mean: f64,
    eta_spread: f64,
    eta_std_error: f64,
}

/// Haar-frame measurements are built only up to this symmetric dimension.
const HAAR_FRAME_LIMIT: usize = 10;

fn verify_estimation(cli: &Cli, d: &str, n: &str, samples: u64, probes: usize) -> Result<Outcome> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let (ds, ns) = (dims(d)?, copies(n)?);
    let mut jobs = Vec::new();
    for &d in &ds {
        for &n in &ns {
            jobs.push((d, n, "design"));
            if sym_dimension(d, n) <= HAAR_FRAME_LIMIT {
                jobs.push((d, n, "haar"));
            }
        }
    }
    let seed = cli.seed;
    let rows: Vec<Result<EstimationRow>> = jobs
        .par_iter()
        .map(|&(d, n, frame)| {
            let povm = match frame {
                "design" => design_povm(d, n)?,
                _ => haar_povm(d, n, &mut stream(sub_seed(seed, job_id(d, n, 0, 2)), 0))?,
            };
            let report = validate_povm(&povm);
            let exact = average_fidelity(&povm, AverageMode::Exact).mean;
            let mc = average_fidelity(
                &povm,
                AverageMode::MonteCarlo {
                    samples,
                    seed: sub_seed(seed, job_id(d, n, 0, 3)),
                },
            );
            let probe_states = haar_states(d, probes.max(5), sub_seed(seed, job_id(d, n, 0, 4)), 0);
            let pointwise: Vec<f64> = probe_states
                .iter()
                .map(|psi| estimation_fidelity_exact(&povm, psi))
                .collect();
            let spread = pointwise.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - pointwise.iter().copied().fold(f64::INFINITY, f64::min);
            let eta = measure_prepare_channel_eta(&povm, &probe_states, EtaMode::Exact)?;
            Ok(EstimationRow {
                d: d.get(),
                n,
                frame,
                outcomes: povm.len(),
                completeness_residual: report.completeness_residual,
                min_weight: report.min_weight,
                weight_sum: report.weight_sum,
                f_closed_form: cloner_fidelity_asymptotic(d, n),
                f_exact: exact,
                f_monte_carlo: mc.mean,
                f_monte_carlo_std_error: mc.std_error,
                f_pointwise_spread: spread,
                moment_residual: moment_resolution_residual(&povm, n + 1),
                eta_mean: eta.eta_mean,
                eta_spread: eta.eta_spread,
                eta_std_error: eta.eta_std_error,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut check = Checker::new();
    for r in &rows {
        let at = format!("d={},N={},frame={}", r.d, r.n, r.frame);
        let d = Dimension::new(r.d)?;
        check.at_most("completeness", &at, r.completeness_residual, 1e-8);
        check.at_most("positivity", &at, -r.min_weight, 0.0);
        check.at_most(
            "exact_average_fidelity",
            &at,
            (r.f_exact - r.f_closed_form).abs(),
            cli.tol_exact,
        );
        // Design measurements have zero variance; allow round-off there.
        let mc_tol = (cli.sigmas * r.f_monte_carlo_std_error).max(1e-12);
        check.at_most(
            "monte_carlo_average",
            &at,
            (r.f_monte_carlo - r.f_exact).abs(),
            mc_tol,
        );
        if r.frame == "design" {
            check.at_most(
                "pointwise_universality",
                &at,
                r.f_pointwise_spread,
                cli.tol_identity,
            );
            check.at_most(
                "moment_resolution",
                &at,
                r.moment_residual,
                cli.tol_identity,
            );
            let f_eta = fidelity_from_eta(ShrinkingFactor(r.eta_mean), d);
            check.at_most(
                "channel_consistency",
                &at,
                (f_eta - r.f_exact).abs(),
                cli.tol_identity,
            );
        } else {
            let eta_star = crate::estimator::estimation_shrinking_factor(d, r.n).get();
            let tol = (cli.sigmas * r.eta_std_error).max(1e-12);
            check.at_most(
                "channel_eta_average",
                &at,
                (r.eta_mean - eta_star).abs(),
                tol,
            );
        }
    }
    Ok(render(
        cli,
        "verify-estimation",
        &rows,
        check.failures,
        "d,N,frame,outcomes,completeness_residual,min_weight,weight_sum,F_closed_form,F_exact,F_monte_carlo,F_monte_carlo_std_error,F_pointwise_spread,moment_residual,eta_mean,eta_spread,eta_std_error",
        |r| {
            vec![
                r.d.to_string(),
                r.n.to_string(),
                r.frame.to_string(),
                r.outcomes.to_string(),
                sig15(r.completeness_residual),
                sig15(r.min_weight),
                sig15(r.weight_sum),
                sig15(r.f_closed_form),
                sig15(r.f_exact),
                sig15(r.f_monte_carlo),
                sig15(r.f_monte_carlo_std_error),
                sig15(r.f_pointwise_spread),
                sig15(r.moment_residual),
                sig15(r.eta_mean),
                sig15(r.eta_spread),
                sig15(r.eta_std_error),
            ]
        },
    ))
}

#[derive(Debug, Serialize)]
struct TheoremRow {
    d: usize,
    n: usize,
    l: usize,
    eta_clone: f64,
    eta_estimate: f64,
    eta_total: f64,
    multiplication_gap: f64,
    total_fidelity: f64,
    /// `|total_fidelity - (N + 1)/(N + d)|`
    l_independence_gap: f64,
    /// `F_clone(N, L) - F(estimate N, prepare L)`
    estimate_prepare_slack: f64,
    /// `F_est(N) - F_clone(N, infinity)`
    asymptotic_slack: f64,
    /// `|F_est(N) - F_clone(N, infinity)|`
    equality_gap: f64,
    /// Max-norm distance of the channel output on the cloner's entangled state
    /// from the shrunk reduced state.
    extension_deviation: f64,
}

fn verify_theorem(
    cli: &Cli,
    d: &str,
    n: &str,
    l: &Option<String>,
    probes: usize,
) -> Result<Outcome> {
    let (ds, ns) = (dims(d)?, copies(n)?);
    let explicit = l.as_deref().map(copies).transpose()?;
    let mut jobs = Vec::new();
    for &d in &ds {
        for &n in &ns {
            for l in targets(&explicit, n) {
                ClonerSpec::new(d, n, l)?;
                crate::symmetric::check_full_space(d, l)?;
                jobs.push((d, n, l));
            }
        }
    }
    let seed = cli.seed;
    let rows: Vec<Result<TheoremRow>> = jobs
        .par_iter()
        .map(|&(d, n, l)| {
            let probe_states = haar_states(d, probes.max(5), sub_seed(seed, job_id(d, n, l, 5)), 0);
            let povm_n = design_povm(d, n)?;
            let povm_l = design_povm(d, l)?;
            let concat = clone_then_estimate(d, n, l, &povm_l, &probe_states)?;
            let est_prep = estimate_then_prepare_as_cloner(d, n, l, &povm_n, &probe_states)?;
            let opposite = opposite_inequality_with(&povm_n)?;
            let cloned = clone(&SymmetricState::product(&probe_states[0], n)?, l)?;
            let ext = symmetric_input_extension(d, l, &povm_l, &cloned)?;
            let target = cloner_fidelity_asymptotic(d, n);
            Ok(TheoremRow {
                d: d.get(),
                n,
                l,
                eta_clone: concat.eta_clone,
                eta_estimate: concat.eta_estimate,
                eta_total: concat.eta_total,
                multiplication_gap: concat.multiplication_gap(),
                total_fidelity: concat.total_fidelity,
                l_independence_gap: (concat.total_fidelity - target).abs(),
                estimate_prepare_slack: est_prep.slack,
                asymptotic_slack: opposite.slack,
                equality_gap: (opposite.rhs - opposite.lhs).abs(),
                extension_deviation: ext.max_deviation,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut check = Checker::new();
    for r in &rows {
        let at = format!("d={},N={},L={}", r.d, r.n, r.l);
        check.at_most(
            "estimate_prepare_bound",
            &at,
            -r.estimate_prepare_slack,
            cli.tol_exact,
        );
        check.at_most("asymptotic_bound", &at, -r.asymptotic_slack, cli.tol_exact);
        check.at_most("equality_gap", &at, r.equality_gap, cli.tol_identity);
        check.at_most(
            "multiplication_law",
            &at,
            r.multiplication_gap,
            cli.tol_identity,
        );
        check.at_most(
            "l_independence",
            &at,
            r.l_independence_gap,
            cli.tol_identity,
        );
        check.at_most(
            "symmetric_extension",
            &at,
            r.extension_deviation,
            cli.tol_identity,
        );
    }
    Ok(render(
        cli,
        "verify-theorem",
        &rows,
        check.failures,
        "d,N,L,eta_clone,eta_estimate,eta_total,multiplication_gap,total_fidelity,l_independence_gap,estimate_prepare_slack,asymptotic_slack,equality_gap,extension_deviation",
        |r| {
            vec![
                r.d.to_string(),
                r.n.to_string(),
                r.l.to_string(),
                sig15(r.eta_clone),
                sig15(r.eta_estimate),
                sig15(r.eta_total),
                sig15(r.multiplication_gap),
                sig15(r.total_fidelity),
                sig15(r.l_independence_gap),
                sig15(r.estimate_prepare_slack),
                sig15(r.asymptotic_slack),
                sig15(r.equality_gap),
                sig15(r.extension_deviation),
            ]
        },
    ))
}

fn build_povm(cli: &Cli, d: usize, n: usize, frame: FrameKind) -> Result<Povm> {
    let dim = Dimension::new(d)?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "copy number must be at least 1".into(),
        ));
    }
    let qubit_only = |name: &str| -> Result<()> {
        if d != 2 || n != 1 {
            return Err(Error::InvalidArgument(format!(
                "{name} frame needs d = 2, N = 1"
            )));
        }
        Ok(())
    };
    match frame {
        FrameKind::Design => design_povm(dim, n),
        FrameKind::Haar => haar_povm(
            dim,
            n,
            &mut stream(sub_seed(cli.seed, job_id(dim, n, 0, 6)), 0),
        ),
        FrameKind::Pauli => {
            qubit_only("pauli")?;
            build_covariant_povm(dim, 1, &pauli_eigenstates())
        }
        FrameKind::Tetrahedron => {
            qubit_only("tetrahedron")?;
            build_covariant_povm(dim, 1, &tetrahedron())
        }
    }
}

#[derive(Debug, Serialize)]
struct ValidationRow {
    d: usize,
    n: usize,
    outcomes: usize,
    completeness_residual: f64,
    min_weight: f64,
    weight_sum: f64,
    expected_weight_sum: f64,
    passed: bool,
}

fn povm_validate(cli: &Cli, path: &Path) -> Result<Outcome> {
    let povm = load_povm(path)?;
    let r = validate_povm(&povm);
    let row = ValidationRow {
        d: povm.dim().get(),
        n: povm.copies(),
        outcomes: povm.len(),
        completeness_residual: r.completeness_residual,
        min_weight: r.min_weight,
        weight_sum: r.weight_sum,
        expected_weight_sum: r.expected_weight_sum,
        passed: r.passed,
    };
    let mut check = Checker::new();
    let at = path.display().to_string();
    check.at_most(
        "completeness",
        &at,
        r.completeness_residual,
        crate::estimator::COMPLETENESS_TOL,
    );
    check.at_most("positivity", &at, -r.min_weight, 0.0);
    Ok(render(
        cli,
        "povm-validate",
        &[row],
        check.failures,
        "d,N,outcomes,completeness_residual,min_weight,weight_sum,expected_weight_sum,passed",
        |r| {
            vec![
                r.d.to_string(),
                r.n.to_string(),
                r.outcomes.to_string(),
                sig15(r.completeness_residual),
                sig15(r.min_weight),
                sig15(r.weight_sum),
                sig15(r.expected_weight_sum),
                r.passed.to_string(),
            ]
        },
    ))
}

/// Runs a parsed command and renders its report without writing it anywhere.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Table { d, n, m } => table(cli, d, n, m),
        Command::VerifyCloner { d, n, m, probes } => verify_cloner(cli, d, n, m, *probes),
        Command::VerifyEstimation {
            d,
            n,
            samples,
            probes,
        } => verify_estimation(cli, d, n, *samples, *probes),
        Command::VerifyTheorem { d, n, l, probes } => verify_theorem(cli, d, n, l, *probes),
        Command::PovmBuild { d, n, frame } => {
            let povm = build_povm(cli, *d, *n, *frame)?;
            let r = validate_povm(&povm);
            let mut check = Checker::new();
            check.at_most(
                "completeness",
                &format!("d={d},N={n}"),
                r.completeness_residual,
                crate::estimator::COMPLETENESS_TOL,
            );
            Ok(Outcome {
                command: "povm-build",
                body: povm_to_json(&povm),
                failures: check.failures,
            })
        }
        Command::PovmValidate { path } => povm_validate(cli, path),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Schema(_) => EXIT_SCHEMA,
        _ => EXIT_USAGE,
    }
}

fn write_report(cli: &Cli, outcome: &Outcome) -> std::io::Result<()> {
    let ext = match cli.command {
        Command::PovmBuild { .. } => "json",
        _ => cli.format.extension(),
    };
    let path = match (&cli.output, std::env::var_os(OUT_DIR_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(format!("{}.{ext}", outcome.command))),
        (None, None) => None,
    };
    match path {
        Some(p) => std::fs::write(p, &outcome.body),
        None => std::io::stdout().write_all(outcome.body.as_bytes()),
    }
}

/// Runs a parsed command, writes the report and returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    if let Err(e) = write_report(cli, &outcome) {
        eprintln!("error: {e}");
        return EXIT_IO;
    }
    for f in &outcome.failures {
        eprintln!(
            "{}",
            serde_json::to_string(f).expect("plain data serializes")
        );
    }
    if outcome.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
