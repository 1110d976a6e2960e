//! Command-line front end.
//!
//! Every subcommand writes JSON (default) or CSV to stdout or `--out`, and
//! diagnostics to stderr. Exit status: 0 on success, 1 when the input is
//! rejected, 2 when a computed check fails. The worker thread count can be
//! fixed with the `BLOCH_THREADS` environment variable.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::angular::{spectrum_exact, spectrum_with_derivative};
use crate::error::{Error, Result};
use crate::metrology::{
    j2_efficiency_ratio, j2_error_propagation, j2_moments, qfi_closed_form, reference_epsilon,
    weighted_mse_table, Weights,
};
use crate::multiport::{
    conjecture::{ConjectureMode, FULL_MODE_MAX},
    fock::Statistics,
    ratio::{signature_ratio, RatioOptions},
    signatures::{signature_set, tau0_state, tau1_state, StateVector, ZeroTest},
};
use crate::parametrization::{MonotoneTable, Parametrization};
use crate::serialize::{emit, fmt17, opt_f64_17, to_json, Table};
use crate::simulate::{
    mse_experiment, run as run_simulation, MseExperiment, SampleConfig, Strategy,
};
use crate::spin::HalfInt;
use crate::states::{
    angular_eigenbasis, build_density, density_derivative, sld_numeric, BlochState, Parameter,
};

pub const THREADS_ENV: &str = "BLOCH_THREADS";

/// Largest N for which `qfi` also solves for the SLD numerically.
const NUMERIC_QFI_MAX: usize = 6;
const QFI_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(
    name = "blochjoint",
    version,
    about = "Joint estimation of Bloch-vector length and direction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum Fisher information, closed form and numerical SLD.
    Qfi {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, value_enum, default_value = "both")]
        which: Which,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distribution over total angular momentum j.
    Spectrum {
        #[arg(long = "n")]
        n: usize,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Moments of J² and the error-propagation MSE.
    Moments {
        #[arg(long = "n")]
        n: usize,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Weighted precision curves over N, optionally with Monte Carlo columns.
    MseCurve {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        /// Weight of the ε error; φ gets the complement.
        #[arg(long, default_value_t = 0.5)]
        w_epsilon: f64,
        #[arg(long)]
        monte_carlo: bool,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Output signature set of a named multiport input.
    Signatures {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, value_enum)]
        input: InputKind,
        /// 1-based port carrying V for `tau1`.
        #[arg(long, default_value_t = 1)]
        flipped: usize,
        /// Quantum numbers of an `eigen` input, e.g. 3/2.
        #[arg(long, allow_hyphen_values = true)]
        j: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<String>,
        #[arg(long)]
        g: Option<usize>,
        #[arg(long, value_enum, default_value = "boson")]
        statistics: Statistics,
        /// exact, float or float(<tolerance>).
        #[arg(long)]
        zero_test: Option<ZeroTest>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Disjointness check of the top two angular-momentum signature sets.
    Conjecture {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, value_enum, default_value = "boson")]
        statistics: Statistics,
        /// Defaults to full up to N = 6 and tau-only above.
        #[arg(long, value_enum)]
        mode: Option<ConjectureMode>,
        #[arg(long)]
        long: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fraction of bosonic signatures reached by a single-flip input.
    Ratio {
        #[arg(long = "n")]
        n: usize,
        /// Required for N ≥ 9.
        #[arg(long)]
        long: bool,
        #[arg(long)]
        zero_test: Option<ZeroTest>,
        /// JSON file used to save and resume progress.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 2048)]
        chunk_size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimation runs.
    Simulate {
        /// One or more N, comma separated.
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value = "j2_lphi")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0.5)]
        w_epsilon: f64,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Epsilon,
    Phi,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Tau0,
    Tau1,
    Eigen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParametrizationName {
    #[value(name = "default_quadratic")]
    DefaultQuadratic,
    #[value(name = "identity")]
    Identity,
    #[value(name = "custom-table")]
    CustomTable,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[arg(long, conflicts_with = "s")]
    pub epsilon: Option<f64>,
    /// Bloch-vector length; selects the identity parametrization unless
    /// --parametrization says otherwise.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, value_enum)]
    pub parametrization: Option<ParametrizationName>,
    /// Two-column (epsilon, s) CSV for custom-table.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

impl StateArgs {
    fn parametrization(&self) -> Result<Parametrization> {
        let name = self.parametrization.unwrap_or(if self.s.is_some() {
            ParametrizationName::Identity
        } else {
            ParametrizationName::DefaultQuadratic
        });
        if self.table.is_some() && name != ParametrizationName::CustomTable {
            return Err(Error::Invalid(
                "--table only applies to --parametrization custom-table".into(),
            ));
        }
        Ok(match name {
            ParametrizationName::DefaultQuadratic => Parametrization::Quadratic,
            ParametrizationName::Identity => Parametrization::Identity,
            ParametrizationName::CustomTable => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("custom-table needs --table <csv>".into()))?;
                Parametrization::Table(MonotoneTable::from_csv(path)?)
            }
        })
    }

    /// The state described by the flags; `fallback_epsilon` applies when
    /// neither --epsilon nor --s is given.
    pub fn resolve(&self, fallback_epsilon: Option<f64>) -> Result<BlochState> {
        let p = self.parametrization()?;
        let epsilon = match (self.epsilon, self.s) {
            (Some(e), None) => e,
            (None, Some(s)) => p.s_inverse(s)?,
            (None, None) => fallback_epsilon
                .ok_or_else(|| Error::Invalid("one of --epsilon or --s is required".into()))?,
            (Some(_), Some(_)) => {
                return Err(Error::Invalid(
                    "--epsilon and --s are mutually exclusive".into(),
                ))
            }
        };
        BlochState::new(epsilon, self.phi, p)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 100_000)]
    pub nu: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// What a subcommand produced.
pub struct Report {
    pub json: String,
    pub table: Table,
    /// False when a computed check failed.
    pub passed: bool,
    /// One-line human summary for stderr.
    pub summary: Option<String>,
}

impl Report {
    fn new<T: Serialize>(value: &T, table: Table) -> Result<Self> {
        Ok(Self {
            json: to_json(value)?,
            table,
            passed: true,
            summary: None,
        })
    }
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn counts_cell(c: &[u32]) -> String {
    c.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct QfiRow {
    #[serde(rename = "N")]
    n: usize,
    which: Parameter,
    #[serde(serialize_with = "opt_f64_17")]
    value: Option<f64>,
    #[serde(serialize_with = "opt_f64_17")]
    numeric: Option<f64>,
    /// |numeric − closed form| / closed form.
    #[serde(serialize_with = "opt_f64_17")]
    residual: Option<f64>,
}

fn qfi(n: usize, which: Which, state: &BlochState) -> Result<Report> {
    let params: &[Parameter] = match which {
        Which::Epsilon => &[Parameter::Epsilon],
        Which::Phi => &[Parameter::Phi],
        Which::Both => &[Parameter::Epsilon, Parameter::Phi],
    };
    let rho = if n <= NUMERIC_QFI_MAX {
        Some(build_density(state, n)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &p in params {
        let value = qfi_closed_form(state, n, p)?.value;
        let numeric = match &rho {
            Some(rho) => {
                let l = sld_numeric(rho, &density_derivative(state, n, p)?)?;
                let l = l.matrix();
                Some(rho.expectation(&(l * l)).re)
            }
            None => None,
        };
        let residual = numeric.map(|x| {
            if value == 0.0 {
                x.abs()
            } else {
                (x - value).abs() / value
            }
        });
        rows.push(QfiRow {
            n,
            which: p,
            value: Some(value),
            numeric,
            residual,
        });
    }
    let mut table = Table::new(["N", "which", "value", "numeric", "residual"]);
    for r in &rows {
        table.push(vec![
            r.n.to_string(),
            r.which.to_string(),
            opt17(r.value),
            opt17(r.numeric),
            opt17(r.residual),
        ]);
    }
    let mut report = Report::new(&rows, table)?;
    report.passed = rows
        .iter()
        .all(|r| r.residual.is_none_or(|x| x <= QFI_RESIDUAL_TOL));
    if !report.passed {
        report.summary = Some(format!(
            "closed form and numerical SLD disagree beyond {QFI_RESIDUAL_TOL:e}"
        ));
    }
    Ok(report)
}

#[derive(Serialize)]
struct SpectrumRow {
    j: HalfInt,
    mu: u128,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    p: f64,
    #[serde(serialize_with = "opt_f64_17")]
    dp_depsilon: Option<f64>,
}

fn spectrum(n: usize, state: &BlochState) -> Result<Report> {
    let sp = spectrum_exact(state, n)?;
    let derivative = spectrum_with_derivative(state, n).ok();
    let rows: Vec<SpectrumRow> = sp
        .entries
        .iter()
        .enumerate()
        .map(|(k, e)| SpectrumRow {
            j: e.j,
            mu: e.mu,
            p: e.p,
            dp_depsilon: derivative.as_ref().map(|d| d[k].2),
        })
        .collect();
    let mut table = Table::new(["j", "mu", "p", "dp_depsilon"]);
    for r in &rows {
        table.push(vec![
            r.j.to_string(),
            r.mu.to_string(),
            fmt17(r.p),
            opt17(r.dp_depsilon),
        ]);
    }
    Report::new(&rows, table)
}

#[derive(Serialize)]
struct MomentsOut {
    #[serde(rename = "N")]
    n: usize,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    s: f64,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    mean_j2: f64,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    mean_j2sq: f64,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    d_mean_j2: f64,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    variance: f64,
    /// ν Δ²ε̂ of the J² estimator.
    #[serde(serialize_with = "opt_f64_17")]
    error_propagation: Option<f64>,
    #[serde(serialize_with = "opt_f64_17")]
    inverse_qfi: Option<f64>,
    #[serde(serialize_with = "opt_f64_17")]
    efficiency_ratio: Option<f64>,
}

fn moments(n: usize, state: &BlochState) -> Result<Report> {
    let m = j2_moments(state, n)?;
    let error_propagation = if n >= 2 {
        j2_error_propagation(state, n).ok()
    } else {
        None
    };
    let inverse_qfi = qfi_closed_form(state, n, Parameter::Epsilon)
        .ok()
        .filter(|f| f.value > 0.0)
        .map(|f| 1.0 / f.value);
    let s = state.s();
    let out = MomentsOut {
        n,
        s,
        mean_j2: m.mean_j2,
        mean_j2sq: m.mean_j2sq,
        d_mean_j2: m.d_mean_j2,
        variance: m.variance,
        error_propagation,
        inverse_qfi,
        efficiency_ratio: (n >= 2 && s > 0.0).then(|| j2_efficiency_ratio(s, n)),
    };
    let mut table = Table::new([
        "N",
        "s",
        "mean_j2",
        "mean_j2sq",
        "d_mean_j2",
        "variance",
        "error_propagation",
        "inverse_qfi",
        "efficiency_ratio",
    ]);
    table.push(vec![
        n.to_string(),
        fmt17(s),
        fmt17(out.mean_j2),
        fmt17(out.mean_j2sq),
        fmt17(out.d_mean_j2),
        fmt17(out.variance),
        opt17(out.error_propagation),
        opt17(out.inverse_qfi),
        opt17(out.efficiency_ratio),
    ]);
    Report::new(&out, table)
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    collective: f64,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    ultimate: f64,
    #[serde(serialize_with = "crate::serialize::f64_17")]
    split: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<crate::simulate::MseRow>,
}

fn mse_curve(
    n_min: usize,
    n_max: usize,
    w_epsilon: f64,
    mc: Option<&SamplingArgs>,
    state: &BlochState,
) -> Result<Report> {
    if n_min < 2 || n_max < n_min {
        return Err(Error::Invalid(format!(
            "need 2 ≤ n-min ≤ n-max, got {n_min}..{n_max}"
        )));
    }
    let weights = Weights::new(w_epsilon, 1.0 - w_epsilon)?;
    let analytic = weighted_mse_table(
        state.parametrization(),
        state.epsilon(),
        n_min..=n_max,
        weights,
    )?;
    let simulated = match mc {
        Some(args) => Some(mse_experiment(&MseExperiment {
            parametrization: state.parametrization().clone(),
            epsilon: state.epsilon(),
            phi: state.phi(),
            ns: (n_min..=n_max).collect(),
            nu: args.nu,
            seed: args.seed,
            replicates: args.replicates,
            weights,
        })?),
        None => None,
    };
    let rows: Vec<CurveRow> = analytic
        .into_iter()
        .enumerate()
        .map(|(k, a)| CurveRow {
            n: a.n,
            collective: a.collective,
            ultimate: a.ultimate,
            split: a.split,
            monte_carlo: simulated.as_ref().map(|s| s[k].clone()),
        })
        .collect();
    let mut header = vec!["N", "collective", "ultimate", "split"];
    if simulated.is_some() {
        header.extend([
            "mc_weighted",
            "mc_weighted_stderr",
            "mc_epsilon",
            "mc_epsilon_stderr",
            "mc_phi",
            "mc_phi_stderr",
        ]);
    }
    let mut table = Table::new(header);
    for r in &rows {
        let mut cells = vec![
            r.n.to_string(),
            fmt17(r.collective),
            fmt17(r.ultimate),
            fmt17(r.split),
        ];
        if let Some(m) = &r.monte_carlo {
            cells.extend(
                [
                    m.empirical_weighted,
                    m.stderr_weighted,
                    m.empirical_eps,
                    m.stderr_eps,
                    m.empirical_phi,
                    m.stderr_phi,
                ]
                .map(fmt17),
            );
        }
        table.push(cells);
    }
    Report::new(&rows, table)
}

#[allow(clippy::too_many_arguments)]
fn signatures(
    n: usize,
    input: InputKind,
    flipped: usize,
    j: Option<&str>,
    m: Option<&str>,
    g: Option<usize>,
    statistics: Statistics,
    zero_test: Option<ZeroTest>,
) -> Result<Report> {
    let vector = match input {
        InputKind::Tau0 => StateVector::basis(tau0_state(n)?),
        InputKind::Tau1 => {
            if flipped == 0 || flipped > n {
                return Err(Error::Invalid(format!("--flipped must be in 1..={n}")));
            }
            StateVector::basis(tau1_state(n, flipped - 1)?)
        }
        InputKind::Eigen => {
            let parse = |name: &str, v: Option<&str>| -> Result<HalfInt> {
                let v = v.ok_or_else(|| Error::Invalid(format!("eigen input needs --{name}")))?;
                HalfInt::parse(v)
                    .ok_or_else(|| Error::Invalid(format!("--{name} {v} is not a half-integer")))
            };
            let (j, m) = (parse("j", j)?, parse("m", m)?);
            let g = g.ok_or_else(|| Error::Invalid("eigen input needs --g".into()))?;
            let ket = angular_eigenbasis(n)?
                .into_iter()
                .find(|k| k.j == j && k.m == m && k.g == g)
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "no eigenket |j = {j}, m = {m}, g = {g}⟩ for N = {n}"
                    ))
                })?;
            StateVector::from_qubit_vector(n, &ket.vector)?
        }
    };
    let zero_test = zero_test.unwrap_or(if vector.as_basis_state().is_some() && n <= 8 {
        ZeroTest::Exact
    } else {
        ZeroTest::float()
    });
    let set = signature_set(n, &vector, statistics, zero_test)?;
    let mut table = Table::new(["counts", "pattern", "probability", "exact"]);
    for e in &set.entries {
        table.push(vec![
            counts_cell(&e.counts),
            counts_cell(&e.pattern),
            fmt17(e.probability),
            e.exact.clone().unwrap_or_default(),
        ]);
    }
    let mut report = Report::new(&set, table)?;
    if let Some(a) = &set.agreement {
        if !a.unambiguous() {
            report.summary = Some(format!(
                "warning: float magnitudes near the zero threshold (max over exact zeros {:e}, min over non-zeros {:e})",
                a.max_zero_magnitude, a.min_nonzero_magnitude
            ));
        }
    }
    Ok(report)
}

fn conjecture(
    n: usize,
    statistics: Statistics,
    mode: Option<ConjectureMode>,
    long: bool,
) -> Result<Report> {
    let mode = mode.unwrap_or(if n <= FULL_MODE_MAX {
        ConjectureMode::Full
    } else {
        ConjectureMode::TauOnly
    });
    let r = crate::multiport::conjecture_check(n, statistics, mode, long)?;
    let mut table = Table::new(["set", "counts", "pattern"]);
    for (name, set) in [("S0", &r.s0), ("S1", &r.s1), ("S1\\S0", &r.s1_minus_s0)] {
        for c in set {
            table.push(vec![
                name.to_string(),
                counts_cell(c),
                counts_cell(&crate::multiport::fock::pattern_of(c)),
            ]);
        }
    }
    let mut report = Report::new(&r, table)?;
    report.passed = r.passed;
    let show = |ps: &[Vec<u32>]| {
        ps.iter()
            .map(|p| format!("({})", counts_cell(p).replace(' ', ",")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    report.summary = Some(format!(
        "{}: S0 patterns {{{}}}, S1\\S0 patterns {{{}}}{}",
        if r.passed { "PASS" } else { "FAIL" },
        show(&r.s0_patterns),
        show(&r.s1_minus_s0_patterns),
        r.failures
            .iter()
            .map(|f| format!("\n  {f}"))
            .collect::<String>()
    ));
    Ok(report)
}

fn ratio(n: usize, options: &RatioOptions) -> Result<Report> {
    let r = signature_ratio(n, options)?;
    let mut table = Table::new(["N", "members", "total", "unreduced", "reduced", "fraction"]);
    table.push(vec![
        n.to_string(),
        r.members.to_string(),
        r.total.to_string(),
        r.unreduced.clone(),
        r.reduced.clone(),
        fmt17(r.fraction),
    ]);
    let mut report = Report::new(&r, table)?;
    report.summary = Some(r.unreduced.clone());
    Ok(report)
}

fn simulate(
    ns: &[usize],
    strategy: Strategy,
    w_epsilon: f64,
    args: &SamplingArgs,
    state: &BlochState,
) -> Result<Report> {
    if strategy == Strategy::J2Lphi {
        let weights = Weights::new(w_epsilon, 1.0 - w_epsilon)?;
        let rows = mse_experiment(&MseExperiment {
            parametrization: state.parametrization().clone(),
            epsilon: state.epsilon(),
            phi: state.phi(),
            ns: ns.to_vec(),
            nu: args.nu,
            seed: args.seed,
            replicates: args.replicates,
            weights,
        })?;
        let mut table = Table::new([
            "N",
            "empirical_eps",
            "stderr_eps",
            "empirical_phi",
            "stderr_phi",
            "empirical_weighted",
            "stderr_weighted",
            "theory_eps",
            "theory_phi",
            "collective",
            "ultimate",
            "split",
            "clamp_events",
        ]);
        for r in &rows {
            let mut cells = vec![r.n.to_string()];
            cells.extend(
                [
                    r.empirical_eps,
                    r.stderr_eps,
                    r.empirical_phi,
                    r.stderr_phi,
                    r.empirical_weighted,
                    r.stderr_weighted,
                    r.theory_eps,
                    r.theory_phi,
                    r.collective,
                    r.ultimate,
                    r.split,
                ]
                .map(fmt17),
            );
            cells.push(r.clamp_events.to_string());
            table.push(cells);
        }
        return Report::new(&rows, table);
    }
    let reports = ns
        .iter()
        .map(|&n| {
            let config = SampleConfig::new(state.clone(), n, args.nu, args.seed, strategy)
                .with_replicates(args.replicates);
            run_simulation(&config)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new([
        "N",
        "parameter",
        "empirical_mse",
        "stderr",
        "theory_mse",
        "crb",
        "clamp_events",
    ]);
    for rep in &reports {
        for r in [&rep.epsilon, &rep.phi].into_iter().flatten() {
            table.push(vec![
                rep.n.to_string(),
                r.parameter.to_string(),
                fmt17(r.empirical_mse),
                fmt17(r.stderr),
                fmt17(r.theory_mse),
                fmt17(r.crb),
                r.clamp_events.to_string(),
            ]);
        }
    }
    Report::new(&reports, table)
}

/// Runs a parsed command and returns its report without printing it.
pub fn execute(command: &Command) -> Result<(Report, &OutputArgs)> {
    let report = match command {
        Command::Qfi {
            n,
            which,
            state,
            output,
        } => (qfi(*n, *which, &state.resolve(None)?)?, output),
        Command::Spectrum { n, state, output } => (spectrum(*n, &state.resolve(None)?)?, output),
        Command::Moments { n, state, output } => (moments(*n, &state.resolve(None)?)?, output),
        Command::MseCurve {
            n_min,
            n_max,
            w_epsilon,
            monte_carlo,
            sampling,
            state,
            output,
        } => {
            let st = state.resolve(Some(reference_epsilon()))?;
            (
                mse_curve(
                    *n_min,
                    *n_max,
                    *w_epsilon,
                    monte_carlo.then_some(sampling),
                    &st,
                )?,
                output,
            )
        }
        Command::Signatures {
            n,
            input,
            flipped,
            j,
            m,
            g,
            statistics,
            zero_test,
            output,
        } => (
            signatures(
                *n,
                *input,
                *flipped,
                j.as_deref(),
                m.as_deref(),
                *g,
                *statistics,
                *zero_test,
            )?,
            output,
        ),
        Command::Conjecture {
            n,
            statistics,
            mode,
            long,
            output,
        } => (conjecture(*n, *statistics, *mode, *long)?, output),
        Command::Ratio {
            n,
            long,
            zero_test,
            checkpoint,
            chunk_size,
            output,
        } => {
            let options = RatioOptions {
                long: *long,
                zero_test: *zero_test,
                checkpoint: checkpoint.clone(),
                chunk_size: *chunk_size,
                max_chunks: None,
            };
            (ratio(*n, &options)?, output)
        }
        Command::Simulate {
            n,
            strategy,
            w_epsilon,
            sampling,
            state,
            output,
        } => {
            let st = state.resolve(Some(reference_epsilon()))?;
            (simulate(n, *strategy, *w_epsilon, sampling, &st)?, output)
        }
    };
    Ok(report)
}

fn configure_threads() -> Result<()> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let threads: usize = text.trim().parse().ok().filter(|t| *t > 0).ok_or_else(|| {
            Error::Invalid(format!(
                "{THREADS_ENV} must be a positive integer, got '{text}'"
            ))
        })?;
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = configure_threads().and_then(|_| {
        let (report, output) = execute(&cli.command)?;
        let text = match output.format {
            Format::Json => report.json.clone(),
            Format::Csv => report.table.to_csv()?,
        };
        emit(&text, output.out.as_deref())?;
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            if let Some(s) = &report.summary {
                eprintln!("{s}");
            }
            if report.passed {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
