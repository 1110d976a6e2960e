//! Monte Carlo sampling of the measurement strategies and their estimators.
//!
//! A run draws `replicates` independent datasets, each made of ν repetitions
//! of the N-qubit experiment, estimates the parameter from every dataset and
//! reports the ν-normalized mean squared error ν·mean_r(θ̂_r − θ)² against
//! the true value, with a bootstrap standard error over replicates.
//!
//! Every replicate draws from its own ChaCha8 stream (stream = replicate
//! index; per-repetition sampling uses replicate·2³² + repetition), so
//! results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{spectrum_exact, AngularSpectrum, MAX_SPECTRUM_QUBITS};
use crate::error::{check_size, Error, Result};
use crate::metrology::{j2_error_propagation, qfi_closed_form, weighted_mse_table, Weights};
use crate::multiport::signature_probabilities;
use crate::parametrization::Parametrization;
use crate::serialize::{f64_17, vec_f64_17};
use crate::spin::HalfInt;
use crate::states::{BlochState, Parameter};

/// Cap on replicates × ν for per-repetition records.
pub const MAX_RECORDS: usize = 20_000_000;
pub const DEFAULT_REPLICATES: usize = 1000;
pub const BOOTSTRAP_RESAMPLES: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Strategy {
    /// Each qubit measured along ±ê_s; estimates ε.
    LocalEps,
    /// Each qubit measured along the perpendicular ±ê_s′; estimates φ.
    LocalPhi,
    /// J² on the ensemble followed by the L_φ eigenbasis; estimates both.
    J2Lphi,
    /// Multiport signature S₁ \ S₀ versus S₀; estimates ε.
    Signatures,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleConfig {
    pub state: BlochState,
    pub n: usize,
    /// Repetitions per dataset.
    pub nu: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// Independent datasets used to estimate the mean squared error.
    pub replicates: usize,
}

impl SampleConfig {
    pub fn new(state: BlochState, n: usize, nu: usize, seed: u64, strategy: Strategy) -> Self {
        Self {
            state,
            n,
            nu,
            seed,
            strategy,
            replicates: DEFAULT_REPLICATES,
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.replicates == 0 {
            return Err(Error::Invalid(
                "ν and the replicate count must be at least 1".into(),
            ));
        }
        match self.strategy {
            Strategy::LocalEps | Strategy::LocalPhi => check_size(self.n, 1, u32::MAX as usize),
            Strategy::J2Lphi => check_size(self.n, 2, MAX_SPECTRUM_QUBITS),
            Strategy::Signatures => {
                check_size(self.n, 2, u32::MAX as usize)?;
                if *self.state.parametrization() != Parametrization::Quadratic {
                    return Err(Error::Invalid(
                        "the signature strategy assumes s = 1 − ε²/8".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// One repetition of the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Number of + results among the N qubits.
    Local { plus: u32 },
    /// Observed j and the number of + results in the L_φ basis.
    Collective { j: HalfInt, plus: u32 },
    /// Whether the signature fell in S₁ \ S₀.
    Signature { in_s1: bool },
}

/// Per-repetition records, `records[r][k]` for replicate r and repetition k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub strategy: Strategy,
    pub n: usize,
    pub nu: usize,
    pub records: Vec<Vec<Outcome>>,
}

/// Sufficient statistics of one dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tally {
    Local {
        plus: u64,
    },
    /// `sum_4j2` is Σ 4j(j+1) over repetitions, an integer.
    Collective {
        sum_4j2: u64,
        plus: u64,
    },
    Signature {
        hits: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TallySet {
    pub strategy: Strategy,
    pub n: usize,
    pub nu: usize,
    pub tallies: Vec<Tally>,
}

impl Dataset {
    pub fn tallies(&self) -> Result<TallySet> {
        let tallies = self
            .records
            .iter()
            .map(|reps| {
                let mut t = match self.strategy {
                    Strategy::LocalEps | Strategy::LocalPhi => Tally::Local { plus: 0 },
                    Strategy::J2Lphi => Tally::Collective {
                        sum_4j2: 0,
                        plus: 0,
                    },
                    Strategy::Signatures => Tally::Signature { hits: 0 },
                };
                for o in reps {
                    match (&mut t, o) {
                        (Tally::Local { plus }, Outcome::Local { plus: p }) => *plus += *p as u64,
                        (
                            Tally::Collective { sum_4j2, plus },
                            Outcome::Collective { j, plus: p },
                        ) => {
                            *sum_4j2 += (j.twice() * (j.twice() + 2)) as u64;
                            *plus += *p as u64;
                        }
                        (Tally::Signature { hits }, Outcome::Signature { in_s1 }) => {
                            *hits += *in_s1 as u64
                        }
                        _ => {
                            return Err(Error::Invalid(format!(
                                "record {o:?} does not match {:?}",
                                self.strategy
                            )))
                        }
                    }
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TallySet {
            strategy: self.strategy,
            n: self.n,
            nu: self.nu,
            tallies,
        })
    }
}

/// Probability of + for a single qubit measured along the strategy's axis.
fn plus_probability(config: &SampleConfig) -> f64 {
    match config.strategy {
        // ±ê_s is the Bloch direction itself.
        Strategy::LocalEps => (1.0 + config.state.s()) / 2.0,
        // The perpendicular axis at the true φ has zero Bloch component.
        Strategy::LocalPhi | Strategy::J2Lphi => 0.5,
        Strategy::Signatures => f64::NAN,
    }
}

fn check_simplex(probs: &[f64]) -> Result<()> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(-1e-9..=1.0 + 1e-9).contains(p)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Distribution(format!(
            "probabilities {probs:?} are off the simplex"
        )));
    }
    Ok(())
}

struct Sources {
    plus: f64,
    spectrum: Option<AngularSpectrum>,
    s1: f64,
}

fn sources(config: &SampleConfig) -> Result<Sources> {
    config.validate()?;
    let mut src = Sources {
        plus: plus_probability(config),
        spectrum: None,
        s1: f64::NAN,
    };
    match config.strategy {
        Strategy::J2Lphi => {
            let sp = spectrum_exact(&config.state, config.n)?;
            check_simplex(&sp.entries.iter().map(|e| e.p).collect::<Vec<_>>())?;
            src.spectrum = Some(sp);
        }
        Strategy::Signatures => {
            let (p0, p1) = signature_probabilities(config.n, config.state.epsilon())?;
            check_simplex(&[p0, p1])?;
            src.s1 = p1;
        }
        _ => check_simplex(&[src.plus, 1.0 - src.plus])?,
    }
    Ok(src)
}

fn binomial(rng: &mut ChaCha8Rng, trials: u64, p: f64) -> u64 {
    Binomial::new(trials, p.clamp(0.0, 1.0))
        .expect("valid binomial")
        .sample(rng)
}

fn draw_j(rng: &mut ChaCha8Rng, spectrum: &AngularSpectrum) -> HalfInt {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for e in &spectrum.entries {
        acc += e.p;
        if u < acc {
            return e.j;
        }
    }
    spectrum
        .entries
        .iter()
        .rev()
        .find(|e| e.p > 0.0)
        .map_or(spectrum.entries[0].j, |e| e.j)
}

/// Per-repetition outcome records, replicate by replicate.
pub fn sample_outcomes(config: &SampleConfig) -> Result<Dataset> {
    let src = sources(config)?;
    if config.replicates.saturating_mul(config.nu) > MAX_RECORDS {
        return Err(Error::Budget(format!(
            "{} × {} records exceed {MAX_RECORDS}; use sample_tallies",
            config.replicates, config.nu
        )));
    }
    let records = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            (0..config.nu)
                .map(|k| {
                    let mut rng = config.rng(((r as u64) << 32) | k as u64);
                    let count_plus = |rng: &mut ChaCha8Rng| {
                        (0..config.n)
                            .filter(|_| rng.random::<f64>() < src.plus)
                            .count() as u32
                    };
                    match config.strategy {
                        Strategy::LocalEps | Strategy::LocalPhi => Outcome::Local {
                            plus: count_plus(&mut rng),
                        },
                        Strategy::J2Lphi => {
                            let j = draw_j(&mut rng, src.spectrum.as_ref().unwrap());
                            Outcome::Collective {
                                j,
                                plus: count_plus(&mut rng),
                            }
                        }
                        Strategy::Signatures => Outcome::Signature {
                            in_s1: rng.random::<f64>() < src.s1,
                        },
                    }
                })
                .collect()
        })
        .collect();
    Ok(Dataset {
        strategy: config.strategy,
        n: config.n,
        nu: config.nu,
        records,
    })
}

/// Sufficient statistics drawn directly from their binomial and multinomial laws.
pub fn sample_tallies(config: &SampleConfig) -> Result<TallySet> {
    let src = sources(config)?;
    let nu = config.nu as u64;
    let qubit_trials = nu * config.n as u64;
    let tallies = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = config.rng(r as u64);
            match config.strategy {
                Strategy::LocalEps | Strategy::LocalPhi => Tally::Local {
                    plus: binomial(&mut rng, qubit_trials, src.plus),
                },
                Strategy::J2Lphi => {
                    let sp = src.spectrum.as_ref().unwrap();
                    let mut remaining = nu;
                    let mut mass = 1.0;
                    let mut sum_4j2 = 0u64;
                    for (idx, e) in sp.entries.iter().enumerate() {
                        if remaining == 0 {
                            break;
                        }
                        let k = if idx + 1 == sp.entries.len() || mass <= e.p {
                            remaining
                        } else {
                            binomial(&mut rng, remaining, e.p / mass)
                        };
                        sum_4j2 += k * (e.j.twice() * (e.j.twice() + 2)) as u64;
                        remaining -= k;
                        mass -= e.p;
                    }
                    Tally::Collective {
                        sum_4j2,
                        plus: binomial(&mut rng, qubit_trials, src.plus),
                    }
                }
                Strategy::Signatures => Tally::Signature {
                    hits: binomial(&mut rng, nu, src.s1),
                },
            }
        })
        .collect();
    Ok(TallySet {
        strategy: config.strategy,
        n: config.n,
        nu: config.nu,
        tallies,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub parameter: Parameter,
    #[serde(serialize_with = "f64_17")]
    pub truth: f64,
    /// One estimate per replicate dataset.
    #[serde(serialize_with = "vec_f64_17")]
    pub estimates: Vec<f64>,
    /// ν·mean (θ̂ − θ)².
    #[serde(serialize_with = "f64_17")]
    pub empirical_mse: f64,
    #[serde(serialize_with = "f64_17")]
    pub theory_mse: f64,
    /// 1/ℱ for the parameter.
    #[serde(serialize_with = "f64_17")]
    pub crb: f64,
    #[serde(serialize_with = "f64_17")]
    pub stderr: f64,
    /// Estimates whose argument had to be clamped into the invertible range.
    pub clamp_events: usize,
}

impl RunReport {
    pub fn bias(&self) -> f64 {
        self.estimates.iter().sum::<f64>() / self.estimates.len() as f64 - self.truth
    }

    /// Standard error of the mean estimate.
    pub fn bias_stderr(&self) -> f64 {
        let n = self.estimates.len() as f64;
        let mean = self.estimates.iter().sum::<f64>() / n;
        let var = self
            .estimates
            .iter()
            .map(|e| (e - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub strategy: Strategy,
    #[serde(rename = "N")]
    pub n: usize,
    pub nu: usize,
    pub replicates: usize,
    pub epsilon: Option<RunReport>,
    pub phi: Option<RunReport>,
}

/// ν·mean of `squared` and its bootstrap standard error.
pub fn mse_with_bootstrap(squared: &[f64], nu: usize, seed: u64) -> (f64, f64) {
    let n = squared.len();
    let mean = squared.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (nu as f64 * mean, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..n).map(|_| squared[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let mbar = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - mbar).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (nu as f64 * mean, nu as f64 * var.sqrt())
}

/// ε at which s(ε) is closest to `s` within the parametrization's range.
fn invert_clamped(p: &Parametrization, s: f64) -> (f64, bool) {
    let (lo, hi) = p.domain();
    let (a, b) = (p.s(lo), p.s(hi));
    let (min, max) = (a.min(b), a.max(b));
    let clamped = s.clamp(min, max);
    let eps = p
        .s_inverse(clamped)
        .unwrap_or(if clamped == a { lo } else { hi });
    (eps, clamped != s)
}

fn arcsine_estimate(phi: f64, diff: f64, s: f64) -> (f64, bool) {
    let x = diff / s;
    let c = x.clamp(-1.0, 1.0);
    (phi + c.asin(), c != x)
}

fn report(
    config: &SampleConfig,
    parameter: Parameter,
    truth: f64,
    results: Vec<(f64, bool)>,
    theory_mse: f64,
    stream_offset: u64,
) -> Result<RunReport> {
    let clamp_events = results.iter().filter(|r| r.1).count();
    let estimates: Vec<f64> = results.into_iter().map(|r| r.0).collect();
    let squared: Vec<f64> = estimates.iter().map(|e| (e - truth).powi(2)).collect();
    let (empirical_mse, stderr) =
        mse_with_bootstrap(&squared, config.nu, config.seed ^ stream_offset);
    let crb = 1.0 / qfi_closed_form(&config.state, config.n, parameter)?.value;
    Ok(RunReport {
        parameter,
        truth,
        estimates,
        empirical_mse,
        theory_mse,
        crb,
        stderr,
        clamp_events,
    })
}

pub fn estimate(tallies: &TallySet, config: &SampleConfig) -> Result<EstimateReport> {
    if tallies.tallies.is_empty() {
        return Err(Error::Invalid("empty dataset".into()));
    }
    if tallies.strategy != config.strategy || tallies.n != config.n || tallies.nu != config.nu {
        return Err(Error::Invalid(format!(
            "dataset ({:?}, N = {}, ν = {}) does not match the configuration ({:?}, N = {}, ν = {})",
            tallies.strategy, tallies.n, tallies.nu, config.strategy, config.n, config.nu
        )));
    }
    let st = &config.state;
    let param = st.parametrization();
    let (n, nu) = (config.n as f64, config.nu as f64);
    let qubit_trials = nu * n;
    let s = st.s();
    let phi_theory = 1.0 / (n * s * s);

    let local_diff = |plus: u64| (2.0 * plus as f64 - qubit_trials) / qubit_trials;
    let mut eps_results = Vec::new();
    let mut phi_results = Vec::new();
    for t in &tallies.tallies {
        match (config.strategy, *t) {
            (Strategy::LocalEps, Tally::Local { plus }) => {
                eps_results.push(invert_clamped(param, local_diff(plus)))
            }
            (Strategy::LocalPhi, Tally::Local { plus }) => {
                phi_results.push(arcsine_estimate(st.phi(), local_diff(plus), s))
            }
            (Strategy::J2Lphi, Tally::Collective { sum_4j2, plus }) => {
                let mean_j2 = sum_4j2 as f64 / 4.0 / nu;
                let s2 = (mean_j2 - 0.75 * n) * 4.0 / (n * (n - 1.0));
                let s2c = s2.clamp(0.0, 1.0);
                let (eps, clamped) = invert_clamped(param, s2c.sqrt());
                eps_results.push((eps, clamped || s2c != s2));
                phi_results.push(arcsine_estimate(st.phi(), local_diff(plus), s));
            }
            (Strategy::Signatures, Tally::Signature { hits }) => {
                let eps = 4.0 * (hits as f64 / nu / (n - 1.0)).sqrt();
                let (lo, hi) = param.domain();
                let c = eps.clamp(lo, hi);
                eps_results.push((c, c != eps));
            }
            (strategy, t) => {
                return Err(Error::Invalid(format!("{t:?} does not match {strategy:?}")))
            }
        }
    }

    let epsilon = match config.strategy {
        Strategy::LocalEps => Some(report(
            config,
            Parameter::Epsilon,
            st.epsilon(),
            eps_results,
            1.0 / qfi_closed_form(st, config.n, Parameter::Epsilon)?.value,
            1,
        )?),
        Strategy::J2Lphi => Some(report(
            config,
            Parameter::Epsilon,
            st.epsilon(),
            eps_results,
            j2_error_propagation(st, config.n)?,
            1,
        )?),
        Strategy::Signatures => {
            let (_, p1) = signature_probabilities(config.n, st.epsilon())?;
            if p1 <= 0.0 {
                return Err(Error::Uninformative(
                    "S₁ \\ S₀ has zero probability at ε = 0".into(),
                ));
            }
            let theory = 4.0 * (1.0 - p1) / (n - 1.0);
            Some(report(
                config,
                Parameter::Epsilon,
                st.epsilon(),
                eps_results,
                theory,
                1,
            )?)
        }
        Strategy::LocalPhi => None,
    };
    let phi = match config.strategy {
        Strategy::LocalPhi | Strategy::J2Lphi => Some(report(
            config,
            Parameter::Phi,
            st.phi(),
            phi_results,
            phi_theory,
            2,
        )?),
        _ => None,
    };
    Ok(EstimateReport {
        strategy: config.strategy,
        n: config.n,
        nu: config.nu,
        replicates: tallies.tallies.len(),
        epsilon,
        phi,
    })
}

/// Samples sufficient statistics and estimates in one step.
pub fn run(config: &SampleConfig) -> Result<EstimateReport> {
    estimate(&sample_tallies(config)?, config)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MseRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "f64_17")]
    pub empirical_eps: f64,
    #[serde(serialize_with = "f64_17")]
    pub stderr_eps: f64,
    #[serde(serialize_with = "f64_17")]
    pub empirical_phi: f64,
    #[serde(serialize_with = "f64_17")]
    pub stderr_phi: f64,
    #[serde(serialize_with = "f64_17")]
    pub empirical_weighted: f64,
    #[serde(serialize_with = "f64_17")]
    pub stderr_weighted: f64,
    /// Error propagation for J².
    #[serde(serialize_with = "f64_17")]
    pub theory_eps: f64,
    /// 1/(N s²).
    #[serde(serialize_with = "f64_17")]
    pub theory_phi: f64,
    #[serde(serialize_with = "f64_17")]
    pub collective: f64,
    #[serde(serialize_with = "f64_17")]
    pub ultimate: f64,
    #[serde(serialize_with = "f64_17")]
    pub split: f64,
    pub clamp_events: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MseExperiment {
    pub parametrization: Parametrization,
    pub epsilon: f64,
    pub phi: f64,
    pub ns: Vec<usize>,
    pub nu: usize,
    pub seed: u64,
    pub replicates: usize,
    pub weights: Weights,
}

/// Seed for the N-th row, decorrelated from neighbouring rows.
fn row_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Monte Carlo J² + L_φ sweep against the analytic curves.
pub fn mse_experiment(exp: &MseExperiment) -> Result<Vec<MseRow>> {
    Weights::new(exp.weights.epsilon, exp.weights.phi)?;
    let state = BlochState::new(exp.epsilon, exp.phi, exp.parametrization.clone())?;
    exp.ns
        .iter()
        .map(|&n| {
            let analytic =
                &weighted_mse_table(&exp.parametrization, exp.epsilon, n..=n, exp.weights)?[0];
            let config = SampleConfig {
                state: state.clone(),
                n,
                nu: exp.nu,
                seed: row_seed(exp.seed, n),
                strategy: Strategy::J2Lphi,
                replicates: exp.replicates,
            };
            let rep = run(&config)?;
            let (e, p) = (rep.epsilon.unwrap(), rep.phi.unwrap());
            let weighted: Vec<f64> = e
                .estimates
                .iter()
                .zip(&p.estimates)
                .map(|(a, b)| {
                    exp.weights.epsilon * (a - e.truth).powi(2)
                        + exp.weights.phi * (b - p.truth).powi(2)
                })
                .collect();
            let (empirical_weighted, stderr_weighted) =
                mse_with_bootstrap(&weighted, exp.nu, config.seed ^ 3);
            Ok(MseRow {
                n,
                empirical_eps: e.empirical_mse,
                stderr_eps: e.stderr,
                empirical_phi: p.empirical_mse,
                stderr_phi: p.stderr,
                empirical_weighted,
                stderr_weighted,
                theory_eps: e.theory_mse,
                theory_phi: p.theory_mse,
                collective: analytic.collective,
                ultimate: analytic.ultimate,
                split: analytic.split,
                clamp_events: e.clamp_events + p.clamp_events,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: f64, phi: f64) -> BlochState {
        BlochState::with_length(s, phi).unwrap()
    }

    #[test]
    fn pure_state_along_axis() {
        let cfg = SampleConfig::new(id(1.0, 0.3), 3, 50, 1, Strategy::LocalEps).with_replicates(4);
        let ds = sample_outcomes(&cfg).unwrap();
        assert!(ds
            .records
            .iter()
            .flatten()
            .all(|o| *o == Outcome::Local { plus: 3 }));
    }

    #[test]
    fn local_frequency_concentrates() {
        let cfg =
            SampleConfig::new(id(0.6, 0.0), 1, 1_000_000, 7, Strategy::LocalEps).with_replicates(1);
        let t = sample_tallies(&cfg).unwrap();
        let Tally::Local { plus } = t.tallies[0] else {
            panic!()
        };
        let diff = (2.0 * plus as f64 - 1e6) / 1e6;
        assert!((diff - 0.6).abs() < 0.003, "{diff}");
        let rep = estimate(&t, &cfg).unwrap();
        assert!((rep.epsilon.unwrap().estimates[0] - diff).abs() < 1e-15);
    }

    #[test]
    fn signature_fraction() {
        let st = BlochState::new(0.2, 0.0, Parametrization::Quadratic).unwrap();
        let cfg = SampleConfig::new(st, 4, 1_000_000, 11, Strategy::Signatures).with_replicates(1);
        let Tally::Signature { hits } = sample_tallies(&cfg).unwrap().tallies[0] else {
            panic!()
        };
        let f = hits as f64 / 1e6;
        assert!((f - 0.0075).abs() < 3.0 * (0.0075f64 / 1e6).sqrt(), "{f}");
    }

    #[test]
    fn signature_estimator_inverts_exact_frequency() {
        let st = BlochState::new(0.2, 0.0, Parametrization::Quadratic).unwrap();
        let cfg = SampleConfig::new(st, 4, 10_000, 0, Strategy::Signatures);
        let t = TallySet {
            strategy: Strategy::Signatures,
            n: 4,
            nu: 10_000,
            tallies: vec![Tally::Signature { hits: 75 }],
        };
        let e = estimate(&t, &cfg).unwrap().epsilon.unwrap();
        assert!((e.estimates[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn records_and_tallies_agree_in_law() {
        let st = BlochState::new(0.5, 0.2, Parametrization::Quadratic).unwrap();
        let cfg = SampleConfig::new(st, 4, 2000, 5, Strategy::J2Lphi).with_replicates(400);
        let a = estimate(&sample_outcomes(&cfg).unwrap().tallies().unwrap(), &cfg).unwrap();
        let b = run(&cfg).unwrap();
        for (x, y) in [
            (a.epsilon.unwrap(), b.epsilon.unwrap()),
            (a.phi.unwrap(), b.phi.unwrap()),
        ] {
            let tol = 4.0 * (x.stderr.powi(2) + y.stderr.powi(2)).sqrt();
            assert!(
                (x.empirical_mse - y.empirical_mse).abs() < tol,
                "{} vs {}",
                x.empirical_mse,
                y.empirical_mse
            );
        }
    }

    #[test]
    fn determinism() {
        let st = BlochState::new(0.5, 0.2, Parametrization::Quadratic).unwrap();
        let cfg = SampleConfig::new(st, 6, 500, 99, Strategy::J2Lphi).with_replicates(50);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
        assert_eq!(
            sample_outcomes(&cfg).unwrap(),
            sample_outcomes(&cfg).unwrap()
        );
        let other = SampleConfig {
            seed: 100,
            ..cfg.clone()
        };
        assert_ne!(run(&cfg).unwrap(), run(&other).unwrap());
    }

    #[test]
    fn validation_errors() {
        let st = id(0.5, 0.0);
        assert!(run(&SampleConfig::new(st.clone(), 2, 0, 0, Strategy::LocalEps)).is_err());
        assert!(run(&SampleConfig::new(st.clone(), 1, 10, 0, Strategy::J2Lphi)).is_err());
        assert!(run(&SampleConfig::new(
            st.clone(),
            3,
            10,
            0,
            Strategy::Signatures
        ))
        .is_err());
        let cfg = SampleConfig::new(st.clone(), 3, 10, 0, Strategy::LocalEps);
        let other = SampleConfig::new(st, 3, 10, 0, Strategy::LocalPhi);
        let t = sample_tallies(&cfg).unwrap();
        assert!(estimate(&t, &other).is_err());
        assert!(estimate(
            &TallySet {
                tallies: vec![],
                ..t
            },
            &cfg
        )
        .is_err());
        let big = SampleConfig::new(id(0.5, 0.0), 3, 1_000_000, 0, Strategy::LocalEps)
            .with_replicates(100);
        assert!(matches!(sample_outcomes(&big), Err(Error::Budget(_))));
        let wide = BlochState::new(2.8, 0.0, Parametrization::Quadratic).unwrap();
        assert!(matches!(
            sample_tallies(&SampleConfig::new(wide, 8, 10, 0, Strategy::Signatures)),
            Err(Error::Distribution(_))
        ));
    }

    #[test]
    fn j2_clamping_is_counted() {
        // Tiny ν at small s drives the empirical ⟨J²⟩ below 3N/4 often.
        let cfg = SampleConfig::new(id(0.05, 0.0), 3, 2, 3, Strategy::J2Lphi).with_replicates(200);
        let rep = run(&cfg).unwrap();
        assert!(rep.epsilon.unwrap().clamp_events > 0);
    }

    #[test]
    fn j2_mse_matches_error_propagation() {
        let cfg =
            SampleConfig::new(id(0.6, 0.4), 2, 100_000, 21, Strategy::J2Lphi).with_replicates(4000);
        let rep = run(&cfg).unwrap();
        let e = rep.epsilon.unwrap();
        assert!((e.theory_mse - 1.4933333333333334).abs() < 1e-12);
        assert!(
            (e.empirical_mse / e.theory_mse - 1.0).abs() < 0.05,
            "{}",
            e.empirical_mse
        );
        let p = rep.phi.unwrap();
        assert!(
            (p.empirical_mse - p.theory_mse).abs() < 3.0 * p.stderr,
            "{} vs {}",
            p.empirical_mse,
            p.theory_mse
        );
    }

    #[test]
    fn no_strategy_beats_the_quantum_bound() {
        let quad = BlochState::new(0.3, 0.1, Parametrization::Quadratic).unwrap();
        for (state, n, strategy) in [
            (id(0.7, 0.2), 3, Strategy::LocalEps),
            (id(0.7, 0.2), 3, Strategy::LocalPhi),
            (id(0.7, 0.2), 5, Strategy::J2Lphi),
            (quad, 6, Strategy::Signatures),
        ] {
            let rep = run(&SampleConfig::new(state, n, 20_000, 8, strategy).with_replicates(2000))
                .unwrap();
            for r in [rep.epsilon, rep.phi].into_iter().flatten() {
                assert!(r.stderr > 0.0);
                let rel = r.stderr / r.empirical_mse;
                assert!(
                    r.empirical_mse >= (1.0 - 3.0 * rel) * r.crb,
                    "{strategy:?}: {} < {}",
                    r.empirical_mse,
                    r.crb
                );
            }
        }
    }

    #[test]
    fn estimators_are_consistent() {
        let quad = BlochState::new(0.3, 0.1, Parametrization::Quadratic).unwrap();
        for (state, n, strategy) in [
            (id(0.7, 0.2), 3, Strategy::LocalEps),
            (id(0.7, 0.2), 3, Strategy::LocalPhi),
            (id(0.7, 0.2), 4, Strategy::J2Lphi),
            (quad, 5, Strategy::Signatures),
        ] {
            let mut last = f64::INFINITY;
            for nu in [1_000, 10_000, 100_000] {
                let rep =
                    run(&SampleConfig::new(state.clone(), n, nu, 13, strategy)
                        .with_replicates(1000))
                    .unwrap();
                let r = rep.epsilon.or(rep.phi).unwrap();
                last = r.bias().abs() / r.bias_stderr();
            }
            assert!(last < 3.0, "{strategy:?}: bias {last} stderr units");
        }
    }
}
