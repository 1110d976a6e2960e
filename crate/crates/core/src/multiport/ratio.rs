//! |S₁| / |S| for bosons, where |S| = C(2N−1, N) counts all port-count vectors.
//!
//! The single V particle of τ_{1,1} leaves port 0 with amplitude U_{k0} = 1/√N
//! towards every port k, independently of the N − 1 H particles. The output
//! probability therefore factorizes as P_H(c_H)/N, and
//! S₁ = { c_H + e_k : P_H(c_H) > 0, k = 0..N−1 }.
//! Only the H configurations need to be enumerated.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::Multiport;
use super::fock::{block_configurations, pattern_of, Statistics};
use super::signatures::ZeroTest;
use crate::error::{Error, Result};
use crate::numeric::binomial;
use crate::serialize::f64_17;

/// Largest N without `long`.
pub const RATIO_MAX: usize = 8;
/// Largest N with `long`.
pub const RATIO_LONG_MAX: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct RatioOptions {
    pub long: bool,
    /// Defaults to exact for N ≤ 10 and to a 1e−12 float threshold above.
    pub zero_test: Option<ZeroTest>,
    pub checkpoint: Option<PathBuf>,
    pub chunk_size: usize,
    /// Stop with an error once this many chunks have been processed in this
    /// call; the checkpoint then allows resuming.
    pub max_chunks: Option<usize>,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self {
            long: false,
            zero_test: None,
            checkpoint: None,
            chunk_size: 2048,
            max_chunks: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub zero_test: ZeroTest,
    /// |S₁|
    pub members: u64,
    /// |S| = C(2N−1, N)
    pub total: u64,
    /// "|S₁|/|S|" without cancelling common factors.
    pub unreduced: String,
    pub reduced: String,
    #[serde(serialize_with = "f64_17")]
    pub fraction: f64,
    /// Signatures in S \ S₁, as per-port count vectors.
    pub missing: Vec<Vec<u32>>,
}

impl RatioReport {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.members, self.total)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CheckpointSignature {
    counts: Vec<u32>,
    pattern: Vec<u32>,
    #[serde(serialize_with = "f64_17")]
    probability: f64,
}

/// Signature-dump schema extended with the completed-chunk bitmap.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Checkpoint {
    #[serde(rename = "N")]
    n: usize,
    statistics: Statistics,
    zero_test: ZeroTest,
    chunk_size: usize,
    chunk_count: usize,
    /// One character per chunk, '1' when done.
    completed_chunks: String,
    signatures: Vec<CheckpointSignature>,
}

fn load_checkpoint(
    path: &Path,
    n: usize,
    zero_test: ZeroTest,
    chunk_size: usize,
    chunk_count: usize,
) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let cp: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if cp.n != n
        || cp.zero_test != zero_test
        || cp.chunk_size != chunk_size
        || cp.chunk_count != chunk_count
    {
        return Err(Error::Invalid(format!(
            "checkpoint {} was written for different settings (N = {}, {}, chunk size {})",
            path.display(),
            cp.n,
            cp.zero_test,
            cp.chunk_size
        )));
    }
    if cp.completed_chunks.len() != chunk_count
        || cp.completed_chunks.chars().any(|c| c != '0' && c != '1')
    {
        return Err(Error::Invalid("malformed completed-chunk bitmap".into()));
    }
    Ok(Some(cp))
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string(cp)?)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn signature_ratio(n: usize, options: &RatioOptions) -> Result<RatioReport> {
    let max = if options.long {
        RATIO_LONG_MAX
    } else {
        RATIO_MAX
    };
    if n < 2 || n > max {
        let hint = if !options.long && n <= RATIO_LONG_MAX {
            " (pass --long for N up to 12)"
        } else {
            ""
        };
        return Err(Error::Budget(format!("N = {n} is outside 2..={max}{hint}")));
    }
    if options.chunk_size == 0 {
        return Err(Error::Invalid("chunk size must be positive".into()));
    }
    let zero_test = options.zero_test.unwrap_or(if n <= 10 {
        ZeroTest::Exact
    } else {
        ZeroTest::float()
    });
    let mp = Multiport::new(n, Statistics::Boson)?;
    let mut input = vec![1u8; n];
    input[0] = 0;
    let configs = block_configurations(n, n - 1, Statistics::Boson);
    let chunk_count = configs.len().div_ceil(options.chunk_size);

    let mut done = vec![false; chunk_count];
    let mut probabilities: HashMap<Vec<u32>, f64> = HashMap::new();
    if let Some(path) = &options.checkpoint {
        if let Some(cp) = load_checkpoint(path, n, zero_test, options.chunk_size, chunk_count)? {
            done = cp.completed_chunks.chars().map(|c| c == '1').collect();
            probabilities = cp
                .signatures
                .into_iter()
                .map(|s| (s.counts, s.probability))
                .collect();
        }
    }

    let evaluate = |config: &Vec<u8>| -> Option<f64> {
        let den = mp.block_denominator(&input, config) as f64;
        let amp = mp.block_numerator(&input, config) / den.sqrt();
        let nonzero = match zero_test {
            ZeroTest::Exact => !mp.block_numerator_exact(&input, config).is_zero(),
            ZeroTest::Float(tol) => amp.norm() > tol,
        };
        nonzero.then(|| amp.norm_sqr())
    };

    let pending: Vec<usize> = (0..chunk_count).filter(|&c| !done[c]).collect();
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut start = 0usize;
    while start < pending.len() {
        let allowance = match options.max_chunks {
            Some(m) if start >= m => {
                return Err(Error::Budget(format!(
                    "stopped after {start} of {} pending chunks",
                    pending.len()
                )))
            }
            Some(m) => m - start,
            None => usize::MAX,
        };
        let end = (start + batch.min(allowance)).min(pending.len());
        let group = &pending[start..end];
        start = end;
        let results: Vec<(usize, Vec<(usize, f64)>)> = group
            .par_iter()
            .map(|&c| {
                let lo = c * options.chunk_size;
                let hi = (lo + options.chunk_size).min(configs.len());
                let hits = (lo..hi)
                    .filter_map(|i| evaluate(&configs[i]).map(|p| (i, p)))
                    .collect();
                (c, hits)
            })
            .collect();
        for (c, hits) in results {
            for (i, p) in hits {
                for k in 0..n {
                    let mut counts: Vec<u32> = configs[i].iter().map(|&x| x as u32).collect();
                    counts[k] += 1;
                    *probabilities.entry(counts).or_insert(0.0) += p / n as f64;
                }
            }
            done[c] = true;
        }
        if let Some(path) = &options.checkpoint {
            let mut signatures: Vec<CheckpointSignature> = probabilities
                .iter()
                .map(|(c, p)| CheckpointSignature {
                    counts: c.clone(),
                    pattern: pattern_of(c),
                    probability: *p,
                })
                .collect();
            signatures.sort_by(|a, b| a.counts.cmp(&b.counts));
            let cp = Checkpoint {
                n,
                statistics: Statistics::Boson,
                zero_test,
                chunk_size: options.chunk_size,
                chunk_count,
                completed_chunks: done.iter().map(|&d| if d { '1' } else { '0' }).collect(),
                signatures,
            };
            write_checkpoint(path, &cp)?;
        }
    }

    let total = binomial(2 * n as u64 - 1, n as u64) as u64;
    let members = probabilities.len() as u64;
    let mut missing: Vec<Vec<u32>> = block_configurations(n, n, Statistics::Boson)
        .into_iter()
        .map(|c| c.into_iter().map(u32::from).collect::<Vec<u32>>())
        .filter(|c| !probabilities.contains_key(c))
        .collect();
    missing.sort();
    let reduced = Ratio::new(members, total);
    Ok(RatioReport {
        n,
        zero_test,
        members,
        total,
        unreduced: format!("{members}/{total}"),
        reduced: reduced.to_string(),
        fraction: members as f64 / total as f64,
        missing,
    })
}
