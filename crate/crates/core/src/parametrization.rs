//! Maps from the length parameter ε to the Bloch-vector length s(ε).
//!
//! `Quadratic` uses s = 1 − ε²/8 for nearly-pure qubits. `Identity` sets
//! s = ε. `Table` interpolates user supplied (ε, s) knots with a monotone cubic.

use std::cmp::Ordering;
use std::path::Path;

use crate::error::{Error, Result};

/// s(ε), its derivative and inverse on the declared domain.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Parametrization {
    /// s(ε) = 1 − ε²/8 on ε ∈ [0, √8].
    #[default]
    Quadratic,
    /// s(ε) = ε on ε ∈ [0, 1].
    Identity,
    /// Monotone interpolation through tabulated points.
    Table(MonotoneTable),
}

impl Parametrization {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic => "default_quadratic",
            Self::Identity => "identity",
            Self::Table(_) => "custom-table",
        }
    }

    /// Closed interval of admissible ε.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Quadratic => (0.0, 8f64.sqrt()),
            Self::Identity => (0.0, 1.0),
            Self::Table(t) => (t.eps[0], *t.eps.last().unwrap()),
        }
    }

    pub fn contains(&self, epsilon: f64) -> bool {
        let (lo, hi) = self.domain();
        epsilon >= lo && epsilon <= hi
    }

    pub fn s(&self, epsilon: f64) -> f64 {
        match self {
            Self::Quadratic => (1.0 - epsilon * epsilon / 8.0).max(0.0),
            Self::Identity => epsilon,
            Self::Table(t) => t.eval(epsilon),
        }
    }

    /// 1 − s(ε), computed without cancellation where the map allows it.
    pub fn deficit(&self, epsilon: f64) -> f64 {
        match self {
            Self::Quadratic => (epsilon * epsilon / 8.0).min(1.0),
            Self::Identity => 1.0 - epsilon,
            Self::Table(t) => 1.0 - t.eval(epsilon),
        }
    }

    pub fn ds(&self, epsilon: f64) -> f64 {
        match self {
            Self::Quadratic => -epsilon / 4.0,
            Self::Identity => 1.0,
            Self::Table(t) => t.derivative(epsilon),
        }
    }

    /// ε such that s(ε) = s, on the monotone branch covered by the domain.
    pub fn s_inverse(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::BlochLength(s));
        }
        match self {
            Self::Quadratic => Ok((8.0 * (1.0 - s)).sqrt()),
            Self::Identity => Ok(s),
            Self::Table(t) => t.invert(s),
        }
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolant of s over ε.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneTable {
    eps: Vec<f64>,
    s: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid(
                "a parametrization table needs at least two points".into(),
            ));
        }
        let eps: Vec<f64> = points.iter().map(|p| p.0).collect();
        let s: Vec<f64> = points.iter().map(|p| p.1).collect();
        if eps
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        {
            return Err(Error::Invalid(
                "table ε values must be strictly increasing".into(),
            ));
        }
        if let Some(bad) = s.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::BlochLength(*bad));
        }
        let increasing = s[1] > s[0];
        if s.windows(2).any(|w| {
            w[1].partial_cmp(&w[0])
                != Some(if increasing {
                    Ordering::Greater
                } else {
                    Ordering::Less
                })
        }) {
            return Err(Error::Invalid(
                "table s values must be strictly monotone".into(),
            ));
        }

        let n = eps.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (s[k + 1] - s[k]) / (eps[k + 1] - eps[k]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            slopes[k] = 0.5 * (secants[k - 1] + secants[k]);
        }
        for k in 0..n - 1 {
            let alpha = slopes[k] / secants[k];
            let beta = slopes[k + 1] / secants[k];
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[k] = tau * alpha * secants[k];
                slopes[k + 1] = tau * beta * secants[k];
            }
        }
        Ok(Self { eps, s, slopes })
    }

    /// Reads a two-column `epsilon,s` CSV file (header optional).
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut points = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Invalid(format!(
                    "row {}: expected two columns",
                    row + 1
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(e), Ok(s)) => points.push((e, s)),
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Invalid(format!(
                        "row {}: non-numeric entry",
                        row + 1
                    )))
                }
            }
        }
        Self::new(&points)
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.eps.len();
        match self.eps.partition_point(|&e| e <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let h = self.eps[k + 1] - self.eps[k];
        let t = (x - self.eps[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.s[k]
            + h10 * h * self.slopes[k]
            + h01 * self.s[k + 1]
            + h11 * h * self.slopes[k + 1]
    }

    fn derivative(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let h = self.eps[k + 1] - self.eps[k];
        let t = (x - self.eps[k]) / h;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.s[k] + d01 * self.s[k + 1]) / h
            + d10 * self.slopes[k]
            + d11 * self.slopes[k + 1]
    }

    fn invert(&self, target: f64) -> Result<f64> {
        let (mut lo, mut hi) = (self.eps[0], *self.eps.last().unwrap());
        let (s_lo, s_hi) = (self.eval(lo), self.eval(hi));
        let (min, max) = (s_lo.min(s_hi), s_lo.max(s_hi));
        if target < min - 1e-15 || target > max + 1e-15 {
            return Err(Error::Invalid(format!(
                "s = {target} is outside the tabulated range [{min}, {max}]"
            )));
        }
        let increasing = s_hi > s_lo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.eval(mid) < target) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
