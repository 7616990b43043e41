//! Target eigenvalue sets and the number-theoretic counting functions.
//!
//! Units throughout are `ħ²/2m = 1`, so the harmonic oscillator `V = x²` has
//! levels `1, 3, 5, …` and the triangular well `V = |x|` has levels at the
//! negated zeros of `Ai'` (even states) and `Ai` (odd states).

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{airy_zeros, integrate};

/// The first zeta zero, truncated; anything below it cannot be a zero.
pub const FIRST_ZETA_ZERO_FLOOR: f64 = 14.13;

static BUNDLED_ZEROS: &str = include_str!("../data/zeta_zeros.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    Primes,
    ZetaZeros,
    Harmonic,
    Triangular,
    Custom,
}

impl SpectrumKind {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Primes => "primes",
            SpectrumKind::ZetaZeros => "zeta",
            SpectrumKind::Harmonic => "harmonic",
            SpectrumKind::Triangular => "triangular",
            SpectrumKind::Custom => "custom",
        }
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectrumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primes" => Ok(SpectrumKind::Primes),
            "zeta" | "zeta-zeros" => Ok(SpectrumKind::ZetaZeros),
            "harmonic" => Ok(SpectrumKind::Harmonic),
            "triangular" => Ok(SpectrumKind::Triangular),
            "custom" => Ok(SpectrumKind::Custom),
            other => Err(Error::Invalid(format!("unknown spectrum kind {other:?}"))),
        }
    }
}

/// A strictly increasing set of target energies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    kind: SpectrumKind,
    next_value: Option<f64>,
}

impl Spectrum {
    /// Validates the kind-specific invariants.
    pub fn new(values: Vec<f64>, kind: SpectrumKind, next_value: Option<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues".into()));
        }
        if let Some(bad) = values.iter().chain(next_value.as_ref()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!("non-finite value {bad}")));
        }
        check_increasing(&values)?;
        if let Some(next) = next_value {
            let last = values[values.len() - 1];
            if next <= last {
                return Err(Error::InvalidSpectrum(format!(
                    "next value {next} does not exceed the last eigenvalue {last}"
                )));
            }
        }
        match kind {
            SpectrumKind::Primes => {
                let primes = first_primes(values.len());
                if values.iter().zip(&primes).any(|(&v, &p)| v != p as f64) {
                    return Err(Error::InvalidSpectrum(
                        "values are not the initial segment of the primes".into(),
                    ));
                }
            }
            SpectrumKind::ZetaZeros => {
                if values[0] < FIRST_ZETA_ZERO_FLOOR {
                    return Err(Error::InvalidSpectrum(format!(
                        "{} lies below the first zeta zero",
                        values[0]
                    )));
                }
            }
            SpectrumKind::Harmonic => {
                if values.iter().enumerate().any(|(n, &v)| v != (2 * n + 1) as f64) {
                    return Err(Error::InvalidSpectrum("harmonic levels must be 2n+1".into()));
                }
            }
            SpectrumKind::Triangular | SpectrumKind::Custom => {}
        }
        Ok(Spectrum {
            values,
            kind,
            next_value,
        })
    }

    pub fn custom(values: Vec<f64>, next_value: Option<f64>) -> Result<Self> {
        Spectrum::new(values, SpectrumKind::Custom, next_value)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn next_value(&self) -> Option<f64> {
        self.next_value
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// CSV with header `index,eigenvalue`, 1-based indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,eigenvalue")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Shortest decimal that round-trips; used by every CSV writer.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_increasing(values: &[f64]) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::Order {
                index: i + 1,
                previous: w[0],
                value: w[1],
            });
        }
    }
    Ok(())
}

/// Sieve of Eratosthenes: all primes `≤ limit`.
pub fn sieve(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// The first `n` primes.
pub fn first_primes(n: usize) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    // p_n < n (ln n + ln ln n) for n ≥ 6
    let nf = n as f64;
    let mut limit = if n < 6 { 15 } else { (nf * (nf.ln() + nf.ln().ln())).ceil() as usize };
    loop {
        let primes = sieve(limit);
        if primes.len() >= n {
            return primes[..n].to_vec();
        }
        limit *= 2;
    }
}

/// The first `n` primes, with the `(n+1)`-th as `next_value`.
pub fn primes_upto_n(n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Invalid("need at least one prime".into()));
    }
    let mut primes = first_primes(n + 1);
    let next = primes.pop().map(|p| p as f64);
    Spectrum::new(primes.into_iter().map(|p| p as f64).collect(), SpectrumKind::Primes, next)
}

/// Number of primes `≤ x`.
pub fn prime_pi(x: u64) -> usize {
    sieve(x as usize).len()
}

/// Parses a zero table: whitespace-separated ascending decimals. Blank lines
/// and comments are rejected.
pub fn parse_zeta_zeros(text: &str, n: usize) -> Result<Spectrum> {
    let mut zeros = Vec::new();
    let body = text.strip_suffix('\n').unwrap_or(text);
    for (idx, line) in body.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let mut tokens = line.split_whitespace().peekable();
        if tokens.peek().is_none() {
            return Err(Error::Parse {
                line: line_no,
                token: line.to_string(),
            });
        }
        for token in tokens {
            let value: f64 = token.parse().map_err(|_| Error::Parse {
                line: line_no,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    token: token.to_string(),
                });
            }
            if let Some(&previous) = zeros.last() {
                if value <= previous {
                    return Err(Error::Order {
                        index: zeros.len(),
                        previous,
                        value,
                    });
                }
            }
            zeros.push(value);
        }
    }
    if n == 0 {
        return Err(Error::Invalid("need at least one zero".into()));
    }
    if zeros.len() < n + 1 {
        return Err(Error::InsufficientData {
            needed: n + 1,
            found: zeros.len(),
        });
    }
    let next = zeros[n];
    zeros.truncate(n);
    Spectrum::new(zeros, SpectrumKind::ZetaZeros, Some(next))
}

/// Reads the first `n` zeros from a file in the table format.
pub fn load_zeta_zeros(path: &Path, n: usize) -> Result<Spectrum> {
    parse_zeta_zeros(&std::fs::read_to_string(path)?, n)
}

/// Zeros shipped with the crate (imaginary parts, 12 decimals).
pub fn bundled_zeta_zeros(n: usize) -> Result<Spectrum> {
    parse_zeta_zeros(BUNDLED_ZEROS, n)
}

/// All bundled zero ordinates.
pub fn bundled_zero_table() -> Vec<f64> {
    BUNDLED_ZEROS
        .split_whitespace()
        .map(|t| t.parse().expect("bundled table is valid"))
        .collect()
}

/// Exact spectra of `x²` and `|x|`.
pub fn reference_spectrum(kind: SpectrumKind, n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Invalid("need at least one level".into()));
    }
    match kind {
        SpectrumKind::Harmonic => {
            let values = (0..n).map(|k| (2 * k + 1) as f64).collect();
            Spectrum::new(values, kind, Some((2 * n + 1) as f64))
        }
        SpectrumKind::Triangular => {
            let half = n / 2 + 1;
            let mut all: Vec<f64> = airy_zeros(half, true);
            all.extend(airy_zeros(half, false));
            all.sort_by(f64::total_cmp);
            let next = all[n];
            all.truncate(n);
            Spectrum::new(all, kind, Some(next))
        }
        other => Err(Error::Invalid(format!("{other} is not a reference spectrum"))),
    }
}

/// Möbius function by trial division.
pub fn mobius(m: u64) -> i8 {
    assert!(m >= 1, "mobius is defined for m >= 1");
    let mut m = m;
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

/// Möbius values for `1..=limit` plus a zero table for counting.
#[derive(Clone, Debug)]
pub struct CountingTables {
    mobius: Vec<i8>,
    zeros: Vec<f64>,
}

impl CountingTables {
    /// Linear sieve for `μ` on `1..=limit`.
    pub fn new(limit: usize, zeros: Vec<f64>) -> Self {
        let mut mu = vec![1i8; limit + 1];
        let mut composite = vec![false; limit + 1];
        let mut primes = Vec::new();
        if limit >= 1 {
            mu[0] = 0;
        }
        for i in 2..=limit {
            if !composite[i] {
                primes.push(i);
                mu[i] = -1;
            }
            for &p in &primes {
                let ip = i * p;
                if ip > limit {
                    break;
                }
                composite[ip] = true;
                if i % p == 0 {
                    mu[ip] = 0;
                    break;
                }
                mu[ip] = -mu[i];
            }
        }
        CountingTables { mobius: mu, zeros }
    }

    /// `μ(m)` for `1 ≤ m ≤ limit`.
    pub fn mobius(&self, m: usize) -> i8 {
        self.mobius[m]
    }

    pub fn limit(&self) -> usize {
        self.mobius.len() - 1
    }

    /// Number of tabulated zeros strictly below `e`.
    pub fn zeros_below(&self, e: f64) -> usize {
        self.zeros.partition_point(|&z| z < e)
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }
}

/// `1/ln t − 1/(t − 1)`, regular at `t = 1`.
fn li_regular_part(t: f64) -> f64 {
    let u = t - 1.0;
    if u.abs() < 1e-3 {
        0.5 - u / 12.0 + u * u / 24.0 - 19.0 * u * u * u / 720.0 + 3.0 * u.powi(4) / 160.0
    } else if t <= 0.0 {
        1.0
    } else {
        1.0 / t.ln() - 1.0 / u
    }
}

/// Logarithmic integral: the principal value of `∫₀ˣ dt / ln t`.
pub fn log_integral(x: f64) -> Result<f64> {
    if !(x >= 0.0) || x == 1.0 || !x.is_finite() {
        return Err(Error::Domain(format!("li({x}) is undefined")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // li(x) = ln|x − 1| + ∫₀ˣ (1/ln t − 1/(t − 1)) dt
    let mut total = (x - 1.0).abs().ln();
    let split = x.min(1.0);
    total += integrate(li_regular_part, 0.0, split, 1e-13, 1e-15).value;
    if x > 1.0 {
        total += integrate(li_regular_part, 1.0, x, 1e-13, 1e-15).value;
    }
    Ok(total)
}

/// Riemann's `R(x) = Σ μ(m) li(x^{1/m}) / m`, truncated at `m = ⌊log₂ x⌋`.
pub fn riemann_r(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("R(x) needs x > 1, got {x}")));
    }
    let terms = (x.log2().floor() as u64).max(1);
    let mut total = 0.0;
    for m in 1..=terms {
        let mu = mobius(m);
        if mu == 0 {
            continue;
        }
        total += f64::from(mu) / m as f64 * log_integral(x.powf(1.0 / m as f64))?;
    }
    Ok(total)
}

/// Smooth part of the zeta-zero counting function,
/// `(E ln E)/2π − (1 + ln 2π) E/2π + 7/8`.
pub fn zeta_counting_function(e: f64) -> Result<f64> {
    let two_pi = 2.0 * PI;
    if !(e > two_pi) || !e.is_finite() {
        return Err(Error::Domain(format!("counting function needs E > 2π, got {e}")));
    }
    Ok(e * e.ln() / two_pi - (1.0 + two_pi.ln()) * e / two_pi + 0.875)
}
