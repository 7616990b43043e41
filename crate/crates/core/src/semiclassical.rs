//! WKB companions: potentials whose semiclassical level density matches the
//! smooth density of the primes or of the zeta zeros.
//!
//! For an even potential with turning point `x(V)`, Abel inversion of the
//! WKB counting rule gives `x(V) = ∫_{E₀}^{V} ρ(E) / √(V − E) dE`, where `ρ`
//! is the target level density and `E₀ = V(0)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{brent, integrate, lambert_w0, Pchip};
use crate::potential::{Method, SampledPotential};
use crate::spectra::{fmt_f64, mobius};

/// Relative accuracy of the prime-density quadrature.
pub const PRIME_QUAD_TOL: f64 = 1e-11;
/// Default reference energy of the prime potential. `E₀ = 1` itself makes
/// the integral diverge at `ln E = 0`.
pub const DEFAULT_PRIME_E0: f64 = 1.5;
pub const DEFAULT_ZETA_E0: f64 = 2.0 * PI;

/// `E₀` values this close below `2π` (relative) are accepted as `2π`, so that
/// a decimal rendering like `6.2831853` works.
const TWO_PI_SLACK: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WkbKind {
    Primes,
    Zeta,
}

impl WkbKind {
    pub fn name(self) -> &'static str {
        match self {
            WkbKind::Primes => "primes",
            WkbKind::Zeta => "zeta",
        }
    }

    pub fn method(self) -> Method {
        match self {
            WkbKind::Primes => Method::WkbPrimes,
            WkbKind::Zeta => Method::WkbZeta,
        }
    }

    pub fn default_e0(self) -> f64 {
        match self {
            WkbKind::Primes => DEFAULT_PRIME_E0,
            WkbKind::Zeta => DEFAULT_ZETA_E0,
        }
    }
}

impl fmt::Display for WkbKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WkbKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primes" => Ok(WkbKind::Primes),
            "zeta" => Ok(WkbKind::Zeta),
            other => Err(Error::Invalid(format!("unknown WKB kind {other:?}"))),
        }
    }
}

/// Default Möbius truncation `⌊log₂ V⌋` (at least one term).
pub fn default_m_max(v: f64) -> usize {
    (v.log2().floor() as usize).max(1)
}

/// Smooth prime density `Σ_{m ≤ m_max} μ(m)/m · E^{(1−m)/m} / ln E`.
fn prime_density(e: f64, m_max: usize) -> f64 {
    let le = e.ln();
    let mut total = 0.0;
    for m in 1..=m_max {
        let mu = mobius(m as u64);
        if mu == 0 {
            continue;
        }
        let mf = m as f64;
        total += f64::from(mu) / mf * e.powf((1.0 - mf) / mf);
    }
    total / le
}

fn check_prime_args(v: f64, e0: f64) -> Result<()> {
    if !(e0 > 1.0) || !e0.is_finite() {
        return Err(Error::Domain(format!(
            "prime reference energy must exceed 1 (the density has a pole at E = 1), got {e0}"
        )));
    }
    if !(v >= e0) || !v.is_finite() {
        return Err(Error::Domain(format!("need V ≥ E₀ = {e0}, got {v}")));
    }
    Ok(())
}

/// Turning point of the prime potential at height `v`, with `m_max` Möbius
/// terms (`None` for the default).
pub fn prime_wkb_x_of_v(v: f64, e0: f64, m_max: Option<usize>) -> Result<f64> {
    prime_wkb_x_of_v_tol(v, e0, m_max, PRIME_QUAD_TOL)
}

/// As [`prime_wkb_x_of_v`] with an explicit relative quadrature tolerance.
pub fn prime_wkb_x_of_v_tol(v: f64, e0: f64, m_max: Option<usize>, rel_tol: f64) -> Result<f64> {
    check_prime_args(v, e0)?;
    if v == e0 {
        return Ok(0.0);
    }
    let m_max = m_max.unwrap_or_else(|| default_m_max(v)).max(1);
    // E = V − t² removes the inverse square root: dE/√(V−E) = 2 dt.
    let f = |t: f64| 2.0 * prime_density(v - t * t, m_max);
    let t_max = (v - e0).sqrt();
    let total = if e0 < 2.0 && v > 2.0 {
        let t_split = (v - 2.0).sqrt();
        integrate(f, 0.0, t_split, rel_tol, 0.0).value + integrate(f, t_split, t_max, rel_tol, 0.0).value
    } else {
        integrate(f, 0.0, t_max, rel_tol, 0.0).value
    };
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundsClass {
    Below,
    Inside,
    Above,
}

/// Classifies `V − E₀` against `(x² ln²x, x² ln²(x ln x))`, the asymptotic
/// band of the prime potential. Requires `x ≥ 10`.
pub fn prime_wkb_bounds_check(x: f64, v: f64, e0: f64) -> Result<BoundsClass> {
    if !(x >= 10.0) || !x.is_finite() {
        return Err(Error::Domain(format!("the band is asymptotic; need x ≥ 10, got {x}")));
    }
    let d = v - e0;
    let lo = (x * x.ln()).powi(2);
    let hi = (x * (x * x.ln()).ln()).powi(2);
    Ok(if d <= lo {
        BoundsClass::Below
    } else if d >= hi {
        BoundsClass::Above
    } else {
        BoundsClass::Inside
    })
}

fn check_zeta_e0(e0: f64) -> Result<f64> {
    let two_pi = 2.0 * PI;
    if !e0.is_finite() || e0 < two_pi * (1.0 - TWO_PI_SLACK) {
        return Err(Error::Domain(format!("zeta reference energy must be at least 2π, got {e0}")));
    }
    Ok(e0.max(two_pi))
}

/// Wu–Sprung turning point, in the cancellation-free form
/// `(√δ/π) [ln(E₀/2π) + 2(atanh(r)/r − 1)]`, `δ = V − E₀`, `r = √(δ/V)`.
pub fn zeta_wkb_x_of_v(v: f64, e0: f64) -> Result<f64> {
    let e0_eff = check_zeta_e0(e0)?;
    if !(v >= e0) || !v.is_finite() {
        return Err(Error::Domain(format!("need V ≥ E₀ = {e0}, got {v}")));
    }
    let delta = (v - e0_eff).max(0.0);
    if delta == 0.0 {
        return Ok(0.0);
    }
    let r = (delta / v).sqrt();
    let shape = if r < 1e-3 {
        // atanh(r)/r − 1 = r²/3 + r⁴/5 + r⁶/7 + …
        let r2 = r * r;
        r2 * (1.0 / 3.0 + r2 * (1.0 / 5.0 + r2 / 7.0))
    } else {
        r.atanh() / r - 1.0
    };
    Ok(delta.sqrt() / PI * ((e0_eff / (2.0 * PI)).ln() + 2.0 * shape))
}

/// Large-`|x|` form of the Wu–Sprung potential,
/// `(π² x² / 4) / W(√(π/2)|x|/e)²`.
pub fn zeta_wkb_asymptote(x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("asymptote needs finite x ≠ 0, got {x}")));
    }
    let w = lambert_w0((PI / 2.0).sqrt() * x.abs() / std::f64::consts::E)?;
    Ok(PI * PI * x * x / (4.0 * w * w))
}

/// A WKB model behind a common interface, selected by name.
pub trait SemiclassicalModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> WkbKind;
    fn default_e0(&self) -> f64 {
        self.kind().default_e0()
    }
    /// Validates `e0` and returns the value actually used.
    fn check_e0(&self, e0: f64) -> Result<f64>;
    fn x_of_v(&self, v: f64, e0: f64) -> Result<f64>;
}

/// Prime potential with an optional fixed Möbius truncation.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrimeModel {
    pub m_max: Option<usize>,
}

impl SemiclassicalModel for PrimeModel {
    fn name(&self) -> &'static str {
        "primes"
    }
    fn kind(&self) -> WkbKind {
        WkbKind::Primes
    }
    fn check_e0(&self, e0: f64) -> Result<f64> {
        check_prime_args(e0, e0)?;
        Ok(e0)
    }
    fn x_of_v(&self, v: f64, e0: f64) -> Result<f64> {
        prime_wkb_x_of_v(v, e0, self.m_max)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZetaModel;

impl SemiclassicalModel for ZetaModel {
    fn name(&self) -> &'static str {
        "zeta"
    }
    fn kind(&self) -> WkbKind {
        WkbKind::Zeta
    }
    fn check_e0(&self, e0: f64) -> Result<f64> {
        check_zeta_e0(e0)?;
        Ok(e0)
    }
    fn x_of_v(&self, v: f64, e0: f64) -> Result<f64> {
        zeta_wkb_x_of_v(v, e0)
    }
}

/// Solves `x(V) = x` for `V` by bracket expansion and Brent's method.
pub fn invert_x_of_v(model: &dyn SemiclassicalModel, x: f64, e0: f64) -> Result<f64> {
    let x = x.abs();
    if x == 0.0 {
        return Ok(e0);
    }
    let mut lo = e0;
    let mut hi = e0 + 1.0;
    while model.x_of_v(hi, e0)? < x {
        lo = hi;
        hi = e0 + 2.0 * (hi - e0);
        if !hi.is_finite() {
            return Err(Error::Domain(format!("no turning point found for x = {x}")));
        }
    }
    let mut failure = None;
    let root = brent(
        |v| match model.x_of_v(v, e0) {
            Ok(xv) => xv - x,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13 * hi,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root.ok_or_else(|| Error::Domain(format!("could not bracket V for x = {x}")))
}

pub fn prime_wkb_v_of_x(x: f64, e0: f64) -> Result<f64> {
    invert_x_of_v(&PrimeModel::default(), x, e0)
}

pub fn zeta_wkb_v_of_x(x: f64, e0: f64) -> Result<f64> {
    invert_x_of_v(&ZetaModel, x, e0)
}

/// Tabulated `x(V)` with monotone interpolation for `V(x)`.
#[derive(Clone, Debug)]
pub struct WkbProfile {
    pub kind: WkbKind,
    pub e0: f64,
    pub m_max: Option<usize>,
    /// Table of `(V, x(V))`, both increasing.
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    interp: Pchip,
}

fn model_for(kind: WkbKind, m_max: Option<usize>) -> Box<dyn SemiclassicalModel> {
    match kind {
        WkbKind::Primes => Box::new(PrimeModel { m_max }),
        WkbKind::Zeta => Box::new(ZetaModel),
    }
}

/// Tabulates `x(V)` on `n_table` heights `E₀ + (v_max − E₀) s²`, `s` uniform,
/// which crowds nodes toward the turning point where `dx/dV` diverges.
pub fn wkb_profile(kind: WkbKind, e0: f64, v_max: f64, n_table: usize) -> Result<WkbProfile> {
    wkb_profile_with(kind, e0, v_max, n_table, None)
}

pub fn wkb_profile_with(
    kind: WkbKind,
    e0: f64,
    v_max: f64,
    n_table: usize,
    m_max: Option<usize>,
) -> Result<WkbProfile> {
    // The default truncation steps at powers of two, so a table must fix it
    // once (at the top of the range) to stay monotone.
    let m_max = match kind {
        WkbKind::Primes => Some(m_max.unwrap_or_else(|| default_m_max(v_max))),
        WkbKind::Zeta => None,
    };
    let model = model_for(kind, m_max);
    model.check_e0(e0)?;
    if !(v_max > e0) || !v_max.is_finite() {
        return Err(Error::Domain(format!("need v_max > E₀, got {v_max} ≤ {e0}")));
    }
    if n_table < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: n_table,
        });
    }
    let last = (n_table - 1) as f64;
    let v: Vec<f64> = (0..n_table)
        .map(|j| {
            let s = j as f64 / last;
            if j + 1 == n_table {
                v_max
            } else {
                e0 + (v_max - e0) * s * s
            }
        })
        .collect();
    let x: Vec<f64> = v
        .par_iter()
        .map(|&vj| model.x_of_v(vj, e0))
        .collect::<Result<_>>()?;
    WkbProfile::from_table(kind, e0, m_max, v, x)
}

impl WkbProfile {
    pub fn from_table(kind: WkbKind, e0: f64, m_max: Option<usize>, v: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if v.len() != x.len() || v.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                found: v.len().min(x.len()),
            });
        }
        for (i, w) in x.windows(2).enumerate() {
            if !(w[1] > w[0]) || !(v[i + 1] > v[i]) {
                return Err(Error::Order {
                    index: i + 1,
                    previous: w[0],
                    value: w[1],
                });
            }
        }
        let interp = Pchip::new(x.clone(), v.clone());
        Ok(WkbProfile {
            kind,
            e0,
            m_max,
            v,
            x,
            interp,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn check_range(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if ax > self.x_max() * (1.0 + 1e-12) || !ax.is_finite() {
            return Err(Error::Coverage {
                lo: -self.x_max(),
                hi: self.x_max(),
                need_lo: x.min(0.0),
                need_hi: x.max(0.0),
            });
        }
        Ok(ax)
    }

    /// `V(x)` from the monotone interpolant alone.
    pub fn value_interpolated(&self, x: f64) -> Result<f64> {
        let ax = self.check_range(x)?;
        Ok(self.interp.eval(ax))
    }

    /// `V(x)` with the interpolant polished by a root solve of `x(V) = |x|`
    /// inside the bracketing table interval.
    pub fn value(&self, x: f64) -> Result<f64> {
        let ax = self.check_range(x)?;
        if ax == 0.0 {
            return Ok(self.e0);
        }
        let j = self.x.partition_point(|&xi| xi < ax).clamp(1, self.x.len() - 1);
        let model = model_for(self.kind, self.m_max);
        let (lo, hi) = (self.v[j - 1], self.v[j]);
        let mut failure = None;
        let root = brent(
            |v| match model.x_of_v(v, self.e0) {
                Ok(xv) => xv - ax,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-14 * hi.abs(),
            100,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(root.unwrap_or_else(|| self.interp.eval(ax)))
    }

    /// Samples the interpolated profile on `[−x_max, x_max]`.
    pub fn sample(&self, x_max: f64, dx: f64) -> Result<SampledPotential> {
        self.check_range(x_max)?;
        SampledPotential::from_fn(
            |x| self.interp.eval(x.abs()),
            x_max,
            dx,
            self.kind.method(),
            0,
            self.interp.eval(x_max),
        )
    }

    /// CSV `V,x` with `#` metadata (kind, e0, m_max and `extra`).
    pub fn write_csv<W: Write>(&self, mut out: W, extra: &[(String, String)]) -> Result<()> {
        writeln!(out, "# kind={}", self.kind)?;
        writeln!(out, "# e0={}", fmt_f64(self.e0))?;
        match self.m_max {
            Some(m) => writeln!(out, "# m_max={m}")?,
            None => writeln!(out, "# m_max=auto")?,
        }
        for (k, v) in extra {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "V,x")?;
        for (v, x) in self.v.iter().zip(&self.x) {
            writeln!(out, "{},{}", fmt_f64(*v), fmt_f64(*x))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut kind = None;
        let mut e0 = None;
        let mut m_max = None;
        let mut header = false;
        let (mut v, mut x) = (Vec::new(), Vec::new());
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, val)) = rest.trim().split_once('=') {
                    let val = val.trim();
                    match key.trim() {
                        "kind" => kind = Some(val.parse::<WkbKind>()?),
                        "e0" => {
                            e0 = Some(val.parse::<f64>().map_err(|_| Error::Parse {
                                line: line_no,
                                token: val.to_string(),
                            })?)
                        }
                        "m_max" if val != "auto" => {
                            m_max = Some(val.parse::<usize>().map_err(|_| Error::Parse {
                                line: line_no,
                                token: val.to_string(),
                            })?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header {
                if line.trim() != "V,x" {
                    return Err(Error::Parse {
                        line: line_no,
                        token: line,
                    });
                }
                header = true;
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: line_no,
                token: line.clone(),
            })?;
            for (token, dest) in [(a, &mut v), (b, &mut x)] {
                dest.push(token.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    token: token.to_string(),
                })?);
            }
        }
        let kind = kind.ok_or_else(|| Error::Invalid("profile lacks a kind".into()))?;
        let e0 = e0.ok_or_else(|| Error::Invalid("profile lacks e0".into()))?;
        WkbProfile::from_table(kind, e0, m_max, v, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fit_line;

    #[test]
    fn prime_turning_point_basics() {
        assert_eq!(prime_wkb_x_of_v(1.5, 1.5, None).unwrap(), 0.0);
        assert!(prime_wkb_x_of_v(1.0, 1.5, None).is_err());
        assert!(prime_wkb_x_of_v(5.0, 1.0, None).is_err());
        let a = prime_wkb_x_of_v_tol(20.0, 1.5, None, 1e-8).unwrap();
        let b = prime_wkb_x_of_v_tol(20.0, 1.5, None, 1e-13).unwrap();
        assert!(a > 0.0);
        assert!(((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn prime_turning_point_against_gauss_legendre() {
        // Independent fixed-order oracle on the substituted integrand.
        let v: f64 = 50.0;
        let e0 = 3.0;
        let m_max = default_m_max(v);
        let n = 400;
        let t_max = (v - e0).sqrt();
        let mut total = 0.0;
        // composite midpoint with Richardson on two resolutions
        let mid = |n: usize| {
            let h = t_max / n as f64;
            (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    2.0 * prime_density(v - t * t, m_max) * h
                })
                .sum::<f64>()
        };
        total += (4.0 * mid(2 * n) - mid(n)) / 3.0;
        let got = prime_wkb_x_of_v(v, e0, None).unwrap();
        assert!(((got - total) / total).abs() < 1e-8, "{got} vs {total}");
    }

    #[test]
    fn harmonic_density_gives_parabola() {
        // Constant density 1/2 must give x = √(V − E₀).
        struct Flat;
        impl SemiclassicalModel for Flat {
            fn name(&self) -> &'static str {
                "flat"
            }
            fn kind(&self) -> WkbKind {
                WkbKind::Primes
            }
            fn check_e0(&self, e0: f64) -> Result<f64> {
                Ok(e0)
            }
            fn x_of_v(&self, v: f64, e0: f64) -> Result<f64> {
                Ok(integrate(|_| 2.0 * 0.5, 0.0, (v - e0).sqrt(), 1e-12, 0.0).value)
            }
        }
        let v = invert_x_of_v(&Flat, 3.0, 1.0).unwrap();
        assert!((v - 10.0).abs() < 1e-10);
    }

    #[test]
    fn band_classification() {
        let x: f64 = 50.0;
        let lo = (x * x.ln()).powi(2);
        let hi = (x * (x * x.ln()).ln()).powi(2);
        assert_eq!(prime_wkb_bounds_check(x, 1.5 + lo / 2.0, 1.5).unwrap(), BoundsClass::Below);
        assert_eq!(prime_wkb_bounds_check(x, 1.5 + 2.0 * hi, 1.5).unwrap(), BoundsClass::Above);
        let v = prime_wkb_v_of_x(x, 1.5).unwrap();
        assert_eq!(prime_wkb_bounds_check(x, v, 1.5).unwrap(), BoundsClass::Inside);
        assert!(prime_wkb_bounds_check(5.0, 100.0, 1.5).is_err());
    }

    #[test]
    fn zeta_closed_form_matches_spec_form_and_quadrature() {
        let e0 = 9.0;
        for &v in &[10.0f64, 50.0, 400.0] {
            let d = v - e0;
            let direct = (d.sqrt() * (e0 / (2.0 * PI * std::f64::consts::E.powi(2))).ln()
                + v.sqrt() * ((v.sqrt() + d.sqrt()) / (v.sqrt() - d.sqrt())).ln())
                / PI;
            let stable = zeta_wkb_x_of_v(v, e0).unwrap();
            assert!((direct - stable).abs() < 1e-12 * stable.abs().max(1.0));
            // Abel form with ρ = ln(E/2π)/2π, E = V − t²
            let quad = integrate(|t| 2.0 * ((v - t * t) / (2.0 * PI)).ln() / (2.0 * PI), 0.0, d.sqrt(), 1e-13, 0.0).value;
            assert!((quad - stable).abs() < 1e-10 * stable);
        }
        assert_eq!(zeta_wkb_x_of_v(7.0, 7.0).unwrap(), 0.0);
        assert!(zeta_wkb_x_of_v(10.0, 5.0).is_err());
        // A truncated 2π, as typed on a command line, is accepted.
        #[allow(clippy::approx_constant)]
        let typed = 6.283_185_3;
        assert!(zeta_wkb_x_of_v(10.0, typed).is_ok());
    }

    #[test]
    fn zeta_turning_point_scaling() {
        let slope = |e0: f64| {
            let xs: Vec<f64> = (0..20).map(|i| 1e-4 * 10f64.powf(i as f64 / 19.0)).collect();
            let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let ld: Vec<f64> = xs.iter().map(|&x| (zeta_wkb_v_of_x(x, e0).unwrap() - e0).ln()).collect();
            fit_line(&lx, &ld).unwrap().slope
        };
        assert!((slope(2.0 * PI) - 2.0 / 3.0).abs() < 0.05);
        assert!((slope(7.0) - 2.0).abs() < 0.1);
    }

    #[test]
    fn asymptote_properties() {
        assert!(zeta_wkb_asymptote(0.0).is_err());
        assert_eq!(zeta_wkb_asymptote(-30.0).unwrap(), zeta_wkb_asymptote(30.0).unwrap());
        let v = zeta_wkb_v_of_x(100.0, 2.0 * PI).unwrap();
        let a = zeta_wkb_asymptote(100.0).unwrap();
        assert!(((a - v) / v).abs() < 0.05);
    }

    #[test]
    fn profile_round_trip_and_monotone() {
        for (kind, e0, vmax) in [(WkbKind::Zeta, 2.0 * PI, 500.0), (WkbKind::Primes, 1.5, 300.0)] {
            let p = wkb_profile(kind, e0, vmax, 200).unwrap();
            assert!(p.x.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(p.value(0.0).unwrap(), e0);
            for &target in &[e0 + 0.37, 0.5 * (e0 + vmax), vmax * 0.97] {
                let x = model_for(kind, p.m_max).x_of_v(target, e0).unwrap();
                let back = p.value(x).unwrap();
                assert!(((back - target) / target).abs() < 1e-8, "{kind} {target} {back}");
            }
            assert!(p.value(p.x_max() * 1.5).is_err());
        }
    }

    #[test]
    fn profile_csv_round_trip() {
        let p = wkb_profile(WkbKind::Zeta, 7.0, 100.0, 20).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &[]).unwrap();
        let q = WkbProfile::read_csv(buf.as_slice()).unwrap();
        assert_eq!(q.v, p.v);
        assert_eq!(q.x, p.x);
        assert_eq!(q.e0, 7.0);
        assert_eq!(q.kind, WkbKind::Zeta);
    }

    #[test]
    fn registry_names() {
        let models: Vec<Box<dyn SemiclassicalModel>> = vec![Box::new(PrimeModel::default()), Box::new(ZetaModel)];
        assert_eq!(models.iter().map(|m| m.name()).collect::<Vec<_>>(), ["primes", "zeta"]);
        assert!(models[1].check_e0(5.0).is_err());
    }
}
