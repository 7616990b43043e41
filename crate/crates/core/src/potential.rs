//! Potentials sampled on a uniform grid, and their CSV form.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Marchenko,
    Dressing,
    WkbPrimes,
    WkbZeta,
    /// Sampled directly from a closed form.
    Analytic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Marchenko => "marchenko",
            Method::Dressing => "dressing",
            Method::WkbPrimes => "wkb-primes",
            Method::WkbZeta => "wkb-zeta",
            Method::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marchenko" => Ok(Method::Marchenko),
            "dressing" => Ok(Method::Dressing),
            "wkb-primes" => Ok(Method::WkbPrimes),
            "wkb-zeta" => Ok(Method::WkbZeta),
            "analytic" => Ok(Method::Analytic),
            other => Err(Error::Invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// `values[i] = V(x0 + i·dx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPotential {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    pub method: Method,
    pub n_eigenvalues: usize,
    pub v_infinity: f64,
}

impl SampledPotential {
    pub fn new(
        x0: f64,
        dx: f64,
        values: Vec<f64>,
        method: Method,
        n_eigenvalues: usize,
        v_infinity: f64,
    ) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() || !x0.is_finite() {
            return Err(Error::Invalid(format!("bad grid x0={x0}, dx={dx}")));
        }
        if values.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite potential at index {i}")));
        }
        Ok(SampledPotential {
            x0,
            dx,
            values,
            method,
            n_eigenvalues,
            v_infinity,
        })
    }

    /// Samples `f` on `[-x_max, x_max]` with spacing `dx`.
    pub fn from_fn<F: Fn(f64) -> f64>(
        f: F,
        x_max: f64,
        dx: f64,
        method: Method,
        n_eigenvalues: usize,
        v_infinity: f64,
    ) -> Result<Self> {
        let half = half_points(x_max, dx)?;
        let values = (0..2 * half + 1)
            .map(|i| f((i as f64 - half as f64) * dx))
            .collect();
        SampledPotential::new(-(half as f64) * dx, dx, values, method, n_eigenvalues, v_infinity)
    }

    /// Builds the symmetric grid `[-x_max, x_max]` from samples on
    /// `x_i = i·dx ≥ 0` of an even function.
    pub fn mirrored(
        half: &[f64],
        dx: f64,
        method: Method,
        n_eigenvalues: usize,
        v_infinity: f64,
    ) -> Result<Self> {
        if half.is_empty() {
            return Err(Error::InsufficientData { needed: 1, found: 0 });
        }
        let m = half.len() - 1;
        let mut values = Vec::with_capacity(2 * m + 1);
        values.extend(half.iter().rev());
        values.extend(&half[1..]);
        SampledPotential::new(-(m as f64) * dx, dx, values, method, n_eigenvalues, v_infinity)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Abscissa of sample `i`. Grids aligned to multiples of `dx` use
    /// `k·dx` with integer `k`, so mirrored points are exact negatives.
    pub fn x(&self, i: usize) -> f64 {
        let k0 = self.x0 / self.dx;
        if (k0 - k0.round()).abs() < 1e-9 {
            (k0.round() + i as f64) * self.dx
        } else {
            self.x0 + i as f64 * self.dx
        }
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point nearest to `x`, if inside the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = ((x - self.x0) / self.dx).round();
        (r >= 0.0 && (r as usize) < self.values.len()).then_some(r as usize)
    }

    /// Four-point Lagrange interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.values.len();
        let s = (x - self.x0) / self.dx;
        if s < -1e-9 || s > (n - 1) as f64 + 1e-9 {
            return None;
        }
        if n < 4 {
            let i = (s.floor().max(0.0) as usize).min(n - 2);
            let t = s - i as f64;
            return Some(self.values[i] * (1.0 - t) + self.values[i + 1] * t);
        }
        let i = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = s - i as f64;
        let v = &self.values[i..i + 4];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        Some(l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3])
    }

    /// `max |V(x_i) − V(−x_i)|` over the grid points whose mirror image is
    /// also a grid point.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.values.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            if let Some(j) = self.index_of(-self.x(i)) {
                if (self.x(j) + self.x(i)).abs() < 1e-9 * self.dx {
                    worst = worst.max((self.values[i] - self.values[j]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Writes `#` metadata lines (the standard ones plus `extra`), a header
    /// and 17-significant-digit rows.
    pub fn write_csv<W: Write>(&self, mut out: W, extra: &[(String, String)]) -> Result<()> {
        writeln!(out, "# method={}", self.method)?;
        writeln!(out, "# n={}", self.n_eigenvalues)?;
        writeln!(out, "# v_infinity={}", fmt_f64(self.v_infinity))?;
        writeln!(out, "# dx={}", fmt_f64(self.dx))?;
        for (k, v) in extra {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "x,V")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.x(i)), fmt_f64(*v))?;
        }
        Ok(())
    }

    /// Reads the format written by [`SampledPotential::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut meta = std::collections::BTreeMap::new();
        let mut xs = Vec::new();
        let mut values = Vec::new();
        let mut header_seen = false;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !header_seen {
                if line.trim() != "x,V" {
                    return Err(Error::Parse {
                        line: line_no,
                        token: line,
                    });
                }
                header_seen = true;
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: line_no,
                token: line.clone(),
            })?;
            let parse = |t: &str| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    token: t.to_string(),
                })
            };
            xs.push(parse(a)?);
            values.push(parse(b)?);
        }
        if xs.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                found: xs.len(),
            });
        }
        let get = |k: &str| {
            meta.get(k)
                .ok_or_else(|| Error::Invalid(format!("missing metadata {k:?}")))
        };
        let parse_meta = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Invalid(format!("bad metadata {k:?}")))
        };
        let dx = parse_meta("dx")?;
        let v_infinity = parse_meta("v_infinity")?;
        let n_eigenvalues = get("n")?
            .parse()
            .map_err(|_| Error::Invalid("bad metadata \"n\"".into()))?;
        let method = get("method")?.parse()?;
        let p = SampledPotential::new(xs[0], dx, values, method, n_eigenvalues, v_infinity)?;
        for (i, &x) in xs.iter().enumerate() {
            if (p.x(i) - x).abs() > 1e-6 * dx {
                return Err(Error::Invalid(format!("grid is not uniform at row {}", i + 1)));
            }
        }
        Ok(p)
    }
}

/// Number of grid steps in `[0, x_max]`.
pub(crate) fn half_points(x_max: f64, dx: f64) -> Result<usize> {
    if !(x_max > 0.0) || !(dx > 0.0) || !x_max.is_finite() || !dx.is_finite() {
        return Err(Error::Invalid(format!("need x_max > 0 and dx > 0, got {x_max}, {dx}")));
    }
    let steps = (x_max / dx * (1.0 + 1e-12)).floor();
    if !(1.0..=1e9).contains(&steps) {
        return Err(Error::Invalid(format!("grid with {steps} steps")));
    }
    Ok(steps as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampledPotential {
        SampledPotential::from_fn(|x| -2.0 / x.cosh().powi(2) + 0.1 * x.sin() / 3.0, 5.0, 0.1, Method::Analytic, 1, 0.0)
            .unwrap()
    }

    #[test]
    fn grid_shape() {
        let p = sample();
        assert_eq!(p.len(), 101);
        assert!((p.x0 + 5.0).abs() < 1e-12);
        assert!((p.x_max() - 5.0).abs() < 1e-12);
        assert_eq!(p.index_of(0.0), Some(50));
        assert_eq!(p.index_of(6.0), None);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let p = sample();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &[("config_hash".into(), "abc".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# method=analytic\n"));
        assert!(text.contains("# config_hash=abc\n"));
        let q = SampledPotential::read_csv(text.as_bytes()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(SampledPotential::read_csv("".as_bytes()).is_err());
        assert!(SampledPotential::read_csv("# dx=0.1\nx,V\n".as_bytes()).is_err());
        let bad = "# method=analytic\n# n=1\n# v_infinity=0\n# dx=0.1\nx,V\n0,1\n0.1,zz\n";
        assert!(matches!(
            SampledPotential::read_csv(bad.as_bytes()),
            Err(Error::Parse { line: 7, .. })
        ));
    }

    #[test]
    fn interpolation_is_cubic_exact() {
        let p = SampledPotential::from_fn(|x| x * x * x - x, 2.0, 0.25, Method::Analytic, 0, 0.0).unwrap();
        for &x in &[-1.9, -0.3, 0.0, 0.77, 1.99] {
            assert!((p.interpolate(x).unwrap() - (x * x * x - x)).abs() < 1e-12);
        }
        assert!(p.interpolate(2.5).is_none());
    }

    #[test]
    fn mirrored_grid_is_symmetric() {
        let half: Vec<f64> = (0..=10).map(|i| (i as f64 * 0.1).powi(2)).collect();
        let p = SampledPotential::mirrored(&half, 0.1, Method::Analytic, 0, 0.0).unwrap();
        assert_eq!(p.len(), 21);
        assert_eq!(p.symmetry_defect(), 0.0);
        assert_eq!(p.values[10], 0.0);
    }
}
