//! Forward eigenvalue solver for `−ψ'' + V ψ = E ψ`.
//!
//! Numerov's recurrence is written for `w_i = (1 + h²(E − V_i)/12) ψ_i`, which
//! turns it into the symmetric three-term recurrence
//! `w_{i+1} + w_{i−1} = c_i w_i`. Its sign changes count the discrete
//! eigenvalues below `E` exactly, and the Casoratian of two solutions is
//! independent of the index, so matching an outward and an inward solution at
//! the outer turning point vanishes exactly at a discrete eigenvalue. Levels
//! are bracketed by node count, polished with Brent's method on the matching
//! Casoratian, and extrapolated from steps `h` and `2h`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::potential::SampledPotential;
use crate::spectra::{fmt_f64, Spectrum};

const RESCALE: f64 = 1e150;
/// Evanescent tail length (in decay lengths) kept beyond the sampled range.
const PAD_DECAY_LENGTHS: f64 = 40.0;
const MAX_PAD_POINTS: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub dx: f64,
    /// Order of the step-halving extrapolation (Numerov is fourth order).
    pub extrapolation_order: u32,
    pub tolerance: f64,
    /// Length of the constant extension added on each side.
    pub padding: f64,
}

/// Recovered levels with their step-halving error estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    /// Levels on the sampled grid (step `h`), before extrapolation.
    pub fine: Vec<f64>,
    /// Levels on every other point (step `2h`).
    pub coarse: Vec<f64>,
    /// `|E_h − E_2h| / 15`.
    pub estimates: Vec<f64>,
    pub meta: SolverMeta,
}

/// A discretised problem on `x_0 + i h` with zero boundary values.
struct Grid {
    h: f64,
    v: Vec<f64>,
}

impl Grid {
    fn coefficients(&self, e: f64) -> impl Iterator<Item = f64> + '_ {
        let q = self.h * self.h / 12.0;
        self.v.iter().map(move |&vi| {
            let k = e - vi;
            2.0 * (1.0 - 5.0 * q * k) / (1.0 + q * k)
        })
    }

    /// Sign changes of the outward solution: the number of discrete
    /// eigenvalues below `e`.
    fn count_below(&self, e: f64) -> usize {
        let c: Vec<f64> = self.coefficients(e).collect();
        let n = c.len();
        let (mut prev, mut cur) = (0.0f64, 1e-30f64);
        let mut nodes = 0;
        for ci in c.iter().take(n - 1).skip(1) {
            let next = ci * cur - prev;
            if next == 0.0 {
                // count an exact zero once, then step past it
                nodes += 1;
                prev = cur;
                cur = -cur * 1e-30;
                continue;
            }
            if next.signum() != cur.signum() {
                nodes += 1;
            }
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
            }
        }
        nodes
    }

    /// Casoratian of the outward and inward solutions at the outer turning
    /// point.
    fn mismatch(&self, e: f64) -> f64 {
        let c: Vec<f64> = self.coefficients(e).collect();
        let n = c.len();
        let m = self
            .v
            .iter()
            .rposition(|&vi| vi < e)
            .unwrap_or(n / 2)
            .clamp(1, n - 3);
        let (mut a0, mut a1) = (0.0f64, 1e-30f64);
        for ci in c.iter().take(m + 1).skip(1) {
            let next = ci * a1 - a0;
            a0 = a1;
            a1 = next;
            let scale = a1.abs().max(a0.abs());
            if scale > RESCALE {
                a0 /= scale;
                a1 /= scale;
            }
        }
        // a0 = w(m), a1 = w(m+1)
        let (mut b1, mut b0) = (0.0f64, 1e-30f64);
        for i in ((m + 1)..(n - 1)).rev() {
            let prev = c[i] * b0 - b1;
            b1 = b0;
            b0 = prev;
            let scale = b1.abs().max(b0.abs());
            if scale > RESCALE {
                b0 /= scale;
                b1 /= scale;
            }
        }
        // b0 = w(m), b1 = w(m+1)
        let norm = (a0.abs() + a1.abs()) * (b0.abs() + b1.abs());
        (a0 * b1 - a1 * b0) / norm
    }

    fn min_v(&self) -> f64 {
        self.v.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The `n`-th (0-based) discrete level strictly inside `(lo, hi)`.
    fn level(&self, n: usize, lo: f64, hi: f64, tol: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        // shrink until the bracket holds exactly level n
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let count = self.count_below(mid);
            if count > n {
                b = mid;
            } else {
                a = mid;
            }
            if self.count_below(a) == n && self.count_below(b) == n + 1 && b - a < 1e-2 * (1.0 + b.abs()) {
                break;
            }
            if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
                break;
            }
        }
        brent(|e| self.mismatch(e), a, b, 0.01 * tol.min(1e-10 * (1.0 + b.abs())), 200).unwrap_or(0.5 * (a + b))
    }
}

fn build_grid(p: &SampledPotential, pad_points: usize, stride: usize) -> Grid {
    let mut v = Vec::with_capacity(p.len() / stride + 2 * pad_points + 2);
    v.resize(pad_points, p.v_infinity);
    v.extend(p.values.iter().step_by(stride));
    v.resize(v.len() + pad_points, p.v_infinity);
    Grid {
        h: p.dx * stride as f64,
        v,
    }
}

/// The lowest `n_levels` bound states of `p`, each to `tol`.
pub fn solve_eigenvalues(p: &SampledPotential, n_levels: usize, tol: f64) -> Result<EigenSolution> {
    if n_levels == 0 {
        return Err(Error::Invalid("request at least one level".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    if p.values.len() < 8 {
        return Err(Error::InsufficientData {
            needed: 8,
            found: p.values.len(),
        });
    }
    let top = p.v_infinity - tol;
    // Start with a tail of a few decay lengths of the shallowest possible
    // state and lengthen it until it covers the highest requested level.
    let mut padding = PAD_DECAY_LENGTHS / (p.v_infinity - p.values.iter().cloned().fold(f64::INFINITY, f64::min)).max(1e-12).sqrt();
    let fine;
    loop {
        let pad_points = ((padding / p.dx).ceil() as usize).div_ceil(2) * 2;
        if pad_points > MAX_PAD_POINTS {
            return Err(Error::InsufficientStates {
                found: n_levels - 1,
                requested: n_levels,
            });
        }
        let grid = build_grid(p, pad_points, 1);
        let found = grid.count_below(top);
        if found < n_levels {
            let grown = padding * 4.0;
            if grown * (p.v_infinity - top).sqrt() > 4.0 * PAD_DECAY_LENGTHS {
                return Err(Error::InsufficientStates {
                    found,
                    requested: n_levels,
                });
            }
            padding = grown;
            continue;
        }
        let e_top = grid.level(n_levels - 1, grid.min_v(), top, tol);
        let needed = PAD_DECAY_LENGTHS / (p.v_infinity - e_top).max(1e-300).sqrt();
        if needed > padding * 1.0001 {
            padding = needed;
            continue;
        }
        fine = grid;
        break;
    }
    let pad_points = (fine.v.len() - p.len()) / 2;
    let coarse = build_grid(p, pad_points / 2, 2);
    let lo = fine.min_v().min(coarse.min_v());
    if coarse.count_below(top) < n_levels {
        return Err(Error::GridTooCoarse {
            level: coarse.count_below(top) + 1,
            discrepancy: f64::INFINITY,
            limit: 10.0 * tol,
        });
    }

    let fine_grid = &fine;
    let pairs: Vec<(f64, f64)> = (0..n_levels)
        .into_par_iter()
        .map(|n| (fine_grid.level(n, lo, top, tol), coarse.level(n, lo, top, tol)))
        .collect();
    let mut eigenvalues = Vec::with_capacity(n_levels);
    let mut estimates = Vec::with_capacity(n_levels);
    for (n, &(eh, e2h)) in pairs.iter().enumerate() {
        let estimate = (eh - e2h).abs() / 15.0;
        if estimate > 10.0 * tol {
            return Err(Error::GridTooCoarse {
                level: n + 1,
                discrepancy: estimate,
                limit: 10.0 * tol,
            });
        }
        eigenvalues.push(eh + (eh - e2h) / 15.0);
        estimates.push(estimate);
    }
    Ok(EigenSolution {
        eigenvalues,
        fine: pairs.iter().map(|p| p.0).collect(),
        coarse: pairs.iter().map(|p| p.1).collect(),
        estimates,
        meta: SolverMeta {
            dx: p.dx,
            extrapolation_order: 4,
            tolerance: tol,
            padding: pad_points as f64 * p.dx,
        },
    })
}

/// Number of discrete levels below `e` on the sampled grid with a constant
/// extension of `padding` on each side.
pub fn count_levels_below(p: &SampledPotential, e: f64, padding: f64) -> usize {
    build_grid(p, (padding / p.dx).ceil() as usize, 1).count_below(e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    /// 1-based level index.
    pub n: usize,
    pub target: f64,
    pub recovered: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

/// Mean absolute error over even and odd level indices (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParitySummary {
    pub even_mean_abs_error: f64,
    pub odd_mean_abs_error: f64,
    pub even_count: usize,
    pub odd_count: usize,
    pub even_better: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub entries: Vec<EigenEntry>,
    pub parity: ParitySummary,
    pub meta: Option<SolverMeta>,
}

/// Pairs a target spectrum with recovered levels.
pub fn compare_spectra(target: &Spectrum, recovered: &[f64]) -> Result<EigenReport> {
    compare_values(target.values(), recovered)
}

pub fn compare_values(target: &[f64], recovered: &[f64]) -> Result<EigenReport> {
    if target.len() != recovered.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            found: recovered.len(),
        });
    }
    let entries: Vec<EigenEntry> = target
        .iter()
        .zip(recovered)
        .enumerate()
        .map(|(i, (&t, &r))| {
            let abs_error = (r - t).abs();
            EigenEntry {
                n: i + 1,
                target: t,
                recovered: r,
                abs_error,
                rel_error: if t != 0.0 { abs_error / t.abs() } else { abs_error },
            }
        })
        .collect();
    let mean = |even: bool| {
        let errs: Vec<f64> = entries
            .iter()
            .filter(|e| (e.n % 2 == 0) == even)
            .map(|e| e.abs_error)
            .collect();
        let count = errs.len();
        let m = if count == 0 { 0.0 } else { errs.iter().sum::<f64>() / count as f64 };
        (m, count)
    };
    let (even_mean_abs_error, even_count) = mean(true);
    let (odd_mean_abs_error, odd_count) = mean(false);
    Ok(EigenReport {
        entries,
        parity: ParitySummary {
            even_mean_abs_error,
            odd_mean_abs_error,
            even_count,
            odd_count,
            even_better: even_count > 0 && odd_count > 0 && even_mean_abs_error < odd_mean_abs_error,
        },
        meta: None,
    })
}

impl EigenReport {
    pub fn with_meta(mut self, meta: SolverMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn max_abs_error(&self) -> f64 {
        self.entries.iter().map(|e| e.abs_error).fold(0.0, f64::max)
    }

    /// CSV `n,target,recovered,abs_err,rel_err`, preceded by `#` metadata.
    pub fn write_csv<W: Write>(&self, mut out: W, extra: &[(String, String)]) -> Result<()> {
        for (k, v) in extra {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "n,target,recovered,abs_err,rel_err")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.n,
                fmt_f64(e.target),
                fmt_f64(e.recovered),
                fmt_f64(e.abs_error),
                fmt_f64(e.rel_error)
            )?;
        }
        Ok(())
    }

    /// Summary JSON: parity statistics, solver settings and the worst error.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "levels": self.entries.len(),
            "max_abs_error": self.max_abs_error(),
            "parity": self.parity,
            "solver": self.meta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Method;

    fn soliton() -> SampledPotential {
        SampledPotential::from_fn(|x| -2.0 / x.cosh().powi(2), 10.0, 1e-3, Method::Analytic, 1, 0.0).unwrap()
    }

    #[test]
    fn one_soliton_level() {
        let s = solve_eigenvalues(&soliton(), 1, 1e-8).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-6, "{:?}", s.eigenvalues);
    }

    #[test]
    fn one_soliton_has_a_single_bound_state() {
        assert!(matches!(
            solve_eigenvalues(&soliton(), 2, 1e-8),
            Err(Error::InsufficientStates { found: 1, requested: 2 })
        ));
    }

    #[test]
    fn harmonic_oscillator_sampled_directly() {
        let p = SampledPotential::from_fn(|x| x * x, 12.0, 1e-3, Method::Analytic, 0, 144.0).unwrap();
        let s = solve_eigenvalues(&p, 21, 1e-7).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            assert!((e - (2 * n + 1) as f64).abs() < 1e-6, "n={n} e={e}");
        }
    }

    #[test]
    fn node_count_matches_level_count() {
        let p = SampledPotential::from_fn(|x| x * x, 10.0, 1e-2, Method::Analytic, 0, 100.0).unwrap();
        let s = solve_eigenvalues(&p, 10, 1e-6).unwrap();
        for (n, e) in s.fine.iter().enumerate() {
            assert_eq!(count_levels_below(&p, e - 1e-6, 5.0), n);
            assert_eq!(count_levels_below(&p, e + 1e-6, 5.0), n + 1);
        }
    }

    #[test]
    fn refinement_is_within_estimate() {
        let f = |x: f64| -6.0 / x.cosh().powi(2) + 0.3 * x.sin().powi(2) / (1.0 + x * x);
        let coarse = SampledPotential::from_fn(f, 12.0, 4e-3, Method::Analytic, 0, 0.0).unwrap();
        let fine = SampledPotential::from_fn(f, 12.0, 2e-3, Method::Analytic, 0, 0.0).unwrap();
        let a = solve_eigenvalues(&coarse, 2, 1e-6).unwrap();
        let b = solve_eigenvalues(&fine, 2, 1e-6).unwrap();
        for n in 0..2 {
            let change = (a.eigenvalues[n] - b.eigenvalues[n]).abs();
            assert!(change < 2.0 * a.estimates[n] + 1e-12, "n={n} change={change:e} est={:e}", a.estimates[n]);
        }
    }

    #[test]
    fn coarse_grid_is_reported() {
        let p = SampledPotential::from_fn(|x| x * x, 12.0, 0.2, Method::Analytic, 0, 144.0).unwrap();
        assert!(matches!(solve_eigenvalues(&p, 30, 1e-8), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn comparison_and_parity() {
        let target = Spectrum::custom(vec![2.0, 3.0, 5.0, 7.0], None).unwrap();
        let same = compare_spectra(&target, target.values()).unwrap();
        assert!(same.entries.iter().all(|e| e.abs_error == 0.0));
        let r = compare_spectra(&target, &[1.6387, 3.0005, 4.9, 7.001]).unwrap();
        assert!((r.entries[0].abs_error - 0.3613).abs() < 1e-12);
        assert!((r.entries[1].abs_error - 0.0005).abs() < 1e-12);
        assert!(r.parity.even_better);
        assert!(matches!(compare_spectra(&target, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn csv_layout() {
        let r = compare_values(&[1.0], &[1.5]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,target,recovered,abs_err,rel_err\n1,"));
    }
}
