//! Linear algebra behind the reflectionless potential.
//!
//! With `u_n = c_n e^{-κ_n x}` the Kay–Moses matrix factors as
//! `I + C = U (D + A) U`, where `U = diag(u)`, `D = U^{-2}` and
//! `A_mn = 1/(κ_m + κ_n)` is a positive definite Cauchy matrix. Solving
//! `(D + A) y = 1` gives `s = Σ y` and `t = Σ κ y`, and the well is
//! `2 (s² − 2t)`. The system is symmetric positive definite but extremely
//! ill-conditioned close to the origin, so the solve climbs a precision ladder
//! (double precision first, then MPFR) until the forward-error estimate fits
//! the policy's tolerance.

use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents above this are clamped in double precision; the state is
/// decoupled from the rest of the system long before that.
const MAX_F64_EXPONENT: f64 = 600.0;

/// Working precision for Marchenko evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    /// Largest MPFR precision (bits) tried once double precision fails.
    /// Values of 53 or less disable software precision.
    pub max_bits: u32,
    /// Relative error budget for one potential value.
    pub tolerance: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            max_bits: 1024,
            tolerance: 1e-10,
        }
    }
}

impl PrecisionPolicy {
    pub fn with_max_bits(max_bits: u32) -> Self {
        PrecisionPolicy {
            max_bits,
            ..Self::default()
        }
    }

    /// Double precision first, then doubling MPFR precisions from 128 bits
    /// up to `max_bits`.
    pub fn ladder(&self) -> Vec<u32> {
        let mut steps = vec![53];
        let mut bits = 128;
        while bits < self.max_bits {
            steps.push(bits);
            bits *= 2;
        }
        if self.max_bits > 53 {
            steps.push(self.max_bits);
        }
        steps
    }
}

/// Outcome of one scaled solve.
#[derive(Clone, Copy, Debug)]
pub struct ScaledSolve {
    /// `2 (s² − 2t)`: the well depth relative to the asymptote.
    pub well: f64,
    /// `ln det(D + A)`.
    pub log_det: f64,
    /// Forward-error estimate relative to `max(|well|, 1)`.
    pub estimate: f64,
    /// Precision that produced the result (53 = double).
    pub bits: u32,
}

/// States whose diagonal term exceeds `e^DECOUPLED` contribute below
/// `1e-20` to the solution and are dropped from the system.
const DECOUPLED: f64 = 46.0;

/// Runs the precision ladder at `x` until the estimate meets the tolerance.
pub fn solve(kappa: &[f64], log_c2: &[f64], x: f64, policy: &PrecisionPolicy) -> Result<ScaledSolve> {
    let (k, lc, dropped) = coupled_states(kappa, log_c2, x);
    let mut last = None;
    for bits in policy.ladder() {
        let attempt = if bits <= 53 {
            solve_f64(&k, &lc, x)
        } else {
            solve_mp(&k, &lc, x, bits)
        };
        match attempt {
            Some(mut out) if out.estimate <= policy.tolerance => {
                out.log_det += dropped;
                return Ok(out);
            }
            Some(out) => last = Some((bits, out.estimate)),
            None => last = Some((bits, f64::INFINITY)),
        }
    }
    let (bits, estimate) = last.unwrap_or((53, f64::INFINITY));
    Err(Error::Precision { x, bits, estimate })
}

/// `ln det(D + A)` alone. The determinant is far more sensitive to the
/// conditioning of `A` than the well is, so precision is raised until two
/// consecutive rungs of the ladder agree to `policy.tolerance` (relative to
/// `max(1, |ln det(I + C)|)`, the quantity callers use).
pub fn log_det(kappa: &[f64], log_c2: &[f64], x: f64, policy: &PrecisionPolicy) -> Result<f64> {
    let (k, lc, dropped) = coupled_states(kappa, log_c2, x);
    let linear: f64 = kappa.iter().zip(log_c2).map(|(k, c)| c - 2.0 * k * x).sum();
    let mut previous: Option<f64> = None;
    let mut last_gap = f64::INFINITY;
    for bits in policy.ladder().into_iter().filter(|&b| b > 53) {
        let Some(out) = solve_mp(&k, &lc, x, bits) else {
            previous = None;
            continue;
        };
        let value = out.log_det + dropped;
        if let Some(p) = previous {
            last_gap = (value - p).abs() / (linear + value).abs().max(1.0);
            if last_gap <= policy.tolerance {
                return Ok(value);
            }
        }
        previous = Some(value);
    }
    Err(Error::Precision {
        x,
        bits: policy.max_bits,
        estimate: last_gap,
    })
}

/// Splits off decoupled states. Returns the remaining `κ`, `ln c²` and the
/// dropped states' contribution `Σ ln D_n` to `ln det(D + A)`.
fn coupled_states(kappa: &[f64], log_c2: &[f64], x: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let mut k = Vec::with_capacity(kappa.len());
    let mut lc = Vec::with_capacity(kappa.len());
    let mut dropped = 0.0;
    for (&kn, &cn) in kappa.iter().zip(log_c2) {
        let exponent = 2.0 * kn * x - cn;
        if exponent > DECOUPLED {
            dropped += exponent;
        } else {
            k.push(kn);
            lc.push(cn);
        }
    }
    (k, lc, dropped)
}

fn empty_solve() -> ScaledSolve {
    ScaledSolve {
        well: 0.0,
        log_det: 0.0,
        estimate: 0.0,
        bits: 53,
    }
}

/// Rounding floor of `2 (s² − 2t)` evaluated at unit roundoff `unit`.
fn rounding_floor(n: usize, unit: f64, s: f64, t: f64, well: f64) -> f64 {
    n as f64 * unit * (s * s + 2.0 * t.abs()) / well.abs().max(1.0)
}

/// `1 − (D + A) y` with the matrix rebuilt and the products accumulated at
/// `bits` of precision, so the residual is accurate even when `y` is not.
fn residual(kappa: &[f64], log_c2: &[f64], x: f64, y: &[Float], bits: u32) -> Vec<Float> {
    let k: Vec<Float> = kappa.iter().map(|&v| Float::with_val(bits, v)).collect();
    let mut entry = Float::new(bits);
    let mut prod = Float::new(bits);
    (0..kappa.len())
        .map(|i| {
            let mut acc = Float::with_val(bits, 1);
            entry.assign_exponent(&k[i], x, log_c2[i]);
            entry.exp_mut();
            prod.assign(&entry * &y[i]);
            acc -= &prod;
            for (kj, yj) in k.iter().zip(y) {
                entry.assign(&k[i] + kj);
                prod.assign(yj / &entry);
                acc -= &prod;
            }
            acc
        })
        .collect()
}

/// Double-precision Cholesky route with one step of iterative refinement
/// (residual at 128 bits). `None` when the factorisation breaks down.
pub fn solve_f64(kappa: &[f64], log_c2: &[f64], x: f64) -> Option<ScaledSolve> {
    let n = kappa.len();
    if n == 0 {
        return Some(empty_solve());
    }
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            l[i * n + j] = 1.0 / (kappa[i] + kappa[j]);
        }
        let exponent = (2.0 * kappa[i] * x - log_c2[i]).min(MAX_F64_EXPONENT);
        l[i * n + i] += exponent.exp();
    }
    for j in 0..n {
        let mut diag = l[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let pivot = diag.sqrt();
        l[j * n + j] = pivot;
        for i in (j + 1)..n {
            let mut acc = l[i * n + j];
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = acc / pivot;
        }
    }
    let y = cholesky_solve_f64(&l, n, vec![1.0; n]);
    let y_mp: Vec<Float> = y.iter().map(|&v| Float::with_val(128, v)).collect();
    let r: Vec<f64> = residual(kappa, log_c2, x, &y_mp, 128)
        .iter()
        .map(Float::to_f64)
        .collect();
    let dy = cholesky_solve_f64(&l, n, r);

    let s: f64 = y.iter().sum();
    let t: f64 = y.iter().zip(kappa).map(|(a, b)| a * b).sum();
    let ds: f64 = dy.iter().sum();
    let dt: f64 = dy.iter().zip(kappa).map(|(a, b)| a * b).sum();
    let correction = 2.0 * (2.0 * s * ds + ds * ds - 2.0 * dt);
    let well = 2.0 * (s * s - 2.0 * t) + correction;
    let log_det: f64 = (0..n).map(|i| 2.0 * l[i * n + i].ln()).sum();
    let estimate =
        correction.abs() / well.abs().max(1.0) + rounding_floor(n, f64::EPSILON, s, t, well);
    if !well.is_finite() || !estimate.is_finite() {
        return None;
    }
    Some(ScaledSolve {
        well,
        log_det,
        estimate,
        bits: 53,
    })
}

fn cholesky_solve_f64(l: &[f64], n: usize, mut b: Vec<f64>) -> Vec<f64> {
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i * n + k] * b[k];
        }
        b[i] = acc / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut acc = b[i];
        for k in (i + 1)..n {
            acc -= l[k * n + i] * b[k];
        }
        b[i] = acc / l[i * n + i];
    }
    b
}

/// Solves `L Lᵀ y = b` in place; `l` is the packed lower triangle.
fn cholesky_solve_mp(l: &[Vec<Float>], mut b: Vec<Float>, prod: &mut Float) -> Vec<Float> {
    let n = b.len();
    for i in 0..n {
        let (done, rest) = b.split_at_mut(i);
        let acc = &mut rest[0];
        for (lk, zk) in l[i].iter().zip(done.iter()) {
            prod.assign(lk * zk);
            *acc -= &*prod;
        }
        *acc /= &l[i][i];
    }
    for i in (0..n).rev() {
        let (head, done) = b.split_at_mut(i + 1);
        let acc = &mut head[i];
        for (kk, yk) in ((i + 1)..n).zip(done.iter()) {
            prod.assign(&l[kk][i] * yk);
            *acc -= &*prod;
        }
        *acc /= &l[i][i];
    }
    b
}

/// MPFR Cholesky route at `bits` of precision, with one step of iterative
/// refinement whose residual is formed at `2·bits`. The size of the
/// correction is the error estimate.
pub fn solve_mp(kappa: &[f64], log_c2: &[f64], x: f64, bits: u32) -> Option<ScaledSolve> {
    let n = kappa.len();
    if n == 0 {
        return Some(empty_solve());
    }
    let k: Vec<Float> = kappa.iter().map(|&v| Float::with_val(bits, v)).collect();
    // packed lower triangle, row i holds columns 0..=i
    let mut l: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let mut f = Float::with_val(bits, &k[i] + &k[j]);
                    f.recip_mut();
                    f
                })
                .collect()
        })
        .collect();
    let mut scratch = Float::new(bits);
    for (i, row) in l.iter_mut().enumerate() {
        scratch.assign_exponent(&k[i], x, log_c2[i]);
        scratch.exp_mut();
        row[i] += &scratch;
    }

    // Products are rounded into `prod` first: a fused multiply-subtract
    // would allocate a double-width temporary on every call.
    let mut prod = Float::new(bits);
    for j in 0..n {
        let (row_j, below) = l[j..].split_first_mut().expect("row j exists");
        {
            let (head, tail) = row_j.split_at_mut(j);
            for h in head.iter() {
                prod.assign(h.square_ref());
                tail[0] -= &prod;
            }
        }
        if row_j[j].is_sign_negative() || row_j[j].is_zero() || !row_j[j].is_finite() {
            return None;
        }
        row_j[j].sqrt_mut();
        let pivot = &row_j[j];
        let head_j = &row_j[..j];
        for row_i in below.iter_mut() {
            let (head_i, tail_i) = row_i.split_at_mut(j);
            let target = &mut tail_i[0];
            for (a, b) in head_i.iter().zip(head_j) {
                prod.assign(a * b);
                *target -= &prod;
            }
            *target /= pivot;
        }
    }

    let ones = vec![Float::with_val(bits, 1); n];
    let y = cholesky_solve_mp(&l, ones, &mut prod);
    let r: Vec<Float> = residual(kappa, log_c2, x, &y, 2 * bits)
        .into_iter()
        .map(|v| Float::with_val(bits, v))
        .collect();
    let dy = cholesky_solve_mp(&l, r, &mut prod);

    let sum = |v: &[Float], weights: Option<&[Float]>, prod: &mut Float| {
        let mut acc = Float::with_val(bits, 0);
        for (i, vi) in v.iter().enumerate() {
            match weights {
                Some(w) => {
                    prod.assign(vi * &w[i]);
                    acc += &*prod;
                }
                None => acc += vi,
            }
        }
        acc
    };
    let s = sum(&y, None, &mut prod);
    let t = sum(&y, Some(&k), &mut prod);
    let mut s_ref = sum(&dy, None, &mut prod);
    s_ref += &s;
    let mut t_ref = sum(&dy, Some(&k), &mut prod);
    t_ref += &t;
    let well_of = |s: &Float, t: &Float| {
        let mut w = Float::with_val(bits, s.square_ref());
        w -= t;
        w -= t;
        w *= 2u32;
        w
    };
    let well_raw = well_of(&s, &t);
    let well = well_of(&s_ref, &t_ref);
    let correction = Float::with_val(bits, &well - &well_raw).to_f64();

    let mut log_det = Float::with_val(bits, 0);
    for (i, row) in l.iter().enumerate() {
        scratch.assign(row[i].ln_ref());
        log_det += &scratch;
    }
    log_det *= 2u32;

    let well64 = well.to_f64();
    let unit = (2.0f64).powi(1 - bits as i32);
    let estimate = correction.abs() / well64.abs().max(1.0)
        + rounding_floor(n, unit, s_ref.to_f64(), t_ref.to_f64(), well64);
    if !well64.is_finite() || estimate.is_nan() {
        return None;
    }
    Some(ScaledSolve {
        well: well64,
        log_det: log_det.to_f64(),
        estimate,
        bits,
    })
}

trait AssignExponent {
    fn assign_exponent(&mut self, kappa: &Float, x: f64, log_c2: f64);
}

impl AssignExponent for Float {
    /// `self = 2 κ x − ln c²`
    fn assign_exponent(&mut self, kappa: &Float, x: f64, log_c2: f64) {
        self.assign(kappa * x);
        *self *= 2u32;
        *self -= log_c2;
    }
}
