//! Airy functions on the real line and their negative zeros.
//!
//! Maclaurin series for `|x| ≤ 7` and the modulus/phase asymptotic expansion
//! beyond. Both agree to about `1e-11` at the switch-over.

use std::f64::consts::{FRAC_PI_4, PI};

const AI0: f64 = 0.355_028_053_887_817_24;
const AIP0: f64 = -0.258_819_403_792_806_8;
const SERIES_LIMIT: f64 = 7.0;

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if (-SERIES_LIMIT..=SERIES_LIMIT).contains(&x) {
        series(x)
    } else if x < 0.0 {
        asymptotic_negative(-x)
    } else {
        asymptotic_positive(x)
    }
}

fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g, mut fp, mut gp) = (0.0, 0.0, 0.0, 0.0);
    let mut tf = 1.0;
    let mut tg = x;
    let mut tfp = x * x / 2.0;
    let mut tgp = 1.0;
    for k in 1..200 {
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tfp *= x3 / ((3.0 * kf) * (3.0 * kf + 2.0));
        tgp *= x3 / ((3.0 * kf - 2.0) * (3.0 * kf));
        let scale = f.abs() + g.abs() + 1e-300;
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * scale {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

/// Coefficients `u_k` and `v_k` of the large-argument expansions.
fn uv(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

fn asymptotic_negative(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (u, v) = uv(24);
    // even/odd partial sums, stopped at the smallest term
    let sum = |c: &[f64], odd: bool| {
        let mut total = 0.0;
        let mut prev = f64::INFINITY;
        let mut k = 0;
        loop {
            let idx = 2 * k + usize::from(odd);
            if idx >= c.len() {
                break;
            }
            let term = c[idx] / zeta.powi(idx as i32);
            if term.abs() > prev {
                break;
            }
            prev = term.abs();
            total += if k % 2 == 0 { term } else { -term };
            k += 1;
        }
        total
    };
    let phase = zeta - FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let norm = 1.0 / PI.sqrt();
    let ai = norm * z.powf(-0.25) * (c * sum(&u, false) + s * sum(&u, true));
    let aip = norm * z.powf(0.25) * (s * sum(&v, false) - c * sum(&v, true));
    (ai, aip)
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv(24);
    let (mut su, mut sv) = (0.0, 0.0);
    for k in 0..u.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let p = zeta.powi(k as i32);
        su += sign * u[k] / p;
        sv += sign * v[k] / p;
        if u[k] / p < 1e-17 {
            break;
        }
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e * x.powf(-0.25) * su, -e * x.powf(0.25) * sv)
}

/// The first `count` zeros of `Ai` (or of `Ai'` when `derivative`), as
/// positive numbers `|a_k|`, found by scanning for sign changes and bisecting.
pub fn airy_zeros(count: usize, derivative: bool) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let pick = |x: f64| {
        let (a, ap) = airy_ai(-x);
        if derivative {
            ap
        } else {
            a
        }
    };
    // asymptotic location of the last zero, plus margin
    let last = (3.0 * PI / 8.0 * (4.0 * count as f64 - 1.0)).powf(2.0 / 3.0) + 2.0;
    let step = 0.01;
    let mut zeros = Vec::with_capacity(count);
    let mut x_prev = 0.0;
    let mut f_prev = pick(0.0);
    let mut x = step;
    while zeros.len() < count && x <= last + 10.0 {
        let fx = pick(x);
        if f_prev == 0.0 {
            zeros.push(x_prev);
        } else if f_prev.signum() != fx.signum() {
            zeros.push(bisect(&pick, x_prev, x, f_prev));
        }
        x_prev = x;
        f_prev = fx;
        x += step;
    }
    zeros
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin_and_reference_points() {
        let (a, ap) = airy_ai(0.0);
        assert!((a - AI0).abs() < 1e-16 && (ap - AIP0).abs() < 1e-16);
        // Ai(1), Ai'(1)
        let (a, ap) = airy_ai(1.0);
        assert!((a - 0.135_292_416_312_881_4).abs() < 1e-14);
        assert!((ap + 0.159_147_441_296_793_2).abs() < 1e-14);
        // Ai(-10)
        let (a, _) = airy_ai(-10.0);
        assert!((a - 0.040_241_238_486_443_2).abs() < 1e-12, "{a}");
    }

    #[test]
    fn series_and_asymptotic_agree_at_switch_over() {
        for &z in &[7.0, 7.5, 8.0] {
            let (a1, p1) = series(-z);
            let (a2, p2) = asymptotic_negative(z);
            assert!((a1 - a2).abs() < 5e-10, "z={z} {a1} {a2}");
            assert!((p1 - p2).abs() < 5e-9, "z={z} {p1} {p2}");
        }
    }

    #[test]
    fn first_zeros() {
        let a = airy_zeros(3, false);
        let ap = airy_zeros(3, true);
        assert!((a[0] - 2.338_107_410_459_767).abs() < 1e-11);
        assert!((a[1] - 4.087_949_444_130_97).abs() < 1e-11);
        assert!((ap[0] - 1.018_792_971_647_471).abs() < 1e-11);
        assert!((ap[2] - 4.820_099_211_178_736).abs() < 1e-11);
    }

    #[test]
    fn fiftieth_zero_matches_asymptotic_formula() {
        let a = airy_zeros(50, false);
        assert_eq!(a.len(), 50);
        let t = 3.0 * PI / 8.0 * (4.0 * 50.0 - 1.0);
        let approx = t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 / (t * t));
        assert!((a[49] - approx).abs() < 1e-8, "{} vs {approx}", a[49]);
        assert!((a[49] - 38.021_009).abs() < 1e-6);
    }
}
