//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `W₀(z)` for `z ≥ −1/e`, by Halley iteration to relative `1e-12` or better.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch_point = -1.0 / E;
    if !(z >= branch_point) || !z.is_finite() {
        return Err(Error::Domain(format!("Lambert W0 undefined at {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == branch_point {
        return Ok(-1.0);
    }
    let mut w = initial_guess(z);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * w.abs().max(1e-300) {
            return Ok(w);
        }
    }
    Ok(w)
}

fn initial_guess(z: f64) -> f64 {
    if z < -0.25 {
        // branch-point expansion in p = sqrt(2(e z + 1))
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z < 0.5 {
        z - z * z + 1.5 * z.powi(3) - 8.0 / 3.0 * z.powi(4)
    } else if z <= E {
        let l = z.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defining_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-12);
        // omega constant
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!(lambert_w0(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn inverts_w_exp_w(w in -0.99f64..60.0) {
            let z = w * w.exp();
            let got = lambert_w0(z).unwrap();
            prop_assert!((got - w).abs() <= 1e-12 * w.abs().max(1.0), "w={} got={}", w, got);
        }
    }
}
