//! Building a reflectionless potential one bound state at a time.
//!
//! Each step is a Darboux transformation with the even, nodeless solution
//! `φ` of `−φ'' + Vφ = −κ²φ`. Writing `y = φ'/φ`, the Riccati equation
//! `y' = V + κ² − y²` with `y(0) = 0` is integrated outward, which is its
//! stable direction, and the dressed potential is `V − 2y' = 2y² − V − 2κ²`.
//! The new state `1/φ` is normalisable and sits below every existing level,
//! so levels are added from the shallowest (smallest κ) to the deepest.
//!
//! Everything is even, so only `x ≥ 0` is stored. The recursion restricted to
//! `[0, X]` never looks beyond `X`, so a short grid gives the exact potential
//! on that range however far the true tails reach.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marchenko::bind_spectrum;
use crate::potential::{half_points, Method, SampledPotential};
use crate::spectra::Spectrum;

/// Largest `κ·dx` the Runge–Kutta stepping is trusted with.
pub const MAX_KAPPA_DX: f64 = 0.25;

/// Largest jump of the dressed potential between neighbouring points,
/// relative to its sup-norm.
pub const MAX_RELATIVE_STEP: f64 = 0.25;

/// Largest `κ·dx` for which a step is accurate to about `1e-8` of the well
/// depth. [`dress_spectrum`] and [`dress_levels_refined`] integrate coarser
/// grids with this many substeps and keep every `r`-th point.
pub const ACCURATE_KAPPA_DX: f64 = 0.04;

/// Bound on `|y|` relative to `κ` before the auxiliary solution is declared
/// to have passed through a node.
const NODE_BLOWUP: f64 = 1e6;

/// Well-frame potential on `x_i = i·dx, i = 0..=m` plus the levels bound so
/// far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressingState {
    pub level: usize,
    pub dx: f64,
    pub kappa: Vec<f64>,
    /// `V(x_i)` relative to the asymptote.
    pub well: Vec<f64>,
    /// `φ'/φ` of the last step's auxiliary solution.
    pub aux: Vec<f64>,
}

impl DressingState {
    /// The free state `V ≡ 0` on `[0, x_max]`.
    pub fn new(x_max: f64, dx: f64) -> Result<Self> {
        let m = half_points(x_max, dx)?;
        if m < 4 {
            return Err(Error::Invalid("dressing grid needs at least 4 intervals".into()));
        }
        Ok(DressingState {
            level: 0,
            dx,
            kappa: Vec::new(),
            well: vec![0.0; m + 1],
            aux: vec![0.0; m + 1],
        })
    }

    /// Symmetric sampled potential, shifted by `v_infinity`.
    pub fn potential(&self, v_infinity: f64) -> Result<SampledPotential> {
        let half: Vec<f64> = self.well.iter().map(|v| v + v_infinity).collect();
        SampledPotential::mirrored(&half, self.dx, Method::Dressing, self.level, v_infinity)
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let state: DressingState = serde_json::from_reader(input)?;
        if state.well.len() != state.aux.len() || state.kappa.len() != state.level {
            return Err(Error::Invalid("inconsistent dressing checkpoint".into()));
        }
        Ok(state)
    }

    /// `V` at the midpoint of `[x_i, x_{i+1}]` by four-point interpolation,
    /// reflecting through the origin at the left edge.
    fn midpoint(&self, i: usize) -> f64 {
        let v = &self.well;
        let m = v.len() - 1;
        if i + 2 <= m {
            let left = if i == 0 { v[1] } else { v[i - 1] };
            (-left + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0
        } else {
            0.0625 * v[i - 2] - 0.3125 * v[i - 1] + 0.9375 * v[i] + 0.3125 * v[i + 1]
        }
    }
}

/// Adds the level `−κ²` (well frame) below all existing ones.
pub fn dress_step(mut state: DressingState, kappa: f64) -> Result<DressingState> {
    let level = state.level + 1;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Invalid(format!("decay constant {kappa} must be positive")));
    }
    if let Some(i) = state.kappa.iter().position(|&k| k == kappa) {
        return Err(Error::Degenerate {
            index: i,
            value: -kappa * kappa,
        });
    }
    if kappa * state.dx > MAX_KAPPA_DX {
        return Err(Error::Grid {
            level,
            detail: format!("κ·dx = {} exceeds {MAX_KAPPA_DX}", kappa * state.dx),
        });
    }
    let below_existing = state.kappa.iter().any(|&k| k > kappa);

    let k2 = kappa * kappa;
    let h = state.dx;
    let m = state.well.len() - 1;
    let mut y = vec![0.0f64; m + 1];
    for i in 0..m {
        let (v0, vm, v1) = (state.well[i], state.midpoint(i), state.well[i + 1]);
        let f = |v: f64, y: f64| v + k2 - y * y;
        let yi = y[i];
        let k1 = f(v0, yi);
        let k2_ = f(vm, yi + 0.5 * h * k1);
        let k3 = f(vm, yi + 0.5 * h * k2_);
        let k4 = f(v1, yi + h * k3);
        let next = yi + h / 6.0 * (k1 + 2.0 * k2_ + 2.0 * k3 + k4);
        if !next.is_finite() || next < -NODE_BLOWUP * kappa {
            return Err(Error::Node {
                level,
                x: (i + 1) as f64 * h,
            });
        }
        y[i + 1] = next;
    }
    if below_existing {
        // Not deeper than the existing states: φ must have a node. It was not
        // resolved on the grid, so report it at the edge.
        return Err(Error::Node {
            level,
            x: m as f64 * h,
        });
    }

    let dressed: Vec<f64> = state
        .well
        .iter()
        .zip(&y)
        .map(|(v, yi)| 2.0 * yi * yi - v - 2.0 * k2)
        .collect();
    let sup = dressed.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let worst = dressed
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0f64, f64::max);
    if worst > MAX_RELATIVE_STEP * sup {
        return Err(Error::Grid {
            level,
            detail: format!("potential jumps by {worst:e} between grid points (sup {sup:e})"),
        });
    }
    state.well = dressed;
    state.aux = y;
    state.kappa.push(kappa);
    state.level = level;
    Ok(state)
}

/// Dresses the vacuum with every level of `s`. The order of incorporation is
/// fixed by sorting, so the result depends only on the level set.
pub fn dress_spectrum(s: &Spectrum, v_infinity: Option<f64>, x_max: f64, dx: f64) -> Result<SampledPotential> {
    let b = bind_spectrum(s, v_infinity)?;
    dress_levels_refined(&b.kappa, x_max, dx)?.potential(b.v_infinity)
}

/// Substeps per grid interval needed to keep `κ_max·dx` at or below
/// [`ACCURATE_KAPPA_DX`].
pub fn substeps(kappa: &[f64], dx: f64) -> usize {
    let kmax = kappa.iter().copied().fold(0.0, f64::max);
    ((kmax * dx / ACCURATE_KAPPA_DX).ceil() as usize).max(1)
}

/// As [`dress_levels`], but integrated on `dx / r` with `r` from
/// [`substeps`] and returned on the grid of spacing `dx`. The substep count
/// is fixed before the recursion starts.
pub fn dress_levels_refined(kappa: &[f64], x_max: f64, dx: f64) -> Result<DressingState> {
    let r = substeps(kappa, dx);
    if r == 1 {
        return dress_levels(kappa, x_max, dx);
    }
    let m = half_points(x_max, dx)?;
    let fine = DressingState {
        level: 0,
        dx: dx / r as f64,
        kappa: Vec::new(),
        well: vec![0.0; m * r + 1],
        aux: vec![0.0; m * r + 1],
    };
    let fine = resume(fine, kappa)?;
    Ok(DressingState {
        level: fine.level,
        dx,
        kappa: fine.kappa,
        well: fine.well.iter().step_by(r).copied().collect(),
        aux: fine.aux.iter().step_by(r).copied().collect(),
    })
}

/// Dresses the vacuum with the given decay constants in any order; they are
/// sorted ascending first.
pub fn dress_levels(kappa: &[f64], x_max: f64, dx: f64) -> Result<DressingState> {
    let mut sorted = kappa.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut state = DressingState::new(x_max, dx)?;
    for k in sorted {
        state = dress_step(state, k)?;
    }
    Ok(state)
}

/// Continues a checkpointed recursion with the remaining levels.
pub fn resume(mut state: DressingState, kappa: &[f64]) -> Result<DressingState> {
    let mut sorted = kappa.to_vec();
    sorted.sort_by(f64::total_cmp);
    for k in sorted {
        state = dress_step(state, k)?;
    }
    Ok(state)
}
