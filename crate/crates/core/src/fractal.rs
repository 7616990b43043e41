//! Generalised (Rényi) dimensions of de-trended potentials.
//!
//! With boxes of side `ε` and visit frequencies `pᵢ`,
//! `D_α = lim (1/(α−1)) ln Σ pᵢ^α / ln ε`, estimated as the least-squares
//! slope of `ln Σ pᵢ^α` against `(α−1) ln ε` over a geometric ladder of box
//! sizes. `α = 1` uses the Shannon form `Σ pᵢ ln pᵢ` against `ln ε`.
//!
//! Both axes of the 2D variant are rescaled to `[0, 1]` before boxing, so the
//! estimate does not depend on the energy unit. The marginal variant boxes
//! the de-trended values alone.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fit_line;
use crate::potential::SampledPotential;
use crate::semiclassical::WkbProfile;
use crate::spectra::fmt_f64;

/// Spatial window the dimension is measured on.
pub const WINDOW: (f64, f64) = (0.0, 10.0);
/// Shortest signal accepted by [`renyi_dimension`].
pub const MIN_SAMPLES: usize = 10_000;
/// Fewest samples an occupied box may hold on average at the finest level.
pub const MIN_MEAN_OCCUPANCY: f64 = 4.0;
/// Fits with a lower coefficient of determination are flagged.
pub const POOR_FIT_R2: f64 = 0.95;
/// Below this `α` the estimate is dominated by sparsely visited boxes.
pub const RELIABLE_ALPHA_MIN: f64 = -5.0;
pub const DEFAULT_REPLICATES: usize = 16;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// `α` from −10 to 10 in steps of one half.
pub fn default_alphas() -> Vec<f64> {
    (-20..=20).map(|k| k as f64 * 0.5).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Boxes in the `(x, ξ)` plane.
    TwoDimensional,
    /// Boxes on the `ξ` axis only.
    Marginal,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::TwoDimensional => "2d",
            Variant::Marginal => "marginal",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2d" | "two-dimensional" => Ok(Variant::TwoDimensional),
            "marginal" => Ok(Variant::Marginal),
            other => Err(Error::Invalid(format!("unknown variant {other:?}"))),
        }
    }
}

/// `ξ(x) = V(x) − V_sc(x)` on the measurement window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetrendedSignal {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl DetrendedSignal {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                found: xi.len(),
            });
        }
        if let Some(bad) = x.iter().chain(&xi).find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite sample {bad}")));
        }
        Ok(DetrendedSignal { x, xi })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.xi.iter().sum::<f64>() / self.xi.len() as f64
    }

    /// Half the peak-to-peak range.
    pub fn amplitude(&self) -> f64 {
        let (lo, hi) = range(&self.xi);
        0.5 * (hi - lo)
    }
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)))
}

/// Subtracts the semiclassical profile from an inversion potential on
/// `[0, 10]`.
pub fn detrend(inv: &SampledPotential, sc: &WkbProfile) -> Result<DetrendedSignal> {
    detrend_on(inv, sc, WINDOW.0, WINDOW.1)
}

pub fn detrend_on(inv: &SampledPotential, sc: &WkbProfile, lo: f64, hi: f64) -> Result<DetrendedSignal> {
    let slack = 1e-9 * inv.dx;
    let (have_lo, have_hi) = (inv.x(0), inv.x_max());
    if have_lo > lo + slack || have_hi < hi - slack || sc.x_max() < hi.abs().max(lo.abs()) - slack {
        return Err(Error::Coverage {
            lo: have_lo.max(-sc.x_max()),
            hi: have_hi.min(sc.x_max()),
            need_lo: lo,
            need_hi: hi,
        });
    }
    let mut x = Vec::new();
    let mut xi = Vec::new();
    for (i, v) in inv.values.iter().enumerate() {
        let xs = inv.x(i);
        if xs < lo - slack || xs > hi + slack {
            continue;
        }
        let xs = xs.clamp(lo, hi);
        x.push(xs);
        xi.push(v - sc.value_interpolated(xs.min(sc.x_max()))?);
    }
    DetrendedSignal::new(x, xi)
}

/// Signal rescaled to the unit square (or unit interval for the marginal
/// variant).
struct Unit {
    u: Vec<f64>,
    w: Vec<f64>,
    variant: Variant,
}

impl Unit {
    fn new(sig: &DetrendedSignal, variant: Variant) -> Result<Self> {
        let (xlo, xhi) = range(&sig.x);
        let (wlo, whi) = range(&sig.xi);
        if !(whi > wlo) {
            return Err(Error::DegenerateSignal);
        }
        if variant == Variant::TwoDimensional && !(xhi > xlo) {
            return Err(Error::DegenerateSignal);
        }
        let u = match variant {
            Variant::TwoDimensional => sig.x.iter().map(|x| ((x - xlo) / (xhi - xlo)).clamp(0.0, 1.0)).collect(),
            Variant::Marginal => Vec::new(),
        };
        let w = sig.xi.iter().map(|v| ((v - wlo) / (whi - wlo)).clamp(0.0, 1.0)).collect();
        Ok(Unit { u, w, variant })
    }

    fn len(&self) -> usize {
        self.w.len()
    }

    /// Box keys of every sample at side `eps`, with the grid shifted by
    /// `offset` box widths along each axis.
    fn keys(&self, eps: f64, offset: (f64, f64)) -> Vec<u64> {
        let index = |t: f64, o: f64| {
            let nb = (1.0 / eps + o).ceil() as u64;
            (((t / eps) + o).floor() as u64).min(nb - 1)
        };
        match self.variant {
            Variant::Marginal => self.w.iter().map(|&w| index(w, offset.1)).collect(),
            Variant::TwoDimensional => {
                let stride = (1.0 / eps + offset.1).ceil() as u64;
                self.u
                    .iter()
                    .zip(&self.w)
                    .map(|(&u, &w)| index(u, offset.0) * stride + index(w, offset.1))
                    .collect()
            }
        }
    }

    /// Box occupation counts, as a histogram `count → number of boxes`.
    fn occupancy(&self, eps: f64, offset: (f64, f64)) -> BTreeMap<u64, u64> {
        let mut keys = self.keys(eps, offset);
        keys.sort_unstable();
        let mut hist = BTreeMap::new();
        let mut i = 0;
        while i < keys.len() {
            let mut j = i + 1;
            while j < keys.len() && keys[j] == keys[i] {
                j += 1;
            }
            *hist.entry((j - i) as u64).or_insert(0) += 1;
            i = j;
        }
        hist
    }
}

/// Relative visit frequencies of the occupied boxes at side `eps`, in box
/// order.
pub fn box_probabilities(sig: &DetrendedSignal, eps: f64, variant: Variant) -> Result<Vec<f64>> {
    let unit = Unit::new(sig, variant)?;
    let mut keys = unit.keys(eps, (0.0, 0.0));
    keys.sort_unstable();
    let total = keys.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        out.push((j - i) as f64 / total);
        i = j;
    }
    Ok(out)
}

/// Plain box counting on the same partitions: slope of `ln N(ε)` against
/// `−ln ε` after dropping the two end levels.
pub fn box_counting_dimension(sig: &DetrendedSignal, eps_levels: &[f64], variant: Variant) -> Result<f64> {
    let unit = Unit::new(sig, variant)?;
    let used = fit_window(eps_levels)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &eps in used {
        let occupied: HashSet<u64> = unit.keys(eps, (0.0, 0.0)).into_iter().collect();
        xs.push(-eps.ln());
        ys.push((occupied.len() as f64).ln());
    }
    fit_line(&xs, &ys)
        .map(|f| f.slope)
        .ok_or_else(|| Error::Invalid("box ladder has a single distinct size".into()))
}

/// The levels entering the regression: all but the largest and smallest box.
fn fit_window(eps_levels: &[f64]) -> Result<&[f64]> {
    if eps_levels.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            found: eps_levels.len(),
        });
    }
    if eps_levels.windows(2).any(|w| !(w[1] < w[0])) || eps_levels.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Invalid("box sizes must decrease within (0, 1]".into()));
    }
    let decades = (eps_levels[0] / eps_levels[eps_levels.len() - 1]).log10();
    if decades < 2.0 {
        return Err(Error::Invalid(format!(
            "box sizes span {decades:.2} decades, need at least 2 (a denser signal allows finer boxes)"
        )));
    }
    Ok(&eps_levels[1..eps_levels.len() - 1])
}

/// Ladder `2⁻ᵏ`, `k = 0..=K`, with `K` the deepest level whose occupied
/// boxes still hold [`MIN_MEAN_OCCUPANCY`] samples on average.
pub fn default_eps_levels(sig: &DetrendedSignal, variant: Variant) -> Result<Vec<f64>> {
    let unit = Unit::new(sig, variant)?;
    let n = unit.len() as f64;
    let mut levels = vec![1.0];
    for k in 1..=30 {
        let eps = 0.5f64.powi(k);
        let occupied = unit.occupancy(eps, (0.0, 0.0)).values().sum::<u64>() as f64;
        if n / occupied < MIN_MEAN_OCCUPANCY {
            break;
        }
        levels.push(eps);
    }
    Ok(levels)
}

/// Per-`α` regression result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub d: f64,
    pub r2: f64,
    /// Spread of `d` over shifted box grids.
    pub noise: f64,
    pub poor_fit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenyiSpectrum {
    pub variant: Variant,
    pub fits: Vec<AlphaFit>,
    /// All box sizes supplied; the regression uses all but the first and last.
    pub eps_levels: Vec<f64>,
    pub eps_fit: (f64, f64),
    pub samples: usize,
    /// Boxes holding a single sample at the finest fitted level.
    pub singleton_boxes: u64,
    /// Estimator noise: largest bootstrap spread over all `α`.
    pub noise: f64,
    pub replicates: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl RenyiSpectrum {
    pub fn alphas(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.alpha).collect()
    }

    pub fn d_alpha(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.d).collect()
    }

    pub fn at(&self, alpha: f64) -> Option<f64> {
        self.fits.iter().find(|f| f.alpha == alpha).map(|f| f.d)
    }

    pub fn write_csv<W: Write>(&self, mut out: W, extra: &[(String, String)]) -> Result<()> {
        for (k, v) in extra {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "alpha,D_alpha,r2")?;
        for f in &self.fits {
            writeln!(out, "{},{},{}", fmt_f64(f.alpha), fmt_f64(f.d), fmt_f64(f.r2))?;
        }
        Ok(())
    }
}

/// Bootstrap settings for the noise estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bootstrap {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Bootstrap {
            replicates: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
        }
    }
}

/// Moment sums at one box size: `ln Σ pᵢ^α` per `α` (`Σ pᵢ ln pᵢ` at `α = 1`).
fn moments(hist: &BTreeMap<u64, u64>, total: u64, alphas: &[f64]) -> Vec<f64> {
    let total = total as f64;
    alphas
        .iter()
        .map(|&a| {
            if a == 0.0 {
                (hist.values().sum::<u64>() as f64).ln()
            } else if a == 1.0 {
                hist.iter()
                    .map(|(&c, &boxes)| {
                        let p = c as f64 / total;
                        boxes as f64 * p * p.ln()
                    })
                    .sum()
            } else {
                hist.iter()
                    .map(|(&c, &boxes)| boxes as f64 * (c as f64 / total).powf(a))
                    .sum::<f64>()
                    .ln()
            }
        })
        .collect()
}

fn regress(alphas: &[f64], eps: &[f64], m: &[Vec<f64>]) -> Vec<(f64, f64)> {
    alphas
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let xs: Vec<f64> = eps
                .iter()
                .map(|e| if a == 1.0 { e.ln() } else { (a - 1.0) * e.ln() })
                .collect();
            let ys: Vec<f64> = m.iter().map(|row| row[j]).collect();
            fit_line(&xs, &ys).map_or((f64::NAN, 0.0), |f| (f.slope, f.r2))
        })
        .collect()
}

fn estimate(unit: &Unit, alphas: &[f64], eps: &[f64], offset: (f64, f64)) -> (Vec<(f64, f64)>, u64) {
    let hists: Vec<BTreeMap<u64, u64>> = eps.par_iter().map(|&e| unit.occupancy(e, offset)).collect();
    let total = unit.len() as u64;
    let m: Vec<Vec<f64>> = hists.iter().map(|h| moments(h, total, alphas)).collect();
    let singletons = hists.last().and_then(|h| h.get(&1)).copied().unwrap_or(0);
    (regress(alphas, eps, &m), singletons)
}

pub fn renyi_dimension(
    sig: &DetrendedSignal,
    alphas: &[f64],
    eps_levels: &[f64],
    variant: Variant,
) -> Result<RenyiSpectrum> {
    renyi_dimension_with(sig, alphas, eps_levels, variant, Bootstrap::default())
}

/// Estimates `D_α`; the noise comes from re-running on box grids shifted by
/// seeded random fractions of a box.
pub fn renyi_dimension_with(
    sig: &DetrendedSignal,
    alphas: &[f64],
    eps_levels: &[f64],
    variant: Variant,
    boot: Bootstrap,
) -> Result<RenyiSpectrum> {
    if sig.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            found: sig.len(),
        });
    }
    if alphas.is_empty() || alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::Invalid("need finite α values".into()));
    }
    let used = fit_window(eps_levels)?;
    let unit = Unit::new(sig, variant)?;
    let (base, singleton_boxes) = estimate(&unit, alphas, used, (0.0, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(boot.seed);
    let offsets: Vec<(f64, f64)> = (0..boot.replicates).map(|_| (rng.gen(), rng.gen())).collect();
    let replicas: Vec<Vec<(f64, f64)>> = offsets.iter().map(|&o| estimate(&unit, alphas, used, o).0).collect();
    let spread: Vec<f64> = (0..alphas.len())
        .map(|j| {
            if replicas.len() < 2 {
                return 0.0;
            }
            let vals: Vec<f64> = replicas.iter().map(|r| r[j].0).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
            var.sqrt()
        })
        .collect();
    let noise = spread.iter().copied().fold(0.0, f64::max);

    let fits: Vec<AlphaFit> = alphas
        .iter()
        .zip(&base)
        .zip(&spread)
        .map(|((&alpha, &(d, r2)), &noise)| AlphaFit {
            alpha,
            d,
            r2,
            noise,
            poor_fit: r2 < POOR_FIT_R2,
        })
        .collect();

    let mut warnings = Vec::new();
    let poor: Vec<String> = fits.iter().filter(|f| f.poor_fit).map(|f| f.alpha.to_string()).collect();
    if !poor.is_empty() {
        warnings.push(format!("R² below {POOR_FIT_R2} at α = {}", poor.join(", ")));
    }
    if alphas.iter().any(|&a| a < RELIABLE_ALPHA_MIN) {
        warnings.push(format!(
            "α < {RELIABLE_ALPHA_MIN} is dominated by sparsely visited boxes ({singleton_boxes} singletons at the finest level)"
        ));
    }
    Ok(RenyiSpectrum {
        variant,
        fits,
        eps_levels: eps_levels.to_vec(),
        eps_fit: (used[0], used[used.len() - 1]),
        samples: sig.len(),
        singleton_boxes,
        noise,
        replicates: boot.replicates,
        seed: boot.seed,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenyiSummary {
    pub variant: Variant,
    pub d0: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d_min: f64,
    pub d_max: f64,
    pub noise: f64,
    pub multifractal: bool,
    /// Consecutive `α` pairs where `D_α` rises by more than the noise.
    pub monotonicity_violations: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

pub fn renyi_report(spec: &RenyiSpectrum) -> RenyiSummary {
    let mut fits: Vec<&AlphaFit> = spec.fits.iter().collect();
    fits.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let (d_min, d_max) = range(&spec.d_alpha());
    let monotonicity_violations = fits
        .windows(2)
        .filter(|w| w[1].d - w[0].d > spec.noise)
        .map(|w| (w[0].alpha, w[1].alpha))
        .collect();
    RenyiSummary {
        variant: spec.variant,
        d0: spec.at(0.0),
        d1: spec.at(1.0),
        d2: spec.at(2.0),
        d_min,
        d_max,
        noise: spec.noise,
        multifractal: d_max - d_min > 3.0 * spec.noise,
        monotonicity_violations,
        warnings: spec.warnings.clone(),
    }
}
