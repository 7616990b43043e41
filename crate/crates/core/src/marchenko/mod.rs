//! Closed-form reflectionless inversion.
//!
//! A bound-state set `{κ_n, c_n}` determines the reflectionless potential
//! `V(x) = V∞ − 2 d²/dx² ln det(I + C(x))` with
//! `C_mn = c_m c_n e^{−(κ_m+κ_n)x} / (κ_m + κ_n)`. The norming constants are
//! the ones that make the potential even. See [`solve`] for the linear
//! algebra.

pub mod solve;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{half_points, Method, SampledPotential};
use crate::spectra::Spectrum;
pub use solve::PrecisionPolicy;

/// Everything the inversion needs: decay constants (decreasing), log norming
/// constants and the asymptote.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundStateSet {
    pub kappa: Vec<f64>,
    pub log_c2: Vec<f64>,
    pub v_infinity: f64,
    pub source: Spectrum,
    #[serde(default)]
    pub precision: PrecisionPolicy,
}

/// `ln c_n² = ln 2κ_n + Σ_{m≠n} ln |(κ_m + κ_n)/(κ_m − κ_n)|`.
pub fn log_norming_constants(kappa: &[f64]) -> Vec<f64> {
    kappa
        .iter()
        .enumerate()
        .map(|(n, &kn)| {
            let mut acc = (2.0 * kn).ln();
            for (m, &km) in kappa.iter().enumerate() {
                if m != n {
                    acc += (km + kn).ln() - (km - kn).abs().ln();
                }
            }
            acc
        })
        .collect()
}

/// Binds a spectrum with the default (midpoint) or an explicit asymptote.
pub fn bind_spectrum(s: &Spectrum, v_infinity: Option<f64>) -> Result<BoundStateSet> {
    let v_inf = match v_infinity {
        Some(v) => v,
        None => {
            let next = s.next_value().ok_or_else(|| {
                Error::InvalidSpectrum("no next eigenvalue; give the asymptote explicitly".into())
            })?;
            0.5 * (s.max() + next)
        }
    };
    bind_levels(s.values(), v_inf, Some(s.clone()))
}

/// Binds an arbitrary level list. Repeated levels are a [`Error::Degenerate`]
/// error rather than an ordering error, since they are a pole of the norming
/// constants.
pub fn bind_levels(levels: &[f64], v_infinity: f64, source: Option<Spectrum>) -> Result<BoundStateSet> {
    if levels.is_empty() {
        return Err(Error::InvalidSpectrum("no eigenvalues".into()));
    }
    if !v_infinity.is_finite() {
        return Err(Error::Invalid(format!("asymptote {v_infinity}")));
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    for (i, w) in sorted.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::Degenerate {
                index: i + 1,
                value: w[0],
            });
        }
    }
    let max = sorted[sorted.len() - 1];
    if v_infinity <= max {
        return Err(Error::Asymptote {
            v_infinity,
            max_eigenvalue: max,
        });
    }
    let source = match source {
        Some(s) => s,
        None => Spectrum::custom(sorted.clone(), None)?,
    };
    let kappa: Vec<f64> = sorted.iter().map(|e| (v_infinity - e).sqrt()).collect();
    let log_c2 = log_norming_constants(&kappa);
    if let Some(bad) = log_c2.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidSpectrum(format!("norming constant overflow ({bad})")));
    }
    Ok(BoundStateSet {
        kappa,
        log_c2,
        v_infinity,
        source,
        precision: PrecisionPolicy::default(),
    })
}

impl BoundStateSet {
    pub fn with_precision(mut self, precision: PrecisionPolicy) -> Self {
        self.precision = precision;
        self
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    /// `V(x) − V∞`, using the evenness of the construction.
    pub fn well_at(&self, x: f64) -> Result<f64> {
        self.well_unfolded(x.abs())
    }

    /// `V(x) − V∞` evaluated at `x` as given, without folding to `|x|`.
    /// Negative arguments are far more ill-conditioned; this exists to check
    /// the symmetry of the construction.
    pub fn well_unfolded(&self, x: f64) -> Result<f64> {
        Ok(solve::solve(&self.kappa, &self.log_c2, x, &self.precision)?.well)
    }

    /// `V(x)`, shifted so the bound states sit at the source eigenvalues.
    pub fn potential_at(&self, x: f64) -> Result<f64> {
        Ok(self.v_infinity + self.well_at(x)?)
    }

    /// `ln det(I + C(x))`.
    pub fn log_det(&self, x: f64) -> Result<f64> {
        let inner = solve::log_det(&self.kappa, &self.log_c2, x, &self.precision)?;
        let linear: f64 = self
            .kappa
            .iter()
            .zip(&self.log_c2)
            .map(|(k, lc)| lc - 2.0 * k * x)
            .sum();
        Ok(linear + inner)
    }

    /// A half-width beyond which the well is below `1e-12` in magnitude.
    pub fn suggest_extent(&self) -> f64 {
        self.kappa
            .iter()
            .zip(&self.log_c2)
            .map(|(k, lc)| (lc + (4.0 * k).ln() + 12.0 * std::f64::consts::LN_10) / (2.0 * k))
            .fold(1.0, f64::max)
    }
}

/// Samples `V` on the symmetric grid `[−x_max, x_max]`. Points are evaluated
/// independently in parallel on `x ≥ 0` and mirrored.
pub fn sample_potential(b: &BoundStateSet, x_max: f64, dx: f64) -> Result<SampledPotential> {
    let half = half_points(x_max, dx)?;
    let values: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|i| b.potential_at(i as f64 * dx))
        .collect::<Result<_>>()?;
    SampledPotential::mirrored(&values, dx, Method::Marchenko, b.len(), b.v_infinity)
}

/// Partial sum of the trace series
/// `2 Σ_{r=1}^{r_max} (−1)^r / r · Tr((C^r)'')` for the well at `x`.
///
/// Uses `C' = −u uᵀ` and `u' = −K u`, which give
/// `Tr((C^r)'') = 2r uᵀK C^{r−1} u + r Σ_{j=0}^{r−2} m_j m_{r−2−j}` with
/// `m_j = uᵀ C^j u`.
pub fn potential_power_series(b: &BoundStateSet, x: f64, r_max: usize) -> Result<f64> {
    let n = b.len();
    let u: Vec<f64> = b
        .kappa
        .iter()
        .zip(&b.log_c2)
        .map(|(k, lc)| (0.5 * lc - k * x).exp())
        .collect();
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Convergence(format!("matrix entries overflow at x = {x}")));
    }
    let c: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            u[i] * u[j] / (b.kappa[i] + b.kappa[j])
        })
        .collect();
    if !spectral_radius_below_one(&c, n) {
        return Err(Error::Convergence(format!(
            "spectral radius of C({x}) is not below one"
        )));
    }
    let ku: Vec<f64> = u.iter().zip(&b.kappa).map(|(a, k)| a * k).collect();
    let mut w = u.clone();
    let mut m = Vec::with_capacity(r_max);
    let mut q = Vec::with_capacity(r_max);
    for _ in 0..r_max {
        m.push(dot(&u, &w));
        q.push(dot(&ku, &w));
        w = (0..n).map(|i| dot(&c[i * n..(i + 1) * n], &w)).collect();
    }
    let mut total = 0.0;
    for r in 1..=r_max {
        let rf = r as f64;
        let mut trace = 2.0 * rf * q[r - 1];
        if r >= 2 {
            trace += rf * (0..=r - 2).map(|j| m[j] * m[r - 2 - j]).sum::<f64>();
        }
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        total += 2.0 * sign / rf * trace;
    }
    Ok(total)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `C` is positive semidefinite, so `ρ(C) < 1` exactly when `I − C` is
/// positive definite.
fn spectral_radius_below_one(c: &[f64], n: usize) -> bool {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = 1.0 - c[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > 1e-12) {
            return false;
        }
        let p = diag.sqrt();
        l[j * n + j] = p;
        for i in (j + 1)..n {
            let mut acc = -c[i * n + j];
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = acc / p;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{reference_spectrum, SpectrumKind};

    fn soliton() -> BoundStateSet {
        bind_spectrum(&Spectrum::custom(vec![-1.0], Some(0.0)).unwrap(), Some(0.0)).unwrap()
    }

    #[test]
    fn single_level_binding() {
        let b = soliton();
        assert_eq!(b.kappa, vec![1.0]);
        assert!((b.log_c2[0] - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn harmonic_pair_binding() {
        let s = reference_spectrum(SpectrumKind::Harmonic, 2).unwrap();
        let b = bind_spectrum(&s, None).unwrap();
        assert_eq!(b.v_infinity, 4.0);
        let k1 = 3f64.sqrt();
        assert!((b.kappa[0] - k1).abs() < 1e-15 && (b.kappa[1] - 1.0).abs() < 1e-15);
        let ratio = (k1 + 1.0) / (k1 - 1.0);
        assert!((b.log_c2[0].exp() - 2.0 * k1 * ratio).abs() < 1e-12 * 2.0 * k1 * ratio);
        assert!((b.log_c2[1].exp() - 2.0 * ratio).abs() < 1e-12 * 2.0 * ratio);
    }

    #[test]
    fn binding_errors() {
        assert!(matches!(bind_levels(&[2.0, 2.0], 5.0, None), Err(Error::Degenerate { .. })));
        let s = Spectrum::custom(vec![1.0, 2.0], None).unwrap();
        assert!(matches!(bind_spectrum(&s, Some(2.0)), Err(Error::Asymptote { .. })));
        assert!(bind_spectrum(&s, None).is_err());
    }

    #[test]
    fn norming_constants_match_direct_product() {
        let s = reference_spectrum(SpectrumKind::Triangular, 8).unwrap();
        let b = bind_spectrum(&s, None).unwrap();
        for n in 0..b.len() {
            let mut prod = 1.0;
            for m in 0..b.len() {
                if m != n {
                    prod *= ((b.kappa[m] + b.kappa[n]) / (b.kappa[m] - b.kappa[n])).abs();
                }
            }
            let got = b.log_c2[n].exp() / (2.0 * b.kappa[n]);
            assert!((got - prod).abs() <= 1e-12 * prod, "n={n}");
        }
    }

    #[test]
    fn soliton_values() {
        let b = soliton();
        assert!((b.potential_at(0.0).unwrap() + 2.0).abs() < 1e-14);
        let v5 = b.potential_at(5.0).unwrap();
        let exact = -2.0 / 5f64.cosh().powi(2);
        assert!((v5 - exact).abs() < 1e-15);
        assert!((exact + 3.63e-4).abs() < 1e-6);
    }

    #[test]
    fn log_det_of_soliton() {
        // det(I + C) = 1 + e^{−2x}
        let b = soliton();
        for x in [-1.0f64, 0.0, 0.7, 3.0] {
            let want = (1.0 + (-2.0 * x).exp()).ln();
            assert!((b.log_det(x).unwrap() - want).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn series_converges_for_soliton() {
        let b = soliton();
        let want = b.well_at(3.0).unwrap();
        let got = potential_power_series(&b, 3.0, 20).unwrap();
        assert!((got - want).abs() < 1e-10);
        assert!(matches!(potential_power_series(&b, 0.0, 20), Err(Error::Convergence(_))));
    }

    #[test]
    fn leading_series_term_matches_tail_asymptote() {
        // V_well ≈ −4 Σ κ_n c_n² e^{−2κ_n x} far out.
        let s = reference_spectrum(SpectrumKind::Harmonic, 3).unwrap();
        let b = bind_spectrum(&s, None).unwrap();
        // The second term is O(e^{−4κx}); pick x where it is 100× smaller.
        let x = (b.log_c2.iter().cloned().fold(f64::MIN, f64::max) + 100f64.ln()) / (2.0 * b.kappa[2]) + 2.0;
        let lead = potential_power_series(&b, x, 1).unwrap();
        let tail: f64 = b
            .kappa
            .iter()
            .zip(&b.log_c2)
            .map(|(k, lc)| -4.0 * k * (lc - 2.0 * k * x).exp())
            .sum();
        assert!(lead < 0.0);
        assert!(((lead - tail) / tail).abs() < 0.1, "{lead} vs {tail}");
    }

    #[test]
    fn sampled_grid_is_symmetric_and_matches_soliton() {
        let p = sample_potential(&soliton(), 5.0, 0.1).unwrap();
        assert_eq!(p.len(), 101);
        for (i, v) in p.values.iter().enumerate() {
            let x = p.x(i);
            assert!((v + 2.0 / x.cosh().powi(2)).abs() <= 1e-8);
        }
        assert!(p.symmetry_defect() <= 1e-8);
    }
}
