//! The subcommands. Each validates its arguments, runs, and writes its
//! outputs together with a `.config.json` record of the run.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use spectral_forge::fractal::{default_eps_levels, detrend_on, renyi_dimension_with, renyi_report, Bootstrap, Variant};
use spectral_forge::marchenko::{bind_spectrum, BoundStateSet, PrecisionPolicy};
use spectral_forge::registry::{potential_builders, wkb_models};
use spectral_forge::schrodinger::{compare_values, solve_eigenvalues};
use spectral_forge::semiclassical::{wkb_profile_with, WkbKind, WkbProfile};
use spectral_forge::spectra::{bundled_zeta_zeros, fmt_f64, load_zeta_zeros, primes_upto_n, reference_spectrum};
use spectral_forge::{Error, SampledPotential, Spectrum, SpectrumKind};

use crate::config::{precision_bits, RunConfig};
use crate::{ConstructArgs, FractalArgs, SpectrumArgs, SpectrumCmdArgs, VerifyArgs, WkbArgs};

/// Largest `κ_max·dx` used for the default grid: about 25 points per
/// oscillation of the deepest state.
const DEFAULT_KAPPA_DX: f64 = 0.15;

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::Invalid(msg.into()).into()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// `dir/stem<suffix>` for an output path `dir/stem.ext`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_config<A: Serialize>(out: &Path, cfg: &RunConfig<A>) -> Result<()> {
    write_file(&sibling(out, ".config.json"), cfg.to_json()?.as_bytes())
}

fn meta(hash: &str, more: &[(&str, String)]) -> Vec<(String, String)> {
    let mut v = vec![("config_sha256".to_string(), hash.to_string())];
    v.extend(more.iter().map(|(k, val)| (k.to_string(), val.clone())));
    v
}

fn load_spectrum(a: &SpectrumArgs, default_n: Option<usize>) -> Result<Spectrum> {
    let kind: SpectrumKind = a.kind.parse()?;
    if kind == SpectrumKind::Custom {
        if a.values.is_empty() {
            return Err(invalid("--kind custom needs --values"));
        }
        return Ok(Spectrum::custom(a.values.clone(), None)?);
    }
    if !a.values.is_empty() {
        return Err(invalid("--values only applies to --kind custom"));
    }
    let n = a.n.or(default_n).ok_or_else(|| invalid("--n is required"))?;
    if n == 0 {
        return Err(invalid("--n must be positive"));
    }
    Ok(match kind {
        SpectrumKind::Primes => primes_upto_n(n)?,
        SpectrumKind::ZetaZeros => match &a.zeros {
            Some(path) => load_zeta_zeros(path, n)?,
            None => bundled_zeta_zeros(n)?,
        },
        other => reference_spectrum(other, n)?,
    })
}

fn default_dx(bound: &BoundStateSet) -> f64 {
    let kmax = bound.kappa.iter().copied().fold(0.0, f64::max);
    let mut dx = 1e-2;
    let steps = [0.5, 0.4, 0.5];
    let mut i = 0;
    while kmax * dx > DEFAULT_KAPPA_DX {
        dx *= steps[i % 3];
        i += 1;
    }
    // 1e-2, 5e-3, 2e-3, 1e-3, … rounded to their decimal spelling
    format!("{dx:.0e}").parse().unwrap_or(dx)
}

pub fn construct(a: ConstructArgs) -> Result<()> {
    let names = potential_builders().names();
    let methods: Vec<&str> = match a.method.as_str() {
        "both" => vec!["marchenko", "dressing"],
        m if names.contains(&m) => vec![m],
        m => {
            return Err(Error::UnknownStrategy {
                family: "construction method",
                name: m.to_string(),
                available: format!("{}, both", names.join(", ")),
            }
            .into())
        }
    };
    if !(a.tolerance > 0.0) || a.dx.is_some_and(|d| !(d > 0.0)) || a.x_max.is_some_and(|x| !(x > 0.0)) {
        return Err(invalid("--tolerance, --dx and --x-max must be positive"));
    }
    let mut cfg = RunConfig::new("construct", a.clone());
    cfg.precision_bits = precision_bits(a.bits)?;
    if let Some(z) = &a.spectrum.zeros {
        cfg.add_input("zeros", z)?;
    }
    let spectrum = load_spectrum(&a.spectrum, Some(100))?;
    let mut policy = PrecisionPolicy {
        tolerance: a.tolerance,
        ..PrecisionPolicy::default()
    };
    if let Some(bits) = cfg.precision_bits {
        policy.max_bits = bits;
    }
    let bound = bind_spectrum(&spectrum, a.vinf)?.with_precision(policy);
    let dx = a.dx.unwrap_or_else(|| default_dx(&bound));
    let x_max = a.x_max.unwrap_or_else(|| bound.suggest_extent());
    let hash = cfg.hash()?;
    let extra = meta(
        &hash,
        &[("kind", spectrum.kind().to_string()), ("x_max", fmt_f64(x_max))],
    );

    let registry = potential_builders();
    let mut built = Vec::new();
    for m in &methods {
        let p = registry.get(m)?.build(&bound, x_max, dx)?;
        let path = if methods.len() == 1 {
            a.out.clone()
        } else {
            sibling(&a.out, &format!("-{m}.csv"))
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &extra)?;
        write_file(&path, &buf)?;
        println!("{}: {} points, {} levels -> {}", m, p.len(), p.n_eigenvalues, path.display());
        built.push(p);
    }
    if let [m, d] = built.as_slice() {
        let (sup, interior) = differences(m, d);
        let mut buf = Vec::new();
        for (k, v) in &extra {
            buf.extend(format!("# {k}={v}\n").into_bytes());
        }
        buf.extend(format!("# sup_rel_diff={}\n# interior_sup_rel_diff={}\n", fmt_f64(sup), fmt_f64(interior)).into_bytes());
        buf.extend(b"x,marchenko,dressing,diff\n");
        for i in 0..m.len() {
            let (vm, vd) = (m.values[i], d.values[i]);
            buf.extend(format!("{},{},{},{}\n", fmt_f64(m.x(i)), fmt_f64(vm), fmt_f64(vd), fmt_f64(vm - vd)).into_bytes());
        }
        let path = sibling(&a.out, "-diff.csv");
        write_file(&path, &buf)?;
        println!("relative sup-norm difference {sup:.3e} (interior 90%: {interior:.3e}) -> {}", path.display());
    }
    write_config(&a.out, &cfg)
}

/// Sup-norm of the difference relative to the sup-norm of the first
/// potential, over the whole grid and over its central 90%.
fn differences(a: &SampledPotential, b: &SampledPotential) -> (f64, f64) {
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let n = a.len();
    let skip = n / 20;
    let diff = |lo: usize, hi: usize| {
        (lo..hi)
            .map(|i| (a.values[i] - b.values[i]).abs())
            .fold(0.0, f64::max)
            / scale
    };
    (diff(0, n), diff(skip, n - skip))
}

fn read_potential(path: &Path) -> Result<SampledPotential> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(SampledPotential::read_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?)
}

pub fn verify(a: VerifyArgs) -> Result<()> {
    if !(a.tol > 0.0) {
        return Err(invalid("--tol must be positive"));
    }
    let mut cfg = RunConfig::new("verify", a.clone());
    cfg.add_input("potential", &a.potential)?;
    if let Some(z) = &a.spectrum.zeros {
        cfg.add_input("zeros", z)?;
    }
    let p = read_potential(&a.potential)?;
    let target = load_spectrum(&a.spectrum, Some(p.n_eigenvalues))?;
    let levels = a.levels.unwrap_or(target.len());
    if levels == 0 || levels > target.len() {
        return Err(invalid(format!("--levels must be in 1..={}", target.len())));
    }
    let sol = solve_eigenvalues(&p, levels, a.tol)?;
    let report = compare_values(&target.values()[..levels], &sol.eigenvalues)?.with_meta(sol.meta.clone());
    let hash = cfg.hash()?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf, &meta(&hash, &[("kind", target.kind().to_string())]))?;
    write_file(&a.out, &buf)?;
    let mut summary = report.summary_json();
    summary["config_sha256"] = hash.into();
    summary["max_estimate"] = sol.estimates.iter().copied().fold(0.0, f64::max).into();
    write_file(&sibling(&a.out, ".summary.json"), (serde_json::to_string_pretty(&summary)? + "\n").as_bytes())?;
    println!(
        "{levels} levels, max |error| {:.3e}; even mean {:.3e}, odd mean {:.3e}",
        report.max_abs_error(),
        report.parity.even_mean_abs_error,
        report.parity.odd_mean_abs_error
    );
    write_config(&a.out, &cfg)
}

pub fn wkb(a: WkbArgs) -> Result<()> {
    if a.table_size < 2 || !(a.x_cover > 0.0) {
        return Err(invalid("--table-size must be at least 2 and --x-cover positive"));
    }
    let registry = wkb_models();
    let model = registry.get(&a.kind)?;
    let e0 = a.e0.unwrap_or_else(|| model.default_e0());
    model.check_e0(e0)?;
    let m_max = match (model.kind(), a.kind.as_str(), a.m_max) {
        (WkbKind::Zeta, _, Some(_)) => return Err(invalid("--m-max applies to primes only")),
        (_, "primes-leading", _) => Some(1),
        (_, _, m) => m,
    };
    let mut cfg = RunConfig::new("wkb", a.clone());
    cfg.precision_bits = None;
    let v_max = match a.v_max {
        Some(v) => v,
        None => {
            let mut v = e0 + 100.0;
            while model.x_of_v(v, e0)? < 1.05 * a.x_cover {
                v = e0 + 2.0 * (v - e0);
            }
            v
        }
    };
    let profile = wkb_profile_with(model.kind(), e0, v_max, a.table_size, m_max)?;
    let hash = cfg.hash()?;
    let mut buf = Vec::new();
    profile.write_csv(&mut buf, &meta(&hash, &[("model", a.kind.clone())]))?;
    write_file(&a.out, &buf)?;
    println!(
        "{} profile, E0 = {e0}, V up to {v_max} (x up to {:.4}) -> {}",
        a.kind,
        profile.x_max(),
        a.out.display()
    );
    write_config(&a.out, &cfg)
}

fn alpha_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("need --alpha-min ≤ --alpha-max and a positive --alpha-step"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    // snapped so that 0, 1 and 2 come out exact
    Ok((0..count).map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9).collect())
}

pub fn fractal(a: FractalArgs) -> Result<()> {
    let alphas = alpha_grid(a.alpha_min, a.alpha_max, a.alpha_step)?;
    let variant: Variant = a.variant.parse()?;
    if a.replicates < 2 {
        return Err(invalid("--replicates must be at least 2"));
    }
    let mut cfg = RunConfig::new("fractal", a.clone());
    cfg.add_input("potential", &a.potential)?;
    cfg.add_input("profile", &a.profile)?;
    let p = read_potential(&a.potential)?;
    let f = fs::File::open(&a.profile).with_context(|| format!("opening {}", a.profile.display()))?;
    let profile = WkbProfile::read_csv(BufReader::new(f)).with_context(|| format!("reading {}", a.profile.display()))?;
    let sig = detrend_on(&p, &profile, a.window_lo, a.window_hi)?;
    let eps = default_eps_levels(&sig, variant)?;
    let spec = renyi_dimension_with(
        &sig,
        &alphas,
        &eps,
        variant,
        Bootstrap {
            replicates: a.replicates,
            seed: a.seed,
        },
    )?;
    let summary = renyi_report(&spec);
    let hash = cfg.hash()?;
    let mut buf = Vec::new();
    spec.write_csv(
        &mut buf,
        &meta(
            &hash,
            &[
                ("variant", variant.to_string()),
                ("noise", fmt_f64(spec.noise)),
                ("eps_min", fmt_f64(spec.eps_fit.1)),
                ("eps_max", fmt_f64(spec.eps_fit.0)),
            ],
        ),
    )?;
    write_file(&a.out, &buf)?;
    let mut json = serde_json::to_value(&summary)?;
    json["config_sha256"] = hash.into();
    json["samples"] = spec.samples.into();
    json["eps_levels"] = serde_json::to_value(&spec.eps_levels)?;
    json["singleton_boxes"] = spec.singleton_boxes.into();
    write_file(&sibling(&a.out, ".summary.json"), (serde_json::to_string_pretty(&json)? + "\n").as_bytes())?;
    let show = |d: Option<f64>| d.map_or("-".to_string(), |v| format!("{v:.4}"));
    println!(
        "D0 {}  D1 {}  D2 {}  noise {:.3e}  multifractal {}",
        show(summary.d0),
        show(summary.d1),
        show(summary.d2),
        summary.noise,
        summary.multifractal
    );
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    write_config(&a.out, &cfg)
}

pub fn spectrum(a: SpectrumCmdArgs) -> Result<()> {
    let mut cfg = RunConfig::new("spectrum", a.clone());
    if let Some(z) = &a.spectrum.zeros {
        cfg.add_input("zeros", z)?;
    }
    let s = load_spectrum(&a.spectrum, None)?;
    let mut buf = format!("# config_sha256={}\n# kind={}\n", cfg.hash()?, s.kind()).into_bytes();
    s.write_csv(&mut buf)?;
    write_file(&a.out, &buf)?;
    println!("{} {} eigenvalues -> {}", s.len(), s.kind(), a.out.display());
    write_config(&a.out, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grid_hits_integers() {
        let g = alpha_grid(-10.0, 10.0, 0.1).unwrap();
        assert_eq!(g.len(), 201);
        assert!(g.contains(&0.0) && g.contains(&1.0) && g.contains(&2.0));
        assert!(alpha_grid(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("out/p.csv"), "-diff.csv"), PathBuf::from("out/p-diff.csv"));
        assert_eq!(sibling(Path::new("p.csv"), ".config.json"), PathBuf::from("p.config.json"));
    }
}
