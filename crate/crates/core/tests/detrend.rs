use spectral_forge::dressing::dress_spectrum;
use spectral_forge::fractal::detrend;
use spectral_forge::numeric::fit_line;
use spectral_forge::semiclassical::{wkb_profile, WkbKind};
use spectral_forge::spectra::{bundled_zeta_zeros, primes_upto_n};
use spectral_forge::Error;

#[test]
fn profile_minus_itself_is_zero() {
    let sc = wkb_profile(WkbKind::Zeta, 7.0, 2000.0, 400).unwrap();
    let p = sc.sample(10.0, 1e-3).unwrap();
    let sig = detrend(&p, &sc).unwrap();
    assert_eq!(sig.x.first(), Some(&0.0));
    assert!((sig.x.last().unwrap() - 10.0).abs() < 1e-9);
    assert!(sig.xi.iter().all(|&v| v == 0.0));
}

#[test]
fn prime_inversion_oscillates_about_the_wkb_profile() {
    let inv = dress_spectrum(&primes_upto_n(200).unwrap(), None, 10.0, 1e-3).unwrap();
    let sc = wkb_profile(WkbKind::Primes, 1.5, 3000.0, 2000).unwrap();
    let sig = detrend(&inv, &sc).unwrap();
    assert!(sig.mean().abs() < sig.amplitude() / 5.0, "{} vs {}", sig.mean(), sig.amplitude());
}

#[test]
fn zeta_inversion_has_no_trend() {
    let inv = dress_spectrum(&bundled_zeta_zeros(200).unwrap(), None, 10.0, 1e-3).unwrap();
    let sc = wkb_profile(WkbKind::Zeta, 2.0 * std::f64::consts::PI, 3000.0, 2000).unwrap();
    let sig = detrend(&inv, &sc).unwrap();
    let fit = fit_line(&sig.x, &sig.xi).unwrap();
    assert!(fit.slope.abs() * 10.0 < sig.amplitude(), "{} vs {}", fit.slope, sig.amplitude());
}

#[test]
fn short_grids_are_rejected() {
    let sc = wkb_profile(WkbKind::Zeta, 7.0, 2000.0, 100).unwrap();
    let p = sc.sample(5.0, 1e-2).unwrap();
    assert!(matches!(detrend(&p, &sc), Err(Error::Coverage { .. })));
    let small = wkb_profile(WkbKind::Zeta, 7.0, 20.0, 100).unwrap();
    let q = sc.sample(12.0, 1e-2).unwrap();
    assert!(matches!(detrend(&q, &small), Err(Error::Coverage { .. })));
}
