//! Checks against independent references: closed-form filter spectra, direct
//! DFT sums, dense linear algebra from nalgebra and plain Monte-Carlo.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use croqam::channel::{complex_gaussian, draw_channel_with, make_pdp};
use croqam::qam::QamMapper;
use croqam::ser::q_function;
use croqam::{
    build_modem, Detector, FilterFamily, FilterGrid, GfdmConfig, ModulationMode, PrototypeFilter,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rc(f: f64, a: f64) -> f64 {
    let f = f.abs();
    if a == 0.0 && f == 0.5 {
        // Brick wall: the edge bin takes the mean of both sides.
        0.5
    } else if f <= (1.0 - a) / 2.0 {
        1.0
    } else if f >= (1.0 + a) / 2.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI / a * (f - (1.0 - a) / 2.0)).cos())
    }
}

/// Spectrum on bins `-N/2..N/2` (bin `l` at `l/M`), returned in DFT order.
fn spectrum(k: usize, m: usize, f: impl Fn(f64, i64) -> Complex64) -> Vec<Complex64> {
    let n = k * m;
    (0..n)
        .map(|i| {
            let l = if i < n / 2 {
                i as i64
            } else {
                i as i64 - n as i64
            };
            f(l as f64 / m as f64, l)
        })
        .collect()
}

/// Unit-energy inverse DFT by direct summation.
fn unit_time(spec: &[Complex64]) -> Vec<Complex64> {
    let n = spec.len();
    let t: Vec<Complex64> = (0..n)
        .map(|t| {
            (0..n)
                .map(|l| spec[l] * Complex64::from_polar(1.0, 2.0 * PI * (l * t) as f64 / n as f64))
                .sum::<Complex64>()
        })
        .collect();
    let e: f64 = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    t.iter().map(|z| z / e).collect()
}

fn rrc_spec(k: usize, m: usize, a: f64) -> Vec<Complex64> {
    spectrum(k, m, |f, _| c(rc(f, a).sqrt(), 0.0))
}

fn crrc_spec(k: usize, m: usize, a: f64) -> Vec<Complex64> {
    spectrum(k, m, |f, l| {
        let h = rc(f, a);
        let s = if l >= 0 { 1.0 } else { -1.0 };
        c(h, s * ((1.0 - h) * h).sqrt())
    })
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn filter_responses_match_closed_forms() {
    for &(k, m) in &[(4, 8), (8, 16), (16, 4)] {
        let grid = FilterGrid::new(k, m).unwrap();
        for &a in &[0.0, 0.3, 0.75, 1.0] {
            let rrc = PrototypeFilter::design(FilterFamily::Rrc, a, grid).unwrap();
            let want = rrc_spec(k, m, a);
            assert!(
                max_diff(rrc.freq_response(), &want) < 1e-12,
                "RRC K={k} M={m} a={a}"
            );
            assert!(max_diff(rrc.time_response(), &unit_time(&want)) < 1e-12);

            let crrc = PrototypeFilter::design(FilterFamily::Crrc, a, grid).unwrap();
            let want = crrc_spec(k, m, a);
            assert!(
                max_diff(crrc.freq_response(), &want) < 1e-12,
                "CRRC K={k} M={m} a={a}"
            );
            assert!(max_diff(crrc.time_response(), &unit_time(&want)) < 1e-12);
        }
    }
}

/// Dense GFDM matrix from its definition.
fn gfdm_matrix(g: &[Complex64], k: usize, m: usize) -> DMatrix<Complex64> {
    let n = k * m;
    DMatrix::from_fn(n, n, |row, col| {
        let (sub, car) = (col / k, col % k);
        g[(row + n - sub * k) % n]
            * Complex64::from_polar(1.0, 2.0 * PI * (car * row) as f64 / k as f64)
    })
}

fn to_dense(a: &croqam::linalg::CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

#[test]
fn small_zero_forcing_modem_against_dense_inverse() {
    for &(k, m) in &[(4, 3), (4, 5), (8, 5)] {
        let mut cfg = GfdmConfig::design(
            k,
            m,
            FilterFamily::Rc,
            0.5,
            Detector::Zf,
            ModulationMode::Qam,
        )
        .unwrap();
        cfg.cp_length = 1;
        let modem = build_modem(cfg).unwrap();
        let g = unit_time(&spectrum(k, m, |f, _| c(rc(f, 0.5), 0.0)));
        let a = gfdm_matrix(&g, k, m);
        assert!((to_dense(modem.a()) - &a).camax() < 1e-12, "K={k} M={m}");

        let inv = a.clone().try_inverse().unwrap();
        assert!((to_dense(modem.a_zf().unwrap()) - &inv).camax() < 1e-9);

        let n = (k * m) as f64;
        let xi = 10.0 * (inv.norm_squared() / n).log10();
        assert!((modem.xi_db() - xi).abs() < 1e-9);

        // The 1-norm estimate brackets the spectral condition number.
        let sv = a.svd(false, false).singular_values;
        let k2 = sv.max() / sv.min();
        let est = modem.cond_estimate().unwrap();
        assert!(est >= k2 / n && est <= k2 * n, "{est} vs {k2}");
    }
}

#[test]
fn even_subsymbol_count_is_singular() {
    let (k, m) = (4, 2);
    let g = unit_time(&spectrum(k, m, |f, _| c(rc(f, 0.5), 0.0)));
    let sv = gfdm_matrix(&g, k, m).svd(false, false).singular_values;
    assert!(sv.min() / sv.max() < 1e-12);
    let mut cfg = GfdmConfig::design(
        k,
        m,
        FilterFamily::Rc,
        0.5,
        Detector::Zf,
        ModulationMode::Qam,
    )
    .unwrap();
    cfg.cp_length = 1;
    assert!(matches!(
        build_modem(cfg),
        Err(croqam::Error::SingularModulationMatrix { .. })
    ));
}

#[test]
fn reference_zero_forcing_noise_enhancement() {
    let (k, m) = (64, 7);
    let g = unit_time(&spectrum(k, m, |f, _| c(rc(f, 0.5), 0.0)));
    let inv = gfdm_matrix(&g, k, m).try_inverse().unwrap();
    let xi = 10.0 * (inv.norm_squared() / (k * m) as f64).log10();
    let modem = build_modem(croqam::Table1Column::Qam.config().unwrap()).unwrap();
    assert!(
        (modem.xi_db() - xi).abs() < 1e-8,
        "{} vs {xi}",
        modem.xi_db()
    );
    assert!((xi - 0.8).abs() < 0.1);
}

/// Real 2N x 2N matrix of the R-linear map from symbols to samples.
fn real_map(modem: &croqam::GfdmModem) -> DMatrix<f64> {
    let n = modem.n();
    let mut t = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        let mut d = vec![c(0.0, 0.0); n];
        d[i % n] = if i < n { c(1.0, 0.0) } else { c(0.0, 1.0) };
        let x = modem.modulate_samples(&d).unwrap();
        for (r, z) in x.iter().enumerate() {
            t[(r, i)] = z.re;
            t[(r + n, i)] = z.im;
        }
    }
    t
}

#[test]
fn offset_modems_are_real_orthogonal() {
    for (family, mode) in [
        (FilterFamily::Rrc, ModulationMode::Oqam),
        (FilterFamily::Crrc, ModulationMode::CrOqam),
    ] {
        for &(k, m) in &[(8, 4), (8, 5), (16, 3)] {
            let mut cfg = GfdmConfig::design(k, m, family, 1.0, Detector::Mf, mode).unwrap();
            cfg.cp_length = 1;
            let t = real_map(&build_modem(cfg).unwrap());
            let gram = t.transpose() * &t;
            let dev = (gram - DMatrix::identity(2 * k * m, 2 * k * m)).amax();
            assert!(dev < 1e-10, "{mode:?} K={k} M={m}: {dev}");
        }
    }
}

#[test]
fn mismatched_offset_pairings_are_refused() {
    for (family, mode) in [
        (FilterFamily::Rrc, ModulationMode::CrOqam),
        (FilterFamily::Crrc, ModulationMode::Oqam),
    ] {
        let cfg = GfdmConfig::design(8, 4, family, 1.0, Detector::Mf, mode);
        assert!(cfg.and_then(build_modem).is_err(), "{family} {mode:?}");
    }
}

#[test]
fn channel_tap_powers_follow_the_profile() {
    let pdp = make_pdp();
    let draws = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut power = vec![0.0; pdp.len()];
    let mut mean_bin = 0.0;
    for _ in 0..draws {
        let h = draw_channel_with(&pdp, 64, &mut rng).unwrap();
        for (p, t) in power.iter_mut().zip(&h.taps) {
            *p += t.norm_sqr();
        }
        mean_bin += h.freq.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
    }
    for (p, want) in power.iter().zip(pdp.taps()) {
        let got = p / draws as f64;
        // Exponential power: relative standard error 1/sqrt(draws).
        assert!(
            (got / want - 1.0).abs() < 4.0 / (draws as f64).sqrt(),
            "{got} vs {want}"
        );
    }
    assert!((mean_bin / draws as f64 - 1.0).abs() < 0.02);
}

#[test]
fn awgn_symbol_errors_match_closed_form() {
    let mapper = QamMapper::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for snr_db in [8.0, 14.0] {
        let var = 10f64.powf(-snr_db / 10.0);
        let count = 200_000;
        let errors = (0..count)
            .filter(|i| {
                let s = i % 16;
                mapper.demap(mapper.map(s) + complex_gaussian(&mut rng, var)) != s
            })
            .count();
        let q = q_function((0.2 / var).sqrt());
        let p = 1.0 - (1.0 - 1.5 * q).powi(2);
        let got = errors as f64 / count as f64;
        let sigma = (p * (1.0 - p) / count as f64).sqrt();
        assert!((got - p).abs() < 4.0 * sigma, "{snr_db} dB: {got} vs {p}");
    }
}

#[test]
fn q_function_reference_values() {
    for (x, q) in [
        (0.0, 0.5),
        (1.0, 0.158_655_253_931_457_05),
        (3.0, 1.349_898_031_630_094_6e-3),
        (6.0, 9.865_876_450_376_98e-10),
    ] {
        assert!((q_function(x) / q - 1.0).abs() < 1e-12, "Q({x})");
    }
}
