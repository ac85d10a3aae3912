use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use croqam::channel::{draw_channel, make_pdp, transmit_seeded};
use croqam::dft::max_abs_diff;
use croqam::filters::{ici_response, nyquist_residual, nyquist_residual_of};
use croqam::gfdm::{add_cp, remove_cp};
use croqam::oqam::{oqam_demodulate, oqam_modulate};
use croqam::qam::{QamMapper, SCALE};
use croqam::stc::{trstc_decode, trstc_encode};
use croqam::{
    build_modem, Detector, FilterFamily, FilterGrid, GfdmConfig, GfdmModem, ModulationMode,
    OqamBurstConfig, PhaseMode, PrototypeFilter, SymbolGrid, Table1Column,
};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b)),
        len,
    )
}

fn grid_dims() -> impl Strategy<Value = (usize, usize)> {
    (
        prop::sample::select(vec![2usize, 4, 8, 16]),
        prop::sample::select(vec![2usize, 4, 6, 8, 16]),
    )
}

/// Small modems of each mode, built once.
fn small_modems() -> &'static [GfdmModem] {
    static MODEMS: OnceLock<Vec<GfdmModem>> = OnceLock::new();
    MODEMS.get_or_init(|| {
        [
            (FilterFamily::Rc, 0.5, Detector::Zf, ModulationMode::Qam),
            (FilterFamily::Rrc, 1.0, Detector::Mf, ModulationMode::Oqam),
            (
                FilterFamily::Crrc,
                1.0,
                Detector::Mf,
                ModulationMode::CrOqam,
            ),
            (
                FilterFamily::Crrc,
                0.4,
                Detector::Mf,
                ModulationMode::CrOqam,
            ),
        ]
        .into_iter()
        .map(|(f, a, d, m)| {
            let mut cfg = GfdmConfig::design(16, 5, f, a, d, m).unwrap();
            cfg.cp_length = 4;
            build_modem(cfg).unwrap()
        })
        .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nyquist_families_stay_nyquist(alpha in 0.0f64..=1.0, (k, m) in grid_dims()) {
        let grid = FilterGrid::new(k, m).unwrap();
        let rc = PrototypeFilter::design(FilterFamily::Rc, alpha, grid).unwrap();
        prop_assert!(nyquist_residual(&rc) < 1e-12);
        for family in [FilterFamily::Rrc, FilterFamily::Crrc] {
            let g = PrototypeFilter::design(family, alpha, grid).unwrap();
            prop_assert!(nyquist_residual_of(&g.power_response(), &grid) < 1e-12);
            let e: f64 = g.time_response().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugate_root_ici_is_rotated(alpha in 0.05f64..=1.0, (k, m) in grid_dims()) {
        // With K=2 carriers +1 and -1 coincide and both band edges overlap.
        prop_assume!(k >= 4);
        let grid = FilterGrid::new(k, m).unwrap();
        let rrc = PrototypeFilter::design(FilterFamily::Rrc, alpha, grid).unwrap();
        let crrc = PrototypeFilter::design(FilterFamily::Crrc, alpha, grid).unwrap();
        let s = ici_response(&rrc, 1).unwrap().time;
        let sc = ici_response(&crrc, 1).unwrap().time;
        let rotated: Vec<_> = s.iter().map(|z| z * Complex64::new(0.0, 1.0)).collect();
        prop_assert!(max_abs_diff(&sc, &rotated) < 1e-12);
    }

    #[test]
    fn linear_oqam_round_trip(
        alpha in 0.0f64..=1.0,
        k in prop::sample::select(vec![2usize, 4, 8, 16]),
        symbols in 1usize..=8,
        cr in any::<bool>(),
        data in complex_vec(16 * 8),
    ) {
        let (family, mode) = if cr { (FilterFamily::Crrc, PhaseMode::Cr) } else { (FilterFamily::Rrc, PhaseMode::Conventional) };
        let cfg = OqamBurstConfig::design(family, alpha, k, symbols, 8, mode).unwrap();
        let grid = SymbolGrid::from_vec(k, symbols, data[..k * symbols].to_vec()).unwrap();
        let x = oqam_modulate(&grid, &cfg).unwrap();
        prop_assert_eq!(x.len(), cfg.output_len());
        let back = oqam_demodulate(&x, &cfg).unwrap();
        prop_assert!(back.max_abs_diff(&grid) < 1e-10);
    }

    #[test]
    fn linear_oqam_splits_into_two_pam_systems(alpha in 0.1f64..=1.0, data in complex_vec(8 * 6)) {
        let cfg = OqamBurstConfig::design(FilterFamily::Crrc, alpha, 8, 6, 8, PhaseMode::Cr).unwrap();
        let full = SymbolGrid::from_vec(8, 6, data.clone()).unwrap();
        let re = SymbolGrid::from_vec(8, 6, data.iter().map(|z| Complex64::new(z.re, 0.0)).collect()).unwrap();
        let im = SymbolGrid::from_vec(8, 6, data.iter().map(|z| Complex64::new(0.0, z.im)).collect()).unwrap();
        let sum: Vec<_> = oqam_modulate(&re, &cfg).unwrap().iter().zip(&oqam_modulate(&im, &cfg).unwrap()).map(|(a, b)| a + b).collect();
        prop_assert!(max_abs_diff(&sum, &oqam_modulate(&full, &cfg).unwrap()) < 1e-12);
    }

    #[test]
    fn adjacent_subcarriers_differ_by_a_pure_shift(k in 0usize..7, alpha in 0.1f64..=1.0, data in complex_vec(4), cr in any::<bool>()) {
        let (family, mode) = if cr { (FilterFamily::Crrc, PhaseMode::Cr) } else { (FilterFamily::Rrc, PhaseMode::Conventional) };
        let cfg = OqamBurstConfig::design(family, alpha, 8, 4, 8, mode).unwrap();
        let on = |sub: usize| {
            let g = SymbolGrid::from_fn(8, 4, |kk, m| if kk == sub { data[m] } else { Complex64::new(0.0, 0.0) });
            oqam_modulate(&g, &cfg).unwrap()
        };
        let (a, b) = (on(k), on(k + 1));
        // One subcarrier up is a 1/K frequency shift; the conventional
        // phases add a further factor j.
        let extra = if cr { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        let shifted: Vec<_> = a
            .iter()
            .enumerate()
            .map(|(n, z)| z * extra * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 / 8.0))
            .collect();
        prop_assert!(max_abs_diff(&b, &shifted) < 1e-12);
    }

    #[test]
    fn gfdm_round_trip_any_payload(which in 0usize..4, d in complex_vec(80)) {
        let modem = &small_modems()[which];
        let back = modem.detect(&modem.modulate_samples(&d).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&back, &d) < 1e-9);
    }

    #[test]
    fn gfdm_is_real_linear(which in 0usize..4, a in -3.0f64..3.0, b in -3.0f64..3.0, d1 in complex_vec(80), d2 in complex_vec(80)) {
        let modem = &small_modems()[which];
        let mix: Vec<_> = d1.iter().zip(&d2).map(|(x, y)| x * a + y * b).collect();
        let lhs = modem.modulate_samples(&mix).unwrap();
        let (x1, x2) = (modem.modulate_samples(&d1).unwrap(), modem.modulate_samples(&d2).unwrap());
        let rhs: Vec<_> = x1.iter().zip(&x2).map(|(p, q)| p * a + q * b).collect();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-9);
        // and detection undoes the mix.
        let y = modem.detect(&lhs).unwrap();
        prop_assert!(max_abs_diff(&y, &mix) < 1e-9);
    }

    #[test]
    fn qam_mapping_survives_small_noise(i in 0usize..16, dx in -0.99f64..0.99, dy in -0.99f64..0.99) {
        let mapper = QamMapper::new();
        let z = mapper.map(i) + Complex64::new(dx, dy) * SCALE;
        prop_assert_eq!(mapper.demap(z), i);
    }

    #[test]
    fn cyclic_prefix_round_trip(x in complex_vec(40), cp in 0usize..40) {
        let framed = add_cp(&x, cp).unwrap();
        prop_assert_eq!(&framed[..cp], &x[40 - cp..]);
        prop_assert_eq!(remove_cp(&framed, cp).unwrap(), x);
    }

    #[test]
    fn space_time_code_recovers_both_blocks(seed in 0u64..10_000, x1 in complex_vec(64), x2 in complex_vec(64)) {
        let pdp = make_pdp();
        let h1 = draw_channel(&pdp, 64, 2 * seed).unwrap();
        let h2 = draw_channel(&pdp, 64, 2 * seed + 1).unwrap();
        let p = trstc_encode(&x1, &x2).unwrap();
        let rx = |a: &[Complex64], b: &[Complex64]| {
            let ya = transmit_seeded(&add_cp(a, 16).unwrap(), 16, &h1, 0.0, 0).unwrap();
            let yb = transmit_seeded(&add_cp(b, 16).unwrap(), 16, &h2, 0.0, 0).unwrap();
            remove_cp(&ya.iter().zip(&yb).map(|(u, v)| u + v).collect::<Vec<_>>(), 16).unwrap()
        };
        let (y1, y2) = (rx(&p.a1_t1, &p.a2_t1), rx(&p.a1_t2, &p.a2_t2));
        let (e1, e2) = trstc_decode(&y1, &y2, &h1.freq, &h2.freq).unwrap();
        prop_assert!(max_abs_diff(&e1, &x1) < 1e-8);
        prop_assert!(max_abs_diff(&e2, &x2) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reference_modems_round_trip(col in 0usize..3, seed in any::<u64>()) {
        static MODEMS: OnceLock<Vec<GfdmModem>> = OnceLock::new();
        let modems = MODEMS.get_or_init(|| {
            Table1Column::ALL.iter().map(|c| build_modem(c.config().unwrap()).unwrap()).collect()
        });
        let modem = &modems[col];
        let mapper = QamMapper::new();
        let idx = croqam::qam::map_symbols(seed, modem.n()).0;
        let d = mapper.map_all(&idx);
        let back = modem.detect(&modem.modulate_samples(&d).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&back, &d) < 1e-9);
        prop_assert_eq!(mapper.demap_all(&back), idx);
    }
}
