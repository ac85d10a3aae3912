//! The four experiments behind the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use croqam::channel::make_pdp;
use croqam::filters::{ici_response, nyquist_residual_of, write_filter_csv, write_response_csv};
use croqam::gfdm::{condition_estimate, Table1Column};
use croqam::oqam::orthogonality_report;
use croqam::psd::{run_psd, write_oob_summary, write_psd_csv};
use croqam::qam::{random_indices, QamMapper};
use croqam::ser::{trial_rng, write_ser_csv, Link, SerCurve};
use croqam::{
    build_modem, Detector, FilterFamily, FilterGrid, GfdmConfig, GfdmModem, PrototypeFilter,
};

use super::config::ExperimentConfig;
use super::CliError;

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let ctx = || format!("writing {}", path.display());
    let mut w = BufWriter::new(File::create(path).map_err(CliError::io(ctx()))?);
    f(&mut w)
        .and_then(|()| w.flush())
        .map_err(CliError::io(ctx()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Outcome of one tolerance check.
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Orthogonality, conjugate-root identities and the reference modems.
pub fn verify(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let v = &cfg.verify;
    let dir = &cfg.run.out_dir;
    let grid = FilterGrid::new(v.subcarriers, v.periods)?;
    let cases = cfg.orthogonality_cases()?;
    let mut checks = Vec::new();

    let mut ortho = Vec::new();
    for &alpha in &v.rolloffs {
        for &(family, mode) in &cases {
            let filter = PrototypeFilter::design(family, alpha, grid)?;
            let worst = orthogonality_report(&filter, mode);
            ortho.push((family, alpha, mode, worst));
            checks.push(Check {
                name: format!("orthogonality {family} alpha={alpha} {mode}"),
                value: worst,
                tolerance: v.orthogonality_tol,
            });
        }
    }
    for &alpha in &v.identity_rolloffs {
        let rrc = PrototypeFilter::design(FilterFamily::Rrc, alpha, grid)?;
        let crrc = PrototypeFilter::design(FilterFamily::Crrc, alpha, grid)?;
        let (s, sc) = (ici_response(&rrc, 1)?, ici_response(&crrc, 1)?);
        let j = Complex64::new(0.0, 1.0);
        let peak = s.time.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gap = s
            .time
            .iter()
            .zip(&sc.time)
            .map(|(a, b)| (b - j * a).norm())
            .fold(0.0, f64::max);
        checks.push(Check {
            name: format!("conjugate-root ICI alpha={alpha}"),
            value: gap / peak,
            tolerance: v.ici_tol,
        });
        checks.push(Check {
            name: format!("CRRC power Nyquist alpha={alpha}"),
            value: nyquist_residual_of(&crrc.power_response(), &grid),
            tolerance: v.nyquist_tol,
        });
    }
    write_file(&dir.join("orthogonality.csv"), |w| {
        writeln!(w, "filter,alpha,phase_mode,max_violation")?;
        for (family, alpha, mode, worst) in &ortho {
            writeln!(w, "{family},{alpha},{mode},{worst:e}")?;
        }
        Ok(())
    })?;

    let mut rows = Vec::new();
    for column in Table1Column::ALL {
        let modem = build_modem(column.config()?)?;
        let row = modem_row(&modem, v.payloads, cfg.run.seed)?;
        checks.push(Check {
            name: format!("round trip {}", modem.config().label()),
            value: row.max_roundtrip_err,
            tolerance: v.roundtrip_tol,
        });
        let xi_gap = match column.detector() {
            Detector::Zf => (row.xi_db - v.xi_target_db).abs(),
            Detector::Mf => row.xi_db.abs(),
        };
        let xi_tol = match column.detector() {
            Detector::Zf => v.xi_tol_db,
            Detector::Mf => 1e-9,
        };
        checks.push(Check {
            name: format!("noise enhancement {}", modem.config().label()),
            value: xi_gap,
            tolerance: xi_tol,
        });
        rows.push(row);
    }
    // Matched filtering of the non-orthogonal QAM pulse, for reference only:
    // its round-trip error is the self-interference level.
    let qam_mf = GfdmConfig {
        detector: Detector::Mf,
        ..Table1Column::Qam.config()?
    };
    rows.push(modem_row(&build_modem(qam_mf)?, v.payloads, cfg.run.seed)?);

    write_file(&dir.join("table1.csv"), |w| {
        writeln!(
            w,
            "K,M,filter,alpha,detector,mode,xi_db,max_roundtrip_err,cond_estimate"
        )?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.5},{:e},{:.4}",
                r.k,
                r.m,
                r.filter,
                r.alpha,
                r.detector,
                r.mode,
                r.xi_db,
                r.max_roundtrip_err,
                r.cond
            )?;
        }
        Ok(())
    })?;
    write_file(&dir.join("checks.csv"), |w| {
        writeln!(w, "check,value,tolerance,status")?;
        for c in &checks {
            let status = if c.passed() { "pass" } else { "FAIL" };
            writeln!(w, "{},{:e},{:e},{status}", c.name, c.value, c.tolerance)?;
        }
        Ok(())
    })?;

    let mut all_ok = true;
    for c in &checks {
        if c.passed() {
            println!(
                "pass  {}: {:.3e} (tol {:.1e})",
                c.name, c.value, c.tolerance
            );
        } else {
            all_ok = false;
            println!(
                "FAIL  {}: {:.3e} exceeds {:.1e}",
                c.name, c.value, c.tolerance
            );
        }
    }
    for r in &rows {
        println!(
            "{:>8} {:>2} xi={:+.4} dB  cond={:.1}  round trip {:.2e}",
            r.mode, r.detector, r.xi_db, r.cond, r.max_roundtrip_err
        );
    }
    Ok(all_ok)
}

struct ModemRow {
    k: usize,
    m: usize,
    filter: String,
    alpha: f64,
    detector: String,
    mode: String,
    xi_db: f64,
    max_roundtrip_err: f64,
    cond: f64,
}

fn modem_row(modem: &GfdmModem, payloads: usize, seed: u64) -> Result<ModemRow, CliError> {
    let c = modem.config();
    let mapper = QamMapper::new();
    let mut worst: f64 = 0.0;
    for p in 0..payloads {
        let d = mapper.map_all(&random_indices(&mut trial_rng(seed, p), modem.n()));
        let back = modem.detect(&modem.modulate_samples(&d)?)?;
        worst = d
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(worst, f64::max);
    }
    Ok(ModemRow {
        k: c.subcarriers(),
        m: c.subsymbols(),
        filter: c.filter.family().to_string(),
        alpha: c.filter.rolloff(),
        detector: c.detector.as_str().to_string(),
        mode: c.mode.as_str().to_string(),
        xi_db: modem.xi_db(),
        max_roundtrip_err: worst,
        cond: modem
            .cond_estimate()
            .unwrap_or_else(|| condition_estimate(modem.a())),
    })
}

/// Monte-Carlo SER curves, their semi-analytic references and a combined file.
pub fn ser(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let snr = cfg.snr_grid()?;
    let ids = cfg.ser_ids()?;
    let s = &cfg.ser;
    if s.trials == 0 || s.theory_channels == Some(0) {
        return Err(CliError::Usage(
            "trial and channel counts must be positive".into(),
        ));
    }
    let dir = &cfg.run.out_dir;
    let seed = cfg.run.seed;
    let mut all: Vec<SerCurve> = Vec::new();
    for id in ids {
        let modem = id.build_modem()?;
        let link = Link::new(&modem, make_pdp(), id.trstc)?;
        log::info!("{id}: {} trials over {} SNR points", s.trials, snr.len());
        let curve = link.run(id.to_string(), &snr, s.trials, seed)?;
        write_file(&dir.join(format!("ser_{id}.csv")), |w| {
            write_ser_csv(w, std::slice::from_ref(&curve))
        })?;
        report_crossings(&curve);
        all.push(curve);
        if s.theory {
            let n = s.theory_channels.unwrap_or(s.trials);
            let curve = link.theory(id.theory_id(), &snr, n, seed)?;
            write_file(&dir.join(format!("ser_{}.csv", id.theory_id())), |w| {
                write_ser_csv(w, std::slice::from_ref(&curve))
            })?;
            report_crossings(&curve);
            all.push(curve);
        }
    }
    write_file(&dir.join("ser_all.csv"), |w| write_ser_csv(w, &all))
}

fn report_crossings(c: &SerCurve) {
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2} dB"));
    println!(
        "{:<24} SER 1e-2 at {:>9}, 1e-3 at {:>9}",
        c.config_id,
        fmt(c.crossing(1e-2)),
        fmt(c.crossing(1e-3))
    );
}

/// Welch spectra of the configured modems and their out-of-band summary.
pub fn psd(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let columns = cfg.psd_columns()?;
    let settings = cfg.psd_settings();
    let dir = &cfg.run.out_dir;
    let mut results = Vec::new();
    for column in columns {
        let r = run_psd(column, &settings)?;
        write_file(&dir.join(format!("psd_{}.csv", r.config_id)), |w| {
            write_psd_csv(w, &[&r])
        })?;
        println!(
            "{:<12} in-band {:+.2} dB  out-of-band floor {:+.2} dB  ratio {:.2} dB",
            r.config_id, r.levels.in_band_db, r.levels.oob_floor_db, r.levels.ratio_db
        );
        results.push(r);
    }
    let refs: Vec<_> = results.iter().collect();
    write_file(&dir.join("oob_summary.csv"), |w| {
        write_oob_summary(w, &settings, &refs)
    })
}

/// RRC and CRRC responses plus their ICI responses.
pub fn filter_dump(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let f = &cfg.filter_dump;
    let grid = FilterGrid::new(f.subcarriers, f.bins_per_subcarrier)?;
    let dir = &cfg.run.out_dir;
    for family in [FilterFamily::Rrc, FilterFamily::Crrc] {
        let filter = PrototypeFilter::design(family, f.rolloff, grid)?;
        let name = family.as_str().to_ascii_lowercase();
        write_file(&dir.join(format!("filter_{name}.csv")), |w| {
            write_filter_csv(w, &filter)
        })?;
        for &shift in &f.ici_shifts {
            let ici = ici_response(&filter, shift)?;
            write_file(&dir.join(format!("ici_{name}_shift{shift}.csv")), |w| {
                write_response_csv(w, &grid, &ici.spectrum, &ici.time)
            })?;
        }
    }
    Ok(())
}
