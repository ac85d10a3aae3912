//! Welch power spectral density and out-of-band metrics of GFDM streams.

use std::io::Write;

use num_complex::Complex64;

use crate::dft::Dft;
use crate::error::{Error, Result};
use crate::gfdm::{build_modem, deactivate_subcarriers, edge_subcarriers, GfdmModem, Table1Column};
use crate::qam::{self, QamMapper};
use crate::ser::trial_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    /// Centered frequency axis in units of the subcarrier spacing.
    pub freq_axis: Vec<f64>,
    /// Two-sided density per unit sample rate.
    pub psd_linear: Vec<f64>,
    /// `psd_linear` in dB relative to its peak.
    pub psd_db: Vec<f64>,
    pub segment_len: usize,
    pub overlap: usize,
    pub segments: usize,
    pub window: &'static str,
}

impl PsdEstimate {
    /// Integral of the density over one sample rate, i.e. the mean power.
    pub fn total_power(&self) -> f64 {
        self.psd_linear.iter().sum::<f64>() / self.segment_len as f64
    }
}

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / len as f64).cos())
        .collect()
}

/// Welch average of Hann-windowed periodograms. `freq_scale` converts
/// cycles per sample into the reported axis unit (use `K` for subcarrier
/// spacings).
pub fn estimate_psd(
    samples: &[Complex64],
    segment_len: usize,
    overlap: usize,
    freq_scale: f64,
) -> Result<PsdEstimate> {
    if segment_len == 0 || overlap >= segment_len {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} must be below the segment length {segment_len}"
        )));
    }
    if samples.len() < segment_len {
        return Err(Error::SignalTooShort {
            len: samples.len(),
            segment: segment_len,
        });
    }
    let window = hann(segment_len);
    let norm: f64 = window.iter().map(|w| w * w).sum();
    let dft = Dft::new(segment_len);
    let step = segment_len - overlap;
    let mut acc = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut segments = 0;
    let mut start = 0;
    while start + segment_len <= samples.len() {
        for ((b, x), w) in buf
            .iter_mut()
            .zip(&samples[start..start + segment_len])
            .zip(&window)
        {
            *b = x * w;
        }
        dft.forward_in_place(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let half = segment_len / 2;
    let scale = 1.0 / (norm * segments as f64);
    // Reorder from DFT order to ascending frequency.
    let psd_linear: Vec<f64> = (0..segment_len)
        .map(|i| acc[(i + segment_len - half) % segment_len] * scale)
        .collect();
    let freq_axis = (0..segment_len)
        .map(|i| (i as f64 - half as f64) / segment_len as f64 * freq_scale)
        .collect();
    let peak = psd_linear.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    let psd_db = psd_linear
        .iter()
        .map(|p| 10.0 * (p.max(f64::MIN_POSITIVE) / peak).log10())
        .collect();
    Ok(PsdEstimate {
        freq_axis,
        psd_linear,
        psd_db,
        segment_len,
        overlap,
        segments,
        window: "hann",
    })
}

/// In-band `[in_lo, in_hi]`; out-of-band `f < oob_lo` or `f > oob_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdges {
    pub in_lo: f64,
    pub in_hi: f64,
    pub oob_lo: f64,
    pub oob_hi: f64,
}

impl BandEdges {
    /// Edges for `K` subcarriers with `inactive_per_edge` carriers switched
    /// off on each side of `+-K/2`, and the out-of-band region starting
    /// `margin` subcarriers beyond the allocation.
    pub fn for_allocation(subcarriers: usize, inactive_per_edge: usize, margin: f64) -> Self {
        let active_half = (subcarriers / 2).saturating_sub(inactive_per_edge) as f64;
        let in_lo = -active_half - 0.5;
        let in_hi = active_half - 0.5;
        Self {
            in_lo,
            in_hi,
            oob_lo: in_lo - margin,
            oob_hi: in_hi + margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OobLevels {
    pub in_band_db: f64,
    pub oob_floor_db: f64,
    pub ratio_db: f64,
}

/// Mean in-band and out-of-band levels in dB and their difference.
pub fn oob_levels(psd: &PsdEstimate, edges: &BandEdges) -> Result<OobLevels> {
    let mean = |pred: &dyn Fn(f64) -> bool, name: &'static str| {
        let (sum, count) = psd
            .freq_axis
            .iter()
            .zip(&psd.psd_db)
            .filter(|(f, _)| pred(**f))
            .fold((0.0, 0usize), |(s, c), (_, p)| (s + p, c + 1));
        if count == 0 {
            Err(Error::EmptyBand(name))
        } else {
            Ok(sum / count as f64)
        }
    };
    let in_band_db = mean(&|f| f >= edges.in_lo && f <= edges.in_hi, "in-band")?;
    let oob_floor_db = mean(&|f| f < edges.oob_lo || f > edges.oob_hi, "out-of-band")?;
    Ok(OobLevels {
        in_band_db,
        oob_floor_db,
        ratio_db: in_band_db - oob_floor_db,
    })
}

/// Mean in-band dB power minus mean out-of-band dB power.
pub fn oob_ratio(psd: &PsdEstimate, edges: &BandEdges) -> Result<f64> {
    oob_levels(psd, edges).map(|l| l.ratio_db)
}

/// Concatenated CP-framed blocks with random 16-QAM payloads, edge
/// subcarriers switched off and the modem's guard policy applied.
pub fn gfdm_stream(
    modem: &GfdmModem,
    blocks: usize,
    inactive_per_edge: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let n = modem.n();
    let k = modem.subcarriers();
    let off = edge_subcarriers(k, inactive_per_edge);
    let mapper = QamMapper::new();
    let mut out = Vec::with_capacity(blocks * (n + modem.config().cp_length));
    for b in 0..blocks {
        let mut rng = trial_rng(seed, b);
        let d = mapper.map_all(&qam::random_indices(&mut rng, n));
        let d = modem.apply_guards(&deactivate_subcarriers(&d, k, &off))?;
        out.extend(modem.modulate(&d)?.with_cp);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdSettings {
    pub blocks: usize,
    pub segment_len: usize,
    pub overlap: usize,
    pub inactive_per_edge: usize,
    pub guard_subsymbols: usize,
    pub tail_guard: bool,
    pub cp_length: usize,
    /// Out-of-band region starts this many subcarriers past the allocation.
    pub oob_margin: f64,
    pub seed: u64,
}

impl Default for PsdSettings {
    fn default() -> Self {
        Self {
            blocks: 200,
            segment_len: 2048,
            overlap: 1024,
            inactive_per_edge: 8,
            guard_subsymbols: 1,
            tail_guard: false,
            cp_length: crate::gfdm::DEFAULT_CP_LEN,
            oob_margin: 2.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdResult {
    pub config_id: String,
    pub estimate: PsdEstimate,
    pub levels: OobLevels,
}

pub fn psd_config_id(column: Table1Column) -> String {
    format!("GFDM-{}", column.mode())
}

/// PSD of one reference modem column under `settings`.
pub fn run_psd(column: Table1Column, settings: &PsdSettings) -> Result<PsdResult> {
    if settings.blocks == 0 {
        return Err(Error::InvalidArgument(
            "PSD needs at least one block".into(),
        ));
    }
    let mut cfg = column.config()?;
    cfg.cp_length = settings.cp_length;
    cfg.guard_subsymbols = settings.guard_subsymbols;
    cfg.tail_guard = settings.tail_guard;
    let modem = build_modem(cfg)?;
    let k = modem.subcarriers();
    let stream = gfdm_stream(
        &modem,
        settings.blocks,
        settings.inactive_per_edge,
        settings.seed,
    )?;
    let estimate = estimate_psd(&stream, settings.segment_len, settings.overlap, k as f64)?;
    let edges = BandEdges::for_allocation(k, settings.inactive_per_edge, settings.oob_margin);
    let levels = oob_levels(&estimate, &edges)?;
    Ok(PsdResult {
        config_id: psd_config_id(column),
        estimate,
        levels,
    })
}

pub fn write_psd_csv<W: Write>(out: &mut W, results: &[&PsdResult]) -> std::io::Result<()> {
    writeln!(out, "config_id,freq_norm,psd_db")?;
    for r in results {
        for (f, p) in r.estimate.freq_axis.iter().zip(&r.estimate.psd_db) {
            writeln!(out, "{},{},{:.6}", r.config_id, f, p)?;
        }
    }
    Ok(())
}

pub fn write_oob_summary<W: Write>(
    out: &mut W,
    settings: &PsdSettings,
    results: &[&PsdResult],
) -> std::io::Result<()> {
    writeln!(
        out,
        "config_id,guard_subsymbols,inactive_per_edge,in_band_db,oob_floor_db,oob_ratio_db"
    )?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4}",
            r.config_id,
            settings.guard_subsymbols,
            settings.inactive_per_edge,
            r.levels.in_band_db,
            r.levels.oob_floor_db,
            r.levels.ratio_db
        )?;
    }
    Ok(())
}
