//! Monte-Carlo symbol error rates in Rayleigh multipath and a semi-analytic
//! reference computed on the same channel draws.
//!
//! Every trial owns a generator keyed by `(base_seed, trial)`, so results do
//! not depend on how trials are scheduled. Within a trial the channel is
//! drawn first, then the payload, then one unit-variance noise vector per
//! received slot. The receiver is linear in the noise for real scalings, so
//! each trial detects the noiseless and the unit-noise signals once and forms
//! `clean + sigma * noise` for every SNR point.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    self, complex_gaussian, draw_channel_with, make_pdp, ChannelRealization, PowerDelayProfile,
};
use crate::dft::Dft;
use crate::error::{Error, Result};
use crate::gfdm::{build_modem, Detector, GfdmModem, Table1Column};
use crate::qam::{self, QamMapper};
use crate::stc;

/// Points with fewer errors than this are flagged as low confidence.
pub const MIN_ERRORS: u64 = 100;

/// A reference modem column, optionally with two-antenna TR-STC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SerConfigId {
    pub column: Table1Column,
    pub trstc: bool,
}

impl SerConfigId {
    pub const ALL: [SerConfigId; 6] = [
        SerConfigId::new(Table1Column::Qam, false),
        SerConfigId::new(Table1Column::Oqam, false),
        SerConfigId::new(Table1Column::CrOqam, false),
        SerConfigId::new(Table1Column::Qam, true),
        SerConfigId::new(Table1Column::Oqam, true),
        SerConfigId::new(Table1Column::CrOqam, true),
    ];

    pub const fn new(column: Table1Column, trstc: bool) -> Self {
        Self { column, trstc }
    }

    pub fn build_modem(&self) -> Result<GfdmModem> {
        build_modem(self.column.config()?)
    }

    pub fn theory_id(&self) -> String {
        format!("{self}-theory")
    }
}

impl fmt::Display for SerConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.column {
            Table1Column::Qam => "QAM-ZF",
            Table1Column::Oqam => "OQAM-MF",
            Table1Column::CrOqam => "CROQAM-MF",
        };
        f.write_str(base)?;
        if self.trstc {
            f.write_str("-TRSTC")?;
        }
        Ok(())
    }
}

impl FromStr for SerConfigId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        let (base, trstc) = match up.strip_suffix("-TRSTC") {
            Some(b) => (b, true),
            None => (up.as_str(), false),
        };
        let column = match base {
            "QAM-ZF" => Table1Column::Qam,
            "OQAM-MF" => Table1Column::Oqam,
            "CROQAM-MF" | "CR-OQAM-MF" => Table1Column::CrOqam,
            _ => return Err(Error::UnknownConfig(s.to_string())),
        };
        Ok(Self { column, trstc })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub config_id: String,
    pub snr_db: Vec<f64>,
    pub ser: Vec<f64>,
    pub errors: Vec<u64>,
    pub decisions: Vec<u64>,
    pub trials: usize,
    pub low_confidence: Vec<bool>,
}

impl SerCurve {
    fn from_counts(
        config_id: String,
        snr_db: &[f64],
        errors: Vec<u64>,
        decisions: u64,
        trials: usize,
    ) -> Self {
        let ser = errors
            .iter()
            .map(|&e| e as f64 / decisions as f64)
            .collect();
        let low_confidence = errors.iter().map(|&e| e < MIN_ERRORS).collect();
        Self {
            config_id,
            snr_db: snr_db.to_vec(),
            ser,
            decisions: vec![decisions; errors.len()],
            errors,
            trials,
            low_confidence,
        }
    }

    /// SNR where the curve first drops below `target`, interpolated linearly
    /// in `log10(ser)`.
    pub fn crossing(&self, target: f64) -> Option<f64> {
        let lt = target.log10();
        for i in 1..self.ser.len() {
            let (a, b) = (self.ser[i - 1], self.ser[i]);
            if a >= target && b < target && b > 0.0 {
                let (la, lb) = (a.log10(), b.log10());
                let (sa, sb) = (self.snr_db[i - 1], self.snr_db[i]);
                return Some(sa + (lt - la) / (lb - la) * (sb - sa));
            }
        }
        None
    }

    /// Counting standard deviation of point `i` for a reference rate `p`.
    pub fn counting_sigma(&self, i: usize, p: f64) -> f64 {
        (p * (1.0 - p) / self.decisions[i] as f64).sqrt()
    }
}

/// Generator of trial `trial` under `base_seed`.
pub fn trial_rng(base_seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial as u64);
    rng
}

/// Noise variance per complex sample at `snr_db` for unit symbol energy.
pub fn noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the current pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument(
            "worker count must be positive".into(),
        )),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Modem, channel statistics and receiver of one link.
pub struct Link<'a> {
    modem: &'a GfdmModem,
    pdp: PowerDelayProfile,
    trstc: bool,
    dft: Dft,
    mapper: QamMapper,
}

struct Detected {
    truth: Vec<usize>,
    clean: Vec<Complex64>,
    noise: Vec<Complex64>,
}

impl<'a> Link<'a> {
    pub fn new(modem: &'a GfdmModem, pdp: PowerDelayProfile, trstc: bool) -> Result<Self> {
        if modem.config().cp_length < pdp.memory() {
            return Err(Error::CyclicPrefixTooShort {
                cp: modem.config().cp_length,
                memory: pdp.memory(),
            });
        }
        Ok(Self {
            modem,
            pdp,
            trstc,
            dft: Dft::new(modem.n()),
            mapper: QamMapper::new(),
        })
    }

    /// Symbol decisions made per trial.
    pub fn decisions_per_trial(&self) -> usize {
        self.modem.n() * if self.trstc { 2 } else { 1 }
    }

    fn channels(&self, rng: &mut ChaCha8Rng) -> Result<Vec<ChannelRealization>> {
        let count = if self.trstc { 2 } else { 1 };
        (0..count)
            .map(|_| draw_channel_with(&self.pdp, self.modem.n(), rng))
            .collect()
    }

    fn unit_noise(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..self.modem.n())
            .map(|_| complex_gaussian(rng, 1.0))
            .collect()
    }

    /// Noiseless received slot, CP removed.
    fn receive(&self, streams: &[(&[Complex64], &ChannelRealization)]) -> Result<Vec<Complex64>> {
        let cp = self.modem.config().cp_length;
        let mut sum = vec![Complex64::new(0.0, 0.0); self.modem.n() + cp];
        let mut silent = ChaCha8Rng::seed_from_u64(0);
        for (x, h) in streams {
            let y = channel::transmit(&self.modem.add_cp(x)?, cp, h, 0.0, &mut silent)?;
            for (s, v) in sum.iter_mut().zip(y) {
                *s += v;
            }
        }
        self.modem.remove_cp(&sum)
    }

    /// `None` when the channel has a spectral null.
    fn run_trial(&self, rng: &mut ChaCha8Rng) -> Result<Option<Detected>> {
        let n = self.modem.n();
        let hs = self.channels(rng)?;
        let blocks = if self.trstc { 2 } else { 1 };
        let truth = qam::random_indices(rng, blocks * n);
        let payload = self.mapper.map_all(&truth);
        let noise: Vec<Vec<Complex64>> = (0..blocks).map(|_| self.unit_noise(rng)).collect();
        let xs = payload
            .chunks(n)
            .map(|d| self.modem.modulate_samples(d))
            .collect::<Result<Vec<_>>>()?;

        let (clean_eq, noise_eq) = if self.trstc {
            let pair = stc::trstc_encode(&xs[0], &xs[1])?;
            let (h1, h2) = (&hs[0], &hs[1]);
            let y1 = self.receive(&[(&pair.a1_t1, h1), (&pair.a2_t1, h2)])?;
            let y2 = self.receive(&[(&pair.a1_t2, h1), (&pair.a2_t2, h2)])?;
            let clean = stc::trstc_decode_with(&self.dft, &y1, &y2, &h1.freq, &h2.freq);
            let clean = match clean {
                Ok(v) => v,
                Err(Error::DeepFade { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let nz = stc::trstc_decode_with(&self.dft, &noise[0], &noise[1], &h1.freq, &h2.freq)?;
            (vec![clean.0, clean.1], vec![nz.0, nz.1])
        } else {
            let h = &hs[0];
            let y = self.receive(&[(&xs[0], h)])?;
            let clean = match channel::fde_equalize_with(&self.dft, &y, &h.freq) {
                Ok(v) => v,
                Err(Error::DeepFade { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let nz = channel::fde_equalize_with(&self.dft, &noise[0], &h.freq)?;
            (vec![clean], vec![nz])
        };

        let mut clean = Vec::with_capacity(blocks * n);
        let mut noise_out = Vec::with_capacity(blocks * n);
        for (c, z) in clean_eq.iter().zip(&noise_eq) {
            clean.extend(self.modem.detect(c)?);
            noise_out.extend(self.modem.detect(z)?);
        }
        Ok(Some(Detected {
            truth,
            clean,
            noise: noise_out,
        }))
    }

    /// Symbol errors of trial `trial` at every SNR point.
    pub fn trial_errors(&self, base_seed: u64, trial: usize, snr_db: &[f64]) -> Result<Vec<u64>> {
        let mut rng = trial_rng(base_seed, trial);
        let Some(det) = self.run_trial(&mut rng)? else {
            return Ok(vec![self.decisions_per_trial() as u64; snr_db.len()]);
        };
        Ok(snr_db
            .iter()
            .map(|&s| {
                let sigma = noise_var(s).sqrt();
                det.truth
                    .iter()
                    .zip(det.clean.iter().zip(&det.noise))
                    .filter(|(&t, (c, z))| self.mapper.demap(*c + *z * sigma) != t)
                    .count() as u64
            })
            .collect())
    }

    pub fn run(
        &self,
        config_id: String,
        snr_db: &[f64],
        trials: usize,
        base_seed: u64,
    ) -> Result<SerCurve> {
        if trials == 0 {
            return Err(Error::ZeroTrials);
        }
        let per_trial = (0..trials)
            .into_par_iter()
            .map(|t| self.trial_errors(base_seed, t, snr_db))
            .collect::<Result<Vec<_>>>()?;
        let mut errors = vec![0u64; snr_db.len()];
        for e in &per_trial {
            for (acc, v) in errors.iter_mut().zip(e) {
                *acc += v;
            }
        }
        let decisions = (trials * self.decisions_per_trial()) as u64;
        Ok(SerCurve::from_counts(
            config_id, snr_db, errors, decisions, trials,
        ))
    }
}

/// Monte-Carlo SER of a reference configuration.
pub fn run_ser(id: SerConfigId, snr_db: &[f64], trials: usize, base_seed: u64) -> Result<SerCurve> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let modem = id.build_modem()?;
    Link::new(&modem, make_pdp(), id.trstc)?.run(id.to_string(), snr_db, trials, base_seed)
}

/// `Q(x)`, the standard normal tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Exact 16-QAM symbol error probability for per-branch noise standard
/// deviation `s` and in-phase/quadrature noise correlation `rho`.
pub struct QamSer {
    nodes: Vec<(f64, f64)>,
    // The integrand steepens near |rho| = 1.
    nodes_fine: Vec<(f64, f64)>,
}

impl Default for QamSer {
    fn default() -> Self {
        Self::new()
    }
}

impl QamSer {
    pub fn new() -> Self {
        Self {
            nodes: gauss_legendre(6),
            nodes_fine: gauss_legendre(24),
        }
    }

    /// `P(n1 > h, n2 > h) + P(n1 > h, n2 < -h)` for unit normals with
    /// correlation `rho`, through Craig-style integration over `asin(rho)`.
    pub fn joint_tail_pair(&self, h: f64, rho: f64) -> f64 {
        let q = q_function(h);
        let upper = rho.abs().min(1.0).asin();
        if upper == 0.0 {
            return 2.0 * q * q;
        }
        let h2 = h * h;
        let half = 0.5 * upper;
        let nodes = if rho.abs() > 0.8 { &self.nodes_fine } else { &self.nodes };
        let integral: f64 = nodes
            .iter()
            .map(|&(x, w)| {
                let s = (half * (x + 1.0)).sin();
                w * ((-h2 / (1.0 + s)).exp() - (-h2 / (1.0 - s)).exp())
            })
            .sum::<f64>()
            * half;
        2.0 * q * q + integral / std::f64::consts::TAU
    }

    /// Symbol error probability at per-branch noise variance `var`.
    pub fn ser(&self, var: f64, rho: f64) -> f64 {
        if var <= 0.0 {
            return 0.0;
        }
        let h = (0.1 / var).sqrt();
        let q = q_function(h);
        if rho == 0.0 {
            let p = 1.5 * q;
            return 1.0 - (1.0 - p) * (1.0 - p);
        }
        if q < 1e-13 {
            // The joint term is below q itself; neither matters at this level.
            return 3.0 * q;
        }
        3.0 * q - 1.125 * self.joint_tail_pair(h, rho)
    }
}

/// Per-symbol noise shape of a linear detector after per-bin equalization.
///
/// `gain[j][l]` is the share of bin `l`'s equalized noise landing on symbol
/// `j`. For offset modems `phase[l] = sin(pi l / M)` couples the two branches.
pub struct NoiseShape {
    n: usize,
    gain: Vec<f64>,
    phase: Option<Vec<f64>>,
}

impl NoiseShape {
    pub fn of(modem: &GfdmModem) -> Result<Self> {
        let det = match modem.config().detector {
            Detector::Zf => modem.a_zf().ok_or(Error::NoZeroForcingDetector)?,
            Detector::Mf => modem.a_mf(),
        };
        let n = modem.n();
        let dft = Dft::new(n);
        let mut gain = Vec::with_capacity(n * n);
        for j in 0..n {
            let row = dft.inverse(det.row(j));
            gain.extend(row.iter().map(|z| n as f64 * z.norm_sqr()));
        }
        let m = modem.config().subsymbols() as f64;
        let phase = modem.config().mode.is_offset().then(|| {
            (0..n)
                .map(|l| (std::f64::consts::PI * l as f64 / m).sin())
                .collect()
        });
        Ok(Self { n, gain, phase })
    }

    /// `(sum_l gain * w, rho)` per symbol for bin weights `w`.
    pub fn per_symbol(&self, w: &[f64]) -> Vec<(f64, f64)> {
        (0..self.n)
            .map(|j| {
                let row = &self.gain[j * self.n..(j + 1) * self.n];
                let total: f64 = row.iter().zip(w).map(|(g, w)| g * w).sum();
                let rho = match &self.phase {
                    Some(ph) => {
                        row.iter()
                            .zip(w)
                            .zip(ph)
                            .map(|((g, w), s)| g * w * s)
                            .sum::<f64>()
                            / total
                    }
                    None => 0.0,
                };
                (total, rho)
            })
            .collect()
    }
}

/// Noise weights per bin: `1/|H|^2`, or `2/(|H1|^2 + |H2|^2)` for TR-STC.
/// `None` on a spectral null.
fn bin_weights(hs: &[ChannelRealization]) -> Option<Vec<f64>> {
    let n = hs[0].freq.len();
    let mut w = Vec::with_capacity(n);
    for l in 0..n {
        let w_l = if hs.len() == 1 {
            let a = hs[0].freq[l].norm();
            if a < channel::DEEP_FADE {
                return None;
            }
            1.0 / (a * a)
        } else {
            let (a, b) = (hs[0].freq[l].norm(), hs[1].freq[l].norm());
            if a < channel::DEEP_FADE && b < channel::DEEP_FADE {
                return None;
            }
            2.0 / (a * a + b * b)
        };
        w.push(w_l);
    }
    Some(w)
}

impl Link<'_> {
    /// Expected SER of trial `trial`'s channel at every SNR point.
    pub fn trial_theory(
        &self,
        shape: &NoiseShape,
        formula: &QamSer,
        base_seed: u64,
        trial: usize,
        snr_db: &[f64],
    ) -> Result<Vec<f64>> {
        let mut rng = trial_rng(base_seed, trial);
        let hs = self.channels(&mut rng)?;
        let Some(w) = bin_weights(&hs) else {
            return Ok(vec![1.0; snr_db.len()]);
        };
        let sym = shape.per_symbol(&w);
        Ok(snr_db
            .iter()
            .map(|&s| {
                let half_var = 0.5 * noise_var(s);
                sym.iter()
                    .map(|&(v, rho)| formula.ser(half_var * v, rho))
                    .sum::<f64>()
                    / sym.len() as f64
            })
            .collect())
    }

    pub fn theory(
        &self,
        config_id: String,
        snr_db: &[f64],
        n_channels: usize,
        seed: u64,
    ) -> Result<SerCurve> {
        if n_channels == 0 {
            return Err(Error::ZeroTrials);
        }
        let shape = NoiseShape::of(self.modem)?;
        let formula = QamSer::new();
        let per_channel = (0..n_channels)
            .into_par_iter()
            .map(|t| self.trial_theory(&shape, &formula, seed, t, snr_db))
            .collect::<Result<Vec<_>>>()?;
        let mut ser = vec![0.0; snr_db.len()];
        for v in &per_channel {
            for (acc, x) in ser.iter_mut().zip(v) {
                *acc += x;
            }
        }
        for s in &mut ser {
            *s /= n_channels as f64;
        }
        let decisions = (n_channels * self.decisions_per_trial()) as u64;
        Ok(SerCurve {
            config_id,
            snr_db: snr_db.to_vec(),
            errors: ser
                .iter()
                .map(|p| (p * decisions as f64).round() as u64)
                .collect(),
            decisions: vec![decisions; ser.len()],
            ser,
            trials: n_channels,
            low_confidence: vec![false; snr_db.len()],
        })
    }
}

/// Semi-analytic SER over `n_channels` draws. With the same seed the draws
/// coincide with the channels of [`run_ser`].
pub fn semi_analytic_ser(
    id: SerConfigId,
    snr_db: &[f64],
    n_channels: usize,
    seed: u64,
) -> Result<SerCurve> {
    if n_channels == 0 {
        return Err(Error::ZeroTrials);
    }
    let modem = id.build_modem()?;
    Link::new(&modem, make_pdp(), id.trstc)?.theory(id.theory_id(), snr_db, n_channels, seed)
}

pub const SER_CSV_HEADER: &str = "config_id,snr_db,ser,errors,decisions,trials,flag";

pub fn write_ser_csv<W: Write>(out: &mut W, curves: &[SerCurve]) -> std::io::Result<()> {
    writeln!(out, "{SER_CSV_HEADER}")?;
    for c in curves {
        for i in 0..c.snr_db.len() {
            let flag = if c.low_confidence[i] {
                "low_confidence"
            } else {
                ""
            };
            writeln!(
                out,
                "{},{},{:e},{},{},{},{}",
                c.config_id, c.snr_db[i], c.ser[i], c.errors[i], c.decisions[i], c.trials, flag
            )?;
        }
    }
    Ok(())
}
