//! Circular GFDM block modem.
//!
//! A block carries `N = K * M` payload entries ordered subsymbol-major
//! (`index = m * K + k`). Column `m * K + k` of the modulation matrix is the
//! prototype circularly shifted by `m * K` samples and mixed up to carrier
//! `k`.
//!
//! Offset modes send the real part of the payload through `A` and the
//! imaginary part through `A` followed by a circular rotation of `K/2`
//! samples. `CrOqam` uses the conjugate-root pulse as is; `Oqam` keeps the
//! symmetric root pulse and scales column `(k, m)` by `j^k`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dft;
use crate::error::{Error, Result};
use crate::filters::{FilterFamily, FilterGrid, PrototypeFilter};
use crate::linalg::CMatrix;
use crate::oqam::j_pow;

/// Condition numbers above this make a zero-forcing modem unusable.
pub const COND_LIMIT: f64 = 1e9;

/// Cyclic prefix length used unless configured otherwise.
pub const DEFAULT_CP_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Zf,
    Mf,
}

impl Detector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Detector::Zf => "ZF",
            Detector::Mf => "MF",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ZF" => Ok(Detector::Zf),
            "MF" => Ok(Detector::Mf),
            _ => Err(Error::InvalidArgument(format!("unknown detector '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationMode {
    Qam,
    /// Offset-QAM with a symmetric pulse and the `j^k` carrier factor.
    Oqam,
    /// Offset-QAM with a conjugate-root pulse, no carrier factor.
    CrOqam,
}

impl ModulationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModulationMode::Qam => "QAM",
            ModulationMode::Oqam => "OQAM",
            ModulationMode::CrOqam => "CROQAM",
        }
    }

    pub fn is_offset(&self) -> bool {
        !matches!(self, ModulationMode::Qam)
    }
}

impl fmt::Display for ModulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "QAM" => Ok(ModulationMode::Qam),
            "OQAM" => Ok(ModulationMode::Oqam),
            "CROQAM" => Ok(ModulationMode::CrOqam),
            _ => Err(Error::InvalidArgument(format!(
                "unknown modulation mode '{s}'"
            ))),
        }
    }
}

/// The three modem columns of the reference parameter set
/// (K = 64, M = 7).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Table1Column {
    /// RC, alpha 0.5, zero-forcing.
    Qam,
    /// RRC, alpha 1, matched filter.
    Oqam,
    /// CRRC, alpha 1, matched filter.
    CrOqam,
}

impl Table1Column {
    pub const ALL: [Table1Column; 3] =
        [Table1Column::Qam, Table1Column::Oqam, Table1Column::CrOqam];
    pub const SUBCARRIERS: usize = 64;
    pub const SUBSYMBOLS: usize = 7;

    pub fn family(&self) -> FilterFamily {
        match self {
            Table1Column::Qam => FilterFamily::Rc,
            Table1Column::Oqam => FilterFamily::Rrc,
            Table1Column::CrOqam => FilterFamily::Crrc,
        }
    }

    pub fn rolloff(&self) -> f64 {
        match self {
            Table1Column::Qam => 0.5,
            _ => 1.0,
        }
    }

    pub fn detector(&self) -> Detector {
        match self {
            Table1Column::Qam => Detector::Zf,
            _ => Detector::Mf,
        }
    }

    pub fn mode(&self) -> ModulationMode {
        match self {
            Table1Column::Qam => ModulationMode::Qam,
            Table1Column::Oqam => ModulationMode::Oqam,
            Table1Column::CrOqam => ModulationMode::CrOqam,
        }
    }

    pub fn config(&self) -> Result<GfdmConfig> {
        GfdmConfig::design(
            Self::SUBCARRIERS,
            Self::SUBSYMBOLS,
            self.family(),
            self.rolloff(),
            self.detector(),
            self.mode(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct GfdmConfig {
    pub filter: PrototypeFilter,
    pub detector: Detector,
    pub mode: ModulationMode,
    pub cp_length: usize,
    pub guard_subsymbols: usize,
    /// Also silence the last subsymbol.
    pub tail_guard: bool,
}

impl GfdmConfig {
    /// `filter` must be designed on the `K x M` grid of the block.
    pub fn new(filter: PrototypeFilter, detector: Detector, mode: ModulationMode) -> Self {
        Self {
            filter,
            detector,
            mode,
            cp_length: DEFAULT_CP_LEN,
            guard_subsymbols: 0,
            tail_guard: false,
        }
    }

    /// Designs the prototype on a `K x M` grid. Odd `M` is accepted here.
    pub fn design(
        subcarriers: usize,
        subsymbols: usize,
        family: FilterFamily,
        rolloff: f64,
        detector: Detector,
        mode: ModulationMode,
    ) -> Result<Self> {
        let grid = FilterGrid::new(subcarriers, subsymbols)?.allowing_odd_bins();
        let filter = PrototypeFilter::design(family, rolloff, grid)?;
        Ok(Self::new(filter, detector, mode))
    }

    pub fn subcarriers(&self) -> usize {
        self.filter.grid().subcarriers()
    }

    pub fn subsymbols(&self) -> usize {
        self.filter.grid().bins_per_subcarrier()
    }

    pub fn n(&self) -> usize {
        self.filter.grid().n_bins()
    }

    pub fn label(&self) -> String {
        format!(
            "K={} M={} {} {} {}",
            self.subcarriers(),
            self.subsymbols(),
            self.filter.label(),
            self.detector,
            self.mode
        )
    }

    fn validate(&self) -> Result<()> {
        let k = self.subcarriers();
        if self.mode.is_offset() {
            if k % 2 == 1 {
                return Err(Error::OddSubcarriers(k));
            }
            if self.detector == Detector::Zf {
                return Err(Error::Unsupported(format!(
                    "{} is detected with the matched filter only",
                    self.mode
                )));
            }
            let family = self.filter.family();
            let ok = match self.mode {
                ModulationMode::Oqam => matches!(family, FilterFamily::Rrc | FilterFamily::Rect),
                _ => family == FilterFamily::Crrc,
            };
            if !ok {
                return Err(Error::InvalidFilter(format!(
                    "{family} pulse does not fit {}",
                    self.mode
                )));
            }
        }
        if self.cp_length >= self.n() {
            return Err(Error::CyclicPrefixTooLong {
                cp: self.cp_length,
                n: self.n(),
            });
        }
        let guards = self.guard_subsymbols + usize::from(self.tail_guard);
        if guards > self.subsymbols() {
            return Err(Error::TooManyGuardSymbols {
                n_guard: guards,
                subsymbols: self.subsymbols(),
            });
        }
        Ok(())
    }
}

/// One modulated block.
#[derive(Debug, Clone, PartialEq)]
pub struct GfdmBlock {
    pub payload: Vec<Complex64>,
    pub samples: Vec<Complex64>,
    pub with_cp: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct GfdmModem {
    config: GfdmConfig,
    a: CMatrix,
    a_zf: Option<CMatrix>,
    a_mf: CMatrix,
    xi_db: f64,
    cond_estimate: Option<f64>,
}

/// Modulation matrix of `filter`, with the `j^k` column factor when `fold` is set.
pub fn modulation_matrix(filter: &PrototypeFilter, fold: bool) -> CMatrix {
    let grid = filter.grid();
    let k_count = grid.subcarriers();
    let n = grid.n_bins();
    let g = filter.time_response();
    CMatrix::from_fn(n, n, |row, col| {
        let (m, k) = (col / k_count, col % k_count);
        let phase = ((k * row) % k_count) as f64 / k_count as f64;
        let mut v = g[(row + n - m * k_count) % n]
            * Complex64::from_polar(1.0, std::f64::consts::TAU * phase);
        if fold {
            v *= j_pow(k as isize);
        }
        v
    })
}

/// `||A||_1 * ||A^-1||_1`, infinite when `A` has no inverse.
pub fn condition_estimate(a: &CMatrix) -> f64 {
    match a.inverse() {
        Some(inv) => a.norm1() * inv.norm1(),
        None => f64::INFINITY,
    }
}

/// Noise gain of detector matrix `d`: mean squared row norm in dB.
pub fn noise_enhancement_db(d: &CMatrix) -> f64 {
    let rows = d.row_norms_sqr();
    10.0 * (rows.iter().sum::<f64>() / rows.len() as f64).log10()
}

pub fn build_modem(config: GfdmConfig) -> Result<GfdmModem> {
    config.validate()?;
    let a = modulation_matrix(&config.filter, config.mode == ModulationMode::Oqam);
    let a_mf = a.conj_transpose();
    let (a_zf, cond_estimate, xi_db) = match config.detector {
        Detector::Zf => {
            let singular = |cond: f64| Error::SingularModulationMatrix {
                k: config.subcarriers(),
                m: config.subsymbols(),
                filter: config.filter.label(),
                cond,
            };
            let inv = a.inverse().ok_or_else(|| singular(f64::INFINITY))?;
            let cond = a.norm1() * inv.norm1();
            if !cond.is_finite() || cond > COND_LIMIT {
                return Err(singular(cond));
            }
            let xi = noise_enhancement_db(&inv);
            (Some(inv), Some(cond), xi)
        }
        Detector::Mf => {
            let xi = noise_enhancement_db(&a_mf);
            (None, None, xi)
        }
    };
    Ok(GfdmModem {
        config,
        a,
        a_zf,
        a_mf,
        xi_db,
        cond_estimate,
    })
}

impl GfdmModem {
    pub fn config(&self) -> &GfdmConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn subcarriers(&self) -> usize {
        self.config.subcarriers()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn a_zf(&self) -> Option<&CMatrix> {
        self.a_zf.as_ref()
    }

    pub fn a_mf(&self) -> &CMatrix {
        &self.a_mf
    }

    pub fn xi_db(&self) -> f64 {
        self.xi_db
    }

    /// Present for zero-forcing modems.
    pub fn cond_estimate(&self) -> Option<f64> {
        self.cond_estimate
    }

    fn half_shift(&self) -> isize {
        (self.subcarriers() / 2) as isize
    }

    fn check_len(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Transmit samples of one block, without cyclic prefix.
    pub fn modulate_samples(&self, d: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(d)?;
        if !self.config.mode.is_offset() {
            return Ok(self.a.mul_vec(d));
        }
        let re: Vec<f64> = d.iter().map(|z| z.re).collect();
        let im: Vec<f64> = d.iter().map(|z| z.im).collect();
        let mut x = self.a.mul_real_vec(&re);
        if im.iter().any(|&v| v != 0.0) {
            let branch = dft::rotate(&self.a.mul_real_vec(&im), self.half_shift());
            let j = Complex64::new(0.0, 1.0);
            for (o, b) in x.iter_mut().zip(branch) {
                *o += j * b;
            }
        }
        Ok(x)
    }

    pub fn modulate(&self, d: &[Complex64]) -> Result<GfdmBlock> {
        let samples = self.modulate_samples(d)?;
        let with_cp = add_cp(&samples, self.config.cp_length)?;
        Ok(GfdmBlock {
            payload: d.to_vec(),
            samples,
            with_cp,
        })
    }

    /// Detects with the configured detector.
    pub fn detect(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.detect_with(y, self.config.detector)
    }

    /// Detects with an explicit detector, e.g. the matched filter on a
    /// zero-forcing modem.
    pub fn detect_with(&self, y: &[Complex64], detector: Detector) -> Result<Vec<Complex64>> {
        self.check_len(y)?;
        let d = match detector {
            Detector::Zf => self.a_zf.as_ref().ok_or(Error::NoZeroForcingDetector)?,
            Detector::Mf => &self.a_mf,
        };
        if !self.config.mode.is_offset() {
            return Ok(d.mul_vec(y));
        }
        let re = d.mul_vec_re(y);
        let im = d.mul_vec_im(&dft::rotate(y, -self.half_shift()));
        Ok(re
            .into_iter()
            .zip(im)
            .map(|(r, i)| Complex64::new(r, i))
            .collect())
    }

    pub fn add_cp(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        add_cp(x, self.config.cp_length)
    }

    pub fn remove_cp(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        remove_cp(y, self.config.cp_length)
    }

    /// Applies the configured guard subsymbols to a payload.
    pub fn apply_guards(&self, d: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = apply_guard_symbols(d, self.config.guard_subsymbols, &self.config)?;
        if self.config.tail_guard {
            out = apply_tail_guard(&out, &self.config)?;
        }
        Ok(out)
    }
}

/// Zeroes all subcarriers of the first `n_guard` subsymbols.
pub fn apply_guard_symbols(
    d: &[Complex64],
    n_guard: usize,
    cfg: &GfdmConfig,
) -> Result<Vec<Complex64>> {
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    if d.len() != k * m {
        return Err(Error::LengthMismatch {
            expected: k * m,
            got: d.len(),
        });
    }
    if n_guard > m {
        return Err(Error::TooManyGuardSymbols {
            n_guard,
            subsymbols: m,
        });
    }
    let mut out = d.to_vec();
    out[..n_guard * k].fill(Complex64::new(0.0, 0.0));
    Ok(out)
}

/// Zeroes the last subsymbol.
pub fn apply_tail_guard(d: &[Complex64], cfg: &GfdmConfig) -> Result<Vec<Complex64>> {
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    if d.len() != k * m {
        return Err(Error::LengthMismatch {
            expected: k * m,
            got: d.len(),
        });
    }
    let mut out = d.to_vec();
    out[(m - 1) * k..].fill(Complex64::new(0.0, 0.0));
    Ok(out)
}

/// Subcarriers silenced when `per_edge` carriers are switched off on each
/// side of the band edge `f = +-K/2`.
pub fn edge_subcarriers(subcarriers: usize, per_edge: usize) -> Vec<usize> {
    let half = subcarriers / 2;
    let lo = half.saturating_sub(per_edge);
    let hi = (half + per_edge).min(subcarriers);
    (lo..hi).collect()
}

/// Zeroes subcarriers `ks` in every subsymbol.
pub fn deactivate_subcarriers(d: &[Complex64], subcarriers: usize, ks: &[usize]) -> Vec<Complex64> {
    let mut out = d.to_vec();
    for (i, v) in out.iter_mut().enumerate() {
        if ks.contains(&(i % subcarriers)) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    out
}

pub fn add_cp(x: &[Complex64], cp: usize) -> Result<Vec<Complex64>> {
    if cp >= x.len() {
        return Err(Error::CyclicPrefixTooLong { cp, n: x.len() });
    }
    let mut out = Vec::with_capacity(x.len() + cp);
    out.extend_from_slice(&x[x.len() - cp..]);
    out.extend_from_slice(x);
    Ok(out)
}

pub fn remove_cp(y: &[Complex64], cp: usize) -> Result<Vec<Complex64>> {
    if cp >= y.len() {
        return Err(Error::CyclicPrefixTooLong { cp, n: y.len() });
    }
    Ok(y[cp..].to_vec())
}
