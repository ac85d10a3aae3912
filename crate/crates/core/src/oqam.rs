//! Burst-mode OFDM/OQAM and OFDM/CR-OQAM with linear pulse shaping.
//!
//! The pulse is one period of the prototype's grid response, `L = K * P`
//! samples for a filter designed on a `K x P` grid, centered so its peak sits
//! at `L/2`. Symbol `(k, m)` launches the pulse at `n = mK` (real branch) and
//! `n = mK + K/2` (imaginary branch) on carrier `exp(j 2 pi k n / K)`.
//!
//! The receiver correlates against the periodic extension of the pulse. Since
//! every transmitted copy is a full period, that correlation equals the
//! circular inner product on the filter grid, so reconstruction is exact for
//! all symbols of a burst of at most `P` symbols, edges included.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::{FilterFamily, FilterGrid, PrototypeFilter};

/// Pulse periods used when a caller does not choose a span.
pub const DEFAULT_PULSE_PERIODS: usize = 8;

/// Subcarrier phase convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseMode {
    /// `phi = 1`: carrier `k` carries the extra factor `j^k`.
    Conventional,
    /// `phi = 0`: no per-carrier factor, used with conjugate-root pulses.
    Cr,
}

impl PhaseMode {
    pub fn phi(&self) -> u8 {
        match self {
            PhaseMode::Conventional => 1,
            PhaseMode::Cr => 0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseMode::Conventional => "conventional",
            PhaseMode::Cr => "cr",
        }
    }

    /// `(j^k)^phi`
    pub fn carrier_phase(&self, k: isize) -> Complex64 {
        match self {
            PhaseMode::Conventional => j_pow(k),
            PhaseMode::Cr => Complex64::new(1.0, 0.0),
        }
    }
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" | "phi1" | "1" => Ok(PhaseMode::Conventional),
            "cr" | "phi0" | "0" => Ok(PhaseMode::Cr),
            _ => Err(Error::InvalidArgument(format!("unknown phase mode '{s}'"))),
        }
    }
}

/// `j^k` for any integer `k`, exactly.
pub fn j_pow(k: isize) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Unit carrier `exp(j 2 pi k n / K)` with the phase reduced modulo `K`.
fn carrier(k: isize, n: isize, subcarriers: usize) -> Complex64 {
    let r = (k * n).rem_euclid(subcarriers as isize) as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * r / subcarriers as f64)
}

/// `K x M` array of complex data symbols, stored subcarrier-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    subcarriers: usize,
    symbols: usize,
    data: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn zeros(subcarriers: usize, symbols: usize) -> Self {
        Self {
            subcarriers,
            symbols,
            data: vec![Complex64::new(0.0, 0.0); subcarriers * symbols],
        }
    }

    pub fn from_fn(
        subcarriers: usize,
        symbols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(subcarriers * symbols);
        for k in 0..subcarriers {
            for m in 0..symbols {
                data.push(f(k, m));
            }
        }
        Self {
            subcarriers,
            symbols,
            data,
        }
    }

    /// Entries must be finite.
    pub fn from_vec(subcarriers: usize, symbols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != subcarriers * symbols {
            return Err(Error::LengthMismatch {
                expected: subcarriers * symbols,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument(
                "symbol grid holds non-finite entries".into(),
            ));
        }
        Ok(Self {
            subcarriers,
            symbols,
            data,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn get(&self, k: usize, m: usize) -> Complex64 {
        self.data[k * self.symbols + m]
    }

    pub fn set(&mut self, k: usize, m: usize, v: Complex64) {
        self.data[k * self.symbols + m] = v;
    }

    /// `c^R_{k,m}`
    pub fn re(&self, k: usize, m: usize) -> f64 {
        self.get(k, m).re
    }

    /// `c^I_{k,m}`
    pub fn im(&self, k: usize, m: usize) -> f64 {
        self.get(k, m).im
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &SymbolGrid) -> f64 {
        assert_eq!(
            (self.subcarriers, self.symbols),
            (other.subcarriers, other.symbols)
        );
        crate::dft::max_abs_diff(&self.data, &other.data)
    }
}

/// Burst transceiver parameters.
#[derive(Debug, Clone)]
pub struct OqamBurstConfig {
    subcarriers: usize,
    symbols: usize,
    phase_mode: PhaseMode,
    filter: PrototypeFilter,
    pulse: Vec<Complex64>,
}

impl OqamBurstConfig {
    /// `filter` must live on a `K x P` grid; the burst holds at most `P` symbols.
    pub fn new(filter: PrototypeFilter, symbols: usize, phase_mode: PhaseMode) -> Result<Self> {
        let grid = *filter.grid();
        let k = grid.subcarriers();
        if k % 2 == 1 {
            return Err(Error::OddSubcarriers(k));
        }
        let allowed = match phase_mode {
            PhaseMode::Conventional => {
                matches!(filter.family(), FilterFamily::Rrc | FilterFamily::Rect)
            }
            PhaseMode::Cr => filter.family() == FilterFamily::Crrc,
        };
        if !allowed {
            return Err(Error::InvalidFilter(format!(
                "{} pulse cannot be used with the {phase_mode} phase mode",
                filter.family()
            )));
        }
        if symbols == 0 {
            return Err(Error::InvalidArgument(
                "burst needs at least one symbol".into(),
            ));
        }
        let periods = grid.bins_per_subcarrier();
        if symbols > periods {
            return Err(Error::BurstTooLong { symbols, periods });
        }
        let g = filter.time_response();
        let l = g.len();
        let pulse = (0..l).map(|i| g[(i + l - l / 2) % l]).collect();
        Ok(Self {
            subcarriers: k,
            symbols,
            phase_mode,
            filter,
            pulse,
        })
    }

    /// Designs the pulse on a `K x periods` grid and builds the config.
    pub fn design(
        family: FilterFamily,
        rolloff: f64,
        subcarriers: usize,
        symbols: usize,
        periods: usize,
        phase_mode: PhaseMode,
    ) -> Result<Self> {
        let grid = FilterGrid::new(subcarriers, periods)?;
        Self::new(
            PrototypeFilter::design(family, rolloff, grid)?,
            symbols,
            phase_mode,
        )
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.subcarriers
    }

    pub fn phase_mode(&self) -> PhaseMode {
        self.phase_mode
    }

    pub fn filter(&self) -> &PrototypeFilter {
        &self.filter
    }

    /// Centered transmit pulse, one period long.
    pub fn pulse(&self) -> &[Complex64] {
        &self.pulse
    }

    pub fn output_len(&self) -> usize {
        self.symbols * self.subcarriers + self.pulse.len()
    }

    fn check_grid(&self, grid: &SymbolGrid) -> Result<()> {
        let expected = self.subcarriers * self.symbols;
        if grid.subcarriers != self.subcarriers || grid.symbols != self.symbols {
            return Err(Error::LengthMismatch {
                expected,
                got: grid.data.len(),
            });
        }
        Ok(())
    }
}

pub fn oqam_modulate(grid: &SymbolGrid, cfg: &OqamBurstConfig) -> Result<Vec<Complex64>> {
    cfg.check_grid(grid)?;
    let k_count = cfg.subcarriers;
    let half = k_count / 2;
    let p = &cfg.pulse;
    let mut x = vec![Complex64::new(0.0, 0.0); cfg.output_len()];
    let j = Complex64::new(0.0, 1.0);
    for k in 0..k_count {
        let theta = cfg.phase_mode.carrier_phase(k as isize);
        for m in 0..cfg.symbols {
            let c = grid.get(k, m);
            for (offset, amp) in [
                (m * k_count, theta * c.re),
                (m * k_count + half, j * theta * c.im),
            ] {
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (i, pv) in p.iter().enumerate() {
                    let n = offset + i;
                    x[n] += amp * pv * carrier(k as isize, n as isize, k_count);
                }
            }
        }
    }
    Ok(x)
}

pub fn oqam_demodulate(samples: &[Complex64], cfg: &OqamBurstConfig) -> Result<SymbolGrid> {
    let need = cfg.output_len();
    if samples.len() != need {
        return Err(Error::LengthMismatch {
            expected: need,
            got: samples.len(),
        });
    }
    let k_count = cfg.subcarriers;
    let half = k_count / 2;
    let l = cfg.pulse.len();
    // The receive filter is L-periodic and L is a multiple of K, so the burst
    // folds onto one period without touching the carrier phases.
    let mut folded = vec![Complex64::new(0.0, 0.0); l];
    for (n, v) in samples.iter().enumerate() {
        folded[n % l] += v;
    }
    let q = &cfg.pulse;
    let mut out = SymbolGrid::zeros(k_count, cfg.symbols);
    let mut mixed = vec![Complex64::new(0.0, 0.0); l];
    for k in 0..k_count {
        let theta = cfg.phase_mode.carrier_phase(k as isize).conj();
        for (i, (dst, v)) in mixed.iter_mut().zip(&folded).enumerate() {
            *dst = theta * v * carrier(-(k as isize), i as isize, k_count);
        }
        for m in 0..cfg.symbols {
            let re_off = m * k_count;
            let im_off = re_off + half;
            let mut acc_re = Complex64::new(0.0, 0.0);
            let mut acc_im = Complex64::new(0.0, 0.0);
            for (i, v) in mixed.iter().enumerate() {
                acc_re += v * q[(i + l - re_off % l) % l].conj();
                acc_im += v * q[(i + l - im_off % l) % l].conj();
            }
            out.set(k, m, Complex64::new(acc_re.re, acc_im.im));
        }
    }
    Ok(out)
}

/// Circular cross-ambiguity `sum_n g[n] exp(-j 2 pi kappa n / K) conj(g[n - tau])`
/// on the filter's own grid.
pub fn ambiguity(filter: &PrototypeFilter, kappa: isize, tau: isize) -> Complex64 {
    let g = filter.time_response();
    let l = g.len() as isize;
    let k = filter.grid().subcarriers();
    (0..l)
        .map(|n| g[n as usize] * carrier(-kappa, n, k) * g[(n - tau).rem_euclid(l) as usize].conj())
        .sum()
}

/// Largest violation of the orthogonality conditions of `phase_mode` over
/// carrier offsets and symbol lags in `-2..=2`.
///
/// The conditions are evaluated for any pulse, so a mismatched pairing simply
/// reports a large value.
pub fn orthogonality_report(filter: &PrototypeFilter, phase_mode: PhaseMode) -> f64 {
    let k = filter.grid().subcarriers() as isize;
    let half = k / 2;
    let j = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for kappa in -2..=2isize {
        for m in -2..=2isize {
            let delta = if kappa == 0 && m == 0 { 1.0 } else { 0.0 };
            let full = ambiguity(filter, kappa, m * k);
            let offset = ambiguity(filter, kappa, m * k + half);
            let violations = match phase_mode {
                PhaseMode::Conventional => {
                    let r = j_pow(-kappa);
                    [
                        (r * full).re - delta,
                        (j * r * offset).re,
                        (r * offset).im,
                        (j * r * full).im - delta,
                    ]
                    .to_vec()
                }
                PhaseMode::Cr => vec![full.re - delta, (j * offset).re],
            };
            for v in violations {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}
