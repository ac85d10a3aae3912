//! Frequency-sampled prototype filters.
//!
//! Every filter lives on the DFT grid of one block: `N = K * M` bins, where
//! one subcarrier spacing `F` spans `M` bins. Frequencies are expressed in
//! units of `F`, so bin `l` (centered convention, `l` in `[-N/2, N/2)`) sits
//! at `l / M`. Storage uses DFT order, i.e. bin `l` is at index `l mod N`.
//!
//! Four families are supported:
//!
//! * `Rc`: raised cosine `H(f)`, a first-Nyquist response.
//! * `Rect`: brick-wall `H(f)` with half amplitude on the band edge.
//! * `Rrc`: the nonnegative root `G(f) = sqrt(H(f))`.
//! * `Crrc`: the conjugate root `H(f) + j sgn(f) sqrt((1 - H(f)) H(f))`,
//!   which has the same magnitude as `Rrc` but a conjugate-symmetric phase,
//!   so its impulse response is real yet not symmetric.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dft::{self, Dft};
use crate::error::{Error, Result};

/// Magnitudes below this count as zero when checking band limitation.
pub const BAND_LIMIT_TOL: f64 = 1e-12;

/// DFT grid shared by all filters of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterGrid {
    subcarriers: usize,
    bins_per_subcarrier: usize,
    allow_odd_bins: bool,
}

impl FilterGrid {
    /// Grid of `subcarriers * bins_per_subcarrier` bins. Odd
    /// `bins_per_subcarrier` is rejected later by [`make_nyquist`] unless
    /// [`FilterGrid::allowing_odd_bins`] is used.
    pub fn new(subcarriers: usize, bins_per_subcarrier: usize) -> Result<Self> {
        if subcarriers == 0 || bins_per_subcarrier == 0 {
            return Err(Error::InvalidGrid(format!(
                "K={subcarriers} and M={bins_per_subcarrier} must be positive"
            )));
        }
        Ok(Self {
            subcarriers,
            bins_per_subcarrier,
            allow_odd_bins: false,
        })
    }

    /// GFDM grids follow the subsymbol count, which is commonly odd (M=7).
    /// Such grids miss the `F/2` band-edge bin but still pair every bin `l`
    /// with `l - M`, so the discrete Nyquist criterion stays checkable.
    pub fn allowing_odd_bins(mut self) -> Self {
        self.allow_odd_bins = true;
        self
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn bins_per_subcarrier(&self) -> usize {
        self.bins_per_subcarrier
    }

    pub fn n_bins(&self) -> usize {
        self.subcarriers * self.bins_per_subcarrier
    }

    pub fn odd_bins_allowed(&self) -> bool {
        self.allow_odd_bins
    }

    /// Storage index of centered bin `l`.
    pub fn index_of(&self, l: isize) -> usize {
        l.rem_euclid(self.n_bins() as isize) as usize
    }

    /// Centered bin number of storage index `i`.
    pub fn bin_of(&self, i: usize) -> isize {
        let n = self.n_bins();
        if i < n.div_ceil(2) {
            i as isize
        } else {
            i as isize - n as isize
        }
    }

    /// Frequency of centered bin `l` in units of the subcarrier spacing.
    pub fn freq(&self, l: isize) -> f64 {
        l as f64 / self.bins_per_subcarrier as f64
    }

    /// Centered bins in ascending frequency order.
    pub fn centered_bins(&self) -> impl Iterator<Item = isize> {
        let n = self.n_bins() as isize;
        let lo = -(n / 2);
        lo..lo + n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterFamily {
    Rc,
    Rrc,
    Crrc,
    Rect,
}

impl FilterFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterFamily::Rc => "RC",
            FilterFamily::Rrc => "RRC",
            FilterFamily::Crrc => "CRRC",
            FilterFamily::Rect => "RECT",
        }
    }
}

impl fmt::Display for FilterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RC" => Ok(FilterFamily::Rc),
            "RRC" => Ok(FilterFamily::Rrc),
            "CRRC" => Ok(FilterFamily::Crrc),
            "RECT" => Ok(FilterFamily::Rect),
            _ => Err(Error::InvalidArgument(format!(
                "unknown filter family '{s}'"
            ))),
        }
    }
}

/// A prototype pulse sampled on a [`FilterGrid`].
///
/// `freq_response` keeps the design values (peak 1). `time_response` is its
/// inverse DFT scaled to unit energy, so it is generally not the plain
/// inverse DFT of `freq_response`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    family: FilterFamily,
    rolloff: f64,
    grid: FilterGrid,
    freq_response: Vec<Complex64>,
    time_response: Vec<Complex64>,
}

impl PrototypeFilter {
    fn from_response(
        family: FilterFamily,
        rolloff: f64,
        grid: FilterGrid,
        freq_response: Vec<Complex64>,
    ) -> Result<Self> {
        let mut time_response = dft::ifft(&freq_response);
        let e = dft::energy(&time_response);
        if e <= 0.0 {
            return Err(Error::InvalidFilter("filter has zero energy".into()));
        }
        let s = e.sqrt().recip();
        for v in &mut time_response {
            *v *= s;
        }
        Ok(Self {
            family,
            rolloff,
            grid,
            freq_response,
            time_response,
        })
    }

    /// Builds any family directly from a roll-off factor.
    pub fn design(family: FilterFamily, rolloff: f64, grid: FilterGrid) -> Result<Self> {
        match family {
            FilterFamily::Rc | FilterFamily::Rect => make_nyquist(family, rolloff, grid),
            FilterFamily::Rrc => sqrt_nyquist(&make_nyquist(FilterFamily::Rc, rolloff, grid)?),
            FilterFamily::Crrc => conjugate_root(&make_nyquist(FilterFamily::Rc, rolloff, grid)?),
        }
    }

    pub fn family(&self) -> FilterFamily {
        self.family
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn grid(&self) -> &FilterGrid {
        &self.grid
    }

    pub fn freq_response(&self) -> &[Complex64] {
        &self.freq_response
    }

    pub fn time_response(&self) -> &[Complex64] {
        &self.time_response
    }

    /// Design response at centered bin `l`, with circular indexing.
    pub fn at_bin(&self, l: isize) -> Complex64 {
        self.freq_response[self.grid.index_of(l)]
    }

    /// `|G|^2` per bin.
    pub fn power_response(&self) -> Vec<Complex64> {
        self.freq_response
            .iter()
            .map(|g| Complex64::new(g.norm_sqr(), 0.0))
            .collect()
    }

    /// DFT of the unit-energy time response.
    pub fn normalized_spectrum(&self) -> Vec<Complex64> {
        dft::fft(&self.time_response)
    }

    pub fn label(&self) -> String {
        format!("{}(alpha={})", self.family, self.rolloff)
    }
}

fn validate_rolloff(rolloff: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rolloff) || rolloff.is_nan() {
        return Err(Error::InvalidRolloff(rolloff));
    }
    Ok(())
}

fn rect(f: f64) -> f64 {
    let f = f.abs();
    if f < 0.5 {
        1.0
    } else if f == 0.5 {
        0.5
    } else {
        0.0
    }
}

/// Raised-cosine spectrum at `f` (units of `F`).
pub fn raised_cosine(f: f64, rolloff: f64) -> f64 {
    if rolloff == 0.0 {
        return rect(f);
    }
    let f = f.abs();
    let lo = 0.5 * (1.0 - rolloff);
    let hi = 0.5 * (1.0 + rolloff);
    if f <= lo {
        1.0
    } else if f >= hi {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI / rolloff * (f - lo)).cos())
    }
}

/// Samples a first-Nyquist response on the grid.
///
/// `Rect` ignores `rolloff`. Odd `bins_per_subcarrier` is rejected unless the
/// grid explicitly allows it.
pub fn make_nyquist(
    family: FilterFamily,
    rolloff: f64,
    grid: FilterGrid,
) -> Result<PrototypeFilter> {
    let m = grid.bins_per_subcarrier();
    if m % 2 == 1 {
        if !grid.odd_bins_allowed() {
            return Err(Error::OddBinsPerSubcarrier(m));
        }
        static WARNED: std::sync::Once = std::sync::Once::new();
        WARNED.call_once(|| {
            log::warn!("odd bins per subcarrier (M={m}): the F/2 band edge is off-grid")
        });
    }
    let (rolloff, shape): (f64, fn(f64, f64) -> f64) = match family {
        FilterFamily::Rc => {
            validate_rolloff(rolloff)?;
            (rolloff, raised_cosine)
        }
        FilterFamily::Rect => (0.0, |f, _| rect(f)),
        other => {
            return Err(Error::InvalidFilter(format!(
                "{other} is not a Nyquist family; use RC or RECT"
            )))
        }
    };
    let response = (0..grid.n_bins())
        .map(|i| Complex64::new(shape(grid.freq(grid.bin_of(i)), rolloff), 0.0))
        .collect();
    PrototypeFilter::from_response(family, rolloff, grid, response)
}

fn require_real_nyquist(h: &PrototypeFilter) -> Result<()> {
    if !matches!(h.family, FilterFamily::Rc | FilterFamily::Rect) {
        return Err(Error::InvalidFilter(format!(
            "expected an RC or RECT response, got {}",
            h.family
        )));
    }
    if let Some(i) = h.freq_response.iter().position(|g| g.im != 0.0) {
        return Err(Error::InvalidFilter(format!(
            "complex response at bin {}",
            h.grid.bin_of(i)
        )));
    }
    Ok(())
}

/// Nonnegative square root of a Nyquist response (RRC from RC).
pub fn sqrt_nyquist(h: &PrototypeFilter) -> Result<PrototypeFilter> {
    require_real_nyquist(h)?;
    let mut out = Vec::with_capacity(h.freq_response.len());
    for (i, g) in h.freq_response.iter().enumerate() {
        if g.re < 0.0 {
            return Err(Error::InvalidFilter(format!(
                "negative response {} at bin {}",
                g.re,
                h.grid.bin_of(i)
            )));
        }
        out.push(Complex64::new(g.re.sqrt(), 0.0));
    }
    PrototypeFilter::from_response(FilterFamily::Rrc, h.rolloff, h.grid, out)
}

/// Conjugate-root filter of a real, even, band-limited Nyquist response.
///
/// Bins with `l >= 0` take the `+j` branch, negative bins the `-j` branch.
pub fn conjugate_root(h: &PrototypeFilter) -> Result<PrototypeFilter> {
    require_real_nyquist(h)?;
    let grid = h.grid;
    let m = grid.bins_per_subcarrier() as isize;
    let mut out = Vec::with_capacity(grid.n_bins());
    for i in 0..grid.n_bins() {
        let l = grid.bin_of(i);
        let v = h.freq_response[i].re;
        if l.abs() >= m && v.abs() >= BAND_LIMIT_TOL {
            return Err(Error::InvalidFilter(format!(
                "response {v} at bin {l} violates the band limit |f| < F"
            )));
        }
        let mirror = h.at_bin(-l).re;
        if (v - mirror).abs() > BAND_LIMIT_TOL && l != -(grid.n_bins() as isize) / 2 {
            return Err(Error::InvalidFilter(format!(
                "response is not even at bin {l}"
            )));
        }
        let quad = ((1.0 - v) * v).max(0.0).sqrt();
        let sign = if l >= 0 { 1.0 } else { -1.0 };
        out.push(Complex64::new(v, sign * quad));
    }
    PrototypeFilter::from_response(FilterFamily::Crrc, h.rolloff, grid, out)
}

/// `max_{l in [0, M]} |h[l] + h[l - M] - 1|` for an arbitrary response on `grid`.
pub fn nyquist_residual_of(response: &[Complex64], grid: &FilterGrid) -> f64 {
    assert_eq!(response.len(), grid.n_bins());
    let m = grid.bins_per_subcarrier() as isize;
    (0..=m)
        .map(|l| {
            let a = response[grid.index_of(l)];
            let b = response[grid.index_of(l - m)];
            (a + b - 1.0).norm()
        })
        .fold(0.0, f64::max)
}

/// First-Nyquist residual of the filter's design response.
///
/// Pass [`PrototypeFilter::power_response`] through [`nyquist_residual_of`]
/// to test `|G|^2` instead.
pub fn nyquist_residual(h: &PrototypeFilter) -> f64 {
    nyquist_residual_of(&h.freq_response, &h.grid)
}

/// Inter-carrier interference between subcarriers `shift` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct IciResponse {
    pub shift: isize,
    /// `S[l] = G[l + shift*M] * conj(G[l])`, `G` the unit-energy spectrum.
    pub spectrum: Vec<Complex64>,
    /// Inverse DFT of `spectrum`, i.e. `sum_n g[n] e^{-j2pi shift n/K} conj(g[n - tau])`.
    pub time: Vec<Complex64>,
}

/// ICI spectrum and time response of `g` against itself shifted by `shift`
/// subcarriers. The spectral shift follows the demodulator's down-mixing
/// `exp(-j 2 pi shift n / K)`, which is what makes the conjugate-root ICI
/// come out as `j` times the half-Nyquist ICI.
pub fn ici_response(g: &PrototypeFilter, shift: isize) -> Result<IciResponse> {
    let grid = g.grid;
    let k = grid.subcarriers() as isize;
    if shift.abs() > k - 1 {
        return Err(Error::InvalidArgument(format!(
            "ICI shift {shift} exceeds K-1={}",
            k - 1
        )));
    }
    let spec = g.normalized_spectrum();
    let m = grid.bins_per_subcarrier() as isize;
    let spectrum: Vec<Complex64> = (0..grid.n_bins())
        .map(|i| {
            let l = grid.bin_of(i);
            spec[grid.index_of(l + shift * m)] * spec[i].conj()
        })
        .collect();
    let time = Dft::new(grid.n_bins()).inverse(&spectrum);
    Ok(IciResponse {
        shift,
        spectrum,
        time,
    })
}

/// Writes `bin,freq_over_F,re_G,im_G,re_g,im_g`, one row per bin in centered
/// order. The time sample on each row is the one at index `bin` (circularly),
/// so the pulse peak lands mid-file.
pub fn write_response_csv<W: Write>(
    out: &mut W,
    grid: &FilterGrid,
    freq: &[Complex64],
    time: &[Complex64],
) -> std::io::Result<()> {
    writeln!(out, "bin,freq_over_F,re_G,im_G,re_g,im_g")?;
    for l in grid.centered_bins() {
        let i = grid.index_of(l);
        let (g, t) = (freq[i], time[i]);
        writeln!(
            out,
            "{l},{},{:e},{:e},{:e},{:e}",
            grid.freq(l),
            g.re,
            g.im,
            t.re,
            t.im
        )?;
    }
    Ok(())
}

pub fn write_filter_csv<W: Write>(out: &mut W, filter: &PrototypeFilter) -> std::io::Result<()> {
    write_response_csv(
        out,
        &filter.grid,
        &filter.freq_response,
        &filter.time_response,
    )
}
