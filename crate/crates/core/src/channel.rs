//! Rayleigh multipath channel, AWGN and per-bin zero-forcing equalization.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dft::Dft;
use crate::error::{Error, Result};

/// Channel bins with magnitude below this are treated as nulls.
pub const DEEP_FADE: f64 = 1e-12;

/// Average tap powers, normalized to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    taps: Vec<f64>,
}

impl PowerDelayProfile {
    /// Normalizes arbitrary nonnegative tap powers.
    pub fn from_powers(powers: &[f64]) -> Result<Self> {
        let total: f64 = powers.iter().sum();
        if powers.is_empty() || powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || total <= 0.0
        {
            return Err(Error::InvalidArgument(
                "power delay profile needs positive finite powers".into(),
            ));
        }
        Ok(Self {
            taps: powers.iter().map(|p| p / total).collect(),
        })
    }

    /// Single unit tap.
    pub fn flat() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Samples of channel memory a cyclic prefix has to cover.
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }
}

/// 16 taps falling linearly in dB from 0 to -16 dB.
pub fn make_pdp() -> PowerDelayProfile {
    let db: Vec<f64> = (0..16).map(|i| -16.0 * i as f64 / 15.0).collect();
    let lin: Vec<f64> = db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    PowerDelayProfile::from_powers(&lin).expect("static profile is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    /// DFT of the zero-padded taps on the block grid.
    pub freq: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn from_taps(taps: Vec<Complex64>, n: usize) -> Result<Self> {
        if taps.is_empty() || taps.len() > n {
            return Err(Error::InvalidArgument(format!(
                "{} taps do not fit a block of {n} samples",
                taps.len()
            )));
        }
        let mut freq = vec![Complex64::new(0.0, 0.0); n];
        freq[..taps.len()].copy_from_slice(&taps);
        Dft::new(n).forward_in_place(&mut freq);
        Ok(Self { taps, freq })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_taps(vec![Complex64::new(1.0, 0.0)], n).expect("n > 0")
    }
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn draw_channel_with<R: Rng>(
    pdp: &PowerDelayProfile,
    n: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let taps = pdp.taps.iter().map(|&p| complex_gaussian(rng, p)).collect();
    ChannelRealization::from_taps(taps, n)
}

/// Seeded draw on an `n`-bin grid.
pub fn draw_channel(pdp: &PowerDelayProfile, n: usize, seed: u64) -> Result<ChannelRealization> {
    draw_channel_with(pdp, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Linear convolution with `taps`, truncated to the input length.
pub fn convolve(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for (n, out) in y.iter_mut().enumerate() {
        for (i, h) in taps.iter().enumerate().take(n + 1) {
            *out += h * x[n - i];
        }
    }
    y
}

pub fn add_awgn<R: Rng>(x: &mut [Complex64], noise_var: f64, rng: &mut R) {
    if noise_var == 0.0 {
        return;
    }
    for v in x.iter_mut() {
        *v += complex_gaussian(rng, noise_var);
    }
}

/// Sends one CP-framed block through `channel` and adds noise of variance
/// `noise_var` per sample.
pub fn transmit<R: Rng>(
    x_with_cp: &[Complex64],
    cp: usize,
    channel: &ChannelRealization,
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let memory = channel.taps.len() - 1;
    if cp < memory {
        return Err(Error::CyclicPrefixTooShort { cp, memory });
    }
    let mut y = convolve(x_with_cp, &channel.taps);
    add_awgn(&mut y, noise_var, rng);
    Ok(y)
}

/// Seeded variant of [`transmit`].
pub fn transmit_seeded(
    x_with_cp: &[Complex64],
    cp: usize,
    channel: &ChannelRealization,
    noise_var: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    transmit(
        x_with_cp,
        cp,
        channel,
        noise_var,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

/// Per-bin zero-forcing: `IDFT(DFT(y) / H)`.
pub fn fde_equalize(y: &[Complex64], freq: &[Complex64]) -> Result<Vec<Complex64>> {
    fde_equalize_with(&Dft::new(y.len()), y, freq)
}

/// [`fde_equalize`] with a planned transform of the block length.
pub fn fde_equalize_with(dft: &Dft, y: &[Complex64], freq: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.len() != freq.len() || y.len() != dft.len() {
        return Err(Error::LengthMismatch {
            expected: freq.len(),
            got: y.len(),
        });
    }
    if let Some(bin) = freq.iter().position(|h| h.norm() < DEEP_FADE) {
        return Err(Error::DeepFade { bin });
    }
    let mut buf = y.to_vec();
    dft.forward_in_place(&mut buf);
    for (v, h) in buf.iter_mut().zip(freq) {
        *v /= h;
    }
    dft.inverse_in_place(&mut buf);
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{self, max_abs_diff};
    use crate::gfdm::{add_cp, remove_cp};

    fn signal(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }

    #[test]
    fn profile_shape() {
        let p = make_pdp();
        assert_eq!(p.len(), 16);
        assert!((p.taps().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p.taps()[0] / p.taps()[15] - 10f64.powf(1.6)).abs() < 1e-9);
        let step = 10.0 * (p.taps()[1] / p.taps()[0]).log10();
        assert!((step + 16.0 / 15.0).abs() < 1e-12);
        assert!(p.taps().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn same_seed_same_channel() {
        let p = make_pdp();
        assert_eq!(
            draw_channel(&p, 64, 9).unwrap(),
            draw_channel(&p, 64, 9).unwrap()
        );
        assert_ne!(
            draw_channel(&p, 64, 9).unwrap(),
            draw_channel(&p, 64, 10).unwrap()
        );
    }

    #[test]
    fn flat_profile_has_flat_response() {
        let h = draw_channel(&PowerDelayProfile::flat(), 32, 1).unwrap();
        let mag = h.freq[0].norm();
        assert!(h.freq.iter().all(|v| (v.norm() - mag).abs() < 1e-12));
    }

    #[test]
    fn identity_channel_passes_input() {
        let x = signal(40, 2);
        let h = ChannelRealization::identity(24);
        let y = transmit_seeded(&x, 16, &h, 0.0, 0).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn cp_turns_convolution_circular() {
        let (n, cp) = (16, 4);
        let x = signal(n, 3);
        let h = draw_channel(
            &PowerDelayProfile::from_powers(&[1.0, 0.5, 0.25, 0.1]).unwrap(),
            n,
            4,
        )
        .unwrap();
        let y = remove_cp(
            &transmit_seeded(&add_cp(&x, cp).unwrap(), cp, &h, 0.0, 0).unwrap(),
            cp,
        )
        .unwrap();
        let circ: Vec<Complex64> = (0..n)
            .map(|i| {
                (0..h.taps.len())
                    .map(|t| h.taps[t] * x[(i + n - t) % n])
                    .sum()
            })
            .collect();
        assert!(max_abs_diff(&y, &circ) < 1e-12);
        assert!(max_abs_diff(&fde_equalize(&y, &h.freq).unwrap(), &x) < 1e-9);
    }

    #[test]
    fn short_cp_rejected() {
        let h = draw_channel(&make_pdp(), 64, 1).unwrap();
        let x = signal(70, 1);
        assert_eq!(
            transmit_seeded(&x, 14, &h, 0.0, 0).unwrap_err(),
            Error::CyclicPrefixTooShort { cp: 14, memory: 15 }
        );
    }

    #[test]
    fn equalizer_edge_cases() {
        let y = signal(8, 5);
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        assert!(max_abs_diff(&fde_equalize(&y, &ones).unwrap(), &y) < 1e-12);
        let c = Complex64::new(0.5, -2.0);
        let flat = vec![c; 8];
        let expect: Vec<_> = y.iter().map(|v| v / c).collect();
        assert!(max_abs_diff(&fde_equalize(&y, &flat).unwrap(), &expect) < 1e-12);
        let mut null = ones.clone();
        null[3] = Complex64::new(0.0, 0.0);
        assert_eq!(
            fde_equalize(&y, &null).unwrap_err(),
            Error::DeepFade { bin: 3 }
        );
    }

    #[test]
    fn noise_power_matches() {
        let mut x = vec![Complex64::new(0.0, 0.0); 100_000];
        add_awgn(&mut x, 0.3, &mut ChaCha8Rng::seed_from_u64(6));
        let p = dft::energy(&x) / x.len() as f64;
        assert!((p / 0.3 - 1.0).abs() < 0.02, "{p}");
    }
}
