//! Thin DFT helpers on top of `rustfft`.
//!
//! Forward transforms are unnormalized; [`Dft::inverse`] divides by the
//! length so that `inverse(forward(x)) == x`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transform pair of a fixed length.
#[derive(Clone)]
pub struct Dft {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl Dft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.fwd.process(buf);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inv.process(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }
}

pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    Dft::new(x.len()).forward(x)
}

pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    Dft::new(x.len()).inverse(x)
}

/// Circular rotation by `shift` elements: `out[n] = v[(n - shift) mod N]`.
pub fn rotate(v: &[Complex64], shift: isize) -> Vec<Complex64> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let s = shift.rem_euclid(n as isize) as usize;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&v[n - s..]);
    out.extend_from_slice(&v[..n - s]);
    out
}

/// Circular time reversal: `out[n] = v[(-n) mod N]`.
pub fn circ_reverse(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|i| v[(n - i) % n]).collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
