//! Time-reversal space-time coding over pairs of CP-framed blocks.
//!
//! With a cyclic prefix each DFT bin sees a scalar channel, and circular
//! time reversal plus conjugation turns into conjugation per bin. The two
//! slots therefore form an Alamouti code on every bin.

use num_complex::Complex64;

use crate::channel::DEEP_FADE;
use crate::dft::{circ_reverse, Dft};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StcBlockPair {
    pub x1: Vec<Complex64>,
    pub x2: Vec<Complex64>,
    pub a1_t1: Vec<Complex64>,
    pub a2_t1: Vec<Complex64>,
    pub a1_t2: Vec<Complex64>,
    pub a2_t2: Vec<Complex64>,
}

/// Splits two blocks over two antennas and two slots at half power each.
pub fn trstc_encode(x1: &[Complex64], x2: &[Complex64]) -> Result<StcBlockPair> {
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch {
            expected: x1.len(),
            got: x2.len(),
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let scale = |v: &[Complex64]| v.iter().map(|z| z * s).collect::<Vec<_>>();
    let tr = |v: &[Complex64], sign: f64| {
        circ_reverse(v)
            .into_iter()
            .map(|z| z.conj() * (sign * s))
            .collect::<Vec<_>>()
    };
    Ok(StcBlockPair {
        x1: x1.to_vec(),
        x2: x2.to_vec(),
        a1_t1: scale(x1),
        a2_t1: scale(x2),
        a1_t2: tr(x2, -1.0),
        a2_t2: tr(x1, 1.0),
    })
}

/// Combines both slots (after CP removal) with perfect channel knowledge.
pub fn trstc_decode(
    y1: &[Complex64],
    y2: &[Complex64],
    h1: &[Complex64],
    h2: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    trstc_decode_with(&Dft::new(y1.len()), y1, y2, h1, h2)
}

/// [`trstc_decode`] with a planned transform of the block length.
pub fn trstc_decode_with(
    dft: &Dft,
    y1: &[Complex64],
    y2: &[Complex64],
    h1: &[Complex64],
    h2: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = dft.len();
    for v in [y1, y2, h1, h2] {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let big_y1 = dft.forward(y1);
    let big_y2 = dft.forward(y2);
    let mut x1 = vec![Complex64::new(0.0, 0.0); n];
    let mut x2 = vec![Complex64::new(0.0, 0.0); n];
    let s = std::f64::consts::SQRT_2;
    for l in 0..n {
        let (a, b) = (h1[l], h2[l]);
        if a.norm() < DEEP_FADE && b.norm() < DEEP_FADE {
            return Err(Error::DeepFade { bin: l });
        }
        let gain = a.norm_sqr() + b.norm_sqr();
        let c2 = big_y2[l].conj();
        x1[l] = (a.conj() * big_y1[l] + b * c2) * (s / gain);
        x2[l] = (b.conj() * big_y1[l] - a * c2) * (s / gain);
    }
    dft.inverse_in_place(&mut x1);
    dft.inverse_in_place(&mut x2);
    Ok((x1, x2))
}
