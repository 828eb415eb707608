//! Minimal complex FFT: iterative radix-2 for power-of-two lengths and
//! Bluestein's chirp-z algorithm for everything else, so transforms run at the
//! exact record length (no zero-padding artifacts in envelope extraction).
//!
//! Sizes here are a few thousand points, so simplicity and determinism win
//! over raw throughput.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // f64 inherent methods shadow the trait when std is linked (tests)
use num_traits::Float;

use core::f64::consts::PI;

/// Forward DFT, any length: X_j = Σ_k x_k · exp(−2πi jk / n).
pub fn fft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    if n.is_power_of_two() {
        let mut buf = input.to_vec();
        radix2_in_place(&mut buf, false);
        buf
    } else {
        bluestein(input, false)
    }
}

/// Inverse DFT, any length, normalized by 1/n.
pub fn ifft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out = if n.is_power_of_two() {
        let mut buf = input.to_vec();
        radix2_in_place(&mut buf, true);
        buf
    } else {
        bluestein(input, true)
    };
    let scale = 1.0 / n as f64;
    for v in &mut out {
        *v *= scale;
    }
    out
}

fn radix2_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Chirp-z DFT of arbitrary length via convolution with a power-of-two FFT.
/// The quadratic phase is reduced mod 2n in integer arithmetic so large k²
/// never lose precision.
fn bluestein(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k = k as u64;
            let q = ((k * k) % (2 * n as u64)) as f64;
            let ang = sign * PI * q / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = input[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let c = chirp[k].conj();
        b[k] = c;
        b[m - k] = c;
    }

    radix2_in_place(&mut a, false);
    radix2_in_place(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    radix2_in_place(&mut a, true);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * chirp[k] * scale).collect()
}

/// Analytic signal of a real record: positive-frequency half of the spectrum
/// doubled, negative half zeroed, transformed back. The magnitude is the
/// fringe envelope.
pub fn analytic_signal(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut spec = fft(&buf);
    // DC stays; for even n the Nyquist bin stays as well.
    let half = n / 2;
    if n % 2 == 0 {
        for v in spec.iter_mut().take(half).skip(1) {
            *v *= 2.0;
        }
        for v in spec.iter_mut().skip(half + 1) {
            *v = Complex64::new(0.0, 0.0);
        }
    } else {
        for v in spec.iter_mut().take(half + 1).skip(1) {
            *v *= 2.0;
        }
        for v in spec.iter_mut().skip(half + 1) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&spec)
}
