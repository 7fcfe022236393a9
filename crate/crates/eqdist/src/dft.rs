//! Discrete Fourier transforms on `Z/qZ` for arbitrary (including prime)
//! lengths: direct evaluation with precomputed root tables below
//! [`DIRECT_LIMIT`], Bluestein's chirp-z reduction to a power-of-two FFT
//! above it.

use num_complex::Complex64;

/// Lengths up to this bound use the direct O(q²) transform.
pub const DIRECT_LIMIT: usize = 2048;

/// Unnormalized transform `out[h] = Σ_x f[x] · e(sign · h x / n)`.
pub fn transform(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    if input.len() <= DIRECT_LIMIT {
        direct(input, sign)
    } else {
        bluestein(input, sign)
    }
}

fn roots(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let angle = sign * std::f64::consts::TAU * k as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

fn direct(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let w = roots(n, sign);
    (0..n)
        .map(|h| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &v in input {
                acc += v * w[idx];
                idx += h;
                if idx >= n {
                    idx -= n;
                }
            }
            acc
        })
        .collect()
}

/// In-place radix-2 FFT; `len` must be a power of two.
fn fft_pow2(buf: &mut [Complex64], sign: f64) {
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
    let mut len = 2;
    while len <= n {
        let angle = sign * std::f64::consts::TAU / len as f64;
        let wlen = Complex64::new(angle.cos(), angle.sin());
        for chunk in buf.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for i in 0..len / 2 {
                let u = chunk[i];
                let v = chunk[i + len / 2] * w;
                chunk[i] = u + v;
                chunk[i + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// Bluestein's algorithm: an arbitrary-length DFT as a convolution with the
/// chirp `e(sign · k²/(2n))`, carried out by power-of-two FFTs. Squares are
/// reduced mod `2n` before entering the exponential to keep full precision
/// at large `n`.
fn bluestein(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    let m = (2 * n - 1).next_power_of_two();
    let two_n = 2 * n as u64;
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k = k as u64;
            let sq = ((k as u128 * k as u128) % two_n as u128) as u64;
            let angle = sign * std::f64::consts::PI * sq as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = input[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        let c = chirp[k].conj();
        b[k] = c;
        if k > 0 {
            b[m - k] = c;
        }
    }
    fft_pow2(&mut a, -1.0);
    fft_pow2(&mut b, -1.0);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= *y;
    }
    fft_pow2(&mut a, 1.0);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * chirp[k] * scale).collect()
}
