//! Complex FFTs of arbitrary length: iterative radix-2 for powers of two,
//! Bluestein's chirp-z otherwise. Both directions are unnormalised.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Radix2 { n, twiddles, bitrev }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len *= 2;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    chirp: Vec<Complex64>,
    kernel_fft: Vec<Complex64>,
    inner: Radix2,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k² mod 2n keeps the phase argument small for large k.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k * k) % (2 * n);
                Complex64::from_polar(1.0, -PI * k2 as f64 / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Bluestein {
            n,
            chirp,
            kernel_fft: kernel,
            inner,
        }
    }

    fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let m = self.inner.n;
        scratch.clear();
        scratch.resize(m, Complex64::new(0.0, 0.0));
        for k in 0..self.n {
            scratch[k] = buf[k] * self.chirp[k];
        }
        self.inner.forward(scratch);
        for (s, k) in scratch.iter_mut().zip(&self.kernel_fft) {
            *s *= k;
        }
        // Inverse via conjugation, then divide by m.
        scratch.iter_mut().for_each(|s| *s = s.conj());
        self.inner.forward(scratch);
        let scale = 1.0 / m as f64;
        for k in 0..self.n {
            buf[k] = scratch[k].conj() * scale * self.chirp[k];
        }
    }
}

#[derive(Debug, Clone)]
enum Plan {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// A reusable 1-D FFT plan.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    plan: Plan,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let plan = if n.is_power_of_two() {
            Plan::Radix2(Radix2::new(n))
        } else {
            Plan::Bluestein(Bluestein::new(n))
        };
        Fft { n, plan }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform `X_k = Σ x_j e^{−2πijk/n}`.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(buf.len(), self.n);
        match &self.plan {
            Plan::Radix2(p) => p.forward(buf),
            Plan::Bluestein(p) => p.forward(buf, scratch),
        }
    }

    /// In-place inverse transform without the `1/n` factor.
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        buf.iter_mut().for_each(|v| *v = v.conj());
        self.forward(buf, scratch);
        buf.iter_mut().for_each(|v| *v = v.conj());
    }
}

/// 2-D FFT over a row-major `width × height` buffer.
#[derive(Debug, Clone)]
pub struct Fft2 {
    width: usize,
    height: usize,
    rows: Fft,
    cols: Fft,
}

impl Fft2 {
    pub fn new(width: usize, height: usize) -> Self {
        Fft2 {
            width,
            height,
            rows: Fft::new(width),
            cols: Fft::new(height),
        }
    }

    fn apply(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.width * self.height);
        let mut scratch = Vec::new();
        for row in buf.chunks_exact_mut(self.width) {
            if inverse {
                self.rows.inverse(row, &mut scratch);
            } else {
                self.rows.forward(row, &mut scratch);
            }
        }
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for x in 0..self.width {
            for (y, c) in column.iter_mut().enumerate() {
                *c = buf[y * self.width + x];
            }
            if inverse {
                self.cols.inverse(&mut column, &mut scratch);
            } else {
                self.cols.forward(&mut column, &mut scratch);
            }
            for (y, c) in column.iter().enumerate() {
                buf[y * self.width + x] = *c;
            }
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.apply(buf, false);
    }

    /// Inverse 2-D transform without the `1/(width·height)` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.apply(buf, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = j as f64;
                Complex64::new((0.37 * t).sin() + 0.1 * t, (1.3 * t).cos())
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        for n in [1usize, 2, 3, 5, 7, 8, 12, 16, 31, 64, 100] {
            let x = signal(n);
            let want = naive_dft(&x);
            let mut got = x.clone();
            Fft::new(n).forward(&mut got, &mut Vec::new());
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9 * (n as f64), "n={n}");
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        for n in [6usize, 32, 45] {
            let x = signal(n);
            let fft = Fft::new(n);
            let mut buf = x.clone();
            let mut scratch = Vec::new();
            fft.forward(&mut buf, &mut scratch);
            fft.inverse(&mut buf, &mut scratch);
            for (a, b) in buf.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_d_roundtrip_non_square() {
        let (w, h) = (6, 5);
        let x = signal(w * h);
        let plan = Fft2::new(w, h);
        let mut buf = x.clone();
        plan.forward(&mut buf);
        plan.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&x) {
            assert!((a / (w * h) as f64 - b).norm() < 1e-12);
        }
    }
}
