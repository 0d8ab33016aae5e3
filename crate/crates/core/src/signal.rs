//! Complex-sample primitives: DFT/IDFT, convolution and noise injection.
//!
//! The forward transform is unnormalized, `X[k] = Σ x[n]·e^{-j2πnk/N}`, and the
//! inverse carries the `1/N` factor.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type Sample = Complex64;

/// A run of baseband samples anchored at an absolute receive-window index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSignal {
    pub samples: Vec<Sample>,
    /// Absolute index of `samples[0]` relative to the receive window start.
    pub origin_index: i64,
}

impl TimeSignal {
    pub fn new(samples: Vec<Sample>) -> Self {
        Self {
            samples,
            origin_index: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Sample::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of `|x[n]|²`, zero for an empty signal.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| s * a).collect(),
            origin_index: self.origin_index,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }
}

impl From<Vec<Sample>> for TimeSignal {
    fn from(samples: Vec<Sample>) -> Self {
        Self::new(samples)
    }
}

/// `N` frequency bins in FFT order (bin `k` for `k ≥ N/2` is frequency `k - N`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

impl std::ops::Index<usize> for Spectrum {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.bins[k]
    }
}

fn check_size(len: usize, n: usize) -> Result<()> {
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::Config(format!("transform size {n} is not a power of two")));
    }
    if len != n {
        return Err(Error::Config(format!(
            "transform input has {len} samples, expected {n}"
        )));
    }
    Ok(())
}

// Iterative radix-2 decimation-in-time; `sign` is -1 for forward, +1 for inverse.
fn fft_in_place(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, sign * TAU * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// `N`-point forward DFT of exactly `n` samples.
pub fn dft(x: &[Sample], n: usize) -> Result<Spectrum> {
    check_size(x.len(), n)?;
    let mut bins = x.to_vec();
    fft_in_place(&mut bins, -1.0);
    Ok(Spectrum { bins })
}

/// Inverse DFT with `1/N` scaling.
pub fn idft(spec: &Spectrum) -> Result<TimeSignal> {
    let n = spec.len();
    check_size(n, n)?;
    let mut samples = spec.bins.clone();
    fft_in_place(&mut samples, 1.0);
    let inv = 1.0 / n as f64;
    samples.iter_mut().for_each(|s| *s *= inv);
    Ok(TimeSignal::new(samples))
}

/// `y[n] = Σ_k h[k]·x[(n-k) mod N]` for equal-length inputs.
pub fn circular_convolve(x: &[Sample], h: &[Sample]) -> Result<TimeSignal> {
    if x.len() != h.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: h.len(),
        });
    }
    let n = x.len();
    let samples = (0..n)
        .map(|i| (0..n).map(|k| h[k] * x[(i + n - k) % n]).sum())
        .collect();
    Ok(TimeSignal::new(samples))
}

/// Full linear convolution; output length is `len(x) + len(h) - 1`.
pub fn linear_convolve(x: &[Sample], h: &[Sample]) -> Result<TimeSignal> {
    if h.is_empty() {
        return Err(Error::Config("convolution kernel is empty".into()));
    }
    if x.is_empty() {
        return Ok(TimeSignal::default());
    }
    let mut out = vec![Sample::new(0.0, 0.0); x.len() + h.len() - 1];
    for (k, &hk) in h.iter().enumerate() {
        if hk == Sample::new(0.0, 0.0) {
            continue;
        }
        for (n, &xn) in x.iter().enumerate() {
            out[n + k] += hk * xn;
        }
    }
    Ok(TimeSignal::new(out))
}

/// Adds circular complex Gaussian noise of total variance `noise_variance` per sample.
pub fn add_awgn(x: &TimeSignal, noise_variance: f64, rng: &mut SimRng) -> Result<TimeSignal> {
    if !noise_variance.is_finite() || noise_variance < 0.0 {
        return Err(Error::Config(format!(
            "noise variance must be finite and non-negative, got {noise_variance}"
        )));
    }
    if noise_variance == 0.0 {
        return Ok(x.clone());
    }
    let samples = x
        .samples
        .iter()
        .map(|&s| s + rng.complex_gaussian(noise_variance))
        .collect();
    Ok(TimeSignal {
        samples,
        origin_index: x.origin_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut SimRng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| rng.complex_gaussian(1.0)).collect()
    }

    // Direct O(N²) sum, kept independent of the radix-2 path.
    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(i, &v)| v * Complex64::from_polar(1.0, -TAU * (i * k) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn naive_linear(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        let len = x.len() + h.len() - 1;
        (0..len)
            .map(|n| {
                let mut acc = c(0.0, 0.0);
                for k in 0..h.len() {
                    if n >= k && n - k < x.len() {
                        acc += h[k] * x[n - k];
                    }
                }
                acc
            })
            .collect()
    }

    fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut x = vec![c(0.0, 0.0); 64];
        x[0] = c(1.0, 0.0);
        let spec = dft(&x, 64).unwrap();
        assert!(spec.bins.iter().all(|b| (b - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn complex_exponential_lands_in_one_bin() {
        let x: Vec<_> = (0..64)
            .map(|n| Complex64::from_polar(1.0, TAU * (n * 3) as f64 / 64.0))
            .collect();
        let spec = dft(&x, 64).unwrap();
        for (k, b) in spec.bins.iter().enumerate() {
            let want = if k == 3 { c(64.0, 0.0) } else { c(0.0, 0.0) };
            assert!((b - want).norm() < 1e-9, "bin {k}: {b}");
        }
    }

    #[test]
    fn dft_matches_naive_sum() {
        let mut rng = SimRng::new(11);
        let x = random_vec(&mut rng, 64);
        let fast = dft(&x, 64).unwrap();
        assert!(max_rel_err(&fast.bins, &naive_dft(&x)) < 1e-9);
    }

    #[test]
    fn dft_rejects_wrong_length() {
        let x = vec![c(1.0, 0.0); 63];
        assert!(matches!(dft(&x, 64), Err(Error::Config(_))));
        assert!(matches!(dft(&x, 63), Err(Error::Config(_))));
    }

    #[test]
    fn idft_of_flat_spectrum_is_impulse() {
        let spec = Spectrum {
            bins: vec![c(1.0, 0.0); 64],
        };
        let x = idft(&spec).unwrap();
        assert!((x.samples[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(x.samples[1..].iter().all(|s| s.norm() < 1e-15));
    }

    #[test]
    fn idft_single_bin() {
        let mut bins = vec![c(0.0, 0.0); 64];
        bins[7] = c(1.0, 0.0);
        let x = idft(&Spectrum { bins }).unwrap();
        for (n, s) in x.samples.iter().enumerate() {
            let want = Complex64::from_polar(1.0 / 64.0, TAU * (7 * n) as f64 / 64.0);
            assert!((s - want).norm() < 1e-15);
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let mut rng = SimRng::new(5);
        let x = random_vec(&mut rng, 64);
        let back = idft(&dft(&x, 64).unwrap()).unwrap();
        assert!(max_rel_err(&back.samples, &x) < 1e-12);
    }

    #[test]
    fn circular_identity_and_shift() {
        let mut rng = SimRng::new(3);
        let x = random_vec(&mut rng, 16);
        let mut delta = vec![c(0.0, 0.0); 16];
        delta[0] = c(1.0, 0.0);
        assert_eq!(circular_convolve(&x, &delta).unwrap().samples, x);

        let mut a = vec![c(0.0, 0.0); 8];
        let mut b = vec![c(0.0, 0.0); 8];
        a[2] = c(1.0, 0.0);
        b[3] = c(1.0, 0.0);
        let y = circular_convolve(&a, &b).unwrap();
        for (n, s) in y.samples.iter().enumerate() {
            assert_eq!(*s, if n == 5 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        }
    }

    #[test]
    fn circular_length_mismatch() {
        let x = vec![c(1.0, 0.0); 8];
        let h = vec![c(1.0, 0.0); 4];
        assert!(matches!(
            circular_convolve(&x, &h),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn circular_matches_frequency_domain_path() {
        let mut rng = SimRng::new(99);
        let x = random_vec(&mut rng, 64);
        let h = random_vec(&mut rng, 64);
        let direct = circular_convolve(&x, &h).unwrap();
        let xs = dft(&x, 64).unwrap();
        let hs = dft(&h, 64).unwrap();
        let prod = Spectrum {
            bins: xs.bins.iter().zip(&hs.bins).map(|(a, b)| a * b).collect(),
        };
        let via_freq = idft(&prod).unwrap();
        assert!(max_rel_err(&direct.samples, &via_freq.samples) < 1e-9);
    }

    #[test]
    fn linear_small_cases() {
        let x = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let y = linear_convolve(&x, &x).unwrap();
        assert_eq!(y.samples, vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let id = linear_convolve(&x, &[c(1.0, 0.0)]).unwrap();
        assert_eq!(id.samples, x);
        assert!(linear_convolve(&x, &[]).is_err());
    }

    #[test]
    fn linear_matches_double_loop() {
        let mut rng = SimRng::new(1234);
        let x = random_vec(&mut rng, 37);
        let h = random_vec(&mut rng, 9);
        assert_eq!(linear_convolve(&x, &h).unwrap().samples, naive_linear(&x, &h));
    }

    #[test]
    fn awgn_zero_variance_is_identity() {
        let mut rng = SimRng::new(1);
        let x = TimeSignal::new(random_vec(&mut rng, 32));
        let y = add_awgn(&x, 0.0, &mut rng).unwrap();
        assert_eq!(x, y);
        assert!(add_awgn(&x, -1.0, &mut rng).is_err());
    }

    #[test]
    fn awgn_power_law_of_large_numbers() {
        let x = TimeSignal::zeros(1_000_000);
        let mut rng = SimRng::new(2024);
        let y = add_awgn(&x, 1.0, &mut rng).unwrap();
        let p = y.mean_power();
        assert!((p - 1.0).abs() < 0.01, "power {p}");
    }

    #[test]
    fn awgn_is_deterministic() {
        let x = TimeSignal::zeros(256);
        let a = add_awgn(&x, 0.5, &mut SimRng::new(77)).unwrap();
        let b = add_awgn(&x, 0.5, &mut SimRng::new(77)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn parseval(seed in any::<u64>()) {
            let mut rng = SimRng::new(seed);
            let x = random_vec(&mut rng, 64);
            let e_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let e_f: f64 = dft(&x, 64).unwrap().bins.iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
            prop_assert!((e_t - e_f).abs() <= 1e-9 * e_t);
        }

        #[test]
        fn convolution_theorem(seed in any::<u64>()) {
            let mut rng = SimRng::new(seed);
            let x = random_vec(&mut rng, 64);
            let h = random_vec(&mut rng, 64);
            let y = dft(&circular_convolve(&x, &h).unwrap().samples, 64).unwrap();
            let xs = dft(&x, 64).unwrap();
            let hs = dft(&h, 64).unwrap();
            let prod: Vec<_> = xs.bins.iter().zip(&hs.bins).map(|(a, b)| a * b).collect();
            prop_assert!(max_rel_err(&y.bins, &prod) < 1e-9);
        }

        #[test]
        fn cyclic_prefix_circularizes(seed in any::<u64>(), taps in 1usize..=16) {
            let (n, cp) = (64usize, 16usize);
            let mut rng = SimRng::new(seed);
            let x = random_vec(&mut rng, n);
            let h = random_vec(&mut rng, taps);
            let mut with_cp = x[n - cp..].to_vec();
            with_cp.extend_from_slice(&x);
            let lin = linear_convolve(&with_cp, &h).unwrap();
            let mut h_pad = h.clone();
            h_pad.resize(n, c(0.0, 0.0));
            let circ = circular_convolve(&x, &h_pad).unwrap();
            prop_assert!(max_rel_err(&lin.samples[cp..cp + n], &circ.samples) < 1e-9);
        }
    }
}
