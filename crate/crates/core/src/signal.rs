//! Deterministic signal-processing kernels for the demonstration workflow.
//!
//! Everything here is a pure function of its declared inputs: the noise
//! generator is a fully specified splitmix64 stream mapped through
//! Box-Muller, so a `(seed, stddev, length)` triple always yields
//! bit-identical samples, on any platform.
//!
//! The lowpass filter exists in three genuinely distinct numerical forms —
//! direct pointwise convolution, an iterative radix-2 FFT with a precomputed
//! twiddle table, and a recursive FFT that derives twiddles by recurrence
//! per call. All three agree to within tight tolerances but are *not*
//! bitwise-identical, which is exactly what the reproducibility tenets are
//! meant to surface.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignalError {
    #[error("length {0} is not a power of two")]
    NonPowerOfTwoLength(usize),
    #[error("normalized cross-correlation of an all-zero vector")]
    ZeroVector,
}

/// Configuration of the demo signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    /// Number of samples; must be a power of two for the FFT paths.
    pub length: usize,
    /// Sinusoid frequencies in Hz.
    pub frequencies: Vec<f64>,
    /// Sample rate in Hz.
    pub sample_rate: f64,
    /// Standard deviation of the injected Gaussian noise.
    pub noise_stddev: f64,
    /// Noise generator seed; batch trials use the trial number.
    pub seed: u64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            length: 512,
            frequencies: vec![2.0, 100.0],
            sample_rate: 512.0,
            noise_stddev: 0.1,
            seed: 0,
        }
    }
}

/// Which lowpass filter implementation a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FilterMethod {
    #[serde(rename = "pointwise")]
    PointwiseDirect,
    #[serde(rename = "fft-iter")]
    FftIterative,
    #[serde(rename = "fft-rec")]
    FftRecursive,
}

impl FilterMethod {
    pub const ALL: [FilterMethod; 3] = [
        FilterMethod::PointwiseDirect,
        FilterMethod::FftIterative,
        FilterMethod::FftRecursive,
    ];

    pub fn token(self) -> &'static str {
        match self {
            FilterMethod::PointwiseDirect => "pointwise",
            FilterMethod::FftIterative => "fft-iter",
            FilterMethod::FftRecursive => "fft-rec",
        }
    }

    pub fn fft_kind(self) -> Option<FftKind> {
        match self {
            FilterMethod::PointwiseDirect => None,
            FilterMethod::FftIterative => Some(FftKind::Iterative),
            FilterMethod::FftRecursive => Some(FftKind::Recursive),
        }
    }
}

impl fmt::Display for FilterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for FilterMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pointwise" => Ok(FilterMethod::PointwiseDirect),
            "fft-iter" => Ok(FilterMethod::FftIterative),
            "fft-rec" => Ok(FilterMethod::FftRecursive),
            other => Err(format!(
                "unknown filter method {other:?} (expected pointwise, fft-iter, or fft-rec)"
            )),
        }
    }
}

/// The two FFT code paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftKind {
    Iterative,
    Recursive,
}

/// How many decimal digits of a relative metric are comparable at a given
/// signal length: the digit count of `2^ceil(log2 L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionRule {
    pub digits: u32,
}

impl PrecisionRule {
    pub fn for_length(length: usize) -> Self {
        assert!(length >= 1, "precision rule needs a positive length");
        let k = if length <= 1 {
            0
        } else {
            (length - 1).ilog2() + 1
        };
        let digits = if k == 0 {
            0
        } else {
            // ceil(log10 2^k): 2^k is never a power of ten for k >= 1, so
            // this is exactly its decimal digit count.
            (1u128 << k).to_string().len() as u32
        };
        PrecisionRule { digits }
    }
}

/// Fully specified deterministic generator: the splitmix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform sample in [0, 1) with 53 bits of precision.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normal samples.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.next_unit(); // (0, 1]: keeps the log finite
        let u2 = self.next_unit();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = TAU * u2;
        (radius * angle.cos(), radius * angle.sin())
    }
}

/// Sum of sinusoids: `s[n] = sum_f sin(2 pi f n / rate)`.
pub fn gen_sine(config: &SignalConfig) -> Vec<f64> {
    assert!(config.length >= 1, "signal length must be positive");
    assert!(config.sample_rate > 0.0, "sample rate must be positive");
    (0..config.length)
        .map(|n| {
            config
                .frequencies
                .iter()
                .map(|f| (TAU * f * n as f64 / config.sample_rate).sin())
                .sum()
        })
        .collect()
}

/// Add `N(0, stddev^2)` noise from the splitmix64 / Box-Muller stream.
/// Identical `(seed, stddev, length)` yields bit-identical output.
pub fn add_noise(signal: &[f64], seed: u64, stddev: f64) -> Vec<f64> {
    assert!(stddev >= 0.0, "negative noise stddev");
    if stddev == 0.0 {
        return signal.to_vec();
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(signal.len());
    let mut pending: Option<f64> = None;
    for &x in signal {
        let g = match pending.take() {
            Some(g) => g,
            None => {
                let (a, b) = rng.next_gaussian_pair();
                pending = Some(b);
                a
            }
        };
        out.push(x + stddev * g);
    }
    out
}

/// Hann window of length `M`, pre-normalization:
/// `w[n] = 0.5 - 0.5 cos(2 pi n / (M-1))`. The first half is computed and
/// mirrored, so symmetry is exact and both endpoints are exactly zero.
pub fn hann_window(size: usize) -> Vec<f64> {
    assert!(size >= 2, "hann window needs at least two points");
    let mut w = vec![0.0; size];
    for n in 0..=(size - 1) / 2 {
        let value = 0.5 - 0.5 * (TAU * n as f64 / (size - 1) as f64).cos();
        w[n] = value;
        w[size - 1 - n] = value;
    }
    w
}

/// Scale a window to unit DC gain (coefficients sum to one).
pub fn unit_gain(window: &[f64]) -> Vec<f64> {
    let sum: f64 = window.iter().sum();
    window.iter().map(|w| w / sum).collect()
}

/// Direct "same"-length convolution with zero-padded edges, center-aligned:
/// `y[n] = sum_k w[k] * x[n + (M-1)/2 - k]`. Costs `O(L * M)`.
pub fn filter_pointwise(signal: &[f64], window: &[f64]) -> Vec<f64> {
    assert!(
        window.len() <= signal.len(),
        "window longer than signal ({} > {})",
        window.len(),
        signal.len()
    );
    let offset = (window.len() - 1) / 2;
    (0..signal.len())
        .map(|n| {
            let mut acc = 0.0;
            for (k, w) in window.iter().enumerate() {
                let idx = n as isize + offset as isize - k as isize;
                if idx >= 0 && (idx as usize) < signal.len() {
                    acc += w * signal[idx as usize];
                }
            }
            acc
        })
        .collect()
}

/// Radix-2 FFT (and inverse, with `1/N` scaling) over a power-of-two-length
/// input, selecting one of the two implementations.
pub fn fft(
    input: &[Complex64],
    inverse: bool,
    kind: FftKind,
) -> Result<Vec<Complex64>, SignalError> {
    match kind {
        FftKind::Iterative => fft_iterative(input, inverse),
        FftKind::Recursive => fft_recursive(input, inverse),
    }
}

/// Iterative radix-2 FFT: bit-reversal permutation, then in-place
/// butterflies against a twiddle table precomputed with one `sin_cos` per
/// entry.
pub fn fft_iterative(input: &[Complex64], inverse: bool) -> Result<Vec<Complex64>, SignalError> {
    let n = input.len();
    if !n.is_power_of_two() {
        return Err(SignalError::NonPowerOfTwoLength(n));
    }
    let mut buf = input.to_vec();
    if n == 1 {
        return Ok(buf);
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i as u64).reverse_bits() as usize >> (64 - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let (sin, cos) = (sign * TAU * k as f64 / n as f64).sin_cos();
            Complex64::new(cos, sin)
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in &mut buf {
            *v *= scale;
        }
    }
    Ok(buf)
}

/// Recursive divide-and-conquer FFT. Twiddles are generated per call by
/// multiplicative recurrence rather than looked up, giving a summation and
/// rounding order genuinely different from the iterative path.
pub fn fft_recursive(input: &[Complex64], inverse: bool) -> Result<Vec<Complex64>, SignalError> {
    let n = input.len();
    if !n.is_power_of_two() {
        return Err(SignalError::NonPowerOfTwoLength(n));
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = recurse(input, sign);
    if inverse {
        let scale = 1.0 / n as f64;
        for v in &mut out {
            *v *= scale;
        }
    }
    return Ok(out);

    fn recurse(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        if n == 1 {
            return x.to_vec();
        }
        let even: Vec<Complex64> = x.iter().step_by(2).copied().collect();
        let odd: Vec<Complex64> = x.iter().skip(1).step_by(2).copied().collect();
        let fe = recurse(&even, sign);
        let fo = recurse(&odd, sign);

        let step = Complex64::from_polar(1.0, sign * TAU / n as f64);
        let mut w = Complex64::new(1.0, 0.0);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n / 2 {
            let t = w * fo[k];
            out[k] = fe[k] + t;
            out[k + n / 2] = fe[k] - t;
            w *= step;
        }
        out
    }
}

/// FFT-based lowpass: zero-pad signal and window to the next power of two
/// covering the full linear convolution, multiply spectra, invert, and slice
/// out the center-aligned segment matching [`filter_pointwise`].
pub fn filter_fft(signal: &[f64], window: &[f64], kind: FftKind) -> Result<Vec<f64>, SignalError> {
    assert!(
        window.len() <= signal.len(),
        "window longer than signal ({} > {})",
        window.len(),
        signal.len()
    );
    let full = signal.len() + window.len() - 1;
    let padded = full.next_power_of_two();

    let mut a = vec![Complex64::new(0.0, 0.0); padded];
    for (slot, &x) in a.iter_mut().zip(signal) {
        *slot = Complex64::new(x, 0.0);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); padded];
    for (slot, &w) in b.iter_mut().zip(window) {
        *slot = Complex64::new(w, 0.0);
    }

    let fa = fft(&a, false, kind)?;
    let fb = fft(&b, false, kind)?;
    let product: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let conv = fft(&product, true, kind)?;

    let offset = (window.len() - 1) / 2;
    Ok(conv[offset..offset + signal.len()]
        .iter()
        .map(|c| c.re)
        .collect())
}

/// Normalized cross-correlation, rounded half-to-even at the precision the
/// rule dictates: `raw = <x, y> / (|x| |y|)`, clamped to [-1, 1].
pub fn ncc(x: &[f64], y: &[f64], rule: PrecisionRule) -> Result<f64, SignalError> {
    assert_eq!(x.len(), y.len(), "ncc over different lengths");
    assert!(!x.is_empty(), "ncc over empty vectors");
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum();
    let ny: f64 = y.iter().map(|b| b * b).sum();
    if nx == 0.0 || ny == 0.0 {
        return Err(SignalError::ZeroVector);
    }
    let raw = (dot / (nx.sqrt() * ny.sqrt())).clamp(-1.0, 1.0);
    Ok(round_half_even(raw, rule.digits))
}

/// Round to `digits` decimal places, ties to even.
pub fn round_half_even(value: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    (value * scale).round_ties_even() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Direct O(N^2) DFT, the independent oracle for both FFT paths.
    fn dft(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = input.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in input.iter().enumerate() {
                let angle = sign * TAU * (k * j) as f64 / n as f64;
                acc += x * Complex64::new(angle.cos(), angle.sin());
            }
            if inverse {
                acc /= n as f64;
            }
            out.push(acc);
        }
        out
    }

    fn random_complex(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = SplitMix64::new(seed);
        (0..n)
            .map(|_| Complex64::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5))
            .collect()
    }

    #[test]
    fn sine_of_zero_frequency_is_zero() {
        let config = SignalConfig {
            length: 4,
            frequencies: vec![0.0],
            ..SignalConfig::default()
        };
        assert_eq!(gen_sine(&config), vec![0.0; 4]);
    }

    #[test]
    fn quarter_rate_sine_hits_the_lattice() {
        let config = SignalConfig {
            length: 4,
            frequencies: vec![1.0],
            sample_rate: 4.0,
            ..SignalConfig::default()
        };
        let s = gen_sine(&config);
        for (got, want) in s.iter().zip([0.0, 1.0, 0.0, -1.0]) {
            assert!(approx(*got, want, 1e-12), "{got} vs {want}");
        }
    }

    #[test]
    fn two_hertz_sine_peaks_at_sample_64() {
        let config = SignalConfig {
            length: 512,
            frequencies: vec![2.0],
            sample_rate: 512.0,
            ..SignalConfig::default()
        };
        let s = gen_sine(&config);
        assert!(approx(s[64], 1.0, 1e-12));
    }

    #[test]
    fn zero_stddev_noise_is_bitwise_identity() {
        let x = vec![1.5, -0.25, 0.0, -0.0, 3.25];
        assert_eq!(add_noise(&x, 123, 0.0), x);
    }

    #[test]
    fn same_seed_gives_bitwise_equal_noise() {
        let x: Vec<f64> = (0..33).map(|i| i as f64 * 0.1).collect();
        assert_eq!(add_noise(&x, 7, 0.1), add_noise(&x, 7, 0.1));
    }

    #[test]
    fn different_seeds_give_different_noise() {
        let x = vec![0.0; 16];
        let a = add_noise(&x, 0, 0.1);
        let b = add_noise(&x, 1, 0.1);
        assert!(a.iter().zip(&b).any(|(p, q)| p != q));
    }

    #[test]
    fn hann_window_small_cases() {
        let w3 = hann_window(3);
        assert_eq!(w3[0], 0.0);
        assert_eq!(w3[2], 0.0);
        assert!(approx(w3[1], 1.0, 1e-15));

        // Evaluating the cosine by hand at M=5: [0, 1/2, 1, 1/2, 0].
        let w5 = hann_window(5);
        let expected = [0.0, 0.5, 1.0, 0.5, 0.0];
        for (got, want) in w5.iter().zip(expected) {
            assert!(approx(*got, want, 1e-12), "{got} vs {want}");
        }
    }

    #[test]
    fn hann_window_is_exactly_symmetric() {
        for size in [2usize, 8, 33, 64] {
            let w = hann_window(size);
            for k in 0..size {
                assert_eq!(w[k].to_bits(), w[size - 1 - k].to_bits(), "M={size}, k={k}");
            }
        }
    }

    #[test]
    fn unit_window_is_identity_filter() {
        let x = vec![3.0, -1.0, 2.0, 0.5];
        assert_eq!(filter_pointwise(&x, &[1.0]), x);
    }

    #[test]
    fn impulse_reproduces_the_window_centered() {
        let mut x = vec![0.0; 9];
        x[4] = 1.0;
        let w = vec![0.25, 0.5, 0.25];
        let y = filter_pointwise(&x, &w);
        assert_eq!(&y[3..6], &[0.25, 0.5, 0.25]);
        assert!(y[..3].iter().chain(&y[6..]).all(|&v| v == 0.0));
    }

    // The oracle is deliberately spelled out index by index.
    #[allow(clippy::needless_range_loop)]
    #[test]
    fn pointwise_filter_matches_literal_five_term_sum() {
        let mut rng = SplitMix64::new(99);
        let x: Vec<f64> = (0..16).map(|_| rng.next_unit() - 0.5).collect();
        let w: Vec<f64> = (0..5).map(|_| rng.next_unit()).collect();
        let y = filter_pointwise(&x, &w);

        // Independent nested-loop oracle, spelled out index by index.
        for n in 0..x.len() {
            let mut expected = 0.0;
            for k in 0..5usize {
                let idx = n as isize + 2 - k as isize;
                if idx >= 0 && (idx as usize) < x.len() {
                    expected += w[k] * x[idx as usize];
                }
            }
            assert!(approx(y[n], expected, 1e-12));
        }
    }

    #[test]
    fn fft_of_impulse_is_flat() {
        let x = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        for kind in [FftKind::Iterative, FftKind::Recursive] {
            let spectrum = fft(&x, false, kind).unwrap();
            for bin in &spectrum {
                assert!(approx(bin.re, 1.0, 1e-12) && approx(bin.im, 0.0, 1e-12));
            }
        }
    }

    #[test]
    fn fft_round_trip_recovers_input() {
        let x = random_complex(64, 5);
        for kind in [FftKind::Iterative, FftKind::Recursive] {
            let back = fft(&fft(&x, false, kind).unwrap(), true, kind).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn both_ffts_match_the_dft_oracle() {
        for n in [4usize, 8, 16, 64, 256] {
            let x = random_complex(n, n as u64);
            let oracle = dft(&x, false);
            let peak = oracle.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for kind in [FftKind::Iterative, FftKind::Recursive] {
                let got = fft(&x, false, kind).unwrap();
                for (a, b) in got.iter().zip(&oracle) {
                    assert!((a - b).norm() / peak < 1e-9, "n={n} {kind:?}");
                }
            }
        }
    }

    #[test]
    fn non_power_of_two_is_rejected() {
        let x = vec![Complex64::new(0.0, 0.0); 12];
        for kind in [FftKind::Iterative, FftKind::Recursive] {
            assert_eq!(
                fft(&x, false, kind).unwrap_err(),
                SignalError::NonPowerOfTwoLength(12)
            );
        }
    }

    #[test]
    fn parseval_holds_for_both_implementations() {
        let x = random_complex(128, 31);
        let time_energy: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        for kind in [FftKind::Iterative, FftKind::Recursive] {
            let spectrum = fft(&x, false, kind).unwrap();
            let freq_energy: f64 =
                spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64;
            assert!((time_energy - freq_energy).abs() / time_energy < 1e-9);
        }
    }

    #[test]
    fn fft_filter_with_unit_window_is_identity() {
        let mut rng = SplitMix64::new(17);
        let x: Vec<f64> = (0..32).map(|_| rng.next_unit() - 0.5).collect();
        for kind in [FftKind::Iterative, FftKind::Recursive] {
            let y = filter_fft(&x, &[1.0], kind).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!(approx(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn fft_filter_tracks_the_pointwise_reference() {
        let mut rng = SplitMix64::new(23);
        let x: Vec<f64> = (0..128).map(|_| rng.next_unit() - 0.5).collect();
        let w = unit_gain(&hann_window(33));
        let reference = filter_pointwise(&x, &w);
        for kind in [FftKind::Iterative, FftKind::Recursive] {
            let y = filter_fft(&x, &w, kind).unwrap();
            let max_diff = y
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(max_diff < 1e-6, "{kind:?}: {max_diff}");
        }
    }

    /// The two FFT paths must actually disagree bitwise somewhere across the
    /// demo seeds — their divergence is what the data summaries detect.
    #[test]
    fn fft_implementations_diverge_bitwise_on_some_seed() {
        let w = unit_gain(&hann_window(33));
        let mut diverged = false;
        for seed in 0..10u64 {
            let config = SignalConfig {
                seed,
                ..SignalConfig::default()
            };
            let noisy = add_noise(&gen_sine(&config), seed, config.noise_stddev);
            let a = filter_fft(&noisy, &w, FftKind::Iterative).unwrap();
            let b = filter_fft(&noisy, &w, FftKind::Recursive).unwrap();
            if a.iter().zip(&b).any(|(p, q)| p.to_bits() != q.to_bits()) {
                diverged = true;
                break;
            }
        }
        assert!(
            diverged,
            "iterative and recursive FFT filters coincide bitwise on all seeds"
        );
    }

    #[test]
    fn ncc_of_identical_vectors_is_one() {
        let mut rng = SplitMix64::new(3);
        let x: Vec<f64> = (0..512).map(|_| rng.next_unit() - 0.5).collect();
        let rule = PrecisionRule::for_length(512);
        assert_eq!(ncc(&x, &x, rule).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(ncc(&x, &neg, rule).unwrap(), -1.0);
    }

    #[test]
    fn ncc_rejects_zero_vectors() {
        let zero = vec![0.0; 8];
        let ones = vec![1.0; 8];
        assert_eq!(
            ncc(&zero, &ones, PrecisionRule::for_length(8)).unwrap_err(),
            SignalError::ZeroVector
        );
    }

    #[test]
    fn precision_rule_digit_counts() {
        assert_eq!(PrecisionRule::for_length(512).digits, 3);
        assert_eq!(PrecisionRule::for_length(1024).digits, 4);
        assert_eq!(PrecisionRule::for_length(2).digits, 1);
        // Non-powers of two round the exponent up first.
        assert_eq!(PrecisionRule::for_length(500).digits, 3);
        assert_eq!(PrecisionRule::for_length(513).digits, 4);
    }

    #[test]
    fn rounding_is_half_to_even() {
        // Dyadic inputs make the scaled values exact, so the ties are real.
        assert_eq!(round_half_even(2.5, 0), 2.0);
        assert_eq!(round_half_even(3.5, 0), 4.0);
        assert_eq!(round_half_even(0.375, 2), 0.38);
        assert_eq!(round_half_even(0.125, 2), 0.12);
        assert_eq!(round_half_even(0.7, 3), 0.7);
    }
}
