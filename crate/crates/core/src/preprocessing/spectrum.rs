//! FFT helpers: one-sided periodogram and spectrally shaped Gaussian noise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

/// One-sided periodogram (mean removed, boxcar window, density scaling).
/// Returns `(frequencies_hz, power)`.
pub fn periodogram(x: &[f64], fs: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let scale = 1.0 / (fs * n as f64);
    let freqs = (0..=half).map(|k| k as f64 * fs / n as f64).collect();
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || (n % 2 == 0 && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    (freqs, power)
}

/// Zero-mean, unit-variance Gaussian noise whose amplitude spectrum is
/// white noise multiplied by `shape(f)`. The DC bin is always removed.
pub fn shaped_noise<R: Rng, F: Fn(f64) -> f64>(n: usize, fs: f64, rng: &mut R, shape: F) -> Vec<f64> {
    let mut buf: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex64::new(0.0, 0.0);
    for (k, v) in buf.iter_mut().enumerate().skip(1) {
        let bin = k.min(n - k);
        *v *= shape(bin as f64 * fs / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let mut out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = out.iter().sum::<f64>() / n as f64;
    let var = out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd > 0.0 {
        out.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    out
}
