//! IIR filter design: digital Butterworth band-pass (analog prototype,
//! band-pass transform, pre-warped bilinear transform) and the second-order
//! notch. Both produce cascades of biquads.

use std::f64::consts::PI;

use num_complex::Complex64;

/// One biquad: `b = [b0, b1, b2]`, `a = [1, a1, a2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Complex response at normalised angular frequency `w` (rad/sample).
    pub fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (self.a[0] + self.a[1] * z1 + self.a[2] * z2)
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Direct-form-II-transposed state that a unit step settles into.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z1 = self.b[2] - self.a[2] * g;
        let z0 = self.b[1] - self.a[1] * g + z1;
        [z0, z1]
    }
}

/// Cascade of biquads applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

impl Sos {
    pub fn magnitude(&self, freq_hz: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / fs;
        self.sections.iter().map(|s| s.response(w)).product::<Complex64>().norm()
    }

    /// Per-section initial states for a unit step input (`scipy.signal.sosfilt_zi`).
    pub fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let [z0, z1] = s.step_state();
                let zi = [z0 * scale, z1 * scale];
                scale *= s.dc_gain();
                zi
            })
            .collect()
    }
}

/// Band-pass Butterworth of prototype order `order` (so `2 · order` poles),
/// with -3 dB edges at `low_hz` and `high_hz`.
pub fn butter_bandpass(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Sos {
    let n = order as i32;
    // Analog low-pass prototype poles on the left half of the unit circle.
    let proto: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = PI * f64::from(2 * k + n + 1) / f64::from(2 * n);
            Complex64::from_polar(1.0, theta)
        })
        .collect();

    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let (wl, wh) = (warp(low_hz), warp(high_hz));
    let bw = wh - wl;
    let w0_sq = wl * wh;

    // Low-pass to band-pass: each prototype pole p splits into the roots of
    // s² - p·bw·s + w0² = 0; `order` zeros land at s = 0.
    let mut poles = Vec::with_capacity(2 * order);
    for p in &proto {
        let half = p * (bw / 2.0);
        let disc = (half * half - w0_sq).sqrt();
        poles.push(half + disc);
        poles.push(half - disc);
    }
    let mut gain = bw.powi(n);

    // Bilinear transform. Zeros at s = 0 map to z = 1; the `order` zeros at
    // infinity map to z = -1.
    let fs2 = Complex64::new(2.0 * fs, 0.0);
    let mut denom = Complex64::new(1.0, 0.0);
    let z_poles: Vec<Complex64> = poles
        .iter()
        .map(|p| {
            denom *= fs2 - p;
            (fs2 + p) / (fs2 - p)
        })
        .collect();
    let numer = fs2.powi(n);
    gain *= (numer / denom).re;

    let pairs = pair_poles(z_poles);
    let mut sections: Vec<Biquad> = pairs
        .into_iter()
        .map(|(p1, p2)| {
            let a1 = -(p1 + p2).re;
            let a2 = (p1 * p2).re;
            Biquad { b: [1.0, 0.0, -1.0], a: [1.0, a1, a2] }
        })
        .collect();
    for b in sections[0].b.iter_mut() {
        *b *= gain;
    }
    Sos { sections }
}

/// Groups poles into conjugate pairs (and leftover reals into pairs), the
/// pair closest to the unit circle last.
fn pair_poles(mut poles: Vec<Complex64>) -> Vec<(Complex64, Complex64)> {
    const TOL: f64 = 1e-12;
    let mut pairs = Vec::new();
    let mut reals = Vec::new();
    poles.sort_by(|a, b| a.im.total_cmp(&b.im));
    for p in poles {
        if p.im > TOL {
            pairs.push((p, p.conj()));
        } else if p.im.abs() <= TOL {
            reals.push(p.re);
        }
    }
    reals.sort_by(f64::total_cmp);
    for chunk in reals.chunks(2) {
        let second = chunk.get(1).copied().unwrap_or(0.0);
        pairs.push((Complex64::new(chunk[0], 0.0), Complex64::new(second, 0.0)));
    }
    pairs.sort_by(|a, b| {
        let da = 1.0 - a.0.norm().max(a.1.norm());
        let db = 1.0 - b.0.norm().max(b.1.norm());
        db.total_cmp(&da)
    });
    pairs
}

/// Second-order IIR notch at `freq_hz` with quality factor `q` (`scipy.signal.iirnotch`).
pub fn iir_notch(freq_hz: f64, q: f64, fs: f64) -> Sos {
    let w0 = 2.0 * PI * freq_hz / fs;
    let bw = w0 / q;
    let beta = (bw / 2.0).tan();
    let gain = 1.0 / (1.0 + beta);
    let c = w0.cos();
    Sos { sections: vec![Biquad { b: [gain, -2.0 * gain * c, gain], a: [1.0, -2.0 * gain * c, 2.0 * gain - 1.0] }] }
}
