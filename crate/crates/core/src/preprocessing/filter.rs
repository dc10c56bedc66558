//! Running a biquad cascade over a signal, single pass or forward-backward.

use super::design::Sos;

/// Number of samples of odd reflection added on each side before a
/// forward-backward pass (the `scipy.signal.sosfiltfilt` default).
pub fn default_padlen(sos: &Sos) -> usize {
    let n = sos.sections.len();
    let zero_b2 = sos.sections.iter().filter(|s| s.b[2] == 0.0).count();
    let zero_a2 = sos.sections.iter().filter(|s| s.a[2] == 0.0).count();
    3 * (2 * n + 1 - zero_b2.min(zero_a2))
}

/// Filters `x` in place, starting from `state` (one `[z0, z1]` per section).
pub fn sosfilt_in_place(sos: &Sos, x: &mut [f64], state: &mut [[f64; 2]]) {
    for (s, z) in sos.sections.iter().zip(state.iter_mut()) {
        let [b0, b1, b2] = s.b;
        let [_, a1, a2] = s.a;
        let (mut z0, mut z1) = (z[0], z[1]);
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + z0;
            z0 = b1 * input - a1 * y + z1;
            z1 = b2 * input - a2 * y;
            *v = y;
        }
        *z = [z0, z1];
    }
}

/// Causal filtering from rest.
pub fn sosfilt(sos: &Sos, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut state = vec![[0.0; 2]; sos.sections.len()];
    sosfilt_in_place(sos, &mut y, &mut state);
    y
}

/// Zero-phase forward-backward filtering with odd-reflection padding and
/// steady-state initial conditions. Requires `x.len() > padlen`.
pub fn sosfiltfilt(sos: &Sos, x: &[f64], padlen: usize) -> Vec<f64> {
    let n = x.len();
    debug_assert!(n > padlen);
    let mut ext = Vec::with_capacity(n + 2 * padlen);
    let (first, last) = (x[0], x[n - 1]);
    ext.extend((1..=padlen).rev().map(|i| 2.0 * first - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=padlen).map(|i| 2.0 * last - x[n - 1 - i]));

    let zi = sos.step_states();
    let scaled = |v: f64| zi.iter().map(|z| [z[0] * v, z[1] * v]).collect::<Vec<_>>();

    let mut state = scaled(ext[0]);
    sosfilt_in_place(sos, &mut ext, &mut state);
    ext.reverse();
    let mut state = scaled(ext[0]);
    sosfilt_in_place(sos, &mut ext, &mut state);
    ext.reverse();
    ext[padlen..padlen + n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocessing::design::{butter_bandpass, iir_notch, Biquad};

    #[test]
    fn identity_section_passes_through() {
        let sos = Sos { sections: vec![Biquad { b: [1.0, 0.0, 0.0], a: [1.0, 0.0, 0.0] }] };
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        assert_eq!(sosfilt(&sos, &x), x);
        assert_eq!(sosfiltfilt(&sos, &x, 3), x);
    }

    #[test]
    fn impulse_response_of_moving_average() {
        let sos = Sos { sections: vec![Biquad { b: [0.5, 0.5, 0.0], a: [1.0, 0.0, 0.0] }] };
        assert_eq!(sosfilt(&sos, &[1.0, 0.0, 0.0, 2.0]), vec![0.5, 0.5, 0.0, 1.0]);
    }

    #[test]
    fn constant_through_notch_is_unchanged() {
        // DC gain 1 and steady-state initial conditions: no edge transient.
        let sos = iir_notch(50.0, 30.0, 500.0);
        let x = vec![3.0; 200];
        for v in sosfiltfilt(&sos, &x, default_padlen(&sos)) {
            assert!((v - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn padlen_matches_reference_rule() {
        assert_eq!(default_padlen(&butter_bandpass(4, 0.5, 60.0, 500.0)), 27);
        assert_eq!(default_padlen(&iir_notch(50.0, 30.0, 500.0)), 9);
    }
}
