//! Bessel low-pass model of the LED, reduced to chip-rate taps.

use num_complex::Complex64;

/// Samples per chip before integrating down to one tap per chip.
pub const BESSEL_OVERSAMPLING: usize = 16;

/// Default LED filter order.
pub const DEFAULT_BESSEL_ORDER: usize = 6;

/// Response duration is where `|h|` last reaches this fraction of its peak.
const DURATION_FRACTION: f64 = 0.01;

/// Reverse Bessel polynomial of the given order, ascending powers:
/// `a_k = (2n−k)! / (2^(n−k) k! (n−k)!)`.
fn bessel_polynomial(order: usize) -> Vec<f64> {
    let n = order;
    let mut a = vec![0.0; n + 1];
    // a_n = 1, a_{k-1} = a_k · (2n−k+1)·k / (2(n−k+1)) … computed downward
    a[n] = 1.0;
    for k in (1..=n).rev() {
        a[k - 1] = a[k] * (2 * n - k + 1) as f64 * k as f64 / (2 * (n - k + 1)) as f64;
    }
    a
}

fn poly(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

/// Durand–Kerner on a monic polynomial.
fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * 3.0).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = poly(coeffs, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    z
}

/// Unit-DC-gain Bessel impulse response in normalised time (unit group
/// delay), as a closure over partial-fraction residues.
pub fn bessel_impulse_response(order: usize) -> impl Fn(f64) -> f64 {
    let coeffs = bessel_polynomial(order.max(1));
    let poles = roots(&coeffs);
    let d = derivative(&coeffs);
    let residues: Vec<(Complex64, Complex64)> = poles
        .into_iter()
        .map(|p| (p, Complex64::new(coeffs[0], 0.0) / poly(&d, p)))
        .collect();
    move |t: f64| {
        if t < 0.0 {
            return 0.0;
        }
        residues.iter().map(|&(p, r)| (r * (p * t).exp()).re).sum()
    }
}

/// Normalised time after which `|h|` stays below 1% of its peak.
fn normalised_duration(h: &dyn Fn(f64) -> f64) -> f64 {
    let dt = 1e-3;
    let samples: Vec<f64> = (0..30_000).map(|i| h(i as f64 * dt).abs()).collect();
    let peak = samples.iter().cloned().fold(0.0, f64::max);
    let last = samples
        .iter()
        .rposition(|&v| v >= DURATION_FRACTION * peak)
        .unwrap_or(0);
    last as f64 * dt
}

/// Chip-rate taps of an LED whose response lasts `t_led` seconds, sampled
/// at [`BESSEL_OVERSAMPLING`] points per chip, summed per chip, clamped
/// non-negative and normalised to unit sum.
pub fn led_response_taps(t_led: f64, chip_time: f64, order: usize) -> Vec<f64> {
    let h = bessel_impulse_response(order);
    let scale = normalised_duration(&h) / t_led;
    let dt = chip_time / BESSEL_OVERSAMPLING as f64;
    let n_samples = (t_led / dt).ceil().max(1.0) as usize;
    let n_chips = n_samples.div_ceil(BESSEL_OVERSAMPLING);
    let mut taps = vec![0.0; n_chips];
    for n in 0..n_samples {
        let t = n as f64 * dt;
        taps[n / BESSEL_OVERSAMPLING] += scale * h(scale * t) * dt;
    }
    for v in &mut taps {
        *v = v.max(0.0);
    }
    let sum: f64 = taps.iter().sum();
    if sum > 0.0 {
        for v in &mut taps {
            *v /= sum;
        }
    } else {
        taps = vec![1.0];
    }
    taps
}
