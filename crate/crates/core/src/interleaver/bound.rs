use serde::Serialize;

use super::{distance_metric, DistanceReport};
use crate::channel::PhotonModel;
use crate::codes::Codebook;
use crate::math::gaussian_tail;
use crate::modem::Permutation;

/// Probability that the decoder prefers a wrong symbol, given the expected
/// gap `E[z_m − z_j]` and its variance, both in photoelectron units.
pub trait PairwiseError: Sync {
    fn prob(&self, gap: f64, variance: f64) -> f64;
}

/// Gaussian approximation `Q(gap / √variance)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianTail;

impl PairwiseError for GaussianTail {
    fn prob(&self, gap: f64, variance: f64) -> f64 {
        if variance > 0.0 {
            gaussian_tail(gap / variance.sqrt())
        } else if gap > 0.0 {
            0.0
        } else if gap < 0.0 {
            1.0
        } else {
            0.5
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SerApprox {
    /// `(1/|S|) Σ_m Σ_{j≠m} f(d_mj)` over the symbol set `S`.
    pub full: f64,
    /// `M_dmin f(d_min) / |S|`.
    pub high_snr: f64,
}

/// Symbol error approximation over all `Q` symbols.
pub fn ser_approx(
    cb: &Codebook,
    p: &Permutation,
    h: &[f64],
    photon: &PhotonModel,
    f: &dyn PairwiseError,
) -> SerApprox {
    let all: Vec<usize> = (0..cb.q()).collect();
    ser_approx_over(cb, p, h, photon, f, &all)
}

/// Symbol error approximation when only `symbols` are sent and decided.
pub fn ser_approx_over(
    cb: &Codebook,
    p: &Permutation,
    h: &[f64],
    photon: &PhotonModel,
    f: &dyn PairwiseError,
    symbols: &[usize],
) -> SerApprox {
    let DistanceReport { d, .. } = distance_metric(cb, p, h);
    let q = cb.q();
    let params = cb.params();
    let one_plus_gamma = params.k as f64 / (params.k - params.lambda) as f64;
    let fwd = p.forward();
    let inv = p.inverse_map();

    let mut total = 0.0;
    let mut worst = (f64::INFINITY, 0.0, 0usize);
    let tol = super::TIE_TOLERANCE * photon.lambda0 * params.k as f64;
    for &m in symbols {
        // deinterleaved mean count at every chip for symbol m
        let mean: Vec<f64> = (0..q)
            .map(|k| {
                let pos = inv[k];
                let isi: f64 = (0..q)
                    .map(|l| h[l] * cb.row(m)[fwd[(pos + q - l) % q]] as f64)
                    .sum();
                photon.lambda0 * isi + photon.lambda_b
            })
            .collect();
        for &j in symbols {
            if j == m {
                continue;
            }
            let spread: f64 = (0..q)
                .filter(|&i| cb.row(m)[i] != cb.row(j)[i])
                .map(|i| mean[i])
                .sum();
            let variance = one_plus_gamma * one_plus_gamma * spread;
            let gap = photon.lambda0 * d[m][j];
            total += f.prob(gap, variance);
            if gap < worst.0 - tol {
                worst = (gap, variance, 1);
            } else if (gap - worst.0).abs() <= tol {
                worst.2 += 1;
            }
        }
    }
    let n = symbols.len() as f64;
    SerApprox {
        full: total / n,
        high_snr: worst.2 as f64 * f.prob(worst.0, worst.1) / n,
    }
}

/// Ideal-interleaver symbol error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub ps: f64,
    /// `Λ0 K (h_0 − Σ_{ℓ≠0} h_ℓ / (K−λ))`.
    pub gap: f64,
    pub variance: f64,
    /// The gap is not positive, so the estimate carries no information.
    pub vacuous: bool,
}

impl LowerBound {
    /// Distance of the ideal interleaver in units of `Λ0`.
    pub fn ideal_distance(cb: &Codebook, h: &[f64]) -> f64 {
        let (k, lambda) = (cb.k() as f64, cb.lambda() as f64);
        let rest: f64 = h[1..].iter().sum();
        k * (h[0] - rest / (k - lambda))
    }

    /// Per row of every `A_ℓ` (`ℓ ≠ 0`) an ideal interleaver has `K − λ`
    /// off-diagonal entries equal to `λ + 1` and all others equal to `λ`.
    pub fn ideal_row(cb: &Codebook) -> (usize, usize, usize) {
        (cb.k() - cb.lambda(), cb.lambda() + 1, cb.lambda())
    }
}

/// `(K − λ) f(Λ0 K [h_0 − Σ_{ℓ≠0} h_ℓ/(K − λ)])` for cyclic taps `h`.
///
/// The variance is a mean-field estimate: the `K − λ` chips of `c_m` not in
/// `c_j` carry `Λ0 h_0` plus average ISI, the `K − λ` chips of `c_j` not in
/// `c_m` carry average ISI, and every chip carries `Λb`.
pub fn lower_bound_ps(cb: &Codebook, h: &[f64], photon: &PhotonModel, f: &dyn PairwiseError) -> LowerBound {
    let (q, k, lambda) = (cb.q() as f64, cb.k() as f64, cb.lambda() as f64);
    let rest: f64 = h[1..].iter().sum();
    let gap = photon.lambda0 * LowerBound::ideal_distance(cb, h);
    let one_plus_gamma = k / (k - lambda);
    let isi_per_chip = photon.lambda0 * k * rest / q;
    let variance = one_plus_gamma
        * one_plus_gamma
        * (k - lambda)
        * (photon.lambda0 * h[0] + 2.0 * isi_per_chip + 2.0 * photon.lambda_b);
    LowerBound {
        ps: (k - lambda) * f.prob(gap, variance),
        gap,
        variance,
        vacuous: gap <= 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::shipped;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn taps(q: usize, head: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; q];
        h[..head.len()].copy_from_slice(head);
        h
    }

    #[test]
    fn no_isi_bound() {
        let cb = shipped(11, 5, 2).unwrap();
        let photon = PhotonModel::new(2.0, 0.1);
        let b = lower_bound_ps(&cb, &taps(11, &[1.0]), &photon, &GaussianTail);
        assert!((b.gap - 2.0 * 5.0).abs() < 1e-12);
        assert!(!b.vacuous);
        assert!((b.ps - 3.0 * GaussianTail.prob(b.gap, b.variance)).abs() < 1e-15);
    }

    #[test]
    fn boundary_is_half() {
        let cb = shipped(11, 5, 2).unwrap();
        // Σ_{ℓ≠0} h_ℓ = (K−λ) h_0
        let b = lower_bound_ps(&cb, &taps(11, &[0.25, 0.75]), &PhotonModel::new(3.0, 0.1), &GaussianTail);
        assert!(b.gap.abs() < 1e-12);
        assert!(b.vacuous);
        assert!((b.ps - 3.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_isi_ser_is_symmetric() {
        let cb = shipped(7, 3, 1).unwrap();
        let photon = PhotonModel::new(4.0, 0.2);
        let s = ser_approx(&cb, &Permutation::identity(7), &taps(7, &[1.0]), &photon, &GaussianTail);
        // every pair: gap 4·3, variance (3/2)²·(2·(4 + 0.2) + 2·0.2)
        let single = GaussianTail.prob(12.0, 2.25 * (2.0 * 4.2 + 0.4));
        assert!((s.full - 6.0 * single).abs() < 1e-15);
        assert!((s.high_snr - s.full).abs() < 1e-15);
    }

    #[test]
    fn ser_decreases_with_power() {
        let cb = shipped(11, 5, 2).unwrap();
        let h = taps(11, &[0.6, 0.25, 0.15]);
        let p = Permutation::random(11, &mut ChaCha8Rng::seed_from_u64(3));
        let lo = ser_approx(&cb, &p, &h, &PhotonModel::new(3.0, 0.1), &GaussianTail);
        let hi = ser_approx(&cb, &p, &h, &PhotonModel::new(6.0, 0.1), &GaussianTail);
        assert!(hi.full < lo.full);
    }

    #[test]
    fn bound_below_approximation() {
        let cb = shipped(11, 5, 2).unwrap();
        let h = taps(11, &[0.7, 0.2, 0.1]);
        let photon = PhotonModel::new(4.0, 0.1);
        let b = lower_bound_ps(&cb, &h, &photon, &GaussianTail);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let p = Permutation::random(11, &mut rng);
            assert!(b.ps <= ser_approx(&cb, &p, &h, &photon, &GaussianTail).full);
        }
    }
}
