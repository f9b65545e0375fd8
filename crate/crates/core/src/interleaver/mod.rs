//! Interference analysis and design of symbol-length interleavers.
//!
//! With interleaver `π` (forward map `f`) and cyclic taps `h`, the
//! deinterleaved mean seen by the correlator for symbol `m` overlaps
//! codeword `j` through
//!
//! ```text
//! A[ℓ][j][m] = ⟨c_j, ((c_m π)^(ℓ)) π⁻¹⟩ = Σ_i c_j[f(i)] · c_m[f(i − ℓ)]
//! ```
//!
//! and the expected decoder gap, in units of `Λ0`, is
//!
//! ```text
//! d[m][j] = h_0 K − (1 + Γ) Σ_{ℓ≠0} h_ℓ (A[ℓ][j][m] − A[ℓ][m][m]).
//! ```
//!
//! Maximising the smallest gap is the same as minimising
//! `max_{m≠j} (B[j][m] − B[m][m])` with `B = Σ_{ℓ≠0} h_ℓ A[ℓ]`.

mod blp;
mod bound;
mod optimize;

pub use blp::{BinaryProgram, ProgramCheck};
pub use bound::{
    lower_bound_ps, ser_approx, ser_approx_over, GaussianTail, LowerBound, PairwiseError, SerApprox,
};
pub use optimize::{optimize_permutation, OptimizeReport, SearchBudget, SearchMethod};

use crate::codes::Codebook;
use crate::modem::Permutation;

/// Relative tolerance when comparing interference sums built from real taps.
pub(crate) const TIE_TOLERANCE: f64 = 1e-9;

/// Integer matrix `A[j][m]` for one delay `ell`.
pub fn compute_a(cb: &Codebook, p: &Permutation, ell: usize) -> Vec<Vec<u32>> {
    let q = cb.q();
    assert_eq!(p.len(), q, "interleaver length must equal code length");
    assert!(ell < q, "delay must be in 0..Q");
    let f = p.forward();
    let mut a = vec![vec![0u32; q]; q];
    for i in 0..q {
        let x = f[i];
        let y = f[(i + q - ell) % q];
        for (j, row) in a.iter_mut().enumerate() {
            if cb.row(j)[x] == 0 {
                continue;
            }
            for (m, v) in row.iter_mut().enumerate() {
                *v += cb.row(m)[y] as u32;
            }
        }
    }
    a
}

/// Checks that `P_ℓ = π I_ℓ πᵀ` has an all-zero diagonal, building the
/// permutation matrices explicitly.
pub fn verify_lemma(p: &Permutation, ell: usize) -> bool {
    let n = p.len();
    assert!(ell > 0 && ell < n, "delay must be in 1..Q");
    // π[f(j)][j] = 1 and (x I_ℓ)[i] = x[i − ℓ], so I_ℓ[i − ℓ][i] = 1
    let mut pi = vec![vec![0u8; n]; n];
    for (j, &fj) in p.forward().iter().enumerate() {
        pi[fj][j] = 1;
    }
    let mut shift = vec![vec![0u8; n]; n];
    for i in 0..n {
        shift[(i + n - ell) % n][i] = 1;
    }
    let mul = |a: &Vec<Vec<u8>>, b: &Vec<Vec<u8>>| {
        let mut c = vec![vec![0u8; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    };
    let pi_t: Vec<Vec<u8>> = (0..n).map(|i| (0..n).map(|j| pi[j][i]).collect()).collect();
    let p_ell = mul(&mul(&pi, &shift), &pi_t);
    (0..n).all(|i| p_ell[i][i] == 0)
}

/// `W[a][b] = h_{(f⁻¹(a) − f⁻¹(b)) mod Q}` for `a ≠ b`: the ISI weight with
/// which chip `b` of a symbol leaks into chip `a` after deinterleaving.
fn chip_coupling(p: &Permutation, h: &[f64]) -> Vec<f64> {
    let q = p.len();
    let inv = p.inverse_map();
    let mut w = vec![0.0; q * q];
    for a in 0..q {
        for b in 0..q {
            if a != b {
                w[a * q + b] = h[(inv[a] + q - inv[b]) % q];
            }
        }
    }
    w
}

/// `B[j][m] = Σ_{ℓ≠0} h_ℓ A[ℓ][j][m]`, row-major.
pub(crate) fn interference_matrix(cb: &Codebook, p: &Permutation, h: &[f64]) -> Vec<f64> {
    let q = cb.q();
    let w = chip_coupling(p, h);
    let base = cb.base_set();
    // t[a][m] = Σ_{b ∈ m + D} W[a][b]
    let mut t = vec![0.0; q * q];
    for a in 0..q {
        for m in 0..q {
            t[a * q + m] = base.iter().map(|&d| w[a * q + (d + m) % q]).sum();
        }
    }
    let mut b = vec![0.0; q * q];
    for j in 0..q {
        for m in 0..q {
            b[j * q + m] = base.iter().map(|&d| t[((d + j) % q) * q + m]).sum();
        }
    }
    b
}

/// Largest `B[j][m] − B[m][m]` over ordered pairs `m ≠ j`, and how many
/// pairs attain it.
pub(crate) fn worst_interference(b: &[f64], q: usize, scale: f64) -> (f64, usize) {
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    let tol = TIE_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    for m in 0..q {
        let diag = b[m * q + m];
        for j in 0..q {
            if j == m {
                continue;
            }
            let v = b[j * q + m] - diag;
            if v > worst + tol {
                worst = v;
                count = 1;
            } else if (v - worst).abs() <= tol {
                count += 1;
            }
        }
    }
    (worst, count)
}

/// Full interference picture of one interleaver on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceProfile {
    q: usize,
    /// `a[ℓ][j][m]` for `ℓ = 0..Q`.
    pub a: Vec<Vec<Vec<u32>>>,
    /// `B[j][m]`.
    pub b: Vec<Vec<f64>>,
    pub b_max: f64,
    pub b_max_count: usize,
    pub distances: DistanceReport,
}

impl InterferenceProfile {
    /// `h` holds cyclic taps `h_0..h_{Q−1}`.
    pub fn compute(cb: &Codebook, p: &Permutation, h: &[f64]) -> Self {
        let q = cb.q();
        let a = (0..q).map(|ell| compute_a(cb, p, ell)).collect();
        let flat = interference_matrix(cb, p, h);
        let scale: f64 = h.iter().sum();
        let (b_max, b_max_count) = worst_interference(&flat, q, scale);
        let b = flat.chunks(q).map(|r| r.to_vec()).collect();
        Self {
            q,
            a,
            b,
            b_max,
            b_max_count,
            distances: distance_metric(cb, p, h),
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

/// Expected decoder gaps `d[m][j] = E[z_m − z_j] / Λ0` with symbol `m` sent.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub d: Vec<Vec<f64>>,
    pub d_min: f64,
    pub m_dmin: usize,
}

/// Pairwise distances for interleaver `p` over cyclic taps `h` (length `Q`).
pub fn distance_metric(cb: &Codebook, p: &Permutation, h: &[f64]) -> DistanceReport {
    let q = cb.q();
    assert_eq!(h.len(), q, "taps must be folded to the code length");
    let params = cb.params();
    let one_plus_gamma = params.k as f64 / (params.k - params.lambda) as f64;
    let b = interference_matrix(cb, p, h);
    let base = h[0] * params.k as f64;
    let mut d = vec![vec![0.0; q]; q];
    for m in 0..q {
        for j in 0..q {
            if j != m {
                d[m][j] = base - one_plus_gamma * (b[j * q + m] - b[m * q + m]);
            }
        }
    }
    let scale = h.iter().sum::<f64>() * params.k as f64;
    let tol = TIE_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    let mut d_min = f64::INFINITY;
    let mut m_dmin = 0;
    for (m, row) in d.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if j == m {
                continue;
            }
            if v < d_min - tol {
                d_min = v;
                m_dmin = 1;
            } else if (v - d_min).abs() <= tol {
                m_dmin += 1;
            }
        }
    }
    DistanceReport { d, d_min, m_dmin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelTaps, PropagationMode};
    use crate::codes::shipped;
    use crate::receiver::{correlate, DecoderConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = a.len();
        let m = b[0].len();
        (0..n)
            .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
        (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
    }

    #[test]
    fn a_equals_matrix_product() {
        // (C π I_ℓ πᵀ Cᵀ)ᵀ with row-vector conventions
        let cb = shipped(11, 5, 2).unwrap();
        let q = 11;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = Permutation::random(q, &mut rng);
        let c: Vec<Vec<i64>> = cb.rows().iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        let mut pi = vec![vec![0i64; q]; q];
        for (j, &fj) in p.forward().iter().enumerate() {
            pi[fj][j] = 1;
        }
        for ell in 0..q {
            let mut s = vec![vec![0i64; q]; q];
            for i in 0..q {
                s[(i + q - ell) % q][i] = 1;
            }
            let prod = matmul(&matmul(&matmul(&matmul(&c, &pi), &s), &transpose(&pi)), &transpose(&c));
            let a = compute_a(&cb, &p, ell);
            for j in 0..q {
                for m in 0..q {
                    assert_eq!(a[j][m] as i64, prod[m][j]);
                }
            }
        }
    }

    #[test]
    fn zero_delay_is_gram_matrix() {
        let cb = shipped(7, 3, 1).unwrap();
        let p = Permutation::random(7, &mut ChaCha8Rng::seed_from_u64(4));
        let a = compute_a(&cb, &p, 0);
        for j in 0..7 {
            for m in 0..7 {
                assert_eq!(a[j][m], if j == m { 3 } else { 1 });
            }
        }
    }

    #[test]
    fn identity_shift_structure() {
        let cb = shipped(7, 3, 1).unwrap();
        let a = compute_a(&cb, &Permutation::identity(7), 1);
        for j in 0..7 {
            for m in 0..7 {
                assert_eq!(a[j][m], if j == (m + 1) % 7 { 3 } else { 1 });
            }
        }
    }

    #[test]
    fn interference_trace_and_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (q, k, l) in [(7, 3, 1), (11, 5, 2), (13, 4, 1)] {
            let cb = shipped(q, k, l).unwrap();
            for _ in 0..30 {
                let p = Permutation::random(q, &mut rng);
                for ell in 1..q {
                    let a = compute_a(&cb, &p, ell);
                    let trace: u32 = (0..q).map(|i| a[i][i]).sum();
                    assert_eq!(trace as usize, l * q);
                    for i in 0..q {
                        assert_eq!(a[i].iter().sum::<u32>() as usize, k * k);
                        assert_eq!((0..q).map(|j| a[j][i]).sum::<u32>() as usize, k * k);
                        assert!(a[i].iter().all(|&v| v as usize <= k));
                    }
                    assert!(verify_lemma(&p, ell));
                }
            }
        }
    }

    #[test]
    #[should_panic]
    fn zero_delay_is_rejected() {
        verify_lemma(&Permutation::identity(7), 0);
    }

    #[test]
    fn no_isi_distances_are_uniform() {
        let cb = shipped(7, 3, 1).unwrap();
        let mut h = vec![0.0; 7];
        h[0] = 1.0;
        let r = distance_metric(&cb, &Permutation::random(7, &mut ChaCha8Rng::seed_from_u64(1)), &h);
        assert!((r.d_min - 3.0).abs() < 1e-12);
        assert_eq!(r.m_dmin, 42);
    }

    #[test]
    fn identity_worst_pairs_are_next_neighbours() {
        let cb = shipped(7, 3, 1).unwrap();
        let mut h = vec![0.0; 7];
        h[0] = 0.8;
        h[1] = 0.2;
        let r = distance_metric(&cb, &Permutation::identity(7), &h);
        assert_eq!(r.m_dmin, 7);
        for m in 0..7 {
            let j = (m + 1) % 7;
            assert!((r.d[m][j] - r.d_min).abs() < 1e-12);
        }
    }

    #[test]
    fn distances_match_direct_propagation() {
        let cb = Arc::new(shipped(7, 3, 1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let p = Permutation::random(7, &mut rng);
            let mut h: Vec<f64> = (0..7).map(|_| rng.random::<f64>()).collect();
            let s: f64 = h.iter().sum();
            h.iter_mut().for_each(|x| *x /= s);
            let taps = ChannelTaps::new(h.clone(), 0, 1e-9, PropagationMode::Cyclic, 7).unwrap();
            let cfg = DecoderConfig::new(cb.clone()).with_interleaver(p.clone()).unwrap();
            let report = distance_metric(&cb, &p, &h);
            for m in 0..7 {
                let x: Vec<f64> = p.apply(&cb.row(m).iter().map(|&c| c as f64).collect::<Vec<_>>()).unwrap();
                let z = correlate(&taps.propagate(&x, 1.0, 0.0).unwrap(), &cfg).unwrap();
                for j in 0..7 {
                    if j != m {
                        let direct = z[m] - z[j];
                        assert!((report.d[m][j] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn profile_is_consistent() {
        let cb = shipped(11, 5, 2).unwrap();
        let mut h = vec![0.0; 11];
        h[0] = 0.5;
        h[1] = 0.3;
        h[2] = 0.2;
        let p = Permutation::random(11, &mut ChaCha8Rng::seed_from_u64(5));
        let prof = InterferenceProfile::compute(&cb, &p, &h);
        for j in 0..11 {
            for m in 0..11 {
                let direct: f64 = (1..11).map(|l| h[l] * prof.a[l][j][m] as f64).sum();
                assert!((prof.b[j][m] - direct).abs() < 1e-12);
            }
        }
        let one_plus_gamma = 5.0 / 3.0;
        let expected_dmin = 0.5 * 5.0 - one_plus_gamma * prof.b_max;
        assert!((prof.distances.d_min - expected_dmin).abs() < 1e-12);
        assert_eq!(prof.distances.m_dmin, prof.b_max_count);
    }
}
