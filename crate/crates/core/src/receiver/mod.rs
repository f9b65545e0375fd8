//! Symbol decisions from photon counts.
//!
//! The EPPM receiver correlates the (deinterleaved) counts with every
//! codeword and, with weight `Γ = λ/(K−λ)`, subtracts the correlation with
//! the codeword's complement:
//!
//! ```text
//! z_j = ⟨r, c_j⟩ − Γ ⟨r, 1 − c_j⟩
//! ```
//!
//! With a noiseless, ISI-free input `Λ0 c_m` this gives `Λ0 K` at `j = m`
//! and `0` elsewhere. Because every codeword has weight `K`, picking the
//! largest `z_j` is the Poisson maximum-likelihood decision.

mod templates;

pub use templates::{decide_baseline, decide_ml_templates, template_log_likelihood};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::channel::PhotonModel;
use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::modem::{MeppmType, Modulation, ModulationScheme, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    #[default]
    Correlation,
    MlPoisson,
}

#[derive(Debug, Clone)]
pub struct DecoderConfig {
    codebook: Arc<Codebook>,
    gamma: Ratio<u64>,
    interleaver: Option<Permutation>,
    rule: DecisionRule,
}

impl DecoderConfig {
    pub fn new(codebook: Arc<Codebook>) -> Self {
        let gamma = codebook.params().gamma();
        Self {
            codebook,
            gamma,
            interleaver: None,
            rule: DecisionRule::Correlation,
        }
    }

    /// Decoder matching an EPPM or MEPPM transmitter, interleaver included.
    pub fn for_scheme(scheme: &ModulationScheme) -> Result<Self> {
        match scheme.modulation() {
            Modulation::Eppm { codebook } | Modulation::Meppm { codebook, .. } => {
                let cfg = Self::new(codebook.clone());
                match scheme.interleaver() {
                    Some(p) => cfg.with_interleaver(p.clone()),
                    None => Ok(cfg),
                }
            }
            _ => Err(Error::WrongScheme("correlation decoding needs EPPM or MEPPM")),
        }
    }

    pub fn with_interleaver(mut self, p: Permutation) -> Result<Self> {
        if p.len() != self.codebook.q() {
            return Err(Error::LengthMismatch {
                expected: self.codebook.q(),
                got: p.len(),
            });
        }
        self.interleaver = Some(p);
        Ok(self)
    }

    pub fn with_rule(mut self, rule: DecisionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn gamma(&self) -> Ratio<u64> {
        self.gamma
    }

    pub fn interleaver(&self) -> Option<&Permutation> {
        self.interleaver.as_ref()
    }

    pub fn rule(&self) -> DecisionRule {
        self.rule
    }

    fn gamma_f64(&self) -> f64 {
        *self.gamma.numer() as f64 / *self.gamma.denom() as f64
    }

    fn deinterleaved<T: Copy>(&self, r: &[T]) -> Result<Vec<T>> {
        let q = self.codebook.q();
        if r.len() != q {
            return Err(Error::LengthMismatch {
                expected: q,
                got: r.len(),
            });
        }
        match &self.interleaver {
            Some(p) => p.deinterleave(r),
            None => Ok(r.to_vec()),
        }
    }

    /// `⟨r, c_j⟩` for every `j`, after deinterleaving, plus `Σ r`.
    fn on_sums<T: Copy + Into<f64>>(&self, r: &[T]) -> Result<(Vec<f64>, f64)> {
        let r = self.deinterleaved(r)?;
        let q = self.codebook.q();
        let base = self.codebook.base_set();
        let on = (0..q)
            .map(|j| base.iter().map(|&d| r[(d + j) % q].into()).sum())
            .collect();
        let total = r.iter().map(|&x| x.into()).sum();
        Ok((on, total))
    }
}

/// Correlator outputs `z_j`, deinterleaving first when configured.
pub fn correlate<T: Copy + Into<f64>>(r: &[T], cfg: &DecoderConfig) -> Result<Vec<f64>> {
    let (on, total) = cfg.on_sums(r)?;
    let g = cfg.gamma_f64();
    Ok(on.into_iter().map(|s| (1.0 + g) * s - g * total).collect())
}

/// Index of the largest entry; the lowest index wins ties.
pub fn decide_correlation(z: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = j;
        }
    }
    best
}

/// Poisson log-likelihood of every codeword hypothesis,
/// `Σ_i r_i log(c_mi Λ0 + Λb) − Σ_i (c_mi Λ0 + Λb)`.
///
/// Chips split into the `K` "on" chips of `c_m` (mean `Λ0 + Λb`) and the
/// rest (mean `Λb`), so the first sum is evaluated from the exact integer
/// count on each side. A hypothesis that puts mean zero under a positive
/// count scores `−∞`.
pub fn ml_poisson_scores(r: &[u32], cfg: &DecoderConfig, photon: &PhotonModel) -> Result<Vec<f64>> {
    let r = cfg.deinterleaved(r)?;
    let cb = &cfg.codebook;
    let (q, k) = (cb.q(), cb.k());
    let total: u64 = r.iter().map(|&x| x as u64).sum();
    let (l0, lb) = (photon.lambda0, photon.lambda_b);
    let log_on = (l0 + lb).ln();
    let log_off = lb.ln();
    let mean_sum = k as f64 * l0 + q as f64 * lb;
    let term = |n: u64, log: f64| if n == 0 { 0.0 } else { n as f64 * log };
    Ok((0..q)
        .map(|m| {
            let on: u64 = cb.base_set().iter().map(|&d| r[(d + m) % q] as u64).sum();
            term(on, log_on) + term(total - on, log_off) - mean_sum
        })
        .collect())
}

pub fn decide_ml_poisson(r: &[u32], cfg: &DecoderConfig, photon: &PhotonModel) -> Result<usize> {
    Ok(decide_correlation(&ml_poisson_scores(r, cfg, photon)?))
}

/// Decision by the configured rule.
pub fn decide(r: &[u32], cfg: &DecoderConfig, photon: &PhotonModel) -> Result<usize> {
    match cfg.rule {
        DecisionRule::Correlation => Ok(decide_correlation(&correlate(r, cfg)?)),
        DecisionRule::MlPoisson => decide_ml_poisson(r, cfg, photon),
    }
}

/// Multilevel EPPM decoder. Returns per-codeword multiplicities.
///
/// A noiseless symbol `(1/N) Σ n_i c_i` gives `z_j = Λ0 K n_j / N + Λb`, so
/// `N (z_j − Λb)/(Λ0 K)` estimates `n_j`. The rounded estimates are then
/// projected onto a valid symbol: for type I the `N` largest estimates, for
/// type II the rounded counts, lowered one at a time where the residual is
/// smallest until at most `N` codewords remain.
pub fn decode_meppm<T: Copy + Into<f64>>(
    r: &[T],
    cfg: &DecoderConfig,
    levels: usize,
    kind: MeppmType,
    photon: &PhotonModel,
) -> Result<Vec<usize>> {
    let z = correlate(r, cfg)?;
    let k = cfg.codebook.k() as f64;
    let est: Vec<f64> = z
        .iter()
        .map(|&zj| levels as f64 * (zj - photon.lambda_b) / (photon.lambda0 * k))
        .collect();
    Ok(meppm_counts(&est, levels, kind))
}

/// Rounds per-codeword amplitude estimates (in units of `1/N`) to a valid
/// MEPPM count vector: the `N` largest for type I, nearest integers
/// trimmed to sum at most `N` for type II.
pub fn meppm_counts(est: &[f64], levels: usize, kind: MeppmType) -> Vec<usize> {
    let q = est.len();
    let mut counts = vec![0usize; q];
    match kind {
        MeppmType::I => {
            let mut order: Vec<usize> = (0..q).collect();
            order.sort_by(|&a, &b| est[b].total_cmp(&est[a]).then(a.cmp(&b)));
            for &j in order.iter().take(levels) {
                counts[j] = 1;
            }
        }
        MeppmType::II => {
            for (c, &e) in counts.iter_mut().zip(est) {
                *c = e.round().max(0.0).min(levels as f64) as usize;
            }
            while counts.iter().sum::<usize>() > levels {
                let j = (0..q)
                    .filter(|&j| counts[j] > 0)
                    .min_by(|&a, &b| {
                        let ra = est[a] - counts[a] as f64;
                        let rb = est[b] - counts[b] as f64;
                        ra.total_cmp(&rb).then(b.cmp(&a))
                    })
                    .expect("a positive count exists while the sum exceeds N");
                counts[j] -= 1;
            }
        }
    }
    counts
}

/// MEPPM decoder that knows the channel: correlator outputs are mapped
/// back to codeword amplitudes through the inverse of the noiseless
/// correlator response to each (interleaved, dispersed) codeword.
#[derive(Debug, Clone)]
pub struct MeppmEqualizer {
    cfg: DecoderConfig,
    inverse: DMatrix<f64>,
    photon: PhotonModel,
    levels: usize,
    kind: MeppmType,
}

impl MeppmEqualizer {
    /// `h` holds the taps folded to the code length, `h[0]` the main tap.
    pub fn new(cfg: DecoderConfig, h: &[f64], photon: PhotonModel, levels: usize, kind: MeppmType) -> Result<Self> {
        let q = cfg.codebook.q();
        if h.len() != q {
            return Err(Error::LengthMismatch {
                expected: q,
                got: h.len(),
            });
        }
        let mut g = DMatrix::zeros(q, q);
        for m in 0..q {
            let row: Vec<f64> = cfg.codebook.row(m).iter().map(|&c| c as f64).collect();
            let x = match &cfg.interleaver {
                Some(p) => p.apply(&row)?,
                None => row,
            };
            let y: Vec<f64> = (0..q)
                .map(|i| (0..q).map(|l| h[l] * x[(i + q - l) % q]).sum())
                .collect();
            for (j, z) in correlate(&y, &cfg)?.into_iter().enumerate() {
                g[(j, m)] = z;
            }
        }
        let inverse = g
            .try_inverse()
            .ok_or_else(|| Error::BadGeometry("channel makes the MEPPM codeword response singular".into()))?;
        Ok(Self {
            cfg,
            inverse,
            photon,
            levels,
            kind,
        })
    }

    pub fn decode<T: Copy + Into<f64>>(&self, r: &[T]) -> Result<Vec<usize>> {
        let z = correlate(r, &self.cfg)?;
        let scaled = DVector::from_iterator(
            z.len(),
            z.iter().map(|&zj| (zj - self.photon.lambda_b) / self.photon.lambda0),
        );
        let est: Vec<f64> = (&self.inverse * scaled).iter().map(|&a| a * self.levels as f64).collect();
        Ok(meppm_counts(&est, self.levels, self.kind))
    }
}
