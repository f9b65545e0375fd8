use serde::{Deserialize, Serialize};

use crate::math::log2_binomial;

/// Which overlapped-pulse rate expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// `log2 Q` bits per symbol.
    Oeppm,
    /// `log2 C(Q, N)` bits per symbol.
    OmeppmI,
    /// `log2 C(Q+N, N)` bits per symbol.
    OmeppmII,
}

impl RateKind {
    /// Bits carried per symbol (not floored), i.e. the `v → ∞` limit of
    /// `R_b · T_led`.
    pub fn log2_alphabet(&self, q: usize, levels: usize) -> f64 {
        match self {
            RateKind::Oeppm => (q as f64).log2(),
            RateKind::OmeppmI => log2_binomial(q as u64, levels as u64),
            RateKind::OmeppmII => log2_binomial((q + levels) as u64, levels as u64),
        }
    }
}

/// `R_b = log2(M) / T_led · v / (Q + v − 1)` in bits per second.
///
/// A symbol spans `Q + v − 1` chips of `T_led / v` each, so pulses `v` chips
/// wide last exactly one LED response time.
pub fn bit_rate_formula(kind: RateKind, q: usize, levels: usize, overlap: usize, t_led: f64) -> f64 {
    assert!(t_led > 0.0 && overlap >= 1);
    let v = overlap as f64;
    kind.log2_alphabet(q, levels) / t_led * v / (q as f64 + v - 1.0)
}
