use crate::channel::PhotonModel;
use crate::error::{Error, Result};
use crate::modem::{Modulation, ModulationScheme};

/// `Σ_i r_i log μ_i − μ_i`; a zero mean under a positive count is `−∞`.
pub fn template_log_likelihood(r: &[u32], mean: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&n, &mu) in r.iter().zip(mean) {
        if n > 0 {
            if mu <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += n as f64 * mu.ln();
        }
        acc -= mu;
    }
    acc
}

/// Poisson ML over arbitrary mean vectors; lowest index wins ties.
pub fn decide_ml_templates(r: &[u32], templates: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (m, t) in templates.iter().enumerate() {
        let s = template_log_likelihood(r, t);
        if s > best_score {
            best = m;
            best_score = s;
        }
    }
    best
}

/// Symbol decision for PPM, VPPM, OOK and 4-PAM on an ISI-free channel.
pub fn decide_baseline(scheme: &ModulationScheme, r: &[u32], photon: &PhotonModel) -> Result<usize> {
    let expected = scheme.frame_len();
    if r.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: r.len(),
        });
    }
    Ok(match scheme.modulation() {
        Modulation::Ppm { .. } => {
            let mut best = 0;
            for (i, &n) in r.iter().enumerate() {
                if n > r[best] {
                    best = i;
                }
            }
            best
        }
        Modulation::Vppm {
            pulse_chips,
            frame_chips,
        } => {
            let head: u64 = r[..*pulse_chips].iter().map(|&n| n as u64).sum();
            let tail: u64 = r[frame_chips - pulse_chips..].iter().map(|&n| n as u64).sum();
            usize::from(tail > head)
        }
        Modulation::Ook | Modulation::Pam4 => {
            let levels = scheme.used_symbols() as usize;
            let templates: Vec<Vec<f64>> = (0..levels)
                .map(|i| {
                    let a = i as f64 / (levels - 1) as f64;
                    vec![a * photon.lambda0 + photon.lambda_b]
                })
                .collect();
            decide_ml_templates(r, &templates)
        }
        _ => return Err(Error::WrongScheme("baseline decision needs PPM/VPPM/OOK/PAM4")),
    })
}
