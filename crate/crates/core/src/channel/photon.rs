use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;

/// Red LED, metres.
pub const DEFAULT_WAVELENGTH: f64 = 650e-9;

pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * LIGHT_SPEED / wavelength
}

/// Ambient light on a detector: `lux · cm² · 1e-7` watts.
pub fn illuminance_to_power(lux: f64, area_cm2: f64) -> f64 {
    lux * area_cm2 * 1e-7
}

/// Mean photoelectrons per chip: `lambda0` for a full-amplitude chip and
/// `lambda_b` from background light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonModel {
    pub lambda0: f64,
    pub lambda_b: f64,
}

impl PhotonModel {
    pub fn new(lambda0: f64, lambda_b: f64) -> Self {
        Self { lambda0, lambda_b }
    }

    /// From optical powers in watts.
    pub fn from_power(p0: f64, background_power: f64, chip_time: f64, eta: f64, wavelength: f64) -> Self {
        let k = eta * chip_time / photon_energy(wavelength);
        Self {
            lambda0: k * p0,
            lambda_b: k * background_power,
        }
    }

    /// From received energy per bit. A symbol carries `bits_per_symbol` bits
    /// spread over `mean_frame_energy` full-amplitude chips.
    pub fn from_bit_energy(
        e_bit: f64,
        bits_per_symbol: usize,
        mean_frame_energy: f64,
        background_power: f64,
        chip_time: f64,
        eta: f64,
        wavelength: f64,
    ) -> Self {
        let e_chip = e_bit * bits_per_symbol as f64 / mean_frame_energy;
        let p0 = e_chip / chip_time;
        Self::from_power(p0, background_power, chip_time, eta, wavelength)
    }

    /// Received optical power of a full-amplitude chip.
    pub fn peak_power(&self, chip_time: f64, eta: f64, wavelength: f64) -> f64 {
        self.lambda0 * photon_energy(wavelength) / (eta * chip_time)
    }
}

/// Independent Poisson draws; a zero mean always yields zero.
pub fn sample_counts<R: Rng + ?Sized>(means: &[f64], rng: &mut R) -> Vec<u32> {
    means.iter().map(|&m| sample_one(m, rng)).collect()
}

pub(crate) fn sample_one<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u32 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u32).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn red_photon() {
        assert!((photon_energy(650e-9) - 3.056e-19).abs() < 1e-22);
    }

    #[test]
    fn power_and_counts_agree() {
        let m = PhotonModel::from_power(1e-6, 1e-7, 5e-9, 0.7, DEFAULT_WAVELENGTH);
        let expected = 0.7 * 1e-6 * 5e-9 / photon_energy(650e-9);
        assert!((m.lambda0 - expected).abs() < 1e-9 * expected);
        assert!((m.lambda_b / m.lambda0 - 0.1).abs() < 1e-12);
        assert!((m.peak_power(5e-9, 0.7, DEFAULT_WAVELENGTH) - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn bit_energy_spreads_over_frame() {
        // 3 bits on 5 lit chips: each chip carries 3/5 of a bit's energy
        let m = PhotonModel::from_bit_energy(1e-15, 3, 5.0, 0.0, 1e-9, 1.0, DEFAULT_WAVELENGTH);
        assert!((m.lambda0 - 0.6e-15 / photon_energy(650e-9)).abs() < 1e-9);
        assert_eq!(m.lambda_b, 0.0);
    }

    #[test]
    fn lux_conversion() {
        assert!((illuminance_to_power(1000.0, 0.1) - 1e-5).abs() < 1e-20);
    }

    #[test]
    fn zero_mean_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_counts(&[0.0, 0.0], &mut rng), vec![0, 0]);
    }

    #[test]
    fn poisson_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let draws = sample_counts(&vec![100.0; n], &mut rng);
        let mean = draws.iter().map(|&d| d as f64).sum::<f64>() / n as f64;
        let var = draws.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 100.0).abs() < 0.5, "{mean}");
        assert!((var - 100.0).abs() < 1.5, "{var}");
    }
}
