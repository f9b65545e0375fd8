use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{
    build_taps, illuminance_to_power, led_response_taps, ChannelTaps, PhotonModel, PropagationMode, TapGeometry,
    DEFAULT_BESSEL_ORDER, DEFAULT_WAVELENGTH,
};
use crate::codes::{Catalog, Codebook, DesignParams};
use crate::error::{Error, Result};
use crate::interleaver::{optimize_permutation, SearchBudget};
use crate::modem::{ChipFrame, MeppmType, ModulationScheme, Permutation};
use crate::receiver::DecisionRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    Eppm {
        q: usize,
        k: usize,
        lambda: usize,
    },
    Meppm {
        q: usize,
        k: usize,
        lambda: usize,
        levels: usize,
        #[serde(rename = "type")]
        meppm_type: MeppmType,
    },
    Oeppm {
        q: usize,
        k: usize,
        lambda: usize,
        overlap: usize,
    },
    Ppm {
        order: usize,
    },
    Vppm {
        pulse_chips: usize,
        frame_chips: usize,
    },
    Ook,
    Pam4,
}

impl SchemeSpec {
    fn codebook(q: usize, k: usize, lambda: usize) -> Result<Arc<Codebook>> {
        let params = DesignParams::new(q, k, lambda);
        params.validate()?;
        Catalog::shipped().codebook(params).map(Arc::new)
    }

    pub fn build(&self) -> Result<ModulationScheme> {
        Ok(match *self {
            SchemeSpec::Eppm { q, k, lambda } => ModulationScheme::eppm(Self::codebook(q, k, lambda)?),
            SchemeSpec::Meppm {
                q,
                k,
                lambda,
                levels,
                meppm_type,
            } => ModulationScheme::meppm(Self::codebook(q, k, lambda)?, levels, meppm_type)?,
            SchemeSpec::Oeppm { q, k, lambda, overlap } => {
                ModulationScheme::oeppm(Self::codebook(q, k, lambda)?, overlap)?
            }
            SchemeSpec::Ppm { order } => ModulationScheme::ppm(order)?,
            SchemeSpec::Vppm {
                pulse_chips,
                frame_chips,
            } => ModulationScheme::vppm(pulse_chips, frame_chips)?,
            SchemeSpec::Ook => ModulationScheme::ook(),
            SchemeSpec::Pam4 => ModulationScheme::pam4(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedSpec {
    /// Impulse-response duration, seconds.
    pub t_led: f64,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    DEFAULT_BESSEL_ORDER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// NLOS width over bit time.
    #[serde(default)]
    pub sigma_over_tb: f64,
    /// NLOS delay over bit time.
    #[serde(default = "one")]
    pub tau_over_tb: f64,
    /// Share of the received energy on the LOS path when per-path
    /// energies are not given in the photon section.
    #[serde(default = "one")]
    pub los_fraction: f64,
    #[serde(default)]
    pub mode: PropagationMode,
    /// Explicit chip-rate taps; overrides the geometry. The first is `h_0`.
    #[serde(default)]
    pub taps: Option<Vec<f64>>,
    #[serde(default)]
    pub led: Option<LedSpec>,
}

fn one() -> f64 {
    1.0
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            sigma_over_tb: 0.0,
            tau_over_tb: 1.0,
            los_fraction: 1.0,
            mode: PropagationMode::default(),
            taps: None,
            led: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonSpec {
    /// Peak received power, watts.
    #[serde(default)]
    pub p0: Option<f64>,
    /// Received energy per bit on the LOS path, joules.
    #[serde(default)]
    pub e_bit_los: Option<f64>,
    #[serde(default)]
    pub e_bit_nlos: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    #[serde(default = "default_area")]
    pub area_cm2: f64,
    /// Background light, watts. Ignored when `lux` or `lambda_b` is set.
    #[serde(default = "default_background")]
    pub background_power: f64,
    #[serde(default)]
    pub lux: Option<f64>,
    #[serde(default)]
    pub lambda_b: Option<f64>,
}

fn default_eta() -> f64 {
    0.7
}
fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH
}
fn default_area() -> f64 {
    0.1
}
fn default_background() -> f64 {
    0.1e-6
}

impl Default for PhotonSpec {
    fn default() -> Self {
        Self {
            p0: None,
            e_bit_los: None,
            e_bit_nlos: None,
            eta: default_eta(),
            wavelength: default_wavelength(),
            area_cm2: default_area(),
            background_power: default_background(),
            lux: None,
            lambda_b: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterleaverSpec {
    #[default]
    None,
    Random {
        seed: u64,
    },
    /// Searched per sweep point for the folded channel taps.
    Optimized {
        #[serde(default)]
        budget: Option<SearchBudgetSpec>,
    },
    Explicit {
        forward: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudgetSpec {
    pub max_nodes: u64,
    pub anneal_steps: u64,
    pub restarts: usize,
    pub seed: u64,
}

impl From<SearchBudgetSpec> for SearchBudget {
    fn from(s: SearchBudgetSpec) -> Self {
        SearchBudget {
            max_nodes: s.max_nodes,
            anneal_steps: s.anneal_steps,
            restarts: s.restarts,
            seed: s.seed,
            ..SearchBudget::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// One of `sigma_over_tb`, `p0`, `e_bit`, `overlap`, `lux`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// One Monte Carlo experiment, optionally swept over a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub photon: PhotonSpec,
    /// Bit rate, bits/s. OEPPM derives its rate from the LED instead.
    #[serde(default = "default_rate")]
    pub rate: f64,
    /// Symbol cap per sweep point.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Stop a point once this many bit errors are seen.
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub interleaver: InterleaverSpec,
    #[serde(default)]
    pub rule: DecisionRule,
    /// Let the EPPM receiver decide among all `Q` codewords rather than
    /// the `2^b` that are sent.
    #[serde(default)]
    pub full_alphabet: bool,
    #[serde(default = "default_block")]
    pub block_symbols: usize,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

fn default_name() -> String {
    "ber".into()
}
fn default_rate() -> f64 {
    200e6
}
fn default_trials() -> u64 {
    1_000_000
}
fn default_target_errors() -> u64 {
    100
}
fn default_block() -> usize {
    2048
}

impl SimConfig {
    pub fn new(name: impl Into<String>, scheme: SchemeSpec) -> Self {
        Self {
            name: name.into(),
            scheme,
            channel: ChannelSpec::default(),
            photon: PhotonSpec::default(),
            rate: default_rate(),
            trials: default_trials(),
            target_errors: default_target_errors(),
            seed: 0,
            interleaver: InterleaverSpec::None,
            rule: DecisionRule::Correlation,
            full_alphabet: false,
            block_symbols: default_block(),
            sweep: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::config("json", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        if self.block_symbols == 0 {
            return Err(Error::config("block_symbols", "must be positive"));
        }
        if !(self.rate > 0.0) {
            return Err(Error::config("rate", "must be positive"));
        }
        let p = &self.photon;
        if !(p.eta > 0.0 && p.eta <= 1.0) {
            return Err(Error::config("photon.eta", "must be in (0, 1]"));
        }
        if !(p.wavelength > 0.0) {
            return Err(Error::config("photon.wavelength", "must be positive"));
        }
        let has_power = p.p0.is_some();
        let has_energy = p.e_bit_los.is_some() || p.e_bit_nlos.is_some();
        if has_power == has_energy {
            return Err(Error::config("photon", "give exactly one of p0 or per-path energies"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "empty"));
            }
            if !["sigma_over_tb", "p0", "e_bit", "overlap", "lux"].contains(&s.parameter.as_str()) {
                return Err(Error::config("sweep.parameter", format!("unknown `{}`", s.parameter)));
            }
        }
        if !(self.channel.sigma_over_tb >= 0.0) {
            return Err(Error::config("channel.sigma_over_tb", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.channel.los_fraction) {
            return Err(Error::config("channel.los_fraction", "must be in [0, 1]"));
        }
        self.scheme.build()?;
        Ok(())
    }

    /// Copy with the sweep parameter set to `value`.
    pub fn at(&self, parameter: &str, value: f64) -> Result<SimConfig> {
        let mut c = self.clone();
        c.sweep = None;
        match parameter {
            "sigma_over_tb" => c.channel.sigma_over_tb = value,
            "p0" => c.photon.p0 = Some(value),
            "e_bit" => {
                // scale both paths, keeping their ratio
                let los = c.photon.e_bit_los.unwrap_or(0.0);
                let nlos = c.photon.e_bit_nlos.unwrap_or(0.0);
                let total = los + nlos;
                if total > 0.0 {
                    c.photon.e_bit_los = Some(value * los / total);
                    c.photon.e_bit_nlos = Some(value * nlos / total);
                } else {
                    c.photon.e_bit_los = Some(value);
                }
            }
            "overlap" => match &mut c.scheme {
                SchemeSpec::Oeppm { overlap, .. } => *overlap = value as usize,
                _ => return Err(Error::config("sweep.parameter", "overlap needs an OEPPM scheme")),
            },
            "lux" => c.photon.lux = Some(value),
            other => return Err(Error::config("sweep.parameter", format!("unknown `{other}`"))),
        }
        Ok(c)
    }

    /// Resolves everything the simulator needs for one (unswept) point.
    pub fn prepare(&self) -> Result<Prepared> {
        let scheme = self.scheme.build()?;
        let b = scheme.bits_per_symbol();
        let frame_len = scheme.frame_len();

        let (chip_time, bit_rate) = match (&self.scheme, &self.channel.led) {
            (SchemeSpec::Oeppm { overlap, .. }, Some(led)) => {
                let chip = led.t_led / *overlap as f64;
                (chip, scheme.bit_rate(led.t_led))
            }
            (SchemeSpec::Oeppm { .. }, None) => {
                return Err(Error::config("channel.led", "OEPPM needs an LED response"));
            }
            _ => (b as f64 / (self.rate * frame_len as f64), self.rate),
        };
        let t_bit = 1.0 / bit_rate;
        let symbol_time = chip_time * frame_len as f64;

        let p = &self.photon;
        let background = if let Some(lb) = p.lambda_b {
            lb
        } else {
            let power = match p.lux {
                Some(lux) => illuminance_to_power(lux, p.area_cm2),
                None => p.background_power,
            };
            PhotonModel::from_power(0.0, power, chip_time, p.eta, p.wavelength).lambda_b
        };

        let (lambda0, los_share) = match p.p0 {
            Some(p0) => (
                PhotonModel::from_power(p0, 0.0, chip_time, p.eta, p.wavelength).lambda0,
                self.channel.los_fraction,
            ),
            None => {
                let los = p.e_bit_los.unwrap_or(0.0);
                let nlos = p.e_bit_nlos.unwrap_or(0.0);
                let total = los + nlos;
                if !(total > 0.0) {
                    return Err(Error::config("photon", "per-path energies must sum to a positive value"));
                }
                let m = PhotonModel::from_bit_energy(
                    total,
                    b,
                    mean_frame_energy(&scheme),
                    0.0,
                    chip_time,
                    p.eta,
                    p.wavelength,
                );
                (m.lambda0, los / total)
            }
        };
        let photon = PhotonModel::new(lambda0, background);

        let mode = self.channel.mode;
        let mut taps = match &self.channel.taps {
            Some(h) => ChannelTaps::new(h.clone(), 0, chip_time, mode, frame_len)?,
            None => {
                let sigma = self.channel.sigma_over_tb * t_bit;
                let geom = TapGeometry {
                    sigma,
                    tau: self.channel.tau_over_tb * t_bit,
                    e_los: los_share,
                    e_nlos: 1.0 - los_share,
                };
                if geom.e_nlos > 0.0 {
                    build_taps(geom, chip_time, frame_len, mode)?
                } else {
                    ChannelTaps::ideal(chip_time, mode, frame_len)
                }
            }
        };
        // OEPPM drives each LED for one chip and the LED response is the
        // pulse; elsewhere the LED filters the chip stream.
        let mut pulse = None;
        if let Some(led) = &self.channel.led {
            let led_taps = led_response_taps(led.t_led, chip_time, led.order);
            if matches!(self.scheme, SchemeSpec::Oeppm { .. }) {
                pulse = Some(led_taps);
            } else {
                taps = taps.convolved_with(&led_taps);
            }
        }

        let mut scheme = scheme;
        let mut interleaver_report = None;
        let q = scheme.codebook().map(|c| c.q());
        match (&self.interleaver, q) {
            (InterleaverSpec::None, _) => {}
            (_, None) => return Err(Error::config("interleaver", "only EPPM and MEPPM can be interleaved")),
            (InterleaverSpec::Random { seed }, Some(q)) => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                scheme = scheme.with_interleaver(Permutation::random(q, &mut rng))?;
            }
            (InterleaverSpec::Explicit { forward }, Some(_)) => {
                scheme = scheme.with_interleaver(Permutation::new(forward.clone())?)?;
            }
            (InterleaverSpec::Optimized { budget }, Some(q)) => {
                let budget: SearchBudget = budget.map(Into::into).unwrap_or_default();
                let cb = scheme.codebook().expect("checked above").clone();
                let (perm, report) = optimize_permutation(&cb, &taps.cyclic_taps(q), &budget, Some(&photon));
                interleaver_report = Some(report);
                scheme = scheme.with_interleaver(perm)?;
            }
        }

        Ok(Prepared {
            scheme,
            taps,
            photon,
            pulse,
            derived: Derived {
                bits_per_symbol: b,
                bit_rate,
                symbol_time,
                chip_time,
                lambda0,
                lambda_b: background,
            },
            interleaver_report,
        })
    }
}

impl Prepared {
    /// Transmitted frame of symbol `m`.
    pub fn encode(&self, m: u128) -> Result<ChipFrame> {
        let bits = crate::math::index_to_bits(m, self.scheme.bits_per_symbol());
        match &self.pulse {
            Some(p) => self.scheme.encode_oeppm_shaped(&bits, p),
            None => self.scheme.encode(&bits),
        }
    }
}

/// Average frame energy (full-amplitude chips) over the symbols sent.
pub fn mean_frame_energy(scheme: &ModulationScheme) -> f64 {
    let used = scheme.used_symbols();
    let n = used.min(1 << 16);
    let b = scheme.bits_per_symbol();
    let total: f64 = (0..n)
        .map(|i| {
            let bits = crate::math::index_to_bits(i, b);
            scheme.encode(&bits).map(|f| f.energy()).unwrap_or(0.0)
        })
        .sum();
    total / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub bits_per_symbol: usize,
    pub bit_rate: f64,
    pub symbol_time: f64,
    pub chip_time: f64,
    pub lambda0: f64,
    pub lambda_b: f64,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub scheme: ModulationScheme,
    pub taps: ChannelTaps,
    pub photon: PhotonModel,
    /// LED pulse for OEPPM, replacing the rectangular one.
    pub pulse: Option<Vec<f64>>,
    pub derived: Derived,
    pub interleaver_report: Option<crate::interleaver::OptimizeReport>,
}
