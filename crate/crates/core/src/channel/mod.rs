//! Discrete chip-rate channel model and photon counting.
//!
//! The indoor impulse response is a line-of-sight delta followed, after a
//! delay `tau`, by a diffuse Gaussian of width `sigma`. Both are folded into
//! chip-spaced taps that sum to one; the received mean photoelectron count in
//! chip `i` is `Λ0 · Σ_ℓ h_ℓ x[i−ℓ] + Λb`.

mod led;
mod photon;

pub use led::{bessel_impulse_response, led_response_taps, BESSEL_OVERSAMPLING, DEFAULT_BESSEL_ORDER};
pub(crate) use photon::sample_one;
pub use photon::{illuminance_to_power, photon_energy, sample_counts, PhotonModel, DEFAULT_WAVELENGTH};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Gaussian NLOS lobe is truncated at this many standard deviations.
pub const NLOS_TRUNCATION_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMode {
    /// Interference wraps within the symbol; adjacent symbols are ignored.
    Cyclic,
    /// Full convolution across symbol boundaries.
    #[default]
    Linear,
}

/// LOS + NLOS geometry, all times in seconds and energies in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapGeometry {
    pub sigma: f64,
    pub tau: f64,
    pub e_los: f64,
    pub e_nlos: f64,
}

/// Chip-spaced impulse response. `taps[main]` is `h_0`, the tap the
/// receiver is synchronised to; earlier entries are precursors (`ℓ < 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    taps: Vec<f64>,
    main: usize,
    chip_time: f64,
    mode: PropagationMode,
    symbol_chips: usize,
}

impl ChannelTaps {
    pub fn new(
        taps: Vec<f64>,
        main: usize,
        chip_time: f64,
        mode: PropagationMode,
        symbol_chips: usize,
    ) -> Result<Self> {
        if taps.is_empty() || main >= taps.len() {
            return Err(Error::BadGeometry("main tap index out of range".into()));
        }
        if taps.iter().any(|&h| !(h >= 0.0) || !h.is_finite()) {
            return Err(Error::BadGeometry("taps must be finite and non-negative".into()));
        }
        if !(chip_time > 0.0) {
            return Err(Error::BadGeometry("chip time must be positive".into()));
        }
        Ok(Self {
            taps,
            main,
            chip_time,
            mode,
            symbol_chips,
        })
    }

    /// Distortion-free channel.
    pub fn ideal(chip_time: f64, mode: PropagationMode, symbol_chips: usize) -> Self {
        Self {
            taps: vec![1.0],
            main: 0,
            chip_time,
            mode,
            symbol_chips,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn main(&self) -> usize {
        self.main
    }

    pub fn chip_time(&self) -> f64 {
        self.chip_time
    }

    pub fn mode(&self) -> PropagationMode {
        self.mode
    }

    pub fn symbol_chips(&self) -> usize {
        self.symbol_chips
    }

    pub fn with_mode(mut self, mode: PropagationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_symbol_chips(mut self, n: usize) -> Self {
        self.symbol_chips = n;
        self
    }

    pub fn h0(&self) -> f64 {
        self.taps[self.main]
    }

    /// `(ℓ, h_ℓ)` pairs, `ℓ` relative to the main tap.
    pub fn iter_offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let main = self.main as isize;
        self.taps
            .iter()
            .enumerate()
            .map(move |(i, &h)| (i as isize - main, h))
    }

    /// Taps folded modulo `q`: entry `ℓ` collects every `h_{ℓ + nq}`.
    pub fn cyclic_taps(&self, q: usize) -> Vec<f64> {
        let mut out = vec![0.0; q];
        for (l, h) in self.iter_offsets() {
            out[l.rem_euclid(q as isize) as usize] += h;
        }
        out
    }

    /// Convolves another impulse response (e.g. the LED) into the channel.
    /// The main tap moves to wherever the combined response is synchronised:
    /// it stays at the channel's `h_0` delayed by the other response's peak.
    pub fn convolved_with(&self, other: &[f64]) -> Self {
        let mut out = vec![0.0; self.taps.len() + other.len() - 1];
        for (i, &a) in self.taps.iter().enumerate() {
            for (j, &b) in other.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self {
            taps: out,
            main: self.main,
            chip_time: self.chip_time,
            mode: self.mode,
            symbol_chips: self.symbol_chips,
        }
    }

    /// Plain-text form: a header line then whitespace-separated taps.
    pub fn to_text(&self) -> String {
        let mode = match self.mode {
            PropagationMode::Cyclic => "cyclic",
            PropagationMode::Linear => "linear",
        };
        let taps: Vec<String> = self.taps.iter().map(|h| format!("{h:e}")).collect();
        format!(
            "# chip_time={:e} main={} mode={} symbol_chips={}\n{}\n",
            self.chip_time,
            self.main,
            mode,
            self.symbol_chips,
            taps.join(" ")
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::BadGeometry(format!("tap file: {m}"));
        let mut chip_time = None;
        let mut main = 0;
        let mut mode = PropagationMode::Cyclic;
        let mut symbol_chips = 0;
        let mut taps = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else { continue };
                    match k {
                        "chip_time" => chip_time = Some(v.parse::<f64>().map_err(|_| bad("chip_time"))?),
                        "main" => main = v.parse().map_err(|_| bad("main"))?,
                        "symbol_chips" => symbol_chips = v.parse().map_err(|_| bad("symbol_chips"))?,
                        "mode" => {
                            mode = match v {
                                "cyclic" => PropagationMode::Cyclic,
                                "linear" => PropagationMode::Linear,
                                _ => return Err(bad("mode")),
                            }
                        }
                        _ => {}
                    }
                }
                continue;
            }
            for t in line.split_whitespace() {
                taps.push(t.parse::<f64>().map_err(|_| bad("tap value"))?);
            }
        }
        let chip_time = chip_time.ok_or_else(|| bad("missing chip_time"))?;
        if symbol_chips == 0 {
            symbol_chips = taps.len();
        }
        Self::new(taps, main, chip_time, mode, symbol_chips)
    }

    /// Mean photoelectron counts for one frame in cyclic mode.
    pub fn propagate(&self, frame: &[f64], lambda0: f64, lambda_b: f64) -> Result<Vec<f64>> {
        match self.mode {
            PropagationMode::Cyclic => {
                let n = frame.len();
                if n != self.symbol_chips {
                    return Err(Error::ModeMismatch {
                        expected: self.symbol_chips,
                        got: n,
                    });
                }
                let folded = self.cyclic_taps(n);
                let mut out = vec![lambda_b; n];
                for (l, &h) in folded.iter().enumerate() {
                    if h == 0.0 {
                        continue;
                    }
                    for (i, &x) in frame.iter().enumerate() {
                        if x != 0.0 {
                            out[(i + l) % n] += lambda0 * h * x;
                        }
                    }
                }
                Ok(out)
            }
            PropagationMode::Linear => Ok(self.propagate_stream(frame, lambda0, lambda_b)),
        }
    }

    /// Linear convolution over a stream of concatenated frames; sample `i`
    /// is aligned with the main tap. Precursor taps read later samples.
    pub fn propagate_stream(&self, stream: &[f64], lambda0: f64, lambda_b: f64) -> Vec<f64> {
        let n = stream.len();
        let mut out = vec![lambda_b; n];
        let main = self.main as isize;
        for (t, &h) in self.taps.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            let l = t as isize - main;
            for (i, &x) in stream.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let o = i as isize + l;
                if o >= 0 && (o as usize) < n {
                    out[o as usize] += lambda0 * h * x;
                }
            }
        }
        out
    }
}

/// Builds chip-rate taps for a LOS delta plus a truncated Gaussian NLOS lobe
/// centred at `tau`. Tap `ℓ` collects the Gaussian mass over
/// `[(ℓ−½)T_c, (ℓ+½)T_c)`. With the LOS blocked (`e_los = 0`) the strongest
/// tap becomes the synchronisation reference.
pub fn build_taps(
    geom: TapGeometry,
    chip_time: f64,
    symbol_chips: usize,
    mode: PropagationMode,
) -> Result<ChannelTaps> {
    let TapGeometry {
        sigma,
        tau,
        e_los,
        e_nlos,
    } = geom;
    if !(chip_time > 0.0) {
        return Err(Error::BadGeometry("chip time must be positive".into()));
    }
    if !(sigma >= 0.0) || !(e_los >= 0.0) || !(e_nlos >= 0.0) || !(tau >= 0.0) {
        return Err(Error::BadGeometry("sigma, tau and energies must be non-negative".into()));
    }
    let total = e_los + e_nlos;
    if !(total > 0.0) {
        return Err(Error::BadGeometry("no received energy".into()));
    }
    if e_los > 0.0 && e_nlos > 0.0 && tau < chip_time {
        return Err(Error::BadGeometry(format!(
            "NLOS delay {tau:e} s is shorter than a chip ({chip_time:e} s)"
        )));
    }
    let w_los = e_los / total;
    let w_nlos = e_nlos / total;

    // NLOS masses indexed by absolute chip delay.
    let mut nlos: Vec<(isize, f64)> = Vec::new();
    if w_nlos > 0.0 {
        let centre = tau / chip_time;
        if sigma == 0.0 {
            nlos.push((centre.round() as isize, 1.0));
        } else {
            let s = sigma / chip_time;
            let lo = centre - NLOS_TRUNCATION_SIGMAS * s;
            let hi = centre + NLOS_TRUNCATION_SIGMAS * s;
            let cdf = |x: f64| 0.5 * (1.0 + erf((x - centre) / (s * std::f64::consts::SQRT_2)));
            let first = (lo + 0.5).floor() as isize;
            let last = (hi + 0.5).floor() as isize;
            let mut mass_total = 0.0;
            for l in first..=last {
                let a = (l as f64 - 0.5).max(lo);
                let b = (l as f64 + 0.5).min(hi);
                if b > a {
                    let m = cdf(b) - cdf(a);
                    if m > 0.0 {
                        nlos.push((l, m));
                        mass_total += m;
                    }
                }
            }
            for (_, m) in &mut nlos {
                *m /= mass_total;
            }
        }
    }

    let min_l = nlos.iter().map(|&(l, _)| l).min().unwrap_or(0).min(0);
    let max_l = nlos.iter().map(|&(l, _)| l).max().unwrap_or(0).max(0);
    let mut taps = vec![0.0; (max_l - min_l + 1) as usize];
    if w_los > 0.0 {
        taps[(-min_l) as usize] += w_los;
    }
    for (l, m) in nlos {
        taps[(l - min_l) as usize] += w_nlos * m;
    }
    let main = if w_los > 0.0 {
        (-min_l) as usize
    } else {
        // first maximum
        taps.iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &h)| if h > best.1 { (i, h) } else { best })
            .0
    };
    // trim leading/trailing zeros outside the main tap
    let start = taps.iter().position(|&h| h > 0.0).unwrap_or(main).min(main);
    let end = taps.iter().rposition(|&h| h > 0.0).unwrap_or(main).max(main);
    let taps = taps[start..=end].to_vec();
    let sum: f64 = taps.iter().sum();
    let taps = taps.into_iter().map(|h| h / sum).collect();
    ChannelTaps::new(taps, main - start, chip_time, mode, symbol_chips)
}
