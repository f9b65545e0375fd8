//! Bit-to-chip mapping.
//!
//! Bits map to symbol indices in natural binary (MSB first) over the first
//! `2^⌊log2 M⌋` symbols of an alphabet of size `M`; the remaining symbols are
//! never transmitted. Frames are chip amplitudes in units of the peak power.

mod permutation;
mod rate;

pub use permutation::Permutation;
pub use rate::{bit_rate_formula, RateKind};

use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::math::{self, binomial, floor_log2};

/// Per-symbol chip amplitudes, each in `[0, 1]` relative to peak power.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipFrame(pub Vec<f64>);

impl ChipFrame {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.0
    }

    /// Sum of amplitudes, in chip·peak units.
    pub fn energy(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn peak(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    fn binary(row: &[u8]) -> Self {
        ChipFrame(row.iter().map(|&c| c as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Eppm,
    MeppmI,
    MeppmII,
    Oeppm,
    Ppm,
    Vppm,
    Ook,
    Pam4,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Eppm => "eppm",
            SchemeKind::MeppmI => "meppm_i",
            SchemeKind::MeppmII => "meppm_ii",
            SchemeKind::Oeppm => "oeppm",
            SchemeKind::Ppm => "ppm",
            SchemeKind::Vppm => "vppm",
            SchemeKind::Ook => "ook",
            SchemeKind::Pam4 => "pam4",
        }
    }
}

/// Symbols of multilevel EPPM are sums of `N` codewords: distinct ones for
/// type I, with repetition (and possibly fewer than `N`) for type II.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeppmType {
    I,
    II,
}

#[derive(Debug, Clone)]
pub enum Modulation {
    Eppm { codebook: Arc<Codebook> },
    Meppm { codebook: Arc<Codebook>, levels: usize, kind: MeppmType },
    /// Pulses `overlap` chips wide starting at each codeword `1`.
    Oeppm { codebook: Arc<Codebook>, overlap: usize },
    Ppm { order: usize },
    /// Binary PPM with a pulse of `pulse_chips` out of `frame_chips`.
    Vppm { pulse_chips: usize, frame_chips: usize },
    Ook,
    Pam4,
}

#[derive(Debug, Clone)]
pub struct ModulationScheme {
    modulation: Modulation,
    interleaver: Option<Permutation>,
}

impl ModulationScheme {
    pub fn eppm(codebook: Arc<Codebook>) -> Self {
        Self::plain(Modulation::Eppm { codebook })
    }

    pub fn meppm(codebook: Arc<Codebook>, levels: usize, kind: MeppmType) -> Result<Self> {
        if levels < 1 {
            return Err(Error::BadLevelCount);
        }
        if kind == MeppmType::I && levels > codebook.q() {
            return Err(Error::BadLevelCount);
        }
        Ok(Self::plain(Modulation::Meppm {
            codebook,
            levels,
            kind,
        }))
    }

    pub fn oeppm(codebook: Arc<Codebook>, overlap: usize) -> Result<Self> {
        if overlap < 1 {
            return Err(Error::config("overlap", "must be at least 1"));
        }
        Ok(Self::plain(Modulation::Oeppm { codebook, overlap }))
    }

    pub fn ppm(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::config("order", "PPM needs at least 2 slots"));
        }
        Ok(Self::plain(Modulation::Ppm { order }))
    }

    /// VPPM with pulse-width fraction `pulse_chips / frame_chips ≤ 1/2`.
    pub fn vppm(pulse_chips: usize, frame_chips: usize) -> Result<Self> {
        if pulse_chips == 0 || 2 * pulse_chips > frame_chips {
            return Err(Error::config("vppm_width", "pulse width must be in (0, 1/2]"));
        }
        Ok(Self::plain(Modulation::Vppm {
            pulse_chips,
            frame_chips,
        }))
    }

    pub fn ook() -> Self {
        Self::plain(Modulation::Ook)
    }

    pub fn pam4() -> Self {
        Self::plain(Modulation::Pam4)
    }

    fn plain(modulation: Modulation) -> Self {
        Self {
            modulation,
            interleaver: None,
        }
    }

    /// Attaches a symbol-length interleaver (EPPM and MEPPM only).
    pub fn with_interleaver(mut self, p: Permutation) -> Result<Self> {
        match &self.modulation {
            Modulation::Eppm { codebook } | Modulation::Meppm { codebook, .. } => {
                if p.len() != codebook.q() {
                    return Err(Error::LengthMismatch {
                        expected: codebook.q(),
                        got: p.len(),
                    });
                }
            }
            Modulation::Oeppm { codebook, overlap } => {
                return Err(Error::LengthMismatch {
                    expected: codebook.q(),
                    got: codebook.q() + overlap - 1,
                })
            }
            _ => return Err(Error::WrongScheme("interleaving is defined for EPPM/MEPPM")),
        }
        self.interleaver = Some(p);
        Ok(self)
    }

    pub fn modulation(&self) -> &Modulation {
        &self.modulation
    }

    pub fn interleaver(&self) -> Option<&Permutation> {
        self.interleaver.as_ref()
    }

    pub fn codebook(&self) -> Option<&Arc<Codebook>> {
        match &self.modulation {
            Modulation::Eppm { codebook }
            | Modulation::Meppm { codebook, .. }
            | Modulation::Oeppm { codebook, .. } => Some(codebook),
            _ => None,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        match &self.modulation {
            Modulation::Eppm { .. } => SchemeKind::Eppm,
            Modulation::Meppm { kind: MeppmType::I, .. } => SchemeKind::MeppmI,
            Modulation::Meppm { kind: MeppmType::II, .. } => SchemeKind::MeppmII,
            Modulation::Oeppm { .. } => SchemeKind::Oeppm,
            Modulation::Ppm { .. } => SchemeKind::Ppm,
            Modulation::Vppm { .. } => SchemeKind::Vppm,
            Modulation::Ook => SchemeKind::Ook,
            Modulation::Pam4 => SchemeKind::Pam4,
        }
    }

    /// Number of distinct symbols the scheme could send.
    pub fn alphabet_size(&self) -> u128 {
        match &self.modulation {
            Modulation::Eppm { codebook } | Modulation::Oeppm { codebook, .. } => codebook.q() as u128,
            Modulation::Meppm {
                codebook,
                levels,
                kind,
            } => {
                let q = codebook.q() as u64;
                let n = *levels as u64;
                match kind {
                    MeppmType::I => binomial(q, n),
                    MeppmType::II => binomial(q + n, n),
                }
                .expect("alphabet size overflows u128")
            }
            Modulation::Ppm { order } => *order as u128,
            Modulation::Vppm { .. } | Modulation::Ook => 2,
            Modulation::Pam4 => 4,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        floor_log2(self.alphabet_size())
    }

    /// Symbols actually used: `2^bits_per_symbol`.
    pub fn used_symbols(&self) -> u128 {
        1u128 << self.bits_per_symbol()
    }

    pub fn frame_len(&self) -> usize {
        match &self.modulation {
            Modulation::Eppm { codebook } | Modulation::Meppm { codebook, .. } => codebook.q(),
            Modulation::Oeppm { codebook, overlap } => codebook.q() + overlap - 1,
            Modulation::Ppm { order } => *order,
            Modulation::Vppm { frame_chips, .. } => *frame_chips,
            Modulation::Ook | Modulation::Pam4 => 1,
        }
    }

    /// Number of simultaneously-on LEDs an OEPPM symbol needs: `min(v, K)`.
    pub fn led_count(&self) -> usize {
        match &self.modulation {
            Modulation::Oeppm { codebook, overlap } => (*overlap).min(codebook.k()),
            _ => 1,
        }
    }

    /// Peak-to-average power ratio of the transmitted waveform.
    pub fn papr(&self) -> Ratio<u64> {
        match &self.modulation {
            Modulation::Eppm { codebook } | Modulation::Meppm { codebook, .. } => codebook.papr(),
            Modulation::Oeppm { codebook, overlap } => {
                let v = *overlap as u64;
                let n_led = (*overlap).min(codebook.k()) as u64;
                Ratio::new(n_led * (codebook.q() as u64 + v - 1), v * codebook.k() as u64)
            }
            Modulation::Ppm { order } => Ratio::from_integer(*order as u64),
            Modulation::Vppm {
                pulse_chips,
                frame_chips,
            } => Ratio::new(*frame_chips as u64, *pulse_chips as u64),
            Modulation::Ook => Ratio::from_integer(2),
            Modulation::Pam4 => Ratio::from_integer(2),
        }
    }

    fn check_bits(&self, bits: &[bool]) -> Result<u128> {
        let expected = self.bits_per_symbol();
        if bits.len() != expected {
            return Err(Error::BitWidthMismatch {
                expected,
                got: bits.len(),
            });
        }
        Ok(math::bits_to_index(bits))
    }

    /// Encodes one symbol's worth of bits, whatever the scheme.
    pub fn encode(&self, bits: &[bool]) -> Result<ChipFrame> {
        match &self.modulation {
            Modulation::Eppm { .. } => self.encode_eppm(bits).map(|(_, f)| f),
            Modulation::Meppm { .. } => self.encode_meppm(bits),
            Modulation::Oeppm { .. } => self.encode_oeppm(bits),
            _ => self.encode_baseline(bits),
        }
    }

    /// Frame for symbol index `m` (EPPM/OEPPM/PPM/VPPM/OOK/PAM4) without
    /// going through bits.
    pub fn encode_index(&self, m: usize) -> Result<ChipFrame> {
        let bits = math::index_to_bits(m as u128, self.bits_per_symbol());
        self.encode(&bits)
    }

    /// EPPM: bits select codeword `c_m`, interleaved if configured.
    pub fn encode_eppm(&self, bits: &[bool]) -> Result<(usize, ChipFrame)> {
        let Modulation::Eppm { codebook } = &self.modulation else {
            return Err(Error::WrongScheme("encode_eppm needs EPPM"));
        };
        let m = self.check_bits(bits)? as usize;
        let frame = ChipFrame::binary(codebook.row(m));
        Ok((m, self.interleave(frame)?))
    }

    /// Multilevel EPPM: bits unrank to a set (type I) or multiset over
    /// `Q + 1` items, the last being "no codeword" (type II); the frame is
    /// the sum of the chosen codewords scaled by `1/N`.
    pub fn encode_meppm(&self, bits: &[bool]) -> Result<ChipFrame> {
        let Modulation::Meppm { codebook, levels, .. } = &self.modulation else {
            return Err(Error::WrongScheme("encode_meppm needs MEPPM"));
        };
        let rank = self.check_bits(bits)?;
        let counts = self.meppm_counts(rank);
        let q = codebook.q();
        let scale = 1.0 / *levels as f64;
        let mut amp = vec![0.0; q];
        for (m, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            for i in codebook.support(m) {
                amp[i] += n as f64 * scale;
            }
        }
        self.interleave(ChipFrame(amp))
    }

    /// Per-codeword multiplicities of MEPPM symbol `rank` (length `Q`).
    pub fn meppm_counts(&self, rank: u128) -> Vec<usize> {
        let Modulation::Meppm {
            codebook,
            levels,
            kind,
        } = &self.modulation
        else {
            panic!("meppm_counts on a non-MEPPM scheme");
        };
        let q = codebook.q();
        let mut counts = vec![0usize; q];
        let picks = match kind {
            MeppmType::I => math::unrank_combination(q, *levels, rank),
            MeppmType::II => math::unrank_multiset(q + 1, *levels, rank),
        };
        for p in picks {
            if p < q {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Inverse of [`Self::meppm_counts`].
    pub fn meppm_rank(&self, counts: &[usize]) -> u128 {
        let Modulation::Meppm {
            codebook,
            levels,
            kind,
        } = &self.modulation
        else {
            panic!("meppm_rank on a non-MEPPM scheme");
        };
        let q = codebook.q();
        let mut items: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(m, &n)| std::iter::repeat_n(m, n))
            .collect();
        match kind {
            MeppmType::I => math::rank_combination(q, &items),
            MeppmType::II => {
                items.resize(*levels, q);
                math::rank_multiset(q + 1, &items)
            }
        }
    }

    /// Overlapped EPPM over `Q + v − 1` chips: every `1` of the codeword
    /// starts a pulse `v` chips wide at amplitude `1/min(v, K)`.
    pub fn encode_oeppm(&self, bits: &[bool]) -> Result<ChipFrame> {
        let Modulation::Oeppm { codebook, overlap } = &self.modulation else {
            return Err(Error::WrongScheme("encode_oeppm needs OEPPM"));
        };
        let m = self.check_bits(bits)? as usize;
        let v = *overlap;
        let amp_per_pulse = 1.0 / self.led_count() as f64;
        let mut amp = vec![0.0; codebook.q() + v - 1];
        for start in codebook.support(m) {
            for a in &mut amp[start..start + v] {
                *a += amp_per_pulse;
            }
        }
        Ok(ChipFrame(amp))
    }

    /// Overlapped EPPM with a band-limited LED: every `1` of the codeword
    /// drives one LED for a single chip and the LED emits `pulse`, scaled so
    /// its peak is `1/min(v, K)`. Samples past the frame end are dropped.
    pub fn encode_oeppm_shaped(&self, bits: &[bool], pulse: &[f64]) -> Result<ChipFrame> {
        let Modulation::Oeppm { codebook, overlap } = &self.modulation else {
            return Err(Error::WrongScheme("encode_oeppm_shaped needs OEPPM"));
        };
        let m = self.check_bits(bits)? as usize;
        let peak = pulse.iter().copied().fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::BadGeometry("LED pulse has no positive sample".into()));
        }
        let scale = 1.0 / (self.led_count() as f64 * peak);
        let len = codebook.q() + overlap - 1;
        let mut amp = vec![0.0; len];
        for start in codebook.support(m) {
            for (a, &p) in amp[start..].iter_mut().zip(pulse) {
                *a += scale * p;
            }
        }
        Ok(ChipFrame(amp))
    }

    /// PPM, VPPM, OOK and 4-PAM.
    pub fn encode_baseline(&self, bits: &[bool]) -> Result<ChipFrame> {
        let idx = match &self.modulation {
            Modulation::Ppm { .. } | Modulation::Vppm { .. } | Modulation::Ook | Modulation::Pam4 => {
                self.check_bits(bits)? as usize
            }
            _ => return Err(Error::WrongScheme("encode_baseline needs PPM/VPPM/OOK/PAM4")),
        };
        let frame = match &self.modulation {
            Modulation::Ppm { order } => {
                let mut a = vec![0.0; *order];
                a[idx] = 1.0;
                a
            }
            Modulation::Vppm {
                pulse_chips,
                frame_chips,
            } => {
                let mut a = vec![0.0; *frame_chips];
                let start = if idx == 0 { 0 } else { frame_chips - pulse_chips };
                a[start..start + pulse_chips].fill(1.0);
                a
            }
            Modulation::Ook => vec![idx as f64],
            Modulation::Pam4 => vec![idx as f64 / 3.0],
            _ => unreachable!(),
        };
        Ok(ChipFrame(frame))
    }

    fn interleave(&self, frame: ChipFrame) -> Result<ChipFrame> {
        match &self.interleaver {
            Some(p) => apply_interleaver(&frame, p),
            None => Ok(frame),
        }
    }

    /// Bit rate with `T_led` as the chip-group duration; see [`bit_rate_formula`].
    pub fn bit_rate(&self, t_led: f64) -> f64 {
        match &self.modulation {
            Modulation::Eppm { codebook } => {
                bit_rate_formula(RateKind::Oeppm, codebook.q(), 1, 1, t_led)
            }
            Modulation::Oeppm { codebook, overlap } => {
                bit_rate_formula(RateKind::Oeppm, codebook.q(), 1, *overlap, t_led)
            }
            Modulation::Meppm {
                codebook,
                levels,
                kind,
            } => {
                let rk = match kind {
                    MeppmType::I => RateKind::OmeppmI,
                    MeppmType::II => RateKind::OmeppmII,
                };
                bit_rate_formula(rk, codebook.q(), *levels, 1, t_led)
            }
            _ => self.bits_per_symbol() as f64 / (self.frame_len() as f64 * t_led),
        }
    }
}

pub fn apply_interleaver(frame: &ChipFrame, p: &Permutation) -> Result<ChipFrame> {
    p.apply(&frame.0).map(ChipFrame)
}

pub fn deinterleave(frame: &ChipFrame, p: &Permutation) -> Result<ChipFrame> {
    p.deinterleave(&frame.0).map(ChipFrame)
}
