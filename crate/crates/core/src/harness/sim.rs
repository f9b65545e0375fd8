use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Derived, Prepared, SimConfig};
use crate::channel::{sample_one, PhotonModel, PropagationMode};
use crate::error::{Error, Result};
use crate::interleaver::{lower_bound_ps, ser_approx_over, GaussianTail, OptimizeReport};
use crate::math::wilson95;
use crate::modem::{Modulation, Permutation};
use crate::receiver::{correlate, MeppmEqualizer, decide_baseline, ml_poisson_scores, DecisionRule, DecoderConfig};

/// Blocks evaluated between two checks of the stopping rule. Fixed so that
/// the number of simulated symbols never depends on the worker count.
pub const ROUND_BLOCKS: u64 = 32;

/// Symbol tables are precomputed up to this many symbols.
const TABLE_LIMIT: u128 = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct BerPoint {
    pub sweep_value: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub ber_lo: f64,
    pub ber_hi: f64,
    pub symbol_errors: u64,
    pub symbols: u64,
    pub ser: f64,
    pub analytic_ser: Option<f64>,
    /// Ideal-interleaver symbol error estimate divided by the bits per symbol.
    pub lower_bound: Option<f64>,
    pub wall_time: Option<f64>,
    pub derived: Derived,
    pub interleaver: Option<OptimizeReport>,
}

impl BerPoint {
    /// Half-width of the 95% interval.
    pub fn ber_ci95(&self) -> f64 {
        0.5 * (self.ber_hi - self.ber_lo)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Record wall time per point. Off by default so output is reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    bit_errors: u64,
    bits: u64,
    symbol_errors: u64,
    symbols: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.symbol_errors += o.symbol_errors;
        self.symbols += o.symbols;
    }
}

enum Detector {
    /// EPPM correlation or Poisson ML over the first `candidates` codewords.
    Eppm { cfg: DecoderConfig, candidates: usize },
    Meppm(MeppmEqualizer),
    /// Poisson ML against known mean vectors, one per used symbol.
    Templates { log_mean: Vec<Vec<f64>>, mean_sum: Vec<f64> },
    Baseline,
}

struct Simulator<'a> {
    prepared: &'a Prepared,
    rule: DecisionRule,
    detector: Detector,
    /// Received means per used symbol in cyclic mode.
    table: Option<Vec<Vec<f64>>>,
    frames: Option<Vec<Vec<f64>>>,
    /// Whole symbols of padding around a linear-mode block.
    pad_before: usize,
    pad_after: usize,
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sweep point `index` of a run seeded with `seed`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    mix(seed, index as u64 + 1)
}

impl<'a> Simulator<'a> {
    fn new(prepared: &'a Prepared, cfg: &SimConfig) -> Result<Self> {
        let scheme = &prepared.scheme;
        let photon = prepared.photon;
        let taps = &prepared.taps;
        let used = scheme.used_symbols();
        let frame_len = scheme.frame_len();
        let cyclic = taps.mode() == PropagationMode::Cyclic;

        let frames = (used <= TABLE_LIMIT)
            .then(|| (0..used as usize).map(|m| prepared.encode(m as u128).map(|f| f.0)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let table = match (&frames, cyclic) {
            (Some(fr), true) => Some(
                fr.iter()
                    .map(|f| taps.propagate(f, photon.lambda0, photon.lambda_b))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };

        let detector = match scheme.modulation() {
            Modulation::Eppm { codebook } => Detector::Eppm {
                cfg: DecoderConfig::for_scheme(scheme)?.with_rule(cfg.rule),
                candidates: if cfg.full_alphabet { codebook.q() } else { used as usize },
            },
            Modulation::Meppm { codebook, levels, kind } => Detector::Meppm(MeppmEqualizer::new(
                DecoderConfig::for_scheme(scheme)?,
                &taps.cyclic_taps(codebook.q()),
                photon,
                *levels,
                *kind,
            )?),
            Modulation::Oeppm { .. } => {
                let fr = frames.as_ref().expect("OEPPM alphabets are small");
                let means: Vec<Vec<f64>> = match &table {
                    Some(t) => t.clone(),
                    None => fr
                        .iter()
                        .map(|f| taps.propagate_stream(f, photon.lambda0, photon.lambda_b))
                        .collect(),
                };
                templates(means)
            }
            Modulation::Ook | Modulation::Pam4 => {
                // levels seen through h_0 on top of the average ISI
                let levels = used as usize;
                let h0 = taps.h0();
                let rest: f64 = taps.taps().iter().sum::<f64>() - h0;
                let mean_amp = 0.5;
                let means = (0..levels)
                    .map(|i| {
                        let a = i as f64 / (levels - 1) as f64;
                        vec![photon.lambda0 * (h0 * a + rest * mean_amp) + photon.lambda_b]
                    })
                    .collect();
                templates(means)
            }
            Modulation::Ppm { .. } | Modulation::Vppm { .. } => Detector::Baseline,
        };

        let (pad_before, pad_after) = if cyclic || taps.taps().len() == 1 {
            (0, 0)
        } else {
            let main = taps.main();
            let post = taps.taps().len() - 1 - main;
            (post.div_ceil(frame_len), main.div_ceil(frame_len))
        };

        Ok(Self {
            prepared,
            rule: cfg.rule,
            detector,
            table,
            frames,
            pad_before,
            pad_after,
        })
    }

    fn frame(&self, m: u128) -> Result<Vec<f64>> {
        match &self.frames {
            Some(f) => Ok(f[m as usize].clone()),
            None => self.prepared.encode(m).map(|f| f.0),
        }
    }

    fn run_block(&self, seed: u64, block: u64, n: usize) -> Result<Tally> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let scheme = &self.prepared.scheme;
        let photon = self.prepared.photon;
        let taps = &self.prepared.taps;
        let used = scheme.used_symbols();
        let b = scheme.bits_per_symbol() as u64;
        let q = scheme.frame_len();

        let total = self.pad_before + n + self.pad_after;
        let sent: Vec<u128> = (0..total).map(|_| draw(&mut rng, used)).collect();

        let mut tally = Tally::default();
        let mut record = |tx: u128, rx: u128| {
            let wrong = (tx ^ rx).count_ones() as u64;
            tally.bit_errors += wrong;
            tally.bits += b;
            tally.symbols += 1;
            tally.symbol_errors += u64::from(tx != rx);
        };

        match taps.mode() {
            PropagationMode::Cyclic => {
                for &m in &sent {
                    let mean = match &self.table {
                        Some(t) => t[m as usize].clone(),
                        None => taps.propagate(&self.frame(m)?, photon.lambda0, photon.lambda_b)?,
                    };
                    let r: Vec<u32> = mean.iter().map(|&x| sample_one(x, &mut rng)).collect();
                    record(m, self.detect(&r, &photon)?);
                }
            }
            PropagationMode::Linear => {
                let mut stream = Vec::with_capacity(total * q);
                for &m in &sent {
                    stream.extend(self.frame(m)?);
                }
                let mean = taps.propagate_stream(&stream, photon.lambda0, photon.lambda_b);
                for (s, &m) in sent.iter().enumerate().skip(self.pad_before).take(n) {
                    let r: Vec<u32> = mean[s * q..(s + 1) * q].iter().map(|&x| sample_one(x, &mut rng)).collect();
                    record(m, self.detect(&r, &photon)?);
                }
            }
        }
        Ok(tally)
    }

    fn detect(&self, r: &[u32], photon: &PhotonModel) -> Result<u128> {
        let scheme = &self.prepared.scheme;
        Ok(match &self.detector {
            Detector::Eppm { cfg, candidates } => {
                let scores = match self.rule {
                    DecisionRule::Correlation => correlate(r, cfg)?,
                    DecisionRule::MlPoisson => ml_poisson_scores(r, cfg, photon)?,
                };
                argmax(&scores[..*candidates]) as u128
            }
            Detector::Meppm(eq) => scheme.meppm_rank(&eq.decode(r)?),
            Detector::Templates { log_mean, mean_sum } => {
                let scores: Vec<f64> = log_mean
                    .iter()
                    .zip(mean_sum)
                    .map(|(lm, s)| r.iter().zip(lm).map(|(&n, &l)| if n == 0 { 0.0 } else { n as f64 * l }).sum::<f64>() - s)
                    .collect();
                argmax(&scores) as u128
            }
            Detector::Baseline => decide_baseline(scheme, r, photon)? as u128,
        })
    }
}

fn templates(means: Vec<Vec<f64>>) -> Detector {
    let mean_sum = means.iter().map(|m| m.iter().sum()).collect();
    let log_mean = means.iter().map(|m| m.iter().map(|&x| x.ln()).collect()).collect();
    Detector::Templates { log_mean, mean_sum }
}

fn draw<R: Rng>(rng: &mut R, used: u128) -> u128 {
    if used <= u64::MAX as u128 {
        rng.random_range(0..used as u64) as u128
    } else {
        rng.random_range(0..used)
    }
}

/// Index of the largest score; ties go to the lowest index.
fn argmax(s: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in s.iter().enumerate().skip(1) {
        if v > s[best] {
            best = i;
        }
    }
    best
}


/// Analytic columns for EPPM on a cyclic channel.
fn analytic(prepared: &Prepared, cfg: &SimConfig) -> (Option<f64>, Option<f64>) {
    let scheme = &prepared.scheme;
    let Modulation::Eppm { codebook } = scheme.modulation() else {
        return (None, None);
    };
    if prepared.taps.mode() != PropagationMode::Cyclic {
        return (None, None);
    }
    let q = codebook.q();
    let h = prepared.taps.cyclic_taps(q);
    let identity = Permutation::identity(q);
    let p = scheme.interleaver().unwrap_or(&identity);
    let symbols: Vec<usize> = if cfg.full_alphabet {
        (0..q).collect()
    } else {
        (0..scheme.used_symbols() as usize).collect()
    };
    let ser = ser_approx_over(codebook, p, &h, &prepared.photon, &GaussianTail, &symbols).full;
    let bound = lower_bound_ps(codebook, &h, &prepared.photon, &GaussianTail);
    let b = scheme.bits_per_symbol() as f64;
    (Some(ser), Some(bound.ps / b))
}

/// Simulates one prepared point until `target_errors` bit errors or
/// `trials` symbols, whichever comes first.
pub fn simulate_point(cfg: &SimConfig, prepared: &Prepared, seed: u64, sweep_value: f64, opts: RunOptions) -> Result<BerPoint> {
    let start = Instant::now();
    let sim = Simulator::new(prepared, cfg)?;
    let block = cfg.block_symbols as u64;
    let n_blocks = cfg.trials.div_ceil(block);
    let block_len = |i: u64| (block.min(cfg.trials - i * block)) as usize;

    let mut tally = Tally::default();
    let mut next = 0u64;
    while next < n_blocks && tally.bit_errors < cfg.target_errors {
        let end = (next + ROUND_BLOCKS).min(n_blocks);
        let parts: Vec<Tally> = (next..end)
            .into_par_iter()
            .map(|i| sim.run_block(seed, i, block_len(i)))
            .collect::<Result<_>>()?;
        for t in parts {
            tally += t;
        }
        next = end;
    }

    let (ber_lo, ber_hi) = wilson95(tally.bit_errors, tally.bits);
    let (analytic_ser, lower_bound) = analytic(prepared, cfg);
    Ok(BerPoint {
        sweep_value,
        bit_errors: tally.bit_errors,
        bits: tally.bits,
        ber: tally.bit_errors as f64 / tally.bits as f64,
        ber_lo,
        ber_hi,
        symbol_errors: tally.symbol_errors,
        symbols: tally.symbols,
        ser: tally.symbol_errors as f64 / tally.symbols as f64,
        analytic_ser,
        lower_bound,
        wall_time: opts.timing.then(|| start.elapsed().as_secs_f64()),
        derived: prepared.derived,
        interleaver: prepared.interleaver_report.clone(),
    })
}

/// Runs every sweep point of `cfg` (or the single point if unswept).
pub fn run_ber(cfg: &SimConfig, opts: RunOptions) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| {
        let points: Vec<(f64, SimConfig)> = match &cfg.sweep {
            Some(s) => s
                .values
                .iter()
                .map(|&v| cfg.at(&s.parameter, v).map(|c| (v, c)))
                .collect::<Result<_>>()?,
            None => vec![(0.0, cfg.clone())],
        };
        points
            .iter()
            .enumerate()
            .map(|(i, (v, c))| {
                let prepared = c.prepare()?;
                simulate_point(c, &prepared, point_seed(cfg.seed, i), *v, opts)
            })
            .collect()
    })
}
