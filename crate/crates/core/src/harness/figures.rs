//! Figure presets with fixed link parameters.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ChannelSpec, InterleaverSpec, LedSpec, PhotonSpec, SchemeSpec, SimConfig, Sweep};
use super::output::points_to_csv;
use super::sim::{point_seed, run_ber, BerPoint, RunOptions};
use crate::channel::PropagationMode;
use crate::error::{Error, Result};
use crate::modem::{bit_rate_formula, MeppmType, RateKind};

pub const FIGURES: [&str; 5] = ["fig4", "fig6", "fig6_nlos", "fig7_meppm", "fig8"];

/// Received energy per bit on each path for the dispersive-channel figures.
pub const PATH_ENERGY: f64 = 5e-16;
/// Peak power sweep for the ideal-channel comparison, watts.
pub const FIG4_P0: [f64; 8] = [5e-9, 10e-9, 15e-9, 20e-9, 25e-9, 30e-9, 35e-9, 40e-9];
pub const FIG6_SIGMA: [f64; 11] = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1, 0.15, 0.2];
/// NLOS delay over bit time with a LOS path present.
pub const FIG6_TAU: f64 = 0.5;
pub const FIG6_NLOS_SIGMA: [f64; 9] = [0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0];
pub const FIG7_SIGMA: [f64; 8] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0];
/// Long enough for the widest chip among the `fig7_meppm` schemes (4-PAM).
pub const FIG7_TAU: f64 = 2.0;
pub const FIG8_OVERLAP: [usize; 14] = [1, 5, 10, 20, 35, 50, 75, 100, 121, 135, 153, 175, 200, 250];
pub const FIG8_T_LED: f64 = 20e-9;
pub const FIG8_P0: f64 = 40e-6;

#[derive(Debug, Clone, Copy)]
pub struct FigureOptions {
    pub seed: u64,
    pub workers: usize,
    pub timing: bool,
    /// Multiplies every per-point symbol cap.
    pub effort: f64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: 0,
            timing: false,
            effort: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub name: String,
    pub config: SimConfig,
    pub points: Vec<BerPoint>,
}

impl Curve {
    pub fn csv(&self) -> String {
        let sweep = self.config.sweep.as_ref().map(|s| s.parameter.as_str()).unwrap_or("");
        points_to_csv(sweep, &self.points)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureOutput {
    pub figure: String,
    pub seed: u64,
    pub curves: Vec<Curve>,
    /// Extra tables as `(file name, CSV text)`.
    #[serde(skip)]
    pub tables: Vec<(String, String)>,
    /// Some interleaver search stopped at its budget.
    pub budget_exhausted: bool,
}

impl FigureOutput {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    /// Every output file as `(name, contents)`: one CSV per curve, the extra
    /// tables and a JSON record of configurations and derived quantities.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .curves
            .iter()
            .map(|c| (format!("{}_{}.csv", self.figure, c.name), c.csv()))
            .collect();
        out.extend(self.tables.iter().cloned());
        let json = serde_json::to_string_pretty(self).expect("figure output serialises");
        out.push((format!("{}.json", self.figure), json + "\n"));
        out
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, text) in self.files() {
            let p = dir.join(name);
            std::fs::write(&p, text)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

fn base(name: &str, scheme: SchemeSpec, trials: u64, opts: &FigureOptions, index: usize) -> SimConfig {
    let mut c = SimConfig::new(name, scheme);
    c.trials = ((trials as f64 * opts.effort).round() as u64).max(1);
    c.seed = point_seed(opts.seed, 1000 + index);
    c
}

fn eppm(q: usize) -> SchemeSpec {
    match q {
        11 => SchemeSpec::Eppm { q: 11, k: 5, lambda: 2 },
        19 => SchemeSpec::Eppm { q: 19, k: 9, lambda: 4 },
        21 => SchemeSpec::Eppm { q: 21, k: 5, lambda: 1 },
        35 => SchemeSpec::Eppm { q: 35, k: 17, lambda: 8 },
        57 => SchemeSpec::Eppm { q: 57, k: 8, lambda: 1 },
        _ => unreachable!("no preset code of length {q}"),
    }
}

fn sweep(parameter: &str, values: &[f64]) -> Option<Sweep> {
    Some(Sweep {
        parameter: parameter.into(),
        values: values.to_vec(),
    })
}

fn dispersive(los: bool, tau: f64, mode: PropagationMode) -> (ChannelSpec, PhotonSpec) {
    let channel = ChannelSpec {
        tau_over_tb: tau,
        mode,
        ..ChannelSpec::default()
    };
    let photon = PhotonSpec {
        e_bit_los: Some(if los { PATH_ENERGY } else { 0.0 }),
        e_bit_nlos: Some(PATH_ENERGY),
        ..PhotonSpec::default()
    };
    (channel, photon)
}

/// Curve names and configurations of a figure.
pub fn figure_configs(figure: &str, opts: &FigureOptions) -> Result<Vec<(String, SimConfig)>> {
    let mut curves: Vec<(String, SimConfig)> = Vec::new();
    let mut push = |name: String, scheme: SchemeSpec, trials: u64, f: &dyn Fn(&mut SimConfig)| {
        let mut c = base(&name, scheme, trials, opts, curves.len());
        f(&mut c);
        curves.push((name, c));
    };
    match figure {
        "fig4" => {
            for (papr, q) in [(2usize, 35usize), (4, 21), (8, 57)] {
                let set = |c: &mut SimConfig| {
                    c.photon.p0 = Some(FIG4_P0[0]);
                    c.sweep = sweep("p0", &FIG4_P0);
                };
                push(format!("eppm_papr{papr}"), eppm(q), 2_000_000, &set);
                push(format!("ppm_papr{papr}"), SchemeSpec::Ppm { order: papr }, 2_000_000, &set);
                push(
                    format!("vppm_papr{papr}"),
                    SchemeSpec::Vppm {
                        pulse_chips: 1,
                        frame_chips: papr,
                    },
                    2_000_000,
                    &set,
                );
            }
        }
        "fig6" | "fig6_nlos" => {
            let los = figure == "fig6";
            let (tau, sigmas): (f64, &[f64]) = if los { (FIG6_TAU, &FIG6_SIGMA) } else { (1.0, &FIG6_NLOS_SIGMA) };
            let (channel, photon) = dispersive(los, tau, PropagationMode::Cyclic);
            for q in [11usize, 19] {
                let mut variants = vec![("none", InterleaverSpec::None)];
                if los {
                    variants.push((
                        "random",
                        InterleaverSpec::Random {
                            seed: point_seed(opts.seed, q),
                        },
                    ));
                }
                variants.push(("optimized", InterleaverSpec::Optimized { budget: None }));
                for (tag, il) in variants {
                    let set = |c: &mut SimConfig| {
                        c.channel = channel.clone();
                        c.photon = photon.clone();
                        c.interleaver = il.clone();
                        c.sweep = sweep("sigma_over_tb", sigmas);
                    };
                    push(format!("eppm{q}_{tag}"), eppm(q), 1_000_000, &set);
                }
                if !los {
                    let set = |c: &mut SimConfig| {
                        c.channel = channel.clone();
                        c.photon = photon.clone();
                        c.sweep = sweep("sigma_over_tb", sigmas);
                    };
                    push(format!("ppm{q}"), SchemeSpec::Ppm { order: q }, 1_000_000, &set);
                }
            }
        }
        "fig7_meppm" => {
            let (channel, photon) = dispersive(true, FIG7_TAU, PropagationMode::Linear);
            let meppm = SchemeSpec::Meppm {
                q: 11,
                k: 5,
                lambda: 2,
                levels: 10,
                meppm_type: MeppmType::II,
            };
            // codeword schemes see the channel cyclically, single-chip ones linearly
            let cases = [
                ("meppm_none", meppm.clone(), InterleaverSpec::None, PropagationMode::Cyclic),
                (
                    "meppm_optimized",
                    meppm,
                    InterleaverSpec::Optimized { budget: None },
                    PropagationMode::Cyclic,
                ),
                ("ook", SchemeSpec::Ook, InterleaverSpec::None, PropagationMode::Linear),
                ("pam4", SchemeSpec::Pam4, InterleaverSpec::None, PropagationMode::Linear),
            ];
            for (name, scheme, il, mode) in cases {
                let set = |c: &mut SimConfig| {
                    c.channel = channel.clone();
                    c.channel.mode = mode;
                    c.photon = photon.clone();
                    c.interleaver = il.clone();
                    c.sweep = sweep("sigma_over_tb", &FIG7_SIGMA);
                };
                push(name.into(), scheme, 500_000, &set);
            }
        }
        "fig8" => {
            let set = |c: &mut SimConfig| {
                c.photon.p0 = Some(FIG8_P0);
                c.channel.mode = PropagationMode::Cyclic;
                c.channel.led = Some(LedSpec {
                    t_led: FIG8_T_LED,
                    order: 6,
                });
                let v: Vec<f64> = FIG8_OVERLAP.iter().map(|&v| v as f64).collect();
                c.sweep = sweep("overlap", &v);
            };
            let scheme = SchemeSpec::Oeppm {
                q: 35,
                k: 17,
                lambda: 8,
                overlap: 1,
            };
            push("oeppm35".into(), scheme, 1_000_000, &set);
        }
        other => return Err(Error::UnknownFigure(other.into())),
    }
    Ok(curves)
}

/// `R_b T_led` against `v` for the Q = 35 overlapped code.
pub fn fig8_rate_csv() -> String {
    let mut s = String::from("overlap,rb_tled,bit_rate\n");
    for v in 1..=250 {
        let rb = bit_rate_formula(RateKind::Oeppm, 35, 1, v, FIG8_T_LED);
        let _ = writeln!(s, "{v},{:e},{:e}", rb * FIG8_T_LED, rb);
    }
    s
}

/// Runs every curve of `figure`.
pub fn reproduce_figure(figure: &str, opts: &FigureOptions) -> Result<FigureOutput> {
    let configs = figure_configs(figure, opts)?;
    let run = RunOptions {
        workers: opts.workers,
        timing: opts.timing,
    };
    let mut curves = Vec::with_capacity(configs.len());
    for (name, config) in configs {
        let points = run_ber(&config, run)?;
        curves.push(Curve { name, config, points });
    }
    let budget_exhausted = curves
        .iter()
        .flat_map(|c| &c.points)
        .any(|p| p.interleaver.as_ref().is_some_and(|r| r.budget_exhausted));
    let tables = if figure == "fig8" {
        vec![("fig8_rate.csv".to_string(), fig8_rate_csv())]
    } else {
        Vec::new()
    };
    Ok(FigureOutput {
        figure: figure.into(),
        seed: opts.seed,
        curves,
        tables,
        budget_exhausted,
    })
}
