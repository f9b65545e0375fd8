//! A small Monte Carlo sweep built in code, printed as CSV.

use eppm::harness::{points_to_csv, run_ber, InterleaverSpec, RunOptions, SchemeSpec, SimConfig, Sweep};

fn main() -> eppm::Result<()> {
    let mut cfg = SimConfig::new("eppm11", SchemeSpec::Eppm { q: 11, k: 5, lambda: 2 });
    cfg.photon.e_bit_los = Some(5e-16);
    cfg.photon.e_bit_nlos = Some(5e-16);
    cfg.channel.tau_over_tb = 0.5;
    cfg.trials = 100_000;
    cfg.seed = 11;
    cfg.sweep = Some(Sweep {
        parameter: "sigma_over_tb".into(),
        values: vec![0.01, 0.03, 0.1],
    });

    for il in [InterleaverSpec::None, InterleaverSpec::Random { seed: 5 }] {
        cfg.interleaver = il;
        let points = run_ber(&cfg, RunOptions::default())?;
        println!("{:?}", cfg.interleaver);
        print!("{}", points_to_csv("sigma_over_tb", &points));
    }
    Ok(())
}
