use eppm::harness::{run_ber, RunOptions, SchemeSpec, SimConfig, Sweep};
use statrs::distribution::{Discrete, Poisson};

/// Exact 2-PPM symbol error rate for Poisson counts: the wrong slot wins
/// outright, or ties and loses a fair coin flip on average.
fn ppm2_ser(signal: f64, background: f64) -> f64 {
    let on = Poisson::new(signal + background).unwrap();
    let off = Poisson::new(background).unwrap();
    let top = (signal + background + 12.0 * (signal + background).sqrt() + 50.0) as u64;
    let mut ser = 0.0;
    for a in 0..top {
        let pa = on.pmf(a);
        let above: f64 = (a + 1..top).map(|b| off.pmf(b)).sum();
        ser += pa * (above + 0.5 * off.pmf(a));
    }
    ser
}

#[test]
fn monte_carlo_matches_exact_ppm_error_rate() {
    let mut cfg = SimConfig::new("ppm2", SchemeSpec::Ppm { order: 2 });
    cfg.photon.p0 = Some(1.5e-8);
    cfg.trials = 400_000;
    cfg.target_errors = u64::MAX;
    cfg.seed = 21;
    let p = &run_ber(&cfg, RunOptions::default()).unwrap()[0];
    let exact = ppm2_ser(p.derived.lambda0, p.derived.lambda_b);
    assert!(p.ber_lo <= exact && exact <= p.ber_hi, "{} [{}, {}] vs {exact}", p.ber, p.ber_lo, p.ber_hi);
}

#[test]
fn sweep_is_reproducible_and_monotone_in_power() {
    let mut cfg = SimConfig::new("eppm", SchemeSpec::Eppm { q: 7, k: 3, lambda: 1 });
    cfg.photon.p0 = Some(1e-8);
    cfg.trials = 100_000;
    cfg.sweep = Some(Sweep {
        parameter: "p0".into(),
        values: vec![4e-9, 8e-9, 16e-9],
    });
    let a = run_ber(&cfg, RunOptions { workers: 1, timing: false }).unwrap();
    let b = run_ber(&cfg, RunOptions { workers: 3, timing: false }).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.bit_errors, x.bits), (y.bit_errors, y.bits));
    }
    assert!(a[0].ber > a[1].ber && a[1].ber > a[2].ber);
}

#[test]
fn config_file_fields_are_checked() {
    let good = r#"{"scheme": {"kind": "eppm", "q": 11, "k": 5, "lambda": 2},
                  "photon": {"e_bit_los": 5e-16, "e_bit_nlos": 5e-16},
                  "channel": {"sigma_over_tb": 0.1, "tau_over_tb": 0.5},
                  "interleaver": {"kind": "random", "seed": 3}}"#;
    SimConfig::from_json(good).unwrap().validate().unwrap();
    for bad in [
        r#"{"scheme": {"kind": "eppm", "q": 11, "k": 5, "lambda": 3}, "photon": {"p0": 1e-8}}"#,
        r#"{"scheme": {"kind": "ook"}, "photon": {"p0": 1e-8}, "trials": 0}"#,
        r#"{"scheme": {"kind": "ook"}}"#,
        r#"{"scheme": {"kind": "ook"}, "photon": {"p0": 1e-8}, "unknown": 1}"#,
    ] {
        let res = SimConfig::from_json(bad).and_then(|c| c.validate());
        assert!(matches!(res, Err(eppm::Error::ConfigInvalid { .. }) | Err(eppm::Error::BadParams { .. })), "{bad}");
    }
}
