use std::fmt::Write as _;

use super::sim::BerPoint;

pub const CSV_HEADER: &str = "sweep_name,sweep_value,ber,ber_ci95,ser,analytic_ser,lower_bound,bits,wall_time_s";

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// One row per point under the fixed header.
pub fn points_to_csv(sweep_name: &str, points: &[BerPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{:e},{},{},{},{}",
            sweep_name,
            p.sweep_value,
            p.ber,
            p.ber_ci95(),
            p.ser,
            opt(p.analytic_ser),
            opt(p.lower_bound),
            p.bits,
            opt(p.wall_time),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Derived;

    #[test]
    fn csv_layout() {
        let p = BerPoint {
            sweep_value: 0.25,
            bit_errors: 3,
            bits: 1000,
            ber: 0.003,
            ber_lo: 0.001,
            ber_hi: 0.009,
            symbol_errors: 2,
            symbols: 500,
            ser: 0.004,
            analytic_ser: None,
            lower_bound: Some(1e-5),
            wall_time: None,
            derived: Derived {
                bits_per_symbol: 2,
                bit_rate: 2e8,
                symbol_time: 1e-8,
                chip_time: 1e-9,
                lambda0: 1.0,
                lambda_b: 0.1,
            },
            interleaver: None,
        };
        let csv = points_to_csv("p0", &[p]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "p0,0.25,3e-3,4e-3,4e-3,,1e-5,1000,");
    }
}
