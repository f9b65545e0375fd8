use std::fmt::Write as _;

use serde::Serialize;

use crate::modem::{bit_rate_formula, RateKind};

/// Overlapped-pulse bit rates for one `(Q, N, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub q: usize,
    pub levels: usize,
    pub overlap: usize,
    /// `R_b · T_led` for OEPPM, OMEPPM-I and OMEPPM-II.
    pub oeppm: f64,
    pub omeppm_i: f64,
    pub omeppm_ii: f64,
    /// Large-`v` limits: `log2 C(Q, N)` and `log2 C(Q+N, N)`.
    pub limit_i: f64,
    pub limit_ii: f64,
    /// OEPPM bit rate in bits/s.
    pub oeppm_bit_rate: f64,
}

/// Every combination of the given code lengths, level counts and overlaps.
pub fn rate_table(qs: &[usize], levels: &[usize], overlaps: &[usize], t_led: f64) -> Vec<RateRow> {
    let mut rows = Vec::new();
    for &q in qs {
        for &n in levels {
            for &v in overlaps {
                let rel = |kind| bit_rate_formula(kind, q, n, v, t_led) * t_led;
                rows.push(RateRow {
                    q,
                    levels: n,
                    overlap: v,
                    oeppm: rel(RateKind::Oeppm),
                    omeppm_i: rel(RateKind::OmeppmI),
                    omeppm_ii: rel(RateKind::OmeppmII),
                    limit_i: RateKind::OmeppmI.log2_alphabet(q, n),
                    limit_ii: RateKind::OmeppmII.log2_alphabet(q, n),
                    oeppm_bit_rate: bit_rate_formula(RateKind::Oeppm, q, n, v, t_led),
                });
            }
        }
    }
    rows
}

pub fn rate_table_csv(rows: &[RateRow]) -> String {
    let mut s = String::from("q,levels,overlap,oeppm_rb_tled,omeppm_i_rb_tled,omeppm_ii_rb_tled,limit_i,limit_ii,oeppm_bit_rate\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.q, r.levels, r.overlap, r.oeppm, r.omeppm_i, r.omeppm_ii, r.limit_i, r.limit_ii, r.oeppm_bit_rate
        );
    }
    s
}
