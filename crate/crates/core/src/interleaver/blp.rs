//! The interleaver design problem as a binary linear program.
//!
//! `x[i][a] = 1` puts chip `a` at position `i`. The interference of a pair
//! is quadratic in `x`; every product `x[i][a]·x[p][c]` is replaced by a
//! binary `y` with `y ≤ x[i][a]`, `y ≤ x[p][c]`, `y ≥ x[i][a] + x[p][c] − 1`.
//! Stage one minimises `t` subject to `B[j][m] − B[m][m] ≤ t` for every
//! ordered pair `m ≠ j`; stage two fixes `t` and minimises the number of
//! pairs that reach it.
//!
//! The program is emitted in CPLEX LP text for an external solver and can
//! be evaluated at a given permutation.

use std::fmt::Write as _;

use crate::codes::Codebook;
use crate::modem::Permutation;

#[derive(Debug, Clone)]
pub struct BinaryProgram {
    q: usize,
    /// One sparse row `Σ coef·y` per ordered pair `(m, j)`.
    pair_rows: Vec<((usize, usize), Vec<(usize, f64)>)>,
}

/// Values of the program at one permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramCheck {
    /// Assignment and linearisation constraints all hold.
    pub feasible: bool,
    /// `B[j][m] − B[m][m]` per ordered pair `(m, j)`.
    pub pair_values: Vec<((usize, usize), f64)>,
    /// Smallest feasible `t`.
    pub t: f64,
}

impl BinaryProgram {
    /// `h` are cyclic taps of length `Q`.
    pub fn build(cb: &Codebook, h: &[f64]) -> Self {
        let q = cb.q();
        let mut pair_rows = Vec::new();
        for m in 0..q {
            for j in 0..q {
                if j == m {
                    continue;
                }
                let mut row = Vec::new();
                for i in 0..q {
                    for p in 0..q {
                        if p == i {
                            continue;
                        }
                        let w = h[(i + q - p) % q];
                        if w == 0.0 {
                            continue;
                        }
                        for a in 0..q {
                            for c in 0..q {
                                if a == c {
                                    continue;
                                }
                                let on = cb.row(m)[c] as f64;
                                let coef = w * on * (cb.row(j)[a] as f64 - cb.row(m)[a] as f64);
                                if coef != 0.0 {
                                    row.push((Self::y_index(q, i, a, p, c), coef));
                                }
                            }
                        }
                    }
                }
                pair_rows.push(((m, j), row));
            }
        }
        Self { q, pair_rows }
    }

    fn y_index(q: usize, i: usize, a: usize, p: usize, c: usize) -> usize {
        ((i * q + a) * q + p) * q + c
    }

    fn y_name(&self, idx: usize) -> String {
        let q = self.q;
        let c = idx % q;
        let p = (idx / q) % q;
        let a = (idx / (q * q)) % q;
        let i = idx / (q * q * q);
        format!("y_{i}_{a}_{p}_{c}")
    }

    pub fn num_pairs(&self) -> usize {
        self.pair_rows.len()
    }

    /// Stage-one program in LP text.
    pub fn to_lp(&self) -> String {
        let q = self.q;
        let mut s = String::from("Minimize\n obj: t\nSubject To\n");
        for i in 0..q {
            let terms: Vec<String> = (0..q).map(|a| format!("x_{i}_{a}")).collect();
            let _ = writeln!(s, " pos_{i}: {} = 1", terms.join(" + "));
        }
        for a in 0..q {
            let terms: Vec<String> = (0..q).map(|i| format!("x_{i}_{a}")).collect();
            let _ = writeln!(s, " chip_{a}: {} = 1", terms.join(" + "));
        }
        let mut used = std::collections::BTreeSet::new();
        for ((m, j), row) in &self.pair_rows {
            let mut line = format!(" pair_{m}_{j}:");
            for &(idx, coef) in row {
                used.insert(idx);
                let _ = write!(line, " {:+e} {}", coef, self.y_name(idx));
            }
            let _ = writeln!(s, "{line} - t <= 0");
        }
        for &idx in &used {
            let name = self.y_name(idx);
            let parts: Vec<&str> = name.split('_').collect();
            let (xa, xb) = (format!("x_{}_{}", parts[1], parts[2]), format!("x_{}_{}", parts[3], parts[4]));
            let _ = writeln!(s, " {name}_a: {name} - {xa} <= 0");
            let _ = writeln!(s, " {name}_b: {name} - {xb} <= 0");
            let _ = writeln!(s, " {name}_c: {name} - {xa} - {xb} >= -1");
        }
        s.push_str("Bounds\n t free\nBinary\n");
        for i in 0..q {
            for a in 0..q {
                let _ = writeln!(s, " x_{i}_{a}");
            }
        }
        for &idx in &used {
            let _ = writeln!(s, " {}", self.y_name(idx));
        }
        s.push_str("End\n");
        s
    }

    /// Evaluates the program at `p`, setting `x` from the permutation and
    /// every `y` from the linearisation constraints alone.
    pub fn check(&self, p: &Permutation) -> ProgramCheck {
        let q = self.q;
        let f = p.forward();
        let x = |i: usize, a: usize| u8::from(f[i] == a);
        let mut feasible = (0..q).all(|i| (0..q).map(|a| x(i, a) as usize).sum::<usize>() == 1)
            && (0..q).all(|a| (0..q).map(|i| x(i, a) as usize).sum::<usize>() == 1);
        let mut pair_values = Vec::with_capacity(self.pair_rows.len());
        let mut t = f64::NEG_INFINITY;
        for (pair, row) in &self.pair_rows {
            let mut v = 0.0;
            for &(idx, coef) in row {
                let c = idx % q;
                let pp = (idx / q) % q;
                let a = (idx / (q * q)) % q;
                let i = idx / (q * q * q);
                let (xa, xb) = (x(i, a), x(pp, c));
                // the only binary y satisfying all three inequalities
                let y = u8::from(xa + xb >= 2);
                feasible &= y <= xa && y <= xb && y + 1 >= xa + xb;
                v += coef * y as f64;
            }
            t = t.max(v);
            pair_values.push((*pair, v));
        }
        ProgramCheck {
            feasible,
            pair_values,
            t,
        }
    }
}
