//! Cyclic BIBD codes.
//!
//! A `(Q, K, λ)` cyclic difference set `D ⊂ Z_Q` generates `Q` binary
//! codewords of length `Q` and weight `K`: row `m` is the incidence vector of
//! `D + m`, i.e. the `m`-th right cyclic shift of row 0. Any two distinct rows
//! overlap in exactly `λ` chips. Indices are 0-based throughout the crate.

mod catalog;
mod search;

pub use catalog::{Catalog, CatalogEntry, TABLE_I};
pub use search::{find_difference_set, find_difference_set_with_budget, DEFAULT_SEARCH_NODES};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(Q, K, λ)`: code length, code weight, pairwise cross-correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignParams {
    pub q: usize,
    pub k: usize,
    pub lambda: usize,
}

impl DesignParams {
    pub const fn new(q: usize, k: usize, lambda: usize) -> Self {
        Self { q, k, lambda }
    }

    /// Checks `0 < λ < K < Q` and the symmetric-design identity `λ(Q−1) = K(K−1)`.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason| Error::BadParams {
            q: self.q,
            k: self.k,
            lambda: self.lambda,
            reason,
        };
        if !(0 < self.lambda && self.lambda < self.k && self.k < self.q) {
            return Err(bad("need 0 < lambda < K < Q"));
        }
        if self.lambda * (self.q - 1) != self.k * (self.k - 1) {
            return Err(bad("lambda*(Q-1) != K*(K-1)"));
        }
        Ok(())
    }

    pub fn papr(&self) -> Ratio<u64> {
        Ratio::new(self.q as u64, self.k as u64)
    }

    /// Parameters of the complementary design.
    pub fn complement(&self) -> Self {
        Self {
            q: self.q,
            k: self.q - self.k,
            lambda: self.q + self.lambda - 2 * self.k,
        }
    }

    /// Complement-branch weight `Γ = λ/(K−λ)` of the correlation decoder.
    pub fn gamma(&self) -> Ratio<u64> {
        Ratio::new(self.lambda as u64, (self.k - self.lambda) as u64)
    }
}

impl std::fmt::Display for DesignParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.q, self.k, self.lambda)
    }
}

/// Immutable cyclic codebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    params: DesignParams,
    base_set: Vec<usize>,
    rows: Vec<Vec<u8>>,
}

impl Codebook {
    /// Builds the cyclic codebook from a base set and checks the pairwise
    /// correlation property exhaustively.
    pub fn build(params: DesignParams, base_set: &[usize]) -> Result<Self> {
        params.validate()?;
        let mut base: Vec<usize> = base_set.to_vec();
        base.sort_unstable();
        base.dedup();
        if base.len() != params.k || base.len() != base_set.len() {
            return Err(Error::BadParams {
                q: params.q,
                k: params.k,
                lambda: params.lambda,
                reason: "base set must hold K distinct indices",
            });
        }
        if base.iter().any(|&i| i >= params.q) {
            return Err(Error::BadParams {
                q: params.q,
                k: params.k,
                lambda: params.lambda,
                reason: "base set index out of range",
            });
        }
        let cb = Self::from_base_unchecked(params, base);
        cb.check_correlations()?;
        Ok(cb)
    }

    fn from_base_unchecked(params: DesignParams, base_set: Vec<usize>) -> Self {
        let q = params.q;
        let rows = (0..q)
            .map(|m| {
                let mut row = vec![0u8; q];
                for &d in &base_set {
                    row[(d + m) % q] = 1;
                }
                row
            })
            .collect();
        Self {
            params,
            base_set,
            rows,
        }
    }

    fn check_correlations(&self) -> Result<()> {
        let q = self.q();
        for a in 0..q {
            for b in a..q {
                let got = dot(&self.rows[a], &self.rows[b]);
                let expected = if a == b { self.params.k } else { self.params.lambda };
                if got != expected {
                    return Err(Error::NotADifferenceSet {
                        row_a: a,
                        row_b: b,
                        got,
                        expected,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> DesignParams {
        self.params
    }

    pub fn q(&self) -> usize {
        self.params.q
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    pub fn base_set(&self) -> &[usize] {
        &self.base_set
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn row(&self, m: usize) -> &[u8] {
        &self.rows[m]
    }

    /// Chip indices of the pulses in codeword `m`, ascending.
    pub fn support(&self, m: usize) -> Vec<usize> {
        let q = self.q();
        let mut s: Vec<usize> = self.base_set.iter().map(|&d| (d + m) % q).collect();
        s.sort_unstable();
        s
    }

    /// Codebook of the complementary rows `1 − c_m`.
    pub fn complement(&self) -> Codebook {
        let params = self.params.complement();
        let q = self.q();
        let base: Vec<usize> = (0..q).filter(|i| !self.base_set.contains(i)).collect();
        Self::from_base_unchecked(params, base)
    }

    pub fn papr(&self) -> Ratio<u64> {
        self.params.papr()
    }

    /// `Σ_j c_mj` for each column; all equal `K` for a cyclic design.
    pub fn column_sums(&self) -> Vec<usize> {
        let q = self.q();
        (0..q)
            .map(|i| self.rows.iter().map(|r| r[i] as usize).sum())
            .collect()
    }
}

pub(crate) fn dot(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).map(|(&x, &y)| (x & y) as usize).sum()
}

/// Convenience: codebook from the shipped catalog.
pub fn shipped(q: usize, k: usize, lambda: usize) -> Result<Codebook> {
    Catalog::shipped().codebook(DesignParams::new(q, k, lambda))
}
