use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Symbol-length chip interleaver.
///
/// Interleaving maps chip `j` of the output to chip `forward[j]` of the
/// input, i.e. the row vector product `x π` with `π[forward[j], j] = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (j, &f) in forward.iter().enumerate() {
            if f >= n {
                return Err(Error::BadPermutation(format!("index {f} out of range 0..{n}")));
            }
            if inverse[f] != usize::MAX {
                return Err(Error::BadPermutation(format!("index {f} repeated")));
            }
            inverse[f] = j;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let forward: Vec<usize> = (0..n).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    pub fn reversal(n: usize) -> Self {
        Self::new((0..n).rev().collect()).expect("reversal is a bijection")
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut forward: Vec<usize> = (0..n).collect();
        forward.shuffle(rng);
        Self::new(forward).expect("shuffle is a bijection")
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse_map(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &f)| i == f)
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Swaps two output positions.
    pub fn swap(&mut self, a: usize, b: usize) {
        self.forward.swap(a, b);
        self.inverse[self.forward[a]] = a;
        self.inverse[self.forward[b]] = b;
    }

    pub fn apply<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        Ok(self.forward.iter().map(|&f| x[f]).collect())
    }

    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        Ok(self.inverse.iter().map(|&i| x[i]).collect())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Whitespace-separated forward map.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.forward.iter().map(|i| i.to_string()).collect();
        parts.join(" ")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let forward = text
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::BadPermutation(format!("`{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(forward)
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}
