use super::DesignParams;
use crate::error::{Error, Result};

/// Node budget used by [`find_difference_set`]. Enough for every
/// `(Q, K, λ)` in the catalog with `Q ≤ 100`; (183,14,1) needs ~4·10^8.
pub const DEFAULT_SEARCH_NODES: u64 = 200_000_000;

/// Backtracking search for a cyclic difference set.
///
/// Each nonzero residue must appear exactly `λ ≥ 1` times as a difference, so
/// some translate of any solution contains `{0, 1}`; the search fixes those
/// two elements and extends in increasing order. The first set found is the
/// lexicographically smallest solution containing `{0, 1}`, which is also the
/// lexicographically minimal translate of itself. The result is deterministic.
pub fn find_difference_set(params: DesignParams) -> Result<Vec<usize>> {
    find_difference_set_with_budget(params, DEFAULT_SEARCH_NODES)
}

pub fn find_difference_set_with_budget(params: DesignParams, max_nodes: u64) -> Result<Vec<usize>> {
    let not_found = Error::NoDesignFound {
        q: params.q,
        k: params.k,
        lambda: params.lambda,
    };
    if params.validate().is_err() {
        return Err(not_found);
    }
    let q = params.q;
    let mut search = Search {
        q,
        k: params.k,
        lambda: params.lambda,
        counts: vec![0; q],
        set: vec![0, 1],
        nodes: 0,
        max_nodes,
    };
    search.counts[1] = 1;
    search.counts[q - 1] = 1;
    if search.extend() {
        Ok(search.set)
    } else {
        Err(not_found)
    }
}

struct Search {
    q: usize,
    k: usize,
    lambda: usize,
    /// `counts[d]` = multiplicity of difference `d` among chosen elements.
    counts: Vec<usize>,
    set: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
}

impl Search {
    fn extend(&mut self) -> bool {
        self.nodes += 1;
        if self.set.len() == self.k {
            return true;
        }
        let last = *self.set.last().expect("set starts non-empty");
        let need = self.k - self.set.len();
        for x in last + 1..=self.q - need {
            if self.nodes > self.max_nodes {
                return false;
            }
            let (placed, ok) = self.place(x);
            if ok {
                self.set.push(x);
                if self.extend() {
                    return true;
                }
                self.set.pop();
            }
            self.unplace(x, placed);
        }
        false
    }

    /// Adds differences of `x` against the set until one overflows `λ`.
    /// Returns how many set elements were accounted for and whether all
    /// counts stayed within `λ`.
    fn place(&mut self, x: usize) -> (usize, bool) {
        for (i, &y) in self.set.iter().enumerate() {
            let d = x - y;
            self.counts[d] += 1;
            self.counts[self.q - d] += 1;
            if self.counts[d] > self.lambda || self.counts[self.q - d] > self.lambda {
                return (i + 1, false);
            }
        }
        (self.set.len(), true)
    }

    fn unplace(&mut self, x: usize, placed: usize) {
        for &y in &self.set[..placed] {
            let d = x - y;
            self.counts[d] -= 1;
            self.counts[self.q - d] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent check: every nonzero residue appears exactly λ times.
    fn differences_ok(q: usize, lambda: usize, set: &[usize]) -> bool {
        let mut c = vec![0; q];
        for &a in set {
            for &b in set {
                if a != b {
                    c[(a + q - b) % q] += 1;
                }
            }
        }
        c[1..].iter().all(|&x| x == lambda)
    }

    #[test]
    fn fano() {
        let s = find_difference_set(DesignParams::new(7, 3, 1)).unwrap();
        assert_eq!(s.len(), 3);
        assert!(differences_ok(7, 1, &s));
        super::super::Codebook::build(DesignParams::new(7, 3, 1), &s).unwrap();
    }

    #[test]
    fn thirteen_four_one() {
        let s = find_difference_set(DesignParams::new(13, 4, 1)).unwrap();
        assert!(differences_ok(13, 1, &s));
    }

    #[test]
    fn precondition_rejects() {
        assert!(matches!(
            find_difference_set(DesignParams::new(8, 3, 1)),
            Err(Error::NoDesignFound { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let p = DesignParams::new(19, 9, 4);
        let a = find_difference_set(p).unwrap();
        let b = find_difference_set(p).unwrap();
        assert_eq!(a, b);
        assert!(differences_ok(19, 4, &a));
    }

    #[test]
    fn budget_exhaustion() {
        assert!(matches!(
            find_difference_set_with_budget(DesignParams::new(35, 17, 8), 1000),
            Err(Error::NoDesignFound { .. })
        ));
    }

    #[test]
    fn result_is_minimal_translate() {
        let q = 21;
        let s = find_difference_set(DesignParams::new(q, 5, 1)).unwrap();
        for t in 0..q {
            let mut r: Vec<usize> = s.iter().map(|&x| (x + t) % q).collect();
            r.sort_unstable();
            if r[0] == 0 {
                assert!(s <= r);
            }
        }
    }
}
