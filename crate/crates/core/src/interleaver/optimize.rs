//! Interleaver search: lexicographically minimise `(b_max, multiplicity)`.
//!
//! Annealing over transpositions always runs and provides the incumbent.
//! For short codes an exact depth-first branch and bound then either proves
//! it optimal or replaces it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bound::{lower_bound_ps, GaussianTail, LowerBound};
use super::{distance_metric, interference_matrix, worst_interference, TIE_TOLERANCE};
use crate::channel::PhotonModel;
use crate::codes::Codebook;
use crate::modem::Permutation;

/// Largest code length searched exhaustively by default.
pub const EXACT_LIMIT: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBudget {
    /// Branch-and-bound node limit.
    pub max_nodes: u64,
    /// Annealing steps per restart.
    pub anneal_steps: u64,
    pub restarts: usize,
    pub seed: u64,
    /// Run the exact search when `Q ≤ exact_limit`.
    pub exact_limit: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_nodes: 200_000_000,
            anneal_steps: 20_000,
            restarts: 8,
            seed: 1,
            exact_limit: EXACT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Exact,
    Annealing,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeReport {
    pub code: String,
    pub method: SearchMethod,
    /// The exact search finished, so the result is optimal.
    pub proven_optimal: bool,
    pub budget_exhausted: bool,
    pub permutation: Vec<usize>,
    pub b_max: f64,
    pub b_max_count: usize,
    /// Smallest expected gap in units of `Λ0`, and its multiplicity.
    pub d_min: f64,
    pub m_dmin: usize,
    pub identity_d_min: f64,
    pub identity_m_dmin: usize,
    /// Gap of the ideal interleaver in units of `Λ0`.
    pub ideal_d: f64,
    pub gap_to_ideal: f64,
    pub bound_ps: Option<f64>,
    pub nodes: u64,
    pub anneal_steps: u64,
}

impl OptimizeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, Copy)]
struct Energy {
    b_max: f64,
    count: usize,
}

impl Energy {
    fn of(cb: &Codebook, p: &Permutation, h: &[f64], scale: f64) -> Self {
        let b = interference_matrix(cb, p, h);
        let (b_max, count) = worst_interference(&b, cb.q(), scale);
        Self { b_max, count }
    }

    /// Strictly better in the lexicographic order, up to `tol` on `b_max`.
    fn better(&self, other: &Energy, tol: f64) -> bool {
        self.b_max < other.b_max - tol || ((self.b_max - other.b_max).abs() <= tol && self.count < other.count)
    }
}

/// Finds an interleaver for cyclic taps `h` (length `Q`). The returned
/// permutation is never worse than the identity.
pub fn optimize_permutation(
    cb: &Codebook,
    h: &[f64],
    budget: &SearchBudget,
    photon: Option<&PhotonModel>,
) -> (Permutation, OptimizeReport) {
    let q = cb.q();
    assert_eq!(h.len(), q, "taps must be folded to the code length");
    let scale: f64 = h.iter().sum();
    let tol = TIE_TOLERANCE * scale.max(f64::MIN_POSITIVE);

    let identity = Permutation::identity(q);
    let mut best = identity.clone();
    let mut best_e = Energy::of(cb, &best, h, scale);

    let results: Vec<(Energy, Permutation)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| anneal(cb, h, budget, r as u64, scale))
        .collect();
    for (e, p) in results {
        let tie = !e.better(&best_e, tol) && !best_e.better(&e, tol);
        if e.better(&best_e, tol) || (tie && p.forward() < best.forward()) {
            best = p;
            best_e = e;
        }
    }

    let mut method = SearchMethod::Annealing;
    let mut proven = false;
    let mut exhausted = false;
    let mut nodes = 0;
    if q <= budget.exact_limit {
        method = SearchMethod::Exact;
        let mut bb = BranchAndBound::new(cb, h, budget.max_nodes, best_e, best.clone(), tol);
        bb.run();
        nodes = bb.nodes;
        exhausted = bb.exhausted;
        proven = !bb.exhausted;
        best = bb.best;
        best_e = bb.best_e;
    }

    let dist = distance_metric(cb, &best, h);
    let id = distance_metric(cb, &identity, h);
    let ideal_d = LowerBound::ideal_distance(cb, h);
    let report = OptimizeReport {
        code: cb.params().to_string(),
        method,
        proven_optimal: proven,
        budget_exhausted: exhausted,
        permutation: best.forward().to_vec(),
        b_max: best_e.b_max,
        b_max_count: best_e.count,
        d_min: dist.d_min,
        m_dmin: dist.m_dmin,
        identity_d_min: id.d_min,
        identity_m_dmin: id.m_dmin,
        ideal_d,
        gap_to_ideal: ideal_d - dist.d_min,
        bound_ps: photon.map(|ph| lower_bound_ps(cb, h, ph, &GaussianTail).ps),
        nodes,
        anneal_steps: budget.anneal_steps * budget.restarts as u64,
    };
    (best, report)
}

fn anneal(cb: &Codebook, h: &[f64], budget: &SearchBudget, stream: u64, scale: f64) -> (Energy, Permutation) {
    let q = cb.q();
    let tol = TIE_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    rng.set_stream(stream);
    let mut cur = if stream == 0 {
        Permutation::identity(q)
    } else {
        Permutation::random(q, &mut rng)
    };
    let mut cur_e = Energy::of(cb, &cur, h, scale);
    let mut best = cur.clone();
    let mut best_e = cur_e;
    if q < 2 || scale == 0.0 {
        return (best_e, best);
    }
    // temperatures in units of the ISI mass
    let t0 = 0.5 * scale;
    let t_end = 1e-4 * scale;
    let steps = budget.anneal_steps.max(1);
    let cool = (t_end / t0).powf(1.0 / steps as f64);
    let count_weight = scale / (q * q) as f64 * 0.1;
    let mut t = t0;
    for _ in 0..steps {
        let a = rng.random_range(0..q);
        let mut b = rng.random_range(0..q - 1);
        if b >= a {
            b += 1;
        }
        cur.swap(a, b);
        let e = Energy::of(cb, &cur, h, scale);
        let delta = if (e.b_max - cur_e.b_max).abs() <= tol {
            (e.count as f64 - cur_e.count as f64) * count_weight
        } else {
            e.b_max - cur_e.b_max
        };
        if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
            cur_e = e;
            if e.better(&best_e, tol) {
                best = cur.clone();
                best_e = e;
            }
        } else {
            cur.swap(a, b);
        }
        t *= cool;
    }
    (best_e, best)
}

/// Assigns chips to positions `0, 1, …` in order. Position 0 always gets
/// chip 0: shifting positions cyclically leaves every `A_ℓ` unchanged.
struct BranchAndBound<'a> {
    h: &'a [f64],
    q: usize,
    /// `Σ_{ℓ≠0} h_ℓ`.
    isi: f64,
    k: usize,
    lambda: usize,
    max_nodes: u64,
    nodes: u64,
    exhausted: bool,
    tol: f64,
    best: Permutation,
    best_e: Energy,
    forward: Vec<usize>,
    used: Vec<bool>,
    /// one partial `B` per depth
    stack: Vec<Vec<f64>>,
    /// `j ∈ a − D` for each chip `a`
    rows_with: Vec<Vec<usize>>,
}

impl<'a> BranchAndBound<'a> {
    fn new(cb: &'a Codebook, h: &'a [f64], max_nodes: u64, best_e: Energy, best: Permutation, tol: f64) -> Self {
        let q = cb.q();
        let rows_with = (0..q)
            .map(|a| (0..q).filter(|&j| cb.row(j)[a] == 1).collect())
            .collect();
        Self {
            h,
            q,
            isi: h[1..].iter().sum(),
            k: cb.k(),
            lambda: cb.lambda(),
            max_nodes,
            nodes: 0,
            exhausted: false,
            tol,
            best,
            best_e,
            forward: Vec::with_capacity(q),
            used: vec![false; q],
            stack: vec![vec![0.0; q * q]; q + 1],
            rows_with,
        }
    }

    fn run(&mut self) {
        if self.q == 1 {
            return;
        }
        self.forward.push(0);
        self.used[0] = true;
        self.descend(1);
    }

    fn add_pair(b: &mut [f64], q: usize, rows_with: &[Vec<usize>], a: usize, c: usize, w: f64) {
        if w == 0.0 {
            return;
        }
        for &j in &rows_with[a] {
            for &m in &rows_with[c] {
                b[j * q + m] += w;
            }
        }
    }

    /// Lower bound on the final `b_max` below the current node.
    fn bound(&self, b: &[f64]) -> f64 {
        let q = self.q;
        let trace_total = (self.lambda * q) as f64 * self.isi;
        let partial_trace: f64 = (0..q).map(|m| b[m * q + m]).sum();
        let cap = self.k as f64 * self.isi;
        let mut lb = f64::NEG_INFINITY;
        for m in 0..q {
            let diag_max = cap.min(trace_total - partial_trace + b[m * q + m]);
            for j in 0..q {
                if j != m {
                    lb = lb.max(b[j * q + m] - diag_max);
                }
            }
        }
        lb
    }

    fn descend(&mut self, depth: usize) {
        let q = self.q;
        if depth == q {
            let b = &self.stack[depth - 1];
            let (b_max, count) = worst_interference(b, q, self.isi + self.h[0]);
            let e = Energy { b_max, count };
            if e.better(&self.best_e, self.tol) {
                self.best_e = e;
                self.best = Permutation::new(self.forward.clone()).expect("search builds bijections");
            }
            return;
        }
        for a in 0..q {
            if self.used[a] {
                continue;
            }
            if self.nodes >= self.max_nodes {
                self.exhausted = true;
                return;
            }
            self.nodes += 1;
            let (lower, upper) = self.stack.split_at_mut(depth);
            let cur = &mut upper[0];
            cur.copy_from_slice(&lower[depth - 1]);
            for (p, &c) in self.forward.iter().enumerate() {
                let gap = depth - p;
                // chip a sits ℓ = gap after chip c, and c sits Q − gap after a
                Self::add_pair(cur, q, &self.rows_with, a, c, self.h[gap]);
                Self::add_pair(cur, q, &self.rows_with, c, a, self.h[q - gap]);
            }
            if self.bound(&self.stack[depth]) > self.best_e.b_max + self.tol {
                continue;
            }
            self.forward.push(a);
            self.used[a] = true;
            self.descend(depth + 1);
            self.forward.pop();
            self.used[a] = false;
            if self.exhausted {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::shipped;

    fn taps(q: usize, head: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; q];
        h[..head.len()].copy_from_slice(head);
        h
    }

    fn quick() -> SearchBudget {
        SearchBudget {
            anneal_steps: 2000,
            restarts: 4,
            ..SearchBudget::default()
        }
    }

    #[test]
    fn ideal_channel_keeps_identity() {
        let cb = shipped(7, 3, 1).unwrap();
        let (p, r) = optimize_permutation(&cb, &taps(7, &[1.0]), &quick(), None);
        assert!(p.is_identity());
        assert!(r.proven_optimal);
    }

    #[test]
    fn exact_beats_random_sampling() {
        let cb = shipped(7, 3, 1).unwrap();
        let h = taps(7, &[0.8, 0.2]);
        let (p, r) = optimize_permutation(&cb, &h, &quick(), None);
        assert!(r.proven_optimal);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let x = Permutation::random(7, &mut rng);
            assert!(distance_metric(&cb, &x, &h).d_min <= r.d_min + 1e-12);
        }
        assert!(r.d_min >= r.identity_d_min);
        assert_eq!(distance_metric(&cb, &p, &h).d_min, r.d_min);
    }

    #[test]
    fn exact_matches_enumeration() {
        // all 6! permutations with f(0) = 0
        let cb = shipped(7, 3, 1).unwrap();
        let h = taps(7, &[0.5, 0.3, 0.0, 0.15, 0.05]);
        let (_, r) = optimize_permutation(&cb, &h, &quick(), None);
        let mut best = (f64::INFINITY, usize::MAX);
        let mut rest: Vec<usize> = (1..7).collect();
        permute(&mut rest, 0, &mut |tail| {
            let mut f = vec![0];
            f.extend_from_slice(tail);
            let e = Energy::of(&cb, &Permutation::new(f).unwrap(), &h, 1.0);
            if e.b_max < best.0 - 1e-9 || ((e.b_max - best.0).abs() <= 1e-9 && e.count < best.1) {
                best = (e.b_max, e.count);
            }
        });
        assert!((r.b_max - best.0).abs() < 1e-9);
        assert_eq!(r.b_max_count, best.1);
    }

    fn permute(v: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            visit(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, visit);
            v.swap(k, i);
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let cb = shipped(11, 5, 2).unwrap();
        let h = taps(11, &[0.5, 0.3, 0.2]);
        let budget = SearchBudget {
            max_nodes: 50,
            ..quick()
        };
        let (_, r) = optimize_permutation(&cb, &h, &budget, None);
        assert!(r.budget_exhausted);
        assert!(!r.proven_optimal);
        assert!(r.d_min >= r.identity_d_min);
    }

    #[test]
    fn annealing_improves_long_code() {
        let cb = shipped(19, 9, 4).unwrap();
        let h = taps(19, &[0.5, 0.3, 0.2]);
        let (p, r) = optimize_permutation(&cb, &h, &quick(), None);
        assert_eq!(r.method, SearchMethod::Annealing);
        assert!(r.d_min > r.identity_d_min);
        for ell in 1..19 {
            let a = super::super::compute_a(&cb, &p, ell);
            assert_eq!((0..19).map(|i| a[i][i]).sum::<u32>(), 4 * 19);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cb = shipped(19, 9, 4).unwrap();
        let h = taps(19, &[0.6, 0.25, 0.15]);
        let (a, _) = optimize_permutation(&cb, &h, &quick(), None);
        let (b, _) = optimize_permutation(&cb, &h, &quick(), None);
        assert_eq!(a, b);
    }
}
