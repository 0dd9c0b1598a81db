//! The reset chain on `{1, .., n}` that dominates how often the running
//! maximum of the appeared counts can increase.
//!
//! From state `j` the chain moves to `j + 1` with probability `(n - j) / n`
//! and back to `1` with probability `j / n`. Its return time to `1` is the
//! waiting time for a coincidence in the birthday problem with `n` days.
//!
//! Convention: in this module "maximum" always refers to *appeared* counts
//! `a_i = m - X_i`, i.e. how many copies of each type have been drawn. The
//! rest of the crate tracks remaining counts `X_i`; [`appeared_maximum`] is the
//! one place the two views are converted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{CountsState, DeckSpec};
use crate::numeric::KahanSum;
use crate::rng::RngStream;
use crate::tracked::CountTree;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub n: u64,
    /// `E[T]`, mean return time to state 1.
    pub et: f64,
    /// `E[T^2]`.
    pub et2: f64,
    /// Returns to state 1 observed in `steps` simulated steps.
    pub excursions: Option<u64>,
    pub steps: Option<u64>,
}

impl ChainStats {
    /// `excursions * E[T] / steps`, which tends to 1 by the renewal theorem.
    pub fn renewal_ratio(&self) -> Option<f64> {
        match (self.excursions, self.steps) {
            (Some(e), Some(k)) if k > 0 => Some(e as f64 * self.et / k as f64),
            _ => None,
        }
    }
}

/// `prod_{i=1}^{s} (1 - i/n)`: the probability the chain climbs for `s`
/// consecutive steps, i.e. `P(T > s)`. Zero once `s >= n`.
pub fn return_time_tail(n: u64, s: u64) -> f64 {
    if s >= n {
        return if s == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let ln: KahanSum = (1..=s).map(|i| (-(i as f64) / nf).ln_1p()).collect();
    ln.total().exp()
}

/// `E[T] = sum_s P(T > s)` and `E[T^2] = sum_s (2s + 1) P(T > s)`, summed
/// exactly over the finite support.
pub fn return_time_moments(n: u64) -> Result<ChainStats> {
    if n == 0 {
        return Err(Error::InvalidParameter("chain needs n >= 1".into()));
    }
    let nf = n as f64;
    let mut et = KahanSum::default();
    let mut et2 = KahanSum::default();
    let mut ln_tail = 0.0f64;
    let mut s = 0u64;
    while s < n {
        let tail = ln_tail.exp();
        if tail < 1e-300 {
            break;
        }
        et.add(tail);
        et2.add((2 * s + 1) as f64 * tail);
        s += 1;
        ln_tail += (-(s as f64) / nf).ln_1p();
    }
    Ok(ChainStats {
        n,
        et: et.total(),
        et2: et2.total(),
        excursions: None,
        steps: None,
    })
}

/// Runs the chain from state 1 for `steps` steps and counts returns to 1.
pub fn simulate_excursions(n: u64, steps: u64, rng: &mut RngStream) -> Result<ChainStats> {
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    let mut stats = return_time_moments(n)?;
    let mut j = 1u64;
    let mut returns = 0u64;
    for _ in 0..steps {
        if rng.below(n) < j {
            returns += 1;
            j = 1;
        } else {
            j += 1;
        }
    }
    stats.excursions = Some(returns);
    stats.steps = Some(steps);
    Ok(stats)
}

/// `(k, j)`: the largest appeared count `k = m - min_i X_i` and the number `j`
/// of types attaining it.
pub fn appeared_maximum(state: &CountsState) -> (u64, u64) {
    let m = state.spec().m();
    let least = state.counts().iter().copied().min().unwrap_or(m);
    let ties = state.counts().iter().filter(|&&c| c == least).count() as u64;
    (m - least, ties)
}

/// Probability the next draw raises the maximal appeared count when `j`
/// types share the maximum `k`: `(m - k) j / (nm - drawn)`, where
/// `nm - drawn` is the number of cards left. Returned with the bound `j / n`.
pub fn max_increase_probability(state: &CountsState, j: u64) -> Result<(f64, f64)> {
    let spec = state.spec();
    if j > spec.n() {
        return Err(Error::OutOfRange {
            what: "maximal types",
            value: j,
            lo: 0,
            hi: spec.n(),
        });
    }
    let bound = j as f64 / spec.n() as f64;
    if j == 0 {
        return Ok((0.0, 0.0));
    }
    if state.is_empty() {
        return Err(Error::EmptyDeck);
    }
    let (k, _) = appeared_maximum(state);
    let drawn = spec.total() - state.remaining();
    let left = spec.total() - drawn;
    Ok(((spec.m() - k) as f64 * j as f64 / left as f64, bound))
}

/// `j` types have appeared `k` times and every other type `k - 1` times.
pub fn saturated_state(spec: DeckSpec, k: u64, j: u64) -> Result<CountsState> {
    if k == 0 || k > spec.m() {
        return Err(Error::OutOfRange {
            what: "appeared maximum",
            value: k,
            lo: 1,
            hi: spec.m(),
        });
    }
    if j == 0 || j > spec.n() {
        return Err(Error::OutOfRange {
            what: "maximal types",
            value: j,
            lo: 1,
            hi: spec.n(),
        });
    }
    let m = spec.m();
    let counts = (0..spec.n())
        .map(|i| if i < j { m - k } else { m - k + 1 })
        .collect();
    CountsState::from_counts(spec, counts)
}

/// Per-`j` tallies from full simulated games: how often the deck sat with
/// `j` maximal types and how often the next draw raised the maximum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncreaseTally {
    pub j: u64,
    pub visits: u64,
    pub increases: u64,
}

impl IncreaseTally {
    pub fn frequency(&self) -> f64 {
        self.increases as f64 / self.visits as f64
    }
}

pub fn increase_profile(spec: DeckSpec, games: u64, seed: u64) -> Vec<IncreaseTally> {
    let n = spec.n() as usize;
    let mut tallies: Vec<IncreaseTally> = (0..=n as u64)
        .map(|j| IncreaseTally {
            j,
            ..Default::default()
        })
        .collect();
    for g in 0..games {
        let mut rng = RngStream::new(seed, g);
        let mut deck = CountTree::new(spec);
        let mut appeared = vec![0u64; n];
        let (mut k, mut j) = (0u64, n);
        while deck.remaining() > 0 {
            let i = deck.locate(rng.below(deck.remaining()));
            deck.remove(i);
            appeared[i] += 1;
            let tally = &mut tallies[j];
            tally.visits += 1;
            if appeared[i] > k {
                tally.increases += 1;
                k = appeared[i];
                j = 1;
            } else if appeared[i] == k {
                j += 1;
            }
        }
    }
    tallies.retain(|t| t.visits > 0);
    tallies
}
