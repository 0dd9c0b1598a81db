//! Deck specification, remaining-count state and the draw process.
//!
//! The deck is tracked only through its remaining counts. Revealing the top
//! card of a uniformly shuffled deck is the same as drawing type `i` with
//! probability `counts[i] / t`, so no permutation is ever materialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest supported deck size `n * m`.
pub const MAX_DECK_SIZE: u64 = 1 << 40;

/// A deck of `n` distinct types with `m` copies each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeckSpec {
    n: u64,
    m: u64,
}

impl DeckSpec {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSpec { n, m });
        }
        match n.checked_mul(m) {
            Some(total) if total <= MAX_DECK_SIZE => Ok(Self { n, m }),
            _ => Err(Error::DeckTooLarge { n, m }),
        }
    }

    /// Number of distinct types.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Copies per type.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Total number of cards, `n * m`.
    pub fn total(&self) -> u64 {
        self.n * self.m
    }

    /// Fraction of the deck still present when `t` cards remain.
    pub fn fraction_remaining(&self, t: u64) -> f64 {
        t as f64 / self.total() as f64
    }
}

/// Remaining copies of each type together with the number of cards left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CountsState {
    spec: DeckSpec,
    counts: Vec<u64>,
    t: u64,
}

impl CountsState {
    /// The full deck: every type has `m` copies left.
    pub fn new(spec: DeckSpec) -> Self {
        let n = usize::try_from(spec.n()).expect("type count exceeds address space");
        Self {
            spec,
            counts: vec![spec.m(); n],
            t: spec.total(),
        }
    }

    /// Builds a state from explicit remaining counts, checking `0 <= c <= m`.
    pub fn from_counts(spec: DeckSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() as u64 != spec.n() {
            return Err(Error::InvalidParameter(format!(
                "expected {} counts, got {}",
                spec.n(),
                counts.len()
            )));
        }
        if let Some(&bad) = counts.iter().find(|&&c| c > spec.m()) {
            return Err(Error::OutOfRange {
                what: "remaining count",
                value: bad,
                lo: 0,
                hi: spec.m(),
            });
        }
        let t = counts.iter().sum();
        Ok(Self { spec, counts, t })
    }

    pub fn spec(&self) -> DeckSpec {
        self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Cards remaining.
    pub fn remaining(&self) -> u64 {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.t == 0
    }

    /// `t / (nm)`.
    pub fn fraction_remaining(&self) -> f64 {
        self.spec.fraction_remaining(self.t)
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Removes one card of type `i`.
    pub fn remove(&mut self, i: usize) -> Result<()> {
        match self.counts.get_mut(i) {
            Some(c) if *c > 0 => {
                *c -= 1;
                self.t -= 1;
                Ok(())
            }
            Some(_) => Err(Error::InvalidParameter(format!(
                "type {i} has no cards left"
            ))),
            None => Err(Error::OutOfRange {
                what: "type index",
                value: i as u64,
                lo: 0,
                hi: self.spec.n() - 1,
            }),
        }
    }

    /// Reveals and discards the top card. Type `i` comes up with probability
    /// `counts[i] / t`.
    pub fn draw(&mut self, rng: &mut RngStream) -> Result<usize> {
        if self.t == 0 {
            return Err(Error::EmptyDeck);
        }
        let i = select_by_weight(&self.counts, rng.below(self.t));
        self.counts[i] -= 1;
        self.t -= 1;
        Ok(i)
    }

    /// Sorted (non-increasing) remaining counts; the game value is invariant
    /// under relabeling of types.
    pub fn canonicalize(&self) -> CanonicalKey {
        let mut counts = self.counts.clone();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        CanonicalKey { counts, t: self.t }
    }
}

/// Index of the type whose cumulative range `[c_0 + .. + c_{i-1}, c_0 + .. + c_i)`
/// contains `r`.
pub(crate) fn select_by_weight(counts: &[u64], mut r: u64) -> usize {
    for (i, &c) in counts.iter().enumerate() {
        if r < c {
            return i;
        }
        r -= c;
    }
    unreachable!("draw target beyond total weight")
}

/// Relabeling-invariant key of a state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub counts: Vec<u64>,
    pub t: u64,
}

/// The full deck for `spec`.
pub fn new_state(spec: DeckSpec) -> CountsState {
    CountsState::new(spec)
}

/// Functional form of [`CountsState::draw`].
pub fn draw(state: &CountsState, rng: &mut RngStream) -> Result<(usize, CountsState)> {
    let mut next = state.clone();
    let i = next.draw(rng)?;
    Ok((i, next))
}

pub fn canonicalize(state: &CountsState) -> CanonicalKey {
    state.canonicalize()
}
