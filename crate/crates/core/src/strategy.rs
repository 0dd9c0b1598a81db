//! Guessing strategies. Each maps a fully known remaining-count state to a
//! predicted type.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::CountsState;
use crate::rng::RngStream;

/// How greedy play chooses among types tied for the largest remaining count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tiebreak {
    #[default]
    LowestIndex,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Always name type 0.
    Fixed,
    /// Name a type with the most copies left (fewest seen so far).
    Greedy(Tiebreak),
    /// Name a uniformly random type among those still in the deck.
    Uniform,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Greedy(Tiebreak::LowestIndex)
    }
}

impl Strategy {
    pub fn guess(&self, state: &CountsState, rng: &mut RngStream) -> Result<usize> {
        match *self {
            Strategy::Fixed => guess_fixed(state),
            Strategy::Greedy(tiebreak) => guess_greedy(state, tiebreak, rng),
            Strategy::Uniform => guess_uniform(state, rng),
        }
    }

    /// Stable name used on the command line and in output files.
    pub fn id(&self) -> &'static str {
        match self {
            Strategy::Fixed => "fixed",
            Strategy::Greedy(Tiebreak::LowestIndex) => "greedy",
            Strategy::Greedy(Tiebreak::Random) => "greedy-random",
            Strategy::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Strategy::Fixed),
            "greedy" | "greedy-lowest" => Ok(Strategy::Greedy(Tiebreak::LowestIndex)),
            "greedy-random" => Ok(Strategy::Greedy(Tiebreak::Random)),
            "uniform" => Ok(Strategy::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy `{other}`"
            ))),
        }
    }
}

pub fn guess_fixed(state: &CountsState) -> Result<usize> {
    if state.is_empty() {
        return Err(Error::EmptyDeck);
    }
    Ok(0)
}

/// Picks an index attaining the maximal remaining count. The random tiebreak
/// always consumes exactly one draw from `rng`, even when the maximum is
/// unique; the lowest-index rule consumes none.
pub fn guess_greedy(state: &CountsState, tiebreak: Tiebreak, rng: &mut RngStream) -> Result<usize> {
    if state.is_empty() {
        return Err(Error::EmptyDeck);
    }
    let counts = state.counts();
    let max = state.max_count();
    match tiebreak {
        Tiebreak::LowestIndex => Ok(counts.iter().position(|&c| c == max).unwrap()),
        Tiebreak::Random => {
            let ties = counts.iter().filter(|&&c| c == max).count() as u64;
            let k = rng.below(ties) as usize;
            Ok(nth_index(counts, k, |c| c == max))
        }
    }
}

/// Uniform over types with at least one card left; consumes one draw.
pub fn guess_uniform(state: &CountsState, rng: &mut RngStream) -> Result<usize> {
    if state.is_empty() {
        return Err(Error::EmptyDeck);
    }
    let counts = state.counts();
    let live = counts.iter().filter(|&&c| c > 0).count() as u64;
    let k = rng.below(live) as usize;
    Ok(nth_index(counts, k, |c| c > 0))
}

fn nth_index(counts: &[u64], k: usize, keep: impl Fn(u64) -> bool) -> usize {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| keep(c))
        .nth(k)
        .map(|(i, _)| i)
        .expect("k within the number of matching types")
}
