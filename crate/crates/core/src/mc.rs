//! Reproducible Monte Carlo estimation of expected scores.
//!
//! Replication `r` always runs on `RngStream::new(seed, r)`. Scores are
//! integers, so per-chunk moments are accumulated exactly in `u128` and the
//! reduction is independent of how chunks land on threads. The result is
//! bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::DeckSpec;
use crate::rng::RngStream;
use crate::strategy::{Strategy, Tiebreak};
use crate::tracked::{CountTree, TrackedDeck};

const CHUNK: u64 = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub spec: DeckSpec,
    pub strategy: Strategy,
    pub mean: f64,
    pub stderr: f64,
    pub reps: u64,
    pub seed: u64,
}

/// Plays one full game and returns the number of correct guesses.
pub fn play_game(spec: DeckSpec, strategy: Strategy, rng: &mut RngStream) -> u64 {
    match strategy {
        Strategy::Fixed | Strategy::Greedy(Tiebreak::LowestIndex) => {
            play_deterministic(spec, strategy == Strategy::Fixed, rng)
        }
        _ => play_randomized(spec, strategy, rng),
    }
}

fn play_deterministic(spec: DeckSpec, fixed: bool, rng: &mut RngStream) -> u64 {
    let mut deck = CountTree::new(spec);
    let mut score = 0;
    while deck.remaining() > 0 {
        let guess = if fixed { 0 } else { deck.lowest_argmax() };
        let drawn = deck.locate(rng.below(deck.remaining()));
        deck.remove(drawn);
        if drawn == guess {
            score += 1;
        }
    }
    score
}

fn play_randomized(spec: DeckSpec, strategy: Strategy, rng: &mut RngStream) -> u64 {
    let mut deck = TrackedDeck::new(spec);
    let mut score = 0;
    while deck.remaining() > 0 {
        let guess = match strategy {
            Strategy::Fixed => 0,
            Strategy::Greedy(Tiebreak::LowestIndex) => deck.lowest_argmax(),
            Strategy::Greedy(Tiebreak::Random) => {
                let k = rng.below(deck.ties());
                deck.nth_argmax(k)
            }
            Strategy::Uniform => {
                let k = rng.below(deck.live());
                deck.nth_live(k)
            }
        };
        let drawn = deck.locate(rng.below(deck.remaining()));
        deck.remove(drawn);
        if drawn == guess {
            score += 1;
        }
    }
    score
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Moments {
    count: u64,
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(&mut self, x: u64) {
        let x = u128::from(x);
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    fn mean_and_stderr(&self) -> (f64, f64) {
        let n = self.count as f64;
        let mean = self.sum as f64 / n;
        // n * sum_sq - sum^2 is exact when it fits; otherwise fall back to floats.
        let centered = u128::from(self.count)
            .checked_mul(self.sum_sq)
            .and_then(|a| self.sum.checked_mul(self.sum).map(|b| a - b));
        let var = match centered {
            Some(c) => c as f64 / (n * (n - 1.0)),
            None => (self.sum_sq as f64 - n * mean * mean) / (n - 1.0),
        };
        (mean, (var.max(0.0) / n).sqrt())
    }
}

fn run_chunk(spec: DeckSpec, strategy: Strategy, seed: u64, lo: u64, hi: u64) -> Moments {
    let mut acc = Moments::default();
    for r in lo..hi {
        let mut rng = RngStream::new(seed, r);
        acc.push(play_game(spec, strategy, &mut rng));
    }
    acc
}

/// Mean and standard error of the score over `reps` independent games.
pub fn estimate_score(
    spec: DeckSpec,
    strategy: Strategy,
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<ScoreSummary> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    let chunks: Vec<(u64, u64)> = (0..reps.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(reps)))
        .collect();
    let total = if workers <= 1 {
        chunks
            .iter()
            .map(|&(lo, hi)| run_chunk(spec, strategy, seed, lo, hi))
            .fold(Moments::default(), Moments::merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| {
            chunks
                .par_iter()
                .map(|&(lo, hi)| run_chunk(spec, strategy, seed, lo, hi))
                .reduce(Moments::default, Moments::merge)
        })
    };
    let (mean, stderr) = total.mean_and_stderr();
    Ok(ScoreSummary {
        spec,
        strategy,
        mean,
        stderr,
        reps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::new_state;
    use proptest::prelude::{any, prop_assert_eq, proptest};

    /// Same game driven through the plain `CountsState` / `Strategy` API.
    fn play_game_by_scan(spec: DeckSpec, strategy: Strategy, rng: &mut RngStream) -> u64 {
        let mut state = new_state(spec);
        let mut score = 0;
        while !state.is_empty() {
            let guess = strategy.guess(&state, rng).unwrap();
            if state.draw(rng).unwrap() == guess {
                score += 1;
            }
        }
        score
    }

    const ALL: [Strategy; 4] = [
        Strategy::Fixed,
        Strategy::Greedy(Tiebreak::LowestIndex),
        Strategy::Greedy(Tiebreak::Random),
        Strategy::Uniform,
    ];

    #[test]
    fn single_type_always_scores_m() {
        let spec = DeckSpec::new(1, 5).unwrap();
        let mut rng = RngStream::new(0, 0);
        for s in ALL {
            for _ in 0..20 {
                assert_eq!(play_game(spec, s, &mut rng), 5);
            }
        }
    }

    #[test]
    fn fixed_scores_exactly_m() {
        let mut rng = RngStream::new(9, 0);
        for (n, m) in [(2, 3), (5, 5), (13, 4), (40, 1)] {
            let spec = DeckSpec::new(n, m).unwrap();
            for _ in 0..50 {
                assert_eq!(play_game(spec, Strategy::Fixed, &mut rng), m);
            }
        }
    }

    #[test]
    fn two_singletons() {
        let spec = DeckSpec::new(2, 1).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let s = play_game(spec, Strategy::default(), &mut rng);
            assert!(s == 1 || s == 2);
        }
        let est = estimate_score(spec, Strategy::default(), 1_000_000, 17, 1).unwrap();
        assert!((est.mean - 1.5).abs() < 3.0 * est.stderr);
    }

    #[test]
    fn zener_2x2_matches_exact() {
        let spec = DeckSpec::new(2, 2).unwrap();
        let est = estimate_score(spec, Strategy::default(), 1_000_000, 3, 1).unwrap();
        assert!((est.mean - 17.0 / 6.0).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let spec = DeckSpec::new(4, 3).unwrap();
        for s in ALL {
            let one = estimate_score(spec, s, 10_000, 99, 1).unwrap();
            let eight = estimate_score(spec, s, 10_000, 99, 8).unwrap();
            assert_eq!(one.mean.to_bits(), eight.mean.to_bits());
            assert_eq!(one.stderr.to_bits(), eight.stderr.to_bits());
        }
    }

    #[test]
    fn rejects_too_few_reps() {
        let spec = DeckSpec::new(2, 2).unwrap();
        assert!(estimate_score(spec, Strategy::Fixed, 1, 0, 1).is_err());
    }

    #[test]
    fn constant_scores_have_zero_stderr() {
        let spec = DeckSpec::new(1, 5).unwrap();
        let est = estimate_score(spec, Strategy::default(), 100, 7, 1).unwrap();
        assert_eq!(est.mean, 5.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn stderr_halves_with_four_times_the_reps() {
        let spec = DeckSpec::new(5, 5).unwrap();
        let a = estimate_score(spec, Strategy::default(), 20_000, 1, 1).unwrap();
        let b = estimate_score(spec, Strategy::default(), 80_000, 1, 1).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn greedy_beats_fixed_on_a_grid() {
        for n in [2, 3, 5] {
            for m in [2, 4] {
                let spec = DeckSpec::new(n, m).unwrap();
                let g = estimate_score(spec, Strategy::default(), 20_000, 5, 1).unwrap();
                let u = estimate_score(spec, Strategy::Uniform, 20_000, 5, 1).unwrap();
                assert!(g.mean > m as f64);
                assert!((u.mean - g.mean) < 3.0 * (g.stderr + u.stderr));
            }
        }
    }

    #[test]
    fn singletons_score_harmonic_under_any_live_strategy() {
        let spec = DeckSpec::new(10, 1).unwrap();
        let h10: f64 = (1..=10).map(|j| 1.0 / j as f64).sum();
        let g = estimate_score(spec, Strategy::default(), 200_000, 2, 1).unwrap();
        let u = estimate_score(spec, Strategy::Uniform, 200_000, 2, 1).unwrap();
        assert!((g.mean - h10).abs() < 3.0 * g.stderr);
        assert!((u.mean - h10).abs() < 3.0 * u.stderr);
        let combined = (g.stderr.powi(2) + u.stderr.powi(2)).sqrt();
        assert!((g.mean - u.mean).abs() < 3.0 * combined);
    }

    proptest! {
        #[test]
        fn indexed_and_scanned_games_agree(n in 1u64..9, m in 1u64..6, seed in any::<u64>(), which in 0usize..4) {
            let spec = DeckSpec::new(n, m).unwrap();
            let s = ALL[which];
            let fast = play_game(spec, s, &mut RngStream::new(seed, 3));
            let slow = play_game_by_scan(spec, s, &mut RngStream::new(seed, 3));
            prop_assert_eq!(fast, slow);
        }
    }
}
