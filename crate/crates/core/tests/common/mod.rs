#![allow(dead_code)]

use cardguess::{CountsState, DeckSpec, RngStream, Strategy};
use num_bigint::BigInt;
use num_rational::BigRational;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn spec(n: u64, m: u64) -> DeckSpec {
    DeckSpec::new(n, m).unwrap()
}

/// Pearson chi-square p-value of `observed` against cell probabilities.
/// Cells with zero probability must be empty and are dropped.
pub fn chi_square_p_value(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            assert_eq!(o, 0, "draw in an impossible cell");
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    assert!(cells >= 2);
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}

/// Expected greedy (lowest-index) score by walking every distinct arrangement
/// of the deck. Each arrangement is equally likely.
pub fn brute_force_greedy(spec: DeckSpec) -> BigRational {
    fn walk(counts: &mut [u64], score: u64, total: &mut u128, leaves: &mut u128) {
        if counts.iter().all(|&c| c == 0) {
            *total += score as u128;
            *leaves += 1;
            return;
        }
        let max = *counts.iter().max().unwrap();
        let guess = counts.iter().position(|&c| c == max).unwrap();
        for card in 0..counts.len() {
            if counts[card] == 0 {
                continue;
            }
            counts[card] -= 1;
            walk(counts, score + u64::from(card == guess), total, leaves);
            counts[card] += 1;
        }
    }
    let mut counts = vec![spec.m(); spec.n() as usize];
    let (mut total, mut leaves) = (0u128, 0u128);
    walk(&mut counts, 0, &mut total, &mut leaves);
    BigRational::new(BigInt::from(total), BigInt::from(leaves))
}

pub fn harmonic_rational(n: u64) -> BigRational {
    (1..=n)
        .map(|k| BigRational::new(BigInt::from(1), BigInt::from(k)))
        .fold(BigRational::from_integer(BigInt::from(0)), |a, b| a + b)
}

/// Every counts vector with entries in `0..=m` summing to `t`.
pub fn compositions(n: usize, m: u64, t: u64) -> Vec<Vec<u64>> {
    fn rec(i: usize, n: usize, m: u64, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=m.min(left) {
            cur.push(c);
            rec(i + 1, n, m, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, t, &mut Vec::new(), &mut out);
    out
}

/// One game played with the plain counts-vector API.
pub fn play_by_hand(spec: DeckSpec, strategy: Strategy, rng: &mut RngStream) -> u64 {
    let mut state = CountsState::new(spec);
    let mut score = 0;
    while !state.is_empty() {
        let guess = strategy.guess(&state, rng).unwrap();
        let card = state.draw(rng).unwrap();
        score += u64::from(guess == card);
    }
    score
}
