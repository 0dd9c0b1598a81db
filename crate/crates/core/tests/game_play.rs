mod common;

use cardguess::mc::estimate_score;
use cardguess::{exact, CountsState, ExactOptions, RngStream, Strategy, Tiebreak};
use common::{chi_square_p_value, spec};
use proptest::prelude::{any, prop_assert_eq, proptest};

#[test]
fn draws_follow_remaining_counts() {
    let s = spec(6, 9);
    let counts = vec![5, 0, 3, 1, 9, 2];
    let t: u64 = counts.iter().sum();
    let state = CountsState::from_counts(s, counts.clone()).unwrap();
    let mut rng = RngStream::new(2024, 0);
    let mut observed = vec![0u64; counts.len()];
    for _ in 0..100_000 {
        let (card, next) = cardguess::game::draw(&state, &mut rng).unwrap();
        assert_eq!(next.remaining(), t - 1);
        observed[card] += 1;
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / t as f64).collect();
    let p = chi_square_p_value(&observed, &probs);
    assert!(p >= 1e-3, "chi-square p-value {p}");
}

#[test]
fn tiebreak_does_not_change_expected_score() {
    for (n, m) in [(3, 3), (5, 4)] {
        let s = spec(n, m);
        let exact_value = exact::exact_value_dp(s, &ExactOptions::rational()).unwrap();
        let low =
            estimate_score(s, Strategy::Greedy(Tiebreak::LowestIndex), 100_000, 1, 4).unwrap();
        let rnd = estimate_score(s, Strategy::Greedy(Tiebreak::Random), 100_000, 2, 4).unwrap();
        let combined = (low.stderr.powi(2) + rnd.stderr.powi(2)).sqrt();
        assert!(
            (low.mean - rnd.mean).abs() <= 3.0 * combined,
            "({n},{m}) {} vs {}",
            low.mean,
            rnd.mean
        );
        assert!((rnd.mean - exact_value.value).abs() <= 3.0 * rnd.stderr);
    }
}

#[test]
fn strategies_are_ordered() {
    for (n, m) in [(2, 5), (4, 4), (7, 3)] {
        let s = spec(n, m);
        let greedy = estimate_score(s, Strategy::default(), 20_000, 3, 2).unwrap();
        let fixed = estimate_score(s, Strategy::Fixed, 20_000, 3, 2).unwrap();
        let uniform = estimate_score(s, Strategy::Uniform, 20_000, 3, 2).unwrap();
        assert_eq!(fixed.mean, m as f64);
        assert!(greedy.mean > fixed.mean);
        assert!(greedy.mean > uniform.mean);
    }
}

proptest! {
    #[test]
    fn counts_stay_consistent_through_a_game(
        n in 1u64..7,
        m in 1u64..7,
        seed in any::<u64>(),
        which in 0usize..4,
    ) {
        let s = spec(n, m);
        let strategy = [
            Strategy::Fixed,
            Strategy::Greedy(Tiebreak::LowestIndex),
            Strategy::Greedy(Tiebreak::Random),
            Strategy::Uniform,
        ][which];
        let mut rng = RngStream::new(seed, 0);
        let mut state = CountsState::new(s);
        let mut drawn = vec![0u64; n as usize];
        while !state.is_empty() {
            let g = strategy.guess(&state, &mut rng).unwrap();
            prop_assert_eq!(state.counts()[g] > 0 || strategy == Strategy::Fixed, true);
            let c = state.draw(&mut rng).unwrap();
            drawn[c] += 1;
            prop_assert_eq!(state.counts().iter().sum::<u64>(), state.remaining());
        }
        prop_assert_eq!(drawn, vec![m; n as usize]);
    }

    #[test]
    fn library_and_hand_played_games_agree(n in 1u64..6, m in 1u64..6, seed in any::<u64>()) {
        let s = spec(n, m);
        let strategy = Strategy::default();
        let a = cardguess::mc::play_game(s, strategy, &mut RngStream::new(seed, 3));
        let b = common::play_by_hand(s, strategy, &mut RngStream::new(seed, 3));
        prop_assert_eq!(a, b);
    }
}
