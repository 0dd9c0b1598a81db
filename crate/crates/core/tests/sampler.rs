mod common;

use std::collections::HashMap;

use cardguess::indep::{
    binomial_conditional_law, conditional_sampler, hypergeometric_pmf, sampler_law,
};
use cardguess::RngStream;
use common::{chi_square_p_value, compositions, spec};
use num_traits::ToPrimitive;

#[test]
fn sampler_law_is_hypergeometric_for_small_decks() {
    let mut checked = 0;
    for n in 1..=12u64 {
        for m in 1..=12 / n {
            let s = spec(n, m);
            for t in 1..=n * m {
                for counts in compositions(n as usize, m, t) {
                    let target = hypergeometric_pmf(s, t, &counts).unwrap();
                    let law = sampler_law(s, t, &counts).unwrap();
                    assert_eq!(law, target, "({n},{m}) t={t} {counts:?}");
                    let target = target.to_f64().unwrap();
                    for p in [0.05, 0.3, 0.5, 0.77, 0.99] {
                        let conditional = binomial_conditional_law(s, t, &counts, p).unwrap();
                        assert!(
                            (conditional - target).abs() <= 1e-12,
                            "({n},{m}) t={t} {counts:?} p={p}: {conditional} vs {target}"
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn sampler_frequencies_match_hypergeometric() {
    let s = spec(3, 2);
    let t = 3;
    let support = compositions(3, 2, t);
    let index: HashMap<Vec<u64>, usize> = support
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let mut rng = RngStream::new(77, 0);
    let mut observed = vec![0u64; support.len()];
    for _ in 0..100_000 {
        let draw = conditional_sampler(s, t, &mut rng).unwrap();
        observed[index[&draw]] += 1;
    }
    let probs: Vec<f64> = support
        .iter()
        .map(|c| hypergeometric_pmf(s, t, c).unwrap().to_f64().unwrap())
        .collect();
    let p = chi_square_p_value(&observed, &probs);
    assert!(p >= 1e-3, "chi-square p-value {p}");
}

#[test]
fn sampler_output_is_a_valid_state() {
    let s = spec(40, 25);
    let mut rng = RngStream::new(5, 9);
    for t in [1, 17, 500, 999, 1000] {
        let counts = conditional_sampler(s, t, &mut rng).unwrap();
        assert_eq!(counts.len(), 40);
        assert_eq!(counts.iter().sum::<u64>(), t);
        assert!(counts.iter().all(|&c| c <= 25));
    }
}

#[test]
fn sampler_rejects_out_of_range_t() {
    let s = spec(3, 2);
    let mut rng = RngStream::new(0, 0);
    assert!(conditional_sampler(s, 0, &mut rng).is_err());
    assert!(conditional_sampler(s, 7, &mut rng).is_err());
}
