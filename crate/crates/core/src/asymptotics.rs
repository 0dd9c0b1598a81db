//! Closed-form approximations of the optimal score in its three regimes,
//! plus the Chernoff-type upper bound on the centered binomial maximum.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::game::DeckSpec;
use crate::numeric::{adaptive_simpson, normal_cdf, normal_pdf, KahanSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    /// `m + (pi/2) M_n sqrt(m)`: `n` fixed, `m` large.
    #[serde(rename = "dg")]
    FixedTypes,
    /// `H_m H_n + sum_{j<m} ln C(m, j) / j`: `m` fixed, `n` large.
    #[serde(rename = "ho")]
    FixedCopies,
    /// `m + (pi / sqrt 2) sqrt(m ln n)`: both large.
    #[serde(rename = "main")]
    Main,
}

impl Formula {
    pub fn id(&self) -> &'static str {
        match self {
            Formula::FixedTypes => "dg",
            Formula::FixedCopies => "ho",
            Formula::Main => "main",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub spec: DeckSpec,
    pub formula: Formula,
    pub value: f64,
    /// Only set for [`Formula::Main`].
    pub admissible: Option<bool>,
}

/// The growth condition `(ln n)^(3 + epsilon) <= c m` under which the
/// two-parameter formula applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub c: f64,
    pub epsilon: f64,
}

impl Default for Admissibility {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
        }
    }
}

impl Admissibility {
    pub fn holds(&self, spec: DeckSpec) -> bool {
        let ln_n = (spec.n() as f64).ln();
        ln_n.powf(3.0 + self.epsilon) <= self.c * spec.m() as f64
    }
}

/// `H_k = 1 + 1/2 + ... + 1/k`, with `H_0 = 0`.
pub fn harmonic(k: u64) -> f64 {
    // Smallest terms first.
    let s: KahanSum = (1..=k).rev().map(|j| 1.0 / j as f64).collect();
    s.total()
}

/// Expected maximum of `n` independent standard normals,
/// `n * integral x phi(x) Phi(x)^(n-1) dx`.
pub fn normal_max_expectation(n: u64) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let k = (n - 1) as f64;
    let integrand = |x: f64| {
        let ln_cdf = if x > 0.0 {
            (-normal_cdf(-x)).ln_1p()
        } else {
            normal_cdf(x).ln()
        };
        n as f64 * x * normal_pdf(x) * (k * ln_cdf).exp()
    };
    let upper = (2.0 * (n as f64).ln()).sqrt() + 10.0;
    adaptive_simpson(&integrand, -10.0, upper, 1e-12)
}

pub fn dg_estimate(spec: DeckSpec) -> AsymptoticEstimate {
    let m = spec.m() as f64;
    AsymptoticEstimate {
        spec,
        formula: Formula::FixedTypes,
        value: m + FRAC_PI_2 * normal_max_expectation(spec.n()) * m.sqrt(),
        admissible: None,
    }
}

pub fn ho_estimate(spec: DeckSpec) -> AsymptoticEstimate {
    let m = spec.m();
    let correction: KahanSum = (1..m).map(|j| ln_binomial(m, j) / j as f64).collect();
    AsymptoticEstimate {
        spec,
        formula: Formula::FixedCopies,
        value: harmonic(m) * harmonic(spec.n()) + correction.total(),
        admissible: None,
    }
}

pub fn main_estimate(spec: DeckSpec, adm: &Admissibility) -> AsymptoticEstimate {
    let m = spec.m() as f64;
    let ln_n = (spec.n() as f64).ln();
    AsymptoticEstimate {
        spec,
        formula: Formula::Main,
        value: m + PI / SQRT_2 * (m * ln_n).sqrt(),
        admissible: Some(adm.holds(spec)),
    }
}

/// All three estimates, in the order dg, ho, main.
pub fn all_estimates(spec: DeckSpec, adm: &Admissibility) -> [AsymptoticEstimate; 3] {
    [
        dg_estimate(spec),
        ho_estimate(spec),
        main_estimate(spec, adm),
    ]
}

/// Upper bound `ln n / theta + (mp / theta)(e^theta - 1) - mp` on
/// `E[max_i Y_i] - mp` for `n` i.i.d. `Bin(m, p)` variables.
pub fn chernoff_bound(n: u64, m: u64, p: f64, theta: f64) -> Result<f64> {
    if theta <= 0.0 || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} must be positive"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in (0, 1]"
        )));
    }
    let mp = m as f64 * p;
    Ok((n as f64).ln() / theta + mp / theta * theta.exp_m1() - mp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SmallP,
    LargeP,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernoffParams {
    pub theta: f64,
    pub regime: Regime,
    pub epsilon: f64,
}

/// `theta = sqrt(2 ln n / m) * ln(1/p)^(1 + epsilon)` near `p = 0`, and
/// `sqrt(2 ln n / m)` near `p = 1`. `n` may be any real `>= 1`.
pub fn theta_choice(
    n: f64,
    m: u64,
    p: f64,
    regime: Regime,
    epsilon: f64,
) -> Result<ChernoffParams> {
    if n.is_nan() || n < 1.0 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let base = (2.0 * n.ln() / m as f64).sqrt();
    let theta = match regime {
        Regime::LargeP => base,
        Regime::SmallP => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "small-p regime needs 0 < p < 1, got {p}"
                )));
            }
            base * (1.0 / p).ln().powf(1.0 + epsilon)
        }
    };
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} is not positive (n = {n})"
        )));
    }
    Ok(ChernoffParams {
        theta,
        regime,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u64, m: u64) -> DeckSpec {
        DeckSpec::new(n, m).unwrap()
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert_eq!(harmonic(2), 1.5);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn normal_max_closed_forms() {
        assert_eq!(normal_max_expectation(1), 0.0);
        let sqrt_pi = PI.sqrt();
        assert!((normal_max_expectation(2) - 1.0 / sqrt_pi).abs() < 1e-10);
        assert!((normal_max_expectation(3) - 1.5 / sqrt_pi).abs() < 1e-10);
    }

    #[test]
    fn normal_max_envelope() {
        let mut prev = 0.0;
        for n in [2, 3, 5, 10, 100, 1000, 10_000, 100_000, 1_000_000] {
            let mn = normal_max_expectation(n);
            assert!(mn > prev);
            assert!(mn <= (2.0 * (n as f64).ln()).sqrt());
            prev = mn;
        }
    }

    #[test]
    fn dg_values() {
        assert_eq!(dg_estimate(spec(1, 9)).value, 9.0);
        let v = dg_estimate(spec(2, 100)).value;
        assert!((v - 108.862).abs() < 1e-3, "{v}");
    }

    #[test]
    fn ho_values() {
        for n in [1, 2, 7, 100] {
            assert_eq!(ho_estimate(spec(n, 1)).value, harmonic(n));
        }
        let v = ho_estimate(spec(2, 2)).value;
        assert!((v - (2.25 + 2f64.ln())).abs() < 1e-12);
        assert!((v - 2.9431).abs() < 1e-4);
    }

    #[test]
    fn main_values() {
        let adm = Admissibility::default();
        assert_eq!(main_estimate(spec(1, 4), &adm).value, 4.0);
        assert_eq!(main_estimate(spec(1, 4), &adm).admissible, Some(true));
        let e = main_estimate(spec(100, 100), &adm);
        assert!((e.value - 147.67).abs() < 5e-3, "{}", e.value);
        // (ln 100)^3.1 = 113.8 > 100
        assert_eq!(e.admissible, Some(false));
        let loose = Admissibility {
            c: 2.0,
            epsilon: 0.1,
        };
        assert_eq!(main_estimate(spec(100, 100), &loose).admissible, Some(true));
    }

    #[test]
    fn main_scaling_identities() {
        let adm = Admissibility::default();
        let gap = |n, m| main_estimate(spec(n, m), &adm).value - m as f64;
        for n in [3, 50, 1000] {
            for m in [4, 64, 1024] {
                let r = gap(n, 4 * m) / gap(n, m);
                assert!((r - 2.0).abs() < 1e-9);
            }
        }
        for m in [5, 80] {
            for n in [3u64, 17, 250] {
                let r = gap(n * n, m) / gap(n, m);
                assert!((r - SQRT_2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn chernoff_arithmetic() {
        let b = chernoff_bound(100, 100, 0.5, 0.3).unwrap();
        assert!((b - 23.66).abs() < 5e-3, "{b}");
        assert!(chernoff_bound(100, 100, 0.5, 0.0).is_err());
        assert!(chernoff_bound(100, 100, 0.5, -1.0).is_err());
    }

    #[test]
    fn chernoff_small_theta() {
        let (n, m, p) = (50u64, 80u64, 0.4);
        let mp = m as f64 * p;
        for theta in [1e-2, 1e-3, 1e-4] {
            let b = chernoff_bound(n, m, p, theta).unwrap();
            let second = b - (n as f64).ln() / theta;
            assert!((second / (mp * theta / 2.0) - 1.0).abs() < 2.0 * theta);
        }
        assert!(chernoff_bound(n, m, p, 1e-9).unwrap() > 1e9);
    }

    #[test]
    fn theta_choices() {
        let e = std::f64::consts::E;
        let large = theta_choice(e, 2, 0.9, Regime::LargeP, 0.1).unwrap().theta;
        assert!((large - 1.0).abs() < 1e-15);
        for eps in [0.01, 0.37, 3.0] {
            let small = theta_choice(40.0, 7, 1.0 / e, Regime::SmallP, eps)
                .unwrap()
                .theta;
            assert!((small - (2.0 * 40f64.ln() / 7.0).sqrt()).abs() < 1e-14);
        }
        assert!(theta_choice(40.0, 7, 0.0, Regime::SmallP, 0.1).is_err());
        assert!(theta_choice(1.0, 7, 0.5, Regime::LargeP, 0.1).is_err());
    }

    #[test]
    fn small_p_theta_order() {
        for eps in [0.05, 0.5] {
            for n in [10u64, 1000, 100_000] {
                for m in [10u64, 1000, 100_000] {
                    let p = 1.0 / (n * m) as f64;
                    let theta = theta_choice(n as f64, m, p, Regime::SmallP, eps)
                        .unwrap()
                        .theta;
                    let ln_nm = (n as f64).ln() + (m as f64).ln();
                    let scale = (ln_nm.powf(3.0 + 2.0 * eps) / m as f64).sqrt();
                    assert!(theta <= SQRT_2 * scale * (1.0 + 1e-12));
                }
            }
        }
    }
}
