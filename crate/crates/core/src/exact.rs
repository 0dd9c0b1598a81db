//! Exact expected optimal score by two independent routes.
//!
//! * `exact_value_dp` runs the optimal-play value recursion over canonical
//!   states. A canonical state is the histogram `h[c]` = number of types with
//!   `c` copies left, so the state space has `C(n + m, n)` elements instead of
//!   `(m + 1)^n`.
//! * `score_decomposition` sums `E[max_i X_i(t)] / t` over the number of
//!   remaining cards `t`, where each expectation comes from coefficient
//!   extraction in `(sum_{j <= k} C(m, j) x^j)^n`.
//!
//! Both routes run either in `f64` or in exact rational arithmetic.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::DeckSpec;
use crate::numeric::KahanSum;

pub const DEFAULT_STATE_CAP: u128 = 10_000_000;
pub const DEFAULT_DEGREE_CAP: u64 = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    #[default]
    Float,
    Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dp,
    Linearity,
}

impl Method {
    pub fn id(&self) -> &'static str {
        match self {
            Method::Dp => "dp",
            Method::Linearity => "linearity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    pub precision: Precision,
    /// Largest number of canonical states the DP may visit.
    pub state_cap: u128,
    /// Largest deck size `nm` for coefficient extraction.
    pub degree_cap: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            precision: Precision::Float,
            state_cap: DEFAULT_STATE_CAP,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

impl ExactOptions {
    pub fn rational() -> Self {
        Self {
            precision: Precision::Rational,
            ..Self::default()
        }
    }
}

/// An exactly computed expected score.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactValue {
    pub spec: DeckSpec,
    pub method: Method,
    pub value: f64,
    /// Present in rational mode.
    pub rational: Option<BigRational>,
}

impl ExactValue {
    /// `p/q` in rational mode, otherwise the shortest round-trip float.
    pub fn display_value(&self) -> String {
        match &self.rational {
            Some(r) => r.to_string(),
            None => format!("{}", self.value),
        }
    }
}

/// `E[max_i X_i(t)]` for `t = 1..=nm`, stored at index `t - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxProfile {
    pub spec: DeckSpec,
    pub emax: Vec<f64>,
    pub rational: Option<Vec<BigRational>>,
}

impl MaxProfile {
    /// `(t, p, emax, emax / t)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (u64, f64, f64, f64)> + '_ {
        self.emax.iter().enumerate().map(move |(i, &e)| {
            let t = i as u64 + 1;
            (t, self.spec.fraction_remaining(t), e, e / t as f64)
        })
    }
}

/// `C(n + m, n)`, saturating.
pub fn canonical_state_count(spec: DeckSpec) -> u128 {
    let (n, m) = (u128::from(spec.n()), u128::from(spec.m()));
    let k = n.min(m);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n + m - k + i) / i stays integral at every step.
        match acc.checked_mul(n + m - k + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

type Hist = Box<[u32]>;

/// Canonical states grouped by cards remaining, with transition lists.
struct StateGraph {
    /// `levels[t]` holds the histograms with `t` cards remaining.
    levels: Vec<Vec<Hist>>,
    /// `edges[t][s]` lists `(index in level t - 1, weight c * h[c])`.
    edges: Vec<Vec<Vec<(u32, u64)>>>,
}

impl StateGraph {
    fn build(spec: DeckSpec) -> Self {
        let (n, m) = (spec.n() as u32, spec.m() as usize);
        let total = spec.total() as usize;
        let mut full = vec![0u32; m + 1];
        full[m] = n;
        let mut levels: Vec<Vec<Hist>> = vec![Vec::new(); total + 1];
        let mut edges: Vec<Vec<Vec<(u32, u64)>>> = vec![Vec::new(); total + 1];
        levels[total].push(full.into_boxed_slice());
        for t in (1..=total).rev() {
            let mut index: HashMap<Hist, u32> = HashMap::new();
            let mut next_level = Vec::new();
            let mut level_edges = Vec::with_capacity(levels[t].len());
            for h in &levels[t] {
                let mut out = Vec::new();
                for c in 1..=m {
                    if h[c] == 0 {
                        continue;
                    }
                    let mut g = h.clone();
                    g[c] -= 1;
                    g[c - 1] += 1;
                    let id = *index.entry(g.clone()).or_insert_with(|| {
                        next_level.push(g);
                        (next_level.len() - 1) as u32
                    });
                    out.push((id, c as u64 * u64::from(h[c])));
                }
                level_edges.push(out);
            }
            edges[t] = level_edges;
            levels[t - 1] = next_level;
        }
        Self { levels, edges }
    }

    fn max_count(h: &[u32]) -> u64 {
        h.iter().rposition(|&x| x > 0).unwrap_or(0) as u64
    }
}

fn check_state_cap(spec: DeckSpec, cap: u128) -> Result<()> {
    let required = canonical_state_count(spec);
    if required > cap {
        return Err(Error::Capacity {
            what: "dp state table",
            required,
            cap,
        });
    }
    Ok(())
}

/// Expected score of optimal (most-copies-left) play by backward recursion
/// `V(s) = (max_i c_i + sum_i c_i V(s - e_i)) / t` on canonical states.
pub fn exact_value_dp(spec: DeckSpec, opts: &ExactOptions) -> Result<ExactValue> {
    check_state_cap(spec, opts.state_cap)?;
    let graph = StateGraph::build(spec);
    let total = spec.total() as usize;
    match opts.precision {
        Precision::Float => {
            let mut prev = vec![0.0f64];
            for t in 1..=total {
                let cur: Vec<f64> = graph.levels[t]
                    .iter()
                    .zip(&graph.edges[t])
                    .map(|(h, out)| {
                        let mut acc = StateGraph::max_count(h) as f64;
                        for &(id, w) in out {
                            acc += w as f64 * prev[id as usize];
                        }
                        acc / t as f64
                    })
                    .collect();
                prev = cur;
            }
            Ok(ExactValue {
                spec,
                method: Method::Dp,
                value: prev[0],
                rational: None,
            })
        }
        Precision::Rational => {
            // W(s) = t! V(s) is an integer: W(s) = (t-1)! max + sum w W(s').
            let mut prev = vec![BigUint::zero()];
            let mut fact = BigUint::one(); // (t - 1)!
            for t in 1..=total {
                let cur: Vec<BigUint> = graph.levels[t]
                    .iter()
                    .zip(&graph.edges[t])
                    .map(|(h, out)| {
                        let mut acc = &fact * StateGraph::max_count(h);
                        for &(id, w) in out {
                            acc += &prev[id as usize] * w;
                        }
                        acc
                    })
                    .collect();
                prev = cur;
                fact *= t as u64;
            }
            let value = BigRational::new(BigInt::from(prev.swap_remove(0)), BigInt::from(fact));
            Ok(ExactValue {
                spec,
                method: Method::Dp,
                value: value.to_f64().unwrap_or(f64::NAN),
                rational: Some(value),
            })
        }
    }
}

fn poly_mul_truncated(a: &[BigUint], b: &[BigUint], cap: usize) -> Vec<BigUint> {
    let len = (a.len() + b.len() - 1).min(cap + 1);
    let mut out = vec![BigUint::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow_truncated(base: &[BigUint], mut exp: u64, cap: usize) -> Vec<BigUint> {
    let mut result = vec![BigUint::one()];
    let mut sq: Vec<BigUint> = base.iter().take(cap + 1).cloned().collect();
    while exp > 0 {
        if exp & 1 == 1 {
            result = poly_mul_truncated(&result, &sq, cap);
        }
        exp >>= 1;
        if exp > 0 {
            sq = poly_mul_truncated(&sq, &sq, cap);
        }
    }
    result
}

fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * (n - j) / (j + 1);
        row.push(c.clone());
    }
    row
}

fn check_degree_cap(spec: DeckSpec, cap: u64) -> Result<()> {
    if spec.total() > cap {
        return Err(Error::Capacity {
            what: "coefficient extraction degree",
            required: u128::from(spec.total()),
            cap: u128::from(cap),
        });
    }
    Ok(())
}

fn check_t(spec: DeckSpec, t: u64) -> Result<()> {
    if t == 0 || t > spec.total() {
        return Err(Error::OutOfRange {
            what: "cards remaining",
            value: t,
            lo: 1,
            hi: spec.total(),
        });
    }
    Ok(())
}

/// Exact `E[max_i X_i(t)]` under the multivariate hypergeometric law:
/// `P(max <= k) = [x^t] (sum_{j<=k} C(m,j) x^j)^n / C(nm, t)` and
/// `E[max] = sum_{k<m} (1 - P(max <= k))`.
pub fn max_remaining_expectation_exact(
    spec: DeckSpec,
    t: u64,
    degree_cap: u64,
) -> Result<BigRational> {
    check_t(spec, t)?;
    if t > degree_cap {
        return Err(Error::Capacity {
            what: "coefficient extraction degree",
            required: u128::from(t),
            cap: u128::from(degree_cap),
        });
    }
    let m = spec.m();
    let row = binomial_row(m);
    let cap = t as usize;
    let mut below = BigUint::zero();
    for k in 0..m {
        let base = &row[..=k as usize];
        let poly = poly_pow_truncated(base, spec.n(), cap);
        if let Some(c) = poly.get(cap) {
            below += c;
        }
    }
    let choose = binomial_row(spec.total()).swap_remove(cap);
    let numer = BigInt::from(&choose * m) - BigInt::from(below);
    Ok(BigRational::new(numer, BigInt::from(choose)))
}

pub fn max_remaining_expectation(spec: DeckSpec, t: u64) -> Result<f64> {
    let r = max_remaining_expectation_exact(spec, t, DEFAULT_DEGREE_CAP)?;
    Ok(r.to_f64().unwrap_or(f64::NAN))
}

/// The full profile `E[max_i X_i(t)]` for every `t`, and the score obtained
/// from it by linearity of expectation.
pub fn score_decomposition(
    spec: DeckSpec,
    opts: &ExactOptions,
) -> Result<(MaxProfile, ExactValue)> {
    check_degree_cap(spec, opts.degree_cap)?;
    let (n, m, total) = (spec.n(), spec.m(), spec.total());
    let cap = total as usize;
    let row = binomial_row(m);
    // below[t] = sum_{k<m} [x^t] (sum_{j<=k} C(m,j) x^j)^n
    let mut below = vec![BigUint::zero(); cap + 1];
    for k in 0..m {
        let poly = poly_pow_truncated(&row[..=k as usize], n, cap);
        for (acc, c) in below.iter_mut().zip(poly) {
            *acc += c;
        }
    }
    let choose = binomial_row(total);
    let exact: Vec<BigRational> = (1..=cap)
        .map(|t| {
            let numer = BigInt::from(&choose[t] * m) - BigInt::from(below[t].clone());
            BigRational::new(numer, BigInt::from(choose[t].clone()))
        })
        .collect();
    let emax: Vec<f64> = exact
        .iter()
        .map(|r| r.to_f64().unwrap_or(f64::NAN))
        .collect();

    let value = match opts.precision {
        Precision::Float => {
            let mut sum = KahanSum::default();
            for (i, e) in emax.iter().enumerate() {
                sum.add(e / (i + 1) as f64);
            }
            ExactValue {
                spec,
                method: Method::Linearity,
                value: sum.total(),
                rational: None,
            }
        }
        Precision::Rational => {
            let mut sum = BigRational::zero();
            for (i, e) in exact.iter().enumerate() {
                sum += e / BigInt::from(i + 1);
            }
            ExactValue {
                spec,
                method: Method::Linearity,
                value: sum.to_f64().unwrap_or(f64::NAN),
                rational: Some(sum),
            }
        }
    };
    let profile = MaxProfile {
        spec,
        emax,
        rational: (opts.precision == Precision::Rational).then_some(exact),
    };
    Ok((profile, value))
}
