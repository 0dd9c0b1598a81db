//! Independent-binomial surrogate for the remaining counts.
//!
//! With `t` cards left, the counts `X_i(t)` are i.i.d. `Bin(m, p)` variables
//! `Y_i` with `p = t / (nm)` conditioned on summing to `t`. Dropping the
//! conditioning gives the surrogate score `sum_t E[max_i Y_i(t)] / t`. This
//! module evaluates that surrogate, samples the conditioned counts exactly,
//! and measures how far the normalized maximum sits from `sqrt(2 ln n)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::game::DeckSpec;
use crate::numeric::KahanSum;
use crate::rng::RngStream;

pub const DEFAULT_EXACT_CAP: u64 = 1_000_000;
pub const MIN_GRID_SIZE: usize = 64;

/// Relative weight below which binomial tail mass is dropped.
const TAIL_CUTOFF: f64 = 1e-32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialSpec {
    n: u64,
    m: u64,
    p: f64,
}

impl BinomialSpec {
    pub fn new(n: u64, m: u64, p: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSpec { n, m });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "p = {p} is outside [0, 1]"
            )));
        }
        Ok(Self { n, m, p })
    }

    /// The binomial parameters for `t` cards remaining in `spec`.
    pub fn at(spec: DeckSpec, t: u64) -> Self {
        Self {
            n: spec.n(),
            m: spec.m(),
            p: spec.fraction_remaining(t),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Relative `Bin(m, p)` weights on the window `[lo, lo + w.len())` outside
/// of which the mass is below `TAIL_CUTOFF` of the mode.
struct Window {
    lo: u64,
    w: Vec<f64>,
}

impl Window {
    fn new(m: u64, p: f64) -> Self {
        let q = 1.0 - p;
        let odds = p / q;
        let mode = (((m + 1) as f64 * p).floor() as u64).min(m);
        let mut right = Vec::new();
        let mut x = 1.0;
        let mut k = mode;
        while k < m {
            x *= (m - k) as f64 / (k + 1) as f64 * odds;
            if x < TAIL_CUTOFF {
                break;
            }
            right.push(x);
            k += 1;
        }
        let mut left = Vec::new();
        let mut x = 1.0;
        let mut k = mode;
        while k > 0 {
            x *= k as f64 / (m - k + 1) as f64 / odds;
            if x < TAIL_CUTOFF {
                break;
            }
            left.push(x);
            k -= 1;
        }
        let lo = mode - left.len() as u64;
        let mut w = left;
        w.reverse();
        w.push(1.0);
        w.extend(right);
        Self { lo, w }
    }
}

/// `E[max of n i.i.d. Bin(m, p)] = sum_{k<m} (1 - F(k)^n)`.
///
/// `ln F(k)` is taken from whichever of the lower sum or the upper tail is
/// smaller, each summed from its small end, so the `n`-th power keeps full
/// relative accuracy even for `n` in the millions.
pub fn indep_max_expectation(b: &BinomialSpec) -> f64 {
    let (n, m, p) = (b.n, b.m, b.p);
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return m as f64;
    }
    let win = Window::new(m, p);
    let len = win.w.len();
    let mut lower = vec![0.0; len];
    let mut acc = 0.0;
    for (i, &x) in win.w.iter().enumerate() {
        acc += x;
        lower[i] = acc;
    }
    // upper[i] = mass strictly above lo + i
    let mut upper = vec![0.0; len];
    let mut acc = 0.0;
    for i in (0..len).rev() {
        upper[i] = acc;
        acc += win.w[i];
    }
    let total = lower[len - 1];

    let mut sum = KahanSum::default();
    sum.add(win.lo.min(m) as f64);
    let hi = (win.lo + len as u64).min(m);
    for k in win.lo..hi {
        let i = (k - win.lo) as usize;
        let ln_f = if upper[i] < 0.5 * total {
            (-upper[i] / total).ln_1p()
        } else {
            (lower[i] / total).ln()
        };
        sum.add(-(n as f64 * ln_f).exp_m1());
    }
    sum.total()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurrogateMode {
    ExactSum,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateValue {
    pub spec: DeckSpec,
    pub value: f64,
    pub mode: SurrogateMode,
    /// Quadrature only.
    pub grid_size: Option<usize>,
    /// Quadrature only: change from the half-resolution grid.
    pub refinement_error: Option<f64>,
}

fn surrogate_term(spec: DeckSpec, t: f64) -> f64 {
    let p = (t / spec.total() as f64).min(1.0);
    let b = BinomialSpec {
        n: spec.n(),
        m: spec.m(),
        p,
    };
    indep_max_expectation(&b) / t
}

/// `(t, p, E[max Y_i(t)], E[max Y_i(t)] / t)` for every `t`.
pub fn surrogate_profile(spec: DeckSpec, cap: u64) -> Result<Vec<(u64, f64, f64, f64)>> {
    if spec.total() > cap {
        return Err(Error::Capacity {
            what: "surrogate exact sum",
            required: u128::from(spec.total()),
            cap: u128::from(cap),
        });
    }
    Ok((1..=spec.total())
        .into_par_iter()
        .map(|t| {
            let b = BinomialSpec::at(spec, t);
            let e = indep_max_expectation(&b);
            (t, b.p, e, e / t as f64)
        })
        .collect())
}

/// `sum_{t=1}^{nm} E[max_i Y_i(t)] / t` term by term.
pub fn s_tilde_exact(spec: DeckSpec, cap: u64) -> Result<SurrogateValue> {
    let rows = surrogate_profile(spec, cap)?;
    let sum: KahanSum = rows.iter().map(|r| r.3).collect();
    Ok(SurrogateValue {
        spec,
        value: sum.total(),
        mode: SurrogateMode::ExactSum,
        grid_size: None,
        refinement_error: None,
    })
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let h = (b - a) / (nodes - 1) as f64;
    let mut s = KahanSum::default();
    for i in 0..nodes {
        let w = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
        s.add(w * f(a + i as f64 * h));
    }
    s.total() * h
}

/// Quadrature estimate: the first `head` terms are summed exactly, and the
/// rest of the sum is an integral over `t` plus Euler-Maclaurin endpoint
/// corrections. The integral is split in thirds: trapezoid in `ln t`, then
/// uniform in `t`, then trapezoid in `ln(nm + 1 - t)`, each with `grid`
/// nodes.
fn s_tilde_quadrature_once(spec: DeckSpec, grid: usize) -> f64 {
    let total = spec.total();
    let head = (grid as u64).max(MIN_GRID_SIZE as u64);
    if total <= 3 * head {
        let s: KahanSum = (1..=total)
            .map(|t| surrogate_term(spec, t as f64))
            .collect();
        return s.total();
    }
    let big = total as f64;
    let f = |t: f64| surrogate_term(spec, t);
    let mut sum: KahanSum = (1..head).map(|t| f(t as f64)).collect();

    let a = head as f64;
    let b1 = big / 3.0;
    let b2 = 2.0 * big / 3.0;
    // g(t) = t f(t) integrated against du = dt / t
    sum.add(trapezoid(|u| f(u.exp()) * u.exp(), a.ln(), b1.ln(), grid));
    sum.add(trapezoid(f, b1, b2, grid));
    sum.add(trapezoid(
        |w| {
            let d = w.exp();
            f(big + 1.0 - d) * d
        },
        0.0,
        (big + 1.0 - b2).ln(),
        grid,
    ));
    // The last segment covers [2nm/3, nm] through d = nm + 1 - t in [1, nm/3 + 1]
    // i.e. t in [2nm/3, nm]; the endpoint corrections below turn the integral
    // over [head, nm] into the sum over integer t in [head, nm].
    let (fa, fb) = (f(a), f(big));
    sum.add(0.5 * (fa + fb));
    let da = 0.5 * (f(a + 1.0) - f(a - 1.0));
    let db = f(big) - f(big - 1.0);
    sum.add((db - da) / 12.0);
    sum.total()
}

pub fn s_tilde_quadrature(spec: DeckSpec, grid: usize) -> Result<SurrogateValue> {
    if grid < MIN_GRID_SIZE {
        return Err(Error::InvalidParameter(format!(
            "quadrature grid size {grid} is below {MIN_GRID_SIZE}"
        )));
    }
    let (fine, coarse) = rayon::join(
        || s_tilde_quadrature_once(spec, grid),
        || s_tilde_quadrature_once(spec, grid / 2),
    );
    Ok(SurrogateValue {
        spec,
        value: fine,
        mode: SurrogateMode::Quadrature,
        grid_size: Some(grid),
        refinement_error: Some((fine - coarse).abs()),
    })
}

pub fn s_tilde(
    spec: DeckSpec,
    mode: SurrogateMode,
    grid: usize,
    cap: u64,
) -> Result<SurrogateValue> {
    match mode {
        SurrogateMode::ExactSum => s_tilde_exact(spec, cap),
        SurrogateMode::Quadrature => s_tilde_quadrature(spec, grid),
    }
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

/// Draws the remaining counts with `t` cards left: i.i.d. `Bin(m, p)`
/// variables conditioned on summing to `t`. Each type is drawn from its exact
/// conditional law given the sum still to be placed, which is the univariate
/// hypergeometric `C(m, j) C((k-1)m, r-j) / C(km, r)` for `k` types left
/// sharing `r` cards; `p` cancels.
pub fn conditional_sampler(spec: DeckSpec, t: u64, rng: &mut RngStream) -> Result<Vec<u64>> {
    check_t(spec, t)?;
    let (n, m) = (spec.n(), spec.m());
    let mut out = Vec::with_capacity(n as usize);
    let mut rest = t;
    for i in 0..n {
        let others = (n - i - 1) * m;
        if others == 0 {
            out.push(rest);
            break;
        }
        let lo = rest.saturating_sub(others);
        let hi = m.min(rest);
        let ln_w: Vec<f64> = (lo..=hi)
            .map(|j| ln_binomial(m, j) + ln_binomial(others, rest - j))
            .collect();
        let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ln_w.iter().map(|x| (x - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut u = rng.unit() * total;
        let mut pick = hi;
        for (j, &x) in (lo..=hi).zip(&w) {
            if u < x {
                pick = j;
                break;
            }
            u -= x;
        }
        out.push(pick);
        rest -= pick;
    }
    Ok(out)
}

fn choose(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for j in 0..k {
        c = c * (n - j) / (j + 1);
    }
    c
}

fn check_counts(spec: DeckSpec, t: u64, counts: &[u64]) -> Result<()> {
    check_t(spec, t)?;
    if counts.len() as u64 != spec.n() || counts.iter().any(|&c| c > spec.m()) {
        return Err(Error::InvalidParameter(format!(
            "counts {counts:?} are not a valid remaining-count vector"
        )));
    }
    Ok(())
}

/// Probability the sequential sampler returns `counts`, as the product of
/// its per-type conditional probabilities.
pub fn sampler_law(spec: DeckSpec, t: u64, counts: &[u64]) -> Result<BigRational> {
    check_counts(spec, t, counts)?;
    if counts.iter().sum::<u64>() != t {
        return Ok(BigRational::from_integer(BigInt::from(0)));
    }
    let (n, m) = (spec.n(), spec.m());
    let mut prob = BigRational::one();
    let mut rest = t;
    for (i, &j) in counts.iter().enumerate() {
        let others = (n - i as u64 - 1) * m;
        let num = choose(m, j) * choose(others, rest - j);
        let den = choose(others + m, rest);
        prob *= BigRational::new(BigInt::from(num), BigInt::from(den));
        rest -= j;
    }
    Ok(prob)
}

/// Multivariate hypergeometric pmf `prod_i C(m, j_i) / C(nm, t)`.
pub fn hypergeometric_pmf(spec: DeckSpec, t: u64, counts: &[u64]) -> Result<BigRational> {
    check_counts(spec, t, counts)?;
    if counts.iter().sum::<u64>() != t {
        return Ok(BigRational::from_integer(BigInt::from(0)));
    }
    let num = counts
        .iter()
        .fold(BigUint::one(), |acc, &j| acc * choose(spec.m(), j));
    Ok(BigRational::new(
        BigInt::from(num),
        BigInt::from(choose(spec.total(), t)),
    ))
}

/// `P(Y = counts) / P(sum Y = t)` for i.i.d. `Bin(m, p)` coordinates,
/// evaluated in floating point for an arbitrary `0 < p < 1`.
pub fn binomial_conditional_law(spec: DeckSpec, t: u64, counts: &[u64], p: f64) -> Result<f64> {
    check_counts(spec, t, counts)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in (0, 1)"
        )));
    }
    if counts.iter().sum::<u64>() != t {
        return Ok(0.0);
    }
    let (m, total) = (spec.m(), spec.total());
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_joint: f64 = counts
        .iter()
        .map(|&j| ln_binomial(m, j) + j as f64 * lp + (m - j) as f64 * lq)
        .sum();
    let ln_sum = ln_binomial(total, t) + t as f64 * lp + (total - t) as f64 * lq;
    Ok((ln_joint - ln_sum).exp())
}

/// `E[max Z_i] - sqrt(2 ln n)` for standardized `Z_i = (Y_i - mp) / sqrt(mp(1-p))`.
pub fn feller_gap(n: u64, m: u64, p: f64) -> Result<f64> {
    let b = BinomialSpec::new(n, m, p)?;
    let var = m as f64 * p * (1.0 - p);
    if var <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "p = {p} gives a degenerate binomial"
        )));
    }
    let z = (indep_max_expectation(&b) - m as f64 * p) / var.sqrt();
    Ok(z - (2.0 * (n as f64).ln()).sqrt())
}
