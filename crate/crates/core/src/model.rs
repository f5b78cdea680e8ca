//! Heuristic geometric model for the number of primes per interval, the
//! Cramér random-set generator and prime-gap ratio statistics.
//!
//! If an interval is nonempty with probability `q` and each further prime
//! appears with the same conditional probability, then
//! `P(at least k) = q^k` and, conditional on being nonempty,
//! `P(exactly k) = (1 - q) q^(k-1)`. A random interval with `k` primes holds
//! `k - 2` RL-primes, so the expected RL share of its primes is
//! `(1 - q) * sum_{k>=3} (k-2)/k * q^(k-1) = 2 - q + 2(1-q)/q * ln(1-q)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::sieve::{PrimeTable, MAX_BOUND};

/// Published heuristic value of `q`.
pub const REFERENCE_Q: f64 = 0.8010;
/// Published value of the RL probability that accompanies [`REFERENCE_Q`].
pub const REFERENCE_P_RL: f64 = 0.3980;

/// Validated model parameter `q` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<F> {
    q: F,
}

impl<F: Real> ModelParams<F> {
    pub fn new(q: F) -> Result<Self> {
        check_q(q)?;
        Ok(Self { q })
    }

    pub fn reference() -> Self {
        Self {
            q: F::lit(REFERENCE_Q),
        }
    }

    pub fn q(&self) -> F {
        self.q
    }

    pub fn p_at_least(&self, k: u32) -> F {
        self.q.powi(k as i32)
    }

    pub fn p_exact_nonempty(&self, k: u32) -> Result<F> {
        p_exact_nonempty(self.q, k)
    }

    pub fn p_rl(&self) -> F {
        closed_form(self.q)
    }
}

fn check_q<F: Real>(q: F) -> Result<()> {
    if q.is_finite() && q > F::zero() && q < F::one() {
        Ok(())
    } else {
        Err(domain(format!("q = {q} outside (0, 1)")))
    }
}

/// `P(interval holds at least k primes) = q^k`.
pub fn p_at_least<F: Real>(q: F, k: u32) -> Result<F> {
    check_q(q)?;
    Ok(q.powi(k as i32))
}

/// `P(exactly k | at least one) = (1 - q) q^(k-1)`, `k >= 1`.
pub fn p_exact_nonempty<F: Real>(q: F, k: u32) -> Result<F> {
    check_q(q)?;
    if k == 0 {
        return Err(domain("exact count conditional on nonempty needs k >= 1"));
    }
    Ok((F::one() - q) * q.powi(k as i32 - 1))
}

/// Partial sum `(1-q) * sum_{k=3}^{k_max} (k-2)/k * q^(k-1)`.
///
/// Non-decreasing in `k_max`; the omitted tail is below `q^k_max`.
pub fn rl_probability_series<F: Real>(q: F, k_max: u32) -> Result<F> {
    check_q(q)?;
    if k_max < 3 {
        return Err(domain("series needs k_max >= 3"));
    }
    let mut pow = q * q;
    let mut sum = F::zero();
    for k in 3..=k_max {
        let kf = F::from_count(k as u64);
        sum = sum + (kf - F::lit(2.0)) / kf * pow;
        pow = pow * q;
        if pow == F::zero() {
            break;
        }
    }
    Ok((F::one() - q) * sum)
}

/// Closed form `2 - q + 2(1-q)/q * ln(1-q)`.
///
/// Rejects `q` outside `(0, 1)`; the limits are 0 at `q -> 0` and 1 at
/// `q -> 1`.
pub fn rl_probability_closed<F: Real>(q: F) -> Result<F> {
    check_q(q)?;
    Ok(closed_form(q))
}

fn closed_form<F: Real>(q: F) -> F {
    let two = F::lit(2.0);
    if q < F::lit(1e-2) {
        // equal to 2 * sum_{i>=2} q^i / (i(i+1)); avoids cancellation
        let mut pow = q * q;
        let mut sum = F::zero();
        for i in 2..40u64 {
            let term = pow / F::from_count(i * (i + 1));
            sum = sum + term;
            if term < sum * F::epsilon() {
                break;
            }
            pow = pow * q;
        }
        two * sum
    } else {
        two - q + two * (F::one() - q) / q * (-q).ln_1p()
    }
}

/// Deterministic uniform variates indexed by position.
///
/// Backed by ChaCha8 in counter mode: the value at position `n` is the
/// 64-bit word pair at stream offset `2n`, so it depends only on the seed
/// and `n`, never on the order of evaluation.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn positioned(&self, n: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(2 * n as u128);
        rng
    }

    /// Uniform in `[0, 1)` at position `n`.
    pub fn uniform_at(&self, n: u64) -> f64 {
        to_unit(self.positioned(n).next_u64())
    }

    /// Uniforms for positions `n, n+1, ...`.
    pub fn stream_from(&self, n: u64) -> impl Iterator<Item = f64> {
        let mut rng = self.positioned(n);
        std::iter::repeat_with(move || to_unit(rng.next_u64()))
    }
}

fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A Cramér-model random set: each `n` in `3..=bound` is a member
/// independently with probability `1/ln n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PseudoprimeTable {
    pub bound: u64,
    pub seed: u64,
    pub members: Vec<u64>,
}

impl PseudoprimeTable {
    /// The members as a [`PrimeTable`], usable by every interval,
    /// classification and statistics routine.
    pub fn to_table(&self) -> PrimeTable {
        PrimeTable::from_sorted(self.bound, self.members.clone())
            .expect("generated members are increasing and bounded")
    }
}

const CRAMER_CHUNK: u64 = 1 << 20;

pub fn cramer_generate(bound: u64, seed: u64) -> Result<PseudoprimeTable> {
    cramer_generate_with(bound, seed, CRAMER_CHUNK, true)
}

/// Generation over position chunks of `chunk` integers, optionally in
/// parallel. The result does not depend on `chunk` or `parallel`.
pub fn cramer_generate_with(
    bound: u64,
    seed: u64,
    chunk: u64,
    parallel: bool,
) -> Result<PseudoprimeTable> {
    if bound < 3 {
        return Err(domain(format!(
            "Cramér model needs bound >= 3, got {bound}"
        )));
    }
    if bound > MAX_BOUND {
        return Err(Error::Capacity {
            requested: bound,
            max: MAX_BOUND,
        });
    }
    let rng = CounterRng::new(seed);
    let chunk = chunk.max(1);
    let run = |start: u64| -> Vec<u64> {
        let end = (start + chunk - 1).min(bound);
        (start..=end)
            .zip(rng.stream_from(start))
            .filter(|&(n, u)| u < 1.0 / (n as f64).ln())
            .map(|(n, _)| n)
            .collect()
    };
    let starts: Vec<u64> = (3..=bound).step_by(chunk as usize).collect();
    let parts: Vec<Vec<u64>> = if parallel {
        starts.into_par_iter().map(run).collect()
    } else {
        starts.into_iter().map(run).collect()
    };
    Ok(PseudoprimeTable {
        bound,
        seed,
        members: parts.concat(),
    })
}

/// Maxima of the gap ratios `(p_{n+1} - p_n) / ln^2 p_n` and
/// `(p_{n+1} - p_n) / ln^2 n` over `n_first <= n <= n_max`, plus the
/// largest gap itself. Argmax indices are 1-based and keep the first
/// occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStats<F> {
    pub n_first: usize,
    pub n_max: usize,
    pub max_ratio_p: F,
    pub argmax_p: usize,
    pub max_ratio_n: F,
    pub argmax_n: usize,
    pub max_gap: u64,
    /// Index `n` of the first largest gap `p_{n+1} - p_n`.
    pub max_gap_index: usize,
    /// `max_gap / ln^2 p_n` at that index.
    pub max_gap_ratio_p: F,
}

pub fn gap_ratio_stats<F: Real>(table: &PrimeTable, n_max: usize) -> Result<GapStats<F>> {
    gap_ratio_stats_from(table, 2, n_max)
}

pub fn gap_ratio_stats_from<F: Real>(
    table: &PrimeTable,
    n_first: usize,
    n_max: usize,
) -> Result<GapStats<F>> {
    if n_max + 1 > table.count() {
        return Err(Error::Index {
            index: n_max + 1,
            count: table.count(),
        });
    }
    if n_first < 2 || n_first > n_max {
        return Err(domain(format!(
            "gap range {n_first}..={n_max} is empty or starts below 2"
        )));
    }
    let primes = table.primes();
    let ln2 = |x: u64| {
        let l = F::from_count(x).ln();
        l * l
    };
    let mut s = GapStats {
        n_first,
        n_max,
        max_ratio_p: F::neg_infinity(),
        argmax_p: n_first,
        max_ratio_n: F::neg_infinity(),
        argmax_n: n_first,
        max_gap: 0,
        max_gap_index: n_first,
        max_gap_ratio_p: F::zero(),
    };
    for n in n_first..=n_max {
        let (p, next) = (primes[n - 1], primes[n]);
        let gap = next - p;
        let g = F::from_count(gap);
        let rp = g / ln2(p);
        let rn = g / ln2(n as u64);
        if rp > s.max_ratio_p {
            s.max_ratio_p = rp;
            s.argmax_p = n;
        }
        if rn > s.max_ratio_n {
            s.max_ratio_n = rn;
            s.argmax_n = n;
        }
        if gap > s.max_gap {
            s.max_gap = gap;
            s.max_gap_index = n;
            s.max_gap_ratio_p = rp;
        }
    }
    Ok(s)
}
