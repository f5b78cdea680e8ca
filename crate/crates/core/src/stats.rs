//! Empirical densities over interval streams, with confidence intervals
//! and diagnostics against the geometric model.
//!
//! All accumulators are integer counts, so merging per-chunk partial
//! results is associative and the final floating-point values do not depend
//! on how the stream was split.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::PrimeClass;
use crate::error::{domain, Error, Result};
use crate::intervals::IntervalRecord;
use crate::rational::Multiplier;
use crate::scalar::Real;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A binomial proportion with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate<F> {
    pub successes: u64,
    pub trials: u64,
    pub value: F,
    pub ci_low: F,
    pub ci_high: F,
}

pub fn estimate_density<F: Real>(successes: u64, trials: u64) -> Result<DensityEstimate<F>> {
    if trials == 0 {
        return Err(domain("density over zero trials"));
    }
    if successes > trials {
        return Err(domain(format!("{successes} successes in {trials} trials")));
    }
    let n = F::from_count(trials);
    let p = F::from_count(successes) / n;
    let z = F::lit(Z95);
    let z2 = z * z;
    let one = F::one();
    let two = F::lit(2.0);
    let denom = one + z2 / n;
    let center = (p + z2 / (two * n)) / denom;
    let half = z / denom * (p * (one - p) / n + z2 / (F::lit(4.0) * n * n)).sqrt();
    let ci_low = if successes == 0 {
        F::zero()
    } else {
        (center - half).max(F::zero()).min(p)
    };
    let ci_high = if successes == trials {
        one
    } else {
        (center + half).min(one).max(p)
    };
    Ok(DensityEstimate {
        successes,
        trials,
        value: p,
        ci_low,
        ci_high,
    })
}

/// Number of intervals with exactly `k` primes, for each `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountHistogram {
    exact: Vec<u64>,
}

impl CountHistogram {
    pub fn from_records(records: &[IntervalRecord]) -> Self {
        let mut h = Self::default();
        for r in records {
            h.push(r.count);
        }
        h
    }

    pub fn push(&mut self, count: usize) {
        if self.exact.len() <= count {
            self.exact.resize(count + 1, 0);
        }
        self.exact[count] += 1;
    }

    pub fn merge(mut self, other: &Self) -> Self {
        if self.exact.len() < other.exact.len() {
            self.exact.resize(other.exact.len(), 0);
        }
        for (a, b) in self.exact.iter_mut().zip(&other.exact) {
            *a += b;
        }
        self
    }

    pub fn trials(&self) -> u64 {
        self.exact.iter().sum()
    }

    pub fn exact(&self, k: usize) -> u64 {
        self.exact.get(k).copied().unwrap_or(0)
    }

    pub fn at_least(&self, k: usize) -> u64 {
        self.exact.iter().skip(k).sum()
    }

    /// Largest count observed.
    pub fn max_count(&self) -> usize {
        self.exact.len().saturating_sub(1)
    }
}

/// Fraction of intervals holding at least `k` primes.
pub fn empirical_at_least<F: Real>(
    records: &[IntervalRecord],
    k: usize,
) -> Result<DensityEstimate<F>> {
    if records.is_empty() {
        return Err(domain("no intervals"));
    }
    let h = CountHistogram::from_records(records);
    estimate_density(h.at_least(k), h.trials())
}

/// Relative frequency of exactly `k` primes, for `k = 0..=max count`.
pub fn exact_count_frequencies<F: Real>(records: &[IntervalRecord]) -> Result<Vec<F>> {
    if records.is_empty() {
        return Err(domain("no intervals"));
    }
    let h = CountHistogram::from_records(records);
    let n = F::from_count(h.trials());
    Ok((0..=h.max_count())
        .map(|k| F::from_count(h.exact(k)) / n)
        .collect())
}

/// A sample mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate<F> {
    pub samples: u64,
    pub mean: F,
    pub std_dev: F,
    pub ci_low: F,
    pub ci_high: F,
}

/// Per-interval RL tallies keyed by interval count `k`:
/// `(intervals, sum of #RL, sum of #RL^2)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RlAccumulator {
    by_count: BTreeMap<usize, (u64, u64, u64)>,
}

impl RlAccumulator {
    pub fn push(&mut self, count: usize, rl: usize) {
        let e = self.by_count.entry(count).or_default();
        e.0 += 1;
        e.1 += rl as u64;
        e.2 += (rl * rl) as u64;
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (&k, &(n, s, q)) in &other.by_count {
            let e = self.by_count.entry(k).or_default();
            e.0 += n;
            e.1 += s;
            e.2 += q;
        }
        self
    }

    /// Mean of `#RL / k` over the nonempty intervals.
    pub fn estimate<F: Real>(&self) -> Result<MeanEstimate<F>> {
        let mut samples = 0u64;
        let (mut sum, mut sum_sq) = (F::zero(), F::zero());
        for (&k, &(n, s, q)) in self.by_count.range(1..) {
            let kf = F::from_count(k as u64);
            samples += n;
            sum = sum + F::from_count(s) / kf;
            sum_sq = sum_sq + F::from_count(q) / (kf * kf);
        }
        if samples == 0 {
            return Err(domain("no nonempty intervals"));
        }
        let n = F::from_count(samples);
        let mean = sum / n;
        let var = if samples > 1 {
            ((sum_sq - n * mean * mean) / (n - F::one())).max(F::zero())
        } else {
            F::zero()
        };
        let std_dev = var.sqrt();
        let half = F::lit(Z95) * std_dev / n.sqrt();
        Ok(MeanEstimate {
            samples,
            mean,
            std_dev,
            ci_low: (mean - half).max(F::zero()),
            ci_high: (mean + half).min(F::one()),
        })
    }
}

/// Slices `classes` (sorted by prime) into the primes of each record.
fn inside<'c>(
    classes: &'c [PrimeClass],
    rec: &IntervalRecord,
    m: Multiplier,
) -> Result<&'c [PrimeClass]> {
    let a = classes.partition_point(|c| !m.scaled_lt(rec.p_lo, c.prime));
    let b = classes
        .partition_point(|c| !m.scaled_le(rec.p_hi, c.prime))
        .max(a);
    if b - a != rec.count {
        return Err(Error::Input(format!(
            "classes cover {} of the {} primes in interval {}",
            b - a,
            rec.count,
            rec.index
        )));
    }
    Ok(&classes[a..b])
}

/// Mean over nonempty intervals of the share of their primes that are
/// RL-primes: the interval-averaged reading of the RL probability.
pub fn rl_interval_fraction<F: Real>(
    records: &[IntervalRecord],
    classes: &[PrimeClass],
    m: Multiplier,
) -> Result<MeanEstimate<F>> {
    let mut acc = RlAccumulator::default();
    for rec in records {
        let rl = inside(classes, rec, m)?.iter().filter(|c| c.rl()).count();
        acc.push(rec.count, rl);
    }
    acc.estimate()
}

/// Share of RL-primes among the defined primes `<= prime_bound`: the
/// "random prime" reading of the RL probability.
pub fn rl_prime_fraction<F: Real>(
    classes: &[PrimeClass],
    prime_bound: u64,
) -> Result<DensityEstimate<F>> {
    let (rl, defined) = classes
        .iter()
        .filter(|c| c.defined && c.prime <= prime_bound)
        .fold((0u64, 0u64), |(r, d), c| (r + c.rl() as u64, d + 1));
    if defined == 0 {
        return Err(domain(format!("no classified primes <= {prime_bound}")));
    }
    estimate_density(rl, defined)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow<F> {
    pub k: usize,
    /// `P(count >= k | count >= 1)`
    pub empirical: F,
    /// `q_hat^(k-1)`
    pub predicted: F,
    pub deviation: F,
}

/// Empirical conditional tail against the one-parameter geometric model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport<F> {
    /// `P(count >= 2 | count >= 1)`
    pub q_hat: F,
    pub nonempty: u64,
    pub rows: Vec<FitRow<F>>,
    pub max_deviation: F,
}

pub fn geometric_fit<F: Real>(records: &[IntervalRecord], k_max: usize) -> Result<FitReport<F>> {
    if k_max < 2 {
        return Err(domain("geometric fit needs k_max >= 2"));
    }
    let h = CountHistogram::from_records(records);
    let nonempty = h.at_least(1);
    if nonempty == 0 {
        return Err(domain("no nonempty intervals to fit"));
    }
    let denom = F::from_count(nonempty);
    let q_hat = F::from_count(h.at_least(2)) / denom;
    let rows: Vec<FitRow<F>> = (1..=k_max)
        .map(|k| {
            let empirical = F::from_count(h.at_least(k)) / denom;
            let predicted = q_hat.powi(k as i32 - 1);
            FitRow {
                k,
                empirical,
                predicted,
                deviation: (empirical - predicted).abs(),
            }
        })
        .collect();
    let max_deviation = rows.iter().fold(F::zero(), |m, r| m.max(r.deviation));
    Ok(FitReport {
        q_hat,
        nonempty,
        rows,
        max_deviation,
    })
}

/// Density of intervals with at least `k` primes in each of `num_blocks`
/// contiguous index blocks; the last block absorbs the remainder.
pub fn block_densities<F: Real>(
    records: &[IntervalRecord],
    num_blocks: usize,
    k: usize,
) -> Result<Vec<DensityEstimate<F>>> {
    if num_blocks == 0 {
        return Err(domain("need at least one block"));
    }
    if num_blocks > records.len() {
        return Err(domain(format!(
            "{num_blocks} blocks for {} intervals",
            records.len()
        )));
    }
    let size = records.len() / num_blocks;
    (0..num_blocks)
        .into_par_iter()
        .map(|b| {
            let end = if b + 1 == num_blocks {
                records.len()
            } else {
                (b + 1) * size
            };
            let block = &records[b * size..end];
            let hits = block.iter().filter(|r| r.count >= k).count() as u64;
            estimate_density(hits, block.len() as u64)
        })
        .collect()
}
