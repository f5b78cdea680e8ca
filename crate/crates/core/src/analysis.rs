//! End-to-end drivers: pick a sieve bound for a prime limit, build the
//! interval and class streams, and assemble density and verification
//! reports. The CLI and the acceptance suite both go through here.

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{
    classes_for_records, classify_by_criterion, classify_by_definition, extract_sequences,
    verify_interleaving, verify_interval_structure, InterleavingVerdict, PrimeClass,
    StructureVerdict,
};
use crate::error::{domain, Result};
use crate::intervals::{collect_intervals, IntervalRecord};
use crate::model::{rl_probability_closed, REFERENCE_P_RL, REFERENCE_Q};
use crate::rational::Multiplier;
use crate::sieve::PrimeTable;
use crate::stats::{
    block_densities, geometric_fit, rl_interval_fraction, rl_prime_fraction, CountHistogram,
    DensityEstimate, FitRow, MeanEstimate,
};

/// Sieve bound covering every interval anchored at a prime `<= limit`:
/// `ceil(m * limit)` plus a guard band of `4 ln^2(limit)`.
pub fn sieve_bound_for(limit: u64, m: Multiplier) -> u64 {
    let ln = (limit.max(2) as f64).ln();
    let guard = (4.0 * ln * ln).ceil() as u64;
    m.scale_ceil(limit) as u64 + guard
}

/// Intervals anchored at primes `<= limit`, trimmed so that every prime
/// inside them has a successor in the table, plus the classes of those
/// primes.
#[derive(Debug, Clone)]
pub struct IntervalData {
    pub multiplier: Multiplier,
    pub limit: u64,
    pub records: Vec<IntervalRecord>,
    /// Classes of the primes inside `records`, in prime order.
    pub classes: Vec<PrimeClass>,
}

impl IntervalData {
    pub fn n_max(&self) -> usize {
        self.records.len()
    }
}

/// Largest `n <= pi(limit)` whose interval lies below the last member of
/// the table (so its primes can all be classified).
pub fn usable_n_max(table: &PrimeTable, m: Multiplier, limit: u64) -> Result<usize> {
    let Some(last) = table.last() else {
        return Ok(0);
    };
    let mut n = table.pi(limit.min(table.bound()))?;
    n = n.min(table.count().saturating_sub(1));
    while n > 0 && !m.scaled_lt(table.primes()[n], last) {
        n -= 1;
    }
    Ok(n)
}

pub fn interval_data(table: &PrimeTable, m: Multiplier, limit: u64) -> Result<IntervalData> {
    let n_max = usable_n_max(table, m, limit)?;
    let records = collect_intervals(table, m, n_max)?;
    let classes = classes_for_records(table, m, &records)?;
    Ok(IntervalData {
        multiplier: m,
        limit,
        records,
        classes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtLeastRow {
    pub k: usize,
    #[serde(flatten)]
    pub density: DensityEstimate<f64>,
    /// Frequency of exactly `k` primes.
    pub exact_frequency: f64,
    /// `q_hat^k`
    pub model_q_hat: f64,
    /// `0.8010^k`
    pub model_q_paper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockRow {
    pub h: usize,
    pub block: usize,
    #[serde(flatten)]
    pub density: DensityEstimate<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RlSummary {
    pub interval_fraction: MeanEstimate<f64>,
    pub prime_fraction: DensityEstimate<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSummary {
    /// Empirical `P(count >= 1)`.
    pub q_empirical: f64,
    /// Empirical `P(count >= 2 | count >= 1)`.
    pub q_hat: f64,
    pub q_paper: f64,
    pub p_rl_paper: f64,
    /// Closed-form RL probability at `q_hat`; absent when `q_hat` is 0 or 1.
    pub p_rl_closed: Option<f64>,
    pub p_rl_closed_q_empirical: Option<f64>,
    pub p_rl_closed_q_paper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub intervals: usize,
    pub densities: Vec<AtLeastRow>,
    pub rl: RlSummary,
    pub model: ModelSummary,
    pub fit: Vec<FitRow<f64>>,
    pub fit_max_deviation: f64,
    pub blocks: Vec<BlockRow>,
}

impl DensityReport {
    /// Every block density for every `h` is strictly positive.
    pub fn blocks_positive(&self) -> bool {
        self.blocks.iter().all(|b| b.density.successes > 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DensityParams {
    pub k_max: usize,
    pub h_max: usize,
    pub blocks: usize,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            k_max: 10,
            h_max: 6,
            blocks: 10,
        }
    }
}

pub fn density_report(data: &IntervalData, params: DensityParams) -> Result<DensityReport> {
    let records = &data.records;
    if records.is_empty() {
        return Err(domain(format!(
            "no fully covered intervals below limit {}",
            data.limit
        )));
    }
    let hist = CountHistogram::from_records(records);
    let trials = hist.trials();
    let fit = geometric_fit::<f64>(records, params.k_max.max(2))?;
    let q_hat = fit.q_hat;
    let densities = (0..=params.k_max)
        .map(|k| {
            Ok(AtLeastRow {
                k,
                density: crate::stats::estimate_density(hist.at_least(k), trials)?,
                exact_frequency: hist.exact(k) as f64 / trials as f64,
                model_q_hat: q_hat.powi(k as i32),
                model_q_paper: REFERENCE_Q.powi(k as i32),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let q_empirical = hist.at_least(1) as f64 / trials as f64;

    let mut blocks = Vec::new();
    for h in 1..=params.h_max {
        for (b, density) in block_densities::<f64>(records, params.blocks, h)?
            .into_iter()
            .enumerate()
        {
            blocks.push(BlockRow {
                h,
                block: b + 1,
                density,
            });
        }
    }
    let prime_bound = data.classes.last().map_or(0, |c| c.prime);
    let rl = RlSummary {
        interval_fraction: rl_interval_fraction(records, &data.classes, data.multiplier)?,
        prime_fraction: rl_prime_fraction(&data.classes, prime_bound)?,
    };
    let model = ModelSummary {
        q_empirical,
        q_hat,
        q_paper: REFERENCE_Q,
        p_rl_paper: REFERENCE_P_RL,
        p_rl_closed: rl_probability_closed(q_hat).ok(),
        p_rl_closed_q_empirical: rl_probability_closed(q_empirical).ok(),
        p_rl_closed_q_paper: rl_probability_closed(REFERENCE_Q)?,
    };
    Ok(DensityReport {
        intervals: records.len(),
        densities,
        rl,
        model,
        fit_max_deviation: fit.max_deviation,
        fit: fit.rows,
        blocks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub criterion: PrimeClass,
    pub definition: PrimeClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceVerdict {
    pub checked: usize,
    pub defined: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<Mismatch>,
}

impl EquivalenceVerdict {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Runs both classification routes for every `p_n <= limit` (that has a
/// successor in the table) and counts disagreements.
pub fn verify_equivalence(
    table: &PrimeTable,
    m: Multiplier,
    limit: u64,
) -> Result<EquivalenceVerdict> {
    let n_last = table
        .pi(limit.min(table.bound()))?
        .min(table.count().saturating_sub(1));
    let rows: Vec<(bool, Option<Mismatch>)> = (1..=n_last)
        .into_par_iter()
        .map(|n| {
            let a = classify_by_criterion(table, n, m)?;
            let b = classify_by_definition(table, n, m)?;
            Ok((
                a.defined,
                (a != b).then_some(Mismatch {
                    criterion: a,
                    definition: b,
                }),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(EquivalenceVerdict {
        checked: rows.len(),
        defined: rows.iter().filter(|r| r.0).count(),
        mismatches: rows.iter().filter(|r| r.1.is_some()).count(),
        first_mismatch: rows.into_iter().find_map(|r| r.1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub equivalence: EquivalenceVerdict,
    pub interleaving: InterleavingVerdict,
    /// RL-primes up to the limit; every one should appear as a tie.
    pub rl_primes: usize,
    pub interval_structure: StructureVerdict,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.equivalence.passed()
            && self.interleaving.passed()
            && self.interleaving.equalities == self.rl_primes
            && self.interval_structure.passed()
    }
}

/// Criterion/definition equivalence, global interleaving of the R and L
/// sequences, and the per-interval structure, all up to `limit`.
pub fn verify_all(table: &PrimeTable, data: &IntervalData) -> Result<VerifyReport> {
    let m = data.multiplier;
    let equivalence = verify_equivalence(table, m, data.limit)?;
    // anchors of the covered intervals bound the sequences
    let seq_bound = data.records.last().map_or(0, |r| r.p_lo);
    let bundle = extract_sequences(table, m, seq_bound, 1)?;
    let interleaving = verify_interleaving(&bundle);
    let interval_structure = verify_interval_structure(&data.records, &data.classes, m)?;
    Ok(VerifyReport {
        equivalence,
        interleaving,
        rl_primes: bundle.rl_seq.len(),
        interval_structure,
    })
}
