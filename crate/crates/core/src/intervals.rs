//! The intervals `(m*p_n, m*p_{n+1})` and the primes strictly inside them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Multiplier;
use crate::sieve::PrimeTable;

/// One interval `(m*p_lo, m*p_hi)` anchored at `p_lo = p_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntervalRecord {
    #[serde(rename = "n")]
    pub index: usize,
    pub p_lo: u64,
    pub p_hi: u64,
    /// Primes `r` with `m*p_lo < r < m*p_hi`.
    pub count: usize,
}

impl IntervalRecord {
    /// 0-based table positions `[first, first + count)` of the primes
    /// inside this interval.
    pub fn inner_range(&self, table: &PrimeTable, m: Multiplier) -> std::ops::Range<usize> {
        let first = first_above(table.primes(), m, self.p_lo);
        first..first + self.count
    }
}

/// Position of the first member `r` with `m*p < r`.
fn first_above(primes: &[u64], m: Multiplier, p: u64) -> usize {
    primes.partition_point(|&r| !m.scaled_lt(p, r))
}

/// Position of the first member `r` with `m*p <= r`.
fn first_at_or_above(primes: &[u64], m: Multiplier, p: u64) -> usize {
    primes.partition_point(|&r| !m.scaled_le(p, r))
}

/// Largest `n` whose interval is completely covered by the table, i.e.
/// `m*p_{n+1} <= bound`. Zero when not even the first interval fits.
pub fn max_covered_index(table: &PrimeTable, m: Multiplier) -> usize {
    let primes = table.primes();
    // members p with m*p <= bound
    let fits = primes.partition_point(|&p| m.scale(p).le_int(table.bound()));
    fits.saturating_sub(1)
}

fn check_coverage(table: &PrimeTable, m: Multiplier, n: usize) -> Result<()> {
    if n + 1 > table.count() {
        return Err(Error::Index {
            index: n + 1,
            count: table.count(),
        });
    }
    let p_hi = table.primes()[n];
    if !m.scale(p_hi).le_int(table.bound()) {
        return Err(Error::Coverage {
            what: format!("interval {n} upper endpoint {m}*{p_hi}"),
            bound: table.bound(),
            max_usable: Some(max_covered_index(table, m) as u64),
        });
    }
    Ok(())
}

/// The interval anchored at `p_n` (1-based) with its exact prime count.
pub fn interval_record(table: &PrimeTable, n: usize, m: Multiplier) -> Result<IntervalRecord> {
    if n == 0 {
        return Err(Error::Index {
            index: 0,
            count: table.count(),
        });
    }
    check_coverage(table, m, n)?;
    let primes = table.primes();
    let (p_lo, p_hi) = (primes[n - 1], primes[n]);
    let lo = first_above(primes, m, p_lo);
    let hi = first_at_or_above(primes, m, p_hi);
    Ok(IntervalRecord {
        index: n,
        p_lo,
        p_hi,
        count: hi.saturating_sub(lo),
    })
}

/// Streaming iterator over the records `n = 1..=n_max`.
///
/// Two cursors advance monotonically through the table, so a full pass is
/// linear in the number of primes.
#[derive(Debug, Clone)]
pub struct Intervals<'a> {
    primes: &'a [u64],
    m: Multiplier,
    next: usize,
    end: usize,
    lo: usize,
    hi: usize,
}

impl Iterator for Intervals<'_> {
    type Item = IntervalRecord;

    fn next(&mut self) -> Option<IntervalRecord> {
        if self.next > self.end {
            return None;
        }
        let n = self.next;
        let (p_lo, p_hi) = (self.primes[n - 1], self.primes[n]);
        // the previous upper cursor is the first r >= m*p_lo
        self.lo = self.lo.max(self.hi);
        while self.lo < self.primes.len() && !self.m.scaled_lt(p_lo, self.primes[self.lo]) {
            self.lo += 1;
        }
        self.hi = self.hi.max(self.lo);
        while self.hi < self.primes.len() && !self.m.scaled_le(p_hi, self.primes[self.hi]) {
            self.hi += 1;
        }
        self.next += 1;
        Some(IntervalRecord {
            index: n,
            p_lo,
            p_hi,
            count: self.hi - self.lo,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end + 1).saturating_sub(self.next);
        (left, Some(left))
    }
}

impl ExactSizeIterator for Intervals<'_> {}

/// Records for `n = 1..=n_max`, streamed in order. Fails up front, naming
/// the largest usable `n_max`, if the last interval is not fully covered.
pub fn enumerate_intervals(
    table: &PrimeTable,
    m: Multiplier,
    n_max: usize,
) -> Result<Intervals<'_>> {
    enumerate_range(table, m, 1, n_max)
}

/// Records for `n = n_first..=n_last`.
pub fn enumerate_range(
    table: &PrimeTable,
    m: Multiplier,
    n_first: usize,
    n_last: usize,
) -> Result<Intervals<'_>> {
    if n_last >= n_first && n_first >= 1 {
        check_coverage(table, m, n_last)?;
    }
    let primes = table.primes();
    let start = if n_first >= 1 && n_first <= primes.len() {
        first_above(primes, m, primes[n_first - 1])
    } else {
        0
    };
    Ok(Intervals {
        primes,
        m,
        next: n_first.max(1),
        end: n_last,
        lo: start,
        hi: start,
    })
}

/// All records `1..=n_max`, computed in index-range chunks on the rayon
/// pool and merged in order. Equal to collecting [`enumerate_intervals`].
pub fn collect_intervals(
    table: &PrimeTable,
    m: Multiplier,
    n_max: usize,
) -> Result<Vec<IntervalRecord>> {
    const CHUNK: usize = 1 << 16;
    if n_max == 0 {
        return Ok(Vec::new());
    }
    check_coverage(table, m, n_max)?;
    let starts: Vec<usize> = (1..=n_max).step_by(CHUNK).collect();
    let parts: Vec<Vec<IntervalRecord>> = starts
        .into_par_iter()
        .map(|s| {
            let e = (s + CHUNK - 1).min(n_max);
            enumerate_range(table, m, s, e).map(Iterator::collect)
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}
