//! R / L / RL classification of primes relative to the intervals
//! `(m*p_k, m*p_{k+1})`.
//!
//! A prime strictly inside such an interval is an R-prime when its
//! successor lies in the same interval, an L-prime when its predecessor
//! does, and RL when both hold. Primes that lie in no interval (below
//! `m*p_1`, or exactly on an endpoint `m*p_k`) are undefined.
//!
//! Two independent routes are provided. [`classify_by_criterion`] only
//! compares prime counts at `p/m`; [`classify_by_definition`] locates the
//! containing interval and inspects the neighbours. They must agree.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervals::{enumerate_intervals, IntervalRecord};
use crate::rational::Multiplier;
use crate::sieve::PrimeTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeClass {
    #[serde(rename = "n")]
    pub index: usize,
    pub prime: u64,
    #[serde(rename = "r")]
    pub r_flag: bool,
    #[serde(rename = "l")]
    pub l_flag: bool,
    pub defined: bool,
}

impl PrimeClass {
    fn undefined(index: usize, prime: u64) -> Self {
        Self {
            index,
            prime,
            r_flag: false,
            l_flag: false,
            defined: false,
        }
    }

    pub fn rl(&self) -> bool {
        self.r_flag && self.l_flag
    }
}

/// `p_n` and `p_{n+1}` must both exist.
fn neighbours(table: &PrimeTable, n: usize) -> Result<(u64, u64)> {
    if n == 0 || n + 1 > table.count() {
        return Err(Error::Index {
            index: n + 1,
            count: table.count(),
        });
    }
    Ok((table.primes()[n - 1], table.primes()[n]))
}

/// Classification through prime counts at `p/m` only.
///
/// With `k = pi(p_n/m)`: R iff `pi(p_{n+1}/m) = k`, L iff the number of
/// primes strictly below `p_{n-1}/m` is `k`. Using the strict count on the
/// left keeps the intervals open when `m*p_j` is itself prime (possible
/// for non-integral `m`); for `m = 2` both counts coincide.
pub fn classify_by_criterion(table: &PrimeTable, n: usize, m: Multiplier) -> Result<PrimeClass> {
    let (p, next) = neighbours(table, n)?;
    if n == 1 || !m.scaled_lt(table.primes()[0], p) {
        return Ok(PrimeClass::undefined(n, p));
    }
    let at = m.divide(p);
    let k = table.prime_count_at(at)?;
    if k != table.prime_count_below(at)? {
        // p = m * p_k lies on an endpoint
        return Ok(PrimeClass::undefined(n, p));
    }
    let prev = table.primes()[n - 2];
    let r_flag = table.prime_count_at(m.divide(next))? == k;
    let l_flag = table.prime_count_below(m.divide(prev))? == k;
    Ok(PrimeClass {
        index: n,
        prime: p,
        r_flag,
        l_flag,
        defined: true,
    })
}

/// Classification straight from the definition: find `k` with
/// `m*p_k < p_n < m*p_{k+1}`, then test whether `p_{n+1} < m*p_{k+1}` (R)
/// and `p_{n-1} > m*p_k` (L).
pub fn classify_by_definition(table: &PrimeTable, n: usize, m: Multiplier) -> Result<PrimeClass> {
    let (p, next) = neighbours(table, n)?;
    let primes = table.primes();
    if n == 1 {
        return Ok(PrimeClass::undefined(n, p));
    }
    // number of members q with m*q < p
    let k = primes.partition_point(|&q| m.scaled_lt(q, p));
    if k == 0 || k >= primes.len() {
        return Ok(PrimeClass::undefined(n, p));
    }
    let (lo, hi) = (primes[k - 1], primes[k]);
    if !m.scaled_lt(lo, p) || m.scaled_le(hi, p) {
        return Ok(PrimeClass::undefined(n, p));
    }
    let prev = primes[n - 2];
    Ok(PrimeClass {
        index: n,
        prime: p,
        r_flag: !m.scaled_le(hi, next),
        l_flag: m.scaled_lt(lo, prev),
        defined: true,
    })
}

/// Criterion classes for the 1-based indices `first..=last`, in order.
pub fn classify_range(
    table: &PrimeTable,
    m: Multiplier,
    first: usize,
    last: usize,
) -> Result<Vec<PrimeClass>> {
    if last < first {
        return Ok(Vec::new());
    }
    (first..=last)
        .into_par_iter()
        .map(|n| classify_by_criterion(table, n, m))
        .collect()
}

/// Classes for every prime lying inside one of `records`, in prime order.
pub fn classes_for_records(
    table: &PrimeTable,
    m: Multiplier,
    records: &[IntervalRecord],
) -> Result<Vec<PrimeClass>> {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Ok(Vec::new());
    };
    let a = first.inner_range(table, m).start;
    let b = last.inner_range(table, m).end;
    classify_range(table, m, a + 1, b)
}

/// The R, L, RL and A_i sequences up to a prime bound.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SequenceBundle {
    pub r_seq: Vec<u64>,
    pub l_seq: Vec<u64>,
    pub rl_seq: Vec<u64>,
    /// `a_seq[i - 1]` holds the anchors `p_k` whose interval contains at
    /// least `i` primes.
    pub a_seq: Vec<Vec<u64>>,
}

impl SequenceBundle {
    /// `A_i` for `1 <= i <= H`.
    pub fn a(&self, i: usize) -> &[u64] {
        &self.a_seq[i - 1]
    }
}

/// R/L/RL primes `<= prime_bound` and, for `i = 1..=depth`, the anchors
/// `p_k <= prime_bound` of intervals holding at least `i` primes.
pub fn extract_sequences(
    table: &PrimeTable,
    m: Multiplier,
    prime_bound: u64,
    depth: usize,
) -> Result<SequenceBundle> {
    let n_last = table.pi(prime_bound.min(table.bound()))?;
    if prime_bound > table.bound() || n_last + 1 > table.count() {
        return Err(Error::Coverage {
            what: format!("sequences up to {prime_bound}"),
            bound: table.bound(),
            max_usable: None,
        });
    }
    let classes = classify_range(table, m, 1, n_last)?;
    let mut bundle = SequenceBundle {
        a_seq: vec![Vec::new(); depth],
        ..Default::default()
    };
    for c in classes.iter().filter(|c| c.defined) {
        if c.r_flag {
            bundle.r_seq.push(c.prime);
        }
        if c.l_flag {
            bundle.l_seq.push(c.prime);
        }
        if c.rl() {
            bundle.rl_seq.push(c.prime);
        }
    }
    for rec in enumerate_intervals(table, m, n_last)? {
        for seq in bundle.a_seq.iter_mut().take(rec.count) {
            seq.push(rec.p_lo);
        }
    }
    Ok(bundle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleavingFault {
    /// `R_j > L_j`
    RAboveL,
    /// `L_j > R_{j+1}`
    LAboveNextR,
    /// an equality at a value that is not an RL-prime
    EqualityNotRl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InterleavingViolation {
    /// 1-based position `j`.
    pub position: usize,
    pub fault: InterleavingFault,
    pub left: u64,
    pub right: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterleavingVerdict {
    pub comparisons: usize,
    /// Number of `R_j = L_j` or `L_j = R_{j+1}` ties.
    pub equalities: usize,
    pub violation: Option<InterleavingViolation>,
}

impl InterleavingVerdict {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `R_1 <= L_1 <= R_2 <= L_2 <= ...` over the common range of the
/// two sequences, and that every tie is at an RL-prime. Reports the first
/// violation.
pub fn verify_interleaving(bundle: &SequenceBundle) -> InterleavingVerdict {
    let (r, l) = (&bundle.r_seq, &bundle.l_seq);
    let is_rl = |v: u64| bundle.rl_seq.binary_search(&v).is_ok();
    let mut verdict = InterleavingVerdict {
        comparisons: 0,
        equalities: 0,
        violation: None,
    };
    let check = |v: &mut InterleavingVerdict, j: usize, a: u64, b: u64, fault| {
        v.comparisons += 1;
        let fault = if a > b {
            Some(fault)
        } else if a == b {
            v.equalities += 1;
            (!is_rl(a)).then_some(InterleavingFault::EqualityNotRl)
        } else {
            None
        };
        fault.map(|fault| InterleavingViolation {
            position: j,
            fault,
            left: a,
            right: b,
        })
    };
    for j in 1..=r.len().min(l.len()) {
        let found = check(
            &mut verdict,
            j,
            r[j - 1],
            l[j - 1],
            InterleavingFault::RAboveL,
        )
        .or_else(|| {
            (j < r.len())
                .then(|| {
                    check(
                        &mut verdict,
                        j,
                        l[j - 1],
                        r[j],
                        InterleavingFault::LAboveNextR,
                    )
                })
                .flatten()
        });
        if found.is_some() {
            verdict.violation = found;
            break;
        }
    }
    verdict
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureViolation {
    pub interval: usize,
    pub p_lo: u64,
    pub prime: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureVerdict {
    pub intervals: usize,
    pub violation: Option<StructureViolation>,
}

impl StructureVerdict {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the per-interval pattern: a lone prime is neither R nor L; with
/// `k >= 2` primes the first is R only, the last L only and the `k - 2`
/// in between are RL.
///
/// `classes` must be sorted by prime and include every prime inside the
/// records; otherwise an input error is returned.
pub fn verify_interval_structure(
    records: &[IntervalRecord],
    classes: &[PrimeClass],
    m: Multiplier,
) -> Result<StructureVerdict> {
    if classes.windows(2).any(|w| w[0].prime >= w[1].prime) {
        return Err(Error::Input("classes are not sorted by prime".into()));
    }
    for rec in records {
        let a = classes.partition_point(|c| !m.scaled_lt(rec.p_lo, c.prime));
        let b = classes.partition_point(|c| !m.scaled_le(rec.p_hi, c.prime));
        let inside = &classes[a..b.max(a)];
        if inside.len() != rec.count {
            return Err(Error::Input(format!(
                "classes cover {} of the {} primes in interval {}",
                inside.len(),
                rec.count,
                rec.index
            )));
        }
        let k = inside.len();
        for (i, c) in inside.iter().enumerate() {
            let expected = match (k, i) {
                (1, _) => (false, false),
                (_, 0) => (true, false),
                (_, i) if i == k - 1 => (false, true),
                _ => (true, true),
            };
            let reason = if !c.defined {
                Some("prime inside an interval is unclassified".to_string())
            } else if (c.r_flag, c.l_flag) != expected {
                Some(format!(
                    "position {} of {k}: got (r={}, l={}), expected (r={}, l={})",
                    i + 1,
                    c.r_flag,
                    c.l_flag,
                    expected.0,
                    expected.1
                ))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Ok(StructureVerdict {
                    intervals: records.len(),
                    violation: Some(StructureViolation {
                        interval: rec.index,
                        p_lo: rec.p_lo,
                        prime: c.prime,
                        reason,
                    }),
                });
            }
        }
    }
    Ok(StructureVerdict {
        intervals: records.len(),
        violation: None,
    })
}
