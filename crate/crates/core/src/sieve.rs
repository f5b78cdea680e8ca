//! Segmented sieve of Eratosthenes and exact prime counting.
//!
//! The sieve walks `[0, bound]` in fixed-size segments, marking odd
//! composites with the base primes up to `sqrt(bound)`. Memory is one
//! segment buffer per worker plus the output vector. Segments can be
//! processed in parallel; results are concatenated in segment order, so the
//! table is identical either way.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest sieving bound accepted (2^40). Every `m * p` and `p * den`
/// product below this fits in 64 bits for multipliers up to
/// [`Multiplier::MAX_TERM`](crate::Multiplier::MAX_TERM).
pub const MAX_BOUND: u64 = 1 << 40;

/// Default segment length, in integers.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

#[derive(Debug, Clone, Copy)]
pub struct SieveOptions {
    pub segment_size: usize,
    pub parallel: bool,
}

impl Default for SieveOptions {
    fn default() -> Self {
        Self {
            segment_size: DEFAULT_SEGMENT,
            parallel: true,
        }
    }
}

/// An increasing sequence of "primes" up to an inclusive bound.
///
/// Built by [`sieve_range`] it holds exactly the primes `<= bound`. The
/// Cramér simulator produces tables of the same shape whose members are
/// pseudoprimes; every consumer only relies on the ordering and on the
/// sequence being complete up to `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    /// Wraps an already-complete sequence. Fails unless `members` is
    /// strictly increasing and bounded by `bound`.
    pub fn from_sorted(bound: u64, members: Vec<u64>) -> Result<Self> {
        if let Some(w) = members.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Input(format!(
                "sequence not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = members.last() {
            if last > bound {
                return Err(Error::Input(format!("member {last} exceeds bound {bound}")));
            }
        }
        Ok(Self {
            bound,
            primes: members,
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `pi(bound)`.
    pub fn count(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn last(&self) -> Option<u64> {
        self.primes.last().copied()
    }

    /// The n-th prime, 1-based (`p_1 = 2`).
    pub fn nth(&self, n: usize) -> Result<u64> {
        if n == 0 || n > self.primes.len() {
            return Err(Error::Index {
                index: n,
                count: self.primes.len(),
            });
        }
        Ok(self.primes[n - 1])
    }

    /// 1-based index of `p` if it is a member.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok().map(|i| i + 1)
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// `pi(x)`: the number of members `q` with `q <= x`.
    pub fn prime_count_at(&self, x: Rational) -> Result<usize> {
        self.check_coverage(x)?;
        Ok(self.primes.partition_point(|&q| x.ge_int(q)))
    }

    /// The number of members `q` with `q < x` (strict).
    pub fn prime_count_below(&self, x: Rational) -> Result<usize> {
        self.check_coverage(x)?;
        Ok(self.primes.partition_point(|&q| x.gt_int(q)))
    }

    /// `pi(x)` at an integer argument.
    pub fn pi(&self, x: u64) -> Result<usize> {
        self.prime_count_at(Rational::integer(x))
    }

    fn check_coverage(&self, x: Rational) -> Result<()> {
        if x.le_int(self.bound) {
            Ok(())
        } else {
            Err(Error::Coverage {
                what: format!("pi({x})"),
                bound: self.bound,
                max_usable: Some(self.bound),
            })
        }
    }
}

/// All primes `<= bound`, sieved with default options.
pub fn sieve_range(bound: u64) -> Result<PrimeTable> {
    sieve_with(bound, SieveOptions::default())
}

/// Segmented sieve with explicit segment size and parallelism.
pub fn sieve_with(bound: u64, opts: SieveOptions) -> Result<PrimeTable> {
    if bound > MAX_BOUND {
        return Err(Error::Capacity {
            requested: bound,
            max: MAX_BOUND,
        });
    }
    // even and not absurdly small, so every segment starts on an even number
    let seg = (opts.segment_size.max(64) + 1) & !1;
    let base = small_odd_primes(isqrt(bound));
    let end = bound + 1;
    let n_segments = end.div_ceil(seg as u64);

    let primes = if opts.parallel {
        let chunks: Vec<Vec<u64>> = (0..n_segments)
            .into_par_iter()
            .map_init(Vec::new, |buf, s| {
                let mut out = Vec::new();
                sieve_segment(
                    s * seg as u64,
                    ((s + 1) * seg as u64).min(end),
                    &base,
                    buf,
                    &mut out,
                );
                out
            })
            .collect();
        let mut primes = Vec::with_capacity(chunks.iter().map(Vec::len).sum());
        for c in chunks {
            primes.extend_from_slice(&c);
        }
        primes
    } else {
        let mut buf = Vec::new();
        let mut primes = Vec::new();
        for s in 0..n_segments {
            sieve_segment(
                s * seg as u64,
                ((s + 1) * seg as u64).min(end),
                &base,
                &mut buf,
                &mut primes,
            );
        }
        primes
    };
    Ok(PrimeTable { bound, primes })
}

/// Sieve the integers `[lo, hi)`, `lo` even, appending primes to `out`.
fn sieve_segment(lo: u64, hi: u64, base: &[u64], buf: &mut Vec<bool>, out: &mut Vec<u64>) {
    debug_assert!(lo.is_multiple_of(2));
    if lo == 0 && hi > 2 {
        out.push(2);
    }
    // slot i <-> odd value lo + 1 + 2i
    let slots = ((hi - lo) / 2) as usize;
    buf.clear();
    buf.resize(slots, false);
    for &p in base {
        let sq = p * p;
        if sq >= hi {
            break;
        }
        let mut start = if sq >= lo { sq } else { lo.div_ceil(p) * p };
        if start % 2 == 0 {
            start += p;
        }
        let mut i = ((start - lo - 1) / 2) as usize;
        let step = p as usize;
        while i < slots {
            buf[i] = true;
            i += step;
        }
    }
    for (i, &composite) in buf.iter().enumerate() {
        let v = lo + 1 + 2 * i as u64;
        if !composite && v > 1 {
            out.push(v);
        }
    }
}

/// Odd primes `<= limit` by a plain sieve.
fn small_odd_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    let mut i = 3;
    while i <= limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    out
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn nth_prime(table: &PrimeTable, n: usize) -> Result<u64> {
    table.nth(n)
}

pub fn prime_count_at(table: &PrimeTable, x: Rational) -> Result<usize> {
    table.prime_count_at(x)
}

// Binary cache layout, all integers little-endian u64:
//   magic "DBLPRIM1" | bound | count | count x member
const CACHE_MAGIC: &[u8; 8] = b"DBLPRIM1";
const CACHE_HEADER: usize = 24;

pub fn save_cache(table: &PrimeTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&table.bound.to_le_bytes())?;
    w.write_all(&(table.primes.len() as u64).to_le_bytes())?;
    for &p in &table.primes {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a cache written by [`save_cache`]. The stored bound must be at
/// least `required_bound`; a larger table is returned as-is.
pub fn load_cache(path: &Path, required_bound: u64) -> Result<PrimeTable> {
    let bad = |reason: String| Error::Cache {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path)?;
    if bytes.len() < CACHE_HEADER || &bytes[..8] != CACHE_MAGIC {
        return Err(bad("missing or wrong magic header".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let bound = word(8);
    let count = word(16);
    if bound > MAX_BOUND {
        return Err(bad(format!("stored bound {bound} above {MAX_BOUND}")));
    }
    let expected_len = (count as u128) * 8 + CACHE_HEADER as u128;
    if bytes.len() as u128 != expected_len {
        return Err(bad(format!(
            "length {} does not match header count {count}",
            bytes.len()
        )));
    }
    if bound < required_bound {
        return Err(bad(format!(
            "stored bound {bound} below required {required_bound}"
        )));
    }
    let members = bytes[CACHE_HEADER..]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PrimeTable::from_sorted(bound, members).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_tables() {
        assert_eq!(
            sieve_range(30).unwrap().primes(),
            &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        );
        assert_eq!(sieve_range(2).unwrap().primes(), &[2]);
        assert!(sieve_range(1).unwrap().is_empty());
        assert!(sieve_range(0).unwrap().is_empty());
        assert_eq!(sieve_range(3).unwrap().primes(), &[2, 3]);
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(
            sieve_range(MAX_BOUND + 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn indexing() {
        let t = sieve_range(120).unwrap();
        assert_eq!(nth_prime(&t, 1).unwrap(), 2);
        assert_eq!(nth_prime(&t, 11).unwrap(), 31);
        assert_eq!(nth_prime(&t, 25).unwrap(), 97);
        assert!(matches!(t.nth(0), Err(Error::Index { .. })));
        assert!(matches!(t.nth(31), Err(Error::Index { .. })));
    }

    #[test]
    fn counting_at_rationals() {
        let t = sieve_range(120).unwrap();
        assert_eq!(
            prime_count_at(&t, Rational::new(71, 2).unwrap()).unwrap(),
            11
        );
        assert_eq!(prime_count_at(&t, Rational::integer(1)).unwrap(), 0);
        assert_eq!(
            prime_count_at(&t, Rational::new(107, 2).unwrap()).unwrap(),
            16
        );
        // 37 is prime: <= counts it, < does not
        assert_eq!(t.pi(37).unwrap(), 12);
        assert_eq!(t.prime_count_below(Rational::integer(37)).unwrap(), 11);
        assert!(matches!(
            prime_count_at(&t, Rational::new(241, 2).unwrap()),
            Err(Error::Coverage { .. })
        ));
        assert!(prime_count_at(&t, Rational::new(240, 2).unwrap()).is_ok());
    }

    #[test]
    fn pi_steps_exactly_at_primes() {
        let t = sieve_range(100_000).unwrap();
        let mut prev = 0;
        for x in 2..=100_000u64 {
            let c = t.pi(x).unwrap();
            assert_eq!(c - prev == 1, trial_division(x), "x = {x}");
            prev = c;
        }
        for &p in t.primes() {
            assert_eq!(t.nth(t.pi(p).unwrap()).unwrap(), p);
        }
    }

    #[test]
    fn known_counts() {
        assert_eq!(sieve_range(1_000_000).unwrap().count(), 78_498);
        assert_eq!(sieve_range(10_000_000).unwrap().count(), 664_579);
    }

    #[test]
    fn cache_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("primes.bin");
        let t = sieve_range(10_000).unwrap();
        save_cache(&t, &path).unwrap();
        assert_eq!(load_cache(&path, 10_000).unwrap(), t);
        assert!(matches!(
            load_cache(&path, 10_001),
            Err(Error::Cache { .. })
        ));

        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_cache(&path, 0), Err(Error::Cache { .. })));

        save_cache(&t, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(load_cache(&path, 0), Err(Error::Cache { .. })));
    }

    proptest! {
        #[test]
        fn matches_trial_division(bound in 0u64..3000, seg in 64usize..300, parallel: bool) {
            let t = sieve_with(bound, SieveOptions { segment_size: seg, parallel }).unwrap();
            let expected: Vec<u64> = (0..=bound).filter(|&n| trial_division(n)).collect();
            prop_assert_eq!(t.primes(), &expected[..]);
        }

        #[test]
        fn parallel_equals_sequential(bound in 0u64..200_000, seg in 64usize..5000) {
            let a = sieve_with(bound, SieveOptions { segment_size: seg, parallel: true }).unwrap();
            let b = sieve_with(bound, SieveOptions { segment_size: seg, parallel: false }).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
