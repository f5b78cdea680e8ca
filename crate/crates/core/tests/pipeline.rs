//! Library-level checks against brute-force oracles that share no code
//! with the implementation.

use doubled_intervals::analysis::{
    density_report, interval_data, sieve_bound_for, verify_all, DensityParams,
};
use doubled_intervals::model::cramer_generate;
use doubled_intervals::sieve::sieve_range;
use doubled_intervals::stats::{rl_interval_fraction, rl_prime_fraction};
use doubled_intervals::Multiplier;

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn prev_prime(n: u64) -> u64 {
    (2..n).rev().find(|&k| is_prime(k)).unwrap_or(0)
}

fn next_prime(n: u64) -> u64 {
    (n + 1..).find(|&k| is_prime(k)).unwrap()
}

/// Per-interval (count, #RL) for doubled intervals anchored at primes
/// `<= limit`, by scanning integers and walking to neighbouring primes.
fn scan(limit: u64) -> Vec<(usize, usize)> {
    let anchors: Vec<u64> = (2..=limit).filter(|&p| is_prime(p)).collect();
    anchors
        .iter()
        .map(|&p| {
            let q = next_prime(p);
            let (lo, hi) = (2 * p, 2 * q);
            let inside: Vec<u64> = (lo + 1..hi).filter(|&r| is_prime(r)).collect();
            let rl = inside
                .iter()
                .filter(|&&r| prev_prime(r) > lo && next_prime(r) < hi)
                .count();
            (inside.len(), rl)
        })
        .collect()
}

#[test]
fn rl_estimators_match_direct_scan() {
    let limit = 100_000;
    let m = Multiplier::TWO;
    let t = sieve_range(sieve_bound_for(limit, m)).unwrap();
    let data = interval_data(&t, m, limit).unwrap();
    let oracle = scan(limit);
    assert_eq!(data.records.len(), oracle.len());
    for (rec, &(count, _)) in data.records.iter().zip(&oracle) {
        assert_eq!(rec.count, count, "interval {}", rec.index);
    }

    let nonempty: Vec<_> = oracle.iter().filter(|(k, _)| *k > 0).collect();
    let mean = nonempty
        .iter()
        .map(|&&(k, rl)| rl as f64 / k as f64)
        .sum::<f64>()
        / nonempty.len() as f64;
    let est = rl_interval_fraction::<f64>(&data.records, &data.classes, m).unwrap();
    assert_eq!(est.samples as usize, nonempty.len());
    assert!((est.mean - mean).abs() < 1e-12, "{} vs {mean}", est.mean);

    let total: usize = oracle.iter().map(|x| x.0).sum();
    let rl: usize = oracle.iter().map(|x| x.1).sum();
    let bound = data.classes.last().unwrap().prime;
    let frac = rl_prime_fraction::<f64>(&data.classes, bound).unwrap();
    assert_eq!((frac.successes as usize, frac.trials as usize), (rl, total));
}

#[test]
fn pipeline_runs_on_pseudoprimes() {
    for seed in [1, 2, 3] {
        let m = Multiplier::TWO;
        let limit = 200_000;
        let t = cramer_generate(sieve_bound_for(limit, m), seed)
            .unwrap()
            .to_table();
        let data = interval_data(&t, m, limit).unwrap();
        // the equivalence and structure statements are purely combinatorial
        let v = verify_all(&t, &data).unwrap();
        assert!(v.passed(), "seed {seed}: {v:?}");
        let r = density_report(&data, DensityParams::default()).unwrap();
        assert!(r
            .densities
            .windows(2)
            .all(|w| w[0].density.value >= w[1].density.value));
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let m = Multiplier::new(3, 2).unwrap();
    let limit = 300_000;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let t = sieve_range(sieve_bound_for(limit, m)).unwrap();
                let data = interval_data(&t, m, limit).unwrap();
                (
                    density_report(&data, DensityParams::default()).unwrap(),
                    verify_all(&t, &data).unwrap(),
                )
            })
    };
    assert_eq!(run(1), run(5));
}
