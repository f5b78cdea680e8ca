//! Acceptance criteria. Runs as a plain binary (`harness = false`) and
//! prints one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use doubled_intervals::analysis::{
    density_report, interval_data, sieve_bound_for, verify_equivalence, DensityParams,
};
use doubled_intervals::classify::{
    extract_sequences, verify_interleaving, verify_interval_structure,
};
use doubled_intervals::cli::{build, parse_config, render, Format};
use doubled_intervals::intervals::interval_record;
use doubled_intervals::model::{
    cramer_generate, gap_ratio_stats_from, rl_probability_closed, rl_probability_series,
    REFERENCE_P_RL, REFERENCE_Q,
};
use doubled_intervals::sieve::sieve_range;
use doubled_intervals::stats::empirical_at_least;
use doubled_intervals::{GapStats64, Multiplier};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))
}

/// Criterion and definitional classifications agree for p_n <= 10^6.
fn ac1_criterion_equivalence() -> Outcome {
    let start = Instant::now();
    let limit = 1_000_000;
    let mut details = Vec::new();
    for m in [
        Multiplier::TWO,
        Multiplier::new(3, 2).unwrap(),
        Multiplier::new(5, 3).unwrap(),
    ] {
        let t = sieve_range(sieve_bound_for(limit, m)).map_err(|e| e.to_string())?;
        let v = verify_equivalence(&t, m, limit).map_err(|e| e.to_string())?;
        ensure(v.mismatches == 0, || {
            format!(
                "m={m}: {} mismatches, first {:?}",
                v.mismatches, v.first_mismatch
            )
        })?;
        ensure(v.checked == 78_498, || {
            format!("m={m}: checked {} primes", v.checked)
        })?;
        details.push(format!("m={m}: {} defined", v.defined));
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{}, 0 mismatches", details.join("; ")))
}

/// R_1 <= L_1 <= R_2 <= ... up to 10^7 for m = 2, ties exactly at RL-primes.
fn ac2_interleaving() -> Outcome {
    let start = Instant::now();
    let limit = 10_000_000;
    let m = Multiplier::TWO;
    let t = sieve_range(sieve_bound_for(limit, m)).map_err(|e| e.to_string())?;
    let b = extract_sequences(&t, m, limit, 1).map_err(|e| e.to_string())?;
    let v = verify_interleaving(&b);
    ensure(v.passed(), || format!("violation {:?}", v.violation))?;
    ensure(v.equalities > 0, || "no ties at all".into())?;
    ensure(v.equalities == b.rl_seq.len(), || {
        format!("{} ties vs {} RL-primes", v.equalities, b.rl_seq.len())
    })?;
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "|R|={} |L|={} ties={} (= |RL|)",
        b.r_seq.len(),
        b.l_seq.len(),
        v.equalities
    ))
}

/// Per-interval R-first / RL-middle / L-last structure for p_{n+1} <= 10^6.
fn ac3_interval_structure() -> Outcome {
    let m = Multiplier::TWO;
    let limit = 1_000_000;
    let t = sieve_range(sieve_bound_for(limit, m)).map_err(|e| e.to_string())?;
    let d = interval_data(&t, m, limit).map_err(|e| e.to_string())?;
    ensure(d.records.last().is_some_and(|r| r.p_hi > limit), || {
        "intervals stop short of 10^6".into()
    })?;
    let v = verify_interval_structure(&d.records, &d.classes, m).map_err(|e| e.to_string())?;
    ensure(v.passed(), || format!("{:?}", v.violation))?;
    // independent tally of the same statement
    let mut pos = 0;
    for r in &d.records {
        let inside = &d.classes[pos..pos + r.count];
        pos += r.count;
        let rl = inside.iter().filter(|c| c.rl()).count();
        let lone_ok = r.count != 1 || (!inside[0].r_flag && !inside[0].l_flag);
        ensure(lone_ok && rl == r.count.saturating_sub(2), || {
            format!("interval {}", r.index)
        })?;
    }
    Ok(format!("{} intervals, 0 violations", v.intervals))
}

/// Golden small-N sequences.
fn ac4_golden() -> Outcome {
    let m = Multiplier::TWO;
    let t = sieve_range(300).map_err(|e| e.to_string())?;
    let b = extract_sequences(&t, m, 110, 3).map_err(|e| e.to_string())?;
    ensure(
        b.r_seq == [11, 17, 29, 41, 47, 59, 67, 71, 97, 101, 107, 109],
        || format!("R = {:?}", b.r_seq),
    )?;
    ensure(
        b.l_seq == [13, 19, 31, 43, 53, 61, 71, 73, 101, 103, 109],
        || format!("L = {:?}", b.l_seq),
    )?;
    ensure(b.rl_seq == [71, 101, 109], || {
        format!("RL = {:?}", b.rl_seq)
    })?;
    ensure(b.a(3).starts_with(&[31, 47, 53]), || {
        format!("A3 = {:?}", b.a(3))
    })?;
    let r = interval_record(&t, 28, m).map_err(|e| e.to_string())?;
    ensure(r.p_lo == 107 && r.count == 0, || format!("{r:?}"))?;
    Ok("R, L, RL, A3 prefixes and the empty interval after 107 match".into())
}

/// Series/closed-form identity and the value at q = 0.8010.
fn ac5_model_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 1..=9 {
        let q = i as f64 / 10.0;
        let s = rl_probability_series(q, 10_000).map_err(|e| e.to_string())?;
        let c = rl_probability_closed(q).map_err(|e| e.to_string())?;
        worst = worst.max((s - c).abs());
    }
    ensure(worst < 1e-9, || {
        format!("max |series - closed| = {worst:e}")
    })?;
    let v = rl_probability_closed(REFERENCE_Q).map_err(|e| e.to_string())?;
    ensure((0.3960..=0.3985).contains(&v), || {
        format!("closed(0.8010) = {v}")
    })?;
    ensure((v - REFERENCE_P_RL).abs() < 0.002, || {
        format!("closed(0.8010) = {v}")
    })?;
    Ok(format!(
        "max identity error {worst:.1e}; closed(0.8010) = {v:.6}, published 0.3980, residual {:.4}",
        REFERENCE_P_RL - v
    ))
}

/// Block positivity for h = 1..6 and tail monotonicity at limit 10^7.
fn ac6_positivity() -> Outcome {
    let m = Multiplier::TWO;
    let limit = 10_000_000;
    let t = sieve_range(sieve_bound_for(limit, m)).map_err(|e| e.to_string())?;
    let d = interval_data(&t, m, limit).map_err(|e| e.to_string())?;
    let r = density_report(
        &d,
        DensityParams {
            k_max: 10,
            h_max: 6,
            blocks: 10,
        },
    )
    .map_err(|e| e.to_string())?;
    let min3 = r
        .blocks
        .iter()
        .filter(|b| b.h == 3)
        .map(|b| b.density.value)
        .fold(f64::INFINITY, f64::min);
    ensure(min3 > 0.05, || format!("smallest h=3 block density {min3}"))?;
    ensure(r.blocks_positive(), || {
        "a block has no interval with >= h primes".into()
    })?;
    ensure(r.blocks.len() == 60, || {
        format!("{} block rows", r.blocks.len())
    })?;
    for k in 0..=10 {
        let a = empirical_at_least::<f64>(&d.records, k).map_err(|e| e.to_string())?;
        let b = empirical_at_least::<f64>(&d.records, k + 1).map_err(|e| e.to_string())?;
        ensure(a.value >= b.value, || format!("P(>={k}) < P(>={})", k + 1))?;
    }
    let min6 = r
        .blocks
        .iter()
        .filter(|b| b.h == 6)
        .map(|b| b.density.value)
        .fold(f64::INFINITY, f64::min);
    let md = &r.model;
    let q = &r.densities[1].density;
    Ok(format!(
        "{} intervals; min block density h=3 {min3:.4}, h=6 {min6:.5}; q_emp {:.4} [{:.4},{:.4}], q_hat {:.4}, \
         RL per-interval {:.4}, RL per-prime {:.4} (published q 0.8010, P(RL) 0.3980)",
        r.intervals,
        q.value,
        q.ci_low,
        q.ci_high,
        md.q_hat,
        r.rl.interval_fraction.mean,
        r.rl.prime_fraction.value
    ))
}

/// Composite Simpson for the integral of 1/ln t over [a, b].
fn li_integral(a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let f = |t: f64| 1.0 / t.ln();
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Cramér simulator: determinism, member count, pipeline on pseudoprimes.
fn ac7_cramer() -> Outcome {
    let seed = 42;
    let a = cramer_generate(1_000_000, seed).map_err(|e| e.to_string())?;
    let b = cramer_generate(1_000_000, seed).map_err(|e| e.to_string())?;
    ensure(a == b, || "same seed gave different sets".into())?;
    let expected = li_integral(3.0, 1e6, 2_000_000);
    let sigma = expected.sqrt();
    let got = a.members.len() as f64;
    ensure((got - expected).abs() < 5.0 * sigma, || {
        format!(
            "{got} members, expected {expected:.0} +- {:.0}",
            5.0 * sigma
        )
    })?;

    let cfg = parse_config(["x", "simulate", "--limit", "100000", "--seed", "42"])
        .map_err(|e| e.to_string())?;
    let render_with = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| {
            let (report, _) = build(&cfg).map_err(|e| e.to_string())?;
            render(&report, Format::Json).map_err(|e| e.to_string())
        })
    };
    let first = render_with(1)?;
    ensure(first == render_with(1)?, || {
        "reports differ between runs".into()
    })?;
    ensure(first == render_with(4)?, || {
        "reports differ across thread counts".into()
    })?;
    let json: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    ensure(json["verdicts"]["passed"] == true, || {
        "verification failed on pseudoprimes".into()
    })?;
    Ok(format!(
        "{got} members vs {expected:.1} (sigma {sigma:.0}); simulate report byte-identical; q_hat on pseudoprimes {}",
        json["model"]["q_hat"]
    ))
}

/// Gap ratio bound up to 10^8 and the 10^4 reference value.
fn ac8_gaps() -> Outcome {
    let start = Instant::now();
    let t = sieve_range(100_000_000).map_err(|e| e.to_string())?;
    let s: GapStats64 = gap_ratio_stats_from(&t, 5, t.count() - 1).map_err(|e| e.to_string())?;
    ensure(s.max_ratio_p < 2.0, || {
        format!("max ratio {}", s.max_ratio_p)
    })?;

    let small = sieve_range(10_000).map_err(|e| e.to_string())?;
    let g: GapStats64 =
        gap_ratio_stats_from(&small, 5, small.count() - 1).map_err(|e| e.to_string())?;
    let reference = 36.0 / 9551f64.ln().powi(2);
    ensure(
        g.max_gap == 36 && small.nth(g.max_gap_index).ok() == Some(9551),
        || format!("{g:?}"),
    )?;
    ensure((g.max_gap_ratio_p - reference).abs() < 1e-12, || {
        format!("{}", g.max_gap_ratio_p)
    })?;
    ensure((g.max_gap_ratio_p - 0.4286).abs() < 1e-4, || {
        format!("{}", g.max_gap_ratio_p)
    })?;
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "max ratio (n>=5, <=1e8) {:.4} at p={}; largest gap {} after {}; 1e4 reference {:.4}",
        s.max_ratio_p,
        t.nth(s.argmax_p).unwrap_or(0),
        s.max_gap,
        t.nth(s.max_gap_index).unwrap_or(0),
        g.max_gap_ratio_p
    ))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        (
            "AC1 criterion/definition equivalence",
            ac1_criterion_equivalence,
        ),
        ("AC2 R/L interleaving to 1e7", ac2_interleaving),
        ("AC3 interval structure to 1e6", ac3_interval_structure),
        ("AC4 golden small-N sequences", ac4_golden),
        ("AC5 model identity", ac5_model_identity),
        ("AC6 block positivity at 1e7", ac6_positivity),
        ("AC7 Cramér simulator", ac7_cramer),
        ("AC8 gap ratio bound to 1e8", ac8_gaps),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("[PASS] {name} ({:.1?}): {detail}", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name} ({:.1?}): {why}", start.elapsed());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
