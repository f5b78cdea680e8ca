use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::{CliError, Format, Meta};
use crate::analysis::{DensityReport, VerifyReport};
use crate::classify::PrimeClass;
use crate::intervals::IntervalRecord;
use crate::model::GapStats;
use crate::stats::DensityEstimate;

#[derive(Debug, Clone, PartialEq)]
pub enum ReportBody {
    Primes(Vec<u64>),
    Classes(Vec<PrimeClass>),
    Intervals(Vec<IntervalRecord>),
    Densities {
        density: Box<DensityReport>,
        verdicts: Option<VerifyReport>,
    },
    Verify(VerifyReport),
    Gaps(GapStats<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub meta: Meta,
    pub body: ReportBody,
}

#[derive(Serialize)]
struct ClassRow {
    n: usize,
    prime: u64,
    defined: bool,
    r: bool,
    l: bool,
    rl: bool,
}

impl From<&PrimeClass> for ClassRow {
    fn from(c: &PrimeClass) -> Self {
        Self {
            n: c.index,
            prime: c.prime,
            defined: c.defined,
            r: c.r_flag,
            l: c.l_flag,
            rl: c.rl(),
        }
    }
}

fn verdicts_json(v: &VerifyReport) -> Result<Value, CliError> {
    let mut value = serde_json::to_value(v)?;
    value["passed"] = Value::Bool(v.passed());
    Ok(value)
}

fn to_json(report: &Report) -> Result<Value, CliError> {
    let meta = serde_json::to_value(&report.meta)?;
    Ok(match &report.body {
        ReportBody::Primes(p) => json!({ "meta": meta, "count": p.len(), "primes": p }),
        ReportBody::Classes(c) => {
            let rows: Vec<ClassRow> = c.iter().map(ClassRow::from).collect();
            json!({ "meta": meta, "classes": rows })
        }
        ReportBody::Intervals(r) => json!({ "meta": meta, "intervals": r }),
        ReportBody::Densities { density, verdicts } => json!({
            "meta": meta,
            "intervals": density.intervals,
            "densities": density.densities,
            "rl": density.rl,
            "model": density.model,
            "fit": density.fit,
            "fit_max_deviation": density.fit_max_deviation,
            "blocks": density.blocks,
            "verdicts": match verdicts {
                Some(v) => verdicts_json(v)?,
                None => json!({}),
            },
        }),
        ReportBody::Verify(v) => json!({ "meta": meta, "verdicts": verdicts_json(v)? }),
        ReportBody::Gaps(g) => json!({ "meta": meta, "gaps": g }),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn density_cells(d: &DensityEstimate<f64>) -> String {
    format!(
        "{},{},{},{},{}",
        d.successes, d.trials, d.value, d.ci_low, d.ci_high
    )
}

/// Column order of the densities CSV.
pub const DENSITY_HEADER: &str =
    "section,k,block,successes,trials,value,ci_low,ci_high,model_q_hat,model_q_paper";

fn to_csv(report: &Report) -> String {
    let mut s = String::new();
    match &report.body {
        ReportBody::Primes(p) => {
            s.push_str("n,prime\n");
            for (i, x) in p.iter().enumerate() {
                let _ = writeln!(s, "{},{x}", i + 1);
            }
        }
        ReportBody::Classes(c) => {
            s.push_str("n,prime,defined,r,l,rl\n");
            for c in c {
                let b = |f: bool| f as u8;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    c.index,
                    c.prime,
                    b(c.defined),
                    b(c.r_flag),
                    b(c.l_flag),
                    b(c.rl())
                );
            }
        }
        ReportBody::Intervals(r) => {
            s.push_str("n,p_lo,p_hi,count\n");
            for r in r {
                let _ = writeln!(s, "{},{},{},{}", r.index, r.p_lo, r.p_hi, r.count);
            }
        }
        ReportBody::Densities {
            density: d,
            verdicts,
        } => {
            s.push_str(DENSITY_HEADER);
            s.push('\n');
            let md = &d.model;
            for row in &d.densities {
                let _ = writeln!(
                    s,
                    "at_least,{},,{},{},{}",
                    row.k,
                    density_cells(&row.density),
                    row.model_q_hat,
                    row.model_q_paper
                );
            }
            for row in &d.densities {
                let k = row.k as i32;
                let _ = writeln!(
                    s,
                    "exact,{},,,,{},,,{},{}",
                    row.k,
                    row.exact_frequency,
                    md.q_hat.powi(k) * (1.0 - md.q_hat),
                    md.q_paper.powi(k) * (1.0 - md.q_paper)
                );
            }
            for row in &d.fit {
                let _ = writeln!(
                    s,
                    "fit,{},,,,{},,,{},{}",
                    row.k,
                    row.empirical,
                    row.predicted,
                    md.q_paper.powi(row.k as i32 - 1)
                );
            }
            for b in &d.blocks {
                let _ = writeln!(
                    s,
                    "block_at_least,{},{},{},,",
                    b.h,
                    b.block,
                    density_cells(&b.density)
                );
            }
            let f = &d.rl.interval_fraction;
            let _ = writeln!(
                s,
                "rl_interval_fraction,,,,{},{},{},{},{},{}",
                f.samples,
                f.mean,
                f.ci_low,
                f.ci_high,
                opt(md.p_rl_closed),
                md.p_rl_closed_q_paper
            );
            let _ = writeln!(
                s,
                "rl_prime_fraction,,,{},{},{}",
                density_cells(&d.rl.prime_fraction),
                opt(md.p_rl_closed),
                md.p_rl_closed_q_paper
            );
            let _ = writeln!(s, "q_hat,,,,,{},,,{},{}", md.q_hat, md.q_hat, md.q_paper);
            let _ = writeln!(
                s,
                "q_empirical,,,,,{},,,{},{}",
                md.q_empirical, md.q_hat, md.q_paper
            );
            if let Some(v) = verdicts {
                let _ = writeln!(s, "verified,,,,,{},,,,", v.passed() as u8);
            }
        }
        ReportBody::Verify(v) => {
            s.push_str("check,passed,checked,detail\n");
            for (name, passed, checked, detail) in verify_rows(v) {
                let _ = writeln!(s, "{name},{},{checked},{detail}", passed as u8);
            }
        }
        ReportBody::Gaps(g) => {
            s.push_str("statistic,value,n\n");
            let _ = writeln!(s, "max_ratio_p,{},{}", g.max_ratio_p, g.argmax_p);
            let _ = writeln!(s, "max_ratio_n,{},{}", g.max_ratio_n, g.argmax_n);
            let _ = writeln!(s, "max_gap,{},{}", g.max_gap, g.max_gap_index);
            let _ = writeln!(
                s,
                "max_gap_ratio_p,{},{}",
                g.max_gap_ratio_p, g.max_gap_index
            );
        }
    }
    s
}

fn verify_rows(v: &VerifyReport) -> Vec<(&'static str, bool, usize, String)> {
    let e = &v.equivalence;
    let i = &v.interleaving;
    let st = &v.interval_structure;
    vec![
        (
            "criterion_equivalence",
            e.passed(),
            e.checked,
            format!("{} mismatches", e.mismatches),
        ),
        (
            "interleaving",
            i.passed() && i.equalities == v.rl_primes,
            i.comparisons,
            format!("{} ties; {} rl primes", i.equalities, v.rl_primes),
        ),
        (
            "interval_structure",
            st.passed(),
            st.intervals,
            st.violation
                .as_ref()
                .map(|x| format!("interval {}", x.interval))
                .unwrap_or_default(),
        ),
    ]
}

/// Human-readable first counterexample of a failed verification.
pub fn first_failure(v: &VerifyReport) -> String {
    if let Some(m) = &v.equivalence.first_mismatch {
        return format!(
            "criterion and definition disagree at n={} (p={}): {:?} vs {:?}",
            m.criterion.index, m.criterion.prime, m.criterion, m.definition
        );
    }
    if let Some(x) = &v.interleaving.violation {
        return format!(
            "interleaving broken at j={}: {:?} ({} vs {})",
            x.position, x.fault, x.left, x.right
        );
    }
    if v.interleaving.equalities != v.rl_primes {
        return format!(
            "{} ties in the interleaving but {} RL-primes",
            v.interleaving.equalities, v.rl_primes
        );
    }
    if let Some(x) = &v.interval_structure.violation {
        return format!(
            "interval {} (p_lo={}), prime {}: {}",
            x.interval, x.p_lo, x.prime, x.reason
        );
    }
    "none".into()
}

/// Renders the report; always ends with a newline.
pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => to_csv(report),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&to_json(report)?)?;
            s.push('\n');
            s
        }
    })
}

/// Writes the rendered report to `path` or stdout. For CSV files the
/// provenance block goes to a `<path>.meta.json` sidecar, keeping the
/// header on the first line.
pub fn write_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let text = render(report, format)?;
    match path {
        Some(p) => {
            fs::write(p, text)?;
            if format == Format::Csv {
                let mut sidecar = p.as_os_str().to_owned();
                sidecar.push(".meta.json");
                let mut meta = serde_json::to_string_pretty(&report.meta)?;
                meta.push('\n');
                fs::write(sidecar, meta)?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
