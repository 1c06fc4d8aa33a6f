//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (no libtest harness) so the lines are always shown; exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use toomlab::app::experiments::consensus_experiment;
use toomlab::app::instances::curated_thin_sets;
use toomlab::app::suites::{run_suite, RunConfig, VerificationRecord};
use toomlab::cuts::{thickness_general, SearchGuard, Thickness};
use toomlab::geometry::span_d;
use toomlab::lattice::is_connected;
use toomlab::{SiteSet, Thirds};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn suite(name: &str, trials: Option<usize>, min_records: usize) -> Outcome {
    let cfg = RunConfig { trials, ..RunConfig::default() };
    match run_suite(name, &cfg) {
        Ok(records) => summarize(&records, min_records),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn summarize(records: &[VerificationRecord], min_records: usize) -> Outcome {
    let failed: Vec<&VerificationRecord> = records.iter().filter(|r| !r.pass).collect();
    let mut detail = format!("{} records, {} failed", records.len(), failed.len());
    if let Some(r) = failed.first() {
        detail += &format!("; first: case {} [{}] {} vs {}", r.case_id, r.inputs, r.lhs, r.rhs);
    }
    outcome(failed.is_empty() && records.len() >= min_records, detail)
}

/// Minimal cost of covering `sites` by triangles whose `d`-deflations
/// cover them, by dynamic programming over all partitions of the sites.
/// A triangle covering a part after deflation by `d` has span at least the
/// part's `max(x+y) - min x - min y` plus `3d`; the part's bounding
/// triangle achieves it.
fn partition_oracle(sites: &[(i64, i64)], d: Thirds) -> Thirds {
    let n = sites.len();
    let full = (1usize << n) - 1;
    let mut cost = vec![0i64; 1 << n];
    for (mask, slot) in cost.iter_mut().enumerate().skip(1) {
        let (mut min_x, mut min_y, mut max_s) = (i64::MAX, i64::MAX, i64::MIN);
        for (i, &(x, y)) in sites.iter().enumerate() {
            if mask >> i & 1 == 1 {
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_s = max_s.max(x + y);
            }
        }
        *slot = 3 * (max_s - min_x - min_y) + 3 * d.raw();
    }
    let mut best = vec![i64::MAX; 1 << n];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // Parts containing the lowest site: `low | sub` for sub ⊆ rest.
        let mut sub = rest;
        loop {
            let part = low | sub;
            let cand = cost[part] + best[mask ^ part];
            if cand < best[mask] {
                best[mask] = cand;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    Thirds(best[full])
}

fn single_triangle(sites: &[(i64, i64)], d: Thirds) -> Thirds {
    let min_x = sites.iter().map(|p| p.0).min().unwrap();
    let min_y = sites.iter().map(|p| p.1).min().unwrap();
    let max_s = sites.iter().map(|p| p.0 + p.1).max().unwrap();
    Thirds::from_int(max_s - min_x - min_y) + d * 3
}

fn cover_oracle() -> Outcome {
    let cells: Vec<(i64, i64)> = (0..4).flat_map(|y| (0..4).map(move |x| (x, y))).collect();
    let sets: Vec<Vec<(i64, i64)>> = (1u32..1 << 16)
        .filter(|m| m.count_ones() <= 12)
        .map(|m| cells.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &c)| c).collect::<Vec<_>>())
        .filter(|s| is_connected(&SiteSet::plane(s.iter().copied())))
        .collect();
    let bad: Vec<String> = sets
        .par_iter()
        .flat_map_iter(|s| {
            [Thirds::ONE_THIRD, Thirds::from_int(2)].into_iter().filter_map(move |d| {
                let oracle = partition_oracle(s, d);
                let single = single_triangle(s, d);
                let lib = span_d(&SiteSet::plane(s.iter().copied()), d).map(|c| c.value);
                (oracle != single || lib.as_ref() != Ok(&oracle))
                    .then(|| format!("{s:?} d={d}: oracle {oracle} single {single} lib {lib:?}"))
            })
        })
        .collect();
    let mut detail = format!("{} connected sets x 2 deflations, {} mismatches", sets.len(), bad.len());
    if let Some(b) = bad.first() {
        detail += &format!("; first: {b}");
    }
    outcome(bad.is_empty() && !sets.is_empty(), detail)
}

fn commute_and_components() -> Outcome {
    let a = suite("commute", Some(500), 500);
    let b = suite("components", Some(500), 500);
    outcome(a.ok && b.ok, format!("commute: {}; components: {}", a.detail, b.detail))
}

fn main_theorem() -> Outcome {
    // The curated sets must have finite thickness, seg5 exactly 1, and at
    // least one two-blob bridge must be among them.
    let alpha = Thirds::from_int(6);
    let curated = curated_thin_sets();
    let thick: Vec<(String, Result<Thickness, String>)> = curated
        .par_iter()
        .map(|(name, s)| {
            (
                name.clone(),
                thickness_general(s, alpha, &SearchGuard::default()).map(|r| r.value).map_err(|e| e.to_string()),
            )
        })
        .collect();
    let finite = thick.iter().filter(|(_, t)| matches!(t, Ok(Thickness::Finite(_)))).count();
    let seg5 = thick.iter().find(|(n, _)| n == "seg5").map(|(_, t)| t.clone());
    let bridge = curated.iter().any(|(n, _)| n.starts_with("dumbbell"));
    let records = run_suite("main", &RunConfig::default());
    let inner = match &records {
        Ok(r) => summarize(r, 4 * 20),
        Err(e) => outcome(false, format!("error: {e}")),
    };
    let ok = inner.ok && finite >= 20 && seg5 == Some(Ok(Thickness::Finite(1))) && bridge;
    outcome(ok, format!("{finite} curated sets with finite thickness, seg5 {seg5:?}; {}", inner.detail))
}

fn consensus() -> Outcome {
    match consensus_experiment(&RunConfig::default()) {
        Ok(report) => {
            let per: Vec<String> = report
                .per_size
                .iter()
                .map(|s| format!("n={}: {}/{} capped, {:.3}", s.n, s.capped, s.trials, s.max_ratio))
                .collect();
            let enough = report.per_size.len() == 4 && report.per_size.iter().all(|s| s.trials >= 50);
            outcome(
                enough && report.all_reached() && report.stable,
                format!("{}; constant {:.3}, stable {}", per.join(", "), report.constant, report.stable),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("span_decr", Duration::from_secs(10), Box::new(|| suite("span_decr", Some(200), 800))),
        ("cover oracle", Duration::from_secs(60), Box::new(cover_oracle)),
        ("commute + components", Duration::from_secs(10), Box::new(commute_and_components)),
        ("fat", Duration::from_secs(30), Box::new(|| suite("fat", Some(100), 100))),
        ("toom_limit", Duration::from_secs(30), Box::new(|| suite("toom_limit", Some(200), 200))),
        ("thg", Duration::from_secs(300), Box::new(|| suite("thg", Some(50), 50))),
        ("main theorem", Duration::from_secs(600), Box::new(main_theorem)),
        ("pullback_q", Duration::from_secs(60), Box::new(|| suite("pullback_q", Some(100), 100))),
        ("consensus", Duration::from_secs(120), Box::new(consensus)),
        ("fewer_comp", Duration::from_secs(60), Box::new(|| suite("fewer_comp", Some(50), 50))),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = out.ok && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} ({:.2?} of {:?}{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed,
            limit,
            if in_time { "" } else { ", over time" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
