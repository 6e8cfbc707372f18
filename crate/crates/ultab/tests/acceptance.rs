//! Criteria 1-13, run one after another with a wall-clock limit each.
//! Every criterion prints a PASS or FAIL line; the test fails at the end if
//! any line was FAIL.

use std::time::{Duration, Instant};

use ultab::caps::Caps;
use ultab::repro::{self, Params};
use ultab_core::bisim::{full_bisim, k_bisim, max_bisim_level, BisimLevel};
use ultab_core::families::{figure2_pair, figure4_pairs};
use ultab_core::uniformity::degree_of_uniformity;
use ultab_core::Poset;

const SECOND: u64 = 1;
const MINUTE: u64 = 60;

/// Target id and time limit for each criterion, in order.
const PLAN: [(&str, u64); 13] = [
    ("figure2", SECOND),
    ("figure4", SECOND),
    ("lemma-mn", 10 * SECOND),
    ("rn-lemma", MINUTE),
    ("degree", 10 * MINUTE),
    ("wpl-frames", 5 * MINUTE),
    ("stack-lemma", MINUTE),
    ("2uni", 5 * MINUTE),
    ("combs", 10 * MINUTE),
    ("wpl-nonuniform", MINUTE),
    ("box", 5 * MINUTE),
    ("yankov", 5 * MINUTE),
    ("properties", 10 * MINUTE),
];

/// Checks made here directly against the core crate, outside the repro code.
fn cross_check(criterion: usize) -> Result<(), String> {
    match criterion {
        1 => {
            let (chain, fork) = figure2_pair();
            let one = k_bisim(&chain, &fork, 1).map_err(|e| e.to_string())?.is_some();
            let two = k_bisim(&chain, &fork, 2).map_err(|e| e.to_string())?.is_some();
            let full = full_bisim(&chain, &fork).map_err(|e| e.to_string())?.is_some();
            (one && !two && !full).then_some(()).ok_or_else(|| format!("1-bis {one}, 2-bis {two}, full {full}"))
        }
        2 => {
            for (i, (a, b)) in figure4_pairs().iter().enumerate() {
                let level = max_bisim_level(a, b, 32).map_err(|e| e.to_string())?;
                if level != BisimLevel::Level(2) {
                    return Err(format!("pair {} at level {level:?}", i + 1));
                }
            }
            Ok(())
        }
        5 => {
            for (p, want) in [(Poset::chain(2), 1), (Poset::fork(2), 2)] {
                let got = degree_of_uniformity(&p, None).map_err(|e| e.to_string())?.degree;
                if got != want {
                    return Err(format!("degree {got}, want {want}"));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

#[test]
fn acceptance() {
    let caps = Caps::default();
    let params = Params::default();
    let mut failed = Vec::new();
    for (idx, (id, limit)) in PLAN.iter().enumerate() {
        let criterion = idx + 1;
        let limit = Duration::from_secs(*limit);
        let start = Instant::now();
        let outcome = repro::run(id, &params, &caps);
        let elapsed = start.elapsed();
        let extra = cross_check(criterion);
        let (pass, detail) = match (&outcome, &extra) {
            (Ok(o), Ok(())) if o.pass && elapsed <= limit => (true, o.summary.clone()),
            (Ok(o), Ok(())) if o.pass => (false, format!("{} but took {elapsed:?}, limit {limit:?}", o.summary)),
            (Ok(o), Ok(())) => (false, format!("{} evidence {}", o.summary, o.evidence)),
            (Ok(o), Err(e)) => (false, format!("{}; cross-check: {e}", o.summary)),
            (Err(e), _) => (false, e.to_string()),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {criterion:>2} {id}: {detail} ({:.2}s)", elapsed.as_secs_f64());
        if !pass {
            failed.push(criterion);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

