//! Runs every acceptance experiment at its stated tolerance and trial count,
//! printing one PASS/FAIL line each. Exits non-zero if any check fails.
//! Pass a substring as the first argument to run a subset.

use std::time::{Duration, Instant};

use algdiv::experiments::{run_experiment, ExpParams, NAMES};

/// Wall-clock budgets; experiments without one are unbounded.
fn budget(name: &str) -> Option<Duration> {
    let secs = match name {
        "fast-path" => 5,
        "converse" => 30,
        "blind-matching" => 120,
        "scaling-dichotomy" => 180,
        "seqgevp-complete" => 10,
        "cma-phase" => 180,
        "coding-rate" => 300,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored.
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let params = ExpParams { seed: 0, trials: None };
    let mut failed = Vec::new();
    for (i, name) in NAMES.iter().enumerate() {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let outcome = run_experiment(name, &params);
        let took = start.elapsed();
        let over = budget(name).filter(|b| took > *b);
        let (ok, detail) = match &outcome {
            Ok(r) => (r.passed && over.is_none(), format!("{} {}", r.criterion, r.metrics)),
            Err(e) => (false, format!("error: {e}")),
        };
        let limit = budget(name).map(|b| format!(" (limit {} s)", b.as_secs())).unwrap_or_default();
        println!(
            "{} {:>2} {:<18} {:>7.2} s{} | {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            name,
            took.as_secs_f64(),
            limit,
            detail
        );
        if !ok {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all checks passed");
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
