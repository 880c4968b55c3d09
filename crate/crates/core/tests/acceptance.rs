//! Runs every acceptance criterion and prints one line per criterion. Set
//! `HITWALK_ACCEPTANCE=3,5` to run a subset.

use std::process::ExitCode;

use hitwalk::acceptance::{run, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    let ids: Vec<usize> = match std::env::var("HITWALK_ACCEPTANCE") {
        Ok(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        Err(_) => (1..=CRITERIA).collect(),
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut failed = 0;
    for id in &ids {
        let outcome = run(*id, DEFAULT_SEED, workers);
        println!("{outcome}");
        failed += usize::from(!outcome.passed);
    }
    println!("acceptance: {} passed, {failed} failed", ids.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
