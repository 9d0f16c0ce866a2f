//! Runs the fourteen acceptance criteria and prints one line per criterion.

use std::process::ExitCode;

use capkit_core::suite::run_battery;

const SEED: u64 = 7;

fn main() -> ExitCode {
    let results = run_battery(SEED);
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    println!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
