use std::process::ExitCode;

use observables::suite::{run_all, SuiteConfig, CRITERIA};

fn main() -> ExitCode {
    let results = run_all(&SuiteConfig::default());
    assert_eq!(results.len(), CRITERIA);
    for r in &results {
        println!("{r} ({:.2}s)", r.elapsed.as_secs_f64());
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {CRITERIA}/{CRITERIA} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
