use std::process::ExitCode;

use chiralwg::validation::{all_passed, run_all, summary_line, CheckStatus};

fn main() -> ExitCode {
    let reports = run_all(None);
    for r in &reports {
        println!("{}", summary_line(r));
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| r.status != CheckStatus::Pass)
        .map(|r| r.id.as_str())
        .collect();
    if reports.len() == 14 && all_passed(&reports) {
        println!("acceptance: 14/14 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} checks, failed {failed:?}", reports.len());
        ExitCode::FAILURE
    }
}
