//! Runs every catalog entry's configured checks and compares verdicts with
//! the entry's declared expectations.

use nullframe::catalog;
use nullframe::driver;

#[test]
fn catalog_expectations_hold() {
    let mut failures = Vec::new();
    for name in catalog::names() {
        let entry = catalog::entry(name).unwrap();
        for screen in entry.screen_names() {
            let cfg = entry.config_for(screen).unwrap();
            let t0 = std::time::Instant::now();
            let report = driver::run(&cfg, &[]).unwrap();
            eprintln!("{name}#{screen}: {:?}", t0.elapsed());
            for exp in entry.expectations.iter().filter(|e| e.screen == screen) {
                let Some(check) = report.checks.iter().find(|c| c.name == exp.check) else {
                    failures.push(format!("{name}#{screen}: check {} missing", exp.check));
                    continue;
                };
                if check.verdict != exp.verdict {
                    failures.push(format!(
                        "{name}#{screen}: {} expected {:?}, got {:?} (max {:.3e}, err {:?})",
                        exp.check, exp.verdict, check.verdict, check.max, check.error
                    ));
                }
            }
        }
    }
    assert!(failures.is_empty(), "\n{}", failures.join("\n"));
}
