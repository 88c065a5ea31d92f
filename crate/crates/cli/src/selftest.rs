use spinorbit::validation::{criteria, run_criterion, Suite};

pub fn list() {
    for (id, title) in criteria() {
        println!("{id:>2}  {title}");
    }
}

/// Runs the criteria (all when `only` is empty); returns the ids that failed.
pub fn run(suite: &Suite, only: &[usize], verbose: bool) -> Vec<usize> {
    let mut failed = Vec::new();
    for (id, _) in criteria() {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let report = run_criterion(id, suite);
        println!("{report}");
        if verbose || !report.passed() {
            print!("{}", report.details());
        }
        if !report.passed() {
            failed.push(id);
        }
    }
    failed
}
