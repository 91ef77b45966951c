//! Full acceptance run: every criterion at its stated scale, one line per
//! criterion. Run with `cargo test --test acceptance -- --nocapture` to see
//! lines as they finish; the whole suite takes several minutes.

use congraph_cli::criteria;

#[test]
fn acceptance() {
    let reports = criteria::run_all(0xACCE57, |r| println!("{}", r.line()));
    assert_eq!(reports.len(), 10);
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.ok())
        .map(|r| format!("criterion {:02} {}: {}", r.id, r.name, r.details))
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
