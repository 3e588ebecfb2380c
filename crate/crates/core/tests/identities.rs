use wsrmax::equivalence::{run_suite, SuiteConfig};

#[test]
fn identity_suite_passes_on_seeded_instances() {
    let reports = run_suite(&[1, 2, 3], &SuiteConfig::default()).unwrap();
    for r in &reports {
        println!("{}", r.to_json_line());
    }
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn forced_failure_is_reported() {
    let cfg = SuiteConfig { force_fail: true, ..SuiteConfig::default() };
    let reports = run_suite(&[1], &cfg).unwrap();
    let map = reports.iter().find(|r| r.identity == "wmmse_mm_map").unwrap();
    assert!(!map.pass);
    assert!(map.discrepancy >= 1e-4);
}
