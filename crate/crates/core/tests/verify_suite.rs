use sdpxlab::verify::{self, CASE_IDS};

#[test]
fn run_all_is_deterministic_and_passes() {
    let a = verify::run_all(3).unwrap();
    let b = verify::run_all(3).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let failed: Vec<String> = a.reports.iter().filter(|r| !r.pass).map(|r| r.summary_line()).collect();
    assert!(a.pass, "{failed:#?}");
}

#[test]
fn every_check_carries_provenance() {
    for id in CASE_IDS {
        let report = verify::run_case(id).unwrap();
        assert!(report.pass, "{}", report.summary_line());
        for check in &report.checks {
            let v = serde_json::to_value(check).unwrap();
            let p = v["provenance"].as_str().unwrap();
            assert!(["published", "trivial", "derived"].contains(&p), "{id}: {p}");
        }
    }
    assert!(verify::run_case("unknown").is_err());
}
