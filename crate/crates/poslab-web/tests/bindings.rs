use serde_json::Value;

use poslab_web::{bound_curves, ma_dim1, split_pair};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn curves_start_at_the_suboptimal_bound() {
    let r = parse(bound_curves(3, 5.0, 0.4, 3.0, 50));
    let g = r["g"].as_array().unwrap();
    assert_eq!(g.len(), 50);
    let g1 = g[0][1].as_f64().unwrap();
    assert!((g1 - r["suboptimal"].as_f64().unwrap()).abs() < 1e-14);
    let last = g[49][1].as_f64().unwrap();
    assert!((last - r["nef_threshold_bound"].as_f64().unwrap()).abs() < 1e-12);
    let f = r["f"].as_array().unwrap();
    assert!((f[49][1].as_f64().unwrap() - r["conjecture_rhs"].as_f64().unwrap()).abs() < 1e-14);
}

#[test]
fn curves_report_domain_errors() {
    let r = parse(bound_curves(3, 2.0, 0.4, 3.0, 10));
    assert!(r["error"].as_str().unwrap().contains("R > n"));
}

#[test]
fn split_pair_example() {
    let r = parse(split_pair(&[3.0, 2.0], &[1.0, 0.5]));
    assert!((r["t0"].as_f64().unwrap() - 3.0).abs() < 1e-14);
    assert!((r["bounds"]["conjecture_rhs"].as_f64().unwrap() - 5.0).abs() < 1e-13);
    assert_eq!(r["profile"].as_array().unwrap().len(), 3);
    assert!(parse(split_pair(&[1.0], &[1.0, 2.0]))["error"].is_string());
}

#[test]
fn ma_recovers_the_manufactured_potential() {
    let r = parse(ma_dim1(32, 0.01, 3));
    assert!(r["sup_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["u"].as_array().unwrap().len(), 32 * 32);
    assert!(parse(ma_dim1(32, 0.5, 3))["error"].is_string());
}
