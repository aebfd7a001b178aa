use sarrus_web::{phase_portrait_view, simulate_view, thrust_profile_view};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn default_jump() {
    let v = parse(simulate_view("").unwrap());
    assert_eq!(v["summary"]["termination"], "TakeOff");
    let eta = v["summary"]["eta_pct"].as_f64().unwrap();
    assert!((eta - 63.1).abs() < 1.5);
    let t = v["t"].as_array().unwrap();
    assert!(t.len() <= 601);
    assert_eq!(t.len(), v["h"].as_array().unwrap().len());
}

#[test]
fn overrides_apply() {
    let v = parse(simulate_view("masses.mu_C=0\n\n options.theta0=0.1 ").unwrap());
    assert!(v["summary"]["eta_pct"].as_f64().unwrap() > 65.0);
    assert!(simulate_view("masses.nope=1").is_err());
}

#[test]
fn profile_and_portrait() {
    let p = parse(thrust_profile_view("", 50).unwrap());
    assert_eq!(p["thrust"].as_array().unwrap().len(), 50);
    let pp = parse(phase_portrait_view("", &[0.3, 1.0], false).unwrap());
    assert_eq!(pp["curves"].as_array().unwrap().len(), 2);
    assert!(phase_portrait_view("", &[2.0], false).is_err());
}
