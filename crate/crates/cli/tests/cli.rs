use std::path::{Path, PathBuf};
use std::process::Command;

use border_cli::load_instance;
use border_core::fixtures;
use border_core::model::ReducedForm;
use border_core::rational::ratio;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn border<I, S>(args: I) -> (i32, Value)
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_border"))
        .args(args)
        .output()
        .unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    });
    (out.status.code().unwrap(), json)
}

fn run(cmd: &str, name: &str) -> (i32, Value) {
    border([cmd, fixture(name).to_str().unwrap()])
}

#[test]
fn prop1_is_infeasible_with_the_a_c_certificate() {
    let (code, out) = run("check", "prop1.json");
    assert_eq!(code, 2);
    let cert = &out["items"][0]["certificate"];
    assert_eq!(cert["set"], serde_json::json!([[1, "A"], [2, "C"]]));
    assert_eq!(cert["lhs"], "37/64");
    assert_eq!(cert["rhs"], "9/16");
    assert_eq!(cert["hyperplane"]["coeffs"].as_array().unwrap().len(), 2);
}

#[test]
fn zero_form_is_feasible() {
    let (code, out) = run("check", "zero.json");
    assert_eq!(code, 0);
    assert_eq!(out["feasible"], true);
}

#[test]
fn iid_fixture_uses_the_iid_check() {
    let (code, out) = border([
        "check",
        fixture("iid-5-8.json").to_str().unwrap(),
        "--item",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out["items"][0]["method"], "iid");
}

#[test]
fn item_out_of_range_is_an_input_error() {
    let (code, out) = border([
        "check",
        fixture("zero.json").to_str().unwrap(),
        "--item",
        "2",
    ]);
    assert_eq!(code, 1);
    assert!(out["error"].is_string());
}

#[test]
fn malformed_input_lists_every_issue() {
    let (code, out) = run("check", "malformed.json");
    assert_eq!(code, 1);
    assert!(out["issues"].as_array().unwrap().len() >= 2);
}

#[test]
fn missing_file_is_an_input_error() {
    let (code, out) = border(["check", "/nonexistent/instance.json"]);
    assert_eq!(code, 1);
    assert!(out["error"].as_str().unwrap().contains("cannot read"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    std::fs::write(&path, r#"{"bidders": [], "items": 1, "extra": 0}"#).unwrap();
    let (code, out) = border(["check", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out["error"].as_str().unwrap().contains("extra"));
}

#[test]
fn decompose_iid_midpoint_into_two_halves() {
    let (code, out) = run("decompose", "iid-5-8.json");
    assert_eq!(code, 0);
    let entries = out["distributions"][0]["entries"].as_array().unwrap();
    let weights: Vec<&str> = entries
        .iter()
        .map(|e| e["weight"].as_str().unwrap())
        .collect();
    assert_eq!(weights, ["1/2", "1/2"]);
}

#[test]
fn decompose_corner_is_a_single_mechanism() {
    let (code, out) = run("decompose", "corner.json");
    assert_eq!(code, 0);
    let entries = out["distributions"][0]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["weight"], "1/1");
}

#[test]
fn decompose_infeasible_exits_two_with_certificate() {
    let (code, out) = run("decompose", "prop1.json");
    assert_eq!(code, 2);
    assert_eq!(out["items"][0]["certificate"]["lhs"], "37/64");
}

fn decompose_to(dir: &Path, name: &str) -> PathBuf {
    let dist = dir.join("dist.json");
    let (code, stdout) = border([
        "decompose",
        fixture(name).to_str().unwrap(),
        "--out",
        dist.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&dist).unwrap()).unwrap();
    assert_eq!(written, stdout);
    dist
}

#[test]
fn simulate_round_trip_stays_within_three_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let dist = decompose_to(dir.path(), "vo-boundary.json");
    let inst = fixture("vo-boundary.json");
    let args = [
        "simulate",
        inst.to_str().unwrap(),
        dist.to_str().unwrap(),
        "--rounds",
        "20000",
        "--seed",
        "3",
    ];
    let (code, out) = border(args);
    assert_eq!(code, 0);
    assert_eq!(out["all_within_3_sigma"], true);
    let analytic: Vec<&str> = out["cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["analytic"].as_str().unwrap())
        .collect();
    assert_eq!(analytic, ["1/3", "5/6", "1/2"]);
    assert!(out.get("allocations").is_none());
    assert_eq!(border(args).1, out);
}

#[test]
fn single_round_gives_one_allocation_record() {
    let dir = tempfile::tempdir().unwrap();
    let dist = decompose_to(dir.path(), "iid-5-8.json");
    let inst = fixture("iid-5-8.json");
    let (code, out) = border([
        "simulate",
        inst.to_str().unwrap(),
        dist.to_str().unwrap(),
        "--rounds",
        "1",
    ]);
    assert_eq!(code, 0);
    let records = out["allocations"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["profile"].as_array().unwrap().len(), 2);
}

#[test]
fn all_lose_distribution_never_allocates() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("lose.json");
    std::fs::write(
        &dist,
        r#"{"distributions": [{"item": 1, "entries": [{"weight": "1/1",
            "ranks": {"1/A": "LOSE", "1/B": "LOSE", "2/C": "LOSE", "2/D": "LOSE"}}]}]}"#,
    )
    .unwrap();
    let inst = fixture("prop1.json");
    let (code, out) = border([
        "simulate",
        inst.to_str().unwrap(),
        dist.to_str().unwrap(),
        "--rounds",
        "500",
    ]);
    assert_eq!(code, 0);
    for c in out["cells"].as_array().unwrap() {
        assert_eq!(c["wins"], 0);
        assert_eq!(c["empirical"], "0/1");
    }
}

#[test]
fn mismatched_distribution_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let dist = decompose_to(dir.path(), "iid-5-8.json");
    let inst = fixture("prop1.json");
    let (code, out) = border([
        "simulate",
        inst.to_str().unwrap(),
        dist.to_str().unwrap(),
        "--rounds",
        "10",
    ]);
    assert_eq!(code, 1);
    assert!(!out["issues"].as_array().unwrap().is_empty());
}

#[test]
fn optimal_revenues() {
    for (name, revenue) in [
        ("one-bidder-12.json", "1/1"),
        ("one-bidder-124.json", "4/3"),
        ("point-mass-11.json", "2/1"),
        ("two-iid-12.json", "3/2"),
    ] {
        let (code, out) = run("optimal", name);
        assert_eq!(code, 0, "{name}");
        assert_eq!(out["revenue"], revenue, "{name}");
    }
}

#[test]
fn optimal_without_values_is_an_input_error() {
    assert_eq!(run("optimal", "prop1.json").0, 1);
}

#[test]
fn general_check_false_extension_one_returns_weights() {
    let (code, out) = run("general-check", "false-ext-1.json");
    assert_eq!(code, 2);
    assert_eq!(out["feasible"], false);
    assert_eq!(out["weights"].as_array().unwrap().len(), 2 * 3 * 2);
    let lhs = border_core::parse_rational(out["lhs"].as_str().unwrap()).unwrap();
    let rhs = border_core::parse_rational(out["rhs"].as_str().unwrap()).unwrap();
    assert!(lhs > rhs);
}

#[test]
fn general_check_zero_with_demands_is_feasible() {
    let (code, out) = run("general-check", "zero-demands.json");
    assert_eq!(code, 0);
    assert_eq!(out["feasible"], true);
}

#[test]
fn general_check_explicit_system_returns_witness() {
    let (code, out) = run("general-check", "one-bidder-two-items-half.json");
    assert_eq!(code, 0);
    for w in out["witness"].as_array().unwrap() {
        assert_eq!(w["phi"]["1,1"], "1/2");
        assert_eq!(w["phi"]["1,2"], "1/2");
    }
}

#[test]
fn flow_check_matches_general_check() {
    for name in ["false-ext-1.json", "false-ext-2.json", "zero-demands.json"] {
        let (flow_code, flow) = run("flow-check", name);
        let (lp_code, lp) = run("general-check", name);
        assert_eq!(flow_code, lp_code, "{name}");
        assert_eq!(flow["feasible"], lp["feasible"], "{name}");
    }
}

#[test]
fn flow_check_needs_demands() {
    assert_eq!(run("flow-check", "prop1.json").0, 1);
}

fn loaded(name: &str) -> border_cli::Instance {
    load_instance(&fixture(name)).unwrap()
}

fn symmetric(pi: &[(i64, i64)], bidders: usize) -> ReducedForm {
    ReducedForm::single(vec![
        pi.iter().map(|&(n, d)| ratio(n, d)).collect();
        bidders
    ])
}

#[test]
fn fixture_files_match_the_library_fixtures() {
    let (model, rf) = fixtures::threshold_blind_spot();
    let inst = loaded("prop1.json");
    assert_eq!((inst.model, inst.rf), (model, Some(rf)));

    let (model, rf) = fixtures::virtual_order_boundary(&ratio(1, 6));
    let inst = loaded("vo-boundary.json");
    assert_eq!((inst.model, inst.rf), (model, Some(rf)));

    let (model, srf) = fixtures::iid_five_eighths();
    let inst = loaded("iid-5-8.json");
    assert_eq!(inst.rf, Some(srf.to_reduced_form(2)));
    assert_eq!(inst.model, model);

    let (model, _) = fixtures::iid_two_types(ratio(3, 4), ratio(1, 4));
    let inst = loaded("corner.json");
    assert_eq!(inst.rf, Some(symmetric(&[(3, 4), (1, 4)], 2)));
    assert_eq!(inst.model, model);

    for (name, (model, rf)) in [
        ("false-ext-1.json", fixtures::false_extension_one()),
        ("false-ext-2.json", fixtures::false_extension_two()),
    ] {
        let inst = loaded(name);
        assert_eq!((inst.model, inst.rf), (model, Some(rf)), "{name}");
    }

    let values = |name: &str| loaded(name).valuation.unwrap();
    assert_eq!(
        values("one-bidder-12.json"),
        fixtures::one_bidder_values(&[ratio(1, 1), ratio(2, 1)])
    );
    assert_eq!(
        values("one-bidder-124.json"),
        fixtures::one_bidder_values(&[ratio(1, 1), ratio(2, 1), ratio(4, 1)])
    );
    assert_eq!(
        values("point-mass-11.json"),
        fixtures::point_mass_two_items()
    );
    assert_eq!(
        values("two-iid-12.json"),
        fixtures::two_iid_bidders_one_two()
    );
}
