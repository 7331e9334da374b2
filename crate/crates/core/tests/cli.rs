use std::path::Path;
use std::process::{Command, Output};

use lcorr::cli::{parse_grid, parse_set, table_from_csv, table_to_csv, TABLE_HEADER};
use lcorr::correlation::build_table;
use lcorr::special::{polylog, prime_zeta};
use lcorr::{CovKind, PrincipalCharacter, Rational, TruncationPolicy};
use serde_json::Value;

fn lcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcorr"))
        .args(args)
        .output()
        .expect("spawn lcorr")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn out_path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn vertical_table_has_144_cells_and_unit_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let f = out_path(&dir, "vert.csv");
    let o = lcorr(&["table", "--kind", "vert", "--sigma", "3/4", "--range", "1..12", "--modulus", "1", "-o", &f]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let hdr: Vec<String> = csv::Reader::from_path(&f).unwrap().headers().unwrap().iter().map(String::from).collect();
    assert_eq!(hdr, TABLE_HEADER);
    let rows = read_csv(Path::new(&f));
    assert_eq!(rows.len(), 144);
    for r in &rows {
        assert_eq!(&r[0], "vert");
        assert_eq!(&r[1], "3/4");
        let rho: f64 = r[5].parse().unwrap();
        if r[2] == r[3] {
            assert_eq!(rho, 1.0);
        } else {
            assert!(rho > 0.0 && rho < 1.0);
        }
    }
}

#[test]
fn diagonal_table_from_two_avoids_the_singular_row() {
    let o = lcorr(&["table", "--kind", "diag", "--sigma", "1/2", "--range", "2..12"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 121);
    assert!(text.lines().skip(1).all(|l| !l.ends_with(',')));
}

#[test]
fn singular_cells_are_absent_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = out_path(&dir, "t.json");
    let o = lcorr(&["table", "--kind", "diag", "--sigma", "1/2", "--range", "1..3", "--format", "json", "-o", &f]);
    assert_eq!(code(&o), 2);
    let v = read_json(Path::new(&f));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["meta"]["kind"], "diag");
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 9);
    let absent: Vec<&Value> = cells.iter().filter(|c| c["rho"].is_null()).collect();
    assert_eq!(absent.len() as u64, v["meta"]["absent"].as_u64().unwrap());
    assert!(!absent.is_empty());
    for c in absent {
        assert!(c["reason"].as_str().unwrap().contains("singular"));
    }
}

#[test]
fn malformed_sigma_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let f = out_path(&dir, "never.csv");
    let o = lcorr(&["table", "--kind", "vert", "--sigma", "abc", "--range", "1..3", "-o", &f]);
    assert_eq!(code(&o), 1);
    assert!(!Path::new(&f).exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("rational"));
}

#[test]
fn non_positive_sigma_names_the_constraint() {
    let o = lcorr(&["table", "--kind", "vert", "--sigma", "0", "--range", "1..3"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma must be positive"));
}

#[test]
fn decimal_and_fraction_sigma_give_identical_tables() {
    let a = lcorr(&["table", "--kind", "diag", "--sigma", "0.75", "--range", "1..6"]);
    let b = lcorr(&["table", "--kind", "diag", "--sigma", "3/4", "--range", "1..6"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn table_csv_round_trips() {
    let p = TruncationPolicy::default();
    let chi = PrincipalCharacter::new(6).unwrap();
    let alphas: Vec<Rational> = ["1", "3/2", "2", "5"].iter().map(|s| s.parse().unwrap()).collect();
    let betas: Vec<Rational> = ["1", "2", "7/3"].iter().map(|s| s.parse().unwrap()).collect();
    let sigma: Rational = "2/3".parse().unwrap();
    for kind in [CovKind::Diag, CovKind::Vert] {
        let t = build_table(kind, &alphas, &betas, sigma.to_f64(), &chi, &p).unwrap();
        let bytes = table_to_csv(&t, sigma).unwrap();
        let back = table_from_csv(bytes.as_slice(), 6).unwrap();
        assert_eq!(back.kind, t.kind);
        assert_eq!(back.sigma, t.sigma);
        assert_eq!(back.alphas, t.alphas);
        assert_eq!(back.betas, t.betas);
        assert_eq!(back.values, t.values);
        assert_eq!(back.divis_mask, t.divis_mask);
        assert_eq!(table_to_csv(&back, sigma).unwrap(), bytes);
    }
}

#[test]
fn rms_default_grid_matches_reference_near_one() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = out_path(&dir, "m1.csv");
    let f2 = out_path(&dir, "m2.csv");
    assert_eq!(code(&lcorr(&["rms", "-o", &f1])), 0);
    assert_eq!(code(&lcorr(&["rms", "--modulus", "2", "-o", &f2])), 0);
    let m1 = read_csv(Path::new(&f1));
    let m2 = read_csv(Path::new(&f2));
    assert_eq!(m1.len(), 138);
    assert_eq!(&m1[0][0], "0.26");
    assert_eq!(&m1[137][0], "3");
    let at_one = m1.iter().find(|r| &r[0] == "1").unwrap();
    let rms: f64 = at_one[1].parse().unwrap();
    assert!((0.102..=0.106).contains(&rms), "{rms}");
    for (a, b) in m1.iter().zip(&m2) {
        assert_eq!(a[0], b[0]);
        let (x, y): (f64, f64) = (a[1].parse().unwrap(), b[1].parse().unwrap());
        assert!(y < x, "sigma={}: M=2 {y} not below M=1 {x}", &a[0]);
    }
}

#[test]
fn rms_grid_below_quarter_is_partial() {
    let o = lcorr(&["rms", "--grid", "0.1..3", "--format", "json"]);
    assert_eq!(code(&o), 2);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    for row in v["rows"].as_array().unwrap() {
        let s = row["sigma"].as_f64().unwrap();
        if s <= 0.25 {
            assert!(row["rms_simple"].is_null());
            assert!(row["reason"].as_str().unwrap().contains("1/4"));
        } else {
            assert!(row["rms_simple"].as_f64().unwrap() > 0.0);
        }
    }
}

#[test]
fn identity_domain_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = out_path(&dir, "id.json");
    let o = lcorr(&["identity", "--suite", "nondivisor", "--x", "1.05", "-o", &f]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2^(1/6)"));
    assert!(!Path::new(&f).exists());
}

#[test]
fn variance_symmetry_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let f = out_path(&dir, "vs.json");
    let o = lcorr(&["identity", "--suite", "variance-symmetry", "--sigma", "0.5,1", "--modulus", "1,2,6", "-o", &f]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(Path::new(&f));
    assert_eq!(v["meta"]["total"], 6);
    assert_eq!(v["meta"]["passed"], 6);
}

#[test]
fn identity_exit_code_tracks_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = out_path(&dir, "nd.json");
    let o = lcorr(&["identity", "--suite", "nondivisor", "--v", "-2,0,2", "--x", "1.2,2,10", "-o", &f]);
    let v = read_json(Path::new(&f));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 18);
    let all_pass = reports.iter().all(|r| r["pass"].as_bool().unwrap());
    assert_eq!(code(&o), if all_pass { 0 } else { 2 });
    // fast-decay cells are unaffected by the small-x residual
    for r in reports.iter().filter(|r| r["parameters"]["x"] == 10.0) {
        assert!(r["pass"].as_bool().unwrap(), "{r}");
    }
}

#[test]
fn character_difference_and_order_shift_defaults_pass() {
    for suite in ["character-difference", "order-shift", "parity"] {
        let o = lcorr(&["identity", "--suite", suite, "--x", "1.5,2,10"]);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn prime_l_null_covariance_within_three_se() {
    let o = lcorr(&["mc", "--kind", "reP", "--alpha", "2", "--beta", "3", "--sigma", "1.5"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let est = &v["report"]["estimate"];
    assert!(est["raw_moment"].as_f64().unwrap().abs() <= 3.0 * est["std_error"].as_f64().unwrap());
    assert_eq!(v["report"]["closed_form"], 0.0);
}

#[test]
fn mc_report_is_deterministic_apart_from_timestamp() {
    let run = || {
        let o = lcorr(&["mc", "--kind", "vert", "--alpha", "2", "--beta", "1", "--samples", "500", "--seed", "11"]);
        assert!(code(&o) == 0 || code(&o) == 2);
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["meta"]["timestamp"].as_u64().is_some());
        v["meta"]["timestamp"] = Value::Null;
        assert_eq!(v["meta"]["seed"], 11);
        serde_json::to_vec(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn mc_vertical_log_l_example() {
    let o = lcorr(&[
        "mc", "--kind", "vert", "--alpha", "2", "--beta", "1", "--sigma", "1", "--samples", "20000", "--span", "1e5",
        "--seed", "7",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["z_score"].as_f64().unwrap() <= 3.0);
    assert_eq!(v["report"]["representation"], "li2_prime_sum");
}

#[test]
fn eval_matches_library() {
    let p = TruncationPolicy::default();
    let o = lcorr(&["eval", "primezeta", "--sigma", "2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let want = prime_zeta(2.0, &PrincipalCharacter::trivial(), &p).unwrap().value;
    assert_eq!(v["value"].as_f64().unwrap(), want);
    assert!((want - 0.452_247_420_041_065_5).abs() < 1e-15);

    let o = lcorr(&["eval", "polylog", "--v", "2", "--z", "0.5"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let li = polylog(2.0, 0.5, &p).unwrap().value;
    assert_eq!(v["value"].as_f64().unwrap(), li);
    let closed = std::f64::consts::PI.powi(2) / 12.0 - std::f64::consts::LN_2.powi(2) / 2.0;
    assert!((li - closed).abs() < 1e-15);

    let o = lcorr(&["eval", "logL", "--sigma", "1", "--t", "50", "--modulus", "6"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap().is_finite());
    assert_eq!(v["args"]["near_zero"], false);
}

#[test]
fn eval_singular_point_is_an_error() {
    let o = lcorr(&["eval", "primezeta", "--sigma", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lcorr"))
            .env("LCORR_THREADS", threads)
            .args(["table", "--kind", "diag", "--sigma", "1", "--range", "1..8"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn policy_overrides_are_validated() {
    let o = lcorr(&["--tol", "-1", "eval", "polylog", "--v", "2", "--z", "0.5"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn set_and_grid_parsing() {
    let s = parse_set("1..4").unwrap();
    assert_eq!(s.0.iter().map(|r| r.to_string()).collect::<Vec<_>>(), ["1", "2", "3", "4"]);
    let s = parse_set("1/2,3,0.25").unwrap();
    assert_eq!(s.0.iter().map(|r| r.to_string()).collect::<Vec<_>>(), ["1/2", "3", "1/4"]);
    assert!(parse_set("4..1").is_err());
    assert!(parse_set("1.5..3").is_err());
    let s = parse_set("1..2:1/3").unwrap();
    assert_eq!(s.0.iter().map(|r| r.to_string()).collect::<Vec<_>>(), ["1", "4/3", "5/3", "2"]);
    let g = parse_grid("1..2:1/4").unwrap();
    assert_eq!(g.0.len(), 5);
    let g = parse_grid("0.26..3.0").unwrap();
    assert_eq!(g.0.len(), 138);
    assert_eq!(g.0[137], Rational::integer(3));
}
