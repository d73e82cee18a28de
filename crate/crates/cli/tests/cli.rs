use std::path::PathBuf;
use std::process::{Command, Output};

fn mislab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mislab")).args(args).env_remove("MISLAB_CACHE_DIR").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data lines (no `#` comments), split into cells.
fn table(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("mislab-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn exact_mean_hand_value() {
    // mu_2 = 1 + mu_1 + (1/2)mu_0 + ... = 3/2 by hand, then
    // mu_3 = mu_2 + (1/4 mu_2 + 1/2 mu_1 + 1/4 mu_0) = 3/2 + 7/8 = 19/8.
    let o = mislab(&["exact-mean", "--p", "1/2", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(table(&o), vec![vec!["n", "mu"], vec!["3", "19/8"]]);
    let text = stdout(&o);
    assert!(text.starts_with("# mislab/"));
    assert!(text.contains("# command=exact-mean p=1/2 n=3"));
}

#[test]
fn zeta_second_moment() {
    let o = mislab(&["zeta", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = table(&o);
    assert_eq!(rows[3][..2], ["2".to_string(), "4/3".to_string()]);
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn usage_errors_exit_1() {
    let decimal = mislab(&["exact-mean", "--p", "0.5", "--n", "3"]);
    assert_eq!(decimal.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&decimal.stderr).contains("1/2"));
    assert_eq!(mislab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(mislab(&["exact-mean", "--p", "3/2", "--n", "3"]).status.code(), Some(1));
    assert_eq!(mislab(&["exact-mean", "--n-grid", "9:3:+1"]).status.code(), Some(1));
    assert_eq!(mislab(&["exact-mean"]).status.code(), Some(1));
    assert_eq!(mislab(&["cache", "--n", "5"]).status.code(), Some(1));
}

#[test]
fn failed_check_exits_2_but_writes_report() {
    // At R = 2000 the sample kurtosis of Y over 50, 100, 200 is not monotone
    // for seed 42, so one asserted trend fails.
    let o = mislab(&["normality", "--n-grid", "50:200:x2", "-R", "2000", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("# check sample excess kurtosis shrinks: FAIL"));
    assert_eq!(table(&o).len(), 4);
}

#[test]
fn compare_example_grid() {
    let o = mislab(&["compare", "--p", "1/2", "--n-grid", "500:5000:x2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = table(&o);
    assert_eq!(rows[0], ["n", "mu", "poisson", "poisson/mu", "leading", "leading/mu"]);
    let ns: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns, ["500", "1000", "2000", "4000"]);
    // The Poisson value approaches mu from above.
    let pr: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(pr.windows(2).all(|w| w[1] < w[0]) && pr.iter().all(|&v| v > 1.0));
}

#[test]
fn cache_hit_is_byte_identical() {
    let dir = scratch("cache");
    let d = dir.to_str().unwrap();
    for args in [
        vec!["compare", "--n-grid", "100:400:x2"],
        vec!["moments", "--n-grid", "10:40:+10", "--m", "4"],
        vec!["exact-mean", "--n-grid", "5,10", "--mode", "real", "--format", "json"],
    ] {
        let cold = mislab(&[args.as_slice(), &["--cache-dir", d]].concat());
        let warm = Command::new(env!("CARGO_BIN_EXE_mislab")).args(&args).env("MISLAB_CACHE_DIR", d).output().unwrap();
        let plain = mislab(&args);
        assert_eq!(cold.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&cold.stderr).contains("cached"));
        assert!(String::from_utf8_lossy(&warm.stderr).contains("cache hit"));
        assert_eq!(cold.stdout, warm.stdout, "{args:?}");
        assert_eq!(cold.stdout, plain.stdout, "{args:?}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_is_deterministic_and_json_parses() {
    let dir = scratch("sim");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("y.json");
    let args = ["simulate", "--kind", "Y", "--n-grid", "20:80:x2", "-R", "300", "--seed", "7", "--format", "json"];
    let a = mislab(&[args.as_slice(), &["--output", file.to_str().unwrap()]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert!(a.stdout.is_empty());
    let b = mislab(&args);
    assert_eq!(std::fs::read(&file).unwrap(), b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(v["data"].as_array().unwrap().len(), 3);
    assert_eq!(v["data"][0]["R"], 300);
    assert_eq!(v["config"]["seed"], "7");
    let other = mislab(&["simulate", "--kind", "Y", "--n-grid", "20:80:x2", "-R", "300", "--seed", "8", "--format", "json"]);
    assert_ne!(other.stdout, b.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn closed_forms_and_jn_agree() {
    for mode in ["exact", "real"] {
        let o = mislab(&["closed-forms", "--p", "1/3", "--n-grid", "1:40:+13", "--mode", mode]);
        assert_eq!(o.status.code(), Some(0), "{mode}");
        let o = mislab(&["jn", "--p", "2/3", "--n-grid", "1:31:+10", "--mode", mode]);
        assert_eq!(o.status.code(), Some(0), "{mode}");
    }
}

#[test]
fn nu_factorial_scaling() {
    // nu_2 = 3/2 (Z_2 = Z_1 + Z_U, U uniform on {0,1}); 2! nu_2 = 3.
    let o = mislab(&["nu", "--n-grid", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(table(&o)[1], ["2", "3/2", "3"]);
}
