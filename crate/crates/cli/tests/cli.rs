use std::path::Path;
use std::process::{Command, Output};

fn amalgam(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_amalgam"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn verify_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["verify", "--example", "dinfty", "--k", "6..8", "--q", "1", "--seed", "7", "--out-dir"];
    args.push(dir.to_str().unwrap());
    args.extend_from_slice(extra);
    amalgam(&args, &[])
}

#[test]
fn verify_passes_and_repeats_byte_for_byte() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = verify_into(a.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(verify_into(b.path(), &["--K-big", "11"]).status.success());
    for file in ["records.csv", "convergence.csv"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["pass"], true);
    assert_eq!(report["config"]["k_big"], 11);
    assert!(report["records"].as_array().unwrap().len() > 10);
}

#[test]
fn small_k_big_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = amalgam(
        &["verify", "--example", "m2diag", "--k", "4", "--q", "3", "--K-big", "5", "--out-dir", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("certificate"));
    assert!(!dir.path().join("report.json").exists());
}

fn table(args: &[&str]) -> Vec<Vec<String>> {
    let out = amalgam(&[&["convergence-table", "--example", "dinfty"], args].concat(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "example,word_id,q,k,p,sup_abs_Rn,norm_error,bound_2q1_supRn");
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn convergence_table_decreases_and_respects_the_bound() {
    let rows = table(&["--q", "1", "--k", "6..24"]);
    let ids: std::collections::BTreeSet<_> = rows.iter().map(|r| r[1].clone()).collect();
    for id in ids {
        let errs: Vec<(usize, f64, f64)> =
            rows.iter().filter(|r| r[1] == id).map(|r| (r[3].parse().unwrap(), r[6].parse().unwrap(), r[7].parse().unwrap())).collect();
        assert_eq!(errs.len(), 19);
        assert!(errs.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 <= w[0].1 + 1e-12));
        assert!(errs.iter().all(|e| e.1 > 0.0 && e.1 <= e.2 + 1e-12));
        assert!(errs.last().unwrap().1 < errs[0].1 / 3.0);
    }
}

#[test]
fn empty_word_has_no_error() {
    for r in table(&["--q", "0", "--k", "4..6"]) {
        assert_eq!(r[5].parse::<f64>().unwrap(), 0.0);
        assert!(r[6].parse::<f64>().unwrap() < 1e-12);
    }
}

#[test]
fn build_example_describes_the_sectors() {
    let out = amalgam(&["build-example", "dinfty", "--cap", "2"], &[]);
    assert!(out.status.success());
    let d: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["base"]["dim"], 1);
    assert_eq!(d["factors"].as_array().unwrap().len(), 2);
    assert!(d["factors"].as_array().unwrap().iter().all(|f| f["algebra"]["dim"] == 2));
    assert_eq!(d["carrier_dim"], 5);
    assert_ne!(amalgam(&["build-example", "nonesuch"], &[]).status.code(), Some(0));
}

#[test]
fn json_descriptions_and_thread_caps_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z2z2.json");
    let z2 = r#"{"order": 2, "table": [[0, 1], [1, 0]], "subgroup": [0]}"#;
    std::fs::write(&path, format!(r#"{{"name": "z2z2", "groups": [{z2}, {z2}]}}"#)).unwrap();
    let args = ["convergence-table", "--example", path.to_str().unwrap(), "--q", "1", "--k", "6"];
    let out = amalgam(&args, &[("AMALGAM_THREADS", "1")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("z2z2,u0q1,1,6,3,"));
    let bad = amalgam(&args, &[("AMALGAM_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}
