use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn slotcav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slotcav")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn empty_config_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "");
    let out = slotcav(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["error"]["kind"], "schema");
    assert_eq!(rec["error"]["field"], "command");
}

#[test]
fn unknown_key_and_missing_file_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "command = \"dbr\"\n[params]\nn_lo = 1.3\nn_hi = 1.6\nnlo = 2\n");
    assert_eq!(error_record(&slotcav(&["run", &cfg]))["error"]["field"], "nlo");
    let cfg = write(dir.path(), "b.toml", "command = \"nacmt\"\n[params]\nmatrix_file = \"nope.txt\"\n");
    assert_eq!(error_record(&slotcav(&["run", &cfg]))["error"]["field"], "params.matrix_file");
}

#[test]
fn subcommand_must_match_config() {
    let cfg = configs().join("matrix_shared.toml");
    let rec = error_record(&slotcav(&["dbr", cfg.to_str().unwrap()]));
    assert_eq!(rec["error"]["field"], "command");
}

#[test]
fn matrix_files_give_opposite_verdicts() {
    let ok = json(&slotcav(&["nacmt", configs().join("matrix_cladding.toml").to_str().unwrap()]));
    assert_eq!(ok["payload"]["report"]["verdict"], "tight_binding_ok");
    let bad = json(&slotcav(&["run", configs().join("matrix_shared.toml").to_str().unwrap()]));
    assert_eq!(bad["payload"]["report"]["verdict"], "unsuitable");
    assert_eq!(bad["command"], "nacmt");
    assert_eq!(bad["units"]["rates"], "rad/s");
}

#[test]
fn couple_from_known_inputs() {
    let v = json(&slotcav(&["couple", configs().join("couple_rates.toml").to_str().unwrap()]));
    let j_l = v["payload"]["lateral"]["rate"]["value"].as_f64().unwrap();
    assert!((j_l / 3.07e13 - 1.0).abs() < 0.01, "{j_l}");
    let j_e = v["payload"]["longitudinal"]["rate"]["value"].as_f64().unwrap();
    assert!(j_e > 1e11 && j_e < 1e14, "{j_e}");
    let csv = slotcav(&["couple", configs().join("couple_rates.toml").to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("version,kappa_rad2_per_um2,n_eff,J_L_rad_per_s,R,"));
    assert!(lines.next().unwrap().starts_with("coupling/"));
}

#[test]
fn dbr_csv_table_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dbr.toml",
        "command = \"dbr\"\n[params]\nn_lo = 1.31\nn_hi = 1.59\n[sweep]\nperiod = { start = 200, stop = 240, step = 1 }\nperiod_counts = [14.5, 19.5]\n[output]\npath = \"out/r.csv\"\nformat = \"csv\"\n",
    );
    let out = slotcav(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("out/r.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "version,N_p,P_um,R,T");
    assert_eq!(lines.len(), 1 + 2 * 41);
    assert!(lines[1..].iter().all(|l| l.starts_with("dbr/")));

    let a = json(&slotcav(&["run", &cfg, "-f", "json", "-o", "/dev/stdout"]));
    let b = json(&slotcav(&["run", &cfg, "-f", "json", "-o", "/dev/stdout"]));
    assert_eq!(a["payload"].to_string(), b["payload"].to_string());
    assert_eq!(a["config_hash"], b["config_hash"]);
    let slope = a["payload"]["log10_transmission_slope_per_period"].as_f64().unwrap();
    assert!(slope < 0.0);
}

#[test]
fn thread_variable_is_validated() {
    let cfg = configs().join("matrix_cladding.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_slotcav"))
        .args(["run", cfg.to_str().unwrap()])
        .env("SLOTCAV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(error_record(&out)["error"]["field"], "SLOTCAV_THREADS");
    let out = Command::new(env!("CARGO_BIN_EXE_slotcav"))
        .args(["run", cfg.to_str().unwrap()])
        .env("SLOTCAV_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn schema_lists_every_command() {
    let out = slotcav(&["schema"]);
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cmds: Vec<&str> = schema["properties"]["command"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(cmds, ["modes", "couple", "nacmt", "dbr", "modevol", "design"]);
}

#[test]
fn example_configs_validate() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            slotcav::runner::RunConfig::from_file(&p, None).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}

#[test]
fn modes_on_reference_slot() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("single_diamond.toml")).unwrap();
    let cfg = write(dir.path(), "single.toml", &text);
    let out = slotcav(&["modes", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/single_diamond.json")).unwrap()).unwrap();
    let n = v["payload"]["modes"][0]["n_eff"].as_f64().unwrap();
    assert!((n - 1.31).abs() < 0.05, "{n}");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn index_map_csv() {
    let out = slotcav(&["index", configs().join("single_diamond.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x_um,y_um,n\n"));
    assert!(text.lines().skip(1).any(|l| l.ends_with(",2.4")));
}
