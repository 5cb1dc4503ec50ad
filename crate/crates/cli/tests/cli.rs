use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpt_cli::config::{parse, Source};
use qpt_cli::{ResultTable, RunConfig, Values};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_scaling-cli"));
    c.env_remove("QPT_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Reads a table and checks that it serializes back to the same bytes.
fn read_back(path: &Path) -> ResultTable {
    let text = std::fs::read_to_string(path).unwrap();
    let table = ResultTable::from_csv(&text).unwrap();
    assert_eq!(
        table.to_csv(),
        text,
        "{} does not round-trip",
        path.display()
    );
    table
}

fn texts<'a>(t: &'a ResultTable, name: &str) -> &'a [String] {
    match &t.column(name).unwrap().values {
        Values::Text(v) => v,
        other => panic!("{name} is not text: {other:?}"),
    }
}

#[test]
fn help_lists_subcommands() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "dicke-fidelity",
        "dicke-echo",
        "dicke-converge",
        "lmg-fidelity",
        "lmg-echo",
        "collapse",
        "sweep",
    ] {
        assert!(text.contains(sub), "missing {sub} in\n{text}");
    }
}

#[test]
fn fig1_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig1.json");
    let out = run_in(dir.path(), &["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("fig1.csv"));
    let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "eta",
            "lambda1",
            "lambda2",
            "phase",
            "Lp_analytic",
            "Lp_scaling"
        ]
    );
    let eta = t.floats("eta").unwrap();
    let lp = t.floats("Lp_scaling").unwrap();
    let i = eta.iter().position(|&e| e == 0.1).unwrap();
    assert!((lp[i] - 0.92437).abs() < 1e-5, "{}", lp[i]);
    let analytic = t.floats("Lp_analytic").unwrap();
    for (a, s) in analytic.iter().zip(lp) {
        assert!((a - s).abs() < 1e-3);
    }
    assert!(t.provenance("config_sha256").unwrap().len() == 64);
    assert!(t.provenance("truncation").is_some());
}

#[test]
fn fig2_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig2.json");
    let out = run_in(dir.path(), &["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("fig2.csv"));
    let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["N", "n_b", "LpN", "D"]);
    let d = t.floats("D").unwrap();
    assert_eq!(d.len(), 5);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn fig3_config_collapses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig3.json");
    let out = run_in(dir.path(), &["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("fig3.csv"));
    let dev = t.floats("deviation").unwrap();
    assert!(dev.iter().all(|&d| d <= 1e-6));
    let spreads: Vec<_> = t
        .provenance
        .iter()
        .filter(|(k, _)| k.starts_with("max_spread"))
        .collect();
    assert_eq!(spreads.len(), 3);
}

#[test]
fn sweep_scale_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--eta",
            "0.1",
            "--scale",
            "1e-2,1e-3",
            "-o",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("s.csv"));
    let lp = t.floats("Lp_analytic").unwrap();
    assert_eq!(lp.len(), 2);
    assert!((lp[0] - lp[1]).abs() <= 1e-3);
}

#[test]
fn sweep_eta_one_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--model",
            "dicke,lmg",
            "--eta",
            "1",
            "--scale",
            "1e-2,1e-3",
            "--phase",
            "normal,ordered",
            "--gamma",
            "0.5",
            "-o",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("s.csv"));
    assert_eq!(t.n_rows(), 8);
    assert!(t.floats("Lp_analytic").unwrap().iter().all(|&v| v == 1.0));
    assert!(t.floats("Lp_scaling").unwrap().iter().all(|&v| v == 1.0));
    let models: BTreeSet<&str> = texts(&t, "model").iter().map(String::as_str).collect();
    assert_eq!(models, BTreeSet::from(["dicke", "lmg"]));
}

#[test]
fn sweep_with_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--eta",
            "0.2",
            "--scale",
            "0.2",
            "--n-atoms",
            "8,16",
            "-o",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("s.csv"));
    assert_eq!(t.n_rows(), 2);
    let exact = t.floats("Lp_exact").unwrap();
    let analytic = t.floats("Lp_analytic").unwrap()[0];
    assert!((exact[1] - analytic).abs() < (exact[0] - analytic).abs());
}

#[test]
fn empty_eta_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["sweep", "--scale", "1e-3"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("etas"), "{}", stderr(&out));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn invalid_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"task\": \"fidelity\",\n  \"model\": \"dicke\",\n  \"etaz\": [0.1]\n}\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", "-c", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("bad.json:4:"), "{err}");

    std::fs::write(&path, "{\n  \"task\": \"fidelity\",\n  \"omega\": -1\n}\n").unwrap();
    let out = run_in(dir.path(), &["run", "-c", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("bad.json:3: omega"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn run_without_task_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--eta", "0.1", "--scale", "1e-3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cross_phase_pair_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["dicke-fidelity", "--pair", "0.4:0.6"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("different phases"),
        "{}",
        stderr(&out)
    );
    let out = run_in(dir.path(), &["lmg-fidelity", "--pair", "1.1:0.9"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn resource_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "dicke-converge",
            "--pair",
            "0.4:0.3",
            "--n-atoms",
            "8",
            "--max-dim",
            "10",
        ],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = run_in(
        dir.path(),
        &[
            "dicke-echo",
            "--pair",
            "0.4:0",
            "--n-atoms",
            "40",
            "--dense-threshold",
            "100",
        ],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig1.json");
    let out = run_in(
        dir.path(),
        &[
            "run",
            "-c",
            cfg.to_str().unwrap(),
            "--eta",
            "0.1",
            "-o",
            "one.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let one = read_back(&dir.path().join("one.csv"));
    assert_eq!(one.n_rows(), 2);
    assert!(one.floats("eta").unwrap().iter().all(|&e| e == 0.1));
    let out = run_in(dir.path(), &["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let all = read_back(&dir.path().join("fig1.csv"));
    assert_ne!(
        one.provenance("config_sha256"),
        all.provenance("config_sha256")
    );
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "dicke-echo",
        "--pair",
        "0.4:0",
        "--pair",
        "0.45:0.3",
        "--n-atoms",
        "8,16",
        "--samples-per-period",
        "50",
    ];
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let name = format!("t{i}.csv");
        let mut a = args.to_vec();
        a.extend(["--threads", threads, "-o", &name]);
        let out = run_in(dir.path(), &a);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push(std::fs::read(dir.path().join(&name)).unwrap());
    }
    let mut a = args.to_vec();
    a.extend(["-o", "env.csv"]);
    let out = bin()
        .current_dir(dir.path())
        .args(&a)
        .env("QPT_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    outputs.push(std::fs::read(dir.path().join("env.csv")).unwrap());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let t = read_back(&dir.path().join("t0.csv"));
    assert_eq!(t.n_rows(), 4 * 51);
}

#[test]
fn bad_thread_env_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["lmg-fidelity", "--eta", "0.1", "--scale", "1e-3"])
        .env("QPT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn lmg_echo_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "lmg-echo",
            "--gamma",
            "0.5",
            "--eta",
            "0.01",
            "--scale",
            "1e-4",
            "--samples-per-period",
            "2000",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = read_back(&dir.path().join("lmg-echo.csv"));
    let m = t.floats("M").unwrap();
    assert_eq!(m[0], 1.0);
    let min = m.iter().copied().fold(f64::INFINITY, f64::min);
    // The scaling form holds to first order in h2 - 1.
    let want = 2.0 * 0.1 / 1.01;
    assert!((min - want).abs() < 1e-3, "{min} vs {want}");
}

#[test]
fn failed_write_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "lmg-fidelity",
            "--eta",
            "0.1",
            "--scale",
            "1e-3",
            "-o",
            "missing/x.csv",
        ],
    );
    assert_eq!(code(&out), 1);
    let out = run_in(
        dir.path(),
        &[
            "lmg-fidelity",
            "--eta",
            "0.1",
            "--scale",
            "1e-3",
            "-o",
            "x.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, ["x.csv"]);
}

#[test]
fn bundled_configs_parse_and_validate() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let origin = path.display().to_string();
        let cfg = parse(&Source {
            origin: &origin,
            text: &text,
        })
        .unwrap();
        cfg.validate().unwrap();
    }
}

fn keys(v: &serde_json::Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn schema_matches_config() {
    let schema: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run-config.schema.json"),
        )
        .unwrap(),
    )
    .unwrap();
    let props = &schema["properties"];
    let cfg = RunConfig {
        exact: Some(Default::default()),
        ..RunConfig::default()
    };
    let value = serde_json::to_value(&cfg).unwrap();
    let mut want = keys(&value);
    want.extend(["output".to_string(), "threads".to_string()]);
    assert_eq!(keys(props), want);
    assert_eq!(keys(&props["exact"]["properties"]), keys(&value["exact"]));
    assert_eq!(keys(&props["time"]["properties"]), keys(&value["time"]));
}
