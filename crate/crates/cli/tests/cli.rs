//! Black-box tests of the binary: exit codes, file outputs, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ridgeid"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn ridgeid")
}

fn tempdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ridgeid-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gen_network_writes_file_and_exits_zero() {
    let dir = tempdir("gen");
    let out = run(
        &["gen-network", "--m", "20", "--eps", "1", "--seed", "7", "--out", "net.json"],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("net.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["m"], 20);
    assert_eq!(parsed["d"], 20);
    assert_eq!(parsed["activation"], "tanh");
    assert_eq!(parsed["seed"], 7);
    assert_eq!(parsed["A"].as_array().unwrap().len(), 400);
    assert_eq!(parsed["b"].as_array().unwrap().len(), 20);
    assert_eq!(parsed["theta"].as_array().unwrap().len(), 20);
}

#[test]
fn unknown_flag_exits_one_with_usage_on_stderr() {
    let dir = tempdir("usage");
    let out = run(&["identify", "--bogus-flag"], &dir);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn bad_config_value_exits_one() {
    let dir = tempdir("badcfg");
    std::fs::write(dir.join("bad.cfg"), "m = not-a-number\n").unwrap();
    let out = run(&["identify", "--config", "bad.cfg"], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn phase_transition_writes_csv_and_json() {
    let dir = tempdir("pt");
    std::fs::write(
        dir.join("pt.cfg"),
        "experiment = phase-transition\nm = 3\nd = 3\neps = 0.3, 0.6\nm_x = 2, 6\ntrials = 2\nn_rep = 9\nsteps = 50\nseed = 1\n",
    )
    .unwrap();
    let out = run(&["phase-transition", "--config", "pt.cfg", "--out", "results"], &dir);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("results/phase_transition.csv")).unwrap();
    assert!(csv.starts_with("eps\\m_X,2,6\n"));
    assert_eq!(csv.lines().count(), 3);
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 3);
        // Fractions carry four digits.
        assert_eq!(cells[1].split('.').nth(1).unwrap().len(), 4);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("results/phase_transition.json")).unwrap())
            .unwrap();
    assert!(json["cells"].as_array().unwrap().len() == 4);
    assert!(json["git_describe"].is_string());
}

#[test]
fn report_subcommand_summarizes_existing_report() {
    let dir = tempdir("report");
    std::fs::write(
        dir.join("id.cfg"),
        "experiment = identify\nm = 3\nd = 3\neps = 0.3\nm_x = 6\ntrials = 2\nn_rep = 9\nsteps = 50\nseed = 2\n",
    )
    .unwrap();
    let out = run(&["identify", "--config", "id.cfg", "--out", "results"], &dir);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["report", "results/identify.json"], &dir);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("success fraction"), "stdout: {stdout}");

    // A non-report file is a config error.
    std::fs::write(dir.join("junk.json"), "{\"not\": \"a report\"}").unwrap();
    let out = run(&["report", "junk.json"], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn same_seed_reports_are_identical_across_thread_counts() {
    let dir = tempdir("det");
    std::fs::write(
        dir.join("id.cfg"),
        "experiment = identify\nm = 3\nd = 3\neps = 0.3\nm_x = 6\ntrials = 3\nn_rep = 9\nsteps = 50\n",
    )
    .unwrap();
    let a = run(
        &["identify", "--config", "id.cfg", "--seed", "9", "--threads", "1", "--out", "one"],
        &dir,
    );
    let b = run(
        &["identify", "--config", "id.cfg", "--seed", "9", "--threads", "8", "--out", "eight"],
        &dir,
    );
    assert!(a.status.success() && b.status.success());
    let strip = |path: &Path| {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        fn clean(v: &mut serde_json::Value) {
            match v {
                serde_json::Value::Object(map) => {
                    map.remove("timings_ms");
                    map.remove("threads");
                    for x in map.values_mut() {
                        clean(x);
                    }
                }
                serde_json::Value::Array(items) => items.iter_mut().for_each(clean),
                _ => {}
            }
        }
        clean(&mut v);
        serde_json::to_string_pretty(&v).unwrap()
    };
    assert_eq!(
        strip(&dir.join("one/identify.json")),
        strip(&dir.join("eight/identify.json"))
    );
}

#[test]
fn identify_with_csv_format_writes_trial_table() {
    let dir = tempdir("csvfmt");
    std::fs::write(
        dir.join("id.cfg"),
        "experiment = identify\nm = 3\nd = 3\neps = 0.3\nm_x = 6\ntrials = 2\nn_rep = 9\nsteps = 50\nn_test = 1000\nn_grid = 64\nseed = 4\n",
    )
    .unwrap();
    let out = run(
        &["identify", "--config", "id.cfg", "--format", "csv", "--out", "results"],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("results/identify.csv")).unwrap();
    assert!(csv.starts_with("trial,eps,m_x,n_found"));
    assert_eq!(csv.lines().count(), 3);
}
