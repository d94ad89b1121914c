use std::path::Path;
use std::process::{Command, Output};

fn risbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risbf")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        r#"
[scenario]
n_antennas = 4
group_sizes = [1, 2]

[psa]
max_iters = 100

[ambf]
max_ao_iters = 4

[mmf]
max_iters = 100
final_max_iters = 50

[experiment]
problem = "qos"
sweep = "m"
values = [4, 9]
trials = 2
methods = ["ambf", "random_ris", "no_ris"]
"#,
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn qos_and_mmf_print_deterministic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    for cmd in ["qos", "mmf"] {
        let a = risbf(&[cmd, "-c", &cfg, "-s", "3", "-t", "2"]);
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        let b = risbf(&[cmd, "-c", &cfg, "-s", "3", "-t", "2"]);
        assert_eq!(a.stdout, b.stdout);
        let text = String::from_utf8(a.stdout).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 3);
        assert!(text.lines().nth(1).unwrap().contains(if cmd == "qos" { "ambf" } else { "mmf" }));
    }
}

#[test]
fn sweep_writes_identical_csv_and_plot_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let mut outputs = Vec::new();
    for run in 0..2 {
        let csv = dir.path().join(format!("r{run}.csv"));
        let plot = dir.path().join(format!("p{run}.tsv"));
        let out = risbf(&["sweep", "-c", &cfg, "-o", csv.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read_to_string(&plot).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let (csv, plot) = &outputs[0];
    assert!(csv.starts_with(b"# risbf results v1\n"));
    assert_eq!(plot.lines().next().unwrap(), "method\tx\tpower_dbm_median\tpower_dbm_q1\tpower_dbm_q3\tpower_dbm_iqr\tcount");
    assert_eq!(plot.lines().count(), 1 + 3 * 2);

    let again = risbf(&["plot", dir.path().join("r0.csv").to_str().unwrap(), "--metric", "sum-rate"]);
    assert!(again.status.success());
    assert!(String::from_utf8(again.stdout).unwrap().starts_with("method\tx\tsum_rate_median"));
}

#[test]
fn method_override_and_timing_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let csv = dir.path().join("t.csv");
    let out = risbf(&["sweep", "-c", &cfg, "-m", "no_ris", "--timing", "-o", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.contains(",no_ris,") && !r.ends_with(',')));
}

#[test]
fn validate_runs_self_checks_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let dumps = dir.path().join("dumps");
    let out = risbf(&["sweep", "-c", &cfg, "--dump-dir", dumps.to_str().unwrap(), "-o", dir.path().join("d.csv").to_str().unwrap()]);
    assert!(out.status.success());
    let out = risbf(&["validate", "--dump-dir", dumps.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.contains("PASS dumps: 12 checked, 0 failed"), "{text}");
}

#[test]
fn errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[scenario]\nunknown_key = 1\n").unwrap();
    let out = risbf(&["qos", "-c", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = risbf(&["sweep", "-m", "mmf"]);
    assert_eq!(out.status.code(), Some(2));
}
