use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use neurocart::lif::Dendrites;
use neurocart_cli::config::{ControllerKind, ExperimentConfig};
use neurocart_cli::io::read_csv;

fn profiles() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("profiles")
}

fn profile(name: &str) -> PathBuf {
    profiles().join(format!("{name}.toml"))
}

fn neurocart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neurocart"))
        .args(args)
        .env_remove("NEUROCART_OUT")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(format!("{name}.toml"));
    std::fs::write(
        &p,
        format!("schema = \"neurocart/1\"\nname = \"{name}\"\n{body}"),
    )
    .unwrap();
    p
}

#[test]
fn shipped_profiles_parse_and_round_trip() {
    let mut count = 0;
    for entry in std::fs::read_dir(profiles()).unwrap() {
        let path = entry.unwrap().path();
        let cfg =
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        assert_eq!(
            cfg.name,
            path.file_stem().unwrap().to_str().unwrap(),
            "profile named for its file"
        );
        let echo = cfg.to_toml().unwrap();
        assert_eq!(
            ExperimentConfig::parse(&echo, "other").unwrap(),
            cfg,
            "{}",
            path.display()
        );
        cfg.controller().unwrap();
        count += 1;
    }
    assert_eq!(count, 15);
}

#[test]
fn two_neuron_profile_is_the_four_dendrite_rate_coded_experiment() {
    let cfg = ExperimentConfig::load(&profile("cartpole_2neuron")).unwrap();
    assert_eq!(cfg.controller.kind, ControllerKind::SpikingLqr2);
    let coding = cfg.controller.coding.unwrap();
    assert_eq!(coding.dendrites, Dendrites::All);
    assert_eq!(coding.dendrites.count(cfg.plant.n_links), 4);
    let three = ExperimentConfig::load(&profile("cartpole_2neuron_3dendrites")).unwrap();
    assert_eq!(three.controller.coding.unwrap().dendrites.count(1), 3);
    let lui = ExperimentConfig::load(&profile("cartpole_lui")).unwrap();
    assert_eq!(lui.controller.kind, ControllerKind::SpikingLqrLui);
}

#[test]
fn bad_configs_fail_with_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let o = neurocart(&["run", "--config", s(&empty), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("missing field `schema`"),
        "{}",
        stderr(&o)
    );

    let neg = write_config(
        dir.path(),
        "neg",
        "[plant]\nn_links = 1\nlink_masses = [-1.0]\n[controller]\nkind = \"lqr\"\n",
    );
    let o = neurocart(&["run", "--config", s(&neg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("plant.link_masses[0]") && stderr(&o).contains("-1"),
        "{}",
        stderr(&o)
    );

    let unknown = write_config(
        dir.path(),
        "unknown",
        "[plant]\nn_links = 1\n[controller]\nkind = \"lqr\"\n[sim]\nduraton = 3.0\n",
    );
    let o = neurocart(&["run", "--config", s(&unknown)]);
    assert!(
        stderr(&o).contains("sim") && stderr(&o).contains("duraton"),
        "{}",
        stderr(&o)
    );
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn ensemble_run_writes_deterministic_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = profile("cartpole_ensemble_100");
    for d in [&a, &b] {
        let o = neurocart(&[
            "run",
            "--config",
            s(&cfg),
            "--seeds",
            "0",
            "--out",
            s(d.path()),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let seed = |d: &Path| d.join("cartpole_ensemble_100/seed_0");
    for f in ["trace.csv", "raster.csv", "metrics.json"] {
        assert_eq!(
            read(&seed(a.path()).join(f)),
            read(&seed(b.path()).join(f)),
            "{f} differs"
        );
    }
    assert!(!seed(a.path()).join("failure.json").exists());
    assert!(seed(a.path()).join("runtime.json").exists());

    let (header, rows) = read_csv(&seed(a.path()).join("trace.csv")).unwrap();
    assert_eq!(header, ["t", "x", "xdot", "theta_1", "thetadot_1", "u"]);
    assert_eq!(rows.len(), 10_001);
    assert_eq!(rows[0][3], "2.00000000e-1");
    let (header, rows) = read_csv(&seed(a.path()).join("raster.csv")).unwrap();
    assert_eq!(header, ["t", "neuron_id"]);
    assert!(!rows.is_empty());

    let m: serde_json::Value =
        serde_json::from_slice(&read(&seed(a.path()).join("metrics.json"))).unwrap();
    assert_eq!(m["outcome"]["status"], "completed");
    assert!(m["angles"][0]["settling_time"].as_f64().unwrap() < 10.0);

    // the echoed config reproduces the run
    let echo = a.path().join("cartpole_ensemble_100/config.resolved.toml");
    let c = tempfile::tempdir().unwrap();
    let o = neurocart(&[
        "run",
        "--config",
        s(&echo),
        "--out",
        s(c.path()),
        "--seeds",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        read(&seed(a.path()).join("trace.csv")),
        read(&seed(c.path()).join("trace.csv"))
    );
}

#[test]
fn coarse_four_link_run_fails_with_a_record() {
    let d = tempfile::tempdir().unwrap();
    let o = neurocart(&[
        "run",
        "--config",
        s(&profile("4lpc_ensemble_2")),
        "--seeds",
        "4",
        "--out",
        s(d.path()),
    ]);
    assert_eq!(
        o.status.code(),
        Some(neurocart_cli::EXIT_POLE_FELL),
        "{}",
        stderr(&o)
    );
    let f: serde_json::Value =
        serde_json::from_slice(&read(&d.path().join("4lpc_ensemble_2/seed_4/failure.json")))
            .unwrap();
    assert_eq!(f["status"], "pole-fell");
    assert!(f["time"].as_f64().unwrap() < 30.0);
    assert!(f["link"].as_u64().unwrap() >= 1);
    let m: serde_json::Value =
        serde_json::from_slice(&read(&d.path().join("4lpc_ensemble_2/seed_4/metrics.json")))
            .unwrap();
    assert_eq!(m["outcome"]["status"], "pole-fell");
}

#[test]
fn single_value_sweep_matches_run() {
    let d = tempfile::tempdir().unwrap();
    let cfg = profile("cartpole_ensemble_100");
    let o = neurocart(&[
        "run",
        "--config",
        s(&cfg),
        "--seeds",
        "2",
        "--out",
        s(d.path()),
    ]);
    assert!(o.status.success());
    let o = neurocart(&[
        "sweep",
        "--config",
        s(&cfg),
        "--axis",
        "neurons",
        "--values",
        "100",
        "--seeds",
        "2",
        "--out",
        s(d.path()),
        "--workers",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let root = d.path().join("cartpole_ensemble_100");
    assert_eq!(
        read(&root.join("seed_2/metrics.json")),
        read(&root.join("sweep_neurons/100/seed_2/metrics.json"))
    );

    let m: serde_json::Value =
        serde_json::from_slice(&read(&root.join("seed_2/metrics.json"))).unwrap();
    let (header, rows) = read_csv(&root.join("sweep_neurons.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    let col = |name: &str| {
        rows[0][header.iter().position(|h| h == name).unwrap()]
            .parse::<f64>()
            .unwrap()
    };
    for key in ["peak_overshoot", "iae", "isc", "settling_time"] {
        let run = m["angles"][0][key].as_f64().unwrap();
        assert!(
            (col(&format!("{key}_mean")) - run).abs() <= 1e-8 * run.abs(),
            "{key}"
        );
    }
    assert_eq!(col("core_utilization"), 100.0 * 100.0 / 1024.0);
}

#[test]
fn sweep_records_cell_failures_in_row() {
    let d = tempfile::tempdir().unwrap();
    let o = neurocart(&[
        "sweep",
        "--config",
        s(&profile("4lpc_ensemble_2")),
        "--axis",
        "neurons",
        "--values",
        "2,0",
        "--seeds",
        "4",
        "--out",
        s(d.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&d.path().join("4lpc_ensemble_2/sweep_neurons.csv")).unwrap();
    let status = header.iter().position(|h| h == "status").unwrap();
    assert_eq!(rows[0][status], "pole-fell 1/1");
    assert!(rows[1][status].starts_with("error:"), "{}", rows[1][status]);
}

#[test]
fn sweep_rejects_axis_foreign_to_the_controller() {
    let o = neurocart(&[
        "sweep",
        "--config",
        s(&profile("cartpole_ensemble_100")),
        "--axis",
        "ki",
        "--values",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ki"), "{}", stderr(&o));
}

#[test]
fn plots_are_written_and_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let o = neurocart(&[
        "run",
        "--config",
        s(&profile("cartpole_ensemble_100")),
        "--seeds",
        "0",
        "--out",
        s(d.path()),
    ]);
    assert!(o.status.success());
    let seed = d.path().join("cartpole_ensemble_100/seed_0");
    let o = neurocart(&["plot", s(&seed)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names = ["states.svg", "control_raster.svg", "phase.svg"];
    let first: Vec<Vec<u8>> = names.iter().map(|n| read(&seed.join(n))).collect();
    let again = d.path().join("again");
    let o = neurocart(&["plot", s(&seed), "--out", s(&again)]);
    assert!(o.status.success());
    for (n, bytes) in names.iter().zip(&first) {
        assert!(bytes.starts_with(b"<svg"));
        assert_eq!(&read(&again.join(n)), bytes, "{n}");
    }
    assert_eq!(std::fs::read_dir(&again).unwrap().count(), 3);
}

#[test]
fn empty_raster_still_plots() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "lqr_short",
        "seeds = [0]\n[plant]\nn_links = 1\n[controller]\nkind = \"lqr\"\n[sim]\nduration = 2.0\n",
    );
    let o = neurocart(&["run", "--config", s(&cfg), "--out", s(d.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let seed = d.path().join("lqr_short/seed_0");
    assert_eq!(read_csv(&seed.join("raster.csv")).unwrap().1.len(), 0);
    let o = neurocart(&["plot", s(&seed)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(seed.join("control_raster.svg").exists());
}

#[test]
fn sweep_table_plot_and_missing_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let o = neurocart(&[
        "sweep",
        "--config",
        s(&profile("cartpole_neuron_sweep")),
        "--values",
        "4,16",
        "--seeds",
        "0",
        "--out",
        s(d.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = d.path().join("cartpole_neuron_sweep/sweep_neurons.csv");
    let o = neurocart(&["plot", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg =
        std::fs::read_to_string(d.path().join("cartpole_neuron_sweep/sweep_neurons.svg")).unwrap();
    assert!(svg.contains("log2(neurons)"));
    let o = neurocart(&["plot", s(&d.path().join("nothing"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gains_and_output_root_from_environment() {
    let o = neurocart(&["gains", "--config", s(&profile("cartpole_ensemble_100"))]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("theta_1,-1.779")),
        "{text}"
    );
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "env_root",
        "seeds = [0]\n[plant]\nn_links = 1\n[controller]\nkind = \"smc\"\n[sim]\nduration = 1.0\n",
    );
    let o = Command::new(env!("CARGO_BIN_EXE_neurocart"))
        .args(["run", "--config", s(&cfg)])
        .env("NEUROCART_OUT", d.path().join("root"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(d.path().join("root/env_root/seed_0/trace.csv").exists());
}
