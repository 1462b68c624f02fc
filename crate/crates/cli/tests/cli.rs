use std::path::PathBuf;
use std::process::Command as Process;

use bioeco_cli::{
    emit, parse_config, parse_with_overrides, run, CliError, Command, Format, RunConfig,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn load(name: &str) -> RunConfig {
    parse_config(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn bioeco(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_bioeco"))
        .args(args)
        .env("BIOECO_THREADS", "2")
        .output()
        .unwrap()
}

#[test]
fn every_fixture_round_trips_through_toml() {
    for name in [
        "refuge_sweep.toml",
        "hopf.toml",
        "optimal.toml",
        "bionomic.toml",
        "oscillation.toml",
        "equilibria.toml",
    ] {
        let cfg = load(name);
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg, "{name}");
    }
}

#[test]
fn inputs_echo_round_trips() {
    let cfg = load("optimal.toml");
    let env = run(&cfg, None).unwrap();
    let back: RunConfig = serde_json::from_value(env.inputs_echo.clone()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn sweep_fixture_has_seven_values_and_rows() {
    let cfg = load("refuge_sweep.toml");
    assert_eq!(cfg.sweep.as_ref().unwrap().m.len(), 7);
    let env = run(&cfg, None).unwrap();
    let csv = emit(&env, Format::Csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,x_star,y_star,classification"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn unknown_symbol_is_rejected() {
    let text = std::fs::read_to_string(fixture("refuge_sweep.toml")).unwrap();
    let bad = text.replace("[model]\n", "[model]\nq3 = 0.1\n");
    assert!(matches!(parse_config(&bad), Err(CliError::UnknownKey(_))));
}

#[test]
fn missing_refuge_is_reported_for_point_commands() {
    let cfg = load("refuge_sweep.toml");
    let err = run(&cfg, Some(Command::Equilibria)).unwrap_err();
    assert!(matches!(err, CliError::MissingSymbol { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn optimal_fixture_policy_is_an_equilibrium_of_the_harvested_model() {
    let env = run(&load("optimal.toml"), None).unwrap();
    let p = &env.results["policy"];
    let (x, y) = (p["x_opt"].as_f64().unwrap(), p["y_opt"].as_f64().unwrap());
    let cfg = parse_with_overrides(
        &std::fs::read_to_string(fixture("optimal.toml")).unwrap(),
        &[
            format!("E1={}", p["e1_opt"].as_f64().unwrap()),
            format!("E2={}", p["e2_opt"].as_f64().unwrap()),
        ],
    )
    .unwrap();
    let params = cfg.model_params().unwrap();
    let f = bioeco_core::model::rhs(&params, bioeco_core::State::new(x, y)).unwrap();
    assert!(f[0].abs() < 1e-9 * x && f[1].abs() < 1e-9 * y, "{f:?}");
}

#[test]
fn bionomic_always_carries_the_case_one_note() {
    let env = run(&load("bionomic.toml"), None).unwrap();
    assert!(env
        .diagnostics
        .iter()
        .any(|d| d.contains("case I prey level")));
    assert_eq!(env.table.rows.len(), 4);
}

#[test]
fn interior_solves_carry_the_nullcline_note() {
    for (name, cmd) in [
        ("equilibria.toml", Command::Equilibria),
        ("equilibria.toml", Command::Stability),
        ("refuge_sweep.toml", Command::Sweep),
    ] {
        let env = run(&load(name), Some(cmd)).unwrap();
        assert!(
            env.diagnostics
                .iter()
                .any(|d| d.contains("predator nullcline")),
            "{cmd}"
        );
    }
}

#[test]
fn trajectory_csv_is_time_ordered() {
    let cfg = parse_with_overrides(
        &std::fs::read_to_string(fixture("oscillation.toml")).unwrap(),
        &["sim.t_end=50".into()],
    )
    .unwrap();
    let csv = emit(&run(&cfg, None).unwrap(), Format::Csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,y,valid"));
    let times: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*times.last().unwrap(), 50.0);
}

#[test]
fn emission_is_deterministic() {
    for name in ["refuge_sweep.toml", "hopf.toml", "bionomic.toml"] {
        let cfg = load(name);
        for format in [Format::Csv, Format::Json] {
            let a = emit(&run(&cfg, None).unwrap(), format);
            let b = emit(&run(&cfg, None).unwrap(), format);
            assert_eq!(a, b, "{name}");
        }
    }
}

#[test]
fn binary_output_is_byte_identical_across_runs_and_thread_counts() {
    let path = fixture("hopf.toml");
    let args = [
        "hopf",
        "--config",
        path.to_str().unwrap(),
        "--format",
        "json",
    ];
    let first = bioeco(&args);
    assert!(first.status.success());
    let second = Process::new(env!("CARGO_BIN_EXE_bioeco"))
        .args(args)
        .env("BIOECO_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn binary_writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let path = fixture("refuge_sweep.toml");
    let status = bioeco(&[
        "sweep",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("m,x_star,y_star,classification\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = fixture("refuge_sweep.toml");
    let sweep = sweep.to_str().unwrap();

    let unknown = bioeco(&["sweep", "--config", sweep, "--set", "q3=1"]);
    assert_eq!(unknown.status.code(), Some(2));

    let invalid = bioeco(&["sweep", "--config", sweep, "--set", "e=2"]);
    assert_eq!(invalid.status.code(), Some(2));

    let missing = dir.path().join("absent.toml");
    assert_eq!(
        bioeco(&["sweep", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    // no refuge value lets the interior branch exist in this window
    let hopf = fixture("hopf.toml");
    let numerical = bioeco(&[
        "hopf",
        "--config",
        hopf.to_str().unwrap(),
        "--set",
        "E2=40",
        "--set",
        "q2=0.9",
    ]);
    assert_eq!(
        numerical.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&numerical.stderr)
    );

    let bad_threads = Process::new(env!("CARGO_BIN_EXE_bioeco"))
        .args(["check"])
        .env("BIOECO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn check_runs_without_a_config() {
    let out = bioeco(&["check"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("suite,cases,failures,worst_ratio,passed\n"));
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
