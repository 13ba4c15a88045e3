use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cavdyn_cli::{summary_from_dir, summary_row, PopulationTable, SUMMARY_COLUMNS};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cavdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavdyn"))
        .args(args)
        .output()
        .expect("spawn cavdyn")
}

/// A cheap variant of the shipped configuration.
const SMALL: [&str; 10] = [
    "--set",
    "grid.points=64",
    "--set",
    "laser.duration_fs=20",
    "--set",
    "propagation.t_end_fs=60",
    "--set",
    "propagation.nu_max=4",
    "--set",
    "cavity.g_rel=0.02",
];

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    let mut v = head.to_vec();
    v.extend(SMALL);
    v
}

fn default_toml() -> String {
    configs().join("default.toml").display().to_string()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_toml();
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name).display().to_string();
        let res = cavdyn(&with_small(&["propagate", "--config", &cfg, "--out", &out]));
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outs.push(PathBuf::from(out));
    }
    for file in ["populations.csv", "nu_ground.csv", "resolved.cfg"] {
        let a = std::fs::read(outs[0].join(file)).unwrap();
        let b = std::fs::read(outs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let table = PopulationTable::parse(&std::fs::read_to_string(outs[0].join("populations.csv")).unwrap()).unwrap();
    assert_eq!(
        &table.header[..8],
        ["t_fs", "p_G_A1", "p_G_A2", "p_G_A3", "p_E_A2", "p_photon_state", "n_photon_expect", "norm_total"]
    );
    assert_eq!(table.header.len(), 8 + 5);
    assert_eq!(table.column("t_fs").unwrap().len(), 61);
    let ground = PopulationTable::parse(&std::fs::read_to_string(outs[0].join("nu_ground.csv")).unwrap()).unwrap();
    assert_eq!(ground.header, ["t_fs", "p_nu0", "p_nu1", "p_nu2", "p_nu3", "p_nu4"]);
    assert!((ground.column("p_nu0").unwrap()[0] - 1.0).abs() < 1e-12);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outs[0].join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["schema"], cavdyn_cli::META_SCHEMA);
    assert_eq!(meta["field_free_method"], "eigen");
    assert!(meta["diagnostics"]["max_norm_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first").display().to_string();
    let res = cavdyn(&with_small(&["propagate", "--config", &default_toml(), "--out", &first]));
    assert!(res.status.success());
    let resolved = dir.path().join("first/resolved.cfg").display().to_string();
    let second = dir.path().join("second").display().to_string();
    let res = cavdyn(&["propagate", "--config", &resolved, "--out", &second]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for file in ["populations.csv", "resolved.cfg"] {
        assert_eq!(
            std::fs::read(dir.path().join("first").join(file)).unwrap(),
            std::fs::read(dir.path().join("second").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn sweep_summary_matches_member_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep").display().to_string();
    let mut args = with_small(&["sweep", "--config"]);
    let cfg = default_toml();
    args.insert(2, &cfg);
    args.extend(["--param", "cavity.g_rel", "--values", "0.01,0.03", "--out", &out, "--jobs", "2"]);
    let res = cavdyn(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let summary = std::fs::read_to_string(dir.path().join("sweep/summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_COLUMNS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for (row, value) in rows.iter().zip([0.01, 0.03]) {
        let name = row.split(',').next().unwrap();
        let member = dir.path().join("sweep").join(name);
        let resolved = std::fs::read_to_string(member.join("resolved.cfg")).unwrap();
        assert!(resolved.contains("g_au = "), "{resolved}");
        let d = summary_from_dir(&member).unwrap();
        assert_eq!(*row, summary_row(name, "cavity.g_rel", value, "ok", Some(&d)));
    }
}

#[test]
fn levels_and_surfaces_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_toml();
    let levels = dir.path().join("levels.csv").display().to_string();
    let res = cavdyn(&["levels", "--config", &cfg, "--count", "4", "--out", &levels]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&levels).unwrap();
    assert!(text.starts_with("curve,nu,energy_hartree,energy_ev,spacing_ev\n"));
    assert_eq!(text.lines().count(), 1 + 8);

    let surf = dir.path().join("surfaces.csv").display().to_string();
    let res = cavdyn(&["surfaces", "--config", &cfg, "--out", &surf]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&surf).unwrap();
    assert!(text.starts_with("R_bohr,E_lower,E_middle,E_upper,comp_lower_G_A3_0"));
    assert_eq!(text.lines().count(), 1 + 256);
    let crossings = std::fs::read_to_string(dir.path().join("crossings.csv")).unwrap();
    assert!(crossings.lines().count() >= 2);

    let noatom = configs().join("noatom.toml").display().to_string();
    let res = cavdyn(&["surfaces", "--config", &noatom, "--out", &surf]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn compare_writes_both_representations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp").display().to_string();
    let cfg = default_toml();
    let res = cavdyn(&[
        "compare", "--config", &cfg, "--set", "grid.points=32", "--set", "propagation.nu_max=4", "--t-end-fs", "2",
        "--out", &out,
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(dir.path().join("cmp/compare.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("t_fs,fock_p_G_A1,x_p_G_A1"));
    assert_eq!(text.lines().count(), 1 + 3);
    let last: f64 = text.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(last < 1e-6, "{last}");
}

#[test]
fn print_config_round_trips() {
    let res = cavdyn(&["print-config", "--config", &default_toml(), "--set", "cavity.tau_fs=61"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let cfg = cavdyn::config::parse_config(&text, None).unwrap();
    let want = 1.0 / cavdyn::units::fs_to_au(61.0);
    assert!((cfg.cavity.kappa / want - 1.0).abs() < 1e-12, "{}", cfg.cavity.kappa);
}

#[test]
fn configuration_errors_exit_with_1() {
    let cfg = default_toml();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x").display().to_string();
    for args in [
        vec!["propagate", "--config", &cfg, "--out", &out, "--set", "cavity.bogus=1"],
        vec!["propagate", "--config", &cfg, "--out", &out, "--set", "cavity.g_rel=-1"],
        vec!["propagate", "--config", &cfg, "--out", &out, "--set", "nonsense"],
        vec!["propagate", "--out", &out],
        vec!["frobnicate"],
    ] {
        let res = cavdyn(&args);
        assert_eq!(res.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(cavdyn(&["--help"]).status.code(), Some(0));
    assert_eq!(cavdyn(&["--version"]).status.code(), Some(0));
}

#[test]
fn numerical_blow_up_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("boom").display().to_string();
    let cfg = configs().join("noatom.toml").display().to_string();
    // far beyond the RK4 stability limit of the fine grid's kinetic energy
    let res = cavdyn(&[
        "propagate", "--config", &cfg, "--out", &out, "--set", "grid.points=1024", "--set", "propagation.dt_pulse_au=3",
        "--set", "laser.duration_fs=5", "--set", "propagation.t_end_fs=5",
    ]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(!dir.path().join("boom/populations.csv").exists());
}

#[test]
fn unwritable_output_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("run").display().to_string();
    let res = cavdyn(&with_small(&["propagate", "--config", &default_toml(), "--out", &out]));
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    let missing = dir.path().join("missing.toml").display().to_string();
    let res = cavdyn(&["print-config", "--config", &missing]);
    assert_eq!(res.status.code(), Some(3));
}
