use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use drc_core::lattice::{BondConfig, GraphTag};

fn drc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drc"))
        .args(args)
        .env_remove("DRC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn find(dir: &Path, suffix: &str) -> PathBuf {
    files(dir)
        .into_iter()
        .find(|p| p.to_string_lossy().ends_with(suffix))
        .unwrap_or_else(|| panic!("no file ending in {suffix}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(find(dir, "_manifest.json")).unwrap()).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

/// `mean` and `stderr` of a one-row scalar collector table.
fn scalar(csv: &str) -> (f64, f64) {
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    (row[1].parse().unwrap(), row[2].parse().unwrap())
}

#[test]
fn verify_duality_passes_and_prints_json() {
    let o = drc(&["verify", "--suite", "duality", "--J", "0.3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["n_checks"].as_u64().unwrap() > 0);
    for c in v["checks"].as_array().unwrap() {
        for key in ["check_name", "graph", "params", "metric", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
        assert_eq!(c["params"]["J"], 0.3);
    }
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = drc(&["verify", "--suite", "all", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(&find(dir.path(), "_verify.json"))).unwrap();
    assert_eq!(v["n_failed"], 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&drc(&["verify", "--suite", "bogus"])), 64);
    assert_eq!(code(&drc(&["estimate", "bogus"])), 64);
    assert_eq!(code(&drc(&["sample", "--no-such-flag"])), 64);
    assert_eq!(code(&drc(&["sample", "--bc", "periodic"])), 64);
    assert_eq!(code(&drc(&["sample", "--sweeps", "10", "--samples", "1"])), 64);
    assert_eq!(code(&drc(&["sample", "--U", "0.1"])), 64);
    assert_eq!(code(&drc(&["estimate", "circuits", "--expect", "0.5"])), 64);
    assert_eq!(code(&drc(&[])), 64);
    assert_eq!(code(&drc(&["--help"])), 0);
    assert_eq!(code(&drc(&["--version"])), 0);
}

#[test]
fn sample_outputs_are_reproducible() {
    let args = |d: &Path| {
        vec![
            "sample".to_string(),
            "--size=12".into(),
            "--bc=plus".into(),
            "--construction=current".into(),
            "--seed=7".into(),
            "--sweeps=300".into(),
            "--chains=2".into(),
            "--collect=edge_density,odd_density,magnetisation".into(),
            "--dump-raw".into(),
            format!("--out={}", d.display()),
        ]
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        let argv = args(d);
        let o = drc(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 5);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        if !x.to_string_lossy().ends_with(".json") {
            assert_eq!(read(x), read(y), "{}", x.display());
        }
    }
    let m = manifest(a.path());
    let id = m["run_id"].as_str().unwrap();
    assert!(fa.iter().all(|p| p.file_name().unwrap().to_string_lossy().starts_with(id)));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["construction"], "current");
    assert_eq!(m["results"]["files"].as_array().unwrap().len(), 4);
}

#[test]
fn raw_dump_decodes_to_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let out = format!("--out={}", dir.path().display());
    let o = drc(&["sample", "--size", "9", "--samples", "6", "--chains", "2", "--thinning", "2", "--dump-raw", &out]);
    assert_eq!(code(&o), 0);
    let text = read(&find(dir.path(), "_raw.txt"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    let n_edges = 2 * 9 * 8;
    for l in lines {
        BondConfig::from_hex(GraphTag::Primal, n_edges, l).unwrap();
    }
}

#[test]
fn cluster_dump_partitions_the_box() {
    let dir = tempfile::tempdir().unwrap();
    let out = format!("--out={}", dir.path().display());
    let o = drc(&["sample", "--size", "20", "--samples", "1", "--dump-clusters", &out]);
    assert_eq!(code(&o), 0);
    let clusters = read(&find(dir.path(), "_clusters.csv"));
    let mut lines = clusters.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sample,cluster_rank,size,diameter,touches_boundary,min_x,min_y,max_x,max_y"
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    let total: usize = rows.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
    assert_eq!(total, 400);
    let diams: Vec<i32> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(diams.windows(2).all(|w| w[0] >= w[1]));
    let map = read(&find(dir.path(), "_cluster_map.csv"));
    assert_eq!(map.lines().next().unwrap(), "sample,x,y,cluster_rank");
    assert_eq!(map.lines().count(), 401);
    // the raster agrees with the cluster sizes
    let mut count = vec![0usize; rows.len()];
    for l in map.lines().skip(1) {
        let r: usize = l.rsplit(',').next().unwrap().parse().unwrap();
        count[r] += 1;
    }
    for (r, row) in rows.iter().enumerate() {
        assert_eq!(count[r], row[2].parse::<usize>().unwrap());
    }
}

#[test]
fn constructions_agree_on_edge_density() {
    let mut est = Vec::new();
    for c in ["direct", "current"] {
        let dir = tempfile::tempdir().unwrap();
        let out = format!("--out={}", dir.path().display());
        let o = drc(&[
            "sample", "--size", "10", "--construction", c, "--samples", "1500", "--thinning", "2", "--seed", "3",
            "--collect", "edge_density", &out,
        ]);
        assert_eq!(code(&o), 0);
        est.push(scalar(&read(&find(dir.path(), "_edge_density.csv"))));
    }
    let z = (est[0].0 - est[1].0).abs() / est[0].1.hypot(est[1].1);
    assert!(z < 4.0, "{est:?}");
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test run\nsize = 8\nseed = 11\nburn-in = 20\nsamples = 3\ncollect = edge_density\n")
        .unwrap();
    let out = dir.path().join("out");
    let o = drc(&[
        "sample",
        "--config",
        cfg.to_str().unwrap(),
        "--size",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["size"], 6);
    assert_eq!(m["config"]["seed"], 11);
    assert_eq!(m["config"]["burn_in"], 20);
    assert_eq!(m["config"]["thinning"], 10);
    assert_eq!(m["config"]["sweeps"], 50);
    assert_eq!(m["results"]["edge_density"]["n_samples"], 3);

    std::fs::write(&cfg, "size = 8\ncolour = blue\n").unwrap();
    let o = drc(&["sample", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    std::fs::write(&cfg, "size = eight\n").unwrap();
    let o = drc(&["sample", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_drc"))
        .args(["sample", "--size", "4", "--samples", "2", "--threads", "1"])
        .env("DRC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(dir.path()).len(), 1);
    assert!(manifest(dir.path())["results"]["files"].as_array().unwrap().is_empty());
}

#[test]
fn estimate_beta_and_l2() {
    let dir = tempfile::tempdir().unwrap();
    let out = format!("--out={}", dir.path().display());
    let o = drc(&["estimate", "beta", "--n", "4", "--m", "16", "--samples", "200", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["results"]["target"], "beta");
    assert!(m["results"]["pass"].is_null());
    let csv = read(&find(dir.path(), "_beta.csv"));
    assert!(csv.starts_with("n,m,estimate,stderr,acceptance_rate,n_samples,n_accepted\n"));

    let dir = tempfile::tempdir().unwrap();
    let out = format!("--out={}", dir.path().display());
    let o = drc(&[
        "estimate", "l2", "--size", "32", "--f", "const", "--eps", "0.5,0.25", "--beta", "0.7", "--samples", "50",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&find(dir.path(), "_l2.csv"));
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("epsilon,estimate,stderr,n_samples,beta,cluster_rank,f\n"));
    // without --beta it is estimated first and reported alongside
    let dir = tempfile::tempdir().unwrap();
    let out = format!("--out={}", dir.path().display());
    let o = drc(&[
        "estimate", "l2", "--size", "32", "--eps", "0.5", "--beta-n", "4", "--beta-m", "16", "--samples", "30", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    find(dir.path(), "_beta.csv");
    assert!(manifest(dir.path())["results"]["summary"]["beta_estimate"].is_object());
}

#[test]
fn estimate_expectations_set_the_exit_code() {
    let run = |expect: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = format!("--out={}", dir.path().display());
        let o = drc(&[
            "estimate", "one_point", "--sizes", "6,8,10,12", "--samples", "300", "--thinning", "2", "--expect",
            expect, "--tol", "0.01", &out,
        ]);
        let m = manifest(dir.path());
        find(dir.path(), "_one_point.csv");
        find(dir.path(), "_fit.csv");
        (code(&o), m)
    };
    let (c, m) = run("5");
    assert_eq!(c, 1);
    assert_eq!(m["results"]["pass"], false);
    let slope = m["results"]["headline"].as_f64().unwrap();
    assert!(slope < 0.0);
    let (c, m) = run(&slope.to_string());
    assert_eq!(c, 0);
    assert_eq!(m["results"]["pass"], true);
}

#[test]
fn estimate_targets_write_tables() {
    for (target, extra, table) in [
        ("two_point", vec!["--size", "24", "--rs", "1,2,3,4"], "_two_point.csv"),
        ("drc_one_arm", vec!["--outer", "16", "--ns", "1,2,3,4", "--margin", "4"], "_drc_one_arm.csv"),
        ("circuits", vec!["--ns", "2,3", "--ratio", "2", "--domain-factor", "3"], "_circuits.csv"),
        ("height_gff", vec!["--size", "10", "--f", "bump", "--g", "box:0.25"], "_height_gff.csv"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = format!("--out={}", dir.path().display());
        let mut argv = vec!["estimate", target, "--samples", "100", "--thinning", "1", &out];
        argv.extend(extra);
        let o = drc(&argv);
        assert_eq!(code(&o), 0, "{target}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = read(&find(dir.path(), table));
        assert!(csv.lines().count() >= 2, "{target}");
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(manifest(dir.path())["results"]["target"], target);
    }
}
