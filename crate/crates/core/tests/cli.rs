use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lnp::cli::{RunConfig, Summaries, Table};

fn lnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnp"))
        .args(args)
        .env_remove("LNP_SEED")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn simulate(dir: &Path, scenario: &str, n: usize, seed: u64) -> String {
    let p = path(dir, &format!("{scenario}_{n}_{seed}.csv"));
    ok(&lnp(&["simulate", "--scenario", scenario, "--n1", &n.to_string(), "--n2", &n.to_string(), "--seed", &seed.to_string(), "--out", &p]));
    p
}

#[test]
fn simulate_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "II", 100, 7);
    let text = fs::read_to_string(&a).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 201);
    assert!(text.starts_with("# config_hash="));
    let b = path(dir.path(), "again.csv");
    ok(&lnp(&["simulate", "--scenario", "II", "--n1", "100", "--n2", "100", "--seed", "7", "--out", &b]));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = path(dir.path(), "env.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_lnp"))
        .args(["simulate", "--scenario", "II", "--n1", "100", "--n2", "100", "--out", &c])
        .env("LNP_SEED", "7")
        .output()
        .unwrap();
    ok(&out);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn unknown_scenario_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = lnp(&["simulate", "--scenario", "IV", "--out", &path(dir.path(), "x.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("IV"));
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "I", 10, 1);
    let cfg = path(dir.path(), "c.json");
    fs::write(&cfg, r#"{"iterations": 100}"#).unwrap();
    let out = lnp(&["fit", "--data", &data, "--config", &cfg, "--out", &path(dir.path(), "o")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("burn_in"));
    fs::write(&cfg, r#"{"iterations": 100, "burn_in": 10, "burnin": 5}"#).unwrap();
    let out = lnp(&["fit", "--data", &data, "--config", &cfg, "--out", &path(dir.path(), "o")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("burnin"));
    fs::write(&cfg, r#"{"iterations": 100, "burn_in": 100}"#).unwrap();
    let out = lnp(&["fit", "--data", &data, "--config", &cfg, "--out", &path(dir.path(), "o")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(RunConfig::from_json(r#"{"iterations": 1, "burn_in": 0}"#).is_ok());
}

#[test]
fn fit_outputs_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "I", 20, 2);
    let out_dir = path(dir.path(), "run");
    let cfg = path(dir.path(), "c.json");
    fs::write(&cfg, r#"{"iterations": 300, "burn_in": 100, "seed": 5, "grid_points": 64}"#).unwrap();
    let report = ok(&lnp(&["fit", "--data", &data, "--config", &cfg, "--out", &out_dir, "--trace", "2:13", "--trace", "2:21", "--trace", "1:5"]));
    assert!(report.contains("MAP K12"));
    let run = Path::new(&out_dir);
    let summaries: Summaries = serde_json::from_str(&fs::read_to_string(run.join("summaries.json")).unwrap()).unwrap();
    assert_eq!(summaries.manifest.seed, 5);
    assert_eq!(summaries.manifest.config_hash, summaries.manifest.config.hash());
    assert_eq!(summaries.manifest.config_hash.len(), 64);
    for name in ["chain.csv", "density.csv", "trace.csv"] {
        let t = fs::read_to_string(run.join(name)).unwrap();
        assert_eq!(
            t.lines().next().unwrap(),
            format!("# config_hash={} seed=5", summaries.manifest.config_hash)
        );
    }
    let chain = Table::parse(&fs::read_to_string(run.join("chain.csv")).unwrap()).unwrap();
    assert_eq!(chain.columns.join(","), "iter,I,k0,k1,k2,sigma,sigma0,gamma,m,tau");
    assert_eq!(chain.rows.len(), 200);
    let density = Table::parse(&fs::read_to_string(run.join("density.csv")).unwrap()).unwrap();
    assert_eq!(density.columns.join(","), "grid,mean1,q05_1,q95_1,mean2,q05_2,q95_2");
    assert_eq!(density.rows.len(), 64);
    for v in summaries.density_integrals {
        assert!((v - 1.0).abs() < 0.02, "{v}");
    }

    let diag = path(dir.path(), "diag");
    ok(&lnp(&[
        "diagnose", "--chain", &path(run, "chain.csv"), "--trace", &path(run, "trace.csv"),
        "--point", "2:13", "--point", "2:21", "--max-lag", "10", "--out", &diag,
    ]));
    let pacf = Table::parse(&fs::read_to_string(Path::new(&diag).join("pacf.csv")).unwrap()).unwrap();
    assert_eq!(pacf.columns.join(","), "lag,sigma,sigma0");
    assert_eq!(pacf.rows.len(), 11);
    assert_eq!(pacf.rows[0][1], 1.0);
    let traces = Table::parse(&fs::read_to_string(Path::new(&diag).join("traces.csv")).unwrap()).unwrap();
    assert_eq!(traces.columns, vec!["iter", "s2_x13", "s2_x21"]);
    assert_eq!(traces.rows.len(), 200);

    // same seed and config: byte-identical chain
    let again = path(dir.path(), "run2");
    ok(&lnp(&["fit", "--data", &data, "--config", &cfg, "--out", &again, "--trace", "2:13", "--trace", "2:21", "--trace", "1:5"]));
    assert_eq!(fs::read(run.join("chain.csv")).unwrap(), fs::read(Path::new(&again).join("chain.csv")).unwrap());
}

#[test]
fn diagnose_rejects_malformed_chains() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "chain.csv");
    fs::write(&bad, "iter,I,k0,k1,k2,sigma,sigma0,gamma,m,tau\n1,0,1,1,1,0.5,x,1,0,1\n").unwrap();
    let out = lnp(&["diagnose", "--chain", &bad, "--out", &path(dir.path(), "d")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn parallel_chains_pool_their_records() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "III", 15, 3);
    let run = path(dir.path(), "run");
    ok(&lnp(&["fit", "--data", &data, "--iterations", "120", "--burn-in", "20", "--chains", "3", "--seed", "9", "--out", &run]));
    let pooled = Table::parse(&fs::read_to_string(Path::new(&run).join("chain.csv")).unwrap()).unwrap();
    assert_eq!(pooled.rows.len(), 300);
    let mut rows = Vec::new();
    for c in 1..=3 {
        let t = Table::parse(&fs::read_to_string(Path::new(&run).join(format!("chain_{c}.csv"))).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 100);
        rows.extend(t.rows);
    }
    assert_eq!(rows, pooled.rows);
    let s: Summaries = serde_json::from_str(&fs::read_to_string(Path::new(&run).join("summaries.json")).unwrap()).unwrap();
    assert_eq!(s.per_chain.len(), 3);
    assert_eq!(s.manifest.chain_seeds.len(), 3);
}

#[test]
fn peppf_reports() {
    let out = ok(&lnp(&["peppf", "--normalize", "2", "2", "--sigma", "0.5", "--sigma0", "0.5", "--gamma", "1"]));
    for model in ["nested", "general", "stable"] {
        let line = out.lines().find(|l| l.starts_with(&format!("total[{model}]"))).unwrap();
        let v: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{line}");
    }
    let diff: f64 = out
        .lines()
        .find(|l| l.starts_with("max relative difference stable"))
        .unwrap()
        .rsplit(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff <= 1e-6);

    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "p.json");
    fs::write(&p, r#"{"freq1": [2], "freq2": [1], "shared": [[1, 1]]}"#).unwrap();
    let out = ok(&lnp(&["peppf", "--partition", &p, "--model", "nested"]));
    assert!(out.contains("nested second term: 0e0"), "{out}");
    let out = ok(&lnp(&["peppf", "--partition", &p, "--model", "dirichlet", "--c", "1", "--c0", "2"]));
    assert!(out.contains("dirichlet: log ="));
    fs::write(&p, r#"{"freq1": [0], "freq2": [1]}"#).unwrap();
    assert_eq!(lnp(&["peppf", "--partition", &p]).status.code(), Some(2));
    fs::write(&p, r#"{"freq1": [1], "freq2": [1], "bogus": 1}"#).unwrap();
    assert_eq!(lnp(&["peppf", "--partition", &p]).status.code(), Some(2));
}

fn verdict_of(report: &str) -> (f64, String) {
    let bf = report
        .lines()
        .find(|l| l.starts_with("Bayes factor:"))
        .unwrap()
        .split_whitespace()
        .nth(2)
        .unwrap();
    let bf = if bf == "inf" { f64::INFINITY } else { bf.parse().unwrap() };
    let verdict = report.lines().find_map(|l| l.strip_prefix("verdict: ")).unwrap().to_string();
    (bf, verdict)
}

#[test]
fn homogeneity_test_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let two = simulate(dir.path(), "II", 100, 1);
    let (bf, verdict) = verdict_of(&ok(&lnp(&["test", "--data", &two, "--iterations", "3000", "--burn-in", "1500", "--seed", "7"])));
    assert!(bf < 0.01, "{bf}");
    assert!(verdict.starts_with("reject homogeneity"), "{verdict}");

    let (bf, verdict) = verdict_of(&ok(&lnp(&["test", "--iris", "--iterations", "2000", "--burn-in", "1000", "--seed", "7"])));
    assert!(bf < 0.01, "{bf}");
    assert!(verdict.contains("different distributions"), "{verdict}");

    let one = simulate(dir.path(), "I", 100, 1);
    let (bf, verdict) = verdict_of(&ok(&lnp(&["test", "--data", &one, "--iterations", "3000", "--burn-in", "1500", "--seed", "7"])));
    assert!(bf > 1.0, "{bf}");
    assert_eq!(verdict, "evidence for homogeneity");
}

#[test]
fn scenario_one_fit_finds_two_shared_components() {
    let dir = tempfile::tempdir().unwrap();
    let one = simulate(dir.path(), "I", 100, 1);
    let run = path(dir.path(), "run");
    ok(&lnp(&["fit", "--data", &one, "--iterations", "10000", "--burn-in", "5000", "--seed", "7", "--out", &run]));
    let s: Summaries = serde_json::from_str(&fs::read_to_string(Path::new(&run).join("summaries.json")).unwrap()).unwrap();
    assert_eq!(s.components.map_k12, 2);
}
