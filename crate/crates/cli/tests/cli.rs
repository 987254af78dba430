use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sslart::persist::{ModelDocument, StoredModel};
use sslart::{Member, SemiSupervised};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sslart"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../harness/data").join(name)
}

fn run(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Metrics rows (header excluded) up to the first blank line.
fn metrics_rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines().take_while(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..7], &["run_id", "seed", "rho", "M", "mapping", "voting", "T"]);
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    metrics_rows(text).iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn train_iris_defaults_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    let o = run(&["train", "--data", iris.to_str().unwrap(), "--out", "m.json"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("nodes stage1"));
    let doc = ModelDocument::<f64>::load(dir.path().join("m.json")).unwrap();
    let StoredModel::Ensemble { ensemble } = &doc.model else { panic!("expected an ensemble") };
    assert_eq!(ensemble.members().len(), 7);
    assert!(ensemble.members().iter().all(|m| m.labeled_count() >= 3));
    assert_eq!(doc.class_names, vec!["setosa", "versicolor", "virginica"]);

    let o = run(&["eval", "--model", "m.json"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(metrics_rows(&text).len(), 1);
    assert!(!text.contains("statistic"));
    assert!(column(&text, "accuracy")[0] >= 0.8);
}

#[test]
fn oto_mapping_and_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    let o = run(&["train", "--data", iris.to_str().unwrap(), "--mapping", "oto", "--reps", "10", "--seed", "3", "--out", "m.json"], dir.path());
    assert!(o.status.success());
    let mut seeds = Vec::new();
    for r in 0..10 {
        let doc = ModelDocument::<f64>::load(dir.path().join(format!("m-r{r}.json"))).unwrap();
        let StoredModel::Ensemble { ensemble } = &doc.model else { panic!() };
        assert!(ensemble.members().iter().all(|m| matches!(m, Member::Oto(_))));
        seeds.push(doc.provenance["seed"].clone());
    }
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds.len(), 10);

    let models: Vec<String> = (0..10).map(|r| format!("m-r{r}.json")).collect();
    let mut args = vec!["eval", "--model"];
    args.extend(models.iter().map(String::as_str));
    let o = run(&args, dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(metrics_rows(&text).len(), 10);
    let summary: Vec<&str> = text.split("\n\n").nth(1).unwrap().lines().collect();
    assert_eq!(summary[0], "statistic,runs,mean,ci_lo,ci_hi");
    assert!(summary[1].starts_with("accuracy,10,"));
}

#[test]
fn deeper_search_covers_more() {
    let dir = tempfile::tempdir().unwrap();
    let wine = data("wine.csv");
    let o = run(&["train", "--data", wine.to_str().unwrap(), "--rho", "0.95", "--voting", "single", "--out", "w.json"], dir.path());
    assert!(o.status.success());
    let cov = |t: &str| column(&stdout(&run(&["eval", "--model", "w.json", "--search-depth", t], dir.path())), "coverage")[0];
    assert!(cov("3") >= cov("2"));
    assert!(cov("all") >= cov("3"));
}

#[test]
fn memorization_on_training_pool() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    let args = ["train", "--data", iris.to_str().unwrap(), "--rho", "0.99", "--beta", "1", "--mapping", "oto", "--voting", "single", "--labeled-frac", "1", "--out", "mem.json"];
    assert!(run(&args, dir.path()).status.success());
    let o = run(&["eval", "--model", "mem.json", "--subset", "labeled"], dir.path());
    assert_eq!(column(&stdout(&o), "accuracy"), vec![1.0]);
}

#[test]
fn rules_listing() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    assert!(run(&["train", "--data", iris.to_str().unwrap(), "--voting", "single", "--out", "s.json"], dir.path()).status.success());
    let doc = ModelDocument::<f64>::load(dir.path().join("s.json")).unwrap();
    let StoredModel::Single { member } = &doc.model else { panic!() };

    let o = run(&["rules", "--model", "s.json", "-q", "5"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), member.labeled_count());
    assert!(text.lines().all(|l| l.starts_with("If ") && l.contains(" Then ") && l.contains("confidence estimate=")));
    let vocab = ["Very Small", "Small", "Medium", "Large", "Very Large"];
    assert!(text.lines().all(|l| l.split('"').skip(1).step_by(2).all(|w| vocab.contains(&w))));

    let o = run(&["rules", "--model", "s.json", "--format", "csv"], dir.path());
    assert_eq!(stdout(&o).lines().count(), member.labeled_count() + 1);

    fs::write(dir.path().join("names.toml"), "features = [\"SL\", \"SW\", \"PL\", \"PW\"]\nclasses = [\"A\", \"B\", \"C\"]\n").unwrap();
    let o = run(&["rules", "--model", "s.json", "--names", "names.toml"], dir.path());
    assert!(stdout(&o).starts_with("If SL is"));

    let o = run(&["rules", "--model", "s.json", "-q", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dimension_mismatch_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data("iris.csv");
    let wine = data("wine.csv");
    assert!(run(&["train", "--data", iris.to_str().unwrap(), "--voting", "single", "--out", "s.json"], dir.path()).status.success());
    let o = run(&["eval", "--model", "s.json", "--data", wine.to_str().unwrap(), "--subset", "all"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model expects 4 features"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["train", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["train", "--synthetic", "xor", "--rho", "1.5"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["train"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["train", "--data", "missing.csv"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("bad.csv"), "a,b,c\n1,x,p\n").unwrap();
    let o = run(&["train", "--data", "bad.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2, column 2"));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn bench_rho_sweep_is_ordered_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let rhos = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    let args = ["bench", "--synthetic", "xor", "--rho", rhos, "--voting", "single", "--reps", "1", "--seed", "4"];
    let o = run(&args, dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let got_rhos = column(&text, "rho");
    assert_eq!(got_rhos, (1..=9).map(|k| k as f64 / 10.0).collect::<Vec<_>>());
    let nodes = column(&text, "nodes_stage2");
    assert!(nodes.windows(2).all(|w| w[0] <= w[1]), "{nodes:?}");

    // bit-reproducible apart from wall time
    let strip = |t: &str| t.lines().map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&text), strip(&stdout(&run(&args, dir.path()))));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "synthetic = \"two-gaussians\"\nn = 120\nrho = 0.5\nvoting = \"single\"\nmapping = \"oto\"\nseed = 9\nout = \"cfg.json\"\n",
    )
    .unwrap();
    assert!(run(&["train", "--config", "run.toml", "--rho", "0.7"], dir.path()).status.success());
    let doc = ModelDocument::<f64>::load(dir.path().join("cfg.json")).unwrap();
    let StoredModel::Single { member } = &doc.model else { panic!() };
    assert!(matches!(member, Member::Oto(_)));
    assert_eq!(member.input_network().params().rho, 0.7);
    assert_eq!(doc.provenance["n-samples"], "120");

    // same settings, same bytes
    assert!(run(&["train", "--config", "run.toml", "--rho", "0.7", "--out", "again.json"], dir.path()).status.success());
    assert_eq!(fs::read(dir.path().join("cfg.json")).unwrap(), fs::read(dir.path().join("again.json")).unwrap());

    fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(run(&["train", "--config", "bad.toml"], dir.path()).status.code(), Some(1));
}
