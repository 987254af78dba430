use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use harness::experiment::{split_spec, summarize, write_rows, write_summary};
use harness::{
    bench, evaluate, load_and_normalize, make_synthetic, run_reps, split, BenchGrid, Dataset, MetricsRow, RunConfig, Schema,
    SplitSpec, SyntheticKind, SyntheticParams, VotingMode,
};
use log::warn;
use serde::Deserialize;
use sslart::persist::{ModelDocument, StoredModel};
use sslart::rules::{default_vocabulary, extract_rules, render_rule, rules_table};
use sslart::{Member, SemiSupervised};

use crate::args::{
    parse_depth, parse_mapping, parse_voting, resolve_run, seed_and_reps, BenchArgs, EvalArgs, FileConfig, ModelArgs,
    ProtocolArgs, RulesArgs, RulesFormat, SourceArgs, Subset, TrainArgs,
};
use crate::error::{CliError, CliResult};

const DEFAULT_SYNTHETIC_N: usize = 400;

type Provenance = BTreeMap<String, String>;

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn load_file(data: &Path, schema: Option<&Path>) -> CliResult<(Schema, Option<PathBuf>)> {
    match schema {
        Some(p) => Ok((Schema::from_file(p)?, Some(p.to_path_buf()))),
        None => {
            let sibling = harness::dataset::schema_path_for(data);
            let found = sibling.exists().then_some(sibling);
            Ok((Schema::for_data_file(data)?, found))
        }
    }
}

/// The dataset named by flags or config, and where it came from.
fn load_source(src: &SourceArgs, file: &FileConfig, seed: u64) -> CliResult<(Dataset, Provenance)> {
    let mut prov = Provenance::new();
    let data = src.data.clone().or_else(|| file.data.clone());
    let synthetic = src.synthetic.clone().or_else(|| file.synthetic.clone());
    let ds = match (data, synthetic) {
        (Some(path), None) => {
            let (schema, schema_path) = load_file(&path, src.schema.as_deref().or(file.schema.as_deref()))?;
            let ds = load_and_normalize(&path, &schema)?;
            prov.insert("data".into(), path.display().to_string());
            if let Some(s) = schema_path {
                prov.insert("schema".into(), s.display().to_string());
            }
            ds
        }
        (None, Some(kind)) => {
            let kind: SyntheticKind = kind.parse()?;
            let n = src.n.or(file.n).unwrap_or(DEFAULT_SYNTHETIC_N);
            prov.insert("synthetic".into(), kind.to_string());
            prov.insert("n".into(), n.to_string());
            prov.insert("synthetic-seed".into(), seed.to_string());
            make_synthetic(kind, n, SyntheticParams::default(), seed)?
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("give either data or synthetic, not both".into())),
        (None, None) => return Err(CliError::Usage("no data: pass --data FILE or --synthetic KIND".into())),
    };
    prov.insert("dataset".into(), ds.name.clone());
    prov.insert("n-samples".into(), ds.len().to_string());
    Ok((ds, prov))
}

fn run_provenance(cfg: &RunConfig, spec: &SplitSpec) -> Provenance {
    [
        ("rho", cfg.rho.to_string()),
        ("alpha", cfg.alpha.to_string()),
        ("beta", cfg.beta.to_string()),
        ("delta", cfg.delta.to_string()),
        ("mapping", cfg.mapping.to_string()),
        ("voting", cfg.voting.to_string()),
        ("members", cfg.member_count().to_string()),
        ("search-depth", cfg.search_depth.to_string()),
        ("validation-frac", cfg.validation_frac.to_string()),
        ("test-frac", spec.test_frac.to_string()),
        ("labeled-frac", spec.labeled_frac.to_string()),
        ("unlabeled-frac", spec.unlabeled_frac.to_string()),
        ("split-seed", spec.seed.to_string()),
        ("label-noise", cfg.label_noise.to_string()),
        ("feature-noise", cfg.feature_noise.to_string()),
        ("snr", cfg.snr.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// `model.json` becomes `model-r3.json` when several repetitions are saved.
fn rep_path(out: &Path, rep: usize, reps: usize) -> PathBuf {
    if reps == 1 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
    let name = match out.extension() {
        Some(ext) => format!("{stem}-r{rep}.{}", ext.to_string_lossy()),
        None => format!("{stem}-r{rep}"),
    };
    out.with_file_name(name)
}

fn node_summary(model: &StoredModel<f64>) -> String {
    match model {
        StoredModel::Single { member } => {
            let s = member.node_stats();
            format!("nodes stage1 {} stage2 {} labeled {}", s.stage1, s.stage2, s.labeled)
        }
        StoredModel::Ensemble { ensemble } => {
            let stats = ensemble.node_stats();
            let list = |f: fn(&sslart::NodeStats) -> usize| stats.iter().map(f).map(|v| v.to_string()).collect::<Vec<_>>().join("/");
            format!(
                "{} members, nodes stage1 {} stage2 {} labeled {}",
                stats.len(),
                list(|s| s.stage1),
                list(|s| s.stage2),
                list(|s| s.labeled)
            )
        }
    }
}

pub fn train(args: TrainArgs) -> CliResult<()> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let cfg = resolve_run(&args.model, &args.protocol, &file)?;
    let (seed, reps) = seed_and_reps(&args.protocol, &file, 1)?;
    let (ds, prov) = load_source(&args.source, &file, seed)?;
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("model.json"));
    let outcomes = run_reps(&ds, &cfg, seed, reps)?;
    for o in outcomes {
        let path = rep_path(&out, o.rep, reps);
        let mut doc = ModelDocument::new(o.model, ds.class_names.clone(), ds.feature_names.clone())?;
        doc.feature_ranges = Some(ds.ranges.clone());
        doc.provenance = prov.clone();
        doc.provenance.extend(run_provenance(&cfg, &split_spec(&cfg, o.seed)));
        doc.provenance.insert("master-seed".into(), seed.to_string());
        doc.provenance.insert("rep".into(), o.rep.to_string());
        doc.provenance.insert("seed".into(), o.seed.to_string());
        doc.save(&path).map_err(|e| data_err(&path, e))?;
        println!(
            "{}: {}; test accuracy {:.4}, coverage {:.4}",
            path.display(),
            node_summary(&doc.model),
            o.metrics.accuracy,
            o.metrics.coverage
        );
    }
    Ok(())
}

fn prov_f64(doc: &ModelDocument<f64>, key: &str) -> Option<f64> {
    doc.provenance.get(key).and_then(|v| v.parse().ok())
}

/// Best-effort run settings of a saved model, for the metrics row.
fn config_of(doc: &ModelDocument<f64>) -> RunConfig {
    let d = RunConfig::default();
    let (first, voting, members) = match &doc.model {
        StoredModel::Single { member } => (member, VotingMode::Single, 1),
        StoredModel::Ensemble { ensemble } => {
            let v = match ensemble.voting() {
                sslart::ensemble::Voting::Weighted => VotingMode::Weighted,
                sslart::ensemble::Voting::Majority => VotingMode::Majority,
            };
            (&ensemble.members()[0], v, ensemble.members().len())
        }
    };
    let p = first.input_network().params();
    let labeled = prov_f64(doc, "labeled-frac").unwrap_or(d.split.labeled_frac);
    RunConfig {
        rho: p.rho,
        alpha: p.alpha,
        beta: p.beta,
        mapping: first.mapping(),
        voting,
        members,
        search_depth: first.search_depth(),
        split: SplitSpec {
            test_frac: prov_f64(doc, "test-frac").unwrap_or(d.split.test_frac),
            labeled_frac: labeled,
            unlabeled_frac: prov_f64(doc, "unlabeled-frac").unwrap_or(1.0 - labeled),
            seed: 0,
        },
        label_noise: prov_f64(doc, "label-noise").unwrap_or(0.0),
        feature_noise: prov_f64(doc, "feature-noise").unwrap_or(0.0),
        ..d
    }
}

/// Data a saved model is scored on: the source given on the command line,
/// or the one recorded in the model.
fn data_for_model(doc: &ModelDocument<f64>, src: &SourceArgs, file: &FileConfig) -> CliResult<Dataset> {
    let data = src.data.clone().or_else(|| file.data.clone());
    let synthetic = src.synthetic.clone().or_else(|| file.synthetic.clone());
    let recorded = |k: &str| doc.provenance.get(k).cloned();
    let given = data.is_some();
    let ds = if let Some(path) = data.or_else(|| if synthetic.is_none() { recorded("data").map(PathBuf::from) } else { None }) {
        // the recorded schema belongs to the recorded data file
        let recorded_schema = if given { None } else { recorded("schema").map(PathBuf::from) };
        let schema_flag = src.schema.clone().or_else(|| file.schema.clone()).or(recorded_schema);
        let (schema, _) = load_file(&path, schema_flag.as_deref())?;
        let raw = load_and_normalize(&path, &schema)?;
        if raw.dim() != doc.dim {
            return Err(CliError::Data(format!("model expects {} features, {} has {}", doc.dim, path.display(), raw.dim())));
        }
        match &doc.feature_ranges {
            Some(r) => harness::dataset::load_with_ranges(&path, &schema, r, &doc.class_names)?,
            None => load_and_normalize(&path, &schema)?,
        }
    } else if let Some(kind) = synthetic.or_else(|| recorded("synthetic")) {
        let kind: SyntheticKind = kind.parse()?;
        let n = src.n.or(file.n).or_else(|| recorded("n").and_then(|v| v.parse().ok())).unwrap_or(DEFAULT_SYNTHETIC_N);
        let seed = recorded("synthetic-seed").and_then(|v| v.parse().ok()).unwrap_or(0);
        make_synthetic(kind, n, SyntheticParams::default(), seed)?
    } else {
        return Err(CliError::Usage("no data recorded in the model; pass --data or --synthetic".into()));
    };
    if ds.dim() != doc.dim {
        return Err(CliError::Data(format!("model expects {} features, data has {}", doc.dim, ds.dim())));
    }
    if ds.class_names != doc.class_names {
        return Err(CliError::Data(format!("data classes {:?} differ from model classes {:?}", ds.class_names, doc.class_names)));
    }
    Ok(ds)
}

fn subset_rows(doc: &ModelDocument<f64>, ds: &Dataset, subset: Subset) -> CliResult<Vec<(Vec<f64>, usize)>> {
    if subset == Subset::All {
        return Ok(ds.pairs());
    }
    let seed = doc
        .provenance
        .get("split-seed")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::Usage("the model records no split; use --subset all".into()))?;
    if let Some(n) = doc.provenance.get("n-samples").and_then(|v| v.parse::<usize>().ok()) {
        if n != ds.len() {
            return Err(CliError::Data(format!("model was split over {n} rows but the data has {}; use --subset all", ds.len())));
        }
    }
    let spec = SplitSpec { seed, ..config_of(doc).split };
    let s = split(ds, &spec)?;
    Ok(match subset {
        Subset::Test => s.test,
        _ => s.labeled,
    })
}

fn apply_overrides(model: &mut StoredModel<f64>, m: &ModelArgs, file: &FileConfig) -> CliResult<()> {
    let depth = m.search_depth.clone().or_else(|| file.search_depth.as_ref().and_then(|d| d.to_vec().first().map(|v| v.as_string())));
    if let Some(d) = depth {
        let d = parse_depth(&d)?;
        match model {
            StoredModel::Single { member } => member.set_search_depth(d),
            StoredModel::Ensemble { ensemble } => ensemble.set_search_depth(d),
        }
    }
    let voting = m.voting.clone().or_else(|| file.voting.as_ref().and_then(|v| v.to_vec().first().cloned()));
    if let (Some(v), StoredModel::Ensemble { ensemble }) = (voting, model) {
        match parse_voting(&v)?.ensemble_voting() {
            Some(v) => ensemble.set_voting(v),
            None => return Err(CliError::Usage("a saved ensemble cannot be scored with single voting".into())),
        }
    }
    Ok(())
}

fn writer(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).map_err(|e| data_err(p, e))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(rows: &[MetricsRow], out: Option<&Path>, seed: u64) -> CliResult<()> {
    write_rows(writer(out)?, rows)?;
    if rows.iter().filter(|r| r.accuracy.is_some()).count() < 2 {
        return Ok(());
    }
    let summary = summarize(rows, seed)?;
    if let Some(p) = out {
        let sp = p.with_extension("summary.csv");
        write_summary(writer(Some(&sp))?, &summary)?;
    } else {
        println!();
    }
    write_summary(io::stdout().lock(), &summary)?;
    Ok(())
}

pub fn eval(args: EvalArgs) -> CliResult<()> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let out = args.out.clone().or_else(|| file.out.clone());
    let (seed, reps) = seed_and_reps(&args.protocol, &file, 1)?;
    if args.model.is_empty() {
        let cfg = resolve_run(&args.model_args, &args.protocol, &file)?;
        let (ds, _) = load_source(&args.source, &file, seed)?;
        let rows: Vec<MetricsRow> = run_reps(&ds, &cfg, seed, reps)?
            .iter()
            .map(|o| MetricsRow::from_metrics(format!("r{}", o.rep), o.seed, &cfg, &o.metrics, o.wall))
            .collect();
        return emit(&rows, out.as_deref(), seed);
    }
    let mut rows = Vec::new();
    for path in &args.model {
        let start = Instant::now();
        let mut doc = ModelDocument::<f64>::load(path).map_err(|e| data_err(path, e))?;
        apply_overrides(&mut doc.model, &args.model_args, &file)?;
        let ds = data_for_model(&doc, &args.source, &file)?;
        let default_subset = if doc.provenance.contains_key("split-seed") { Subset::Test } else { Subset::All };
        let subset = args.subset.or(file.subset).unwrap_or(default_subset);
        let test = subset_rows(&doc, &ds, subset)?;
        let m = evaluate(&doc.model, &test, ds.n_classes())?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let run_seed = doc.provenance.get("seed").and_then(|v| v.parse().ok()).unwrap_or(0);
        rows.push(MetricsRow::from_metrics(id, run_seed, &config_of(&doc), &m, start.elapsed()));
    }
    emit(&rows, out.as_deref(), seed)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NameFile {
    features: Option<Vec<String>>,
    classes: Option<Vec<String>>,
    levels: Option<Vec<String>>,
}

pub fn rules(args: RulesArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let q = args.quantization.or(file.quantization).unwrap_or(5);
    if q < 2 {
        return Err(CliError::Usage(format!("--quantization must be at least 2, got {q}")));
    }
    let doc = ModelDocument::<f64>::load(&args.model).map_err(|e| data_err(&args.model, e))?;
    let names = match &args.names {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => NameFile::default(),
    };
    let features = names.features.unwrap_or_else(|| doc.feature_names.clone());
    let classes = names.classes.unwrap_or_else(|| doc.class_names.clone());
    let levels = names.levels.unwrap_or_else(|| default_vocabulary(q));
    if features.len() != doc.dim || classes.len() != doc.class_names.len() || levels.len() != q {
        return Err(CliError::Usage(format!(
            "names file gives {} features, {} classes and {} levels; the model needs {}, {} and {q}",
            features.len(),
            classes.len(),
            levels.len(),
            doc.dim,
            doc.class_names.len()
        )));
    }
    let members: Vec<&Member<f64>> = match &doc.model {
        StoredModel::Single { member } => vec![member],
        StoredModel::Ensemble { ensemble } => ensemble.members().iter().collect(),
    };
    let mut text = String::new();
    for (k, member) in members.iter().enumerate() {
        let rules = extract_rules(*member, q)?;
        match args.format {
            RulesFormat::Text => {
                if members.len() > 1 {
                    text.push_str(&format!("# member {} ({} rules)\n", k + 1, rules.len()));
                }
                for r in &rules {
                    text.push_str(&render_rule(r, &features, &levels, &classes)?);
                    text.push('\n');
                }
            }
            RulesFormat::Csv => {
                let table = rules_table(&rules, &features, &classes);
                if members.len() > 1 {
                    let mut lines = table.lines();
                    if k == 0 {
                        text.push_str(&format!("member,{}\n", lines.next().unwrap_or_default()));
                    } else {
                        lines.next();
                    }
                    for l in lines {
                        text.push_str(&format!("{},{l}\n", k + 1));
                    }
                } else {
                    text.push_str(&table);
                }
            }
        }
    }
    writer(args.out.as_deref())?.write_all(text.as_bytes()).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(())
}

fn list<T: Clone>(flag: &[T], file: Option<&crate::args::OneOrMany<T>>, fallback: T) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(f) = file {
        f.to_vec()
    } else {
        vec![fallback]
    }
}

pub fn bench_cmd(args: BenchArgs) -> CliResult<()> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let scalar_model = ModelArgs {
        alpha: args.alpha,
        beta: args.beta,
        delta: args.delta,
        validation_frac: args.validation_frac,
        ..Default::default()
    };
    let scalar_protocol = ProtocolArgs {
        test_frac: args.test_frac,
        feature_noise: args.feature_noise,
        snr: args.snr,
        seed: args.seed,
        reps: args.reps,
        ..Default::default()
    };
    // list-valued keys are taken from the grid below
    let scalar_file = FileConfig {
        rho: None,
        mapping: None,
        voting: None,
        members: None,
        search_depth: None,
        labeled_frac: None,
        label_noise: None,
        ..file.clone()
    };
    let base = resolve_run(&scalar_model, &scalar_protocol, &scalar_file)?;
    let (seed, reps) = seed_and_reps(&scalar_protocol, &file, 10)?;
    let depth_file = file.search_depth.as_ref().map(|d| crate::args::OneOrMany::Many(d.to_vec().iter().map(|v| v.as_string()).collect()));
    let grid = BenchGrid {
        rhos: list(&args.rho, file.rho.as_ref(), base.rho),
        members: list(&args.members, file.members.as_ref(), base.members),
        mappings: list(&args.mapping, file.mapping.as_ref(), base.mapping.to_string())
            .iter()
            .map(|s| parse_mapping(s))
            .collect::<CliResult<_>>()?,
        votings: list(&args.voting, file.voting.as_ref(), base.voting.to_string())
            .iter()
            .map(|s| parse_voting(s))
            .collect::<CliResult<_>>()?,
        depths: list(&args.search_depth, depth_file.as_ref(), base.search_depth.to_string())
            .iter()
            .map(|s| parse_depth(s))
            .collect::<CliResult<_>>()?,
        labeled_fracs: list(&args.labeled_frac, file.labeled_frac.as_ref(), base.split.labeled_frac),
        label_noises: list(&args.label_noise, file.label_noise.as_ref(), base.label_noise),
        reps,
    };
    let (ds, _) = load_source(&args.source, &file, seed)?;
    let rows = bench(&ds, &base, &grid, seed);
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        warn!("{failed} of {} runs failed; see the error column", rows.len());
    }
    write_rows(writer(args.out.or(file.out).as_deref())?, &rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_file_names() {
        assert_eq!(rep_path(Path::new("out/m.json"), 0, 1), PathBuf::from("out/m.json"));
        assert_eq!(rep_path(Path::new("out/m.json"), 3, 10), PathBuf::from("out/m-r3.json"));
        assert_eq!(rep_path(Path::new("m"), 1, 2), PathBuf::from("m-r1"));
    }
}
