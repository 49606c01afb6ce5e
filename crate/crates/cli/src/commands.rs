use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use handlescope_core::corpus::{load_jsonl_with, split_dataset, synth_generate};
use handlescope_core::eval::{
    chi2_significance, feature_frequency_report, frequency_text, make_folds, run_cv, CvOptions, EvalReport,
};
use handlescope_core::features::text::Lexicon;
use handlescope_core::features::{build_matrix, filter_candidates, parse_rules, FilterRule};
use handlescope_core::similarity::{rq1_test, Rq1Options, VarianceModel};
use handlescope_core::{Corpus, Error, FittedModel, LearnerKind, LearnerSpec, Result, Samples};

use crate::config::RunConfig;
use crate::{Cli, Command};

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Applies the config file and global flags, prepares the output directory
/// and thread pool, then runs the subcommand.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    apply_flags(&mut cfg, &cli.command);
    for name in cfg.hyperparameters.keys() {
        name.parse::<LearnerKind>()?;
    }
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    match &cli.command {
        Command::Synth(_) => synth(&cfg),
        Command::Rq1(_) => rq1(&cfg),
        Command::Featurize(_) => featurize(&cfg),
        Command::Filter(_) => filter(&cfg),
        Command::Chi2(_) => chi2(&cfg),
        Command::Cv(_) => cv(&cfg),
        Command::Train(_) => train(&cfg),
        Command::Predict(_) => predict(&cfg),
    }?;
    cfg.echo()
}

fn apply_flags(cfg: &mut RunConfig, command: &Command) {
    let set_corpus = |cfg: &mut RunConfig, c: &Option<PathBuf>| {
        if let Some(c) = c {
            cfg.input = Some(c.clone());
        }
    };
    match command {
        Command::Synth(a) => {
            if let Some(v) = a.similarity_bias {
                cfg.synth.similarity_bias = v;
            }
            if let Some(v) = a.n_positive {
                cfg.synth.n_positive = v;
            }
            if let Some(v) = a.n_negative {
                cfg.synth.n_negative = v;
            }
            if let Some(v) = a.n_unlabeled {
                cfg.synth.n_unlabeled = v;
            }
        }
        Command::Rq1(a) => {
            set_corpus(cfg, &a.corpus);
            if let Some(v) = a.alpha {
                cfg.alpha = v;
            }
            if a.case_sensitive {
                cfg.case_insensitive = false;
            }
            if a.pooled {
                cfg.variance = VarianceModel::Pooled;
            }
        }
        Command::Featurize(a) | Command::Chi2(a) => {
            set_corpus(cfg, &a.corpus);
            if let Some(l) = a.layout {
                cfg.layout = l;
            }
            if a.no_standardize {
                cfg.standardize = false;
            }
        }
        Command::Filter(a) => {
            set_corpus(cfg, &a.corpus);
            if a.rules.is_some() {
                cfg.rules = a.rules.clone();
            }
            cfg.filters.extend(a.rule.iter().cloned());
        }
        Command::Cv(a) => {
            set_corpus(cfg, &a.corpus);
            if let Some(l) = &a.learners {
                cfg.learners = l.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            }
            if let Some(l) = a.layout {
                cfg.layout = l;
            }
            if let Some(k) = a.folds {
                cfg.folds = k;
            }
            if a.no_standardize {
                cfg.standardize = false;
            }
        }
        Command::Train(a) => {
            set_corpus(cfg, &a.corpus);
            if let Some(l) = &a.learner {
                cfg.learner = l.clone();
            }
            if let Some(l) = a.layout {
                cfg.layout = l;
            }
            if a.no_standardize {
                cfg.standardize = false;
            }
        }
        Command::Predict(a) => {
            set_corpus(cfg, &a.corpus);
            if a.model.is_some() {
                cfg.model = a.model.clone();
            }
        }
    }
}

fn load_corpus(cfg: &RunConfig) -> Result<Corpus> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input corpus given (positional argument or `input` in the config)".into()))?;
    let lexicon = match (&cfg.lexicon_positive, &cfg.lexicon_negative) {
        (Some(p), Some(n)) => Lexicon::from_files(p, n)?,
        (None, None) => Lexicon::bundled(),
        _ => return Err(Error::Config("lexicon_positive and lexicon_negative must be set together".into())),
    };
    load_jsonl_with(path, &lexicon)
}

fn learner_spec(cfg: &RunConfig, name: &str) -> Result<LearnerSpec> {
    let spec = LearnerSpec::from_name(name)?;
    match cfg.hyperparameters.get(spec.kind().name()) {
        Some(t) => spec.with_overrides(t),
        None => Ok(spec),
    }
}

fn synth(cfg: &RunConfig) -> Result<()> {
    let corpus = synth_generate(&cfg.synth, cfg.seed)?;
    let path = cfg.out.join("corpus.jsonl");
    corpus.save_jsonl(&path)?;
    eprintln!(
        "wrote {} accounts ({} positive, {} negative, {} unlabeled) to {}",
        corpus.len(),
        cfg.synth.n_positive,
        cfg.synth.n_negative,
        cfg.synth.n_unlabeled,
        path.display()
    );
    Ok(())
}

fn rq1(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let opts = Rq1Options {
        alpha: cfg.alpha,
        case_insensitive: cfg.case_insensitive,
        variance_model: cfg.variance,
    };
    let result = rq1_test(&corpus, &opts)?;
    let json = serde_json::to_string_pretty(&result)?;
    write(&cfg.out.join("rq1.json"), format!("{json}\n"))?;
    println!("{json}");
    eprintln!("{}", result.summary());
    Ok(())
}

fn featurize(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let m = build_matrix(&corpus.records, cfg.layout, cfg.standardize)?;
    let path = cfg.out.join("features.csv");
    let mut buf = Vec::new();
    m.write_csv(&mut buf).map_err(|e| Error::io(&path, e))?;
    write(&path, buf)?;
    let raw = if cfg.standardize {
        build_matrix(&corpus.records, cfg.layout, false)?
    } else {
        m
    };
    let labeled: Vec<bool> = raw.labels.iter().map(Option::is_some).collect();
    let freq = feature_frequency_report(&raw.values, &labeled, &raw.names)?;
    write(&cfg.out.join("frequency.json"), serde_json::to_string_pretty(&freq)?)?;
    write(&cfg.out.join("frequency.txt"), frequency_text(&freq))?;
    eprintln!("wrote {} rows x {} features to {}", raw.values.rows(), raw.names.len(), path.display());
    Ok(())
}

fn filter(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let mut rules: Vec<FilterRule> = match &cfg.rules {
        Some(p) => parse_rules(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => Vec::new(),
    };
    for r in &cfg.filters {
        rules.push(r.parse()?);
    }
    let kept = filter_candidates(&corpus, &rules)?;
    let path = cfg.out.join("filtered.jsonl");
    kept.save_jsonl(&path)?;
    eprintln!("kept {} of {} accounts", kept.len(), corpus.len());
    Ok(())
}

fn chi2(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let m = build_matrix(&corpus.records, cfg.layout, false)?;
    let rows = m.labeled_rows();
    let labels: Vec<i8> = rows.iter().map(|&i| m.labels[i].expect("labeled row")).collect();
    let table = chi2_significance(&m.values.select_rows(&rows), &labels, &m.names)?;
    write(&cfg.out.join("chi2.json"), serde_json::to_string_pretty(&table)?)?;
    let text = table.to_text();
    write(&cfg.out.join("chi2.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn cv(cfg: &RunConfig) -> Result<()> {
    let names: Vec<String> = if cfg.learners.is_empty() {
        LearnerKind::ALL.iter().map(|k| k.name().to_string()).collect()
    } else {
        cfg.learners.clone()
    };
    let specs = names.iter().map(|n| learner_spec(cfg, n)).collect::<Result<Vec<_>>>()?;
    let corpus = load_corpus(cfg)?;
    let data = split_dataset(&corpus, cfg.layout)?;
    let plan = make_folds(&data.labels, cfg.folds, cfg.seed)?;
    let opts = CvOptions {
        standardize: cfg.standardize,
        seed: cfg.seed,
    };
    let reports = specs
        .iter()
        .map(|s| {
            let r = run_cv(&data, s, &plan, opts);
            eprintln!("{}: {} folds, {} failed", r.display_name, r.folds.len(), r.failed_folds);
            r
        })
        .collect();
    let report = EvalReport::new(&data, &plan, cfg.standardize, reports);
    write(&cfg.out.join("report.json"), format!("{}\n", report.to_json()?))?;
    write(&cfg.out.join("timings.json"), format!("{}\n", report.timings_json()?))?;
    let text = report.to_text();
    write(&cfg.out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn predictions_csv(samples: &Samples, scores: &[f64], truth: Option<&[Option<i8>]>) -> String {
    let mut out = String::from("handle,label,score,prediction\n");
    for (i, (h, s)) in samples.handles.iter().zip(scores).enumerate() {
        let label = truth.and_then(|t| t[i]).map(|l| l.to_string()).unwrap_or_default();
        let pred = handlescope_core::learners::sign_label(*s);
        let _ = writeln!(out, "{h},{label},{s:?},{pred}");
    }
    out
}

fn train(cfg: &RunConfig) -> Result<()> {
    let spec = learner_spec(cfg, &cfg.learner)?.with_seed(cfg.seed);
    let corpus = load_corpus(cfg)?;
    let data = split_dataset(&corpus, cfg.layout)?;
    let model = FittedModel::fit(&spec, &data, cfg.standardize)?;
    let path = cfg.out.join("model.json");
    model.save(&path)?;
    let scores = model.decision(&data.labeled)?;
    let truth: Vec<Option<i8>> = data.labels.iter().map(|&l| Some(l)).collect();
    write(&cfg.out.join("train_predictions.csv"), predictions_csv(&data.labeled, &scores, Some(&truth)))?;
    eprintln!("trained {} on {} labeled accounts; model at {}", spec.kind().display_name(), data.n_labeled(), path.display());
    Ok(())
}

fn predict(cfg: &RunConfig) -> Result<()> {
    let path = cfg
        .model
        .as_ref()
        .ok_or_else(|| Error::Config("no model given (--model or `model` in the config)".into()))?;
    let model = FittedModel::load(path)?;
    let corpus = load_corpus(cfg)?;
    let refs: Vec<_> = corpus.records.iter().collect();
    let samples = Samples::from_records(&refs, model.layout);
    let scores = model.decision(&samples)?;
    let truth: Vec<Option<i8>> = corpus
        .records
        .iter()
        .map(|r| r.label.sign())
        .collect();
    let out = cfg.out.join("predictions.csv");
    write(&out, predictions_csv(&samples, &scores, Some(&truth)))?;
    eprintln!("scored {} accounts into {}", samples.len(), out.display());
    Ok(())
}
