use std::fs;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use readtask::analysis::{
    band_patterns, correlation_table, descriptive_stats, detect_outliers, forward_model_pattern,
    write_band_patterns, Spearman,
};
use readtask::corpus::{bayes_oracle, load_corpus, save_corpus, synthesize_corpus, Corpus, EegLevel, SynthFeature};
use readtask::dsp::Band;
use readtask::evaluation::{
    block_ablation, evaluate_matrix, evaluate_sequences, fixation_ablation, subject_units, EvalReport, LabelScheme,
    Protocol, REPORT_SCHEMA_VERSION,
};
use readtask::features::{
    assemble_feature_set, assemble_feature_set_with, assemble_sequences, level_of, FeatureContext, Level, SampleFilter,
};
use readtask::learners::{fit_scaler, save_model, train_svm, SavedModel};
use readtask::seed::derive_seed;
use readtask::seed_path;
use readtask::text::EmbeddingTable;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Preset, RunConfig};
use crate::failure::Failure;

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Export a feature matrix (or word sequences) as CSV.
    Features(FeatureArgs),
    /// Run an evaluation protocol.
    Eval(EvalArgs),
    /// Sweep the share of each sentence's fixations used for EEG features.
    AblateFixations(BandArgs),
    /// Sweep the number of training blocks per task.
    AblateBlocks(FeatureArgs),
    /// Flag subjects whose mean feature value is more than 2 std from the group.
    Outliers(OutlierArgs),
    /// Spearman correlation of report accuracies with subject covariates.
    Correlate(CorrelateArgs),
    /// Forward-model patterns of per-subject SVMs on channel features.
    Patterns(FeatureArgs),
    /// Per-task sentence length, reading time and omission rate.
    Stats,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Features(_) => "features",
            Command::Eval(_) => "eval",
            Command::AblateFixations(_) => "ablate-fixations",
            Command::AblateBlocks(_) => "ablate-blocks",
            Command::Outliers(_) => "outliers",
            Command::Correlate(_) => "correlate",
            Command::Patterns(_) => "patterns",
            Command::Stats => "stats",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Give both classes identical distributions.
    #[arg(long)]
    no_separation: bool,
    #[arg(long)]
    subjects: Option<usize>,
    /// Sentences per class and subject.
    #[arg(long)]
    sentences: Option<usize>,
    /// none, sentence, word or fixation.
    #[arg(long)]
    eeg_level: Option<String>,
    #[arg(long)]
    sr_sentences: Option<usize>,
    #[arg(long)]
    block_drift: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct FeatureArgs {
    /// Feature set name.
    #[arg(long)]
    features: String,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    /// within-sentence, within-word or cross-subject.
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    features: String,
    /// task, session, block or subject.
    #[arg(long, default_value = "task")]
    scheme: String,
    /// Subsample classes to equal counts before splitting.
    #[arg(long)]
    balanced: bool,
    /// Hold-out runs per subject.
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct BandArgs {
    #[arg(long)]
    band: String,
}

#[derive(Args, Debug, Serialize)]
pub struct OutlierArgs {
    /// Single sentence-level feature, e.g. max_sacc_dur.
    #[arg(long)]
    feature: String,
}

#[derive(Args, Debug, Serialize)]
pub struct CorrelateArgs {
    /// report.json files from `eval`.
    #[arg(long, num_args = 1.., required = true)]
    reports: Vec<PathBuf>,
}

struct Run {
    cfg: RunConfig,
    dir: PathBuf,
    record: Value,
}

impl Run {
    fn new(command: &Command, cfg: RunConfig) -> Result<Run, Failure> {
        let dir = cfg.out.join(cfg.run_id.clone().unwrap_or_else(|| command.name().to_string()));
        fs::create_dir_all(&dir).map_err(|e| readtask::Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let record = json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "report_schema_version": REPORT_SCHEMA_VERSION,
            "command": command.name(),
            "arguments": command,
            "seed": cfg.seed,
            "config": cfg,
        });
        let run = Run { cfg, dir, record };
        run.write_json("run.json", &run.record)?;
        Ok(run)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(|e| Failure::Core(readtask::Error::Io { path: p, source: e }))
    }

    fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(v).map_err(readtask::Error::from)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn write_csv(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), Failure> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| readtask::Error::Io {
            path: self.path(name),
            source: e,
        })?;
        self.write(name, &buf)
    }

    fn corpus(&self) -> Result<Corpus, Failure> {
        let path = self
            .cfg
            .corpus
            .as_ref()
            .ok_or_else(|| Failure::usage("a corpus is required: pass --corpus or set `corpus` in the config file"))?;
        let c = load_corpus(path)?;
        Ok(c.without_subjects(&self.cfg.exclude_subjects))
    }

    fn embeddings(&self) -> Result<Option<EmbeddingTable>, Failure> {
        Ok(match &self.cfg.embeddings {
            Some(p) => Some(EmbeddingTable::load(p)?),
            None => None,
        })
    }

    fn announce(&self, what: &str) {
        println!("{what} -> {}", self.dir.display());
    }
}

fn feature_context<'a>(cfg: &RunConfig, emb: Option<&'a EmbeddingTable>) -> FeatureContext<'a> {
    FeatureContext {
        eeg: cfg.eeg,
        embeddings: emb,
    }
}

fn parse_eeg_level(s: &str) -> Result<EegLevel, Failure> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| Failure::Usage {
        message: format!("unknown EEG level '{s}'"),
        valid: ["none", "sentence", "word", "fixation"].map(String::from).to_vec(),
    })
}

pub fn run(command: Command, cfg: RunConfig) -> Result<(), Failure> {
    let run = Run::new(&command, cfg)?;
    match &command {
        Command::Synth(a) => synth(&run, a),
        Command::Features(a) => features(&run, a),
        Command::Eval(a) => eval(&run, a),
        Command::AblateFixations(a) => ablate_fixations(&run, a),
        Command::AblateBlocks(a) => ablate_blocks(&run, a),
        Command::Outliers(a) => outliers(&run, a),
        Command::Correlate(a) => correlate(&run, a),
        Command::Patterns(a) => patterns(&run, a),
        Command::Stats => stats(&run),
    }
}

fn synth(run: &Run, a: &SynthArgs) -> Result<(), Failure> {
    let mut sc = run.cfg.synth.clone();
    if let Some(p) = a.preset {
        sc.preset = p;
    }
    sc.no_separation |= a.no_separation;
    let mut spec = sc.resolve()?;
    if let Some(n) = a.subjects {
        spec.n_subjects = n;
    }
    if let Some(n) = a.sentences {
        spec.sentences_per_class = n;
    }
    if let Some(l) = &a.eeg_level {
        spec.eeg.level = parse_eeg_level(l)?;
    }
    if let Some(n) = a.sr_sentences {
        spec.sr_sentences = n;
    }
    if let Some(d) = a.block_drift {
        spec.eeg.block_drift = d;
    }
    let corpus = synthesize_corpus(&spec, run.cfg.seed)?;
    save_corpus(&corpus, run.path("corpus"))?;
    run.write_json("synth_spec.json", &spec)?;
    let mut oracle = serde_json::Map::new();
    for (name, feats) in [
        ("omission_rate", vec![SynthFeature::OmissionRate]),
        ("reading_time", vec![SynthFeature::ReadingTime]),
        ("omission_rate+reading_time", vec![SynthFeature::OmissionRate, SynthFeature::ReadingTime]),
    ] {
        let o = bayes_oracle(&spec, &feats)?;
        oracle.insert(name.into(), json!({"accuracy": o.accuracy, "std_error": o.std_error}));
    }
    run.write_json("bayes_oracle.json", &oracle)?;
    run.announce(&format!("{} subjects, {} sentences", corpus.subjects.len(), corpus.n_sentences()));
    Ok(())
}

fn features(run: &Run, a: &FeatureArgs) -> Result<(), Failure> {
    let level = level_of(&a.features)?;
    let corpus = run.corpus()?;
    let emb = run.embeddings()?;
    let ctx = feature_context(&run.cfg, emb.as_ref());
    let name = format!("features_{}.csv", a.features);
    match level {
        Level::Sentence => {
            let m = assemble_feature_set(&corpus, &a.features, &ctx)?;
            run.write_csv(&name, |w| m.write_csv(w))?;
        }
        Level::Word => {
            let ds = assemble_sequences(&corpus, &a.features, &ctx)?;
            run.write_csv(&name, |w| ds.write_csv(w))?;
        }
    }
    run.announce(&name);
    Ok(())
}

fn eval(run: &Run, a: &EvalArgs) -> Result<(), Failure> {
    let protocol = Protocol::parse(&a.protocol)?;
    let scheme = LabelScheme::parse(&a.scheme)?;
    let level = level_of(&a.features)?;
    let mut cfg = run.cfg.eval.clone();
    if let Some(n) = a.runs {
        cfg.runs = n;
    }
    cfg.balanced |= a.balanced;
    let corpus = run.corpus()?;
    let emb = run.embeddings()?;
    let ctx = feature_context(&run.cfg, emb.as_ref());
    let mut report: EvalReport = match level {
        Level::Sentence => {
            let filter = if scheme == LabelScheme::Session {
                SampleFilter::AllTasks
            } else {
                SampleFilter::Task
            };
            let m = assemble_feature_set_with(&corpus, &a.features, &ctx, filter)?;
            evaluate_matrix(&m, protocol, scheme, &cfg, run.cfg.seed)?
        }
        Level::Word => {
            if scheme != LabelScheme::Task {
                return Err(Failure::usage(format!(
                    "word-level sets are evaluated with task labels only, not '{scheme}'"
                )));
            }
            let ds = assemble_sequences(&corpus, &a.features, &ctx)?;
            evaluate_sequences(&ds, protocol, &cfg, run.cfg.seed)?
        }
    };
    report.config = run.record.clone();
    report.write_to_dir(&run.dir)?;
    run.announce(&format!(
        "{} {} median {:.4} MAD {:.4} over {} subjects",
        report.protocol,
        report.feature_set,
        report.median,
        report.mad,
        report.subjects.len()
    ));
    Ok(())
}

fn ablate_fixations(run: &Run, a: &BandArgs) -> Result<(), Failure> {
    let band = Band::parse(&a.band)?;
    let corpus = run.corpus()?;
    let ctx = feature_context(&run.cfg, None);
    let mut r = fixation_ablation(&corpus, band, &ctx, &run.cfg.eval, run.cfg.seed)?;
    r.config = run.record.clone();
    run.write_json("fixation_ablation.json", &r)?;
    run.write_csv("fixation_ablation.csv", |w| r.write_csv(w))?;
    run.announce(&format!("fixation ablation ({band})"));
    Ok(())
}

fn ablate_blocks(run: &Run, a: &FeatureArgs) -> Result<(), Failure> {
    if level_of(&a.features)? != Level::Sentence {
        return Err(Failure::usage(format!("{} is word-level; block ablation uses sentence-level sets", a.features)));
    }
    let corpus = run.corpus()?;
    let emb = run.embeddings()?;
    let m = assemble_feature_set(&corpus, &a.features, &feature_context(&run.cfg, emb.as_ref()))?;
    let r = block_ablation(&m, &run.cfg.block_ablation, run.cfg.seed)?;
    run.write_json("block_ablation.json", &r)?;
    run.write_csv("block_ablation.csv", |w| r.write_csv(w))?;
    run.announce("block ablation");
    Ok(())
}

fn outliers(run: &Run, a: &OutlierArgs) -> Result<(), Failure> {
    let corpus = run.corpus()?;
    let r = detect_outliers(&corpus, &a.feature, &feature_context(&run.cfg, None))?;
    run.write_json("outliers.json", &r)?;
    run.write_csv("outliers.csv", |w| {
        use std::io::Write;
        writeln!(w, "subject_id,mean,outlier")?;
        for (s, v) in &r.subject_means {
            writeln!(w, "{s},{v},{}", r.outliers.contains(s))?;
        }
        Ok(())
    })?;
    run.announce(&format!("outliers on {}: {:?}", a.feature, r.outliers));
    Ok(())
}

fn correlate(run: &Run, a: &CorrelateArgs) -> Result<(), Failure> {
    let reports = a
        .reports
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| readtask::Error::Io {
                path: p.clone(),
                source: e,
            })?;
            EvalReport::from_json(&text)
        })
        .collect::<readtask::Result<Vec<_>>>()?;
    let corpus = run.corpus()?;
    let meta: Vec<_> = corpus.subjects.iter().map(|s| s.meta.clone()).collect();
    let rows = correlation_table(&reports, &meta)?;
    run.write_json("correlations.json", &rows)?;
    run.write_csv("correlations.csv", |w| {
        use std::io::Write;
        writeln!(w, "feature_set,protocol,covariate,rho,p,significant")?;
        for r in &rows {
            let (rho, p) = match r.result {
                Spearman::Defined { rho, p } => (rho.to_string(), p.to_string()),
                Spearman::Undefined => ("undefined".into(), "undefined".into()),
            };
            writeln!(w, "{},{},{},{rho},{p},{}", r.feature_set, r.protocol, r.covariate, r.significant)?;
        }
        Ok(())
    })?;
    run.announce("correlations");
    Ok(())
}

fn patterns(run: &Run, a: &FeatureArgs) -> Result<(), Failure> {
    let corpus = run.corpus()?;
    let m = assemble_feature_set(&corpus, &a.features, &feature_context(&run.cfg, None))?;
    let models_dir = run.path("models");
    fs::create_dir_all(&models_dir).map_err(|e| readtask::Error::Io {
        path: models_dir.clone(),
        source: e,
    })?;
    let mut per_subject = Vec::new();
    let mut mean = vec![0.0; m.dim()];
    for (subject, idx) in subject_units(&m.groups) {
        let sub = m.subset(&idx);
        let scaler = fit_scaler(&sub)?;
        let scaled = scaler.apply(&sub)?;
        let model = train_svm(&scaled, &run.cfg.eval.svm, derive_seed(run.cfg.seed, seed_path!["patterns", subject.as_str()]))?;
        let p = forward_model_pattern(&model, &scaled)?.remove(0);
        mean.iter_mut().zip(&p.values).for_each(|(a, b)| *a += b);
        save_model(
            &SavedModel::Svm {
                model,
                scaler,
                feature_names: m.feature_names.clone(),
                label_names: m.label_names.clone(),
            },
            &models_dir.join(format!("{subject}.json")),
        )?;
        per_subject.push(json!({"subject_id": subject, "label": p.label, "values": p.values}));
    }
    let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        mean.iter_mut().for_each(|x| *x /= norm);
    }
    let bands = band_patterns(&mean, &m.feature_names)?;
    write_band_patterns(&bands, &run.dir)?;
    run.write_json("patterns.json", &json!({"feature_set": a.features, "subjects": per_subject}))?;
    run.announce(&format!("patterns for {} band(s)", bands.len()));
    Ok(())
}

fn stats(run: &Run) -> Result<(), Failure> {
    let corpus = run.corpus()?;
    let rows = descriptive_stats(&corpus)?;
    run.write_json("descriptive.json", &rows)?;
    run.write_csv("descriptive.csv", |w| {
        use std::io::Write;
        writeln!(w, "quantity,nr_mean,nr_std,tsr_mean,tsr_std,p_value")?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{},{}", r.quantity, r.nr.mean, r.nr.std, r.tsr.mean, r.tsr.std, r.p_value)?;
        }
        Ok(())
    })?;
    run.announce("descriptive statistics");
    Ok(())
}

