//! Subcommand drivers: read JSON-lines inputs, run a stage on a worker pool
//! and write outputs plus a reproducibility manifest.
//!
//! Every stage collects results in input order, so the worker count never
//! changes a byte of output.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clean::{clean_pair, CleanConfig, Deduper, MethodRecord, RawPair, RecordLine, StopwordDetector};
use crate::eval::{self, CompareConfig, PredictionLine, PredictionSet, Smoothing};
use crate::finetune::{self, BugfixPair, FinetuneInstance, FinetuneLine, Split, Task};
use crate::mutation;
use crate::ngram::NgramModel;
use crate::objectives::{self, DistractorPool, Objective, ObjectiveError, PretrainInstance, StatementPool};
use crate::seed::digest_bytes;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Schema(_) => 2,
            PipelineError::MissingInput(_) => 3,
            PipelineError::ConfigInvalid(_) => 4,
            PipelineError::Io { .. } => 1,
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::ConfigInvalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Clean,
    NgramTrain,
    PretrainGen,
    Mutate,
    FinetuneBuild,
    Split,
    Eval,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Clean => "clean",
            Command::NgramTrain => "ngram-train",
            Command::PretrainGen => "pretrain-gen",
            Command::Mutate => "mutate",
            Command::FinetuneBuild => "finetune-build",
            Command::Split => "split",
            Command::Eval => "eval",
            Command::Compare => "compare",
        }
    }
}

/// Command-line flags; each overrides the config file key of the same name.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// TOML configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core); never affects outputs
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated objective tags: mlm,nsp,rtd,imf,mng,cbs
    #[arg(long)]
    pub objectives: Option<String>,
    #[arg(long)]
    pub mask_rate: Option<f64>,
    /// Comma-separated train,validation,test fractions
    #[arg(long)]
    pub split: Option<String>,
    /// Sample size for summarization datasets
    #[arg(long)]
    pub size: Option<usize>,
    /// Input file; `compare` takes several, optionally as name=path
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Dataset holding the targets for `eval` and `compare`
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Trained n-gram model for RTD (trained on the input when absent)
    #[arg(long)]
    pub ngram: Option<PathBuf>,
    /// Records whose method hashes must be excluded
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Fine-tuning task: bugfix, summarization or completion
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    /// Emit every mutant as an IMF instance instead of one sample
    #[arg(long)]
    pub imf_all: bool,
    /// BLEU smoothing: exponential or constant
    #[arg(long)]
    pub smoothing: Option<String>,
    /// Discordant-pair count from which McNemar switches to chi-square
    #[arg(long)]
    pub exact_threshold: Option<u64>,
}

/// Contents of the `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub objectives: Option<Vec<String>>,
    pub mask_rate: Option<f64>,
    pub split: Option<Vec<f64>>,
    pub size: Option<usize>,
    pub input: Option<Vec<PathBuf>>,
    pub output: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub ngram: Option<PathBuf>,
    pub against: Option<PathBuf>,
    pub task: Option<String>,
    pub max_tokens: Option<usize>,
    pub imf_all: Option<bool>,
    pub smoothing: Option<String>,
    pub exact_threshold: Option<u64>,
}

/// Effective configuration after merging file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub objectives: Vec<Objective>,
    pub mask_rate: f64,
    pub split: (f64, f64, f64),
    pub size: Option<usize>,
    pub input: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub ngram: Option<PathBuf>,
    pub against: Option<PathBuf>,
    pub task: Option<Task>,
    pub max_tokens: usize,
    pub imf_all: bool,
    pub smoothing: Smoothing,
    pub exact_threshold: u64,
}

/// The output-relevant part of [`Settings`], hashed into the manifest.
/// Paths and the worker count are left out on purpose.
#[derive(Serialize)]
struct DigestView<'a> {
    command: &'a str,
    seed: u64,
    objectives: Vec<&'static str>,
    mask_rate: f64,
    split: [f64; 3],
    size: Option<usize>,
    task: Option<&'static str>,
    max_tokens: usize,
    imf_all: bool,
    smoothing: Smoothing,
    exact_threshold: u64,
}

fn parse_objectives<S: AsRef<str>>(tags: &[S]) -> Result<Vec<Objective>> {
    let mut out: Vec<Objective> = tags
        .iter()
        .map(|t| t.as_ref().parse::<Objective>().map_err(config_err))
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(config_err("objective list is empty"));
    }
    Ok(out)
}

fn parse_fractions(v: &[f64]) -> Result<(f64, f64, f64)> {
    let [a, b, c] = v else {
        return Err(config_err("split needs exactly three fractions"));
    };
    finetune::split_sizes(0, (*a, *b, *c)).map_err(|e| config_err(e.to_string()))?;
    Ok((*a, *b, *c))
}

fn parse_smoothing(s: &str) -> Result<Smoothing> {
    match s {
        "exponential" => Ok(Smoothing::Exponential),
        "constant" => Ok(Smoothing::Constant),
        _ => Err(config_err(format!("unknown smoothing {s:?}"))),
    }
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            None => FileConfig::default(),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| match e.kind() {
                    io::ErrorKind::NotFound => PipelineError::MissingInput(path.clone()),
                    _ => PipelineError::Io { path: path.clone(), source: e },
                })?;
                toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
            }
        };
        let objectives = match (&flags.objectives, &file.objectives) {
            (Some(s), _) => parse_objectives(&s.split(',').collect::<Vec<_>>())?,
            (None, Some(v)) => parse_objectives(v)?,
            (None, None) => Objective::ALL.to_vec(),
        };
        let split = match (&flags.split, &file.split) {
            (Some(s), _) => {
                let v: Vec<f64> = s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| config_err(format!("split {x:?}: {e}"))))
                    .collect::<Result<_>>()?;
                parse_fractions(&v)?
            }
            (None, Some(v)) => parse_fractions(v)?,
            (None, None) => finetune::DEFAULT_FRACTIONS,
        };
        let mask_rate = flags.mask_rate.or(file.mask_rate).unwrap_or(objectives::DEFAULT_RATE);
        if !(mask_rate > 0.0 && mask_rate < 1.0) {
            return Err(config_err(format!("mask rate {mask_rate} outside (0, 1)")));
        }
        let task = flags
            .task
            .as_ref()
            .or(file.task.as_ref())
            .map(|t| t.parse::<Task>().map_err(config_err))
            .transpose()?;
        let smoothing = flags
            .smoothing
            .as_ref()
            .or(file.smoothing.as_ref())
            .map(|s| parse_smoothing(s))
            .transpose()?
            .unwrap_or_default();
        let max_tokens = flags.max_tokens.or(file.max_tokens).unwrap_or(crate::clean::DEFAULT_MAX_TOKENS);
        if max_tokens == 0 {
            return Err(config_err("max_tokens must be positive"));
        }
        Ok(Settings {
            seed: flags.seed.or(file.seed).unwrap_or(0),
            workers: flags.workers.or(file.workers).unwrap_or(0),
            objectives,
            mask_rate,
            split,
            size: flags.size.or(file.size),
            input: if flags.input.is_empty() { file.input.unwrap_or_default() } else { flags.input.clone() },
            output: flags.output.clone().or(file.output),
            dataset: flags.dataset.clone().or(file.dataset),
            ngram: flags.ngram.clone().or(file.ngram),
            against: flags.against.clone().or(file.against),
            task,
            max_tokens,
            imf_all: flags.imf_all || file.imf_all.unwrap_or(false),
            smoothing,
            exact_threshold: flags
                .exact_threshold
                .or(file.exact_threshold)
                .unwrap_or(eval::DEFAULT_EXACT_THRESHOLD),
        })
    }

    pub fn digest(&self, command: Command) -> String {
        let view = DigestView {
            command: command.name(),
            seed: self.seed,
            objectives: self.objectives.iter().map(|o| o.tag()).collect(),
            mask_rate: self.mask_rate,
            split: [self.split.0, self.split.1, self.split.2],
            size: self.size,
            task: self.task.map(Task::name),
            max_tokens: self.max_tokens,
            imf_all: self.imf_all,
            smoothing: self.smoothing,
            exact_threshold: self.exact_threshold,
        };
        digest_bytes(&serde_json::to_vec(&view).expect("settings serialize"))
    }

    fn single_input(&self) -> Result<&Path> {
        match self.input.as_slice() {
            [one] => Ok(one),
            [] => Err(config_err("--input is required")),
            _ => Err(config_err("exactly one --input expected")),
        }
    }

    fn output_dir(&self) -> Result<&Path> {
        self.output.as_deref().ok_or_else(|| config_err("--output is required"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub counts: BTreeMap<String, u64>,
    /// SHA-256 of each input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of each output file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
}

struct Stage {
    dir: PathBuf,
    counts: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Stage {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::Io { path: dir.to_path_buf(), source: e })?;
        Ok(Self { dir: dir.to_path_buf(), counts: BTreeMap::new(), inputs: BTreeMap::new(), outputs: BTreeMap::new() })
    }

    fn count(&mut self, key: impl Into<String>, n: usize) {
        *self.counts.entry(key.into()).or_insert(0) += n as u64;
    }

    fn read(&mut self, role: &str, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => PipelineError::MissingInput(path.to_path_buf()),
            _ => PipelineError::Io { path: path.to_path_buf(), source: e },
        })?;
        self.inputs.insert(role.to_string(), digest_bytes(&bytes));
        String::from_utf8(bytes).map_err(|_| PipelineError::Schema(format!("{}: not UTF-8", path.display())))
    }

    fn read_jsonl<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<Vec<T>> {
        let text = self.read(role, path)?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                serde_json::from_str(l)
                    .map_err(|e| PipelineError::Schema(format!("{}:{}: {e}", path.display(), n + 1)))
            })
            .collect()
    }

    fn read_records(&mut self, role: &str, path: &Path) -> Result<Vec<MethodRecord>> {
        let lines: Vec<RecordLine> = self.read_jsonl(role, path)?;
        lines
            .into_par_iter()
            .map(|l| l.into_record().map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display()))))
            .collect()
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| PipelineError::Io { path, source: e })?;
        self.outputs.insert(name.to_string(), digest_bytes(bytes));
        Ok(())
    }

    fn write_jsonl<T: Serialize>(&mut self, name: &str, items: &[T]) -> Result<usize> {
        let mut buf = Vec::new();
        for item in items {
            serde_json::to_writer(&mut buf, item).expect("output lines serialize");
            buf.push(b'\n');
        }
        self.write(name, &buf)?;
        Ok(items.len())
    }

    fn finish(mut self, command: Command, settings: &Settings) -> Result<Manifest> {
        let manifest = Manifest {
            command: command.name().to_string(),
            config_digest: settings.digest(command),
            seed: settings.seed,
            counts: std::mem::take(&mut self.counts),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
        };
        let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        json.push(b'\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, json).map_err(|e| PipelineError::Io { path, source: e })?;
        Ok(manifest)
    }
}

/// Runs one subcommand and returns the manifest it wrote.
pub fn run(command: Command, flags: &Flags) -> Result<Manifest> {
    let settings = Settings::resolve(flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| config_err(format!("worker pool: {e}")))?;
    pool.install(|| {
        let mut stage = Stage::new(settings.output_dir()?)?;
        match command {
            Command::Clean => clean(&settings, &mut stage)?,
            Command::NgramTrain => ngram_train(&settings, &mut stage)?,
            Command::PretrainGen => pretrain_gen(&settings, &mut stage)?,
            Command::Mutate => mutate(&settings, &mut stage)?,
            Command::FinetuneBuild => finetune_build(&settings, &mut stage)?,
            Command::Split => split(&settings, &mut stage)?,
            Command::Eval => evaluate(&settings, &mut stage)?,
            Command::Compare => compare(&settings, &mut stage)?,
        }
        stage.finish(command, &settings)
    })
}

#[derive(Serialize)]
struct RejectionLine<'a> {
    id: &'a str,
    reason: String,
}

fn against_hashes(settings: &Settings, stage: &mut Stage) -> Result<Option<HashSet<String>>> {
    let Some(path) = &settings.against else { return Ok(None) };
    let records = stage.read_records("against", path)?;
    Ok(Some(records.into_iter().map(|r| r.hash).collect()))
}

fn clean(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let pairs: Vec<RawPair> = stage.read_jsonl("input", settings.single_input()?)?;
    let against = against_hashes(settings, stage)?;
    let cfg = CleanConfig { max_tokens: settings.max_tokens };
    let cleaned: Vec<_> = pairs.par_iter().map(|p| clean_pair(p, &StopwordDetector, &cfg)).collect();
    let mut deduper = Deduper::new(against.as_ref());
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for (pair, result) in pairs.iter().zip(cleaned) {
        let reason = match result {
            Ok(r) if deduper.admit(&r.hash) => {
                kept.push(r.to_line());
                continue;
            }
            Ok(_) => "Duplicate".to_string(),
            Err(rejection) => rejection.to_string(),
        };
        stage.count(format!("rejected.{reason}"), 1);
        rejected.push(RejectionLine { id: &pair.id, reason });
    }
    stage.count("input", pairs.len());
    let n = stage.write_jsonl("records.jsonl", &kept)?;
    stage.count("records", n);
    stage.write_jsonl("rejections.jsonl", &rejected)?;
    Ok(())
}

/// Summary and method of each record, trained as separate sequences.
pub fn ngram_corpus(records: &[MethodRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .flat_map(|r| [r.summary_tokens.clone(), r.method_tokens.iter().map(|t| t.text.clone()).collect()])
        .collect()
}

fn train_model(records: &[MethodRecord]) -> Result<NgramModel> {
    NgramModel::train_parallel(&ngram_corpus(records)).map_err(|e| PipelineError::Schema(e.to_string()))
}

fn ngram_train(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let records = stage.read_records("input", settings.single_input()?)?;
    let model = train_model(&records)?;
    let mut json = model.to_json().into_bytes();
    json.push(b'\n');
    stage.write("ngram.json", &json)?;
    stage.count("sequences", 2 * records.len());
    stage.count("vocab", model.vocab_size());
    Ok(())
}

fn keep_ok(
    stage: &mut Stage,
    objective: Objective,
    results: Vec<std::result::Result<Vec<PretrainInstance>, ObjectiveError>>,
) -> Vec<PretrainInstance> {
    let mut out = Vec::new();
    for r in results {
        match r {
            Ok(v) => out.extend(v),
            Err(_) => stage.count(format!("skipped.{}", objective.tag()), 1),
        }
    }
    out
}

fn pretrain_gen(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let records = stage.read_records("input", settings.single_input()?)?;
    let (seed, rate) = (settings.seed, settings.mask_rate);
    let mut streams = Vec::new();
    for &objective in &settings.objectives {
        let mut stream = match objective {
            Objective::Mlm => records.par_iter().map(|r| objectives::gen_mlm(r, seed, rate)).collect(),
            Objective::Rtd => {
                let model = match &settings.ngram {
                    Some(path) => {
                        let text = stage.read("ngram", path)?;
                        NgramModel::from_json(&text)
                            .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?
                    }
                    None => train_model(&records)?,
                };
                records.par_iter().map(|r| objectives::gen_rtd(r, &model, seed, rate)).collect()
            }
            Objective::Imf => {
                let results = records
                    .par_iter()
                    .map(|r| {
                        if settings.imf_all {
                            objectives::gen_imf_all(r)
                        } else {
                            objectives::gen_imf(r, seed).map(|i| vec![i])
                        }
                    })
                    .collect();
                keep_ok(stage, objective, results)
            }
            Objective::Mng => {
                let results = records.par_iter().map(|r| objectives::gen_mng(r).map(|i| vec![i])).collect();
                keep_ok(stage, objective, results)
            }
            Objective::Cbs => {
                let pool = DistractorPool::build(&records);
                let results =
                    records.par_iter().map(|r| objectives::gen_cbs(r, &pool, seed).map(|i| vec![i])).collect();
                keep_ok(stage, objective, results)
            }
            Objective::Nsp => {
                let pool = StatementPool::build(&records);
                let out: Vec<Option<PretrainInstance>> =
                    (0..pool.len()).into_par_iter().map(|i| objectives::gen_nsp_one(&pool, i, seed)).collect();
                stage.count("skipped.nsp", out.iter().filter(|o| o.is_none()).count());
                out.into_iter().flatten().collect()
            }
        };
        stream.sort_by(|a: &PretrainInstance, b| (&a.source_record_id, &a.id).cmp(&(&b.source_record_id, &b.id)));
        stage.count(format!("instances.{}", objective.tag()), stream.len());
        streams.push((objective, stream));
    }
    let out = if streams.len() == 1 {
        streams.pop().map(|(_, s)| s).unwrap_or_default()
    } else {
        objectives::mix_objectives(streams, seed).map_err(|e| config_err(e.to_string()))?
    };
    let lines: Vec<_> = out.iter().map(PretrainInstance::to_line).collect();
    stage.write_jsonl("pretrain.jsonl", &lines)?;
    stage.count("records", records.len());
    stage.count("instances", lines.len());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantLine {
    pub id: String,
    pub operator: mutation::MutationOperator,
    pub mutated: String,
    pub original_id: String,
}

fn mutate(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let records = stage.read_records("input", settings.single_input()?)?;
    let per_record: Vec<_> = records.par_iter().map(mutation::enumerate_mutants).collect();
    let mut lines = Vec::new();
    for (r, result) in records.iter().zip(per_record) {
        match result {
            Ok(ms) if ms.is_empty() => stage.count("none_applicable", 1),
            Ok(ms) => {
                for (k, m) in ms.iter().enumerate() {
                    stage.count(format!("operator.{}", m.operator), 1);
                    lines.push(MutantLine {
                        id: format!("{}-m{k}", r.id),
                        operator: m.operator,
                        mutated: m.text(),
                        original_id: r.id.clone(),
                    });
                }
            }
            Err(_) => stage.count("malformed", 1),
        }
    }
    stage.count("records", records.len());
    let n = stage.write_jsonl("mutants.jsonl", &lines)?;
    stage.count("mutants", n);
    Ok(())
}

fn finetune_build(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let task = settings.task.ok_or_else(|| config_err("--task is required"))?;
    let input = settings.single_input()?;
    let instances: Vec<FinetuneInstance> = match task {
        Task::Bugfix => {
            let pairs: Vec<BugfixPair> = stage.read_jsonl("input", input)?;
            let against = against_hashes(settings, stage)?.unwrap_or_default();
            let report = finetune::build_bugfix(&pairs, &against);
            stage.count("input", pairs.len());
            stage.count("dropped", report.dropped_duplicates);
            let rejected: Vec<RejectionLine> =
                report.errors.iter().map(|(id, e)| RejectionLine { id, reason: e.to_string() }).collect();
            stage.count("errors", rejected.len());
            stage.write_jsonl("rejections.jsonl", &rejected)?;
            report.instances
        }
        Task::Summarization => {
            let records = stage.read_records("input", input)?;
            stage.count("input", records.len());
            let size = settings.size.unwrap_or(records.len());
            finetune::build_summarization(&records, size, settings.seed)
                .map_err(|e| config_err(e.to_string()))?
        }
        Task::Completion => {
            let records = stage.read_records("input", input)?;
            stage.count("input", records.len());
            let per: Vec<Vec<FinetuneInstance>> =
                records.par_iter().map(finetune::build_completion_one).collect();
            stage.count("records_without_blocks", per.iter().filter(|v| v.is_empty()).count());
            per.into_iter().flatten().collect()
        }
    };
    let lines: Vec<FinetuneLine> = instances.iter().map(FinetuneInstance::to_line).collect();
    let n = stage.write_jsonl("finetune.jsonl", &lines)?;
    stage.count("instances", n);
    Ok(())
}

fn split(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let mut lines: Vec<FinetuneLine> = stage.read_jsonl("input", settings.single_input()?)?;
    let ids: Vec<&str> = lines.iter().map(|l| l.id.as_str()).collect();
    if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
        return Err(PipelineError::Schema("duplicate instance ids".into()));
    }
    let labels = finetune::split_labels(&ids, settings.split, settings.seed).map_err(|e| config_err(e.to_string()))?;
    for (l, s) in lines.iter_mut().zip(labels) {
        l.split = Some(s);
    }
    stage.write_jsonl("split.jsonl", &lines)?;
    for (split, name) in [(Split::Train, "train"), (Split::Validation, "validation"), (Split::Test, "test")] {
        let part: Vec<&FinetuneLine> = lines.iter().filter(|l| l.split == Some(split)).collect();
        let n = stage.write_jsonl(&format!("{name}.jsonl"), &part)?;
        stage.count(name, n);
    }
    Ok(())
}

fn dataset_targets(settings: &Settings, stage: &mut Stage) -> Result<Vec<FinetuneLine>> {
    let path = settings.dataset.as_ref().ok_or_else(|| config_err("--dataset is required"))?;
    stage.read_jsonl("dataset", path)
}

fn predictions(stage: &mut Stage, role: &str, path: &Path, targets: &[FinetuneLine]) -> Result<PredictionSet> {
    let preds: Vec<PredictionLine> = stage.read_jsonl(role, path)?;
    PredictionSet::join(&preds, targets.iter().map(|t| (t.id.as_str(), t.target.as_str())))
        .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct EvalReport {
    metrics: eval::ModelMetrics,
}

fn evaluate(settings: &Settings, stage: &mut Stage) -> Result<()> {
    let targets = dataset_targets(settings, stage)?;
    let preds = predictions(stage, "input", settings.single_input()?, &targets)?;
    let report = EvalReport { metrics: eval::score(&preds, settings.smoothing) };
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    stage.write("eval.json", &json)?;
    stage.count("instances", preds.len());
    Ok(())
}

/// `name=path`, or a bare path named after its file stem.
fn named_input(arg: &Path) -> (String, PathBuf) {
    let s = arg.to_string_lossy();
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => (
            arg.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| s.into_owned()),
            arg.to_path_buf(),
        ),
    }
}

fn compare(settings: &Settings, stage: &mut Stage) -> Result<()> {
    if settings.input.len() < 2 {
        return Err(config_err("compare needs at least two --input prediction files"));
    }
    let targets = dataset_targets(settings, stage)?;
    let mut models = Vec::new();
    for arg in &settings.input {
        let (name, path) = named_input(arg);
        let preds = predictions(stage, &format!("model.{name}"), &path, &targets)?;
        models.push((name, preds));
    }
    let cfg = CompareConfig { smoothing: settings.smoothing, exact_threshold: settings.exact_threshold };
    let report = eval::compare(&models, cfg).map_err(|e| PipelineError::Schema(e.to_string()))?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    stage.write("comparison.json", &json)?;
    let csv = report.to_csv().map_err(|e| PipelineError::Schema(e.to_string()))?;
    stage.write("comparison.csv", csv.as_bytes())?;
    stage.count("models", models.len());
    stage.count("pairs", report.pairs.len());
    Ok(())
}
