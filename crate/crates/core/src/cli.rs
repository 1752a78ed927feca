//! Command-line front end: `textnorm ingest | noise | train | normalize |
//! evaluate | sweep`.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 training failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    extract_word_pairs, load_lexnorm, parse_lexnorm, preprocess_corpus,
    AnonymizationRecord, CorpusStats, PreprocessedPair, TweetPair,
};
use crate::error::{Error, Result};
use crate::eval::{
    error_analysis, score, sweep_ngram, sweep_noise_ratio, NgramSweepSetup,
    NoiseSweepSetup, SweepResult,
};
use crate::models::{
    build_lexicon, char_sentence_examples, dict1_normalize, dict2_normalize, multi_examples,
    normalize_word_s2s, s2schar_normalize, s2smulti_normalize, s2sself_normalize, self_examples,
    train_seq2seq_with, word_examples, DictLexicon, HybridModel, HyperParams, Seq2Seq, SeqExample,
    TrainReport, HYBRID_KIND, MODEL_KIND,
};
use crate::neural::serialize::read_manifest;
use crate::noise::{derive_seed, generate_tagged, read_tsv, write_tsv, KeyboardLayout, NoiseConfig, TaggedPair};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRAINING: i32 = 3;

pub const SEED_ENV: &str = "TEXTNORM_SEED";
pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const CONFIG_FILE: &str = "config.json";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } | Error::NonFinite(_) => EXIT_TRAINING,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "textnorm", version, about = "Normalize noisy tweets with a hybrid word/character encoder-decoder")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a LexNorm JSON file, preprocess it and print corpus statistics.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Preprocessed corpus (JSON).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Generate adversarial word pairs as `noised<TAB>clean<TAB>type`.
    Noise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        /// Keyboard adjacency JSON; QWERTY when omitted.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Train a model described by a JSON run configuration.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        model: ModelKind,
        /// Output directory; defaults to the configuration's `model_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalize tweets, one per line (or a LexNorm JSON file).
    Normalize {
        /// Model directory; `hs2s` also accepts a word and a char directory.
        #[arg(long, required = true, num_args = 1..=2)]
        model: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Input path, or `-` for stdin.
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        /// Confidence threshold when `hs2s` is given two directories.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Score predictions (LexNorm JSON) against gold data.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Also print the N most frequent correct and incorrect normalizations.
        #[arg(long)]
        errors: Option<usize>,
    },
    /// Retrain across a noise-ratio or context-window grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        what: SweepKind,
        /// Comma-separated knob values (`full` allowed for ngram).
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Word,
    Char,
    #[value(name = "self")]
    SelfTarget,
    Multi,
    Tweetchar,
    Lexicon,
    Hybrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Hs2s,
    S2s,
    Dict1,
    Dict2,
    S2sself,
    S2smulti,
    S2schar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Lexnorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Noise,
    Ngram,
}

/// Persisted run configuration. Relative paths resolve against the
/// configuration file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub train: PathBuf,
    pub test: Option<PathBuf>,
    pub model_dir: PathBuf,
    /// Synthetic word pairs for the character model; generated from `train`
    /// with `noise` when absent.
    pub pairs: Option<PathBuf>,
    /// Existing word model reused by the noise sweep.
    pub word_model: Option<PathBuf>,
    pub word: HyperParams,
    pub chars: HyperParams,
    pub sentence: HyperParams,
    pub noise: NoiseConfig,
    pub tau: f64,
    pub seed: u64,
    pub max_decode_len: Option<usize>,
    pub beam_width: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: PathBuf::from("train.json"),
            test: None,
            model_dir: PathBuf::from("model"),
            pairs: None,
            word_model: None,
            word: HyperParams::word(),
            chars: HyperParams::char_secondary(),
            sentence: HyperParams::char_sentence(),
            noise: NoiseConfig::default(),
            tau: 0.5,
            seed: 0,
            max_decode_len: None,
            beam_width: 1,
        }
    }
}

impl RunConfig {
    /// Read, resolve paths, and materialize seeds and decode options into
    /// every sub-configuration. `TEXTNORM_SEED` overrides `seed`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: serde_json::Value = serde_json::from_str(&text)?;
        let mut cfg: RunConfig = serde_json::from_value(raw.clone())?;
        cfg.word = overlay(HyperParams::word(), raw.get("word"))?;
        cfg.chars = overlay(HyperParams::char_secondary(), raw.get("chars"))?;
        cfg.sentence = overlay(HyperParams::char_sentence(), raw.get("sentence"))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.train);
        resolve(&mut cfg.model_dir);
        for p in [&mut cfg.test, &mut cfg.pairs, &mut cfg.word_model].into_iter().flatten() {
            resolve(p);
        }
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("{SEED_ENV}={v} is not an unsigned integer")))?;
        }
        cfg.materialize();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn materialize(&mut self) {
        self.noise.seed = self.seed;
        for (i, h) in [&mut self.word, &mut self.chars, &mut self.sentence].into_iter().enumerate() {
            h.seed = derive_seed(self.seed, i as u64);
            h.beam_width = self.beam_width;
            if let Some(m) = self.max_decode_len {
                h.max_decode_len = m;
            }
        }
        self.word.granularity = crate::models::Granularity::Word;
        self.chars.granularity = crate::models::Granularity::Char;
        self.sentence.granularity = crate::models::Granularity::Char;
    }

    pub fn validate(&self) -> Result<()> {
        if !self.train.is_file() {
            return Err(Error::Argument(format!("training corpus {} not found", self.train.display())));
        }
        if let Some(t) = &self.test {
            if !t.is_file() {
                return Err(Error::Argument(format!("test corpus {} not found", t.display())));
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Argument(format!("tau {} outside [0, 1]", self.tau)));
        }
        self.noise.validate()?;
        for h in [&self.word, &self.chars, &self.sentence] {
            h.validate()?;
        }
        Ok(())
    }

    fn test_path(&self) -> Result<&Path> {
        self.test
            .as_deref()
            .ok_or_else(|| Error::Argument("configuration has no test corpus".into()))
    }
}

/// Keys present in `section` replace the preset's values.
fn overlay(preset: HyperParams, section: Option<&serde_json::Value>) -> Result<HyperParams> {
    let mut base = serde_json::to_value(preset)?;
    if let (Some(serde_json::Value::Object(keys)), serde_json::Value::Object(b)) = (section, &mut base) {
        for (k, v) in keys {
            b.insert(k.clone(), v.clone());
        }
    }
    Ok(serde_json::from_value(base)?)
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, out, stats } => cmd_ingest(&input, &out, stats.as_deref()),
        Command::Noise {
            input,
            out,
            ratio,
            seed,
            k_max,
            layout,
        } => {
            let seed = env_seed()?.or(seed).unwrap_or(0);
            cmd_noise(&input, &out, &NoiseConfig { ratio, seed, k_max }, layout.as_deref())
        }
        Command::Train { config, model, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.model_dir.clone());
            cmd_train(&cfg, model, &dir)
        }
        Command::Normalize {
            model,
            mode,
            input,
            output,
            format,
            seed,
            tau,
            jobs,
        } => {
            let normalizer = Normalizer::load(mode, &model, tau, env_seed()?.or(seed))?;
            cmd_normalize(&normalizer, &input, output.as_deref(), format, jobs)
        }
        Command::Evaluate { pred, gold, errors } => cmd_evaluate(&pred, &gold, errors),
        Command::Sweep {
            config,
            what,
            values,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let result = cmd_sweep(&cfg, what, values.as_deref())?;
            write_sweep(&result, out.as_deref())
        }
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Argument(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn read_corpus(path: &Path) -> Result<Vec<TweetPair>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::Argument(format!("empty corpus: {}", path.display())));
    }
    let pairs = parse_lexnorm(&text)?;
    if pairs.is_empty() {
        return Err(Error::Argument(format!("empty corpus: {}", path.display())));
    }
    Ok(pairs)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// One preprocessed tweet as written by `ingest`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedRecord {
    pub tid: String,
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub anonymized: AnonymizationRecord,
}

impl From<&PreprocessedPair> for PreprocessedRecord {
    fn from(p: &PreprocessedPair) -> Self {
        let slots = p.pair.slots();
        PreprocessedRecord {
            tid: p.pair.tid.clone(),
            input: p.content_input().to_vec(),
            output: slots[1..slots.len() - 1].to_vec(),
            anonymized: p.record.clone(),
        }
    }
}

pub fn cmd_ingest(input: &Path, out: &Path, stats_path: Option<&Path>) -> Result<()> {
    let pairs = read_corpus(input)?;
    let corpus = preprocess_corpus(&pairs);
    let records: Vec<PreprocessedRecord> = corpus.iter().map(PreprocessedRecord::from).collect();
    write_file(out, &serde_json::to_string_pretty(&records)?)?;
    let mut stats = CorpusStats::of(&pairs);
    stats.vocab = records
        .iter()
        .flat_map(|r| r.input.iter().map(|t| t.to_lowercase()))
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let stats = serde_json::to_string(&stats)?;
    println!("{stats}");
    if let Some(p) = stats_path {
        write_file(p, &stats)?;
    }
    Ok(())
}

fn synthetic_pairs(train: &[TweetPair], config: &NoiseConfig, layout: &KeyboardLayout) -> Result<Vec<TaggedPair>> {
    let pairs = extract_word_pairs(&preprocess_corpus(train));
    generate_tagged(&pairs, config, layout)
}

pub fn cmd_noise(input: &Path, out: &Path, config: &NoiseConfig, layout: Option<&Path>) -> Result<()> {
    let layout = match layout {
        Some(p) => KeyboardLayout::from_json(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => KeyboardLayout::qwerty(),
    };
    let tagged = synthetic_pairs(&read_corpus(input)?, config, &layout)?;
    let synthetic = tagged.iter().filter(|t| t.noise.is_some()).count();
    write_tsv(out, &tagged)?;
    eprintln!("{} pairs ({} synthetic) -> {}", tagged.len(), synthetic, out.display());
    Ok(())
}

/// Train with a per-epoch checkpoint so a diverged run leaves the last
/// good model in `dir`.
fn train_into(examples: &[SeqExample], hyper: &HyperParams, dir: &Path) -> Result<Seq2Seq> {
    eprintln!("training on {} examples -> {}", examples.len(), dir.display());
    let mut log = TrainReport::default();
    let result = train_seq2seq_with(examples, hyper, |epoch, model| {
        log.epochs.push(epoch.clone());
        eprintln!(
            "epoch {:>3} train {:.4} valid {} p_teacher {:.2}",
            epoch.epoch,
            epoch.train_loss,
            epoch.valid_loss.map_or("-".into(), |v| format!("{v:.4}")),
            epoch.p_teacher
        );
        model.save(dir)?;
        write_file(&dir.join(TRAIN_LOG_FILE), &log.to_csv())
    });
    let (model, report) = result?;
    model.save(dir)?;
    write_file(&dir.join(TRAIN_LOG_FILE), &report.to_csv())?;
    Ok(model)
}

fn char_examples(tagged: &[TaggedPair]) -> Vec<SeqExample> {
    tagged
        .iter()
        .map(|t| SeqExample::chars(&t.pair.source, &t.pair.target))
        .collect()
}

pub fn cmd_train(cfg: &RunConfig, kind: ModelKind, dir: &Path) -> Result<()> {
    let train = read_corpus(&cfg.train)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join(CONFIG_FILE), &serde_json::to_string_pretty(cfg)?)?;
    let corpus = preprocess_corpus(&train);
    let char_pairs = || -> Result<Vec<TaggedPair>> {
        match &cfg.pairs {
            Some(p) => read_tsv(p),
            None => synthetic_pairs(&train, &cfg.noise, &KeyboardLayout::qwerty()),
        }
    };
    match kind {
        ModelKind::Word => {
            train_into(&word_examples(&corpus), &cfg.word, dir)?;
        }
        ModelKind::Char => {
            train_into(&char_examples(&char_pairs()?), &cfg.chars, dir)?;
        }
        ModelKind::SelfTarget => {
            train_into(&self_examples(&corpus), &cfg.word, dir)?;
        }
        ModelKind::Tweetchar => {
            train_into(&char_sentence_examples(&corpus), &cfg.sentence, dir)?;
        }
        ModelKind::Lexicon => {
            build_lexicon(&train).save(&dir.join(LEXICON_FILE))?;
        }
        ModelKind::Multi => {
            let lexicon = build_lexicon(&train);
            lexicon.save(&dir.join(LEXICON_FILE))?;
            train_into(&multi_examples(&corpus, &lexicon), &cfg.word, dir)?;
        }
        ModelKind::Hybrid => {
            let word = train_into(&word_examples(&corpus), &cfg.word, &dir.join("word"))?;
            let chars = train_into(&char_examples(&char_pairs()?), &cfg.chars, &dir.join("char"))?;
            HybridModel::new(word, chars, cfg.tau)?.save(dir)?;
        }
    }
    Ok(())
}

/// A loaded normalizer for one mode.
pub enum Normalizer {
    Hybrid(Box<HybridModel>),
    Word(Seq2Seq),
    Dict1(DictLexicon),
    Dict2(DictLexicon, u64),
    SelfTarget(Seq2Seq),
    Multi(DictLexicon, Seq2Seq),
    Char(Seq2Seq),
}

fn load_lexicon(path: &Path) -> Result<DictLexicon> {
    if path.is_dir() {
        DictLexicon::load(&path.join(LEXICON_FILE))
    } else {
        DictLexicon::load(path)
    }
}

fn load_seq2seq(dir: &Path) -> Result<Seq2Seq> {
    if !dir.is_dir() {
        return Err(Error::Argument(format!("model directory {} not found", dir.display())));
    }
    Seq2Seq::load(dir)
}

impl Normalizer {
    pub fn load(mode: Mode, dirs: &[PathBuf], tau: Option<f64>, seed: Option<u64>) -> Result<Self> {
        let first = dirs.first().ok_or_else(|| Error::Argument("no model given".into()))?;
        if !first.exists() {
            return Err(Error::Argument(format!("model {} not found", first.display())));
        }
        if dirs.len() > 1 && mode != Mode::Hs2s {
            return Err(Error::Argument("only hs2s takes two model directories".into()));
        }
        Ok(match mode {
            Mode::Hs2s => {
                if let [word, chars] = dirs {
                    HybridModel::new(load_seq2seq(word)?, load_seq2seq(chars)?, tau.unwrap_or(0.5))?
                } else {
                    let kind = read_manifest(first)?.kind;
                    if kind != HYBRID_KIND {
                        return Err(Error::Argument(format!(
                            "{} holds a {kind} model; hs2s needs a hybrid directory",
                            first.display()
                        )));
                    }
                    let mut h = HybridModel::load(first)?;
                    if let Some(t) = tau {
                        h = HybridModel::new(h.word, h.chars, t)?;
                    }
                    h
                }
                .into()
            }
            Mode::S2s => Normalizer::Word(load_seq2seq(first)?),
            Mode::S2sself => Normalizer::SelfTarget(load_seq2seq(first)?),
            Mode::S2schar => Normalizer::Char(load_seq2seq(first)?),
            Mode::Dict1 => Normalizer::Dict1(load_lexicon(first)?),
            Mode::Dict2 => {
                let seed = seed.ok_or_else(|| Error::Argument("dict2 requires --seed".into()))?;
                Normalizer::Dict2(load_lexicon(first)?, seed)
            }
            Mode::S2smulti => {
                let kind = read_manifest(first)?.kind;
                if kind != MODEL_KIND {
                    return Err(Error::Format(format!("{} is not a seq2seq model", first.display())));
                }
                Normalizer::Multi(load_lexicon(first)?, load_seq2seq(first)?)
            }
        })
    }

    /// Normalize tweet number `index` (the index seeds Dict2's sampling).
    pub fn normalize(&self, tokens: &[String], index: usize) -> Result<Vec<String>> {
        match self {
            Normalizer::Hybrid(h) => h.normalize(tokens),
            Normalizer::Word(m) => normalize_word_s2s(m, tokens),
            Normalizer::Dict1(l) => Ok(dict1_normalize(l, tokens)),
            Normalizer::Dict2(l, seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(*seed, index as u64));
                Ok(dict2_normalize(l, tokens, &mut rng))
            }
            Normalizer::SelfTarget(m) => s2sself_normalize(m, tokens),
            Normalizer::Multi(l, m) => s2smulti_normalize(l, m, tokens),
            Normalizer::Char(m) => s2schar_normalize(m, tokens),
        }
    }

    /// Normalize many tweets on up to `jobs` threads; output order and
    /// content do not depend on `jobs`.
    pub fn normalize_all(&self, tweets: &[Vec<String>], jobs: usize) -> Result<Vec<Vec<String>>> {
        let jobs = jobs.clamp(1, tweets.len().max(1));
        let chunk = tweets.len().div_ceil(jobs).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> = tweets
                .chunks(chunk)
                .enumerate()
                .map(|(c, part)| {
                    s.spawn(move || {
                        part.iter()
                            .enumerate()
                            .map(|(i, t)| self.normalize(t, c * chunk + i))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut out = Vec::with_capacity(tweets.len());
            for h in handles {
                out.extend(h.join().expect("normalizer thread panicked")?);
            }
            Ok(out)
        })
    }
}

impl From<HybridModel> for Normalizer {
    fn from(h: HybridModel) -> Self {
        Normalizer::Hybrid(Box::new(h))
    }
}

fn read_input(input: &str) -> Result<String> {
    if input == "-" {
        let mut s = String::new();
        io::stdin()
            .lock()
            .read_to_string(&mut s)
            .map_err(|e| Error::io("<stdin>", e))?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(|e| Error::io(input, e))
    }
}

pub fn cmd_normalize(normalizer: &Normalizer, input: &str, output: Option<&Path>, format: Format, jobs: usize) -> Result<()> {
    let text = read_input(input)?;
    let rendered = match format {
        Format::Text => {
            let lines: Vec<&str> = text.lines().collect();
            let tweets: Vec<Vec<String>> = lines
                .iter()
                .map(|l| l.split_whitespace().map(String::from).collect())
                .collect();
            let preds = normalizer.normalize_all(&tweets, jobs)?;
            let mut out = String::new();
            for p in preds {
                out.push_str(&p.join(" "));
                out.push('\n');
            }
            out
        }
        Format::Lexnorm => {
            let gold = parse_lexnorm(&text)?;
            let tweets: Vec<Vec<String>> = gold.iter().map(|g| g.input.clone()).collect();
            let preds = normalizer.normalize_all(&tweets, jobs)?;
            let pairs = gold
                .iter()
                .zip(preds)
                .map(|(g, p)| TweetPair::from_slots(g.tid.clone(), g.input.clone(), &p))
                .collect::<Result<Vec<_>>>()?;
            let records: Vec<_> = pairs
                .iter()
                .enumerate()
                .map(|(i, p)| crate::corpus::LexNormRecord::from_pair(p, i))
                .collect();
            serde_json::to_string_pretty(&records)?
        }
    };
    match output {
        Some(p) => write_file(p, &rendered),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn cmd_evaluate(pred: &Path, gold: &Path, errors: Option<usize>) -> Result<()> {
    let gold = load_lexnorm(gold)?;
    let pred = load_lexnorm(pred)?;
    if pred.len() != gold.len() {
        return Err(Error::Argument(format!(
            "{} predicted tweets for {} gold tweets",
            pred.len(),
            gold.len()
        )));
    }
    let mut predictions = Vec::with_capacity(pred.len());
    for (p, g) in pred.iter().zip(&gold) {
        if p.tid != g.tid || p.input != g.input {
            return Err(Error::Alignment {
                tid: g.tid.clone(),
                message: format!("prediction for tweet {} does not match the gold source", p.tid),
            });
        }
        predictions.push(p.slots());
    }
    let result = score(&predictions, &gold)?;
    println!("{}", serde_json::to_string(&result)?);
    if let Some(top) = errors {
        eprint!("{}", error_analysis(&predictions, &gold)?.to_text(top));
    }
    Ok(())
}

fn parse_list<T>(values: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse(v).ok_or_else(|| Error::Argument(format!("bad sweep value '{v}'"))))
        .collect()
}

pub fn cmd_sweep(cfg: &RunConfig, what: SweepKind, values: Option<&str>) -> Result<SweepResult> {
    let train = read_corpus(&cfg.train)?;
    let test = read_corpus(cfg.test_path()?)?;
    match what {
        SweepKind::Noise => {
            let ratios = parse_list(values.unwrap_or("0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"), |v| v.parse().ok())?;
            let word = match &cfg.word_model {
                Some(dir) => load_seq2seq(dir)?,
                None => train_into(&word_examples(&preprocess_corpus(&train)), &cfg.word, &cfg.model_dir.join("sweep-word"))?,
            };
            let setup = NoiseSweepSetup {
                train: &train,
                test: &test,
                word: &word,
                char_hyper: cfg.chars.clone(),
                tau: cfg.tau,
                seed: cfg.seed,
                k_max: cfg.noise.k_max,
                layout: KeyboardLayout::qwerty(),
            };
            sweep_noise_ratio(&ratios, &setup)
        }
        SweepKind::Ngram => {
            let ns = parse_list(values.unwrap_or("1,2,3,full"), |v| match v {
                "full" => Some(None),
                n => n.parse::<usize>().ok().filter(|&n| n > 0).map(Some),
            })?;
            sweep_ngram(
                &ns,
                &NgramSweepSetup {
                    train: &train,
                    test: &test,
                    word_hyper: cfg.word.clone(),
                },
            )
        }
    }
}

/// Whitespace-separated columns for plotting tools.
fn plot_data(result: &SweepResult) -> String {
    let mut out = String::from("# knob precision recall f1\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{} {:.4} {:.4} {:.4}\n",
            r.knob, r.result.precision, r.result.recall, r.result.f1
        ));
    }
    out
}

fn write_sweep(result: &SweepResult, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            write_file(p, &result.to_csv())?;
            write_file(&p.with_extension("dat"), &plot_data(result))
        }
        None => {
            print!("{}", result.to_csv());
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        for args in [
            vec!["textnorm", "ingest", "--input", "a.json", "--out", "b.json"],
            vec!["textnorm", "noise", "--input", "a.json", "--out", "p.tsv", "--ratio", "0.2"],
            vec!["textnorm", "train", "--config", "c.json", "--model", "self"],
            vec!["textnorm", "normalize", "--model", "m", "--mode", "dict1"],
            vec!["textnorm", "normalize", "--model", "w", "--model", "c", "--mode", "hs2s", "--tau", "0.7"],
            vec!["textnorm", "evaluate", "--pred", "p.json", "--gold", "g.json"],
            vec!["textnorm", "sweep", "--config", "c.json", "--what", "ngram", "--values", "1,full"],
        ] {
            Cli::try_parse_from(args.clone()).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        }
    }

    #[test]
    fn unknown_model_is_usage_error() {
        assert_eq!(main_with_args(["textnorm", "train", "--config", "c.json", "--model", "bpe"]), EXIT_USAGE);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Divergence { epoch: 1, message: String::new() }), EXIT_TRAINING);
        assert_eq!(exit_code(&Error::Argument(String::new())), EXIT_USAGE);
    }

    #[test]
    fn sweep_values() {
        let ns = parse_list("1, 2,full", |v| match v {
            "full" => Some(None),
            n => n.parse::<usize>().ok().map(Some),
        })
        .unwrap();
        assert_eq!(ns, vec![Some(1), Some(2), None]);
        assert!(parse_list("x", |v| v.parse::<f64>().ok()).is_err());
    }

    #[test]
    fn materialized_seeds_are_explicit() {
        let mut cfg = RunConfig {
            seed: 42,
            beam_width: 3,
            ..RunConfig::default()
        };
        cfg.materialize();
        assert_eq!(cfg.noise.seed, 42);
        assert_eq!(cfg.word.seed, derive_seed(42, 0));
        assert_eq!(cfg.chars.beam_width, 3);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"seed\":42"));
    }
}
