mod config;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use mednorm::decoder::DecoderConfig;
use mednorm::eval::{run_experiment, ExperimentConfig, Representation};
use mednorm::lexicon::{
    generate_synthetic, load_concepts, load_corpus, ConceptDictionary, ParallelCorpus,
};
use mednorm::model::{TrainedModel, TrainingSettings};
use mednorm::ranker::{Method, Ranker};
use mednorm::text::{load_lexicon, tokenize, Anonymizer, Phrase, Register};
use mednorm::vectors::{load_dense, OovPolicy, WordVectors};
use mednorm::{content_hash, Error};

use config::{keys_help, Overrides, Settings};

#[derive(Parser, Debug)]
#[command(
    name = "mednorm",
    version,
    about = "Normalise social-media health phrases to medical concepts"
)]
struct Cli {
    /// Flat `key = value` config file
    #[arg(long, global = true, env = "MEDNORM_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a translation model on the whole corpus
    Train(Overrides),
    /// Rank concepts for each input phrase
    Normalize(Overrides),
    /// Cross-validate every method and write the MRR report
    Evaluate(Overrides),
    /// Generate a synthetic parallel corpus from a concept dictionary
    Synth(Overrides),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let mut cmd = Cli::command();
    for name in ["train", "normalize", "evaluate", "synth"] {
        cmd = cmd.mut_subcommand(name, |s| s.after_help(keys_help()));
    }
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = cli.config.as_deref();
    match &cli.command {
        Command::Train(o) => train(&Settings::resolve(file, o)?),
        Command::Normalize(o) => normalize(&Settings::resolve(file, o)?),
        Command::Evaluate(o) => evaluate(&Settings::resolve(file, o)?),
        Command::Synth(o) => synth(&Settings::resolve(file, o)?),
    }
}

fn dictionary(s: &Settings) -> Result<ConceptDictionary> {
    let path = s.existing_path("concepts")?;
    load_concepts(&path).with_context(|| format!("loading concepts {}", path.display()))
}

fn anonymizer(s: &Settings) -> Result<Anonymizer> {
    let mut anon = Anonymizer::new();
    if let Some(path) = s.optional_path("drugs") {
        anon = anon.with_drugs(load_lexicon(&path)?);
    }
    if let Some(path) = s.optional_path("locations") {
        anon = anon.with_locations(load_lexicon(&path)?);
    }
    Ok(anon)
}

fn corpus(s: &Settings, dict: &ConceptDictionary, anon: &Anonymizer) -> Result<ParallelCorpus> {
    let path = s.existing_path("corpus")?;
    load_corpus(&path, dict, anon).with_context(|| format!("loading corpus {}", path.display()))
}

fn training_settings(s: &Settings) -> Result<TrainingSettings> {
    Ok(TrainingSettings {
        em_iterations: s.get("em_iterations")?,
        max_phrase_len: s.get("max_phrase_len")?,
        lm_order: s.get("lm_order")?,
    })
}

fn decoder_config(s: &Settings) -> Result<DecoderConfig> {
    let config = DecoderConfig {
        beam: s.get("beam")?,
        lambda_lm: s.get("lambda_lm")?,
        ..DecoderConfig::default()
    };
    let top_k: usize = s.get("top_k")?;
    if top_k == 0 || top_k > config.beam {
        bail!(
            "`top_k` must be in 1..={} (the beam), got {top_k}",
            config.beam
        );
    }
    Ok(config)
}

fn oov_override(s: &Settings) -> Result<Option<OovPolicy>> {
    match s.raw("oov") {
        "auto" => Ok(None),
        other => Ok(Some(other.parse::<OovPolicy>()?)),
    }
}

/// Builds every representation named by `vectors`. One-hot vocabularies
/// cover the corpus, the dictionary and `extra`.
fn representations(
    s: &Settings,
    corpus: Option<&ParallelCorpus>,
    dict: &ConceptDictionary,
    extra: &[Phrase],
) -> Result<Vec<Representation<f64>>> {
    let oov = oov_override(s)?;
    let mut reps = Vec::new();
    for item in s
        .raw("vectors")
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
    {
        let mut rep = if item == "one-hot" {
            let phrases = corpus
                .into_iter()
                .flat_map(|c| c.pairs.iter().map(|p| &p.source))
                .chain(dict.iter().map(|c| &c.description))
                .chain(extra);
            Representation::dense("one-hot", WordVectors::one_hot(phrases))
        } else {
            let (name, path) = match item.split_once('=') {
                Some((n, p)) => (n.trim().to_owned(), PathBuf::from(p.trim())),
                None => {
                    let path = PathBuf::from(item);
                    let stem = path
                        .file_stem()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned();
                    (stem, path)
                }
            };
            let wv =
                load_dense(&path).with_context(|| format!("loading vectors {}", path.display()))?;
            Representation::dense(name, wv)
        };
        rep.oov = oov;
        reps.push(rep);
    }
    if reps.is_empty() {
        bail!("`vectors` names no representation");
    }
    Ok(reps)
}

fn write_output(s: &Settings, body: &str) -> Result<()> {
    match s.raw("output") {
        "-" | "" => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
        }
        path => fs::write(path, body).with_context(|| format!("writing {path}"))?,
    }
    Ok(())
}

fn train(s: &Settings) -> Result<()> {
    let dict = dictionary(s)?;
    let anon = anonymizer(s)?;
    let corpus = corpus(s, &dict, &anon)?;
    let settings = training_settings(s)?;
    let indices: Vec<usize> = (0..corpus.len()).collect();
    let model = TrainedModel::train(&corpus, &dict, &indices, settings)?;

    let hashed: String = [
        "corpus",
        "concepts",
        "drugs",
        "locations",
        "em_iterations",
        "max_phrase_len",
        "lm_order",
    ]
    .iter()
    .map(|k| format!("{k} = {}\n", s.raw(k)))
    .collect();
    let extra = [
        ("config_hash".to_owned(), content_hash(hashed.as_bytes())),
        (
            "corpus_hash".to_owned(),
            content_hash(corpus.to_tsv().as_bytes()),
        ),
        (
            "concepts_hash".to_owned(),
            content_hash(dict.to_tsv().as_bytes()),
        ),
    ];
    let dir = PathBuf::from(s.raw("model_dir"));
    model
        .save(&dir, &extra)
        .with_context(|| format!("saving model to {}", dir.display()))?;
    log::info!(
        "trained on {} pairs: {} phrase sources, model in {}",
        corpus.len(),
        model.phrases.len(),
        dir.display()
    );
    Ok(())
}

fn read_input(s: &Settings) -> Result<String> {
    match s.raw("input") {
        "-" | "" => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
        path => fs::read_to_string(path).with_context(|| format!("reading {path}")),
    }
}

fn normalize(s: &Settings) -> Result<()> {
    let method: Method = s.get("method")?;
    let top_n: usize = s.get("top_n")?;
    let top_k: usize = s.get("top_k")?;
    let decoder = decoder_config(s)?;
    let dict = dictionary(s)?;
    let anon = anonymizer(s)?;
    let corpus = match s.optional_path("corpus") {
        Some(_) => Some(corpus(s, &dict, &anon)?),
        None => None,
    };
    let model = if method.uses_translation() {
        let dir = s.existing_path("model_dir")?;
        Some(TrainedModel::load(&dir).with_context(|| format!("loading model {}", dir.display()))?)
    } else {
        None
    };

    let input = read_input(s)?;
    let phrases: Vec<Result<Phrase, Error>> = input
        .lines()
        .map(|line| tokenize(line, Register::Social).map(|p| anon.anonymize(&p)))
        .collect();
    let seen: Vec<Phrase> = phrases
        .iter()
        .filter_map(|p| p.as_ref().ok().cloned())
        .collect();
    let rep = representations(s, corpus.as_ref(), &dict, &seen)?.swap_remove(0);
    let oov = rep
        .oov
        .unwrap_or_else(|| OovPolicy::default_for(rep.vectors.kind()));
    let mut ranker = Ranker::new(&dict, &rep.vectors, oov)?;
    ranker.aggregation = s.get("aggregation")?;
    ranker.fusion_weight = s.get("fusion_weight")?;

    let k = if method.single_best() { 1 } else { top_k };
    let mut out = String::new();
    for (i, phrase) in phrases.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let ranked = phrase.as_ref().map_err(ToString::to_string).and_then(|p| {
            let hyps = match &model {
                Some(m) => m.decode(p, k, &decoder).map_err(|e| e.to_string())?,
                None => Vec::new(),
            };
            ranker.rank(method, p, &hyps).map_err(|e| e.to_string())
        });
        match ranked {
            Ok(r) => {
                for (id, score) in r.top(top_n) {
                    out.push_str(&format!("{id}\t{score:.6}\n"));
                }
            }
            Err(reason) => out.push_str(&format!("ERROR\t{reason}\n")),
        }
    }
    write_output(s, &out)
}

fn experiment_config(s: &Settings) -> Result<ExperimentConfig> {
    let methods = match s.raw("methods") {
        "all" => Method::ALL.to_vec(),
        list => list
            .split(',')
            .map(|m| m.trim().parse::<Method>())
            .collect::<Result<Vec<_>, _>>()?,
    };
    let k_folds: usize = s.get("folds")?;
    if k_folds < 2 {
        bail!("`folds` must be at least 2, got {k_folds}");
    }
    Ok(ExperimentConfig {
        methods,
        k_folds,
        seed: s.get("seed")?,
        cutoff: s.get("cutoff")?,
        top_k: s.get("top_k")?,
        decoder: decoder_config(s)?,
        training: training_settings(s)?,
        aggregation: s.get("aggregation")?,
        fusion_weight: s.get("fusion_weight")?,
        jobs: s.get("jobs")?,
    })
}

fn evaluate(s: &Settings) -> Result<()> {
    let config = experiment_config(s)?;
    let dict = dictionary(s)?;
    let anon = anonymizer(s)?;
    let corpus = corpus(s, &dict, &anon)?;
    let reps = representations(s, Some(&corpus), &dict, &[])?;
    let report = run_experiment(&corpus, &dict, &reps, &config)?;
    let dir = Path::new(s.raw("report_dir"));
    report
        .write(dir)
        .with_context(|| format!("writing report to {}", dir.display()))?;
    write_output(s, &report.report_tsv())
}

fn synth(s: &Settings) -> Result<()> {
    let dict = dictionary(s)?;
    let corpus = generate_synthetic(
        &dict,
        s.get("synth_per_concept")?,
        s.get("synth_noise")?,
        s.get("seed")?,
    )?;
    write_output(s, &corpus.to_tsv())
}
