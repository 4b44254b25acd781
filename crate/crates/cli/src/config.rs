//! Flat `key = value` run configuration.
//!
//! Values resolve as flag, then config file, then the built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

macro_rules! config_keys {
    ($( $key:ident = $default:literal ; $help:literal )*) => {
        /// Every config key as an optional flag.
        #[derive(Args, Debug, Default, Clone)]
        pub struct Overrides {
            $(
                #[arg(long, value_name = "VALUE", help = concat!($help, " [default: ", $default, "]"))]
                pub $key: Option<String>,
            )*
        }

        /// `(key, default, help)` for every key.
        pub const KEYS: &[(&str, &str, &str)] = &[ $( (stringify!($key), $default, $help), )* ];

        impl Overrides {
            fn entries(&self) -> Vec<(&'static str, Option<&str>)> {
                vec![ $( (stringify!($key), self.$key.as_deref()), )* ]
            }
        }
    };
}

config_keys! {
    corpus = "";              "parallel corpus TSV, `phrase<TAB>concept_id` per line"
    concepts = "";            "concept dictionary TSV, `id<TAB>description` per line"
    drugs = "";               "drug lexicon, one term per line"
    locations = "";           "location gazetteer, one term per line"
    vectors = "one-hot";      "comma list of `one-hot` or `name=path` dense vector files"
    model_dir = "model";      "trained model directory"
    report_dir = "report";    "directory for report.tsv and significance.tsv"
    methods = "all";          "comma list of methods to evaluate, or `all`"
    method = "top5MT";        "method used by normalize"
    input = "-";              "phrases to normalize, one per line (`-` reads stdin)"
    output = "-";             "output file (`-` writes stdout)"
    top_k = "5";              "translations kept for the top-k methods"
    top_n = "5";              "concepts printed per phrase by normalize"
    cutoff = "5";             "MRR cutoff"
    folds = "10";             "cross-validation folds"
    seed = "42";              "seed for folds and synthetic data"
    beam = "20";              "decoder beam width per source position"
    lambda_lm = "0.5";        "language-model weight"
    max_phrase_len = "4";     "longest extracted phrase"
    lm_order = "3";           "language-model n-gram order"
    em_iterations = "10";     "Model 1 EM iterations"
    oov = "auto";             "out-of-vocabulary policy: auto, skip or zero_fail"
    aggregation = "max";      "combining per-translation scores: max or sum"
    fusion_weight = "1.0";    "weight of the translation term in fused methods"
    jobs = "1";               "worker threads"
    synth_per_concept = "10"; "synthetic phrases per concept"
    synth_noise = "0.3";      "synthetic paraphrase noise rate"
}

/// Help text listing every config key with its default.
pub fn keys_help() -> String {
    let mut out = String::from("Config keys (flag > config file > default):\n");
    for (key, default, _) in KEYS {
        let shown = if default.is_empty() {
            "<unset>"
        } else {
            default
        };
        out.push_str(&format!("  {key} = {shown}\n"));
    }
    out
}

/// Parses `key = value` lines. `#` starts a comment line.
pub fn parse_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", origin.display(), no + 1))?;
        let key = key.trim();
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            bail!(
                "{}:{}: unknown config key `{key}`",
                origin.display(),
                no + 1
            );
        }
        map.insert(key.to_owned(), value.trim().to_owned());
    }
    Ok(map)
}

/// Resolved configuration values.
#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut values: BTreeMap<String, String> = KEYS
            .iter()
            .map(|(k, d, _)| (k.to_string(), d.to_string()))
            .collect();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            values.extend(parse_file(&text, path)?);
        }
        for (key, value) in overrides.entries() {
            if let Some(v) = value {
                values.insert(key.to_owned(), v.to_owned());
            }
        }
        Ok(Settings { values })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| anyhow!("invalid value `{raw}` for `{key}`: {e}"))
    }

    /// A path key that must be set and must exist.
    pub fn existing_path(&self, key: &str) -> Result<PathBuf> {
        let path = self
            .optional_path(key)
            .ok_or_else(|| anyhow!("`{key}` is not set"))?;
        if !path.exists() {
            bail!("`{key}`: {} does not exist", path.display());
        }
        Ok(path)
    }

    pub fn optional_path(&self, key: &str) -> Option<PathBuf> {
        match self.raw(key) {
            "" => None,
            p => Some(PathBuf::from(p)),
        }
    }
}
