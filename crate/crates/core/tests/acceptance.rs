//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mednorm::align::{train_model1, train_model1_traced, Alignment};
use mednorm::decoder::{decode_topk, DecoderConfig, TranslationHypothesis};
use mednorm::eval::{
    mrr_at_k, paired_ttest, run_experiment, ExperimentConfig, Representation, REPORT_FILE,
    SIGNIFICANCE_FILE,
};
use mednorm::lexicon::{
    generate_synthetic, load_concepts, load_corpus, ConceptDictionary, ParallelCorpus,
};
use mednorm::lm::LanguageModel;
use mednorm::model::{training_hash, TrainedModel, TrainingSettings};
use mednorm::ptable::{extract_spans, PhraseTable};
use mednorm::ranker::{Method, RankedConcepts, Ranker};
use mednorm::rng::SeededRng;
use mednorm::text::{Anonymizer, Phrase, Register};
use mednorm::vectors::{OovPolicy, WordVectors};

const SYNTH_SEED: u64 = 42;
const SYNTH_PER_CONCEPT: usize = 10;
const SYNTH_NOISE: f64 = 0.3;
const MIN_CONCEPTS: usize = 50;
const RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const EM_TARGET: f64 = 0.99;
const LL_SLACK: f64 = 1e-9;
const SUM_TOL: f64 = 1e-9;
const MRR_TOL: f64 = 1e-9;
const TTEST_TOL: f64 = 5e-3;
const CELL_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn bundled() -> Result<(ConceptDictionary, ParallelCorpus), String> {
    let dict = load_concepts(data("concepts.tsv")).map_err(|e| e.to_string())?;
    let corpus =
        load_corpus(data("synthetic.tsv"), &dict, &Anonymizer::new()).map_err(|e| e.to_string())?;
    Ok((dict, corpus))
}

fn words(s: &str, register: Register) -> Phrase {
    let w: Vec<&str> = s.split_whitespace().collect();
    Phrase::from_words(&w, register).unwrap()
}

fn random_phrase(
    rng: &mut SeededRng,
    vocab: &[&str],
    max_len: usize,
    register: Register,
) -> Phrase {
    let len = 1 + rng.below(max_len);
    let w: Vec<&str> = (0..len).map(|_| *rng.pick(vocab)).collect();
    Phrase::from_words(&w, register).unwrap()
}

fn mrr_of(report: &mednorm::eval::EvalReport, m: Method) -> f64 {
    report.get(m, "one-hot").unwrap()
}

fn directional() -> Outcome {
    let (dict, corpus) = bundled()?;
    check(
        dict.len() >= MIN_CONCEPTS,
        format!("{} concepts", dict.len()),
    )?;
    let regenerated = generate_synthetic(&dict, SYNTH_PER_CONCEPT, SYNTH_NOISE, SYNTH_SEED)
        .map_err(|e| e.to_string())?;
    check(
        regenerated.to_tsv() == corpus.to_tsv(),
        "bundled synthetic corpus differs from regeneration",
    )?;
    let config = ExperimentConfig {
        methods: vec![Method::VSim, Method::BestMt, Method::Top5Mt],
        jobs: 1,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let reps = [Representation::<f64>::one_hot(&corpus, &dict)];
    let report = run_experiment(&corpus, &dict, &reps, &config).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let (v, b, t) = (
        mrr_of(&report, Method::VSim),
        mrr_of(&report, Method::BestMt),
        mrr_of(&report, Method::Top5Mt),
    );
    let detail = format!(
        "vSim={v:.4} bestMT={b:.4} top5MT={t:.4} in {:.1}s",
        took.as_secs_f64()
    );
    check(t > v, format!("top5MT <= vSim: {detail}"))?;
    check(t >= b, format!("top5MT < bestMT: {detail}"))?;
    check(took < RUNTIME_LIMIT, format!("too slow: {detail}"))?;
    Ok(detail)
}

fn oracle_corpus() -> Outcome {
    let (dict, _) = bundled()?;
    let corpus =
        generate_synthetic(&dict, SYNTH_PER_CONCEPT, 0.0, SYNTH_SEED).map_err(|e| e.to_string())?;
    let config = ExperimentConfig {
        methods: vec![Method::VSim],
        ..ExperimentConfig::default()
    };
    let reps = [Representation::<f64>::one_hot(&corpus, &dict)];
    let report = run_experiment(&corpus, &dict, &reps, &config).map_err(|e| e.to_string())?;
    let mrr = mrr_of(&report, Method::VSim);
    check(mrr == 1.0, format!("vSim MRR@5 = {mrr}"))?;
    Ok(format!("vSim MRR@5 = {mrr} on {} pairs", corpus.len()))
}

fn em_correctness() -> Outcome {
    let mut rng = SeededRng::new(3);
    let (src_vocab, tgt_vocab) = (["a", "b", "c", "d", "e"], ["v", "w", "x", "y", "z"]);
    for trial in 0..100 {
        let n = 2 + rng.below(5);
        let corpus: Vec<(Phrase, Phrase)> = (0..n)
            .map(|_| {
                (
                    random_phrase(&mut rng, &src_vocab, 4, Register::Social),
                    random_phrase(&mut rng, &tgt_vocab, 4, Register::Medical),
                )
            })
            .collect();
        let (_, trace) = train_model1_traced(&corpus, 10).map_err(|e| e.to_string())?;
        for w in trace.windows(2) {
            check(
                w[1] >= w[0] - LL_SLACK,
                format!("corpus {trial}: log-likelihood fell {} -> {}", w[0], w[1]),
            )?;
        }
    }
    let corpus = vec![
        (
            words("a b", Register::Social),
            words("x y", Register::Medical),
        ),
        (words("a", Register::Social), words("x", Register::Medical)),
    ];
    let table = train_model1(&corpus, 10).map_err(|e| e.to_string())?;
    let t = table.prob("x", "a");
    check(
        t > EM_TARGET,
        format!("LL monotone on 100 corpora, but 2-pair t(x|a) = {t:.6} <= {EM_TARGET}"),
    )?;
    Ok(format!("LL monotone on 100 corpora; t(x|a) = {t:.6}"))
}

type Span = (usize, usize, usize, usize);

fn brute_force_spans(al: &Alignment, max_len: usize) -> BTreeSet<Span> {
    let (m, n) = (al.source_len(), al.target_len());
    let mut out = BTreeSet::new();
    for s0 in 0..m {
        for s1 in s0 + 1..=(s0 + max_len).min(m) {
            for t0 in 0..n {
                for t1 in t0 + 1..=(t0 + max_len).min(n) {
                    let inside =
                        |i: usize, j: usize| (s0..s1).contains(&i) && (t0..t1).contains(&j);
                    let any = al.links().iter().any(|&(i, j)| inside(i, j));
                    let leaks = al
                        .links()
                        .iter()
                        .any(|&(i, j)| (s0..s1).contains(&i) != (t0..t1).contains(&j));
                    if any && !leaks {
                        out.insert((s0, s1, t0, t1));
                    }
                }
            }
        }
    }
    out
}

fn extraction_oracle() -> Outcome {
    let mut rng = SeededRng::new(4);
    let mut compared = 0;
    for trial in 0..200 {
        let (m, n) = (1 + rng.below(6), 1 + rng.below(6));
        let density = 0.1 + 0.4 * rng.unit();
        let mut links = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.chance(density) {
                    links.push((i, j));
                }
            }
        }
        let al = Alignment::new(m, n, links).map_err(|e| e.to_string())?;
        let max_len = 1 + rng.below(6);
        let got: BTreeSet<Span> = extract_spans(&al, max_len)
            .into_iter()
            .map(|sp| {
                (
                    sp.source.start,
                    sp.source.end,
                    sp.target.start,
                    sp.target.end,
                )
            })
            .collect();
        let want = brute_force_spans(&al, max_len);
        check(got == want, format!("pair {trial}: {got:?} != {want:?}"))?;
        compared += want.len();
    }
    Ok(format!("200 pairs, {compared} spans identical"))
}

/// Every monotone segmentation, scored without any pruning.
fn exhaustive(
    src: &[&str],
    pt: &PhraseTable,
    lm: &LanguageModel,
    config: &DecoderConfig,
) -> BTreeMap<Vec<String>, f64> {
    fn go(
        pos: usize,
        out: Vec<String>,
        log_phi: f64,
        src: &[&str],
        pt: &PhraseTable,
        config: &DecoderConfig,
        acc: &mut BTreeMap<Vec<String>, f64>,
    ) {
        if pos == src.len() {
            let best = acc.entry(out).or_insert(f64::NEG_INFINITY);
            *best = best.max(log_phi);
            return;
        }
        for len in 1..=pt.max_phrase_len().min(src.len() - pos) {
            let span = &src[pos..pos + len];
            let mut options: Vec<(Vec<String>, f64)> = pt
                .translations(span)
                .map(|row| row.iter().map(|(t, phi)| (t.clone(), phi.ln())).collect())
                .unwrap_or_default();
            if options.is_empty() && len == 1 {
                options.push((vec![span[0].to_owned()], config.pass_through_penalty.ln()));
            }
            for (target, lp) in options {
                let mut next = out.clone();
                next.extend(target);
                go(pos + len, next, log_phi + lp, src, pt, config, acc);
            }
        }
    }
    let mut acc = BTreeMap::new();
    go(0, Vec::new(), 0.0, src, pt, config, &mut acc);
    acc.into_iter()
        .map(|(out, log_phi)| {
            let w: Vec<&str> = out.iter().map(String::as_str).collect();
            let score = log_phi + config.lambda_lm * lm.logprob(&w);
            (out, score)
        })
        .collect()
}

fn decoder_oracle() -> Outcome {
    let mut rng = SeededRng::new(5);
    let srcs = ["a", "b", "c", "a b", "b c", "c a", "a a"];
    let tgts = ["x", "y", "z", "x y", "y z", "z x"];
    let mut cases = 0;
    for trial in 0..300 {
        let entries = 1 + rng.below(8);
        let mut rows = BTreeMap::new();
        while rows.len() < entries {
            let key = (*rng.pick(&srcs), *rng.pick(&tgts));
            rows.insert(key, 0.05 + 0.95 * rng.unit());
        }
        let tsv: String = rows
            .iter()
            .map(|((s, t), p)| format!("{s}\t{t}\t{p}\n"))
            .collect();
        let pt = PhraseTable::from_tsv(&tsv, 2).map_err(|e| e.to_string())?;
        let lm_data: Vec<Phrase> = (0..1 + rng.below(3))
            .map(|_| random_phrase(&mut rng, &["x", "y", "z"], 3, Register::Medical))
            .collect();
        let lm = LanguageModel::train(&lm_data, 1 + rng.below(3)).map_err(|e| e.to_string())?;
        let config = DecoderConfig {
            beam: 100_000,
            lambda_lm: [0.0, 0.5, 1.0][rng.below(3)],
            ..DecoderConfig::default()
        };
        let input = random_phrase(&mut rng, &["a", "b", "c", "d"], 4, Register::Social);
        let src: Vec<&str> = input.words().collect();
        let k = 1 + rng.below(6);

        let mut want: Vec<(Vec<String>, f64)> =
            exhaustive(&src, &pt, &lm, &config).into_iter().collect();
        want.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| a.0.join(" ").cmp(&b.0.join(" ")))
        });
        want.truncate(k);
        let got: Vec<TranslationHypothesis> =
            decode_topk(&input, &pt, &lm, k, &config).map_err(|e| e.to_string())?;

        check(
            got.len() == want.len(),
            format!("case {trial}: {} vs {} hypotheses", got.len(), want.len()),
        )?;
        for (h, (out, score)) in got.iter().zip(&want) {
            check(
                h.phrase.to_words() == *out && (h.log_score - score).abs() <= SUM_TOL,
                format!(
                    "case {trial}: got `{}` {} want `{}` {}",
                    h.phrase,
                    h.log_score,
                    out.join(" "),
                    score
                ),
            )?;
        }
        let total: f64 = got.iter().map(|h| h.score).sum();
        check(
            (total - 1.0).abs() <= SUM_TOL,
            format!("case {trial}: scores sum to {total}"),
        )?;
        cases += 1;
    }
    Ok(format!("{cases} random cases match exhaustive enumeration"))
}

fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Two-sided p-value by Simpson quadrature of the Student-t density.
fn t_pvalue_quadrature(t: f64, nu: f64) -> f64 {
    let c = (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp()
        / (nu * std::f64::consts::PI).sqrt();
    let f = |x: f64| c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut s = f(0.0) + f(t.abs());
    for i in 1..steps {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    (1.0 - 2.0 * s * h / 3.0).clamp(0.0, 1.0)
}

fn metric_correctness() -> Outcome {
    // gold at ranks 1, 3 and 7
    let ranking = |gold_rank: usize| RankedConcepts::<f64> {
        entries: (1..=8)
            .map(|r| {
                (
                    if r == gold_rank {
                        "G".to_owned()
                    } else {
                        format!("C{r}")
                    },
                    1.0 / r as f64,
                )
            })
            .collect(),
        errored_terms: 0,
    };
    let rankings = [ranking(1), ranking(3), ranking(7)];
    let mrr = mrr_at_k(&rankings, &["G", "G", "G"], 5).map_err(|e| e.to_string())?;
    check(
        (mrr - 0.44444).abs() <= 1e-5 && (mrr - 4.0 / 9.0).abs() <= MRR_TOL,
        format!("mrr = {mrr}"),
    )?;

    let mut rng = SeededRng::new(6);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 3 + rng.below(40);
        let shift = (rng.unit() - 0.5) * 0.6;
        let a: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
        let b: Vec<f64> = a.iter().map(|x| x + shift + (rng.unit() - 0.5)).collect();
        let p = paired_ttest(&a, &b).map_err(|e| e.to_string())?;
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let nf = n as f64;
        let mean = d.iter().sum::<f64>() / nf;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
        let oracle = t_pvalue_quadrature(mean / (sd / nf.sqrt()), nf - 1.0);
        worst = worst.max((p - oracle).abs());
        check(
            (p - oracle).abs() <= TTEST_TOL,
            format!("vector {trial}: p={p} oracle={oracle}"),
        )?;
    }
    let same = paired_ttest(&[0.1, 0.5, 0.9], &[0.1, 0.5, 0.9]).map_err(|e| e.to_string())?;
    let shifted = paired_ttest(&[1.0, 2.0, 3.0], &[0.5, 1.5, 2.5]).map_err(|e| e.to_string())?;
    check(
        same == 1.0 && shifted == 0.0,
        format!("degenerate: {same} / {shifted}"),
    )?;
    Ok(format!(
        "mrr={mrr:.5}; max |p - oracle| = {worst:.2e}; degenerate 1.0/0.0"
    ))
}

fn hyp(s: &str, rank: usize) -> TranslationHypothesis {
    TranslationHypothesis {
        phrase: words(s, Register::Medical),
        score: 1.0 / rank as f64,
        rank,
        log_score: 0.0,
    }
}

fn arithmetic_and_scaling() -> Outcome {
    // unit vectors: cos(h1, c) = (1, 0, 0.6), cos(h2, c) = (0, 1, 0.8), cos(q, c) = (0.8, 0.6, 0.96)
    let wv = WordVectors::<f64>::dense(vec![
        ("c1".to_owned(), vec![1.0, 0.0]),
        ("c2".to_owned(), vec![0.0, 1.0]),
        ("c3".to_owned(), vec![0.6, 0.8]),
        ("h1".to_owned(), vec![1.0, 0.0]),
        ("h2".to_owned(), vec![0.0, 1.0]),
        ("q".to_owned(), vec![0.8, 0.6]),
    ])
    .map_err(|e| e.to_string())?;
    let dict =
        mednorm::lexicon::parse_concepts("C1\tc1\nC2\tc2\nC3\tc3\n").map_err(|e| e.to_string())?;
    let ranker = Ranker::with_default_oov(&dict, &wv).map_err(|e| e.to_string())?;
    let q = words("q", Register::Social);
    let hyps = [hyp("h1", 1), hyp("h2", 2)];
    let expected: [(Method, [f64; 3]); 7] = [
        (Method::VSim, [0.8, 0.6, 0.96]),
        (Method::BestMt, [1.0, 0.0, 0.6]),
        (Method::Top5Mt, [1.0, 1.0, 0.8]),
        (Method::Top5MtR, [1.0, 0.5, 0.6]),
        (Method::BestMtVSim, [1.8, 0.6, 1.56]),
        (Method::Top5MtVSim, [1.8, 1.6, 1.76]),
        (Method::Top5MtRVSim, [1.8, 1.1, 1.56]),
    ];
    for (method, cells) in expected {
        let r = ranker.rank(method, &q, &hyps).map_err(|e| e.to_string())?;
        for (id, want) in ["C1", "C2", "C3"].iter().zip(cells) {
            let got = r
                .entries
                .iter()
                .find(|(c, _)| c == id)
                .map(|(_, s)| *s)
                .unwrap();
            check(
                (got - want).abs() <= CELL_TOL,
                format!("{method} {id}: {got} != {want}"),
            )?;
        }
    }

    let (dict, corpus) = bundled()?;
    let one_hot = Representation::<f64>::one_hot(&corpus, &dict).vectors;
    let mut rng = SeededRng::new(7);
    let dense = WordVectors::<f64>::dense(
        vocab(&corpus, &dict)
            .into_iter()
            .map(|w| (w, (0..16).map(|_| rng.unit() - 0.5).collect())),
    )
    .map_err(|e| e.to_string())?;
    let sample: Vec<usize> = (0..corpus.len()).step_by(7).collect();
    let model = TrainedModel::train(&corpus, &dict, &sample, TrainingSettings::default())
        .map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (wv, oov) in [(&one_hot, OovPolicy::ZeroFail), (&dense, OovPolicy::Skip)] {
        let base = Ranker::new(&dict, wv, oov).map_err(|e| e.to_string())?;
        let scaled: Vec<WordVectors<f64>> = [0.5, 3.0].iter().map(|&l| wv.scaled(l)).collect();
        let others: Vec<Ranker<f64>> = scaled
            .iter()
            .map(|s| Ranker::new(&dict, s, oov))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for &i in &sample {
            let phrase = &corpus.pairs[i].source;
            let hyps = model
                .decode(phrase, 5, &DecoderConfig::default())
                .map_err(|e| e.to_string())?;
            for method in Method::ALL {
                let top = |r: &Ranker<f64>| {
                    r.rank(method, phrase, &hyps)
                        .ok()
                        .map(|x| x.entries[0].0.clone())
                };
                let want = top(&base);
                for (r, lambda) in others.iter().zip([0.5, 3.0]) {
                    check(
                        top(r) == want,
                        format!("{method} on `{phrase}` changed argmax at lambda={lambda}"),
                    )?;
                }
                compared += 1;
            }
        }
    }
    Ok(format!(
        "7x3 cells match; argmax invariant on {compared} (phrase, method, table) cases"
    ))
}

fn vocab(corpus: &ParallelCorpus, dict: &ConceptDictionary) -> Vec<String> {
    let set: BTreeSet<String> = corpus
        .pairs
        .iter()
        .map(|p| &p.source)
        .chain(dict.iter().map(|c| &c.description))
        .flat_map(|p| p.to_words())
        .collect();
    set.into_iter().collect()
}

fn full_config(jobs: usize) -> ExperimentConfig {
    ExperimentConfig {
        jobs,
        ..ExperimentConfig::default()
    }
}

fn determinism_and_leakage() -> (Outcome, Outcome) {
    let run = || -> Result<_, String> {
        let (dict, corpus) = bundled()?;
        let mut rng = SeededRng::new(8);
        let dense = WordVectors::<f64>::dense(
            vocab(&corpus, &dict)
                .into_iter()
                .map(|w| (w, (0..8).map(|_| rng.unit() - 0.5).collect())),
        )
        .map_err(|e| e.to_string())?;
        let reps = [
            Representation::one_hot(&corpus, &dict),
            Representation::dense("random-8", dense),
        ];
        let mut files = Vec::new();
        let mut last = None;
        for jobs in [1, 1, 4] {
            let report = run_experiment(&corpus, &dict, &reps, &full_config(jobs))
                .map_err(|e| e.to_string())?;
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            report.write(dir.path()).map_err(|e| e.to_string())?;
            let read = |n: &str| fs::read(dir.path().join(n)).map_err(|e| e.to_string());
            files.push((jobs, read(REPORT_FILE)?, read(SIGNIFICANCE_FILE)?));
            last = Some(report);
        }
        Ok((dict, corpus, files, last.unwrap()))
    };
    let (dict, corpus, files, report) = match run() {
        Ok(x) => x,
        Err(e) => return (Err(e.clone()), Err(e)),
    };

    let determinism = (|| {
        let (_, r0, s0) = &files[0];
        for (jobs, r, s) in &files[1..] {
            check(r == r0, format!("report.tsv differs at jobs={jobs}"))?;
            check(s == s0, format!("significance.tsv differs at jobs={jobs}"))?;
        }
        Ok(format!(
            "3 runs (jobs 1, 1, 4): {} + {} bytes identical",
            r0.len(),
            s0.len()
        ))
    })();

    let leakage = (|| {
        check(
            report.folds.len() == 10,
            format!("{} folds", report.folds.len()),
        )?;
        for trace in &report.folds {
            let test: BTreeSet<usize> = trace.test_indices.iter().copied().collect();
            check(
                trace.train_indices.iter().all(|i| !test.contains(i)),
                format!("fold {} trains on a test index", trace.fold),
            )?;
            check(
                trace.train_indices.len() + test.len() == corpus.len(),
                format!("fold {} does not cover the corpus", trace.fold),
            )?;
            let rows: Vec<(usize, Phrase, Phrase)> = trace
                .train_indices
                .iter()
                .zip(corpus.training_pairs(&dict, trace.train_indices.iter().copied()))
                .map(|(&i, (s, t))| (i, s, t))
                .collect();
            check(
                training_hash(&rows) == trace.train_hash,
                format!(
                    "fold {} hash is not the hash of its training indices",
                    trace.fold
                ),
            )?;
        }
        Ok("10 folds: training hash covers exactly the non-test indices".to_owned())
    })();
    (determinism, leakage)
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (
            1,
            "directional reproduction on the synthetic corpus",
            directional(),
        ),
        (2, "noise-free corpus gives vSim MRR@5 = 1", oracle_corpus()),
        (
            3,
            "Model 1 EM monotone and disambiguating",
            em_correctness(),
        ),
        (
            4,
            "phrase extraction equals brute force",
            extraction_oracle(),
        ),
        (5, "decoder equals exhaustive enumeration", decoder_oracle()),
        (6, "MRR and paired t-test", metric_correctness()),
        (
            7,
            "rank discount, fusion and scale invariance",
            arithmetic_and_scaling(),
        ),
    ];
    let (det, leak) = determinism_and_leakage();
    results.push((8, "byte-identical reports at any job count", det));
    results.push((9, "no fold trains on its test indices", leak));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS [{n}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{n}] {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
