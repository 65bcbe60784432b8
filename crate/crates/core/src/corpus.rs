//! Synthetic corpus generation and the JSONL dataset formats.
//!
//! Phrases come from command-style templates filled with pronounceable
//! generated entities. The in-context (ic) eval truths are drawn from a prefix
//! of the phrase pool so prefix-truncated databases still contain them; anti
//! truths are disjoint from the pool by construction.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corrector::{Hypothesis, NBestList};
use crate::eval::{EvalCase, Split};
use crate::synth::{corrupt_hypothesis, embed_speech, EmbedderConfig, Utterance};
use crate::util::splitmix64;
use crate::vecmath::{mean_pool, Embedding, EmbeddingSequence};
use crate::{Error, Result};

const STREAM_PHRASES: u64 = 0x5048_5241_5345;
const STREAM_CASES: u64 = 0x4341_5345_5331;
const STREAM_NBEST: u64 = 0x4e42_4553_5431;

// Utterance id ranges keep the seeded noise streams of the corpus sections
// disjoint.
const ID_BASE_TRAIN: u64 = 1_000_000;
const ID_BASE_DEV: u64 = 2_000_000;
const ID_BASE_EVAL: u64 = 3_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub pool_size: usize,
    pub anti_size: usize,
    /// ic truths are sampled from pool[0..ic_prefix].
    pub ic_prefix: usize,
    pub n_train_pairs: usize,
    pub n_dev_ic: usize,
    pub n_dev_anti: usize,
    pub n_eval_ic: usize,
    pub n_eval_anti: usize,
    /// Fraction of cases whose n-best carries the truth at a deep rank.
    pub truth_deep_rank_frac: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            pool_size: 8_000,
            anti_size: 1_000,
            ic_prefix: 1_000,
            n_train_pairs: 4_000,
            n_dev_ic: 300,
            n_dev_anti: 300,
            n_eval_ic: 600,
            n_eval_anti: 600,
            truth_deep_rank_frac: 0.5,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 || self.anti_size == 0 {
            return Err(Error::InvalidConfig("pool and anti sizes must be positive".into()));
        }
        if self.ic_prefix == 0 || self.ic_prefix > self.pool_size {
            return Err(Error::InvalidConfig(
                "ic_prefix must be in [1, pool_size]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.truth_deep_rank_frac) {
            return Err(Error::InvalidConfig(
                "truth_deep_rank_frac must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

// The pool and the anti set use disjoint template words and disjoint letter
// inventories for their generated entities. That keeps the two vocabularies
// word-disjoint: a database phrase substituted for an anti-set truth scores a
// full-length word error, and anti-set queries have no lexical anchor in the
// database. Pool entities draw from a deliberately small syllable inventory so
// distinct entities share many character n-grams and retrieval has to resolve
// genuinely confusable neighbors.
const POOL_CONSONANTS: &[&str] = &["b", "d", "k", "l", "m", "r"];
const POOL_VOWELS: &[&str] = &["a", "i", "o"];
const ANTI_CONSONANTS: &[&str] = &["f", "h", "s", "v", "w", "z", "ch", "sh"];
const ANTI_VOWELS: &[&str] = &["e", "u"];

// A single carrier template for the pool. With a varied template set the
// in-batch softmax loss has a shortcut: amplifying template-word features
// separates most random negatives while erasing entity information, which
// collapses full-database retrieval. A constant carrier removes that gradient
// direction entirely, so the head can only improve by resolving entities.
const POOL_TEMPLATES: &[&str] = &["play"];

const ANTI_TEMPLATES: &[&str] = &[
    "weather in",
    "directions to",
    "remind about",
    "translate",
    "define",
    "schedule with",
    "email",
    "dial",
];

fn gen_word(rng: &mut ChaCha8Rng, consonants: &[&str], vowels: &[&str]) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(consonants[rng.gen_range(0..consonants.len())]);
        w.push_str(vowels[rng.gen_range(0..vowels.len())]);
    }
    w
}

fn gen_unique_phrases(
    seed: u64,
    n: usize,
    templates: &[&str],
    consonants: &[&str],
    vowels: &[&str],
) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ STREAM_PHRASES));
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let template = templates[rng.gen_range(0..templates.len())];
        let entity = format!(
            "{} {}",
            gen_word(&mut rng, consonants, vowels),
            gen_word(&mut rng, consonants, vowels)
        );
        let phrase = format!("{template} {entity}");
        if seen.insert(phrase.clone()) {
            out.push(phrase);
        }
    }
    out
}

/// Deterministically generate `n` unique database-pool phrases.
pub fn generate_phrases(seed: u64, n: usize) -> Vec<String> {
    gen_unique_phrases(seed, n, POOL_TEMPLATES, POOL_CONSONANTS, POOL_VOWELS)
}

/// Deterministically generate `n` unique anti-set phrases. Their word
/// vocabulary is disjoint from the pool vocabulary by construction.
pub fn generate_anti_phrases(seed: u64, n: usize) -> Vec<String> {
    gen_unique_phrases(
        seed ^ 0xa211,
        n,
        ANTI_TEMPLATES,
        ANTI_CONSONANTS,
        ANTI_VOWELS,
    )
}

/// Everything a desk-scale run needs, generated in one deterministic pass.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub pool: Vec<String>,
    pub anti: Vec<String>,
    pub train_pairs: Vec<TrainPairRecord>,
    pub dev_cases: Vec<CaseRecord>,
    pub eval_cases: Vec<CaseRecord>,
}

/// One training pair: the text side is the transcript, the speech side is its
/// noisy embedding. Stored pooled to keep the file compact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainPairRecord {
    pub id: u64,
    pub truth: String,
    pub speech_embedding: Vec<Vec<f32>>,
}

/// JSONL row for dev/eval cases. Field names are part of the repo contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: u64,
    pub truth: String,
    pub hypothesis: String,
    pub split: Split,
    pub speech_embedding: Vec<Vec<f32>>,
}

fn seq_to_rows(seq: &EmbeddingSequence) -> Vec<Vec<f32>> {
    seq.frames().iter().map(|f| f.values().to_vec()).collect()
}

fn rows_to_seq(rows: &[Vec<f32>]) -> Result<EmbeddingSequence> {
    let frames: Result<Vec<Embedding>> =
        rows.iter().map(|r| Embedding::new(r.clone())).collect();
    EmbeddingSequence::new(frames?)
}

fn make_case(
    embedder: &EmbedderConfig,
    truth: &str,
    id: u64,
    split: Split,
) -> Result<CaseRecord> {
    let hypothesis = corrupt_hypothesis(embedder, truth, id)?;
    let speech = embed_speech(embedder, truth, id)?;
    Ok(CaseRecord {
        id,
        truth: crate::synth::normalize_text(truth),
        hypothesis,
        split,
        speech_embedding: seq_to_rows(&speech),
    })
}

pub fn generate_corpus(embedder: &EmbedderConfig, cfg: &CorpusConfig) -> Result<Corpus> {
    embedder.validate()?;
    cfg.validate()?;
    let pool = generate_phrases(embedder.seed, cfg.pool_size);
    let anti = generate_anti_phrases(embedder.seed, cfg.anti_size);

    // Training pairs cycle through a seeded permutation of the pool.
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(embedder.seed ^ STREAM_CASES));
    let mut perm: Vec<usize> = (0..pool.len()).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut train_pairs = Vec::with_capacity(cfg.n_train_pairs);
    for i in 0..cfg.n_train_pairs {
        let id = ID_BASE_TRAIN + i as u64;
        let truth = &pool[perm[i % pool.len()]];
        let speech = embed_speech(embedder, truth, id)?;
        train_pairs.push(TrainPairRecord {
            id,
            truth: crate::synth::normalize_text(truth),
            speech_embedding: seq_to_rows(&speech),
        });
    }

    let sample_cases = |n_ic: usize,
                            n_anti: usize,
                            id_base: u64,
                            rng: &mut ChaCha8Rng|
     -> Result<Vec<CaseRecord>> {
        let mut cases = Vec::with_capacity(n_ic + n_anti);
        for i in 0..n_ic {
            let truth = &pool[rng.gen_range(0..cfg.ic_prefix)];
            cases.push(make_case(embedder, truth, id_base + i as u64, Split::Ic)?);
        }
        for i in 0..n_anti {
            let truth = &anti[rng.gen_range(0..anti.len())];
            cases.push(make_case(
                embedder,
                truth,
                id_base + (n_ic + i) as u64,
                Split::Anti,
            )?);
        }
        Ok(cases)
    };
    let dev_cases = sample_cases(cfg.n_dev_ic, cfg.n_dev_anti, ID_BASE_DEV, &mut rng)?;
    let eval_cases = sample_cases(cfg.n_eval_ic, cfg.n_eval_anti, ID_BASE_EVAL, &mut rng)?;

    Ok(Corpus {
        pool,
        anti,
        train_pairs,
        dev_cases,
        eval_cases,
    })
}

/// Simulated base-ASR n-best list for a case: the corrupted hypothesis on top
/// with a seeded cost jitter, a distractor (a second independent corruption),
/// and for a seeded fraction of cases the truth at a deep rank.
pub fn simulate_nbest(
    embedder: &EmbedderConfig,
    record: &CaseRecord,
    truth_deep_rank_frac: f64,
) -> Result<NBestList> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(splitmix64(embedder.seed ^ record.id ^ STREAM_NBEST));
    let jitter = rng.gen_range(0.0..0.1);
    let mut hyps = vec![Hypothesis {
        text: record.hypothesis.clone(),
        cost: 1.0 + jitter,
    }];
    // Distractor: an independent corruption under a shifted utterance id.
    let distractor = corrupt_hypothesis(embedder, &record.truth, record.id ^ 0x5a5a)?;
    hyps.push(Hypothesis {
        text: distractor,
        cost: 2.0 + rng.gen_range(0.0..0.5),
    });
    if rng.gen::<f64>() < truth_deep_rank_frac {
        hyps.push(Hypothesis {
            text: record.truth.clone(),
            cost: 3.0 + rng.gen_range(0.0..0.5),
        });
    }
    NBestList::new(hyps)
}

/// Materialize an EvalCase (embedding sequence + n-best) from a JSONL row.
pub fn case_from_record(
    embedder: &EmbedderConfig,
    record: &CaseRecord,
    truth_deep_rank_frac: f64,
) -> Result<EvalCase> {
    Ok(EvalCase {
        utterance: Utterance {
            id: record.id,
            truth_text: record.truth.clone(),
            hypothesis_text: record.hypothesis.clone(),
            speech_seq: rows_to_seq(&record.speech_embedding)?,
        },
        split: record.split,
        nbest: simulate_nbest(embedder, record, truth_deep_rank_frac)?,
    })
}

/// Pooled training pairs (text side embedded on the fly, speech side from the
/// stored rows), ready for the encoder trainer.
pub fn train_pairs_pooled(
    embedder: &EmbedderConfig,
    pairs: &[TrainPairRecord],
) -> Result<Vec<(Embedding, Embedding)>> {
    pairs
        .iter()
        .map(|p| -> Result<(Embedding, Embedding)> {
            let text = mean_pool(&crate::synth::embed_text(embedder, &p.truth)?);
            let speech = mean_pool(&rows_to_seq(&p.speech_embedding)?);
            Ok((text, speech))
        })
        .collect()
}

// --- JSONL io ---

pub fn write_jsonl<T: Serialize>(path: &std::path::Path, rows: &[T]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<Vec<T>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Pool file row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhraseRow {
    pub id: u64,
    pub text: String,
}
