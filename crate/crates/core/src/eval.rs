//! Evaluation protocol: corpus WER, the four system variants, the weighted-WER
//! delta sweep on the dev split, and the database-size scaling study.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrector::{correct_utterance, CorrectionConfig, DecisionRecord, NBestList};
use crate::encoder::EncoderHead;
use crate::index::{IndexKind, PhraseDb, PhraseRecord};
use crate::synth::{embed_text, EmbedderConfig, Utterance};
use crate::vecmath::{mean_pool, Embedding};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Ic,
    Anti,
}

/// One evaluation utterance with its simulated original n-best list.
#[derive(Debug, Clone)]
pub struct EvalCase {
    pub utterance: Utterance,
    pub split: Split,
    pub nbest: NBestList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Base,
    MeanPool,
    MeanPoolRet,
    TextQuery,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Base,
        Variant::MeanPool,
        Variant::MeanPoolRet,
        Variant::TextQuery,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::MeanPool => "mean_pool",
            Variant::MeanPoolRet => "mean_pool_ret",
            Variant::TextQuery => "text_query",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Variant::Base),
            "mean_pool" => Ok(Variant::MeanPool),
            "mean_pool_ret" => Ok(Variant::MeanPoolRet),
            "text_query" => Ok(Variant::TextQuery),
            other => Err(Error::InvalidConfig(format!("unknown variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// --- WER ---

/// Fixed text normalization for scoring: lowercase, strip punctuation
/// (apostrophes are kept inside words), collapse whitespace.
pub fn wer_words(text: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' {
            for lc in c.to_lowercase() {
                cleaned.push(lc);
            }
        } else {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().map(|w| w.to_string()).collect()
}

/// Word-level Levenshtein distance.
pub fn word_edit_distance(ref_words: &[String], hyp_words: &[String]) -> u64 {
    let (n, m) = (ref_words.len(), hyp_words.len());
    let mut prev: Vec<u64> = (0..=m as u64).collect();
    for i in 1..=n {
        let mut cur = Vec::with_capacity(m + 1);
        cur.push(i as u64);
        for j in 1..=m {
            let cost = u64::from(ref_words[i - 1] != hyp_words[j - 1]);
            cur.push((prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost));
        }
        prev = cur;
    }
    prev[m]
}

/// Corpus WER: total word edits across pairs over total reference words.
pub fn wer(refs: &[String], hyps: &[String]) -> Result<f64> {
    if refs.len() != hyps.len() {
        return Err(Error::Invalid(format!(
            "wer: {} references vs {} hypotheses",
            refs.len(),
            hyps.len()
        )));
    }
    if refs.is_empty() {
        return Err(Error::EmptyInput("wer reference list".into()));
    }
    let mut edits = 0u64;
    let mut ref_words_total = 0u64;
    for (i, (r, h)) in refs.iter().zip(hyps).enumerate() {
        let rw = wer_words(r);
        if rw.is_empty() {
            return Err(Error::EmptyInput(format!("wer reference at pair {i}")));
        }
        let hw = wer_words(h);
        edits += word_edit_distance(&rw, &hw);
        ref_words_total += rw.len() as u64;
    }
    Ok(edits as f64 / ref_words_total as f64)
}

// --- variant evaluation ---

/// Shared inputs for variant runs. The pool-space db holds raw mean-pooled
/// text embeddings; the ret-space db holds head-transformed ones.
pub struct EvalContext<'a> {
    pub embedder: &'a EmbedderConfig,
    pub db_pool: Option<&'a PhraseDb>,
    pub db_ret: Option<&'a PhraseDb>,
    pub head: Option<&'a EncoderHead>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantResult {
    pub wer_ic: f64,
    pub wer_anti: f64,
    #[serde(skip)]
    pub decisions: Vec<DecisionRecord>,
    /// (utterance id, chosen top hypothesis), in case order.
    #[serde(skip)]
    pub outputs: Vec<(u64, String)>,
}

fn correct_one(
    variant: Variant,
    ctx: &EvalContext<'_>,
    case: &EvalCase,
    delta: f64,
) -> Result<(String, Option<DecisionRecord>)> {
    let cfg = CorrectionConfig {
        delta,
        k_retrieve: 1,
    };
    match variant {
        Variant::Base => Ok((case.nbest.top().text.clone(), None)),
        Variant::MeanPool => {
            let db = ctx
                .db_pool
                .ok_or_else(|| Error::InvalidConfig("mean_pool requires a pool-space db".into()))?;
            let (list, dec) =
                correct_utterance(db, None, &case.utterance, None, &case.nbest, &cfg)?;
            Ok((list.top().text.clone(), Some(dec)))
        }
        Variant::MeanPoolRet => {
            let db = ctx.db_ret.ok_or_else(|| {
                Error::InvalidConfig("mean_pool_ret requires a ret-space db".into())
            })?;
            let head = ctx.head.ok_or_else(|| {
                Error::InvalidConfig("mean_pool_ret requires a trained head".into())
            })?;
            let (list, dec) =
                correct_utterance(db, Some(head), &case.utterance, None, &case.nbest, &cfg)?;
            Ok((list.top().text.clone(), Some(dec)))
        }
        Variant::TextQuery => {
            let db = ctx
                .db_ret
                .ok_or_else(|| Error::InvalidConfig("text_query requires a ret-space db".into()))?;
            let head = ctx
                .head
                .ok_or_else(|| Error::InvalidConfig("text_query requires a trained head".into()))?;
            let seq = embed_text(ctx.embedder, &case.utterance.hypothesis_text)?;
            let (list, dec) =
                correct_utterance(db, Some(head), &case.utterance, Some(&seq), &case.nbest, &cfg)?;
            Ok((list.top().text.clone(), Some(dec)))
        }
    }
}

/// Evaluate one variant at a fixed delta. Per-case work is parallel; results
/// are collected in case order and aggregated with integer sums, so parallel
/// and serial runs agree bit-for-bit.
pub fn run_variant(
    variant: Variant,
    cases: &[EvalCase],
    ctx: &EvalContext<'_>,
    delta: f64,
) -> Result<VariantResult> {
    if cases.is_empty() {
        return Err(Error::EmptyInput("eval cases".into()));
    }
    let per_case: Vec<(String, Option<DecisionRecord>)> = cases
        .par_iter()
        .map(|case| correct_one(variant, ctx, case, delta))
        .collect::<Result<Vec<_>>>()?;

    let mut sums: BTreeMap<Split, (u64, u64)> = BTreeMap::new();
    let mut decisions = Vec::new();
    let mut outputs = Vec::with_capacity(cases.len());
    for (case, (chosen, dec)) in cases.iter().zip(per_case) {
        let rw = wer_words(&case.utterance.truth_text);
        if rw.is_empty() {
            return Err(Error::EmptyInput(format!(
                "truth for utterance {}",
                case.utterance.id
            )));
        }
        let hw = wer_words(&chosen);
        let entry = sums.entry(case.split).or_insert((0, 0));
        entry.0 += word_edit_distance(&rw, &hw);
        entry.1 += rw.len() as u64;
        if let Some(d) = dec {
            decisions.push(d);
        }
        outputs.push((case.utterance.id, chosen));
    }
    let rate = |split: Split| -> f64 {
        match sums.get(&split) {
            Some(&(edits, words)) if words > 0 => edits as f64 / words as f64,
            _ => 0.0,
        }
    };
    Ok(VariantResult {
        wer_ic: rate(Split::Ic),
        wer_anti: rate(Split::Anti),
        decisions,
        outputs,
    })
}

// --- delta sweep ---

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub delta_grid: Vec<f64>,
    pub anti_weight: f64,
    pub ic_weight: f64,
    pub dev_m: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            delta_grid: (0..=100).map(|i| i as f64 / 100.0).collect(),
            anti_weight: 0.95,
            ic_weight: 0.05,
            dev_m: 1000,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delta_grid.is_empty() {
            return Err(Error::EmptyInput("delta grid".into()));
        }
        if self
            .delta_grid
            .iter()
            .any(|d| !(0.0..=1.0).contains(d))
        {
            return Err(Error::OutOfRange("delta grid values must be in [0, 1]".into()));
        }
        if (self.anti_weight + self.ic_weight - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(
                "anti_weight + ic_weight must equal 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub delta_star: f64,
    /// (delta, weighted objective) over the grid, ascending by delta.
    pub curve: Vec<(f64, f64)>,
}

/// Find the delta minimizing anti_weight * WER_anti + ic_weight * WER_ic on
/// the dev cases. Retrieval is delta-independent, so each case is retrieved
/// once and the grid is scored from cached edit counts. Ties break toward the
/// smaller delta.
pub fn sweep_delta(
    variant: Variant,
    dev_cases: &[EvalCase],
    ctx: &EvalContext<'_>,
    cfg: &SweepConfig,
) -> Result<SweepResult> {
    cfg.validate()?;
    let mut grid = cfg.delta_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    struct CaseStats {
        split: Split,
        ref_words: u64,
        edits_orig: u64,
        edits_rewrite: u64,
        sim: f64,
    }

    // Retrieval at delta = 1 surfaces (t_hat, sim) for every case; the rewrite
    // decision is then re-derived per grid point from the strict rule.
    let stats: Vec<CaseStats> = dev_cases
        .par_iter()
        .map(|case| -> Result<CaseStats> {
            let rw = wer_words(&case.utterance.truth_text);
            if rw.is_empty() {
                return Err(Error::EmptyInput(format!(
                    "truth for utterance {}",
                    case.utterance.id
                )));
            }
            let orig = wer_words(&case.nbest.top().text);
            let edits_orig = word_edit_distance(&rw, &orig);
            let (edits_rewrite, sim) = match variant {
                Variant::Base => (edits_orig, -1.0),
                _ => {
                    let (_, dec) = correct_one(variant, ctx, case, 0.0)?;
                    let dec = dec.expect("retrieval variants always produce a decision");
                    let cand = wer_words(&dec.t_hat);
                    (word_edit_distance(&rw, &cand), dec.sim)
                }
            };
            Ok(CaseStats {
                split: case.split,
                ref_words: rw.len() as u64,
                edits_orig,
                edits_rewrite,
                sim,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut curve = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &delta in &grid {
        let mut sums: BTreeMap<Split, (u64, u64)> = BTreeMap::new();
        for s in &stats {
            let rewritten = 1.0 - s.sim < delta;
            let edits = if rewritten { s.edits_rewrite } else { s.edits_orig };
            let e = sums.entry(s.split).or_insert((0, 0));
            e.0 += edits;
            e.1 += s.ref_words;
        }
        let rate = |split: Split| -> f64 {
            match sums.get(&split) {
                Some(&(edits, words)) if words > 0 => edits as f64 / words as f64,
                _ => 0.0,
            }
        };
        let objective = cfg.anti_weight * rate(Split::Anti) + cfg.ic_weight * rate(Split::Ic);
        curve.push((delta, objective));
        match best {
            Some((_, obj)) if objective >= obj => {}
            _ => best = Some((delta, objective)),
        }
    }
    Ok(SweepResult {
        delta_star: best.unwrap().0,
        curve,
    })
}

// --- scaling study ---

/// Phrase records for a db in either embedding space: mean-pooled text
/// embeddings, optionally transformed by the retrieval head. Ids are pool
/// positions, so tie-breaking is stable across M.
pub fn build_phrase_records(
    phrases: &[String],
    embedder: &EmbedderConfig,
    head: Option<&EncoderHead>,
) -> Result<Vec<PhraseRecord>> {
    phrases
        .par_iter()
        .enumerate()
        .map(|(i, text)| -> Result<PhraseRecord> {
            let pooled = mean_pool(&embed_text(embedder, text)?);
            let embedding: Embedding = match head {
                Some(h) => h.forward(&pooled, false, None)?,
                None => pooled,
            };
            Ok(PhraseRecord {
                id: i as u64,
                text: text.clone(),
                embedding,
            })
        })
        .collect()
}

/// variant name -> split name -> M -> WER
pub type ScalingTable = BTreeMap<String, BTreeMap<String, BTreeMap<u64, f64>>>;

/// Rebuild the databases from the first M phrases for each M in the grid and
/// evaluate every variant at its swept delta.
pub fn scaling_study(
    variants: &[Variant],
    cases: &[EvalCase],
    pool_phrases: &[String],
    head: &EncoderHead,
    embedder: &EmbedderConfig,
    deltas: &BTreeMap<Variant, f64>,
    m_grid: &[usize],
) -> Result<ScalingTable> {
    if m_grid.is_empty() {
        return Err(Error::EmptyInput("m grid".into()));
    }
    let mut table: ScalingTable = BTreeMap::new();
    for &m in m_grid {
        if m == 0 || m > pool_phrases.len() {
            return Err(Error::InvalidConfig(format!(
                "M = {m} exceeds phrase pool size {}",
                pool_phrases.len()
            )));
        }
        let prefix = &pool_phrases[..m];
        let recs_pool = build_phrase_records(prefix, embedder, None)?;
        let recs_ret = build_phrase_records(prefix, embedder, Some(head))?;
        let db_pool = PhraseDb::build(&recs_pool, &IndexKind::Exact)?;
        let db_ret = PhraseDb::build(&recs_ret, &IndexKind::Exact)?;
        let ctx = EvalContext {
            embedder,
            db_pool: Some(&db_pool),
            db_ret: Some(&db_ret),
            head: Some(head),
        };
        for &variant in variants {
            let delta = *deltas.get(&variant).unwrap_or(&0.0);
            let res = run_variant(variant, cases, &ctx, delta)?;
            let by_split = table.entry(variant.name().to_string()).or_default();
            by_split
                .entry("ic".to_string())
                .or_default()
                .insert(m as u64, res.wer_ic);
            by_split
                .entry("anti".to_string())
                .or_default()
                .insert(m as u64, res.wer_anti);
        }
    }
    Ok(table)
}

/// Human-readable table: one row per (variant, split), one column per M.
pub fn render_table(table: &ScalingTable) -> String {
    let mut ms: Vec<u64> = Vec::new();
    for by_split in table.values() {
        for by_m in by_split.values() {
            for &m in by_m.keys() {
                if !ms.contains(&m) {
                    ms.push(m);
                }
            }
        }
    }
    ms.sort_unstable();
    let mut out = String::new();
    out.push_str(&format!("{:<24}{:<8}", "variant", "split"));
    for m in &ms {
        out.push_str(&format!("{:>10}", format!("M={m}")));
    }
    out.push('\n');
    for (variant, by_split) in table {
        for (split, by_m) in by_split {
            out.push_str(&format!("{variant:<24}{split:<8}"));
            for m in &ms {
                match by_m.get(m) {
                    Some(w) => out.push_str(&format!("{w:>10.4}")),
                    None => out.push_str(&format!("{:>10}", "-")),
                }
            }
            out.push('\n');
        }
    }
    out
}
