//! N-best expansion: retrieve the nearest phrase, score it against the
//! original top hypothesis, and rewrite when the similarity clears the
//! aggressiveness threshold.

use serde::{Deserialize, Serialize};

use crate::encoder::EncoderHead;
use crate::index::PhraseDb;
use crate::synth::{normalize_text, Utterance};
use crate::vecmath::{mean_pool, Embedding};
use crate::{Error, Result};

/// One ranked hypothesis; cost is a pseudo negative log-likelihood, lower is
/// better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub text: String,
    pub cost: f64,
}

/// Non-empty list of hypotheses, ascending by cost with stable tie order.
#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    hypotheses: Vec<Hypothesis>,
}

impl NBestList {
    pub fn new(mut hypotheses: Vec<Hypothesis>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::EmptyInput("n-best list".into()));
        }
        if hypotheses.iter().any(|h| !h.cost.is_finite()) {
            return Err(Error::NonFinite("hypothesis cost".into()));
        }
        hypotheses.sort_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap());
        Ok(NBestList { hypotheses })
    }

    /// For callers that already placed every hypothesis (expand_nbest's
    /// boundary handling can differ from a pure cost sort by one rounding ulp).
    fn new_sorted_by_construction(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::EmptyInput("n-best list".into()));
        }
        Ok(NBestList { hypotheses })
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn top(&self) -> &Hypothesis {
        &self.hypotheses[0]
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectionConfig {
    pub delta: f64,
    pub k_retrieve: usize,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            delta: 0.3,
            k_retrieve: 1,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::OutOfRange(format!(
                "delta must be in [0, 1], got {}",
                self.delta
            )));
        }
        if self.k_retrieve == 0 {
            return Err(Error::InvalidConfig("k_retrieve must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-utterance decision log, emitted as JSON lines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub id: u64,
    pub t_hat: String,
    pub sim: f64,
    pub c_orig: f64,
    pub c_hat: f64,
    pub delta: f64,
    pub rewritten: bool,
}

/// Candidate cost: c_orig + (1 - sim) - delta.
pub fn score_candidate(c_orig: f64, sim: f64, delta: f64) -> Result<f64> {
    if !c_orig.is_finite() {
        return Err(Error::NonFinite("c_orig".into()));
    }
    if !(-1.0..=1.0).contains(&sim) {
        return Err(Error::OutOfRange(format!("sim must be in [-1, 1], got {sim}")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::OutOfRange(format!(
            "delta must be in [0, 1], got {delta}"
        )));
    }
    Ok(c_orig + (1.0 - sim) - delta)
}

/// Union the retrieved candidate into the n-best list. The candidate lands at
/// rank 0 iff 1 - sim < delta (strict); duplicate texts keep the cheaper copy.
pub fn expand_nbest(
    nbest: &NBestList,
    candidate_text: &str,
    sim: f64,
    cfg: &CorrectionConfig,
) -> Result<NBestList> {
    cfg.validate()?;
    let c_orig = nbest.top().cost;
    let cost = score_candidate(c_orig, sim, cfg.delta)?;
    let candidate_norm = normalize_text(candidate_text);

    let mut merged: Vec<Hypothesis> = Vec::with_capacity(nbest.len() + 1);
    let mut candidate = Some(Hypothesis {
        text: candidate_text.to_string(),
        cost,
    });
    for h in nbest.hypotheses() {
        if normalize_text(&h.text) == candidate_norm {
            // Duplicate of the candidate: keep whichever copy is cheaper.
            let cand = candidate.take();
            match cand {
                Some(c) if c.cost < h.cost => merged.push(c),
                _ => {
                    merged.push(h.clone());
                    // Original copy wins; drop the candidate entirely.
                }
            }
        } else {
            merged.push(h.clone());
        }
    }
    if let Some(c) = candidate {
        // Rank 0 is decided by the rewrite rule itself, not by comparing the
        // summed cost against c_orig: the sum can round across the boundary
        // when 1 - sim and delta are nearly equal. Elsewhere the candidate
        // takes its stable cost position, after existing equal-cost entries.
        let rewritten = 1.0 - sim < cfg.delta;
        let mut idx = merged.partition_point(|h| h.cost <= c.cost);
        if rewritten {
            idx = 0;
        } else {
            idx = idx.max(1);
        }
        merged.insert(idx, c);
    }
    NBestList::new_sorted_by_construction(merged)
}

/// Full correction pipeline for one utterance: pool the speech embedding,
/// optionally apply the retrieval head, query the database, and expand the
/// n-best list with the top retrieved phrase.
pub fn correct_utterance(
    db: &PhraseDb,
    head: Option<&EncoderHead>,
    utterance: &Utterance,
    query_seq_override: Option<&crate::vecmath::EmbeddingSequence>,
    nbest: &NBestList,
    cfg: &CorrectionConfig,
) -> Result<(NBestList, DecisionRecord)> {
    cfg.validate()?;
    if let Some(h) = head {
        if h.dim_out() != db.dim() {
            return Err(Error::DimMismatch {
                left: h.dim_out(),
                right: db.dim(),
            });
        }
    }
    let seq = query_seq_override.unwrap_or(&utterance.speech_seq);
    let pooled = mean_pool(seq);
    let query: Embedding = match head {
        Some(h) => h.forward(&pooled, false, None)?,
        None => pooled,
    };
    let hits = db.query_top_k(&query, cfg.k_retrieve)?;
    let (top_rec, top_sim) = &hits[0];
    let sim = *top_sim as f64;

    let mut expanded = expand_nbest(nbest, &top_rec.text, sim, cfg)?;
    for (rec, s) in hits.iter().skip(1) {
        expanded = expand_nbest(&expanded, &rec.text, *s as f64, cfg)?;
    }

    let c_orig = nbest.top().cost;
    let c_hat = score_candidate(c_orig, sim, cfg.delta)?;
    let rewritten = normalize_text(&expanded.top().text) != normalize_text(&nbest.top().text);
    let decision = DecisionRecord {
        id: utterance.id,
        t_hat: top_rec.text.clone(),
        sim,
        c_orig,
        c_hat,
        delta: cfg.delta,
        rewritten,
    };
    Ok((expanded, decision))
}
