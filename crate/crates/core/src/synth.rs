//! Deterministic synthetic embedder.
//!
//! Stands in for a frozen speech-text encoder: text maps to a sequence of
//! per-word embeddings via seeded character n-gram hashing, the speech side
//! adds seeded per-component noise, and ASR hypotheses are simulated with
//! seeded character-level corruption. Everything is a pure function of
//! (config, inputs); re-running a dataset build produces bit-identical output.
//!
//! Hashing is seeded 64-bit FNV-1a; all random draws come from ChaCha8 with
//! explicit seeding rules, so output is identical across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::util::{fnv1a64_seeded, splitmix64};
use crate::vecmath::{Embedding, EmbeddingSequence};
use crate::{Error, Result};

/// Stream tags keep the speech-noise and hypothesis-corruption RNG streams
/// apart even though both derive from (seed, utterance_id).
const STREAM_SPEECH: u64 = 0x5350_4545_4348_0001;
const STREAM_CORRUPT: u64 = 0x434f_5252_5550_0002;
const STREAM_MODES: u64 = 0x4d4f_4445_5300_0003;

/// Number of global acoustic variation modes the speech perturbation is drawn
/// from. Real speech varies along a handful of consistent factors (noise
/// level, pitch, duration, channel), so the perturbation bank is low-rank:
/// every utterance's noise is a random mixture of the same `NOISE_MODES`
/// fixed directions rather than isotropic. This is what gives a trained
/// retrieval head something systematic to remove that mean pooling cannot.
const NOISE_MODES: usize = 8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedderConfig {
    pub dim: usize,
    pub ngram_orders: Vec<usize>,
    pub speech_noise_sigma: f64,
    pub hyp_corruption_rate: f64,
    pub seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            dim: 64,
            ngram_orders: vec![2, 3],
            speech_noise_sigma: 0.1,
            hyp_corruption_rate: 0.3,
            seed: 42,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(Error::InvalidConfig(format!(
                "embedder dim must be >= 8, got {}",
                self.dim
            )));
        }
        if self.ngram_orders.is_empty() {
            return Err(Error::InvalidConfig("ngram_orders must be non-empty".into()));
        }
        if self.ngram_orders.contains(&0) {
            return Err(Error::InvalidConfig("ngram order 0 is invalid".into()));
        }
        if self.speech_noise_sigma < 0.0 || !self.speech_noise_sigma.is_finite() {
            return Err(Error::InvalidConfig(
                "speech_noise_sigma must be finite and >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.hyp_corruption_rate) {
            return Err(Error::InvalidConfig(
                "hyp_corruption_rate must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One synthetic utterance: ground truth, its "audio" embedding sequence, and
/// the simulated ASR top hypothesis.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub id: u64,
    pub truth_text: String,
    pub hypothesis_text: String,
    pub speech_seq: EmbeddingSequence,
}

/// Lowercase, trim, collapse internal whitespace.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Character n-grams of a word for one order. Words shorter than the order
/// contribute themselves as a single gram.
fn ngrams(word: &str, order: usize) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() < order {
        return vec![word.to_string()];
    }
    chars
        .windows(order)
        .map(|w| w.iter().collect::<String>())
        .collect()
}

fn embed_word(cfg: &EmbedderConfig, word: &str) -> Result<Embedding> {
    let mut acc = vec![0.0f32; cfg.dim];
    for &order in &cfg.ngram_orders {
        for gram in ngrams(word, order) {
            let h = fnv1a64_seeded(cfg.seed, gram.as_bytes());
            let idx = (h % cfg.dim as u64) as usize;
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            acc[idx] += sign;
        }
    }
    // A word whose grams cancel exactly would yield a zero vector; nudge the
    // slot picked by the whole-word hash so every word stays representable.
    if acc.iter().all(|&v| v == 0.0) {
        let h = fnv1a64_seeded(cfg.seed ^ 0xff, word.as_bytes());
        acc[(h % cfg.dim as u64) as usize] = 1.0;
    }
    let e = Embedding::new(acc)?;
    crate::vecmath::l2_normalize(&e)
}

/// Text-side encoder stand-in: one unit-norm hashed embedding per word.
pub fn embed_text(cfg: &EmbedderConfig, text: &str) -> Result<EmbeddingSequence> {
    let normalized = normalize_text(text);
    if normalized.is_empty() {
        return Err(Error::EmptyInput("embed_text input".into()));
    }
    let frames: Result<Vec<Embedding>> = normalized
        .split(' ')
        .map(|w| embed_word(cfg, w))
        .collect();
    EmbeddingSequence::new(frames?)
}

/// The fixed bank of unit-norm variation-mode directions, a pure function of
/// the config seed (shared by every utterance).
fn noise_modes(cfg: &EmbedderConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ STREAM_MODES));
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..NOISE_MODES)
        .map(|_| {
            let mut d: Vec<f64> = (0..cfg.dim).map(|_| normal.sample(&mut rng)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in d.iter_mut() {
                *v /= norm;
            }
            d
        })
        .collect()
}

/// Speech-side stand-in: embed_text plus a seeded additive perturbation and a
/// per-frame re-normalization. sigma = 0 reproduces embed_text bit-exactly.
///
/// Each frame's perturbation is a Gaussian mixture of the fixed variation-mode
/// bank, scaled so the perturbation's per-component std-dev is sigma (averaged
/// over components; the modes concentrate it in a low-rank subspace).
pub fn embed_speech(
    cfg: &EmbedderConfig,
    truth_text: &str,
    utterance_id: u64,
) -> Result<EmbeddingSequence> {
    let clean = embed_text(cfg, truth_text)?;
    if cfg.speech_noise_sigma == 0.0 {
        return Ok(clean);
    }
    let modes = noise_modes(cfg);
    // Per-component variance of sum_k g_k d_k with unit-norm d_k is ~K/dim on
    // average, so this scale restores an average per-component std of sigma.
    let scale = cfg.speech_noise_sigma * (cfg.dim as f64 / NOISE_MODES as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ utterance_id ^ STREAM_SPEECH));
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut frames = Vec::with_capacity(clean.len());
    for frame in clean.frames() {
        let mut noisy: Vec<f64> = frame.values().iter().map(|&v| v as f64).collect();
        for mode in &modes {
            let g = scale * normal.sample(&mut rng);
            for (n, m) in noisy.iter_mut().zip(mode) {
                *n += g * m;
            }
        }
        let e = Embedding::new(noisy.into_iter().map(|v| v as f32).collect())?;
        frames.push(crate::vecmath::l2_normalize(&e)?);
    }
    EmbeddingSequence::new(frames)
}

const CONFUSABLE: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r',
    's', 't', 'u', 'v', 'w', 'x', 'y', 'z',
];

/// Simulated ASR hypothesis: seeded character-level substitute/delete/insert
/// edits applied independently with probability `hyp_corruption_rate`.
pub fn corrupt_hypothesis(
    cfg: &EmbedderConfig,
    truth_text: &str,
    utterance_id: u64,
) -> Result<String> {
    let normalized = normalize_text(truth_text);
    if normalized.is_empty() {
        return Err(Error::EmptyInput("corrupt_hypothesis input".into()));
    }
    if cfg.hyp_corruption_rate == 0.0 {
        return Ok(normalized);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ utterance_id ^ STREAM_CORRUPT));
    let mut out = String::new();
    let mut last_nonempty = normalized.clone();
    for c in normalized.chars() {
        if rng.gen::<f64>() < cfg.hyp_corruption_rate {
            match rng.gen_range(0..3u8) {
                0 => {
                    // substitute
                    out.push(CONFUSABLE[rng.gen_range(0..CONFUSABLE.len())]);
                }
                1 => {
                    // delete
                }
                _ => {
                    // insert before, then keep the original character
                    out.push(CONFUSABLE[rng.gen_range(0..CONFUSABLE.len())]);
                    out.push(c);
                }
            }
        } else {
            out.push(c);
        }
        if !out.is_empty() {
            last_nonempty = out.clone();
        }
    }
    // Collapse whitespace artifacts from edits around spaces.
    let cleaned = normalize_text(&out);
    if cleaned.is_empty() {
        Ok(normalize_text(&last_nonempty))
    } else {
        Ok(cleaned)
    }
}
