//! Dense vector primitives shared by every other module.
//!
//! Embeddings are stored as 32-bit floats; reductions that feed tests or
//! scoring use 64-bit accumulation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fixed-dimension real vector representing a phrase or utterance in the
/// shared embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    values: Vec<f32>,
}

impl Embedding {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("embedding values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding values".into()));
        }
        Ok(Embedding { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// L2 norm with 64-bit accumulation.
    pub fn norm(&self) -> f64 {
        norm_f64(&self.values)
    }
}

/// Non-empty sequence of frame embeddings sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    frames: Vec<Embedding>,
}

impl EmbeddingSequence {
    pub fn new(frames: Vec<Embedding>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::EmptyInput("embedding sequence".into()))?;
        let dim = first.dim();
        for f in &frames {
            if f.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: f.dim(),
                });
            }
        }
        Ok(EmbeddingSequence { frames })
    }

    pub fn frames(&self) -> &[Embedding] {
        &self.frames
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Dot product with 32-bit accumulation; the hot path for index scans over
/// normalized vectors.
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Dot product with 64-bit accumulation.
pub fn dot_f64(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        acc += *x as f64 * *y as f64;
    }
    acc
}

pub fn norm_f64(a: &[f32]) -> f64 {
    dot_f64(a, a).sqrt()
}

/// Cosine similarity, clamped to [-1, 1] to absorb round-off.
pub fn cosine_sim(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 {
        return Err(Error::zero_norm("cosine_sim lhs"));
    }
    if nb == 0.0 {
        return Err(Error::zero_norm("cosine_sim rhs"));
    }
    let c = dot_f64(a.values(), b.values()) / (na * nb);
    Ok(c.clamp(-1.0, 1.0))
}

/// Component-wise arithmetic mean over frames.
pub fn mean_pool(seq: &EmbeddingSequence) -> Embedding {
    let dim = seq.dim();
    let mut acc = vec![0.0f64; dim];
    for frame in seq.frames() {
        for (a, v) in acc.iter_mut().zip(frame.values()) {
            *a += *v as f64;
        }
    }
    let n = seq.len() as f64;
    let values: Vec<f32> = acc.into_iter().map(|a| (a / n) as f32).collect();
    Embedding { values }
}

/// Scale to unit L2 norm. Errors on zero-norm input.
pub fn l2_normalize(a: &Embedding) -> Result<Embedding> {
    let n = a.norm();
    if n == 0.0 {
        return Err(Error::zero_norm("l2_normalize"));
    }
    let values: Vec<f32> = a.values().iter().map(|v| (*v as f64 / n) as f32).collect();
    Ok(Embedding { values })
}

/// Normalize a raw slice in place; used by the index on its contiguous store.
pub fn l2_normalize_slice(values: &mut [f32]) -> Result<()> {
    let n = norm_f64(values);
    if n == 0.0 {
        return Err(Error::zero_norm("l2_normalize_slice"));
    }
    for v in values.iter_mut() {
        *v = (*v as f64 / n) as f32;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emb(v: &[f32]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cosine_self_similarity() {
        let a = emb(&[3.0, 4.0]);
        assert!((cosine_sim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_orthogonal() {
        let a = emb(&[1.0, 0.0]);
        let b = emb(&[0.0, 1.0]);
        assert_eq!(cosine_sim(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cosine_45_degrees() {
        let a = emb(&[1.0, 1.0]);
        let b = emb(&[1.0, 0.0]);
        assert!((cosine_sim(&a, &b).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn cosine_errors() {
        let a = emb(&[1.0, 0.0]);
        let b = emb(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            cosine_sim(&a, &b),
            Err(Error::DimMismatch { .. })
        ));
        let z = emb(&[0.0, 0.0]);
        assert!(matches!(cosine_sim(&a, &z), Err(Error::ZeroNorm { .. })));
    }

    #[test]
    fn mean_pool_singleton_and_pair() {
        let seq = EmbeddingSequence::new(vec![emb(&[2.0, 4.0])]).unwrap();
        assert_eq!(mean_pool(&seq).values(), &[2.0, 4.0]);

        let seq = EmbeddingSequence::new(vec![emb(&[1.0, 0.0]), emb(&[3.0, 2.0])]).unwrap();
        assert_eq!(mean_pool(&seq).values(), &[2.0, 1.0]);
    }

    #[test]
    fn mean_pool_constant_sequence() {
        let v = emb(&[0.5, -1.5, 2.0]);
        for k in 1..5 {
            let seq = EmbeddingSequence::new(vec![v.clone(); k]).unwrap();
            let pooled = mean_pool(&seq);
            for (a, b) in pooled.values().iter().zip(v.values()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(EmbeddingSequence::new(vec![]).is_err());
    }

    #[test]
    fn normalize_345() {
        let a = emb(&[3.0, 4.0]);
        let n = l2_normalize(&a).unwrap();
        assert!((n.values()[0] - 0.6).abs() < 1e-7);
        assert!((n.values()[1] - 0.8).abs() < 1e-7);
        assert!((n.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn normalize_zero_errors() {
        assert!(l2_normalize(&emb(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn nan_rejected() {
        assert!(Embedding::new(vec![1.0, f32::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn cosine_symmetric(
            a in proptest::collection::vec(-100.0f32..100.0, 8),
            b in proptest::collection::vec(-100.0f32..100.0, 8),
        ) {
            let (ea, eb) = (emb(&a), emb(&b));
            if let (Ok(x), Ok(y)) = (cosine_sim(&ea, &eb), cosine_sim(&eb, &ea)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn cosine_scale_invariant(
            a in proptest::collection::vec(-100.0f32..100.0, 8),
            b in proptest::collection::vec(-100.0f32..100.0, 8),
            alpha in 0.01f32..100.0,
        ) {
            let ea = emb(&a);
            let eb = emb(&b);
            let scaled: Vec<f32> = a.iter().map(|v| v * alpha).collect();
            if let (Ok(es), Ok(x)) = (Embedding::new(scaled), cosine_sim(&ea, &eb)) {
                if let Ok(y) = cosine_sim(&es, &eb) {
                    prop_assert!((x - y).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn cosine_equals_dot_after_normalize(
            a in proptest::collection::vec(-100.0f32..100.0, 8),
            b in proptest::collection::vec(-100.0f32..100.0, 8),
        ) {
            let (ea, eb) = (emb(&a), emb(&b));
            if let (Ok(na), Ok(nb)) = (l2_normalize(&ea), l2_normalize(&eb)) {
                let c = cosine_sim(&na, &nb).unwrap();
                let d = dot_f64(na.values(), nb.values());
                prop_assert!((c - d).abs() < 1e-6);
            }
        }

        #[test]
        fn mean_pool_permutation_invariant(
            frames in proptest::collection::vec(
                proptest::collection::vec(-10.0f32..10.0, 4), 1..6),
            shift in 0usize..6,
        ) {
            let embs: Vec<Embedding> = frames.iter().map(|f| emb(f)).collect();
            let mut rotated = embs.clone();
            rotated.rotate_left(shift % embs.len());
            let p1 = mean_pool(&EmbeddingSequence::new(embs).unwrap());
            let p2 = mean_pool(&EmbeddingSequence::new(rotated).unwrap());
            for (x, y) in p1.values().iter().zip(p2.values()) {
                prop_assert!((x - y).abs() < 1e-5);
            }
        }
    }
}
