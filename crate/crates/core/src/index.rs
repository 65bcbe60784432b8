//! Embedding database and nearest-neighbor search: exhaustive top-k over
//! contiguous normalized vectors, plus an IVF-style partitioned index built
//! with seeded spherical k-means. Persistence is a little-endian binary format
//! with a trailing checksum; round-trips are byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::fnv1a64;
use crate::vecmath::{dot, l2_normalize_slice, Embedding};
use crate::{Error, Result};

const DB_MAGIC: &[u8; 4] = b"EMDB";
const DB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseRecord {
    pub id: u64,
    pub text: String,
    pub embedding: Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub n_partitions: usize,
    pub n_probe: usize,
    pub kmeans_iters: usize,
    pub seed: u64,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams {
            n_partitions: 64,
            n_probe: 8,
            kmeans_iters: 10,
            seed: 42,
        }
    }
}

impl PartitionParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_partitions == 0 || self.n_probe == 0 || self.kmeans_iters == 0 {
            return Err(Error::InvalidConfig(
                "partition params must be positive".into(),
            ));
        }
        if self.n_probe > self.n_partitions {
            return Err(Error::InvalidConfig(
                "n_probe must be <= n_partitions".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IndexKind {
    Exact,
    Partitioned(PartitionParams),
}

#[derive(Debug, Clone, PartialEq)]
enum IndexData {
    Exact,
    Partitioned {
        params: PartitionParams,
        centroids: Vec<f32>,   // n_partitions x dim
        assignments: Vec<u32>, // record -> partition
        lists: Vec<Vec<u32>>,  // partition -> record indices (derived)
    },
}

/// Offline-built collection of phrase embeddings with text payloads.
/// Immutable after build; concurrent queries are safe.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseDb {
    dim: usize,
    ids: Vec<u64>,
    texts: Vec<String>,
    embeddings: Vec<f32>, // M x dim, L2-normalized rows
    index: IndexData,
}

impl PhraseDb {
    pub fn build(records: &[PhraseRecord], kind: &IndexKind) -> Result<PhraseDb> {
        if records.is_empty() {
            return Err(Error::EmptyInput("phrase records".into()));
        }
        let dim = records[0].embedding.dim();
        let m = records.len();
        let mut seen = std::collections::HashSet::with_capacity(m);
        let mut ids = Vec::with_capacity(m);
        let mut texts = Vec::with_capacity(m);
        let mut embeddings = Vec::with_capacity(m * dim);
        for rec in records {
            if rec.embedding.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: rec.embedding.dim(),
                });
            }
            if !seen.insert(rec.id) {
                return Err(Error::DuplicateId(rec.id));
            }
            ids.push(rec.id);
            texts.push(rec.text.clone());
            let start = embeddings.len();
            embeddings.extend_from_slice(rec.embedding.values());
            l2_normalize_slice(&mut embeddings[start..start + dim])
                .map_err(|_| Error::zero_norm(format!("record id {}", rec.id)))?;
        }
        let index = match kind {
            IndexKind::Exact => IndexData::Exact,
            IndexKind::Partitioned(params) => {
                params.validate()?;
                if params.n_partitions > m {
                    return Err(Error::InvalidConfig(format!(
                        "n_partitions {} exceeds record count {m}",
                        params.n_partitions
                    )));
                }
                let (centroids, assignments) = spherical_kmeans(&embeddings, dim, m, params);
                let lists = build_lists(&assignments, params.n_partitions);
                IndexData::Partitioned {
                    params: params.clone(),
                    centroids,
                    assignments,
                    lists,
                }
            }
        };
        Ok(PhraseDb {
            dim,
            ids,
            texts,
            embeddings,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn kind(&self) -> IndexKind {
        match &self.index {
            IndexData::Exact => IndexKind::Exact,
            IndexData::Partitioned { params, .. } => IndexKind::Partitioned(params.clone()),
        }
    }

    fn record(&self, idx: usize) -> PhraseRecord {
        let row = &self.embeddings[idx * self.dim..(idx + 1) * self.dim];
        PhraseRecord {
            id: self.ids[idx],
            text: self.texts[idx].clone(),
            embedding: Embedding::new(row.to_vec()).expect("stored rows are valid"),
        }
    }

    /// Top-k by cosine similarity (dot on normalized vectors), descending,
    /// ties broken by ascending id.
    pub fn query_top_k(&self, query: &Embedding, k: usize) -> Result<Vec<(PhraseRecord, f32)>> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if query.dim() != self.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: query.dim(),
            });
        }
        let n = query.norm();
        if n == 0.0 {
            return Err(Error::zero_norm("query"));
        }
        let q: Vec<f32> = query.values().iter().map(|&v| (v as f64 / n) as f32).collect();

        let candidate_indices: Vec<u32> = match &self.index {
            IndexData::Exact => (0..self.len() as u32).collect(),
            IndexData::Partitioned {
                params,
                centroids,
                lists,
                ..
            } => {
                let mut ranked: Vec<(f32, u32)> = (0..params.n_partitions)
                    .map(|p| {
                        let c = &centroids[p * self.dim..(p + 1) * self.dim];
                        (dot(&q, c), p as u32)
                    })
                    .collect();
                ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                let mut cands = Vec::new();
                for &(_, p) in ranked.iter().take(params.n_probe) {
                    cands.extend_from_slice(&lists[p as usize]);
                }
                cands
            }
        };

        let mut scored: Vec<(f32, u64, u32)> = candidate_indices
            .iter()
            .map(|&idx| {
                let row = &self.embeddings[idx as usize * self.dim..(idx as usize + 1) * self.dim];
                (dot(&q, row), self.ids[idx as usize], idx)
            })
            .collect();
        let cmp = |a: &(f32, u64, u32), b: &(f32, u64, u32)| {
            b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1))
        };
        let k_eff = k.min(scored.len());
        if k_eff < scored.len() {
            scored.select_nth_unstable_by(k_eff - 1, cmp);
            scored.truncate(k_eff);
        }
        scored.sort_by(cmp);
        Ok(scored
            .into_iter()
            .map(|(sim, _, idx)| (self.record(idx as usize), sim.clamp(-1.0, 1.0)))
            .collect())
    }

    // --- persistence ---

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(DB_MAGIC);
        buf.extend_from_slice(&DB_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.dim as u32).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        match &self.index {
            IndexData::Exact => buf.push(0u8),
            IndexData::Partitioned { params, .. } => {
                buf.push(1u8);
                buf.extend_from_slice(&(params.n_partitions as u32).to_le_bytes());
                buf.extend_from_slice(&(params.n_probe as u32).to_le_bytes());
                buf.extend_from_slice(&(params.kmeans_iters as u32).to_le_bytes());
                buf.extend_from_slice(&params.seed.to_le_bytes());
            }
        }
        for id in &self.ids {
            buf.extend_from_slice(&id.to_le_bytes());
        }
        // Text offset table (M+1 entries) followed by the UTF-8 blob.
        let mut offset = 0u64;
        for t in &self.texts {
            buf.extend_from_slice(&offset.to_le_bytes());
            offset += t.len() as u64;
        }
        buf.extend_from_slice(&offset.to_le_bytes());
        for t in &self.texts {
            buf.extend_from_slice(t.as_bytes());
        }
        for v in &self.embeddings {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        if let IndexData::Partitioned {
            centroids,
            assignments,
            ..
        } = &self.index
        {
            for v in centroids {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            for a in assignments {
                buf.extend_from_slice(&a.to_le_bytes());
            }
        }
        let checksum = fnv1a64(&buf);
        buf.extend_from_slice(&checksum.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8], path: &str) -> Result<PhraseDb> {
        let corrupt = |reason: String| Error::CorruptFile {
            path: path.to_string(),
            reason,
        };
        if bytes.len() < 4 + 4 + 4 + 8 + 1 + 8 {
            return Err(corrupt("file too short".into()));
        }
        if &bytes[0..4] != DB_MAGIC {
            return Err(corrupt("bad magic".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if fnv1a64(body) != stored {
            return Err(corrupt("checksum mismatch".into()));
        }
        let mut cur = Cursor { body, off: 4 };
        let version = cur.u32(&corrupt)?;
        if version != DB_VERSION {
            return Err(corrupt(format!("unsupported version {version}")));
        }
        let dim = cur.u32(&corrupt)? as usize;
        let m = cur.u64(&corrupt)? as usize;
        let tag = cur.u8(&corrupt)?;
        let params = match tag {
            0 => None,
            1 => Some(PartitionParams {
                n_partitions: cur.u32(&corrupt)? as usize,
                n_probe: cur.u32(&corrupt)? as usize,
                kmeans_iters: cur.u32(&corrupt)? as usize,
                seed: cur.u64(&corrupt)?,
            }),
            t => return Err(corrupt(format!("unknown index kind tag {t}"))),
        };
        let mut ids = Vec::with_capacity(m);
        for _ in 0..m {
            ids.push(cur.u64(&corrupt)?);
        }
        let mut offsets = Vec::with_capacity(m + 1);
        for _ in 0..=m {
            offsets.push(cur.u64(&corrupt)? as usize);
        }
        let blob_len = *offsets.last().unwrap();
        let blob = cur.bytes(blob_len, &corrupt)?.to_vec();
        let mut texts = Vec::with_capacity(m);
        for w in offsets.windows(2) {
            let slice = blob
                .get(w[0]..w[1])
                .ok_or_else(|| corrupt("text offsets out of range".into()))?;
            texts.push(
                String::from_utf8(slice.to_vec())
                    .map_err(|_| corrupt("invalid UTF-8 in text blob".into()))?,
            );
        }
        let mut embeddings = Vec::with_capacity(m * dim);
        for _ in 0..m * dim {
            embeddings.push(cur.f32(&corrupt)?);
        }
        let index = match params {
            None => IndexData::Exact,
            Some(params) => {
                let mut centroids = Vec::with_capacity(params.n_partitions * dim);
                for _ in 0..params.n_partitions * dim {
                    centroids.push(cur.f32(&corrupt)?);
                }
                let mut assignments = Vec::with_capacity(m);
                for _ in 0..m {
                    let a = cur.u32(&corrupt)?;
                    if a as usize >= params.n_partitions {
                        return Err(corrupt("assignment out of range".into()));
                    }
                    assignments.push(a);
                }
                let lists = build_lists(&assignments, params.n_partitions);
                IndexData::Partitioned {
                    params,
                    centroids,
                    assignments,
                    lists,
                }
            }
        };
        if cur.off != body.len() {
            return Err(corrupt("trailing bytes".into()));
        }
        Ok(PhraseDb {
            dim,
            ids,
            texts,
            embeddings,
            index,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &std::path::Path) -> Result<PhraseDb> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_bytes(&bytes, &path.display().to_string())
    }
}

struct Cursor<'a> {
    body: &'a [u8],
    off: usize,
}

impl<'a> Cursor<'a> {
    fn bytes(&mut self, n: usize, corrupt: &dyn Fn(String) -> Error) -> Result<&'a [u8]> {
        let end = self
            .off
            .checked_add(n)
            .filter(|&e| e <= self.body.len())
            .ok_or_else(|| corrupt("unexpected end of file".into()))?;
        let s = &self.body[self.off..end];
        self.off = end;
        Ok(s)
    }

    fn u8(&mut self, c: &dyn Fn(String) -> Error) -> Result<u8> {
        Ok(self.bytes(1, c)?[0])
    }

    fn u32(&mut self, c: &dyn Fn(String) -> Error) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4, c)?.try_into().unwrap()))
    }

    fn u64(&mut self, c: &dyn Fn(String) -> Error) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8, c)?.try_into().unwrap()))
    }

    fn f32(&mut self, c: &dyn Fn(String) -> Error) -> Result<f32> {
        Ok(f32::from_le_bytes(self.bytes(4, c)?.try_into().unwrap()))
    }
}

fn build_lists(assignments: &[u32], n_partitions: usize) -> Vec<Vec<u32>> {
    let mut lists = vec![Vec::new(); n_partitions];
    for (idx, &p) in assignments.iter().enumerate() {
        lists[p as usize].push(idx as u32);
    }
    lists
}

/// Seeded spherical k-means: centroids re-normalized each iteration,
/// assignment by max dot product, ties to the lower partition index.
/// Empty clusters keep their previous centroid.
fn spherical_kmeans(
    embeddings: &[f32],
    dim: usize,
    m: usize,
    params: &PartitionParams,
) -> (Vec<f32>, Vec<u32>) {
    let k = params.n_partitions;
    let mut rng = ChaCha8Rng::seed_from_u64(crate::util::splitmix64(params.seed));
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut centroids = vec![0.0f32; k * dim];
    for (c, &idx) in order.iter().take(k).enumerate() {
        centroids[c * dim..(c + 1) * dim].copy_from_slice(&embeddings[idx * dim..(idx + 1) * dim]);
    }
    let mut assignments = vec![0u32; m];
    for _ in 0..params.kmeans_iters {
        for i in 0..m {
            let row = &embeddings[i * dim..(i + 1) * dim];
            let mut best = (f32::NEG_INFINITY, 0u32);
            for c in 0..k {
                let d = dot(row, &centroids[c * dim..(c + 1) * dim]);
                if d > best.0 {
                    best = (d, c as u32);
                }
            }
            assignments[i] = best.1;
        }
        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..m {
            let c = assignments[i] as usize;
            counts[c] += 1;
            for d in 0..dim {
                sums[c * dim + d] += embeddings[i * dim + d] as f64;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let slice = &mut centroids[c * dim..(c + 1) * dim];
            for d in 0..dim {
                slice[d] = (sums[c * dim + d] / counts[c] as f64) as f32;
            }
            if l2_normalize_slice(slice).is_err() {
                // Degenerate mean; fall back to the first member.
                let first = assignments.iter().position(|&a| a as usize == c).unwrap();
                slice.copy_from_slice(&embeddings[first * dim..(first + 1) * dim]);
            }
        }
    }
    // Final assignment against the last centroid update.
    for i in 0..m {
        let row = &embeddings[i * dim..(i + 1) * dim];
        let mut best = (f32::NEG_INFINITY, 0u32);
        for c in 0..k {
            let d = dot(row, &centroids[c * dim..(c + 1) * dim]);
            if d > best.0 {
                best = (d, c as u32);
            }
        }
        assignments[i] = best.1;
    }
    (centroids, assignments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rand_records(n: usize, dim: usize, seed: u64) -> Vec<PhraseRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
                PhraseRecord {
                    id: i as u64,
                    text: format!("phrase {i}"),
                    embedding: Embedding::new(v).unwrap(),
                }
            })
            .collect()
    }

    /// Independent double-loop oracle over raw records.
    fn naive_top_k(
        records: &[PhraseRecord],
        query: &Embedding,
        k: usize,
    ) -> Vec<(u64, f32)> {
        let qn = query.norm();
        let q: Vec<f32> = query
            .values()
            .iter()
            .map(|&v| (v as f64 / qn) as f32)
            .collect();
        let mut scored: Vec<(u64, f32)> = records
            .iter()
            .map(|r| {
                let rn = r.embedding.norm();
                let rv: Vec<f32> = r
                    .embedding
                    .values()
                    .iter()
                    .map(|&v| (v as f64 / rn) as f32)
                    .collect();
                let mut s = 0.0f32;
                for (a, b) in q.iter().zip(&rv) {
                    s += a * b;
                }
                (r.id, s)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }

    #[test]
    fn single_record_always_returned() {
        let recs = rand_records(1, 8, 1);
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let q = Embedding::new(vec![1.0; 8]).unwrap();
        let hits = db.query_top_k(&q, 3).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0.id, 0);
    }

    #[test]
    fn stored_embedding_queries_itself_at_sim_one() {
        let recs = rand_records(50, 16, 2);
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let hits = db.query_top_k(&recs[17].embedding, 1).unwrap();
        assert_eq!(hits[0].0.id, 17);
        assert!((hits[0].1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn k_larger_than_m_truncates() {
        let recs = rand_records(5, 8, 3);
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let q = Embedding::new(vec![1.0; 8]).unwrap();
        assert_eq!(db.query_top_k(&q, 100).unwrap().len(), 5);
    }

    #[test]
    fn exact_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let recs = rand_records(512, 16, 4);
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        for _ in 0..100 {
            let q =
                Embedding::new((0..16).map(|_| rng.gen_range(-1.0f32..1.0)).collect()).unwrap();
            let got = db.query_top_k(&q, 5).unwrap();
            let expected = naive_top_k(&recs, &q, 5);
            let got_ids: Vec<u64> = got.iter().map(|(r, _)| r.id).collect();
            let exp_ids: Vec<u64> = expected.iter().map(|(id, _)| *id).collect();
            assert_eq!(got_ids, exp_ids);
        }
    }

    #[test]
    fn tie_break_by_ascending_id() {
        let e = Embedding::new(vec![1.0, 0.0]).unwrap();
        let recs: Vec<PhraseRecord> = [5u64, 2, 9]
            .iter()
            .map(|&id| PhraseRecord {
                id,
                text: format!("t{id}"),
                embedding: e.clone(),
            })
            .collect();
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let hits = db.query_top_k(&e, 3).unwrap();
        let ids: Vec<u64> = hits.iter().map(|(r, _)| r.id).collect();
        assert_eq!(ids, vec![2, 5, 9]);
    }

    #[test]
    fn single_partition_equals_exact() {
        let recs = rand_records(200, 8, 5);
        let exact = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let part = PhraseDb::build(
            &recs,
            &IndexKind::Partitioned(PartitionParams {
                n_partitions: 1,
                n_probe: 1,
                kmeans_iters: 3,
                seed: 7,
            }),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let q = Embedding::new((0..8).map(|_| rng.gen_range(-1.0f32..1.0)).collect()).unwrap();
            let a: Vec<u64> = exact
                .query_top_k(&q, 3)
                .unwrap()
                .iter()
                .map(|(r, _)| r.id)
                .collect();
            let b: Vec<u64> = part
                .query_top_k(&q, 3)
                .unwrap()
                .iter()
                .map(|(r, _)| r.id)
                .collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let mut recs = rand_records(3, 8, 8);
        recs[2].id = recs[0].id;
        assert!(matches!(
            PhraseDb::build(&recs, &IndexKind::Exact),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn dim_mismatch_rejected() {
        let mut recs = rand_records(3, 8, 9);
        recs[1].embedding = Embedding::new(vec![1.0; 4]).unwrap();
        assert!(PhraseDb::build(&recs, &IndexKind::Exact).is_err());
    }

    #[test]
    fn too_many_partitions_rejected() {
        let recs = rand_records(4, 8, 10);
        let kind = IndexKind::Partitioned(PartitionParams {
            n_partitions: 10,
            n_probe: 1,
            kmeans_iters: 2,
            seed: 1,
        });
        assert!(PhraseDb::build(&recs, &kind).is_err());
    }

    #[test]
    fn zero_norm_query_rejected() {
        let recs = rand_records(3, 8, 11);
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let q = Embedding::new(vec![0.0; 8]).unwrap();
        assert!(matches!(
            db.query_top_k(&q, 1),
            Err(Error::ZeroNorm { .. })
        ));
    }

    #[test]
    fn save_load_roundtrip_byte_identical() {
        for kind in [
            IndexKind::Exact,
            IndexKind::Partitioned(PartitionParams {
                n_partitions: 8,
                n_probe: 2,
                kmeans_iters: 5,
                seed: 3,
            }),
        ] {
            let recs = rand_records(100, 8, 12);
            let db = PhraseDb::build(&recs, &kind).unwrap();
            let bytes = db.to_bytes();
            let back = PhraseDb::from_bytes(&bytes, "mem").unwrap();
            assert_eq!(db, back);
            assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn corrupt_files_rejected() {
        let recs = rand_records(10, 8, 13);
        let db = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let bytes = db.to_bytes();

        let mut truncated = bytes.clone();
        truncated.truncate(bytes.len() / 2);
        assert!(matches!(
            PhraseDb::from_bytes(&truncated, "mem"),
            Err(Error::CorruptFile { .. })
        ));

        let mut flipped = bytes.clone();
        let mid = bytes.len() / 2;
        flipped[mid] ^= 0x01;
        assert!(matches!(
            PhraseDb::from_bytes(&flipped, "mem"),
            Err(Error::CorruptFile { .. })
        ));

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            PhraseDb::from_bytes(&bad_magic, "mem"),
            Err(Error::CorruptFile { .. })
        ));
    }

    #[test]
    fn partitioned_recall_on_random_data() {
        // Smaller sibling of the acceptance fixture check.
        let recs = rand_records(2000, 16, 14);
        let exact = PhraseDb::build(&recs, &IndexKind::Exact).unwrap();
        let part = PhraseDb::build(
            &recs,
            &IndexKind::Partitioned(PartitionParams {
                n_partitions: 32,
                n_probe: 8,
                kmeans_iters: 10,
                seed: 15,
            }),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut hits = 0;
        let total = 200;
        for _ in 0..total {
            let q =
                Embedding::new((0..16).map(|_| rng.gen_range(-1.0f32..1.0)).collect()).unwrap();
            let a = exact.query_top_k(&q, 1).unwrap()[0].0.id;
            let b = part.query_top_k(&q, 1).unwrap()[0].0.id;
            if a == b {
                hits += 1;
            }
        }
        let recall = hits as f64 / total as f64;
        assert!(recall >= 0.9, "recall@1 = {recall}");
    }
}
