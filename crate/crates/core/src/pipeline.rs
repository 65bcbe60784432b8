//! File-level commands tying the modules together: corpus generation, db
//! build, training, single-utterance correction, evaluation, the delta sweep,
//! and the scaling study. Each command writes its declared outputs plus a run
//! manifest (config snapshot and input checksums) and never mutates inputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    case_from_record, generate_corpus, read_jsonl, train_pairs_pooled, write_jsonl, CaseRecord,
    CorpusConfig, PhraseRow, TrainPairRecord,
};
use crate::corrector::{CorrectionConfig, DecisionRecord};
use crate::encoder::{train, EncoderHead, TrainConfig};
use crate::eval::{
    build_phrase_records, run_variant, scaling_study, sweep_delta, render_table, EvalCase,
    EvalContext, ScalingTable, Split, SweepConfig, SweepResult, Variant,
};
use crate::index::{IndexKind, PartitionParams, PhraseDb};
use crate::synth::EmbedderConfig;
use crate::util::fnv1a64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Ci,
    Full,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Profile::Ci),
            "full" => Ok(Profile::Full),
            other => Err(Error::InvalidConfig(format!("unknown profile '{other}'"))),
        }
    }
}

/// Which embedding space a database holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbSpace {
    Pool,
    Ret,
}

impl std::str::FromStr for DbSpace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pool" => Ok(DbSpace::Pool),
            "ret" => Ok(DbSpace::Ret),
            other => Err(Error::InvalidConfig(format!("unknown db space '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub profile: Profile,
    pub threads: usize,
    pub embedder: EmbedderConfig,
    pub corpus: CorpusConfig,
    pub train: TrainConfig,
    pub hidden: usize,
    pub dropout: f32,
    pub correction: CorrectionConfig,
    pub sweep: SweepConfig,
    pub partition: PartitionParams,
    pub m_grid: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::for_profile(Profile::Ci)
    }
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Ci => RunConfig {
                profile,
                threads: 1,
                embedder: EmbedderConfig::default(),
                corpus: CorpusConfig::default(),
                train: TrainConfig {
                    batch_size: 32,
                    steps: 5_000,
                    lr: 0.01,
                    momentum: 0.9,
                    warmup_steps: 500,
                    seed: 42,
                },
                hidden: 128,
                dropout: 0.05,
                correction: CorrectionConfig::default(),
                sweep: SweepConfig::default(),
                partition: PartitionParams::default(),
                m_grid: vec![1_000, 2_000, 4_000, 8_000],
            },
            Profile::Full => {
                let mut cfg = RunConfig::for_profile(Profile::Ci);
                cfg.profile = Profile::Full;
                cfg.corpus.pool_size = 128_000;
                cfg.corpus.anti_size = 4_000;
                cfg.corpus.ic_prefix = 8_000;
                cfg.corpus.n_train_pairs = 32_000;
                cfg.train.steps = 100_000;
                cfg.train.warmup_steps = 10_000;
                cfg.train.batch_size = 128;
                cfg.sweep.dev_m = 8_000;
                cfg.m_grid = vec![8_000, 16_000, 32_000, 64_000, 128_000];
                cfg
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.embedder.validate()?;
        self.corpus.validate()?;
        self.train.validate()?;
        self.correction.validate()?;
        self.sweep.validate()?;
        self.partition.validate()?;
        if self.threads == 0 {
            return Err(Error::InvalidConfig("threads must be >= 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidConfig("hidden size must be >= 1".into()));
        }
        if self.m_grid.is_empty() {
            return Err(Error::EmptyInput("m_grid".into()));
        }
        Ok(())
    }
}

/// Run `f` inside a rayon pool capped at `threads` workers. All parallel
/// sections collect in input order, so the result is thread-count independent.
pub fn with_thread_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    tool_version: &'a str,
    config: &'a RunConfig,
    inputs: BTreeMap<String, String>,
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    cfg: &RunConfig,
    input_paths: &[&Path],
) -> Result<()> {
    let mut inputs = BTreeMap::new();
    for p in input_paths {
        let bytes = std::fs::read(p).map_err(|e| Error::io(p.display().to_string(), e))?;
        inputs.insert(
            p.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            format!("{:016x}", fnv1a64(&bytes)),
        );
    }
    let manifest = Manifest {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        inputs,
    };
    let path = out_dir.join(format!("{command}.manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

pub struct CorpusPaths {
    pub pool: PathBuf,
    pub train: PathBuf,
    pub dev: PathBuf,
    pub eval: PathBuf,
}

impl CorpusPaths {
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            pool: dir.join("pool.jsonl"),
            train: dir.join("train.jsonl"),
            dev: dir.join("dev.jsonl"),
            eval: dir.join("eval.jsonl"),
        }
    }
}

/// Generate the phrase pool, training pairs, and dev/eval case files.
pub fn cmd_gen_corpus(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let corpus = generate_corpus(&cfg.embedder, &cfg.corpus)?;
    let paths = CorpusPaths::in_dir(out_dir);
    let pool_rows: Vec<PhraseRow> = corpus
        .pool
        .iter()
        .enumerate()
        .map(|(i, text)| PhraseRow {
            id: i as u64,
            text: text.clone(),
        })
        .collect();
    write_jsonl(&paths.pool, &pool_rows)?;
    write_jsonl(&paths.train, &corpus.train_pairs)?;
    write_jsonl(&paths.dev, &corpus.dev_cases)?;
    write_jsonl(&paths.eval, &corpus.eval_cases)?;

    // Post-write split invariants.
    let pool_set: std::collections::HashSet<String> = corpus
        .pool
        .iter()
        .map(|p| crate::synth::normalize_text(p))
        .collect();
    for case in corpus.dev_cases.iter().chain(&corpus.eval_cases) {
        let in_pool = pool_set.contains(&case.truth);
        match case.split {
            Split::Ic if !in_pool => {
                return Err(Error::Invalid(format!(
                    "ic truth missing from pool: '{}'",
                    case.truth
                )))
            }
            Split::Anti if in_pool => {
                return Err(Error::Invalid(format!(
                    "anti truth present in pool: '{}'",
                    case.truth
                )))
            }
            _ => {}
        }
    }
    write_manifest(out_dir, "gen-corpus", cfg, &[])?;
    Ok(())
}

fn load_pool(corpus_dir: &Path) -> Result<Vec<String>> {
    let rows: Vec<PhraseRow> = read_jsonl(&CorpusPaths::in_dir(corpus_dir).pool)?;
    Ok(rows.into_iter().map(|r| r.text).collect())
}

fn load_cases(cfg: &RunConfig, path: &Path) -> Result<Vec<EvalCase>> {
    let rows: Vec<CaseRecord> = read_jsonl(path)?;
    rows.iter()
        .map(|r| case_from_record(&cfg.embedder, r, cfg.corpus.truth_deep_rank_frac))
        .collect()
}

/// Train the retrieval head on the corpus pairs; writes the checkpoint and the
/// per-step loss curve.
pub fn cmd_train(cfg: &RunConfig, corpus_dir: &Path, out_dir: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let train_path = CorpusPaths::in_dir(corpus_dir).train;
    let pairs_raw: Vec<TrainPairRecord> = read_jsonl(&train_path)?;
    let pairs = train_pairs_pooled(&cfg.embedder, &pairs_raw)?;
    // Hidden widths that are even multiples of dim get the near-identity start
    // (the trained head then begins at mean-pool retrieval quality); other
    // widths fall back to the scaled-uniform random init.
    let head = if cfg.hidden.is_multiple_of(2 * cfg.embedder.dim) {
        EncoderHead::new_near_identity(cfg.embedder.dim, cfg.hidden, cfg.dropout, cfg.train.seed)?
    } else {
        EncoderHead::new_random(cfg.embedder.dim, cfg.hidden, cfg.dropout, cfg.train.seed)
    };
    let (trained, losses) = train(&head, &pairs, &cfg.train)?;
    let ckpt_path = out_dir.join("encoder.ckpt");
    trained.save(&ckpt_path)?;
    let curve_path = out_dir.join("loss_curve.json");
    let mut text = serde_json::to_string(&losses)?;
    text.push('\n');
    std::fs::write(&curve_path, text).map_err(|e| Error::io(curve_path.display().to_string(), e))?;
    write_manifest(out_dir, "train", cfg, &[&train_path])?;
    Ok(ckpt_path)
}

/// Build a phrase database from the first `m` pool phrases (all by default).
pub fn cmd_build_db(
    cfg: &RunConfig,
    corpus_dir: &Path,
    space: DbSpace,
    checkpoint: Option<&Path>,
    m: Option<usize>,
    kind: &IndexKind,
    out_dir: &Path,
) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let pool = load_pool(corpus_dir)?;
    let m = m.unwrap_or(pool.len());
    if m == 0 || m > pool.len() {
        return Err(Error::InvalidConfig(format!(
            "M = {m} exceeds phrase pool size {}",
            pool.len()
        )));
    }
    let head = match (space, checkpoint) {
        (DbSpace::Ret, Some(p)) => {
            let head = EncoderHead::load(p)?;
            if head.dim_in() != cfg.embedder.dim {
                return Err(Error::DimMismatch {
                    left: head.dim_in(),
                    right: cfg.embedder.dim,
                });
            }
            Some(head)
        }
        (DbSpace::Ret, None) => {
            return Err(Error::InvalidConfig(
                "ret-space db requires a checkpoint".into(),
            ))
        }
        (DbSpace::Pool, _) => None,
    };
    let records = with_thread_pool(cfg.threads, || {
        build_phrase_records(&pool[..m], &cfg.embedder, head.as_ref())
    })?;
    let db = PhraseDb::build(&records, kind)?;
    let name = match space {
        DbSpace::Pool => "db_pool.emdb",
        DbSpace::Ret => "db_ret.emdb",
    };
    let db_path = out_dir.join(name);
    db.save(&db_path)?;
    let pool_path = CorpusPaths::in_dir(corpus_dir).pool;
    write_manifest(out_dir, "build-db", cfg, &[&pool_path])?;
    Ok(db_path)
}

/// Correct a single utterance from a case file, printing the decision record.
pub fn cmd_correct(
    cfg: &RunConfig,
    corpus_dir: &Path,
    db_path: &Path,
    checkpoint: Option<&Path>,
    utterance_id: u64,
    delta: f64,
) -> Result<DecisionRecord> {
    cfg.validate()?;
    let db = PhraseDb::load(db_path)?;
    let head = checkpoint.map(EncoderHead::load).transpose()?;
    if let Some(h) = &head {
        if h.dim_out() != db.dim() {
            return Err(Error::DimMismatch {
                left: h.dim_out(),
                right: db.dim(),
            });
        }
    }
    let paths = CorpusPaths::in_dir(corpus_dir);
    let mut rows: Vec<CaseRecord> = read_jsonl(&paths.eval)?;
    rows.extend(read_jsonl::<CaseRecord>(&paths.dev)?);
    let record = rows
        .iter()
        .find(|r| r.id == utterance_id)
        .ok_or_else(|| Error::Invalid(format!("utterance id {utterance_id} not found")))?;
    let case = case_from_record(&cfg.embedder, record, cfg.corpus.truth_deep_rank_frac)?;
    let correction = CorrectionConfig {
        delta,
        k_retrieve: cfg.correction.k_retrieve,
    };
    let (list, decision) = crate::corrector::correct_utterance(
        &db,
        head.as_ref(),
        &case.utterance,
        None,
        &case.nbest,
        &correction,
    )?;
    let _ = list;
    Ok(decision)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluateResults {
    pub m: u64,
    /// variant -> split -> WER
    pub wer: BTreeMap<String, BTreeMap<String, f64>>,
}

fn build_eval_dbs(
    cfg: &RunConfig,
    pool: &[String],
    m: usize,
    head: &EncoderHead,
) -> Result<(PhraseDb, PhraseDb)> {
    let recs_pool = build_phrase_records(&pool[..m], &cfg.embedder, None)?;
    let recs_ret = build_phrase_records(&pool[..m], &cfg.embedder, Some(head))?;
    Ok((
        PhraseDb::build(&recs_pool, &IndexKind::Exact)?,
        PhraseDb::build(&recs_ret, &IndexKind::Exact)?,
    ))
}

/// Evaluate all four variants on the eval split with databases built at `m`
/// (default: the largest grid value). Per-variant deltas come from a sweep
/// results file when given, otherwise from the configured correction delta.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    corpus_dir: &Path,
    checkpoint: &Path,
    sweep_results: Option<&Path>,
    m: Option<usize>,
    out_dir: &Path,
) -> Result<EvaluateResults> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let head = EncoderHead::load(checkpoint)?;
    if head.dim_in() != cfg.embedder.dim {
        return Err(Error::DimMismatch {
            left: head.dim_in(),
            right: cfg.embedder.dim,
        });
    }
    let pool = load_pool(corpus_dir)?;
    let m = m.unwrap_or_else(|| *cfg.m_grid.iter().max().unwrap());
    if m == 0 || m > pool.len() {
        return Err(Error::InvalidConfig(format!(
            "M = {m} exceeds phrase pool size {}",
            pool.len()
        )));
    }
    let deltas = load_deltas(cfg, sweep_results)?;
    let paths = CorpusPaths::in_dir(corpus_dir);
    let cases = load_cases(cfg, &paths.eval)?;

    let results = with_thread_pool(cfg.threads, || {
        let (db_pool, db_ret) = build_eval_dbs(cfg, &pool, m, &head)?;
        let ctx = EvalContext {
            embedder: &cfg.embedder,
            db_pool: Some(&db_pool),
            db_ret: Some(&db_ret),
            head: Some(&head),
        };
        let mut wer_map: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for variant in Variant::ALL {
            let delta = *deltas.get(&variant).unwrap_or(&cfg.correction.delta);
            let res = run_variant(variant, &cases, &ctx, delta)?;
            let mut by_split = BTreeMap::new();
            by_split.insert("ic".to_string(), res.wer_ic);
            by_split.insert("anti".to_string(), res.wer_anti);
            wer_map.insert(variant.name().to_string(), by_split);
            let dec_path = out_dir.join(format!("decisions_{}.jsonl", variant.name()));
            write_jsonl(&dec_path, &res.decisions)?;
        }
        Ok(EvaluateResults { m: m as u64, wer: wer_map })
    })?;

    let results_path = out_dir.join("results.json");
    let mut text = serde_json::to_string_pretty(&results)?;
    text.push('\n');
    std::fs::write(&results_path, text)
        .map_err(|e| Error::io(results_path.display().to_string(), e))?;
    write_manifest(
        out_dir,
        "evaluate",
        cfg,
        &[&paths.pool, &paths.eval, checkpoint],
    )?;
    Ok(results)
}

fn load_deltas(
    cfg: &RunConfig,
    sweep_results: Option<&Path>,
) -> Result<BTreeMap<Variant, f64>> {
    let mut deltas = BTreeMap::new();
    if let Some(path) = sweep_results {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let by_name: BTreeMap<String, SweepResult> = serde_json::from_str(&text)?;
        for (name, res) in by_name {
            deltas.insert(name.parse::<Variant>()?, res.delta_star);
        }
    } else {
        for v in Variant::ALL {
            deltas.insert(v, cfg.correction.delta);
        }
        deltas.insert(Variant::Base, 0.0);
    }
    Ok(deltas)
}

/// Sweep the rewriting aggressiveness per variant on the dev split at
/// `sweep.dev_m`, writing sweep.json (delta_star plus the objective curve).
pub fn cmd_sweep(
    cfg: &RunConfig,
    corpus_dir: &Path,
    checkpoint: &Path,
    out_dir: &Path,
) -> Result<BTreeMap<String, SweepResult>> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let head = EncoderHead::load(checkpoint)?;
    let pool = load_pool(corpus_dir)?;
    let m = cfg.sweep.dev_m;
    if m == 0 || m > pool.len() {
        return Err(Error::InvalidConfig(format!(
            "dev_m = {m} exceeds phrase pool size {}",
            pool.len()
        )));
    }
    let paths = CorpusPaths::in_dir(corpus_dir);
    let dev_cases = load_cases(cfg, &paths.dev)?;
    if !dev_cases.iter().any(|c| c.split == Split::Ic)
        || !dev_cases.iter().any(|c| c.split == Split::Anti)
    {
        return Err(Error::Invalid("dev split must contain both ic and anti cases".into()));
    }

    let results = with_thread_pool(cfg.threads, || {
        let (db_pool, db_ret) = build_eval_dbs(cfg, &pool, m, &head)?;
        let ctx = EvalContext {
            embedder: &cfg.embedder,
            db_pool: Some(&db_pool),
            db_ret: Some(&db_ret),
            head: Some(&head),
        };
        let mut out = BTreeMap::new();
        for variant in Variant::ALL {
            let res = sweep_delta(variant, &dev_cases, &ctx, &cfg.sweep)?;
            out.insert(variant.name().to_string(), res);
        }
        Ok(out)
    })?;

    let path = out_dir.join("sweep.json");
    let mut text = serde_json::to_string_pretty(&results)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_manifest(out_dir, "sweep", cfg, &[&paths.pool, &paths.dev, checkpoint])?;
    Ok(results)
}

/// Database-size scaling study over `m_grid` with per-variant deltas fixed
/// from the dev sweep; writes machine- and human-readable tables.
pub fn cmd_scaling(
    cfg: &RunConfig,
    corpus_dir: &Path,
    checkpoint: &Path,
    sweep_results: Option<&Path>,
    out_dir: &Path,
) -> Result<ScalingTable> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let head = EncoderHead::load(checkpoint)?;
    let pool = load_pool(corpus_dir)?;
    let deltas = load_deltas(cfg, sweep_results)?;
    let paths = CorpusPaths::in_dir(corpus_dir);
    let cases = load_cases(cfg, &paths.eval)?;

    let table = with_thread_pool(cfg.threads, || {
        scaling_study(
            &Variant::ALL,
            &cases,
            &pool,
            &head,
            &cfg.embedder,
            &deltas,
            &cfg.m_grid,
        )
    })?;

    let json_path = out_dir.join("scaling.json");
    let mut text = serde_json::to_string_pretty(&table)?;
    text.push('\n');
    std::fs::write(&json_path, text).map_err(|e| Error::io(json_path.display().to_string(), e))?;
    let txt_path = out_dir.join("scaling.txt");
    std::fs::write(&txt_path, render_table(&table))
        .map_err(|e| Error::io(txt_path.display().to_string(), e))?;
    write_manifest(out_dir, "scaling", cfg, &[&paths.pool, &paths.eval, checkpoint])?;
    Ok(table)
}

/// Convenience wrapper for tests and smoke runs: corpus, training, sweep, and
/// scaling into one directory tree.
pub fn run_full_pipeline(cfg: &RunConfig, out_dir: &Path) -> Result<ScalingTable> {
    let corpus_dir = out_dir.join("corpus");
    let model_dir = out_dir.join("model");
    let results_dir = out_dir.join("results");
    cmd_gen_corpus(cfg, &corpus_dir)?;
    let ckpt = cmd_train(cfg, &corpus_dir, &model_dir)?;
    cmd_sweep(cfg, &corpus_dir, &ckpt, &results_dir)?;
    cmd_scaling(
        cfg,
        &corpus_dir,
        &ckpt,
        Some(&results_dir.join("sweep.json")),
        &results_dir,
    )
}
