//! Command-line surface for the retrieval-correction pipeline.
//!
//! Option precedence is flags > environment variables (RETCOR_SEED,
//! RETCOR_PROFILE, RETCOR_THREADS) > config file > built-in defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use retcor::index::IndexKind;
use retcor::pipeline::{
    cmd_build_db, cmd_correct, cmd_evaluate, cmd_gen_corpus, cmd_scaling, cmd_sweep, cmd_train,
    DbSpace, Profile, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "retcor",
    version,
    about = "Retrieval-based ASR hypothesis correction pipeline"
)]
struct Cli {
    /// JSON config file; omitted fields fall back to profile defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for corpus generation, training, and noise streams.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Runtime profile: ci (desk scale) or full.
    #[arg(long, global = true)]
    profile: Option<String>,

    /// Worker thread cap; 1 guarantees the bit-exact serial path (parallel
    /// runs produce the same bytes, just faster).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the phrase pool, training pairs, and dev/eval case files.
    GenCorpus,
    /// Build a phrase embedding database from the corpus pool.
    BuildDb {
        /// Corpus directory (output of gen-corpus).
        #[arg(long)]
        corpus: PathBuf,
        /// Embedding space: pool (mean-pooled text) or ret (head-transformed).
        #[arg(long, default_value = "ret")]
        space: String,
        /// Encoder checkpoint; required for the ret space.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Number of pool phrases to index (default: all).
        #[arg(long)]
        m: Option<usize>,
        /// Use the partitioned (IVF-style) index instead of exact search.
        #[arg(long)]
        partitioned: bool,
    },
    /// Train the retrieval encoder head on the corpus training pairs.
    Train {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Correct a single utterance from the corpus case files.
    Correct {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Utterance id from dev.jsonl or eval.jsonl.
        #[arg(long)]
        id: u64,
        /// Rewriting aggressiveness in [0, 1].
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
    },
    /// Evaluate all variants on the eval split.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// sweep.json with per-variant deltas (default: config delta).
        #[arg(long)]
        deltas: Option<PathBuf>,
        /// Database size (default: largest m_grid entry).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Sweep the rewriting aggressiveness per variant on the dev split.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Database-size scaling study over the configured M grid.
    Scaling {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// sweep.json with per-variant deltas (default: config delta).
        #[arg(long)]
        deltas: Option<PathBuf>,
    },
}

fn effective_config(cli: &Cli) -> retcor::Result<RunConfig> {
    // config file (or defaults), then env, then flags.
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Ok(p) = std::env::var("RETCOR_PROFILE") {
        let profile: Profile = p.parse()?;
        if cli.config.is_none() {
            cfg = RunConfig::for_profile(profile);
        } else {
            cfg.profile = profile;
        }
    }
    if let Ok(s) = std::env::var("RETCOR_SEED") {
        let seed: u64 = s
            .parse()
            .map_err(|_| retcor::Error::InvalidConfig(format!("bad RETCOR_SEED '{s}'")))?;
        cfg.embedder.seed = seed;
        cfg.train.seed = seed;
    }
    if let Ok(t) = std::env::var("RETCOR_THREADS") {
        cfg.threads = t
            .parse()
            .map_err(|_| retcor::Error::InvalidConfig(format!("bad RETCOR_THREADS '{t}'")))?;
    }
    if let Some(p) = &cli.profile {
        let profile: Profile = p.parse()?;
        if cli.config.is_none() {
            cfg = RunConfig::for_profile(profile);
        } else {
            cfg.profile = profile;
        }
    }
    if let Some(seed) = cli.seed {
        cfg.embedder.seed = seed;
        cfg.train.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> retcor::Result<()> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::GenCorpus => {
            cmd_gen_corpus(&cfg, &cli.out)?;
            println!("corpus written to {}", cli.out.display());
        }
        Command::BuildDb {
            corpus,
            space,
            checkpoint,
            m,
            partitioned,
        } => {
            let space: DbSpace = space.parse()?;
            let kind = if *partitioned {
                IndexKind::Partitioned(cfg.partition.clone())
            } else {
                IndexKind::Exact
            };
            let path = cmd_build_db(
                &cfg,
                corpus,
                space,
                checkpoint.as_deref(),
                *m,
                &kind,
                &cli.out,
            )?;
            println!("db written to {}", path.display());
        }
        Command::Train { corpus } => {
            let path = cmd_train(&cfg, corpus, &cli.out)?;
            println!("checkpoint written to {}", path.display());
        }
        Command::Correct {
            corpus,
            db,
            checkpoint,
            id,
            delta,
        } => {
            let decision = cmd_correct(&cfg, corpus, db, checkpoint.as_deref(), *id, *delta)?;
            println!("{}", serde_json::to_string(&decision)?);
        }
        Command::Evaluate {
            corpus,
            checkpoint,
            deltas,
            m,
        } => {
            let results = cmd_evaluate(&cfg, corpus, checkpoint, deltas.as_deref(), *m, &cli.out)?;
            println!("{}", serde_json::to_string_pretty(&results)?);
        }
        Command::Sweep { corpus, checkpoint } => {
            let results = cmd_sweep(&cfg, corpus, checkpoint, &cli.out)?;
            for (variant, res) in &results {
                println!("{variant}: delta* = {}", res.delta_star);
            }
        }
        Command::Scaling {
            corpus,
            checkpoint,
            deltas,
        } => {
            let table = cmd_scaling(&cfg, corpus, checkpoint, deltas.as_deref(), &cli.out)?;
            print!("{}", retcor::eval::render_table(&table));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
