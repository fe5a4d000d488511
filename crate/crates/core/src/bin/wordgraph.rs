use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wordgraph::config::{RunConfig, TokenizerMode};
use wordgraph::pipeline::{self, RETRIEVAL_FILE};
use wordgraph::{Error, Result};

#[derive(Parser)]
#[command(name = "wordgraph", version, about = "Seed-word keyword expansion, retrieval, topics and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search the embedding graph from the seed words and write keywords + graph.
    Expand {
        #[command(flatten)]
        common: Common,
    },
    /// Classify corpus documents by keyword containment.
    Retrieve {
        #[command(flatten)]
        common: Common,
        /// Keywords file (expand report, JSON array, or one per line);
        /// defaults to <out>/keywords.json.
        #[arg(long)]
        keywords: Option<PathBuf>,
    },
    /// Fit LDA over the retrieved documents.
    Topics {
        #[command(flatten)]
        common: Common,
        /// Retrieval jsonl; defaults to <out>/retrieval.jsonl.
        #[arg(long)]
        retrieval: Option<PathBuf>,
    },
    /// Score retrieved documents against gold labels.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        retrieval: Option<PathBuf>,
    },
    /// Run expand, retrieve, topics and eval, and write a manifest.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated seed words.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<String>>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    context_mix: Option<f64>,
    #[arg(long)]
    num_topics: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    lda_seed: Option<u64>,
    #[arg(long)]
    seed_text_count: Option<usize>,
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// `simple` or `wordpiece`.
    #[arg(long)]
    tokenizer: Option<String>,
    #[arg(long)]
    wordpiece_vocab: Option<PathBuf>,
    /// Comma-separated gold labels counted as positive.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<String>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.embeddings {
            cfg.embeddings = Some(absolute(p)?);
        }
        if let Some(p) = self.corpus {
            cfg.corpus = Some(absolute(p)?);
        }
        if let Some(p) = self.wordpiece_vocab {
            cfg.wordpiece_vocab = Some(absolute(p)?);
        }
        if let Some(p) = self.out {
            cfg.output_dir = absolute(p)?;
        }
        if let Some(s) = self.seeds {
            cfg.seed_words = s.into_iter().map(|w| w.trim().to_string()).filter(|w| !w.is_empty()).collect();
        }
        if let Some(t) = self.tokenizer {
            cfg.tokenizer = match t.as_str() {
                "simple" => TokenizerMode::Simple,
                "wordpiece" => TokenizerMode::Wordpiece,
                other => return Err(Error::Config(format!("unknown tokenizer {other:?}"))),
            };
        }
        if let Some(v) = self.threshold {
            cfg.search.min_sim_thresh = v;
        }
        if let Some(v) = self.max_depth {
            cfg.search.max_depth = v;
        }
        if let Some(v) = self.top_k {
            cfg.search.top_k = v;
        }
        if let Some(v) = self.context_mix {
            cfg.search.context_mix = v;
        }
        if let Some(v) = self.num_topics {
            cfg.lda.num_topics = v;
        }
        if let Some(v) = self.sweeps {
            cfg.lda.sweeps = v;
        }
        if let Some(v) = self.lda_seed {
            cfg.lda.rng_seed = v;
        }
        if let Some(v) = self.seed_text_count {
            cfg.seed_text_count = v;
        }
        if let Some(v) = self.shuffle_seed {
            cfg.shuffle_seed = Some(v);
        }
        if let Some(t) = self.targets {
            cfg.eval.target_labels = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn absolute(p: PathBuf) -> Result<PathBuf> {
    if p.is_absolute() {
        return Ok(p);
    }
    let cwd = std::env::current_dir().map_err(|e| Error::Config(format!("cannot read working directory: {e}")))?;
    Ok(cwd.join(p))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Expand { common } => {
            let cfg = common.into_config()?;
            print_paths(&pipeline::cmd_expand(&cfg)?);
        }
        Command::Retrieve { common, keywords } => {
            let cfg = common.into_config()?;
            let keywords = keywords.unwrap_or_else(|| cfg.out_dir().join(pipeline::KEYWORDS_FILE));
            let (result, paths) = pipeline::cmd_retrieve(&cfg, &keywords)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("{} of {} documents retrieved", result.n_positive(), result.n_docs);
            print_paths(&paths);
        }
        Command::Topics { common, retrieval } => {
            let cfg = common.into_config()?;
            let retrieval = retrieval.unwrap_or_else(|| cfg.out_dir().join(RETRIEVAL_FILE));
            let (_, paths) = pipeline::cmd_topics(&cfg, &retrieval)?;
            print_paths(&paths);
        }
        Command::Eval { common, retrieval } => {
            let cfg = common.into_config()?;
            let retrieval = retrieval.unwrap_or_else(|| cfg.out_dir().join(RETRIEVAL_FILE));
            let (out, paths) = pipeline::cmd_eval(&cfg, &retrieval)?;
            eprintln!(
                "precision {:.3}  recall {:.3}  f1 {:.3}",
                out.report.precision, out.report.recall, out.report.f1
            );
            print_paths(&paths);
        }
        Command::Pipeline { common } => {
            let cfg = common.into_config()?;
            let (manifest, path) = pipeline::cmd_pipeline(&cfg)?;
            for n in &manifest.notices {
                eprintln!("notice: {n}");
            }
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
