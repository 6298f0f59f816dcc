mod commands;

use std::net::{IpAddr, Ipv4Addr};
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "topicseg", version, about = "Annotate and segment search sessions by topic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct StopWordArgs {
    /// English stop words, one per line (replaces the built-in list)
    #[arg(long)]
    pub stopwords_en: Option<PathBuf>,
    /// German stop words, one per line (replaces the built-in list)
    #[arg(long)]
    pub stopwords_de: Option<PathBuf>,
}

#[derive(Args)]
pub struct KnowledgeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub thesaurus: PathBuf,
    #[arg(long)]
    pub classification: PathBuf,
    #[arg(long)]
    pub crosswalk: PathBuf,
    /// Free-term model from `build-str`; derived from the corpus when absent
    #[arg(long)]
    pub str_model: Option<PathBuf>,
    /// Keyword-to-category table from `build-lookup`; derived from the corpus when absent
    #[arg(long)]
    pub lookup: Option<PathBuf>,
    #[command(flatten)]
    pub stop_words: StopWordArgs,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Html,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum IccArg {
    Single,
    Average,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the keyword-to-category table from the corpus
    BuildLookup {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        thesaurus: PathBuf,
        /// Checked against the table when given
        #[arg(long)]
        classification: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive the free-term-to-descriptor model from the corpus
    BuildStr {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        thesaurus: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        #[command(flatten)]
        stop_words: StopWordArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a transaction log into sessions, filter them, and optionally sample
    Sessionize {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        timeout_min: i64,
        #[arg(long, default_value_t = 2)]
        min_actions: usize,
        #[arg(long, default_value_t = 30)]
        max_actions: usize,
        #[arg(long, default_value_t = 120)]
        max_duration_min: i64,
        /// Draw an evaluation set of this many sessions
        #[arg(long)]
        sample: Option<usize>,
        /// Sessions per action count in the sample
        #[arg(long, default_value_t = 4)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Annotate sessions with keywords, categories and session topics
    Annotate {
        #[command(flatten)]
        knowledge: KnowledgeArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
    },
    /// Assign topic numbers to annotated sessions
    Segment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        stop_words: StopWordArgs,
    },
    /// Print one segmented session as a table
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        session: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        classification: Option<PathBuf>,
    },
    /// Summarize assessor ratings and compare segmentations
    Evaluate {
        #[arg(long)]
        ratings: Option<PathBuf>,
        #[arg(long, requires = "predicted")]
        gold: Option<PathBuf>,
        #[arg(long, requires = "gold")]
        predicted: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "average")]
        icc: IccArg,
        /// Also score a time-gap segmentation with this threshold (seconds)
        #[arg(long)]
        baseline_gap: Option<i64>,
    },
    /// Session and action counts of a sessions file
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Serve segmented sessions to assessors and record their ratings
    Serve {
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        host: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        sessions: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        classification: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::BuildLookup { corpus, thesaurus, classification, out } => {
            commands::build_lookup(&corpus, &thesaurus, classification.as_deref(), &out)
        }
        Command::BuildStr { corpus, thesaurus, min_count, top_k, stop_words, out } => {
            commands::build_str(&corpus, &thesaurus, min_count, top_k, &stop_words, &out)
        }
        Command::Sessionize {
            log,
            out,
            timeout_min,
            min_actions,
            max_actions,
            max_duration_min,
            sample,
            cap,
            seed,
        } => commands::sessionize(&commands::SessionizeOptions {
            log,
            out,
            timeout_min,
            min_actions,
            max_actions,
            max_duration_min,
            sample,
            cap,
            seed,
        }),
        Command::Annotate { knowledge, input, out, epsilon } => commands::annotate(&knowledge, &input, &out, epsilon),
        Command::Segment { input, out, stop_words } => commands::segment(&input, &out, &stop_words),
        Command::Render { input, session, format, corpus, classification } => {
            commands::render(&input, &session, format, corpus.as_deref(), classification.as_deref())
        }
        Command::Evaluate { ratings, gold, predicted, icc, baseline_gap } => {
            commands::evaluate(ratings.as_deref(), gold.as_deref().zip(predicted.as_deref()), icc, baseline_gap)
        }
        Command::Stats { input } => commands::stats(&input),
        Command::Serve { host, port, sessions, ratings, corpus, classification } => {
            commands::serve(topicseg_service::ServiceConfig {
                addr: (host, port).into(),
                sessions,
                ratings,
                corpus,
                classification,
            })
        }
    }
}
