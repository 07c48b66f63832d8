use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smallcanc::chart::DEFAULT_VIRTUAL_DEPTH;
use smallcanc::greedy::{Policy, DEFAULT_MAX_STEPS};
use smallcanc::report::OutputFormat;

mod session;

#[derive(Parser, Debug)]
#[command(name = "smallcanc", version, about = "Small cancellation ring workbench")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Override the presentation's τ.
    #[arg(long, global = true)]
    pub tau: Option<u32>,
    /// Replacement depth for virtual-member detection.
    #[arg(long, global = true, default_value_t = DEFAULT_VIRTUAL_DEPTH)]
    pub virt_depth: usize,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub max_relations: usize,
    #[arg(long, global = true, default_value_t = 256)]
    pub max_wordlen: usize,
    /// Layout length bound for `oracle` and `nontrivial`.
    #[arg(long, global = true)]
    pub oracle_bound: Option<usize>,
    /// Greedy branch policy: first or all.
    #[arg(long, global = true, default_value = "first")]
    pub policy: Policy,
    /// Greedy step budget.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    pub steps: usize,
    /// Output format: text or kv.
    #[arg(long, global = true, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Close the presentation and run every axiom checker.
    Check { file: PathBuf },
    /// Run one query against a presentation.
    Query {
        file: PathBuf,
        #[command(subcommand)]
        query: Query,
    },
    /// Emit presentation files.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum Query {
    /// List the small pieces.
    Pieces,
    Lambda { word: String },
    Chart { word: String },
    Fchar { word: String },
    Level { word: String },
    Derived { word: String },
    /// Multi-turn at chart occurrence `occ` with closed relation `rel`.
    Turn { word: String, occ: usize, rel: usize },
    Member {
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    Oracle {
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    /// Basis representatives over all words up to `length`.
    BasisSample {
        #[arg(default_value_t = 3)]
        length: usize,
    },
    Nontrivial,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Gen {
    /// Tagged corpus; the seed defaults to SMALLCANC_SEED, else 0.
    Corpus {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write every shipped presentation file.
    Shipped {
        #[arg(long)]
        out: PathBuf,
    },
    /// Relations r − 1 for group relators.
    GroupAlgebra {
        #[arg(long)]
        alphabet: String,
        #[arg(long, default_value = "GF(2)")]
        field: String,
        #[arg(long = "gen-tau", default_value_t = 10)]
        gen_tau: u32,
        relators: Vec<String>,
    },
    /// One relator of the given length whose pieces are single letters.
    Cm {
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value = "GF(2)")]
        field: String,
        #[arg(long = "gen-tau", default_value_t = 10)]
        gen_tau: u32,
    },
    /// The trinomial 1 + v + v·w.
    Trinomial {
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        w: String,
        #[arg(long)]
        v: String,
        #[arg(long, default_value = "GF(2)")]
        field: String,
        #[arg(long = "gen-tau", default_value_t = 10)]
        gen_tau: u32,
    },
    /// Screen trinomial candidates v through closure and the checkers.
    Screen {
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value = "GF(2)")]
        field: String,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long = "gen-tau", default_value_t = 10)]
        gen_tau: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file } => session::check(&file, &cli.opts),
        Command::Query { file, query } => session::query(&file, &query, &cli.opts),
        Command::Gen { what } => session::generate(&what, &cli.opts),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
