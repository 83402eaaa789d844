mod corpus;
mod evaluate;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const USAGE: u8 = 1;
pub const CONFIG: u8 = 2;
pub const VALIDATION: u8 = 3;
pub const ENDPOINT: u8 = 4;

/// An error with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type Outcome = Result<(), Failure>;

pub trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
    fn or_exit_with(self, code: u8, context: impl FnOnce() -> String) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }

    fn or_exit_with(self, code: u8, context: impl FnOnce() -> String) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into().context(context()),
        })
    }
}

pub fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        error: anyhow::anyhow!(msg.into()),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "aac",
    version,
    about = "Artificial argument corpus: generation and language-model evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and check the scheme catalog.
    ValidateSchemes(ValidateArgs),
    /// Generate the TRAIN, DEV and two TEST splits as JSONL.
    GenCorpus(GenArgs),
    /// Sample TRAIN01/02/03 training sets from a TRAIN split.
    SampleTrain(SampleArgs),
    /// Interleave filler paragraphs with argument texts.
    MixFiller(MixArgs),
    /// Turn corpus items into SPLIT/EXTENDED/INVERTED completion tasks.
    ExtractTasks(ExtractArgs),
    /// Run the conclusion-completion evaluation against an endpoint.
    EvalCompletion(EvalCompletionArgs),
    /// Run zero-shot relevance-perplexity classification on a benchmark.
    EvalNlu(EvalNluArgs),
    /// Print counts per split, group, scheme and domain.
    Stats(StatsArgs),
    /// Sample completions of the Hermes prompt and categorize them.
    Hermes(HermesArgs),
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Catalog configuration (the shipped catalog when absent).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Generation configuration JSON (shipped defaults when absent).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Generation threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub dev: Option<usize>,
    #[arg(long)]
    pub test_out_of_sample: Option<usize>,
    #[arg(long)]
    pub test_out_of_domain: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Generation configuration supplying the catalog, sizes and seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// TRAIN split JSONL.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub sets: Option<Vec<String>>,
    #[arg(long)]
    pub master_seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct MixArgs {
    /// Training-set JSONL whose texts are mixed.
    #[arg(long)]
    pub train: PathBuf,
    /// Plain-text filler files; blank lines separate paragraphs.
    #[arg(long, num_args = 1.., required = true)]
    pub filler: Vec<PathBuf>,
    /// Filler paragraphs per argument.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    #[arg(long, default_value_t = 2020)]
    pub master_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// Corpus JSONL files (test splits or externally paraphrased items).
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    /// Override the test set label (out_of_sample, paraphrased, out_of_domain).
    #[arg(long)]
    pub test_set: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EndpointArg {
    /// mock:oracle, mock:uniform[:V], mock:table:PATH or an http(s) URL.
    #[arg(long, env = "AAC_ENDPOINT")]
    pub endpoint: String,
}

#[derive(Args, Debug)]
pub struct EvalCompletionArgs {
    #[command(flatten)]
    pub endpoint: EndpointArg,
    #[arg(long)]
    pub tasks: PathBuf,
    /// JSON report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    #[arg(long, default_value_t = 2020)]
    pub master_seed: u64,
    #[arg(long, default_value_t = aac::gateway::DEFAULT_TOP_P)]
    pub top_p: f64,
    #[arg(long, default_value_t = aac::gateway::DEFAULT_MAX_TOKENS)]
    pub max_tokens: usize,
}

#[derive(Args, Debug)]
pub struct EvalNluArgs {
    #[command(flatten)]
    pub endpoint: EndpointArg,
    /// GLUE_AX, SNLI, ARC or LOGIQA.
    #[arg(long)]
    pub benchmark: String,
    #[arg(long)]
    pub data: PathBuf,
    /// Adapter JSON replacing the shipped one.
    #[arg(long)]
    pub adapter: Option<PathBuf>,
    /// Evaluate only the first N rows.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HermesArgs {
    #[command(flatten)]
    pub endpoint: EndpointArg,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 2020)]
    pub master_seed: u64,
    #[arg(long, default_value_t = aac::gateway::DEFAULT_TOP_P)]
    pub top_p: f64,
    #[arg(long, default_value = aac::completion::HERMES_PROMPT)]
    pub prompt: String,
    /// Rows shown before the remainder is summed.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(command: Command) -> Outcome {
    match command {
        Command::ValidateSchemes(a) => corpus::validate_schemes(a),
        Command::GenCorpus(a) => corpus::gen_corpus(a),
        Command::SampleTrain(a) => corpus::sample_train(a),
        Command::MixFiller(a) => corpus::mix(a),
        Command::ExtractTasks(a) => corpus::extract(a),
        Command::Stats(a) => corpus::stats(a),
        Command::EvalCompletion(a) => evaluate::eval_completion(a),
        Command::EvalNlu(a) => evaluate::eval_nlu(a),
        Command::Hermes(a) => evaluate::hermes(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(USAGE);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
