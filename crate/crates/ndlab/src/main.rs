use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ndlab::cli::{self, Campaign, ConstructKind, Outcome, OutputFormat, RunConfig, EXIT_INPUT};
use ndlab::forcing::Label;

#[derive(Parser)]
#[command(
    name = "ndlab",
    about = "Level-set combinatorics and forcing-condition engine",
    version
)]
struct Cli {
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Search budget for enumeration-style operations.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    budget: u64,

    /// Output format: text or json.
    #[arg(long, global = true, default_value = "text")]
    format: String,

    /// Background model: a file path or the literal "bundled".
    #[arg(long, global = true, default_value = "bundled")]
    model: String,

    /// Indexed base: per, omega, or iotaK.
    #[arg(long, global = true, default_value = "iota6")]
    base: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a condition file against every demand.
    Validate {
        /// Condition file.
        input: PathBuf,
    },
    /// Build a condition and write it in canonical form.
    Construct {
        #[command(subcommand)]
        kind: Construct,
    },
    /// Rank computations.
    Rank {
        #[command(subcommand)]
        kind: RankCmd,
    },
    /// Enumerate a condition's derived catalog within caps.
    Catalog {
        input: PathBuf,
        #[arg(long, default_value_t = 7)]
        max_v: usize,
        #[arg(long, default_value_t = 10_000)]
        max_entries: usize,
    },
    /// Recover the catalog membership of a tuple file.
    Recover {
        /// Condition file.
        input: PathBuf,
        /// Tuple file.
        tuple: PathBuf,
    },
    /// Verify a chain of condition files and print its limit summary.
    Chain { inputs: Vec<PathBuf> },
    /// Check the base axioms and niceness demands at a depth.
    NiceCheck {
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Run a seeded property campaign.
    Stress {
        campaign: Campaign,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum Construct {
    /// Seed condition over five labels.
    Genesis {
        /// Comma-separated labels, e.g. 0,1,2,3,4.
        #[arg(long, value_delimiter = ',')]
        labels: Vec<Label>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Extend a condition by a fresh label.
    Add {
        input: PathBuf,
        #[arg(long)]
        beta: Label,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Raise the index count (omega-indexed bases only).
    Bump {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Amalgamate two compatible conditions.
    Amalgamate {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum RankCmd {
    /// Non-disjointness rank of a tuple over a catalog file.
    Ndrk { catalog: PathBuf, tuple: PathBuf },
    /// Splitting rank of a label set under the model.
    Split {
        /// Comma-separated labels, e.g. 0,1.
        #[arg(long, value_delimiter = ',')]
        set: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format.as_str() {
        "text" => OutputFormat::Text,
        "json" => OutputFormat::Json,
        other => {
            eprintln!("input error: unknown format {other:?}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let cfg = RunConfig {
        seed: cli.seed,
        budget: cli.budget,
        format,
    };
    let outcome: Outcome = match &cli.command {
        Command::Validate { input } => cli::cmd_validate(input, &cli.model, &cli.base, &cfg),
        Command::Construct { kind } => {
            let (kind, out) = match kind {
                Construct::Genesis { labels, out } => {
                    (ConstructKind::Genesis { labels }, out.clone())
                }
                Construct::Add { input, beta, out } => {
                    (ConstructKind::Add { input, beta: *beta }, out.clone())
                }
                Construct::Bump { input, out } => (ConstructKind::Bump { input }, out.clone()),
                Construct::Amalgamate { left, right, out } => (
                    ConstructKind::Amalgamate {
                        left,
                        right,
                        model_spec: &cli.model,
                    },
                    out.clone(),
                ),
            };
            cli::cmd_construct(kind, &cli.base, &out, &cfg)
        }
        Command::Rank { kind } => match kind {
            RankCmd::Ndrk { catalog, tuple } => cli::cmd_rank_ndrk(catalog, tuple, &cfg),
            RankCmd::Split { set } => cli::cmd_rank_split(&cli.model, set, &cfg),
        },
        Command::Catalog {
            input,
            max_v,
            max_entries,
        } => cli::cmd_catalog(input, *max_v, *max_entries, &cfg),
        Command::Recover { input, tuple } => cli::cmd_recover(input, tuple, &cfg),
        Command::Chain { inputs } => {
            let paths: Vec<&std::path::Path> = inputs.iter().map(|p| p.as_path()).collect();
            cli::cmd_chain(&paths, &cli.base, &cfg)
        }
        Command::NiceCheck { depth } => cli::cmd_nice_check(&cli.base, *depth, &cfg),
        Command::Stress { campaign, trials } => cli::cmd_stress(*campaign, *trials, &cfg),
    };
    print!("{}", outcome.text);
    ExitCode::from(outcome.code as u8)
}
