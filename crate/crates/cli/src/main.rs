mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vizcat_core::catalog::Capability;
use vizcat_core::packager::{ContainerRuntime, ExecutionMode, PullPolicy};
use vizcat_core::search::SortKey;

/// Browse, validate and run a catalog of containerized HPC visualization
/// examples.
///
/// Exit codes: 0 success, 1 validation errors, 2 not found, 3 invalid
/// configuration or conflict, 4 missing container runtime, 5 internal error.
/// `run` exits with the bundle's own exit code.
#[derive(Debug, Parser)]
#[command(name = "vizcat", version, max_term_width = 100)]
struct Cli {
    /// Catalog root: a directory of example folders.
    #[arg(long, global = true, env = "VIZCAT_ROOT", default_value = ".")]
    root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a catalog root, or a single example folder.
    Validate {
        /// Defaults to --root.
        path: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Search the catalog.
    Search(SearchArgs),
    /// Show one example.
    Show {
        slug: String,
        /// Print the full record as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Build a run bundle (a directory, or a .tar.gz with --archive).
    Package(PackageArgs),
    /// Execute a bundle's run.sh, or print what it would run.
    Run {
        bundle: PathBuf,
        #[arg(long)]
        dry_run: bool,
    },
    /// Serve the HTTP API until interrupted.
    Serve(ServeArgs),
    /// Scaffold a new example folder under --root.
    New(NewArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Search text; words are matched as prefixes.
    text: Vec<String>,
    /// Required tag (repeatable).
    #[arg(long = "tag", value_name = "TAG")]
    tags: Vec<String>,
    /// Case-insensitive author substring.
    #[arg(long)]
    author: Option<String>,
    /// Earliest date added (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    from: Option<chrono::NaiveDate>,
    /// Latest date added (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    to: Option<chrono::NaiveDate>,
    /// Required capabilities: preview, mpi, slurm, dataset_replaceable.
    #[arg(long, value_delimiter = ',')]
    caps: Vec<Capability>,
    /// relevance, date_desc, date_asc or title_asc.
    #[arg(long)]
    sort: Option<SortKey>,
    #[arg(long, default_value_t = 0)]
    page: usize,
    #[arg(long, default_value_t = vizcat_core::search::DEFAULT_PAGE_SIZE)]
    page_size: usize,
    /// Print the result as JSON, identical to the API body.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PackageArgs {
    slug: String,
    #[arg(long)]
    runtime: ContainerRuntime,
    #[arg(long, default_value = "local")]
    mode: ExecutionMode,
    /// Host dataset directory, mounted read-only at /data.
    #[arg(long = "data", value_name = "PATH")]
    data: Option<String>,
    /// MPI ranks. Defaults to nodes × tasks per node for Slurm, else 1.
    #[arg(long)]
    ranks: Option<u32>,
    /// if_absent or always.
    #[arg(long, default_value = "if_absent")]
    pull: PullPolicy,
    #[arg(long)]
    slurm_partition: Option<String>,
    #[arg(long)]
    slurm_nodes: Option<u32>,
    #[arg(long)]
    slurm_tasks_per_node: Option<u32>,
    /// Walltime as HH:MM:SS.
    #[arg(long)]
    slurm_time: Option<String>,
    #[arg(long)]
    slurm_account: Option<String>,
    /// Extra #SBATCH directive, e.g. --slurm-directive=--mem=4G (repeatable).
    #[arg(long = "slurm-directive", value_name = "DIRECTIVE", allow_hyphen_values = true)]
    slurm_directives: Vec<String>,
    /// Output directory, or archive path with --archive (`-` for stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write a .tar.gz instead of a directory.
    #[arg(long)]
    archive: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "VIZCAT_HOST", default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "VIZCAT_PORT", default_value_t = vizcat_api::DEFAULT_PORT)]
    port: u16,
    /// Bearer token that enables POST /api/reload.
    #[arg(long, env = "VIZCAT_ADMIN_TOKEN", hide_env_values = true)]
    admin_token: Option<String>,
    /// Allowed CORS origin; any origin when unset.
    #[arg(long, env = "VIZCAT_CORS_ORIGIN")]
    cors_origin: Option<String>,
    /// Built web UI to serve for non-API paths.
    #[arg(long, env = "VIZCAT_STATIC_DIR")]
    static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NewArgs {
    slug: String,
    #[arg(long)]
    title: String,
    /// Tag as NAME:CATEGORY, category one of DataType, Technique, Domain
    /// (repeatable; at least one DataType tag is required).
    #[arg(long = "tag", value_name = "NAME:CATEGORY", required = true)]
    tags: Vec<String>,
    /// Author (repeatable). Defaults to $USER.
    #[arg(long = "author")]
    authors: Vec<String>,
    /// Container image reference.
    #[arg(long, default_value = "docker.io/library/alpine:3.19")]
    image: String,
    /// Entrypoint command line, split with shell rules.
    #[arg(long, default_value = "echo 'replace this entrypoint'")]
    entrypoint: String,
    #[arg(long)]
    mpi: bool,
    #[arg(long)]
    slurm: bool,
    /// Allows Slurm submission without MPI.
    #[arg(long)]
    single_task: bool,
    #[arg(long)]
    dataset_replaceable: bool,
    #[arg(long)]
    issue_url: Option<String>,
}

fn parse_date(s: &str) -> Result<chrono::NaiveDate, String> {
    vizcat_core::catalog::parse_date(s).ok_or_else(|| format!("expected YYYY-MM-DD, got `{s}`"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path, format } => commands::validate(path.as_deref().unwrap_or(&cli.root), format),
        Command::Search(args) => commands::search(&cli.root, args),
        Command::Show { slug, json } => commands::show(&cli.root, &slug, json),
        Command::Package(args) => commands::package(&cli.root, args),
        Command::Run { bundle, dry_run } => commands::run(&bundle, dry_run),
        Command::Serve(args) => commands::serve(&cli.root, args),
        Command::New(args) => commands::new_example(&cli.root, args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("vizcat: {failure}");
            failure.exit_code()
        }
    }
}
