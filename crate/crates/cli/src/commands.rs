use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use vizcat_api::{ApiConfig, AppState};
use vizcat_core::catalog::{
    inspect_example, parse_example, scan_repository, serialize_example, Capabilities, Catalog, ContainerRef,
    ExampleRecord, SectionId, Tag, TagCategory, ValidationReport, META_FILE,
};
use vizcat_core::json::canonical_json;
use vizcat_core::packager::{
    archive_bundle, assemble_bundle, ExecutionMode, PackageConfig, RunBundle, SlurmSettings, RUN_SCRIPT,
};
use vizcat_core::runner::Runner;
use vizcat_core::search::{search as run_search, SearchQuery};

use crate::failure::Failure;
use crate::{Format, NewArgs, PackageArgs, SearchArgs, ServeArgs};

type CommandResult = Result<ExitCode, Failure>;

fn io_failure(context: impl std::fmt::Display) -> impl FnOnce(io::Error) -> Failure {
    move |e| Failure::Internal(format!("{context}: {e}"))
}

/// Scans the root, noting excluded folders on stderr.
fn load_catalog(root: &Path) -> Result<Catalog, Failure> {
    let (catalog, report) = scan_repository(root)?;
    if report.has_errors() {
        eprintln!(
            "vizcat: note: {} error(s) in {}; affected examples are skipped (see `vizcat validate`)",
            report.error_count(),
            root.display()
        );
    }
    Ok(catalog)
}

fn lookup<'a>(catalog: &'a Catalog, slug: &str) -> Result<&'a ExampleRecord, Failure> {
    catalog
        .get(slug)
        .ok_or_else(|| Failure::NotFound(format!("no example `{slug}` under {}", catalog.root().display())))
}

pub fn validate(path: &Path, format: Format) -> CommandResult {
    if !path.is_dir() {
        return Err(Failure::NotFound(format!("{} is not a directory", path.display())));
    }
    let (count, report): (usize, ValidationReport) = if path.join(META_FILE).is_file() {
        let (record, report) = inspect_example(path);
        (usize::from(record.is_some()), report)
    } else {
        let (catalog, report) = scan_repository(path)?;
        (catalog.len(), report)
    };
    match format {
        Format::Json => println!("{}", canonical_json(&report)),
        Format::Text => {
            for entry in &report.entries {
                println!("{entry}");
            }
            println!(
                "{count} valid example(s), {} error(s), {} warning(s)",
                report.error_count(),
                report.warning_count()
            );
        }
    }
    Ok(if report.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

pub fn search(root: &Path, args: SearchArgs) -> CommandResult {
    let catalog = load_catalog(root)?;
    let query = SearchQuery {
        text: args.text.join(" "),
        required_tags: args.tags.into_iter().collect(),
        author: args.author,
        added_from: args.from,
        added_to: args.to,
        caps: args.caps.into_iter().collect(),
        sort: args.sort,
        page: args.page,
        page_size: args.page_size,
    };
    let result = run_search(&catalog, &query).map_err(|e| Failure::Conflict(e.to_string()))?;
    if args.json {
        println!("{}", canonical_json(&result));
        return Ok(ExitCode::SUCCESS);
    }
    if result.items.is_empty() {
        println!("no matching examples");
        return Ok(ExitCode::SUCCESS);
    }
    let width = result.items.iter().map(|h| h.slug.len()).max().unwrap_or(0);
    for hit in &result.items {
        let tags: Vec<_> = hit.tags.iter().map(|t| t.name.as_str()).collect();
        let score = if query.text_tokens().is_empty() { String::new() } else { format!("  (score {})", hit.score) };
        println!("{:width$}  {}  [{}]{score}", hit.slug, hit.title, tags.join(", "));
    }
    let first = query.page * query.page_size;
    println!("{}-{} of {}", first + 1, first + result.items.len(), result.total);
    Ok(ExitCode::SUCCESS)
}

fn outline(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_owned())
        .filter(|h| !h.is_empty())
        .collect()
}

pub fn show(root: &Path, slug: &str, json: bool) -> CommandResult {
    let catalog = load_catalog(root)?;
    let record = lookup(&catalog, slug)?;
    if json {
        println!("{}", canonical_json(record));
        return Ok(ExitCode::SUCCESS);
    }
    let mut out = String::new();
    let mut line = |label: &str, value: &str| out.push_str(&format!("{:<14}{value}\n", format!("{label}:")));
    line("slug", &record.slug);
    line("authors", &record.authors.join(", "));
    line("added", &record.added.to_string());
    for category in TagCategory::ALL {
        let names: Vec<_> = record.tags_in(category).map(|t| t.name.as_str()).collect();
        if !names.is_empty() {
            line(category.as_str(), &names.join(", "));
        }
    }
    let caps: Vec<_> = vizcat_core::catalog::Capability::ALL
        .into_iter()
        .filter(|c| record.capabilities.has(*c))
        .map(|c| c.as_str())
        .collect();
    line("capabilities", &if caps.is_empty() { "none".to_owned() } else { caps.join(", ") });
    line("image", &record.container.image);
    line("entrypoint", &shlex::try_join(record.container.entrypoint.iter().map(String::as_str)).unwrap_or_default());
    line("images", &record.images.len().to_string());
    if let Some(url) = &record.issue_url {
        line("issues", url);
    }
    println!("{}\n{}\n{out}\noutline:", record.title, "=".repeat(record.title.chars().count()));
    for id in SectionId::ALL {
        let text = record.section(id);
        let words = text.split_whitespace().count();
        let size = if words == 0 { "empty".to_owned() } else { format!("{words} words") };
        println!("  {} ({size})", id.as_str());
        for heading in outline(text) {
            println!("    - {heading}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn package_config(args: &PackageArgs) -> Result<PackageConfig, Failure> {
    let mut config = PackageConfig::new(args.runtime, args.mode);
    config.dataset_path = args.data.clone();
    config.pull_policy = args.pull;
    let any_slurm = args.slurm_partition.is_some()
        || args.slurm_nodes.is_some()
        || args.slurm_tasks_per_node.is_some()
        || args.slurm_time.is_some()
        || args.slurm_account.is_some()
        || !args.slurm_directives.is_empty();
    if any_slurm || args.mode == ExecutionMode::Slurm {
        let missing: Vec<_> = [
            ("--slurm-partition", args.slurm_partition.is_none()),
            ("--slurm-nodes", args.slurm_nodes.is_none()),
            ("--slurm-tasks-per-node", args.slurm_tasks_per_node.is_none()),
            ("--slurm-time", args.slurm_time.is_none()),
        ]
        .into_iter()
        .filter_map(|(flag, absent)| absent.then_some(flag))
        .collect();
        if !missing.is_empty() {
            return Err(Failure::Conflict(format!("Slurm settings need {}", missing.join(", "))));
        }
        config.slurm = Some(SlurmSettings {
            partition: args.slurm_partition.clone().unwrap_or_default(),
            nodes: args.slurm_nodes.unwrap_or_default(),
            tasks_per_node: args.slurm_tasks_per_node.unwrap_or_default(),
            walltime: args.slurm_time.clone().unwrap_or_default(),
            account: args.slurm_account.clone(),
            extra_directives: args.slurm_directives.clone(),
        });
    }
    config.ranks = match (args.ranks, &config.slurm) {
        (Some(ranks), _) => ranks,
        (None, Some(slurm)) if args.mode == ExecutionMode::Slurm => slurm.nodes.saturating_mul(slurm.tasks_per_node),
        (None, _) => 1,
    };
    Ok(config)
}

pub fn package(root: &Path, args: PackageArgs) -> CommandResult {
    let catalog = load_catalog(root)?;
    let record = lookup(&catalog, &args.slug)?;
    let config = package_config(&args)?;
    let example_dir = catalog.example_dir(&record.slug);

    if !args.archive {
        let out = args.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}-bundle", record.slug)));
        let bundle = assemble_bundle(record, &example_dir, &config, &out)?;
        println!("{}", bundle.dir.display());
        return Ok(ExitCode::SUCCESS);
    }

    let out = args.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}-bundle.tar.gz", record.slug)));
    let to_stdout = out == Path::new("-");
    if !to_stdout && out.exists() {
        return Err(Failure::Conflict(format!("{} already exists", out.display())));
    }
    let scratch = tempfile::tempdir().map_err(io_failure("temporary directory"))?;
    let bundle = assemble_bundle(record, &example_dir, &config, &scratch.path().join("bundle"))?;
    let bytes = archive_bundle(&bundle)?;
    if to_stdout {
        io::stdout().write_all(&bytes).map_err(io_failure("stdout"))?;
    } else {
        fs::write(&out, &bytes).map_err(io_failure(out.display()))?;
        println!("{}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn run(dir: &Path, dry_run: bool) -> CommandResult {
    if !dir.join(RUN_SCRIPT).is_file() {
        return Err(Failure::NotFound(format!("no {RUN_SCRIPT} in {}", dir.display())));
    }
    let bundle = RunBundle::open(dir)?;
    let outcome = Runner::new().execute(&bundle, dry_run)?;
    if dry_run {
        let show = |cmd: &Vec<String>| shlex::try_join(cmd.iter().map(String::as_str)).unwrap_or_default();
        for cmd in &outcome.command_transcript {
            println!("{}", show(cmd));
        }
        if !outcome.batch_transcript.is_empty() {
            println!("# in job.sbatch:");
            for cmd in &outcome.batch_transcript {
                println!("{}", show(cmd));
            }
        }
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!(
        "vizcat: exit code {} after {:.1}s; logs in {}",
        outcome.exit_code,
        outcome.duration,
        outcome.stdout_path.parent().unwrap_or(dir).display()
    );
    Ok(ExitCode::from(u8::try_from(outcome.exit_code).unwrap_or(5)))
}

pub fn serve(root: &Path, args: ServeArgs) -> CommandResult {
    let config = ApiConfig {
        root: root.to_path_buf(),
        admin_token: args.admin_token,
        cors_origin: args.cors_origin,
        static_dir: args.static_dir,
    };
    let (state, report) = AppState::load(config)?;
    eprintln!(
        "vizcat: loaded {} example(s) from {} ({} error(s), {} warning(s))",
        state.catalog().len(),
        root.display(),
        report.error_count(),
        report.warning_count()
    );
    let runtime = tokio::runtime::Runtime::new().map_err(io_failure("tokio runtime"))?;
    runtime.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::Conflict(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(io_failure("listener"))?;
        eprintln!("vizcat: listening on http://{local}");
        vizcat_api::serve(listener, Arc::new(state), vizcat_api::shutdown_signal())
            .await
            .map_err(io_failure("server"))?;
        eprintln!("vizcat: shut down");
        Ok(ExitCode::SUCCESS)
    })
}

fn parse_tag(arg: &str) -> Result<Tag, Failure> {
    let (name, category) =
        arg.rsplit_once(':').ok_or_else(|| Failure::Conflict(format!("tag `{arg}` must be NAME:CATEGORY")))?;
    let category: TagCategory = category.parse().map_err(Failure::Conflict)?;
    Ok(Tag::new(name.trim(), category))
}

pub fn new_example(root: &Path, args: NewArgs) -> CommandResult {
    if !root.is_dir() {
        return Err(Failure::NotFound(format!("catalog root {} is not a directory", root.display())));
    }
    let folder = root.join(&args.slug);
    if folder.exists() {
        return Err(Failure::Conflict(format!("{} already exists", folder.display())));
    }
    let tags = args.tags.iter().map(|t| parse_tag(t)).collect::<Result<Vec<_>, _>>()?;
    let entrypoint = shlex::split(&args.entrypoint)
        .ok_or_else(|| Failure::Conflict(format!("cannot split entrypoint `{}`", args.entrypoint)))?;
    let authors = if args.authors.is_empty() {
        vec![std::env::var("USER").ok().filter(|u| !u.is_empty()).unwrap_or_else(|| "anonymous".into())]
    } else {
        args.authors
    };
    let mut sections: std::collections::BTreeMap<_, _> =
        SectionId::ALL.into_iter().map(|id| (id, String::new())).collect();
    sections.insert(
        SectionId::Description,
        format!("# {}\n\nWhat this example shows and which visualization methods it uses.\n", args.title),
    );
    sections.insert(
        SectionId::Instructions,
        "How to run the example and which parameters are worth changing.\n".to_owned(),
    );
    let record = ExampleRecord {
        slug: args.slug,
        title: args.title,
        authors,
        added: chrono::Local::now().date_naive(),
        tags,
        capabilities: Capabilities {
            preview: false,
            mpi: args.mpi,
            slurm: args.slurm,
            dataset_replaceable: args.dataset_replaceable,
        },
        single_task: args.single_task,
        container: ContainerRef { image: args.image, entrypoint, recipe_path: None },
        sections,
        images: Vec::new(),
        issue_url: args.issue_url,
        resources_dir: None,
    };
    serialize_example(&record, &folder)?;
    let parsed = parse_example(&folder)
        .map_err(|report| Failure::Internal(format!("scaffold does not parse back: {}", canonical_json(&report))))?;
    debug_assert_eq!(parsed, record);
    println!("{}", folder.display());
    Ok(ExitCode::SUCCESS)
}
