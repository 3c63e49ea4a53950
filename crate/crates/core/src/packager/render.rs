//! POSIX `sh` rendering of a [`RunPlan`].
//!
//! The generated grammar is deliberately small so that the runner can parse
//! it back for dry runs:
//!
//! - `#` comment lines (including `#!` and `#SBATCH`), `set -eu`, the `cd`
//!   into the bundle directory, `fi` and blank lines;
//! - `if ! <command> >/dev/null 2>&1; then` (probe command);
//! - `if [ ! -e <file> ]; then` (file test);
//! - any other line is one command, words quoted with [`shell_quote`].

use std::collections::BTreeMap;

use super::{PresenceCheck, RunPlan, SlurmSettings, CONFIG_FILE, JOB_FILE, RUN_SCRIPT};
use crate::packager::LauncherWrapping;

pub const SHEBANG: &str = "#!/bin/sh";
pub const STRICT_MODE: &str = "set -eu";
pub const CD_TO_BUNDLE: &str = r#"cd "$(dirname "$0")""#;
pub const PROBE_PREFIX: &str = "if ! ";
pub const PROBE_SUFFIX: &str = " >/dev/null 2>&1; then";
pub const FILE_TEST_PREFIX: &str = "if [ ! -e ";
pub const FILE_TEST_SUFFIX: &str = " ]; then";

/// Quotes one word for POSIX `sh`. Words made of safe characters stay bare.
pub fn shell_quote(word: &str) -> String {
    shlex::try_quote(word).expect("NUL bytes are rejected before rendering").into_owned()
}

fn join(argv: &[String]) -> String {
    argv.iter().map(|w| shell_quote(w)).collect::<Vec<_>>().join(" ")
}

/// Renders `run.sh` and, in Slurm mode, `job.sbatch`.
pub fn render_scripts(plan: &RunPlan) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();

    let mut run = vec![
        SHEBANG.to_owned(),
        STRICT_MODE.to_owned(),
        format!("# {} run script for example `{}`", plan.tool_version, plan.slug),
        format!("# runtime: {}, mode: {}; settings in {CONFIG_FILE}", plan.config.runtime, plan.config.mode),
        CD_TO_BUNDLE.to_owned(),
    ];

    let pull = join(&plan.image_acquisition.pull);
    match &plan.image_acquisition.skip_if {
        None => run.push(pull),
        Some(PresenceCheck::Command(probe)) => {
            run.push(format!("{PROBE_PREFIX}{}{PROBE_SUFFIX}", join(probe)));
            run.push(format!("  {pull}"));
            run.push("fi".into());
        }
        Some(PresenceCheck::FileExists(file)) => {
            run.push(format!("{FILE_TEST_PREFIX}{}{FILE_TEST_SUFFIX}", shell_quote(file)));
            run.push(format!("  {pull}"));
            run.push("fi".into());
        }
    }

    match (&plan.launcher_wrapping, &plan.config.slurm) {
        (LauncherWrapping::Sbatch { .. }, Some(slurm)) => {
            run.push(join(&["sbatch".to_owned(), JOB_FILE.to_owned()]));
            files.insert(JOB_FILE.to_owned(), render_job(plan, slurm));
        }
        _ => run.push(join(&plan.launch_command())),
    }

    files.insert(RUN_SCRIPT.to_owned(), lines(run));
    files
}

fn render_job(plan: &RunPlan, slurm: &SlurmSettings) -> String {
    // sbatch stops reading directives at the first command, so they come
    // before `set -eu`.
    let mut job = vec![
        SHEBANG.to_owned(),
        format!("#SBATCH --job-name=vizcat-{}", plan.slug),
        format!("#SBATCH --partition={}", slurm.partition),
        format!("#SBATCH --nodes={}", slurm.nodes),
        format!("#SBATCH --ntasks-per-node={}", slurm.tasks_per_node),
        format!("#SBATCH --time={}", slurm.walltime),
    ];
    if let Some(account) = &slurm.account {
        job.push(format!("#SBATCH --account={account}"));
    }
    job.extend(slurm.extra_directives.iter().map(|d| format!("#SBATCH {d}")));
    job.push(STRICT_MODE.to_owned());
    job.push(format!("# {} batch job for example `{}`", plan.tool_version, plan.slug));
    job.push(join(&plan.launch_command()));
    lines(job)
}

fn lines(lines: Vec<String>) -> String {
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
