use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::os::unix::process::ExitStatusExt;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, Stdio};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::probe::lookup;
use super::transcript::{parse_script, Command};
use super::RunError;
use crate::packager::bundle::LOGS_DIR;
use crate::packager::{ContainerRuntime, ExecutionMode, PackageConfig, RunBundle, JOB_FILE, RUN_SCRIPT};

pub const STDOUT_LOG: &str = "stdout.txt";
pub const STDERR_LOG: &str = "stderr.txt";
pub const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub stdout_path: PathBuf,
    pub stderr_path: PathBuf,
    /// Wall-clock seconds.
    pub duration: f64,
    pub dry_run: bool,
    /// Commands of `run.sh`.
    pub command_transcript: Vec<Command>,
    /// Commands of `job.sbatch`, for Slurm bundles.
    pub batch_transcript: Vec<Command>,
}

/// Executes bundles with a given tool search path.
#[derive(Debug, Clone)]
pub struct Runner {
    search_path: OsString,
    echo: bool,
}

impl Default for Runner {
    fn default() -> Self {
        Self::new()
    }
}

impl Runner {
    /// Uses the process `PATH` and echoes child output live.
    pub fn new() -> Self {
        Self { search_path: std::env::var_os("PATH").unwrap_or_default(), echo: true }
    }

    pub fn with_search_path(search_path: impl Into<OsString>) -> Self {
        Self { search_path: search_path.into(), echo: true }
    }

    /// Whether child output is also streamed to this process's stdout/stderr.
    pub fn echo(mut self, echo: bool) -> Self {
        self.echo = echo;
        self
    }

    /// Host tools a bundle needs, in the order they are checked.
    pub fn required_tools(config: &PackageConfig) -> Vec<&'static str> {
        let mut tools = vec![config.runtime.command()];
        match config.mode {
            ExecutionMode::Mpi if config.runtime == ContainerRuntime::Apptainer => tools.push("mpirun"),
            ExecutionMode::Slurm => tools.push("sbatch"),
            _ => {}
        }
        tools
    }

    pub fn execute(&self, bundle: &RunBundle, dry_run: bool) -> Result<RunOutcome, RunError> {
        let logs = bundle.dir.join(LOGS_DIR);
        let stdout_path = logs.join(STDOUT_LOG);
        let stderr_path = logs.join(STDERR_LOG);

        let read = |name: &str| {
            let path = bundle.dir.join(name);
            fs::read_to_string(&path)
                .map_err(|source| RunError::Bundle(crate::packager::PackageError::Io { path, source }))
        };
        let command_transcript = parse_script(&read(RUN_SCRIPT)?)?;
        let batch_transcript =
            if bundle.dir.join(JOB_FILE).is_file() { parse_script(&read(JOB_FILE)?)? } else { Vec::new() };

        if dry_run {
            return Ok(RunOutcome {
                exit_code: 0,
                stdout_path,
                stderr_path,
                duration: 0.0,
                dry_run: true,
                command_transcript,
                batch_transcript,
            });
        }

        let config = bundle.config()?;
        for tool in Self::required_tools(&config) {
            if lookup(tool, &self.search_path).is_none() {
                return Err(RunError::MissingRuntime(tool.to_owned()));
            }
        }

        let spawn_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| RunError::SpawnFailure { path, source }
        };
        fs::create_dir_all(&logs).map_err(spawn_err(&logs))?;
        let _lock = LockGuard::acquire(&logs.join(LOCK_FILE))?;

        let started = Instant::now();
        // Run through `sh` so the script never has to be exec'd directly.
        let mut child = Process::new("/bin/sh")
            .arg(RUN_SCRIPT)
            .current_dir(&bundle.dir)
            .env("PATH", &self.search_path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(spawn_err(&bundle.run_script()))?;

        let out = tee(child.stdout.take().expect("piped"), File::create(&stdout_path), self.echo.then(io::stdout));
        let err = tee(child.stderr.take().expect("piped"), File::create(&stderr_path), self.echo.then(io::stderr));
        let status = child.wait().map_err(spawn_err(&bundle.run_script()))?;
        for (handle, path) in [(out, &stdout_path), (err, &stderr_path)] {
            handle.join().expect("log thread panicked").map_err(spawn_err(path))?;
        }

        let exit_code = status.code().or_else(|| status.signal().map(|s| 128 + s)).unwrap_or(-1);
        Ok(RunOutcome {
            exit_code,
            stdout_path,
            stderr_path,
            duration: started.elapsed().as_secs_f64(),
            dry_run: false,
            command_transcript,
            batch_transcript,
        })
    }
}

/// Executes or dry-runs `bundle` with the process `PATH`.
pub fn execute(bundle: &RunBundle, dry_run: bool) -> Result<RunOutcome, RunError> {
    Runner::new().execute(bundle, dry_run)
}

fn tee<R, W>(mut source: R, log: io::Result<File>, mut echo: Option<W>) -> thread::JoinHandle<io::Result<()>>
where
    R: Read + Send + 'static,
    W: Write + Send + 'static,
{
    thread::spawn(move || {
        let mut log = log?;
        let mut buf = [0u8; 8192];
        loop {
            let n = match source.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            };
            log.write_all(&buf[..n])?;
            if let Some(echo) = echo.as_mut() {
                // A closed terminal must not abort the run.
                let _ = echo.write_all(&buf[..n]).and_then(|_| echo.flush());
            }
        }
        log.flush()
    })
}

struct LockGuard(PathBuf);

impl LockGuard {
    fn acquire(path: &Path) -> Result<Self, RunError> {
        match OpenOptions::new().write(true).create_new(true).open(path) {
            Ok(mut file) => {
                let _ = writeln!(file, "{}", std::process::id());
                Ok(Self(path.to_path_buf()))
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(RunError::Busy(path.to_path_buf())),
            Err(source) => Err(RunError::SpawnFailure { path: path.to_path_buf(), source }),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}
