use std::ffi::{OsStr, OsString};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolStatus {
    pub present: bool,
    /// Only set when `present`.
    pub version: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuntimeProbe {
    pub docker: ToolStatus,
    pub apptainer: ToolStatus,
    pub mpirun: ToolStatus,
    pub sbatch: ToolStatus,
}

impl RuntimeProbe {
    pub fn is_present(&self, tool: &str) -> bool {
        match tool {
            "docker" => self.docker.present,
            "apptainer" => self.apptainer.present,
            "mpirun" => self.mpirun.present,
            "sbatch" => self.sbatch.present,
            _ => false,
        }
    }
}

static VERSION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bversion\s+v?([0-9]+\.[0-9]+(?:\.[0-9]+)?(?:[-+][0-9A-Za-z.]+)?)").unwrap());

/// Extracts `X.Y[.Z]` following the word "version", as printed by
/// `docker --version` and `apptainer --version`.
pub fn parse_version(output: &str) -> Option<String> {
    VERSION.captures(output).map(|c| c[1].to_owned())
}

/// Probes the process `PATH`.
pub fn probe_runtimes() -> RuntimeProbe {
    probe_runtimes_in(&std::env::var_os("PATH").unwrap_or_default())
}

/// Probes an explicit search path. Presence is an executable lookup;
/// versions are best effort.
pub fn probe_runtimes_in(search_path: &OsStr) -> RuntimeProbe {
    let versioned = |name: &str| match lookup(name, search_path) {
        Some(path) => ToolStatus { present: true, version: tool_version(&path, search_path) },
        None => ToolStatus::default(),
    };
    let present = |name: &str| ToolStatus { present: lookup(name, search_path).is_some(), version: None };
    RuntimeProbe {
        docker: versioned("docker"),
        apptainer: versioned("apptainer"),
        mpirun: present("mpirun"),
        sbatch: present("sbatch"),
    }
}

pub(crate) fn lookup(name: &str, search_path: &OsStr) -> Option<PathBuf> {
    let cwd = std::env::current_dir().unwrap_or_else(|_| PathBuf::from("/"));
    which::which_in(name, Some(search_path), cwd).ok()
}

fn tool_version(path: &Path, search_path: &OsStr) -> Option<String> {
    let output = Command::new(path)
        .arg("--version")
        .env("PATH", OsString::from(search_path))
        .stdin(Stdio::null())
        .stderr(Stdio::null())
        .output()
        .ok()?;
    parse_version(&String::from_utf8_lossy(&output.stdout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn versions() {
        assert_eq!(parse_version("Docker version 24.0.7, build afdd53b"), Some("24.0.7".into()));
        assert_eq!(parse_version("apptainer version 1.2.5-1.el8"), Some("1.2.5-1.el8".into()));
        assert_eq!(parse_version("singularity-ce version 3.11.4"), Some("3.11.4".into()));
        assert_eq!(parse_version("%%garbage 42%%"), None);
        assert_eq!(parse_version(""), None);
    }

    #[test]
    fn empty_search_path_finds_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let probe = probe_runtimes_in(dir.path().as_os_str());
        assert_eq!(probe, RuntimeProbe::default());
    }
}
