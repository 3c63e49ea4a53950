use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::PackageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainerRuntime {
    Docker,
    Apptainer,
}

impl ContainerRuntime {
    pub const ALL: [ContainerRuntime; 2] = [Self::Docker, Self::Apptainer];

    /// Executable name looked up on the search path.
    pub fn command(self) -> &'static str {
        match self {
            Self::Docker => "docker",
            Self::Apptainer => "apptainer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    Local,
    Mpi,
    Slurm,
}

impl ExecutionMode {
    pub const ALL: [ExecutionMode; 3] = [Self::Local, Self::Mpi, Self::Slurm];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Local => "local",
            Self::Mpi => "mpi",
            Self::Slurm => "slurm",
        }
    }
}

impl fmt::Display for ContainerRuntime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.command())
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContainerRuntime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "docker" => Ok(Self::Docker),
            "apptainer" | "singularity" => Ok(Self::Apptainer),
            _ => Err(format!("unknown runtime `{s}` (expected docker or apptainer)")),
        }
    }
}

impl FromStr for ExecutionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown mode `{s}` (expected local, mpi or slurm)"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PullPolicy {
    #[default]
    IfAbsent,
    Always,
}

impl FromStr for PullPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "if_absent" => Ok(Self::IfAbsent),
            "always" => Ok(Self::Always),
            _ => Err(format!("unknown pull policy `{s}` (expected if_absent or always)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlurmSettings {
    pub partition: String,
    pub nodes: u32,
    pub tasks_per_node: u32,
    /// `HH:MM:SS`
    pub walltime: String,
    #[serde(default)]
    pub account: Option<String>,
    /// Additional `#SBATCH` directives, emitted verbatim.
    #[serde(default)]
    pub extra_directives: Vec<String>,
}

/// User choices for one bundle. Serialized as the bundle's `config.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageConfig {
    /// Absolute host path mounted read-only at `/data`.
    #[serde(default)]
    pub dataset_path: Option<String>,
    pub runtime: ContainerRuntime,
    pub mode: ExecutionMode,
    #[serde(default = "default_ranks")]
    pub ranks: u32,
    #[serde(default)]
    pub slurm: Option<SlurmSettings>,
    #[serde(default)]
    pub pull_policy: PullPolicy,
}

fn default_ranks() -> u32 {
    1
}

impl PackageConfig {
    pub fn new(runtime: ContainerRuntime, mode: ExecutionMode) -> Self {
        Self { dataset_path: None, runtime, mode, ranks: 1, slurm: None, pull_policy: PullPolicy::IfAbsent }
    }

    /// Field-level checks that do not depend on the example.
    pub fn validate(&self) -> Result<(), PackageError> {
        if let Some(path) = &self.dataset_path {
            validate_dataset_path(path)?;
        }
        if self.ranks == 0 {
            return Err(PackageError::invalid("ranks", "must be at least 1"));
        }
        match self.mode {
            ExecutionMode::Local if self.ranks != 1 => {
                return Err(PackageError::invalid("ranks", "local mode runs exactly one process"));
            }
            ExecutionMode::Local | ExecutionMode::Mpi if self.slurm.is_some() => {
                return Err(PackageError::invalid("slurm", "slurm settings require slurm mode"));
            }
            ExecutionMode::Slurm => {
                let slurm = self
                    .slurm
                    .as_ref()
                    .ok_or_else(|| PackageError::invalid("slurm", "slurm mode requires slurm settings"))?;
                slurm.validate()?;
                let slots = slurm.nodes.checked_mul(slurm.tasks_per_node);
                if slots != Some(self.ranks) {
                    return Err(PackageError::invalid(
                        "ranks",
                        format!(
                            "ranks ({}) must equal nodes ({}) x tasks_per_node ({})",
                            self.ranks, slurm.nodes, slurm.tasks_per_node
                        ),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

static SLURM_NAME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z0-9][A-Za-z0-9_.,-]*$").unwrap());
static WALLTIME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[0-9]{2,}:[0-5][0-9]:[0-5][0-9]$").unwrap());

impl SlurmSettings {
    pub fn validate(&self) -> Result<(), PackageError> {
        if !SLURM_NAME.is_match(&self.partition) {
            return Err(PackageError::invalid(
                "slurm.partition",
                format!("`{}` is not a partition name", self.partition),
            ));
        }
        if self.nodes == 0 {
            return Err(PackageError::invalid("slurm.nodes", "must be at least 1"));
        }
        if self.tasks_per_node == 0 {
            return Err(PackageError::invalid("slurm.tasks_per_node", "must be at least 1"));
        }
        if !WALLTIME.is_match(&self.walltime) {
            return Err(PackageError::invalid("slurm.walltime", format!("`{}` is not HH:MM:SS", self.walltime)));
        }
        if let Some(account) = &self.account {
            if !SLURM_NAME.is_match(account) {
                return Err(PackageError::invalid("slurm.account", format!("`{account}` is not an account name")));
            }
        }
        for directive in &self.extra_directives {
            if !directive.starts_with('-') || directive.trim() != directive || directive.chars().any(char::is_control) {
                return Err(PackageError::invalid(
                    "slurm.extra_directives",
                    format!("`{}` is not a single-line option", directive.escape_debug()),
                ));
            }
        }
        Ok(())
    }
}

/// Absolute, free of control characters, and free of the `:` and `,`
/// separators used by `docker -v` and `apptainer --bind`.
fn validate_dataset_path(path: &str) -> Result<(), PackageError> {
    let reason = if !path.starts_with('/') {
        "must be an absolute path"
    } else if path.chars().any(char::is_control) {
        "must not contain control characters such as newlines"
    } else if path.contains(':') || path.contains(',') {
        "must not contain `:` or `,` (mount separators)"
    } else {
        return Ok(());
    };
    Err(PackageError::invalid("dataset_path", format!("`{}` {reason}", path.escape_debug())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slurm(nodes: u32, tasks: u32) -> SlurmSettings {
        SlurmSettings {
            partition: "compute".into(),
            nodes,
            tasks_per_node: tasks,
            walltime: "01:00:00".into(),
            account: None,
            extra_directives: vec![],
        }
    }

    fn field(err: PackageError) -> &'static str {
        match err {
            PackageError::InvalidConfig { field, .. } => field,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slurm_ranks_must_fill_allocation() {
        let mut cfg = PackageConfig::new(ContainerRuntime::Apptainer, ExecutionMode::Slurm);
        cfg.slurm = Some(slurm(2, 4));
        cfg.ranks = 8;
        assert!(cfg.validate().is_ok());
        cfg.ranks = 6;
        assert_eq!(field(cfg.validate().unwrap_err()), "ranks");
    }

    #[test]
    fn slurm_mode_needs_settings() {
        let cfg = PackageConfig::new(ContainerRuntime::Docker, ExecutionMode::Slurm);
        assert_eq!(field(cfg.validate().unwrap_err()), "slurm");
        let mut local = PackageConfig::new(ContainerRuntime::Docker, ExecutionMode::Local);
        local.slurm = Some(slurm(1, 1));
        assert_eq!(field(local.validate().unwrap_err()), "slurm");
    }

    #[test]
    fn slurm_fields() {
        let mut s = slurm(1, 1);
        s.walltime = "1:00".into();
        assert_eq!(field(s.validate().unwrap_err()), "slurm.walltime");
        let mut s = slurm(1, 1);
        s.partition = "gpu; rm -rf".into();
        assert_eq!(field(s.validate().unwrap_err()), "slurm.partition");
        let mut s = slurm(1, 1);
        s.extra_directives = vec!["--mem=4G\nrm x".into()];
        assert_eq!(field(s.validate().unwrap_err()), "slurm.extra_directives");
        let mut s = slurm(1, 1);
        s.extra_directives = vec!["--gres=gpu:1".into()];
        assert!(s.validate().is_ok());
        assert_eq!(field(slurm(0, 1).validate().unwrap_err()), "slurm.nodes");
    }

    #[test]
    fn dataset_paths() {
        let mut cfg = PackageConfig::new(ContainerRuntime::Docker, ExecutionMode::Local);
        for ok in ["/home/u/data", "/a b/$(x);'\"`"] {
            cfg.dataset_path = Some(ok.into());
            assert!(cfg.validate().is_ok(), "{ok}");
        }
        for bad in ["relative", "/a\nb", "/a:b", "/a,b", "/a\0b", ""] {
            cfg.dataset_path = Some(bad.into());
            assert_eq!(field(cfg.validate().unwrap_err()), "dataset_path", "{bad:?}");
        }
    }

    #[test]
    fn local_mode_is_single_rank() {
        let mut cfg = PackageConfig::new(ContainerRuntime::Docker, ExecutionMode::Local);
        cfg.ranks = 2;
        assert_eq!(field(cfg.validate().unwrap_err()), "ranks");
    }

    #[test]
    fn config_json_defaults() {
        let cfg: PackageConfig = serde_json::from_str(r#"{"runtime":"docker","mode":"local"}"#).unwrap();
        assert_eq!(cfg, PackageConfig::new(ContainerRuntime::Docker, ExecutionMode::Local));
        assert!(serde_json::from_str::<PackageConfig>(r#"{"runtime":"docker","mode":"local","gpu":1}"#).is_err());
    }
}
