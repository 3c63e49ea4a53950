use crate::catalog::{is_valid_image_ref, ExampleRecord};

use super::{ContainerRuntime, ExecutionMode, PackageConfig, PackageError, PullPolicy, RequiredCapability};

/// Mount point of a user dataset inside the container.
pub const CONTAINER_DATA_DIR: &str = "/data";
/// Apptainer image file, relative to the bundle directory.
pub const SIF_FILE: &str = "image.sif";

/// Condition under which image acquisition is skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresenceCheck {
    /// Skip the pull when this command succeeds.
    Command(Vec<String>),
    /// Skip the pull when this bundle-relative file exists.
    FileExists(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageAcquisition {
    pub pull: Vec<String>,
    /// `None` under [`PullPolicy::Always`].
    pub skip_if: Option<PresenceCheck>,
}

/// How the container invocation is launched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LauncherWrapping {
    /// Runs once, directly.
    None,
    /// `mpirun` runs inside the container, before the entrypoint.
    MpirunInContainer { ranks: u32 },
    /// `mpirun` runs on the host and starts one container per rank.
    MpirunOnHost { ranks: u32 },
    /// Submitted with `sbatch`; the job script starts ranks with `srun`.
    Sbatch { ranks: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataBinding {
    pub host_path: String,
    pub container_path: String,
    pub read_only: bool,
}

/// Structured description of a bundle, rendered into scripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPlan {
    pub slug: String,
    pub tool_version: String,
    pub config: PackageConfig,
    pub image: String,
    pub image_acquisition: ImageAcquisition,
    /// Container runtime command, including any in-container launcher.
    pub container_invocation: Vec<String>,
    pub launcher_wrapping: LauncherWrapping,
    pub data_binding: Option<DataBinding>,
}

impl RunPlan {
    /// The command that runs the example on the host (for Slurm: inside the
    /// batch job).
    pub fn launch_command(&self) -> Vec<String> {
        let prefix: Vec<String> = match self.launcher_wrapping {
            LauncherWrapping::None | LauncherWrapping::MpirunInContainer { .. } => vec![],
            LauncherWrapping::MpirunOnHost { ranks } => vec!["mpirun".into(), "-np".into(), ranks.to_string()],
            LauncherWrapping::Sbatch { .. } => vec!["srun".into()],
        };
        prefix.into_iter().chain(self.container_invocation.iter().cloned()).collect()
    }
}

fn strings<const N: usize>(words: [&str; N]) -> Vec<String> {
    words.into_iter().map(str::to_owned).collect()
}

/// Checks `config` against the example's declared capabilities and its own
/// field rules, then lays out the commands a bundle will run. No I/O.
pub fn plan_package(record: &ExampleRecord, config: &PackageConfig) -> Result<RunPlan, PackageError> {
    let caps = record.capabilities;
    match config.mode {
        ExecutionMode::Mpi if !caps.mpi => return Err(PackageError::CapabilityMismatch(RequiredCapability::Mpi)),
        ExecutionMode::Slurm if !caps.slurm => return Err(PackageError::CapabilityMismatch(RequiredCapability::Slurm)),
        _ => {}
    }
    if config.dataset_path.is_some() && !caps.dataset_replaceable {
        return Err(PackageError::CapabilityMismatch(RequiredCapability::Dataset));
    }
    config.validate()?;
    // Slurm without MPI is a single task.
    if config.mode == ExecutionMode::Slurm && !caps.mpi && config.ranks != 1 {
        return Err(PackageError::CapabilityMismatch(RequiredCapability::Mpi));
    }

    let image = record.container.image.clone();
    if !is_valid_image_ref(&image) {
        return Err(PackageError::InvalidRecord(format!("`{image}` is not a valid image reference")));
    }
    let entrypoint = &record.container.entrypoint;
    if entrypoint.first().is_none_or(|e| e.trim().is_empty()) || entrypoint.iter().any(|a| a.contains('\0')) {
        return Err(PackageError::InvalidRecord("entrypoint is empty or contains NUL".into()));
    }

    let data_binding = config.dataset_path.as_ref().map(|host| DataBinding {
        host_path: host.clone(),
        container_path: CONTAINER_DATA_DIR.into(),
        read_only: config.runtime == ContainerRuntime::Docker,
    });

    let launcher_wrapping = match (config.mode, config.runtime) {
        (ExecutionMode::Local, _) => LauncherWrapping::None,
        (ExecutionMode::Mpi, ContainerRuntime::Docker) => LauncherWrapping::MpirunInContainer { ranks: config.ranks },
        (ExecutionMode::Mpi, ContainerRuntime::Apptainer) => LauncherWrapping::MpirunOnHost { ranks: config.ranks },
        (ExecutionMode::Slurm, _) => LauncherWrapping::Sbatch { ranks: config.ranks },
    };

    let image_acquisition = match config.runtime {
        ContainerRuntime::Docker => ImageAcquisition {
            pull: strings(["docker", "pull", &image]),
            skip_if: (config.pull_policy == PullPolicy::IfAbsent)
                .then(|| PresenceCheck::Command(strings(["docker", "image", "inspect", &image]))),
        },
        ContainerRuntime::Apptainer => {
            let source = format!("docker://{image}");
            match config.pull_policy {
                PullPolicy::IfAbsent => ImageAcquisition {
                    pull: strings(["apptainer", "pull", SIF_FILE, &source]),
                    skip_if: Some(PresenceCheck::FileExists(SIF_FILE.into())),
                },
                PullPolicy::Always => ImageAcquisition {
                    pull: strings(["apptainer", "pull", "--force", SIF_FILE, &source]),
                    skip_if: None,
                },
            }
        }
    };

    let mut invocation = match config.runtime {
        ContainerRuntime::Docker => {
            let mut argv = strings(["docker", "run", "--rm"]);
            if let Some(binding) = &data_binding {
                argv.push("-v".into());
                argv.push(format!("{}:{}:ro", binding.host_path, binding.container_path));
            }
            argv.push(image.clone());
            argv
        }
        ContainerRuntime::Apptainer => {
            let mut argv = strings(["apptainer", "exec"]);
            if let Some(binding) = &data_binding {
                argv.push("--bind".into());
                argv.push(format!("{}:{}", binding.host_path, binding.container_path));
            }
            argv.push(SIF_FILE.into());
            argv
        }
    };
    if let LauncherWrapping::MpirunInContainer { ranks } = launcher_wrapping {
        invocation.extend(strings(["mpirun", "-np", &ranks.to_string()]));
    }
    invocation.extend(entrypoint.iter().cloned());

    Ok(RunPlan {
        slug: record.slug.clone(),
        tool_version: crate::TOOL_VERSION.into(),
        config: config.clone(),
        image,
        image_acquisition,
        container_invocation: invocation,
        launcher_wrapping,
        data_binding,
    })
}
