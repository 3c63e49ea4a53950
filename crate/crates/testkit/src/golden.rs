//! The reviewed packaging matrix: one configuration per runtime × mode.

use vizcat_core::catalog::{parse_example, ExampleRecord};
use vizcat_core::packager::{ContainerRuntime, ExecutionMode, PackageConfig, PullPolicy, SlurmSettings};

use crate::fixture_example_dir;

pub const GOLDEN_DATASET: &str = "/scratch/shared data/run-42";

/// sha256 of the archive of each golden bundle, in `golden_configs` order.
pub const PINNED_DIGESTS: [(&str, &str); 6] = [
    ("docker-local", "6fe6669c2df440b27c5e2398463c61197b135e0c1714ca4cec05cc4ef945f379"),
    ("docker-mpi", "f91cde49b291926c486a992c46876f4850824e2a3c4f6c4cae78b718cc61b33f"),
    ("docker-slurm", "80aa29c3ffbec367097a1319d13636ba8bd1742842d73d475b0630e4ad553213"),
    ("apptainer-local", "39b85a45dd36cb6f49418cae19ccc8149cf02a9cbddd8a889d1a2bcbba8573f1"),
    ("apptainer-mpi", "67bd0104ba9054669625126b2cc3c16c8edda26964b7f14a3b4fa398288ee907"),
    ("apptainer-slurm", "ae331d7e734a366cbb5a7c078f8067a8bacca257603a9c0c5f29ae8900380abb"),
];

pub fn fixture_record() -> ExampleRecord {
    parse_example(&fixture_example_dir()).expect("golden fixture is valid")
}

pub fn slurm_settings() -> SlurmSettings {
    SlurmSettings {
        partition: "batch".into(),
        nodes: 2,
        tasks_per_node: 4,
        walltime: "01:30:00".into(),
        account: Some("vizlab".into()),
        extra_directives: vec!["--mail-type=END".into()],
    }
}

/// (bundle name, config) for all six combinations, in a fixed order.
pub fn golden_configs() -> Vec<(String, PackageConfig)> {
    let mut out = Vec::new();
    for runtime in [ContainerRuntime::Docker, ContainerRuntime::Apptainer] {
        for mode in [ExecutionMode::Local, ExecutionMode::Mpi, ExecutionMode::Slurm] {
            let mut config = PackageConfig::new(runtime, mode);
            config.dataset_path = Some(GOLDEN_DATASET.into());
            match mode {
                ExecutionMode::Local => {}
                ExecutionMode::Mpi => {
                    config.ranks = 4;
                    config.pull_policy = PullPolicy::Always;
                }
                ExecutionMode::Slurm => {
                    config.ranks = 8;
                    config.slurm = Some(slurm_settings());
                }
            }
            out.push((format!("{}-{}", runtime.command(), mode.as_str()), config));
        }
    }
    out
}
