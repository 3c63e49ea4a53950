use std::fs;
use std::path::Path;

use vizcat_core::packager::{
    assemble_bundle, ContainerRuntime, ExecutionMode, PackageConfig, PullPolicy, RunBundle, RUN_SCRIPT,
};
use vizcat_core::runner::{parse_version, probe_runtimes_in, RunError, RunOutcome, Runner, LOCK_FILE};
use vizcat_testkit::fixture_example_dir;
use vizcat_testkit::golden::{fixture_record, golden_configs};
use vizcat_testkit::stubs::StubRuntime;

fn bundle(config: &PackageConfig, dir: &Path) -> RunBundle {
    assemble_bundle(&fixture_record(), &fixture_example_dir(), config, &dir.join("bundle")).unwrap()
}

fn runner(stubs: &StubRuntime) -> Runner {
    Runner::with_search_path(stubs.search_path()).echo(false)
}

fn transcript(outcome: &RunOutcome) -> Vec<Vec<String>> {
    outcome.command_transcript.iter().chain(&outcome.batch_transcript).cloned().collect()
}

#[test]
fn probe_reports_versions_from_stubs() {
    let stubs = StubRuntime::all();
    let probe = probe_runtimes_in(&stubs.search_path());
    assert!(probe.docker.present);
    assert_eq!(probe.docker.version.as_deref(), Some("24.0.7"));
    assert_eq!(probe.apptainer.version.as_deref(), Some("1.2.5-1.el8"));
    assert!(probe.mpirun.present && probe.sbatch.present);
    assert_eq!(probe.mpirun.version, None);
}

#[test]
fn garbage_version_output_leaves_version_unset() {
    let stubs = StubRuntime::with_tools(&["docker"]);
    stubs.override_tool("docker", "totally not a version banner");
    let probe = probe_runtimes_in(&stubs.search_path());
    assert!(probe.docker.present);
    assert_eq!(probe.docker.version, None);
}

#[test]
fn nothing_installed_means_nothing_present() {
    let empty = tempfile::tempdir().unwrap();
    let probe = probe_runtimes_in(empty.path().as_os_str());
    for tool in ["docker", "apptainer", "mpirun", "sbatch"] {
        assert!(!probe.is_present(tool), "{tool}");
    }
    assert_eq!(probe.docker.version, None);
}

#[test]
fn version_banners() {
    assert_eq!(parse_version("Docker version 24.0.7, build afdd53b").as_deref(), Some("24.0.7"));
    assert_eq!(parse_version("apptainer version 1.3.0").as_deref(), Some("1.3.0"));
    assert_eq!(parse_version("singularity-ce version 3.11.4-focal").as_deref(), Some("3.11.4-focal"));
    assert_eq!(parse_version("Docker version twenty"), None);
}

#[test]
fn missing_runtime_is_reported_before_spawning() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (ContainerRuntime::Docker, ExecutionMode::Local, &[][..], "docker"),
        (ContainerRuntime::Apptainer, ExecutionMode::Local, &["docker"][..], "apptainer"),
        (ContainerRuntime::Apptainer, ExecutionMode::Mpi, &["apptainer"][..], "mpirun"),
        (ContainerRuntime::Docker, ExecutionMode::Slurm, &["docker", "srun"][..], "sbatch"),
    ];
    for (i, (runtime, mode, tools, missing)) in cases.into_iter().enumerate() {
        let (_, config) = golden_configs().into_iter().find(|(_, c)| c.runtime == runtime && c.mode == mode).unwrap();
        let b = bundle(&config, &dir.path().join(i.to_string()));
        let stubs = StubRuntime::with_tools(tools);
        match runner(&stubs).execute(&b, false) {
            Err(RunError::MissingRuntime(name)) => assert_eq!(name, missing),
            other => panic!("expected MissingRuntime({missing}), got {other:?}"),
        }
        assert!(!b.dir.join("logs").exists());
        assert!(stubs.invocations().is_empty());
        assert!(RunError::MissingRuntime(missing.into()).to_string().starts_with("MissingRuntime"));
    }
}

#[test]
fn dry_run_spawns_nothing_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for (name, config) in golden_configs() {
        let b = bundle(&config, &dir.path().join(&name));
        let before: Vec<_> = walkdir::WalkDir::new(&b.dir).into_iter().map(|e| e.unwrap().into_path()).collect();
        let stubs = StubRuntime::all();
        let outcome = runner(&stubs).execute(&b, true).unwrap();
        assert!(outcome.dry_run);
        assert_eq!(outcome.exit_code, 0);
        assert!(!outcome.command_transcript.is_empty());
        assert!(stubs.invocations().is_empty(), "{name}");
        let after: Vec<_> = walkdir::WalkDir::new(&b.dir).into_iter().map(|e| e.unwrap().into_path()).collect();
        assert_eq!(before, after, "{name}");
        // Dry runs need no runtime at all.
        let none = StubRuntime::with_tools(&[]);
        assert!(runner(&none).execute(&b, true).is_ok());
    }
}

#[test]
fn first_transcript_command_follows_pull_policy() {
    let dir = tempfile::tempdir().unwrap();
    let image = fixture_record().container.image;
    for (name, mut config) in golden_configs() {
        for policy in [PullPolicy::IfAbsent, PullPolicy::Always] {
            config.pull_policy = policy;
            let b = bundle(&config, &dir.path().join(format!("{name}-{policy:?}")));
            let first = runner(&StubRuntime::all()).execute(&b, true).unwrap().command_transcript.remove(0);
            let expected: Vec<String> = match (config.runtime, policy) {
                (ContainerRuntime::Docker, PullPolicy::IfAbsent) => {
                    vec!["docker".into(), "image".into(), "inspect".into(), image.clone()]
                }
                (ContainerRuntime::Docker, PullPolicy::Always) => vec!["docker".into(), "pull".into(), image.clone()],
                (ContainerRuntime::Apptainer, PullPolicy::IfAbsent) => {
                    vec!["apptainer".into(), "pull".into(), "image.sif".into(), format!("docker://{image}")]
                }
                (ContainerRuntime::Apptainer, PullPolicy::Always) => {
                    vec![
                        "apptainer".into(),
                        "pull".into(),
                        "--force".into(),
                        "image.sif".into(),
                        format!("docker://{image}"),
                    ]
                }
            };
            assert_eq!(first, expected, "{name} {policy:?}");
        }
    }
}

#[test]
fn transcript_equals_actual_invocations() {
    let dir = tempfile::tempdir().unwrap();
    for (name, config) in golden_configs() {
        let b = bundle(&config, &dir.path().join(&name));
        let stubs = StubRuntime::all();
        let dry = runner(&stubs).execute(&b, true).unwrap();
        let real = runner(&stubs).execute(&b, false).unwrap();
        assert_eq!(real.exit_code, 0, "{name}: {}", fs::read_to_string(&real.stderr_path).unwrap());
        assert_eq!(stubs.invocations(), transcript(&dry), "{name}");
        assert_eq!(transcript(&real), transcript(&dry));
    }
}

#[test]
fn exit_codes_propagate() {
    let dir = tempfile::tempdir().unwrap();
    for (name, config) in golden_configs() {
        let b = bundle(&config, &dir.path().join(&name));
        let stubs = StubRuntime::all();
        for code in [0, 1, 3, 42] {
            stubs.set_exit_code(code);
            let outcome = runner(&stubs).execute(&b, false).unwrap();
            assert_eq!(outcome.exit_code, code, "{name}");
            assert!(!outcome.dry_run);
        }
    }
}

#[test]
fn output_is_captured_in_logs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, config) = golden_configs().remove(0);
    let b = bundle(&config, dir.path());
    let outcome = runner(&StubRuntime::all()).execute(&b, false).unwrap();
    assert_eq!(outcome.stdout_path, b.dir.join("logs/stdout.txt"));
    let stdout = fs::read_to_string(&outcome.stdout_path).unwrap();
    let stderr = fs::read_to_string(&outcome.stderr_path).unwrap();
    assert_eq!(stdout, "pvbatch --mpi /opt/vizcat/examples/golden fixture/pipeline.py\n");
    assert_eq!(stderr, "pvbatch diagnostics\n");
    assert!(outcome.duration >= 0.0);
    assert!(!b.dir.join("logs").join(LOCK_FILE).exists(), "lock is released");
}

#[test]
fn concurrent_execution_of_one_bundle_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let (_, config) = golden_configs().remove(0);
    let b = bundle(&config, dir.path());
    fs::create_dir_all(b.dir.join("logs")).unwrap();
    fs::write(b.dir.join("logs").join(LOCK_FILE), "").unwrap();
    let stubs = StubRuntime::all();
    assert!(matches!(runner(&stubs).execute(&b, false), Err(RunError::Busy(_))));
    assert!(stubs.invocations().is_empty());
}

#[test]
fn foreign_script_lines_are_not_guessed_at() {
    let dir = tempfile::tempdir().unwrap();
    let (_, config) = golden_configs().remove(0);
    let b = bundle(&config, dir.path());
    let script = b.dir.join(RUN_SCRIPT);
    let mut text = fs::read_to_string(&script).unwrap();
    text.push_str("curl https://example.org/x.sh | sh\n");
    fs::write(&script, text).unwrap();
    assert!(matches!(runner(&StubRuntime::all()).execute(&b, true), Err(RunError::UnsupportedScript { line: 10, .. })));
}

#[test]
fn extracted_archives_run_like_the_original() {
    let dir = tempfile::tempdir().unwrap();
    for (name, config) in golden_configs() {
        let original = bundle(&config, &dir.path().join(&name));
        let bytes = vizcat_core::packager::archive_bundle(&original).unwrap();
        let extracted = vizcat_core::packager::extract_archive(&bytes, &dir.path().join(format!("{name}-x"))).unwrap();
        let stubs = StubRuntime::all();
        stubs.set_exit_code(3);
        assert_eq!(runner(&stubs).execute(&extracted, false).unwrap().exit_code, 3, "{name}");
    }
}
