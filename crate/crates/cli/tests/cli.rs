mod common;

use std::fs;
use std::path::Path;

use common::*;
use serde_json::Value;
use vizcat_core::catalog::{parse_example, scan_repository, ValidationReport};
use vizcat_core::json::canonical_json;
use vizcat_core::packager::{ContainerRuntime, ExecutionMode, PackageConfig, RUN_SCRIPT};
use vizcat_core::search::{search, SearchQuery};
use vizcat_testkit::files::{copy_dir, tree};
use vizcat_testkit::golden::golden_configs;
use vizcat_testkit::stubs::StubRuntime;
use vizcat_testkit::{corpus_dir, golden_bundles_dir};

fn in_corpus(args: &[&str]) -> std::process::Output {
    output(vizcat().arg("--root").arg(corpus_dir()).args(args))
}

#[test]
fn validate_seed_corpus_succeeds() {
    let out = in_corpus(&["validate"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("17 valid example(s), 0 error(s)"));
}

#[test]
fn validate_reports_broken_folder() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&corpus_dir().join(GLYPHS_SLUG), &dir.path().join(GLYPHS_SLUG));
    fs::remove_file(dir.path().join(GLYPHS_SLUG).join("description.md")).unwrap();

    let out = output(vizcat().arg("validate").arg(dir.path()));
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains(GLYPHS_SLUG));

    // A single folder can be checked directly too.
    let out = output(vizcat().arg("validate").arg(dir.path().join(GLYPHS_SLUG)));
    assert_eq!(code(&out), 1);
}

#[test]
fn validate_json_is_the_report() {
    let out = in_corpus(&["validate", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let report: ValidationReport = serde_json::from_str(&stdout(&out)).unwrap();
    let (_, expected) = scan_repository(&corpus_dir()).unwrap();
    assert_eq!(report, expected);
}

#[test]
fn validate_missing_path_is_not_found() {
    let out = output(vizcat().args(["validate", "/definitely/not/here"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn search_by_tag_lists_matches() {
    let out = in_corpus(&["search", "--tag", "CFD"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with(GLYPHS_SLUG)));
    assert!(!text.contains("volume-rendering"));
}

#[test]
fn search_json_equals_library_output() {
    let out =
        in_corpus(&["search", "flow", "--caps", "mpi,slurm", "--sort", "title_asc", "--page-size", "3", "--json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (catalog, _) = scan_repository(&corpus_dir()).unwrap();
    let mut query = SearchQuery::text("flow");
    query.caps = [vizcat_core::catalog::Capability::Mpi, vizcat_core::catalog::Capability::Slurm].into();
    query.sort = Some(vizcat_core::search::SortKey::TitleAsc);
    query.page_size = 3;
    assert_eq!(stdout(&out).trim_end(), canonical_json(&search(&catalog, &query).unwrap()));
}

#[test]
fn search_rejects_bad_page_size() {
    let out = in_corpus(&["search", "--page-size", "0"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn show_prints_every_tag_once() {
    let out = in_corpus(&["show", GLYPHS_SLUG]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("Vector Glyphs of Fluid Flow\n"));
    for (category, tags) in [("DataType", "Vector, 2D, 3D"), ("Technique", "Glyphs"), ("Domain", "CFD")] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{category}:")) && l.ends_with(tags)), "{category}");
    }
    for section in ["description", "instructions", "limitations", "references", "resources"] {
        assert!(text.contains(&format!("  {section} (")), "{section}");
    }
}

#[test]
fn show_json_is_the_record() {
    let out = in_corpus(&["show", GLYPHS_SLUG, "--json"]);
    let record = parse_example(&corpus_dir().join(GLYPHS_SLUG)).unwrap();
    assert_eq!(stdout(&out).trim_end(), canonical_json(&record));
}

#[test]
fn show_unknown_slug_exits_two() {
    let out = in_corpus(&["show", "no-such-example"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not found"));
}

#[test]
fn package_matches_goldens() {
    let scratch = tempfile::tempdir().unwrap();
    for (name, config) in golden_configs() {
        let out_dir = scratch.path().join(&name);
        let out = output(
            vizcat()
                .arg("--root")
                .arg(fixture_root())
                .args(["package", "golden-fixture", "-o"])
                .arg(&out_dir)
                .args(package_flags(&config)),
        );
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        assert_eq!(tree(&out_dir), tree(&golden_bundles_dir().join(&name)), "{name}");
    }
}

#[test]
fn slurm_ranks_default_to_nodes_times_tasks() {
    let scratch = tempfile::tempdir().unwrap();
    let (_, config) = golden_configs().into_iter().find(|(n, _)| n == "docker-slurm").unwrap();
    let flags: Vec<_> = package_flags(&config).into_iter().filter(|f| f != "--ranks" && f != "8").collect();
    let out_dir = scratch.path().join("b");
    let out = output(
        vizcat().arg("--root").arg(fixture_root()).args(["package", "golden-fixture", "-o"]).arg(&out_dir).args(flags),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let written: PackageConfig = serde_json::from_slice(&fs::read(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(written, config);
}

#[test]
fn package_conflicts_exit_three() {
    let scratch = tempfile::tempdir().unwrap();
    let (catalog, _) = scan_repository(&corpus_dir()).unwrap();
    let serial = catalog.iter().find(|r| !r.capabilities.mpi).expect("a serial example in the corpus");
    let out = output(
        vizcat()
            .arg("--root")
            .arg(corpus_dir())
            .args(["package", &serial.slug, "--runtime", "docker", "--mode", "mpi", "--ranks", "2", "-o"])
            .arg(scratch.path().join("x")),
    );
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("mpi"), "{}", stderr(&out));
    assert!(!scratch.path().join("x").exists());

    let out = in_corpus(&["package", GLYPHS_SLUG, "--runtime", "docker", "--mode", "slurm"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("--slurm-partition"));

    let out = in_corpus(&["package", "nope", "--runtime", "docker"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn archive_to_stdout_equals_archive_file() {
    let scratch = tempfile::tempdir().unwrap();
    let file = scratch.path().join("b.tar.gz");
    let base = |cmd: &mut std::process::Command| {
        cmd.arg("--root").arg(corpus_dir()).args(["package", GLYPHS_SLUG, "--runtime", "apptainer", "--archive"]);
    };
    let mut cmd = vizcat();
    base(&mut cmd);
    let to_stdout = output(cmd.args(["-o", "-"]));
    assert_eq!(code(&to_stdout), 0);
    let mut cmd = vizcat();
    base(&mut cmd);
    let to_file = output(cmd.arg("-o").arg(&file));
    assert_eq!(code(&to_file), 0);
    assert_eq!(to_stdout.stdout, fs::read(&file).unwrap());

    // Refuses to overwrite.
    let mut cmd = vizcat();
    base(&mut cmd);
    assert_eq!(code(&output(cmd.arg("-o").arg(&file))), 3);
}

fn package_fixture(config: &PackageConfig, out_dir: &Path) {
    let out = output(
        vizcat()
            .arg("--root")
            .arg(fixture_root())
            .args(["package", "golden-fixture", "-o"])
            .arg(out_dir)
            .args(package_flags(config)),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

fn dry_run_lines(stubs: &StubRuntime, bundle: &Path) -> Vec<Vec<String>> {
    let out = output(vizcat().env("PATH", stubs.search_path()).args(["run", "--dry-run"]).arg(bundle));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    stdout(&out).lines().filter(|l| !l.starts_with('#')).map(|l| shlex::split(l).unwrap()).collect()
}

#[test]
fn run_dry_run_prints_what_runs() {
    let scratch = tempfile::tempdir().unwrap();
    for (name, config) in golden_configs() {
        let stubs = StubRuntime::all();
        let bundle = scratch.path().join(&name);
        package_fixture(&config, &bundle);
        let planned = dry_run_lines(&stubs, &bundle);
        assert!(stubs.invocations().is_empty(), "{name}: dry run spawned tools");

        let out = output(vizcat().env("PATH", stubs.search_path()).arg("run").arg(&bundle));
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        assert_eq!(planned, stubs.invocations(), "{name}");
        assert!(stdout(&out).contains("pvbatch"), "{name}: child output is streamed");
    }
}

#[test]
fn run_propagates_child_exit_codes() {
    let scratch = tempfile::tempdir().unwrap();
    let bundle = scratch.path().join("b");
    package_fixture(&PackageConfig::new(ContainerRuntime::Docker, ExecutionMode::Local), &bundle);
    let stubs = StubRuntime::all();
    for expected in [0, 1, 3, 42] {
        stubs.set_exit_code(expected);
        let out = output(vizcat().env("PATH", stubs.search_path()).arg("run").arg(&bundle));
        assert_eq!(code(&out), expected, "{}", stderr(&out));
    }
}

#[test]
fn run_without_runtime_exits_four() {
    let scratch = tempfile::tempdir().unwrap();
    let bundle = scratch.path().join("b");
    package_fixture(&PackageConfig::new(ContainerRuntime::Apptainer, ExecutionMode::Local), &bundle);
    let stubs = StubRuntime::with_tools(&["docker"]);
    let out = output(vizcat().env("PATH", stubs.search_path()).arg("run").arg(&bundle));
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("MissingRuntime"));
    assert!(stderr(&out).contains("apptainer"));
}

#[test]
fn run_on_non_bundle_exits_two() {
    let scratch = tempfile::tempdir().unwrap();
    let out = output(vizcat().arg("run").arg(scratch.path()));
    assert_eq!(code(&out), 2);
    assert!(!scratch.path().join(RUN_SCRIPT).exists());
}

#[test]
fn serve_answers_and_stops_on_interrupt() {
    let server = Server::start(&corpus_dir(), &[]);
    let (status, body) = server.get("/api/health");
    assert_eq!(status, 200);
    let health: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(health["examples"], 17);
    let (status, body) = server.get("/api/examples?tags=CFD&page_size=2");
    assert_eq!(status, 200);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["items"].as_array().unwrap().len(), 2);
    assert_eq!(server.interrupt(), 0);
}

#[test]
fn serve_reload_uses_admin_token() {
    let root = tempfile::tempdir().unwrap();
    copy_dir(&corpus_dir().join(GLYPHS_SLUG), &root.path().join(GLYPHS_SLUG));
    let server = Server::start(root.path(), &["--admin-token", "s3cret"]);
    assert_eq!(server.request("POST", "/api/reload", &[], b"").0, 401);

    copy_dir(&corpus_dir().join(GLYPHS_SLUG), &root.path().join("another-copy"));
    assert_eq!(server.request("POST", "/api/reload", &[("Authorization", "Bearer s3cret")], b"").0, 200);
    let (_, body) = server.get("/api/health");
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["examples"], 2);
    assert_eq!(server.interrupt(), 0);
}

#[test]
fn serve_on_missing_root_is_not_found() {
    let out = output(vizcat().args(["--root", "/definitely/not/here", "serve", "--port", "0"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn new_scaffolds_a_valid_example() {
    let root = tempfile::tempdir().unwrap();
    let out = output(vizcat().arg("--root").arg(root.path()).args([
        "new",
        "my-example",
        "--title",
        "My Example",
        "--tag",
        "Scalar:DataType",
        "--tag",
        "Isosurface:Technique",
        "--author",
        "Jo Doe",
        "--entrypoint",
        "pvpython '/opt/my example/run.py'",
        "--mpi",
        "--slurm",
    ]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let validate = output(vizcat().arg("validate").arg(root.path()));
    assert_eq!(code(&validate), 0, "{}", stdout(&validate));

    let record = parse_example(&root.path().join("my-example")).unwrap();
    assert_eq!(record.title, "My Example");
    assert_eq!(record.authors, ["Jo Doe"]);
    assert_eq!(record.container.entrypoint, ["pvpython", "/opt/my example/run.py"]);
    assert!(record.capabilities.mpi && record.capabilities.slurm && !record.capabilities.preview);

    let again = output(vizcat().arg("--root").arg(root.path()).args([
        "new",
        "my-example",
        "--title",
        "Again",
        "--tag",
        "Scalar:DataType",
    ]));
    assert_eq!(code(&again), 3);
}

#[test]
fn new_rejects_invalid_records_without_writing() {
    let root = tempfile::tempdir().unwrap();
    // No DataType tag.
    let out = output(vizcat().arg("--root").arg(root.path()).args([
        "new",
        "lonely",
        "--title",
        "Lonely",
        "--tag",
        "Glyphs:Technique",
    ]));
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(!root.path().join("lonely").exists());

    let out = output(vizcat().arg("--root").arg(root.path()).args(["new", "x", "--title", "X", "--tag", "Scalar"]));
    assert_eq!(code(&out), 3);
}
