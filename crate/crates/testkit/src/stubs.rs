//! Stub `docker`, `apptainer`, `mpirun`, `srun` and `sbatch` executables.
//!
//! Each stub appends its argv to the harness log (fields separated by 0x1f, one
//! invocation per line) and then behaves just enough like the real tool for
//! a generated script to run to completion: container runtimes and launchers
//! exec the wrapped command, `docker image inspect` reports a cold cache and
//! `sbatch` runs the job script synchronously. Only outermost invocations
//! are logged; commands reached through another stub are not.
//!
//! Inside a container the wrapped command resolves against a separate
//! image directory holding `mpirun` and the leaf entrypoint stubs, so the
//! host search path only contains what was installed explicitly. The leaf
//! stubs exit with the code set by
//! [`StubRuntime::set_exit_code`].

use std::ffi::OsString;
use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

const PRELUDE: &str = r#"
name=${0##*/}
log() {
    if [ -z "${VIZCAT_STUB_NESTED:-}" ]; then
        {
            printf '%s' "$name"
            for a in "$@"; do printf '\037%s' "$a"; done
            printf '\n'
        } >>"$stub_log"
    fi
}
"#;

const DOCKER: &str = r#"
if [ "${1:-}" = "--version" ]; then echo "Docker version 24.0.7, build afdd53b"; exit 0; fi
log "$@"
case "$1" in
    image) exit 1 ;;
    pull) exit 0 ;;
    run)
        shift
        while :; do
            case "$1" in
                --rm) shift ;;
                -v) shift 2 ;;
                *) break ;;
            esac
        done
        shift
        VIZCAT_STUB_NESTED=1 PATH="$stub_image:$PATH" exec "$@"
        ;;
esac
echo "docker stub: unsupported: $*" >&2
exit 125
"#;

const APPTAINER: &str = r#"
if [ "${1:-}" = "--version" ]; then echo "apptainer version 1.2.5-1.el8"; exit 0; fi
log "$@"
case "$1" in
    pull) exit 0 ;;
    exec)
        shift
        if [ "$1" = "--bind" ]; then shift 2; fi
        shift
        VIZCAT_STUB_NESTED=1 PATH="$stub_image:$PATH" exec "$@"
        ;;
esac
echo "apptainer stub: unsupported: $*" >&2
exit 255
"#;

const MPIRUN: &str = r#"
log "$@"
[ "$1" = "-np" ] && shift 2
VIZCAT_STUB_NESTED=1 exec "$@"
"#;

const SRUN: &str = r#"
log "$@"
VIZCAT_STUB_NESTED=1 exec "$@"
"#;

const SBATCH: &str = r#"
log "$@"
exec /bin/sh "$1"
"#;

const LEAF: &str = r#"
echo "$name $*"
echo "$name diagnostics" >&2
code=0
[ -f "$stub_exit" ] && read -r code <"$stub_exit"
exit "$code"
"#;

/// Entrypoints of the seed corpus and the golden fixture.
pub const LEAF_COMMANDS: &[&str] = &["pvbatch", "pvpython", "python3"];

pub const ALL_TOOLS: &[&str] = &["docker", "apptainer", "mpirun", "srun", "sbatch"];

/// A directory of stubs usable as the complete tool search path.
pub struct StubRuntime {
    dir: tempfile::TempDir,
    log: PathBuf,
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.to_str().unwrap().replace('\'', "'\\''"))
}

fn write_exec(path: &Path, body: &str) {
    fs::write(path, body).unwrap();
    fs::set_permissions(path, fs::Permissions::from_mode(0o755)).unwrap();
}

impl StubRuntime {
    /// Installs the named host tools plus `dirname`, which the generated
    /// scripts need.
    pub fn with_tools(tools: &[&str]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("bin");
        fs::create_dir(&bin).unwrap();
        let image = dir.path().join("image");
        fs::create_dir(&image).unwrap();
        let log = dir.path().join("invocations.log");
        let header = format!(
            "#!/bin/sh\nstub_log={}\nstub_exit={}\nstub_image={}\n{PRELUDE}",
            shell_quote(&log),
            shell_quote(&dir.path().join("exit_code")),
            shell_quote(&image)
        );
        for tool in tools {
            let body = match *tool {
                "docker" => DOCKER,
                "apptainer" => APPTAINER,
                "mpirun" => MPIRUN,
                "srun" => SRUN,
                "sbatch" => SBATCH,
                other => panic!("no stub for {other}"),
            };
            write_exec(&bin.join(tool), &format!("{header}{body}"));
        }
        write_exec(&image.join("mpirun"), &format!("{header}{MPIRUN}"));
        for leaf in LEAF_COMMANDS {
            write_exec(&image.join(leaf), &format!("{header}{LEAF}"));
        }
        let dirname =
            ["/usr/bin/dirname", "/bin/dirname"].into_iter().find(|p| Path::new(p).exists()).expect("dirname");
        std::os::unix::fs::symlink(dirname, bin.join("dirname")).unwrap();
        Self { dir, log }
    }

    pub fn all() -> Self {
        Self::with_tools(ALL_TOOLS)
    }

    /// Replaces a tool with a script that prints `output` for any argument.
    pub fn override_tool(&self, tool: &str, output: &str) {
        let path = self.bin().join(tool);
        let _ = fs::remove_file(&path);
        write_exec(&path, &format!("#!/bin/sh\nprintf '%s\\n' '{}'\n", output.replace('\'', "'\\''")));
    }

    pub fn set_exit_code(&self, code: i32) {
        fs::write(self.dir.path().join("exit_code"), format!("{code}\n")).unwrap();
    }

    pub fn bin(&self) -> PathBuf {
        self.dir.path().join("bin")
    }

    pub fn search_path(&self) -> OsString {
        self.bin().into_os_string()
    }

    pub fn log_path(&self) -> &Path {
        &self.log
    }

    /// Logged invocations in order, each as its argv.
    pub fn invocations(&self) -> Vec<Vec<String>> {
        let text = fs::read_to_string(&self.log).unwrap_or_default();
        text.lines().map(|line| line.split('\x1f').map(str::to_owned).collect()).collect()
    }

    pub fn clear_log(&self) {
        let _ = fs::remove_file(&self.log);
    }
}
