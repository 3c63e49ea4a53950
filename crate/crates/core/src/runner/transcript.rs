//! Parser for the script grammar emitted by the packager.

use crate::packager::render::{
    shell_quote, CD_TO_BUNDLE, FILE_TEST_PREFIX, FILE_TEST_SUFFIX, PROBE_PREFIX, PROBE_SUFFIX, STRICT_MODE,
};

use super::RunError;

/// One external command as an argument vector.
pub type Command = Vec<String>;

/// Commands a generated script would start, in order, assuming a cold cache
/// (every "skip if present" check fails and the pull runs). Shell builtins
/// and file tests are not commands.
pub fn parse_script(script: &str) -> Result<Vec<Command>, RunError> {
    let mut commands = Vec::new();
    for (index, raw) in script.lines().enumerate() {
        let line = raw.trim();
        let unsupported = || RunError::UnsupportedScript { line: index + 1, text: raw.to_owned() };
        if line.is_empty() || line.starts_with('#') || line == STRICT_MODE || line == CD_TO_BUNDLE || line == "fi" {
            continue;
        }
        if line.starts_with(FILE_TEST_PREFIX) && line.ends_with(FILE_TEST_SUFFIX) {
            continue;
        }
        let body = line.strip_prefix(PROBE_PREFIX).and_then(|l| l.strip_suffix(PROBE_SUFFIX)).unwrap_or(line);
        // Generated lines are exactly the quoted join of their words, which
        // rules out operators, substitutions and redirections.
        match shlex::split(body) {
            Some(argv) if !argv.is_empty() && join(&argv) == body => commands.push(argv),
            _ => return Err(unsupported()),
        }
    }
    Ok(commands)
}

fn join(argv: &[String]) -> String {
    argv.iter().map(|w| shell_quote(w)).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_probe_and_commands() {
        let script = "#!/bin/sh\nset -eu\n# note\ncd \"$(dirname \"$0\")\"\n\
            if ! docker image inspect alpine >/dev/null 2>&1; then\n  docker pull alpine\nfi\n\
            docker run --rm -v '/a b;c:/data:ro' alpine echo 'hi there'\n";
        let cmds = parse_script(script).unwrap();
        assert_eq!(
            cmds,
            vec![
                vec!["docker", "image", "inspect", "alpine"],
                vec!["docker", "pull", "alpine"],
                vec!["docker", "run", "--rm", "-v", "/a b;c:/data:ro", "alpine", "echo", "hi there"],
            ]
        );
    }

    #[test]
    fn file_tests_are_not_commands() {
        let script = "if [ ! -e image.sif ]; then\n  apptainer pull image.sif docker://alpine\nfi\n";
        assert_eq!(parse_script(script).unwrap(), vec![vec!["apptainer", "pull", "image.sif", "docker://alpine"]]);
    }

    #[test]
    fn rejects_foreign_constructs() {
        assert!(parse_script("while true; do x; done\nif foo; then\n").is_err());
        assert!(parse_script("echo 'unterminated\n").is_err());
    }
}
