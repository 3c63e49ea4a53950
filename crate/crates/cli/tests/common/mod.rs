#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use vizcat_core::packager::{ExecutionMode, PackageConfig, PullPolicy};

pub const GLYPHS_SLUG: &str = "vector-glyphs-fluid-flow";

/// The binary with a clean environment: no VIZCAT_* variables leak in from
/// the caller.
pub fn vizcat() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vizcat"));
    for (key, _) in std::env::vars_os() {
        if key.to_string_lossy().starts_with("VIZCAT_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

pub fn output(cmd: &mut Command) -> Output {
    cmd.stdin(Stdio::null()).output().unwrap()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Directory holding the golden fixture example.
pub fn fixture_root() -> PathBuf {
    vizcat_testkit::fixture_example_dir().parent().unwrap().to_path_buf()
}

/// `vizcat package` flags equivalent to `config`.
pub fn package_flags(config: &PackageConfig) -> Vec<String> {
    let mut args = vec![
        "--runtime".to_owned(),
        config.runtime.command().to_owned(),
        "--mode".to_owned(),
        config.mode.as_str().to_owned(),
        "--ranks".to_owned(),
        config.ranks.to_string(),
    ];
    if config.pull_policy == PullPolicy::Always {
        args.extend(["--pull".to_owned(), "always".to_owned()]);
    }
    if let Some(path) = &config.dataset_path {
        args.push(format!("--data={path}"));
    }
    if let Some(slurm) = config.slurm.as_ref().filter(|_| config.mode == ExecutionMode::Slurm) {
        args.push(format!("--slurm-partition={}", slurm.partition));
        args.push(format!("--slurm-nodes={}", slurm.nodes));
        args.push(format!("--slurm-tasks-per-node={}", slurm.tasks_per_node));
        args.push(format!("--slurm-time={}", slurm.walltime));
        if let Some(account) = &slurm.account {
            args.push(format!("--slurm-account={account}"));
        }
        for directive in &slurm.extra_directives {
            args.push(format!("--slurm-directive={directive}"));
        }
    }
    args
}

/// A `vizcat serve` child on an ephemeral port.
pub struct Server {
    pub child: Child,
    pub addr: SocketAddr,
}

impl Server {
    pub fn start(root: &Path, extra: &[&str]) -> Self {
        let mut child = vizcat()
            .arg("--root")
            .arg(root)
            .args(["serve", "--port", "0"])
            .args(extra)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
        let addr = loop {
            let line = lines.next().expect("server printed its address").unwrap();
            if let Some(addr) = line.strip_prefix("vizcat: listening on http://") {
                break addr.parse().unwrap();
            }
        };
        // Keep draining so the child never blocks on a full pipe.
        std::thread::spawn(move || lines.for_each(drop));
        Self { child, addr }
    }

    /// One HTTP/1.1 request; returns (status, body).
    pub fn request(&self, method: &str, path: &str, headers: &[(&str, &str)], body: &[u8]) -> (u16, Vec<u8>) {
        let mut stream = TcpStream::connect(self.addr).unwrap();
        let mut head = format!(
            "{method} {path} HTTP/1.1\r\nHost: {}\r\nConnection: close\r\nContent-Length: {}\r\n",
            self.addr,
            body.len()
        );
        for (name, value) in headers {
            head.push_str(&format!("{name}: {value}\r\n"));
        }
        head.push_str("\r\n");
        stream.write_all(head.as_bytes()).unwrap();
        stream.write_all(body).unwrap();
        let mut raw = Vec::new();
        stream.read_to_end(&mut raw).unwrap();
        let split = raw.windows(4).position(|w| w == b"\r\n\r\n").expect("complete response");
        let head = std::str::from_utf8(&raw[..split]).unwrap();
        assert!(!head.to_ascii_lowercase().contains("transfer-encoding: chunked"), "{head}");
        let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
        (status, raw[split + 4..].to_vec())
    }

    pub fn get(&self, path: &str) -> (u16, String) {
        let (status, body) = self.request("GET", path, &[], b"");
        (status, String::from_utf8(body).unwrap())
    }

    /// Sends SIGINT and returns the exit code.
    pub fn interrupt(mut self) -> i32 {
        let pid = i32::try_from(self.child.id()).unwrap();
        // SAFETY: signalling our own child process.
        assert_eq!(unsafe { libc::kill(pid, libc::SIGINT) }, 0);
        self.child.wait().unwrap().code().expect("exited after SIGINT")
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
