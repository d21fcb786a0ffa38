//! Isolated execution of untrusted Python 3 code.
//!
//! Each invocation gets its own scratch directory under
//! `<workspace>/sandbox/<invocation-id>/` holding `solution.py`, `stdin.txt`,
//! `stdout.txt` and `stderr.txt`. The child runs in its own process group and
//! network namespace with kernel resource limits, and the guest runner
//! (`assets/sandbox/runner.py`) installs an audit hook that refuses sockets,
//! subprocesses and any write outside the scratch directory.

use std::fs::{self, File};
use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

const RUNNER: &str = include_str!("../../assets/sandbox/runner.py");
/// Exit status the runner uses after catching `MemoryError`.
const MEMORY_EXIT: i32 = 99;
const MAX_OUTPUT_FILE: u64 = 16 * 1024 * 1024;
const MAX_CAPTURE: u64 = 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandboxPolicy {
    /// Wall-clock budget for one run.
    #[serde(with = "duration_secs")]
    pub wall_clock_limit: Duration,
    /// Address-space limit in bytes.
    pub memory_limit: u64,
    /// Must stay `false` for student code; the code interpreter rejects it.
    pub network_allowed: bool,
    /// Keep the scratch directory after the run (debugging aid).
    #[serde(default)]
    pub keep_scratch: bool,
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub(super) fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub(super) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

impl Default for SandboxPolicy {
    fn default() -> Self {
        Self {
            wall_clock_limit: Duration::from_secs(10),
            memory_limit: 256 * 1024 * 1024,
            network_allowed: false,
            keep_scratch: false,
        }
    }
}

impl SandboxPolicy {
    pub fn with_wall_clock(mut self, limit: Duration) -> Self {
        self.wall_clock_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<(), SandboxError> {
        if self.wall_clock_limit.is_zero() {
            return Err(SandboxError::InvalidPolicy("wall-clock limit must be positive".into()));
        }
        if self.memory_limit == 0 {
            return Err(SandboxError::InvalidPolicy("memory limit must be positive".into()));
        }
        if self.network_allowed {
            return Err(SandboxError::InvalidPolicy(
                "network access is never granted to student code".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecVerdict {
    Completed,
    TimedOut,
    MemoryExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub verdict: ExecVerdict,
    pub elapsed_ms: u64,
}

impl ExecutionResult {
    /// Ran to completion with exit status 0.
    pub fn succeeded(&self) -> bool {
        self.verdict == ExecVerdict::Completed && self.exit_code == Some(0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SandboxError {
    #[error("source code is empty")]
    EmptySource,
    #[error("at least one test case is required")]
    NoTestCases,
    #[error("invalid sandbox policy: {0}")]
    InvalidPolicy(String),
    #[error("sandbox setup failed: {0}")]
    Setup(String),
}

/// Runs source code under a policy. Crashes and timeouts of the guest
/// program are verdicts inside the `Ok` value; `Err` means the host could
/// not run anything.
pub trait CodeExecutor: Send + Sync {
    fn execute(
        &self,
        source: &str,
        stdin: &str,
        policy: &SandboxPolicy,
    ) -> Result<ExecutionResult, SandboxError>;
}

#[derive(Debug, Clone)]
pub struct PythonSandbox {
    workspace: PathBuf,
    interpreter: PathBuf,
}

impl PythonSandbox {
    pub fn new(workspace: impl Into<PathBuf>) -> Self {
        Self {
            workspace: workspace.into(),
            interpreter: PathBuf::from("python3"),
        }
    }

    pub fn with_interpreter(mut self, interpreter: impl Into<PathBuf>) -> Self {
        self.interpreter = interpreter.into();
        self
    }

    pub fn scratch_root(&self) -> PathBuf {
        self.workspace.join("sandbox")
    }

    fn prepare_scratch(&self, source: &str, stdin: &str) -> Result<PathBuf, SandboxError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let dir = self.scratch_root().join(id);
        fs::create_dir_all(&dir)
            .map_err(|e| SandboxError::Setup(format!("creating {}: {e}", dir.display())))?;
        let dir = dir
            .canonicalize()
            .map_err(|e| SandboxError::Setup(format!("resolving scratch dir: {e}")))?;
        fs::write(dir.join("solution.py"), source)
            .and_then(|_| fs::write(dir.join("stdin.txt"), stdin))
            .map_err(|e| SandboxError::Setup(format!("writing scratch files: {e}")))?;
        Ok(dir)
    }
}

fn read_capped(path: &Path) -> String {
    let mut buf = Vec::new();
    if let Ok(f) = File::open(path) {
        let _ = f.take(MAX_CAPTURE).read_to_end(&mut buf);
    }
    String::from_utf8_lossy(&buf).into_owned()
}

fn set_limit(resource: libc::__rlimit_resource_t, value: u64) {
    let lim = libc::rlimit {
        rlim_cur: value,
        rlim_max: value,
    };
    // SAFETY: plain syscall on a stack value; async-signal-safe.
    unsafe {
        libc::setrlimit(resource, &lim);
    }
}

impl CodeExecutor for PythonSandbox {
    fn execute(
        &self,
        source: &str,
        stdin: &str,
        policy: &SandboxPolicy,
    ) -> Result<ExecutionResult, SandboxError> {
        if source.trim().is_empty() {
            return Err(SandboxError::EmptySource);
        }
        policy.validate()?;
        let dir = self.prepare_scratch(source, stdin)?;
        let open = |name: &str, create: bool| -> Result<File, SandboxError> {
            let p = dir.join(name);
            let f = if create { File::create(&p) } else { File::open(&p) };
            f.map_err(|e| SandboxError::Setup(format!("opening {}: {e}", p.display())))
        };

        let memory = policy.memory_limit;
        let cpu_secs = policy.wall_clock_limit.as_secs() + 1;
        let mut cmd = Command::new(&self.interpreter);
        // Isolated mode without site-packages: stdlib only, faster startup.
        cmd.arg("-I")
            .arg("-S")
            .arg("-B")
            .arg("-c")
            .arg(RUNNER)
            .arg(&dir)
            .arg(dir.join("solution.py"))
            .current_dir(&dir)
            .env_clear()
            .env("PATH", "/usr/local/bin:/usr/bin:/bin")
            .env("HOME", &dir)
            .env("TMPDIR", &dir)
            .env("LANG", "C.UTF-8")
            .env("PYTHONHASHSEED", "0")
            .env("PYTHONIOENCODING", "utf-8")
            .stdin(Stdio::from(open("stdin.txt", false)?))
            .stdout(Stdio::from(open("stdout.txt", true)?))
            .stderr(Stdio::from(open("stderr.txt", true)?));
        // SAFETY: only async-signal-safe libc calls run between fork and exec.
        unsafe {
            cmd.pre_exec(move || {
                libc::setsid();
                if libc::unshare(libc::CLONE_NEWNET) != 0 {
                    // Unprivileged hosts: a user namespace grants the right
                    // to create the network namespace.
                    libc::unshare(libc::CLONE_NEWUSER | libc::CLONE_NEWNET);
                }
                set_limit(libc::RLIMIT_AS, memory);
                set_limit(libc::RLIMIT_CPU, cpu_secs);
                set_limit(libc::RLIMIT_FSIZE, MAX_OUTPUT_FILE);
                set_limit(libc::RLIMIT_CORE, 0);
                set_limit(libc::RLIMIT_NOFILE, 64);
                Ok(())
            });
        }

        let started = Instant::now();
        let mut child = cmd.spawn().map_err(|e| {
            SandboxError::Setup(format!(
                "spawning {}: {e}",
                self.interpreter.display()
            ))
        })?;
        let pid = child.id() as i32;
        let status = child
            .wait_timeout(policy.wall_clock_limit)
            .map_err(|e| SandboxError::Setup(format!("waiting for child: {e}")))?;
        let (status, timed_out) = match status {
            Some(s) => (s, false),
            None => {
                // SAFETY: signalling the child's own process group.
                unsafe {
                    libc::killpg(pid, libc::SIGKILL);
                }
                let s = child
                    .wait()
                    .map_err(|e| SandboxError::Setup(format!("reaping child: {e}")))?;
                (s, true)
            }
        };
        let elapsed_ms = started.elapsed().as_millis() as u64;

        let stdout = read_capped(&dir.join("stdout.txt"));
        let stderr = read_capped(&dir.join("stderr.txt"));
        if !policy.keep_scratch {
            let _ = fs::remove_dir_all(&dir);
        }

        let exit_code = status.code();
        let verdict = if timed_out {
            ExecVerdict::TimedOut
        } else if exit_code == Some(MEMORY_EXIT) {
            ExecVerdict::MemoryExceeded
        } else {
            ExecVerdict::Completed
        };
        Ok(ExecutionResult {
            stdout,
            stderr,
            exit_code,
            signal: status.signal(),
            verdict,
            elapsed_ms,
        })
    }
}
