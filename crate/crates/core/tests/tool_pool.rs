mod common;

use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use codeedu_core::llm::{Gateway, MockProvider, ScriptedFixture};
use codeedu_core::tools::{
    run_unit_tests, CodeExecutor, Crawler, ExecVerdict, PythonSandbox, SandboxPolicy, TestCase,
    ToolContext, ToolInvoker, ToolOutput, ToolPool,
};
use common::file_tree;
use serde_json::json;

#[test]
fn infinite_loop_times_out_within_limit_plus_slack() {
    let dir = tempfile::tempdir().unwrap();
    let sandbox = PythonSandbox::new(dir.path());
    let policy = SandboxPolicy::default().with_wall_clock(Duration::from_secs(1));
    let start = Instant::now();
    let r = sandbox.execute("while True:\n    pass\n", "", &policy).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(r.verdict, ExecVerdict::TimedOut);
    assert!(elapsed < Duration::from_secs(3), "took {elapsed:?}");
}

#[test]
fn sleeping_child_is_killed_with_its_group() {
    let dir = tempfile::tempdir().unwrap();
    let sandbox = PythonSandbox::new(dir.path());
    let policy = SandboxPolicy::default().with_wall_clock(Duration::from_millis(500));
    let start = Instant::now();
    let r = sandbox
        .execute("import time\ntime.sleep(30)\n", "", &policy)
        .unwrap();
    assert_eq!(r.verdict, ExecVerdict::TimedOut);
    assert!(start.elapsed() < Duration::from_millis(2500));
}

#[test]
fn network_attempt_reaches_no_canary() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let port = listener.local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let sandbox = PythonSandbox::new(dir.path());
    let source = format!(
        "import socket\ns = socket.create_connection(('127.0.0.1', {port}), timeout=2)\ns.sendall(b'leak')\nprint('connected')\n"
    );
    let r = sandbox.execute(&source, "", &SandboxPolicy::default()).unwrap();
    assert_ne!(r.exit_code, Some(0));
    assert!(!r.stdout.contains("connected"));
    assert!(!r.stderr.is_empty());
    std::thread::sleep(Duration::from_millis(200));
    match listener.accept() {
        Err(e) => assert_eq!(e.kind(), std::io::ErrorKind::WouldBlock),
        Ok((_, peer)) => panic!("canary received a connection from {peer}"),
    }
}

#[test]
fn writes_do_not_escape_scratch() {
    let base = tempfile::tempdir().unwrap();
    let workspace = base.path().join("workspace");
    let outside = base.path().join("outside");
    std::fs::create_dir_all(&workspace).unwrap();
    std::fs::create_dir_all(&outside).unwrap();
    let before = file_tree(base.path());

    let sandbox = PythonSandbox::new(&workspace);
    let source = format!(
        r#"
import os
targets = [{outside:?} + "/abs.txt", "../../../outside/rel.txt", "../../escape.txt", "/tmp/codeedu-escape-canary.txt"]
for t in targets:
    try:
        with open(t, "w") as f:
            f.write("x")
        print("wrote", t)
    except Exception as e:
        print("blocked", type(e).__name__)
try:
    os.mkdir({outside:?} + "/made")
    print("made dir")
except Exception as e:
    print("blocked", type(e).__name__)
with open("local.txt", "w") as f:
    f.write("inside scratch is fine")
print("done")
"#,
        outside = outside.display().to_string()
    );
    let r = sandbox.execute(&source, "", &SandboxPolicy::default()).unwrap();
    assert!(r.stdout.contains("done"), "stderr: {}", r.stderr);
    assert!(!r.stdout.contains("wrote"), "{}", r.stdout);
    assert!(!r.stdout.contains("made dir"));

    let mut after = file_tree(base.path());
    // The sandbox root directory itself may persist; its per-run scratch may not.
    after.remove(&workspace.join("sandbox"));
    assert_eq!(before, after);
    assert!(!Path::new("/tmp/codeedu-escape-canary.txt").exists());
}

#[test]
fn off_by_one_sum_matches_independent_oracle() {
    // Reads n and prints 1 + ... + (n - 1) instead of 1 + ... + n.
    let source = "n = int(input())\nprint(sum(range(n)))\n";
    let inputs: Vec<u64> = vec![0, 1, 2, 3, 5, 8, 10, 13, 100, 1000];
    let cases: Vec<TestCase> = inputs
        .iter()
        .map(|n| TestCase::new(format!("{n}\n"), format!("{}\n", n * (n + 1) / 2)))
        .collect();
    // Oracle: the program outputs n(n-1)/2, which equals n(n+1)/2 only when n = 0.
    let expected: Vec<bool> = inputs.iter().map(|n| n * (n.max(&1) - 1) / 2 == n * (n + 1) / 2).collect();
    assert_eq!(expected.iter().filter(|b| **b).count(), 1);

    let dir = tempfile::tempdir().unwrap();
    let sandbox = PythonSandbox::new(dir.path());
    let report = run_unit_tests(&sandbox, source, &cases, &SandboxPolicy::default()).unwrap();
    assert_eq!(report.case_results, expected);
    assert!(!report.all_passed);

    let again = run_unit_tests(&sandbox, source, &cases, &SandboxPolicy::default()).unwrap();
    assert!(report.same_outcome(&again));
}

#[test]
fn echo_and_constant_programs() {
    let dir = tempfile::tempdir().unwrap();
    let sandbox = PythonSandbox::new(dir.path());
    let policy = SandboxPolicy::default();
    let echo = "import sys\nsys.stdout.write(sys.stdin.read())\n";
    let cases: Vec<TestCase> = ["a", "b c", "42"]
        .iter()
        .map(|s| TestCase::new(*s, *s))
        .collect();
    let r = run_unit_tests(&sandbox, echo, &cases, &policy).unwrap();
    assert_eq!(r.case_results, vec![true, true, true]);
    assert!(r.all_passed);

    let constant = "print(7)\n";
    let cases = vec![TestCase::new("", "7"), TestCase::new("", "8")];
    let r = run_unit_tests(&sandbox, constant, &cases, &policy).unwrap();
    assert_eq!(r.case_results, vec![true, false]);
    assert!(!r.all_passed);
}

#[test]
fn pool_dispatches_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Arc::new(Gateway::mock(
        MockProvider::new().with_default(ScriptedFixture::indexed(["x"])),
        &["tutor"],
    ));
    let pool = ToolPool::new(
        gw,
        Arc::new(PythonSandbox::new(dir.path())),
        Crawler::default(),
        SandboxPolicy::default(),
    );
    let ctx = ToolContext {
        workspace_root: dir.path().to_path_buf(),
        caller_role: "tutor".into(),
    };
    let args = json!({"mode": "write", "path": "report.md", "content": "abc"});
    let out = pool
        .invoke("file_io", args.as_object().unwrap(), &ctx)
        .unwrap();
    assert_eq!(out, ToolOutput::FileWritten { path: "report.md".into() });
    let args = json!({"mode": "read", "path": "report.md"});
    let out = pool.invoke("file_io", args.as_object().unwrap(), &ctx).unwrap();
    assert_eq!(out, ToolOutput::FileContents { content: "abc".into() });
    let args = json!({"mode": "read", "path": "../../etc/x"});
    assert!(pool.invoke("file_io", args.as_object().unwrap(), &ctx).is_err());
}
