//! Low-level subprocess execution with a wall-clock deadline.
//!
//! Every child runs in its own session (and therefore its own process
//! group); on timeout the whole group gets SIGKILL so compiler driver
//! children cannot outlive the step.

use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Output capture cap per stream; compilers can spew megabytes of notes.
const MAX_CAPTURE: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ExecResult {
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub timed_out: bool,
    pub stdout: String,
    pub stderr: String,
    pub duration: Duration,
}

/// Run `argv` in `cwd` with a cleared environment (only `env_allow` names
/// pass through), capturing both streams. Returns an error only when the
/// process cannot be launched at all.
pub fn run(
    argv: &[String],
    cwd: &Path,
    timeout: Duration,
    env_allow: &[String],
) -> std::io::Result<ExecResult> {
    assert!(!argv.is_empty(), "empty argv");
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .env_clear();
    for name in env_allow {
        if let Ok(value) = std::env::var(name) {
            cmd.env(name, value);
        }
    }
    // New session => new process group, so we can kill the whole tree.
    unsafe {
        cmd.pre_exec(|| {
            libc::setsid();
            Ok(())
        });
    }

    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pid = child.id() as libc::pid_t;

    let out_reader = spawn_reader(child.stdout.take());
    let err_reader = spawn_reader(child.stderr.take());

    let deadline = start + timeout;
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            timed_out = true;
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
            }
            let _ = child.kill();
            break child.wait()?;
        }
        std::thread::sleep(Duration::from_millis(1));
    };

    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok(ExecResult {
        exit_code: status.code(),
        signal: status.signal(),
        timed_out,
        stdout,
        stderr,
        duration: start.elapsed(),
    })
}

fn spawn_reader<R: Read + Send + 'static>(
    stream: Option<R>,
) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut stream) = stream {
            let mut chunk = [0u8; 8192];
            loop {
                match stream.read(&mut chunk) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        if buf.len() < MAX_CAPTURE {
                            let take = n.min(MAX_CAPTURE - buf.len());
                            buf.extend_from_slice(&chunk[..take]);
                        }
                    }
                }
            }
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(cmd: &str) -> Vec<String> {
        vec!["/bin/sh".to_string(), "-c".to_string(), cmd.to_string()]
    }

    #[test]
    fn captures_streams_and_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let r = run(&sh("echo out; echo err >&2; exit 3"), dir.path(), Duration::from_secs(5), &[]).unwrap();
        assert_eq!(r.exit_code, Some(3));
        assert_eq!(r.stdout.trim(), "out");
        assert_eq!(r.stderr.trim(), "err");
        assert!(!r.timed_out);
    }

    #[test]
    fn reports_fatal_signal() {
        let dir = tempfile::tempdir().unwrap();
        let r = run(&sh("kill -SEGV $$"), dir.path(), Duration::from_secs(5), &[]).unwrap();
        assert_eq!(r.signal, Some(libc::SIGSEGV));
        assert_eq!(r.exit_code, None);
    }

    #[test]
    fn timeout_kills_the_whole_group() {
        let dir = tempfile::tempdir().unwrap();
        let start = Instant::now();
        // The child spawns a grandchild; both must die with the group.
        let r = run(
            &sh("sleep 30 & sleep 30"),
            dir.path(),
            Duration::from_millis(200),
            &[],
        )
        .unwrap();
        assert!(r.timed_out);
        assert!(r.duration >= Duration::from_millis(200));
        assert!(start.elapsed() < Duration::from_secs(10));
    }

    #[test]
    fn environment_is_allow_listed() {
        let dir = tempfile::tempdir().unwrap();
        std::env::set_var("RELAPSE_EXEC_TEST_VAR", "yes");
        let r = run(
            &sh("echo \"${RELAPSE_EXEC_TEST_VAR:-unset}\""),
            dir.path(),
            Duration::from_secs(5),
            &[],
        )
        .unwrap();
        assert_eq!(r.stdout.trim(), "unset");
        let r = run(
            &sh("echo \"${RELAPSE_EXEC_TEST_VAR:-unset}\""),
            dir.path(),
            Duration::from_secs(5),
            &["RELAPSE_EXEC_TEST_VAR".to_string()],
        )
        .unwrap();
        assert_eq!(r.stdout.trim(), "yes");
    }

    #[test]
    fn missing_binary_is_a_launch_error() {
        let dir = tempfile::tempdir().unwrap();
        let argv = vec!["/nonexistent/definitely-not-a-compiler".to_string()];
        assert!(run(&argv, dir.path(), Duration::from_secs(1), &[]).is_err());
    }
}
