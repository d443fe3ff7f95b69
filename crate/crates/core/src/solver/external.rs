use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::{SolveOutcome, SolveStatus};
use crate::encoding::{MaxSatModel, MaxSatProblem};

/// Time a solver gets to exit after an interrupt before it is killed.
const GRACE: Duration = Duration::from_secs(1);

/// What a solver printed, in MaxSAT evaluation conventions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverOutput {
    /// The last `s` line's status.
    pub status: Option<SolveStatus>,
    /// The last model printed: `v` lines after the latest `o` line.
    pub assignment: Option<Vec<bool>>,
}

/// Parses `s`, `o` and `v` lines. A `v` line holding a single 0/1 token as
/// long as the variable count is read as a bitstring; otherwise its tokens
/// are signed literals, with `0` ignored.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<SolverOutput, String> {
    let mut status = None;
    let mut current: Option<Vec<bool>> = None;
    let mut last: Option<Vec<bool>> = None;
    for line in text.lines() {
        let line = line.trim();
        let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match tag {
            "s" => {
                status = Some(match rest.trim() {
                    "OPTIMUM FOUND" => SolveStatus::Optimum,
                    "SATISFIABLE" => SolveStatus::Satisfiable,
                    "UNKNOWN" => SolveStatus::Unknown,
                    _ => SolveStatus::Error,
                });
            }
            "o" => {
                if let Some(model) = current.take() {
                    last = Some(model);
                }
            }
            "v" => {
                let model = current.get_or_insert_with(|| vec![false; num_vars]);
                let tokens: Vec<&str> = rest.split_whitespace().collect();
                if tokens.len() == 1
                    && tokens[0].len() == num_vars
                    && num_vars > 1
                    && tokens[0].bytes().all(|b| b == b'0' || b == b'1')
                {
                    for (i, b) in tokens[0].bytes().enumerate() {
                        model[i] = b == b'1';
                    }
                    continue;
                }
                for t in tokens {
                    let lit: i64 = t.parse().map_err(|_| format!("unparsable v line: {line}"))?;
                    if lit == 0 {
                        continue;
                    }
                    let idx = lit.unsigned_abs() as usize - 1;
                    if idx >= num_vars {
                        return Err(format!("literal {lit} out of range in v line"));
                    }
                    model[idx] = lit > 0;
                }
            }
            _ => {}
        }
    }
    Ok(SolverOutput {
        status,
        assignment: current.or(last),
    })
}

fn command_line(template: &str, path: &str) -> Result<Vec<String>, String> {
    let mut args = shlex::split(template).ok_or_else(|| "malformed solver command".to_string())?;
    if args.is_empty() {
        return Err("empty solver command".into());
    }
    if args.iter().any(|a| a.contains("{wcnf}")) {
        for a in &mut args {
            *a = a.replace("{wcnf}", path);
        }
    } else {
        args.push(path.to_string());
    }
    Ok(args)
}

/// Writes the instance to a temporary file, runs the command on it and
/// parses its output. At the deadline the process is sent an interrupt,
/// then killed after a short grace period; the last printed model is kept.
pub fn solve_external(problem: &MaxSatProblem, template: &str, timeout: Duration) -> SolveOutcome {
    let start = Instant::now();
    let fail = |msg: String| SolveOutcome::without_model(SolveStatus::Error, msg, start.elapsed());
    let wcnf = problem.to_wcnf();
    let mut file = match tempfile::Builder::new().suffix(".wcnf").tempfile() {
        Ok(f) => f,
        Err(e) => return fail(format!("cannot create instance file: {e}")),
    };
    if let Err(e) = write!(file, "{wcnf}").and_then(|_| file.flush()) {
        return fail(format!("cannot write instance file: {e}"));
    }
    let path = file.path().to_string_lossy().into_owned();
    let args = match command_line(template, &path) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let mut child = match Command::new(&args[0])
        .args(&args[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return fail(format!("solver spawn failed: {e}")),
    };
    let stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out_reader = thread::spawn(move || {
        let mut text = String::new();
        for line in BufReader::new(stdout).lines() {
            match line {
                Ok(l) => {
                    text.push_str(&l);
                    text.push('\n');
                }
                Err(_) => break,
            }
        }
        text
    });
    let err_reader = thread::spawn(move || {
        let mut text = String::new();
        let _ = stderr.read_to_string(&mut text);
        text
    });

    let remaining = timeout.saturating_sub(start.elapsed());
    let mut timed_out = false;
    let exit = match child.wait_timeout(remaining) {
        Ok(Some(status)) => Some(status),
        Ok(None) => {
            timed_out = true;
            interrupt(&child);
            match child.wait_timeout(GRACE) {
                Ok(Some(status)) => Some(status),
                _ => {
                    let _ = child.kill();
                    child.wait().ok()
                }
            }
        }
        Err(e) => {
            let _ = child.kill();
            let _ = child.wait();
            return fail(format!("waiting for solver failed: {e}"));
        }
    };
    let stdout_text = out_reader.join().unwrap_or_default();
    let stderr_text = err_reader.join().unwrap_or_default();
    let elapsed = start.elapsed();

    let parsed = match parse_solver_output(&stdout_text, wcnf.num_vars as usize) {
        Ok(p) => p,
        Err(e) => return SolveOutcome::without_model(SolveStatus::Error, e, elapsed),
    };
    let exit_ok = exit.is_some_and(|s| s.success());
    let error = |msg: String| SolveOutcome::without_model(SolveStatus::Error, msg, elapsed);
    let status = match (parsed.status, parsed.assignment.is_some()) {
        (Some(SolveStatus::Optimum), true) => SolveStatus::Optimum,
        (Some(SolveStatus::Satisfiable), true) => SolveStatus::Satisfiable,
        (Some(SolveStatus::Optimum | SolveStatus::Satisfiable), false) => {
            return error("solver reported a model but printed none".into());
        }
        (Some(SolveStatus::Unknown) | None, true) if timed_out || exit_ok => {
            SolveStatus::Satisfiable
        }
        (Some(SolveStatus::Unknown), _) => SolveStatus::Unknown,
        (None, false) if timed_out => SolveStatus::Unknown,
        (None, _) => {
            return error(format!(
                "solver exited with {exit:?} without a status line\n{stdout_text}{stderr_text}"
            ));
        }
        (Some(SolveStatus::Error), _) => {
            return error(format!("solver failed\n{stdout_text}{stderr_text}"));
        }
    };
    match parsed.assignment {
        Some(mut assignment) if status != SolveStatus::Unknown => {
            assignment.resize(wcnf.num_vars as usize, false);
            let weight = wcnf.weight(&assignment);
            SolveOutcome::with_model(status, MaxSatModel { assignment, weight }, elapsed)
        }
        _ => SolveOutcome::without_model(SolveStatus::Unknown, "no model before the deadline", elapsed),
    }
}

#[cfg(unix)]
fn interrupt(child: &std::process::Child) {
    // SAFETY: plain signal delivery to a child we own and have not reaped
    unsafe {
        libc::kill(child.id() as libc::pid_t, libc::SIGINT);
    }
}

#[cfg(not(unix))]
fn interrupt(_child: &std::process::Child) {}
