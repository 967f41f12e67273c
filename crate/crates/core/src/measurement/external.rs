use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize)]
struct Request<'a> {
    x: &'a [f64],
}

#[derive(Deserialize)]
struct Reply {
    y: serde_json::Value,
}

/// Child process answering one `{"x":[...]}` line with one `{"y":n}` line.
pub struct ExternalProcess {
    command: String,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalProcess {
    /// Launch `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::objective(format!("cannot launch `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalProcess { command: command.to_string(), child, stdin, stdout })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn query(&mut self, x: &[f64]) -> Result<f64> {
        let mut line = serde_json::to_string(&Request { x })?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::objective(format!("`{}` stopped reading: {e}", self.command)))?;
        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::objective(format!("reading from `{}`: {e}", self.command)))?;
        if n == 0 {
            return Err(Error::objective(format!("`{}` closed its output", self.command)));
        }
        let parsed: Reply = serde_json::from_str(reply.trim())
            .map_err(|e| Error::objective(format!("bad reply {:?}: {e}", reply.trim())))?;
        match parsed.y.as_f64() {
            Some(y) if y.is_finite() => Ok(y),
            _ => Err(Error::objective(format!("reply y is not a finite number: {}", parsed.y))),
        }
    }
}

impl Drop for ExternalProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
