use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::kernel::SamplingRequest;
use crate::sampler::{parse_result_line, CounterSet, SampleError, Sampler, SamplerConfig};

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("sampler process: {0}")]
    Io(#[from] io::Error),
    #[error("sampler process: {0}")]
    Protocol(String),
}

/// Anything that turns sampling requests into counter readings, one set
/// per request and in request order.
pub trait SampleSource {
    fn measure(&mut self, requests: &[SamplingRequest]) -> Result<Vec<CounterSet>, SourceError>;
}

impl SampleSource for Sampler {
    fn measure(&mut self, requests: &[SamplingRequest]) -> Result<Vec<CounterSet>, SourceError> {
        let mut out = Vec::with_capacity(requests.len());
        for chunk in requests.chunks(self.config().max_batch) {
            out.extend(self.sample(chunk)?);
        }
        Ok(out)
    }
}

/// Counters computed by a closure instead of measured.
pub struct SyntheticSource<F>(pub F);

impl<F: FnMut(&SamplingRequest) -> CounterSet> SampleSource for SyntheticSource<F> {
    fn measure(&mut self, requests: &[SamplingRequest]) -> Result<Vec<CounterSet>, SourceError> {
        Ok(requests.iter().map(&mut self.0).collect())
    }
}

/// A sampler running as a child process, driven over its standard streams.
///
/// Requests go out in chunks of at most `max_batch` lines, each followed by
/// `go`; the matching number of result lines is read back before the next
/// chunk. The child's diagnostics pass through to this process's stderr.
pub struct ProcessSource {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    counters: Vec<String>,
    max_batch: usize,
    config_path: PathBuf,
}

impl ProcessSource {
    /// Starts `program --config <file>` with `config` written to a
    /// temporary file.
    pub fn spawn(program: &Path, config: &SamplerConfig) -> Result<Self, SourceError> {
        static SPAWNED: AtomicUsize = AtomicUsize::new(0);
        let config_path = std::env::temp_dir().join(format!(
            "dlaperf-sampler-{}-{}.conf",
            std::process::id(),
            SPAWNED.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&config_path, config.to_text())?;
        let mut child = Command::new(program)
            .arg("--config")
            .arg(&config_path)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| io::Error::new(e.kind(), format!("cannot start {}: {e}", program.display())))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        Ok(ProcessSource {
            child,
            stdin,
            stdout,
            counters: config.counters.iter().map(|c| c.name().to_string()).collect(),
            max_batch: config.max_batch,
            config_path,
        })
    }
}

impl SampleSource for ProcessSource {
    fn measure(&mut self, requests: &[SamplingRequest]) -> Result<Vec<CounterSet>, SourceError> {
        let mut out = Vec::with_capacity(requests.len());
        for chunk in requests.chunks(self.max_batch) {
            let stdin = self
                .stdin
                .as_mut()
                .ok_or_else(|| SourceError::Protocol("input already closed".into()))?;
            for r in chunk {
                writeln!(stdin, "{r}")?;
            }
            writeln!(stdin, "go")?;
            stdin.flush()?;
            for r in chunk {
                let mut line = String::new();
                if self.stdout.read_line(&mut line)? == 0 {
                    return Err(SourceError::Protocol(format!(
                        "output ended while waiting for the result of `{r}`"
                    )));
                }
                let (routine, set) = parse_result_line(line.trim_end(), &self.counters)
                    .ok_or_else(|| SourceError::Protocol(format!("malformed result line {line:?}")))?;
                if routine != r.routine {
                    return Err(SourceError::Protocol(format!(
                        "result for {routine} where {} was expected",
                        r.routine
                    )));
                }
                out.push(set);
            }
        }
        Ok(out)
    }
}

impl Drop for ProcessSource {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.wait();
        let _ = std::fs::remove_file(&self.config_path);
    }
}
