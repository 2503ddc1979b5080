//! External solver processes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    #[default]
    Stdin,
    /// Script written to a temporary file substituted for `{file}` in
    /// the arguments (appended if absent).
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub name: String,
    pub executable: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub input: InputMode,
}

impl SolverConfig {
    pub fn new(name: &str, executable: impl Into<PathBuf>, args: &[&str]) -> Self {
        SolverConfig {
            name: name.to_string(),
            executable: executable.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            timeout: Duration::from_secs(30),
            input: InputMode::Stdin,
        }
    }

    pub fn with_timeout(mut self, t: Duration) -> Self {
        self.timeout = t;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    SolverError(String),
}

impl SolverAnswer {
    pub fn is_definitive(&self) -> bool {
        matches!(self, SolverAnswer::Sat | SolverAnswer::Unsat)
    }
}

/// Built-in entries for common solvers.
pub fn builtin_solvers() -> Vec<SolverConfig> {
    vec![
        SolverConfig::new("z3", "z3", &["-in", "-smt2"]),
        SolverConfig::new("cvc5", "cvc5", &["--lang", "smt2"]),
        SolverConfig::new("cvc5-smt2", "cvc5-smt2", &[]),
        SolverConfig::new("verit", "veriT", &["--disable-banner"]),
    ]
}

fn parse_answer(stdout: &str, stderr: &str, success: bool) -> SolverAnswer {
    if stdout.contains("(error") {
        let line = stdout.lines().find(|l| l.contains("(error")).unwrap_or_default();
        return SolverAnswer::SolverError(line.trim().to_string());
    }
    for tok in stdout.split_whitespace() {
        match tok {
            "sat" => return SolverAnswer::Sat,
            "unsat" => return SolverAnswer::Unsat,
            "unknown" => return SolverAnswer::Unknown,
            _ => {}
        }
    }
    let detail = if success { "no status in output".to_string() } else { format!("solver failed: {}", stderr.trim()) };
    SolverAnswer::SolverError(detail)
}

fn run(script: &str, cfg: &SolverConfig, cancel: &AtomicBool) -> SolverAnswer {
    let mut args = cfg.args.clone();
    let _file;
    if cfg.input == InputMode::File {
        let mut f = match tempfile::Builder::new().suffix(".smt2").tempfile() {
            Ok(f) => f,
            Err(e) => return SolverAnswer::SolverError(format!("temporary file: {e}")),
        };
        if let Err(e) = f.write_all(script.as_bytes()) {
            return SolverAnswer::SolverError(format!("temporary file: {e}"));
        }
        let path = f.path().display().to_string();
        if args.iter().any(|a| a.contains("{file}")) {
            args = args.iter().map(|a| a.replace("{file}", &path)).collect();
        } else {
            args.push(path);
        }
        _file = f;
    }
    let mut child = match Command::new(&cfg.executable)
        .args(&args)
        .stdin(if cfg.input == InputMode::Stdin { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SolverAnswer::SolverError(format!("cannot start {}: {e}", cfg.executable.display())),
    };
    if let Some(mut stdin) = child.stdin.take() {
        let s = script.to_string();
        // A separate writer avoids a pipe deadlock on large scripts.
        thread::spawn(move || {
            let _ = stdin.write_all(s.as_bytes());
        });
    }
    let mut out_pipe = child.stdout.take().expect("piped");
    let mut err_pipe = child.stderr.take().expect("piped");
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = out_pipe.read_to_string(&mut s);
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = err_pipe.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(st)) => break Some(st),
            Ok(None) => {}
            Err(e) => return SolverAnswer::SolverError(e.to_string()),
        }
        if start.elapsed() >= cfg.timeout || cancel.load(Ordering::Relaxed) {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        thread::sleep(Duration::from_millis(5));
    };
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    match status {
        None => SolverAnswer::Timeout,
        Some(st) => parse_answer(&stdout, &stderr, st.success()),
    }
}

/// Runs one solver on `script`, killing it after the configured timeout.
pub fn run_solver(script: &str, cfg: &SolverConfig) -> SolverAnswer {
    run(script, cfg, &AtomicBool::new(false))
}

/// Runs all solvers concurrently and returns the first definitive answer,
/// stopping the others; otherwise the first configured solver's answer.
pub fn run_portfolio(script: &str, cfgs: &[SolverConfig]) -> (String, SolverAnswer) {
    if cfgs.len() == 1 {
        return (cfgs[0].name.clone(), run_solver(script, &cfgs[0]));
    }
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let mut handles = Vec::new();
    for (i, cfg) in cfgs.iter().cloned().enumerate() {
        let tx = tx.clone();
        let cancel = cancel.clone();
        let script = script.to_string();
        handles.push(thread::spawn(move || {
            let a = run(&script, &cfg, &cancel);
            let _ = tx.send((i, a));
        }));
    }
    drop(tx);
    let mut results: Vec<Option<SolverAnswer>> = vec![None; cfgs.len()];
    let mut winner = None;
    for (i, a) in rx.iter() {
        if a.is_definitive() && winner.is_none() {
            winner = Some(i);
            cancel.store(true, Ordering::Relaxed);
        }
        results[i] = Some(a);
    }
    for h in handles {
        let _ = h.join();
    }
    let i = winner.unwrap_or(0);
    (cfgs[i].name.clone(), results[i].take().unwrap_or(SolverAnswer::SolverError("no answer".into())))
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid solver configuration: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
}

#[derive(Debug, Deserialize)]
struct RawEntry {
    executable: String,
    #[serde(default)]
    args: Vec<String>,
    timeout_s: Option<f64>,
    #[serde(default)]
    input: InputMode,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    default: Option<String>,
    #[serde(default)]
    solvers: BTreeMap<String, RawEntry>,
}

/// Known solvers: the built-ins overlaid with a configuration file.
#[derive(Debug, Clone)]
pub struct SolverRegistry {
    pub solvers: Vec<SolverConfig>,
    pub default: String,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        SolverRegistry { solvers: builtin_solvers(), default: "z3".into() }
    }
}

impl SolverRegistry {
    /// Parses a TOML configuration:
    ///
    /// ```toml
    /// default = "z3"
    /// [solvers.z3]
    /// executable = "z3"
    /// args = ["-in", "-smt2"]
    /// timeout_s = 30
    /// input = "stdin"   # or "file", with "{file}" in args
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut reg = SolverRegistry::default();
        for (name, e) in raw.solvers {
            let mut cfg = SolverConfig::new(&name, e.executable, &[]);
            cfg.args = e.args;
            cfg.input = e.input;
            if let Some(t) = e.timeout_s.filter(|t| *t > 0.0) {
                cfg.timeout = Duration::from_secs_f64(t);
            }
            reg.solvers.retain(|s| s.name != name);
            reg.solvers.push(cfg);
        }
        if let Some(d) = raw.default {
            reg.default = d;
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    /// Reads the file named by `FOLBRIDGE_CONFIG` if set, and applies the
    /// `FOLBRIDGE_SOLVER` default override.
    pub fn from_env(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        let mut reg = match explicit.map(PathBuf::from).or_else(|| std::env::var_os("FOLBRIDGE_CONFIG").map(PathBuf::from)) {
            Some(p) => Self::load(&p)?,
            None => Self::default(),
        };
        if let Ok(s) = std::env::var("FOLBRIDGE_SOLVER") {
            if !s.is_empty() {
                reg.default = s;
            }
        }
        Ok(reg)
    }

    /// A named entry; an unknown name containing a path separator is
    /// taken as an executable reading standard input.
    pub fn get(&self, name: &str) -> Result<SolverConfig, ConfigError> {
        if let Some(c) = self.solvers.iter().find(|s| s.name == name) {
            return Ok(c.clone());
        }
        if name.contains('/') {
            return Ok(SolverConfig::new(name, name, &[]));
        }
        Err(ConfigError::UnknownSolver(name.to_string()))
    }

    pub fn default_solver(&self) -> Result<SolverConfig, ConfigError> {
        self.get(&self.default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answers() {
        assert_eq!(parse_answer("unsat\n", "", true), SolverAnswer::Unsat);
        assert_eq!(parse_answer("sat\n", "", true), SolverAnswer::Sat);
        assert!(matches!(parse_answer("(error \"x\")\nsat", "", false), SolverAnswer::SolverError(_)));
        assert!(matches!(parse_answer("", "boom", false), SolverAnswer::SolverError(_)));
    }

    #[test]
    fn toml_config() {
        let reg = SolverRegistry::from_toml(
            "default = \"mine\"\n[solvers.mine]\nexecutable = \"/opt/s\"\nargs = [\"{file}\"]\ntimeout_s = 2.5\ninput = \"file\"\n",
        )
        .unwrap();
        let c = reg.default_solver().unwrap();
        assert_eq!(c.executable, PathBuf::from("/opt/s"));
        assert_eq!(c.timeout, Duration::from_millis(2500));
        assert_eq!(c.input, InputMode::File);
        assert!(reg.get("z3").is_ok());
        assert!(reg.get("nope").is_err());
    }

    #[test]
    fn missing_executable() {
        let c = SolverConfig::new("x", "/nonexistent/solver", &[]);
        assert!(matches!(run_solver("(check-sat)", &c), SolverAnswer::SolverError(_)));
    }
}
