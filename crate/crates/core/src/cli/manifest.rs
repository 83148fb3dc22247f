use super::{io_err, CliError};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const MANIFEST_MAGIC: &str = "karspace-manifest 1";

/// Key-value record of a command run.
///
/// ```text
/// karspace-manifest 1
/// command = synth
/// version = 0.1.0
/// arg = synth
/// arg = --kind
/// arg = xor
/// param.seed = 0
/// output = /abs/path/xor.csv
/// ```
///
/// `arg` lines are the full effective argument vector (defaults spelled out,
/// paths absolute) and are all `replay` needs. `param.*` and `info.*` lines
/// are descriptive; `info.*` may hold timings and differs between runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    pub params: Vec<(String, String)>,
    pub info: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Self {
            command: command.into(),
            args,
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn info(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.info.push((key.into(), value.to_string()));
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MANIFEST_MAGIC}");
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
        for a in &self.args {
            let _ = writeln!(s, "arg = {a}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k} = {v}");
        }
        for (k, v) in &self.info {
            let _ = writeln!(s, "info.{k} = {v}");
        }
        for o in &self.outputs {
            let _ = writeln!(s, "output = {}", o.display());
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_MAGIC) {
            return Err(CliError::Io(format!("not a manifest (expected `{MANIFEST_MAGIC}`)")));
        }
        let mut m = Manifest::default();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| CliError::Io(format!("manifest line {}: expected `key = value`", i + 2)))?;
            match key {
                "command" => m.command = value.into(),
                "version" => {}
                "arg" => m.args.push(value.into()),
                "output" => m.outputs.push(value.into()),
                k => {
                    if let Some(p) = k.strip_prefix("param.") {
                        m.params.push((p.into(), value.into()));
                    } else if let Some(p) = k.strip_prefix("info.") {
                        m.info.push((p.into(), value.into()));
                    } else {
                        return Err(CliError::Io(format!("manifest line {}: unknown key `{k}`", i + 2)));
                    }
                }
            }
        }
        if m.args.is_empty() {
            return Err(CliError::Io("manifest records no arguments".into()));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.flush().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}
