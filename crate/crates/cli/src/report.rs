//! The report envelope and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Complete,
    Violated,
    ExistenceFailure,
    Unknown,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Holds | Status::Complete => 0,
            Status::Violated | Status::ExistenceFailure => 2,
            Status::Unknown => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

/// Reports carry no timestamps or host data, so identical inputs give
/// identical bytes.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Value,
    pub status: Status,
    pub result: Value,
    /// Extra files written next to the report, as `(name, contents)`.
    #[serde(skip)]
    pub attachments: Vec<(std::path::PathBuf, String)>,
}

impl Report {
    pub fn new(command: &'static str, inputs: Value, status: Status, result: impl Serialize) -> Result<Self, CliError> {
        Ok(Report {
            schema: wfcalc::suites::REPORT_SCHEMA,
            tool: "wfcalc",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs,
            status,
            result: serde_json::to_value(result)?,
            attachments: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        for (path, body) in &self.attachments {
            write_atomic(path, body)?;
        }
        let json = self.to_json()?;
        match out {
            Some(p) => write_atomic(p, &json),
            None => {
                std::io::stdout().write_all(json.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial report.
pub fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError(format!("{}: {e}", dir.display())))?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_writes_replace_the_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn envelope_fields_come_first() {
        let r = Report::new("wf", serde_json::json!({"a": 1}), Status::Holds, 5).unwrap();
        let json = r.to_json().unwrap();
        let keys: Vec<usize> = ["schema", "tool", "version", "command", "inputs", "status", "result"]
            .iter()
            .map(|k| json.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
