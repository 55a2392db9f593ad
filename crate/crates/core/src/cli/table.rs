use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const DELIMITER: char = '\t';
const CONFIG_PREFIX: &str = "#   ";

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Text(v.to_string())
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v:e}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(&s.replace([DELIMITER, '\n'], " ")),
        }
    }
}

/// Delimiter-separated table with a line of column names, a line of units,
/// and `#` metadata lines carrying the config that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        ResultTable {
            name: name.to_string(),
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match table `{}`", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.tsv", self.name)
    }

    /// Renders the table; `timestamp` is the only line that varies between runs.
    pub fn render(&self, meta: &Metadata, timestamp: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {}", meta.program, meta.version);
        let _ = writeln!(out, "# command: {}", meta.command);
        let _ = writeln!(out, "# config_sha256: {}", meta.config_hash());
        let _ = writeln!(out, "# created_unix: {timestamp}");
        let _ = writeln!(out, "# config:");
        for line in meta.config.lines() {
            let _ = writeln!(out, "{CONFIG_PREFIX}{line}");
        }
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(&DELIMITER.to_string());
        let _ = writeln!(out, "{}", join(&mut self.columns.iter().map(|c| c.0.clone())));
        let _ = writeln!(
            out,
            "{}",
            join(&mut self.columns.iter().map(|c| if c.1.is_empty() { "-".into() } else { c.1.clone() }))
        );
        for row in &self.rows {
            let _ = writeln!(out, "{}", join(&mut row.iter().map(|v| v.to_string())));
        }
        out
    }

    /// Writes `<dir>/<name>.tsv` through a temporary file and a rename.
    pub fn write(&self, dir: &Path, meta: &Metadata) -> Result<PathBuf> {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let path = dir.join(self.file_name());
        write_atomic(&path, self.render(meta, now).as_bytes())?;
        Ok(path)
    }
}

/// Provenance attached to every emitted table.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub program: String,
    pub version: String,
    pub command: String,
    /// The exact TOML of the run configuration.
    pub config: String,
}

impl Metadata {
    pub fn new(command: &str, config: String) -> Self {
        Metadata {
            program: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
        }
    }

    pub fn config_hash(&self) -> String {
        Sha256::digest(self.config.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Recovers the embedded config text from a rendered table.
pub fn embedded_config(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| *l != "# config:");
    lines.next()?;
    let body: Vec<&str> = lines.map_while(|l| l.strip_prefix(CONFIG_PREFIX)).collect();
    Some(body.iter().fold(String::new(), |mut s, l| {
        s.push_str(l);
        s.push('\n');
        s
    }))
}

/// Parses the numeric body of a rendered table (text cells become NaN).
pub fn read_numeric(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut body = text.lines().filter(|l| !l.starts_with('#'));
    let names = body.next().map(|l| l.split(DELIMITER).map(str::to_string).collect()).unwrap_or_default();
    body.next();
    let rows = body.map(|l| l.split(DELIMITER).map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (names, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (ResultTable, Metadata) {
        let mut t = ResultTable::new("demo", &[("P", ""), ("I_out", "1/omega_a"), ("label", "")]);
        t.push(vec![1.5.into(), 0.25.into(), "linear".into()]);
        t.push(vec![2.0.into(), 1e-17.into(), "zig\tzag".into()]);
        (t, Metadata::new("sweep", "seed = 3\n\n[system]\nn_ions = 2\n".into()))
    }

    #[test]
    fn layout_and_embedded_config() {
        let (t, m) = sample();
        let text = t.render(&m, 0);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "P\tI_out\tlabel");
        assert_eq!(body[1], "-\t1/omega_a\t-");
        assert_eq!(body[3], "2e0\t1e-17\tzig zag");
        assert_eq!(embedded_config(&text).unwrap(), m.config);
        let (names, rows) = read_numeric(&text);
        assert_eq!(names.len(), 3);
        assert_eq!(rows[0][..2], [1.5, 0.25]);
    }

    #[test]
    fn only_timestamp_varies() {
        let (t, m) = sample();
        let a = t.render(&m, 1);
        let b = t.render(&m, 2);
        let diff: Vec<_> = a.lines().zip(b.lines()).filter(|(x, y)| x != y).collect();
        assert_eq!(diff.len(), 1);
        assert!(diff[0].0.starts_with("# created_unix"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.tsv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
