//! CSV output with a commented header block, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliResult;

/// Output directory override for relative output paths.
pub const OUTPUT_DIR_VAR: &str = "DYADIC_OUTPUT_DIR";

/// Resolve `--out`, defaulting to `<command>.csv`; relative paths go under `$DYADIC_OUTPUT_DIR`
/// when it is set.
pub fn resolve_path(out: Option<&Path>, command: &str) -> PathBuf {
    let p = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(format!("{command}.csv")));
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
        _ => p,
    }
}

/// A CSV table preceded by `#` comment lines.
pub struct CsvDoc {
    comments: Vec<String>,
    body: csv::Writer<Vec<u8>>,
    trailer: Vec<String>,
}

impl CsvDoc {
    /// Starts with the version, the command and the full config.
    pub fn new(command: &str, cfg: &RunConfig, header: &[&str]) -> Self {
        let mut comments = vec![
            format!("dyadic {}", env!("CARGO_PKG_VERSION")),
            format!("command = {command}"),
            "config:".to_string(),
        ];
        comments.extend(cfg.to_toml().lines().map(|l| format!("  {l}")));
        let mut body = csv::Writer::from_writer(Vec::new());
        body.write_record(header).expect("in-memory write");
        Self { comments, body, trailer: Vec::new() }
    }

    /// Extra header comment, appended after the config.
    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    /// Comment written after the rows.
    pub fn trailer(&mut self, line: impl Into<String>) {
        self.trailer.push(line.into());
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.body.write_record(fields).expect("in-memory write");
    }

    pub fn bytes(self) -> Vec<u8> {
        let mut out = Vec::new();
        for c in &self.comments {
            writeln!(out, "{}", format!("# {c}").trim_end()).expect("in-memory write");
        }
        out.extend(self.body.into_inner().expect("in-memory flush"));
        for c in &self.trailer {
            writeln!(out, "# {c}").expect("in-memory write");
        }
        out
    }

    /// Written through a temporary file in the target directory, then renamed into place.
    pub fn write_atomic(self, path: &Path) -> CliResult<()> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(&self.bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }
}

/// Shortest round-trip decimal form; empty for missing values.
pub fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_block_precedes_rows() {
        let mut d = CsvDoc::new("simulate", &RunConfig::default(), &["t", "x"]);
        d.comment("seed = 0");
        d.row(["0", "1"]);
        d.trailer("done");
        let text = String::from_utf8(d.bytes()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# dyadic {}", env!("CARGO_PKG_VERSION")));
        let first = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(lines[first], "t,x");
        assert_eq!(lines[first + 1], "0,1");
        assert_eq!(*lines.last().unwrap(), "# done");
    }

    #[test]
    fn numbers_round_trip() {
        assert_eq!(num(None), "");
        let v = 0.1 + 0.2;
        assert_eq!(num(Some(v)).parse::<f64>().unwrap(), v);
    }
}
