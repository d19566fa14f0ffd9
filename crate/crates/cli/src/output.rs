use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

/// Output directory plus the provenance line every file starts with.
pub struct Sink {
    dir: PathBuf,
    header: String,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Sink {
    pub fn new(dir: &Path, config_text: &str, seed: u64, command: &str) -> Self {
        let hash = hex::encode(Sha256::digest(config_text.as_bytes()));
        let header = format!(
            "# orbitweave {} config_sha256={hash} seed={seed} command={command}",
            orbitweave::VERSION
        );
        Sink { dir: dir.to_path_buf(), header, files: Vec::new() }
    }

    #[cfg(test)]
    pub fn header(&self) -> &str {
        &self.header
    }

    /// Queues a CSV file: header comment, extra comment lines, then rows.
    pub fn csv(&mut self, name: &str, comments: &[String], columns: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "{}", self.header).expect("write to memory");
        for c in comments {
            writeln!(out, "# {c}").expect("write to memory");
        }
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut out);
            let fail = |e: csv::Error| CliError::Internal(e.to_string());
            w.write_record(columns).map_err(fail)?;
            for r in rows {
                w.write_record(&r).map_err(fail)?;
            }
            w.flush().map_err(|e| CliError::Internal(e.to_string()))?;
        }
        self.files.push((self.dir.join(name), out));
        Ok(())
    }

    /// Queues a JSON document with the header fields embedded.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let doc = serde_json::json!({ "header": self.header, "result": value });
        let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
        out.push(b'\n');
        self.files.push((self.dir.join(name), out));
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: String) {
        let out = format!("{}\n{body}", self.header).into_bytes();
        self.files.push((self.dir.join(name), out));
    }

    /// Writes every queued file through a temporary file and a rename, so
    /// readers never see partial output.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir).map_err(|source| CliError::Write { path: self.dir.clone(), source })?;
        let mut written = Vec::new();
        for (path, bytes) in self.files {
            let fail = |source| CliError::Write { path: path.clone(), source };
            let mut tmp = NamedTempFile::new_in(&self.dir).map_err(fail)?;
            tmp.write_all(&bytes).map_err(fail)?;
            tmp.persist(&path).map_err(|e| fail(e.error))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// A number at 12 significant digits, trailing zeros trimmed.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s }
    } else {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').expect("scientific format");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(2f64.ln()), "0.69314718056");
        assert_eq!(num(0.610864302054894), "0.610864302055");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(82955.0), "82955");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(1.5e-9), "1.5e-9");
        assert_eq!(num(123456789012345678.0), "1.23456789012e17");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn header_hashes_the_config() {
        let s = Sink::new(Path::new("/tmp"), "{}", 3, "katok");
        assert!(s.header().contains("config_sha256=44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"));
        assert!(s.header().ends_with("seed=3 command=katok"));
    }
}
