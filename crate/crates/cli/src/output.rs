use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Writes result files into one directory, stamping each with the
/// invocation and library version.
pub struct Output {
    dir: PathBuf,
    invocation: Vec<String>,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'a str,
    invocation: &'a [String],
    result: &'a T,
}

/// Lower-case file-name fragment for a region code.
pub fn file_stem(region: &str) -> String {
    region
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl Output {
    pub fn new(dir: &Path, invocation: Vec<String>) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::User(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            invocation,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// `#` comment lines naming the version and invocation.
    pub fn header(&self) -> String {
        format!(
            "# hpi {}\n# invocation: {}\n",
            hpi_core::VERSION,
            self.invocation.join(" ")
        )
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// Tab-separated table preceded by the header comments.
    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut text = self.header();
        text.push_str(&columns.join("\t"));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join("\t"));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// Text written as given; the caller supplies any header.
    pub fn text_raw(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, body.as_bytes())
    }

    /// Free text preceded by the header comments.
    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let mut text = self.header();
        text.push_str(body);
        if !body.ends_with('\n') {
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// JSON record `{version, invocation, result}`.
    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<(), CliError> {
        let env = Envelope {
            version: hpi_core::VERSION,
            invocation: &self.invocation,
            result,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}
