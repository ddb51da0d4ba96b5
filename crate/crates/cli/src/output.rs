use std::path::{Path, PathBuf};

use crate::error::CliError;

/// An output directory that records what it holds and finishes by writing
/// `MANIFEST`.
pub struct OutputDir {
    root: PathBuf,
    command: &'static str,
    entries: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path, command: &'static str) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Other(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), command, entries: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, text: &str, description: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))?;
        self.record(name, description);
        Ok(())
    }

    /// Lists a file written by other means.
    pub fn record(&mut self, name: &str, description: &str) {
        self.entries.push((name.to_string(), description.to_string()));
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.record("MANIFEST", "this listing");
        let width = self.entries.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        let mut text = format!("# skewsv {} {}\n", env!("CARGO_PKG_VERSION"), self.command);
        for (name, desc) in &self.entries {
            text.push_str(&format!("{name:<width$}  {desc}\n"));
        }
        let path = self.path("MANIFEST");
        std::fs::write(&path, text).map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
    }
}
