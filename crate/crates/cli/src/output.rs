//! Output directory with cleanup of partial results.

use std::path::{Path, PathBuf};

use drc_core::report::Table;
use drc_core::Result;

/// Environment variable naming the default output directory.
pub const OUT_DIR_VAR: &str = "DRC_OUT_DIR";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

/// Files of one run, named `<run_id>_<name>`. Unless [`RunFiles::commit`] is called,
/// everything written is removed on drop.
pub struct RunFiles {
    dir: PathBuf,
    run_id: String,
    written: Vec<PathBuf>,
    committed: bool,
}

impl RunFiles {
    pub fn new(dir: &Path, run_id: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(RunFiles {
            dir: dir.to_path_buf(),
            run_id: run_id.to_string(),
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}_{name}", self.run_id))
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<PathBuf> {
        let p = self.path(&format!("{name}.csv"));
        self.written.push(p.clone());
        t.save(&p)?;
        Ok(p)
    }

    pub fn json(&mut self, name: &str, v: &impl serde::Serialize) -> Result<PathBuf> {
        let p = self.path(&format!("{name}.json"));
        self.written.push(p.clone());
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        std::fs::write(&p, text)?;
        Ok(p)
    }

    /// One line per entry, LF terminated.
    pub fn lines(&mut self, name: &str, lines: impl Iterator<Item = String>) -> Result<PathBuf> {
        use std::io::Write;
        let p = self.path(name);
        self.written.push(p.clone());
        let mut w = std::io::BufWriter::new(std::fs::File::create(&p)?);
        for l in lines {
            w.write_all(l.as_bytes())?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(p)
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for RunFiles {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}
