use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

/// Files written by one command, summarized in `<command>-manifest.json`.
pub struct Run {
    dir: PathBuf,
    command: &'static str,
    files: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn start(dir: &Path, command: &'static str) -> io::Result<Run> {
        fs::create_dir_all(dir)?;
        Ok(Run { dir: dir.to_path_buf(), command, files: Vec::new(), started: Instant::now() })
    }

    /// Opens `<command>-<suffix>` for writing and records it.
    pub fn create(&mut self, suffix: &str) -> io::Result<BufWriter<File>> {
        let name = format!("{}-{}", self.command, suffix);
        let f = File::create(self.dir.join(&name))?;
        self.files.push(name);
        Ok(BufWriter::new(f))
    }

    pub fn finish(self, config: &str, seeds: &[u64], results: Value) -> io::Result<PathBuf> {
        let manifest = json!({
            "tool": "cavitrap",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": config,
            "seeds": seeds,
            "outputs": self.files,
            "results": results,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
        });
        let path = self.dir.join(format!("{}-manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
