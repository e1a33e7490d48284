use std::path::{Path, PathBuf};

use hermite_core::io::{self, Series};
use hermite_core::Result;
use serde_json::{json, Map, Value};

/// Writes result files and records the digest and seed alongside each.
pub struct Output {
    dir: PathBuf,
    command: String,
    digest: String,
    seed: u64,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, command: &str, digest: String, seed: u64) -> Self {
        Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            digest,
            seed,
            written: Vec::new(),
        }
    }

    fn meta(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("config_digest".into(), json!(self.digest));
        m.insert("seed".into(), json!(self.seed));
        m
    }

    /// CSV file plus a `<name>.meta.json` sidecar.
    pub fn csv(&mut self, name: &str, contents: &str) -> Result<()> {
        self.written.push(io::write_file(&self.dir, name, contents)?);
        let mut meta = self.meta();
        meta.insert("file".into(), json!(name));
        let text = io::to_json(&Value::Object(meta))?;
        self.written
            .push(io::write_file(&self.dir, &format!("{name}.meta.json"), &text)?);
        Ok(())
    }

    /// JSON object with `command`, `config_digest` and `seed` merged in.
    pub fn json(&mut self, name: &str, body: Value) -> Result<()> {
        let mut obj = self.meta();
        if let Value::Object(fields) = body {
            obj.extend(fields);
        } else {
            obj.insert("result".into(), body);
        }
        let text = io::to_json(&Value::Object(obj))?;
        self.written.push(io::write_file(&self.dir, name, &text)?);
        Ok(())
    }

    /// Long-format `series,x,y` plot data; an empty result writes nothing.
    pub fn plot(&mut self, name: &str, series: &[Series]) -> Result<()> {
        match io::long_format(series) {
            Some(text) => self.csv(name, &text),
            None => {
                eprintln!("warning: no data for {name}; file not written");
                Ok(())
            }
        }
    }
}
