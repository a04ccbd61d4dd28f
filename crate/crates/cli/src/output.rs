//! Report files written atomically (temp file + rename) so a crash never
//! leaves a truncated report behind.

use std::fs;
use std::path::PathBuf;

pub struct OutputWriter {
    dir: PathBuf,
    json: bool,
    csv: bool,
}

impl OutputWriter {
    pub fn new(dir: PathBuf, json: bool, csv: bool) -> Self {
        OutputWriter { dir, json, csv }
    }

    fn write_atomic(&self, name: &str, contents: &str) -> Result<(), String> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| format!("cannot create {}: {e}", self.dir.display()))?;
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents).map_err(|e| format!("cannot write {}: {e}", tmp.display()))?;
        fs::rename(&tmp, &path)
            .map_err(|e| format!("cannot move report into place {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    pub fn json<T: serde::Serialize>(&self, name: &str, value: &T) -> Result<(), String> {
        if !self.json {
            return Ok(());
        }
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| format!("cannot serialize {name}: {e}"))?;
        self.write_atomic(name, &text)
    }

    pub fn csv(&self, name: &str, contents: &str) -> Result<(), String> {
        if !self.csv {
            return Ok(());
        }
        self.write_atomic(name, contents)
    }
}
