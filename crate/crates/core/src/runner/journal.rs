//! Append-only record of completed cells, used to resume interrupted runs.
//!
//! Each line is `fingerprint<TAB>cell key<TAB>median error`. Lines written
//! for a different plan, and a torn last line, are ignored.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use super::RunnerError;

pub struct Journal {
    fingerprint: String,
    file: Mutex<File>,
    completed: HashMap<String, f64>,
}

impl Journal {
    pub fn open(path: &Path, fingerprint: &str) -> Result<Self, RunnerError> {
        let mut completed = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for line in reader.lines() {
                let line = line?;
                if let Some((key, value)) = parse_line(&line, fingerprint) {
                    completed.insert(key, value);
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        // terminate a torn line so new records start cleanly
        if path.metadata()?.len() > 0 && !std::fs::read(path)?.ends_with(b"\n") {
            file.write_all(b"\n")?;
        }
        Ok(Journal { fingerprint: fingerprint.to_string(), file: Mutex::new(file), completed })
    }

    pub fn completed(&self) -> &HashMap<String, f64> {
        &self.completed
    }

    pub fn record(&self, key: &str, median_error: f64) -> Result<(), RunnerError> {
        let line = format!("{}\t{}\t{}\n", self.fingerprint, key, median_error);
        let mut f = self.file.lock().expect("journal lock");
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

fn parse_line(line: &str, fingerprint: &str) -> Option<(String, f64)> {
    let mut parts = line.split('\t');
    let fp = parts.next()?;
    let key = parts.next()?;
    let value: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || fp != fingerprint || !value.is_finite() || value < 0.0 {
        return None;
    }
    Some((key.to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_survive_reopen_and_ignore_other_plans() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.tsv");
        {
            let j = Journal::open(&path, "aaaa").unwrap();
            j.record("f1|10|x", 0.25).unwrap();
        }
        {
            let j = Journal::open(&path, "bbbb").unwrap();
            assert!(j.completed().is_empty());
            j.record("f1|10|x", 9.0).unwrap();
        }
        std::fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"aaaa\tf2|10|").unwrap();
        let j = Journal::open(&path, "aaaa").unwrap();
        assert_eq!(j.completed().len(), 1);
        assert_eq!(j.completed()["f1|10|x"], 0.25);
        j.record("f3|10|y", 1.0).unwrap();
        let j = Journal::open(&path, "aaaa").unwrap();
        assert_eq!(j.completed().len(), 2);
    }
}
