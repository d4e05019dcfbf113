//! Append-only per-IC result log used to resume interrupted runs.
//!
//! ```text
//! #seed=42 fingerprint=0123456789abcdef n=10000
//! 0,O,0,1,0,,
//! 1,R,1,2,0,-0.2307,0.1102
//! 2,U,,,,,
//! ```

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::classify::ResonanceLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub seed: u64,
    pub fingerprint: String,
    pub n: u64,
}

impl CheckpointHeader {
    pub(crate) fn render(&self) -> String {
        format!("#seed={} fingerprint={} n={}\n", self.seed, self.fingerprint, self.n)
    }

    pub(crate) fn parse(line: &str) -> Option<Self> {
        let rest = line.strip_prefix('#')?;
        let mut seed = None;
        let mut fingerprint = None;
        let mut n = None;
        for field in rest.split_whitespace() {
            let (k, v) = field.split_once('=')?;
            match k {
                "seed" => seed = v.parse().ok(),
                "fingerprint" => fingerprint = Some(v.to_string()),
                "n" => n = v.parse().ok(),
                _ => return None,
            }
        }
        Some(Self {
            seed: seed?,
            fingerprint: fingerprint?,
            n: n?,
        })
    }
}

/// Outcome for one initial condition, before variant clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcRecord {
    pub index: u64,
    pub label: ResonanceLabel,
    /// Canonical stroboscopic point `(q, v)` of a resonance.
    pub representative: Option<(f64, f64)>,
}

impl IcRecord {
    pub(crate) fn render(&self) -> String {
        let rep = |r: Option<(f64, f64)>| match r {
            Some((q, v)) => format!("{q:?},{v:?}"),
            None => ",".to_string(),
        };
        match self.label {
            ResonanceLabel::Origin => format!("{},O,0,1,0,,", self.index),
            ResonanceLabel::Resonance { p, q, variant } => format!(
                "{},R,{p},{q},{variant},{}",
                self.index,
                rep(self.representative)
            ),
            ResonanceLabel::Unclassified => format!("{},U,,,,,", self.index),
        }
    }

    pub(crate) fn parse(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return None;
        }
        let index = f[0].parse().ok()?;
        let (label, representative) = match f[1] {
            "O" => (ResonanceLabel::Origin, None),
            "U" => (ResonanceLabel::Unclassified, None),
            "R" => {
                let label = ResonanceLabel::Resonance {
                    p: f[2].parse().ok()?,
                    q: f[3].parse().ok()?,
                    variant: f[4].parse().ok()?,
                };
                let rep = (f[5].parse().ok()?, f[6].parse().ok()?);
                (label, Some(rep))
            }
            _ => return None,
        };
        Some(Self {
            index,
            label,
            representative,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub records: Vec<IcRecord>,
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads a checkpoint. A torn or unparsable final record is cut off the
/// file with a warning; damage anywhere else is an error.
pub fn checkpoint_load(path: &Path) -> Result<Checkpoint> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let Some(header_end) = text.find('\n') else {
        return Err(corrupt(path, "missing header line"));
    };
    let header = CheckpointHeader::parse(&text[..header_end])
        .ok_or_else(|| corrupt(path, "malformed header line"))?;

    let mut records = Vec::new();
    let mut seen = vec![false; header.n as usize];
    let mut valid_end = header_end + 1;
    let mut offset = header_end + 1;
    let mut line_no = 1;
    while offset < text.len() {
        line_no += 1;
        let (line, next, complete) = match text[offset..].find('\n') {
            Some(i) => (&text[offset..offset + i], offset + i + 1, true),
            None => (&text[offset..], text.len(), false),
        };
        let parsed = IcRecord::parse(line).filter(|r| r.index < header.n);
        match parsed {
            Some(r) if complete => {
                if std::mem::replace(&mut seen[r.index as usize], true) {
                    return Err(corrupt(path, format!("duplicate index {} at line {line_no}", r.index)));
                }
                records.push(r);
                valid_end = next;
            }
            _ if next == text.len() => {
                log::warn!(
                    "{}: dropping torn record at line {line_no}",
                    path.display()
                );
                let file = OpenOptions::new().write(true).open(path)?;
                file.set_len(valid_end as u64)?;
                break;
            }
            _ => return Err(corrupt(path, format!("malformed record at line {line_no}"))),
        }
        offset = next;
    }
    Ok(Checkpoint { header, records })
}

/// Writes a complete checkpoint file.
pub fn checkpoint_save(path: &Path, header: &CheckpointHeader, records: &[IcRecord]) -> Result<()> {
    let mut w = CheckpointWriter::create(path, header)?;
    w.append(records)?;
    w.flush()
}

/// Sequential sink for records as they complete.
pub(crate) struct CheckpointWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl CheckpointWriter {
    pub(crate) fn create(path: &Path, header: &CheckpointHeader) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(header.render().as_bytes())?;
        Ok(Self {
            out,
            path: path.to_path_buf(),
        })
    }

    pub(crate) fn reopen(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Self {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        })
    }

    pub(crate) fn append(&mut self, records: &[IcRecord]) -> Result<()> {
        for r in records {
            writeln!(self.out, "{}", r.render())?;
        }
        Ok(())
    }

    pub(crate) fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        self.out.get_ref().sync_data().map_err(|e| {
            corrupt(&self.path, format!("sync failed: {e}"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> CheckpointHeader {
        CheckpointHeader {
            seed: 42,
            fingerprint: "00ff00ff00ff00ff".into(),
            n: 5,
        }
    }

    fn records() -> Vec<IcRecord> {
        vec![
            IcRecord {
                index: 0,
                label: ResonanceLabel::Origin,
                representative: None,
            },
            IcRecord {
                index: 3,
                label: ResonanceLabel::Resonance { p: 1, q: 2, variant: 0 },
                representative: Some((-0.23071234567891234, 1e-17)),
            },
            IcRecord {
                index: 1,
                label: ResonanceLabel::Unclassified,
                representative: None,
            },
        ]
    }

    #[test]
    fn roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.csv");
        checkpoint_save(&path, &header(), &records()).unwrap();
        let ck = checkpoint_load(&path).unwrap();
        assert_eq!(ck.header, header());
        assert_eq!(ck.records, records());
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.csv");
        checkpoint_save(&path, &header(), &records()).unwrap();
        let clean = std::fs::read(&path).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"4,R,1,2,0,-0.23").unwrap();
        drop(f);
        let ck = checkpoint_load(&path).unwrap();
        assert_eq!(ck.records, records());
        assert_eq!(std::fs::read(&path).unwrap(), clean);
    }

    #[test]
    fn garbage_final_line_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.csv");
        checkpoint_save(&path, &header(), &records()).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"4,X,\n").unwrap();
        drop(f);
        assert_eq!(checkpoint_load(&path).unwrap().records.len(), 3);
    }

    #[test]
    fn damage_in_the_middle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.csv");
        std::fs::write(&path, "#seed=1 fingerprint=ab n=4\n0,O,0,1,0,,\nbad\n1,O,0,1,0,,\n").unwrap();
        assert!(matches!(checkpoint_load(&path), Err(Error::Checkpoint { .. })));
        std::fs::write(&path, "no header\n").unwrap();
        assert!(checkpoint_load(&path).is_err());
        std::fs::write(&path, "#seed=1 fingerprint=ab n=4\n0,O,0,1,0,,\n0,O,0,1,0,,\n").unwrap();
        assert!(checkpoint_load(&path).is_err());
    }
}
