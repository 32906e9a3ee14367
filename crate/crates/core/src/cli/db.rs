// SPDX-License-Identifier: Apache-2.0

//! Fingerprint database: a directory of fingerprint files plus `index.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::FingerprintRecord;

pub const INDEX_FILE: &str = "index.json";
pub const INDEX_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbEntry {
    pub name: String,
    pub file: String,
    /// CRC-32 of the file contents, lowercase hex.
    pub checksum: String,
    pub params: String,
    pub vertices: usize,
    pub edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Index {
    version: u32,
    entries: Vec<DbEntry>,
}

#[derive(Debug)]
pub struct FingerprintDb {
    root: PathBuf,
    entries: BTreeMap<String, DbEntry>,
}

/// Names become file names, so they are restricted to `[A-Za-z0-9._+-]`
/// and may not start with a dot.
pub fn validate_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-' | '+'));
    if ok {
        Ok(())
    } else {
        Err(Error::Database(format!(
            "invalid fingerprint name {name:?}: use letters, digits, '.', '_', '-' or '+', not starting with '.'"
        )))
    }
}

fn checksum(text: &str) -> String {
    format!("{:08x}", crc32fast::hash(text.as_bytes()))
}

impl FingerprintDb {
    /// Creates an empty database; fails if an index already exists.
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| Error::file(&root, e))?;
        if root.join(INDEX_FILE).exists() {
            return Err(Error::Database(format!(
                "{} already holds a fingerprint database",
                root.display()
            )));
        }
        let db = FingerprintDb {
            root,
            entries: BTreeMap::new(),
        };
        db.save()?;
        Ok(db)
    }

    /// Opens an existing database and checks it against the directory.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let path = root.join(INDEX_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::file(&path, e))?;
        let index: Index = serde_json::from_str(&text)
            .map_err(|e| Error::Database(format!("{}: {e}", path.display())))?;
        if index.version != INDEX_VERSION {
            return Err(Error::Version {
                found: index.version.to_string(),
                expected: INDEX_VERSION.to_string(),
            });
        }
        let mut entries = BTreeMap::new();
        for e in index.entries {
            validate_name(&e.name)?;
            if entries.insert(e.name.clone(), e).is_some() {
                return Err(Error::Database(format!("{}: duplicate name", path.display())));
            }
        }
        let db = FingerprintDb { root, entries };
        db.verify()?;
        Ok(db)
    }

    pub fn open_or_create(root: impl AsRef<Path>) -> Result<Self> {
        if root.as_ref().join(INDEX_FILE).exists() {
            Self::open(root)
        } else {
            Self::create(root)
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> impl Iterator<Item = &DbEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every indexed file exists and matches its checksum.
    pub fn verify(&self) -> Result<()> {
        for e in self.entries.values() {
            let path = self.root.join(&e.file);
            let text = fs::read_to_string(&path).map_err(|err| Error::file(&path, err))?;
            if checksum(&text) != e.checksum {
                return Err(Error::Database(format!(
                    "{} changed since it was indexed as {:?}; re-add it or remove the entry",
                    path.display(),
                    e.name
                )));
            }
        }
        Ok(())
    }

    fn save(&self) -> Result<()> {
        let index = Index {
            version: INDEX_VERSION,
            entries: self.entries.values().cloned().collect(),
        };
        let mut text = serde_json::to_string_pretty(&index)?;
        text.push('\n');
        let path = self.root.join(INDEX_FILE);
        let tmp = self.root.join(format!("{INDEX_FILE}.tmp"));
        fs::write(&tmp, text).map_err(|e| Error::file(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::file(&path, e))
    }

    /// Stores `rec` under `rec.meta.name`. Edgeless fingerprints are refused
    /// because they cannot be scored.
    pub fn add(&mut self, rec: &FingerprintRecord, threshold: Option<f64>, replace: bool) -> Result<()> {
        let name = rec.meta.name.clone();
        validate_name(&name)?;
        if rec.graph.edge_count() == 0 {
            return Err(Error::Database(format!(
                "fingerprint {name:?} has no edges and cannot be scored"
            )));
        }
        if let Some(t) = threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParam(format!(
                    "threshold must lie in [0, 1], got {t}"
                )));
            }
        }
        if self.entries.contains_key(&name) && !replace {
            return Err(Error::Database(format!(
                "fingerprint {name:?} already exists (use --replace to overwrite)"
            )));
        }
        rec.graph.check()?;
        let file = format!("{name}.fp");
        let text = rec.to_text();
        let path = self.root.join(&file);
        fs::write(&path, &text).map_err(|e| Error::file(&path, e))?;
        self.entries.insert(
            name.clone(),
            DbEntry {
                name,
                file,
                checksum: checksum(&text),
                params: rec.meta.params.clone(),
                vertices: rec.graph.vertex_count(),
                edges: rec.graph.edge_count(),
                threshold,
            },
        );
        self.save()
    }

    pub fn remove(&mut self, name: &str) -> Result<DbEntry> {
        let Some(e) = self.entries.remove(name) else {
            return Err(Error::Database(format!("no fingerprint named {name:?}")));
        };
        let path = self.root.join(&e.file);
        fs::remove_file(&path).map_err(|err| Error::file(&path, err))?;
        self.save()?;
        Ok(e)
    }

    pub fn load(&self, name: &str) -> Result<FingerprintRecord> {
        let Some(e) = self.entries.get(name) else {
            return Err(Error::Database(format!("no fingerprint named {name:?}")));
        };
        let path = self.root.join(&e.file);
        let text = fs::read_to_string(&path).map_err(|err| Error::file(&path, err))?;
        if checksum(&text) != e.checksum {
            return Err(Error::Database(format!(
                "{} does not match its index checksum",
                path.display()
            )));
        }
        FingerprintRecord::from_text(&text)
    }

    /// All records in name order.
    pub fn load_all(&self) -> Result<Vec<(DbEntry, FingerprintRecord)>> {
        self.entries
            .values()
            .map(|e| Ok((e.clone(), self.load(&e.name)?)))
            .collect()
    }
}
