//! Versioned on-disk artifacts and the cache directory.
//!
//! An artifact is a pretty-printed JSON document with a header (format
//! version, kind, parameters, SHA-256 of the payload) and a payload. Exact
//! quantities are written as decimal strings: counts as integers, real
//! coefficients with enough digits to read back the identical binary value.
//! Serialization is deterministic, so loading and saving again reproduces
//! the same bytes.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::enumeration::{ComponentClass, CountTable};
use crate::error::{Error, Result};
use crate::numeric::{
    natural_from_str, real_from_exact_string, real_to_exact_string, PrecisionConfig,
};
use crate::omega::{OmegaLedger, QuadratureConfig};
use crate::omega_k::OmegaKLedger;
use crate::taylor::TaylorBlock;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    CountTable,
    OmegaLedger,
    OmegaKLedger,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::CountTable => "count-table",
            ArtifactKind::OmegaLedger => "omega-ledger",
            ArtifactKind::OmegaKLedger => "omega-k-ledger",
        }
    }
}

/// Everything needed to rebuild the payload from scratch.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Component counts of a custom class, as decimal strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_interval: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taylor_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_log2: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
}

impl ArtifactParams {
    pub fn for_count_table(class: &ComponentClass, max_n: u32) -> Self {
        ArtifactParams {
            max_n: Some(max_n),
            class: Some(class.name().to_string()),
            weights: class
                .explicit_weights()
                .map(|w| w.iter().map(|c| c.to_string()).collect()),
            ..Default::default()
        }
    }

    pub fn for_omega(config: &QuadratureConfig) -> Self {
        ArtifactParams {
            max_interval: Some(config.max_interval),
            taylor_degree: Some(config.taylor_degree),
            precision: Some(config.precision.digits()),
            target_digits: Some(config.target_digits),
            grid_log2: Some(config.grid_log2),
            ..Default::default()
        }
    }

    pub fn for_omega_k(k_text: &str, config: &QuadratureConfig) -> Self {
        ArtifactParams {
            max_interval: Some(config.max_interval),
            taylor_degree: Some(config.taylor_degree),
            precision: Some(config.precision.digits()),
            target_digits: Some(config.target_digits),
            k: Some(k_text.trim().to_string()),
            ..Default::default()
        }
    }

    fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
        value.ok_or_else(|| Error::CorruptPayload(format!("header lacks {name}")))
    }

    fn quadrature(&self) -> Result<QuadratureConfig> {
        let digits = Self::require(self.precision, "precision")?;
        Ok(QuadratureConfig {
            grid_log2: self
                .grid_log2
                .unwrap_or(QuadratureConfig::default().grid_log2),
            max_interval: Self::require(self.max_interval, "max_interval")?,
            taylor_degree: Self::require(self.taylor_degree, "taylor_degree")?,
            precision: PrecisionConfig::new(digits)
                .map_err(|e| Error::CorruptPayload(e.to_string()))?,
            target_digits: Self::require(self.target_digits, "target_digits")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactHeader {
    pub format_version: u32,
    pub kind: ArtifactKind,
    pub params: ArtifactParams,
    /// Hex SHA-256 of the compact JSON encoding of the payload.
    pub checksum: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Payload {
    /// Row `n` holds `s(1, n) ..= s(n, n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<String>>>,
    /// Block `n` holds `c[n][0] ..= c[n][J]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<String>>>,
}

impl Payload {
    fn checksum(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredArtifact {
    pub header: ArtifactHeader,
    pub payload: Payload,
}

fn encode_blocks(blocks: &[TaylorBlock]) -> Vec<Vec<String>> {
    blocks
        .iter()
        .map(|b| b.coeffs().iter().map(real_to_exact_string).collect())
        .collect()
}

fn decode_blocks(blocks: &[Vec<String>], prec: PrecisionConfig) -> Result<Vec<TaylorBlock>> {
    blocks
        .iter()
        .enumerate()
        .map(|(i, coeffs)| {
            if coeffs.is_empty() {
                return Err(Error::CorruptPayload(format!("block {} is empty", i + 1)));
            }
            let coeffs = coeffs
                .iter()
                .map(|c| real_from_exact_string(c, prec.bits()))
                .collect::<Result<Vec<_>>>()?;
            Ok(TaylorBlock::new(i as u32 + 1, coeffs))
        })
        .collect()
}

impl StoredArtifact {
    fn new(kind: ArtifactKind, params: ArtifactParams, payload: Payload) -> Self {
        StoredArtifact {
            header: ArtifactHeader {
                format_version: FORMAT_VERSION,
                kind,
                params,
                checksum: payload.checksum(),
            },
            payload,
        }
    }

    pub fn from_count_table(table: &CountTable) -> Self {
        let rows = table
            .rows()
            .map(|row| row.iter().map(|c| c.to_string()).collect())
            .collect();
        Self::new(
            ArtifactKind::CountTable,
            ArtifactParams::for_count_table(table.class(), table.max_n()),
            Payload {
                rows: Some(rows),
                blocks: None,
            },
        )
    }

    pub fn from_omega_ledger(ledger: &OmegaLedger) -> Self {
        Self::new(
            ArtifactKind::OmegaLedger,
            ArtifactParams::for_omega(ledger.config()),
            Payload {
                rows: None,
                blocks: Some(encode_blocks(ledger.blocks())),
            },
        )
    }

    pub fn from_omega_k_ledger(ledger: &OmegaKLedger) -> Self {
        let config = QuadratureConfig {
            max_interval: ledger.max_interval(),
            taylor_degree: ledger.degree(),
            precision: ledger.precision(),
            target_digits: ledger.target_digits(),
            ..Default::default()
        };
        Self::new(
            ArtifactKind::OmegaKLedger,
            ArtifactParams::for_omega_k(ledger.k_text(), &config),
            Payload {
                rows: None,
                blocks: Some(encode_blocks(ledger.blocks())),
            },
        )
    }

    fn expect_kind(&self, kind: ArtifactKind) -> Result<()> {
        if self.header.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "artifact holds a {}, not a {}",
                self.header.kind.as_str(),
                kind.as_str()
            )));
        }
        Ok(())
    }

    pub fn to_count_table(&self) -> Result<CountTable> {
        self.expect_kind(ArtifactKind::CountTable)?;
        let params = &self.header.params;
        let name = params
            .class
            .as_deref()
            .ok_or_else(|| Error::CorruptPayload("header lacks class".into()))?;
        let class = match (&params.weights, ComponentClass::from_name(name)) {
            (None, Some(class)) => class,
            (Some(weights), None) => {
                let weights = weights
                    .iter()
                    .map(|w| natural_from_str(w))
                    .collect::<Result<Vec<_>>>()?;
                ComponentClass::with_weights(name, weights)
                    .map_err(|e| Error::CorruptPayload(e.to_string()))?
            }
            _ => return Err(Error::CorruptPayload(format!("unknown class {name:?}"))),
        };
        let rows = self
            .payload
            .rows
            .as_ref()
            .ok_or_else(|| Error::CorruptPayload("payload lacks rows".into()))?
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| natural_from_str(c))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let table = CountTable::from_rows(class, rows)?;
        if Some(table.max_n()) != params.max_n {
            return Err(Error::CorruptPayload(
                "row count disagrees with header".into(),
            ));
        }
        Ok(table)
    }

    fn blocks(&self, config: &QuadratureConfig) -> Result<Vec<TaylorBlock>> {
        let stored = self
            .payload
            .blocks
            .as_ref()
            .ok_or_else(|| Error::CorruptPayload("payload lacks blocks".into()))?;
        decode_blocks(stored, config.precision)
    }

    pub fn to_omega_ledger(&self) -> Result<OmegaLedger> {
        self.expect_kind(ArtifactKind::OmegaLedger)?;
        let config = self.header.params.quadrature()?;
        OmegaLedger::from_blocks(config, self.blocks(&config)?)
    }

    pub fn to_omega_k_ledger(&self) -> Result<OmegaKLedger> {
        self.expect_kind(ArtifactKind::OmegaKLedger)?;
        let config = self.header.params.quadrature()?;
        let k = self
            .header
            .params
            .k
            .as_deref()
            .ok_or_else(|| Error::CorruptPayload("header lacks K".into()))?;
        OmegaKLedger::from_blocks(k, &config, self.blocks(&config)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("artifact serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_slice(bytes)?;
        let version = value
            .pointer("/header/format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::CorruptPayload("missing format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: FORMAT_VERSION,
            });
        }
        let artifact: StoredArtifact = serde_json::from_value(value)?;
        if artifact.payload.checksum() != artifact.header.checksum {
            return Err(Error::CorruptPayload("payload checksum mismatch".into()));
        }
        Ok(artifact)
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn save_artifact(artifact: &StoredArtifact, path: &Path) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    {
        let mut file = File::create(&tmp)?;
        file.write_all(&artifact.to_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_artifact(path: &Path) -> Result<StoredArtifact> {
    StoredArtifact::from_bytes(&fs::read(path)?)
}

/// A directory of artifacts keyed by kind and parameters.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

/// Holds the cache's advisory lock until dropped.
#[derive(Debug)]
pub struct CacheLock {
    file: File,
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub kind: ArtifactKind,
    pub params: ArtifactParams,
    pub bytes: u64,
}

const LOCK_FILE: &str = ".lock";

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock_file(&self) -> Result<File> {
        Ok(OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(LOCK_FILE))?)
    }

    /// Exclusive lock for writers.
    pub fn lock(&self) -> Result<CacheLock> {
        let file = self.lock_file()?;
        file.lock()?;
        Ok(CacheLock { file })
    }

    fn lock_shared(&self) -> Result<CacheLock> {
        let file = self.lock_file()?;
        file.lock_shared()?;
        Ok(CacheLock { file })
    }

    pub fn path_for(&self, kind: ArtifactKind, params: &ArtifactParams) -> PathBuf {
        let key = serde_json::to_vec(params).expect("params serialize");
        let digest = hex::encode(Sha256::digest(&key));
        self.dir
            .join(format!("{}-{}.json", kind.as_str(), &digest[..16]))
    }

    /// The cached artifact with exactly these parameters, if any.
    pub fn load(
        &self,
        kind: ArtifactKind,
        params: &ArtifactParams,
    ) -> Result<Option<StoredArtifact>> {
        let _guard = self.lock_shared()?;
        let path = self.path_for(kind, params);
        if !path.exists() {
            return Ok(None);
        }
        let artifact = load_artifact(&path)?;
        if artifact.header.kind != kind || artifact.header.params != *params {
            return Ok(None);
        }
        Ok(Some(artifact))
    }

    pub fn store(&self, artifact: &StoredArtifact) -> Result<PathBuf> {
        let _guard = self.lock()?;
        let path = self.path_for(artifact.header.kind, &artifact.header.params);
        save_artifact(artifact, &path)?;
        Ok(path)
    }

    /// Artifacts in the cache, sorted by file name. Unreadable files are skipped.
    pub fn list(&self) -> Result<Vec<CacheEntry>> {
        let _guard = self.lock_shared()?;
        let mut entries = Vec::new();
        for path in self.artifact_paths()? {
            if let Ok(artifact) = load_artifact(&path) {
                entries.push(CacheEntry {
                    bytes: fs::metadata(&path)?.len(),
                    kind: artifact.header.kind,
                    params: artifact.header.params,
                    path,
                });
            }
        }
        Ok(entries)
    }

    /// Removes every artifact and returns how many were removed.
    pub fn clear(&self) -> Result<usize> {
        let _guard = self.lock()?;
        let paths = self.artifact_paths()?;
        for path in &paths {
            fs::remove_file(path)?;
        }
        Ok(paths.len())
    }

    fn artifact_paths(&self) -> Result<Vec<PathBuf>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::build_table;

    #[test]
    fn count_table_round_trip() {
        let table = build_table(&ComponentClass::permutations(), 10).unwrap();
        let artifact = StoredArtifact::from_count_table(&table);
        let bytes = artifact.to_bytes();
        let back = StoredArtifact::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.to_count_table().unwrap(), table);
    }

    #[test]
    fn custom_class_round_trip() {
        let class =
            ComponentClass::with_weights("pairs", vec![0.into(), 1.into(), 0.into(), 0.into()])
                .unwrap();
        let table = build_table(&class, 4).unwrap();
        let back = StoredArtifact::from_bytes(&StoredArtifact::from_count_table(&table).to_bytes())
            .unwrap()
            .to_count_table()
            .unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn future_version_is_rejected() {
        let table = build_table(&ComponentClass::permutations(), 3).unwrap();
        let mut artifact = StoredArtifact::from_count_table(&table);
        artifact.header.format_version = FORMAT_VERSION + 1;
        let err = StoredArtifact::from_bytes(&artifact.to_bytes()).unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { found, .. } if found == FORMAT_VERSION + 1));
    }

    #[test]
    fn tampering_is_detected() {
        let table = build_table(&ComponentClass::permutations(), 4).unwrap();
        let text = String::from_utf8(StoredArtifact::from_count_table(&table).to_bytes()).unwrap();
        let tampered = text.replacen("\"6\"", "\"7\"", 1);
        assert_ne!(tampered, text);
        let err = StoredArtifact::from_bytes(tampered.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::CorruptPayload(_)));
        assert!(StoredArtifact::from_bytes(b"{ not json").is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let table = build_table(&ComponentClass::permutations(), 3).unwrap();
        let artifact = StoredArtifact::from_count_table(&table);
        assert!(artifact.to_omega_ledger().is_err());
    }

    #[test]
    fn cache_paths_depend_on_params() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let a = ArtifactParams::for_omega(&QuadratureConfig::default());
        let b = ArtifactParams::for_omega(&QuadratureConfig {
            taylor_degree: 41,
            ..Default::default()
        });
        assert_ne!(
            cache.path_for(ArtifactKind::OmegaLedger, &a),
            cache.path_for(ArtifactKind::OmegaLedger, &b)
        );
    }
}
