//! Resumable sweep cache: one JSON file per row, named by the content hash
//! of the row key. Stale or corrupted entries are detected by hash mismatch
//! and silently recomputed; writes stage into a temp file and rename.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use kzfcs::scaling::SweepRow;

use crate::config::RunConfig;

/// FNV-1a over the canonical key/payload strings. Collision resistance is
/// irrelevant here: the key string itself is stored and compared verbatim;
/// the hash only names the file and flags corruption.
fn fnv64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    kappa: Vec<f64>,
    wall_time: f64,
    max_norm_defect: f64,
    payload_fnv: String,
}

fn payload_string(kappa: &[f64], wall_time: f64, max_norm_defect: f64) -> String {
    let mut text = String::new();
    for k in kappa {
        text.push_str(&format!("{k:.16e},"));
    }
    text.push_str(&format!("{wall_time:.16e},{max_norm_defect:.16e}"));
    text
}

pub struct SweepCache {
    dir: PathBuf,
}

impl SweepCache {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
        }
    }

    /// Canonical key of one sweep cell; everything that influences the row
    /// enters here.
    pub fn key(config: &RunConfig, tau_q: f64) -> String {
        format!(
            "v1|n={}|j={:.16e}|hbar={:.16e}|tau={:.16e}|method={}|a={:.16e}|qmax={}|abs_tol={:.16e}|rel_tol={:.16e}",
            config.n,
            config.j,
            config.hbar,
            tau_q,
            config.method,
            config.start_factor,
            config.qmax,
            config.abs_tol,
            config.rel_tol,
        )
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{:016x}.json", fnv64(key)))
    }

    /// Fetch a row if a valid entry exists. Any mismatch (key, hash, shape)
    /// is treated as a miss.
    pub fn load(&self, config: &RunConfig, tau_q: f64) -> Option<SweepRow> {
        let key = Self::key(config, tau_q);
        let text = std::fs::read_to_string(self.path_for(&key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        if entry.key != key || entry.kappa.len() != config.qmax {
            return None;
        }
        let expected = format!(
            "{:016x}",
            fnv64(&payload_string(
                &entry.kappa,
                entry.wall_time,
                entry.max_norm_defect
            ))
        );
        if entry.payload_fnv != expected {
            return None;
        }
        Some(SweepRow {
            n: config.n,
            tau_q,
            method: config.method,
            kappa: entry.kappa,
            wall_time: entry.wall_time,
            max_norm_defect: entry.max_norm_defect,
        })
    }

    pub fn store(&self, config: &RunConfig, row: &SweepRow) -> Result<()> {
        std::fs::create_dir_all(&self.dir)
            .with_context(|| format!("cannot create cache directory {}", self.dir.display()))?;
        let key = Self::key(config, row.tau_q);
        debug_assert_eq!(row.method, config.method);
        let entry = CacheEntry {
            key: key.clone(),
            kappa: row.kappa.clone(),
            wall_time: row.wall_time,
            max_norm_defect: row.max_norm_defect,
            payload_fnv: format!(
                "{:016x}",
                fnv64(&payload_string(
                    &row.kappa,
                    row.wall_time,
                    row.max_norm_defect
                ))
            ),
        };
        let path = self.path_for(&key);
        let text = serde_json::to_string_pretty(&entry)?;
        crate::config::atomic_write(&path, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_is_stable() {
        // Reference vectors for 64-bit FNV-1a.
        assert_eq!(fnv64(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv64("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn payload_survives_json_round_trip() {
        // Awkward values: subnormals, negative zero, tiny timings, and a
        // value whose shortest decimal form needs the exact (not fast)
        // float parser to come back bit-identical.
        let hard = f64::from_bits(4608387999617044892);
        let kappa = vec![4.2e-310, -0.0, 1.9905358527674863e1, 0.1 + 0.2, hard];
        let wall_time = 3.507e-6;
        let defect = 6.864e-11;
        let entry = CacheEntry {
            key: "k".into(),
            kappa: kappa.clone(),
            wall_time,
            max_norm_defect: defect,
            payload_fnv: format!("{:016x}", fnv64(&payload_string(&kappa, wall_time, defect))),
        };
        let text = serde_json::to_string_pretty(&entry).unwrap();
        let parsed: CacheEntry = serde_json::from_str(&text).unwrap();
        let recomputed = format!(
            "{:016x}",
            fnv64(&payload_string(
                &parsed.kappa,
                parsed.wall_time,
                parsed.max_norm_defect
            ))
        );
        assert_eq!(parsed.payload_fnv, recomputed);
        for (a, b) in kappa.iter().zip(&parsed.kappa) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
