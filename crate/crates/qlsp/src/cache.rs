//! Phase sequences shared across solves, optionally persisted to a directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use qlsp_core::invpoly::{Convention, PhaseSequence};
use qlsp_core::qsvt::{PhaseMemo, PhaseSource};

use crate::formats::{read_phases, write_phases};

/// Thread-safe phase store. With a directory, sequences are read from and
/// written to `reflection_k<κ>_e<ε>.txt`; unreadable files are recomputed.
#[derive(Debug, Default)]
pub struct PhaseCache {
    dir: Option<PathBuf>,
    memo: Mutex<BTreeMap<(u64, u64), PhaseSequence>>,
}

impl PhaseCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir: Some(dir), memo: Mutex::default() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn file_name(kappa: f64, epsilon: f64) -> String {
        format!("reflection_k{kappa}_e{epsilon}.txt")
    }

    fn load(&self, kappa: f64, epsilon: f64) -> Option<PhaseSequence> {
        let path = self.dir.as_ref()?.join(Self::file_name(kappa, epsilon));
        let seq = read_phases(fs::File::open(path).ok()?).ok()?;
        (seq.convention() == Convention::Reflection).then_some(seq)
    }

    fn store(&self, seq: &PhaseSequence, kappa: f64, epsilon: f64) {
        let Some(dir) = &self.dir else { return };
        let path = dir.join(Self::file_name(kappa, epsilon));
        let tmp = path.with_extension("tmp");
        let mut buf = Vec::new();
        // A cache write failure only costs a recomputation next time.
        if write_phases(seq, &mut buf).is_ok() && fs::write(&tmp, &buf).is_ok() {
            let _ = fs::rename(&tmp, &path);
        }
    }
}

impl PhaseSource for PhaseCache {
    fn phases(&self, kappa: f64, epsilon: f64) -> qlsp_core::Result<PhaseSequence> {
        let key = (kappa.to_bits(), epsilon.to_bits());
        let mut memo = self.memo.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(seq) = memo.get(&key) {
            return Ok(seq.clone());
        }
        let seq = match self.load(kappa, epsilon) {
            Some(seq) => seq,
            None => {
                let seq = PhaseMemo::compute(kappa, epsilon)?;
                self.store(&seq, kappa, epsilon);
                seq
            }
        };
        memo.insert(key, seq.clone());
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persists_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let fresh = PhaseCache::with_dir(dir.path()).unwrap().phases(4.0, 0.1).unwrap();
        assert!(dir.path().join(PhaseCache::file_name(4.0, 0.1)).exists());
        let reloaded = PhaseCache::with_dir(dir.path()).unwrap();
        assert_eq!(reloaded.load(4.0, 0.1).unwrap(), fresh);
        assert_eq!(reloaded.phases(4.0, 0.1).unwrap(), fresh);
    }

    #[test]
    fn corrupt_file_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(PhaseCache::file_name(2.0, 0.1)), "garbage").unwrap();
        let cache = PhaseCache::with_dir(dir.path()).unwrap();
        let seq = cache.phases(2.0, 0.1).unwrap();
        assert_eq!(seq, PhaseMemo::compute(2.0, 0.1).unwrap());
        assert!(cache.load(2.0, 0.1).is_some());
    }
}
