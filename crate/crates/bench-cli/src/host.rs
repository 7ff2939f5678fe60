use std::fs::{File, TryLockError};
use std::path::PathBuf;

use crate::CliError;

/// Caps thread lists when set.
pub const THREADS_MAX_ENV: &str = "MPMM_THREADS_MAX";
/// Overrides the lock file location.
pub const LOCK_PATH_ENV: &str = "MPMM_LOCK_PATH";

const CPU_PREFIX: &str = "cpu: ";
const THREADS_PREFIX: &str = "available_threads: ";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostInfo {
    pub cpu: String,
    pub available_threads: usize,
}

impl HostInfo {
    pub fn detect() -> Self {
        let cpu = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|text| {
                text.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, v)| v.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".to_string());
        let available_threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self {
            cpu,
            available_threads,
        }
    }

    pub fn to_comments(&self) -> Vec<String> {
        vec![
            format!("{CPU_PREFIX}{}", self.cpu),
            format!("{THREADS_PREFIX}{}", self.available_threads),
        ]
    }

    /// Host recorded in a tuning table's comments.
    pub fn from_comments(comments: &[String]) -> Option<Self> {
        let cpu = comments.iter().find_map(|c| c.strip_prefix(CPU_PREFIX))?;
        let threads = comments
            .iter()
            .find_map(|c| c.strip_prefix(THREADS_PREFIX))?
            .trim()
            .parse()
            .ok()?;
        Some(Self {
            cpu: cpu.to_string(),
            available_threads: threads,
        })
    }
}

/// Upper bound on thread counts from the environment.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_MAX_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_MAX_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Drops thread counts above the cap.
pub fn cap_thread_list(threads: &[usize], cap: Option<usize>) -> Result<Vec<usize>, CliError> {
    let kept: Vec<usize> = threads
        .iter()
        .copied()
        .filter(|&t| cap.is_none_or(|c| t <= c))
        .collect();
    if kept.is_empty() {
        return Err(CliError::Usage(format!(
            "every thread count exceeds {THREADS_MAX_ENV}={}",
            cap.unwrap_or(0)
        )));
    }
    Ok(kept)
}

/// Exclusive lock held while a timed command runs. The OS releases it when
/// the process exits, so a crash never leaves a stale lock behind.
#[derive(Debug)]
pub struct RunLock {
    _file: File,
}

impl RunLock {
    pub fn path() -> PathBuf {
        std::env::var_os(LOCK_PATH_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("mpmm-bench.lock"))
    }

    pub fn acquire() -> Result<Self, CliError> {
        let path = Self::path();
        let file = File::options()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
        match file.try_lock() {
            Ok(()) => Ok(Self { _file: file }),
            Err(TryLockError::WouldBlock) => Err(CliError::LockBusy(path)),
            Err(TryLockError::Error(source)) => Err(CliError::Io { path, source }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn host_comments_round_trip() {
        let h = HostInfo {
            cpu: "Test CPU @ 2.10GHz".into(),
            available_threads: 12,
        };
        assert_eq!(HostInfo::from_comments(&h.to_comments()), Some(h));
        assert_eq!(HostInfo::from_comments(&["unrelated".into()]), None);
    }

    #[test]
    fn thread_capping() {
        assert_eq!(cap_thread_list(&[1, 2, 4, 8], Some(2)).unwrap(), vec![1, 2]);
        assert_eq!(cap_thread_list(&[1, 2], None).unwrap(), vec![1, 2]);
        assert!(matches!(
            cap_thread_list(&[4], Some(2)),
            Err(CliError::Usage(_))
        ));
    }
}
