//! File I/O confined to a workspace root.

use std::io::Write;
use std::path::{Component, Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FileIoError {
    #[error("path {0} escapes the workspace root")]
    PathEscape(String),
    #[error("file {0} not found")]
    NotFound(String),
    #[error("write mode requires content")]
    MissingContent,
    #[error("file i/o on {path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &Path, e: std::io::Error) -> FileIoError {
    FileIoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Resolves `relative` under `root`, refusing absolute paths, `..` that climbs
/// above the root, and symlinks that lead outside it.
pub fn confine(root: &Path, relative: &str) -> Result<PathBuf, FileIoError> {
    let escape = || FileIoError::PathEscape(relative.to_string());
    let mut parts: Vec<&std::ffi::OsStr> = Vec::new();
    for comp in Path::new(relative).components() {
        match comp {
            Component::Normal(p) => parts.push(p),
            Component::CurDir => {}
            Component::ParentDir => {
                parts.pop().ok_or_else(escape)?;
            }
            Component::RootDir | Component::Prefix(_) => return Err(escape()),
        }
    }
    if parts.is_empty() {
        return Err(escape());
    }
    let root = root.canonicalize().map_err(|e| io_err(root, e))?;
    let target: PathBuf = parts.iter().fold(root.clone(), |acc, p| acc.join(p));

    // The deepest existing ancestor must still resolve inside the root.
    let mut probe = target.as_path();
    loop {
        if probe.exists() {
            let real = probe.canonicalize().map_err(|e| io_err(probe, e))?;
            if !real.starts_with(&root) {
                return Err(escape());
            }
            break;
        }
        match probe.parent() {
            Some(p) => probe = p,
            None => break,
        }
    }
    Ok(target)
}

pub fn read(root: &Path, relative: &str) -> Result<String, FileIoError> {
    let path = confine(root, relative)?;
    match std::fs::read_to_string(&path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(FileIoError::NotFound(relative.to_string()))
        }
        Err(e) => Err(io_err(&path, e)),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write(root: &Path, relative: &str, content: &str) -> Result<PathBuf, FileIoError> {
    let path = confine(root, relative)?;
    let parent = path.parent().expect("confined path has a parent");
    std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    // Re-check after creating directories in case a component was a symlink.
    let path = confine(root, relative)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| io_err(parent, e))?;
    tmp.write_all(content.as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(|e| io_err(&path, e))?;
    tmp.persist(&path).map_err(|e| io_err(&path, e.error))?;
    Ok(path)
}
