pub mod build_index;
pub mod gen_data;
pub mod plan;
pub mod profile;
pub mod report;
pub mod serve;
pub mod simulate;
pub mod split;

use std::path::Path;

use anyhow::{Context, Result};

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(())
}

/// Output directory override honored by every command.
pub(crate) fn resolve_out_dir(dir: &Path) -> std::path::PathBuf {
    match std::env::var_os("TIVF_OUT_DIR") {
        Some(base) if dir.is_relative() => Path::new(&base).join(dir),
        _ => dir.to_path_buf(),
    }
}
