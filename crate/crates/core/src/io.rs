//! Directory layout for affinity pyramids: `affinity_l{l}.afpy` (f32,
//! `r^2 x h x w`) and `valid_l{l}.afpy` (u32 0/1, same shape) for
//! `l = 0, 1, ...` until the first missing level.

use std::path::{Path, PathBuf};

use crate::affinity::{AffinityMap, AffinityPyramid};
use crate::error::{Error, Result};
use crate::tensor::{read_tensor, write_tensor};

pub fn affinity_path(dir: &Path, level: usize) -> PathBuf {
    dir.join(format!("affinity_l{level}.afpy"))
}

pub fn validity_path(dir: &Path, level: usize) -> PathBuf {
    dir.join(format!("valid_l{level}.afpy"))
}

pub fn write_pyramid(dir: &Path, pyramid: &AffinityPyramid) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (l, map) in pyramid.levels().iter().enumerate() {
        write_tensor(affinity_path(dir, l), &map.to_tensor())?;
        write_tensor(validity_path(dir, l), &map.validity_tensor())?;
    }
    Ok(())
}

/// Reads consecutive levels from 0; a missing validity file means validity
/// from the image bounds.
pub fn read_pyramid(dir: &Path) -> Result<AffinityPyramid> {
    let mut levels = Vec::new();
    loop {
        let l = levels.len();
        let path = affinity_path(dir, l);
        if !path.exists() {
            break;
        }
        let vpath = validity_path(dir, l);
        let validity = if vpath.exists() { Some(read_tensor(vpath)?) } else { None };
        levels.push(AffinityMap::from_tensors(l as u32, read_tensor(path)?, validity)?);
    }
    if levels.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no {} found",
            affinity_path(dir, 0).display()
        )));
    }
    AffinityPyramid::new(levels)
}
