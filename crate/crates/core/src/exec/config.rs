use std::env;

use crate::error::{Result, SpmmError};

/// Widest lane group the model supports; lane masks are `u64` bitsets.
pub const MAX_LANES: usize = 64;

/// Environment variable that overrides the lane width in [`ExecConfig::from_env`].
pub const LANE_WIDTH_ENV: &str = "SPMM_LANE_WIDTH";

/// Shape of the simulated launch: `lane_width` lanes per group,
/// `groups_per_block` groups per block and `work_per_thread` items per lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    lane_width: usize,
    groups_per_block: usize,
    work_per_thread: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            lane_width: 32,
            groups_per_block: 4,
            work_per_thread: 1,
        }
    }
}

impl ExecConfig {
    pub fn new(lane_width: usize, groups_per_block: usize, work_per_thread: usize) -> Result<Self> {
        if lane_width == 0 || lane_width > MAX_LANES {
            return Err(SpmmError::InvalidArgument(format!(
                "lane width {lane_width} outside 1..={MAX_LANES}"
            )));
        }
        if groups_per_block == 0 || work_per_thread == 0 {
            return Err(SpmmError::InvalidArgument(
                "groups per block and work per thread must be at least 1".into(),
            ));
        }
        Ok(ExecConfig {
            lane_width,
            groups_per_block,
            work_per_thread,
        })
    }

    /// Default configuration with the lane width taken from `SPMM_LANE_WIDTH`
    /// when that variable is set.
    pub fn from_env() -> Result<Self> {
        let base = ExecConfig::default();
        match env::var(LANE_WIDTH_ENV) {
            Ok(raw) => {
                let w = raw.trim().parse().map_err(|_| {
                    SpmmError::InvalidArgument(format!("{LANE_WIDTH_ENV}={raw:?} is not a count"))
                })?;
                ExecConfig::new(w, base.groups_per_block, base.work_per_thread)
            }
            Err(_) => Ok(base),
        }
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    pub fn groups_per_block(&self) -> usize {
        self.groups_per_block
    }

    pub fn work_per_thread(&self) -> usize {
        self.work_per_thread
    }

    /// Lanes per block (`lane_width * groups_per_block`).
    pub fn block_size(&self) -> usize {
        self.lane_width * self.groups_per_block
    }

    /// Nonzeros owned by one merge block (`block_size * work_per_thread`).
    pub fn items_per_block(&self) -> usize {
        self.block_size() * self.work_per_thread
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = ExecConfig::default();
        assert_eq!(cfg.lane_width(), 32);
        assert_eq!(cfg.block_size(), 128);
        assert_eq!(cfg.items_per_block(), 128);
        assert_eq!(ExecConfig::new(32, 4, 7).unwrap().items_per_block(), 896);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ExecConfig::new(0, 4, 1).is_err());
        assert!(ExecConfig::new(65, 4, 1).is_err());
        assert!(ExecConfig::new(32, 0, 1).is_err());
        assert!(ExecConfig::new(32, 4, 0).is_err());
    }
}
