use std::io::Write;
use std::ops::AddAssign;

use crate::error::{Result, SpmmError};

/// How much a kernel call records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Instrument {
    /// No trace at all.
    #[default]
    Off,
    /// Per-group work and per-kind aggregate statistics only.
    Summary,
    /// Summary plus every individual [`MemAccess`].
    Full,
}

impl Instrument {
    pub fn enabled(self) -> bool {
        self != Instrument::Off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessKind {
    ReadA,
    ReadB,
    WriteC,
}

impl AccessKind {
    pub const ALL: [AccessKind; 3] = [AccessKind::ReadA, AccessKind::ReadB, AccessKind::WriteC];

    pub fn as_str(self) -> &'static str {
        match self {
            AccessKind::ReadA => "ReadA",
            AccessKind::ReadB => "ReadB",
            AccessKind::WriteC => "WriteC",
        }
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

/// One lockstep memory instruction issued by a lane group. Lanes outside
/// `lane_mask` do no useful work during the step; `addresses` lists one
/// word address per active lane, in lane order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemAccess {
    pub group_id: usize,
    pub step: usize,
    pub kind: AccessKind,
    pub lane_mask: u64,
    pub addresses: Vec<usize>,
}

impl MemAccess {
    pub fn active_lanes(&self) -> usize {
        self.lane_mask.count_ones() as usize
    }

    /// Aligned `segment_words`-wide segments touched by the active lanes.
    pub fn distinct_segments(&self, segment_words: usize) -> usize {
        distinct_segments(&self.addresses, segment_words)
    }

    /// Fewest segments that could serve the active lanes.
    pub fn ideal_transactions(&self, segment_words: usize) -> usize {
        self.active_lanes().div_ceil(segment_words)
    }
}

pub(crate) fn distinct_segments(addresses: &[usize], segment_words: usize) -> usize {
    let mut segs: Vec<usize> = addresses.iter().map(|a| a / segment_words).collect();
    segs.sort_unstable();
    segs.dedup();
    segs.len()
}

/// Running totals over a set of accesses of one kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AccessStats {
    pub accesses: u64,
    pub active_lanes: u64,
    pub ideal_transactions: u64,
    pub segments: u64,
}

impl AddAssign for AccessStats {
    fn add_assign(&mut self, rhs: Self) {
        self.accesses += rhs.accesses;
        self.active_lanes += rhs.active_lanes;
        self.ideal_transactions += rhs.ideal_transactions;
        self.segments += rhs.segments;
    }
}

/// Everything recorded during one instrumented kernel run, with groups
/// concatenated in ascending group id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecTrace {
    pub(crate) lane_width: usize,
    pub(crate) accesses: Vec<MemAccess>,
    pub(crate) work_per_group: Vec<usize>,
    pub(crate) stats: [AccessStats; 3],
    pub(crate) full: bool,
}

impl ExecTrace {
    pub(crate) fn empty(lane_width: usize, full: bool) -> Self {
        ExecTrace {
            lane_width,
            accesses: Vec::new(),
            work_per_group: Vec::new(),
            stats: [AccessStats::default(); 3],
            full,
        }
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    /// Segment size the aggregate statistics were computed with.
    pub fn segment_words(&self) -> usize {
        self.lane_width
    }

    /// Individual accesses; empty unless recorded with [`Instrument::Full`].
    pub fn accesses(&self) -> &[MemAccess] {
        &self.accesses
    }

    pub fn has_accesses(&self) -> bool {
        self.full
    }

    pub fn work_per_group(&self) -> &[usize] {
        &self.work_per_group
    }

    pub fn num_groups(&self) -> usize {
        self.work_per_group.len()
    }

    pub fn stats(&self, kind: AccessKind) -> AccessStats {
        self.stats[kind.slot()]
    }

    pub fn total_stats(&self) -> AccessStats {
        let mut total = AccessStats::default();
        for s in self.stats {
            total += s;
        }
        total
    }

    pub fn num_accesses(&self) -> u64 {
        self.total_stats().accesses
    }

    /// Writes `group_id,step,kind,active_lanes,distinct_segments`, one row
    /// per access.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.full {
            return Err(SpmmError::InvalidArgument(
                "trace was recorded without per-access detail".into(),
            ));
        }
        writeln!(out, "group_id,step,kind,active_lanes,distinct_segments")?;
        for a in &self.accesses {
            writeln!(
                out,
                "{},{},{},{},{}",
                a.group_id,
                a.step,
                a.kind.as_str(),
                a.active_lanes(),
                a.distinct_segments(self.lane_width)
            )?;
        }
        Ok(())
    }
}
