use rayon::prelude::*;

use crate::error::{Result, SpmmError};
use crate::exec::config::ExecConfig;
use crate::exec::cost::CostCounters;
use crate::exec::trace::{distinct_segments, AccessKind, AccessStats, ExecTrace, Instrument, MemAccess};

/// Execution context handed to a group body: identity, lane width,
/// warp-style collectives and the instrumentation hooks.
#[derive(Debug)]
pub struct LaneGroup {
    id: usize,
    lane_width: usize,
    mode: Instrument,
    step: usize,
    work: usize,
    counters: CostCounters,
    stats: [AccessStats; 3],
    accesses: Vec<MemAccess>,
}

impl LaneGroup {
    fn new(lane_width: usize, mode: Instrument) -> Self {
        LaneGroup {
            id: 0,
            lane_width,
            mode,
            step: 0,
            work: 0,
            counters: CostCounters::default(),
            stats: [AccessStats::default(); 3],
            accesses: Vec::new(),
        }
    }

    fn start(&mut self, id: usize) {
        self.id = id;
        self.step = 0;
        self.work = 0;
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    pub fn instrumented(&self) -> bool {
        self.mode.enabled()
    }

    /// Every lane observes the value held by `src_lane`. Counts one
    /// broadcast round.
    pub fn broadcast<T: Copy>(&mut self, lanes: &[T], src_lane: usize) -> Result<T> {
        if src_lane >= self.lane_width || src_lane >= lanes.len() {
            return Err(SpmmError::Contract(format!(
                "broadcast from lane {src_lane} in a group of {} lanes",
                self.lane_width.min(lanes.len())
            )));
        }
        self.counters.broadcast_rounds += 1;
        Ok(lanes[src_lane])
    }

    /// Adds to this group's work tally (nonzeros processed).
    pub fn add_work(&mut self, items: usize) {
        self.work += items;
    }

    pub fn counters_mut(&mut self) -> &mut CostCounters {
        &mut self.counters
    }

    fn push(&mut self, kind: AccessKind, active: usize, segments: usize, detail: impl FnOnce() -> (u64, Vec<usize>)) {
        let s = &mut self.stats[kind.slot()];
        s.accesses += 1;
        s.active_lanes += active as u64;
        s.ideal_transactions += active.div_ceil(self.lane_width) as u64;
        s.segments += segments as u64;
        if self.mode == Instrument::Full {
            let (lane_mask, addresses) = detail();
            self.accesses.push(MemAccess {
                group_id: self.id,
                step: self.step,
                kind,
                lane_mask,
                addresses,
            });
        }
        self.step += 1;
    }

    /// Lanes `0..lanes` access consecutive words starting at `start`.
    pub fn record_contiguous(&mut self, kind: AccessKind, start: usize, lanes: usize) {
        self.record_strided(kind, start, 1, lanes);
    }

    /// Lane `l < lanes` accesses word `start + l * stride`.
    pub fn record_strided(&mut self, kind: AccessKind, start: usize, stride: usize, lanes: usize) {
        if !self.mode.enabled() {
            return;
        }
        debug_assert!(lanes <= self.lane_width);
        let seg = self.lane_width;
        let segments = if lanes == 0 {
            0
        } else if stride <= 1 {
            let last = start + (lanes - 1) * stride;
            last / seg - start / seg + 1
        } else if stride >= seg {
            lanes
        } else {
            let mut count = 0;
            let mut prev = usize::MAX;
            for l in 0..lanes {
                let s = (start + l * stride) / seg;
                if s != prev {
                    count += 1;
                    prev = s;
                }
            }
            count
        };
        self.push(kind, lanes, segments, || {
            (lane_mask(lanes), (0..lanes).map(|l| start + l * stride).collect())
        });
    }

    /// A lockstep step in which no lane does useful work (padding rounds).
    pub fn record_idle(&mut self, kind: AccessKind) {
        if self.mode.enabled() {
            self.push(kind, 0, 0, || (0, Vec::new()));
        }
    }

    /// General gather/scatter: one address per set bit of `mask`.
    pub fn record(&mut self, kind: AccessKind, mask: u64, addresses: &[usize]) -> Result<()> {
        if mask.count_ones() as usize != addresses.len() {
            return Err(SpmmError::Contract(format!(
                "lane mask has {} active lanes but {} addresses were given",
                mask.count_ones(),
                addresses.len()
            )));
        }
        if self.lane_width < 64 && mask >> self.lane_width != 0 {
            return Err(SpmmError::Contract(format!(
                "lane mask {mask:#x} exceeds {} lanes",
                self.lane_width
            )));
        }
        if self.mode.enabled() {
            let segments = distinct_segments(addresses, self.lane_width);
            self.push(kind, addresses.len(), segments, || (mask, addresses.to_vec()));
        }
        Ok(())
    }
}

/// Bitset with lanes `0..lanes` set.
pub fn lane_mask(lanes: usize) -> u64 {
    if lanes >= 64 {
        u64::MAX
    } else {
        (1u64 << lanes) - 1
    }
}

/// Output window owned by one group: global elements
/// `offset..offset + data.len()` of the result buffer.
#[derive(Debug)]
pub struct Region<'a, S> {
    offset: usize,
    data: &'a mut [S],
}

impl<'a, S> Region<'a, S> {
    pub fn new(offset: usize, data: &'a mut [S]) -> Self {
        Region { offset, data }
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn write(&mut self, index: usize, value: S) -> Result<()> {
        *self.slot(index)? = value;
        Ok(())
    }

    pub fn slot(&mut self, index: usize) -> Result<&mut S> {
        let local = index
            .checked_sub(self.offset)
            .filter(|&i| i < self.data.len())
            .ok_or_else(|| self.violation(index, 1))?;
        Ok(&mut self.data[local])
    }

    /// Mutable view of global elements `start..start + len`.
    pub fn slice_mut(&mut self, start: usize, len: usize) -> Result<&mut [S]> {
        let local = start
            .checked_sub(self.offset)
            .filter(|&i| i + len <= self.data.len())
            .ok_or_else(|| self.violation(start, len))?;
        Ok(&mut self.data[local..local + len])
    }

    fn violation(&self, index: usize, len: usize) -> SpmmError {
        SpmmError::Contract(format!(
            "write to elements {index}..{} outside the group's region {}..{}",
            index + len,
            self.offset,
            self.offset + self.data.len()
        ))
    }
}

/// Splits `data` into consecutive regions of the given lengths.
pub fn split_regions<'a, S>(mut data: &'a mut [S], lengths: impl IntoIterator<Item = usize>) -> Vec<Region<'a, S>> {
    let mut offset = 0;
    let mut out = Vec::new();
    for len in lengths {
        let (head, tail) = std::mem::take(&mut data).split_at_mut(len);
        out.push(Region::new(offset, head));
        offset += len;
        data = tail;
    }
    out
}

/// Result of [`run_lane_groups`].
#[derive(Debug, Clone)]
pub struct GroupRun {
    /// Present unless the run used [`Instrument::Off`].
    pub trace: Option<ExecTrace>,
    pub counters: CostCounters,
}

struct Partial {
    work: Vec<usize>,
    counters: CostCounters,
    stats: [AccessStats; 3],
    accesses: Vec<MemAccess>,
    error: Option<SpmmError>,
}

/// Runs one group per element of `outputs`, group `g` receiving
/// `outputs[g]`. Groups may run concurrently on the rayon pool, but the
/// returned trace and counters are identical to running the groups one
/// after another in ascending id: per-group records are concatenated in id
/// order and counters are integer sums. If bodies fail, the error of the
/// lowest failing group id is returned.
pub fn run_lane_groups<O, F>(cfg: &ExecConfig, instrument: Instrument, outputs: Vec<O>, body: F) -> Result<GroupRun>
where
    O: Send,
    F: Fn(&mut LaneGroup, O) -> Result<()> + Sync,
{
    let num_groups = outputs.len();
    let lane_width = cfg.lane_width();
    let chunk = num_groups
        .div_ceil(rayon::current_num_threads() * 8)
        .max(1);

    let partials: Vec<Partial> = outputs
        .into_par_iter()
        .enumerate()
        .chunks(chunk)
        .map(|items| {
            let mut group = LaneGroup::new(lane_width, instrument);
            let mut work = Vec::with_capacity(if instrument.enabled() { items.len() } else { 0 });
            let mut error = None;
            for (id, out) in items {
                group.start(id);
                if let Err(e) = body(&mut group, out) {
                    error.get_or_insert(e);
                }
                if instrument.enabled() {
                    work.push(group.work);
                }
            }
            Partial {
                work,
                counters: group.counters,
                stats: group.stats,
                accesses: group.accesses,
                error,
            }
        })
        .collect();

    let mut counters = CostCounters::default();
    let mut trace = ExecTrace::empty(lane_width, instrument == Instrument::Full);
    for p in partials {
        if let Some(e) = p.error {
            return Err(e);
        }
        counters += p.counters;
        if instrument.enabled() {
            trace.work_per_group.extend(p.work);
            for (total, s) in trace.stats.iter_mut().zip(p.stats) {
                *total += s;
            }
            trace.accesses.extend(p.accesses);
        }
    }
    Ok(GroupRun {
        trace: instrument.enabled().then_some(trace),
        counters,
    })
}
