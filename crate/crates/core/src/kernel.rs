//! Discrete-event core: virtual clock, ordered event queue and seeded
//! random streams.
//!
//! Events are ordered by `(time, insertion sequence)`, so two events at the
//! same instant always run in the order they were scheduled.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::KernelError;

/// Simulation time in seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    /// Panics if `seconds` is negative or not finite.
    pub fn from_secs(seconds: f64) -> Self {
        assert!(
            seconds.is_finite() && seconds >= 0.0,
            "simulation time must be finite and non-negative, got {seconds}"
        );
        SimTime(seconds)
    }

    pub fn secs(self) -> f64 {
        self.0
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifies a scheduled event so it can be cancelled before it fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Scheduled<E> {
    at: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // BinaryHeap is a max-heap; reverse so the earliest (time, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Single-threaded event scheduler generic over the event payload.
pub struct Kernel<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Scheduled<E>>,
    cancelled: HashSet<u64>,
}

impl<E> Default for Kernel<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Kernel<E> {
    pub fn new() -> Self {
        Kernel {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of events still queued (cancelled ones included until popped).
    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Schedules `event` to fire at `at`. Scheduling in the past is an error.
    pub fn schedule(&mut self, event: E, at: SimTime) -> Result<EventHandle, KernelError> {
        if at < self.now {
            return Err(KernelError::ScheduleInPast {
                at: at.secs(),
                now: self.now.secs(),
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Scheduled { at, seq, event });
        Ok(EventHandle(seq))
    }

    /// Convenience for `schedule(event, now + delay)`.
    pub fn schedule_in(&mut self, event: E, delay: f64) -> Result<EventHandle, KernelError> {
        if !(delay >= 0.0) {
            return Err(KernelError::ScheduleInPast {
                at: self.now.secs() + delay,
                now: self.now.secs(),
            });
        }
        self.schedule(event, SimTime(self.now.secs() + delay))
    }

    /// Cancels a pending event. Returns false if it already fired or was
    /// cancelled before.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq {
            return false;
        }
        if !self.queue.iter().any(|s| s.seq == handle.0) {
            return false;
        }
        self.cancelled.insert(handle.0)
    }

    /// Executes every event with time `<= t_end` in `(time, seq)` order and
    /// leaves the clock at `t_end`. The handler may schedule further events.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> Result<u64, KernelError>
    where
        F: FnMut(&mut Self, E),
    {
        if t_end < self.now {
            return Err(KernelError::RunInPast {
                t_end: t_end.secs(),
                now: self.now.secs(),
            });
        }
        let mut executed = 0;
        while let Some(head) = self.queue.peek() {
            if head.at > t_end {
                break;
            }
            let Scheduled { at, seq, event } = self.queue.pop().expect("peeked");
            if self.cancelled.remove(&seq) {
                continue;
            }
            debug_assert!(at >= self.now);
            self.now = at;
            handler(self, event);
            executed += 1;
        }
        self.now = t_end;
        Ok(executed)
    }
}

/// Independent random stream per concern; see [`RandomStream::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Mobility,
    Channel,
    Traffic,
    Jitter,
    Positioning,
    /// Injected extra packet loss, independent of the channel draws.
    Loss,
}

impl StreamId {
    fn index(self) -> u64 {
        match self {
            StreamId::Mobility => 1,
            StreamId::Channel => 2,
            StreamId::Traffic => 3,
            StreamId::Jitter => 4,
            StreamId::Positioning => 5,
            StreamId::Loss => 6,
        }
    }
}

/// Seeded, platform-independent random stream.
///
/// Backed by ChaCha8 with the stream id mapped onto ChaCha's stream counter,
/// so streams sharing a seed never share keystream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: StreamId) -> Self {
        Self::with_raw_id(seed, stream.index())
    }

    pub fn with_raw_id(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { rng }
    }

    /// Uniform draw from `[lo, hi)`; returns `lo` when the interval is empty.
    ///
    /// Panics if `lo > hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi, "uniform: lo ({lo}) > hi ({hi})");
        if lo == hi {
            return lo;
        }
        self.rng.random_range(lo..hi)
    }

    /// Uniform index in `0..n`. Panics on `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
