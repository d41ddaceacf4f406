//! Match-count and wall-clock limits shared by the filtering, expansion and
//! enumeration stages.

use std::time::{Duration, Instant};

/// Caps applied to one query evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_matches: Option<u64>,
    pub timeout: Option<Duration>,
}

impl EnumLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    /// 10^7 matches, 10 minutes.
    pub fn benchmark() -> Self {
        EnumLimits {
            max_matches: Some(10_000_000),
            timeout: Some(Duration::from_secs(600)),
        }
    }

    pub fn with_max_matches(mut self, k: u64) -> Self {
        self.max_matches = Some(k);
        self
    }

    pub fn with_timeout(mut self, t: Duration) -> Self {
        self.timeout = Some(t);
        self
    }
}

/// An optional point in time after which work should stop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn at(t: Instant) -> Self {
        Deadline(Some(t))
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Instant::now().checked_add(d))
    }

    pub fn from_timeout(timeout: Option<Duration>) -> Self {
        timeout.map(Self::after).unwrap_or_default()
    }

    pub fn is_set(&self) -> bool {
        self.0.is_some()
    }

    pub fn expired(&self) -> bool {
        matches!(self.0, Some(t) if Instant::now() >= t)
    }
}

/// Polls a [`Deadline`] once every `2^shift` ticks.
#[derive(Debug)]
pub(crate) struct DeadlineTicker {
    deadline: Deadline,
    count: u32,
    mask: u32,
    tripped: bool,
}

impl DeadlineTicker {
    pub(crate) fn new(deadline: Deadline, shift: u32) -> Self {
        DeadlineTicker {
            deadline,
            count: 0,
            mask: (1 << shift) - 1,
            tripped: false,
        }
    }

    /// Returns true once the deadline has passed.
    #[inline]
    pub(crate) fn tick(&mut self) -> bool {
        if self.tripped {
            return true;
        }
        self.count = self.count.wrapping_add(1);
        if self.count & self.mask == 0 && self.deadline.expired() {
            self.tripped = true;
        }
        self.tripped
    }

    pub(crate) fn tripped(&self) -> bool {
        self.tripped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_deadline_trips_on_first_poll() {
        let mut t = DeadlineTicker::new(Deadline::after(Duration::ZERO), 2);
        assert!(!t.tick());
        assert!(!t.tick());
        assert!(!t.tick());
        assert!(t.tick());
        assert!(t.tripped());
    }

    #[test]
    fn no_deadline_never_trips() {
        let mut t = DeadlineTicker::new(Deadline::none(), 0);
        assert!((0..100).all(|_| !t.tick()));
    }
}
