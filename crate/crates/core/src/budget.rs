//! Cooperative time limits and work budgets for the search procedures.

use std::time::{Duration, Instant};

use thiserror::Error;

/// A search ran out of candidates or time before reaching a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("search budget exhausted")]
pub struct Exhausted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Instant::now().checked_add(d))
    }

    pub fn from_millis(ms: Option<u64>) -> Self {
        ms.map_or(Deadline::none(), |ms| Deadline::after(Duration::from_millis(ms)))
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

/// Counts search nodes against a limit and polls the deadline periodically.
#[derive(Debug, Clone)]
pub struct Budget {
    remaining: u64,
    deadline: Deadline,
    ticks: u64,
}

impl Budget {
    pub fn new(limit: u64, deadline: Deadline) -> Self {
        Budget {
            remaining: limit,
            deadline,
            ticks: 0,
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX, Deadline::none())
    }

    pub fn deadline(&self) -> Deadline {
        self.deadline
    }

    /// Consumes one unit of work.
    pub fn tick(&mut self) -> Result<(), Exhausted> {
        if self.remaining == 0 {
            return Err(Exhausted);
        }
        self.remaining -= 1;
        self.ticks += 1;
        if self.ticks % 256 == 0 && self.deadline.expired() {
            self.remaining = 0;
            return Err(Exhausted);
        }
        Ok(())
    }

    /// A fresh budget with `limit` units sharing this budget's deadline.
    pub fn fork(&self, limit: u64) -> Budget {
        Budget::new(limit, self.deadline)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_down() {
        let mut b = Budget::new(2, Deadline::none());
        assert!(b.tick().is_ok());
        assert!(b.tick().is_ok());
        assert_eq!(b.tick(), Err(Exhausted));
    }

    #[test]
    fn deadline_in_the_past_expires() {
        let d = Deadline::after(Duration::from_millis(0));
        std::thread::sleep(Duration::from_millis(2));
        assert!(d.expired());
        let mut b = Budget::new(u64::MAX, d);
        assert!((0..1000).any(|_| b.tick().is_err()));
    }
}
