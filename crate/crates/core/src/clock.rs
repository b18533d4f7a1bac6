//! Time sources for campaigns.
//!
//! The probe engine only needs "what time is it" and "block until t", both
//! expressed relative to the start of the probe session.

use std::time::Instant;

use crate::lifecycle::Millis;

pub trait Clock {
    fn now(&self) -> Millis;

    /// Returns once `now() >= t`. Returns immediately if `t` has passed.
    fn wait_until(&mut self, t: Millis);
}

/// Simulation time that only moves when waited on.
#[derive(Debug, Clone, Default)]
pub struct VirtualClock {
    now: Millis,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(t: Millis) -> Self {
        VirtualClock { now: t }
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> Millis {
        self.now
    }

    fn wait_until(&mut self, t: Millis) {
        if t > self.now {
            self.now = t;
        }
    }
}

/// Real elapsed time since construction.
#[derive(Debug, Clone)]
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        WallClock { origin: Instant::now() }
    }
}

impl Clock for WallClock {
    fn now(&self) -> Millis {
        Millis::new(self.origin.elapsed().as_millis().min(u64::MAX as u128) as u64)
    }

    fn wait_until(&mut self, t: Millis) {
        // sleep against the absolute deadline so drift never accumulates
        let deadline = self.origin + t.as_std();
        let now = Instant::now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}
