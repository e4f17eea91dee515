//! Request gate enforcing a minimum spacing between outbound requests.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::clock::Clock;

#[derive(Debug, Default)]
struct GateState {
    last_request: Option<Duration>,
    not_before: Option<Duration>,
}

/// A single shared gate. Callers on any thread serialize through
/// [`Throttle::acquire`]; the lock is held across the wait so the granted
/// slots form a total order.
pub struct Throttle {
    min_interval: Duration,
    clock: Arc<dyn Clock>,
    state: Mutex<GateState>,
}

impl std::fmt::Debug for Throttle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Throttle")
            .field("min_interval", &self.min_interval)
            .finish_non_exhaustive()
    }
}

impl Throttle {
    pub fn new(min_interval: Duration, clock: Arc<dyn Clock>) -> Self {
        Self {
            min_interval,
            clock,
            state: Mutex::new(GateState::default()),
        }
    }

    pub fn min_interval(&self) -> Duration {
        self.min_interval
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    /// Blocks until the next request may be sent and claims that slot.
    /// Returns the clock reading at which the slot was granted.
    pub fn acquire(&self) -> Duration {
        let mut state = self.state.lock().unwrap();
        let mut earliest = state
            .last_request
            .map(|last| last + self.min_interval)
            .unwrap_or(Duration::ZERO);
        if let Some(hold) = state.not_before.take() {
            earliest = earliest.max(hold);
        }
        let now = self.clock.elapsed();
        if now < earliest {
            self.clock.sleep(earliest - now);
        }
        let granted = self.clock.elapsed();
        state.last_request = Some(granted);
        granted
    }

    /// Pushes the next slot out to at least `delay` from now, e.g. for a
    /// server `Retry-After` hint.
    pub fn defer(&self, delay: Duration) {
        let until = self.clock.elapsed() + delay;
        let mut state = self.state.lock().unwrap();
        state.not_before = Some(state.not_before.map_or(until, |t| t.max(until)));
    }
}
