//! Time sources.
//!
//! Every component that sleeps or stamps a record goes through [`Clock`], so
//! tests can substitute [`FakeClock`] and observe request spacing without
//! waiting in real time.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, SubsecRound, TimeZone, Utc};

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary, clock-specific origin.
    fn elapsed(&self) -> Duration;

    /// Wall-clock time, truncated to whole seconds.
    fn utc_now(&self) -> DateTime<Utc>;

    fn sleep(&self, duration: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn elapsed(&self) -> Duration {
        self.origin.elapsed()
    }

    fn utc_now(&self) -> DateTime<Utc> {
        Utc::now().trunc_subsecs(0)
    }

    fn sleep(&self, duration: Duration) {
        if !duration.is_zero() {
            std::thread::sleep(duration);
        }
    }
}

/// Deterministic clock: `sleep` advances time instantly.
#[derive(Debug)]
pub struct FakeClock {
    start: DateTime<Utc>,
    elapsed: Mutex<Duration>,
}

impl FakeClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self {
            start: start.trunc_subsecs(0),
            elapsed: Mutex::new(Duration::ZERO),
        }
    }

    /// A fake clock starting at 2024-01-01T00:00:00Z.
    pub fn at_epoch() -> Self {
        Self::new(Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap())
    }

    pub fn advance(&self, duration: Duration) {
        *self.elapsed.lock().unwrap() += duration;
    }
}

impl Clock for FakeClock {
    fn elapsed(&self) -> Duration {
        *self.elapsed.lock().unwrap()
    }

    fn utc_now(&self) -> DateTime<Utc> {
        let elapsed = self.elapsed();
        let delta = chrono::Duration::from_std(elapsed).expect("fake clock overflow");
        (self.start + delta).trunc_subsecs(0)
    }

    fn sleep(&self, duration: Duration) {
        self.advance(duration);
    }
}
