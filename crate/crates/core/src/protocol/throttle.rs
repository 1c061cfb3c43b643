use std::time::Duration;

/// Token bucket that paces a message stream.
///
/// [`Throttle::delay`] never refuses a message; it returns how long the
/// caller must wait before handling it, so excess traffic is slowed down
/// (and pushed back onto the sender) rather than dropped.
#[derive(Debug, Clone)]
pub struct Throttle {
    rate: f64,
    burst: f64,
    tokens: f64,
    last: Duration,
}

impl Throttle {
    /// `rate` messages per second with bursts of up to `burst` messages.
    pub fn new(rate: f64, burst: f64) -> Self {
        assert!(rate > 0.0 && burst >= 1.0, "throttle needs rate > 0 and burst >= 1");
        Self {
            rate,
            burst,
            tokens: burst,
            last: Duration::ZERO,
        }
    }

    /// Charges one message arriving at `now` (any monotonic clock) and
    /// returns the wait before it may be handled.
    pub fn delay(&mut self, now: Duration) -> Duration {
        let now = now.max(self.last);
        let elapsed = (now - self.last).as_secs_f64();
        self.tokens = (self.tokens + elapsed * self.rate).min(self.burst);
        self.last = now;
        self.tokens -= 1.0;
        if self.tokens >= 0.0 {
            Duration::ZERO
        } else {
            let wait = Duration::from_secs_f64(-self.tokens / self.rate);
            // the wait is spent, so the clock moves on with it
            self.last = now + wait;
            self.tokens = 0.0;
            wait
        }
    }
}
