//! Idle-timeout search by linear descent of the invocation interval.

use serde::{Deserialize, Serialize};

use super::{CampaignSummary, EngineError, Prober};
use crate::adapter::InvocationAdapter;
use crate::clock::Clock;
use crate::lifecycle::{InvocationRecord, Millis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub upper_bound: Millis,
    pub step: Millis,
    pub campaign_duration: Millis,
    pub warm_confirm_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            upper_bound: Millis::from_minutes(20),
            step: Millis::from_minutes(1),
            campaign_duration: Millis::from_hours(5),
            warm_confirm_threshold: 0.9,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let invalid = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if self.step == Millis::ZERO {
            return invalid("step must be positive");
        }
        if self.upper_bound <= self.step {
            return invalid("upper bound must exceed step");
        }
        if self.campaign_duration < self.upper_bound.saturating_mul(2) {
            return invalid("campaign duration must be at least twice the upper bound");
        }
        if !(self.warm_confirm_threshold > 0.0 && self.warm_confirm_threshold <= 1.0) {
            return invalid("warm confirmation threshold must be in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdleTimeoutEstimate {
    /// Longest interval at which consecutive requests reached the same instance.
    pub x: Millis,
    pub descent: Vec<CampaignSummary>,
    pub confirm_at_x: CampaignSummary,
    pub confirm_at_x_plus_1: CampaignSummary,
    pub records: Vec<InvocationRecord>,
}

impl IdleTimeoutEstimate {
    pub fn minutes(&self) -> u64 {
        self.x.whole_minutes()
    }
}

impl<A: InvocationAdapter, C: Clock> Prober<A, C> {
    /// Descends from `upper_bound` by `step` until two consecutive requests
    /// are served by the same instance, then confirms at `x` and `x + step`.
    pub fn find_idle_timeout(&mut self, config: &SearchConfig) -> Result<IdleTimeoutEstimate, EngineError> {
        config.validate()?;
        let first_record = self.records.len();
        let mut descent = Vec::new();
        let mut interval = config.upper_bound;
        let x = loop {
            let name = format!("search@{interval}");
            let recs = self.fixed_interval_campaign(&name, interval, config.campaign_duration)?;
            let summary = CampaignSummary::from_records(&name, interval, &recs);
            let reused = summary.warm_after_first > 0;
            descent.push(summary);
            if reused {
                if interval == config.upper_bound {
                    let at_upper_bound = descent.pop().expect("just pushed");
                    return Err(EngineError::UpperBoundTooLow { at_upper_bound: Box::new(at_upper_bound) });
                }
                break interval;
            }
            match interval.checked_sub(config.step) {
                Some(next) if next > Millis::ZERO => interval = next,
                _ => return Err(EngineError::IdleTimeoutBelowStep { smallest_interval: interval }),
            }
        };

        let name = format!("confirm@{x}");
        let recs = self.fixed_interval_campaign(&name, x, config.campaign_duration)?;
        let at_x = CampaignSummary::from_records(&name, x, &recs);

        let above = x + config.step;
        let name = format!("confirm@{above}");
        let recs = self.fixed_interval_campaign(&name, above, config.campaign_duration)?;
        let at_x_plus_1 = CampaignSummary::from_records(&name, above, &recs);

        if at_x_plus_1.warm_after_first > 0 || at_x.warm_fraction() < config.warm_confirm_threshold {
            return Err(EngineError::InconsistentPlatform { at_x: Box::new(at_x), at_x_plus_1: Box::new(at_x_plus_1) });
        }
        Ok(IdleTimeoutEstimate {
            x,
            descent,
            confirm_at_x: at_x,
            confirm_at_x_plus_1: at_x_plus_1,
            records: self.records[first_record..].to_vec(),
        })
    }
}
