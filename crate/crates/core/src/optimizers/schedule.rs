use alloc::format;

use crate::{Error, Result};

/// `α_t` as a function of the schedule index `t ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant,
    /// `α₀/t`.
    InverseTime,
    /// `α₀·γᵗ`, `0 < γ < 1`.
    Exponential { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRate {
    pub base: f64,
    pub schedule: Schedule,
    /// Steps per schedule tick: step `t` reads the schedule at `⌈t/period⌉`.
    pub period: usize,
}

impl LearningRate {
    pub fn new(base: f64, schedule: Schedule) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::argument(format!("learning rate must be positive and finite, got {base}")));
        }
        if let Schedule::Exponential { gamma } = schedule {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(Error::argument(format!("exponential decay needs 0 < gamma < 1, got {gamma}")));
            }
        }
        Ok(LearningRate { base, schedule, period: 1 })
    }

    pub fn constant(base: f64) -> Result<Self> {
        Self::new(base, Schedule::Constant)
    }

    pub fn with_period(mut self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::argument("schedule period must be >= 1"));
        }
        self.period = period;
        Ok(self)
    }

    pub fn at(&self, t: usize) -> f64 {
        let tick = t.max(1).div_ceil(self.period);
        match self.schedule {
            Schedule::Constant => self.base,
            Schedule::InverseTime => self.base / tick as f64,
            Schedule::Exponential { gamma } => self.base * libm::pow(gamma, tick as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let c = LearningRate::constant(0.1).unwrap();
        assert_eq!(c.at(1), 0.1);
        assert_eq!(c.at(1000), 0.1);
        let inv = LearningRate::new(1.0, Schedule::InverseTime).unwrap();
        assert_eq!(inv.at(4), 0.25);
        let e = LearningRate::new(1.0, Schedule::Exponential { gamma: 0.5 }).unwrap();
        assert_eq!(e.at(3), 0.125);
        let p = inv.with_period(10).unwrap();
        assert_eq!((p.at(1), p.at(10), p.at(11)), (1.0, 1.0, 0.5));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LearningRate::new(0.0, Schedule::Constant).is_err());
        assert!(LearningRate::new(0.1, Schedule::Exponential { gamma: 1.5 }).is_err());
        assert!(LearningRate::new(0.1, Schedule::Exponential { gamma: 1.0 }).is_err());
        assert!(LearningRate::new(0.1, Schedule::Exponential { gamma: 0.8 }).is_ok());
        assert!(LearningRate::constant(0.1).unwrap().with_period(0).is_err());
    }
}
