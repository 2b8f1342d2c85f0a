//! Learning-rate, batch-size and compression-size schedules.
//!
//! The streaming solver's guarantees rest on three standing assumptions,
//! numbered here the way validation errors cite them:
//!
//! 1. the ground cost is Lipschitz on the sampled domain;
//! 2. the learning rates η_t sum to ∞ while their squares sum to a finite
//!    value, which pins the exponent b to (−1, −1/2);
//! 3. Σ η_t/√(b_t) is finite, which requires a − b > 1.
//!
//! Two further assumptions govern compression: the sup-norm compression
//! error decays like m^{−ζ} for the chosen method (4), and the compression
//! size grows as m_t = (t+1)^{(a−b)/ζ} (5).

use crate::error::{Error, Result};

/// Power-law schedule: η_t = (t+1)^b, b_t = ⌈(t+1)^{2a}⌉,
/// m_t = ⌈(t+1)^{(a−b)/ζ}⌉.
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    a: f64,
    b: f64,
    epsilon: f64,
    zeta: f64,
}

/// Check the exponent constraints shared by the schedule and the analysis
/// calculators, with errors naming the violated assumption.
pub fn validate_exponents(a: f64, b: f64) -> Result<()> {
    if !(b > -1.0 && b < -0.5) {
        return Err(Error::InvalidSchedule(format!(
            "Assumption 2 violated: learning-rate exponent b must lie in (-1, -1/2), got b = {b}"
        )));
    }
    if !(a - b > 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "Assumption 3 violated: a - b must exceed 1, got a - b = {}",
            a - b
        )));
    }
    Ok(())
}

impl Schedule {
    pub fn new(a: f64, b: f64, epsilon: f64, zeta: f64) -> Result<Self> {
        validate_exponents(a, b)?;
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be positive, got {epsilon}"),
            });
        }
        if !(zeta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "zeta",
                reason: format!("must be positive, got {zeta}"),
            });
        }
        Ok(Self {
            a,
            b,
            epsilon,
            zeta,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Learning rate at step t; strictly inside (0, 1) for t ≥ 1.
    pub fn eta(&self, t: u32) -> f64 {
        ((t + 1) as f64).powf(self.b)
    }

    /// Batch size at step t. `batch(0)` is the initialisation batch.
    pub fn batch(&self, t: u32) -> u64 {
        ((t + 1) as f64).powf(2.0 * self.a).ceil() as u64
    }

    /// Compression size at step t.
    pub fn compression_size(&self, t: u32) -> usize {
        ((t + 1) as f64).powf((self.a - self.b) / self.zeta).ceil() as usize
    }

    /// Samples consumed by steps 1..=t (excludes the initialisation batch).
    pub fn samples_through(&self, t: u32) -> u64 {
        (1..=t).map(|s| self.batch(s)).sum()
    }

    /// First iteration whose cumulative batch total exceeds n.
    pub fn t_of_samples(&self, n: u64) -> u32 {
        let mut acc = 0u64;
        let mut t = 0u32;
        loop {
            t += 1;
            acc += self.batch(t);
            if acc > n {
                return t;
            }
        }
    }

    /// Per-iteration cost model: kernel evaluations n_t·b_t and memory n_t,
    /// with n_t the samples consumed by steps 1..=t.
    pub fn per_iteration_cost(&self, t: u32) -> (u128, u64) {
        let n_t = self.samples_through(t);
        let b_t = self.batch(t);
        (n_t as u128 * b_t as u128, n_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_validation_messages() {
        let err = Schedule::new(1.2, -0.4, 0.3, 1.0).unwrap_err();
        assert!(err.to_string().contains("Assumption 2"));
        let err = Schedule::new(0.1, -0.8, 0.3, 1.0).unwrap_err();
        assert!(err.to_string().contains("Assumption 3"));
        assert!(Schedule::new(1.2, -0.6, 0.3, 1.0).is_ok());
        assert!(Schedule::new(1.2, -0.6, 0.0, 1.0).is_err());
        assert!(Schedule::new(1.2, -0.6, 0.3, 0.0).is_err());
    }

    #[test]
    fn eta_in_unit_interval_for_positive_steps() {
        let s = Schedule::new(1.5, -0.6, 1.0, 1.0).unwrap();
        for t in 1..200 {
            let eta = s.eta(t);
            assert!(eta > 0.0 && eta < 1.0, "t={t}: {eta}");
        }
        assert_eq!(s.eta(0), 1.0);
    }

    #[test]
    fn cost_example_a_1_5_t_10() {
        // n_10 = Σ_{i=2}^{11} i³ = 4355, b_10 = 11³ = 1331.
        let s = Schedule::new(1.5, -0.6, 1.0, 1.0).unwrap();
        let expected_n: u64 = (2..=11u64).map(|i| i * i * i).sum();
        assert_eq!(expected_n, 4355);
        assert_eq!(s.batch(10), 1331);
        let (flops, mem) = s.per_iteration_cost(10);
        assert_eq!(mem, 4355);
        assert_eq!(flops, 4355 * 1331);
    }

    #[test]
    fn cumulative_cost_doubling_ratio() {
        // Total work through step t scales like t^{4a+2}; the per-step
        // outputs summed over steps must show the 2^{4a+2} doubling ratio.
        let a = 1.5;
        let s = Schedule::new(a, -0.6, 1.0, 1.0).unwrap();
        let total = |tt: u32| -> f64 { (1..=tt).map(|s_| s.per_iteration_cost(s_).0 as f64).sum() };
        let target = 2.0f64.powf(4.0 * a + 2.0);
        let mut prev_gap = f64::INFINITY;
        for t in [100u32, 200, 400] {
            let ratio = total(2 * t) / total(t);
            let gap = (ratio / target - 1.0).abs();
            assert!(gap < 0.1, "t={t}: ratio {ratio} vs {target}");
            assert!(gap < prev_gap, "approach not monotone at t={t}");
            prev_gap = gap;
        }
    }

    #[test]
    fn memory_is_sample_count() {
        let s = Schedule::new(1.2, -0.6, 1.0, 1.0).unwrap();
        for t in [1u32, 5, 20] {
            assert_eq!(s.per_iteration_cost(t).1, s.samples_through(t));
        }
    }

    #[test]
    fn sample_inversion_consistent() {
        let s = Schedule::new(1.2, -0.6, 1.0, 1.0).unwrap();
        for n in [10u64, 100, 5_000] {
            let t = s.t_of_samples(n);
            assert!(s.samples_through(t) > n);
            assert!(s.samples_through(t - 1) <= n);
        }
    }

    #[test]
    fn compression_size_example() {
        let s = Schedule::new(1.5, -0.6, 1.0, 2.0).unwrap();
        // (t+1)^{(a-b)/zeta} = (t+1)^{1.05}
        assert_eq!(s.compression_size(9), (10f64.powf(1.05)).ceil() as usize);
    }
}
