//! Waiting timers for broadcast forwarding.
//!
//! Nodes in a forwarding point (FP1 core, FP2 ring of a junction) wait a base
//! delay plus a fixed increment for every 100 m section between them and the
//! far threshold; the closer to the previous hop, the longer the wait. Nodes
//! on a plain street ("edge") wait inversely to their distance inside a band
//! that stays above the FP timers. Every Data timer is shorter than every
//! Interest timer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::road::FpClass;
use crate::time::SimDuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketClass {
    Interest,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassTimers {
    pub fp1_base_ms: f64,
    pub fp2_base_ms: f64,
    pub per_section_ms: f64,
    /// Edge timer at or beyond the far threshold.
    pub edge_min_ms: f64,
    /// Edge timer right next to the previous hop.
    pub edge_max_ms: f64,
    pub jitter_max_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimerParams {
    pub data: ClassTimers,
    pub interest: ClassTimers,
    pub far_threshold_m: f64,
    pub section_m: f64,
    pub hop_budget_ms: f64,
}

impl Default for TimerParams {
    fn default() -> Self {
        TimerParams {
            data: ClassTimers {
                fp1_base_ms: 1.0,
                fp2_base_ms: 2.0,
                per_section_ms: 4.0,
                edge_min_ms: 16.0,
                edge_max_ms: 23.5,
                jitter_max_ms: 0.5,
            },
            interest: ClassTimers {
                fp1_base_ms: 26.0,
                fp2_base_ms: 28.0,
                per_section_ms: 1.5,
                edge_min_ms: 34.0,
                edge_max_ms: 49.0,
                jitter_max_ms: 1.0,
            },
            far_threshold_m: 500.0,
            section_m: 100.0,
            hop_budget_ms: 50.0,
        }
    }
}

impl TimerParams {
    pub fn class(&self, class: PacketClass) -> &ClassTimers {
        match class {
            PacketClass::Interest => &self.interest,
            PacketClass::Data => &self.data,
        }
    }

    /// Sections between `dist` and the far threshold.
    pub fn sections(&self, dist: f64) -> u32 {
        ((self.far_threshold_m - dist.max(0.0)) / self.section_m)
            .ceil()
            .max(0.0) as u32
    }

    pub fn max_sections(&self) -> u32 {
        self.sections(0.0)
    }

    /// Timer without jitter, in milliseconds.
    pub fn deterministic_ms(&self, class: PacketClass, fp: FpClass, dist: f64) -> f64 {
        let c = self.class(class);
        match fp {
            FpClass::Fp1 => c.fp1_base_ms + c.per_section_ms * self.sections(dist) as f64,
            FpClass::Fp2 => c.fp2_base_ms + c.per_section_ms * self.sections(dist) as f64,
            FpClass::Edge => {
                let frac = dist.clamp(0.0, self.far_threshold_m) / self.far_threshold_m;
                c.edge_max_ms - (c.edge_max_ms - c.edge_min_ms) * frac
            }
        }
    }

    pub fn waiting_timer<R: Rng + ?Sized>(
        &self,
        class: PacketClass,
        fp: FpClass,
        dist: f64,
        rng: &mut R,
    ) -> SimDuration {
        let jitter = self.class(class).jitter_max_ms * rng.random::<f64>();
        SimDuration::from_millis_f64(self.deterministic_ms(class, fp, dist) + jitter)
    }

    /// Largest possible draw for a class.
    pub fn max_ms(&self, class: PacketClass) -> f64 {
        let c = self.class(class);
        let fp = c.fp1_base_ms.max(c.fp2_base_ms) + c.per_section_ms * self.max_sections() as f64;
        fp.max(c.edge_max_ms).max(c.edge_min_ms) + c.jitter_max_ms
    }

    /// Smallest possible draw for a class.
    pub fn min_ms(&self, class: PacketClass) -> f64 {
        let c = self.class(class);
        c.fp1_base_ms.min(c.fp2_base_ms).min(c.edge_min_ms)
    }

    /// Implicit-ACK timeout: one hop budget plus the slowest Data answer.
    pub fn ack_timeout(&self) -> SimDuration {
        SimDuration::from_millis_f64(self.hop_budget_ms + self.max_ms(PacketClass::Data))
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [&self.data, &self.interest];
        if all.iter().any(|c| {
            [
                c.fp1_base_ms,
                c.fp2_base_ms,
                c.per_section_ms,
                c.edge_min_ms,
                c.edge_max_ms,
                c.jitter_max_ms,
            ]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        }) {
            return Err("timer values must be finite and non-negative".into());
        }
        if !(self.far_threshold_m > 0.0 && self.section_m > 0.0 && self.hop_budget_ms > 0.0) {
            return Err("timer distances and hop budget must be positive".into());
        }
        if self.max_ms(PacketClass::Data) >= self.min_ms(PacketClass::Interest) {
            return Err(format!(
                "longest Data timer {} ms must be below shortest Interest timer {} ms",
                self.max_ms(PacketClass::Data),
                self.min_ms(PacketClass::Interest)
            ));
        }
        if self.max_ms(PacketClass::Interest) > self.hop_budget_ms {
            return Err(format!(
                "Interest timers reach {} ms, above the {} ms hop budget",
                self.max_ms(PacketClass::Interest),
                self.hop_budget_ms
            ));
        }
        for class in [PacketClass::Data, PacketClass::Interest] {
            let c = self.class(class);
            if c.fp1_base_ms > c.fp2_base_ms || c.edge_min_ms > c.edge_max_ms {
                return Err(format!(
                    "{class:?} timers: need fp1 <= fp2 and edge_min <= edge_max"
                ));
            }
            // edge must stay above FP2 at every distance; the FP timer is a
            // step function so checking each metre up to the threshold is exact
            // at section boundaries
            let mut d = 0.0;
            while d <= self.far_threshold_m + self.section_m {
                if self.deterministic_ms(class, FpClass::Edge, d)
                    < self.deterministic_ms(class, FpClass::Fp2, d)
                {
                    return Err(format!("{class:?} edge timer drops below FP2 at {d} m"));
                }
                d += 1.0;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn defaults_are_valid() {
        let p = TimerParams::default();
        p.validate().unwrap();
        assert_eq!(p.max_ms(PacketClass::Data), 24.0);
        assert_eq!(p.min_ms(PacketClass::Interest), 26.0);
        assert_eq!(p.max_ms(PacketClass::Interest), 50.0);
        assert_eq!(p.ack_timeout(), SimDuration::from_millis(74));
    }

    #[test]
    fn far_node_gets_minimum() {
        let p = TimerParams::default();
        assert_eq!(
            p.deterministic_ms(PacketClass::Data, FpClass::Fp1, 600.0),
            1.0
        );
        assert_eq!(
            p.deterministic_ms(PacketClass::Data, FpClass::Fp1, 500.0),
            1.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = p
            .waiting_timer(PacketClass::Data, FpClass::Fp1, 600.0, &mut rng)
            .as_millis_f64();
        assert!((1.0..=1.5).contains(&t));
    }

    #[test]
    fn one_section_adds_increment() {
        let p = TimerParams::default();
        let a = p.deterministic_ms(PacketClass::Interest, FpClass::Fp1, 450.0);
        let b = p.deterministic_ms(PacketClass::Interest, FpClass::Fp1, 350.0);
        assert_eq!(b - a, 1.5);
        let a = p.deterministic_ms(PacketClass::Data, FpClass::Fp2, 250.0);
        let b = p.deterministic_ms(PacketClass::Data, FpClass::Fp2, 150.0);
        assert_eq!(b - a, 4.0);
    }

    #[test]
    fn fp_priority_and_monotonicity() {
        let p = TimerParams::default();
        for class in [PacketClass::Data, PacketClass::Interest] {
            let mut last = f64::INFINITY;
            for d in 0..=700 {
                let d = d as f64;
                let f1 = p.deterministic_ms(class, FpClass::Fp1, d);
                let f2 = p.deterministic_ms(class, FpClass::Fp2, d);
                let e = p.deterministic_ms(class, FpClass::Edge, d);
                assert!(f1 <= f2 && f2 <= e, "{class:?} at {d}: {f1} {f2} {e}");
                assert!(f1 <= last);
                last = f1;
            }
        }
    }

    #[test]
    fn broken_separation_is_rejected() {
        let mut p = TimerParams::default();
        p.interest.fp1_base_ms = 20.0;
        assert!(p.validate().is_err());
        let mut p = TimerParams::default();
        p.interest.edge_max_ms = 60.0;
        assert!(p.validate().is_err());
        let mut p = TimerParams::default();
        p.data.edge_max_ms = 10.0;
        p.data.edge_min_ms = 5.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn draws_depend_only_on_inputs_and_seed() {
        let p = TimerParams::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|i| {
                    p.waiting_timer(
                        PacketClass::Interest,
                        FpClass::Edge,
                        i as f64 * 10.0,
                        &mut rng,
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn class() -> impl Strategy<Value = PacketClass> {
            prop_oneof![Just(PacketClass::Data), Just(PacketClass::Interest)]
        }

        fn fp() -> impl Strategy<Value = FpClass> {
            prop_oneof![Just(FpClass::Fp1), Just(FpClass::Fp2), Just(FpClass::Edge)]
        }

        proptest! {
            #[test]
            fn timer_is_non_increasing_in_distance(class in class(), fp in fp(), a in 0.0..2_000.0f64, b in 0.0..2_000.0f64) {
                let p = TimerParams::default();
                let (near, far) = (a.min(b), a.max(b));
                prop_assert!(p.deterministic_ms(class, fp, far) <= p.deterministic_ms(class, fp, near));
            }

            #[test]
            fn draws_stay_in_class_window(class in class(), fp in fp(), dist in 0.0..2_000.0f64, seed in any::<u64>()) {
                let p = TimerParams::default();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ms = p.waiting_timer(class, fp, dist, &mut rng).as_millis_f64();
                prop_assert!(ms >= p.min_ms(class) && ms <= p.max_ms(class));
                prop_assert!(ms <= 50.0);
                prop_assert!(p.max_ms(PacketClass::Data) < p.min_ms(PacketClass::Interest));
            }
        }
    }
}
