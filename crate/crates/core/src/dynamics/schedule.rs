//! Drive-phase control schedules `phi(t)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Direction;

/// Phase-velocity profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ramp {
    /// Cosine half-period rise to a plateau rate, flat section, cosine fall.
    /// Requires `2 * ramp_half_period + flat_duration = T`.
    CosineFlat {
        ramp_half_period: f64,
        flat_duration: f64,
    },
    /// `phi_dot ∝ (1 - cos(2 pi t / period)) / 2` with `period = T`.
    FullCosine {
        period: f64,
    },
    ConstantRate,
}

/// Shape family that can be instantiated for any duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RampShape {
    /// Cosine ramps occupying `ramp_fraction` of `T` at each end.
    CosineFlat {
        ramp_fraction: f64,
    },
    FullCosine,
    ConstantRate,
}

impl Default for RampShape {
    /// Quarter-duration cosine ramps: 0.75 us ramps and a 1.5 us plateau at T = 3 us.
    fn default() -> Self {
        RampShape::CosineFlat {
            ramp_fraction: 0.25,
        }
    }
}

impl RampShape {
    pub fn instantiate(self, duration: f64) -> Ramp {
        match self {
            RampShape::CosineFlat { ramp_fraction } => Ramp::CosineFlat {
                ramp_half_period: ramp_fraction * duration,
                flat_duration: (1.0 - 2.0 * ramp_fraction) * duration,
            },
            RampShape::FullCosine => Ramp::FullCosine { period: duration },
            RampShape::ConstantRate => Ramp::ConstantRate,
        }
    }
}

/// A time-parametrized loop `phi: 0 -> 2 pi f eta` over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSchedule {
    pub direction: Direction,
    pub duration: f64,
    pub winding_fraction: f64,
    pub ramp: Ramp,
}

impl LoopSchedule {
    pub fn new(
        direction: Direction,
        duration: f64,
        winding_fraction: f64,
        ramp: Ramp,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "loop duration must be > 0, got {duration}"
            )));
        }
        if !(winding_fraction > 0.0 && winding_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "winding fraction must lie in (0, 1], got {winding_fraction}"
            )));
        }
        let slack = 1e-9 * duration;
        match ramp {
            Ramp::CosineFlat {
                ramp_half_period,
                flat_duration,
            } => {
                if !(ramp_half_period > 0.0 && flat_duration >= 0.0) {
                    return Err(Error::InvalidArgument(
                        "cosine ramp needs a positive half period and non-negative plateau".into(),
                    ));
                }
                if (2.0 * ramp_half_period + flat_duration - duration).abs() > slack {
                    return Err(Error::InvalidArgument(format!(
                        "2*{ramp_half_period} + {flat_duration} does not match T = {duration}"
                    )));
                }
            }
            Ramp::FullCosine { period } => {
                if (period - duration).abs() > slack {
                    return Err(Error::InvalidArgument(format!(
                        "full cosine period {period} does not match T = {duration}"
                    )));
                }
            }
            Ramp::ConstantRate => {}
        }
        Ok(LoopSchedule {
            direction,
            duration,
            winding_fraction,
            ramp,
        })
    }

    /// Full loop with a shape family instantiated at `duration`.
    pub fn with_shape(
        direction: Direction,
        duration: f64,
        winding_fraction: f64,
        shape: RampShape,
    ) -> Result<Self> {
        Self::new(
            direction,
            duration,
            winding_fraction,
            shape.instantiate(duration),
        )
    }

    /// Total swept angle `2 pi f eta`.
    pub fn total_angle(&self) -> f64 {
        2.0 * PI * self.winding_fraction * self.direction.eta()
    }

    /// Same profile in the opposite direction.
    pub fn reversed(&self) -> Self {
        LoopSchedule {
            direction: self.direction.reversed(),
            ..*self
        }
    }

    /// Drive phase and its rate at time `t`.
    pub fn phi_of_t(&self, t: f64) -> Result<(f64, f64)> {
        let big_t = self.duration;
        let slack = 1e-12 * big_t;
        if !(t >= -slack && t <= big_t + slack) {
            return Err(Error::TimeOutOfRange { t, duration: big_t });
        }
        let t = t.clamp(0.0, big_t);
        let total = self.total_angle();
        let (phi, rate) = match self.ramp {
            Ramp::ConstantRate => (total * t / big_t, total / big_t),
            Ramp::FullCosine { .. } => {
                let w = 2.0 * PI / big_t;
                let peak = 2.0 * total / big_t;
                (
                    peak * (t / 2.0 - (w * t).sin() / (2.0 * w)),
                    peak * (1.0 - (w * t).cos()) / 2.0,
                )
            }
            Ramp::CosineFlat {
                ramp_half_period: tau,
                flat_duration: flat,
            } => {
                let plateau = total / (tau + flat);
                let k = PI / tau;
                // Integral of the rising ramp up to s.
                let rise = |s: f64| plateau * (s / 2.0 - (k * s).sin() / (2.0 * k));
                if t <= tau {
                    (rise(t), plateau * (1.0 - (k * t).cos()) / 2.0)
                } else if t <= tau + flat {
                    (rise(tau) + plateau * (t - tau), plateau)
                } else {
                    // Mirror image of the rise about T.
                    let s = big_t - t;
                    (total - rise(s), plateau * (1.0 - (k * s).cos()) / 2.0)
                }
            }
        };
        Ok((phi, rate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{quadrature, Complex};

    fn t3() -> LoopSchedule {
        LoopSchedule::new(
            Direction::Plus,
            3.0,
            1.0,
            Ramp::CosineFlat {
                ramp_half_period: 0.75,
                flat_duration: 1.5,
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_rate_midpoint() {
        let s = LoopSchedule::new(Direction::Plus, 2.0, 1.0, Ramp::ConstantRate).unwrap();
        let (phi, rate) = s.phi_of_t(1.0).unwrap();
        assert!((phi - PI).abs() < 1e-15);
        assert!((rate - PI).abs() < 1e-15);
    }

    #[test]
    fn cosine_flat_reference_profile() {
        let s = t3();
        let (phi0, rate0) = s.phi_of_t(0.0).unwrap();
        assert_eq!((phi0, rate0), (0.0, 0.0));
        let plateau = 2.0 * PI / 2.25;
        assert!((s.phi_of_t(1.5).unwrap().1 - plateau).abs() < 1e-14);
        let (phi_t, rate_t) = s.phi_of_t(3.0).unwrap();
        assert!((phi_t - 2.0 * PI).abs() < 1e-13);
        assert!(rate_t.abs() < 1e-15);
    }

    #[test]
    fn full_cosine_peaks_at_half_period() {
        let s =
            LoopSchedule::new(Direction::Plus, 1.8, 1.0, Ramp::FullCosine { period: 1.8 }).unwrap();
        assert!(s.phi_of_t(0.0).unwrap().1.abs() < 1e-15);
        assert!(s.phi_of_t(1.8).unwrap().1.abs() < 1e-14);
        let peak = s.phi_of_t(0.9).unwrap().1;
        for i in 0..=100 {
            assert!(s.phi_of_t(1.8 * i as f64 / 100.0).unwrap().1 <= peak + 1e-14);
        }
    }

    #[test]
    fn rate_integrates_to_total_angle() {
        let ramps = [
            t3().ramp,
            Ramp::FullCosine { period: 3.0 },
            Ramp::ConstantRate,
        ];
        for ramp in ramps {
            for (dir, f) in [
                (Direction::Plus, 1.0),
                (Direction::Minus, 0.5),
                (Direction::Plus, 0.25),
            ] {
                let s = LoopSchedule::new(dir, 3.0, f, ramp).unwrap();
                // Piecewise Simpson so the plateau junctions fall on panel edges.
                let edges = [0.0, 0.75, 2.25, 3.0];
                let mut total = 0.0;
                for w in edges.windows(2) {
                    total += quadrature(
                        |t| Complex::new(s.phi_of_t(t).unwrap().1, 0.0),
                        w[0],
                        w[1],
                        400,
                    )
                    .unwrap()
                    .re;
                }
                assert!((total - s.total_angle()).abs() < 1e-10, "{ramp:?} {total}");
                let (phi_end, _) = s.phi_of_t(3.0).unwrap();
                assert!((phi_end - s.total_angle()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_is_monotone_in_loop_direction() {
        for dir in [Direction::Plus, Direction::Minus] {
            let s = LoopSchedule::new(dir, 3.0, 1.0, t3().ramp).unwrap();
            let mut prev = 0.0;
            for i in 1..=300 {
                let (phi, _) = s.phi_of_t(3.0 * i as f64 / 300.0).unwrap();
                assert!((phi - prev) * dir.eta() >= -1e-15);
                prev = phi;
            }
        }
    }

    #[test]
    fn phase_is_continuous_at_junctions() {
        let s = t3();
        for tj in [0.75, 2.25] {
            let (a, ra) = s.phi_of_t(tj - 1e-9).unwrap();
            let (b, rb) = s.phi_of_t(tj + 1e-9).unwrap();
            assert!((a - b).abs() < 1e-8);
            assert!((ra - rb).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_inconsistent_profiles() {
        assert!(
            LoopSchedule::new(Direction::Plus, 3.0, 1.0, Ramp::FullCosine { period: 2.0 }).is_err()
        );
        assert!(LoopSchedule::new(
            Direction::Plus,
            3.0,
            1.0,
            Ramp::CosineFlat {
                ramp_half_period: 1.0,
                flat_duration: 0.5
            }
        )
        .is_err());
        assert!(LoopSchedule::new(Direction::Plus, 3.0, 0.0, Ramp::ConstantRate).is_err());
        assert!(LoopSchedule::new(Direction::Plus, -1.0, 1.0, Ramp::ConstantRate).is_err());
        assert!(matches!(
            t3().phi_of_t(3.5),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(t3().phi_of_t(-0.1).is_err());
    }

    #[test]
    fn shape_family_reproduces_reference_ramp() {
        let s = LoopSchedule::with_shape(Direction::Plus, 3.0, 1.0, RampShape::default()).unwrap();
        assert_eq!(s.ramp, t3().ramp);
    }
}
