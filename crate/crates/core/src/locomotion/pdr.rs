use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Vec2};

/// Dead-reckoned planar pose.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub position: Vec2,
    /// Radians in (−π, π].
    pub heading: f64,
    /// m/s.
    pub speed: f64,
}

impl PoseEstimate {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self { position, heading: normalize_angle(heading), speed: 0.0 }
    }
}

/// Step-and-heading update: turn by `yaw_delta` first, then advance one
/// stride per step event along the new heading.
pub fn pdr_update(
    pose: PoseEstimate,
    step_events: &[f64],
    yaw_delta: f64,
    steps_per_second: f64,
    stride_length: f64,
) -> Result<PoseEstimate> {
    if !pose.position.is_finite() || !pose.heading.is_finite() || !pose.speed.is_finite() {
        return Err(Error::NonFinite("pose"));
    }
    if !yaw_delta.is_finite() {
        return Err(Error::NonFinite("yaw_delta"));
    }
    if !steps_per_second.is_finite() || !stride_length.is_finite() {
        return Err(Error::NonFinite("cadence or stride"));
    }
    let heading = normalize_angle(pose.heading + yaw_delta);
    let mut position = pose.position;
    let stride = Vec2::from_polar(stride_length, heading);
    for _ in step_events {
        position += stride;
    }
    Ok(PoseEstimate { position, heading, speed: (steps_per_second * stride_length).max(0.0) })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    #[test]
    fn no_steps_no_turn_is_identity() {
        let p = PoseEstimate::new(Vec2::new(1.0, 2.0), 0.3);
        let q = pdr_update(p, &[], 0.0, 0.0, 0.4).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn one_stride_ahead() {
        let q = pdr_update(PoseEstimate::default(), &[0.5], 0.0, 2.0, 0.4).unwrap();
        assert_eq!(q.position, Vec2::new(0.4, 0.0));
        assert!((q.speed - 0.8).abs() < 1e-12);
    }

    #[test]
    fn turn_then_two_strides() {
        let q = pdr_update(PoseEstimate::default(), &[0.5, 1.0], FRAC_PI_2, 2.0, 0.4).unwrap();
        // scalar reference: rotate first, then two advances
        let (mut x, mut y) = (0.0f64, 0.0f64);
        let h = FRAC_PI_2;
        for _ in 0..2 {
            x += 0.4 * h.cos();
            y += 0.4 * h.sin();
        }
        assert!((q.position.x - x).abs() < 1e-12 && (q.position.y - y).abs() < 1e-12);
        assert!(q.position.x.abs() < 1e-9);
        assert!((q.position.y - 0.8).abs() < 1e-9);
        assert_eq!(q.heading, FRAC_PI_2);
    }

    #[test]
    fn heading_stays_normalized() {
        let q = pdr_update(PoseEstimate::new(Vec2::ZERO, 3.0), &[], 1.0, 0.0, 0.4).unwrap();
        assert!(q.heading > -std::f64::consts::PI && q.heading <= std::f64::consts::PI);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(pdr_update(PoseEstimate::default(), &[], f64::NAN, 0.0, 0.4).is_err());
        let bad = PoseEstimate { position: Vec2::new(f64::INFINITY, 0.0), ..Default::default() };
        assert!(pdr_update(bad, &[], 0.0, 0.0, 0.4).is_err());
    }
}
