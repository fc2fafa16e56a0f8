use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::GRAVITY;
use crate::geom::{normalize_angle, Vec2};
use crate::telemetry::{gait_vertical, ImuSample};

use super::behavior::AgentGroundTruth;

/// Turns ground-truth motion into the IMU samples the controller sees.
///
/// Moving agents carry the gait bounce at `speed / stride` steps per
/// second, restarting at a trough whenever motion starts. The horizontal
/// channels carry the true linear acceleration in the yaw-aligned device
/// frame, and gyro z the true yaw rate.
#[derive(Clone, Debug)]
pub struct ImuSynthesizer {
    amplitude: f64,
    accel_noise: f64,
    gyro_noise: f64,
    stride: f64,
    phase: f64,
    prev_velocity: Vec2,
    prev_heading: f64,
}

impl ImuSynthesizer {
    pub fn new(initial: &AgentGroundTruth, amplitude: f64, accel_noise: f64, gyro_noise: f64, stride: f64) -> Self {
        Self {
            amplitude,
            accel_noise,
            gyro_noise,
            stride,
            phase: 0.0,
            prev_velocity: initial.velocity,
            prev_heading: initial.heading,
        }
    }

    fn noise<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
        if std > 0.0 {
            Normal::new(0.0, std).expect("finite std").sample(rng)
        } else {
            0.0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, agent: &AgentGroundTruth, t: f64, dt: f64, rng: &mut R) -> ImuSample {
        let speed = agent.speed();
        let vertical = if speed > 0.0 {
            if self.prev_velocity.norm() == 0.0 {
                self.phase = 0.0;
            }
            let v = gait_vertical(self.amplitude, self.phase);
            self.phase = (self.phase + speed / self.stride * dt).fract();
            v
        } else {
            GRAVITY
        };
        let lin = (agent.velocity - self.prev_velocity) * (1.0 / dt);
        let (s, c) = agent.heading.sin_cos();
        let forward = lin.x * c + lin.y * s;
        let lateral = -lin.x * s + lin.y * c;
        let yaw_rate = normalize_angle(agent.heading - self.prev_heading) / dt;
        self.prev_velocity = agent.velocity;
        self.prev_heading = agent.heading;
        ImuSample {
            t,
            accel: [
                forward + Self::noise(rng, self.accel_noise),
                lateral + Self::noise(rng, self.accel_noise),
                vertical + Self::noise(rng, self.accel_noise),
            ],
            gyro: [
                Self::noise(rng, self.gyro_noise),
                Self::noise(rng, self.gyro_noise),
                yaw_rate + Self::noise(rng, self.gyro_noise),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sim::behavior::BehaviorMode;

    #[test]
    fn paused_zero_noise_is_gravity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = AgentGroundTruth::at_rest(Vec2::new(1.0, 1.0), 0.0, 0.8);
        a.mode = BehaviorMode::Pause;
        let mut syn = ImuSynthesizer::new(&a, 3.0, 0.0, 0.0, 0.4);
        let s = syn.sample(&a, 0.01, 0.01, &mut rng);
        assert_eq!(s.accel, [0.0, 0.0, GRAVITY]);
        assert_eq!(s.gyro, [0.0; 3]);
    }

    #[test]
    fn walking_step_frequency_from_peak_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rest = AgentGroundTruth::at_rest(Vec2::ZERO, 0.0, 0.8);
        let mut syn = ImuSynthesizer::new(&rest, 3.0, 0.0, 0.0, 0.4);
        let mut walking = rest;
        walking.velocity = Vec2::new(0.8, 0.0);
        let n = 400;
        let mags: Vec<f64> =
            (0..n).map(|i| syn.sample(&walking, i as f64 * 0.01, 0.01, &mut rng).accel_magnitude()).collect();
        // skip the onset impulse in the first sample
        let peaks =
            (2..n - 1).filter(|&i| mags[i] > mags[i - 1] && mags[i] >= mags[i + 1] && mags[i] > GRAVITY + 1.0).count();
        let freq = peaks as f64 / 4.0;
        assert!((freq - 2.0).abs() <= 0.1, "{freq}");
    }

    #[test]
    fn integrated_yaw_matches_heading_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = AgentGroundTruth::at_rest(Vec2::ZERO, 0.0, 0.8);
        let mut syn = ImuSynthesizer::new(&a, 3.0, 0.0, 0.0, 0.4);
        let dt = 0.01;
        let mut rates = vec![0.0];
        for i in 1..=100 {
            a.heading = normalize_angle(FRAC_PI_2 * i as f64 / 100.0);
            rates.push(syn.sample(&a, i as f64 * dt, dt, &mut rng).gyro[2]);
        }
        rates.push(syn.sample(&a, 1.01, dt, &mut rng).gyro[2]);
        let trapezoid: f64 = rates.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
        assert!((trapezoid - FRAC_PI_2).abs() < 1e-6, "{trapezoid}");
    }

    #[test]
    fn motion_onset_shows_in_accel() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rest = AgentGroundTruth::at_rest(Vec2::ZERO, 0.0, 0.8);
        let mut syn = ImuSynthesizer::new(&rest, 3.0, 0.0, 0.0, 0.4);
        let mut moving = rest;
        moving.velocity = Vec2::new(0.8, 0.0);
        let s = syn.sample(&moving, 0.01, 0.01, &mut rng);
        assert!((s.accel[0] - 80.0).abs() < 1e-9);
        assert!((s.accel[2] - (GRAVITY - 3.0)).abs() < 1e-12);
    }
}
