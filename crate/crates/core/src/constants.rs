//! Shared physical constants and non-normative defaults.

/// Standard gravity used by every synthesized and checked signal, m/s².
pub const GRAVITY: f64 = 9.81;

/// Default IMU sample rate, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 100.0;

/// Speed above which ground truth counts as moving for the exclusion check, m/s.
pub const DEFAULT_V_EPS: f64 = 0.05;
