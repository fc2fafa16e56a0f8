//! IMU sample types, the plain-text trace format, and deterministic gait synthesis.
//!
//! Trace files are line-delimited `t,ax,ay,az,gx,gy,gz` records. A header
//! line and `#` comments are accepted on input; the writer always emits the
//! header. Values are written in shortest round-trip decimal form, so a
//! written trace reloads bit-for-bit (at least 6 significant digits are
//! always preserved; usually all 17).

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constants::GRAVITY;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t,ax,ay,az,gx,gy,gz";

/// One timestamped accelerometer + gyroscope reading in the device frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    /// Seconds.
    pub t: f64,
    /// Gravity-inclusive specific force, m/s².
    pub accel: [f64; 3],
    /// Angular rate, rad/s.
    pub gyro: [f64; 3],
}

impl ImuSample {
    pub fn accel_magnitude(&self) -> f64 {
        let [x, y, z] = self.accel;
        (x * x + y * y + z * z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.accel.iter().all(|v| v.is_finite()) && self.gyro.iter().all(|v| v.is_finite())
    }
}

/// Parameters of a synthetic gait signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitProfile {
    pub step_frequency: f64,
    pub accel_amplitude: f64,
    pub heading_rate_noise: f64,
    pub noise_std: f64,
    pub sample_rate: f64,
}

impl Default for GaitProfile {
    fn default() -> Self {
        Self {
            step_frequency: 2.0,
            accel_amplitude: 3.0,
            heading_rate_noise: 0.0,
            noise_std: 0.0,
            sample_rate: crate::constants::DEFAULT_SAMPLE_RATE,
        }
    }
}

impl GaitProfile {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("step_frequency", self.step_frequency),
            ("accel_amplitude", self.accel_amplitude),
            ("heading_rate_noise", self.heading_rate_noise),
            ("noise_std", self.noise_std),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProfile(format!("{name} must be finite and non-negative")));
            }
        }
        if self.step_frequency <= 0.0 {
            return Err(Error::InvalidProfile("step_frequency must be positive".into()));
        }
        if self.sample_rate < 4.0 * self.step_frequency {
            return Err(Error::InvalidProfile(format!(
                "sample_rate {} Hz is below 4x step_frequency {} Hz",
                self.sample_rate, self.step_frequency
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SegmentKind {
    Walking(GaitProfile),
    Standing { noise_std: f64, sample_rate: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSegmentSpec {
    pub kind: SegmentKind,
    /// Seconds, > 0.
    pub duration: f64,
}

impl TraceSegmentSpec {
    pub fn walking(profile: GaitProfile, duration: f64) -> Self {
        Self { kind: SegmentKind::Walking(profile), duration }
    }

    pub fn standing(duration: f64, noise_std: f64, sample_rate: f64) -> Self {
        Self { kind: SegmentKind::Standing { noise_std, sample_rate }, duration }
    }

    fn sample_rate(&self) -> f64 {
        match self.kind {
            SegmentKind::Walking(p) => p.sample_rate,
            SegmentKind::Standing { sample_rate, .. } => sample_rate,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidProfile("segment duration must be positive".into()));
        }
        match self.kind {
            SegmentKind::Walking(p) => p.validate(),
            SegmentKind::Standing { noise_std, sample_rate } => {
                if !(noise_std.is_finite() && noise_std >= 0.0) {
                    return Err(Error::InvalidProfile("noise_std must be finite and non-negative".into()));
                }
                if !(sample_rate.is_finite() && sample_rate > 0.0) {
                    return Err(Error::InvalidProfile("sample_rate must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

/// Vertical specific force of the gait signature at gait phase `phase`
/// (in cycles). Phase 0 is the trough; one crest per cycle is one step.
pub fn gait_vertical(amplitude: f64, phase: f64) -> f64 {
    GRAVITY - amplitude * (TAU * phase.fract()).cos()
}

fn noise(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std > 0.0 {
        Normal::new(0.0, std).expect("std is finite and positive").sample(rng)
    } else {
        0.0
    }
}

/// Synthesizes a deterministic IMU trace from a list of segments.
///
/// Walking segments restart the gait phase at a trough, so a segment of
/// `n / f` seconds holds exactly `n` crests. Each segment contributes
/// `round(duration * sample_rate)` samples.
pub fn synthesize_trace(segments: &[TraceSegmentSpec], seed: u64) -> Result<Vec<ImuSample>> {
    if segments.is_empty() {
        return Err(Error::InvalidProfile("at least one segment is required".into()));
    }
    for s in segments {
        s.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut seg_start = 0.0;
    for seg in segments {
        let rate = seg.sample_rate();
        let n = (seg.duration * rate).round() as usize;
        for i in 0..n {
            let local = i as f64 / rate;
            let t = seg_start + local;
            let sample = match seg.kind {
                SegmentKind::Standing { noise_std, .. } => ImuSample {
                    t,
                    accel: [
                        noise(&mut rng, noise_std),
                        noise(&mut rng, noise_std),
                        GRAVITY + noise(&mut rng, noise_std),
                    ],
                    gyro: [0.0; 3],
                },
                SegmentKind::Walking(p) => {
                    let phase = p.step_frequency * local;
                    ImuSample {
                        t,
                        accel: [
                            noise(&mut rng, p.noise_std),
                            noise(&mut rng, p.noise_std),
                            gait_vertical(p.accel_amplitude, phase) + noise(&mut rng, p.noise_std),
                        ],
                        gyro: [0.0, 0.0, noise(&mut rng, p.heading_rate_noise)],
                    }
                }
            };
            out.push(sample);
        }
        seg_start += n as f64 / rate;
    }
    Ok(out)
}

/// Parses a trace in the `t,ax,ay,az,gx,gy,gz` format.
pub fn load_trace<R: BufRead>(source: R) -> Result<Vec<ImuSample>> {
    let mut out: Vec<ImuSample> = Vec::new();
    let mut seen_content = false;
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_content {
            seen_content = true;
            if fields.first().is_some_and(|f| f.eq_ignore_ascii_case("t")) {
                continue;
            }
        }
        if fields.len() != 7 {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 7];
        for (slot, f) in vals.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| Error::MalformedLine {
                line: line_no,
                reason: format!("cannot parse {f:?} as a number"),
            })?;
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { line: line_no });
        }
        if vals[0] < 0.0 {
            return Err(Error::MalformedLine { line: line_no, reason: "negative timestamp".into() });
        }
        if out.last().is_some_and(|prev| vals[0] <= prev.t) {
            return Err(Error::NonMonotoneTimestamp { line: line_no });
        }
        out.push(ImuSample { t: vals[0], accel: [vals[1], vals[2], vals[3]], gyro: [vals[4], vals[5], vals[6]] });
    }
    Ok(out)
}

/// Writes samples in the trace format, header first.
pub fn write_trace<W: Write>(samples: &[ImuSample], mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{TRACE_HEADER}")?;
    for s in samples {
        writeln!(
            sink,
            "{},{},{},{},{},{},{}",
            s.t, s.accel[0], s.accel[1], s.accel[2], s.gyro[0], s.gyro[1], s.gyro[2]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<ImuSample>> {
        load_trace(text.as_bytes())
    }

    #[test]
    fn loads_two_lines() {
        let s = parse("0.00,0,0,9.81,0,0,0\n0.01,0,0,9.81,0,0,0\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].t, 0.0);
        assert_eq!(s[1].t, 0.01);
        assert_eq!(s[1].accel, [0.0, 0.0, 9.81]);
    }

    #[test]
    fn empty_input_is_empty_trace() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let s = parse("# recorded\nt,ax,ay,az,gx,gy,gz\n0.5,1,2,3,4,5,6\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].gyro, [4.0, 5.0, 6.0]);
    }

    #[test]
    fn non_monotone_reports_line() {
        let err = parse("0.02,0,0,9.81,0,0,0\n0.01,0,0,9.81,0,0,0\n").unwrap_err();
        assert_eq!(err.to_string(), "non-monotone timestamp at line 2");
    }

    #[test]
    fn malformed_and_non_finite_lines() {
        let err = parse("0.0,0,0,9.81,0,0\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 1, .. }));
        let err = parse("0.0,0,0,9.81,0,0,0\n0.1,x,0,9.81,0,0,0\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));
        let err = parse("0.0,0,0,NaN,0,0,0\n").unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { line: 1 }));
        let err = parse("0.0,0,0,inf,0,0,0\n").unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { line: 1 }));
    }

    #[test]
    fn standing_zero_noise_is_exact() {
        let s = synthesize_trace(&[TraceSegmentSpec::standing(2.0, 0.0, 100.0)], 1).unwrap();
        assert_eq!(s.len(), 200);
        for x in &s {
            assert_eq!(x.accel, [0.0, 0.0, GRAVITY]);
            assert_eq!(x.gyro, [0.0; 3]);
        }
    }

    #[test]
    fn walking_extrema_on_grid() {
        // Oracle: the closed form g - A cos(2π f t) on t = i/100 hits ±A at
        // t = k/4 s for f = 2 Hz; in [0, 1) that is t = 0.25, 0.75 (max)
        // and t = 0.0, 0.5 (min).
        let profile = GaitProfile { step_frequency: 2.0, accel_amplitude: 3.0, ..Default::default() };
        let s = synthesize_trace(&[TraceSegmentSpec::walking(profile, 1.0)], 0).unwrap();
        assert_eq!(s.len(), 100);
        let vert: Vec<f64> = s.iter().map(|x| x.accel[2]).collect();
        let max = vert.iter().cloned().fold(f64::MIN, f64::max);
        let min = vert.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 12.81).abs() < 1e-12);
        assert!((min - 6.81).abs() < 1e-12);
        let at_max: Vec<usize> = (0..100).filter(|&i| (vert[i] - 12.81).abs() < 1e-12).collect();
        let at_min: Vec<usize> = (0..100).filter(|&i| (vert[i] - 6.81).abs() < 1e-12).collect();
        assert_eq!(at_max, vec![25, 75]);
        assert_eq!(at_min, vec![0, 50]);
    }

    #[test]
    fn same_seed_same_bits() {
        let profile = GaitProfile { noise_std: 0.3, heading_rate_noise: 0.05, ..Default::default() };
        let segs = [TraceSegmentSpec::walking(profile, 2.0), TraceSegmentSpec::standing(1.0, 0.1, 100.0)];
        let a = synthesize_trace(&segs, 42).unwrap();
        let b = synthesize_trace(&segs, 42).unwrap();
        assert_eq!(a, b);
        let c = synthesize_trace(&segs, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn timestamps_continue_across_segments() {
        let segs =
            [TraceSegmentSpec::standing(0.5, 0.0, 100.0), TraceSegmentSpec::walking(GaitProfile::default(), 0.5)];
        let s = synthesize_trace(&segs, 0).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.windows(2).all(|w| w[1].t > w[0].t));
        assert!((s[50].t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        let bad = GaitProfile { sample_rate: 7.0, ..Default::default() };
        assert!(synthesize_trace(&[TraceSegmentSpec::walking(bad, 1.0)], 0).is_err());
        let bad = GaitProfile { step_frequency: 0.0, ..Default::default() };
        assert!(synthesize_trace(&[TraceSegmentSpec::walking(bad, 1.0)], 0).is_err());
        assert!(synthesize_trace(&[], 0).is_err());
        assert!(synthesize_trace(&[TraceSegmentSpec::standing(0.0, 0.0, 100.0)], 0).is_err());
    }

    #[test]
    fn zero_noise_standing_variance_is_zero() {
        let s = synthesize_trace(&[TraceSegmentSpec::standing(1.0, 0.0, 100.0)], 3).unwrap();
        let v = crate::locomotion::magnitude_variance(&s);
        assert_eq!(v, 0.0);
    }
}
