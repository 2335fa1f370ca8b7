use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::biomarkers::Melody;
use crate::dsp::FrameParams;

/// A time span relative to the start of its unit, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start_s: f64,
    pub end_s: f64,
}

impl Span {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Sustained high pitch: the plateau covers `span`, with approach and
/// release ramps outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperphonation {
    pub span: Span,
    pub plateau_hz: f64,
}

/// A fast excursion of `delta_hz`: linear rise, short hold, linear fall,
/// lasting `span` in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Glide {
    pub span: Span,
    pub delta_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vibrato {
    pub rate_hz: f64,
    pub depth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSpec {
    pub duration_s: f64,
    pub pause_after_s: f64,
    pub base_f0_hz: f64,
    pub amplitude: f64,
    pub melody: Melody,
    /// Position of the turning point for the two-segment melodies, as a
    /// fraction of the unit.
    #[serde(default = "default_turn")]
    pub melody_turn: f64,
    #[serde(default)]
    pub hyperphonation: Option<Hyperphonation>,
    #[serde(default)]
    pub dysphonation: Option<Span>,
    #[serde(default)]
    pub glide: Option<Glide>,
    #[serde(default)]
    pub vibrato: Option<Vibrato>,
}

fn default_turn() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub sample_rate: u32,
    pub noise_floor_db: f64,
    pub lead_silence_s: f64,
    pub units: Vec<UnitSpec>,
    #[serde(default)]
    pub frames: FrameParams,
}

/// Ramp length on each side of a hyperphonation plateau outside its span.
pub const HYPER_APPROACH_S: f64 = 0.2;
/// Level the approach ramp reaches before the jump onto the plateau.
pub const HYPER_APPROACH_HZ: f64 = 980.0;
/// Duration of the jump onto and off the plateau, inside the span.
pub const HYPER_JUMP_S: f64 = 0.02;

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |unit: usize, reason: &str| {
            Err(SynthError::InvalidSpec {
                unit,
                reason: reason.to_string(),
            })
        };
        if self.sample_rate == 0 {
            return bad(0, "sample rate must be positive");
        }
        if !(self.lead_silence_s >= 0.0) {
            return bad(0, "lead silence must be non-negative");
        }
        for (i, u) in self.units.iter().enumerate() {
            if !(u.duration_s > 0.0) || !(u.pause_after_s > 0.0) {
                return bad(i, "durations must be positive");
            }
            if !(u.base_f0_hz > 0.0) {
                return bad(i, "base F0 must be positive");
            }
            if !(u.amplitude > 0.0 && u.amplitude <= 1.0) {
                return bad(i, "amplitude must be in (0, 1]");
            }
            if !(u.melody_turn > 0.0 && u.melody_turn < 1.0) {
                return bad(i, "melody turn must be inside the unit");
            }
            let inside = |s: &Span| s.start_s >= 0.0 && s.start_s < s.end_s && s.end_s <= u.duration_s;
            if let Some(h) = &u.hyperphonation {
                if !inside(&h.span) || h.span.start_s < HYPER_APPROACH_S
                    || h.span.end_s + HYPER_APPROACH_S > u.duration_s
                    || h.span.duration() <= 2.0 * HYPER_JUMP_S
                {
                    return bad(i, "hyperphonation span must leave room for its ramps");
                }
            }
            if let Some(d) = &u.dysphonation {
                if !inside(d) {
                    return bad(i, "dysphonation span outside the unit");
                }
            }
            if let Some(g) = &u.glide {
                if !inside(&g.span) {
                    return bad(i, "glide span outside the unit");
                }
            }
            if let Some(v) = &u.vibrato {
                if !(v.depth_hz > 0.0 && v.depth_hz < u.base_f0_hz && v.rate_hz > 0.0) {
                    return bad(i, "vibrato depth must be below the base F0");
                }
            }
        }
        Ok(())
    }
}

/// Multiplier on the base F0 at relative position `x` in `[0, 1]`.
pub fn melody_curve(melody: Melody, turn: f64, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let two_piece = |a: f64, mid: f64, b: f64| {
        if x < turn {
            a + (mid - a) * x / turn
        } else {
            mid + (b - mid) * (x - turn) / (1.0 - turn)
        }
    };
    match melody {
        Melody::Rising => 0.78 + 0.44 * x,
        Melody::Falling => 1.22 - 0.44 * x,
        Melody::RisingFalling => two_piece(0.85, 1.3, 0.88),
        Melody::FallingRising => two_piece(1.25, 0.85, 1.2),
        Melody::Flat => 1.0,
    }
}

impl UnitSpec {
    /// Planned F0 at time `t` seconds into the unit.
    pub fn f0_at(&self, t: f64) -> f64 {
        let melody = |t: f64| self.base_f0_hz * melody_curve(self.melody, self.melody_turn, t / self.duration_s);
        let mut f = melody(t);
        if let Some(h) = &self.hyperphonation {
            let (a, b) = (h.span.start_s, h.span.end_s);
            let lerp = |from: f64, to: f64, p: f64| from + (to - from) * p.clamp(0.0, 1.0);
            if t >= a - HYPER_APPROACH_S && t < a {
                f = lerp(melody(a - HYPER_APPROACH_S), HYPER_APPROACH_HZ, (t - (a - HYPER_APPROACH_S)) / HYPER_APPROACH_S);
            } else if t >= a && t < b {
                let up = lerp(HYPER_APPROACH_HZ, h.plateau_hz, (t - a) / HYPER_JUMP_S);
                let down = lerp(HYPER_APPROACH_HZ, h.plateau_hz, (b - t) / HYPER_JUMP_S);
                f = up.min(down);
            } else if t >= b && t < b + HYPER_APPROACH_S {
                f = lerp(HYPER_APPROACH_HZ, melody(b + HYPER_APPROACH_S), (t - b) / HYPER_APPROACH_S);
            }
        }
        if let Some(g) = &self.glide {
            let (a, b) = (g.span.start_s, g.span.end_s);
            if t >= a && t < b {
                // 40% rise, 20% hold, 40% fall
                let p = (t - a) / (b - a);
                let shape = if p < 0.4 {
                    p / 0.4
                } else if p < 0.6 {
                    1.0
                } else {
                    (1.0 - p) / 0.4
                };
                f += g.delta_hz * shape;
            }
        }
        if let Some(v) = &self.vibrato {
            f += v.depth_hz * (2.0 * std::f64::consts::PI * v.rate_hz * t).sin();
        }
        f
    }
}
