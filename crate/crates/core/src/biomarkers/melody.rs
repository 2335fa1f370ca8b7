use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::detectors::smoothed_unit_contour;
use super::BiomarkerParams;
use crate::dsp::F0Contour;
use crate::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Melody {
    Falling,
    RisingFalling,
    Rising,
    FallingRising,
    Flat,
}

impl Melody {
    pub const ALL: [Melody; 5] = [
        Melody::Falling,
        Melody::RisingFalling,
        Melody::Rising,
        Melody::FallingRising,
        Melody::Flat,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Melody::Falling => "falling",
            Melody::RisingFalling => "rising_falling",
            Melody::Rising => "rising",
            Melody::FallingRising => "falling_rising",
            Melody::Flat => "flat",
        }
    }

    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|m| m == self).unwrap()
    }
}

impl fmt::Display for Melody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Melody {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown melody `{s}`"))
    }
}

/// Shape label of the voiced contour inside a unit.
///
/// The contour is median-smoothed and restricted to voiced frames. A small
/// relative range is flat. Otherwise the head and tail zones (each
/// `melody_edge_fraction` of the contour) are averaged; an interior maximum
/// standing well above both ends is rising-falling, an interior minimum well
/// below both ends is falling-rising, and anything else is rising or falling
/// according to the end-to-start difference.
pub fn classify_melody(f0: &F0Contour, unit: Range<usize>, params: &BiomarkerParams) -> Melody {
    let (smooth, voiced) = smoothed_unit_contour(f0, unit);
    let v: Vec<f64> = smooth
        .iter()
        .zip(&voiced)
        .filter(|(_, &ok)| ok)
        .map(|(&s, _)| s)
        .collect();
    classify_values(&v, params)
}

pub fn classify_values(v: &[f64], params: &BiomarkerParams) -> Melody {
    if v.len() < params.melody_min_voiced.max(1) {
        return Melody::Flat;
    }
    let n = v.len();
    let (mut imax, mut imin) = (0, 0);
    for i in 1..n {
        if v[i] > v[imax] {
            imax = i;
        }
        if v[i] < v[imin] {
            imin = i;
        }
    }
    let (max, min) = (v[imax], v[imin]);
    let avg = mean(v);
    if avg <= 0.0 || (max - min) / avg < params.melody_flatness {
        return Melody::Flat;
    }
    let span = max - min;
    let zone = ((n as f64 * params.melody_edge_fraction).round() as usize).clamp(1, n / 2);
    let start = mean(&v[..zone]);
    let end = mean(&v[n - zone..]);
    let interior = |i: usize| {
        let p = i as f64 / (n - 1) as f64;
        p > params.melody_edge_fraction && p < 1.0 - params.melody_edge_fraction
    };
    let turn = params.melody_turn_fraction * span;
    if interior(imax) && max - start.max(end) >= turn {
        Melody::RisingFalling
    } else if interior(imin) && start.min(end) - min >= turn {
        Melody::FallingRising
    } else if end > start {
        Melody::Rising
    } else {
        Melody::Falling
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(v: &[f64]) -> Melody {
        classify_values(v, &BiomarkerParams::default())
    }

    fn lerp(points: &[(f64, f64)], n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                let k = points.windows(2).position(|w| x <= w[1].0).unwrap_or(points.len() - 2);
                let (a, b) = (points[k], points[k + 1]);
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            })
            .collect()
    }

    #[test]
    fn canonical_shapes() {
        assert_eq!(classify(&lerp(&[(0.0, 400.0), (1.0, 600.0)], 80)), Melody::Rising);
        assert_eq!(classify(&lerp(&[(0.0, 600.0), (1.0, 400.0)], 80)), Melody::Falling);
        assert_eq!(classify(&[450.0; 60]), Melody::Flat);
        assert_eq!(
            classify(&lerp(&[(0.0, 400.0), (0.5, 650.0), (1.0, 420.0)], 80)),
            Melody::RisingFalling
        );
        assert_eq!(
            classify(&lerp(&[(0.0, 600.0), (0.5, 400.0), (1.0, 580.0)], 80)),
            Melody::FallingRising
        );
    }

    #[test]
    fn small_range_is_flat() {
        let v: Vec<f64> = (0..50).map(|i| 450.0 + 20.0 * (i as f64 * 0.3).sin()).collect();
        assert_eq!(classify(&v), Melody::Flat);
    }

    #[test]
    fn too_few_frames_is_flat() {
        assert_eq!(classify(&[300.0, 900.0, 300.0, 900.0]), Melody::Flat);
    }

    #[test]
    fn rise_with_late_overshoot_stays_rising() {
        // maximum sits in the tail zone
        let v = lerp(&[(0.0, 400.0), (0.9, 640.0), (1.0, 620.0)], 100);
        assert_eq!(classify(&v), Melody::Rising);
    }

    #[test]
    fn names_round_trip() {
        for m in Melody::ALL {
            assert_eq!(m.as_str().parse::<Melody>().unwrap(), m);
            assert_eq!(Melody::ALL[m.index()], m);
        }
    }
}
