use super::AudioError;

/// Mono audio signal with its sample rate.
///
/// Samples are always finite and lie in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidSampleRate(sample_rate));
        }
        if let Some(index) = samples
            .iter()
            .position(|s| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(AudioError::SampleOutOfRange {
                index,
                value: samples[index],
            });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a clip, clamping every sample into `[-1, 1]` and mapping
    /// non-finite values to zero.
    pub fn from_clamped(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        let samples = samples
            .into_iter()
            .map(|s| if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 })
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn silence(num_samples: usize, sample_rate: u32) -> Result<Self, AudioError> {
        Self::new(vec![0.0; num_samples], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Samples in `[start, end)`, clipped to the signal bounds.
    pub fn slice(&self, start: usize, end: usize) -> &[f64] {
        let end = end.min(self.samples.len());
        let start = start.min(end);
        &self.samples[start..end]
    }

    /// Multiplies every sample by `gain`, clamping to full scale.
    pub fn scaled(&self, gain: f64) -> AudioClip {
        AudioClip {
            samples: self
                .samples
                .iter()
                .map(|s| (s * gain).clamp(-1.0, 1.0))
                .collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}
