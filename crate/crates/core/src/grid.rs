use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid half-width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("grid needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
}

/// Uniform sample grid on `[-half_width, half_width]`.
///
/// Passivity and monotonicity checks are evaluated on such a grid; the
/// verdicts are certificates over these points only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    samples: usize,
}

impl Grid {
    pub const MIN_SAMPLES: usize = 101;

    pub fn new(half_width: f64, samples: usize) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::HalfWidth(half_width));
        }
        if samples < Self::MIN_SAMPLES {
            return Err(GridError::TooFewSamples {
                got: samples,
                min: Self::MIN_SAMPLES,
            });
        }
        Ok(Self {
            half_width,
            samples,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.samples - 1) as f64
    }

    /// The `i`-th point. With an odd sample count the middle point is exactly 0.
    pub fn point(&self, i: usize) -> f64 {
        let steps = (self.samples - 1) as f64;
        self.half_width * (2.0 * i as f64 - steps) / steps
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(move |i| self.point(i))
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            half_width: 100.0,
            samples: 2001,
        }
    }
}

/// Uniform sample points on `[-half_width, half_width]` without the size floor of [`Grid`].
pub fn symmetric_samples(half_width: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![0.0];
    }
    let steps = (samples - 1) as f64;
    (0..samples)
        .map(|i| half_width * (2.0 * i as f64 - steps) / steps)
        .collect()
}
