//! Seeded synthetic signals: a mean profile plus i.i.d. noise.
//!
//! Noise draws come from ChaCha8 seeded through `seed_from_u64`, so a given
//! `(seed, noise, n)` yields the same vector on every platform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Constant,
    Sine,
    Rectangular,
}

/// Noise distributions. All but Cauchy have mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// N(0, 1)
    Gaussian,
    /// Uniform on [-√3, √3]
    Uniform,
    /// (χ²₁ − 1)/√2
    Chisq,
    /// Standard Cauchy
    Cauchy,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Constant, Shape::Sine, Shape::Rectangular];
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Gaussian,
        NoiseKind::Uniform,
        NoiseKind::Chisq,
        NoiseKind::Cauchy,
    ];
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Constant => "constant",
            Shape::Sine => "sine",
            Shape::Rectangular => "rectangular",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(Shape::Constant),
            "sine" | "sinusoid" => Ok(Shape::Sine),
            "rectangular" | "rect" | "square" => Ok(Shape::Rectangular),
            other => Err(Error::InvalidSpec(format!("unknown shape {other:?}"))),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Uniform => "uniform",
            NoiseKind::Chisq => "chisq",
            NoiseKind::Cauchy => "cauchy",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(NoiseKind::Gaussian),
            "uniform" => Ok(NoiseKind::Uniform),
            "chisq" | "chi-square" | "chisquare" => Ok(NoiseKind::Chisq),
            "cauchy" => Ok(NoiseKind::Cauchy),
            other => Err(Error::InvalidSpec(format!("unknown noise {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub shape: Shape,
    pub n: usize,
    pub amplitude: f64,
    /// Number of periods over the whole signal.
    pub frequency: f64,
    pub level: f64,
    pub noise: NoiseKind,
    pub seed: u64,
}

impl SignalSpec {
    pub fn constant(n: usize, noise: NoiseKind, seed: u64) -> Self {
        Self {
            shape: Shape::Constant,
            n,
            amplitude: 0.0,
            frequency: 1.0,
            level: 0.0,
            noise,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if !self.level.is_finite() {
            return Err(Error::InvalidSpec("level must be finite".into()));
        }
        if self.shape != Shape::Constant && !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "frequency must be > 0 for periodic shapes, got {}",
                self.frequency
            )));
        }
        Ok(())
    }
}

/// Noise-free mean profile.
pub fn generate_means(spec: &SignalSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n as f64;
    let means = (0..spec.n)
        .map(|i| {
            let phase = spec.frequency * i as f64 / n;
            match spec.shape {
                Shape::Constant => spec.level,
                Shape::Sine => spec.level + spec.amplitude * (2.0 * PI * phase).sin(),
                Shape::Rectangular => {
                    if phase.fract() < 0.5 {
                        spec.level + spec.amplitude
                    } else {
                        spec.level - spec.amplitude
                    }
                }
            }
        })
        .collect();
    Ok(means)
}

/// `means` plus i.i.d. draws of `noise`.
pub fn add_noise(means: &[f64], noise: NoiseKind, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_width = 3f64.sqrt();
    let cauchy = Cauchy::new(0.0, 1.0).expect("unit scale");
    means
        .iter()
        .map(|&m| {
            let e = match noise {
                NoiseKind::Gaussian => StandardNormal.sample(&mut rng),
                NoiseKind::Uniform => rng.random_range(-half_width..=half_width),
                NoiseKind::Chisq => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (z * z - 1.0) / std::f64::consts::SQRT_2
                }
                NoiseKind::Cauchy => cauchy.sample(&mut rng),
            };
            m + e
        })
        .collect()
}

pub fn simulate(spec: &SignalSpec) -> Result<Vec<f64>> {
    Ok(add_noise(&generate_means(spec)?, spec.noise, spec.seed))
}
