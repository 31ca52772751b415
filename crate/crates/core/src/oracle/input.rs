use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signals::{SignalJet, SmoothSignal, TimeGrid, Trajectory};
use crate::{Error, Result};

/// One additive component of an analytic input channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// `amplitude * sin(frequency * t + phase)`, frequency in rad/s.
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `(c0 + c1 t + c2 t^2 + ..) * exp(rate * t)`.
    PolyExp { coeffs: Vec<f64>, rate: f64 },
}

impl Term {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        match self {
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                amplitude
                    * frequency.powi(order as i32)
                    * (frequency * t + phase + order as f64 * FRAC_PI_2).sin()
            }
            Term::PolyExp { coeffs, rate } => {
                // d/dt (p e^{rt}) = (p' + r p) e^{rt}
                let mut p = coeffs.clone();
                for _ in 0..order {
                    let mut next: Vec<f64> = p.iter().map(|c| rate * c).collect();
                    for (k, c) in p.iter().enumerate().skip(1) {
                        next[k - 1] += k as f64 * c;
                    }
                    p = next;
                }
                let poly = p.iter().rev().fold(0.0, |acc, c| acc * t + c);
                poly * (rate * t).exp()
            }
        }
    }
}

/// Infinitely differentiable input with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticInput {
    channels: Vec<Vec<Term>>,
}

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

impl AnalyticInput {
    pub fn new(channels: Vec<Vec<Term>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Dimension(
                "an input needs at least one channel".into(),
            ));
        }
        Ok(Self { channels })
    }

    /// Sum of `count` unit sinusoids per channel at frequencies `sqrt(prime)`
    /// rad/s (pairwise incommensurate, distinct across channels) with
    /// Schroeder phases.
    pub fn incommensurate_multisine(channels: usize, count: usize) -> Result<Self> {
        if channels * count > PRIMES.len() {
            return Err(Error::InvalidArgument(format!(
                "at most {} sinusoids in total are available",
                PRIMES.len()
            )));
        }
        let chans = (0..channels)
            .map(|c| {
                (0..count)
                    .map(|k| Term::Sine {
                        amplitude: 1.0,
                        frequency: f64::from(PRIMES[c * count + k]).sqrt(),
                        phase: -PI * (k * (k + 1)) as f64 / count as f64,
                    })
                    .collect()
            })
            .collect();
        Self::new(chans)
    }

    /// Seeded multisine: frequencies in `[0.5, 5]` rad/s, amplitudes in
    /// `[0.5, 1.5]`, uniform phases.
    pub fn random_multisine(channels: usize, count: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chans = (0..channels)
            .map(|_| {
                (0..count)
                    .map(|_| Term::Sine {
                        amplitude: rng.random_range(0.5..1.5),
                        frequency: rng.random_range(0.5..5.0),
                        phase: rng.random_range(0.0..2.0 * PI),
                    })
                    .collect()
            })
            .collect();
        Self::new(chans)
    }

    pub fn constant(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&v| {
                    vec![Term::PolyExp {
                        coeffs: vec![v],
                        rate: 0.0,
                    }]
                })
                .collect(),
        )
    }

    /// One polynomial per channel, coefficients in increasing degree.
    pub fn polynomial(coeffs: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|c| {
                    vec![Term::PolyExp {
                        coeffs: c.clone(),
                        rate: 0.0,
                    }]
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[Vec<Term>] {
        &self.channels
    }

    pub fn value(&self, t: f64) -> DVector<f64> {
        self.eval(0, t)
    }

    pub fn eval(&self, order: usize, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.channels.len(),
            self.channels
                .iter()
                .map(|terms| terms.iter().map(|term| term.derivative(order, t)).sum()),
        )
    }

    /// Channel-wise sum of two inputs.
    pub fn sum(&self, other: &AnalyticInput) -> Result<AnalyticInput> {
        if self.channels.len() != other.channels.len() {
            return Err(Error::Dimension(
                "inputs have different channel counts".into(),
            ));
        }
        Ok(Self {
            channels: self
                .channels
                .iter()
                .zip(&other.channels)
                .map(|(a, b)| a.iter().chain(b).cloned().collect())
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> AnalyticInput {
        let scale = |term: &Term| match term {
            Term::Sine {
                amplitude,
                frequency,
                phase,
            } => Term::Sine {
                amplitude: amplitude * c,
                frequency: *frequency,
                phase: *phase,
            },
            Term::PolyExp { coeffs, rate } => Term::PolyExp {
                coeffs: coeffs.iter().map(|v| v * c).collect(),
                rate: *rate,
            },
        };
        Self {
            channels: self
                .channels
                .iter()
                .map(|terms| terms.iter().map(scale).collect())
                .collect(),
        }
    }

    /// Samples of the `order`-th derivative on `grid`.
    pub fn sampled(&self, grid: TimeGrid, order: usize) -> Result<Trajectory> {
        Trajectory::from_fn(grid, self.channels.len(), |t, out| {
            out.copy_from_slice(self.eval(order, t).as_slice())
        })
    }

    /// Exact jet of orders `0..=order` on `grid`.
    pub fn jet(&self, grid: TimeGrid, order: usize) -> Result<SignalJet> {
        SignalJet::new(
            (0..=order)
                .map(|k| self.sampled(grid, k))
                .collect::<Result<_>>()?,
        )
    }
}

impl SmoothSignal for AnalyticInput {
    fn channels(&self) -> usize {
        self.channels.len()
    }

    fn max_order(&self) -> Option<usize> {
        None
    }

    fn derivative(&self, order: usize, t: f64) -> Result<DVector<f64>> {
        Ok(self.eval(order, t))
    }
}
