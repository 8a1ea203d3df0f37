//! Momentum-space wavefunctions of the beam splitters and their recoil.
//!
//! A beam splitter is modelled as a Gaussian packet `ψ(p)` sampled on a
//! uniform momentum grid. A recoil kick `exp(−δp·∇)` maps `ψ(p)` to
//! `ψ(p − δp)`; it is applied as a phase ramp in the conjugate (position)
//! domain, so it is exactly unitary on the grid and composes additively.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WavepacketError {
    #[error("invalid momentum grid: {0}")]
    InvalidGrid(String),
    #[error("packet width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("grid [{p_min}, {p_max}] does not cover [{low}, {high}] (center ± 8 widths)")]
    GridTooNarrow {
        p_min: f64,
        p_max: f64,
        low: f64,
        high: f64,
    },
    #[error("shift {shift} exceeds the anti-wrap limit {limit}")]
    ShiftTooLarge { shift: f64, limit: f64 },
    #[error("wavepackets live on different grids")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, WavepacketError>;

/// Half-width of the default grid in units of the packet width.
pub const DEFAULT_SPAN_WIDTHS: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 1024;
/// The grid must reach this many widths on each side of the center.
pub const MIN_SPAN_WIDTHS: f64 = 8.0;

/// Uniform grid `p_i = p_min + i·Δp`, `Δp = (p_max − p_min)/n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    p_min: f64,
    p_max: f64,
    n_points: usize,
}

impl MomentumGrid {
    pub fn new(p_min: f64, p_max: f64, n_points: usize) -> Result<Self> {
        if !(p_min.is_finite() && p_max.is_finite()) || p_min >= p_max {
            return Err(WavepacketError::InvalidGrid(format!(
                "need finite p_min < p_max, got [{p_min}, {p_max}]"
            )));
        }
        if n_points < 8 {
            return Err(WavepacketError::InvalidGrid(format!(
                "need at least 8 points, got {n_points}"
            )));
        }
        Ok(Self {
            p_min,
            p_max,
            n_points,
        })
    }

    /// `[center − half_span, center + half_span]`.
    pub fn symmetric(center: f64, half_span: f64, n_points: usize) -> Result<Self> {
        Self::new(center - half_span, center + half_span, n_points)
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn span(&self) -> f64 {
        self.p_max - self.p_min
    }

    pub fn spacing(&self) -> f64 {
        self.span() / self.n_points as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.p_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }

    /// Largest shift accepted by [`Wavepacket::shift`].
    pub fn max_shift(&self) -> f64 {
        self.span() / 4.0
    }
}

/// Sampled momentum wavefunction with the Gaussian parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    grid: MomentumGrid,
    samples: Vec<Complex64>,
    center: f64,
    width: f64,
}

impl Wavepacket {
    /// `ψ(p) ∝ exp(−(p − p0)²/(4σ²))`, normalized so `Σ|ψ|²Δp = 1`.
    /// `σ` is the momentum standard deviation.
    pub fn gaussian(grid: MomentumGrid, center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(WavepacketError::InvalidWidth(width));
        }
        let low = center - MIN_SPAN_WIDTHS * width;
        let high = center + MIN_SPAN_WIDTHS * width;
        if grid.p_min > low || grid.p_max < high {
            return Err(WavepacketError::GridTooNarrow {
                p_min: grid.p_min,
                p_max: grid.p_max,
                low,
                high,
            });
        }
        let raw: Vec<f64> = grid
            .points()
            .map(|p| (-(p - center).powi(2) / (4.0 * width * width)).exp())
            .collect();
        let norm = (raw.iter().map(|x| x * x).sum::<f64>() * grid.spacing()).sqrt();
        let samples = raw
            .into_iter()
            .map(|x| Complex64::new(x / norm, 0.0))
            .collect();
        Ok(Self {
            grid,
            samples,
            center,
            width,
        })
    }

    /// Gaussian on the default grid: center ± 10σ with 1024 points.
    pub fn default_gaussian(center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(WavepacketError::InvalidWidth(width));
        }
        let grid = MomentumGrid::symmetric(center, DEFAULT_SPAN_WIDTHS * width, DEFAULT_POINTS)?;
        Self::gaussian(grid, center, width)
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `Σ|ψ(p_i)|² Δp`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Probability weight in the two outermost grid cells.
    pub fn edge_weight(&self) -> f64 {
        let n = self.samples.len();
        (self.samples[0].norm_sqr() + self.samples[n - 1].norm_sqr()) * self.grid.spacing()
    }

    pub fn mean_momentum(&self) -> f64 {
        self.momentum_element(self).map(|m| m.re).unwrap_or(f64::NAN)
    }

    /// `Σ p² |ψ|² Δp`.
    pub fn second_moment(&self) -> f64 {
        self.grid
            .points()
            .zip(&self.samples)
            .map(|(p, a)| p * p * a.norm_sqr())
            .sum::<f64>()
            * self.grid.spacing()
    }

    /// `ψ(p) → ψ(p − dp)`.
    pub fn shift(&self, dp: f64) -> Result<Self> {
        let limit = self.grid.max_shift();
        if !dp.is_finite() || dp.abs() >= limit {
            return Err(WavepacketError::ShiftTooLarge { shift: dp, limit });
        }
        if dp == 0.0 {
            return Ok(self.clone());
        }
        Ok(Self {
            grid: self.grid,
            samples: spectral_shift(&self.samples, self.grid.span(), dp),
            center: self.center,
            width: self.width,
        })
    }

    /// `⟨self|other⟩ = Σ conj(ψ_self) ψ_other Δp`.
    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(WavepacketError::GridMismatch);
        }
        let sum: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.spacing())
    }

    /// `⟨self|p̂|other⟩`.
    pub fn momentum_element(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(WavepacketError::GridMismatch);
        }
        let sum: Complex64 = self
            .grid
            .points()
            .zip(self.samples.iter().zip(&other.samples))
            .map(|(p, (a, b))| a.conj() * b * p)
            .sum();
        Ok(sum * self.grid.spacing())
    }

    /// Recoil overlap `⟨ψ|exp(−dp·∇)|ψ⟩`.
    pub fn recoil_overlap(&self, dp: f64) -> Result<Complex64> {
        self.overlap(&self.shift(dp)?)
    }
}

/// Translate periodic samples spanning `span` by `dp` via a Fourier phase ramp.
pub(crate) fn spectral_shift(samples: &[Complex64], span: f64, dp: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buffer = samples.to_vec();
    planner.plan_fft_forward(n).process(&mut buffer);
    let cycles = dp / span;
    for (m, value) in buffer.iter_mut().enumerate() {
        let k = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
        *value *= Complex64::from_polar(1.0, -2.0 * PI * k * cycles);
    }
    planner.plan_fft_inverse(n).process(&mut buffer);
    let scale = 1.0 / n as f64;
    for value in &mut buffer {
        *value *= scale;
    }
    buffer
}

pub fn gaussian(grid: MomentumGrid, center: f64, width: f64) -> Result<Wavepacket> {
    Wavepacket::gaussian(grid, center, width)
}

pub fn shift(psi: &Wavepacket, dp: f64) -> Result<Wavepacket> {
    psi.shift(dp)
}

pub fn overlap(a: &Wavepacket, b: &Wavepacket) -> Result<Complex64> {
    a.overlap(b)
}
