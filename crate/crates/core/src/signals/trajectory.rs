use nalgebra::{DMatrix, DVector, DVectorView};

use super::grid::{GridPosition, TimeGrid};
use crate::{Error, Result};

/// Piecewise-polynomial interpolation used between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterpOrder {
    Linear,
    #[default]
    Cubic,
}

/// Uniformly sampled multichannel signal.
///
/// `values` holds one column per sample and one row per channel. Samples
/// within `boundary_band` of either end were produced by one-sided
/// derivative stencils and are less accurate than interior samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    values: DMatrix<f64>,
    interp: InterpOrder,
    boundary_band: usize,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::Dimension(
                "trajectory needs at least one channel".into(),
            ));
        }
        if values.ncols() != grid.count() {
            return Err(Error::Dimension(format!(
                "trajectory has {} samples but grid has {}",
                values.ncols(),
                grid.count()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            grid,
            values,
            interp: InterpOrder::Cubic,
            boundary_band: 0,
        })
    }

    /// Samples `f` at every grid time. `f` writes `channels` values.
    pub fn from_fn(
        grid: TimeGrid,
        channels: usize,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Result<Self> {
        let mut values = DMatrix::zeros(channels, grid.count());
        let mut buf = vec![0.0; channels];
        for (k, t) in grid.times().enumerate() {
            f(t, &mut buf);
            values.column_mut(k).copy_from_slice(&buf);
        }
        Self::new(grid, values)
    }

    /// Constant signal `value` on `grid`.
    pub fn constant(grid: TimeGrid, value: &[f64]) -> Result<Self> {
        Self::from_fn(grid, value.len(), |_, out| out.copy_from_slice(value))
    }

    pub fn with_interp(mut self, interp: InterpOrder) -> Self {
        self.interp = interp;
        self
    }

    pub fn with_boundary_band(mut self, band: usize) -> Self {
        self.boundary_band = band;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn interp_order(&self) -> InterpOrder {
        self.interp
    }

    pub fn boundary_band(&self) -> usize {
        self.boundary_band
    }

    pub fn sample(&self, k: usize) -> DVectorView<'_, f64> {
        self.values.column(k)
    }

    /// Value at an arbitrary time inside the grid; exact at grid points.
    pub fn eval_at(&self, t: f64) -> Result<DVector<f64>> {
        match self.grid.locate(t)? {
            GridPosition::Sample(k) => Ok(self.values.column(k).into_owned()),
            GridPosition::Between { k, frac } => Ok(self.interpolate(k, frac)),
        }
    }

    fn interpolate(&self, k: usize, frac: f64) -> DVector<f64> {
        let count = self.grid.count();
        if self.interp == InterpOrder::Linear || count < 4 {
            return self.values.column(k) * (1.0 - frac) + self.values.column(k + 1) * frac;
        }
        // Four-point Lagrange stencil, shifted inward at the ends.
        let start = k.saturating_sub(1).min(count - 4);
        let x = (k - start) as f64 + frac;
        let w = [
            -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
            x * (x - 2.0) * (x - 3.0) / 2.0,
            -x * (x - 1.0) * (x - 3.0) / 2.0,
            x * (x - 1.0) * (x - 2.0) / 6.0,
        ];
        let mut out = DVector::zeros(self.channels());
        for (j, wj) in w.iter().enumerate() {
            out.axpy(*wj, &self.values.column(start + j), 1.0);
        }
        out
    }

    /// The shifted signal `t -> w(t + tau)` on the grid that keeps it inside
    /// the original domain. `tau` must be a non-negative multiple of `dt`.
    pub fn shifted(&self, tau: f64) -> Result<Trajectory> {
        let shift = if tau == 0.0 {
            0
        } else {
            self.grid.multiple_of_dt(tau).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "shift {tau} is not a multiple of dt = {}",
                    self.grid.dt()
                ))
            })?
        };
        if shift >= self.grid.count() {
            return Err(Error::InsufficientData {
                needed: shift + 1,
                available: self.grid.count(),
            });
        }
        let count = self.grid.count() - shift;
        let grid = TimeGrid::new(self.grid.t0(), self.grid.dt(), count)?;
        let values = self.values.columns(shift, count).into_owned();
        Ok(Trajectory {
            grid,
            values,
            interp: self.interp,
            boundary_band: self.boundary_band,
        })
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: f64) -> Trajectory {
        Trajectory {
            values: &self.values * c,
            ..self.clone()
        }
    }
}
