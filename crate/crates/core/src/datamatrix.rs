//! Time-shifted data matrices.
//!
//! For a signal `w`, `M` shifts and a period `T`, the matrix at time `t` is
//! `[w(t), w(t + T), .., w(t + M T)]`. A [`DataMatrixView`] stacks these
//! matrices for a selection of jet layers and evaluates them on demand.

use std::io::Write;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::signals::{JetTrajectory, SignalJet, SignalKind, TimeGrid, Trajectory, SNAP_TOL};
use crate::{Error, Result};

/// Number of shifts `M` and shift period `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSpec {
    shifts: usize,
    period: f64,
}

impl ShiftSpec {
    pub fn new(shifts: usize, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shift period must be positive, got {period}"
            )));
        }
        Ok(Self { shifts, period })
    }

    /// `M`.
    pub fn shifts(&self) -> usize {
        self.shifts
    }

    /// `M + 1`.
    pub fn columns(&self) -> usize {
        self.shifts + 1
    }

    /// `T`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `M T`, the time span covered by one matrix.
    pub fn span(&self) -> f64 {
        self.shifts as f64 * self.period
    }
}

/// Shift count with `M + 1 = m (L + 1) + n + 5` columns, five more than the
/// rank an informative dataset reaches.
pub fn suggest_shifts(inputs: usize, order: usize, state_dim: usize) -> usize {
    inputs * (order + 1) + state_dim + 4
}

/// Identifies one jet layer: signal and derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerKey {
    pub kind: SignalKind,
    pub order: usize,
}

impl LayerKey {
    pub const fn new(kind: SignalKind, order: usize) -> Self {
        Self { kind, order }
    }

    pub const fn input(order: usize) -> Self {
        Self::new(SignalKind::Input, order)
    }

    pub const fn output(order: usize) -> Self {
        Self::new(SignalKind::Output, order)
    }
}

impl std::fmt::Display for LayerKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}^({})", self.kind.label(), self.order)
    }
}

/// Which layers of a jet are stacked, in order.
#[derive(Debug, Clone, PartialEq)]
pub enum RowSelector {
    /// `u, .., u^(L), y, .., y^(L)`.
    Full(usize),
    /// `u, .., u^(L), y, .., y^(L-1)`: the coefficient matrix of the
    /// simulation ODE.
    Reduced(usize),
    Layers(Vec<LayerKey>),
}

impl RowSelector {
    fn keys(&self) -> Vec<LayerKey> {
        match self {
            RowSelector::Full(l) => (0..=*l)
                .map(LayerKey::input)
                .chain((0..=*l).map(LayerKey::output))
                .collect(),
            RowSelector::Reduced(l) => (0..=*l)
                .map(LayerKey::input)
                .chain((0..*l).map(LayerKey::output))
                .collect(),
            RowSelector::Layers(keys) => keys.clone(),
        }
    }
}

/// Single-layer shifted matrix `[w(t), w(t + T), .., w(t + M T)]`.
pub fn hankel_eval(traj: &Trajectory, spec: ShiftSpec, t: f64) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(traj.channels(), spec.columns());
    for j in 0..spec.columns() {
        out.set_column(j, &traj.eval_at(t + j as f64 * spec.period())?);
    }
    Ok(out)
}

/// Lazily evaluated stack of shifted matrices over selected jet layers.
#[derive(Debug, Clone)]
pub struct DataMatrixView {
    layers: Vec<(LayerKey, Trajectory)>,
    offsets: Vec<usize>,
    spec: ShiftSpec,
    grid: TimeGrid,
}

impl DataMatrixView {
    /// Stacks `selector` layers of `jet`.
    pub fn new(jet: &JetTrajectory, spec: ShiftSpec, selector: RowSelector) -> Result<Self> {
        let layers = selector
            .keys()
            .into_iter()
            .map(|key| {
                let part = jet.part(key.kind).ok_or_else(|| {
                    Error::Dimension(format!(
                        "an input-output jet has no {} layers",
                        key.kind.label()
                    ))
                })?;
                let layer = part.layer(key.order).ok_or_else(|| {
                    Error::Dimension(format!("jet of order {} has no layer {key}", part.order()))
                })?;
                Ok((key, layer.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(layers, spec)
    }

    /// Stacks layers `0..=max_order` of each signal jet in turn.
    pub fn from_signal_jets(
        parts: &[(SignalKind, &SignalJet, usize)],
        spec: ShiftSpec,
    ) -> Result<Self> {
        let mut layers = Vec::new();
        for &(kind, jet, max_order) in parts {
            for order in 0..=max_order {
                let layer = jet.layer(order).ok_or_else(|| {
                    Error::Dimension(format!(
                        "{} jet of order {} has no layer {order}",
                        kind.label(),
                        jet.order()
                    ))
                })?;
                layers.push((LayerKey::new(kind, order), layer.clone()));
            }
        }
        Self::from_layers(layers, spec)
    }

    pub fn from_layers(layers: Vec<(LayerKey, Trajectory)>, spec: ShiftSpec) -> Result<Self> {
        let grid = *layers
            .first()
            .ok_or_else(|| Error::Dimension("a data matrix needs at least one layer".into()))?
            .1
            .grid();
        for (key, layer) in &layers {
            if !layer.grid().same_as(&grid) {
                return Err(Error::GridMismatch(format!(
                    "layer {key} uses a different grid"
                )));
            }
        }
        if grid.multiple_of_dt(spec.period()).is_none() {
            return Err(Error::InvalidArgument(format!(
                "shift period {} must be an integer multiple of the sampling step {}",
                spec.period(),
                grid.dt()
            )));
        }
        if spec.span() > grid.end() - grid.t0() + SNAP_TOL * grid.dt() {
            return Err(Error::InsufficientData {
                needed: (spec.span() / grid.dt()).round() as usize + 1,
                available: grid.count(),
            });
        }
        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut row = 0;
        for (_, layer) in &layers {
            offsets.push(row);
            row += layer.channels();
        }
        offsets.push(row);
        Ok(Self {
            layers,
            offsets,
            spec,
            grid,
        })
    }

    /// Sub-view over `keys`, in the given order.
    pub fn select(&self, keys: &[LayerKey]) -> Result<Self> {
        let layers = keys
            .iter()
            .map(|k| {
                self.layer(*k)
                    .map(|l| (*k, l.clone()))
                    .ok_or_else(|| Error::Dimension(format!("view has no layer {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(layers, self.spec)
    }

    pub fn spec(&self) -> ShiftSpec {
        self.spec
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        *self.offsets.last().expect("offsets end with the row count")
    }

    pub fn cols(&self) -> usize {
        self.spec.columns()
    }

    pub fn keys(&self) -> impl Iterator<Item = LayerKey> + '_ {
        self.layers.iter().map(|(k, _)| *k)
    }

    pub fn layer(&self, key: LayerKey) -> Option<&Trajectory> {
        self.layers.iter().find(|(k, _)| *k == key).map(|(_, l)| l)
    }

    /// Row range of `key` in the stacked matrix.
    pub fn block_range(&self, key: LayerKey) -> Option<Range<usize>> {
        let idx = self.layers.iter().position(|(k, _)| *k == key)?;
        Some(self.offsets[idx]..self.offsets[idx + 1])
    }

    /// Highest order present for `kind`.
    pub fn max_order(&self, kind: SignalKind) -> Option<usize> {
        self.keys()
            .filter(|k| k.kind == kind)
            .map(|k| k.order)
            .max()
    }

    /// Times `t` at which the whole matrix is defined: `[t0, end - M T]`.
    pub fn window(&self) -> (f64, f64) {
        (self.grid.t0(), self.grid.end() - self.spec.span())
    }

    pub fn window_length(&self) -> f64 {
        let (a, b) = self.window();
        b - a
    }

    /// Largest boundary band (in samples) over the stacked layers.
    pub fn boundary_band(&self) -> usize {
        self.layers
            .iter()
            .map(|(_, l)| l.boundary_band())
            .max()
            .unwrap_or(0)
    }

    fn check_window(&self, t: f64) -> Result<()> {
        let (start, end) = self.window();
        let slack = SNAP_TOL * self.grid.dt();
        if !t.is_finite() || t < start - slack || t > end + slack {
            return Err(Error::OutOfDomain { t, start, end });
        }
        Ok(())
    }

    /// Shifted matrix of a single layer of this view.
    pub fn block_eval(&self, key: LayerKey, t: f64) -> Result<DMatrix<f64>> {
        self.check_window(t)?;
        let layer = self
            .layer(key)
            .ok_or_else(|| Error::Dimension(format!("view has no layer {key}")))?;
        hankel_eval(layer, self.spec, t)
    }

    /// Full stacked matrix at `t`.
    pub fn stacked_eval(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check_window(t)?;
        let mut out = DMatrix::zeros(self.rows(), self.cols());
        for j in 0..self.cols() {
            let tj = t + j as f64 * self.spec.period();
            for ((_, layer), &row) in self.layers.iter().zip(&self.offsets) {
                out.view_mut((row, j), (layer.channels(), 1))
                    .copy_from(&layer.eval_at(tj)?);
            }
        }
        Ok(out)
    }

    /// Stacked matrix times a coefficient vector.
    pub fn apply(&self, t: f64, alpha: &DVector<f64>) -> Result<DVector<f64>> {
        if alpha.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "alpha has {} entries but the data matrix has {} columns",
                alpha.len(),
                self.cols()
            )));
        }
        Ok(self.stacked_eval(t)? * alpha)
    }

    /// Stacked matrix at `t` times `alpha(t)`.
    pub fn apply_alpha(&self, alpha: &Trajectory, t: f64) -> Result<DVector<f64>> {
        if alpha.channels() != self.cols() {
            return Err(Error::Dimension(format!(
                "alpha has {} channels but the data matrix has {} columns",
                alpha.channels(),
                self.cols()
            )));
        }
        self.apply(t, &alpha.eval_at(t)?)
    }

    /// Same view with every data sample multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            layers: self.layers.iter().map(|(k, l)| (*k, l.scaled(c))).collect(),
            ..self.clone()
        }
    }
}

/// Writes `matrix` row by row with 17 significant digits.
pub fn write_matrix_csv<W: Write>(matrix: &DMatrix<f64>, mut out: W) -> Result<()> {
    for r in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols())
            .map(|c| format!("{:.16e}", matrix[(r, c)]))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
