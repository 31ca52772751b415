//! Candidate jets `H(w^(i))(t) alpha(t)` and the admissibility conditions on
//! the coefficient trajectory `alpha`.
//!
//! For every stacked signal `w` and order `i < L` two families of residuals
//! are reported:
//!
//! * `cond2`: `|d/dt (H(w^(i)) alpha) - H(w^(i+1)) alpha|`, with the time
//!   derivative taken by a fourth-order central difference on the alpha grid;
//! * `cond3`: `|H(w^(i)) alpha'|`.
//!
//! On exact data the two vectors coincide by the product rule, and the report
//! carries their difference as a consistency diagnostic.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::datamatrix::{DataMatrixView, LayerKey};
use crate::signals::{
    differentiate, DiffMethod, JetTrajectory, SignalJet, SignalKind, TimeGrid, Trajectory, SNAP_TOL,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// A derivative layer accompanies the trajectory.
    C1Verified,
    Unverified,
}

/// Coefficient trajectory `alpha: R -> R^(M+1)`.
#[derive(Debug, Clone)]
pub struct AlphaTrajectory {
    inner: Trajectory,
    derivative: Option<Trajectory>,
}

impl AlphaTrajectory {
    /// Trajectory without derivative information.
    pub fn new(inner: Trajectory) -> Self {
        Self {
            inner,
            derivative: None,
        }
    }

    pub fn with_derivative(inner: Trajectory, derivative: Trajectory) -> Result<Self> {
        if !inner.grid().same_as(derivative.grid()) {
            return Err(Error::GridMismatch(
                "alpha and its derivative use different grids".into(),
            ));
        }
        if inner.channels() != derivative.channels() {
            return Err(Error::Dimension(format!(
                "alpha has {} channels but its derivative has {}",
                inner.channels(),
                derivative.channels()
            )));
        }
        Ok(Self {
            inner,
            derivative: Some(derivative),
        })
    }

    /// Attaches a finite-difference derivative of `inner`.
    pub fn estimate(inner: Trajectory, method: DiffMethod) -> Result<Self> {
        let derivative = differentiate(&inner, 1, method)?;
        Self::with_derivative(inner, derivative)
    }

    /// `alpha(t) = value` with zero derivative.
    pub fn constant(grid: TimeGrid, value: &DVector<f64>) -> Result<Self> {
        let inner = Trajectory::constant(grid, value.as_slice())?;
        let derivative = Trajectory::constant(grid, &vec![0.0; value.len()])?;
        Self::with_derivative(inner, derivative)
    }

    pub fn inner(&self) -> &Trajectory {
        &self.inner
    }

    pub fn derivative(&self) -> Option<&Trajectory> {
        self.derivative.as_ref()
    }

    pub fn smoothness(&self) -> Smoothness {
        if self.derivative.is_some() {
            Smoothness::C1Verified
        } else {
            Smoothness::Unverified
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        self.inner.grid()
    }

    /// `M + 1`.
    pub fn columns(&self) -> usize {
        self.inner.channels()
    }

    pub fn value_at(&self, t: f64) -> Result<DVector<f64>> {
        self.inner.eval_at(t)
    }

    fn derivative_at(&self, t: f64) -> Result<DVector<f64>> {
        self.derivative
            .as_ref()
            .ok_or_else(|| {
                Error::InvalidArgument("alpha has no derivative layer (not C1-verified)".into())
            })?
            .eval_at(t)
    }
}

/// Candidate jet `(H(u^(i)) alpha, H(y^(i)) alpha)_{i=0..L}` on `eval_grid`.
///
/// `view` must hold input and output layers `0..=L`; input layers of higher
/// order are ignored.
pub fn generate_jet(
    view: &DataMatrixView,
    alpha: &AlphaTrajectory,
    eval_grid: TimeGrid,
) -> Result<JetTrajectory> {
    check_columns(view, alpha)?;
    let order = view
        .max_order(SignalKind::Output)
        .ok_or_else(|| Error::Dimension("view has no output layers".into()))?;
    let build = |kind: SignalKind| -> Result<SignalJet> {
        let layers = (0..=order)
            .map(|i| {
                let key = LayerKey::new(kind, i);
                let q = view
                    .block_range(key)
                    .ok_or_else(|| Error::Dimension(format!("view has no layer {key}")))?
                    .len();
                let mut values = DMatrix::zeros(q, eval_grid.count());
                for (k, t) in eval_grid.times().enumerate() {
                    let col = view.block_eval(key, t)? * alpha.value_at(t)?;
                    values.set_column(k, &col);
                }
                Trajectory::new(eval_grid, values)
            })
            .collect::<Result<Vec<_>>>()?;
        SignalJet::new(layers)
    };
    JetTrajectory::new(build(SignalKind::Input)?, build(SignalKind::Output)?)
}

fn check_columns(view: &DataMatrixView, alpha: &AlphaTrajectory) -> Result<()> {
    if alpha.columns() != view.cols() {
        return Err(Error::Dimension(format!(
            "alpha has {} channels but the data matrix has {} columns",
            alpha.columns(),
            view.cols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Derivative mismatch `d/dt (H(w^(i)) alpha) - H(w^(i+1)) alpha`.
    Cond2,
    /// `H(w^(i)) alpha'`.
    Cond3,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Cond2 => "cond2",
            Family::Cond3 => "cond3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub t: f64,
    pub order: usize,
    pub family: Family,
    pub rows: SignalKind,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    /// Per probe time, the largest `|cond2 vector - cond3 vector|`.
    pub leibniz_gaps: Vec<(f64, f64)>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConditionReport {
    pub fn residuals(&self, family: Family) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(move |e| e.family == family)
    }

    pub fn max_of(&self, family: Family) -> f64 {
        self.residuals(family)
            .map(|e| e.residual)
            .fold(0.0, f64::max)
    }

    pub fn max_leibniz_gap(&self) -> f64 {
        self.leibniz_gaps.iter().map(|g| g.1).fold(0.0, f64::max)
    }

    /// `t,i,family,rows,residual`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,i,family,rows,residual")?;
        for e in &self.entries {
            writeln!(
                out,
                "{:e},{},{},{},{:e}",
                e.t,
                e.order,
                e.family.as_str(),
                e.rows.label(),
                e.residual
            )?;
        }
        Ok(())
    }
}

/// Conditions on the input and output layers of a full-selector view.
pub fn check_conditions(
    view: &DataMatrixView,
    alpha: &AlphaTrajectory,
    probe_times: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    check_families(
        view,
        &[SignalKind::Input, SignalKind::Output],
        alpha,
        probe_times,
        tol,
    )
}

/// Conditions on the latent layers `l, .., l^(L)`.
pub fn check_latent_conditions(
    latent_view: &DataMatrixView,
    alpha: &AlphaTrajectory,
    probe_times: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    check_families(latent_view, &[SignalKind::Latent], alpha, probe_times, tol)
}

/// Conditions on a view with rows `u, u', x, x'`.
pub fn check_state_conditions(
    state_view: &DataMatrixView,
    alpha: &AlphaTrajectory,
    probe_times: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    for kind in [SignalKind::Input, SignalKind::State] {
        if state_view.max_order(kind) != Some(1) {
            return Err(Error::Dimension(format!(
                "state view needs {0} and {0}' layers only",
                kind.label()
            )));
        }
    }
    check_families(
        state_view,
        &[SignalKind::Input, SignalKind::State],
        alpha,
        probe_times,
        tol,
    )
}

fn check_families(
    view: &DataMatrixView,
    kinds: &[SignalKind],
    alpha: &AlphaTrajectory,
    probe_times: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    check_columns(view, alpha)?;
    if alpha.smoothness() != Smoothness::C1Verified {
        return Err(Error::InvalidArgument(
            "alpha must carry a derivative layer (C1-verified)".into(),
        ));
    }
    if probe_times.is_empty() {
        return Err(Error::InvalidArgument("no probe times given".into()));
    }
    let mut families = Vec::new();
    for &kind in kinds {
        let top = view
            .max_order(kind)
            .ok_or_else(|| Error::Dimension(format!("view has no {} layers", kind.label())))?;
        for i in 0..=top {
            if view.layer(LayerKey::new(kind, i)).is_none() {
                return Err(Error::Dimension(format!(
                    "view is missing layer {}",
                    LayerKey::new(kind, i)
                )));
            }
        }
        families.push((kind, top));
    }

    // Central difference step: the alpha sampling step, so that every
    // difference node is a stored alpha sample when probes are on its grid.
    let h = alpha.grid().dt();
    let (lo, hi) = view.window();
    let (alo, ahi) = (alpha.grid().t0(), alpha.grid().end());
    let slack = SNAP_TOL * h;
    for &t in probe_times {
        let (a, b) = (lo.max(alo) + 2.0 * h, hi.min(ahi) - 2.0 * h);
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutOfDomain {
                t,
                start: a,
                end: b,
            });
        }
    }

    let mut entries = Vec::new();
    let mut leibniz_gaps = Vec::with_capacity(probe_times.len());
    for &t in probe_times {
        let nodes = [t - 2.0 * h, t - h, t + h, t + 2.0 * h];
        let alpha_nodes = nodes
            .iter()
            .map(|&s| alpha.value_at(s))
            .collect::<Result<Vec<_>>>()?;
        let a_t = alpha.value_at(t)?;
        let da_t = alpha.derivative_at(t)?;
        let mut gap: f64 = 0.0;
        for &(kind, top) in &families {
            for i in 0..top {
                let key = LayerKey::new(kind, i);
                let g = |s: f64, a: &DVector<f64>| -> Result<DVector<f64>> {
                    Ok(view.block_eval(key, s)? * a)
                };
                let [g0, g1, g2, g3] = [0, 1, 2, 3].map(|j| g(nodes[j], &alpha_nodes[j]));
                let dg = ((g2? - g1?) * 8.0 - (g3? - g0?)) / (12.0 * h);
                let cond2 = dg - view.block_eval(LayerKey::new(kind, i + 1), t)? * &a_t;
                let cond3 = view.block_eval(key, t)? * &da_t;
                gap = gap.max((&cond2 - &cond3).norm());
                entries.push(ConditionEntry {
                    t,
                    order: i,
                    family: Family::Cond2,
                    rows: kind,
                    residual: cond2.norm(),
                });
                entries.push(ConditionEntry {
                    t,
                    order: i,
                    family: Family::Cond3,
                    rows: kind,
                    residual: cond3.norm(),
                });
            }
        }
        leibniz_gaps.push((t, gap));
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(ConditionReport {
        entries,
        leibniz_gaps,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}
