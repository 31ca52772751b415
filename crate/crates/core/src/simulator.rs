//! Data-driven simulation: integrate the coefficient trajectory `alpha` so
//! that `H(u(t)) alpha(t)` follows a target input, then read the output off
//! as `H(y(t)) alpha(t)`.
//!
//! With `R(t)` the stack of `H(u), .., H(u^(L)), H(y), .., H(y^(L-1))`, the
//! coefficients solve the linear time-varying system
//!
//! ```text
//! R(t) alpha' = [0; ..; 0; ubar^(L+1)(t) - H(u^(L+1)(t)) alpha; 0; ..; 0]
//! ```
//!
//! (the nonzero block sits on the `u^(L)` rows), started from a minimum-norm
//! solution of `H(w^(i)(0)) alpha(0) = wbar^(i)(0)`, `i = 0..=L`.
//!
//! Times: `alpha` is indexed by data time `t`; the target input and the
//! reconstructed signals use simulation time `tau = t - start`.

use std::io::Write;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::datamatrix::{DataMatrixView, LayerKey, ShiftSpec};
use crate::informativity::InformativityReport;
use crate::linalg::{min_norm_lstsq, pseudo_inverse, DEFAULT_REL_TOL};
use crate::ode::rk4;
use crate::representation::AlphaTrajectory;
use crate::signals::{JetTrajectory, SignalKind, SmoothSignal, TimeGrid, Trajectory, SNAP_TOL};
use crate::{Error, Result};

pub const DEFAULT_INIT_TOL: f64 = 1e-6;
pub const DEFAULT_STAGE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// `alpha' = R^+ (b - F alpha)` with a truncated-SVD pseudoinverse;
    /// requires full row rank of `R`.
    #[default]
    Explicit,
    /// Minimum-norm least-squares solve for `alpha'` at every stage.
    ImplicitLsq,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Explicit => "explicit",
            Mode::ImplicitLsq => "implicit_lsq",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Mode::Explicit),
            "implicit_lsq" => Ok(Mode::ImplicitLsq),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (explicit | implicit_lsq)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed for one simulation run.
#[derive(Clone)]
pub struct SimulationProblem {
    data: DataMatrixView,
    order: usize,
    target: Arc<dyn SmoothSignal>,
    y_init: Vec<DVector<f64>>,
    u_init: Option<Vec<DVector<f64>>>,
    horizon: f64,
    step: f64,
    mode: Mode,
    rel_tol: f64,
    init_tol: f64,
    stage_tol: f64,
    start: f64,
}

impl std::fmt::Debug for SimulationProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimulationProblem")
            .field("order", &self.order)
            .field("spec", &self.data.spec())
            .field("horizon", &self.horizon)
            .field("step", &self.step)
            .field("mode", &self.mode)
            .field("start", &self.start)
            .finish_non_exhaustive()
    }
}

impl SimulationProblem {
    /// `jet` must carry derivative order at least `order + 1`; `y_init` holds
    /// `ybar^(i)(0)` for `i = 0..=order`. The target input is evaluated at
    /// simulation time and must supply derivatives up to `order + 1`.
    pub fn new(
        jet: &JetTrajectory,
        spec: ShiftSpec,
        order: usize,
        target: Arc<dyn SmoothSignal>,
        y_init: Vec<DVector<f64>>,
        horizon: f64,
        step: f64,
    ) -> Result<Self> {
        if jet.order() < order + 1 {
            return Err(Error::InsufficientData {
                needed: order + 1,
                available: jet.order(),
            });
        }
        let keys: Vec<LayerKey> = (0..=order + 1)
            .map(LayerKey::input)
            .chain((0..=order).map(LayerKey::output))
            .collect();
        let data = DataMatrixView::new(jet, spec, crate::datamatrix::RowSelector::Layers(keys))?;
        let problem = Self {
            data,
            order,
            target,
            y_init,
            u_init: None,
            horizon,
            step,
            mode: Mode::default(),
            rel_tol: DEFAULT_REL_TOL,
            init_tol: DEFAULT_INIT_TOL,
            stage_tol: DEFAULT_STAGE_TOL,
            start: jet.grid().t0(),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Overrides `ubar^(i)(0)`, which otherwise come from the target input.
    pub fn with_u_init(mut self, u_init: Vec<DVector<f64>>) -> Self {
        self.u_init = Some(u_init);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_init_tol(mut self, init_tol: f64) -> Self {
        self.init_tol = init_tol;
        self
    }

    pub fn with_stage_tol(mut self, stage_tol: f64) -> Self {
        self.stage_tol = stage_tol;
        self
    }

    /// Data time at which simulation time zero is placed.
    pub fn with_start(mut self, start: f64) -> Self {
        self.start = start;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn data_view(&self) -> &DataMatrixView {
        &self.data
    }

    /// Full selector `u, .., u^(L), y, .., y^(L)`.
    pub fn full_view(&self) -> Result<DataMatrixView> {
        self.data.select(&full_keys(self.order))
    }

    /// Reduced selector `u, .., u^(L), y, .., y^(L-1)`.
    pub fn reduced_view(&self) -> Result<DataMatrixView> {
        self.data.select(&reduced_keys(self.order))
    }

    fn inputs(&self) -> usize {
        self.data
            .block_range(LayerKey::input(0))
            .map_or(0, |r| r.len())
    }

    fn outputs(&self) -> usize {
        self.data
            .block_range(LayerKey::output(0))
            .map_or(0, |r| r.len())
    }

    /// Number of integration steps.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.horizon / self.step).round();
        if (n * self.step - self.horizon).abs() > SNAP_TOL * self.step.max(self.horizon) {
            return Err(Error::InvalidArgument(format!(
                "horizon {} is not an integer number of steps {}",
                self.horizon, self.step
            )));
        }
        Ok(n as usize)
    }

    /// Checks every precondition before any computation.
    pub fn validate(&self) -> Result<()> {
        let (m, p) = (self.inputs(), self.outputs());
        for (name, tol) in [
            ("rel_tol", self.rel_tol),
            ("init_tol", self.init_tol),
            ("stage_tol", self.stage_tol),
        ] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {tol}"
                )));
            }
        }
        if self.rel_tol >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "rel_tol must be below 1, got {}",
                self.rel_tol
            )));
        }
        if self.target.channels() != m {
            return Err(Error::Dimension(format!(
                "target input has {} channels, data input has {m}",
                self.target.channels()
            )));
        }
        if let Some(k) = self.target.max_order() {
            if k < self.order + 1 {
                return Err(Error::InsufficientData {
                    needed: self.order + 1,
                    available: k,
                });
            }
        }
        check_init("y_init", &self.y_init, self.order + 1, p)?;
        if let Some(u_init) = &self.u_init {
            check_init("u_init", u_init, self.order + 1, m)?;
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be non-negative, got {}",
                self.horizon
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        let grid = self.data.grid();
        let dt = grid.dt();
        let ratio_ok = grid.multiple_of_dt(self.step).is_some() || {
            let r = dt / self.step;
            (r - r.round()).abs() <= SNAP_TOL * r
        };
        if !ratio_ok {
            return Err(Error::InvalidArgument(format!(
                "step {} and data sampling step {dt} must have an integer ratio",
                self.step
            )));
        }
        self.steps()?;
        let (lo, hi) = self.data.window();
        let slack = SNAP_TOL * dt;
        if !(self.start >= lo - slack && self.start + self.horizon <= hi + slack) {
            return Err(Error::InvalidArgument(format!(
                "simulation span [{}, {}] leaves the usable data window [{lo}, {hi}] (length {})",
                self.start,
                self.start + self.horizon,
                self.data.window_length()
            )));
        }
        Ok(())
    }
}

fn check_init(name: &str, init: &[DVector<f64>], count: usize, width: usize) -> Result<()> {
    if init.len() != count {
        return Err(Error::Dimension(format!(
            "{name} needs {count} derivative vectors, got {}",
            init.len()
        )));
    }
    if let Some(v) = init.iter().find(|v| v.len() != width) {
        return Err(Error::Dimension(format!(
            "{name} vectors need {width} entries, got {}",
            v.len()
        )));
    }
    if init.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn full_keys(order: usize) -> Vec<LayerKey> {
    (0..=order)
        .map(LayerKey::input)
        .chain((0..=order).map(LayerKey::output))
        .collect()
}

fn reduced_keys(order: usize) -> Vec<LayerKey> {
    (0..=order)
        .map(LayerKey::input)
        .chain((0..order).map(LayerKey::output))
        .collect()
}

/// Outcome of a run. `alpha` lives on data time; `ybar` and
/// `ubar_reconstructed` on simulation time starting at zero.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub alpha: AlphaTrajectory,
    pub ybar: Trajectory,
    pub ubar_reconstructed: Trajectory,
    /// `|S(0) alpha(0) - wbar(0)|` for the stacked initial conditions.
    pub init_residual: f64,
    /// Sup over nodes of the residual of the coefficient equation.
    pub ode_residual_sup: f64,
    /// Sup over nodes of `|H(u) alpha - ubar|`.
    pub input_residual: f64,
    /// Largest per-stage least-squares residual (implicit mode).
    pub max_stage_residual: Option<f64>,
    /// Full row rank of `R` at every step (explicit mode).
    pub rank_ok: Vec<bool>,
    pub mode: Mode,
}

impl SimulationResult {
    /// `t,alpha_0..alpha_M,ubar_rec_1..,ybar_1..`, `t` in simulation time.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cols = self.alpha.columns();
        let (m, p) = (self.ubar_reconstructed.channels(), self.ybar.channels());
        let mut header = vec!["t".to_string()];
        header.extend((0..cols).map(|j| format!("alpha_{j}")));
        header.extend((1..=m).map(|j| format!("ubar_rec_{j}")));
        header.extend((1..=p).map(|j| format!("ybar_{j}")));
        writeln!(out, "{}", header.join(","))?;
        let grid = *self.ybar.grid();
        let mut row = String::new();
        for k in 0..grid.count() {
            row.clear();
            row.push_str(&format!("{:e}", grid.time(k)));
            let values = self
                .alpha
                .inner()
                .sample(k)
                .iter()
                .chain(self.ubar_reconstructed.sample(k).iter())
                .chain(self.ybar.sample(k).iter())
                .copied()
                .collect::<Vec<_>>();
            for v in values {
                row.push_str(&format!(",{v:e}"));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("mode={}", self.mode),
            format!("init_residual={:e}", self.init_residual),
            format!("ode_residual_sup={:e}", self.ode_residual_sup),
            format!("input_residual={:e}", self.input_residual),
        ];
        if let Some(s) = self.max_stage_residual {
            lines.push(format!("max_stage_residual={s:e}"));
        }
        if !self.rank_ok.is_empty() {
            lines.push(format!(
                "rank_ok_steps={}/{}",
                self.rank_ok.iter().filter(|b| **b).count(),
                self.rank_ok.len()
            ));
        }
        lines
    }
}

/// Minimum-norm `alpha(0)` for the stacked initial conditions, with the
/// residual of the fit; errors when the residual exceeds `init_tol`.
pub fn solve_initial_alpha(problem: &SimulationProblem) -> Result<(DVector<f64>, f64)> {
    problem.validate()?;
    let order = problem.order;
    let u_init = match &problem.u_init {
        Some(u) => u.clone(),
        None => (0..=order)
            .map(|i| problem.target.derivative(i, 0.0))
            .collect::<Result<_>>()?,
    };
    let parts: Vec<&DVector<f64>> = u_init.iter().chain(&problem.y_init).collect();
    let len = parts.iter().map(|v| v.len()).sum();
    let mut rhs = DVector::zeros(len);
    let mut row = 0;
    for v in parts {
        rhs.rows_mut(row, v.len()).copy_from(v);
        row += v.len();
    }
    let stack = problem.full_view()?.stacked_eval(problem.start)?;
    let alpha0 = min_norm_lstsq(&stack, &rhs, problem.rel_tol)?;
    let residual = (&stack * &alpha0 - &rhs).norm();
    if !residual.is_finite() || residual > problem.init_tol {
        return Err(Error::InconsistentInitialConditions {
            residual,
            tol: problem.init_tol,
        });
    }
    Ok((alpha0, residual))
}

/// Linear system `R(t) alpha' = b(t) - F(t) alpha` whose drive enters on
/// `drive_rows` of `R`.
struct CoefficientSystem<'a> {
    lhs: DataMatrixView,
    drive: DataMatrixView,
    drive_rows: Range<usize>,
    target: &'a dyn SmoothSignal,
    target_order: usize,
    start: f64,
}

impl CoefficientSystem<'_> {
    fn eval(&self, t: f64, alpha: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let r = self.lhs.stacked_eval(t)?;
        let forced = self.target.derivative(self.target_order, t - self.start)?
            - self.drive.stacked_eval(t)? * alpha;
        let mut rhs = DVector::zeros(r.nrows());
        rhs.rows_mut(self.drive_rows.start, self.drive_rows.len())
            .copy_from(&forced);
        Ok((r, rhs))
    }
}

struct Integration {
    grid: TimeGrid,
    states: Vec<DVector<f64>>,
    slopes: Vec<DVector<f64>>,
    ode_residual_sup: f64,
    max_stage_residual: Option<f64>,
    rank_ok: Vec<bool>,
}

fn integrate(
    system: &CoefficientSystem<'_>,
    alpha0: DVector<f64>,
    mode: Mode,
    step: f64,
    steps: usize,
    rel_tol: f64,
    stage_tol: f64,
) -> Result<Integration> {
    let start = system.start;
    let mut stage_max: f64 = 0.0;
    let mut stage_rank_ok = Vec::new();
    let rows = system.lhs.rows();
    let sol = rk4(
        |t, alpha| {
            let (r, rhs) = system.eval(t, alpha)?;
            match mode {
                Mode::Explicit => {
                    let pinv = pseudo_inverse(&r, rel_tol)?;
                    stage_rank_ok.push(pinv.rank == rows);
                    if pinv.rank < rows {
                        return Err(Error::RankDeficient {
                            t,
                            rank: pinv.rank,
                            rows,
                        });
                    }
                    Ok(pinv.matrix * rhs)
                }
                Mode::ImplicitLsq => {
                    let da = min_norm_lstsq(&r, &rhs, rel_tol)?;
                    let residual = (&r * &da - &rhs).norm();
                    if !residual.is_finite() || residual > stage_tol {
                        return Err(Error::StageFailure {
                            t,
                            residual,
                            tol: stage_tol,
                        });
                    }
                    stage_max = stage_max.max(residual);
                    Ok(da)
                }
            }
        },
        start,
        alpha0,
        step,
        steps,
    )?;
    let grid = TimeGrid::new(start, step, steps + 1)?;
    let mut ode_residual_sup: f64 = 0.0;
    for (k, (a, da)) in sol.states.iter().zip(&sol.slopes).enumerate() {
        let (r, rhs) = system.eval(grid.time(k), a)?;
        ode_residual_sup = ode_residual_sup.max((r * da - rhs).norm());
    }
    // four stages per step plus the closing evaluation at the last node
    let rank_ok = stage_rank_ok
        .chunks(4)
        .map(|c| c.iter().all(|b| *b))
        .collect();
    Ok(Integration {
        grid,
        states: sol.states,
        slopes: sol.slopes,
        ode_residual_sup,
        max_stage_residual: (mode == Mode::ImplicitLsq).then_some(stage_max),
        rank_ok,
    })
}

fn columns_to_trajectory(grid: TimeGrid, cols: &[DVector<f64>]) -> Result<Trajectory> {
    let rows = cols.first().map_or(0, |c| c.len());
    let mut values = DMatrix::zeros(rows, cols.len());
    for (k, c) in cols.iter().enumerate() {
        values.set_column(k, c);
    }
    Trajectory::new(grid, values)
}

fn run_mode(problem: &SimulationProblem, mode: Mode) -> Result<SimulationResult> {
    let (alpha0, init_residual) = solve_initial_alpha(problem)?;
    let order = problem.order;
    let lhs = problem.reduced_view()?;
    let drive_rows = lhs
        .block_range(LayerKey::input(order))
        .ok_or_else(|| Error::Dimension("missing top input layer".into()))?;
    let system = CoefficientSystem {
        drive: problem.data.select(&[LayerKey::input(order + 1)])?,
        lhs,
        drive_rows,
        target: problem.target.as_ref(),
        target_order: order + 1,
        start: problem.start,
    };
    let steps = problem.steps()?;
    let run = integrate(
        &system,
        alpha0,
        mode,
        problem.step,
        steps,
        problem.rel_tol,
        problem.stage_tol,
    )?;

    let u_view = problem.data.select(&[LayerKey::input(0)])?;
    let y_view = problem.data.select(&[LayerKey::output(0)])?;
    let mut ubar = Vec::with_capacity(run.states.len());
    let mut ybar = Vec::with_capacity(run.states.len());
    let mut input_residual: f64 = 0.0;
    for (k, a) in run.states.iter().enumerate() {
        let t = run.grid.time(k);
        let u = u_view.apply(t, a)?;
        input_residual =
            input_residual.max((&u - problem.target.derivative(0, t - problem.start)?).norm());
        ubar.push(u);
        ybar.push(y_view.apply(t, a)?);
    }
    let tau_grid = TimeGrid::new(0.0, problem.step, run.states.len())?;
    let alpha = AlphaTrajectory::with_derivative(
        columns_to_trajectory(run.grid, &run.states)?,
        columns_to_trajectory(run.grid, &run.slopes)?,
    )?;
    Ok(SimulationResult {
        alpha,
        ybar: columns_to_trajectory(tau_grid, &ybar)?,
        ubar_reconstructed: columns_to_trajectory(tau_grid, &ubar)?,
        init_residual,
        ode_residual_sup: run.ode_residual_sup,
        input_residual,
        max_stage_residual: run.max_stage_residual,
        rank_ok: run.rank_ok,
        mode,
    })
}

/// Integrates with the pseudoinverse form; fails on a rank drop of the
/// reduced matrix.
pub fn integrate_explicit(problem: &SimulationProblem) -> Result<SimulationResult> {
    run_mode(problem, Mode::Explicit)
}

/// Integrates with per-stage least-squares solves; works without full row
/// rank as long as each stage system is consistent.
pub fn integrate_implicit_lsq(problem: &SimulationProblem) -> Result<SimulationResult> {
    run_mode(problem, Mode::ImplicitLsq)
}

/// Runs `problem` in its configured mode.
pub fn run(problem: &SimulationProblem) -> Result<SimulationResult> {
    run_mode(problem, problem.mode)
}

/// Like [`run`], but only on data whose informativity has been established.
pub fn simulate(
    problem: &SimulationProblem,
    report: &InformativityReport,
) -> Result<SimulationResult> {
    if !report.is_informative() {
        return Err(Error::NotInformative(report.summary_line()));
    }
    run(problem)
}

/// State-based simulation from input-state data with rows `u, u', x`:
/// `[H(u); H(x)] alpha' = [ubar' - H(u') alpha; 0]`, started from
/// `[H(u)(0); H(x)(0)] alpha(0) = [ubar(0); x_init]`.
#[derive(Clone)]
pub struct StateSimulationProblem {
    /// View over layers `u`, `u'` and `x` (kinds input and state).
    pub data: DataMatrixView,
    pub target: Arc<dyn SmoothSignal>,
    pub x_init: DVector<f64>,
    pub horizon: f64,
    pub step: f64,
    pub start: f64,
    pub mode: Mode,
    pub rel_tol: f64,
    pub init_tol: f64,
    pub stage_tol: f64,
}

#[derive(Debug, Clone)]
pub struct StateSimulationResult {
    pub alpha: AlphaTrajectory,
    /// `H(x) alpha` on simulation time.
    pub xbar: Trajectory,
    pub ubar_reconstructed: Trajectory,
    pub init_residual: f64,
    pub ode_residual_sup: f64,
    pub input_residual: f64,
}

pub fn simulate_state_based(problem: &StateSimulationProblem) -> Result<StateSimulationResult> {
    let u_key = LayerKey::input(0);
    let x_key = LayerKey::new(SignalKind::State, 0);
    let lhs = problem.data.select(&[u_key, x_key])?;
    let drive = problem.data.select(&[LayerKey::input(1)])?;
    let m = lhs.block_range(u_key).map_or(0, |r| r.len());
    if problem.target.channels() != m {
        return Err(Error::Dimension(format!(
            "target input has {} channels, data input has {m}",
            problem.target.channels()
        )));
    }
    if problem.x_init.len() != lhs.rows() - m {
        return Err(Error::Dimension(format!(
            "x_init needs {} entries, got {}",
            lhs.rows() - m,
            problem.x_init.len()
        )));
    }
    let (lo, hi) = lhs.window();
    let slack = SNAP_TOL * lhs.grid().dt();
    if !(problem.start >= lo - slack && problem.start + problem.horizon <= hi + slack) {
        return Err(Error::InvalidArgument(format!(
            "simulation span [{}, {}] leaves the usable data window [{lo}, {hi}]",
            problem.start,
            problem.start + problem.horizon
        )));
    }
    let steps = (problem.horizon / problem.step).round() as usize;

    let mut rhs0 = DVector::zeros(lhs.rows());
    rhs0.rows_mut(0, m)
        .copy_from(&problem.target.derivative(0, 0.0)?);
    rhs0.rows_mut(m, problem.x_init.len())
        .copy_from(&problem.x_init);
    let stack = lhs.stacked_eval(problem.start)?;
    let alpha0 = min_norm_lstsq(&stack, &rhs0, problem.rel_tol)?;
    let init_residual = (&stack * &alpha0 - &rhs0).norm();
    if !init_residual.is_finite() || init_residual > problem.init_tol {
        return Err(Error::InconsistentInitialConditions {
            residual: init_residual,
            tol: problem.init_tol,
        });
    }

    let system = CoefficientSystem {
        lhs,
        drive,
        drive_rows: 0..m,
        target: problem.target.as_ref(),
        target_order: 1,
        start: problem.start,
    };
    let run = integrate(
        &system,
        alpha0,
        problem.mode,
        problem.step,
        steps,
        problem.rel_tol,
        problem.stage_tol,
    )?;
    let u_view = problem.data.select(&[u_key])?;
    let x_view = problem.data.select(&[x_key])?;
    let mut ubar = Vec::with_capacity(run.states.len());
    let mut xbar = Vec::with_capacity(run.states.len());
    let mut input_residual: f64 = 0.0;
    for (k, a) in run.states.iter().enumerate() {
        let t = run.grid.time(k);
        let u = u_view.apply(t, a)?;
        input_residual =
            input_residual.max((&u - problem.target.derivative(0, t - problem.start)?).norm());
        ubar.push(u);
        xbar.push(x_view.apply(t, a)?);
    }
    let tau_grid = TimeGrid::new(0.0, problem.step, run.states.len())?;
    Ok(StateSimulationResult {
        alpha: AlphaTrajectory::with_derivative(
            columns_to_trajectory(run.grid, &run.states)?,
            columns_to_trajectory(run.grid, &run.slopes)?,
        )?,
        xbar: columns_to_trajectory(tau_grid, &xbar)?,
        ubar_reconstructed: columns_to_trajectory(tau_grid, &ubar)?,
        init_residual,
        ode_residual_sup: run.ode_residual_sup,
        input_residual,
    })
}
