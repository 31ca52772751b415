use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use jetsim_core::datamatrix::{suggest_shifts, DataMatrixView, RowSelector, ShiftSpec};
use jetsim_core::informativity::{check_informativity, probe_times, InformativityReport, DEFAULT_PROBES};
use jetsim_core::io::{
    channel_names, read_jet_csv, read_table, signal_jet_from_table, write_jet_csv, write_signal_jet_csv,
    write_trajectory_csv, Table,
};
use jetsim_core::oracle::{make_random_system, simulate_exact, AnalyticInput};
use jetsim_core::signals::{build_jet, DerivativeSource, DiffMethod, JetTrajectory, SmoothSignal, TimeGrid, Trajectory};
use jetsim_core::simulator::{self, Mode, SimulationProblem, DEFAULT_INIT_TOL, DEFAULT_STAGE_TOL};
use nalgebra::{DMatrix, DVector};

use crate::config::{format_vector, Settings};
use crate::failure::Failure;
use crate::plot::{self, Series};

const DEFAULT_REL_TOL: f64 = 1e-8;

type Outcome = Result<(), Failure>;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn finish(mut out: BufWriter<File>, path: &Path) -> Outcome {
    out.flush().map_err(|e| Failure::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> jetsim_core::Result<()>) -> Outcome {
    let mut out = create(path)?;
    f(&mut out).map_err(|e| Failure::from(e).in_file(path))?;
    finish(out, path)
}

fn table(path: &Path) -> Result<Table, Failure> {
    read_table(open(path)?).map_err(|e| Failure::from(e).in_file(path))
}

fn zeros_or(settings: &Settings, name: &str, n: usize) -> Result<DVector<f64>, Failure> {
    let v = settings.vector(name)?.unwrap_or_else(|| DVector::zeros(n));
    if v.len() != n {
        return Err(Failure::validation(format!("`{name}` has {} entries, expected n = {n}", v.len())));
    }
    Ok(v)
}

fn at_least_one(settings: &Settings, name: &str, default: usize) -> Result<usize, Failure> {
    let v = settings.get_or(name, default)?;
    if v == 0 {
        return Err(Failure::validation(format!("`{name}` must be at least 1")));
    }
    Ok(v)
}

/// Largest multiple of `dt`, at least `dt`, not above `value`.
fn snap_down(value: f64, dt: f64) -> f64 {
    (value / dt).floor().max(1.0) * dt
}

pub fn generate(settings: &Settings) -> Outcome {
    let seed: u64 = settings.get_or("seed", 42)?;
    let n = at_least_one(settings, "n", 2)?;
    let m = at_least_one(settings, "m", 1)?;
    let p = at_least_one(settings, "p", 1)?;
    let dt = settings.positive("dt", Some(1e-3))?;
    let duration = settings.positive("duration", Some(10.0))?;
    let frequencies = at_least_one(settings, "frequencies", 6)?;
    let input_kind = settings.get_or("input", "multisine".to_string())?;
    let x0 = zeros_or(settings, "x0", n)?;
    let horizon = settings.positive("horizon", Some(2.0))?;
    let step = settings.positive("step", Some(dt))?;
    let target_seed: u64 = settings.get_or("target_seed", 7)?;
    let target_frequencies = at_least_one(settings, "target_frequencies", 4)?;
    let target_x0 = zeros_or(settings, "target_x0", n)?;
    let mode: Mode = settings.get_or("mode", Mode::Explicit)?;
    let out_dir = settings.path("out_dir").unwrap_or_else(|| PathBuf::from("."));
    if !out_dir.is_dir() {
        return Err(Failure::new(2, "io", format!("{}: output directory does not exist", out_dir.display())));
    }

    let model = make_random_system(n, m, p, seed)?;
    let lag = model.lag();
    let order = settings.get_or("order", lag)?;
    let shifts = settings.get_or("shifts", suggest_shifts(m, order, n))?;
    if shifts == 0 {
        return Err(Failure::validation("`shifts` must be at least 1"));
    }
    let period = match settings.get::<f64>("period")? {
        Some(_) => settings.positive("period", None)?,
        None => snap_down(duration / (2 * shifts) as f64, dt),
    };
    let input = match input_kind.as_str() {
        "multisine" => AnalyticInput::incommensurate_multisine(m, frequencies)?,
        "constant" => AnalyticInput::constant(&vec![1.0; m])?,
        other => return Err(Failure::validation(format!("unknown input `{other}`, expected multisine | constant"))),
    };

    let data = simulate_exact(&model, &input, &x0, TimeGrid::spanning(0.0, dt, duration)?, order + 1)?;
    let target = AnalyticInput::random_multisine(m, target_frequencies, target_seed)?;
    let truth = simulate_exact(&model, &target, &target_x0, TimeGrid::spanning(0.0, dt, horizon)?, order + 1)?;

    let file = |name: &str| out_dir.join(name);
    write_with(&file("model.txt"), |w| model.write_text(w))?;
    let mut names = channel_names("u", m);
    names.extend(channel_names("y", p));
    let raw = Trajectory::new(*data.u.grid(), stack(&data.u, &data.y))?;
    write_with(&file("data.csv"), |w| write_trajectory_csv(&raw, &names, w))?;
    write_with(&file("jet.csv"), |w| write_jet_csv(&data.jet, w))?;
    write_with(&file("target_jet.csv"), |w| write_signal_jet_csv(truth.jet.input(), "u", w))?;
    write_with(&file("truth.csv"), |w| write_trajectory_csv(&truth.y, &channel_names("y", p), w))?;

    let y_init: Vec<String> = (0..=order)
        .map(|i| format_vector(&truth.jet.output().layers()[i].sample(0).into_owned()))
        .collect();
    let problem = [
        "# dataset and target written by `jetsim generate`".to_string(),
        "model = model.txt".into(),
        "jet = jet.csv".into(),
        "target = target_jet.csv".into(),
        "truth = truth.csv".into(),
        format!("n = {n}"),
        format!("order = {order}"),
        format!("shifts = {shifts}"),
        format!("period = {period:e}"),
        format!("horizon = {horizon:e}"),
        format!("step = {step:e}"),
        format!("mode = {mode}"),
        format!("y_init = {}", y_init.join(";")),
    ];
    let path = file("problem.txt");
    let mut out = create(&path)?;
    for line in problem {
        writeln!(out, "{line}").map_err(|e| Failure::io(&path, e))?;
    }
    finish(out, &path)?;

    println!("lag={lag}");
    println!("suggested order={order} shifts={shifts} period={period:e}");
    println!("wrote model.txt data.csv jet.csv target_jet.csv truth.csv problem.txt to {}", out_dir.display());
    Ok(())
}

fn stack(a: &Trajectory, b: &Trajectory) -> DMatrix<f64> {
    let mut values = DMatrix::zeros(a.channels() + b.channels(), a.grid().count());
    values.rows_mut(0, a.channels()).copy_from(a.values());
    values.rows_mut(a.channels(), b.channels()).copy_from(b.values());
    values
}

/// Jet of at least `order`, read from `jet` or estimated from `data`.
fn load_jet(settings: &Settings, order: usize) -> Result<JetTrajectory, Failure> {
    if let Some(path) = settings.path("jet") {
        let jet = read_jet_csv(open(&path)?).map_err(|e| Failure::from(e).in_file(&path))?;
        if jet.order() < order {
            return Err(Failure::validation(format!(
                "{}: jet has order {}, need {order}",
                path.display(),
                jet.order()
            )));
        }
        return Ok(jet);
    }
    let path = settings
        .path("data")
        .ok_or_else(|| Failure::validation("one of `jet` or `data` is required"))?;
    let method: DiffMethod = settings.get_or("derivative_method", DiffMethod::Central4)?;
    let raw = table(&path)?;
    let u = raw.prefixed("u").map_err(|e| Failure::from(e).in_file(&path))?;
    let y = raw.prefixed("y").map_err(|e| Failure::from(e).in_file(&path))?;
    Ok(build_jet(u, y, order, DerivativeSource::Estimated(method))?)
}

struct DataSetup {
    jet: JetTrajectory,
    n: usize,
    order: usize,
    spec: ShiftSpec,
    rel_tol: f64,
    probes: usize,
}

fn data_setup(settings: &Settings, extra_order: usize) -> Result<DataSetup, Failure> {
    let n: usize = settings.require("n")?;
    if n == 0 {
        return Err(Failure::validation("`n` must be at least 1"));
    }
    let order: usize = settings.require("order")?;
    let period = settings.positive("period", None)?;
    let rel_tol = settings.positive("rel_tol", Some(DEFAULT_REL_TOL))?;
    let probes = at_least_one(settings, "probes", DEFAULT_PROBES)?;
    let jet = load_jet(settings, order + extra_order)?;
    let shifts = settings.get_or("shifts", suggest_shifts(jet.inputs(), order, n))?;
    let spec = ShiftSpec::new(shifts, period)?;
    Ok(DataSetup { jet, n, order, spec, rel_tol, probes })
}

fn informativity(setup: &DataSetup) -> Result<InformativityReport, Failure> {
    let view = DataMatrixView::new(&setup.jet, setup.spec, RowSelector::Full(setup.order))?;
    let times = probe_times(&view, setup.probes)?;
    Ok(check_informativity(&view, setup.n, &times, setup.rel_tol)?)
}

pub fn check(settings: &Settings) -> Outcome {
    let setup = data_setup(settings, 0)?;
    let report = informativity(&setup)?;
    if let Some(path) = settings.path("report") {
        write_with(&path, |w| report.write_csv(w))?;
    }
    println!("{}", report.summary_line());
    if !report.is_informative() {
        return Err(Failure::new(3, "not_informative", format!("verdict {}", report.verdict)));
    }
    Ok(())
}

pub fn simulate(settings: &Settings) -> Outcome {
    let setup = data_setup(settings, 1)?;
    let horizon: f64 = settings.require("horizon")?;
    let step = settings.positive("step", Some(setup.jet.grid().dt()))?;
    let mode: Mode = settings.get_or("mode", Mode::Explicit)?;
    let init_tol = settings.positive("init_tol", Some(DEFAULT_INIT_TOL))?;
    let stage_tol = settings.positive("stage_tol", Some(DEFAULT_STAGE_TOL))?;
    let start: Option<f64> = settings.get("start")?;
    let y_init = settings
        .vectors("y_init")?
        .ok_or_else(|| Failure::validation("missing setting `y_init` (flag --y-init)"))?;
    let u_init = settings.vectors("u_init")?;
    let out = settings.path("out").unwrap_or_else(|| PathBuf::from("result.csv"));
    let force = settings.flag("force")?;
    let target_path = settings
        .path("target")
        .ok_or_else(|| Failure::validation("missing setting `target` (flag --target)"))?;
    let target = signal_jet_from_table(&table(&target_path)?, "u").map_err(|e| Failure::from(e).in_file(&target_path))?;
    let truth = settings
        .path("truth")
        .map(|path| -> Result<_, Failure> {
            let t = table(&path)?;
            Ok(Trajectory::new(t.grid, t.values)?)
        })
        .transpose()?;

    let target: Arc<dyn SmoothSignal> = Arc::new(target);
    let mut problem = SimulationProblem::new(&setup.jet, setup.spec, setup.order, target, y_init, horizon, step)?
        .with_mode(mode)
        .with_rel_tol(setup.rel_tol)
        .with_init_tol(init_tol)
        .with_stage_tol(stage_tol);
    if let Some(u_init) = u_init {
        problem = problem.with_u_init(u_init);
    }
    if let Some(start) = start {
        problem = problem.with_start(start);
    }
    problem.validate()?;

    let clock = Instant::now();
    let result = if force {
        simulator::run(&problem)?
    } else {
        simulator::simulate(&problem, &informativity(&setup)?)?
    };
    let elapsed = clock.elapsed();

    write_with(&out, |w| result.write_csv(w))?;
    for line in result.summary_lines() {
        println!("{line}");
    }
    if let Some(truth) = &truth {
        let errors = channel_errors(&result.ybar, truth)?;
        let worst = errors.iter().map(|e| e.sup_rel).fold(0.0, f64::max);
        println!("rel_sup_error={worst:e}");
    }
    println!("wall_time_s={:.3}", elapsed.as_secs_f64());

    if let Some(path) = settings.path("plot") {
        let mut series = Vec::new();
        for j in 0..result.ybar.channels() {
            series.push(Series::from_trajectory(format!("ybar_{}", j + 1), &result.ybar, j, false));
            if let Some(truth) = truth.as_ref().filter(|t| j < t.channels()) {
                series.push(Series::from_trajectory(format!("truth_{}", j + 1), truth, j, true));
            }
        }
        let mut w = create(&path)?;
        plot::line_chart("simulated output", "t", &series, &mut w).map_err(|e| Failure::io(&path, e))?;
        finish(w, &path)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelError {
    pub sup_abs: f64,
    pub sup_rel: f64,
    pub rms_rel: f64,
    pub samples: usize,
}

/// Per-channel errors of `result` against `truth` on the coarser of the two
/// grids, restricted to their overlap. The step ratio must be an integer.
pub fn channel_errors(result: &Trajectory, truth: &Trajectory) -> Result<Vec<ChannelError>, Failure> {
    if result.channels() != truth.channels() {
        return Err(Failure::validation(format!(
            "result has {} output channels, truth has {}",
            result.channels(),
            truth.channels()
        )));
    }
    let (coarse, fine) = if result.grid().dt() >= truth.grid().dt() {
        (result.grid(), truth.grid())
    } else {
        (truth.grid(), result.grid())
    };
    let ratio = coarse.dt() / fine.dt();
    if (ratio - ratio.round()).abs() > 1e-9 * ratio {
        return Err(Failure::validation(format!(
            "steps {:e} and {:e} are not in an integer ratio",
            result.grid().dt(),
            truth.grid().dt()
        )));
    }
    let (lo, hi) = (coarse.t0().max(fine.t0()), coarse.end().min(fine.end()));
    let slack = 1e-9 * coarse.dt();
    let times: Vec<f64> = coarse.times().filter(|&t| t >= lo - slack && t <= hi + slack).collect();
    if times.is_empty() {
        return Err(Failure::validation("result and truth do not overlap in time"));
    }
    let p = result.channels();
    let mut sup = vec![0.0f64; p];
    let mut scale = vec![0.0f64; p];
    let mut err_sq = vec![0.0f64; p];
    let mut ref_sq = vec![0.0f64; p];
    for &t in &times {
        let t = t.clamp(lo, hi);
        let (a, b) = (result.eval_at(t)?, truth.eval_at(t)?);
        for j in 0..p {
            let e = (a[j] - b[j]).abs();
            sup[j] = sup[j].max(e);
            scale[j] = scale[j].max(b[j].abs());
            err_sq[j] += e * e;
            ref_sq[j] += b[j] * b[j];
        }
    }
    let ratio_or_abs = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    Ok((0..p)
        .map(|j| ChannelError {
            sup_abs: sup[j],
            sup_rel: ratio_or_abs(sup[j], scale[j]),
            rms_rel: ratio_or_abs(err_sq[j].sqrt(), ref_sq[j].sqrt()),
            samples: times.len(),
        })
        .collect())
}

/// Output channels of a result (`ybar_*`) or truth (`y*`) table.
fn output_channels(path: &Path) -> Result<Trajectory, Failure> {
    let t = table(path)?;
    let prefix = if t.columns.iter().any(|c| c.starts_with("ybar_")) { "ybar_" } else { "y" };
    t.prefixed(prefix).map_err(|e| Failure::from(e).in_file(path))
}

pub fn compare(settings: &Settings) -> Outcome {
    let result_path = settings
        .path("result")
        .ok_or_else(|| Failure::validation("missing setting `result` (flag --result)"))?;
    let truth_path = settings
        .path("truth")
        .ok_or_else(|| Failure::validation("missing setting `truth` (flag --truth)"))?;
    let errors = channel_errors(&output_channels(&result_path)?, &output_channels(&truth_path)?)?;
    let mut lines = Vec::new();
    for (j, e) in errors.iter().enumerate() {
        lines.push(format!(
            "channel={} sup_abs={:e} sup_rel={:e} rms_rel={:e} samples={}",
            j + 1,
            e.sup_abs,
            e.sup_rel,
            e.rms_rel,
            e.samples
        ));
    }
    let worst = errors.iter().map(|e| e.sup_rel).fold(0.0, f64::max);
    lines.push(format!("max_sup_rel={worst:e}"));
    for line in &lines {
        println!("{line}");
    }
    if let Some(path) = settings.path("out") {
        let mut w = create(&path)?;
        for line in &lines {
            writeln!(w, "{line}").map_err(|e| Failure::io(&path, e))?;
        }
        finish(w, &path)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(dt: f64, count: usize, f: impl Fn(f64) -> f64) -> Trajectory {
        let grid = TimeGrid::new(0.0, dt, count).unwrap();
        Trajectory::from_fn(grid, 1, |t, out| out[0] = f(t)).unwrap()
    }

    #[test]
    fn identical_trajectories_have_zero_error() {
        let a = traj(0.1, 11, f64::sin);
        let e = channel_errors(&a, &a).unwrap();
        assert_eq!(e[0].sup_abs, 0.0);
        assert_eq!(e[0].rms_rel, 0.0);
    }

    #[test]
    fn integer_step_ratio_resamples_onto_the_coarse_grid() {
        let fine = traj(0.05, 21, |t| t);
        let coarse = traj(0.1, 11, |t| t + 0.5);
        let e = channel_errors(&coarse, &fine).unwrap();
        assert_eq!(e[0].samples, 11);
        assert!((e[0].sup_abs - 0.5).abs() < 1e-12);
        assert!((e[0].sup_rel - 0.5).abs() < 1e-12);
        assert!(channel_errors(&traj(0.03, 30, |t| t), &fine).is_err());
    }

    #[test]
    fn snap_down_keeps_at_least_one_step() {
        assert_eq!(snap_down(1e-4, 1e-3), 1e-3);
        assert!((snap_down(0.5556, 1e-3) - 0.555).abs() < 1e-12);
    }
}
