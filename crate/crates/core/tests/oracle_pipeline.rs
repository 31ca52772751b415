use std::sync::Arc;

use jetsim_core::datamatrix::{DataMatrixView, RowSelector, ShiftSpec};
use jetsim_core::informativity::{check_informativity, probe_times};
use jetsim_core::oracle::{kernel_basis, make_random_system, simulate_exact, AnalyticInput, ExactRun, StateSpaceModel};
use jetsim_core::signals::{SmoothSignal, TimeGrid};
use jetsim_core::simulator::{integrate_explicit, integrate_implicit_lsq, SimulationProblem};
use jetsim_core::Error;
use nalgebra::DVector;

const DT: f64 = 1e-3;

fn model() -> StateSpaceModel {
    make_random_system(2, 1, 1, 42).unwrap()
}

fn dataset(model: &StateSpaceModel, order: usize) -> ExactRun {
    let input = AnalyticInput::incommensurate_multisine(1, 6).unwrap();
    let grid = TimeGrid::spanning(0.0, DT, 8.0).unwrap();
    simulate_exact(model, &input, &DVector::from_vec(vec![0.5, -0.4]), grid, order).unwrap()
}

fn spec() -> ShiftSpec {
    ShiftSpec::new(10, 0.3).unwrap()
}

fn target() -> AnalyticInput {
    AnalyticInput::random_multisine(1, 4, 11).unwrap()
}

fn truth(model: &StateSpaceModel, horizon: f64, order: usize) -> ExactRun {
    let grid = TimeGrid::spanning(0.0, DT, horizon).unwrap();
    simulate_exact(model, &target(), &DVector::from_vec(vec![0.2, 0.1]), grid, order).unwrap()
}

#[test]
fn annihilator_vanishes_on_an_independent_trajectory() {
    let model = model();
    let order = 3;
    let data = dataset(&model, order);
    let view = DataMatrixView::new(&data.jet, spec(), RowSelector::Full(order)).unwrap();
    let times = probe_times(&view, 5).unwrap();
    let report = check_informativity(&view, 2, &times, 1e-8).unwrap();
    assert!(report.is_informative());
    let basis = report.annihilator_basis.expect("annihilator");
    assert_eq!(basis.nrows(), 2 * (order + 1) - (order + 1 + 2));

    let other = truth(&model, 1.0, order);
    for k in [0, 250, 500, 1000] {
        let w = other.jet.value_at(other.jet.grid().time(k)).unwrap();
        let residual = (&basis * &w).norm() / w.norm();
        assert!(residual < 1e-6, "k = {k}: {residual:e}");
    }
    // The annihilator spans the same space as the model's kernel.
    let kernel = kernel_basis(&model, order).unwrap();
    let projected = &kernel - &kernel * basis.transpose() * &basis;
    assert!(projected.amax() < 1e-6 * kernel.amax(), "{:e}", projected.amax());
}

#[test]
fn redundant_order_needs_the_least_squares_mode() {
    let model = model();
    let order = model.lag() + 1;
    let data = dataset(&model, order + 1);
    let horizon = 1.0;
    let exact = truth(&model, horizon, order);
    let y_init = (0..=order).map(|i| exact.jet.output().layer(i).unwrap().sample(0).into_owned()).collect();
    let signal: Arc<dyn SmoothSignal> = Arc::new(target());
    let problem = SimulationProblem::new(&data.jet, spec(), order, signal, y_init, horizon, DT).unwrap();

    match integrate_explicit(&problem) {
        Err(Error::RankDeficient { rank, rows, .. }) => assert!(rank < rows),
        other => panic!("expected a rank deficiency, got {other:?}"),
    }

    let result = integrate_implicit_lsq(&problem).unwrap();
    let scale = exact.y.values().amax();
    let err = (result.ybar.values() - exact.y.values()).amax() / scale;
    assert!(err < 1e-3, "relative error {err:e}");
    assert!(result.max_stage_residual.unwrap() < 1e-6);
}

#[test]
fn informativity_needs_a_rich_input() {
    let model = model();
    let grid = TimeGrid::spanning(0.0, DT, 8.0).unwrap();
    let x0 = DVector::from_vec(vec![0.5, -0.4]);
    let poor = simulate_exact(&model, &AnalyticInput::incommensurate_multisine(1, 1).unwrap(), &x0, grid, 2).unwrap();
    let view = DataMatrixView::new(&poor.jet, spec(), RowSelector::Full(2)).unwrap();
    let times = probe_times(&view, 5).unwrap();
    let report = check_informativity(&view, 2, &times, 1e-8).unwrap();
    assert!(!report.is_informative(), "{}", report.summary_line());
}
