//! Input-output differential equations of a state-space model, obtained by
//! eliminating the state from its jet.

use nalgebra::DMatrix;

use super::model::StateSpaceModel;
use crate::linalg::left_null_space;
use crate::signals::JetTrajectory;
use crate::{Error, Result};

/// Orthonormal rows `[eta_0 .. eta_L, theta_0 .. theta_L]` spanning every
/// order-`order` differential equation satisfied by the model's trajectories.
///
/// The jet of any trajectory is `G [x; u; ..; u^(L)]` with
/// `y^(i) = C A^i x + sum_{j<i} C A^(i-1-j) B u^(j) + D u^(i)`; the
/// annihilators are the left null space of `G`.
pub fn kernel_basis(model: &StateSpaceModel, order: usize) -> Result<DMatrix<f64>> {
    if order < model.lag() {
        return Err(Error::InvalidArgument(format!(
            "jet order {order} is below the model lag {}",
            model.lag()
        )));
    }
    let (n, m, p) = (model.states(), model.inputs(), model.outputs());
    let blocks = order + 1;
    let mut g = DMatrix::zeros((m + p) * blocks, n + m * blocks);
    g.view_mut((0, n), (m * blocks, m * blocks))
        .fill_with_identity();
    let mut markov = Vec::with_capacity(blocks); // C A^k B
    let mut ca = model.c().clone();
    for _ in 0..blocks {
        markov.push(&ca * model.b());
        ca = &ca * model.a();
    }
    let obs = model.observability_matrix(blocks);
    for i in 0..blocks {
        let row = m * blocks + i * p;
        g.view_mut((row, 0), (p, n)).copy_from(&obs.rows(i * p, p));
        for j in 0..i {
            g.view_mut((row, n + j * m), (p, m))
                .copy_from(&markov[i - 1 - j]);
        }
        g.view_mut((row, n + i * m), (p, m)).copy_from(model.d());
    }
    left_null_space(&g, 1e-10)
}

/// Sup over the jet's samples of the Euclidean norm of the model's
/// input-output equations applied to the jet.
pub fn kernel_residual(model: &StateSpaceModel, jet: &JetTrajectory) -> Result<f64> {
    if jet.inputs() != model.inputs() || jet.outputs() != model.outputs() {
        return Err(Error::Dimension(format!(
            "jet has {} inputs and {} outputs, model has {} and {}",
            jet.inputs(),
            jet.outputs(),
            model.inputs(),
            model.outputs()
        )));
    }
    let basis = kernel_basis(model, jet.order())?;
    let mut worst: f64 = 0.0;
    for t in jet.grid().times() {
        worst = worst.max((&basis * jet.value_at(t)?).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{make_random_system, simulate_exact, AnalyticInput};
    use crate::signals::{SignalJet, TimeGrid};
    use nalgebra::DVector;

    fn run(order: usize) -> (StateSpaceModel, JetTrajectory) {
        let model = make_random_system(2, 1, 1, 42).unwrap();
        let grid = TimeGrid::spanning(0.0, 1e-2, 5.0).unwrap();
        let input = AnalyticInput::incommensurate_multisine(1, 4).unwrap();
        let r = simulate_exact(
            &model,
            &input,
            &DVector::from_vec(vec![1.0, -0.5]),
            grid,
            order,
        )
        .unwrap();
        (model, r.jet)
    }

    #[test]
    fn basis_dimension_is_p_times_blocks_minus_n() {
        let model = make_random_system(3, 2, 2, 11).unwrap();
        let k = kernel_basis(&model, 3).unwrap();
        assert_eq!(k.nrows(), 2 * 4 - 3);
        assert!(kernel_basis(&model, model.lag() - 1).is_err());
    }

    #[test]
    fn exact_jets_satisfy_the_kernel() {
        let (model, jet) = run(2);
        assert!(kernel_residual(&model, &jet).unwrap() < 1e-8);
    }

    #[test]
    fn scaled_output_violates_the_kernel() {
        let (model, jet) = run(2);
        let (u, y) = jet.into_parts();
        let y2 = SignalJet::new(y.layers().iter().map(|l| l.scaled(2.0)).collect()).unwrap();
        let bad = JetTrajectory::new(u, y2).unwrap();
        assert!(kernel_residual(&model, &bad).unwrap() > 1e-2);
    }

    #[test]
    fn zero_jet_has_zero_residual() {
        let (model, jet) = run(2);
        let (u, y) = jet.into_parts();
        let zero = |j: &SignalJet| {
            SignalJet::new(j.layers().iter().map(|l| l.scaled(0.0)).collect()).unwrap()
        };
        let z = JetTrajectory::new(zero(&u), zero(&y)).unwrap();
        assert_eq!(kernel_residual(&model, &z).unwrap(), 0.0);
    }
}
