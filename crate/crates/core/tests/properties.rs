use jetsim_core::datamatrix::{hankel_eval, DataMatrixView, RowSelector, ShiftSpec};
use jetsim_core::io::{read_jet_csv, write_jet_csv};
use jetsim_core::linalg::numerical_rank;
use jetsim_core::representation::{generate_jet, AlphaTrajectory};
use jetsim_core::signals::{JetTrajectory, SignalJet, TimeGrid, Trajectory};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const DT: f64 = 0.01;
const COUNT: usize = 400;

fn grid() -> TimeGrid {
    TimeGrid::new(0.0, DT, COUNT).unwrap()
}

/// Sinusoid `a sin(w t + phi)` and its first `order` derivatives.
fn sine_jet(a: f64, w: f64, phi: f64, order: usize) -> SignalJet {
    let layers = (0..=order)
        .map(|i| {
            let shift = phi + i as f64 * std::f64::consts::FRAC_PI_2;
            Trajectory::from_fn(grid(), 1, |t, out| out[0] = a * w.powi(i as i32) * (w * t + shift).sin()).unwrap()
        })
        .collect();
    SignalJet::new(layers).unwrap()
}

fn sample_jet(params: [f64; 4]) -> JetTrajectory {
    let [w1, w2, p1, p2] = params;
    JetTrajectory::new(sine_jet(1.0, w1, p1, 1), sine_jet(0.7, w2, p2, 1)).unwrap()
}

fn spec() -> ShiftSpec {
    ShiftSpec::new(4, 0.2).unwrap()
}

fn jet_params() -> impl Strategy<Value = [f64; 4]> {
    (0.5f64..4.0, 0.5f64..4.0, 0.0f64..6.0, 0.0f64..6.0).prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interpolation_is_exact_at_grid_points(values in prop::collection::vec(-1e3f64..1e3, 2 * 20), k in 0usize..20) {
        let grid = TimeGrid::new(-1.0, 0.05, 20).unwrap();
        let traj = Trajectory::new(grid, DMatrix::from_vec(2, 20, values)).unwrap();
        prop_assert_eq!(traj.eval_at(grid.time(k)).unwrap(), traj.sample(k).into_owned());
    }

    #[test]
    fn rank_ignores_column_order(
        left in prop::collection::vec(-1.0f64..1.0, 6 * 3),
        right in prop::collection::vec(-1.0f64..1.0, 3 * 8),
        seed in any::<u64>(),
    ) {
        let a = DMatrix::from_vec(6, 3, left) * DMatrix::from_vec(3, 8, right);
        let mut order: Vec<usize> = (0..8).collect();
        // Fisher-Yates driven by the seed.
        let mut s = seed;
        for i in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted = DMatrix::from_fn(6, 8, |r, c| a[(r, order[c])]);
        prop_assert_eq!(numerical_rank(&a, 1e-10).unwrap(), numerical_rank(&permuted, 1e-10).unwrap());
    }

    #[test]
    fn stacked_matrix_scales_with_the_data(params in jet_params(), c in -5.0f64..5.0, t in 0.1f64..2.5) {
        let view = DataMatrixView::new(&sample_jet(params), spec(), RowSelector::Full(1)).unwrap();
        let scaled = view.scaled(c).stacked_eval(t).unwrap();
        let expected = view.stacked_eval(t).unwrap() * c;
        prop_assert!((scaled - expected).amax() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn hankel_columns_are_shifted_samples(params in jet_params(), t in 0.0f64..2.5) {
        let jet = sample_jet(params);
        let u = jet.input().layer(0).unwrap();
        let h = hankel_eval(u, spec(), t).unwrap();
        for j in 0..h.ncols() {
            let direct = u.eval_at(t + j as f64 * spec().period()).unwrap();
            prop_assert!((h.column(j) - direct).amax() <= 1e-12);
        }
    }

    #[test]
    fn generated_jets_are_linear_in_alpha(
        params in jet_params(),
        x in prop::collection::vec(-2.0f64..2.0, 5),
        z in prop::collection::vec(-2.0f64..2.0, 5),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let view = DataMatrixView::new(&sample_jet(params), spec(), RowSelector::Full(1)).unwrap();
        let eval = TimeGrid::new(0.5, DT, 50).unwrap();
        let (x, z) = (DVector::from_vec(x), DVector::from_vec(z));
        let gen = |v: &DVector<f64>| {
            let alpha = AlphaTrajectory::constant(grid(), v).unwrap();
            generate_jet(&view, &alpha, eval).unwrap()
        };
        let combined = gen(&(&x * a + &z * b));
        let (jx, jz) = (gen(&x), gen(&z));
        for ((_, _, lc), ((_, _, lx), (_, _, lz))) in combined.layers().zip(jx.layers().zip(jz.layers())) {
            let expected = lx.values() * a + lz.values() * b;
            prop_assert!((lc.values() - expected).amax() <= 1e-11);
        }
    }

    #[test]
    fn jet_csv_round_trips_exactly(params in jet_params()) {
        let jet = sample_jet(params);
        let mut buf = Vec::new();
        write_jet_csv(&jet, &mut buf).unwrap();
        let back = read_jet_csv(buf.as_slice()).unwrap();
        for ((_, _, a), (_, _, b)) in jet.layers().zip(back.layers()) {
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
