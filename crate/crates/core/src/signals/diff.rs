//! Finite-difference derivative estimation on uniform grids.

use nalgebra::DMatrix;

use super::trajectory::Trajectory;
use crate::{Error, Result};

/// Derivative estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffMethod {
    /// Fourth-order accurate central differences, with fourth-order one-sided
    /// stencils near the ends of the grid.
    #[default]
    Central4,
    /// Reserved for a spectral estimator; not implemented.
    SpectralFree,
}

impl std::str::FromStr for DiffMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central4" => Ok(Self::Central4),
            "spectral_free" => Ok(Self::SpectralFree),
            other => Err(Error::InvalidArgument(format!(
                "unknown derivative method `{other}`"
            ))),
        }
    }
}

/// Fornberg's recursion: weights of the `order`-th derivative at `z` for a
/// polynomial interpolant through `nodes`.
pub fn fd_weights(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Half-width of the fourth-order central stencil for derivative `order`.
pub fn central4_half_width(order: usize) -> usize {
    (order + 3) / 2
}

/// Smallest sample count for which [`differentiate`] accepts `order`.
pub fn central4_min_samples(order: usize) -> usize {
    (2 * central4_half_width(order) + 1).max(order + 4)
}

/// Estimates the `order`-th derivative of every channel on the same grid.
///
/// The returned trajectory's boundary band grows by the stencil half-width.
pub fn differentiate(traj: &Trajectory, order: usize, method: DiffMethod) -> Result<Trajectory> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "derivative order must be at least 1".into(),
        ));
    }
    if method == DiffMethod::SpectralFree {
        return Err(Error::Unsupported(
            "spectral_free derivative estimation".into(),
        ));
    }
    let count = traj.grid().count();
    let needed = central4_min_samples(order);
    if count < needed {
        return Err(Error::InsufficientData {
            needed,
            available: count,
        });
    }
    let r = central4_half_width(order);
    let scale = traj.grid().dt().powi(order as i32).recip();
    let values = traj.values();
    let mut out = DMatrix::zeros(traj.channels(), count);

    let central_nodes: Vec<f64> = (-(r as i64)..=r as i64).map(|o| o as f64).collect();
    let central = fd_weights(0.0, &central_nodes, order);
    for k in r..count - r {
        let mut col = out.column_mut(k);
        for (j, w) in central.iter().enumerate() {
            col.axpy(w * scale, &values.column(k + j - r), 1.0);
        }
    }

    let width = order + 4;
    let one_sided: Vec<f64> = (0..width).map(|o| o as f64).collect();
    let edge = |k: usize, start: usize, out: &mut DMatrix<f64>| {
        let w = fd_weights((k - start) as f64, &one_sided, order);
        let mut col = out.column_mut(k);
        for (j, wj) in w.iter().enumerate() {
            col.axpy(wj * scale, &values.column(start + j), 1.0);
        }
    };
    for k in 0..r {
        edge(k, 0, &mut out);
    }
    for k in count - r..count {
        edge(k, count - width, &mut out);
    }

    Ok(Trajectory::new(*traj.grid(), out)?
        .with_interp(traj.interp_order())
        .with_boundary_band(traj.boundary_band() + r))
}
