//! Image-form description `u = D(d/dt) l`, `y = N(d/dt) l` of a
//! single-input single-output model, with a scalar latent variable `l`.

use nalgebra::{Complex, DMatrix, DVector};

use super::exact::simulate_exact;
use super::input::AnalyticInput;
use super::model::StateSpaceModel;
use crate::signals::{JetTrajectory, SignalJet, TimeGrid, Trajectory};
use crate::{Error, Result};

/// Polynomial image representation with coefficient matrices
/// `D_0..D_L` (m x d) and `N_0..N_L` (p x d).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFormModel {
    latent_dim: usize,
    d_coeffs: Vec<DMatrix<f64>>,
    n_coeffs: Vec<DMatrix<f64>>,
}

impl ImageFormModel {
    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    /// Highest derivative order of `l` in the representation.
    pub fn order(&self) -> usize {
        self.d_coeffs.len() - 1
    }

    pub fn d_coeffs(&self) -> &[DMatrix<f64>] {
        &self.d_coeffs
    }

    pub fn n_coeffs(&self) -> &[DMatrix<f64>] {
        &self.n_coeffs
    }

    /// `[D_0 .. D_L; N_0 .. N_L]`, mapping the stacked latent jet to `(u, y)`.
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        let m = self.d_coeffs[0].nrows();
        let p = self.n_coeffs[0].nrows();
        let d = self.latent_dim;
        let mut out = DMatrix::zeros(m + p, d * (self.order() + 1));
        for (i, (dc, nc)) in self.d_coeffs.iter().zip(&self.n_coeffs).enumerate() {
            out.view_mut((0, i * d), (m, d)).copy_from(dc);
            out.view_mut((m, i * d), (p, d)).copy_from(nc);
        }
        out
    }

    fn eval_poly(coeffs: &[DMatrix<f64>], s: Complex<f64>) -> Complex<f64> {
        coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, c| acc * s + c[(0, 0)])
    }

    /// `col(D(s), N(s))` has full column rank at `s`.
    pub fn full_rank_at(&self, s: Complex<f64>, tol: f64) -> bool {
        let d = Self::eval_poly(&self.d_coeffs, s);
        let n = Self::eval_poly(&self.n_coeffs, s);
        d.norm().max(n.norm()) > tol
    }
}

/// Coefficients of `det(sI - A)` in increasing degree, and the adjugate
/// coefficients `adj(sI - A) = sum_k M_k s^(n-1-k)` (Faddeev-LeVerrier).
fn faddeev_leverrier(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let mut charpoly = vec![0.0; n + 1];
    charpoly[n] = 1.0;
    let mut adj = Vec::with_capacity(n);
    let mut mk = DMatrix::identity(n, n);
    for k in 1..=n {
        adj.push(mk.clone());
        let am = a * &mk;
        let ck = -(am.trace()) / k as f64;
        charpoly[n - k] = ck;
        mk = am + DMatrix::identity(n, n) * ck;
    }
    (charpoly, adj)
}

/// Image form of a SISO model through its transfer function `N(s)/D(s)`,
/// `D(s) = det(sI - A)`.
pub fn make_image_form(model: &StateSpaceModel) -> Result<ImageFormModel> {
    if model.inputs() != 1 || model.outputs() != 1 {
        return Err(Error::Unsupported(
            "image forms are built for single-input single-output models only".into(),
        ));
    }
    let n = model.states();
    let (charpoly, adj) = faddeev_leverrier(model.a());
    let dfeed = model.d()[(0, 0)];
    let mut num: Vec<f64> = charpoly.iter().map(|c| dfeed * c).collect();
    for (k, mk) in adj.iter().enumerate() {
        num[n - 1 - k] += (model.c() * mk * model.b())[(0, 0)];
    }
    let img = ImageFormModel {
        latent_dim: 1,
        d_coeffs: charpoly
            .iter()
            .map(|&c| DMatrix::from_element(1, 1, c))
            .collect(),
        n_coeffs: num
            .iter()
            .map(|&c| DMatrix::from_element(1, 1, c))
            .collect(),
    };
    // Observability of l from (u, y): the only candidates for a rank drop are
    // the roots of D(s); random probe points guard against degenerate input.
    let scale = num
        .iter()
        .chain(&charpoly)
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let probes = model
        .a()
        .complex_eigenvalues()
        .iter()
        .copied()
        .chain([
            Complex::new(0.37, 1.3),
            Complex::new(-2.1, 0.4),
            Complex::new(1.7, -0.9),
        ])
        .collect::<Vec<_>>();
    for s in probes {
        if !img.full_rank_at(s, 1e-8 * scale) {
            return Err(Error::Model(format!(
                "latent variable is not observable: rank drop at s = {s}"
            )));
        }
    }
    Ok(img)
}

/// `(u, y)` data generated from the image form, with the latent jet.
#[derive(Debug, Clone)]
pub struct LatentRun {
    /// `(u, y)` jet of the requested order.
    pub jet: JetTrajectory,
    /// Latent signal and its derivatives up to `order() + jet_order`.
    pub latent: SignalJet,
}

/// Drives the controllable canonical realization of `D(d/dt) l = u` with
/// `input`, starting from latent initial jet `l0 = (l, l', .., l^(L-1))(0)`,
/// and forms `u`, `y` from the latent jet.
pub fn generate_latent(
    img: &ImageFormModel,
    input: &AnalyticInput,
    l0: &DVector<f64>,
    grid: TimeGrid,
    jet_order: usize,
) -> Result<LatentRun> {
    if img.latent_dim != 1 {
        return Err(Error::Unsupported(
            "latent generation supports a scalar latent variable".into(),
        ));
    }
    let order = img.order();
    if l0.len() != order {
        return Err(Error::Dimension(format!(
            "latent initial jet needs {order} entries, got {}",
            l0.len()
        )));
    }
    let lead = img.d_coeffs[order][(0, 0)];
    let mut a = DMatrix::zeros(order, order);
    for i in 0..order - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..order {
        a[(order - 1, j)] = -img.d_coeffs[j][(0, 0)] / lead;
    }
    let mut b = DMatrix::zeros(order, 1);
    b[(order - 1, 0)] = 1.0 / lead;
    let canonical = StateSpaceModel::new(
        a,
        b,
        DMatrix::identity(order, order),
        DMatrix::zeros(order, 1),
    )?;

    let latent_order = order + jet_order;
    let run = simulate_exact(&canonical, input, l0, grid, latent_order)?;
    let latent_layers = run
        .state_jet
        .layers()
        .iter()
        .map(|layer| Trajectory::new(grid, layer.values().rows(0, 1).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    let latent = SignalJet::new(latent_layers)?;

    let combine = |coeffs: &[DMatrix<f64>], k: usize| {
        let mut vals = DMatrix::zeros(1, grid.count());
        for (i, c) in coeffs.iter().enumerate() {
            vals += latent.layers()[i + k].values() * c[(0, 0)];
        }
        Trajectory::new(grid, vals)
    };
    let u_layers = (0..=jet_order)
        .map(|k| combine(&img.d_coeffs, k))
        .collect::<Result<Vec<_>>>()?;
    let y_layers = (0..=jet_order)
        .map(|k| combine(&img.n_coeffs, k))
        .collect::<Result<Vec<_>>>()?;
    let jet = JetTrajectory::new(SignalJet::new(u_layers)?, SignalJet::new(y_layers)?)?;
    Ok(LatentRun { jet, latent })
}
