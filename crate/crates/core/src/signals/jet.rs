use nalgebra::DVector;

use super::diff::{differentiate, DiffMethod};
use super::trajectory::Trajectory;
use crate::{Error, Result};

/// Which signal a jet layer belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalKind {
    Input,
    Output,
    Latent,
    State,
}

impl SignalKind {
    /// Short label used in CSV headers and reports.
    pub fn label(self) -> &'static str {
        match self {
            SignalKind::Input => "u",
            SignalKind::Output => "y",
            SignalKind::Latent => "l",
            SignalKind::State => "x",
        }
    }
}

/// A single signal together with its derivatives `0..=order`, all on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalJet {
    layers: Vec<Trajectory>,
}

impl SignalJet {
    pub fn new(layers: Vec<Trajectory>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::Dimension("a jet needs at least the order-0 layer".into()))?;
        for (i, layer) in layers.iter().enumerate().skip(1) {
            if !layer.grid().same_as(first.grid()) {
                return Err(Error::GridMismatch(format!(
                    "derivative layer {i} uses a different grid"
                )));
            }
            if layer.channels() != first.channels() {
                return Err(Error::Dimension(format!(
                    "derivative layer {i} has {} channels, expected {}",
                    layer.channels(),
                    first.channels()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Builds the jet by estimating derivatives `1..=order` of `base`.
    pub fn estimate(base: Trajectory, order: usize, method: DiffMethod) -> Result<Self> {
        let mut layers = Vec::with_capacity(order + 1);
        for k in 1..=order {
            layers.push(differentiate(&base, k, method)?);
        }
        layers.insert(0, base);
        Self::new(layers)
    }

    pub fn order(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn channels(&self) -> usize {
        self.layers[0].channels()
    }

    pub fn grid(&self) -> &super::TimeGrid {
        self.layers[0].grid()
    }

    pub fn layer(&self, order: usize) -> Option<&Trajectory> {
        self.layers.get(order)
    }

    pub fn layers(&self) -> &[Trajectory] {
        &self.layers
    }

    pub fn boundary_band(&self) -> usize {
        self.layers
            .iter()
            .map(Trajectory::boundary_band)
            .max()
            .unwrap_or(0)
    }

    /// Keeps layers `0..=order`.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::Dimension(format!(
                "cannot truncate an order-{} jet to order {order}",
                self.order()
            )));
        }
        Ok(Self {
            layers: self.layers[..=order].to_vec(),
        })
    }
}

/// Where the derivative layers of a jet come from.
#[derive(Debug, Clone)]
pub enum DerivativeSource {
    Estimated(DiffMethod),
    /// Layers `u', .., u^(L), y', .., y^(L)` in that order.
    Provided(Vec<Trajectory>),
}

/// The `L`-jet of an input-output pair: layers ordered
/// `u, u', .., u^(L), y, y', .., y^(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetTrajectory {
    input: SignalJet,
    output: SignalJet,
}

impl JetTrajectory {
    pub fn new(input: SignalJet, output: SignalJet) -> Result<Self> {
        if input.order() != output.order() {
            return Err(Error::Dimension(format!(
                "input jet has order {} but output jet has order {}",
                input.order(),
                output.order()
            )));
        }
        if !input.grid().same_as(output.grid()) {
            return Err(Error::GridMismatch(
                "input and output jets use different grids".into(),
            ));
        }
        Ok(Self { input, output })
    }

    pub fn order(&self) -> usize {
        self.input.order()
    }

    pub fn inputs(&self) -> usize {
        self.input.channels()
    }

    pub fn outputs(&self) -> usize {
        self.output.channels()
    }

    pub fn grid(&self) -> &super::TimeGrid {
        self.input.grid()
    }

    pub fn input(&self) -> &SignalJet {
        &self.input
    }

    pub fn output(&self) -> &SignalJet {
        &self.output
    }

    pub fn part(&self, kind: SignalKind) -> Option<&SignalJet> {
        match kind {
            SignalKind::Input => Some(&self.input),
            SignalKind::Output => Some(&self.output),
            _ => None,
        }
    }

    /// All layers in jet order.
    pub fn layers(&self) -> impl Iterator<Item = (SignalKind, usize, &Trajectory)> {
        let u = self
            .input
            .layers()
            .iter()
            .enumerate()
            .map(|(i, l)| (SignalKind::Input, i, l));
        let y = self
            .output
            .layers()
            .iter()
            .enumerate()
            .map(|(i, l)| (SignalKind::Output, i, l));
        u.chain(y)
    }

    pub fn boundary_band(&self) -> usize {
        self.input.boundary_band().max(self.output.boundary_band())
    }

    /// Stacked jet vector at time `t`, length `(m + p)(L + 1)`.
    pub fn value_at(&self, t: f64) -> Result<DVector<f64>> {
        let parts = self
            .layers()
            .map(|(_, _, l)| l.eval_at(t))
            .collect::<Result<Vec<_>>>()?;
        let len = parts.iter().map(|v| v.len()).sum();
        let mut out = DVector::zeros(len);
        let mut row = 0;
        for v in parts {
            out.rows_mut(row, v.len()).copy_from(&v);
            row += v.len();
        }
        Ok(out)
    }

    pub fn truncated(&self, order: usize) -> Result<Self> {
        Self::new(self.input.truncated(order)?, self.output.truncated(order)?)
    }

    pub fn into_parts(self) -> (SignalJet, SignalJet) {
        (self.input, self.output)
    }
}

/// Assembles the `order`-jet of `(u, y)`.
pub fn build_jet(
    u: Trajectory,
    y: Trajectory,
    order: usize,
    source: DerivativeSource,
) -> Result<JetTrajectory> {
    if !u.grid().same_as(y.grid()) {
        return Err(Error::GridMismatch(
            "u and y must share one time grid".into(),
        ));
    }
    match source {
        DerivativeSource::Estimated(method) => JetTrajectory::new(
            SignalJet::estimate(u, order, method)?,
            SignalJet::estimate(y, order, method)?,
        ),
        DerivativeSource::Provided(layers) => {
            if layers.len() != 2 * order {
                return Err(Error::Dimension(format!(
                    "expected {} provided derivative layers, got {}",
                    2 * order,
                    layers.len()
                )));
            }
            let mut layers = layers.into_iter();
            let mut u_layers = vec![u];
            u_layers.extend(layers.by_ref().take(order));
            let mut y_layers = vec![y];
            y_layers.extend(layers);
            JetTrajectory::new(SignalJet::new(u_layers)?, SignalJet::new(y_layers)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::TimeGrid;

    fn grid() -> TimeGrid {
        TimeGrid::spanning(0.0, 1e-3, 2.0).unwrap()
    }

    fn sig(f: impl Fn(f64) -> f64) -> Trajectory {
        Trajectory::from_fn(grid(), 1, |t, o| o[0] = f(t)).unwrap()
    }

    #[test]
    fn estimated_first_order_jet_of_sine_cosine() {
        let jet = build_jet(
            sig(f64::sin),
            sig(f64::cos),
            1,
            DerivativeSource::Estimated(DiffMethod::Central4),
        )
        .unwrap();
        let layers: Vec<_> = jet.layers().collect();
        assert_eq!(layers.len(), 4);
        assert_eq!((layers[1].0, layers[1].1), (SignalKind::Input, 1));
        assert_eq!((layers[2].0, layers[2].1), (SignalKind::Output, 0));
        let t = 1.0;
        let v = jet.value_at(t).unwrap();
        let expected = [t.sin(), t.cos(), t.cos(), -t.sin()];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(jet.boundary_band(), 2);
    }

    #[test]
    fn zero_order_jet_is_the_pair_itself() {
        let u = sig(f64::sin);
        let y = sig(f64::cos);
        let jet = build_jet(
            u.clone(),
            y.clone(),
            0,
            DerivativeSource::Estimated(DiffMethod::Central4),
        )
        .unwrap();
        assert_eq!(jet.order(), 0);
        assert_eq!(jet.input().layer(0).unwrap(), &u);
        assert_eq!(jet.output().layer(0).unwrap(), &y);
    }

    #[test]
    fn provided_layers_are_validated() {
        let bad = Trajectory::from_fn(grid(), 2, |t, o| o.fill(t)).unwrap();
        let err = build_jet(
            sig(f64::sin),
            sig(f64::cos),
            1,
            DerivativeSource::Provided(vec![bad, sig(f64::sin)]),
        );
        assert!(matches!(err, Err(Error::Dimension(_))));
        let err = build_jet(
            sig(f64::sin),
            sig(f64::cos),
            1,
            DerivativeSource::Provided(vec![sig(f64::cos)]),
        );
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let other = Trajectory::from_fn(TimeGrid::spanning(0.0, 2e-3, 2.0).unwrap(), 1, |t, o| {
            o[0] = t
        })
        .unwrap();
        assert!(matches!(
            build_jet(
                sig(f64::sin),
                other,
                1,
                DerivativeSource::Estimated(DiffMethod::Central4)
            ),
            Err(Error::GridMismatch(_))
        ));
    }
}
