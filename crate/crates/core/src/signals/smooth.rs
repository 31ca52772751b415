use nalgebra::DVector;

use super::jet::SignalJet;
use crate::{Error, Result};

/// A signal whose derivatives can be evaluated at arbitrary times.
pub trait SmoothSignal: Send + Sync {
    fn channels(&self) -> usize;

    /// Highest available derivative order; `None` when unbounded.
    fn max_order(&self) -> Option<usize>;

    fn derivative(&self, order: usize, t: f64) -> Result<DVector<f64>>;
}

impl SmoothSignal for SignalJet {
    fn channels(&self) -> usize {
        SignalJet::channels(self)
    }

    fn max_order(&self) -> Option<usize> {
        Some(self.order())
    }

    fn derivative(&self, order: usize, t: f64) -> Result<DVector<f64>> {
        self.layer(order)
            .ok_or_else(|| {
                Error::Dimension(format!(
                    "signal jet of order {} has no layer {order}",
                    self.order()
                ))
            })?
            .eval_at(t)
    }
}
