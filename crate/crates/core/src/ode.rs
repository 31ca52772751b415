//! Classical fixed-step Runge-Kutta integration.

use nalgebra::DVector;

use crate::Result;

/// States and slopes at the step nodes `t0 + k h`, `k = 0..=steps`.
#[derive(Debug, Clone)]
pub struct Rk4Solution {
    pub states: Vec<DVector<f64>>,
    pub slopes: Vec<DVector<f64>>,
}

/// Integrates `x' = rhs(t, x)` with the classical four-stage scheme.
///
/// The right-hand side is evaluated at `t`, `t + h/2` (twice) and `t + h`
/// of every step; node times are computed as `t0 + k h` without
/// accumulation. The slope at each node is the first stage of the step
/// leaving it, plus one extra evaluation at the final node.
pub fn rk4<F>(mut rhs: F, t0: f64, x0: DVector<f64>, step: f64, steps: usize) -> Result<Rk4Solution>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let mut states = Vec::with_capacity(steps + 1);
    let mut slopes = Vec::with_capacity(steps + 1);
    let mut x = x0;
    for k in 0..steps {
        let t = t0 + k as f64 * step;
        let t_mid = t0 + (k as f64 + 0.5) * step;
        let t_next = t0 + (k + 1) as f64 * step;
        let k1 = rhs(t, &x)?;
        let k2 = rhs(t_mid, &(&x + &k1 * (0.5 * step)))?;
        let k3 = rhs(t_mid, &(&x + &k2 * (0.5 * step)))?;
        let k4 = rhs(t_next, &(&x + &k3 * step))?;
        let next = &x + (&k1 + (&k2 + &k3) * 2.0 + &k4) * (step / 6.0);
        states.push(x);
        slopes.push(k1);
        x = next;
    }
    slopes.push(rhs(t0 + steps as f64 * step, &x)?);
    states.push(x);
    Ok(Rk4Solution { states, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let err = |h: f64| {
            let steps = (1.0 / h).round() as usize;
            let sol = rk4(|_, x| Ok(-x), 0.0, DVector::from_element(1, 1.0), h, steps).unwrap();
            (sol.states[steps][0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn time_varying_rhs_sees_stage_times() {
        // x' = cos t, x(0) = 0 -> sin t
        let sol = rk4(
            |t, _| Ok(DVector::from_element(1, t.cos())),
            0.0,
            DVector::zeros(1),
            0.01,
            100,
        )
        .unwrap();
        assert!((sol.states[100][0] - 1.0f64.sin()).abs() < 1e-10);
        assert_eq!(sol.slopes.len(), 101);
        assert!((sol.slopes[100][0] - 1.0f64.cos()).abs() < 1e-14);
    }
}
