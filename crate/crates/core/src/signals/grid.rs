use crate::{Error, Result};

/// Relative tolerance (in units of `dt`) for snapping a time onto a sample.
pub const SNAP_TOL: f64 = 1e-9;

/// Uniform sampling grid `t0 + k * dt`, `k = 0..count`, with `count >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    count: usize,
}

/// Where a time falls on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPosition {
    /// On sample `k` (within [`SNAP_TOL`]).
    Sample(usize),
    /// Strictly between samples `k` and `k + 1`; `frac` in (0, 1).
    Between { k: usize, frac: f64 },
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        if !t0.is_finite() || !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs finite t0 and dt > 0, got t0 = {t0}, dt = {dt}"
            )));
        }
        if count == 0 {
            return Err(Error::InsufficientData {
                needed: 1,
                available: 0,
            });
        }
        Ok(Self { t0, dt, count })
    }

    /// Grid covering `[t0, t0 + duration]` with step `dt`; `duration` is
    /// rounded to the nearest multiple of `dt`.
    pub fn spanning(t0: f64, dt: f64, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0 && dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duration and dt must be positive, got {duration} and {dt}"
            )));
        }
        let steps = (duration / dt).round() as usize;
        Self::new(t0, dt, steps + 1)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.count - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.time(k))
    }

    /// Locates `t`, failing when it lies outside `[t0, end]`.
    pub fn locate(&self, t: f64) -> Result<GridPosition> {
        let s = (t - self.t0) / self.dt;
        let last = (self.count - 1) as f64;
        if !s.is_finite() || s < -SNAP_TOL || s > last + SNAP_TOL {
            return Err(Error::OutOfDomain {
                t,
                start: self.t0,
                end: self.end(),
            });
        }
        let nearest = s.round();
        if (s - nearest).abs() <= SNAP_TOL {
            return Ok(GridPosition::Sample(nearest.clamp(0.0, last) as usize));
        }
        let k = s.floor() as usize;
        Ok(GridPosition::Between {
            k,
            frac: s - k as f64,
        })
    }

    /// Nearest sample index to `t`, if `t` lies on the grid.
    pub fn sample_index(&self, t: f64) -> Option<usize> {
        match self.locate(t) {
            Ok(GridPosition::Sample(k)) => Some(k),
            _ => None,
        }
    }

    /// Two grids are compatible when they agree on spacing, origin, and length.
    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.count == other.count
            && (self.dt - other.dt).abs() <= SNAP_TOL * self.dt
            && (self.t0 - other.t0).abs() <= SNAP_TOL * self.dt
    }

    /// Integer ratio `step / dt` when `step` is a positive multiple of `dt`.
    pub fn multiple_of_dt(&self, step: f64) -> Option<usize> {
        let r = step / self.dt;
        let n = r.round();
        (n >= 1.0 && (r - n).abs() <= SNAP_TOL * n.max(1.0)).then_some(n as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 10).is_err());
        assert!(matches!(
            TimeGrid::new(0.0, 0.1, 0),
            Err(Error::InsufficientData {
                needed: 1,
                available: 0
            })
        ));
    }

    #[test]
    fn locate_snaps_and_bounds() {
        let g = TimeGrid::new(1.0, 0.1, 11).unwrap();
        assert_eq!(g.locate(1.3).unwrap(), GridPosition::Sample(3));
        assert_eq!(g.locate(2.0).unwrap(), GridPosition::Sample(10));
        match g.locate(1.25).unwrap() {
            GridPosition::Between { k, frac } => {
                assert_eq!(k, 2);
                assert!((frac - 0.5).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(g.locate(2.1).is_err());
        assert!(g.locate(0.99).is_err());
    }

    #[test]
    fn spanning_rounds_duration() {
        let g = TimeGrid::spanning(0.0, 1e-3, 10.0).unwrap();
        assert_eq!(g.count(), 10_001);
        assert!((g.end() - 10.0).abs() < 1e-12);
        assert_eq!(g.multiple_of_dt(0.5), Some(500));
        assert_eq!(g.multiple_of_dt(0.5005), None);
    }
}
