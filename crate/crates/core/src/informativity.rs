//! Rank tests on the stacked jet matrix.
//!
//! Data are informative for identification when, at every probed time, the
//! left annihilators of the stacked matrix are exactly the input-output
//! equations of the system. Numerically this shows up as a constant rank
//! `m (L + 1) + n`.

use std::io::Write;

use nalgebra::DMatrix;

use crate::datamatrix::{DataMatrixView, LayerKey};
use crate::linalg::{left_null_space, rank_from_singular_values, singular_values};
use crate::signals::SignalKind;
use crate::{Error, Result};

/// Number of probe times used when the caller does not choose them.
pub const DEFAULT_PROBES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Informative,
    NotInformative,
    RankInconstant,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Informative => "informative",
            Verdict::NotInformative => "not_informative",
            Verdict::RankInconstant => "rank_inconstant",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct InformativityReport {
    pub times_checked: Vec<f64>,
    pub ranks: Vec<usize>,
    /// `m (L + 1) + n`.
    pub required_rank: usize,
    /// `(sigma_r / sigma_1, sigma_{r+1} / sigma_1)` with `r = required_rank`.
    pub singular_value_margins: Vec<(f64, f64)>,
    /// A singular value lies within a factor 10 of the rank threshold.
    pub marginal: Vec<bool>,
    pub verdict: Verdict,
    /// Orthonormal left-null-space rows at the first probe time, present
    /// when the verdict is informative.
    pub annihilator_basis: Option<DMatrix<f64>>,
    pub rel_tol: f64,
}

impl InformativityReport {
    pub fn is_informative(&self) -> bool {
        self.verdict == Verdict::Informative
    }

    /// Smallest `sigma_r / sigma_{r+1}` over the probes.
    pub fn min_gap_ratio(&self) -> f64 {
        self.singular_value_margins
            .iter()
            .map(|&(r, r1)| if r1 > 0.0 { r / r1 } else { f64::INFINITY })
            .fold(f64::INFINITY, f64::min)
    }

    /// `t,rank,sigma_r_over_sigma_1,sigma_r1_over_sigma_1,marginal`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "t,rank,sigma_r_over_sigma_1,sigma_r1_over_sigma_1,marginal"
        )?;
        for (((t, rank), (a, b)), marginal) in self
            .times_checked
            .iter()
            .zip(&self.ranks)
            .zip(&self.singular_value_margins)
            .zip(&self.marginal)
        {
            writeln!(out, "{t:e},{rank},{a:e},{b:e},{}", u8::from(*marginal))?;
        }
        Ok(())
    }

    pub fn summary_line(&self) -> String {
        let (lo, hi) = (
            self.ranks.iter().min().copied().unwrap_or(0),
            self.ranks.iter().max().copied().unwrap_or(0),
        );
        format!(
            "verdict={} rank_min={lo} rank_max={hi} required_rank={} probes={} marginal={}",
            self.verdict,
            self.required_rank,
            self.times_checked.len(),
            self.marginal.iter().filter(|m| **m).count()
        )
    }
}

/// Per-time full-row-rank test of the simulation coefficient matrix.
#[derive(Debug, Clone)]
pub struct FullRowRankReport {
    pub times_checked: Vec<f64>,
    pub ranks: Vec<usize>,
    pub full_row_rank: Vec<bool>,
    pub row_count: usize,
}

impl FullRowRankReport {
    pub fn all_full(&self) -> bool {
        self.full_row_rank.iter().all(|b| *b)
    }
}

/// Times where every sample used by the view lies outside the derivative
/// boundary band: `[start + band dt, end - band dt]`.
pub fn usable_window(view: &DataMatrixView) -> (f64, f64) {
    let (a, b) = view.window();
    let pad = view.boundary_band() as f64 * view.grid().dt();
    (a + pad, b - pad)
}

/// `count` grid-aligned, equispaced times over [`usable_window`].
pub fn probe_times(view: &DataMatrixView, count: usize) -> Result<Vec<f64>> {
    let (a, b) = usable_window(view);
    if count == 0 || b < a {
        return Err(Error::InvalidArgument(format!(
            "cannot place {count} probe times in the usable window [{a}, {b}]"
        )));
    }
    let grid = view.grid();
    let snap = |t: f64| grid.t0() + ((t - grid.t0()) / grid.dt()).round() * grid.dt();
    let first = grid.t0() + ((a - grid.t0()) / grid.dt()).ceil() * grid.dt();
    let last = grid.t0() + ((b - grid.t0()) / grid.dt()).floor() * grid.dt();
    if count == 1 {
        return Ok(vec![first]);
    }
    Ok((0..count)
        .map(|k| snap(first + (last - first) * k as f64 / (count - 1) as f64))
        .collect())
}

fn validate_times(view: &DataMatrixView, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times given".into()));
    }
    let (a, b) = usable_window(view);
    let slack = 1e-9 * view.grid().dt();
    for &t in times {
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutOfDomain {
                t,
                start: a,
                end: b,
            });
        }
    }
    Ok(())
}

/// Splits a full-selector view into `(m, L)`.
fn full_layout(view: &DataMatrixView) -> Result<(usize, usize)> {
    let keys: Vec<LayerKey> = view.keys().collect();
    let order = view
        .max_order(SignalKind::Input)
        .ok_or_else(|| Error::Dimension("view has no input layers".into()))?;
    let expected: Vec<LayerKey> = (0..=order)
        .map(LayerKey::input)
        .chain((0..=order).map(LayerKey::output))
        .collect();
    if keys != expected {
        return Err(Error::Dimension(
            "informativity needs the full selector u, .., u^(L), y, .., y^(L)".into(),
        ));
    }
    let m = view.block_range(LayerKey::input(0)).map_or(0, |r| r.len());
    Ok((m, order))
}

/// Rank test of the full stacked jet matrix at `sample_times` against the
/// required rank `m (L + 1) + n`.
pub fn check_informativity(
    view: &DataMatrixView,
    n: usize,
    sample_times: &[f64],
    rel_tol: f64,
) -> Result<InformativityReport> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "state dimension n must be at least 1".into(),
        ));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    let (m, order) = full_layout(view)?;
    validate_times(view, sample_times)?;
    let required_rank = m * (order + 1) + n;

    let mut ranks = Vec::with_capacity(sample_times.len());
    let mut margins = Vec::with_capacity(sample_times.len());
    let mut marginal = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        let sv = singular_values(&view.stacked_eval(t)?)?;
        ranks.push(rank_from_singular_values(&sv, rel_tol));
        let s1 = sv.first().copied().unwrap_or(0.0);
        let ratio = |k: usize| {
            if s1 > 0.0 {
                sv.get(k).copied().unwrap_or(0.0) / s1
            } else {
                0.0
            }
        };
        margins.push((ratio(required_rank - 1), ratio(required_rank)));
        let threshold = rel_tol * s1;
        marginal.push(
            s1 > 0.0
                && sv
                    .iter()
                    .any(|&s| s >= threshold / 10.0 && s <= threshold * 10.0),
        );
    }

    let constant = ranks.windows(2).all(|w| w[0] == w[1]);
    let verdict = if !constant {
        Verdict::RankInconstant
    } else if ranks[0] == required_rank {
        Verdict::Informative
    } else {
        Verdict::NotInformative
    };
    let annihilator_basis = match verdict {
        Verdict::Informative => Some(left_null_space(
            &view.stacked_eval(sample_times[0])?,
            rel_tol,
        )?),
        _ => None,
    };
    Ok(InformativityReport {
        times_checked: sample_times.to_vec(),
        ranks,
        required_rank,
        singular_value_margins: margins,
        marginal,
        verdict,
        annihilator_basis,
        rel_tol,
    })
}

/// Full-row-rank test of a (typically reduced-selector) view.
pub fn check_full_row_rank(
    view: &DataMatrixView,
    sample_times: &[f64],
    rel_tol: f64,
) -> Result<FullRowRankReport> {
    validate_times(view, sample_times)?;
    let row_count = view.rows();
    let mut ranks = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        ranks.push(crate::linalg::numerical_rank(
            &view.stacked_eval(t)?,
            rel_tol,
        )?);
    }
    let full_row_rank = ranks.iter().map(|&r| r == row_count).collect();
    Ok(FullRowRankReport {
        times_checked: sample_times.to_vec(),
        ranks,
        full_row_rank,
        row_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamatrix::{RowSelector, ShiftSpec};
    use crate::signals::{build_jet, DerivativeSource, DiffMethod, TimeGrid, Trajectory};

    fn zero_view() -> DataMatrixView {
        let g = TimeGrid::spanning(0.0, 1e-2, 4.0).unwrap();
        let z = Trajectory::constant(g, &[0.0]).unwrap();
        let jet = build_jet(
            z.clone(),
            z,
            2,
            DerivativeSource::Estimated(DiffMethod::Central4),
        )
        .unwrap();
        DataMatrixView::new(&jet, ShiftSpec::new(10, 0.2).unwrap(), RowSelector::Full(2)).unwrap()
    }

    #[test]
    fn zero_data_has_rank_zero() {
        let view = zero_view();
        let times = probe_times(&view, 5).unwrap();
        let report = check_informativity(&view, 2, &times, 1e-8).unwrap();
        assert!(report.ranks.iter().all(|&r| r == 0));
        assert_eq!(report.verdict, Verdict::NotInformative);
        assert_eq!(report.required_rank, 5);
        assert!(report.annihilator_basis.is_none());
    }

    #[test]
    fn probe_times_avoid_the_boundary_band() {
        let view = zero_view();
        let (a, b) = usable_window(&view);
        assert!((a - 0.02).abs() < 1e-12, "{a}");
        assert!((b - (2.0 - 0.02)).abs() < 1e-12, "{b}");
        let times = probe_times(&view, DEFAULT_PROBES).unwrap();
        assert_eq!(times.len(), DEFAULT_PROBES);
        assert!(times.iter().all(|&t| t >= a - 1e-12 && t <= b + 1e-12));
        assert!(times.iter().all(|&t| view.grid().sample_index(t).is_some()));
    }

    #[test]
    fn rejects_empty_or_out_of_window_times() {
        let view = zero_view();
        assert!(check_informativity(&view, 2, &[], 1e-8).is_err());
        assert!(matches!(
            check_informativity(&view, 2, &[0.0], 1e-8),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(check_informativity(&view, 0, &[0.5], 1e-8).is_err());
    }

    #[test]
    fn narrow_matrices_cannot_have_full_row_rank() {
        let g = TimeGrid::spanning(0.0, 1e-2, 4.0).unwrap();
        let u = Trajectory::from_fn(g, 1, |t, o| o[0] = t.sin()).unwrap();
        let y = Trajectory::from_fn(g, 1, |t, o| o[0] = (2.0 * t).cos()).unwrap();
        let jet = build_jet(u, y, 2, DerivativeSource::Estimated(DiffMethod::Central4)).unwrap();
        let view = DataMatrixView::new(
            &jet,
            ShiftSpec::new(2, 0.5).unwrap(),
            RowSelector::Reduced(2),
        )
        .unwrap();
        let times = probe_times(&view, 3).unwrap();
        let report = check_full_row_rank(&view, &times, 1e-8).unwrap();
        assert_eq!(report.row_count, 5);
        assert!(!report.all_full());
    }
}
