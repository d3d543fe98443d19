//! Closed-form pseudo-regret bounds, block-count heuristics and the
//! discretization allowance.

use std::f64::consts::PI;

use super::GroundTruth;
use crate::auction::BidGrid;
use crate::error::{Error, Result};

/// Run parameters shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub m: usize,
    pub n: usize,
    pub utility_bound: f64,
    /// Horizon `T`; only `ln T` enters the bounds, so it may be fractional.
    pub horizon: f64,
}

impl TheoryParams {
    fn ln_t(&self) -> f64 {
        if self.horizon <= 1.0 {
            0.0
        } else {
            self.horizon.ln()
        }
    }

    /// `(m + 1) U^2 ln T / n`, the common factor of the logarithmic terms.
    fn log_factor(&self) -> f64 {
        let u = self.utility_bound;
        (self.m + 1) as f64 * u * u * self.ln_t() / self.n as f64
    }

    fn check(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || !(self.horizon >= 1.0) || !(self.utility_bound > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid bound parameters {self:?}")));
        }
        Ok(())
    }
}

fn check_gap(gap: f64) -> Result<()> {
    if gap > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateGap(format!("suboptimal arm with gap {gap}")))
    }
}

/// Known valuation: `sum_b 32 (m+1) U^2 ln T / (n D(b)) + (pi^2 / 3) D(b) / m`
/// over the suboptimal gaps.
pub fn known_value_bound(gaps: &[f64], params: &TheoryParams) -> Result<f64> {
    params.check()?;
    let log = params.log_factor();
    let m = params.m as f64;
    gaps.iter().try_fold(0.0, |acc, &d| {
        check_gap(d)?;
        Ok(acc + 32.0 * log / d + PI * PI / 3.0 * d / m)
    })
}

/// Unknown valuation: `sum 384 (m+1) U^2 ln T / (n D) + (2 pi^2 D / 3) w`
/// where `w = 1` off the optimal value and `1 / m` on it. Gaps come tagged
/// with whether their value equals `v*`.
pub fn dsp_bound(gaps: &[(f64, bool)], params: &TheoryParams) -> Result<f64> {
    params.check()?;
    let log = params.log_factor();
    let m = params.m as f64;
    gaps.iter().try_fold(0.0, |acc, &(d, same_value)| {
        check_gap(d)?;
        let weight = if same_value { 1.0 / m } else { 1.0 };
        Ok(acc + 384.0 * log / d + 2.0 * PI * PI * d / 3.0 * weight)
    })
}

/// Switching: `sum 192 (m+1) U^2 ln T / (n D) + 2 pi^2 D / (3 (m+1)^2)`.
pub fn switching_bound(gaps: &[f64], params: &TheoryParams) -> Result<f64> {
    params.check()?;
    let log = params.log_factor();
    let k = (params.m + 1) as f64;
    gaps.iter().try_fold(0.0, |acc, &d| {
        check_gap(d)?;
        Ok(acc + 192.0 * log / d + 2.0 * PI * PI * d / (3.0 * k * k))
    })
}

/// [`known_value_bound`] on the oracle's gaps for the valuation at `value`.
pub fn bound_known_value(gt: &GroundTruth, value: usize, params: &TheoryParams) -> Result<f64> {
    known_value_bound(&gt.known_value_gaps(value), params)
}

/// [`dsp_bound`] on the oracle's pair gaps.
pub fn bound_dsp(gt: &GroundTruth, params: &TheoryParams) -> Result<f64> {
    dsp_bound(&gt.pair_gaps(), params)
}

/// [`switching_bound`] on the oracle's pair gaps.
pub fn bound_switching(gt: &GroundTruth, params: &TheoryParams) -> Result<f64> {
    let gaps: Vec<f64> = gt.pair_gaps().into_iter().map(|(d, _)| d).collect();
    switching_bound(&gaps, params)
}

/// Problem whose block count is being tuned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSetting {
    KnownValue,
    Dsp,
    Switching,
}

/// Largest and smallest suboptimal gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRange {
    pub max: f64,
    pub min: f64,
}

impl GapRange {
    pub fn from_gaps(gaps: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut range = GapRange { max: f64::NEG_INFINITY, min: f64::INFINITY };
        for d in gaps {
            range.max = range.max.max(d);
            range.min = range.min.min(d);
        }
        if range.max.is_finite() {
            Ok(range)
        } else {
            Err(Error::EmptyInput("no suboptimal arms".into()))
        }
    }

    /// Known-value range for `value`, or the pair range otherwise.
    pub fn of(gt: &GroundTruth, value: Option<usize>) -> Result<Self> {
        match value {
            Some(v) => Self::from_gaps(gt.known_value_gaps(v)),
            None => Self::from_gaps(gt.pair_gaps().into_iter().map(|(d, _)| d)),
        }
    }
}

/// Unrounded block-count recommendation. For switching this is `m`, derived
/// from `m + 1 = (n / ln T)^(1/3)`.
pub fn optimal_m_raw(setting: BoundSetting, gaps: GapRange, n: usize, utility_bound: f64, horizon: f64, arms: usize) -> Result<f64> {
    if !(horizon >= 2.0) {
        return Err(Error::InvalidConfig(format!("horizon {horizon} must be at least 2")));
    }
    let ln_t = horizon.ln();
    let n = n as f64;
    let spread = gaps.max * gaps.min;
    Ok(match setting {
        BoundSetting::KnownValue => PI / (4.0 * utility_bound) * (n * spread / (6.0 * ln_t)).sqrt(),
        BoundSetting::Dsp => PI / (24.0 * utility_bound) * (n * spread / (arms as f64 * ln_t)).sqrt(),
        BoundSetting::Switching => (n / ln_t).cbrt().round() - 1.0,
    })
}

/// [`optimal_m_raw`] rounded to the nearest integer and clamped to `[1, arms - 1]`.
pub fn optimal_m(setting: BoundSetting, gaps: GapRange, n: usize, utility_bound: f64, horizon: f64, arms: usize) -> Result<usize> {
    if arms < 2 {
        return Err(Error::InvalidGrid("need at least two bids".into()));
    }
    let raw = optimal_m_raw(setting, gaps, n, utility_bound, horizon, arms)?;
    let m = if raw.is_finite() { raw.round().max(1.0) } else { 1.0 };
    Ok((m as usize).min(arms - 1))
}

/// Lipschitz allowance for restricting values and bids to a grid of step
/// `step`: `T * 2 * (L_g v_max + L_p) * step`.
///
/// Every point is within `step / 2` of the grid in each coordinate. Along `b`,
/// `rgt` moves at rate at most `L_g v_max + L_p`; along `v` at most
/// `|g(b) - g(v)| + L_g v_max + L_p <= 2 L_g v_max + L_p`. This is a
/// derived allowance, checked numerically against [`measured_discretization_error`].
pub fn discretization_error_bound(lipschitz_alloc: f64, lipschitz_pay: f64, step: f64, max_value: f64, horizon: f64) -> Result<f64> {
    if lipschitz_alloc < 0.0 || lipschitz_pay < 0.0 || step < 0.0 {
        return Err(Error::InvalidConfig("Lipschitz constants and step must be non-negative".into()));
    }
    Ok(horizon * 2.0 * (lipschitz_alloc * max_value + lipschitz_pay) * step)
}

/// `max_{v, b in grid} rgt(v, b)` by exhaustive search.
pub fn grid_sup(grid: &BidGrid, regret: impl Fn(f64, f64) -> f64) -> f64 {
    let levels = grid.levels();
    let mut best = f64::NEG_INFINITY;
    for &v in levels {
        for &b in levels {
            best = best.max(regret(v, b));
        }
    }
    best
}

/// Measured discretization error over `horizon` rounds: how much larger the
/// fine-grid supremum of `rgt` is than the coarse-grid one.
pub fn measured_discretization_error(coarse: &BidGrid, fine: &BidGrid, horizon: f64, regret: impl Fn(f64, f64) -> f64) -> f64 {
    horizon * (grid_sup(fine, &regret) - grid_sup(coarse, &regret)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn params(m: usize, horizon: f64) -> TheoryParams {
        TheoryParams { m, n: 1024, utility_bound: 10.0, horizon }
    }

    #[test]
    fn known_value_single_gap() {
        let b = known_value_bound(&[1.0], &params(1, E)).unwrap();
        assert_relative_eq!(b, 6.25 + PI * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(b, 9.5399, max_relative = 1e-4);
        let t1 = known_value_bound(&[1.0], &params(1, 1.0)).unwrap();
        assert_relative_eq!(t1, PI * PI / 3.0, max_relative = 1e-12);
        assert_eq!(known_value_bound(&[], &params(1, E)).unwrap(), 0.0);
        assert!(matches!(known_value_bound(&[1.0, 0.0], &params(1, E)), Err(Error::DegenerateGap(_))));
    }

    #[test]
    fn dsp_single_pair() {
        let same = dsp_bound(&[(1.0, true)], &params(1, E)).unwrap();
        assert_relative_eq!(same, 75.0 + 2.0 * PI * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(same, 81.58, max_relative = 1e-4);
        let other = dsp_bound(&[(1.0, false)], &params(1, E)).unwrap();
        assert_relative_eq!(other, same, max_relative = 1e-12);
        assert_eq!(dsp_bound(&[], &params(1, E)).unwrap(), 0.0);
    }

    #[test]
    fn switching_single_pair() {
        let b = switching_bound(&[1.0], &params(1, E)).unwrap();
        assert_relative_eq!(b, 37.5 + 2.0 * PI * PI / 12.0, max_relative = 1e-12);
        assert_relative_eq!(b, 39.14, max_relative = 1e-3);
        assert_eq!(switching_bound(&[], &params(1, E)).unwrap(), 0.0);
    }

    #[test]
    fn optimal_m_examples() {
        let gaps = GapRange { max: 4.0, min: 1.0 };
        let raw = optimal_m_raw(BoundSetting::KnownValue, gaps, 1024, 10.0, 1000.0, 1000).unwrap();
        assert_relative_eq!(raw, 0.7808, max_relative = 1e-3);
        assert_eq!(optimal_m(BoundSetting::KnownValue, gaps, 1024, 10.0, 1000.0, 1000).unwrap(), 1);
        assert_eq!(optimal_m(BoundSetting::Switching, gaps, 1024, 10.0, E, 1000).unwrap(), 9);
        let wide = GapRange { max: 1e6, min: 1e6 };
        assert_eq!(optimal_m(BoundSetting::KnownValue, wide, 1 << 20, 0.01, 2.0, 50).unwrap(), 49);
        assert!(optimal_m(BoundSetting::Dsp, gaps, 1024, 10.0, 1.0, 100).is_err());
    }

    #[test]
    fn discretization_trivial_cases() {
        assert_eq!(discretization_error_bound(0.5, 0.2, 0.0, 1.0, 100.0).unwrap(), 0.0);
        assert_eq!(discretization_error_bound(0.0, 0.0, 0.1, 1.0, 100.0).unwrap(), 0.0);
        assert!(discretization_error_bound(-1.0, 0.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn gap_range_rejects_empty() {
        assert!(GapRange::from_gaps(std::iter::empty()).is_err());
        let r = GapRange::from_gaps([0.5, 2.0, 1.0]).unwrap();
        assert_eq!((r.max, r.min), (2.0, 0.5));
    }
}
