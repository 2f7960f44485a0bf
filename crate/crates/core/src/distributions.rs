//! Agent cost priors: density, cumulative distribution, virtual cost
//! `lambda(x) = x + F(x)/f(x)` and its inverse, regularity checking, and
//! sampling.
//!
//! Payments integrate the allocation curve to +infinity while priors live on
//! `[0, omega]`, so `lambda` is continued past the support linearly with its
//! left-limit slope at `omega` (slope 2 for uniform and piecewise-linear
//! cumulative distributions). `zero_virtual` exists only to realize
//! reduction instances with `lambda = 0`; it has no sampler and is rejected
//! by payment computation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid resolution used by regularity checks unless the caller picks one.
pub const DEFAULT_REGULARITY_GRID: usize = 10_001;

/// Inverse virtual costs clamp targets in `[-NEGATIVE_SLACK, 0)` to zero;
/// anything more negative is a caller error.
pub const NEGATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("uniform bounds must satisfy 0 <= lo < hi")]
    BadUniform,
    #[error("degenerate point must be nonnegative and finite")]
    BadPoint,
    #[error("piecewise cdf needs at least two knots with strictly increasing x >= 0, F from 0 to 1, nondecreasing")]
    BadKnots,
    #[error("virtual cost undefined at x={0}: zero density inside the support")]
    UndefinedDensity(f64),
    #[error("virtual-cost target {0} is negative")]
    NegativeTarget(f64),
    #[error("distribution is not regular; check_regularity reports the violation")]
    NotRegular,
    #[error("distribution kind has no sampler")]
    NoSampler,
    #[error("payment computation needs a strictly increasing virtual cost; this kind does not provide one")]
    PaymentUnsupported,
    #[error("operation needs a bounded support")]
    UnboundedSupport,
}

/// A cost prior attached to one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum CostDistribution {
    /// Uniform density on `[lo, hi]`; `lambda(x) = 2x - lo` on the support.
    Uniform {
        #[serde(default)]
        lo: f64,
        hi: f64,
    },
    /// Degenerate prior at `point` with `lambda(x) = x` exactly.
    IdentityVirtual { point: f64 },
    /// `lambda(x) = 0` everywhere. Test and reduction stub only.
    ZeroVirtual,
    /// Monotone piecewise-linear cumulative distribution through `knots`.
    PiecewiseCdf { knots: Vec<(f64, f64)> },
}

impl CostDistribution {
    pub fn validate(&self) -> Result<(), DistError> {
        match self {
            CostDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo < hi) {
                    return Err(DistError::BadUniform);
                }
            }
            CostDistribution::IdentityVirtual { point } => {
                if !(point.is_finite() && *point >= 0.0) {
                    return Err(DistError::BadPoint);
                }
            }
            CostDistribution::ZeroVirtual => {}
            CostDistribution::PiecewiseCdf { knots } => {
                if knots.len() < 2 {
                    return Err(DistError::BadKnots);
                }
                let first = knots.first().unwrap();
                let last = knots.last().unwrap();
                if first.0 < 0.0 || first.1 != 0.0 || (last.1 - 1.0).abs() > 1e-12 {
                    return Err(DistError::BadKnots);
                }
                for w in knots.windows(2) {
                    if !(w[0].0 < w[1].0) || w[1].1 < w[0].1 {
                        return Err(DistError::BadKnots);
                    }
                    if !w[0].0.is_finite() || !w[0].1.is_finite() {
                        return Err(DistError::BadKnots);
                    }
                }
            }
        }
        Ok(())
    }

    /// Upper end of the support; `None` when unbounded (degenerate stubs).
    pub fn support_hi(&self) -> Option<f64> {
        match self {
            CostDistribution::Uniform { hi, .. } => Some(*hi),
            CostDistribution::PiecewiseCdf { knots } => Some(knots.last().unwrap().0),
            CostDistribution::IdentityVirtual { .. } | CostDistribution::ZeroVirtual => None,
        }
    }

    /// Probability density at `x` (zero outside the support).
    pub fn density(&self, x: f64) -> f64 {
        match self {
            CostDistribution::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            CostDistribution::PiecewiseCdf { knots } => match segment_of(knots, x) {
                Some(j) => segment_slope(knots, j),
                None => 0.0,
            },
            CostDistribution::IdentityVirtual { point } => {
                if x == *point {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            CostDistribution::ZeroVirtual => 0.0,
        }
    }

    /// Cumulative distribution at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            CostDistribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            CostDistribution::PiecewiseCdf { knots } => {
                if x <= knots[0].0 {
                    0.0
                } else if x >= knots.last().unwrap().0 {
                    1.0
                } else {
                    let j = segment_of(knots, x).unwrap();
                    let (x0, f0) = knots[j];
                    f0 + segment_slope(knots, j) * (x - x0)
                }
            }
            CostDistribution::IdentityVirtual { point } => {
                if x >= *point {
                    1.0
                } else {
                    0.0
                }
            }
            CostDistribution::ZeroVirtual => 0.0,
        }
    }

    /// Virtual cost `lambda(x)`, linearly continued past the support.
    pub fn virtual_cost(&self, x: f64) -> Result<f64, DistError> {
        match self {
            CostDistribution::Uniform { lo, hi: _ } => {
                // x + F/f collapses to 2x - lo on the support; the right
                // extension has the same slope, and below lo F = 0.
                Ok(if x < *lo { x } else { 2.0 * x - lo })
            }
            CostDistribution::IdentityVirtual { .. } => Ok(x),
            CostDistribution::ZeroVirtual => Ok(0.0),
            CostDistribution::PiecewiseCdf { knots } => {
                let omega = knots.last().unwrap().0;
                if x >= omega {
                    let last = knots.len() - 2;
                    let s = segment_slope(knots, last);
                    if s <= 0.0 {
                        return Err(DistError::UndefinedDensity(x));
                    }
                    let lam_end = lambda_on_segment(knots, last, omega);
                    // within a linear segment lambda has slope 2
                    Ok(lam_end + 2.0 * (x - omega))
                } else if x < knots[0].0 {
                    Ok(x)
                } else {
                    let j = segment_of(knots, x).unwrap();
                    if segment_slope(knots, j) <= 0.0 {
                        return Err(DistError::UndefinedDensity(x));
                    }
                    Ok(lambda_on_segment(knots, j, x))
                }
            }
        }
    }

    /// Inverse of the virtual cost: least `x >= 0` with `lambda(x) >= y`.
    /// Requires a regular (nondecreasing) virtual cost.
    pub fn inverse_virtual_cost(&self, y: f64) -> Result<f64, DistError> {
        if y < -NEGATIVE_SLACK {
            return Err(DistError::NegativeTarget(y));
        }
        let y = y.max(0.0);
        match self {
            CostDistribution::Uniform { lo, hi: _ } => {
                Ok(if y < *lo { y } else { (y + lo) / 2.0 })
            }
            CostDistribution::IdentityVirtual { .. } => Ok(y),
            CostDistribution::ZeroVirtual => Err(DistError::PaymentUnsupported),
            CostDistribution::PiecewiseCdf { knots } => {
                if !self.check_regularity(DEFAULT_REGULARITY_GRID) {
                    return Err(DistError::NotRegular);
                }
                if y < knots[0].0 {
                    return Ok(y);
                }
                for j in 0..knots.len() - 1 {
                    let s = segment_slope(knots, j);
                    if s <= 0.0 {
                        return Err(DistError::UndefinedDensity(knots[j].0));
                    }
                    let lam_lo = lambda_on_segment(knots, j, knots[j].0);
                    let lam_hi = lambda_on_segment(knots, j, knots[j + 1].0);
                    if y < lam_lo {
                        // target falls in the upward jump at the left knot
                        return Ok(knots[j].0);
                    }
                    if y <= lam_hi {
                        // lambda = 2x + (F_j/s - x_j) on the segment
                        return Ok(knots[j].0 + (y - lam_lo) / 2.0);
                    }
                }
                let omega = knots.last().unwrap().0;
                let last = knots.len() - 2;
                let lam_end = lambda_on_segment(knots, last, omega);
                Ok(omega + (y - lam_end) / 2.0)
            }
        }
    }

    /// True when the virtual cost is nondecreasing on `[0, omega]`, judged
    /// analytically where the kind allows and on a sampled grid otherwise.
    pub fn check_regularity(&self, grid_points: usize) -> bool {
        match self {
            CostDistribution::Uniform { .. }
            | CostDistribution::IdentityVirtual { .. }
            | CostDistribution::ZeroVirtual => true,
            CostDistribution::PiecewiseCdf { knots } => {
                // analytic: within segments lambda rises with slope 2, so only
                // the jumps at interior knots can break monotonicity
                for j in 1..knots.len() - 1 {
                    let s_prev = segment_slope(knots, j - 1);
                    let s_next = segment_slope(knots, j);
                    if s_prev <= 0.0 || s_next <= 0.0 {
                        continue; // flat pieces are domain errors, not verdicts
                    }
                    let left = lambda_on_segment(knots, j - 1, knots[j].0);
                    let right = lambda_on_segment(knots, j, knots[j].0);
                    if right < left - 1e-12 {
                        return false;
                    }
                }
                // grid scan over the support, skipping undefined points
                let omega = knots.last().unwrap().0;
                let n = grid_points.max(2);
                let mut prev: Option<f64> = None;
                for i in 0..n {
                    let x = omega * i as f64 / (n - 1) as f64;
                    let Ok(lam) = self.virtual_cost(x) else { continue };
                    if let Some(p) = prev {
                        if lam < p - 1e-12 {
                            return false;
                        }
                    }
                    prev = Some(lam);
                }
                true
            }
        }
    }

    /// True when payments may be computed against this prior: the virtual
    /// cost must be strictly increasing (including the extension).
    pub fn supports_payment(&self) -> bool {
        match self {
            CostDistribution::Uniform { .. } | CostDistribution::IdentityVirtual { .. } => true,
            CostDistribution::ZeroVirtual => false,
            CostDistribution::PiecewiseCdf { .. } => {
                self.check_regularity(DEFAULT_REGULARITY_GRID)
            }
        }
    }

    /// Draw one cost from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, DistError> {
        match self {
            CostDistribution::Uniform { lo, hi } => Ok(rng.gen_range(*lo..*hi)),
            CostDistribution::IdentityVirtual { point } => Ok(*point),
            CostDistribution::ZeroVirtual => Err(DistError::NoSampler),
            CostDistribution::PiecewiseCdf { knots } => {
                let u: f64 = rng.gen_range(0.0..1.0);
                for j in 0..knots.len() - 1 {
                    let (x0, f0) = knots[j];
                    let (x1, f1) = knots[j + 1];
                    if u <= f1 {
                        if f1 > f0 {
                            return Ok(x0 + (u - f0) / (f1 - f0) * (x1 - x0));
                        }
                        return Ok(x0);
                    }
                }
                Ok(knots.last().unwrap().0)
            }
        }
    }

    /// Expected cost under the prior.
    pub fn mean(&self) -> Result<f64, DistError> {
        match self {
            CostDistribution::Uniform { lo, hi } => Ok((lo + hi) / 2.0),
            CostDistribution::IdentityVirtual { point } => Ok(*point),
            CostDistribution::ZeroVirtual => Err(DistError::NoSampler),
            CostDistribution::PiecewiseCdf { knots } => {
                let mut m = 0.0;
                for j in 0..knots.len() - 1 {
                    let (x0, f0) = knots[j];
                    let (x1, f1) = knots[j + 1];
                    m += (f1 - f0) * (x0 + x1) / 2.0;
                }
                Ok(m)
            }
        }
    }
}

fn segment_of(knots: &[(f64, f64)], x: f64) -> Option<usize> {
    if x < knots[0].0 || x >= knots.last().unwrap().0 {
        return None;
    }
    (0..knots.len() - 1).find(|&j| x >= knots[j].0 && x < knots[j + 1].0)
}

fn segment_slope(knots: &[(f64, f64)], j: usize) -> f64 {
    (knots[j + 1].1 - knots[j].1) / (knots[j + 1].0 - knots[j].0)
}

fn lambda_on_segment(knots: &[(f64, f64)], j: usize, x: f64) -> f64 {
    let s = segment_slope(knots, j);
    let (x0, f0) = knots[j];
    x + (f0 + s * (x - x0)) / s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn uniform30() -> CostDistribution {
        CostDistribution::Uniform { lo: 0.0, hi: 30.0 }
    }

    #[test]
    fn uniform_virtual_cost_doubles() {
        let d = uniform30();
        assert_eq!(d.virtual_cost(10.0).unwrap(), 20.0);
        assert_eq!(d.virtual_cost(0.0).unwrap(), 0.0);
        // extension keeps the slope beyond the support
        assert_eq!(d.virtual_cost(45.0).unwrap(), 90.0);
    }

    #[test]
    fn identity_virtual_cost_is_identity() {
        let d = CostDistribution::IdentityVirtual { point: 10.0 };
        assert_eq!(d.virtual_cost(10.0).unwrap(), 10.0);
        assert_eq!(d.virtual_cost(0.0).unwrap(), 0.0);
        assert_eq!(d.inverse_virtual_cost(7.5).unwrap(), 7.5);
    }

    #[test]
    fn uniform_inverse_matches_examples() {
        let d = uniform30();
        assert_eq!(d.inverse_virtual_cost(20.0).unwrap(), 10.0);
        assert_eq!(d.inverse_virtual_cost(90.0).unwrap(), 45.0);
    }

    #[test]
    fn inverse_clamps_float_noise_and_rejects_real_negatives() {
        let d = uniform30();
        assert_eq!(d.inverse_virtual_cost(-1e-12).unwrap(), 0.0);
        assert!(matches!(
            d.inverse_virtual_cost(-0.5),
            Err(DistError::NegativeTarget(_))
        ));
    }

    #[test]
    fn round_trip_on_support() {
        let dists = [
            uniform30(),
            CostDistribution::Uniform { lo: 2.0, hi: 8.0 },
            CostDistribution::IdentityVirtual { point: 3.0 },
            CostDistribution::PiecewiseCdf {
                knots: vec![(0.0, 0.0), (10.0, 0.8), (30.0, 1.0)],
            },
        ];
        for d in &dists {
            let omega = d.support_hi().unwrap_or(50.0);
            for i in 0..=100 {
                let x = omega * i as f64 / 100.0;
                let Ok(lam) = d.virtual_cost(x) else { continue };
                let back = d.inverse_virtual_cost(lam).unwrap();
                assert!(
                    (back - x).abs() <= 1e-9,
                    "{d:?}: x={x} lambda={lam} back={back}"
                );
            }
        }
    }

    #[test]
    fn virtual_cost_dominates_cost_and_is_monotone() {
        let dists = [
            uniform30(),
            CostDistribution::PiecewiseCdf {
                knots: vec![(0.0, 0.0), (10.0, 0.8), (30.0, 1.0)],
            },
        ];
        for d in &dists {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=400 {
                let x = 60.0 * i as f64 / 400.0;
                let Ok(lam) = d.virtual_cost(x) else { continue };
                assert!(lam >= x - 1e-12, "{d:?} at {x}");
                assert!(lam >= prev - 1e-12, "{d:?} not monotone at {x}");
                prev = lam;
            }
        }
    }

    #[test]
    fn builtin_kinds_are_regular() {
        assert!(uniform30().check_regularity(101));
        assert!(CostDistribution::IdentityVirtual { point: 1.0 }.check_regularity(101));
        assert!(CostDistribution::ZeroVirtual.check_regularity(101));
    }

    #[test]
    fn density_spike_breaks_regularity() {
        // low density, then a spike: F/f drops discontinuously at the knot
        let d = CostDistribution::PiecewiseCdf {
            knots: vec![(0.0, 0.0), (10.0, 0.2), (11.0, 0.8), (30.0, 1.0)],
        };
        assert!(d.validate().is_ok());
        assert!(!d.check_regularity(10_001));
        assert!(matches!(
            d.inverse_virtual_cost(5.0),
            Err(DistError::NotRegular)
        ));
    }

    #[test]
    fn zero_virtual_rejects_payments_and_sampling() {
        let d = CostDistribution::ZeroVirtual;
        assert_eq!(d.virtual_cost(100.0).unwrap(), 0.0);
        assert!(!d.supports_payment());
        assert!(matches!(
            d.sample(&mut StdRng::seed_from_u64(0)),
            Err(DistError::NoSampler)
        ));
    }

    #[test]
    fn sampling_stays_in_support() {
        let d = CostDistribution::PiecewiseCdf {
            knots: vec![(0.0, 0.0), (5.0, 0.5), (20.0, 1.0)],
        };
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = d.sample(&mut rng).unwrap();
            assert!((0.0..=20.0).contains(&x));
        }
    }

    #[test]
    fn descriptor_json_round_trip() {
        let src = r#"{"dist":"uniform","hi":30}"#;
        let d: CostDistribution = serde_json::from_str(src).unwrap();
        assert_eq!(d, uniform30());
        let src = r#"{"dist":"piecewise_cdf","knots":[[0,0],[10,0.5],[20,1]]}"#;
        let d: CostDistribution = serde_json::from_str(src).unwrap();
        assert!(d.validate().is_ok());
    }
}
