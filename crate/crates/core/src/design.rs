//! Selective π-pulse design for DC pulses.
//!
//! A DC pulse of magnitude `B` and duration `t` rotates spin `i` by
//! `γ_i B t` about the field axis. A pulse is a selective π pulse on a set
//! `S` when every spin in `S` turns by an odd multiple of π and every other
//! spin by an even multiple. The overlap with that ideal is
//!
//! ```text
//! F = Π_{i∈S} |sin(γ_i B t / 2)| · Π_{j∉S} |cos(γ_j B t / 2)|
//! ```
//!
//! which only depends on `|B|` and `t`; the field axis is chosen by the
//! sequence compiler.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{FieldVector, SpinSystem};

/// Grid points per period of the fastest spin precession.
pub const POINTS_PER_PERIOD: f64 = 40.0;

/// Golden-section stopping width in seconds.
pub const DURATION_RESOLUTION: f64 = 1e-9;

/// Product fidelity a compiled π pulse must reach.
pub const DEFAULT_PI_THRESHOLD: f64 = 0.995;

/// Longest π pulse the compiler will look for.
pub const DEFAULT_PI_MAX_DURATION: f64 = 20e-3;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Set of 1-based spin indices that should receive an odd-π rotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct TargetSet(BTreeSet<usize>);

impl TargetSet {
    pub fn new(spins: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let set: BTreeSet<usize> = spins.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&s| s == 0 || s > n) {
            return Err(Error::InvalidTargetSet(format!("spin {bad} outside 1..={n}")));
        }
        Ok(TargetSet(set))
    }

    pub fn contains(&self, spin: usize) -> bool {
        self.0.contains(&spin)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.0.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `F(t)` for a selective π pulse on `targets` at field magnitude `b`.
pub fn product_fidelity(sys: &SpinSystem, targets: &TargetSet, b: f64, t: f64) -> f64 {
    (1..=sys.len())
        .map(|i| {
            let half = sys.gamma(i) * b * t / 2.0;
            if targets.contains(i) {
                half.sin().abs()
            } else {
                half.cos().abs()
            }
        })
        .product()
}

/// Integers approximating `γ_target/γ_spectator ≈ (2m₁+1)/(2m_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommensurabilitySolution {
    pub m_target: i64,
    pub m_spectator: i64,
    pub achieved_ratio_error: f64,
}

impl CommensurabilitySolution {
    pub fn ratio(&self) -> f64 {
        (2 * self.m_target + 1) as f64 / (2 * self.m_spectator) as f64
    }

    /// `(2m₁+1)π / (γ_target B)`: the pulse length that puts the target at an
    /// odd multiple of π.
    pub fn duration(&self, gamma_target: f64, b: f64) -> f64 {
        (2 * self.m_target + 1) as f64 * PI / (gamma_target * b).abs()
    }
}

/// Best `(m₁, m_j)` with `1 ≤ m_j ≤ max_m`; ties go to the smaller `m_j`.
pub fn rational_approx(gamma_target: f64, gamma_spectator: f64, max_m: u32) -> Result<CommensurabilitySolution> {
    if gamma_target == 0.0 || gamma_spectator == 0.0 || !gamma_target.is_finite() || !gamma_spectator.is_finite() {
        return Err(Error::Invalid("gyromagnetic ratios must be finite and nonzero".into()));
    }
    if max_m == 0 {
        return Err(Error::Invalid("max_m must be at least 1".into()));
    }
    let ratio = gamma_target / gamma_spectator;
    let mut best: Option<CommensurabilitySolution> = None;
    for mj in 1..=max_m as i64 {
        // nearest odd numerator to 2·m_j·ratio
        let centre = ((2 * mj) as f64 * ratio - 1.0) / 2.0;
        for m1 in [centre.floor() as i64, centre.ceil() as i64] {
            let err = (ratio - (2 * m1 + 1) as f64 / (2 * mj) as f64).abs();
            if best.is_none_or(|b| err < b.achieved_ratio_error) {
                best = Some(CommensurabilitySolution { m_target: m1, m_spectator: mj, achieved_ratio_error: err });
            }
        }
    }
    Ok(best.expect("max_m >= 1"))
}

/// A designed selective π pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub duration: f64,
    /// Field along `z`; the compiler re-orients it along the pulse axis.
    pub field: FieldVector,
    pub target_set: TargetSet,
    pub predicted_fidelity: f64,
}

impl DesignSolution {
    pub fn magnitude(&self) -> f64 {
        self.field.magnitude()
    }
}

fn validate_field(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidField(format!("field magnitude must be positive, got {b}")));
    }
    Ok(())
}

/// Grid spacing satisfying [`POINTS_PER_PERIOD`] for the fastest spin.
pub fn default_grid_spacing(sys: &SpinSystem, b: f64) -> f64 {
    let gmax = sys.gammas().into_iter().map(f64::abs).fold(0.0, f64::max);
    2.0 * PI / (POINTS_PER_PERIOD * gmax * b)
}

/// Number of grid points covering `[lo, hi]` at the default spacing.
pub fn default_grid_points(sys: &SpinSystem, b: f64, lo: f64, hi: f64) -> usize {
    let h = default_grid_spacing(sys, b);
    (((hi - lo) / h).ceil() as usize + 1).max(2)
}

/// Evenly spaced durations over `[lo, hi]`.
pub fn duration_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { hi } else { lo + step * k as f64 })
        .collect()
}

/// `(t, F(t))` over the grid. Evaluated in parallel, returned in grid order.
pub fn sweep(sys: &SpinSystem, targets: &TargetSet, b: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    validate_field(b)?;
    check_range(lo, hi)?;
    if points < 2 {
        return Err(Error::Invalid("grid needs at least 2 points".into()));
    }
    Ok(duration_grid(lo, hi, points)
        .into_par_iter()
        .map(|t| (t, product_fidelity(sys, targets, b, t)))
        .collect())
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::EmptyRange { lo, hi });
    }
    Ok(())
}

/// Maximizes a unimodal function on `[a, b]` to width [`DURATION_RESOLUTION`].
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > DURATION_RESOLUTION {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Index of the best grid point; ties go to the earlier (shorter) duration.
fn argmax(values: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (k, &(_, f)) in values.iter().enumerate() {
        if f > values[best].1 {
            best = k;
        }
    }
    best
}

fn refine(sys: &SpinSystem, targets: &TargetSet, b: f64, grid: &[(f64, f64)], k: usize) -> (f64, f64) {
    let lo = grid[k.saturating_sub(1)].0;
    let hi = grid[(k + 1).min(grid.len() - 1)].0;
    let (t, f) = golden_section_max(|t| product_fidelity(sys, targets, b, t), lo, hi);
    if f >= grid[k].1 {
        (t, f)
    } else {
        grid[k]
    }
}

/// Grid scan of the product fidelity over `[lo, hi]` followed by a
/// golden-section refinement around the best grid point. `grid_points`
/// defaults to [`POINTS_PER_PERIOD`] samples per fastest period.
pub fn find_pi_duration(
    sys: &SpinSystem,
    targets: &TargetSet,
    b: f64,
    range: (f64, f64),
    grid_points: Option<usize>,
) -> Result<DesignSolution> {
    let (lo, hi) = range;
    check_range(lo, hi)?;
    validate_field(b)?;
    let points = grid_points.unwrap_or_else(|| default_grid_points(sys, b, lo, hi));
    let grid = sweep(sys, targets, b, lo, hi, points)?;
    let (duration, predicted_fidelity) = refine(sys, targets, b, &grid, argmax(&grid));
    Ok(DesignSolution { duration, field: FieldVector::z(b), target_set: targets.clone(), predicted_fidelity })
}

/// Shortest local maximum of the product fidelity in `(0, t_max]` whose
/// refined value reaches `threshold`.
pub fn shortest_adequate_pi_duration(
    sys: &SpinSystem,
    targets: &TargetSet,
    b: f64,
    threshold: f64,
    t_max: f64,
) -> Result<DesignSolution> {
    validate_field(b)?;
    check_range(0.0, t_max)?;
    let points = default_grid_points(sys, b, 0.0, t_max);
    let grid = sweep(sys, targets, b, 0.0, t_max, points)?;
    for k in 1..grid.len() - 1 {
        let f = grid[k].1;
        if f >= grid[k - 1].1 && f >= grid[k + 1].1 {
            let (t, fr) = refine(sys, targets, b, &grid, k);
            if fr >= threshold {
                return Ok(DesignSolution {
                    duration: t,
                    field: FieldVector::z(b),
                    target_set: targets.clone(),
                    predicted_fidelity: fr,
                });
            }
        }
    }
    Err(Error::NoAdequatePulse { threshold, t_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{Species, GAMMA_13C, GAMMA_1H, GAMMA_31P};

    fn set(s: &[usize], n: usize) -> TargetSet {
        TargetSet::new(s.iter().copied(), n).unwrap()
    }

    #[test]
    fn zero_duration_has_zero_fidelity() {
        let sys = SpinSystem::chf();
        assert_eq!(product_fidelity(&sys, &set(&[1], 3), 9e-4, 0.0), 0.0);
    }

    #[test]
    fn ch_carbon_pulse() {
        let b = 9e-4;
        let t = PI / (GAMMA_13C * b);
        assert!((t - 5.19e-5).abs() < 0.01e-5);
        let f = product_fidelity(&SpinSystem::ch(), &set(&[1], 2), b, t);
        assert!((f - 0.9994).abs() <= 1e-4, "{f}");
    }

    #[test]
    fn ph_phosphorus_pulse() {
        let b = 9e-4;
        let t = 17.0 * PI / (GAMMA_31P * b);
        assert!((t - 5.48e-4).abs() < 0.01e-4);
        let f = product_fidelity(&SpinSystem::ph(), &set(&[1], 2), b, t);
        assert!((f - 0.9998).abs() <= 2e-4, "{f}");
    }

    #[test]
    fn rational_approx_known_cases() {
        let ch = rational_approx(GAMMA_13C, GAMMA_1H, 4).unwrap();
        assert_eq!((ch.m_target, ch.m_spectator), (0, 2));
        let ph = rational_approx(GAMMA_31P, GAMMA_1H, 10).unwrap();
        assert_eq!((ph.m_target, ph.m_spectator), (2, 6));
        let ph = rational_approx(GAMMA_31P, GAMMA_1H, 25).unwrap();
        assert_eq!((ph.m_target, ph.m_spectator), (8, 21));
        assert!((ph.ratio() - 17.0 / 42.0).abs() < 1e-15);
    }

    #[test]
    fn rational_approx_matches_brute_force() {
        let ratio = GAMMA_31P / GAMMA_1H;
        let mut best = (f64::INFINITY, 0, 0);
        for mj in 1..=25i64 {
            for m1 in -60..=60i64 {
                let e = (ratio - (2 * m1 + 1) as f64 / (2 * mj) as f64).abs();
                if e < best.0 {
                    best = (e, m1, mj);
                }
            }
        }
        let got = rational_approx(GAMMA_31P, GAMMA_1H, 25).unwrap();
        assert_eq!((got.m_target, got.m_spectator), (best.1, best.2));
    }

    #[test]
    fn rational_approx_ties_prefer_shorter() {
        // 1/2 is exact at m_j = 1, and again at m_j = 3 (3/6)
        let s = rational_approx(1.0, 2.0, 5).unwrap();
        assert_eq!((s.m_target, s.m_spectator), (0, 1));
        assert_eq!(s.achieved_ratio_error, 0.0);
    }

    #[test]
    fn rational_approx_rejects_zero() {
        assert!(rational_approx(0.0, 1.0, 3).is_err());
        assert!(rational_approx(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn exact_ratio_toy_reaches_unity() {
        let sys = SpinSystem::new(
            vec![
                crate::spin::Spin { name: "a".into(), gamma: 1e8 },
                crate::spin::Spin { name: "b".into(), gamma: 4e8 },
            ],
            &[],
        )
        .unwrap();
        let b = 1e-3;
        let t0 = PI / (1e8 * b);
        let sol = find_pi_duration(&sys, &set(&[1], 2), b, (0.8 * t0, 1.2 * t0), None).unwrap();
        assert!((sol.predicted_fidelity - 1.0).abs() < 1e-12);
        assert!((sol.duration - t0).abs() < 2e-9);
    }

    #[test]
    fn empty_range_rejected() {
        let sys = SpinSystem::ch();
        let s = set(&[1], 2);
        assert!(matches!(find_pi_duration(&sys, &s, 9e-4, (2e-4, 1e-4), None), Err(Error::EmptyRange { .. })));
        assert!(matches!(find_pi_duration(&sys, &s, 9e-4, (-1e-4, 1e-4), None), Err(Error::EmptyRange { .. })));
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (t, f) = golden_section_max(|x| 1.0 - (x - 3.3e-4).powi(2) * 1e6, 0.0, 1e-3);
        assert!((t - 3.3e-4).abs() < 1e-9);
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shortest_adequate_pulse_for_hf_spectators() {
        let sys = SpinSystem::chf();
        let sol = shortest_adequate_pi_duration(&sys, &set(&[2, 3], 3), 9e-4, DEFAULT_PI_THRESHOLD, 20e-3).unwrap();
        assert!((sol.duration - 1761.6e-6).abs() < 0.5e-6, "{}", sol.duration);
        assert!(sol.predicted_fidelity >= DEFAULT_PI_THRESHOLD);
    }

    #[test]
    fn impossible_threshold_reports_error() {
        let sys = SpinSystem::from_species(&[("a", Species::H1), ("b", Species::C13)], &[]).unwrap();
        let r = shortest_adequate_pi_duration(&sys, &set(&[1], 2), 9e-4, 1.5, 1e-4);
        assert!(matches!(r, Err(Error::NoAdequatePulse { .. })));
    }
}
