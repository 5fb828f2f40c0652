//! Lévy concentration function of the shell representation.
//!
//! A thin shell of radius `r` meets the ball `B(x₀, R)`, `|x₀| = d > 0`, in a
//! spherical cap holding the fraction `(1 − μ)/2` of its mass, with
//! `μ = (r² + d² − R²)/(2 d r)`. For a spherically symmetric density the
//! supremum over `x₀ ∈ ℝ³` reduces to a supremum over `d ≥ 0`.

use super::{radial_order, Ensemble};
use crate::error::{Error, Result};
use crate::sum::{pairwise_sum_map, Neumaier};

const DIRECT_WINDOW: usize = 64;

fn check_radius(big_r: f64) -> Result<()> {
    if !(big_r > 0.0) || !big_r.is_finite() {
        return Err(Error::domain(format!("ball radius must be positive and finite, got {big_r}")));
    }
    Ok(())
}

#[inline]
fn cap_fraction(r: f64, d: f64, big_r: f64) -> f64 {
    if d == 0.0 {
        return if r < big_r { 1.0 } else { 0.0 };
    }
    let mu = (r * r + d * d - big_r * big_r) / (2.0 * d * r);
    ((1.0 - mu) * 0.5).clamp(0.0, 1.0)
}

/// Mass inside the ball of radius `big_r` centred at distance `d` from the
/// origin. Direct `O(N)` sum.
pub fn concentration_mass(ensemble: &Ensemble, d: f64, big_r: f64) -> Result<f64> {
    check_radius(big_r)?;
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("centre distance must be finite and non-negative, got {d}")));
    }
    let m = pairwise_sum_map(&ensemble.particles, |p| p.mass * cap_fraction(p.r, d, big_r));
    Ok(m.clamp(0.0, ensemble.total_mass()))
}

/// `sup_{d ≥ 0}` of [`concentration_mass`].
pub fn concentration_function(ensemble: &Ensemble, big_r: f64) -> Result<f64> {
    check_radius(big_r)?;
    ensemble.require_nonempty()?;
    Ok(ConcentrationIndex::new(ensemble).sup(big_r)?.0)
}

/// Sorted radii with compensated prefix sums of `m`, `m/r` and `m·r`.
///
/// Inside the partial-cap window `|d − R| < r < d + R` the cap fraction is
/// `(R² − d²)/(4 d r) + ½ − r/(4 d)`, so each evaluation costs two binary
/// searches.
#[derive(Debug, Clone)]
pub struct ConcentrationIndex {
    radii: Vec<f64>,
    masses: Vec<f64>,
    prefix_m: Vec<f64>,
    prefix_m_over_r: Vec<f64>,
    prefix_m_r: Vec<f64>,
    total: f64,
}

impl ConcentrationIndex {
    pub fn new(ensemble: &Ensemble) -> Self {
        Self::from_order(ensemble, &radial_order(ensemble))
    }

    pub fn from_order(ensemble: &Ensemble, order: &[usize]) -> Self {
        let n = order.len();
        let mut radii = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n);
        let mut prefix_m = Vec::with_capacity(n + 1);
        let mut prefix_m_over_r = Vec::with_capacity(n + 1);
        let mut prefix_m_r = Vec::with_capacity(n + 1);
        let (mut s0, mut sm1, mut s1) = (Neumaier::default(), Neumaier::default(), Neumaier::default());
        prefix_m.push(0.0);
        prefix_m_over_r.push(0.0);
        prefix_m_r.push(0.0);
        for &i in order {
            let p = &ensemble.particles[i];
            radii.push(p.r);
            masses.push(p.mass);
            s0.add(p.mass);
            sm1.add(p.mass / p.r);
            s1.add(p.mass * p.r);
            prefix_m.push(s0.value());
            prefix_m_over_r.push(sm1.value());
            prefix_m_r.push(s1.value());
        }
        ConcentrationIndex { radii, masses, prefix_m, prefix_m_over_r, prefix_m_r, total: ensemble.total_mass() }
    }

    pub fn outer_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }

    fn below(&self, x: f64) -> usize {
        self.radii.partition_point(|&r| r < x)
    }

    /// Same quantity as [`concentration_mass`], in `O(log N)`.
    pub fn mass_in_ball(&self, d: f64, big_r: f64) -> f64 {
        if d == 0.0 {
            return self.prefix_m[self.below(big_r)];
        }
        let lo = self.below((d - big_r).abs());
        let hi = self.below(d + big_r);
        let full = if d < big_r { self.prefix_m[lo] } else { 0.0 };
        let partial = if hi <= lo {
            0.0
        } else if hi - lo <= DIRECT_WINDOW {
            let mut acc = Neumaier::default();
            for k in lo..hi {
                acc.add(self.masses[k] * cap_fraction(self.radii[k], d, big_r));
            }
            acc.value()
        } else {
            let s0 = self.prefix_m[hi] - self.prefix_m[lo];
            let sm1 = self.prefix_m_over_r[hi] - self.prefix_m_over_r[lo];
            let s1 = self.prefix_m_r[hi] - self.prefix_m_r[lo];
            (big_r * big_r - d * d) / (4.0 * d) * sm1 + 0.5 * s0 - s1 / (4.0 * d)
        };
        (full + partial).clamp(0.0, self.total)
    }

    /// Supremum over centres and the centre distance attaining it.
    ///
    /// The breakpoints `|r_i − R|` and `r_i + R` cut `d > 0` into segments on
    /// which the window is fixed and the mass is `α + β/d − γ d` with
    /// `γ ≥ 0`; each segment is maximised in closed form.
    pub fn sup(&self, big_r: f64) -> Result<(f64, f64)> {
        check_radius(big_r)?;
        let n = self.radii.len();
        if n == 0 {
            return Err(Error::domain("ensemble is empty"));
        }
        if big_r > self.outer_radius() {
            return Ok((self.total, 0.0));
        }
        let mut events: Vec<f64> = Vec::with_capacity(2 * n + 1);
        events.push(0.0);
        for &r in &self.radii {
            events.push((r - big_r).abs());
            events.push(r + big_r);
        }
        events.sort_unstable_by(f64::total_cmp);
        events.dedup();

        let mut best = (self.mass_in_ball(0.0, big_r), 0.0);
        let mut lo = self.below(big_r);
        let mut hi = lo;
        for seg in events.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let mid = 0.5 * (a + b);
            let inner = (mid - big_r).abs();
            while lo > 0 && self.radii[lo - 1] >= inner {
                lo -= 1;
            }
            while lo < n && self.radii[lo] < inner {
                lo += 1;
            }
            while hi < n && self.radii[hi] < mid + big_r {
                hi += 1;
            }
            while hi > 0 && self.radii[hi - 1] >= mid + big_r {
                hi -= 1;
            }
            if hi <= lo {
                continue;
            }
            let full = if mid < big_r { self.prefix_m[lo] } else { 0.0 };
            let (s0, sm1, beta) = if hi - lo <= DIRECT_WINDOW {
                let (mut s0, mut sm1, mut beta) = (Neumaier::default(), Neumaier::default(), Neumaier::default());
                for k in lo..hi {
                    let (r, m) = (self.radii[k], self.masses[k]);
                    s0.add(m);
                    sm1.add(m / r);
                    beta.add(m * (big_r - r) * (big_r + r) / r);
                }
                (s0.value(), sm1.value(), beta.value())
            } else {
                let s0 = self.prefix_m[hi] - self.prefix_m[lo];
                let sm1 = self.prefix_m_over_r[hi] - self.prefix_m_over_r[lo];
                let s1 = self.prefix_m_r[hi] - self.prefix_m_r[lo];
                (s0, sm1, big_r * big_r * sm1 - s1)
            };
            let mass_at = |d: f64| (full + 0.5 * s0 + beta / (4.0 * d) - d * sm1 / 4.0).clamp(0.0, self.total);
            let mut consider = |d: f64| {
                if d > 0.0 {
                    let m = mass_at(d);
                    if m > best.0 {
                        best = (m, d);
                    }
                }
            };
            consider(a);
            consider(b);
            if beta < 0.0 && sm1 > 0.0 {
                let stationary = (-beta / sm1).sqrt();
                if stationary > a && stationary < b {
                    consider(stationary);
                }
            }
        }
        Ok(best)
    }
}
