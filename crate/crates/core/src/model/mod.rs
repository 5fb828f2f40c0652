//! Reduced phase-space representation of a spherically symmetric
//! distribution and its instantaneous diagnostics.
//!
//! A particle is one mass shell `(r, w, ell)`: radius, radial momentum
//! `x·p/r` and the conserved modulus `|x∧p|`. Units are `4πG = 1`, so the
//! radial acceleration produced by an enclosed mass `M(<r)` is
//! `-M(<r) / (4π r²)`.

mod concentration;
mod diagnostics;
mod energy;
mod galilean;
mod profile;

pub use concentration::{
    concentration_function, concentration_mass, ConcentrationIndex,
};
pub use diagnostics::{diagnose, DiagnosticsConfig, DiagnosticsRecord};
pub use energy::{
    conformal_moment, dilation_moment, kinetic_energy, potential_energy, potential_energy_sorted,
    statistical_dispersion,
};
pub use galilean::{galilean_invariant, galilean_shift};
pub use profile::{build_radial_profile, default_bin_count, lq_norm, RadialDensityProfile};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{pairwise_sum, pairwise_sum_map, Neumaier};

/// Subpopulation label carried by each particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    #[default]
    Untagged,
    Shell,
    Core,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Untagged => "untagged",
            Group::Shell => "shell",
            Group::Core => "core",
        })
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "untagged" => Ok(Group::Untagged),
            "shell" => Ok(Group::Shell),
            "core" => Ok(Group::Core),
            other => Err(Error::domain(format!("unknown group `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellParticle {
    pub r: f64,
    pub w: f64,
    pub ell: f64,
    pub mass: f64,
    pub group: Group,
}

impl ShellParticle {
    pub fn new(r: f64, w: f64, ell: f64, mass: f64) -> Result<Self> {
        let p = ShellParticle { r, w, ell, mass, group: Group::Untagged };
        p.validate()?;
        Ok(p)
    }

    pub fn with_group(mut self, group: Group) -> Self {
        self.group = group;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.w.is_finite() && self.ell.is_finite() && self.mass.is_finite()) {
            return Err(Error::domain("particle fields must be finite"));
        }
        if self.r <= 0.0 {
            return Err(Error::domain(format!("particle radius must be positive, got {}", self.r)));
        }
        if self.mass <= 0.0 {
            return Err(Error::domain(format!("particle mass must be positive, got {}", self.mass)));
        }
        if self.ell < 0.0 {
            return Err(Error::domain(format!("angular momentum must be non-negative, got {}", self.ell)));
        }
        Ok(())
    }

    /// `|p|² = w² + ℓ²/r²`.
    #[inline]
    pub fn momentum_sq(&self) -> f64 {
        self.w * self.w + self.ell * self.ell / (self.r * self.r)
    }
}

/// Time-stamped set of shell particles: the discrete `f(t)`.
///
/// Spherical symmetry is exact in this representation, so the total linear
/// momentum, the total angular momentum vector and the centre of mass all
/// vanish identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub time: f64,
    pub particles: Vec<ShellParticle>,
    pub total_mass_cache: Option<f64>,
}

impl Ensemble {
    pub fn new(time: f64, particles: Vec<ShellParticle>) -> Result<Self> {
        for p in &particles {
            p.validate()?;
        }
        let mut ens = Ensemble { time, particles, total_mass_cache: None };
        ens.total_mass_cache = Some(ens.compute_total_mass());
        Ok(ens)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.particles.is_empty() {
            Err(Error::domain("ensemble is empty"))
        } else {
            Ok(())
        }
    }

    fn compute_total_mass(&self) -> f64 {
        pairwise_sum_map(&self.particles, |p| p.mass)
    }

    /// Total mass `M = Σ mass_i`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass_cache.unwrap_or_else(|| self.compute_total_mass())
    }

    /// Total linear momentum; identically zero under spherical symmetry.
    pub fn linear_momentum(&self) -> [f64; 3] {
        [0.0; 3]
    }

    /// Particles carrying `group`, as a new ensemble at the same time.
    pub fn subset(&self, group: Group) -> Ensemble {
        let particles: Vec<_> = self.particles.iter().copied().filter(|p| p.group == group).collect();
        let mut ens = Ensemble { time: self.time, particles, total_mass_cache: None };
        ens.total_mass_cache = Some(ens.compute_total_mass());
        ens
    }

    pub fn has_group(&self, group: Group) -> bool {
        self.particles.iter().any(|p| p.group == group)
    }

    /// Inner support radius `R₁`, optionally restricted to one group.
    pub fn inner_radius(&self, group: Option<Group>) -> Option<f64> {
        self.particles
            .iter()
            .filter(|p| group.is_none_or(|g| p.group == g))
            .map(|p| p.r)
            .min_by(f64::total_cmp)
    }

    /// Outer support radius `R₂`.
    pub fn outer_radius(&self) -> Option<f64> {
        self.particles.iter().map(|p| p.r).max_by(f64::total_cmp)
    }

    /// Concatenation of two ensembles; the time of `self` is kept.
    pub fn concat(&self, other: &Ensemble) -> Ensemble {
        let mut particles = self.particles.clone();
        particles.extend_from_slice(&other.particles);
        let mut ens = Ensemble { time: self.time, particles, total_mass_cache: None };
        ens.total_mass_cache = Some(ens.compute_total_mass());
        ens
    }
}

/// Particle indices ordered by `(r, index)`.
///
/// The order is total, so the parallel sort is deterministic regardless of
/// the number of worker threads.
pub fn radial_order(ensemble: &Ensemble) -> Vec<usize> {
    let ps = &ensemble.particles;
    let mut order: Vec<usize> = (0..ps.len()).collect();
    order.par_sort_unstable_by(|&a, &b| ps[a].r.total_cmp(&ps[b].r).then(a.cmp(&b)));
    order
}

/// Mass strictly inside each particle's own radius, indexed like
/// `ensemble.particles`. Coincident radii see only strictly smaller ones.
pub fn enclosed_masses(ensemble: &Ensemble, order: &[usize]) -> Vec<f64> {
    let ps = &ensemble.particles;
    let mut enclosed = vec![0.0; ps.len()];
    let mut running = Neumaier::default();
    let mut k = 0;
    while k < order.len() {
        let r = ps[order[k]].r;
        let below = running.value();
        let mut j = k;
        while j < order.len() && ps[order[j]].r == r {
            enclosed[order[j]] = below;
            running.add(ps[order[j]].mass);
            j += 1;
        }
        k = j;
    }
    enclosed
}

/// Mass strictly inside radius `r`.
pub fn cumulative_mass(ensemble: &Ensemble, r: f64) -> Result<f64> {
    ensemble.require_nonempty()?;
    if !r.is_finite() {
        return Err(Error::domain(format!("query radius must be finite, got {r}")));
    }
    if r < 0.0 {
        return Err(Error::domain(format!("query radius must be non-negative, got {r}")));
    }
    let inside: Vec<f64> = ensemble.particles.iter().filter(|p| p.r < r).map(|p| p.mass).collect();
    Ok(pairwise_sum(&inside))
}
