use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Ensemble;
use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

/// Histogram estimate of `ρ(t, r)` on uniform radial bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDensityProfile {
    pub bin_edges: Vec<f64>,
    pub bin_density: Vec<f64>,
}

impl RadialDensityProfile {
    pub fn shell_volume(&self, k: usize) -> f64 {
        let (a, b) = (self.bin_edges[k], self.bin_edges[k + 1]);
        4.0 * PI / 3.0 * (b * b * b - a * a * a)
    }

    /// `Σ_k ρ_k · V_k`.
    pub fn binned_mass(&self) -> f64 {
        let terms: Vec<f64> = (0..self.bin_density.len()).map(|k| self.bin_density[k] * self.shell_volume(k)).collect();
        pairwise_sum(&terms)
    }
}

/// `⌈√N⌉`, at least one.
pub fn default_bin_count(n_particles: usize) -> usize {
    ((n_particles as f64).sqrt().ceil() as usize).max(1)
}

/// Uniform bins over `[0, R₂]`.
pub fn build_radial_profile(ensemble: &Ensemble, n_bins: usize) -> Result<RadialDensityProfile> {
    if n_bins == 0 {
        return Err(Error::domain("at least one bin is required"));
    }
    ensemble.require_nonempty()?;
    let outer = ensemble.outer_radius().unwrap_or(0.0);
    let width = outer / n_bins as f64;
    let bin_edges: Vec<f64> = (0..=n_bins).map(|k| if k == n_bins { outer } else { k as f64 * width }).collect();

    let mut per_bin: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for p in &ensemble.particles {
        let k = ((p.r / width) as usize).min(n_bins - 1);
        per_bin[k].push(p.mass);
    }
    let mut profile = RadialDensityProfile { bin_edges, bin_density: vec![0.0; n_bins] };
    for (k, masses) in per_bin.iter().enumerate() {
        if !masses.is_empty() {
            profile.bin_density[k] = pairwise_sum(masses) / profile.shell_volume(k);
        }
    }
    Ok(profile)
}

/// Midpoint-rule `‖ρ‖_q = (Σ_k 4π r̄_k² Δr_k ρ_k^q)^{1/q}`.
pub fn lq_norm(profile: &RadialDensityProfile, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::domain(format!("L^q exponent must be finite and >= 1, got {q}")));
    }
    let terms: Vec<f64> = profile
        .bin_density
        .iter()
        .enumerate()
        .map(|(k, &rho)| {
            let (a, b) = (profile.bin_edges[k], profile.bin_edges[k + 1]);
            let mid = 0.5 * (a + b);
            4.0 * PI * mid * mid * (b - a) * rho.powf(q)
        })
        .collect();
    Ok(pairwise_sum(&terms).powf(1.0 / q))
}
