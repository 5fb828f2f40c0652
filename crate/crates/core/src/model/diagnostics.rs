use serde::{Deserialize, Serialize};

use super::concentration::ConcentrationIndex;
use super::energy::{conformal_moment, dilation_moment, kinetic_energy, potential_energy_sorted, statistical_dispersion};
use super::profile::{build_radial_profile, default_bin_count, lq_norm};
use super::{radial_order, Ensemble, Group};
use crate::error::Result;

/// Which concentration radii and `L^q` exponents to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub r_grid: Vec<f64>,
    pub q_list: Vec<f64>,
    /// Radial bins for `L^q` norms; `None` uses `⌈√N⌉`.
    pub n_bins: Option<usize>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { r_grid: vec![0.5, 1.0, 2.0, 4.0], q_list: vec![5.0 / 3.0], n_bins: None }
    }
}

/// One time sample of every monitored quantity.
///
/// Fields that only the particle simulator can supply are optional so that
/// analytic series (Kurth) share the same record type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy_total: Option<f64>,
    pub energy_kinetic: Option<f64>,
    pub energy_potential: Option<f64>,
    pub mass: f64,
    pub variance: f64,
    pub dilation_moment: Option<f64>,
    pub conformal_moment: Option<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub inner_radius_shell: Option<f64>,
    pub concentration: Vec<(f64, f64)>,
    pub lq_norms: Vec<(f64, f64)>,
}

impl DiagnosticsRecord {
    pub fn concentration_at(&self, big_r: f64) -> Option<f64> {
        self.concentration.iter().find(|(r, _)| *r == big_r).map(|&(_, m)| m)
    }

    pub fn lq_at(&self, q: f64) -> Option<f64> {
        self.lq_norms.iter().find(|(e, _)| *e == q).map(|&(_, v)| v)
    }
}

/// Evaluates every diagnostic on one snapshot, with a single radial sort.
pub fn diagnose(ensemble: &Ensemble, config: &DiagnosticsConfig) -> Result<DiagnosticsRecord> {
    ensemble.require_nonempty()?;
    let order = radial_order(ensemble);
    let e_kin = kinetic_energy(ensemble)?;
    let e_pot = potential_energy_sorted(ensemble, &order);
    let index = ConcentrationIndex::from_order(ensemble, &order);
    let concentration = config
        .r_grid
        .iter()
        .map(|&r| index.sup(r).map(|(m, _)| (r, m)))
        .collect::<Result<Vec<_>>>()?;
    let n_bins = config.n_bins.unwrap_or_else(|| default_bin_count(ensemble.len()));
    let profile = build_radial_profile(ensemble, n_bins)?;
    let lq_norms = config
        .q_list
        .iter()
        .map(|&q| lq_norm(&profile, q).map(|v| (q, v)))
        .collect::<Result<Vec<_>>>()?;
    let ps = &ensemble.particles;
    let shell_group = if ensemble.has_group(Group::Shell) { Some(Group::Shell) } else { None };
    Ok(DiagnosticsRecord {
        time: ensemble.time,
        energy_total: Some(e_kin - e_pot),
        energy_kinetic: Some(e_kin),
        energy_potential: Some(e_pot),
        mass: ensemble.total_mass(),
        variance: statistical_dispersion(ensemble)?,
        dilation_moment: Some(dilation_moment(ensemble)),
        conformal_moment: Some(conformal_moment(ensemble, ensemble.time)?),
        inner_radius: ps[order[0]].r,
        outer_radius: ps[order[order.len() - 1]].r,
        inner_radius_shell: ensemble.inner_radius(shell_group),
        concentration,
        lq_norms,
    })
}
