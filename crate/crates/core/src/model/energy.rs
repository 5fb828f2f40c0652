use std::f64::consts::PI;

use super::{radial_order, Ensemble};
use crate::error::{Error, Result};
use crate::sum::{pairwise_sum, pairwise_sum_map, Neumaier};

fn require_positive_radii(ensemble: &Ensemble) -> Result<()> {
    if let Some(p) = ensemble.particles.iter().find(|p| !(p.r > 0.0)) {
        return Err(Error::domain(format!("radius must be positive, got {}", p.r)));
    }
    Ok(())
}

/// `E_pot = (1/8π) ∫₀^∞ M(<r)²/r² dr`, exact for the step-function
/// cumulative mass of the shell representation.
pub fn potential_energy(ensemble: &Ensemble) -> Result<f64> {
    ensemble.require_nonempty()?;
    require_positive_radii(ensemble)?;
    let order = radial_order(ensemble);
    Ok(potential_energy_sorted(ensemble, &order))
}

/// [`potential_energy`] for a precomputed [`radial_order`].
pub fn potential_energy_sorted(ensemble: &Ensemble, order: &[usize]) -> f64 {
    let ps = &ensemble.particles;
    let n = order.len();
    if n == 0 {
        return 0.0;
    }
    let mut terms = Vec::with_capacity(n);
    let mut running = Neumaier::default();
    for k in 0..n - 1 {
        running.add(ps[order[k]].mass);
        let m = running.value();
        let (ra, rb) = (ps[order[k]].r, ps[order[k + 1]].r);
        terms.push(m * m * (1.0 / ra - 1.0 / rb));
    }
    running.add(ps[order[n - 1]].mass);
    let total = running.value();
    terms.push(total * total / ps[order[n - 1]].r);
    pairwise_sum(&terms) / (8.0 * PI)
}

/// `E_kin = ½ Σ mass (w² + ℓ²/r²)`.
pub fn kinetic_energy(ensemble: &Ensemble) -> Result<f64> {
    if let Some(p) = ensemble.particles.iter().find(|p| p.r <= 0.0 && p.ell > 0.0) {
        return Err(Error::Singularity {
            time: ensemble.time,
            msg: format!("particle at r = {} carries angular momentum {}", p.r, p.ell),
        });
    }
    Ok(0.5 * pairwise_sum_map(&ensemble.particles, |p| {
        if p.ell == 0.0 {
            p.mass * p.w * p.w
        } else {
            p.mass * p.momentum_sq()
        }
    }))
}

/// `⟨(Δx)²⟩ = (1/M) Σ mass r²`; the centre of mass sits at the origin.
pub fn statistical_dispersion(ensemble: &Ensemble) -> Result<f64> {
    ensemble.require_nonempty()?;
    let s = pairwise_sum_map(&ensemble.particles, |p| p.mass * p.r * p.r);
    Ok(s / ensemble.total_mass())
}

/// `∫ x·p f = Σ mass r w`.
pub fn dilation_moment(ensemble: &Ensemble) -> f64 {
    pairwise_sum_map(&ensemble.particles, |p| p.mass * p.r * p.w)
}

/// `∫ |x − t p|² f = Σ mass (r² − 2 t r w + t² (w² + ℓ²/r²))`.
pub fn conformal_moment(ensemble: &Ensemble, t: f64) -> Result<f64> {
    require_positive_radii(ensemble)?;
    Ok(pairwise_sum_map(&ensemble.particles, |p| {
        // |x - t p|² written as (r - t w)² + (t ℓ / r)² keeps it non-negative
        let radial = p.r - t * p.w;
        let tangential = t * p.ell / p.r;
        p.mass * (radial * radial + tangential * tangential)
    }))
}
