//! Deterministic initial configurations: an escaping shell, a static core of
//! circular orbits, and the two superposed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{kinetic_energy, potential_energy, Ensemble, Group, ShellParticle};

const SHELL_STREAM: u64 = 1;
const CORE_STREAM: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Homogeneous shell `R₁ ≤ r ≤ R₂` with uniform ranges of `w` and `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub mass: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub ell_min: f64,
    pub ell_max: f64,
    pub n: usize,
    pub seed: u64,
}

impl Default for ShellSpec {
    fn default() -> Self {
        ShellSpec { mass: 1.0, r_inner: 1.0, r_outer: 2.0, w_min: 0.5, w_max: 1.0, ell_min: 0.0, ell_max: 0.0, n: 10_000, seed: 1 }
    }
}

impl ShellSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::domain(format!("shell mass must be positive, got {}", self.mass)));
        }
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer) || !self.r_outer.is_finite() {
            return Err(Error::domain(format!("need 0 < r_inner < r_outer, got [{}, {}]", self.r_inner, self.r_outer)));
        }
        if !(self.w_min <= self.w_max) || !self.w_min.is_finite() || !self.w_max.is_finite() {
            return Err(Error::domain(format!("need w_min <= w_max, got [{}, {}]", self.w_min, self.w_max)));
        }
        if !(self.ell_min >= 0.0 && self.ell_min <= self.ell_max) || !self.ell_max.is_finite() {
            return Err(Error::domain(format!("need 0 <= ell_min <= ell_max, got [{}, {}]", self.ell_min, self.ell_max)));
        }
        if self.n == 0 {
            return Err(Error::domain("shell needs at least one particle"));
        }
        Ok(())
    }

    /// `inf w²` over the configured range.
    pub fn inf_w_sq(&self) -> f64 {
        if self.w_min <= 0.0 && self.w_max >= 0.0 {
            0.0
        } else {
            (self.w_min * self.w_min).min(self.w_max * self.w_max)
        }
    }

    /// Upper bound on `w² + ℓ²/r²` over the configured ranges.
    pub fn sup_momentum_sq(&self) -> f64 {
        let w = self.w_min.abs().max(self.w_max.abs());
        w * w + (self.ell_max / self.r_inner).powi(2)
    }
}

/// Escape condition for a shell moving out of the mass `M` it encloses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    /// `√(M/(2πR₁))`.
    pub threshold: f64,
    /// `W² = inf w² − M/(2πR₁)`; negative when the condition fails.
    pub margin_sq: f64,
    pub satisfied: bool,
}

impl EscapeReport {
    pub fn new(gravitating_mass: f64, r_inner: f64, inf_w_sq: f64, w_min: f64) -> Self {
        let critical = gravitating_mass / (2.0 * PI * r_inner);
        EscapeReport { threshold: critical.sqrt(), margin_sq: inf_w_sq - critical, satisfied: w_min > critical.sqrt() }
    }

    /// `W`, a lower bound on the radial speed for all time, when the
    /// condition holds.
    pub fn speed(&self) -> Option<f64> {
        (self.margin_sq > 0.0).then(|| self.margin_sq.sqrt())
    }
}

/// Samples the shell with equal-weight particles, stratified in enclosed mass.
pub fn build_shell(spec: &ShellSpec) -> Result<(Ensemble, EscapeReport)> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, SHELL_STREAM);
    let n = spec.n;
    let m = spec.mass / n as f64;
    let (a3, b3) = (spec.r_inner.powi(3), spec.r_outer.powi(3));
    let particles = (0..n)
        .map(|i| {
            let u = (i as f64 + rng.random::<f64>()) / n as f64;
            let r = (a3 + u * (b3 - a3)).cbrt().clamp(spec.r_inner, spec.r_outer);
            let w = spec.w_min + rng.random::<f64>() * (spec.w_max - spec.w_min);
            let ell = spec.ell_min + rng.random::<f64>() * (spec.ell_max - spec.ell_min);
            ShellParticle::new(r, w, ell, m).map(|p| p.with_group(Group::Shell))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EscapeReport::new(spec.mass, spec.r_inner, spec.inf_w_sq(), spec.w_min);
    Ok((Ensemble::new(0.0, particles)?, report))
}

/// Target cumulative mass profile of the core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreProfile {
    /// Homogeneous ball.
    Uniform,
    /// Points `(r, M(<r))` of the cumulative mass, interpolated linearly in
    /// `r` from `(0, 0)`; rescaled so that the last point carries the core
    /// mass. The last radius is the core radius.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSpec {
    pub mass: f64,
    pub radius: f64,
    pub profile: CoreProfile,
    pub n: usize,
    pub seed: u64,
}

impl Default for CoreSpec {
    fn default() -> Self {
        CoreSpec { mass: 1.0, radius: 1.0, profile: CoreProfile::Uniform, n: 10_000, seed: 1 }
    }
}

impl CoreSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::domain(format!("core mass must be positive, got {}", self.mass)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::domain(format!("core radius must be positive, got {}", self.radius)));
        }
        if self.n == 0 {
            return Err(Error::domain("core needs at least one particle"));
        }
        if let CoreProfile::Table(points) = &self.profile {
            let mut prev = (0.0, 0.0);
            for &(r, m) in points {
                if !(r > prev.0) || !(m >= prev.1) || !r.is_finite() || !m.is_finite() {
                    return Err(Error::domain("profile table needs increasing radii and non-decreasing cumulative mass"));
                }
                prev = (r, m);
            }
            if !(prev.1 > 0.0) {
                return Err(Error::domain("profile table has zero mass"));
            }
            if ((prev.0 - self.radius) / self.radius).abs() > 1e-12 {
                return Err(Error::domain(format!("profile table ends at r = {}, core radius is {}", prev.0, self.radius)));
            }
        }
        Ok(())
    }

    /// Target `M(<r)`.
    pub fn target_mass(&self, r: f64) -> f64 {
        if r >= self.radius {
            return self.mass;
        }
        match &self.profile {
            CoreProfile::Uniform => self.mass * (r / self.radius).powi(3),
            CoreProfile::Table(points) => {
                let total = points.last().map_or(1.0, |p| p.1);
                let mut prev = (0.0, 0.0);
                for &(rk, mk) in points {
                    if r <= rk {
                        let f = (r - prev.0) / (rk - prev.0);
                        return self.mass * (prev.1 + f * (mk - prev.1)) / total;
                    }
                    prev = (rk, mk);
                }
                self.mass
            }
        }
    }

    /// Radius enclosing the mass fraction `u ∈ [0, 1]`.
    fn radius_at_fraction(&self, u: f64) -> f64 {
        match &self.profile {
            CoreProfile::Uniform => self.radius * u.cbrt(),
            CoreProfile::Table(points) => {
                let total = points.last().map_or(1.0, |p| p.1);
                let target = u * total;
                let mut prev = (0.0, 0.0);
                for &(rk, mk) in points {
                    if target <= mk && mk > prev.1 {
                        return prev.0 + (target - prev.1) / (mk - prev.1) * (rk - prev.0);
                    }
                    prev = (rk, mk);
                }
                self.radius
            }
        }
    }
}

/// Circular orbits in the target profile: `w = 0` and `ℓ² = r M(<r)/(4π)`
/// with the target (not the sampled) cumulative mass.
pub fn build_circular_core(spec: &CoreSpec) -> Result<Ensemble> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, CORE_STREAM);
    let n = spec.n;
    let m = spec.mass / n as f64;
    let particles = (0..n)
        .map(|i| {
            let u = (i as f64 + rng.random::<f64>()) / n as f64;
            let r = spec.radius_at_fraction(u).max(f64::MIN_POSITIVE);
            let ell = (r * spec.target_mass(r) / (4.0 * PI)).sqrt();
            ShellParticle::new(r, 0.0, ell, m).map(|p| p.with_group(Group::Core))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(0.0, particles)
}

/// Inverse circular frequency of the homogeneous ball, `√(4πa³/M₀)`.
pub fn dynamical_time(core: &CoreSpec) -> f64 {
    (4.0 * PI * core.radius.powi(3) / core.mass).sqrt()
}

/// Energetics of a shell launched from a static core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `√((M₀ + m)/(2πR₁))`.
    pub combined_threshold: f64,
    pub escape: EscapeReport,
    pub total_energy: f64,
    pub core_energy: f64,
    /// `½[−M₀ + √(M₀² − 16π E₀ R₁)]`: shells lighter than this can escape
    /// with negative total energy.
    pub shell_mass_bound: f64,
    /// `(M₀ + m)/(2πR₁) < inf w² ≤ sup|p|² < −2E₀/m`.
    pub double_inequality_satisfied: bool,
}

pub fn build_shell_plus_core(core: &CoreSpec, shell: &ShellSpec) -> Result<(Ensemble, EnergyReport)> {
    core.validate()?;
    shell.validate()?;
    if !(shell.r_inner > core.radius) {
        return Err(Error::domain(format!("shell (r_inner = {}) overlaps the core (radius {})", shell.r_inner, core.radius)));
    }
    let core_ens = build_circular_core(core)?;
    let (shell_ens, _) = build_shell(shell)?;
    let core_energy = kinetic_energy(&core_ens)? - potential_energy(&core_ens)?;
    let combined = core_ens.concat(&shell_ens);
    let total_energy = kinetic_energy(&combined)? - potential_energy(&combined)?;
    let m0 = core.mass;
    let m = shell.mass;
    let escape = EscapeReport::new(m0 + m, shell.r_inner, shell.inf_w_sq(), shell.w_min);
    let bound = 0.5 * (-m0 + (m0 * m0 - 16.0 * PI * core_energy * shell.r_inner).sqrt());
    let inf_w_sq = shell.inf_w_sq();
    let double = (m0 + m) / (2.0 * PI * shell.r_inner) < inf_w_sq
        && inf_w_sq <= shell.sup_momentum_sq()
        && shell.sup_momentum_sq() < -2.0 * core_energy / m;
    let report = EnergyReport {
        combined_threshold: escape.threshold,
        escape,
        total_energy,
        core_energy,
        shell_mass_bound: bound,
        double_inequality_satisfied: double,
    };
    Ok((combined, report))
}
