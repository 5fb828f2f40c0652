//! Characteristic flow of the reduced system
//!
//! ```text
//! ṙ = w,   ẇ = ℓ²/r³ − M(<r)/(4π r²),   ℓ̇ = 0
//! ```
//!
//! advanced by kick–drift–kick leapfrog. Forces come from one sort of the
//! radii per evaluation; shell crossings inside a step are not resolved.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{diagnose, enclosed_masses, radial_order, DiagnosticsConfig, DiagnosticsRecord, Ensemble};

const RATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt_initial: f64,
    pub dt_safety: f64,
    pub t_end: f64,
    pub output_cadence: f64,
    pub reflection_enabled: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt_initial: 0.01, dt_safety: 0.05, t_end: 10.0, output_cadence: 1.0, reflection_enabled: true }
    }
}

impl IntegratorConfig {
    /// Smallest step accepted before a run is declared stiff.
    pub fn dt_min(&self) -> f64 {
        1e-12 * self.dt_initial
    }

    pub fn validate(&self, start_time: f64) -> Result<()> {
        if !(self.dt_initial > 0.0) || !self.dt_initial.is_finite() {
            return Err(Error::domain(format!("dt_initial must be positive, got {}", self.dt_initial)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::domain(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety)));
        }
        if !(self.output_cadence > 0.0) || !self.output_cadence.is_finite() {
            return Err(Error::domain(format!("output_cadence must be positive, got {}", self.output_cadence)));
        }
        if !(self.t_end >= start_time) || !self.t_end.is_finite() {
            return Err(Error::domain(format!("t_end {} precedes the start time {start_time}", self.t_end)));
        }
        Ok(())
    }
}

/// Output of [`run`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrajectorySink {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<Ensemble>,
    /// Reflections through the centre since the previous record, per record.
    pub reflections: Vec<usize>,
    pub steps: usize,
    pub rejections: usize,
}

impl TrajectorySink {
    fn push(&mut self, record: DiagnosticsRecord, reflections: usize) {
        debug_assert!(self.records.last().is_none_or(|r| r.time < record.time));
        self.records.push(record);
        self.reflections.push(reflections);
    }
}

/// Radial acceleration of every particle, indexed like `ensemble.particles`.
pub fn acceleration(ensemble: &Ensemble) -> Result<Vec<f64>> {
    if let Some(p) = ensemble.particles.iter().find(|p| !(p.r > 0.0)) {
        return Err(Error::Singularity { time: ensemble.time, msg: format!("particle at r = {}", p.r) });
    }
    let order = radial_order(ensemble);
    let enclosed = enclosed_masses(ensemble, &order);
    Ok(ensemble
        .particles
        .par_iter()
        .zip(enclosed.par_iter())
        .map(|(p, &m)| {
            let r2 = p.r * p.r;
            p.ell * p.ell / (r2 * p.r) - m / (4.0 * PI * r2)
        })
        .collect())
}

/// Step size from the local crossing and free-fall times.
pub fn adaptive_dt_with(ensemble: &Ensemble, accel: &[f64], config: &IntegratorConfig) -> f64 {
    let local = ensemble
        .particles
        .par_iter()
        .zip(accel.par_iter())
        .map(|(p, &a)| (p.r / (p.w.abs() + RATE_EPS)).min((p.r / (a.abs() + RATE_EPS)).sqrt()))
        .reduce(|| f64::INFINITY, f64::min);
    (config.dt_safety * local).clamp(config.dt_min(), config.output_cadence)
}

pub fn adaptive_dt(ensemble: &Ensemble, config: &IntegratorConfig) -> Result<f64> {
    ensemble.require_nonempty()?;
    let accel = acceleration(ensemble)?;
    Ok(adaptive_dt_with(ensemble, &accel, config))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub dt_taken: f64,
    pub reflections: usize,
    pub rejections: usize,
}

/// Kick–drift–kick stepper holding the accelerations of the current state.
#[derive(Debug, Clone)]
pub struct Stepper {
    accel: Option<Vec<f64>>,
    reflection_enabled: bool,
    dt_min: f64,
}

impl Stepper {
    pub fn new(config: &IntegratorConfig) -> Self {
        Stepper { accel: None, reflection_enabled: config.reflection_enabled, dt_min: config.dt_min() }
    }

    pub fn accelerations(&mut self, ensemble: &Ensemble) -> Result<&[f64]> {
        if self.accel.is_none() {
            self.accel = Some(acceleration(ensemble)?);
        }
        Ok(self.accel.as_deref().unwrap_or_default())
    }

    /// Drops cached forces; required after editing positions by hand.
    pub fn invalidate(&mut self) {
        self.accel = None;
    }

    /// Advances by `dt`, or by `dt/2ᵏ` when a drift with `ℓ > 0` (or with
    /// reflection disabled) would cross the centre. `time` is not touched.
    pub fn advance(&mut self, ensemble: &mut Ensemble, dt: f64) -> Result<StepReport> {
        if !(dt > 0.0) {
            return Err(Error::domain(format!("step must be positive, got {dt}")));
        }
        self.accelerations(ensemble)?;
        let accel = self.accel.take().unwrap_or_default();
        let mut report = StepReport::default();
        let mut h = dt;
        loop {
            let mut trial = ensemble.particles.clone();
            let reflect = self.reflection_enabled;
            let (reflections, crossed) = trial
                .par_iter_mut()
                .zip(accel.par_iter())
                .map(|(p, &a)| {
                    p.w += 0.5 * h * a;
                    p.r += h * p.w;
                    if p.r > 0.0 {
                        (0usize, false)
                    } else if reflect && p.ell == 0.0 {
                        p.r = -p.r;
                        p.w = -p.w;
                        if p.r == 0.0 {
                            p.r = f64::MIN_POSITIVE;
                        }
                        (1, false)
                    } else {
                        (0, true)
                    }
                })
                .reduce(|| (0, false), |a, b| (a.0 + b.0, a.1 || b.1));
            if crossed {
                report.rejections += 1;
                h *= 0.5;
                if h < self.dt_min {
                    self.accel = Some(accel);
                    return Err(Error::Stiffness { time: ensemble.time, dt_min: self.dt_min });
                }
                continue;
            }
            let staged = Ensemble { time: ensemble.time, particles: trial, total_mass_cache: ensemble.total_mass_cache };
            let next_accel = match acceleration(&staged) {
                Ok(a) => a,
                Err(e) => {
                    self.accel = Some(accel);
                    return Err(e);
                }
            };
            let mut particles = staged.particles;
            particles.par_iter_mut().zip(next_accel.par_iter()).for_each(|(p, &a)| p.w += 0.5 * h * a);
            ensemble.particles = particles;
            self.accel = Some(next_accel);
            report.dt_taken = h;
            report.reflections = reflections;
            return Ok(report);
        }
    }
}

/// One leapfrog step of a copy of `ensemble`; the returned time may be less
/// than `t + dt` if the step had to be halved.
pub fn step(ensemble: &Ensemble, dt: f64) -> Result<Ensemble> {
    let config = IntegratorConfig { dt_initial: dt, ..IntegratorConfig::default() };
    let mut next = ensemble.clone();
    let report = Stepper::new(&config).advance(&mut next, dt)?;
    next.time += report.dt_taken;
    Ok(next)
}

/// Integrates to `config.t_end`, recording diagnostics at every multiple of
/// the output cadence (and at `t_end`) and snapshots at `snapshot_times`.
pub fn run(
    ensemble: &Ensemble,
    config: &IntegratorConfig,
    diagnostics: &DiagnosticsConfig,
    snapshot_times: &[f64],
) -> Result<TrajectorySink> {
    run_observed(ensemble, config, diagnostics, snapshot_times, |_| {})
}

/// [`run`], also handing the ensemble to `observer` at every output time.
pub fn run_observed<F: FnMut(&Ensemble)>(
    ensemble: &Ensemble,
    config: &IntegratorConfig,
    diagnostics: &DiagnosticsConfig,
    snapshot_times: &[f64],
    mut observer: F,
) -> Result<TrajectorySink> {
    ensemble.require_nonempty()?;
    let start = ensemble.time;
    config.validate(start)?;
    let mut ens = ensemble.clone();
    let mut sink = TrajectorySink { snapshot_times: snapshot_times.to_vec(), ..TrajectorySink::default() };
    let mut snaps: Vec<f64> = snapshot_times.iter().copied().filter(|&t| t >= start && t <= config.t_end).collect();
    snaps.sort_by(f64::total_cmp);
    snaps.dedup();
    let mut snap_iter = snaps.into_iter().peekable();

    let mut stepper = Stepper::new(config);
    let mut reflections_since = 0;
    let mut output_index: u64 = 0;
    let mut next_output = start;

    loop {
        let at_output = ens.time == next_output || ens.time == config.t_end;
        if at_output {
            sink.push(diagnose(&ens, diagnostics).map_err(|e| at_time(e, ens.time))?, reflections_since);
            observer(&ens);
            reflections_since = 0;
            if ens.time == next_output {
                output_index += 1;
                next_output = start + output_index as f64 * config.output_cadence;
            }
        }
        while snap_iter.peek().is_some_and(|&t| t <= ens.time) {
            if snap_iter.next() == Some(ens.time) {
                sink.snapshots.push(ens.clone());
            }
        }
        if ens.time >= config.t_end {
            break;
        }
        let mut target = next_output.min(config.t_end);
        if let Some(&t) = snap_iter.peek() {
            target = target.min(t);
        }
        let accel = stepper.accelerations(&ens).map_err(|e| at_time(e, ens.time))?;
        let remaining = target - ens.time;
        let dt = adaptive_dt_with(&ens, accel, config).min(remaining);
        let report = stepper.advance(&mut ens, dt)?;
        sink.steps += 1;
        sink.rejections += report.rejections;
        reflections_since += report.reflections;
        if report.dt_taken >= remaining || target - (ens.time + report.dt_taken) <= 1e-12 * target.abs().max(1.0) {
            ens.time = target;
        } else {
            ens.time += report.dt_taken;
        }
    }
    Ok(sink)
}

fn at_time(e: Error, time: f64) -> Error {
    match e {
        Error::Domain(msg) => Error::Singularity { time, msg },
        other => other,
    }
}
