//! Finite-horizon classification of diagnostic time series.
//!
//! Every asymptotic notion (limits as `t → ∞`, suprema over all time) is
//! replaced by a trailing-window estimate plus a trend test. When the trend
//! test is inconclusive the classifier says so instead of guessing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosticsRecord;

/// Strictly increasing times with finite values of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::domain(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("times must be strictly increasing"));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::domain("series contains non-finite entries"));
        }
        Ok(TimeSeries { times, values })
    }

    /// Extracts one column from records; `None` if any record lacks it.
    pub fn from_records<F>(records: &[DiagnosticsRecord], f: F) -> Option<Self>
    where
        F: Fn(&DiagnosticsRecord) -> Option<f64>,
    {
        let values = records.iter().map(&f).collect::<Option<Vec<_>>>()?;
        TimeSeries::new(records.iter().map(|r| r.time).collect(), values).ok()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The last `⌈n/2⌉` samples.
    pub fn trailing_half(&self) -> TimeSeries {
        let start = self.len() / 2;
        TimeSeries { times: self.times[start..].to_vec(), values: self.values[start..].to_vec() }
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Tolerances of the finite-horizon tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// `ε_strong` as a fraction of the initial `L^q` norm.
    pub strong_rel: f64,
    /// `ε_vir` as a fraction of `|E| + E_kin(0)`.
    pub virial_rel: f64,
    /// Mass tolerance as a fraction of `M`.
    pub mass_rel: f64,
    /// Allowed deviation of the variance exponent from 2 when `E > |Q|²/2M`.
    pub exponent_tol: f64,
    /// Relative range below which a series counts as flat.
    pub flat_rel: f64,
    /// Growth factor of the variance that flags statistical dispersion.
    pub statistical_factor: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            strong_rel: 1e-2,
            virial_rel: 1e-2,
            mass_rel: 1e-2,
            exponent_tol: 0.1,
            flat_rel: 1e-3,
            statistical_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub band: f64,
}

struct LineFit {
    slope: f64,
    slope_sigma: f64,
}

fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let slope_sigma = if n > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - my - slope * (xi - mx)).powi(2)).sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit { slope, slope_sigma })
}

fn trailing_slope(series: &TimeSeries) -> Option<f64> {
    let tail = series.trailing_half();
    fit_line(&tail.times, &tail.values).map(|f| f.slope)
}

/// Log-log slope over the trailing half of the samples with `t > 0`.
fn loglog_slope(series: &TimeSeries) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &v)| (t, v))
        .collect();
    let tail = &pts[pts.len() / 2..];
    if tail.len() < 2 || tail.iter().any(|p| !(p.1 > 0.0)) {
        return None;
    }
    let x: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    fit_line(&x, &y)
}

/// Power-law exponent of a growing series (typically `⟨(Δx)²⟩`), fitted on
/// the trailing half; `None` when fewer than ten samples with `t > 0` span
/// less than a decade or any fitted value is non-positive.
pub fn growth_exponent(series: &TimeSeries) -> Option<Estimate> {
    let positive: Vec<f64> = series.times.iter().copied().filter(|&t| t > 0.0).collect();
    if positive.len() < 10 || positive[positive.len() - 1] < 10.0 * positive[0] {
        return None;
    }
    let fit = loglog_slope(series)?;
    Some(Estimate { value: fit.slope, band: 2.0 * fit.slope_sigma })
}

/// `true` when the trailing window does not increase (least-squares slope
/// `≤ 0`) and its last value is below `tol`.
pub fn trending_to_zero(series: &TimeSeries, tol: f64) -> bool {
    let Some(last) = series.last() else { return false };
    last.abs() < tol && trailing_slope(series).is_none_or(|s| s <= 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub radius: f64,
    pub mass: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationLimits {
    pub per_radius: Vec<RadiusEstimate>,
    /// Plateau over the two largest radii; `None` when they have not
    /// converged or no radius is available.
    pub m_infinity: Option<Estimate>,
}

/// Trailing-window estimates of `M(R) = lim M_R(t)` and of `M_∞`.
///
/// An estimate counts as converged when the two halves of the trailing
/// window agree within `mass_tol`, or when the series is trending to zero.
pub fn concentration_limits(records: &[DiagnosticsRecord], r_grid: &[f64], mass_tol: f64) -> ConcentrationLimits {
    let mut per_radius: Vec<RadiusEstimate> = r_grid
        .iter()
        .filter_map(|&r| {
            let series = TimeSeries::from_records(records, |rec| rec.concentration_at(r))?;
            let tail = series.trailing_half();
            let vals = tail.values();
            if vals.is_empty() {
                return None;
            }
            let mean_of = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            let mean = mean_of(vals);
            let (a, b) = vals.split_at(vals.len() / 2);
            let steady = a.is_empty() || (mean_of(a) - mean_of(b)).abs() <= mass_tol;
            let converged = steady || trending_to_zero(&series, mass_tol);
            Some(RadiusEstimate { radius: r, mass: mean, converged })
        })
        .collect();
    per_radius.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let largest: Vec<&RadiusEstimate> = per_radius.iter().rev().take(2).collect();
    let m_infinity = if largest.is_empty() || largest.iter().any(|e| !e.converged) {
        None
    } else {
        let value = largest.iter().map(|e| e.mass).sum::<f64>() / largest.len() as f64;
        let band = largest.iter().map(|e| (e.mass - value).abs()).fold(0.0, f64::max);
        Some(Estimate { value, band })
    };
    ConcentrationLimits { per_radius, m_infinity }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongDispersion {
    pub dispersive: bool,
    /// Fitted `‖ρ‖_q ∝ t^{rate}` on the trailing window.
    pub decay_rate: Option<f64>,
}

/// `‖ρ(t)‖_q → 0`: non-increasing trailing trend and final value below
/// `strong_rel` times the initial norm.
pub fn strong_dispersion_test(records: &[DiagnosticsRecord], q: f64, strong_rel: f64) -> StrongDispersion {
    let Some(series) = TimeSeries::from_records(records, |r| r.lq_at(q)) else {
        return StrongDispersion { dispersive: false, decay_rate: None };
    };
    let Some(&initial) = series.values().first() else {
        return StrongDispersion { dispersive: false, decay_rate: None };
    };
    let decay_rate = loglog_slope(&series).map(|f| f.slope);
    StrongDispersion { dispersive: q > 1.0 && trending_to_zero(&series, strong_rel * initial), decay_rate }
}

/// `(1/t) ∫₀ᵗ (E + E_kin) dτ` by the trapezoidal rule; at the first sample
/// the value is the integrand itself.
pub fn virialization_metric(energy: f64, kinetic: &TimeSeries) -> Result<TimeSeries> {
    let times = kinetic.times();
    let vals = kinetic.values();
    if times.is_empty() {
        return Ok(kinetic.clone());
    }
    let t0 = times[0];
    let mut integral = crate::sum::Neumaier::default();
    let mut out = Vec::with_capacity(times.len());
    out.push(energy + vals[0]);
    for i in 1..times.len() {
        integral.add(0.5 * (times[i] - times[i - 1]) * (2.0 * energy + vals[i] + vals[i - 1]));
        out.push(integral.value() / (times[i] - t0));
    }
    TimeSeries::new(times.to_vec(), out)
}

/// Period of an oscillating series from its autocorrelation: the first
/// peak above 0.5 and the peak near twice that lag must agree within 1%.
/// Flat series (relative range below `flat_rel`) are not periodic.
pub fn detect_period(series: &TimeSeries, flat_rel: f64) -> Option<f64> {
    let n = series.len();
    if n < 8 {
        return None;
    }
    let (t0, t1) = (series.times[0], series.times[n - 1]);
    let dt = (t1 - t0) / (n - 1) as f64;
    // resample on a uniform grid so that lags are in time units
    let uniform: Vec<f64> = (0..n).map(|i| interpolate(series, t0 + i as f64 * dt)).collect();
    if relative_range(&uniform) <= flat_rel {
        return None;
    }
    let mean = uniform.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = uniform.iter().map(|v| v - mean).collect();
    let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let max_lag = n * 3 / 4;
    let acf: Vec<f64> = (0..=max_lag)
        .map(|lag| {
            let s: f64 = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
            s / (n - lag) as f64 / var
        })
        .collect();
    let first_negative = acf.iter().position(|&c| c < 0.0)?;
    let peak1 = local_peak(&acf, first_negative, max_lag)?;
    let lag1 = refine_peak(&acf, peak1);
    let centre = (2.0 * lag1).round() as usize;
    let window = (0.1 * lag1).ceil().max(2.0) as usize;
    let lo2 = centre.saturating_sub(window).max(peak1 + 1);
    let hi2 = (centre + window).min(max_lag);
    if lo2 >= hi2 {
        return None;
    }
    let peak2 = (lo2..=hi2).max_by(|&a, &b| acf[a].total_cmp(&acf[b]))?;
    if acf[peak2] <= 0.5 || peak2 == lo2 || peak2 == hi2 {
        return None;
    }
    let lag2 = refine_peak(&acf, peak2) / 2.0;
    if ((lag2 - lag1) / lag1).abs() > 0.01 {
        return None;
    }
    Some(0.5 * (lag1 + lag2) * dt)
}

fn local_peak(acf: &[f64], from: usize, to: usize) -> Option<usize> {
    (from.max(1)..to.min(acf.len() - 1)).find(|&i| acf[i] > 0.5 && acf[i] >= acf[i - 1] && acf[i] >= acf[i + 1])
}

fn refine_peak(acf: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= acf.len() {
        return i as f64;
    }
    let (a, b, c) = (acf[i - 1], acf[i], acf[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        i as f64
    } else {
        i as f64 + 0.5 * (a - c) / denom
    }
}

fn interpolate(series: &TimeSeries, t: f64) -> f64 {
    let ts = &series.times;
    let k = ts.partition_point(|&x| x <= t);
    if k == 0 {
        return series.values[0];
    }
    if k >= ts.len() {
        return series.values[ts.len() - 1];
    }
    let f = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    series.values[k - 1] + f * (series.values[k] - series.values[k - 1])
}

/// `(max − min)/max|v|`, zero for an all-zero series.
fn relative_range(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        (hi - lo) / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Steady,
    Periodic,
    Virialized,
    PartiallyDispersive,
    TotallyDispersive,
    StronglyDispersive,
    Undetermined,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Steady => "steady",
            Label::Periodic => "periodic",
            Label::Virialized => "virialized",
            Label::PartiallyDispersive => "partially-dispersive",
            Label::TotallyDispersive => "totally-dispersive",
            Label::StronglyDispersive => "strongly-dispersive",
            Label::Undetermined => "undetermined",
        }
    }

    /// Strong dispersion implies total dispersion.
    pub fn is_total(&self) -> bool {
        matches!(self, Label::TotallyDispersive | Label::StronglyDispersive)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

/// One checked implication between label, energy and growth rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub id: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Consistency {
    fn new(id: &str, outcome: Outcome, detail: impl Into<String>) -> Self {
        Consistency { id: id.to_string(), outcome, detail: detail.into() }
    }
}

/// Comparison of `E` with the Galilean threshold `|Q|²/(2M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub energy: f64,
    pub threshold: f64,
    /// Sign of `E − |Q|²/(2M)`: −1, 0 or 1.
    pub relation: i8,
}

impl ThresholdCheck {
    pub fn new(energy: f64, momentum: [f64; 3], mass: f64) -> Self {
        let q2: f64 = momentum.iter().map(|x| x * x).sum();
        let threshold = q2 / (2.0 * mass);
        let relation = match energy.partial_cmp(&threshold) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        };
        ThresholdCheck { energy, threshold, relation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub label: Label,
    pub statistically_dispersive: bool,
    pub growth_exponent: Option<Estimate>,
    pub m_infinity: Option<Estimate>,
    pub concentration: ConcentrationLimits,
    pub strong: StrongDispersion,
    /// `E_pot(t) → 0`; `None` without potential-energy data.
    pub potential_vanishes: Option<bool>,
    pub period: Option<f64>,
    pub virialized: bool,
    pub virialization_metric: Vec<(f64, f64)>,
    pub threshold_check: ThresholdCheck,
    pub consistency: Vec<Consistency>,
}

impl ClassificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Consistency> {
        self.consistency.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    pub fn outcome(&self, id: &str) -> Option<Outcome> {
        self.consistency.iter().find(|c| c.id == id).map(|c| c.outcome)
    }
}

/// Implications that must hold between the label and the energy:
///
/// * `a`: totally dispersive ⇒ `E ≥ |Q|²/2M`;
/// * `b`: `E > |Q|²/2M` ⇒ variance exponent within `2 ± exponent_tol`;
/// * `c`: totally dispersive ⇔ `E_pot → 0`;
/// * `d`: steady ⇒ `E < 0`, periodic ⇒ `E < −|Q|²/2M`.
pub fn check_propositions(
    energy: f64,
    momentum: [f64; 3],
    mass: f64,
    report: &ClassificationReport,
    options: &ClassifyOptions,
) -> Vec<Consistency> {
    use Outcome::*;
    let th = ThresholdCheck::new(energy, momentum, mass);
    let slack = 1e-12 * (th.energy.abs() + th.threshold.abs());
    let label = report.label;

    let a = if !label.is_total() {
        Consistency::new("a", NotApplicable, "label is not totally dispersive")
    } else if th.energy >= th.threshold - slack {
        Consistency::new("a", Pass, format!("{label} with E = {} >= |Q|^2/2M = {}", th.energy, th.threshold))
    } else {
        Consistency::new("a", Fail, format!("{label} but E = {} < |Q|^2/2M = {}", th.energy, th.threshold))
    };

    let b = if th.energy > th.threshold + slack {
        match report.growth_exponent {
            Some(e) if (e.value - 2.0).abs() <= options.exponent_tol => {
                Consistency::new("b", Pass, format!("variance exponent {} within 2 +/- {}", e.value, options.exponent_tol))
            }
            Some(e) => Consistency::new("b", Fail, format!("variance exponent {} outside 2 +/- {}", e.value, options.exponent_tol)),
            None => Consistency::new("b", NotApplicable, "variance exponent unavailable"),
        }
    } else {
        Consistency::new("b", NotApplicable, "E does not exceed |Q|^2/2M")
    };

    let c = match (report.potential_vanishes, label.is_total()) {
        (None, _) => Consistency::new("c", NotApplicable, "no potential energy series"),
        (Some(true), true) => Consistency::new("c", Pass, "totally dispersive and E_pot -> 0"),
        (Some(false), true) => Consistency::new("c", Fail, "totally dispersive but E_pot does not vanish"),
        (Some(_), false) if matches!(label, Label::Undetermined | Label::Virialized) => {
            Consistency::new("c", NotApplicable, format!("label {label}"))
        }
        (Some(true), false) => Consistency::new("c", Fail, format!("E_pot -> 0 but labelled {label}")),
        (Some(false), false) => Consistency::new("c", Pass, "not totally dispersive and E_pot does not vanish"),
    };

    let d = match label {
        Label::Steady if th.energy < 0.0 => Consistency::new("d", Pass, format!("steady with E = {} < 0", th.energy)),
        Label::Steady => Consistency::new("d", Fail, format!("steady but E = {} >= 0", th.energy)),
        Label::Periodic if th.energy < -th.threshold => {
            Consistency::new("d", Pass, format!("periodic with E = {} < -|Q|^2/2M", th.energy))
        }
        Label::Periodic => Consistency::new("d", Fail, format!("periodic but E = {} >= -|Q|^2/2M", th.energy)),
        _ => Consistency::new("d", NotApplicable, "label is neither steady nor periodic"),
    };
    vec![a, b, c, d]
}

/// Decision cascade over the diagnostics of one run, with default tolerances.
pub fn classify(records: &[DiagnosticsRecord], energy: f64, momentum: [f64; 3], mass: f64) -> ClassificationReport {
    classify_with(records, energy, momentum, mass, &ClassifyOptions::default())
}

/// Strong, total and partial dispersion first (only when the variance is
/// growing), then periodicity, flatness and virialization.
pub fn classify_with(
    records: &[DiagnosticsRecord],
    energy: f64,
    momentum: [f64; 3],
    mass: f64,
    options: &ClassifyOptions,
) -> ClassificationReport {
    let variance = TimeSeries::from_records(records, |r| Some(r.variance));
    let growth = variance.as_ref().and_then(growth_exponent);

    let statistically_dispersive = variance.as_ref().is_some_and(|v| {
        let v0 = v.values().first().copied().unwrap_or(0.0);
        let sup = v.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.len() >= 2 && sup > options.statistical_factor * v0 && trailing_slope(v).is_some_and(|s| s > 0.0)
    });

    let r_grid: Vec<f64> = records.first().map(|r| r.concentration.iter().map(|c| c.0).collect()).unwrap_or_default();
    let mass_tol = options.mass_rel * mass;
    let concentration = concentration_limits(records, &r_grid, mass_tol);
    let q = records.first().and_then(|r| r.lq_norms.iter().map(|l| l.0).find(|&q| q > 1.0));
    let strong = match q {
        Some(q) => strong_dispersion_test(records, q, options.strong_rel),
        None => StrongDispersion { dispersive: false, decay_rate: None },
    };

    let potential = TimeSeries::from_records(records, |r| r.energy_potential);
    let potential_vanishes = potential.as_ref().map(|s| {
        let initial = s.values().first().copied().unwrap_or(0.0);
        let decaying = trailing_slope(s).is_some_and(|x| x <= 0.0);
        trending_to_zero(s, options.strong_rel * initial) || (decaying && loglog_slope(s).is_some_and(|f| f.slope <= -0.5))
    });

    let kinetic = TimeSeries::from_records(records, |r| r.energy_kinetic);
    let metric = kinetic.as_ref().and_then(|k| virialization_metric(energy, k).ok());
    let virialized = match (&metric, &kinetic) {
        (Some(m), Some(k)) if !m.is_empty() => {
            let tol = options.virial_rel * (energy.abs() + k.values()[0]);
            let abs = TimeSeries::new(m.times().to_vec(), m.values().iter().map(|v| v.abs()).collect()).ok();
            abs.is_some_and(|a| trending_to_zero(&a, tol) || a.values().iter().all(|&v| v < tol))
        }
        _ => false,
    };
    let period = variance.as_ref().and_then(|v| detect_period(v, options.flat_rel));
    let flat = variance.as_ref().is_some_and(|v| v.len() >= 2 && relative_range(v.values()) <= options.flat_rel)
        && [kinetic.as_ref(), potential.as_ref()]
            .into_iter()
            .flatten()
            .all(|s| relative_range(s.values()) <= 10.0 * options.flat_rel);

    let vanishing = concentration.m_infinity.is_some_and(|m| m.value <= mass_tol);
    let partial = concentration.m_infinity.is_some_and(|m| m.value > mass_tol && m.value < mass - mass_tol);

    let label = if vanishing || partial {
        if !statistically_dispersive {
            Label::Undetermined
        } else if vanishing && strong.dispersive {
            Label::StronglyDispersive
        } else if vanishing {
            Label::TotallyDispersive
        } else {
            Label::PartiallyDispersive
        }
    } else if period.is_some() {
        Label::Periodic
    } else if flat {
        Label::Steady
    } else if virialized {
        Label::Virialized
    } else {
        Label::Undetermined
    };

    let mut report = ClassificationReport {
        label,
        statistically_dispersive,
        growth_exponent: growth,
        m_infinity: concentration.m_infinity,
        concentration,
        strong,
        potential_vanishes,
        period,
        virialized,
        virialization_metric: metric
            .map(|m| m.times().iter().copied().zip(m.values().iter().copied()).collect())
            .unwrap_or_default(),
        threshold_check: ThresholdCheck::new(energy, momentum, mass),
        consistency: Vec::new(),
    };
    report.consistency = check_propositions(energy, momentum, mass, &report, options);
    report
}

/// Time derivative at sample `i`: fourth-order five-point stencil (centred
/// where possible, shifted by one next to the ends) on uniformly spaced
/// samples, centred three-point difference otherwise.
fn derivative(times: &[f64], values: &[f64], i: usize) -> Option<f64> {
    const WEIGHTS: [[f64; 5]; 3] =
        [[-3.0, -10.0, 18.0, -6.0, 1.0], [1.0, -8.0, 0.0, 8.0, -1.0], [-1.0, 6.0, -18.0, 10.0, 3.0]];
    let n = times.len();
    if i == 0 || i + 1 >= n {
        return None;
    }
    if n >= 5 {
        let start = i.saturating_sub(2).min(n - 5);
        let h = times[start + 1] - times[start];
        let uniform = (start..start + 4).all(|j| ((times[j + 1] - times[j]) - h).abs() <= 1e-9 * h);
        if uniform {
            let w = &WEIGHTS[i - start - 1];
            let sum: f64 = w.iter().zip(&values[start..start + 5]).map(|(w, v)| w * v).sum();
            return Some(sum / (12.0 * h));
        }
    }
    Some((values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]))
}

fn column<F: Fn(&DiagnosticsRecord) -> Option<f64>>(records: &[DiagnosticsRecord], f: F) -> Option<Vec<f64>> {
    records.iter().map(f).collect()
}

/// Relative residuals of `d/dt Σ m r w = E + E_kin` at interior records,
/// normalised by `|E| + E_kin`.
pub fn dilation_residuals(records: &[DiagnosticsRecord]) -> Vec<(f64, f64)> {
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let Some(dilation) = column(records, |r| r.dilation_moment) else { return Vec::new() };
    (1..records.len().saturating_sub(1))
        .filter_map(|i| {
            let b = &records[i];
            let lhs = derivative(&times, &dilation, i)?;
            let rhs = b.energy_total? + b.energy_kinetic?;
            let scale = b.energy_total?.abs() + b.energy_kinetic?;
            (scale > 0.0).then(|| (b.time, (lhs - rhs).abs() / scale))
        })
        .collect()
}

/// Relative residuals of `dC/dt = 2t E_pot + 2t² dE_pot/dt` at interior
/// records, normalised by `|2t E_pot| + |2t² dE_pot/dt|`. Samples where that
/// scale vanishes (such as `t = 0`) are skipped.
pub fn pseudoconformal_residuals(records: &[DiagnosticsRecord]) -> Vec<(f64, f64)> {
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let (Some(conformal), Some(potential)) = (column(records, |r| r.conformal_moment), column(records, |r| r.energy_potential))
    else {
        return Vec::new();
    };
    (1..records.len().saturating_sub(1))
        .filter_map(|i| {
            let t = times[i];
            let lhs = derivative(&times, &conformal, i)?;
            let first = 2.0 * t * potential[i];
            let second = 2.0 * t * t * derivative(&times, &potential, i)?;
            let scale = first.abs() + second.abs();
            (scale > 0.0).then(|| (t, (lhs - first - second).abs() / scale))
        })
        .collect()
}
