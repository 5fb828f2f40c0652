//! Kurth's homologous uniform-ball solutions.
//!
//! The ball radius `φ(t)` obeys `φ³ φ″ + φ = 1` with `φ(0) = 1`,
//! `φ′(0) = k`. Along a trajectory the quantity
//! `E_K = (3/5)(φ′² + φ⁻² − 2φ⁻¹)` is conserved and equals `(3/5)(k² − 1)`.
//!
//! * `k = 0`: static, `φ ≡ 1`.
//! * `0 < |k| < 1`: periodic between the turning points `1/(1 ± |k|)`.
//! * `|k| ≥ 1`: `φ → ∞`, like `t^{2/3}` at `|k| = 1` and like `t` beyond.
//!
//! For `|k| = 1` and `|k| > 1` the expanding branch has implicit closed
//! forms, solved here by safeguarded Newton iteration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiagnosticsConfig, DiagnosticsRecord};

/// Default base step of the `φ` integrator at `φ = 1`.
pub const DEFAULT_BASE_STEP: f64 = 2e-3;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KurthParams {
    /// `φ′(0)`.
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KurthState {
    pub t: f64,
    pub phi: f64,
    pub phi_dot: f64,
}

impl KurthState {
    pub fn initial(k: f64) -> Self {
        KurthState { t: 0.0, phi: 1.0, phi_dot: k }
    }

    pub fn first_integral(&self) -> f64 {
        first_integral(self.phi, self.phi_dot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KurthRegime {
    Static,
    Periodic,
    Dispersive,
}

/// `(3/5)(φ′² + φ⁻² − 2φ⁻¹)`.
pub fn first_integral(phi: f64, phi_dot: f64) -> f64 {
    0.6 * (phi_dot * phi_dot + 1.0 / (phi * phi) - 2.0 / phi)
}

/// `E_K = (3/5)(k² − 1)`.
pub fn kurth_energy(k: f64) -> f64 {
    0.6 * (k * k - 1.0)
}

pub fn classify_k(k: f64) -> KurthRegime {
    let a = k.abs();
    if a == 0.0 {
        KurthRegime::Static
    } else if a < 1.0 {
        KurthRegime::Periodic
    } else {
        KurthRegime::Dispersive
    }
}

/// Kinetic and potential parts of `E_K`: `(3/5)(φ′² + φ⁻²)` and `(6/5)/φ`.
///
/// This split is the one in which `E_K = E_kin − E_pot` and the static ball
/// obeys `E_K = −E_kin`. It is not the `4πG = 1` normalisation used by the
/// particle simulator.
pub fn energy_split(state: &KurthState) -> (f64, f64) {
    let kin = 0.6 * (state.phi_dot * state.phi_dot + 1.0 / (state.phi * state.phi));
    let pot = 1.2 / state.phi;
    (kin, pot)
}

fn phi_acceleration(phi: f64) -> f64 {
    (1.0 - phi) / (phi * phi * phi)
}

/// Leapfrog composed into Yoshida's fourth-order triple jump, with step
/// `base_step · φ^{3/2}` capped by the output spacing.
#[derive(Debug, Clone, Copy)]
pub struct PhiIntegrator {
    pub base_step: f64,
}

impl Default for PhiIntegrator {
    fn default() -> Self {
        PhiIntegrator { base_step: DEFAULT_BASE_STEP }
    }
}

impl PhiIntegrator {
    fn leapfrog(state: &mut KurthState, h: f64) -> Result<()> {
        state.phi_dot += 0.5 * h * phi_acceleration(state.phi);
        state.phi += h * state.phi_dot;
        if !(state.phi > 0.0) {
            return Err(Error::Singularity { time: state.t, msg: format!("dilation collapsed to {}", state.phi) });
        }
        state.phi_dot += 0.5 * h * phi_acceleration(state.phi);
        Ok(())
    }

    fn substep(state: &mut KurthState, h: f64) -> Result<()> {
        let cbrt2 = 2f64.cbrt();
        let outer = 1.0 / (2.0 - cbrt2);
        let inner = -cbrt2 / (2.0 - cbrt2);
        Self::leapfrog(state, outer * h)?;
        Self::leapfrog(state, inner * h)?;
        Self::leapfrog(state, outer * h)?;
        Ok(())
    }

    /// Advances `state` to time `t`.
    pub fn advance_to(&self, state: &mut KurthState, t: f64) -> Result<()> {
        while state.t < t {
            let h = (self.base_step * state.phi.powf(1.5)).min(t - state.t);
            Self::substep(state, h)?;
            let next = state.t + h;
            state.t = if t - next <= 1e-14 * t.abs().max(1.0) { t } else { next };
        }
        Ok(())
    }

    /// States at the requested (non-decreasing, non-negative) times.
    pub fn sample(&self, k: f64, times: &[f64]) -> Result<Vec<KurthState>> {
        let mut state = KurthState::initial(k);
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t < state.t {
                return Err(Error::domain("sample times must be non-decreasing and non-negative"));
            }
            self.advance_to(&mut state, t)?;
            out.push(state);
        }
        Ok(out)
    }
}

/// `φ` sampled at `0, dt, 2dt, …` up to `t_end` (inclusive).
pub fn integrate_phi(k: f64, t_end: f64, dt: f64) -> Result<Vec<KurthState>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::domain(format!("t_end must be finite and non-negative, got {t_end}")));
    }
    let integrator = PhiIntegrator { base_step: DEFAULT_BASE_STEP.min(dt) };
    integrator.sample(k, &output_times(t_end, dt))
}

pub(crate) fn output_times(t_end: f64, cadence: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut i: u64 = 0;
    loop {
        let t = i as f64 * cadence;
        if t >= t_end * (1.0 - 1e-14) {
            times.push(t_end);
            break;
        }
        times.push(t);
        i += 1;
    }
    times
}

/// Safeguarded Newton iteration on a bracket `[lo, hi]` where `f` changes
/// sign; falls back to bisection whenever the Newton step leaves the bracket.
fn safeguarded_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, x0: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let increasing = f(hi) > f(lo);
    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= ROOT_TOL * x.abs().max(1.0) || hi - lo <= ROOT_TOL * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// Root of `v + v³/3 = 2(t + 2/3)`.
pub fn parabolic_v(t: f64) -> f64 {
    let c = 2.0 * (t + 2.0 / 3.0);
    let hi = (3.0 * c.abs()).cbrt().max(c.abs()).max(1.0);
    safeguarded_newton(|v| v + v * v * v / 3.0 - c, |v| 1.0 + v * v, -hi, hi, (3.0 * c).cbrt())
}

/// `φ(t) = ½(1 + v²)` on the expanding `|k| = 1` branch.
pub fn phi_parabolic(t: f64) -> f64 {
    let v = parabolic_v(t);
    0.5 * (1.0 + v * v)
}

/// Branch data `(v₀, t₀)` for `|k| > 1`: `v₀ = −arccosh|k|` and
/// `v₀ − |k| sinh v₀ = −(k² − 1)^{3/2} t₀`.
pub fn hyperbolic_offset(k: f64) -> Result<(f64, f64)> {
    let a = k.abs();
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::domain(format!("hyperbolic branch needs |k| > 1, got {k}")));
    }
    let v0 = -a.acosh();
    let scale = (a * a - 1.0).powf(1.5);
    let t0 = -(v0 - a * v0.sinh()) / scale;
    Ok((v0, t0))
}

/// Root `v ≤ v₀` of `v − |k| sinh v = (k² − 1)^{3/2}(t − t₀)`.
pub fn hyperbolic_v(t: f64, k: f64) -> Result<f64> {
    let (v0, t0) = hyperbolic_offset(k)?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be non-negative, got {t}")));
    }
    let a = k.abs();
    let rhs = (a * a - 1.0).powf(1.5) * (t - t0);
    let g = |v: f64| v - a * v.sinh() - rhs;
    let dg = |v: f64| 1.0 - a * v.cosh();
    let hi = v0;
    let mut step = 1.0;
    let mut lo = v0 - step;
    while g(lo) < 0.0 {
        step *= 2.0;
        lo = v0 - step;
    }
    // for large t, v ≈ −asinh(rhs/|k|) is an excellent start
    let guess = -(rhs / a).asinh();
    Ok(safeguarded_newton(g, dg, lo, hi, guess))
}

/// `φ(t) = (|k| cosh v − 1)/(k² − 1)` on the expanding `|k| > 1` branch.
pub fn phi_hyperbolic(t: f64, k: f64) -> Result<f64> {
    let v = hyperbolic_v(t, k)?;
    let a = k.abs();
    Ok((a * v.cosh() - 1.0) / (a * a - 1.0))
}

/// Closed-form state on the expanding branch (`k ≥ 1`).
pub fn analytic_state(k: f64, t: f64) -> Result<KurthState> {
    if !(k >= 1.0) {
        return Err(Error::domain(format!("closed forms cover the expanding branch k >= 1, got {k}")));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be non-negative, got {t}")));
    }
    if k == 1.0 {
        let v = parabolic_v(t);
        let phi = 0.5 * (1.0 + v * v);
        return Ok(KurthState { t, phi, phi_dot: v / phi });
    }
    let v = hyperbolic_v(t, k)?;
    let h = k * k - 1.0;
    let phi = (k * v.cosh() - 1.0) / h;
    Ok(KurthState { t, phi, phi_dot: -k * v.sinh() / (h.sqrt() * phi) })
}

/// `(φ_min, φ_max) = (1/(1 + |k|), 1/(1 − |k|))` for `|k| < 1`.
pub fn turning_points(k: f64) -> Result<(f64, f64)> {
    let a = k.abs();
    if !(a < 1.0) {
        return Err(Error::domain(format!("turning points need |k| < 1, got {k}")));
    }
    Ok((1.0 / (1.0 + a), 1.0 / (1.0 - a)))
}

/// Oscillation period for `0 < |k| < 1`,
/// `T = 2 ∫ dφ / √((5/3)E_K − φ⁻² + 2φ⁻¹)` between the turning points.
pub fn kurth_period(k: f64) -> Result<f64> {
    let a = k.abs();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("period defined for 0 < |k| < 1, got {k}")));
    }
    let (lo, hi) = turning_points(k)?;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    // φ = mid − half·cos θ removes the inverse-square-root endpoint
    // singularities. The rate (5/3)E_K − φ⁻² + 2φ⁻¹ is a quadratic in 1/φ
    // with roots 1/φ_min and 1/φ_max; writing it through its factors
    // φ − φ_min = 2·half·sin²(θ/2) and φ_max − φ = 2·half·cos²(θ/2) avoids
    // cancellation next to the turning points.
    let integrand = |theta: f64| {
        let phi = mid - half * theta.cos();
        let above = 2.0 * half * (0.5 * theta).sin().powi(2);
        let below = 2.0 * half * (0.5 * theta).cos().powi(2);
        let rate = above * below / (phi * phi * lo * hi);
        half * theta.sin() / rate.sqrt()
    };
    let mut panels = 8;
    let mut prev = gauss_legendre(&integrand, 0.0, PI, panels);
    loop {
        panels *= 2;
        let next = gauss_legendre(&integrand, 0.0, PI, panels);
        if (next - prev).abs() <= 1e-13 * next.abs() || panels >= 1 << 12 {
            return Ok(2.0 * next);
        }
        prev = next;
    }
}

/// Composite five-point Gauss–Legendre rule.
fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let width = (b - a) / panels as f64;
    let mut total = crate::sum::Neumaier::default();
    for p in 0..panels {
        let centre = a + (p as f64 + 0.5) * width;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total.add(w * f(centre + 0.5 * width * x));
        }
    }
    0.5 * width * total.value()
}

/// Closed-form diagnostics of the uniform ball of radius `φ` and unit mass.
///
/// Energy split and moments that depend on the (unspecified) phase-space
/// density are left empty; `energy_total` carries `E_K`.
pub fn kurth_diagnostics(state: &KurthState, config: &DiagnosticsConfig) -> Result<DiagnosticsRecord> {
    let phi = state.phi;
    if !(phi > 0.0) {
        return Err(Error::domain(format!("dilation must be positive, got {phi}")));
    }
    let lq_norms = config
        .q_list
        .iter()
        .map(|&q| {
            if !(q >= 1.0) {
                return Err(Error::domain(format!("L^q exponent must be >= 1, got {q}")));
            }
            let s = (q - 1.0) / q;
            Ok((q, (3.0 / (4.0 * PI)).powf(s) * phi.powf(-3.0 * s)))
        })
        .collect::<Result<Vec<_>>>()?;
    let concentration = config
        .r_grid
        .iter()
        .map(|&r| (r, if r >= phi { 1.0 } else { (r / phi).powi(3) }))
        .collect();
    Ok(DiagnosticsRecord {
        time: state.t,
        energy_total: Some(state.first_integral()),
        energy_kinetic: None,
        energy_potential: None,
        mass: 1.0,
        variance: 0.6 * phi * phi,
        dilation_moment: None,
        conformal_moment: None,
        inner_radius: 0.0,
        outer_radius: phi,
        inner_radius_shell: None,
        concentration,
        lq_norms,
    })
}

/// Diagnostics series for `k` sampled every `cadence` up to `t_end`.
pub fn kurth_series(k: f64, t_end: f64, cadence: f64, config: &DiagnosticsConfig) -> Result<Vec<DiagnosticsRecord>> {
    if !(cadence > 0.0) || !cadence.is_finite() {
        return Err(Error::domain(format!("cadence must be positive, got {cadence}")));
    }
    let states = integrate_phi(k, t_end, cadence)?;
    states.iter().map(|s| kurth_diagnostics(s, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on the cubic, independent of the Newton path.
    fn bisect_cubic(t: f64) -> f64 {
        let c = 2.0 * (t + 2.0 / 3.0);
        let (mut lo, mut hi) = (0.0, c.max(2.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + mid * mid * mid / 3.0 < c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn energies_and_regimes() {
        assert_eq!(kurth_energy(0.0), -0.6);
        assert_eq!(kurth_energy(1.0), 0.0);
        assert!((kurth_energy(0.5) + 0.45).abs() < 1e-15);
        for k in [0.0, 0.3, 1.0, 2.5] {
            assert!((kurth_energy(k) - first_integral(1.0, k)).abs() < 1e-15);
        }
        assert_eq!(classify_k(0.0), KurthRegime::Static);
        assert_eq!(classify_k(0.5), KurthRegime::Periodic);
        assert_eq!(classify_k(-0.5), KurthRegime::Periodic);
        assert_eq!(classify_k(1.0), KurthRegime::Dispersive);
        assert_eq!(classify_k(-1.2), KurthRegime::Dispersive);
    }

    #[test]
    fn static_solution_is_exact() {
        let traj = integrate_phi(0.0, 50.0, 0.1).unwrap();
        assert!(traj.iter().all(|s| s.phi == 1.0 && s.phi_dot == 0.0));
        assert_eq!(traj.last().unwrap().t, 50.0);
    }

    #[test]
    fn parabolic_examples() {
        assert!((parabolic_v(0.0) - 1.0).abs() < 1e-14);
        assert!((phi_parabolic(0.0) - 1.0).abs() < 1e-14);
        let v = parabolic_v(10.0);
        assert!((v - bisect_cubic(10.0)).abs() < 1e-12);
        assert!((v - 3.7504).abs() < 1e-4);
        assert!((phi_parabolic(10.0) - 7.5326).abs() < 1e-3);
        let slope = (phi_parabolic(1e4) / phi_parabolic(1e2)).ln() / 100f64.ln();
        assert!((slope - 2.0 / 3.0).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn integrator_matches_parabolic_at_t10() {
        let traj = integrate_phi(1.0, 10.0, 0.5).unwrap();
        let end = traj.last().unwrap();
        assert!((end.phi - 7.53).abs() < 1e-2);
        assert!((end.phi - phi_parabolic(10.0)).abs() < 1e-6);
    }

    #[test]
    fn hyperbolic_branch_data() {
        let (v0, t0) = hyperbolic_offset(2.0).unwrap();
        assert!((v0.abs() - 1.3170).abs() < 1e-4);
        let implicit = v0 - 2.0 * v0.sinh();
        assert!((implicit.abs() - 2.147).abs() < 1e-3);
        assert!((t0 + implicit / 3f64.powf(1.5)).abs() < 1e-15);
        for k in [1.01, 1.5, 2.0, 7.0] {
            assert!((phi_hyperbolic(0.0, k).unwrap() - 1.0).abs() < 1e-12, "k={k}");
        }
        assert!(phi_hyperbolic(1.0, 1.0).is_err());
        let slope = (phi_hyperbolic(1e4, 1.5).unwrap() / phi_hyperbolic(1e2, 1.5).unwrap()).ln() / 100f64.ln();
        assert!((slope - 1.0).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn analytic_state_satisfies_first_integral() {
        for k in [1.0, 1.5, 3.0] {
            for t in [0.0, 0.3, 5.0, 1e3] {
                let s = analytic_state(k, t).unwrap();
                assert!((s.first_integral() - kurth_energy(k)).abs() < 1e-9, "k={k} t={t}");
            }
        }
        let s = analytic_state(1.5, 0.0).unwrap();
        assert!((s.phi_dot - 1.5).abs() < 1e-12);
    }

    #[test]
    fn period_matches_kepler_closed_form() {
        // φ = (1 − |k| cos η)/(1 − k²) turns dt into (1 − |k| cos η) dη/(1 − k²)^{3/2}
        for k in [0.05f64, 0.3, 0.5, 0.9, -0.7] {
            let oracle = 2.0 * PI / (1.0 - k * k).powf(1.5);
            let t = kurth_period(k).unwrap();
            assert!(((t - oracle) / oracle).abs() < 1e-10, "k={k}: {t} vs {oracle}");
        }
        assert!((kurth_period(1e-4).unwrap() - 2.0 * PI).abs() < 1e-6);
        assert!(kurth_period(0.0).is_err());
        assert!(kurth_period(1.0).is_err());
    }

    #[test]
    fn turning_points_solve_level_set() {
        for k in [0.2, 0.5, 0.8] {
            let (lo, hi) = turning_points(k).unwrap();
            for phi in [lo, hi] {
                let lhs = 1.0 / (phi * phi) - 2.0 / phi;
                assert!((lhs - 5.0 / 3.0 * kurth_energy(k)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn periodic_orbit_returns() {
        let k = 0.5;
        let period = kurth_period(k).unwrap();
        let s = PhiIntegrator::default().sample(k, &[period, 2.0 * period]).unwrap();
        for st in s {
            assert!((st.phi - 1.0).abs() < 1e-6 && (st.phi_dot - k).abs() < 1e-6, "{st:?}");
        }
    }

    #[test]
    fn diagnostics_closed_forms() {
        let cfg = DiagnosticsConfig { r_grid: vec![0.5, 4.0], q_list: vec![1.0, 5.0 / 3.0], n_bins: None };
        let rec = kurth_diagnostics(&KurthState::initial(0.0), &cfg).unwrap();
        assert!((rec.lq_at(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((rec.variance - 0.6).abs() < 1e-15);
        assert_eq!(rec.concentration_at(4.0), Some(1.0));
        assert_eq!(rec.concentration_at(0.5), Some(0.125));
        let rec2 = kurth_diagnostics(&KurthState { t: 1.0, phi: 2.0, phi_dot: 0.0 }, &cfg).unwrap();
        assert!((rec2.lq_at(5.0 / 3.0).unwrap() - 0.2454).abs() < 1e-4);
    }

    #[test]
    fn output_times_cover_horizon() {
        assert_eq!(output_times(0.0, 0.5), vec![0.0]);
        assert_eq!(output_times(1.0, 0.5), vec![0.0, 0.5, 1.0]);
        assert_eq!(output_times(1.2, 0.5), vec![0.0, 0.5, 1.0, 1.2]);
    }
}
