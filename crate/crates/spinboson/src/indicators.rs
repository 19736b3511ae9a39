//! Decoherence factor, macrofraction fidelity, canonical decoherence rate,
//! non-Markovianity measure, and long-time asymptotics, computed by adaptive
//! quadrature from a spectral density, a partition, and a temperature.
//!
//! Conventions (ħ = k_B = 1, σ_z eigenvalues ±1):
//!
//!   log|Γ(t)| = -2 ∫ dω u(ω) coth(ω/2T) J(ω) (1-cos ωt)/ω²
//!   log B(t)  = -2 ∫ dω w(ω) tanh(ω/2T) J(ω) (1-cos ωt)/ω²
//!   γ(t)      = +∫ dω u(ω) coth(ω/2T) J(ω) sin(ωt)/ω
//!             = -(1/2) d/dt log|Γ(t)|
//!   𝒩        = -∫_{γ<0} γ(t) dt
//!
//! with u the unobserved and w the observed weight. γ(t) is defined with the
//! sign that makes it the coefficient of the dephasing dissipator
//! γ(t)(σ_z ρ σ_z - ρ) of the time-local master equation, so γ ≥ 0 at all
//! times is exactly the (time-dependent) Markovian case and 𝒩 > 0 certifies
//! non-Markovianity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{self, OscKernel, QuadSpec};
use crate::spectral::{EnvPartition, Role, SpectralDensity};

/// Environment temperature (frequency units, k_B = 1). T = 0 is the exact
/// vacuum limit coth = tanh = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermo {
    temperature: f64,
}

impl Thermo {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
        }
        Ok(Self { temperature })
    }

    pub fn zero() -> Self {
        Self { temperature: 0.0 }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn is_vacuum(&self) -> bool {
        self.temperature == 0.0
    }
}

/// coth(ω/2T) with the vacuum limit 1 at T = 0 and the Laurent expansion
/// 2T/ω + ω/6T below ω < 10⁻³ min(T, Λ) to avoid cancellation.
#[inline]
pub(crate) fn coth_half(omega: f64, temperature: f64, cutoff: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else if omega < 1e-3 * temperature.min(cutoff) {
        2.0 * temperature / omega + omega / (6.0 * temperature)
    } else {
        (omega / (2.0 * temperature)).tanh().recip()
    }
}

/// tanh(ω/2T) with the vacuum limit 1 at T = 0.
#[inline]
pub(crate) fn tanh_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        (omega / (2.0 * temperature)).tanh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ThermalFactor {
    Coth,
    Tanh,
    One,
}

impl ThermalFactor {
    #[inline]
    fn eval(&self, omega: f64, temperature: f64, cutoff: f64) -> f64 {
        match self {
            ThermalFactor::Coth => coth_half(omega, temperature, cutoff),
            ThermalFactor::Tanh => tanh_half(omega, temperature),
            ThermalFactor::One => 1.0,
        }
    }

    /// Power of ω contributed near ω → 0.
    fn zero_exponent(&self, temperature: f64) -> f64 {
        match self {
            ThermalFactor::Coth if temperature > 0.0 => -1.0,
            ThermalFactor::Tanh if temperature > 0.0 => 1.0,
            _ => 0.0,
        }
    }
}

/// ∫ weight(ω) · tf(ω) · J(ω)/ω^k · kernel(ωt) dω over the support of the
/// given role, with the ω → 0 head regularized by a power substitution when
/// the integrand has a (integrable) endpoint singularity there.
fn weighted_integral(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    thermo: Thermo,
    tf: ThermalFactor,
    inv_power: i32,
    kernel: Option<(OscKernel, f64)>,
    spec: &QuadSpec,
) -> Result<f64> {
    let temperature = thermo.temperature();
    let cutoff = sd.cutoff();
    let integrand = |omega: f64| -> f64 {
        if omega <= 1e-280 {
            return 0.0;
        }
        let mut v = partition.weight(role, omega)
            * tf.eval(omega, temperature, cutoff)
            * sd.eval_raw(omega)
            / omega.powi(inv_power);
        if let Some((k, t)) = kernel {
            v *= k.eval(omega, t);
        }
        v
    };

    // ω-exponent of the integrand as ω → 0, used to pick the head treatment.
    let kernel_exponent = match kernel {
        Some((OscKernel::OneMinusCos, _)) => 2.0,
        Some((OscKernel::Sin, _)) => 1.0,
        None => 0.0,
    };
    let head_exponent =
        sd.ohmicity() - inv_power as f64 + tf.zero_exponent(temperature) + kernel_exponent;

    let mut total = 0.0;
    for (a, b_opt) in pieces(partition, role) {
        let b = b_opt.unwrap_or(f64::INFINITY);
        if b <= a {
            continue;
        }
        if a == 0.0 && head_exponent < 1.0 {
            if head_exponent <= -1.0 {
                return Err(Error::Domain(format!(
                    "integrand ~ ω^{head_exponent:.3} near 0 is not integrable"
                )));
            }
            let mut c = cutoff.min(b);
            if temperature > 0.0 {
                c = c.min(temperature);
            }
            if let Some((_, t)) = kernel {
                if t > 0.0 {
                    // Keep the kernel within a quarter period on the head.
                    c = c.min(0.5 * std::f64::consts::PI / t);
                }
            }
            // Substitute ω = c v^m so the transformed integrand vanishes at
            // least linearly at v = 0.
            let m = ((2.0 / (head_exponent + 1.0)).ceil() as i32).clamp(1, 48);
            let mf = m as f64;
            let head = quad::integrate(
                |v: f64| integrand(c * v.powi(m)) * c * mf * v.powi(m - 1),
                0.0,
                1.0,
                &QuadSpec { osc_frequency: None, ..*spec },
            )?;
            total += head.value;
            if c < b {
                total += integrate_piece(&integrand, c, b, kernel, spec)?;
            }
        } else {
            total += integrate_piece(&integrand, a, b, kernel, spec)?;
        }
    }
    if !total.is_finite() {
        return Err(Error::Domain("indicator integral evaluated to a non-finite value".into()));
    }
    Ok(total)
}

fn integrate_piece(
    integrand: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    kernel: Option<(OscKernel, f64)>,
    spec: &QuadSpec,
) -> Result<f64> {
    let osc = kernel.map(|(_, t)| t).filter(|t| *t > 0.0);
    let spec = QuadSpec { osc_frequency: osc, ..*spec };
    Ok(quad::integrate(integrand, a, b, &spec)?.value)
}

/// Integration pieces for a role: the support intervals, additionally split
/// at partition breakpoints so no piece straddles a sharp or steep edge.
fn pieces(partition: &EnvPartition, role: Role) -> Vec<(f64, Option<f64>)> {
    let breaks = partition.breakpoints();
    let mut out = Vec::new();
    for (a, b_opt) in partition.support(role) {
        let mut lo = a;
        for &brk in &breaks {
            let inside = brk > lo && b_opt.map_or(true, |b| brk < b);
            if inside {
                out.push((lo, Some(brk)));
                lo = brk;
            }
        }
        out.push((lo, b_opt));
    }
    out
}

/// log|Γ(t)| over an explicit role weight.
pub fn log_decoherence_weighted(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    check_time(t)?;
    let v = weighted_integral(
        sd,
        partition,
        role,
        thermo,
        ThermalFactor::Coth,
        2,
        Some((OscKernel::OneMinusCos, t)),
        spec,
    )?;
    Ok(-2.0 * v.max(0.0))
}

/// log|Γ(t)| of the unobserved part of the environment. Always <= 0 and
/// exactly 0 at t = 0.
pub fn log_decoherence(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    log_decoherence_weighted(sd, partition, Role::Unobserved, thermo, t, spec)
}

/// log B(t) over an explicit role weight.
pub fn log_fidelity_weighted(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    check_time(t)?;
    let v = weighted_integral(
        sd,
        partition,
        role,
        thermo,
        ThermalFactor::Tanh,
        2,
        Some((OscKernel::OneMinusCos, t)),
        spec,
    )?;
    Ok(-2.0 * v.max(0.0))
}

/// log B(t) of the observed macrofraction. Always <= 0, exactly 0 at t = 0.
pub fn log_fidelity(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    log_fidelity_weighted(sd, partition, Role::Observed, thermo, t, spec)
}

/// Canonical decoherence rate γ(t) over an explicit role weight.
pub fn gamma_rate_weighted(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    check_time(t)?;
    weighted_integral(
        sd,
        partition,
        role,
        thermo,
        ThermalFactor::Coth,
        1,
        Some((OscKernel::Sin, t)),
        spec,
    )
}

/// Canonical decoherence rate γ(t) = -(1/2) d/dt log|Γ(t)| of the unobserved
/// part. Positive at all t if and only if the evolution is Markovian.
pub fn gamma_rate(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    gamma_rate_weighted(sd, partition, Role::Unobserved, thermo, t, spec)
}

/// High-temperature limit of the rate: 2T ∫ u(ω) J(ω)/ω² sin(ωt) dω.
///
/// The leading coth expansion coth(ω/2T) ≈ 2T/ω fixes the prefactor 2T; the
/// zero crossings coincide with those of ∫ ω^{s-2} e^{-ω/Λ} sin(ωt) dω.
pub fn gamma_rate_high_t(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    check_time(t)?;
    if !(thermo.temperature() > 0.0) {
        return Err(Error::Domain("high-temperature rate requires T > 0".into()));
    }
    let v = weighted_integral(
        sd,
        partition,
        Role::Unobserved,
        thermo,
        ThermalFactor::One,
        2,
        Some((OscKernel::Sin, t)),
        spec,
    )?;
    Ok(2.0 * thermo.temperature() * v)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite >= 0, got {t}")));
    }
    Ok(())
}

/// Long-time limit of a log-indicator: either a finite plateau or divergence
/// (the indicator decays to zero; for the decoherence factor this means
/// complete decoherence).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptote {
    Finite(f64),
    Divergent,
}

impl Asymptote {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Asymptote::Divergent)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Asymptote::Finite(v) => Some(*v),
            Asymptote::Divergent => None,
        }
    }
}

fn asymptote_weighted(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    thermo: Thermo,
    tf: ThermalFactor,
    spec: &QuadSpec,
) -> Result<Asymptote> {
    let head_exponent = sd.ohmicity() - 2.0 + tf.zero_exponent(thermo.temperature());
    if head_exponent <= -1.0 && partition.weight_at_zero(role) > 0.0 {
        return Ok(Asymptote::Divergent);
    }
    let v = weighted_integral(sd, partition, role, thermo, tf, 2, None, spec)?;
    Ok(Asymptote::Finite(-2.0 * v.max(0.0)))
}

/// t → ∞ limit of log|Γ(t)|: -2 ∫ u(ω) coth(ω/2T) J(ω)/ω² dω.
///
/// Divergent (full decoherence, |Γ| → 0) when the ω → 0 behavior of the
/// integrand is non-integrable over weight supported at zero frequency:
/// s ≤ 2 at T > 0, or s ≤ 1 at T = 0.
pub fn asymptotic_log_decoherence(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    spec: &QuadSpec,
) -> Result<Asymptote> {
    asymptote_weighted(sd, partition, Role::Unobserved, thermo, ThermalFactor::Coth, spec)
}

/// t → ∞ limit of log B(t): -2 ∫ w(ω) tanh(ω/2T) J(ω)/ω² dω. Finite for all
/// s > 0 at T > 0; at T = 0 it coincides with the decoherence asymptote and
/// inherits its s ≤ 1 divergence.
pub fn asymptotic_log_fidelity(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    spec: &QuadSpec,
) -> Result<Asymptote> {
    asymptote_weighted(sd, partition, Role::Observed, thermo, ThermalFactor::Tanh, spec)
}

/// Asymptote over an explicit role weight; `coth_weight` selects between the
/// decoherence (coth) and fidelity (tanh) thermal factors.
pub fn asymptote_over(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    thermo: Thermo,
    coth_weight: bool,
    spec: &QuadSpec,
) -> Result<Asymptote> {
    let tf = if coth_weight { ThermalFactor::Coth } else { ThermalFactor::Tanh };
    asymptote_weighted(sd, partition, role, thermo, tf, spec)
}

// ---------------------------------------------------------------------------
// Non-Markovianity
// ---------------------------------------------------------------------------

/// Samples per t_max span when scanning γ for sign changes.
const NM_GRID_PER_HORIZON: usize = 2000;
/// Zero crossings are refined to this time tolerance in units of 1/Λ.
const NM_ROOT_TOL: f64 = 1e-8;
/// Relative change of 𝒩 under horizon doubling accepted as converged.
const NM_REL_CHANGE: f64 = 1e-3;
/// Default integration horizon in units of 1/Λ.
pub const DEFAULT_NM_HORIZON: f64 = 50.0;

/// Non-Markovianity measure with its supporting diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NMResult {
    /// 𝒩 = -∫_{γ<0} γ dt over [0, t_max].
    pub value: f64,
    /// Maximal intervals within [0, t_max] on which γ < 0.
    pub negative_intervals: Vec<(f64, f64)>,
    /// Integration horizon.
    pub t_max: f64,
    /// Whether 𝒩 changed by less than 10⁻³ relative when the horizon was
    /// doubled to 2 t_max.
    pub converged: bool,
}

/// Compute 𝒩 over [0, t_max]: scan γ on a uniform grid, bracket sign
/// changes, refine the crossings by bisection, and integrate -γ over the
/// negative lobes. The scan internally extends to 2 t_max to set the
/// convergence flag.
pub fn non_markovianity(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    t_max: f64,
    spec: &QuadSpec,
) -> Result<NMResult> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Domain(format!("t_max must be > 0, got {t_max}")));
    }
    let gamma = |t: f64| gamma_rate(sd, partition, thermo, t, spec);
    let horizon = 2.0 * t_max;
    let root_tol = NM_ROOT_TOL / sd.cutoff();

    let mut n = 2 * NM_GRID_PER_HORIZON;
    let mut lobes = loop {
        let lobes = negative_lobes(&gamma, horizon, n, root_tol)?;
        let dt = horizon / n as f64;
        let dense = lobes
            .windows(2)
            .any(|pair| pair[1].0 - pair[0].1 < 4.0 * dt || pair[0].1 - pair[0].0 < 4.0 * dt);
        if dense && n == 2 * NM_GRID_PER_HORIZON {
            // One refinement pass at half spacing when crossings crowd the grid.
            n *= 2;
            continue;
        }
        break lobes;
    };
    // Lobe integration only needs modest accuracy relative to the γ samples.
    let lobe_spec = QuadSpec {
        rel_tol: spec.rel_tol.max(1e-8),
        abs_tol: spec.abs_tol.max(1e-10),
        max_depth: 24,
        osc_frequency: None,
    };

    let mut value_full = 0.0;
    let mut value_primary = 0.0;
    let mut intervals_primary = Vec::new();
    for &(lo, hi) in &lobes {
        let contribution = quad::integrate(|t| -gamma(t).unwrap_or(f64::NAN), lo, hi, &lobe_spec)?;
        if !contribution.value.is_finite() {
            return Err(Error::UnresolvedRoot {
                t: lo,
                detail: "rate evaluation failed inside a negative lobe".into(),
            });
        }
        value_full += contribution.value;
        if lo < t_max {
            let hi_clip = hi.min(t_max);
            intervals_primary.push((lo, hi_clip));
            if hi <= t_max {
                value_primary += contribution.value;
            } else {
                value_primary +=
                    quad::integrate(|t| -gamma(t).unwrap_or(f64::NAN), lo, hi_clip, &lobe_spec)?
                        .value;
            }
        }
    }
    // γ noise can leave immaterial negative dust; clamp to zero.
    let value_primary = value_primary.max(0.0);
    let value_full = value_full.max(0.0);
    let converged = (value_full - value_primary).abs() <= (NM_REL_CHANGE * value_primary).max(1e-9);
    while let Some(last) = lobes.last() {
        if last.0 >= t_max {
            lobes.pop();
        } else {
            break;
        }
    }
    Ok(NMResult { value: value_primary, negative_intervals: intervals_primary, t_max, converged })
}

/// Maximal intervals of strictly negative γ on [0, horizon], with crossing
/// endpoints refined to `root_tol`.
fn negative_lobes(
    gamma: &impl Fn(f64) -> Result<f64>,
    horizon: f64,
    n: usize,
    root_tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let dt = horizon / n as f64;
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 * dt;
        samples.push((t, gamma(t)?));
    }

    let mut crossings = Vec::new();
    for pair in samples.windows(2) {
        let (t0, g0) = pair[0];
        let (t1, g1) = pair[1];
        if g0 == 0.0 || g0.is_nan() || g1.is_nan() {
            continue;
        }
        if g0 * g1 < 0.0 {
            crossings.push(bisect_zero(gamma, t0, g0, t1, g1, root_tol)?);
        }
    }

    let mut lobes = Vec::new();
    let mut lobe_start: Option<f64> = None;
    // Sign on each segment between crossings, read off the sample just after
    // the segment start.
    let mut edges = vec![0.0];
    edges.extend_from_slice(&crossings);
    edges.push(horizon);
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= root_tol {
            continue;
        }
        let probe = samples
            .iter()
            .find(|(t, g)| *t > lo && *t < hi && *g != 0.0)
            .map(|(_, g)| *g)
            .unwrap_or_else(|| gamma(0.5 * (lo + hi)).unwrap_or(0.0));
        if probe < 0.0 {
            if lobe_start.is_none() {
                lobe_start = Some(lo);
            }
        } else if let Some(start) = lobe_start.take() {
            lobes.push((start, lo));
        }
    }
    if let Some(start) = lobe_start {
        lobes.push((start, horizon));
    }
    Ok(lobes)
}

fn bisect_zero(
    gamma: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut g_lo: f64,
    mut hi: f64,
    _g_hi: f64,
    tol: f64,
) -> Result<f64> {
    for _ in 0..128 {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = gamma(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_lo * g_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    Err(Error::UnresolvedRoot {
        t: 0.5 * (lo + hi),
        detail: format!("bisection stalled above tolerance {tol:.3e}"),
    })
}

// ---------------------------------------------------------------------------
// Indicator series
// ---------------------------------------------------------------------------

/// How a series was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    ClosedForm,
}

/// Time series of the indicator functions on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    pub times: Vec<f64>,
    pub log_dec: Vec<f64>,
    pub log_fid: Vec<f64>,
    pub gamma: Vec<f64>,
    pub method: Method,
}

/// Evaluate log|Γ|, log B, and γ on a strictly increasing time grid.
///
/// `Method::ClosedForm` is available for the uncut partition with s > 1 (the
/// thermal parts additionally need integer s or s > 2) and is evaluated
/// through the special-function path; `Method::Quadrature` works for every
/// partition.
pub fn compute_series(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    thermo: Thermo,
    times: &[f64],
    method: Method,
    spec: &QuadSpec,
) -> Result<IndicatorSeries> {
    if times.is_empty() {
        return Err(Error::Domain("time grid must be nonempty".into()));
    }
    let mut prev = -1.0;
    for &t in times {
        if !(t >= 0.0) || t <= prev {
            return Err(Error::Domain("time grid must be nonnegative and strictly increasing".into()));
        }
        prev = t;
    }
    if method == Method::ClosedForm && !matches!(partition, EnvPartition::Uncut) {
        return Err(Error::Domain(
            "closed-form evaluation is only available for the uncut partition".into(),
        ));
    }

    let rows: Result<Vec<(f64, f64, f64)>> = times
        .par_iter()
        .map(|&t| match method {
            Method::Quadrature => {
                let d = log_decoherence(sd, partition, thermo, t, spec)?;
                let f = log_fidelity(sd, partition, thermo, t, spec)?;
                let g = gamma_rate(sd, partition, thermo, t, spec)?;
                Ok((d, f, g))
            }
            Method::ClosedForm => {
                let s = sd.ohmicity();
                let lambda = sd.cutoff();
                let temp = thermo.temperature();
                let d = crate::closed_form::log_decoherence_uncut(s, temp, lambda, t)?;
                let f = crate::closed_form::log_fidelity_uncut(s, temp, lambda, t)?;
                let g = crate::closed_form::gamma_rate_uncut(s, temp, lambda, t)?;
                Ok((d, f, g))
            }
        })
        .collect();
    let rows = rows?;

    Ok(IndicatorSeries {
        times: times.to_vec(),
        log_dec: rows.iter().map(|r| r.0).collect(),
        log_fid: rows.iter().map(|r| r.1).collect(),
        gamma: rows.iter().map(|r| r.2).collect(),
        method,
    })
}

/// Uniform time grid on [t_min, t_max] with n points.
pub fn time_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 1 || !(t_max > t_min) || !(t_min >= 0.0) {
        return Err(Error::Domain(format!(
            "invalid time grid: t_min = {t_min}, t_max = {t_max}, n = {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![t_min]);
    }
    Ok((0..n).map(|i| t_min + (t_max - t_min) * i as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn sd(s: f64) -> SpectralDensity {
        SpectralDensity::new(s, 1.0).unwrap()
    }

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn decoherence_examples() {
        let uncut = EnvPartition::uncut();
        let vac = Thermo::zero();

        let v = log_decoherence(&sd(2.0), &uncut, vac, 0.0, &spec()).unwrap();
        assert_eq!(v, 0.0);

        // -2 ∫ e^{-ω}(1-cos ω) dω = -2(1 - 1/2) = -1
        let v = log_decoherence(&sd(2.0), &uncut, vac, 1.0, &spec()).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-9);

        // t → ∞ limit of -2t²/(1+t²) = -2
        let v = log_decoherence(&sd(2.0), &uncut, vac, 1e6, &spec()).unwrap();
        assert_abs_diff_eq!(v, -2.0, epsilon = 1e-5);
    }

    #[test]
    fn fidelity_examples() {
        let uncut = EnvPartition::uncut();

        let v = log_fidelity(&sd(3.0), &uncut, Thermo::new(0.7).unwrap(), 0.0, &spec()).unwrap();
        assert_eq!(v, 0.0);

        // T = 0: tanh = coth = 1, so fidelity equals decoherence.
        let v = log_fidelity(&sd(2.0), &uncut, Thermo::zero(), 1.0, &spec()).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-9);

        // T → ∞: tanh → 0, so log B → 0.
        let v = log_fidelity(&sd(2.0), &uncut, Thermo::new(1e8).unwrap(), 1.0, &spec()).unwrap();
        assert!(v.abs() < 1e-6, "expected vanishing log fidelity, got {v}");
    }

    #[test]
    fn ordering_same_weight() {
        let p = EnvPartition::single_cut(2.0).unwrap();
        let th = Thermo::new(0.8).unwrap();
        for &t in &[0.3, 1.0, 4.0] {
            let d =
                log_decoherence_weighted(&sd(3.0), &p, Role::Observed, th, t, &spec()).unwrap();
            let b = log_fidelity_weighted(&sd(3.0), &p, Role::Observed, th, t, &spec()).unwrap();
            assert!(d <= b + 1e-12, "coth ≥ tanh violated at t = {t}: {d} > {b}");
        }
    }

    #[test]
    fn low_temperature_degeneracy() {
        let th = Thermo::new(1e-9).unwrap();
        let uncut = EnvPartition::uncut();
        let d = log_decoherence(&sd(3.0), &uncut, th, 2.0, &spec()).unwrap();
        let b = log_fidelity(&sd(3.0), &uncut, th, 2.0, &spec()).unwrap();
        assert_relative_eq!(d, b, max_relative = 1e-6);
    }

    #[test]
    fn gamma_rate_examples() {
        let uncut = EnvPartition::uncut();
        let vac = Thermo::zero();

        let g = gamma_rate(&sd(4.0), &uncut, vac, 0.0, &spec()).unwrap();
        assert_eq!(g, 0.0);

        // Vacuum rate Γ(s) sin(s arctan Λt)/(1+Λ²t²)^{s/2}: first zero at
        // Λt = tan(π/s), i.e. t = 1 for s = 4 and t = √3 for s = 3.
        let g = gamma_rate(&sd(4.0), &uncut, vac, 1.0, &spec()).unwrap();
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-9);
        let before = gamma_rate(&sd(4.0), &uncut, vac, 0.9, &spec()).unwrap();
        let after = gamma_rate(&sd(4.0), &uncut, vac, 1.1, &spec()).unwrap();
        assert!(before > 0.0 && after < 0.0);

        let g = gamma_rate(&sd(3.0), &uncut, vac, 3.0f64.sqrt(), &spec()).unwrap();
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn gamma_rate_nonnegative_below_threshold() {
        // At T = 0 the vacuum rate stays nonnegative for s <= 2; at T = Λ
        // the thermal contribution pushes the crossover up to s = 3.
        let uncut = EnvPartition::uncut();
        for &t in &[0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
            let g = gamma_rate(&sd(2.0), &uncut, Thermo::zero(), t, &spec()).unwrap();
            assert!(g >= -1e-10, "s = 2 vacuum rate went negative at t = {t}: {g}");
            let g =
                gamma_rate(&sd(3.0), &uncut, Thermo::new(1.0).unwrap(), t, &spec()).unwrap();
            assert!(g >= -1e-10, "s = 3 thermal rate went negative at t = {t}: {g}");
        }
    }

    #[test]
    fn gamma_high_t_matches_full_rate() {
        let uncut = EnvPartition::uncut();
        let th = Thermo::new(100.0).unwrap();
        let full = gamma_rate(&sd(4.0), &uncut, th, 1.0, &spec()).unwrap();
        let high = gamma_rate_high_t(&sd(4.0), &uncut, th, 1.0, &spec()).unwrap();
        assert_relative_eq!(full, high, max_relative = 1e-2);
    }

    #[test]
    fn derivative_consistency() {
        let p = EnvPartition::single_cut(2.0).unwrap();
        let th = Thermo::new(1.0).unwrap();
        let s3 = sd(3.0);
        let t0 = 1.0;
        let g = gamma_rate(&s3, &p, th, t0, &spec()).unwrap();
        let h = 1e-4;
        let fd = -(log_decoherence(&s3, &p, th, t0 + h, &spec()).unwrap()
            - log_decoherence(&s3, &p, th, t0 - h, &spec()).unwrap())
            / (4.0 * h);
        assert_relative_eq!(g, fd, max_relative = 1e-6);
    }

    #[test]
    fn asymptote_examples() {
        let uncut = EnvPartition::uncut();

        // s = 5, T = 0: -2 Γ(4) = -12
        let a = asymptotic_log_decoherence(&sd(5.0), &uncut, Thermo::zero(), &spec()).unwrap();
        assert_relative_eq!(a.finite().unwrap(), -12.0, max_relative = 1e-9);
        let b = asymptotic_log_fidelity(&sd(5.0), &uncut, Thermo::zero(), &spec()).unwrap();
        assert_relative_eq!(b.finite().unwrap(), -12.0, max_relative = 1e-9);

        // s = 2, T > 0: ~ 2T/ω near zero, log-divergent.
        let a = asymptotic_log_decoherence(&sd(2.0), &uncut, Thermo::new(1.0).unwrap(), &spec())
            .unwrap();
        assert!(a.is_divergent());

        // Fidelity stays finite at T > 0 even for s = 2.
        let b = asymptotic_log_fidelity(&sd(2.0), &uncut, Thermo::new(1.0).unwrap(), &spec())
            .unwrap();
        assert!(!b.is_divergent());
    }

    #[test]
    fn asymptote_matches_long_time_plateau() {
        // Window complement as unobserved weight keeps everything finite.
        let p = EnvPartition::window(3.0, 5.0).unwrap();
        let th = Thermo::new(1.0).unwrap();
        let s5 = sd(5.0);
        let asym = asymptotic_log_decoherence(&s5, &p, th, &spec()).unwrap().finite().unwrap();
        let late = log_decoherence(&s5, &p, th, 50.0, &spec()).unwrap();
        assert_relative_eq!(asym, late, max_relative = 1e-2);
    }

    #[test]
    fn thermal_asymptote_value() {
        // s = 3, T = Λ = 1: 2∫ coth(ω/2) ω e^{-ω} dω = 2 + 4(π²/6 - 1).
        let uncut = EnvPartition::uncut();
        let a = asymptotic_log_decoherence(&sd(3.0), &uncut, Thermo::new(1.0).unwrap(), &spec())
            .unwrap();
        let expected = -(2.0 + 4.0 * (std::f64::consts::PI.powi(2) / 6.0 - 1.0));
        assert_relative_eq!(a.finite().unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn markovian_measure_vanishes() {
        let uncut = EnvPartition::uncut();
        let r =
            non_markovianity(&sd(2.0), &uncut, Thermo::new(1.0).unwrap(), 20.0, &spec()).unwrap();
        assert!(r.value <= 1e-6, "expected 𝒩 = 0 for s = 2, got {}", r.value);
        assert!(r.negative_intervals.is_empty());
        assert!(r.converged);
    }

    #[test]
    fn super_ohmic_measure_positive() {
        let uncut = EnvPartition::uncut();
        let r =
            non_markovianity(&sd(4.0), &uncut, Thermo::new(1.0).unwrap(), 20.0, &spec()).unwrap();
        assert!(r.value > 1e-3, "expected 𝒩 > 0 for s = 4, got {}", r.value);
        assert!(!r.negative_intervals.is_empty());
        for (a, b) in &r.negative_intervals {
            assert!(*a >= 0.0 && b > a && *b <= r.t_max + 1e-12);
        }
    }

    #[test]
    fn cut_induces_non_markovianity() {
        let p = EnvPartition::single_cut(2.0).unwrap();
        let r = non_markovianity(&sd(3.0), &p, Thermo::new(1.0).unwrap(), 20.0, &spec()).unwrap();
        assert!(r.value > 1e-3, "expected cut-induced 𝒩 > 0, got {}", r.value);
    }

    #[test]
    fn series_basics() {
        let uncut = EnvPartition::uncut();
        let th = Thermo::new(1.0).unwrap();
        let times = time_grid(0.0, 5.0, 11).unwrap();
        let s = compute_series(&sd(3.0), &uncut, th, &times, Method::Quadrature, &spec()).unwrap();
        assert_eq!(s.log_dec[0], 0.0);
        assert_eq!(s.log_fid[0], 0.0);
        assert_eq!(s.gamma[0], 0.0);
        for i in 0..times.len() {
            assert!(s.log_dec[i] <= 0.0);
            assert!(s.log_fid[i] <= 0.0);
            assert!(s.log_dec[i] <= s.log_fid[i] + 1e-12);
        }

        let c = compute_series(&sd(3.0), &uncut, th, &times, Method::ClosedForm, &spec()).unwrap();
        for i in 0..times.len() {
            assert_relative_eq!(s.log_dec[i], c.log_dec[i], max_relative = 1e-7, epsilon = 1e-10);
            assert_relative_eq!(s.log_fid[i], c.log_fid[i], max_relative = 1e-7, epsilon = 1e-10);
            assert_relative_eq!(s.gamma[i], c.gamma[i], max_relative = 1e-7, epsilon = 1e-10);
        }
    }

    #[test]
    fn closed_form_series_rejects_cut_partitions() {
        let p = EnvPartition::single_cut(1.0).unwrap();
        let times = vec![0.0, 1.0];
        let r = compute_series(
            &sd(3.0),
            &p,
            Thermo::new(1.0).unwrap(),
            &times,
            Method::ClosedForm,
            &spec(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn macrofraction_additivity_disjoint_windows() {
        // log B over w1 + w2 with disjoint supports equals the sum.
        let th = Thermo::new(1.0).unwrap();
        let s3 = sd(3.0);
        let w1 = EnvPartition::window(0.5, 1.5).unwrap();
        let w2 = EnvPartition::window(1.5, 3.0).unwrap();
        let w12 = EnvPartition::window(0.5, 3.0).unwrap();
        let t = 2.0;
        let sum = log_fidelity(&s3, &w1, th, t, &spec()).unwrap()
            + log_fidelity(&s3, &w2, th, t, &spec()).unwrap();
        let joint = log_fidelity(&s3, &w12, th, t, &spec()).unwrap();
        assert_relative_eq!(sum, joint, max_relative = 1e-8);
    }

    #[test]
    fn sub_ohmic_rates_integrate() {
        // s < 2 exercises the singular-head substitution.
        let uncut = EnvPartition::uncut();
        let th = Thermo::new(1.0).unwrap();
        let g = gamma_rate(&sd(1.5), &uncut, th, 1.0, &spec()).unwrap();
        assert!(g.is_finite() && g > 0.0);
        let d = log_decoherence(&sd(0.5), &uncut, th, 1.0, &spec()).unwrap();
        assert!(d.is_finite() && d < 0.0);
    }
}
