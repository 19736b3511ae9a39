//! Ohmic-family spectral densities, observed/unobserved frequency partitions,
//! and discretization into finite mode sets.
//!
//! The spectral density is J(ω) = ω^s Λ^{1-s} e^{-ω/Λ} with Ohmicity `s` and
//! cutoff `Λ` (ħ = k_B = 1). A partition assigns each frequency a weight in
//! [0, 1] for the observed part of the environment and the complementary
//! weight for the unobserved part; the `Uncut` partition instead gives both
//! roles the full density (two independent, macroscopically large parts).

use crate::error::{Error, Result};

/// Which part of the environment a weight or mode set refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Observed,
    Unobserved,
}

/// Ohmic-family spectral density J(ω) = ω^s Λ^{1-s} e^{-ω/Λ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    s: f64,
    cutoff: f64,
}

impl SpectralDensity {
    /// `s` is the dimensionless Ohmicity (> 0), `cutoff` the frequency Λ (> 0).
    pub fn new(s: f64, cutoff: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("Ohmicity s must be > 0, got {s}")));
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::Domain(format!("cutoff must be > 0, got {cutoff}")));
        }
        Ok(Self { s, cutoff })
    }

    pub fn ohmicity(&self) -> f64 {
        self.s
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// J(ω) for ω ≥ 0; negative frequencies are a domain error.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 || omega.is_nan() {
            return Err(Error::Domain(format!(
                "spectral density evaluated at negative frequency {omega}"
            )));
        }
        Ok(self.eval_raw(omega))
    }

    /// J(ω) without the sign check, for integrand closures that already
    /// guarantee ω ≥ 0.
    #[inline]
    pub(crate) fn eval_raw(&self, omega: f64) -> f64 {
        let x = omega / self.cutoff;
        // Λ (ω/Λ)^s e^{-ω/Λ}; powf(0, s>0) = 0 gives J(0) = 0.
        self.cutoff * x.powf(self.s) * (-x).exp()
    }
}

/// Frequency-domain split of the environment into observed and unobserved
/// parts.
///
/// * `Uncut` — both parts are macroscopically large and each sees the full
///   spectral density: both role weights are identically 1.
/// * `SingleCut` — observed frequencies are [0, β], unobserved (β, ∞).
/// * `Window` — observed frequencies are [α, β], unobserved the complement.
/// * `SoftWindow` — smooth version of `Window` built from logistic flanks of
///   scale σ at each edge; with α = 0 only the upper flank is present, so the
///   weight saturates to 1 at ω = 0 (a smooth single cut).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvPartition {
    Uncut,
    SingleCut { beta: f64 },
    Window { alpha: f64, beta: f64 },
    SoftWindow { alpha: f64, beta: f64, sigma: f64 },
}

impl EnvPartition {
    pub fn uncut() -> Self {
        EnvPartition::Uncut
    }

    pub fn single_cut(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("cut frequency must be > 0, got {beta}")));
        }
        Ok(EnvPartition::SingleCut { beta })
    }

    pub fn window(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !(beta > alpha) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "window requires 0 <= alpha < beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(EnvPartition::Window { alpha, beta })
    }

    pub fn soft_window(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !(beta > alpha) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "soft window requires 0 <= alpha < beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("softness scale must be > 0, got {sigma}")));
        }
        Ok(EnvPartition::SoftWindow { alpha, beta, sigma })
    }

    /// Weight of frequency ω in the observed part, in [0, 1].
    pub fn observed_weight(&self, omega: f64) -> f64 {
        match *self {
            EnvPartition::Uncut => 1.0,
            EnvPartition::SingleCut { beta } => {
                if omega <= beta {
                    1.0
                } else {
                    0.0
                }
            }
            EnvPartition::Window { alpha, beta } => {
                if omega >= alpha && omega <= beta {
                    1.0
                } else {
                    0.0
                }
            }
            EnvPartition::SoftWindow { alpha, beta, sigma } => {
                let fall = logistic((beta - omega) / sigma);
                if alpha == 0.0 {
                    fall
                } else {
                    logistic((omega - alpha) / sigma) * fall
                }
            }
        }
    }

    /// Weight of frequency ω in the unobserved part.
    ///
    /// For `Uncut` this is 1 (each part sees the full density); otherwise the
    /// complement of the observed weight.
    pub fn unobserved_weight(&self, omega: f64) -> f64 {
        match *self {
            EnvPartition::Uncut => 1.0,
            _ => 1.0 - self.observed_weight(omega),
        }
    }

    pub fn weight(&self, role: Role, omega: f64) -> f64 {
        match role {
            Role::Observed => self.observed_weight(omega),
            Role::Unobserved => self.unobserved_weight(omega),
        }
    }

    /// Limiting weight of the given role as ω → 0⁺. Used to decide whether
    /// asymptotic integrals with an ω → 0 singularity diverge.
    pub fn weight_at_zero(&self, role: Role) -> f64 {
        match *self {
            EnvPartition::SoftWindow { alpha, beta, sigma } => {
                let w0 = if alpha == 0.0 {
                    logistic(beta / sigma)
                } else {
                    logistic(-alpha / sigma) * logistic(beta / sigma)
                };
                match role {
                    Role::Observed => w0,
                    Role::Unobserved => 1.0 - w0,
                }
            }
            _ => self.weight(role, 0.0),
        }
    }

    /// Frequencies where the weight is discontinuous or changes rapidly.
    /// Quadrature splits integration ranges at these points.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            EnvPartition::Uncut => vec![],
            EnvPartition::SingleCut { beta } => vec![beta],
            EnvPartition::Window { alpha, beta } => {
                if alpha > 0.0 {
                    vec![alpha, beta]
                } else {
                    vec![beta]
                }
            }
            EnvPartition::SoftWindow { alpha, beta, .. } => {
                if alpha > 0.0 {
                    vec![alpha, beta]
                } else {
                    vec![beta]
                }
            }
        }
    }

    /// Intervals on which the role weight is nonzero, as (start, end) pairs
    /// with `None` for an unbounded upper end. Sharp partitions exclude the
    /// zero-weight stretches entirely; soft windows report full support.
    pub fn support(&self, role: Role) -> Vec<(f64, Option<f64>)> {
        match (*self, role) {
            (EnvPartition::Uncut, _) => vec![(0.0, None)],
            (EnvPartition::SingleCut { beta }, Role::Observed) => vec![(0.0, Some(beta))],
            (EnvPartition::SingleCut { beta }, Role::Unobserved) => vec![(beta, None)],
            (EnvPartition::Window { alpha, beta }, Role::Observed) => vec![(alpha, Some(beta))],
            (EnvPartition::Window { alpha, beta }, Role::Unobserved) => {
                if alpha > 0.0 {
                    vec![(0.0, Some(alpha)), (beta, None)]
                } else {
                    vec![(beta, None)]
                }
            }
            (EnvPartition::SoftWindow { .. }, _) => vec![(0.0, None)],
        }
    }
}

#[inline]
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A single discrete environment oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Mode frequency ω_k > 0.
    pub omega: f64,
    /// Coupling amplitude g_k ≥ 0.
    pub g: f64,
}

/// Ordered finite set of environment modes sampled from a spectral density.
///
/// The couplings are normalized so that 2 Σ_k g_k² f(ω_k) is a midpoint
/// Riemann sum for ∫ J(ω) w(ω) f(ω) dω.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeSet {
    modes: Vec<Mode>,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        let mut prev = 0.0;
        for m in &modes {
            if !(m.omega > prev) {
                return Err(Error::Domain(format!(
                    "mode frequencies must be positive and strictly increasing, got {} after {}",
                    m.omega, prev
                )));
            }
            if !(m.g >= 0.0) {
                return Err(Error::Domain(format!("coupling must be >= 0, got {}", m.g)));
            }
            prev = m.omega;
        }
        Ok(Self { modes })
    }

    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Midpoint-rule discretization of J(ω)·w(ω) on (0, ω_max] into `n_modes`
/// oscillators: ω_k at bin midpoints, g_k² = J(ω_k) w(ω_k) Δω / 2.
pub fn discretize(
    sd: &SpectralDensity,
    partition: &EnvPartition,
    role: Role,
    n_modes: usize,
    omega_max: f64,
) -> Result<ModeSet> {
    if n_modes == 0 {
        return Err(Error::Domain("n_modes must be >= 1".into()));
    }
    if !(omega_max > 0.0) || !omega_max.is_finite() {
        return Err(Error::Domain(format!("omega_max must be > 0, got {omega_max}")));
    }
    discretize_fn(|w| sd.eval_raw(w) * partition.weight(role, w), n_modes, omega_max)
}

/// Default truncation frequency for discretization: the point where the
/// exponential envelope e^{-ω/Λ} drops below 10⁻¹⁶ relative.
pub fn default_omega_max(sd: &SpectralDensity) -> f64 {
    40.0 * sd.cutoff()
}

/// Midpoint binning of an arbitrary nonnegative density. Linear in the
/// density by construction.
pub(crate) fn discretize_fn(
    density: impl Fn(f64) -> f64,
    n_modes: usize,
    omega_max: f64,
) -> Result<ModeSet> {
    let dw = omega_max / n_modes as f64;
    let mut modes = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        let omega = (k as f64 + 0.5) * dw;
        let g2 = density(omega) * dw / 2.0;
        if g2 < 0.0 || !g2.is_finite() {
            return Err(Error::Domain(format!(
                "density produced invalid coupling weight {g2} at omega = {omega}"
            )));
        }
        modes.push(Mode { omega, g: g2.sqrt() });
    }
    ModeSet::new(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn spectral_density_examples() {
        let sd = SpectralDensity::new(1.0, 1.0).unwrap();
        assert_eq!(sd.evaluate(0.0).unwrap(), 0.0);

        let sd = SpectralDensity::new(2.0, 1.0).unwrap();
        assert_relative_eq!(sd.evaluate(1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-14);

        // ω^s Λ^{1-s} e^{-ω/Λ} = 2^4 · 2^{-3} · e^{-1}
        let sd = SpectralDensity::new(4.0, 2.0).unwrap();
        assert_relative_eq!(sd.evaluate(2.0).unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn spectral_density_rejects_bad_input() {
        assert!(SpectralDensity::new(0.0, 1.0).is_err());
        assert!(SpectralDensity::new(1.0, -1.0).is_err());
        let sd = SpectralDensity::new(1.0, 1.0).unwrap();
        assert!(sd.evaluate(-0.5).is_err());
    }

    #[test]
    fn weights_examples() {
        let p = EnvPartition::single_cut(3.0).unwrap();
        assert_eq!(p.observed_weight(2.0), 1.0);
        assert_eq!(p.unobserved_weight(2.0), 0.0);

        let w = EnvPartition::window(3.0, 5.0).unwrap();
        assert_eq!(w.observed_weight(6.0), 0.0);
        assert_eq!(w.unobserved_weight(6.0), 1.0);

        let u = EnvPartition::uncut();
        assert_eq!(u.observed_weight(7.3), 1.0);
        assert_eq!(u.unobserved_weight(7.3), 1.0);

        let s = EnvPartition::soft_window(3.0, 5.0, 0.05).unwrap();
        let interior = s.observed_weight(4.0);
        assert!(interior > 0.99 && interior <= 1.0);
    }

    #[test]
    fn weights_sum_to_one_except_uncut() {
        let parts = [
            EnvPartition::single_cut(2.0).unwrap(),
            EnvPartition::window(1.0, 4.0).unwrap(),
            EnvPartition::soft_window(1.0, 4.0, 0.2).unwrap(),
        ];
        for p in &parts {
            for &w in &[0.0, 0.5, 1.0, 2.5, 4.0, 10.0] {
                let total = p.observed_weight(w) + p.unobserved_weight(w);
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn soft_window_approaches_sharp_window() {
        let sharp = EnvPartition::window(2.0, 5.0).unwrap();
        for &omega in &[0.5, 1.9, 2.1, 3.5, 4.9, 5.1, 8.0] {
            let mut prev_err = f64::INFINITY;
            for &sigma in &[0.1, 0.01, 0.001] {
                let soft = EnvPartition::soft_window(2.0, 5.0, sigma).unwrap();
                let err = (soft.observed_weight(omega) - sharp.observed_weight(omega)).abs();
                assert!(err <= prev_err + 1e-15);
                prev_err = err;
            }
            assert!(prev_err < 1e-10, "sigma -> 0 limit failed at omega = {omega}");
        }
    }

    #[test]
    fn soft_single_cut_saturates_at_zero_frequency() {
        let p = EnvPartition::soft_window(0.0, 2.0, 0.05).unwrap();
        assert!(p.observed_weight(0.0) > 1.0 - 1e-12);
        assert!(p.unobserved_weight(0.0) < 1e-12);
    }

    #[test]
    fn discretize_single_mode_example() {
        // Midpoint of (0, 2] is ω = 1; g² = J(1) · 2 / 2 = e^{-1}.
        let sd = SpectralDensity::new(2.0, 1.0).unwrap();
        let ms = discretize(&sd, &EnvPartition::uncut(), Role::Unobserved, 1, 2.0).unwrap();
        assert_eq!(ms.len(), 1);
        assert_relative_eq!(ms.modes()[0].omega, 1.0, max_relative = 1e-15);
        assert_relative_eq!(ms.modes()[0].g.powi(2), (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn discretize_zero_weight_above_cut() {
        let sd = SpectralDensity::new(2.0, 1.0).unwrap();
        let p = EnvPartition::single_cut(1.0).unwrap();
        let ms = discretize(&sd, &p, Role::Observed, 8, 4.0).unwrap();
        for m in ms.modes() {
            if m.omega > 1.0 {
                assert_eq!(m.g, 0.0);
            } else {
                assert!(m.g > 0.0);
            }
        }
    }

    #[test]
    fn discretize_riemann_convergence() {
        // 2 Σ g_k² / ω_k² → ∫ J(ω)/ω² dω = ∫ e^{-ω} dω = 1 for s = 2, Λ = 1.
        let sd = SpectralDensity::new(2.0, 1.0).unwrap();
        let mut prev_err = f64::INFINITY;
        for &n in &[100usize, 1000, 10000] {
            let ms = discretize(&sd, &EnvPartition::uncut(), Role::Unobserved, n, 40.0).unwrap();
            let sum: f64 = ms.modes().iter().map(|m| 2.0 * m.g.powi(2) / m.omega.powi(2)).sum();
            let err = (sum - 1.0).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-6);
    }

    #[test]
    fn discretize_fn_linear_in_density() {
        let base = |w: f64| w * (-w).exp();
        let doubled = |w: f64| 2.0 * w * (-w).exp();
        let a = discretize_fn(base, 64, 10.0).unwrap();
        let b = discretize_fn(doubled, 64, 10.0).unwrap();
        for (ma, mb) in a.modes().iter().zip(b.modes()) {
            assert_relative_eq!(mb.g.powi(2), 2.0 * ma.g.powi(2), max_relative = 1e-14);
        }
    }

    #[test]
    fn mode_set_rejects_unsorted() {
        let modes = vec![Mode { omega: 2.0, g: 0.1 }, Mode { omega: 1.0, g: 0.1 }];
        assert!(ModeSet::new(modes).is_err());
    }
}
