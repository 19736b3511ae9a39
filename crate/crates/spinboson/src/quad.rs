//! Adaptive Gauss-Kronrod quadrature for the oscillatory, exponentially
//! damped integrands of the indicator functions.
//!
//! The base rule is the 15-point Kronrod extension of 7-point Gauss (exact
//! through polynomial degree 13 for the embedded Gauss rule), refined by
//! global bisection of the worst panel. Semi-infinite ranges are covered by
//! geometrically growing blocks until the tail contribution falls below
//! tolerance. When an oscillation time scale `t` is supplied, panels are
//! pre-split at half-period boundaries π/t before adaptive refinement so the
//! rule never aliases the oscillation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
/// Entries 1, 3, 5 and the centre are the 7-point Gauss abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Weights of the embedded 7-point Gauss rule (paired with XGK[1,3,5] and
/// the centre point).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and refinement limits for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    /// Relative tolerance (> 0).
    pub rel_tol: f64,
    /// Absolute tolerance (>= 0).
    pub abs_tol: f64,
    /// Maximum bisection depth per panel (>= 1).
    pub max_depth: u32,
    /// Oscillation time scale: integrands carrying cos(ωt) or sin(ωt) set
    /// this to `t` so panels are pre-split below the half-period π/t.
    pub osc_frequency: Option<f64>,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_depth: 48,
            osc_frequency: None,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Domain(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::Domain(format!("abs_tol must be >= 0, got {}", self.abs_tol)));
        }
        if self.max_depth < 1 {
            return Err(Error::Domain("max_depth must be >= 1".into()));
        }
        if let Some(t) = self.osc_frequency {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Domain(format!("osc_frequency must be finite >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn with_oscillation(mut self, t: f64) -> Self {
        self.osc_frequency = Some(t);
        self
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evals: usize,
}

/// Oscillatory kernel multiplying a smooth envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscKernel {
    /// 1 - cos(ωt), evaluated as 2 sin²(ωt/2) to avoid cancellation.
    OneMinusCos,
    /// sin(ωt).
    Sin,
}

impl OscKernel {
    #[inline]
    pub fn eval(&self, omega: f64, t: f64) -> f64 {
        match self {
            OscKernel::OneMinusCos => {
                let s = (0.5 * omega * t).sin();
                2.0 * s * s
            }
            OscKernel::Sin => (omega * t).sin(),
        }
    }
}

/// Integrate `f` over [a, b]; `b` may be `f64::INFINITY`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(a >= 0.0) && !a.is_finite() {
        return Err(Error::Domain(format!("lower limit must be finite, got {a}")));
    }
    if b.is_nan() || b < a {
        return Err(Error::Domain(format!("invalid integration range [{a}, {b}]")));
    }
    if b == a {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evals: 0 });
    }
    if b.is_finite() {
        integrate_finite(&f, a, b, spec, spec.abs_tol)
    } else {
        integrate_to_infinity(&f, a, spec)
    }
}

/// Integrate envelope(ω)·kernel(ωt) over [a, b] with oscillation-aware panel
/// splitting; `b` may be infinite.
pub fn integrate_oscillatory<E>(
    envelope: E,
    kernel: OscKernel,
    t: f64,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<Quadrature>
where
    E: Fn(f64) -> f64,
{
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("oscillation time must be finite >= 0, got {t}")));
    }
    if t == 0.0 {
        // Both kernels vanish identically at t = 0.
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evals: 0 });
    }
    let spec = QuadSpec { osc_frequency: Some(t), ..*spec };
    integrate(move |w| envelope(w) * kernel.eval(w, t), a, b, &spec)
}

// ---------------------------------------------------------------------------
// internals
// ---------------------------------------------------------------------------

struct PanelResult {
    value: f64,
    error: f64,
}

/// 15-point Kronrod evaluation on [a, b] with the QUADPACK error heuristic.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<PanelResult> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        resk += WGK[j] * sum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * sum;
        }
    }

    if !resk.is_finite() {
        return Err(Error::Domain(format!(
            "integrand not finite on panel [{a}, {b}]"
        )));
    }

    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = resk * half;
    let resabs = resabs * half;
    let resasc = resasc * half;
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0f64.min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(PanelResult { value, error: err })
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
    seq: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.seq == other.seq
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap by error; sequence number breaks ties deterministically.
        self.error
            .total_cmp(&other.error)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Hard cap on pre-split panels; beyond this the splitting is clamped and
/// adaptive refinement takes over.
const MAX_INITIAL_PANELS: usize = 65_536;
const MAX_TOTAL_PANELS: usize = 2_000_000;

fn initial_edges(a: f64, b: f64, spec: &QuadSpec) -> Vec<f64> {
    let width = b - a;
    let n = match spec.osc_frequency {
        Some(t) if t > 0.0 => {
            let half_period = std::f64::consts::PI / t;
            ((width / half_period).ceil() as usize).clamp(1, MAX_INITIAL_PANELS)
        }
        _ => 1,
    };
    let mut edges = Vec::with_capacity(n + 1);
    for i in 0..=n {
        edges.push(a + width * (i as f64) / (n as f64));
    }
    edges
}

fn integrate_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
    abs_tol: f64,
) -> Result<Quadrature> {
    let edges = initial_edges(a, b, spec);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut evals = 0usize;
    let mut total_value = 0.0;
    let mut total_error = 0.0;

    for pair in edges.windows(2) {
        let r = kronrod15(f, pair[0], pair[1])?;
        evals += 15;
        total_value += r.value;
        total_error += r.error;
        heap.push(Panel { a: pair[0], b: pair[1], value: r.value, error: r.error, depth: 0, seq });
        seq += 1;
    }

    loop {
        let tol = abs_tol.max(spec.rel_tol * total_value.abs());
        if total_error <= tol {
            break;
        }
        let worst = heap.pop().expect("heap cannot be empty while error > 0");
        let width = worst.b - worst.a;
        let scale = worst.a.abs().max(worst.b.abs()).max(1.0);
        if worst.depth >= spec.max_depth
            || width <= 100.0 * f64::EPSILON * scale
            || heap.len() + 2 > MAX_TOTAL_PANELS
        {
            // The dominant panel cannot be refined further.
            return Err(Error::QuadratureNonConvergence {
                value: total_value,
                error: total_error,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod15(f, worst.a, mid)?;
        let right = kronrod15(f, mid, worst.b)?;
        evals += 30;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: left.value,
            error: left.error,
            depth: worst.depth + 1,
            seq,
        });
        seq += 1;
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: right.value,
            error: right.error,
            depth: worst.depth + 1,
            seq,
        });
        seq += 1;
    }

    // Re-sum panels in position order for a deterministic, drift-free total.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(Quadrature { value, error_estimate, evals })
}

/// Cover [a, ∞) with geometrically growing blocks; stop once two consecutive
/// blocks contribute negligibly to the running total.
fn integrate_to_infinity<F: Fn(f64) -> f64>(f: &F, a: f64, spec: &QuadSpec) -> Result<Quadrature> {
    const MAX_BLOCKS: usize = 64;
    let base_width = 1.0f64.max(0.5 * a.abs());

    let mut value = 0.0;
    let mut error = 0.0;
    let mut evals = 0usize;
    let mut lo = a;
    let mut width = base_width;
    let mut quiet_blocks = 0;

    for _ in 0..MAX_BLOCKS {
        let hi = lo + width;
        let block = integrate_finite(f, lo, hi, spec, spec.abs_tol / 8.0)?;
        value += block.value;
        error += block.error_estimate;
        evals += block.evals;

        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        if block.value.abs() + block.error_estimate <= 0.25 * tol {
            quiet_blocks += 1;
            if quiet_blocks >= 2 {
                return Ok(Quadrature { value, error_estimate: error, evals });
            }
        } else {
            quiet_blocks = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::QuadratureNonConvergence { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn default_spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn gauss_part_exact_for_degree_13() {
        // Single panel, no refinement possible: the embedded Gauss rule must
        // integrate x^k, k <= 13 exactly, so the error estimate collapses.
        for k in 0..=13u32 {
            let r = kronrod15(&|x: f64| x.powi(k as i32), 0.0, 1.0).unwrap();
            let exact = 1.0 / (k as f64 + 1.0);
            assert_relative_eq!(r.value, exact, max_relative = 1e-14);
            assert!(r.error < 1e-13, "degree {k} error {}", r.error);
        }
    }

    #[test]
    fn kronrod_part_exact_for_degree_22() {
        let r = kronrod15(&|x: f64| x.powi(20), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 1.0 / 21.0, max_relative = 1e-13);
        let r = kronrod15(&|x: f64| x.powi(22), -1.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 2.0 / 23.0, max_relative = 1e-13);
    }

    #[test]
    fn exponential_tail_to_infinity() {
        let r = integrate(|w| (-w).exp(), 0.0, f64::INFINITY, &default_spec()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_examples() {
        // ∫ e^{-ω}(1 - cos ωt) dω = 1 - 1/(1+t²)
        let spec = default_spec();
        let r =
            integrate_oscillatory(|w| (-w).exp(), OscKernel::OneMinusCos, 1.0, 0.0, f64::INFINITY, &spec)
                .unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-10);

        // ∫ e^{-ω} sin ω dω = 1/2
        let r = integrate_oscillatory(|w| (-w).exp(), OscKernel::Sin, 1.0, 0.0, f64::INFINITY, &spec)
            .unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-10);

        // ∫ ω² e^{-ω} sin ω dω = Γ(3) sin(3 arctan 1)/2^{3/2} = 1/2
        let r = integrate_oscillatory(
            |w| w * w * (-w).exp(),
            OscKernel::Sin,
            1.0,
            0.0,
            f64::INFINITY,
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn rapid_oscillation_resolved() {
        let t = 100.0;
        let r =
            integrate_oscillatory(|w| (-w).exp(), OscKernel::OneMinusCos, t, 0.0, f64::INFINITY, &default_spec())
                .unwrap();
        let exact = 1.0 - 1.0 / (1.0 + t * t);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-9);
    }

    #[test]
    fn zero_time_kernel_vanishes() {
        let r =
            integrate_oscillatory(|w| (-w).exp(), OscKernel::OneMinusCos, 0.0, 0.0, f64::INFINITY, &default_spec())
                .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn additivity_over_subranges() {
        let spec = default_spec();
        let f = |w: f64| (1.0 + w).recip() * (-0.3 * w).exp();
        let whole = integrate(f, 0.0, 10.0, &spec).unwrap();
        let left = integrate(f, 0.0, 3.7, &spec).unwrap();
        let right = integrate(f, 3.7, 10.0, &spec).unwrap();
        assert_abs_diff_eq!(whole.value, left.value + right.value, epsilon = 1e-10);
    }

    #[test]
    fn scaling_by_constant() {
        let spec = default_spec();
        let f = |w: f64| (-w).exp() * (3.0 * w).cos();
        let one = integrate(f, 0.0, 20.0, &spec).unwrap();
        let scaled = integrate(|w| 7.5 * f(w), 0.0, 20.0, &spec).unwrap();
        assert_relative_eq!(scaled.value, 7.5 * one.value, max_relative = 1e-10);
    }

    #[test]
    fn truncation_point_invariance() {
        let spec = default_spec();
        let infinite = integrate(|w| (-w).exp(), 0.0, f64::INFINITY, &spec).unwrap();
        let truncated = integrate(|w| (-w).exp(), 0.0, 200.0, &spec).unwrap();
        assert_abs_diff_eq!(infinite.value, truncated.value, epsilon = 1e-11);
    }

    #[test]
    fn non_convergence_reports_partial_value() {
        let spec = QuadSpec { max_depth: 3, rel_tol: 1e-14, abs_tol: 1e-16, osc_frequency: None };
        let nasty = |w: f64| (w - 0.337).abs().sqrt().recip().min(1e12);
        match integrate(nasty, 0.0, 1.0, &spec) {
            Err(Error::QuadratureNonConvergence { value, error }) => {
                assert!(value.is_finite());
                assert!(error > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_spec() {
        let bad = QuadSpec { rel_tol: 0.0, ..QuadSpec::default() };
        assert!(integrate(|w| w, 0.0, 1.0, &bad).is_err());
    }
}
