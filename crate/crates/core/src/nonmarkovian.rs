//! Pure dephasing of a two-level system in a bosonic bath.
//!
//! The reduced dynamics is `ρ̇ = (γ(t)/2)(σ_z ρ σ_z − ρ)` with
//! `γ(t) = ∫₀^∞ (J(ω)/ω) coth(ω/2T) sin(ωt) dω` (units with ħ = k_B = 1).
//! Only the coherence evolves: `ρ̇_eg = −γ(t) ρ_eg`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{r, ComplexMatrix, C64};
use crate::markovian::DensityMatrix;
use crate::series::{TimeGrid, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `α ω_c^{1−s} ω^s e^{−ω/ω_c}`
    SuperOhmicExp { alpha: f64, s: f64, omega_c: f64 },
    /// `J₀ ω^s / (ω/ω₀ + 1)² · (Γ/2) / ((ω − ω₀)² + (Γ/2)²)`
    LorentzianLocalized { j0: f64, s: f64, omega0: f64, gamma_width: f64 },
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        let params: &[(&str, f64)] = match self {
            Self::SuperOhmicExp { alpha, s, omega_c } => &[("alpha", *alpha), ("s", *s), ("omega_c", *omega_c)],
            Self::LorentzianLocalized { j0, s, omega0, gamma_width } => {
                &[("J0", *j0), ("s", *s), ("omega0", *omega0), ("Gamma", *gamma_width)]
            }
        };
        for (name, v) in params {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Self::SuperOhmicExp { s, .. } | Self::LorentzianLocalized { s, .. } => s,
        }
    }

    /// Frequency scale of the sharpest feature, used to size quadrature panels.
    pub fn feature_scale(&self) -> f64 {
        match *self {
            Self::SuperOhmicExp { omega_c, .. } => omega_c,
            Self::LorentzianLocalized { omega0, gamma_width, .. } => omega0.min(gamma_width),
        }
    }

    /// Frequency where `J(ω)/ω` is largest, roughly.
    fn peak_hint(&self) -> f64 {
        match *self {
            Self::SuperOhmicExp { s, omega_c, .. } => ((s - 1.0).max(0.1)) * omega_c,
            Self::LorentzianLocalized { omega0, .. } => omega0,
        }
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Parameter(format!("spectral density needs omega >= 0, got {omega}")));
        }
        Ok(self.eval_unchecked(omega))
    }

    fn eval_unchecked(&self, w: f64) -> f64 {
        match *self {
            Self::SuperOhmicExp { alpha, s, omega_c } => alpha * omega_c.powf(1.0 - s) * w.powf(s) * (-w / omega_c).exp(),
            Self::LorentzianLocalized { j0, s, omega0, gamma_width } => {
                let half = gamma_width / 2.0;
                j0 * w.powf(s) / (w / omega0 + 1.0).powi(2) * half / ((w - omega0).powi(2) + half * half)
            }
        }
    }
}

/// Default quadrature points per oscillation period of `sin(ωt)`.
pub const DEFAULT_POINTS_PER_PERIOD: usize = 16;
const ENVELOPE_CUTOFF: f64 = 1e-10;
const QUAD_REL_TOL: f64 = 1e-9;
const QUAD_FAIL_TOL: f64 = 1e-6;
const MAX_REFINEMENTS: usize = 16;

/// Bath: spectral density, temperature and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub sdf: SpectralDensity,
    pub temperature: f64,
    /// Upper quadrature limit; chosen automatically by [`BathParams::new`].
    pub omega_max: f64,
    pub points_per_period: usize,
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

impl BathParams {
    pub fn new(sdf: SpectralDensity, temperature: f64) -> Result<Self> {
        Self::with_settings(sdf, temperature, None, DEFAULT_POINTS_PER_PERIOD)
    }

    pub fn with_settings(
        sdf: SpectralDensity,
        temperature: f64,
        omega_max: Option<f64>,
        points_per_period: usize,
    ) -> Result<Self> {
        sdf.validate()?;
        if sdf.exponent() < 1.0 {
            return Err(Error::Parameter(format!(
                "the rate integrand is singular at omega = 0 for s < 1 (s = {})",
                sdf.exponent()
            )));
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Parameter(format!("temperature must be positive, got {temperature}")));
        }
        if points_per_period < 8 {
            return Err(Error::Parameter(format!(
                "need at least 8 quadrature points per period, got {points_per_period}"
            )));
        }
        let mut bath = Self { sdf, temperature, omega_max: f64::INFINITY, points_per_period };
        let (peak, auto_max) = bath.envelope_extent();
        bath.omega_max = match omega_max {
            None => auto_max,
            Some(w) => {
                if !(w > 0.0) || bath.envelope(w) > ENVELOPE_CUTOFF * peak {
                    return Err(Error::Parameter(format!(
                        "omega_max = {w} truncates the integrand above {ENVELOPE_CUTOFF:e} of its peak"
                    )));
                }
                w
            }
        };
        Ok(bath)
    }

    /// `(J(ω)/ω) coth(ω/2T)`, with the series `coth x ≈ 1/x + x/3` at small `ω`.
    pub fn envelope(&self, w: f64) -> f64 {
        let t = self.temperature;
        let jw = self.sdf.eval_unchecked(w) / w;
        let x = w / (2.0 * t);
        let c = if w < 1e-3 * t { 1.0 / x + x / 3.0 } else { coth(x) };
        jw * c
    }

    /// Peak of the envelope and the frequency beyond which it stays below the cutoff.
    fn envelope_extent(&self) -> (f64, f64) {
        // Log-spaced scan over many decades around the spectral features.
        let lo = (self.temperature.min(self.sdf.feature_scale()) * 1e-4).ln();
        let hi = (self.sdf.peak_hint().max(self.temperature) * 1e8).ln();
        let n = 4000;
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let w = (lo + (hi - lo) * k as f64 / n as f64).exp();
                (w, self.envelope(w))
            })
            .collect();
        let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        let last_above = samples
            .iter()
            .rposition(|s| s.1 >= ENVELOPE_CUTOFF * peak)
            .unwrap_or(0);
        let omega_max = samples[(last_above + 1).min(n)].0;
        (peak, omega_max)
    }

    fn integrand(&self, w: f64, t: f64) -> f64 {
        // The ω → 0 limit is finite for s >= 1; evaluate just above zero.
        let w = if w == 0.0 { 1e-9 * self.temperature.min(self.sdf.feature_scale()) } else { w };
        self.envelope(w) * (w * t).sin()
    }
}

/// Composite Simpson on one interval, refined by halving the step.
struct Segment {
    a: f64,
    n: usize,
    h: f64,
    trap: f64,
    abs_sum: f64,
    simpson: f64,
    disagreement: f64,
    refinements: usize,
}

impl Segment {
    fn new(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> Self {
        let n = panels.max(2);
        let h = (b - a) / n as f64;
        let values: Vec<f64> = (0..=n).map(|k| f(a + k as f64 * h)).collect();
        let ends = 0.5 * (values[0] + values[n]);
        let inner: f64 = values[1..n].iter().sum();
        let abs_sum = values.iter().map(|x| x.abs()).sum::<f64>();
        let mut seg = Self {
            a,
            n,
            h,
            trap: h * (ends + inner),
            abs_sum,
            simpson: f64::NAN,
            disagreement: f64::INFINITY,
            refinements: 0,
        };
        seg.refine(f);
        seg.refine(f);
        seg
    }

    fn refine(&mut self, f: &dyn Fn(f64) -> f64) {
        let (a, h) = (self.a, self.h);
        let mids: Vec<f64> = (0..self.n).map(|k| f(a + (k as f64 + 0.5) * h)).collect();
        self.abs_sum += mids.iter().map(|x| x.abs()).sum::<f64>();
        let trap_next = 0.5 * self.trap + 0.5 * h * mids.iter().sum::<f64>();
        let simpson = (4.0 * trap_next - self.trap) / 3.0;
        self.disagreement = (simpson - self.simpson).abs();
        self.simpson = simpson;
        self.trap = trap_next;
        self.n *= 2;
        self.h *= 0.5;
        self.refinements += 1;
    }

    fn mass(&self) -> f64 {
        self.abs_sum * self.h
    }
}

/// `γ(t)` by composite Simpson quadrature on `[0, ω_max]` with at least
/// `points_per_period` samples per period of `sin(ωt)`.
///
/// The range is cut into a thermal segment near zero and geometrically
/// growing segments above it; the segment with the largest refinement
/// disagreement is halved until the total falls below a fraction of `∫|f|`.
pub fn dephasing_rate(bath: &BathParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("rate needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let feature = bath.sdf.feature_scale();
    let oscillation = 2.0 * std::f64::consts::PI / (t * bath.points_per_period as f64);
    let split = (50.0 * bath.temperature).min(feature).min(bath.omega_max);
    let f = |w: f64| bath.integrand(w, t);

    let mut bounds = vec![0.0, split];
    while *bounds.last().expect("non-empty") < bath.omega_max {
        let next = (2.0 * bounds.last().expect("non-empty")).min(bath.omega_max);
        bounds.push(next);
    }
    let peak = bath.sdf.peak_hint();
    let mut segments: Vec<Segment> = bounds
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            // Away from the peak the density varies on the scale of the distance to it.
            let distance = if peak < w[0] { w[0] - peak } else { (peak - w[1]).max(0.0) };
            let local = feature.max(distance) / 8.0;
            let step = if k == 0 { oscillation.min(local).min(split / 64.0) } else { oscillation.min(local) };
            // Two halvings happen on construction.
            Segment::new(&f, w[0], w[1], ((w[1] - w[0]) / step / 4.0).ceil() as usize)
        })
        .collect();

    let mass: f64 = segments.iter().map(Segment::mass).sum::<f64>().max(f64::MIN_POSITIVE);
    let target = QUAD_REL_TOL * mass;
    loop {
        let total_disagreement: f64 = segments.iter().map(|s| s.disagreement).sum();
        if total_disagreement <= target {
            break;
        }
        let worst = segments
            .iter_mut()
            .filter(|s| s.refinements < MAX_REFINEMENTS)
            .max_by(|x, y| x.disagreement.total_cmp(&y.disagreement));
        match worst {
            Some(seg) => seg.refine(&f),
            None => break,
        }
    }
    // Relative to ∫|integrand|: γ itself passes through zero.
    let disagreement: f64 = segments.iter().map(|s| s.disagreement).sum();
    if disagreement > QUAD_FAIL_TOL * mass {
        return Err(Error::Quadrature { t, disagreement: disagreement / mass });
    }
    Ok(segments.iter().map(|s| s.simpson).sum())
}

/// `γ(t)` at every time, evaluated in parallel; output order matches `times`.
pub fn rate_table(bath: &BathParams, times: &[f64]) -> Result<Vec<f64>> {
    times.par_iter().map(|&t| dephasing_rate(bath, t)).collect()
}

/// Lanczos approximation (g = 7, 9 terms) with reflection for `x < ½`.
pub fn gamma_fn(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma_fn(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Zero-temperature closed form for the super-Ohmic bath:
/// `α ω_c Γ(s) sin(s·atan(ω_c t)) / (1 + (ω_c t)²)^{s/2}`.
pub fn gamma_analytic_low_t(sdf: &SpectralDensity, t: f64) -> Result<f64> {
    match *sdf {
        SpectralDensity::SuperOhmicExp { alpha, s, omega_c } => {
            let x = omega_c * t;
            Ok(alpha * omega_c * gamma_fn(s) * (s * x.atan()).sin() / (1.0 + x * x).powf(s / 2.0))
        }
        _ => Err(Error::Parameter("closed-form rate exists only for the super-Ohmic density".into())),
    }
}

/// `Σ_{i≠j} |ρ_ij|`.
pub fn coherence(rho: &ComplexMatrix) -> f64 {
    let n = rho.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| rho[(i, j)].norm())
        .sum()
}

/// Running `½ ∫₀ᵗ (|γ| − γ) dτ` by the trapezoid rule on uniform samples.
pub fn nm_measure(gamma: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(gamma.len());
    let mut acc = 0.0;
    let neg = |g: f64| (-g).max(0.0);
    for (k, &g) in gamma.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (neg(gamma[k - 1]) + neg(g));
        }
        out.push(acc);
    }
    out
}

/// Integrates `ρ̇_eg = −γ(t) ρ_eg` with a two-step Adams–Bashforth–Moulton
/// predictor-corrector (one RK4 step to start). Columns: `gamma`, `rho_eg`
/// (complex), `coherence`, `nm_measure`.
pub fn evolve_dephasing(bath: &BathParams, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<TimeSeries> {
    grid.validate()?;
    if rho0.dim() != 2 {
        return Err(Error::Shape(format!("dephasing needs a 2x2 state, got {}x{}", rho0.dim(), rho0.dim())));
    }
    let times = grid.times();
    let dt = grid.dt();
    let gamma = rate_table(bath, &times)?;
    let gamma_half = dephasing_rate(bath, grid.t_start + 0.5 * dt)?;
    evolve_with_rates(&gamma, gamma_half, rho0, grid)
}

/// Same integrator as [`evolve_dephasing`] with precomputed rates on the grid
/// plus the rate at the first half step.
pub fn evolve_with_rates(gamma: &[f64], gamma_half: f64, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<TimeSeries> {
    let times = grid.times();
    if gamma.len() != times.len() {
        return Err(Error::Shape(format!("{} rates for {} grid points", gamma.len(), times.len())));
    }
    let dt = grid.dt();
    let gmax = gamma.iter().fold(gamma_half.abs(), |m, g| m.max(g.abs()));
    let mut series = TimeSeries::new(times);
    let stiffness = dt * gmax;
    if stiffness > 1.0 {
        return Err(Error::Stability(format!("dt * max|gamma| = {stiffness:.3e} exceeds 1 (dt = {dt:e})")));
    }
    if stiffness > 0.1 {
        series.warn(format!("dt * max|gamma| = {stiffness:.3e} exceeds 0.1; accuracy may suffer"));
    }

    let m = rho0.matrix();
    let mut y: Vec<C64> = Vec::with_capacity(gamma.len());
    y.push(m[(0, 1)]);
    let f = |g: f64, v: C64| v * (-g);
    if gamma.len() > 1 {
        let h = dt;
        let y0 = y[0];
        let k1 = f(gamma[0], y0);
        let k2 = f(gamma_half, y0 + k1 * (h / 2.0));
        let k3 = f(gamma_half, y0 + k2 * (h / 2.0));
        let k4 = f(gamma[1], y0 + k3 * h);
        y.push(y0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0));
    }
    for n in 1..gamma.len().saturating_sub(1) {
        let fn_ = f(gamma[n], y[n]);
        let fprev = f(gamma[n - 1], y[n - 1]);
        let predicted = y[n] + (fn_ * 3.0 - fprev) * (dt / 2.0);
        let corrected = y[n] + (f(gamma[n + 1], predicted) + fn_) * (dt / 2.0);
        y.push(corrected);
    }

    // Populations are untouched by pure dephasing; check the reconstructed states anyway.
    for (k, &eg) in y.iter().enumerate() {
        let rho = ComplexMatrix::from_rows(&[vec![m[(0, 0)], eg], vec![eg.conj(), m[(1, 1)]]])?;
        if (rho.trace() - r(1.0)).norm() > 1e-8 || rho.hermiticity_deviation() > 1e-8 {
            return Err(Error::Stability(format!("state invariants violated at sample {k}")));
        }
    }
    let coh: Vec<f64> = y.iter().map(|z| 2.0 * z.norm()).collect();
    let nm = nm_measure(gamma, dt);
    series.push_real("gamma", gamma.to_vec())?;
    series.push_complex("rho_eg", y)?;
    series.push_real("coherence", coh)?;
    series.push_real("nm_measure", nm)?;
    Ok(series)
}

/// `(|e⟩ + |g⟩)/√2` as a density matrix.
pub fn plus_state() -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::from_rows(&[vec![r(0.5), r(0.5)], vec![r(0.5), r(0.5)]]).expect("2x2"))
        .expect("valid state")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j1() -> SpectralDensity {
        SpectralDensity::SuperOhmicExp { alpha: 0.5, s: 2.5, omega_c: 0.1 }
    }

    fn j2() -> SpectralDensity {
        SpectralDensity::LorentzianLocalized { j0: 0.2, s: 2.5, omega0: 2.0, gamma_width: 0.1 }
    }

    const T_REF: f64 = 2e-3;

    /// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        (1..=n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    /// `∫₀^W f` by 32-point Gauss-Legendre on `panels` equal panels.
    fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let nodes = gauss_legendre(32);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                nodes.iter().map(|(x, w)| w * f(lo + 0.5 * h * (x + 1.0))).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn spectral_density_shapes() {
        assert_eq!(j1().eval(0.0).unwrap(), 0.0);
        assert!(j1().eval(-1.0).is_err());
        let grid: Vec<f64> = (1..4000).map(|k| k as f64 * 1e-3).collect();
        let peak = |sdf: SpectralDensity| {
            grid.iter().copied().max_by(|a, b| sdf.eval(*a).unwrap().total_cmp(&sdf.eval(*b).unwrap())).unwrap()
        };
        assert!((peak(j1()) - 0.25).abs() < 2e-3);
        assert!((peak(j2()) - 2.0).abs() < 0.01);
        // Half maximum width of the localized peak is close to Γ.
        let top = j2().eval(peak(j2())).unwrap();
        let above: Vec<f64> = grid.iter().copied().filter(|&w| j2().eval(w).unwrap() > top / 2.0).collect();
        let width = above.last().unwrap() - above.first().unwrap();
        assert!((width - 0.1).abs() < 0.01, "width {width}");
        assert!(SpectralDensity::SuperOhmicExp { alpha: 0.0, s: 2.5, omega_c: 0.1 }.validate().is_err());
    }

    #[test]
    fn lanczos_gamma_values() {
        let pi = std::f64::consts::PI;
        assert!((gamma_fn(2.5) / (0.75 * pi.sqrt()) - 1.0).abs() < 1e-13);
        assert!((gamma_fn(2.5) - 1.329_340_388_179_137).abs() < 1e-13);
        assert!((gamma_fn(0.5) / pi.sqrt() - 1.0).abs() < 1e-13);
        let mut fact = 1.0;
        for n in 1..15 {
            assert!((gamma_fn(n as f64) / fact - 1.0).abs() < 1e-12, "n={n}");
            fact *= n as f64;
        }
    }

    #[test]
    fn analytic_rate_properties() {
        assert_eq!(gamma_analytic_low_t(&j1(), 0.0).unwrap(), 0.0);
        assert!(gamma_analytic_low_t(&j2(), 1.0).is_err());
        let t_crit = (std::f64::consts::PI / 2.5).tan() / 0.1;
        assert!((t_crit - 30.77).abs() < 0.01);
        assert!(gamma_analytic_low_t(&j1(), t_crit - 0.1).unwrap() > 0.0);
        assert!(gamma_analytic_low_t(&j1(), t_crit + 0.1).unwrap() < 0.0);
        assert!(gamma_analytic_low_t(&j1(), 1e4).unwrap() < 0.0);
    }

    #[test]
    fn bath_construction() {
        let b = BathParams::new(j2(), T_REF).unwrap();
        assert!(b.omega_max > 1000.0 && b.omega_max < 3000.0, "{}", b.omega_max);
        let b1 = BathParams::new(j1(), T_REF).unwrap();
        assert!(b1.omega_max > 2.0 && b1.omega_max < 6.0, "{}", b1.omega_max);
        assert!(BathParams::with_settings(j2(), T_REF, Some(50.0), 16).is_err());
        assert!(BathParams::with_settings(j2(), T_REF, None, 4).is_err());
        let sub = SpectralDensity::SuperOhmicExp { alpha: 0.5, s: 0.5, omega_c: 0.1 };
        assert!(BathParams::new(sub, T_REF).is_err());
        assert!(BathParams::new(j1(), 0.0).is_err());
    }

    #[test]
    fn rate_matches_low_temperature_closed_form() {
        let bath = BathParams::new(j1(), T_REF).unwrap();
        let scale = 0.5 * 0.1 * gamma_fn(2.5);
        for t in [0.0, 0.5, 5.0, 20.0, 30.0, 45.0, 60.0] {
            let num = dephasing_rate(&bath, t).unwrap();
            let ana = gamma_analytic_low_t(&j1(), t).unwrap();
            assert!((num - ana).abs() < 1e-3 * scale, "t={t}: {num} vs {ana}");
        }
    }

    #[test]
    fn rate_agrees_with_independent_quadrature() {
        for sdf in [j1(), j2()] {
            let bath = BathParams::new(sdf, 0.05).unwrap();
            for t in [0.7, 3.3, 12.0] {
                let env = |w: f64| sdf.eval(w).unwrap() / w / (w / 0.1).tanh() * (w * t).sin();
                let panels = (bath.omega_max * t).ceil() as usize * 4 + 200;
                let oracle = gl_integrate(env, 1e-12, bath.omega_max, panels);
                let got = dephasing_rate(&bath, t).unwrap();
                assert!((got - oracle).abs() < 1e-8 * oracle.abs().max(1e-3), "t={t}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn doubling_quadrature_density_is_stable() {
        for sdf in [j1(), j2()] {
            let a = BathParams::with_settings(sdf, T_REF, None, 16).unwrap();
            let b = BathParams::with_settings(sdf, T_REF, None, 32).unwrap();
            for t in [1.0, 10.0, 31.0, 59.0] {
                let (x, y) = (dephasing_rate(&a, t).unwrap(), dephasing_rate(&b, t).unwrap());
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-6), "t={t}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn coherence_and_measure_basics() {
        assert_eq!(coherence(plus_state().matrix()), 1.0);
        assert_eq!(coherence(&ComplexMatrix::diagonal(&[r(0.3), r(0.7)])), 0.0);
        assert!(nm_measure(&[0.0, 1.0, 2.0, 0.5], 0.1).iter().all(|&x| x == 0.0));
        let nm = nm_measure(&[0.0, -1.0, -1.0, 1.0], 1.0);
        assert_eq!(nm, vec![0.0, 0.5, 1.5, 2.0]);
    }

    /// Exact `−ln(ρ_eg(t)/ρ_eg(0)) = ∫₀ᵗ γ = ∫ (J/ω²) coth(ω/2T) (1 − cos ωt) dω`.
    fn exact_decay_exponent(bath: &BathParams, t: f64) -> f64 {
        let f = |w: f64| bath.envelope(w) / w * (1.0 - (w * t).cos());
        let panels = ((bath.omega_max * t) as usize + 50) * 2;
        let split = 0.1 * bath.temperature;
        gl_integrate(f, 0.0, split, 20) + gl_integrate(f, split, bath.omega_max, panels)
    }

    fn max_error(bath: &BathParams, grid: &TimeGrid) -> f64 {
        let s = evolve_dephasing(bath, &plus_state(), grid).unwrap();
        let eg = s.complex("rho_eg").unwrap();
        let samples = [grid.steps / 4, grid.steps / 2, grid.steps];
        samples
            .iter()
            .map(|&k| {
                let exact = 0.5 * (-exact_decay_exponent(bath, s.times[k])).exp();
                (eg[k] - r(exact)).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn integrator_matches_closed_form_and_is_second_order() {
        let bath = BathParams::new(j1(), T_REF).unwrap();
        let coarse = max_error(&bath, &TimeGrid::new(0.0, 60.0, 1200).unwrap());
        let fine = max_error(&bath, &TimeGrid::new(0.0, 60.0, 2400).unwrap());
        assert!(fine < 1e-6, "error {fine}");
        assert!(coarse / fine > 3.9, "ratio {}", coarse / fine);
    }

    #[test]
    fn populations_constant_and_warnings() {
        let bath = BathParams::new(j2(), T_REF).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 200).unwrap();
        let s = evolve_dephasing(&bath, &plus_state(), &grid).unwrap();
        assert!(s.warnings.is_empty());
        let coh = s.complex("rho_eg").unwrap();
        assert!((coh[0] - r(0.5)).norm() == 0.0);
        let big = evolve_with_rates(&[0.0, 50.0, 50.0], 50.0, &plus_state(), &TimeGrid::new(0.0, 1.0, 2).unwrap());
        assert!(matches!(big, Err(Error::Stability(_))));
        let warn = evolve_with_rates(&[0.0, 0.5, 0.5], 0.5, &plus_state(), &TimeGrid::new(0.0, 1.0, 2).unwrap()).unwrap();
        assert_eq!(warn.warnings.len(), 1);
    }
}
