//! Unitary evolution and quench diagnostics.

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, expm, kron, r, ComplexMatrix, ComplexVector, C64};
use crate::models::{ising_hamiltonian, IsingParams};
use crate::operators::{embed, pauli, HilbertSpace, Pauli};
pub use crate::series::{trapezoid, ColumnData, TimeGrid, TimeSeries};

/// Value reported by the rate functions when every overlap is exactly zero.
pub const RATE_CAP: f64 = 1e3;

const NORM_TOL: f64 = 1e-8;
const NORM_DRIFT_TOL: f64 = 1e-6;

/// Normalized pure state on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: ComplexVector,
    space: HilbertSpace,
}

impl StateVector {
    pub fn new(amplitudes: ComplexVector, space: HilbertSpace) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::Shape(format!(
                "state has {} amplitudes, space dimension is {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes, space })
    }

    /// Rescales `amplitudes` to unit norm first.
    pub fn normalized(amplitudes: ComplexVector, space: HilbertSpace) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm), space)
    }

    /// Computational basis state `index`.
    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut v = ComplexVector::zeros(dim);
        v[index] = r(1.0);
        Self::new(v, space)
    }

    /// Tensor product of identical single-site states.
    pub fn uniform_product(space: HilbertSpace, local: &[C64]) -> Result<Self> {
        let local = ComplexMatrix::from_column_major(local.len(), 1, local.to_vec())?;
        let mut prod = local.clone();
        for _ in 1..space.len() {
            prod = kron(&prod, &local)?;
        }
        Self::normalized(ComplexVector::from_column_slice(prod.as_slice()), space)
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        op.expectation(&self.amplitudes, &self.amplitudes)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }
}

/// Calls `visit(k, t_k, ψ_k)` for every grid point, starting at `t_start`.
///
/// The step propagator `exp(−iH dt)` is built once and reused, which is
/// exact only for a time-independent `H`.
pub fn propagate_with<F>(h: &ComplexMatrix, psi0: &StateVector, grid: &TimeGrid, mut visit: F) -> Result<Vec<String>>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    grid.validate()?;
    let n = h.require_square("Hamiltonian")?;
    if n != psi0.dim() {
        return Err(Error::Shape(format!(
            "Hamiltonian is {n}x{n} but the state has dimension {}",
            psi0.dim()
        )));
    }
    let deviation = h.hermiticity_deviation();
    if deviation > 1e-10 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let mut warnings = Vec::new();
    let spectral_radius = eig_hermitian(h)?
        .values
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()));
    if let Some(w) = grid.stability_warning(spectral_radius) {
        log::warn!("{w}");
        warnings.push(w);
    }

    let dt = grid.dt();
    let u = expm(h, c(0.0, -dt))?;
    let mut psi = psi0.clone();
    visit(0, grid.time(0), &psi)?;
    for k in 1..=grid.steps {
        psi.amplitudes = u.apply(&psi.amplitudes);
        let drift = (psi.amplitudes.norm() - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::Stability(format!(
                "norm drift {drift:.3e} at step {k} with dt = {dt:.6e}"
            )));
        }
        visit(k, grid.time(k), &psi)?;
    }
    Ok(warnings)
}

/// Records `⟨ψ(t)|O|ψ(t)⟩` for each named observable. Hermitian observables
/// produce real columns, others complex ones.
pub fn propagate(
    h: &ComplexMatrix,
    psi0: &StateVector,
    grid: &TimeGrid,
    observables: &[(&str, &ComplexMatrix)],
) -> Result<TimeSeries> {
    for (name, op) in observables {
        if op.rows() != psi0.dim() || !op.is_square() {
            return Err(Error::Shape(format!("observable '{name}' does not match the state dimension")));
        }
    }
    let hermitian: Vec<bool> = observables.iter().map(|(_, op)| op.is_hermitian(1e-12)).collect();
    let mut values: Vec<Vec<C64>> = vec![Vec::with_capacity(grid.steps + 1); observables.len()];
    let warnings = propagate_with(h, psi0, grid, |_, _, psi| {
        for ((_, op), out) in observables.iter().zip(values.iter_mut()) {
            out.push(psi.expectation(op));
        }
        Ok(())
    })?;
    let mut series = TimeSeries::new(grid.times());
    series.warnings = warnings;
    for (((name, _), vals), herm) in observables.iter().zip(values).zip(hermitian) {
        if herm {
            series.push_real(name, vals.iter().map(|z| z.re).collect())?;
        } else {
            series.push_complex(name, vals)?;
        }
    }
    Ok(series)
}

/// `(1/N) Σᵢ σᵢᵅ` on a chain of spins.
pub fn magnetization_operator(space: &HilbertSpace, axis: Pauli) -> Result<ComplexMatrix> {
    if !space.all_spins() {
        return Err(Error::Model("magnetization needs a pure spin chain".into()));
    }
    let n = space.len();
    let local = pauli(axis);
    let mut total = ComplexMatrix::zeros(space.total_dim(), space.total_dim());
    for i in 1..=n {
        total += &embed(space, i, &local)?;
    }
    Ok(total.scale_re(1.0 / n as f64))
}

fn capped(value: f64) -> f64 {
    if value.is_finite() {
        value.min(RATE_CAP)
    } else {
        RATE_CAP
    }
}

/// `Λ = min_η −ln(|⟨Ψ_η|ψ⟩|²)/N`, with [`RATE_CAP`] when both overlaps vanish.
pub fn ising_rate_function(ground_pair: (&StateVector, &StateVector), psi_t: &StateVector, n: usize) -> f64 {
    let p = ground_pair
        .0
        .overlap(psi_t)
        .norm_sqr()
        .max(ground_pair.1.overlap(psi_t).norm_sqr());
    if p == 0.0 {
        return RATE_CAP;
    }
    capped((-p.ln() / n as f64).max(0.0))
}

/// `Λ = −log₂(|⟨ψ₀|ψ⟩|²)/L`, with [`RATE_CAP`] when the overlap vanishes.
pub fn cavity_rate_function(psi0: &StateVector, psi_t: &StateVector, cavities: usize) -> f64 {
    let p = psi0.overlap(psi_t).norm_sqr();
    if p == 0.0 {
        return RATE_CAP;
    }
    capped((-p.log2() / cavities as f64).max(0.0))
}

/// `Σᵢ (⟨n̂ᵢ²⟩ − ⟨n̂ᵢ⟩²)`; each `n̂ᵢ` must be Hermitian.
pub fn number_variance(psi: &StateVector, number_ops: &[ComplexMatrix]) -> f64 {
    number_ops
        .iter()
        .map(|n| {
            let v = n.apply(psi.amplitudes());
            let mean = psi.amplitudes().dotc(&v).re;
            (v.norm_squared() - mean * mean).max(0.0)
        })
        .sum()
}

/// `(1/T) ∫ Σᵢ var(n̂ᵢ) dτ` by the trapezoid rule over uniformly spaced samples.
pub fn order_parameter_from_variance(dt: f64, variance: &[f64], t_window: f64) -> Result<f64> {
    if variance.len() < 2 {
        return Err(Error::Parameter("order parameter needs at least two samples".into()));
    }
    if !(t_window > 0.0) {
        return Err(Error::Parameter(format!("window length must be positive, got {t_window}")));
    }
    Ok(trapezoid(dt, variance) / t_window)
}

/// Order parameter from stored states spaced by `dt`.
pub fn order_parameter(states: &[StateVector], number_ops: &[ComplexMatrix], dt: f64, t_window: f64) -> Result<f64> {
    let variance: Vec<f64> = states.iter().map(|s| number_variance(s, number_ops)).collect();
    order_parameter_from_variance(dt, &variance, t_window)
}

/// `(⊗(|↑⟩+|↓⟩)/√2, ⊗(|↑⟩−|↓⟩)/√2)`, checked against the ground space of
/// the coupling term for `N ≤ 8`.
pub fn ising_ground_pair(n: usize, alpha: f64) -> Result<(StateVector, StateVector)> {
    let space = HilbertSpace::spins(n)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let right = StateVector::uniform_product(space.clone(), &[r(s), r(s)])?;
    let left = StateVector::uniform_product(space, &[r(s), r(-s)])?;
    if n <= 8 {
        let p = IsingParams { n, alpha, field: 0.0, normalize_j: true };
        let h1 = ising_hamiltonian(&p)?.coupling;
        let eig = eig_hermitian(&h1)?;
        let ground: Vec<ComplexVector> = (0..2).map(|k| eig.vectors.as_nalgebra().column(k).into()).collect();
        for state in [&right, &left] {
            let weight: f64 = ground.iter().map(|g| g.dotc(state.amplitudes()).norm_sqr()).sum();
            if weight < 1.0 - 1e-10 || (eig.values[1] - eig.values[0]).abs() > 1e-10 * eig.values[0].abs().max(1.0) {
                return Err(Error::Model(format!(
                    "product states are not the ground space of the coupling term (weight {weight})"
                )));
            }
        }
    }
    Ok((right, left))
}
