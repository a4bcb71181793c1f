//! Lindblad dynamics through the spectral decomposition of the Liouvillian.
//!
//! Density matrices are vectorized by stacking columns, so
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::closed::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{
    c, devectorize, eig_general, eig_hermitian, kron, r, vectorize, ComplexMatrix, ComplexVector, MatrixJson, C64,
};
use crate::models::LindbladChannel;
use crate::series::{TimeGrid, TimeSeries};

/// Default eigenvalue matching tolerance.
pub const DEFAULT_TOL: f64 = 1e-4;

const STATE_TOL: f64 = 1e-8;
const BIORTHO_TOL: f64 = 1e-6;
const TRACE_DRIFT_TOL: f64 = 1e-6;
/// Weight below which a mode is treated as absent from a given initial state.
pub const WEIGHT_CUTOFF: f64 = 1e-10;

/// Unit-trace, Hermitian, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

/// Per-sample sanity measures of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn of(m: &ComplexMatrix) -> Result<Self> {
        let herm = (m + &m.adjoint()).scale_re(0.5);
        Ok(Self {
            trace_deviation: (m.trace() - r(1.0)).norm(),
            hermiticity_deviation: m.hermiticity_deviation(),
            min_eigenvalue: eig_hermitian(&herm)?.values[0],
        })
    }

    pub fn within(&self, tol: f64) -> bool {
        self.trace_deviation < tol && self.hermiticity_deviation < tol && self.min_eigenvalue >= -tol
    }
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_square("a density matrix")?;
        let d = StateDiagnostics::of(&matrix)?;
        if !d.within(STATE_TOL) {
            return Err(Error::InvalidState(format!(
                "not a density matrix: |tr-1| = {:.3e}, hermiticity {:.3e}, min eigenvalue {:.3e}",
                d.trace_deviation, d.hermiticity_deviation, d.min_eigenvalue
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self { matrix: psi.projector() }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `Tr(Oρ)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let n = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += op[(i, j)] * self.matrix[(j, i)];
            }
        }
        s
    }
}

fn check_channels(dim: usize, channels: &[LindbladChannel]) -> Result<()> {
    for (k, ch) in channels.iter().enumerate() {
        if ch.operator.rows() != dim || ch.operator.cols() != dim {
            return Err(Error::Shape(format!(
                "channel {k} is {}x{}, system dimension is {dim}",
                ch.operator.rows(),
                ch.operator.cols()
            )));
        }
        if !(ch.rate >= 0.0) {
            return Err(Error::Parameter(format!("channel {k} has negative rate {}", ch.rate)));
        }
    }
    Ok(())
}

/// Liouvillian superoperator acting on column-stacked density matrices.
pub fn build_liouvillian(h: &ComplexMatrix, channels: &[LindbladChannel]) -> Result<ComplexMatrix> {
    let d = h.require_square("Hamiltonian")?;
    check_channels(d, channels)?;
    let id = ComplexMatrix::identity(d);
    let mut l = (&kron(&id, h)? - &kron(&h.transpose(), &id)?).scale(c(0.0, -1.0));
    for ch in channels {
        if ch.rate == 0.0 {
            continue;
        }
        let op = &ch.operator;
        let ldl = &op.adjoint() * op;
        let jump = kron(&op.conj(), op)?;
        let left = kron(&id, &ldl)?;
        let right = kron(&ldl.transpose(), &id)?;
        let diss = &jump - &(&left + &right).scale_re(0.5);
        l += &diss.scale_re(ch.rate);
    }
    Ok(l)
}

/// `−i[H,ρ] + Σ γ(LρL† − ½{L†L, ρ})` evaluated directly.
pub fn lindblad_rhs(h: &ComplexMatrix, channels: &[LindbladChannel], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = h.commutator(rho).scale(c(0.0, -1.0));
    for ch in channels {
        let op = &ch.operator;
        let ldl = &op.adjoint() * op;
        let jump = &(op * rho) * &op.adjoint();
        out += &(&jump - &ldl.anticommutator(rho).scale_re(0.5)).scale_re(ch.rate);
    }
    out
}

/// Eigenvalue with matched right and left eigenmatrices, `Tr(L R) = 1`.
#[derive(Debug, Clone)]
pub struct SpectralEntry {
    pub lambda: C64,
    pub right: ComplexMatrix,
    pub left: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct LiouvillianSpectrum {
    pub entries: Vec<SpectralEntry>,
    pub tol: f64,
    /// Hilbert-space dimension `d` (the Liouvillian is `d² x d²`).
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntryJson {
    pub lambda_re: f64,
    pub lambda_im: f64,
    #[serde(rename = "R")]
    pub right: MatrixJson,
    #[serde(rename = "L")]
    pub left: MatrixJson,
}

fn cluster_ranges(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    // Connected components of the "within tol" relation.
    let n = values.len();
    let mut seen = vec![false; n];
    let mut clusters = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut k = 0;
        while k < members.len() {
            let cur = values[members[k]];
            for j in 0..n {
                if !seen[j] && (values[j] - cur).norm() < tol {
                    seen[j] = true;
                    members.push(j);
                }
            }
            k += 1;
        }
        clusters.push(members);
    }
    clusters
}

/// Zero modes (`|λ| <= tol`) first, then descending real part with real parts
/// within `tol` treated as equal, ties broken by descending imaginary part.
fn spectral_order(values: &[C64], tol: f64) -> Vec<usize> {
    let (mut order, rest): (Vec<usize>, Vec<usize>) = (0..values.len()).partition(|&k| values[k].norm() <= tol);
    order.sort_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()));
    let zeros = order.len();
    let mut rest = rest;
    rest.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
    order.extend(rest);
    let mut out = order[..zeros].to_vec();
    let mut k = zeros;
    while k < order.len() {
        let mut end = k + 1;
        while end < order.len() && values[order[end - 1]].re - values[order[end]].re <= tol {
            end += 1;
        }
        let mut group = order[k..end].to_vec();
        group.sort_by(|&a, &b| values[b].im.total_cmp(&values[a].im));
        out.extend(group);
        k = end;
    }
    out
}

/// Right and left eigenmatrices of a Liouvillian, biorthonormalized.
///
/// Left eigenvectors come from `𝕃†`; a left eigenvector `w` defines the
/// functional `σ ↦ w† vec(σ) = Tr(L σ)` with `L = devec(w)†`. Eigenvalues of
/// `𝕃` and conjugated eigenvalues of `𝕃†` are grouped into clusters closer
/// than `tol`; inside each cluster the left vectors are recombined so that
/// `W† R = 1`, which reduces to scalar normalization for simple eigenvalues.
pub fn decompose(liouvillian: &ComplexMatrix, tol: f64) -> Result<LiouvillianSpectrum> {
    let n = liouvillian.require_square("Liouvillian")?;
    let dim = crate::linalg::square_side(n)
        .ok_or_else(|| Error::Shape(format!("Liouvillian dimension {n} is not a perfect square")))?;
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let right = eig_general(liouvillian)?;
    let left = eig_general(&liouvillian.adjoint())?;
    let right_vals: Vec<C64> = right.iter().map(|p| p.value).collect();
    let left_vals: Vec<C64> = left.iter().map(|p| p.value.conj()).collect();

    let mut used_left = vec![false; n];
    let mut lambdas = Vec::with_capacity(n);
    let mut r_cols: Vec<ComplexVector> = Vec::with_capacity(n);
    let mut w_cols: Vec<ComplexVector> = Vec::with_capacity(n);
    for cluster in cluster_ranges(&right_vals, tol) {
        let m = cluster.len();
        let center = cluster.iter().map(|&k| right_vals[k]).sum::<C64>() / r(m as f64);
        let radius = cluster
            .iter()
            .map(|&k| (right_vals[k] - center).norm())
            .fold(0.0, f64::max);
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&j| !used_left[j] && (left_vals[j] - center).norm() < radius + tol)
            .collect();
        if candidates.len() < m {
            return Err(Error::Decomposition(format!(
                "eigenvalue {center:.6e} has {m} right but {} left eigenvectors within tol {tol:e}",
                candidates.len()
            )));
        }
        if candidates.len() > m {
            // Keep the left vectors with the largest overlap on this cluster.
            let overlap = |j: usize| -> f64 {
                cluster
                    .iter()
                    .map(|&k| left[j].vector.dotc(&right[k].vector).norm_sqr())
                    .sum()
            };
            candidates.sort_by(|&a, &b| overlap(b).total_cmp(&overlap(a)));
            candidates.truncate(m);
        }
        for &j in &candidates {
            used_left[j] = true;
        }
        let rc = DMatrix::from_fn(n, m, |i, k| right[cluster[k]].vector[i]);
        let wc = DMatrix::from_fn(n, m, |i, k| left[candidates[k]].vector[i]);
        let overlap = wc.adjoint() * &rc;
        let svals = overlap.clone().svd(false, false).singular_values;
        let (smin, smax) = (svals.min(), svals.max());
        if !(smin > 1e-12 * smax.max(1e-300)) || smax == 0.0 {
            return Err(Error::Decomposition(format!(
                "left and right eigenvectors near {center:.6e} are not biorthogonalizable \
                 (smallest overlap singular value {smin:.3e}); the Liouvillian may be defective"
            )));
        }
        let inv = overlap
            .try_inverse()
            .ok_or_else(|| Error::Decomposition(format!("singular overlap near {center:.6e}")))?;
        let wc = wc * inv.adjoint();
        for (k, &idx) in cluster.iter().enumerate() {
            lambdas.push(right_vals[idx]);
            r_cols.push(rc.column(k).into_owned());
            w_cols.push(wc.column(k).into_owned());
        }
    }

    // Biorthonormality over the whole basis.
    let rmat = DMatrix::from_fn(n, n, |i, k| r_cols[k][i]);
    let wmat = DMatrix::from_fn(n, n, |i, k| w_cols[k][i]);
    let gram = wmat.adjoint() * rmat;
    let err = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - if i == j { r(1.0) } else { r(0.0) }).norm())
        .fold(0.0, f64::max);
    if err > BIORTHO_TOL {
        return Err(Error::Decomposition(format!(
            "biorthonormality residual {err:.3e} exceeds {BIORTHO_TOL:e}"
        )));
    }

    let order = spectral_order(&lambdas, tol);
    let mut entries = Vec::with_capacity(n);
    for k in order {
        let right = devectorize(&r_cols[k], dim)?;
        let left = devectorize(&w_cols[k], dim)?.adjoint();
        entries.push(SpectralEntry { lambda: lambdas[k], right, left });
    }
    let lead = entries[0].lambda.norm();
    if lead > tol {
        return Err(Error::NoSteadyState { magnitude: lead, tol });
    }
    Ok(LiouvillianSpectrum { entries, tol, dim })
}

impl LiouvillianSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.entries.iter().map(|e| e.lambda.norm()).fold(0.0, f64::max)
    }

    /// `c_k = Tr(ρ₀ L_k)`.
    pub fn coefficients(&self, rho0: &ComplexMatrix) -> Result<Vec<C64>> {
        if rho0.rows() != self.dim || rho0.cols() != self.dim {
            return Err(Error::Shape(format!(
                "initial state is {}x{}, spectrum dimension is {}",
                rho0.rows(),
                rho0.cols(),
                self.dim
            )));
        }
        let v = vectorize(rho0)?;
        Ok(self
            .entries
            .iter()
            .map(|e| {
                let lt = vectorize(&e.left.transpose()).expect("square");
                lt.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    /// `Σ_k c_k e^{λ_k t} R_k`.
    pub fn reconstruct(&self, coefficients: &[C64], t: f64) -> ComplexMatrix {
        let mut rho = ComplexMatrix::zeros(self.dim, self.dim);
        for (e, ck) in self.entries.iter().zip(coefficients) {
            if *ck == r(0.0) {
                continue;
            }
            rho += &e.right.scale(ck * (e.lambda * t).exp());
        }
        rho
    }

    /// Slowest decaying mode (`Re λ < −tol`) with weight above [`WEIGHT_CUTOFF`].
    pub fn envelope_eigenvalue(&self, rho0: &ComplexMatrix) -> Result<Option<C64>> {
        let coeffs = self.coefficients(rho0)?;
        Ok(self
            .entries
            .iter()
            .zip(&coeffs)
            .filter(|(e, ck)| e.lambda.re < -self.tol && ck.norm() > WEIGHT_CUTOFF)
            .map(|(e, _)| e.lambda)
            .max_by(|a, b| a.re.total_cmp(&b.re)))
    }

    pub fn to_json(&self) -> Vec<SpectralEntryJson> {
        self.entries
            .iter()
            .map(|e| SpectralEntryJson {
                lambda_re: e.lambda.re,
                lambda_im: e.lambda.im,
                right: MatrixJson::from(&e.right),
                left: MatrixJson::from(&e.left),
            })
            .collect()
    }
}

/// Density matrix at every grid point from the spectral expansion, with
/// per-sample diagnostics. Hermitian observables give real columns.
pub fn evolve_spectral(
    spec: &LiouvillianSpectrum,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    observables: &[(&str, &ComplexMatrix)],
) -> Result<TimeSeries> {
    grid.validate()?;
    for (name, op) in observables {
        if op.rows() != spec.dim || op.cols() != spec.dim {
            return Err(Error::Shape(format!("observable '{name}' does not match dimension {}", spec.dim)));
        }
    }
    let coeffs = spec.coefficients(rho0.matrix())?;
    let mut series = TimeSeries::new(grid.times());
    if let Some(w) = grid.stability_warning(spec.max_abs_eigenvalue()) {
        series.warn(w);
    }
    let hermitian: Vec<bool> = observables.iter().map(|(_, op)| op.is_hermitian(1e-12)).collect();
    let mut values: Vec<Vec<C64>> = vec![Vec::with_capacity(grid.steps + 1); observables.len()];
    let mut trace = Vec::with_capacity(grid.steps + 1);
    let mut herm = Vec::with_capacity(grid.steps + 1);
    let mut min_eig = Vec::with_capacity(grid.steps + 1);
    let mut flagged = 0usize;
    for (k, &t) in series.times.iter().enumerate() {
        let rho = spec.reconstruct(&coeffs, t);
        let diag = StateDiagnostics::of(&rho)?;
        if diag.trace_deviation > TRACE_DRIFT_TOL {
            return Err(Error::Decomposition(format!(
                "trace drifted by {:.3e} at t = {t} (sample {k})",
                diag.trace_deviation
            )));
        }
        if !diag.within(STATE_TOL) {
            flagged += 1;
        }
        let state = DensityMatrix { matrix: rho };
        for ((_, op), out) in observables.iter().zip(values.iter_mut()) {
            out.push(state.expectation(op));
        }
        trace.push(state.matrix.trace().re);
        herm.push(diag.hermiticity_deviation);
        min_eig.push(diag.min_eigenvalue);
    }
    if flagged > 0 {
        series.warn(format!(
            "{flagged} samples exceed the density-matrix tolerance {STATE_TOL:e} (trace, hermiticity or positivity)"
        ));
    }
    for (((name, _), vals), h) in observables.iter().zip(values).zip(hermitian) {
        if h {
            series.push_real(name, vals.iter().map(|z| z.re).collect())?;
        } else {
            series.push_complex(name, vals)?;
        }
    }
    series.push_real("trace", trace)?;
    series.push_real("hermiticity_dev", herm)?;
    series.push_real("min_eig", min_eig)?;
    Ok(series)
}

/// Stationary state and the trace correction applied to it.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `|Tr(c₁R₁) − 1|` before renormalization.
    pub trace_correction: f64,
}

/// `c₁R₁` renormalized to unit trace; fails when the zero eigenvalue is degenerate.
pub fn steady_state(spec: &LiouvillianSpectrum, rho0: &DensityMatrix) -> Result<SteadyState> {
    let count = spec.entries.iter().filter(|e| e.lambda.norm() <= spec.tol).count();
    if count > 1 {
        return Err(Error::DegenerateSteadyState { count });
    }
    let first = spec
        .entries
        .first()
        .ok_or_else(|| Error::Decomposition("empty spectrum".into()))?;
    let c1 = spec.coefficients(rho0.matrix())?[0];
    let raw = first.right.scale(c1);
    let tr = raw.trace();
    let trace_correction = (tr - r(1.0)).norm();
    if trace_correction > 1e-12 {
        log::debug!("steady state trace renormalized by {trace_correction:.3e}");
    }
    let rho = raw.scale(r(1.0) / tr);
    let rho = (&rho + &rho.adjoint()).scale_re(0.5);
    Ok(SteadyState { rho: DensityMatrix::new(rho)?, trace_correction })
}

/// Closed-form `p_e(t)` and `Im⟨σ₊(t)⟩` for the resonantly driven two-level
/// atom at zero temperature, starting in the ground state.
pub fn tls_exact_benchmark(omega: f64, gamma0: f64, grid: &TimeGrid) -> Result<TimeSeries> {
    grid.validate()?;
    if !(omega > 0.0) || !(gamma0 > 0.0) {
        return Err(Error::Parameter("Omega and gamma0 must be positive".into()));
    }
    let mu = (c(omega * omega - (gamma0 / 4.0).powi(2), 0.0)).sqrt();
    // sin(μt)/μ is entire in μ²; use its limit t when μ vanishes.
    let sinc = |t: f64| -> C64 {
        if mu.norm() * t.abs().max(1.0) < 1e-12 {
            r(t)
        } else {
            (mu * t).sin() / mu
        }
    };
    let denom = gamma0 * gamma0 + 2.0 * omega * omega;
    let times = grid.times();
    let mut pe = Vec::with_capacity(times.len());
    let mut sp = Vec::with_capacity(times.len());
    for &t in &times {
        let decay = (-3.0 * gamma0 * t / 4.0).exp();
        let cos = (mu * t).cos();
        let bracket_pe = r(1.0) - (cos + sinc(t) * (3.0 * gamma0 / 4.0)) * decay;
        let bracket_sp = r(1.0) - (cos + sinc(t) * (gamma0 / 4.0 - omega * omega / gamma0)) * decay;
        pe.push(omega * omega / denom * bracket_pe.re);
        sp.push(-omega * gamma0 / denom * bracket_sp.re);
    }
    let mut series = TimeSeries::new(times);
    series.push_real("p_e", pe)?;
    series.push_real("sigma_plus_im", sp)?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::{propagate, StateVector};
    use crate::models::{dissipative_ising_channels, tls_photon_channels, two_spin_hamiltonian};
    use crate::operators::{pauli, HilbertSpace, Pauli};
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        let p = &a * &a.adjoint();
        let tr = p.trace();
        p.scale(r(1.0) / tr)
    }

    fn rk4_lindblad(h: &ComplexMatrix, ch: &[LindbladChannel], rho: &ComplexMatrix, t: f64, steps: usize) -> ComplexMatrix {
        let dt = t / steps as f64;
        let mut y = rho.clone();
        for _ in 0..steps {
            let k1 = lindblad_rhs(h, ch, &y);
            let k2 = lindblad_rhs(h, ch, &(&y + &k1.scale_re(dt / 2.0)));
            let k3 = lindblad_rhs(h, ch, &(&y + &k2.scale_re(dt / 2.0)));
            let k4 = lindblad_rhs(h, ch, &(&y + &k3.scale_re(dt)));
            let sum = &(&k1 + &k2.scale_re(2.0)) + &(&k3.scale_re(2.0) + &k4);
            y += &sum.scale_re(dt / 6.0);
        }
        y
    }

    fn decay_qubit(gamma: f64) -> (ComplexMatrix, Vec<LindbladChannel>) {
        (
            ComplexMatrix::zeros(2, 2),
            vec![LindbladChannel::new(pauli(Pauli::Lowering), gamma).unwrap()],
        )
    }

    #[test]
    fn empty_generator_is_zero() {
        let l = build_liouvillian(&ComplexMatrix::zeros(3, 3), &[]).unwrap();
        assert_eq!(l, ComplexMatrix::zeros(9, 9));
    }

    #[test]
    fn superoperator_matches_direct_action() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(31);
        let a = random_matrix(&mut rng, 3);
        let h = &a + &a.adjoint();
        let channels = vec![
            LindbladChannel::new(random_matrix(&mut rng, 3), 0.3).unwrap(),
            LindbladChannel::new(random_matrix(&mut rng, 3), 1.1).unwrap(),
        ];
        let l = build_liouvillian(&h, &channels).unwrap();
        for _ in 0..50 {
            let rho = random_matrix(&mut rng, 3);
            let via_super = devectorize(&l.apply(&vectorize(&rho).unwrap()), 3).unwrap();
            let direct = lindblad_rhs(&h, &channels, &rho);
            assert!(via_super.max_abs_diff(&direct) < 1e-12);
        }
        let bad = vec![LindbladChannel::new(ComplexMatrix::identity(2), 1.0).unwrap()];
        assert!(build_liouvillian(&h, &bad).is_err());
    }

    #[test]
    fn pure_decay_spectrum() {
        let gamma = 0.7;
        let (h, ch) = decay_qubit(gamma);
        let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
        let want = [0.0, -gamma / 2.0, -gamma / 2.0, -gamma];
        for (e, w) in spec.entries.iter().zip(want) {
            assert!((e.lambda - r(w)).norm() < 1e-12, "{} vs {w}", e.lambda);
        }
        let rho0 = DensityMatrix::new(ComplexMatrix::diagonal(&[r(1.0), r(0.0)])).unwrap();
        let ss = steady_state(&spec, &rho0).unwrap();
        assert!(ss.rho.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[r(0.0), r(1.0)])) < 1e-12);
    }

    #[test]
    fn biorthonormal_and_complete() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(32);
        let h = two_spin_hamiltonian(1.0, 0.1);
        let ch = dissipative_ising_channels(&[0.05, 0.05]).unwrap();
        let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(spec.len(), 16);
        for (j, ej) in spec.entries.iter().enumerate() {
            for (k, ek) in spec.entries.iter().enumerate() {
                let t = (&ej.left * &ek.right).trace();
                let want = if j == k { r(1.0) } else { r(0.0) };
                assert!((t - want).norm() < 1e-6);
            }
        }
        for _ in 0..5 {
            let sigma = random_matrix(&mut rng, 4);
            let coeffs = spec.coefficients(&sigma).unwrap();
            let rebuilt = spec.reconstruct(&coeffs, 0.0);
            assert!(rebuilt.max_abs_diff(&sigma) < 1e-8);
        }
        // Conjugate-pair closure and ordering.
        let vals = spec.eigenvalues();
        for v in &vals {
            assert!(vals.iter().any(|u| (u - v.conj()).norm() < spec.tol));
            assert!(v.re <= spec.tol);
        }
        assert!(vals.windows(2).all(|w| w[0].re >= w[1].re - spec.tol));
        assert!(vals[0].norm() < 1e-8);
    }

    #[test]
    fn degenerate_dissipator_is_biorthonormalized() {
        // Pure dephasing on two qubits gives heavily degenerate eigenvalues.
        let space = HilbertSpace::spins(2).unwrap();
        let h = ComplexMatrix::zeros(4, 4);
        let z1 = crate::operators::embed(&space, 1, &pauli(Pauli::Z)).unwrap();
        let sm = crate::operators::embed(&space, 2, &pauli(Pauli::Lowering)).unwrap();
        let sm1 = crate::operators::embed(&space, 1, &pauli(Pauli::Lowering)).unwrap();
        let ch = vec![
            LindbladChannel::new(z1, 0.2).unwrap(),
            LindbladChannel::new(sm, 0.3).unwrap(),
            LindbladChannel::new(sm1, 0.1).unwrap(),
        ];
        let l = build_liouvillian(&h, &ch).unwrap();
        let spec = decompose(&l, DEFAULT_TOL).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(33);
        let rho = random_density(&mut rng, 4);
        let coeffs = spec.coefficients(&rho).unwrap();
        for t in [0.0, 1.0, 7.5] {
            let want = rk4_lindblad(&h, &ch, &rho, t, 2000);
            assert!(spec.reconstruct(&coeffs, t).max_abs_diff(&want) < 1e-6);
        }
    }

    #[test]
    fn dissipation_free_matches_unitary() {
        let h = two_spin_hamiltonian(1.0, 0.1);
        let spec = decompose(&build_liouvillian(&h, &[]).unwrap(), DEFAULT_TOL);
        // A closed system has a degenerate kernel; the spectrum itself is fine.
        let spec = spec.unwrap();
        let psi = StateVector::basis(HilbertSpace::spins(2).unwrap(), 3).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let mz = crate::closed::magnetization_operator(psi.space(), Pauli::Z).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 200).unwrap();
        let open = evolve_spectral(&spec, &rho0, &grid, &[("mz", &mz)]).unwrap();
        let closed = propagate(&h, &psi, &grid, &[("mz", &mz)]).unwrap();
        for (a, b) in open.real("mz").unwrap().iter().zip(closed.real("mz").unwrap()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(matches!(steady_state(&spec, &rho0), Err(Error::DegenerateSteadyState { .. })));
    }

    #[test]
    fn tls_steady_state_values() {
        let (h, ch) = tls_photon_channels(1.0, 0.2, 0.0).unwrap();
        let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
        let g = DensityMatrix::new(ComplexMatrix::diagonal(&[r(0.0), r(1.0)])).unwrap();
        let ss = steady_state(&spec, &g).unwrap();
        let m = ss.rho.matrix();
        // ρ_ee = Ω²/(γ²+2Ω²), ρ_eg = iΩγ/(γ²+2Ω²)
        assert!((m[(0, 0)].re - 1.0 / 2.04).abs() < 1e-10);
        assert!((m[(0, 1)] - c(0.0, 0.2 / 2.04)).norm() < 1e-10);
        let l = build_liouvillian(&h, &ch).unwrap();
        let res = l.apply(&vectorize(m).unwrap()).norm();
        assert!(res < 1e-8);
        let late = rk4_lindblad(&h, &ch, g.matrix(), 250.0, 25_000);
        assert!(late.max_abs_diff(m) < 1e-6);
    }

    #[test]
    fn tls_dynamics_match_closed_form() {
        let (h, ch) = tls_photon_channels(1.0, 0.2, 0.0).unwrap();
        let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
        let g = DensityMatrix::new(ComplexMatrix::diagonal(&[r(0.0), r(1.0)])).unwrap();
        let grid = TimeGrid::new(0.0, 200.0, 2000).unwrap();
        let pe_op = ComplexMatrix::diagonal(&[r(1.0), r(0.0)]);
        let sp = pauli(Pauli::Raising);
        let num = evolve_spectral(&spec, &g, &grid, &[("p_e", &pe_op), ("sigma_plus", &sp)]).unwrap();
        let exact = tls_exact_benchmark(1.0, 0.2, &grid).unwrap();
        let sp_num = num.complex("sigma_plus").unwrap();
        for k in 0..grid.steps + 1 {
            assert!((num.real("p_e").unwrap()[k] - exact.real("p_e").unwrap()[k]).abs() < 1e-3);
            assert!((sp_num[k].im - exact.real("sigma_plus_im").unwrap()[k]).abs() < 1e-3);
        }
    }

    #[test]
    fn tls_closed_form_limits() {
        let grid = TimeGrid::new(0.0, 1e4, 10).unwrap();
        let s = tls_exact_benchmark(1.0, 0.2, &grid).unwrap();
        assert_eq!(s.real("p_e").unwrap()[0], 0.0);
        assert_eq!(s.real("sigma_plus_im").unwrap()[0], 0.0);
        assert!((s.real("p_e").unwrap()[10] - 1.0 / 2.04).abs() < 1e-12);
        // Overdamped and critical branches stay real and finite.
        for omega in [0.01, 0.05] {
            let s = tls_exact_benchmark(omega, 0.2, &TimeGrid::new(0.0, 50.0, 50).unwrap()).unwrap();
            assert!(s.real("p_e").unwrap().iter().all(|x| x.is_finite() && *x >= -1e-12));
        }
    }

    #[test]
    fn overdamped_closed_form_matches_ode() {
        let (omega, gamma) = (0.02, 0.2);
        let (h, ch) = tls_photon_channels(omega, gamma, 0.0).unwrap();
        let g = ComplexMatrix::diagonal(&[r(0.0), r(1.0)]);
        let s = tls_exact_benchmark(omega, gamma, &TimeGrid::new(0.0, 30.0, 3).unwrap()).unwrap();
        for (k, &t) in s.times.iter().enumerate() {
            let rho = rk4_lindblad(&h, &ch, &g, t, 3000);
            assert!((rho[(0, 0)].re - s.real("p_e").unwrap()[k]).abs() < 1e-8);
            assert!((rho[(1, 0)].im - s.real("sigma_plus_im").unwrap()[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_photon_decay_from_excited_state() {
        let (h, ch) = tls_photon_channels(0.0, 0.3, 0.0).unwrap();
        let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
        let e = DensityMatrix::new(ComplexMatrix::diagonal(&[r(1.0), r(0.0)])).unwrap();
        let pe = ComplexMatrix::diagonal(&[r(1.0), r(0.0)]);
        let grid = TimeGrid::new(0.0, 10.0, 20).unwrap();
        let s = evolve_spectral(&spec, &e, &grid, &[("p_e", &pe)]).unwrap();
        for (t, p) in s.times.iter().zip(s.real("p_e").unwrap()) {
            assert!((p - (-0.3 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn random_models_match_runge_kutta() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(34);
        for d in [2, 3, 4, 2, 3, 4] {
            let a = random_matrix(&mut rng, d);
            let h = &a + &a.adjoint();
            let ch: Vec<LindbladChannel> = (0..2)
                .map(|_| LindbladChannel::new(random_matrix(&mut rng, d), rng.random::<f64>()).unwrap())
                .collect();
            let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
            let rho0 = DensityMatrix::new(random_density(&mut rng, d)).unwrap();
            let grid = TimeGrid::new(0.0, 3.0, 6).unwrap();
            let s = evolve_spectral(&spec, &rho0, &grid, &[]).unwrap();
            assert!(s.real("trace").unwrap().iter().all(|t| (t - 1.0).abs() < 1e-8));
            assert!(s.real("hermiticity_dev").unwrap().iter().all(|h| *h < 1e-8));
            assert!(s.real("min_eig").unwrap().iter().all(|m| *m >= -1e-8));
            let coeffs = spec.coefficients(rho0.matrix()).unwrap();
            for &t in &s.times {
                let want = rk4_lindblad(&h, &ch, rho0.matrix(), t, 3000);
                assert!(spec.reconstruct(&coeffs, t).max_abs_diff(&want) < 1e-6, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn spectrum_json_round_trip() {
        let (h, ch) = decay_qubit(0.5);
        let spec = decompose(&build_liouvillian(&h, &ch).unwrap(), DEFAULT_TOL).unwrap();
        let json = serde_json::to_string(&spec.to_json()).unwrap();
        let back: Vec<SpectralEntryJson> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), 4);
        let r0 = ComplexMatrix::try_from(&back[0].right).unwrap();
        assert!(r0.max_abs_diff(&spec.entries[0].right) == 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[r(0.5), r(0.4)])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[r(1.5), r(-0.5)])).is_err());
        let mut m = ComplexMatrix::diagonal(&[r(0.5), r(0.5)]);
        m[(0, 1)] = r(0.1);
        assert!(DensityMatrix::new(m).is_err());
    }
}
