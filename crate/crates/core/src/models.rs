//! Hamiltonians and dissipative channels for the reference models.

use serde::{Deserialize, Serialize};

use crate::closed::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{kron, limits, r, ComplexMatrix, ComplexVector, ZERO};
use crate::operators::{
    boson_annihilation, embed, pauli, CavityOp, HilbertSpace, Pauli,
};

/// Lindblad dissipator `γ (L ρ L† − ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

impl LindbladChannel {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::Parameter(format!("channel rate must be >= 0, got {rate}")));
        }
        operator.require_square("a Lindblad operator")?;
        Ok(Self { operator, rate })
    }
}

/// Memory for a dense `dim x dim` matrix of real doubles, in GB (`dim² × 8 × 10⁻⁹`).
pub fn real_matrix_gb(dim: usize) -> f64 {
    (dim as f64).powi(2) * 8e-9
}

/// Bytes for a dense `dim x dim` complex matrix (twice the real-double figure).
pub fn complex_matrix_bytes(dim: usize) -> u128 {
    (dim as u128) * (dim as u128) * 16
}

fn memory_guard(dim: usize) -> Result<()> {
    let bytes = complex_matrix_bytes(dim);
    let budget = limits().memory_budget_bytes as u128;
    if bytes > budget {
        return Err(Error::MemoryBudget { dim, bytes, budget });
    }
    Ok(())
}

/// `−J σ₁ˣσ₂ˣ − B(σ₁ˣ + σ₂ˣ)`.
pub fn two_spin_hamiltonian(j: f64, b: f64) -> ComplexMatrix {
    let space = HilbertSpace::spins(2).expect("two spins fit any cap");
    let sx1 = embed(&space, 1, &pauli(Pauli::X)).expect("valid site");
    let sx2 = embed(&space, 2, &pauli(Pauli::X)).expect("valid site");
    let coupling = (&sx1 * &sx2).scale_re(-j);
    let field = (&sx1 + &sx2).scale_re(-b);
    &coupling + &field
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub n: usize,
    /// Power-law range exponent of the couplings.
    pub alpha: f64,
    /// Transverse field strength.
    pub field: f64,
    /// Divide couplings by `(N−1)⁻¹ Σ_{i>j} |i−j|^{−α}`.
    pub normalize_j: bool,
}

impl IsingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("Ising chain needs N >= 2, got {}", self.n)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !self.field.is_finite() {
            return Err(Error::Parameter("field must be finite".into()));
        }
        Ok(())
    }

    /// `J = (N−1)⁻¹ Σ_{i>j} |i−j|^{−α}`.
    pub fn normalization(&self) -> f64 {
        let n = self.n;
        let sum: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i - j) as f64))
            .map(|d| d.powf(-self.alpha))
            .sum();
        sum / (n as f64 - 1.0)
    }

    /// Coupling matrix `J_ij` (zero diagonal).
    pub fn couplings(&self) -> Vec<Vec<f64>> {
        let norm = if self.normalize_j { self.normalization() } else { 1.0 };
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else {
                            (i.abs_diff(j) as f64).powf(-self.alpha) / norm
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Transverse Ising Hamiltonian split into its coupling and field parts.
#[derive(Debug, Clone)]
pub struct IsingHamiltonian {
    pub total: ComplexMatrix,
    /// `H₁ = −Σ_{i<j} J_ij σᵢˣσⱼˣ`
    pub coupling: ComplexMatrix,
    /// `H₀ = −B Σᵢ σᵢᶻ`
    pub field: ComplexMatrix,
}

pub fn ising_hamiltonian(p: &IsingParams) -> Result<IsingHamiltonian> {
    p.validate()?;
    let space = HilbertSpace::spins(p.n)?;
    memory_guard(space.total_dim())?;
    let dim = space.total_dim();
    let jij = p.couplings();
    let sx: Vec<ComplexMatrix> = (1..=p.n)
        .map(|i| embed(&space, i, &pauli(Pauli::X)))
        .collect::<Result<_>>()?;
    let mut coupling = ComplexMatrix::zeros(dim, dim);
    let mut field = ComplexMatrix::zeros(dim, dim);
    for i in 0..p.n {
        for j in (i + 1)..p.n {
            coupling -= &(&sx[i] * &sx[j]).scale_re(jij[i][j]);
        }
        field -= &embed(&space, i + 1, &pauli(Pauli::Z))?.scale_re(p.field);
    }
    Ok(IsingHamiltonian {
        total: &coupling + &field,
        coupling,
        field,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityArrayParams {
    pub cavities: usize,
    pub omega_c: f64,
    pub omega_a: f64,
    pub g: f64,
    pub hopping: f64,
    pub cutoff: usize,
    /// `L x L` 0/1 matrix; an upper-triangular description is enough.
    pub adjacency: Vec<Vec<u8>>,
    /// `true` selects the Jaynes-Cummings coupling, `false` the Rabi coupling.
    pub rwa: bool,
}

impl CavityArrayParams {
    /// Open chain `1 - 2 - … - L` written as upper-triangular entries.
    pub fn chain_adjacency(cavities: usize) -> Vec<Vec<u8>> {
        (0..cavities)
            .map(|i| (0..cavities).map(|j| u8::from(j == i + 1)).collect())
            .collect()
    }

    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.cavities;
        if l == 0 {
            return Err(Error::Parameter("need at least one cavity".into()));
        }
        if self.cutoff < 1 {
            return Err(Error::Parameter("Fock cutoff must be at least 1".into()));
        }
        if self.adjacency.len() != l || self.adjacency.iter().any(|row| row.len() != l) {
            return Err(Error::Parameter(format!("adjacency must be {l}x{l}")));
        }
        for (i, row) in self.adjacency.iter().enumerate() {
            if row[i] != 0 {
                return Err(Error::Parameter("adjacency diagonal must be zero".into()));
            }
            if row.iter().any(|&a| a > 1) {
                return Err(Error::Parameter("adjacency entries must be 0 or 1".into()));
            }
        }
        for x in [self.omega_c, self.omega_a, self.g, self.hopping] {
            if !x.is_finite() {
                return Err(Error::Parameter("cavity parameters must be finite".into()));
            }
        }
        Ok(())
    }

    /// `A + Aᵀ` clipped to {0, 1}, plus a note when the input was not symmetric.
    pub fn symmetric_adjacency(&self) -> (Vec<Vec<u8>>, Option<String>) {
        let l = self.cavities;
        let a = &self.adjacency;
        let sym: Vec<Vec<u8>> = (0..l)
            .map(|i| (0..l).map(|j| (a[i][j] | a[j][i]).min(1)).collect())
            .collect();
        let note = (sym != *a).then(|| {
            "adjacency matrix was not symmetric; symmetrized as A + A^T clipped to {0,1}".to_string()
        });
        (sym, note)
    }
}

/// Rabi-Hubbard (`rwa = false`) or Jaynes-Cummings-Hubbard (`rwa = true`)
/// Hamiltonian. Each connected pair contributes one hopping term
/// `−J (âᵢâⱼ† + âᵢ†âⱼ)`. Returns the matrix and any adjacency warning.
pub fn cavity_hamiltonian(p: &CavityArrayParams) -> Result<(ComplexMatrix, Vec<String>)> {
    p.validate()?;
    let space = HilbertSpace::cavity_array(p.cavities, p.cutoff)?;
    memory_guard(space.total_dim())?;
    let dim = space.total_dim();
    let (adj, note) = p.symmetric_adjacency();

    let a_local = boson_annihilation(p.cutoff)?;
    let photon: Vec<ComplexMatrix> = (1..=p.cavities)
        .map(|i| embed(&space, 2 * i, &a_local))
        .collect::<Result<_>>()?;
    let raising: Vec<ComplexMatrix> = (1..=p.cavities)
        .map(|i| embed(&space, 2 * i - 1, &pauli(Pauli::Raising)))
        .collect::<Result<_>>()?;

    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..p.cavities {
        let a = &photon[i];
        let ad = a.adjoint();
        let sp = &raising[i];
        let sm = sp.adjoint();
        h += &(&ad * a).scale_re(p.omega_c);
        h += &(sp * &sm).scale_re(p.omega_a);
        let coupling = if p.rwa {
            &(a * sp) + &(&ad * &sm)
        } else {
            &(sp + &sm) * &(a + &ad)
        };
        h += &coupling.scale_re(p.g);
    }
    for i in 0..p.cavities {
        for j in (i + 1)..p.cavities {
            if adj[i][j] == 1 {
                let hop = &(&photon[i] * &photon[j].adjoint()) + &(&photon[i].adjoint() * &photon[j]);
                h -= &hop.scale_re(p.hopping);
            }
        }
    }
    Ok((h, note.into_iter().collect()))
}

/// Total excitation number `Σᵢ (âᵢ†âᵢ + σᵢ⁺σᵢ⁻)`.
pub fn total_excitations(cavities: usize, cutoff: usize) -> Result<ComplexMatrix> {
    let mut total: Option<ComplexMatrix> = None;
    for i in 1..=cavities {
        let n = crate::operators::cavity_number(cavities, i, cutoff)?;
        total = Some(match total {
            Some(t) => &t + &n,
            None => n,
        });
    }
    total.ok_or_else(|| Error::Parameter("need at least one cavity".into()))
}

/// Product of `cos θ₁ |e⟩|1⟩ − sin θ₁ |g⟩|0⟩` over all cavities, with
/// `θ₁ = atan2(2g, Δ)`.
pub fn mott_initial_state(p: &CavityArrayParams) -> Result<StateVector> {
    p.validate()?;
    let theta = (2.0 * p.g).atan2(p.detuning());
    let local_dim = 2 * (p.cutoff + 1);
    // atom ⊗ photon with |e⟩ first: |e,n⟩ -> n, |g,n⟩ -> cutoff + 1 + n
    let mut local = vec![ZERO; local_dim];
    local[1] = r(theta.cos());
    local[p.cutoff + 1] = r(-theta.sin());
    let local = ComplexMatrix::from_column_major(local_dim, 1, local)?;
    let mut psi = local.clone();
    for _ in 1..p.cavities {
        psi = kron(&psi, &local)?;
    }
    let space = HilbertSpace::cavity_array(p.cavities, p.cutoff)?;
    StateVector::new(ComplexVector::from_column_slice(psi.as_slice()), space)
}

/// Spontaneous-emission channels `(Sᵢ⁻, γᵢ)`, one per spin.
pub fn dissipative_ising_channels(rates: &[f64]) -> Result<Vec<LindbladChannel>> {
    let space = HilbertSpace::spins(rates.len())?;
    rates
        .iter()
        .enumerate()
        .map(|(i, &g)| LindbladChannel::new(embed(&space, i + 1, &pauli(Pauli::Lowering))?, g))
        .collect()
}

/// Driven two-level atom in a thermal photon bath.
///
/// `H = −(Ω/2)(σ₊ + σ₋)`, decay `σ₋` at `γ₀(N_ph + 1)` and, for `N_ph > 0`,
/// absorption `σ₊` at `γ₀N_ph`.
pub fn tls_photon_channels(omega: f64, gamma0: f64, n_ph: f64) -> Result<(ComplexMatrix, Vec<LindbladChannel>)> {
    for (name, v) in [("Omega", omega), ("gamma0", gamma0), ("N_ph", n_ph)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Parameter(format!("{name} must be >= 0, got {v}")));
        }
    }
    let sp = pauli(Pauli::Raising);
    let sm = pauli(Pauli::Lowering);
    let h = (&sp + &sm).scale_re(-omega / 2.0);
    let mut channels = vec![LindbladChannel::new(sm, gamma0 * (n_ph + 1.0))?];
    if n_ph > 0.0 {
        channels.push(LindbladChannel::new(sp, gamma0 * n_ph)?);
    }
    Ok((h, channels))
}

/// Site layout helper for tests and callers building custom cavity operators.
pub fn cavity_op(p: &CavityArrayParams, i: usize, which: CavityOp) -> Result<ComplexMatrix> {
    crate::operators::embed_cavity_pair(p.cavities, i, which, p.cutoff)
}
