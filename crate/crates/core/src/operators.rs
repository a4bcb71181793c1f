//! Single-site operators and their embedding into many-body spaces.
//!
//! Basis conventions: spins use `|↑⟩ = (1, 0)`, `|↓⟩ = (0, 1)`; atoms use
//! `|e⟩ = (1, 0)`, `|g⟩ = (0, 1)`; Fock states are ordered `|0⟩, |1⟩, …`.
//! A cavity is the composite `atom ⊗ photon`, so a cavity array of `L` sites
//! is laid out as `atom₁ ⊗ photon₁ ⊗ … ⊗ atom_L ⊗ photon_L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron_all, limits, r, ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteKind {
    SpinHalf,
    Boson { cutoff: usize },
    TwoLevelAtom,
}

impl SiteKind {
    pub fn local_dim(self) -> usize {
        match self {
            SiteKind::Boson { cutoff } => cutoff + 1,
            SiteKind::SpinHalf | SiteKind::TwoLevelAtom => 2,
        }
    }
}

/// Ordered tensor product of local sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    sites: Vec<SiteKind>,
    total_dim: usize,
}

impl HilbertSpace {
    pub fn new(sites: Vec<SiteKind>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Parameter("a Hilbert space needs at least one site".into()));
        }
        let cap = limits().max_dim;
        let mut total: usize = 1;
        for s in &sites {
            if let SiteKind::Boson { cutoff } = s {
                if *cutoff < 1 {
                    return Err(Error::Parameter("boson cutoff must be at least 1".into()));
                }
            }
            total = total
                .checked_mul(s.local_dim())
                .filter(|&d| d <= cap)
                .ok_or(Error::DimensionLimit {
                    requested: total.saturating_mul(s.local_dim()),
                    cap,
                })?;
        }
        Ok(Self {
            sites,
            total_dim: total,
        })
    }

    pub fn spins(n: usize) -> Result<Self> {
        Self::new(vec![SiteKind::SpinHalf; n])
    }

    /// `L` cavities, each an atom followed by a photon mode.
    pub fn cavity_array(cavities: usize, cutoff: usize) -> Result<Self> {
        let sites = (0..cavities)
            .flat_map(|_| [SiteKind::TwoLevelAtom, SiteKind::Boson { cutoff }])
            .collect();
        Self::new(sites)
    }

    pub fn sites(&self) -> &[SiteKind] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn all_spins(&self) -> bool {
        self.sites.iter().all(|s| *s == SiteKind::SpinHalf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
    Raising,
    Lowering,
}

/// Pauli matrices with eigenvalues ±1; `Lowering = (σx − iσy)/2`.
pub fn pauli(axis: Pauli) -> ComplexMatrix {
    let o = ZERO;
    let rows = match axis {
        Pauli::X => [[o, r(1.0)], [r(1.0), o]],
        Pauli::Y => [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
        Pauli::Z => [[r(1.0), o], [o, r(-1.0)]],
        Pauli::Raising => [[o, r(1.0)], [o, o]],
        Pauli::Lowering => [[o, o], [r(1.0), o]],
    };
    ComplexMatrix::from_fn(2, 2, |i, j| rows[i][j])
}

/// Truncated annihilation operator on `|0⟩ … |cutoff⟩`.
pub fn boson_annihilation(cutoff: usize) -> Result<ComplexMatrix> {
    if cutoff < 1 {
        return Err(Error::Parameter("boson cutoff must be at least 1".into()));
    }
    let n = cutoff + 1;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            r((j as f64).sqrt())
        } else {
            ZERO
        }
    }))
}

/// `𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙` with `op` on the 1-based `site`.
pub fn embed(space: &HilbertSpace, site: usize, local_op: &ComplexMatrix) -> Result<ComplexMatrix> {
    if site == 0 || site > space.len() {
        return Err(Error::IndexOutOfRange {
            index: site,
            len: space.len(),
        });
    }
    let local_dim = space.sites[site - 1].local_dim();
    if local_op.rows() != local_dim || local_op.cols() != local_dim {
        return Err(Error::Shape(format!(
            "site {site} has local dimension {local_dim} but the operator is {}x{}",
            local_op.rows(),
            local_op.cols()
        )));
    }
    let factors: Vec<ComplexMatrix> = space
        .sites
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k + 1 == site {
                local_op.clone()
            } else {
                ComplexMatrix::identity(s.local_dim())
            }
        })
        .collect();
    kron_all(&factors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavityOp {
    PhotonAnnihilation,
    AtomRaising,
}

/// Photon annihilation `𝟙₂ ⊗ â` or atomic raising `σ⁺ ⊗ 𝟙` on cavity `i` (1-based)
/// of an array of `cavities` sites.
pub fn embed_cavity_pair(cavities: usize, i: usize, which: CavityOp, cutoff: usize) -> Result<ComplexMatrix> {
    if i == 0 || i > cavities {
        return Err(Error::IndexOutOfRange { index: i, len: cavities });
    }
    let space = HilbertSpace::cavity_array(cavities, cutoff)?;
    match which {
        CavityOp::PhotonAnnihilation => embed(&space, 2 * i, &boson_annihilation(cutoff)?),
        CavityOp::AtomRaising => embed(&space, 2 * i - 1, &pauli(Pauli::Raising)),
    }
}

/// Polariton number `n̂ᵢ = âᵢ†âᵢ + σ̂ᵢ⁺σ̂ᵢ⁻` on cavity `i`.
pub fn cavity_number(cavities: usize, i: usize, cutoff: usize) -> Result<ComplexMatrix> {
    let a = embed_cavity_pair(cavities, i, CavityOp::PhotonAnnihilation, cutoff)?;
    let sp = embed_cavity_pair(cavities, i, CavityOp::AtomRaising, cutoff)?;
    Ok(&(&a.adjoint() * &a) + &(&sp * &sp.adjoint()))
}
