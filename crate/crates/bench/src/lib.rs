//! Deterministic inputs shared by the kernel benchmarks.

use qdyn_core::linalg::c;
use qdyn_core::models::{dissipative_ising_channels, two_spin_hamiltonian, LindbladChannel};
use qdyn_core::nonmarkovian::{BathParams, SpectralDensity};
use qdyn_core::{ComplexMatrix, Result};

/// Dense Hermitian matrix with reproducible, well-spread entries.
pub fn hermitian(n: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        let x = (i * n + j) as f64;
        c((0.37 * x).sin(), (0.91 * x + 0.3).cos())
    });
    (&a + &a.adjoint()).scale_re(0.5)
}

/// Dense non-normal matrix of the same kind.
pub fn general(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let x = (i * 7 + j * 3) as f64;
        c((0.53 * x).cos(), (0.29 * x + 1.1).sin())
    })
}

/// The dissipative two-spin model used throughout the examples.
pub fn open_spin_pair() -> Result<(ComplexMatrix, Vec<LindbladChannel>)> {
    Ok((two_spin_hamiltonian(1.0, 0.1), dissipative_ising_channels(&[0.04, 0.04])?))
}

pub fn super_ohmic_bath() -> Result<BathParams> {
    BathParams::new(SpectralDensity::SuperOhmicExp { alpha: 0.5, s: 2.5, omega_c: 0.1 }, 0.002)
}

pub fn localized_bath() -> Result<BathParams> {
    BathParams::new(
        SpectralDensity::LorentzianLocalized { j0: 0.2, s: 2.5, omega0: 2.0, gamma_width: 0.1 },
        0.002,
    )
}
