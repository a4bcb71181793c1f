//! One function per experiment: typed parameters in, series and summary out.

use qdyn_core::closed::{
    cavity_rate_function, ising_ground_pair, ising_rate_function, magnetization_operator, number_variance,
    order_parameter_from_variance, propagate_with,
};
use qdyn_core::linalg::MatrixJson;
use qdyn_core::markovian::{build_liouvillian, decompose, evolve_spectral, steady_state, tls_exact_benchmark, DensityMatrix};
use qdyn_core::models::{
    cavity_hamiltonian, dissipative_ising_channels, ising_hamiltonian, mott_initial_state, tls_photon_channels,
    two_spin_hamiltonian, IsingParams,
};
use qdyn_core::nonmarkovian::{evolve_dephasing, gamma_analytic_low_t, plus_state, BathParams, SpectralDensity};
use qdyn_core::operators::cavity_number;
use qdyn_core::{ComplexMatrix, HilbertSpace, Pauli, StateVector, TimeGrid, TimeSeries, C64, RATE_CAP};
use serde_json::{json, Value};

use crate::config::{
    CavityParams, DephasingParams, IsingDqptParams, IsingInitial, OpenIsingParams, Params, TlsPhotonParams,
    TwoSpinParams,
};
use crate::error::CliResult;
use crate::kinks::detect_kinks;

/// Everything one run (or sweep point) produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub summary: Value,
    /// Additional JSON documents, keyed by file name.
    pub extra: Vec<(String, Value)>,
}

pub fn run_point(params: &Params, grid: &TimeGrid, kink_factor: f64) -> CliResult<RunOutput> {
    match params {
        Params::TwoSpin(p) => two_spin(p, grid),
        Params::IsingDqpt(p) => ising_dqpt(p, grid, kink_factor),
        Params::CavitySweep(p) => cavity(p, grid, kink_factor),
        Params::OpenIsing(p) => open_ising(p, grid),
        Params::TlsPhoton(p) => tls_photon(p, grid),
        Params::Dephasing(p) => dephasing(p, grid),
    }
}

fn max_abs_dev(values: &[f64], reference: f64) -> f64 {
    values.iter().fold(0.0, |m, v| m.max((v - reference).abs()))
}

fn last(values: &[f64]) -> f64 {
    values.last().copied().unwrap_or(f64::NAN)
}

/// Unitary run recording `⟨O⟩` for each observable plus `energy` and `norm`.
fn closed_run(
    h: &ComplexMatrix,
    psi0: &StateVector,
    grid: &TimeGrid,
    observables: &[(&str, &ComplexMatrix)],
    mut per_state: impl FnMut(&StateVector),
) -> CliResult<TimeSeries> {
    let mut series = TimeSeries::new(grid.times());
    let mut values = vec![Vec::with_capacity(grid.steps + 1); observables.len()];
    let mut energy = Vec::with_capacity(grid.steps + 1);
    let mut norm = Vec::with_capacity(grid.steps + 1);
    let warnings = propagate_with(h, psi0, grid, |_, _, psi| {
        for ((_, op), out) in observables.iter().zip(values.iter_mut()) {
            out.push(psi.expectation(op).re);
        }
        energy.push(psi.expectation(h).re);
        norm.push(psi.amplitudes().norm());
        per_state(psi);
        Ok(())
    })?;
    // Already logged by the propagator.
    series.warnings.extend(warnings);
    for ((name, _), vals) in observables.iter().zip(values) {
        series.push_real(name, vals)?;
    }
    series.push_real("energy", energy)?;
    series.push_real("norm", norm)?;
    Ok(series)
}

fn conservation_summary(series: &TimeSeries) -> Value {
    let energy = series.real("energy").unwrap_or_default();
    let norm = series.real("norm").unwrap_or_default();
    json!({
        "max_norm_deviation": max_abs_dev(norm, 1.0),
        "max_energy_deviation": max_abs_dev(energy, energy.first().copied().unwrap_or(0.0)),
    })
}

/// Rate values with the cap replaced by NaN, plus a 0/1 flag column.
fn push_rate(series: &mut TimeSeries, name: &str, raw: &[f64]) -> CliResult<()> {
    let capped: Vec<f64> = raw.iter().map(|&x| if x >= RATE_CAP { 1.0 } else { 0.0 }).collect();
    let shown: Vec<f64> = raw.iter().map(|&x| if x >= RATE_CAP { f64::NAN } else { x }).collect();
    series.push_real(name, shown)?;
    series.push_real(&format!("{name}_capped"), capped)?;
    Ok(())
}

fn two_spin(p: &TwoSpinParams, grid: &TimeGrid) -> CliResult<RunOutput> {
    let h = two_spin_hamiltonian(p.j, p.b);
    let space = HilbertSpace::spins(2)?;
    // |↓↓⟩: spin up is basis state 0 on each site.
    let psi0 = StateVector::basis(space.clone(), 3)?;
    let mz = magnetization_operator(&space, Pauli::Z)?;
    let mx = magnetization_operator(&space, Pauli::X)?;
    let series = closed_run(&h, &psi0, grid, &[("m_z", &mz), ("m_x", &mx)], |_| {})?;
    let m_z = series.real("m_z").unwrap_or_default();
    let mut summary = json!({
        "m_z_initial": m_z.first(),
        "m_z_final": last(m_z),
        "m_x_final": last(series.real("m_x").unwrap_or_default()),
    });
    merge(&mut summary, conservation_summary(&series));
    Ok(RunOutput { series, summary, extra: Vec::new() })
}

fn ising_dqpt(p: &IsingDqptParams, grid: &TimeGrid, kink_factor: f64) -> CliResult<RunOutput> {
    let ip = IsingParams { n: p.n, alpha: p.alpha, field: p.field, normalize_j: p.normalize_j };
    let ham = ising_hamiltonian(&ip)?;
    let (right, left) = ising_ground_pair(p.n, p.alpha)?;
    let psi0 = match p.initial {
        IsingInitial::Right => right.clone(),
        IsingInitial::Left => left.clone(),
    };
    let space = HilbertSpace::spins(p.n)?;
    let mz = magnetization_operator(&space, Pauli::Z)?;
    let mx = magnetization_operator(&space, Pauli::X)?;
    let (mut rate, mut p_right, mut p_left) = (Vec::new(), Vec::new(), Vec::new());
    let mut series = closed_run(&ham.total, &psi0, grid, &[("m_z", &mz), ("m_x", &mx)], |psi| {
        rate.push(ising_rate_function((&right, &left), psi, p.n));
        p_right.push(right.overlap(psi).norm_sqr());
        p_left.push(left.overlap(psi).norm_sqr());
    })?;
    push_rate(&mut series, "rate", &rate)?;
    series.push_real("p_right", p_right)?;
    series.push_real("p_left", p_left)?;

    let shown = series.real("rate").unwrap_or_default();
    let kinks = detect_kinks(&series.times, shown, kink_factor)?;
    let finite: Vec<f64> = shown.iter().copied().filter(|x| x.is_finite()).collect();
    let mut summary = json!({
        "rate_initial": rate.first(),
        "rate_min": finite.iter().copied().fold(f64::INFINITY, f64::min),
        "rate_max": finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "rate_capped_samples": rate.len() - finite.len(),
        "kink_count": kinks.len(),
        "kinks": kinks,
    });
    merge(&mut summary, conservation_summary(&series));
    Ok(RunOutput { series, summary, extra: Vec::new() })
}

fn cavity(p: &CavityParams, grid: &TimeGrid, kink_factor: f64) -> CliResult<RunOutput> {
    let mut series = TimeSeries::new(grid.times());
    let mut summary = json!({
        "log10_detuning_ratio": p.log10_detuning_ratio,
        "detuning": p.detuning(),
    });
    let window = grid.t_end - grid.t_start;
    for &model in &p.models {
        let cp = p.model_params(model);
        let (h, notes) = cavity_hamiltonian(&cp)?;
        for n in notes {
            series.warn(n);
        }
        let psi0 = mott_initial_state(&cp)?;
        let number_ops: Vec<ComplexMatrix> =
            (1..=cp.cavities).map(|i| cavity_number(cp.cavities, i, cp.cutoff)).collect::<Result<_, _>>()?;
        let (mut rate, mut variance) = (Vec::new(), Vec::new());
        let run = closed_run(&h, &psi0, grid, &[], |psi| {
            rate.push(cavity_rate_function(&psi0, psi, cp.cavities));
            variance.push(number_variance(psi, &number_ops));
        })?;
        let tag = model.tag();
        // Already logged by the inner run.
        series.warnings.extend(run.warnings.iter().map(|w| format!("{tag}: {w}")));
        let op = order_parameter_from_variance(grid.dt(), &variance, window)?;
        push_rate(&mut series, &format!("{tag}_rate"), &rate)?;
        series.push_real(&format!("{tag}_variance"), variance)?;
        let energy = run.real("energy").unwrap_or_default();
        let norm = run.real("norm").unwrap_or_default();

        let shown = series.real(&format!("{tag}_rate")).unwrap_or_default();
        let kinks = detect_kinks(&series.times, shown, kink_factor)?;
        let peak = shown
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, &x)| (series.times[k], x));
        merge(
            &mut summary,
            json!({
                tag: {
                    "order_parameter": op,
                    "rate_peak_time": peak.map(|p| p.0),
                    "rate_peak_jt": peak.map(|p| p.0 * cp.hopping),
                    "rate_peak_value": peak.map(|p| p.1),
                    "rate_capped_samples": shown.iter().filter(|x| !x.is_finite()).count(),
                    "kinks": kinks,
                    "kinks_jt": kinks.iter().map(|t| t * cp.hopping).collect::<Vec<_>>(),
                    "max_norm_deviation": max_abs_dev(norm, 1.0),
                    "max_energy_deviation": max_abs_dev(energy, energy.first().copied().unwrap_or(0.0)),
                }
            }),
        );
    }
    Ok(RunOutput { series, summary, extra: Vec::new() })
}

fn invariant_summary(series: &TimeSeries) -> Value {
    let trace = series.real("trace").unwrap_or_default();
    let herm = series.real("hermiticity_dev").unwrap_or_default();
    let min_eig = series.real("min_eig").unwrap_or_default();
    json!({
        "max_trace_deviation": max_abs_dev(trace, 1.0),
        "max_hermiticity_deviation": herm.iter().copied().fold(0.0, f64::max),
        "min_eigenvalue": min_eig.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

fn complex_json(z: C64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn open_ising(p: &OpenIsingParams, grid: &TimeGrid) -> CliResult<RunOutput> {
    let h = two_spin_hamiltonian(p.j, p.b);
    let channels = dissipative_ising_channels(&p.gamma)?;
    let liouvillian = build_liouvillian(&h, &channels)?;
    let spec = decompose(&liouvillian, p.tol)?;
    let space = HilbertSpace::spins(2)?;
    let rho0 = DensityMatrix::from_pure(&StateVector::basis(space.clone(), 3)?);
    let mz = magnetization_operator(&space, Pauli::Z)?;
    let mx = magnetization_operator(&space, Pauli::X)?;
    let mut series = evolve_spectral(&spec, &rho0, grid, &[("m_z", &mz), ("m_x", &mx)])?;

    let ss = steady_state(&spec, &rho0)?;
    let m_z_ss = ss.rho.expectation(&mz).re;
    let envelope = spec.envelope_eigenvalue(rho0.matrix())?;
    if let Some(lambda) = envelope {
        let m_z = series.real("m_z").unwrap_or_default();
        let amplitude = (m_z[0] - m_z_ss).abs();
        let upper: Vec<f64> = series.times.iter().map(|t| m_z_ss + amplitude * (lambda.re * t).exp()).collect();
        let lower: Vec<f64> = series.times.iter().map(|t| m_z_ss - amplitude * (lambda.re * t).exp()).collect();
        series.push_real("envelope_upper", upper)?;
        series.push_real("envelope_lower", lower)?;
    }
    let mut summary = json!({
        "liouvillian_dim": liouvillian.rows(),
        "max_abs_eigenvalue": spec.max_abs_eigenvalue(),
        "eigenvalues": spec.eigenvalues().into_iter().map(complex_json).collect::<Vec<_>>(),
        "envelope_eigenvalue": envelope.map(complex_json),
        "steady_state": MatrixJson::from(ss.rho.matrix()),
        "m_z_steady": m_z_ss,
        "m_z_final": last(series.real("m_z").unwrap_or_default()),
    });
    merge(&mut summary, invariant_summary(&series));
    let extra = vec![("spectrum.json".to_string(), serde_json::to_value(spec.to_json()).unwrap_or(Value::Null))];
    Ok(RunOutput { series, summary, extra })
}

fn tls_photon(p: &TlsPhotonParams, grid: &TimeGrid) -> CliResult<RunOutput> {
    let (h, channels) = tls_photon_channels(p.omega, p.gamma0, p.n_ph)?;
    let spec = decompose(&build_liouvillian(&h, &channels)?, p.tol)?;
    // Ground state |g⟩ is basis state 1.
    let rho0 = DensityMatrix::new(ComplexMatrix::diagonal(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))?;
    let p_e = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let sp = qdyn_core::operators::pauli(Pauli::Raising);
    let mut series = evolve_spectral(&spec, &rho0, grid, &[("p_e", &p_e), ("sigma_plus", &sp)])?;
    let ss = steady_state(&spec, &rho0)?;
    let m = ss.rho.matrix();
    let mut summary = json!({
        "steady_rho_ee": m[(0, 0)].re,
        "steady_rho_eg": complex_json(m[(0, 1)]),
        "steady_abs_rho_eg": m[(0, 1)].norm(),
        "steady_state": MatrixJson::from(m),
        "p_e_final": last(series.real("p_e").unwrap_or_default()),
    });
    if p.n_ph == 0.0 {
        let exact = tls_exact_benchmark(p.omega, p.gamma0, grid)?;
        let pe_exact = exact.real("p_e").unwrap_or_default().to_vec();
        let sp_exact = exact.real("sigma_plus_im").unwrap_or_default().to_vec();
        let pe_err = series.real("p_e").unwrap_or_default().iter().zip(&pe_exact).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
        let sp_err = series
            .complex("sigma_plus")
            .unwrap_or_default()
            .iter()
            .zip(&sp_exact)
            .fold(0.0, |m, (a, b)| f64::max(m, (a.im - b).abs()));
        series.push_real("p_e_exact", pe_exact)?;
        series.push_real("sigma_plus_im_exact", sp_exact)?;
        merge(&mut summary, json!({"max_error_p_e": pe_err, "max_error_sigma_plus_im": sp_err}));
    }
    merge(&mut summary, invariant_summary(&series));
    Ok(RunOutput { series, summary, extra: Vec::new() })
}

/// Sign changes of a sampled curve, located by linear interpolation.
pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    times
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] != 0.0 && v[0].signum() != v[1].signum())
        .map(|(t, v)| t[0] + (t[1] - t[0]) * v[0] / (v[0] - v[1]))
        .collect()
}

fn dephasing(p: &DephasingParams, grid: &TimeGrid) -> CliResult<RunOutput> {
    let bath = BathParams::with_settings(p.spectral_density, p.temperature, p.omega_max, p.points_per_period)?;
    let mut series = evolve_dephasing(&bath, &plus_state(), grid)?;
    let gamma = series.real("gamma").unwrap_or_default().to_vec();
    let crossings = zero_crossings(&series.times, &gamma);
    let mut summary = json!({
        "omega_max": bath.omega_max,
        "gamma_zero_crossings": crossings,
        "gamma_first_zero": crossings.first(),
        "nm_measure_final": last(series.real("nm_measure").unwrap_or_default()),
        "coherence_final": last(series.real("coherence").unwrap_or_default()),
    });
    if let SpectralDensity::SuperOhmicExp { .. } = p.spectral_density {
        let analytic: Vec<f64> =
            series.times.iter().map(|&t| gamma_analytic_low_t(&p.spectral_density, t)).collect::<Result<_, _>>()?;
        let scale = analytic.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
        let err = gamma.iter().zip(&analytic).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        series.push_real("gamma_analytic", analytic)?;
        merge(&mut summary, json!({"gamma_max_relative_error": err / scale}));
    }
    Ok(RunOutput { series, summary, extra: Vec::new() })
}

/// Shallow merge of two JSON objects.
fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}
