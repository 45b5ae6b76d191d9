//! Driven emitters coupled through a modulated waveguide: the correlated-decay
//! matrix `A_ij`, the Born-Markov master equation, steady states and
//! two-qubit entanglement measures.
//!
//! Basis: emitter `i` is qubit `i` (most significant first), `|g⟩ = 0`,
//! `|e⟩ = 1`, `σ_- = |g⟩⟨e|`. `A` is stored in units of `Γ_0`; time and `δ_L`
//! are in `1/Ω_r` and `Ω_r`, with `Γ_0` in `Ω_r` carried alongside `A`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics1d::{rk4, EmitterSpec};
use crate::error::{require_finite, require_nonnegative, require_positive, Error, Result};
use crate::floquet1d::{self, LatticeSpec1D, ResonanceSet};
use crate::linalg::{eigh_complex, eigvalsh_complex};
use crate::scales::gamma0;

/// Largest emitter count handled by the dense Liouvillian.
pub const MAX_EMITTERS: usize = 6;
const NULL_SPACE_GAP: f64 = 1e-8;
const POSITIVITY_LIMIT: f64 = 1e-6;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Correlated decay amplitudes `A_ij` in units of `Γ_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub a: DMatrix<Complex64>,
    /// Guided decay rate `Γ` (in `Γ_0`).
    pub gamma: f64,
    /// Non-guided decay rate (in `Γ_0`).
    pub gamma_ng: f64,
    /// `Γ_0` in `Ω_r`.
    pub gamma0: f64,
}

impl CouplingMatrix {
    pub fn emitters(&self) -> usize {
        self.a.nrows()
    }

    /// `Λ_ij = |A_ij| / (Γ + Γ_ng)`.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)].norm() / (self.gamma + self.gamma_ng)
    }

    /// Ideal cascaded channel: `A_12 = Γ_R e^{iθ}`, `A_21 = 0`, `A_ii = Γ_R/2`.
    pub fn unidirectional(gamma_r: f64, phase: f64, gamma0: f64) -> Self {
        let mut a = DMatrix::from_element(2, 2, c(0.0));
        a[(0, 0)] = c(gamma_r / 2.0);
        a[(1, 1)] = c(gamma_r / 2.0);
        a[(0, 1)] = Complex64::from_polar(gamma_r, phase);
        Self {
            a,
            gamma: gamma_r,
            gamma_ng: 0.0,
            gamma0,
        }
    }

    /// Drive phases `φ_i` that cancel the propagation phase of each
    /// nearest-neighbour link: `φ_{i+1} - φ_i = -arg A_{i,i+1}`.
    pub fn compensating_phases(&self) -> Vec<f64> {
        let n = self.emitters();
        let mut phases = vec![0.0; n];
        for i in 1..n {
            phases[i] = phases[i - 1] - self.a[(i - 1, i)].arg();
        }
        phases
    }
}

/// `A_ij` from the resonances of a shared transition frequency. Emitter
/// couplings must be equal; `gamma_ng` is in `Γ_0`.
pub fn coupling_matrix(emitters: &[EmitterSpec], res: &ResonanceSet, gamma_ng: f64) -> Result<CouplingMatrix> {
    if emitters.is_empty() || emitters.len() > MAX_EMITTERS {
        return Err(Error::validation("emitters", format!("need 1..={MAX_EMITTERS} emitters")));
    }
    require_nonnegative("gamma_ng", gamma_ng)?;
    let g0 = emitters[0].coupling;
    if emitters.iter().any(|e| (e.coupling - g0).abs() > 1e-15) {
        return Err(Error::validation("coupling", "all emitters must share one coupling"));
    }
    res.require_markov_valid()?;
    let gamma: f64 = res.entries.iter().map(floquet1d::resonance_rate).sum();
    let n = emitters.len();
    let mut a = DMatrix::from_element(n, n, c(0.0));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                a[(i, i)] = c((gamma + gamma_ng) / 2.0);
                continue;
            }
            let r = emitters[j].position - emitters[i].position;
            a[(i, j)] = res
                .entries
                .iter()
                .filter(|m| heaviside(m.group_velocity * r) > 0.0)
                .map(|m| Complex64::from_polar(floquet1d::resonance_rate(m) * heaviside(m.group_velocity * r), m.unfolded_k * r))
                .sum();
        }
    }
    Ok(CouplingMatrix {
        a,
        gamma,
        gamma_ng,
        gamma0: gamma0(g0),
    })
}

pub(crate) fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Laser drive in the rotating frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// `δ_L = ω_L - ω_eg` in `Ω_r`.
    pub detuning: f64,
    /// Rabi frequency `Ω_L` in `Γ_0`.
    pub rabi: f64,
    /// Local laser phases `φ_i`.
    pub phases: Vec<f64>,
}

impl DriveSpec {
    pub fn validate(&self, emitters: usize) -> Result<()> {
        require_finite("detuning", self.detuning)?;
        require_finite("rabi", self.rabi)?;
        if self.phases.len() != emitters {
            return Err(Error::validation("phases", "need one phase per emitter"));
        }
        self.phases.iter().try_for_each(|p| require_finite("phases", *p))
    }
}

/// Density matrix of `N` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub DMatrix<Complex64>);

impl DensityMatrix {
    pub fn ground(emitters: usize) -> Self {
        let d = 1 << emitters;
        let mut m = DMatrix::from_element(d, d, c(0.0));
        m[(0, 0)] = c(1.0);
        Self(m)
    }

    pub fn pure(state: &DVector<Complex64>) -> Self {
        Self(state * state.adjoint())
    }

    pub fn emitters(&self) -> usize {
        self.0.nrows().trailing_zeros() as usize
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * c(0.5);
        eigvalsh_complex(h).first().copied().unwrap_or(0.0)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint()).camax()
    }

    /// Excited-state population of emitter `i`.
    pub fn excitation(&self, i: usize) -> f64 {
        let n = self.emitters();
        let bit = 1 << (n - 1 - i);
        (0..self.0.nrows()).filter(|s| s & bit != 0).map(|s| self.0[(s, s)].re).sum()
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.0 - &other.0;
        let h = (&diff + diff.adjoint()) * c(0.5);
        0.5 * eigvalsh_complex(h).iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `UρU†` with `U = ⊗_i diag(1, e^{iφ_i})`, which removes the local
    /// laser phases from a driven steady state.
    pub fn rotate_local_phases(&self, phases: &[f64]) -> DensityMatrix {
        let n = self.emitters();
        let d = self.0.nrows();
        let phase = |s: usize| -> Complex64 {
            let angle: f64 = (0..n).filter(|i| s & (1 << (n - 1 - i)) != 0).map(|i| phases[i]).sum();
            Complex64::from_polar(1.0, angle)
        };
        DensityMatrix(DMatrix::from_fn(d, d, |r, col| phase(r) * self.0[(r, col)] * phase(col).conj()))
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn fidelity_with_pure(&self, psi: &DVector<Complex64>) -> f64 {
        (psi.adjoint() * &self.0 * psi)[(0, 0)].re
    }
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    (&rho.0 * &rho.0).trace().re
}

/// `Λ = |A_12| / (Γ + Γ_ng)`.
pub fn correlation_parameter(a: &CouplingMatrix) -> f64 {
    a.correlation(0, 1)
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.0.nrows() != 4 {
        return Err(Error::validation("rho", "concurrence needs two qubits"));
    }
    let yy = DMatrix::from_row_slice(
        4,
        4,
        &[
            c(0.0), c(0.0), c(0.0), c(-1.0),
            c(0.0), c(0.0), c(1.0), c(0.0),
            c(0.0), c(1.0), c(0.0), c(0.0),
            c(-1.0), c(0.0), c(0.0), c(0.0),
        ],
    );
    let rho_h = (&rho.0 + rho.0.adjoint()) * c(0.5);
    let tilde = &yy * rho_h.map(|z| z.conj()) * &yy;
    let (vals, vecs) = eigh_complex(rho_h);
    let sqrt_rho = &vecs * DMatrix::from_diagonal(&DVector::from_iterator(4, vals.iter().map(|v| c(v.max(0.0).sqrt())))) * vecs.adjoint();
    let m = &sqrt_rho * tilde * &sqrt_rho;
    let m = (&m + m.adjoint()) * c(0.5);
    let mut lambdas: Vec<f64> = eigvalsh_complex(m).iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Dark steady state of an ideal resonantly driven cascade, with emitter 1
/// as the first (most significant) qubit:
/// `|ψ_0⟩ ∝ |gg⟩ + i(Ω_L/Γ_R)(|ge⟩ - |eg⟩)`. Reading the kets with emitter 2
/// first gives the usual `|gg⟩ - i(√2 Ω_L/Γ_R)|S⟩`, `|S⟩ = (|ge⟩ - |eg⟩)/√2`.
pub fn ideal_cascade_state(gamma_r: f64, rabi: f64) -> DVector<Complex64> {
    let norm = (gamma_r * gamma_r / (gamma_r * gamma_r + 2.0 * rabi * rabi)).sqrt();
    let s = Complex64::new(0.0, rabi / gamma_r) * norm;
    DVector::from_vec(vec![c(norm), s, -s, c(0.0)])
}

fn sigma_minus(i: usize, emitters: usize) -> DMatrix<Complex64> {
    let d = 1 << emitters;
    let bit = 1 << (emitters - 1 - i);
    let mut m = DMatrix::from_element(d, d, c(0.0));
    for s in 0..d {
        if s & bit != 0 {
            m[(s & !bit, s)] = c(1.0);
        }
    }
    m
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn emitter_hamiltonian(drive: &DriveSpec, a: &CouplingMatrix) -> DMatrix<Complex64> {
    let n = a.emitters();
    let d = 1 << n;
    let mut h = DMatrix::from_element(d, d, c(0.0));
    let rabi = drive.rabi * a.gamma0;
    for i in 0..n {
        let sm = sigma_minus(i, n);
        let sp = sm.adjoint();
        h -= (&sp * &sm) * c(drive.detuning);
        h += (&sm * Complex64::from_polar(1.0, drive.phases[i]) + &sp * Complex64::from_polar(1.0, -drive.phases[i])) * c(0.5 * rabi);
    }
    h
}

/// Superoperator on row-major `vec(ρ)`, so `vec(XρY) = (X ⊗ Yᵀ) vec(ρ)`.
pub fn liouvillian(drive: &DriveSpec, a: &CouplingMatrix) -> Result<DMatrix<Complex64>> {
    let n = a.emitters();
    if n == 0 || n > MAX_EMITTERS {
        return Err(Error::validation("emitters", format!("need 1..={MAX_EMITTERS} emitters")));
    }
    drive.validate(n)?;
    let d = 1 << n;
    let id = DMatrix::<Complex64>::identity(d, d);
    let h = emitter_hamiltonian(drive, a);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = kron(&h, &id) * minus_i - kron(&id, &h.transpose()) * minus_i;
    let ops: Vec<DMatrix<Complex64>> = (0..n).map(|i| sigma_minus(i, n)).collect();
    for i in 0..n {
        for j in 0..n {
            let aij = if i == j {
                c(a.a[(i, i)].re)
            } else {
                a.a[(i, j)]
            } * a.gamma0;
            if aij == c(0.0) {
                continue;
            }
            let si = &ops[i];
            let sj_dag = ops[j].adjoint();
            let si_dag = si.adjoint();
            let sj = &ops[j];
            // A (σ_i ρ σ_j† - σ_j† σ_i ρ) + h.c.
            l += kron(si, &sj_dag.transpose()) * aij;
            l -= kron(&(&sj_dag * si), &id) * aij;
            l += kron(sj, &si_dag.transpose()) * aij.conj();
            l -= kron(&id, &(&si_dag * sj).transpose()) * aij.conj();
        }
    }
    Ok(l)
}

fn vectorize(rho: &DMatrix<Complex64>) -> Vec<Complex64> {
    let d = rho.nrows();
    (0..d * d).map(|k| rho[(k / d, k % d)]).collect()
}

fn unvectorize(v: &[Complex64], d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |r, col| v[r * d + col])
}

/// Unique fixed point of the Liouvillian, normalized to unit trace.
pub fn steady_state(drive: &DriveSpec, a: &CouplingMatrix) -> Result<DensityMatrix> {
    let l = liouvillian(drive, a)?;
    let d = 1 << a.emitters();
    let svd = l.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Unsupported("singular value decomposition failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let scale = svd.singular_values.max().max(1e-300);
    let dimension = order
        .iter()
        .take_while(|&&k| svd.singular_values[k] <= NULL_SPACE_GAP * scale)
        .count();
    if order.len() > 1 && svd.singular_values[order[1]] <= NULL_SPACE_GAP * scale {
        return Err(Error::Multiplicity { dimension });
    }
    let null: Vec<Complex64> = v_t.row(order[0]).iter().map(|z| z.conj()).collect();
    let mut rho = unvectorize(&null, d);
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * c(0.5);
    Ok(DensityMatrix(rho))
}

/// `‖L(ρ)‖_max`, the residual of a claimed fixed point.
pub fn liouvillian_residual(drive: &DriveSpec, a: &CouplingMatrix, rho: &DensityMatrix) -> Result<f64> {
    let l = liouvillian(drive, a)?;
    let v = DVector::from_vec(vectorize(&rho.0));
    Ok((l * v).camax())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// Integrate the master equation with a fixed coupling matrix.
pub fn evolve_master(
    rho0: &DensityMatrix,
    drive: &DriveSpec,
    a: &CouplingMatrix,
    duration: f64,
    dt: f64,
    record_every: usize,
) -> Result<MasterTrajectory> {
    let l = liouvillian(drive, a)?;
    evolve_with(rho0, |_| Ok(l.clone()), duration, dt, record_every)
}

/// Integrate with a time-dependent coupling matrix.
pub fn evolve_master_with<F>(
    rho0: &DensityMatrix,
    drive: &DriveSpec,
    coupling: F,
    duration: f64,
    dt: f64,
    record_every: usize,
) -> Result<MasterTrajectory>
where
    F: Fn(f64) -> Result<CouplingMatrix>,
{
    evolve_with(rho0, |t| liouvillian(drive, &coupling(t)?), duration, dt, record_every)
}

fn evolve_with<F>(rho0: &DensityMatrix, generator: F, duration: f64, dt: f64, record_every: usize) -> Result<MasterTrajectory>
where
    F: Fn(f64) -> Result<DMatrix<Complex64>>,
{
    require_positive("duration", duration)?;
    require_positive("dt", dt)?;
    let d = rho0.0.nrows();
    let steps = (duration / dt).ceil() as usize;
    let h = duration / steps as f64;
    let stride = record_every.max(1);
    let mut y = vectorize(&rho0.0);
    let mut traj = MasterTrajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        max_trace_error: (rho0.trace() - c(1.0)).norm(),
        max_hermiticity_error: rho0.hermiticity_error(),
        min_eigenvalue: rho0.min_eigenvalue(),
    };
    for n in 0..steps {
        let t = n as f64 * h;
        // Generators are evaluated at the RK4 nodes t, t+h/2, t+h.
        let nodes = [generator(t)?, generator(t + 0.5 * h)?, generator(t + h)?];
        let f = |s: f64, v: &[Complex64]| -> Vec<Complex64> {
            let idx = if s <= t + 0.25 * h {
                0
            } else if s <= t + 0.75 * h {
                1
            } else {
                2
            };
            let x = DVector::from_column_slice(v);
            (&nodes[idx] * x).iter().copied().collect()
        };
        y = rk4(&f, t, &y, h);
        if (n + 1) % stride == 0 || n + 1 == steps {
            let rho = DensityMatrix(unvectorize(&y, d));
            let min = rho.min_eigenvalue();
            traj.max_trace_error = traj.max_trace_error.max((rho.trace() - c(1.0)).norm());
            traj.max_hermiticity_error = traj.max_hermiticity_error.max(rho.hermiticity_error());
            traj.min_eigenvalue = traj.min_eigenvalue.min(min);
            if min < -POSITIVITY_LIMIT {
                return Err(Error::Positivity { min_eigenvalue: min });
            }
            traj.times.push(t + h);
            traj.states.push(rho);
        }
    }
    Ok(traj)
}

/// Settings of the acoustic ramp protocol: two resonantly driven emitters,
/// a right-moving wave switched on with a raised-cosine ramp over
/// `[ramp_start, ramp_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampProtocol {
    pub v_a: f64,
    pub omega: f64,
    pub detuning: f64,
    pub coupling: f64,
    /// In `Γ_0`.
    pub gamma_ng: f64,
    /// Rabi frequency in units of the final guided rate `Γ`.
    pub rabi_over_gamma: f64,
    pub separation: f64,
    pub ramp_start: f64,
    pub ramp_end: f64,
    pub duration: f64,
    pub dt: f64,
    /// Amplitudes tabulated for the quasi-static `A_ij(t)`.
    pub table_points: usize,
    pub record_every: usize,
}

impl RampProtocol {
    pub fn amplitude(&self, t: f64) -> f64 {
        if t <= self.ramp_start {
            0.0
        } else if t >= self.ramp_end {
            self.v_a
        } else {
            let s = (t - self.ramp_start) / (self.ramp_end - self.ramp_start);
            self.v_a * 0.5 * (1.0 - (std::f64::consts::PI * s).cos())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampOutcome {
    pub times: Vec<f64>,
    pub potential: Vec<f64>,
    pub purity: Vec<f64>,
    pub concurrence: Vec<f64>,
    pub correlation: Vec<f64>,
    /// Rabi frequency used, in `Γ_0`.
    pub rabi: f64,
    pub phases: Vec<f64>,
}

/// Coupling matrices on an amplitude grid for two emitters.
pub fn coupling_table(
    potentials: &[f64],
    omega: f64,
    detuning: f64,
    emitters: &[EmitterSpec],
    gamma_ng: f64,
) -> Result<Vec<CouplingMatrix>> {
    let grid = floquet1d::zone_grid(floquet1d::DEFAULT_K_POINTS);
    potentials
        .par_iter()
        .map(|&v_a| {
            let spec = LatticeSpec1D::homogeneous(v_a, omega);
            let bands = floquet1d::quasi_energy_bands(&spec, &grid, None)?;
            let res = floquet1d::find_resonances(detuning, &bands);
            coupling_matrix(emitters, &res, gamma_ng)
        })
        .collect()
}

fn interpolate(table: &[CouplingMatrix], potentials: &[f64], v_a: f64) -> CouplingMatrix {
    let last = potentials.len() - 1;
    let span = potentials[last] - potentials[0];
    let pos = if span > 0.0 {
        ((v_a - potentials[0]) / span * last as f64).clamp(0.0, last as f64)
    } else {
        0.0
    };
    let i = (pos.floor() as usize).min(last.saturating_sub(1));
    let w = if last == 0 { 0.0 } else { pos - i as f64 };
    let j = (i + 1).min(last);
    let (a, b) = (&table[i], &table[j]);
    CouplingMatrix {
        a: &a.a * c(1.0 - w) + &b.a * c(w),
        gamma: a.gamma * (1.0 - w) + b.gamma * w,
        gamma_ng: a.gamma_ng,
        gamma0: a.gamma0,
    }
}

/// Run the ramp protocol from the ground state, returning purity, concurrence
/// and `Λ` along the way.
pub fn run_ramp_protocol(p: &RampProtocol) -> Result<RampOutcome> {
    if p.table_points < 2 {
        return Err(Error::validation("table_points", "need at least two entries"));
    }
    if p.ramp_end <= p.ramp_start {
        return Err(Error::validation("ramp_end", "must follow ramp_start"));
    }
    let emitters = [
        EmitterSpec::new(0.0, p.detuning, p.coupling),
        EmitterSpec::new(p.separation, p.detuning, p.coupling),
    ];
    let potentials: Vec<f64> = (0..p.table_points)
        .map(|i| p.v_a * i as f64 / (p.table_points - 1) as f64)
        .collect();
    let table = coupling_table(&potentials, p.omega, p.detuning, &emitters, p.gamma_ng)?;
    let last = table.last().expect("table is non-empty");
    let rabi = p.rabi_over_gamma * last.gamma;
    let drive = DriveSpec {
        detuning: 0.0,
        rabi,
        phases: last.compensating_phases(),
    };
    let traj = evolve_master_with(
        &DensityMatrix::ground(2),
        &drive,
        |t| Ok(interpolate(&table, &potentials, p.amplitude(t))),
        p.duration,
        p.dt,
        p.record_every,
    )?;
    let mut out = RampOutcome {
        times: traj.times.clone(),
        potential: Vec::with_capacity(traj.times.len()),
        purity: Vec::with_capacity(traj.times.len()),
        concurrence: Vec::with_capacity(traj.times.len()),
        correlation: Vec::with_capacity(traj.times.len()),
        rabi,
        phases: drive.phases.clone(),
    };
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let v = p.amplitude(*t);
        out.potential.push(v);
        out.purity.push(purity(rho));
        out.concurrence.push(concurrence(rho)?);
        out.correlation.push(correlation_parameter(&interpolate(&table, &potentials, v)));
    }
    Ok(out)
}

/// Steady-state concurrence averaged over emitter separations, with the
/// Rabi frequency fixed relative to `Γ` and phases compensated per separation.
pub fn averaged_concurrence(
    v_a: f64,
    omega: f64,
    detuning: f64,
    coupling: f64,
    gamma_ng: f64,
    rabi_over_gamma: f64,
    separations: &[f64],
) -> Result<f64> {
    if separations.is_empty() {
        return Err(Error::validation("separations", "need at least one separation"));
    }
    let spec = LatticeSpec1D::homogeneous(v_a, omega);
    let bands = floquet1d::quasi_energy_bands(&spec, &floquet1d::zone_grid(floquet1d::DEFAULT_K_POINTS), None)?;
    let res = floquet1d::find_resonances(detuning, &bands);
    let mut total = 0.0;
    for &d in separations {
        let emitters = [EmitterSpec::new(0.0, detuning, coupling), EmitterSpec::new(d, detuning, coupling)];
        let a = coupling_matrix(&emitters, &res, gamma_ng)?;
        if a.gamma <= 0.0 {
            continue;
        }
        let drive = DriveSpec {
            detuning: 0.0,
            rabi: rabi_over_gamma * a.gamma,
            phases: a.compensating_phases(),
        };
        total += concurrence(&steady_state(&drive, &a)?)?;
    }
    Ok(total / separations.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowering_operator_acts_on_the_right_qubit() {
        let s0 = sigma_minus(0, 2);
        // |eg⟩ = index 2 -> |gg⟩
        assert_eq!(s0[(0, 2)], c(1.0));
        let s1 = sigma_minus(1, 2);
        assert_eq!(s1[(0, 1)], c(1.0));
    }

    #[test]
    fn single_emitter_decays_at_the_total_rate() {
        let mut a = DMatrix::from_element(1, 1, c(0.0));
        a[(0, 0)] = c(0.5 * 1.1);
        let cm = CouplingMatrix {
            a,
            gamma: 1.0,
            gamma_ng: 0.1,
            gamma0: 1.0,
        };
        let mut rho = DensityMatrix::ground(1);
        rho.0[(0, 0)] = c(0.0);
        rho.0[(1, 1)] = c(1.0);
        let drive = DriveSpec {
            detuning: 0.0,
            rabi: 0.0,
            phases: vec![0.0],
        };
        let traj = evolve_master(&rho, &drive, &cm, 2.0, 1e-3, 2000).unwrap();
        let p = traj.states.last().unwrap().excitation(0);
        assert!((p - (-1.1f64 * 2.0).exp()).abs() < 1e-10);
    }

    #[test]
    fn ideal_state_is_normalized() {
        let psi = ideal_cascade_state(1.0, 1.3);
        assert!((psi.norm() - 1.0).abs() < 1e-14);
    }
}
