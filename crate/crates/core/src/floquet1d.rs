//! One-dimensional Bloch-Floquet band structure of a photonic waveguide under a
//! travelling acoustic index modulation, optionally on top of a static
//! superlattice, and the resulting directional Born-Markov emission rates.
//!
//! Units follow [`crate::scales`]: `k_a = 2π`, energies in `E_r = ħΩ_r`,
//! quasi-energies measured from the cutoff `ω_c`.
//!
//! Two matrix representations are used:
//!
//! * homogeneous waveguide: one index `ℓ` labels both the spatial and the
//!   temporal harmonic, diagonal `(ℓ + k/k_a)² - Ωℓ`, coupling `V_a/2` between
//!   neighbours;
//! * superlattice: independent indices `(ℓ, ν)`, diagonal `(ν + k/k_a)² - Ωℓ`,
//!   coupling `V_st/2` for `|ν-ν'| = M` at equal `ℓ` and `V_a/2` for
//!   `ℓ-ℓ' = ν-ν' = ±1`.
//!
//! Resonances are collected per eigen-branch `j` and harmonic channel: in the
//! homogeneous representation every harmonic `ℓ` of every eigenvector is a
//! channel (frequency `ω̃_j + Ωℓ`, weight `|u^(ℓ)|²`, unfolded wavevector
//! `k + k_a ℓ`). In the superlattice representation the Floquet copies are all
//! present in the spectrum, so only the `ℓ = 0` channel is used and the
//! coupling is the Bloch amplitude at the emitter position.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonnegative, Error, Result};
use crate::linalg::eigh_real;
use crate::scales::{scaled_miniband, ScaledMiniband, K_A};

/// Resonances with `|v_g|` below this value (in `λΩ_r`) are flagged.
pub const VELOCITY_FLOOR: f64 = 1e-3;
/// Bisection target for `|ω̃(k_μ) - ω_eg|`.
pub const RESONANCE_TOLERANCE: f64 = 1e-10;
/// Default number of k intervals across the zone.
pub const DEFAULT_K_POINTS: usize = 2048;
/// Channels whose weight stays below this value on both sides of a crossing
/// are not refined.
pub const NEGLIGIBLE_WEIGHT: f64 = 1e-12;
/// Maximum `|D|` reported by [`directionality_map`].
pub const DIRECTIONALITY_CLIP: f64 = 10.0;

const CERTIFY_TOLERANCE: f64 = 1e-8;
const CERTIFY_EIGENVALUES: usize = 5;
const MIN_L_MAX: usize = 8;
const MAX_L_MAX: usize = 128;
const MAX_NU_MAX: usize = 64;
const EDGE_BAND: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec1D {
    /// Acoustic amplitude `V_a / E_r`.
    pub v_a: f64,
    /// Acoustic frequency `Ω / Ω_r` (sign sets the propagation direction).
    pub omega: f64,
    /// Static amplitude `V_st / E_r` (0 for a homogeneous waveguide).
    #[serde(default)]
    pub v_st: f64,
    /// `M = k_st / k_a`.
    #[serde(default = "one")]
    pub period_ratio: usize,
    /// Emitter position in `λ`, only relevant when `v_st > 0`.
    #[serde(default)]
    pub emitter_position: f64,
}

fn one() -> usize {
    1
}

impl LatticeSpec1D {
    pub fn homogeneous(v_a: f64, omega: f64) -> Self {
        Self {
            v_a,
            omega,
            v_st: 0.0,
            period_ratio: 1,
            emitter_position: 0.0,
        }
    }

    pub fn superlattice(v_a: f64, omega: f64, v_st: f64, period_ratio: usize, x: f64) -> Self {
        Self {
            v_a,
            omega,
            v_st,
            period_ratio,
            emitter_position: x,
        }
    }

    pub fn is_superlattice(&self) -> bool {
        self.v_st != 0.0
    }

    pub fn validate(&self) -> Result<()> {
        require_nonnegative("v_a", self.v_a)?;
        require_nonnegative("v_st", self.v_st)?;
        require_finite("omega", self.omega)?;
        require_finite("emitter_position", self.emitter_position)?;
        if self.period_ratio == 0 {
            return Err(Error::validation("period_ratio", "must be a positive integer"));
        }
        Ok(())
    }
}

/// Floquet matrix of the homogeneous waveguide at Bloch wavevector `k`
/// (in `1/λ`), of dimension `2 l_max + 1`, index `ℓ + l_max`.
pub fn build_floquet_matrix(k: f64, v_a: f64, omega: f64, l_max: usize) -> DMatrix<f64> {
    let n = 2 * l_max + 1;
    let kappa = k / K_A;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let l = i as f64 - l_max as f64;
        m[(i, i)] = (l + kappa).powi(2) - omega * l;
        if i + 1 < n {
            m[(i, i + 1)] = v_a / 2.0;
            m[(i + 1, i)] = v_a / 2.0;
        }
    }
    m
}

/// Floquet matrix with a static superlattice, index `(ℓ + l_max)(2ν_max+1) + ν + ν_max`.
pub fn build_superlattice_matrix(k: f64, spec: &LatticeSpec1D, l_max: usize, nu_max: usize) -> DMatrix<f64> {
    let basis = Basis::Superlattice {
        l_max,
        nu_max,
        period_ratio: spec.period_ratio,
    };
    basis.matrix(k, spec)
}

/// Truncated harmonic basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    Homogeneous { l_max: usize },
    Superlattice { l_max: usize, nu_max: usize, period_ratio: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Homogeneous { l_max } => 2 * l_max + 1,
            Basis::Superlattice { l_max, nu_max, .. } => (2 * l_max + 1) * (2 * nu_max + 1),
        }
    }

    pub fn l_max(&self) -> usize {
        match *self {
            Basis::Homogeneous { l_max } | Basis::Superlattice { l_max, .. } => l_max,
        }
    }

    /// Floquet (temporal) harmonic of basis state `i`.
    pub fn floquet_index(&self, i: usize) -> i64 {
        match *self {
            Basis::Homogeneous { l_max } => i as i64 - l_max as i64,
            Basis::Superlattice { l_max, nu_max, .. } => (i / (2 * nu_max + 1)) as i64 - l_max as i64,
        }
    }

    /// Spatial harmonic of basis state `i` (in units of `k_a`).
    pub fn spatial_index(&self, i: usize) -> i64 {
        match *self {
            Basis::Homogeneous { l_max } => i as i64 - l_max as i64,
            Basis::Superlattice { nu_max, .. } => (i % (2 * nu_max + 1)) as i64 - nu_max as i64,
        }
    }

    fn index(&self, l: i64, nu: i64) -> Option<usize> {
        match *self {
            Basis::Homogeneous { l_max } => {
                let l_max = l_max as i64;
                (l.abs() <= l_max).then(|| (l + l_max) as usize)
            }
            Basis::Superlattice { l_max, nu_max, .. } => {
                let (lm, nm) = (l_max as i64, nu_max as i64);
                (l.abs() <= lm && nu.abs() <= nm).then(|| ((l + lm) * (2 * nm + 1) + nu + nm) as usize)
            }
        }
    }

    fn is_edge(&self, i: usize) -> bool {
        let near = |idx: i64, max: usize| idx.unsigned_abs() as usize + EDGE_BAND > max;
        match *self {
            Basis::Homogeneous { l_max } => near(self.floquet_index(i), l_max),
            Basis::Superlattice { l_max, nu_max, .. } => {
                near(self.floquet_index(i), l_max) || near(self.spatial_index(i), nu_max)
            }
        }
    }

    pub fn matrix(&self, k: f64, spec: &LatticeSpec1D) -> DMatrix<f64> {
        match *self {
            Basis::Homogeneous { l_max } => build_floquet_matrix(k, spec.v_a, spec.omega, l_max),
            Basis::Superlattice { period_ratio, .. } => {
                let n = self.dim();
                let kappa = k / K_A;
                let m_step = period_ratio as i64;
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    let l = self.floquet_index(i);
                    let nu = self.spatial_index(i);
                    m[(i, i)] = (nu as f64 + kappa).powi(2) - spec.omega * l as f64;
                    if let Some(j) = self.index(l, nu + m_step) {
                        m[(i, j)] += spec.v_st / 2.0;
                        m[(j, i)] += spec.v_st / 2.0;
                    }
                    if let Some(j) = self.index(l + 1, nu + 1) {
                        m[(i, j)] += spec.v_a / 2.0;
                        m[(j, i)] += spec.v_a / 2.0;
                    }
                }
                m
            }
        }
    }

    /// Hellmann-Feynman group velocity `Σ |u_i|² 2(n_i + k/k_a)/k_a` of a unit
    /// eigenvector, with `n_i` the spatial index.
    pub fn group_velocity(&self, vector: &[f64], k: f64) -> f64 {
        let kappa = k / K_A;
        vector
            .iter()
            .enumerate()
            .map(|(i, u)| u * u * 2.0 * (self.spatial_index(i) as f64 + kappa) / K_A)
            .sum()
    }

    fn edge_weight(&self, vector: &[f64]) -> f64 {
        vector
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_edge(*i))
            .map(|(_, u)| u * u)
            .sum()
    }
}

/// Eigenpairs of the truncated Floquet matrix at a single `k`, ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub k: f64,
    pub values: Vec<f64>,
    /// Column `j` is the eigenvector of `values[j]`.
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

}

pub fn solve_at(spec: &LatticeSpec1D, basis: &Basis, k: f64) -> Eigensystem {
    let matrix = basis.matrix(k, spec);
    let (values, vectors) = match *basis {
        Basis::Superlattice { period_ratio, .. } if period_ratio > 1 => block_eigh(basis, matrix, period_ratio),
        _ => eigh_real(matrix),
    };
    Eigensystem { k, values, vectors }
}

/// The superlattice matrix conserves `(ν - ℓ) mod M`; diagonalize each sector
/// separately and merge.
fn block_eigh(basis: &Basis, matrix: DMatrix<f64>, period_ratio: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = basis.dim();
    let m = period_ratio as i64;
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for sector in 0..m {
        let members: Vec<usize> = (0..n)
            .filter(|&i| (basis.spatial_index(i) - basis.floquet_index(i)).rem_euclid(m) == sector)
            .collect();
        if members.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(members.len(), members.len(), |r, c| matrix[(members[r], members[c])]);
        let (vals, vecs) = eigh_real(sub);
        for (j, val) in vals.into_iter().enumerate() {
            let mut full = vec![0.0; n];
            for (r, &i) in members.iter().enumerate() {
                full[i] = vecs[(r, j)];
            }
            pairs.push((val, full));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| pairs[c].1[r]);
    (values, vectors)
}

/// Record of the truncation test that accepted a basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub basis: Basis,
    /// Largest relative change of the compared eigenvalues when the cutoffs
    /// were raised by two.
    pub discrepancy: f64,
    pub compared_l_max: usize,
    pub compared_nu_max: usize,
}

fn is_physical(basis: &Basis, vector: &[f64]) -> bool {
    match basis {
        Basis::Homogeneous { .. } => basis.edge_weight(vector) < 0.5,
        Basis::Superlattice { .. } => {
            let central: f64 = vector
                .iter()
                .enumerate()
                .filter(|(i, _)| basis.floquet_index(*i) == 0)
                .map(|(_, u)| u * u)
                .sum();
            central > 0.5
        }
    }
}

fn physical_eigenvalues(sample: &BandSample, count: usize) -> Vec<f64> {
    (0..sample.values.len())
        .filter(|&j| sample.physical[j])
        .map(|j| sample.values[j])
        .take(count)
        .collect()
}

fn truncation_discrepancy(spec: &LatticeSpec1D, lo: &Basis, hi: &Basis) -> f64 {
    let samples = [-0.5, -0.3, -0.1, 0.0, 0.2, 0.4];
    let mut worst: f64 = 0.0;
    for s in samples {
        let k = s * K_A;
        let a = physical_eigenvalues(&BandSample::new(spec, lo, &solve_at(spec, lo, k)), CERTIFY_EIGENVALUES);
        let b = physical_eigenvalues(&BandSample::new(spec, hi, &solve_at(spec, hi, k)), CERTIFY_EIGENVALUES);
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        }
    }
    worst
}

fn basis_with(spec: &LatticeSpec1D, l_max: usize, nu_max: usize) -> Basis {
    if spec.is_superlattice() {
        Basis::Superlattice {
            l_max,
            nu_max,
            period_ratio: spec.period_ratio,
        }
    } else {
        Basis::Homogeneous { l_max }
    }
}

/// Find the smallest cutoff (doubling from 8) whose lowest physically weighted
/// eigenvalues agree with those at cutoff + 2. For a superlattice the spatial
/// cutoff is settled first, raised two at a time.
pub fn certify_truncation(spec: &LatticeSpec1D) -> Result<TruncationCertificate> {
    spec.validate()?;
    let mut l_max = MIN_L_MAX;
    let mut nu_max = 0;
    let mut nu_discrepancy: f64 = 0.0;
    if spec.is_superlattice() {
        nu_max = (2 * spec.period_ratio + 4).max(MIN_L_MAX);
        loop {
            let lo = basis_with(spec, l_max, nu_max);
            let hi = basis_with(spec, l_max, nu_max + 2);
            nu_discrepancy = truncation_discrepancy(spec, &lo, &hi);
            if nu_discrepancy < CERTIFY_TOLERANCE {
                break;
            }
            if nu_max + 2 > MAX_NU_MAX {
                return Err(Error::Convergence {
                    what: "superlattice spatial harmonics".into(),
                    discrepancy: nu_discrepancy,
                    cutoff_lo: nu_max,
                    cutoff_hi: nu_max + 2,
                });
            }
            nu_max += 2;
        }
    }
    loop {
        let lo = basis_with(spec, l_max, nu_max);
        let hi = basis_with(spec, l_max + 2, nu_max);
        let discrepancy = truncation_discrepancy(spec, &lo, &hi);
        if discrepancy < CERTIFY_TOLERANCE {
            return Ok(TruncationCertificate {
                basis: lo,
                discrepancy: discrepancy.max(nu_discrepancy),
                compared_l_max: l_max + 2,
                compared_nu_max: if spec.is_superlattice() { nu_max + 2 } else { 0 },
            });
        }
        if 2 * l_max > MAX_L_MAX {
            return Err(Error::Convergence {
                what: "Floquet quasi-energies".into(),
                discrepancy,
                cutoff_lo: l_max,
                cutoff_hi: l_max + 2,
            });
        }
        l_max *= 2;
    }
}

/// Uniform grid of `intervals + 1` points covering `[-k_a/2, k_a/2]`.
pub fn zone_grid(intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| -PI + K_A * i as f64 / intervals as f64)
        .collect()
}

/// Per-branch quantities kept from one diagonalization.
#[derive(Debug, Clone)]
pub struct BandSample {
    pub k: f64,
    pub values: Vec<f64>,
    /// Hellmann-Feynman group velocity of each branch.
    pub velocities: Vec<f64>,
    edge: Vec<bool>,
    physical: Vec<bool>,
    /// `|ḡ/g|²` of branch `j` in channel `c`, at `j * channels + c`.
    weights: Vec<f64>,
    channels: usize,
}

impl BandSample {
    pub fn new(spec: &LatticeSpec1D, basis: &Basis, system: &Eigensystem) -> Self {
        let chans = channels(spec, basis);
        let n = system.values.len();
        let mut sample = Self {
            k: system.k,
            values: system.values.clone(),
            velocities: Vec::with_capacity(n),
            edge: Vec::with_capacity(n),
            physical: Vec::with_capacity(n),
            weights: Vec::with_capacity(n * chans.len()),
            channels: chans.len(),
        };
        for j in 0..n {
            let v = system.vector(j);
            sample.velocities.push(basis.group_velocity(&v, system.k));
            sample.edge.push(basis.edge_weight(&v) > 0.5);
            sample.physical.push(is_physical(basis, &v));
            for ch in &chans {
                sample
                    .weights
                    .push(channel_amplitude(basis, spec, &v, ch.harmonic).norm_sqr());
            }
        }
        sample
    }

    /// True when the eigenvector sits mostly on the outermost harmonics and
    /// is therefore a truncation artefact.
    pub fn is_edge_state(&self, j: usize) -> bool {
        self.edge[j]
    }

    fn weight(&self, j: usize, channel: usize) -> f64 {
        self.weights[j * self.channels + channel]
    }
}

/// Quasi-energies and per-branch data on a k grid.
#[derive(Debug, Clone)]
pub struct FloquetBands {
    pub spec: LatticeSpec1D,
    pub certificate: TruncationCertificate,
    pub k_grid: Vec<f64>,
    pub samples: Vec<BandSample>,
}

impl FloquetBands {
    pub fn basis(&self) -> &Basis {
        &self.certificate.basis
    }

    pub fn branch_count(&self) -> usize {
        self.basis().dim()
    }

    /// Lowest quasi-energy over the grid among non-artefact eigenvectors.
    pub fn band_floor(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| physical_eigenvalues(s, 1).first().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Compute all quasi-energy bands on `k_grid`. With `truncation = None` the
/// cutoff is chosen and certified by [`certify_truncation`].
pub fn quasi_energy_bands(
    spec: &LatticeSpec1D,
    k_grid: &[f64],
    truncation: Option<TruncationCertificate>,
) -> Result<FloquetBands> {
    spec.validate()?;
    let certificate = match truncation {
        Some(c) => c,
        None => certify_truncation(spec)?,
    };
    let basis = certificate.basis;
    let samples = k_grid
        .par_iter()
        .map(|&k| BandSample::new(spec, &basis, &solve_at(spec, &basis, k)))
        .collect();
    Ok(FloquetBands {
        spec: *spec,
        certificate,
        k_grid: k_grid.to_vec(),
        samples,
    })
}

/// Hellmann-Feynman group velocity of branch `j` at grid point `k_index`.
pub fn group_velocity(bands: &FloquetBands, j: usize, k_index: usize) -> f64 {
    bands.samples[k_index].velocities[j]
}

/// One resonant mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    /// Bloch wavevector in the zone, `1/λ`.
    pub k: f64,
    /// Wavevector of the resonant harmonic `k + k_a ℓ`, used for propagation
    /// phases.
    pub unfolded_k: f64,
    /// Eigen-branch index (ascending order of the truncated spectrum).
    pub branch: usize,
    /// Floquet harmonic of the resonant channel.
    pub harmonic: i64,
    /// Coupling amplitude `ḡ_μ / g`.
    pub amplitude: Complex64,
    /// `|ḡ_μ/g|²`
    pub weight: f64,
    /// `ṽ_g` in `λ Ω_r`.
    pub group_velocity: f64,
    /// Residual `ω̃ + Ωℓ - ω_eg` after refinement.
    pub residual: f64,
    /// `|ṽ_g|` below [`VELOCITY_FLOOR`].
    pub near_divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    /// `δ = ω_eg - ω_c` in `Ω_r`.
    pub detuning: f64,
    pub entries: Vec<Resonance>,
}

impl ResonanceSet {
    pub fn flagged(&self) -> impl Iterator<Item = &Resonance> {
        self.entries.iter().filter(|r| r.near_divergent)
    }

    /// Error when any flagged resonance carries non-negligible weight.
    pub fn require_markov_valid(&self) -> Result<()> {
        let bad: Vec<&Resonance> = self.flagged().filter(|r| r.weight > 1e-8).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NearDivergent {
                count: bad.len(),
                floor: VELOCITY_FLOOR,
                smallest: bad.iter().map(|r| r.group_velocity.abs()).fold(f64::INFINITY, f64::min),
            })
        }
    }
}

/// A resonance channel: frequency offset and coupling amplitude of one
/// harmonic of an eigenvector.
struct Channel {
    harmonic: i64,
    shift: f64,
}

fn channels(spec: &LatticeSpec1D, basis: &Basis) -> Vec<Channel> {
    let omega = spec.omega;
    match *basis {
        Basis::Homogeneous { l_max } => {
            let l = l_max as i64;
            (-l..=l)
                .map(|h| Channel {
                    harmonic: h,
                    shift: omega * h as f64,
                })
                .collect()
        }
        Basis::Superlattice { .. } => vec![Channel { harmonic: 0, shift: 0.0 }],
    }
}

fn channel_amplitude(basis: &Basis, spec: &LatticeSpec1D, vector: &[f64], harmonic: i64) -> Complex64 {
    match basis {
        Basis::Homogeneous { l_max } => {
            let i = (harmonic + *l_max as i64) as usize;
            Complex64::new(vector[i], 0.0)
        }
        Basis::Superlattice { .. } => vector
            .iter()
            .enumerate()
            .filter(|(i, _)| basis.floquet_index(*i) == harmonic)
            .map(|(i, u)| {
                let phase = K_A * basis.spatial_index(i) as f64 * spec.emitter_position;
                Complex64::from_polar(*u, phase)
            })
            .sum(),
    }
}

/// Locate every crossing of `ω̃_j(k) + Ωℓ = ω_eg` on the grid and refine it.
pub fn find_resonances(detuning: f64, bands: &FloquetBands) -> ResonanceSet {
    let basis = *bands.basis();
    let spec = bands.spec;
    let channels = channels(&spec, &basis);
    let n_branch = bands.branch_count();
    let grid = &bands.samples;

    let mut brackets: Vec<(usize, usize, &Channel)> = Vec::new();
    for j in 0..n_branch {
        for (c, ch) in channels.iter().enumerate() {
            for i in 0..grid.len().saturating_sub(1) {
                let fa = grid[i].values[j] + ch.shift - detuning;
                let fb = grid[i + 1].values[j] + ch.shift - detuning;
                let crosses = (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) || fa == 0.0;
                if !crosses {
                    continue;
                }
                if grid[i].is_edge_state(j) && grid[i + 1].is_edge_state(j) {
                    continue;
                }
                if grid[i].weight(j, c) < NEGLIGIBLE_WEIGHT && grid[i + 1].weight(j, c) < NEGLIGIBLE_WEIGHT {
                    continue;
                }
                brackets.push((j, i, ch));
            }
        }
    }

    let entries = brackets
        .par_iter()
        .map(|&(j, i, ch)| {
            let (k, system) = refine(&spec, &basis, j, ch.shift - detuning, &grid[i], &grid[i + 1]);
            let vector = system.vector(j);
            let amplitude = channel_amplitude(&basis, &spec, &vector, ch.harmonic);
            let velocity = basis.group_velocity(&vector, k);
            Resonance {
                k,
                unfolded_k: k + K_A * ch.harmonic as f64,
                branch: j,
                harmonic: ch.harmonic,
                amplitude,
                weight: amplitude.norm_sqr(),
                group_velocity: velocity,
                residual: system.values[j] + ch.shift - detuning,
                near_divergent: velocity.abs() < VELOCITY_FLOOR,
            }
        })
        .filter(|r| r.weight >= NEGLIGIBLE_WEIGHT)
        .collect();
    ResonanceSet { detuning, entries }
}

/// Illinois-modified regula falsi on the sorted branch `j`.
fn refine(
    spec: &LatticeSpec1D,
    basis: &Basis,
    j: usize,
    offset: f64,
    left: &BandSample,
    right: &BandSample,
) -> (f64, Eigensystem) {
    let (mut a, mut b) = (left.k, right.k);
    let mut fa = left.values[j] + offset;
    let mut fb = right.values[j] + offset;
    if fa == 0.0 {
        return (a, solve_at(spec, basis, a));
    }
    let mut side = 0i8;
    let mut best = solve_at(spec, basis, if fa.abs() < fb.abs() { a } else { b });
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let sys = solve_at(spec, basis, c);
        let fc = sys.values[j] + offset;
        if fc.abs() < (best.values[j] + offset).abs() {
            best = sys.clone();
        }
        if fc.abs() < RESONANCE_TOLERANCE || (b - a).abs() < 1e-14 {
            return (c, sys);
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    (best.k, best)
}

/// Directional rates in units of `Γ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionRates {
    pub gamma_r: f64,
    pub gamma_l: f64,
    /// `(Γ_R - Γ_L)/Γ_0`
    pub directionality: f64,
    /// `Γ_0 = 4π g_0²` in `Ω_r`, to convert the rates to absolute values.
    pub gamma0: f64,
}

impl EmissionRates {
    pub fn total(&self) -> f64 {
        self.gamma_r + self.gamma_l
    }

    fn from_parts(gamma_r: f64, gamma_l: f64, g0: f64) -> Self {
        Self {
            gamma_r,
            gamma_l,
            directionality: gamma_r - gamma_l,
            gamma0: crate::scales::gamma0(g0),
        }
    }
}

/// Contribution `|ḡ/g|²/(4π|ṽ_g|)` of one resonance, in `Γ_0`.
pub fn resonance_rate(r: &Resonance) -> f64 {
    r.weight / (4.0 * PI * r.group_velocity.abs())
}

/// Born-Markov rates `Γ_{R,L} = Σ |ḡ_μ|²/|ṽ_g,μ| θ(±ṽ_g,μ)`. Refuses when a
/// weighted resonance sits at a band extremum.
pub fn emission_rates(res: &ResonanceSet, g0: f64) -> Result<EmissionRates> {
    res.require_markov_valid()?;
    Ok(rates_unchecked(res, g0, 0.0))
}

/// Like [`emission_rates`] but includes flagged resonances with `|ṽ_g|`
/// clamped to `floor`.
pub fn rates_unchecked(res: &ResonanceSet, g0: f64, floor: f64) -> EmissionRates {
    let (mut right, mut left) = (0.0, 0.0);
    for r in &res.entries {
        let v = r.group_velocity.abs().max(floor);
        if v == 0.0 {
            continue;
        }
        let rate = r.weight / (4.0 * PI * v);
        if r.group_velocity > 0.0 {
            right += rate;
        } else {
            left += rate;
        }
    }
    EmissionRates::from_parts(right, left, g0)
}

/// Convenience: certified bands on the default grid, resonances and rates.
pub fn rates_at(spec: &LatticeSpec1D, detuning: f64) -> Result<(ResonanceSet, EmissionRates)> {
    let bands = quasi_energy_bands(spec, &zone_grid(DEFAULT_K_POINTS), None)?;
    let res = find_resonances(detuning, &bands);
    let rates = emission_rates(&res, 0.0)?;
    Ok((res, rates))
}

/// Total decay rate in a slow-light superlattice, in units of the bare `Γ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowLightRates {
    /// Full superlattice Floquet problem with position-dependent couplings.
    pub born_markov: f64,
    /// Homogeneous Floquet problem with the tight-binding miniband mass.
    pub effective_mass: f64,
    pub miniband: ScaledMiniband,
}

/// Both Markov estimates of the decay rate for a superlattice `spec`.
pub fn slow_light_rates(spec: &LatticeSpec1D, detuning: f64) -> Result<SlowLightRates> {
    if !spec.is_superlattice() {
        return Err(Error::validation("v_st", "needs a static lattice"));
    }
    let (_, full) = rates_at(spec, detuning)?;
    let miniband = scaled_miniband(spec.v_st, spec.period_ratio)?;
    let ratio = miniband.recoil_ratio;
    let effective = LatticeSpec1D::homogeneous(spec.v_a / ratio, spec.omega / ratio);
    let (_, rates) = rates_at(&effective, (detuning - miniband.bottom) / ratio)?;
    Ok(SlowLightRates {
        born_markov: full.total(),
        effective_mass: rates.total() / ratio,
        miniband,
    })
}

/// Which parameter varies along the second axis of a directionality map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapAxis {
    /// Vary `V_a/E_r` at fixed `Ω`.
    Potential,
    /// Vary `Ω/Ω_r` at fixed `V_a`.
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    Ok,
    /// No resonance: detuning below the modulated band.
    OutsideBand,
    /// A weighted resonance is near a band extremum; velocity clamped and
    /// `|D|` clipped.
    NearDivergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub detuning: f64,
    pub parameter: f64,
    pub directionality: f64,
    pub gamma_r: f64,
    pub gamma_l: f64,
    pub flag: CellFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalityMap {
    pub axis: MapAxis,
    /// The parameter held fixed (`Ω` for `Potential`, `V_a` for `Frequency`).
    pub fixed: f64,
    pub detunings: Vec<f64>,
    pub parameters: Vec<f64>,
    /// Row-major over `parameters` (outer) then `detunings` (inner).
    pub cells: Vec<MapCell>,
    pub certificates: Vec<TruncationCertificate>,
}

/// D over a grid of detunings and either potential strengths or acoustic
/// frequencies. `D` is clipped to `|D| <= 10` and set to zero where the
/// detuning lies below the modulated band.
pub fn directionality_map(
    axis: MapAxis,
    fixed: f64,
    detunings: &[f64],
    parameters: &[f64],
    k_points: usize,
) -> Result<DirectionalityMap> {
    let grid = zone_grid(k_points);
    let columns: Vec<Result<(TruncationCertificate, Vec<MapCell>)>> = parameters
        .par_iter()
        .map(|&p| {
            let spec = match axis {
                MapAxis::Potential => LatticeSpec1D::homogeneous(p, fixed),
                MapAxis::Frequency => LatticeSpec1D::homogeneous(fixed, p),
            };
            let bands = quasi_energy_bands(&spec, &grid, None)?;
            let floor = bands.band_floor();
            let cells = detunings
                .iter()
                .map(|&d| {
                    if d < floor {
                        return MapCell {
                            detuning: d,
                            parameter: p,
                            directionality: 0.0,
                            gamma_r: 0.0,
                            gamma_l: 0.0,
                            flag: CellFlag::OutsideBand,
                        };
                    }
                    let res = find_resonances(d, &bands);
                    let near = res.require_markov_valid().is_err();
                    let rates = rates_unchecked(&res, 0.0, VELOCITY_FLOOR);
                    let flag = if res.entries.is_empty() {
                        CellFlag::OutsideBand
                    } else if near {
                        CellFlag::NearDivergent
                    } else {
                        CellFlag::Ok
                    };
                    MapCell {
                        detuning: d,
                        parameter: p,
                        directionality: rates
                            .directionality
                            .clamp(-DIRECTIONALITY_CLIP, DIRECTIONALITY_CLIP),
                        gamma_r: rates.gamma_r,
                        gamma_l: rates.gamma_l,
                        flag,
                    }
                })
                .collect();
            Ok((bands.certificate, cells))
        })
        .collect();
    let mut cells = Vec::with_capacity(detunings.len() * parameters.len());
    let mut certificates = Vec::with_capacity(parameters.len());
    for column in columns {
        let (cert, c) = column?;
        certificates.push(cert);
        cells.extend(c);
    }
    Ok(DirectionalityMap {
        axis,
        fixed,
        detunings: detunings.to_vec(),
        parameters: parameters.to_vec(),
        cells,
        certificates,
    })
}
