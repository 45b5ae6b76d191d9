//! Single-excitation dynamics of emitters coupled to a modulated waveguide.
//!
//! * [`Propagator`] / [`evolve_exact`]: split-step propagation of the emitter
//!   amplitudes and the photon field on a periodic grid. The kinetic step is
//!   exact in Fourier space; the potential half-steps treat each emitter and
//!   its grid cell as an exactly exponentiated 2×2 block.
//! * [`evolve_quasistatic`]: Markovian decay with rates looked up from a
//!   [`RateTable`] at the instantaneous acoustic amplitude.
//! * [`comoving_bound_states`]: photonic bound states of a short acoustic pulse
//!   in its rest frame.
//! * [`moving_cavity_evolve`] / [`transfer_scan`]: the single-mode conveyor-belt
//!   model built on the lowest bound state.
//!
//! Units: lengths in `λ`, time in `1/Ω_r`, energies in `E_r`, detunings
//! measured from the cutoff `ω_c`. The field amplitude `φ(x)` is in `1/√λ`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonnegative, require_positive, Error, Result};
use crate::floquet1d::{self, LatticeSpec1D, VELOCITY_FLOOR};
use crate::linalg::eigh_complex;
use crate::scales::{K_A, MASS_OVER_HBAR};

/// Largest accepted `dt · max|H|`.
pub const STEP_LIMIT: f64 = 0.5;
/// Field probability allowed in the outermost `BOUNDARY_GUARD` λ of a domain
/// without absorber.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;
const BOUNDARY_GUARD: f64 = 2.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSpec {
    /// Position in `λ`.
    pub position: f64,
    /// `δ = ω_eg - ω_c` in `Ω_r`.
    pub detuning: f64,
    /// `g_0` in `Ω_r`.
    pub coupling: f64,
    /// Non-guided decay in units of `Γ_0`.
    #[serde(default)]
    pub nonguided_decay: f64,
}

impl EmitterSpec {
    pub fn new(position: f64, detuning: f64, coupling: f64) -> Self {
        Self {
            position,
            detuning,
            coupling,
            nonguided_decay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("position", self.position)?;
        require_finite("detuning", self.detuning)?;
        require_nonnegative("coupling", self.coupling)?;
        require_nonnegative("nonguided_decay", self.nonguided_decay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }
}

/// Envelope of an acoustic pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Envelope {
    /// Continuous wave `V_a cos(k_a x ∓ Ωt)`.
    Constant,
    /// Localized well `-V_a cos(k_a ξ) exp(-ξ²/2Δx²)`, `ξ = x - x_0 ∓ vt`.
    Gaussian { width: f64, center: f64 },
    /// Continuous wave whose amplitude is switched on and off in time with
    /// raised-cosine ramps.
    RampedPlateau {
        start: f64,
        ramp_on: f64,
        hold: f64,
        ramp_off: f64,
    },
}

impl Envelope {
    /// Temporal amplitude factor for the continuous-wave shapes.
    pub fn temporal(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant | Envelope::Gaussian { .. } => 1.0,
            Envelope::RampedPlateau {
                start,
                ramp_on,
                hold,
                ramp_off,
            } => {
                let s = t - start;
                if s <= 0.0 {
                    0.0
                } else if s < ramp_on {
                    0.5 * (1.0 - (PI * s / ramp_on).cos())
                } else if s <= ramp_on + hold {
                    1.0
                } else if s < ramp_on + hold + ramp_off {
                    let r = s - ramp_on - hold;
                    0.5 * (1.0 + (PI * r / ramp_off).cos())
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// `V_a / E_r`.
    pub v_a: f64,
    /// `Ω / Ω_r`; the wave moves at `Ω/k_a`.
    pub omega: f64,
    pub direction: Direction,
    pub envelope: Envelope,
}

impl PulseSpec {
    pub fn speed(&self) -> f64 {
        self.omega / K_A
    }

    pub fn velocity(&self) -> f64 {
        self.direction.sign() * self.speed()
    }

    pub fn validate(&self) -> Result<()> {
        require_nonnegative("v_a", self.v_a)?;
        require_nonnegative("omega", self.omega)?;
        match self.envelope {
            Envelope::Gaussian { width, center } => {
                require_positive("width", width)?;
                require_finite("center", center)
            }
            Envelope::RampedPlateau {
                start,
                ramp_on,
                hold,
                ramp_off,
            } => {
                require_finite("start", start)?;
                require_nonnegative("ramp_on", ramp_on)?;
                require_nonnegative("hold", hold)?;
                require_nonnegative("ramp_off", ramp_off)
            }
            Envelope::Constant => Ok(()),
        }
    }

    pub fn potential(&self, x: f64, t: f64) -> f64 {
        let shift = self.velocity() * t;
        match self.envelope {
            Envelope::Gaussian { width, center } => {
                let xi = x - center - shift;
                -self.v_a * (K_A * xi).cos() * (-xi * xi / (2.0 * width * width)).exp()
            }
            _ => self.v_a * self.envelope.temporal(t) * (K_A * (x - shift)).cos(),
        }
    }

    /// Local amplitude `V_a(t)` felt at position `x`.
    pub fn amplitude_at(&self, x: f64, t: f64) -> f64 {
        match self.envelope {
            Envelope::Gaussian { width, center } => {
                let xi = x - center - self.velocity() * t;
                self.v_a * (-xi * xi / (2.0 * width * width)).exp()
            }
            _ => self.v_a * self.envelope.temporal(t),
        }
    }
}

/// Static lattice `V_st cos(M k_a x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticLattice {
    pub depth: f64,
    pub period_ratio: usize,
}

impl StaticLattice {
    pub fn potential(&self, x: f64) -> f64 {
        self.depth * (K_A * self.period_ratio as f64 * x).cos()
    }
}

/// Uniform periodic grid `x_j = x_min + j dx`, `j < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub dx: f64,
    pub points: usize,
}

impl Grid {
    /// Grid with spacing `dx` covering `[centre - half_width, centre + half_width)`,
    /// rounded up to a power of two.
    pub fn centred(centre: f64, half_width: f64, dx: f64) -> Self {
        let points = ((2.0 * half_width / dx).ceil() as usize).next_power_of_two();
        Self {
            x_min: centre - 0.5 * points as f64 * dx,
            dx,
            points,
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn length(&self) -> f64 {
        self.points as f64 * self.dx
    }

    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let j = ((x - self.x_min) / self.dx).round();
        (j >= 0.0 && (j as usize) < self.points).then_some(j as usize)
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points;
        let dk = K_A / self.length();
        (0..n)
            .map(|i| {
                let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("x_min", self.x_min)?;
        require_positive("dx", self.dx)?;
        if self.points < 8 {
            return Err(Error::validation("points", "grid needs at least 8 points"));
        }
        Ok(())
    }
}

/// Emitter amplitudes plus photon field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationState {
    pub time: f64,
    pub emitters: Vec<Complex64>,
    /// `φ_j` in `1/√λ`.
    pub field: Vec<Complex64>,
    pub grid: Grid,
}

impl ExcitationState {
    /// Emitter `index` excited, field empty.
    pub fn excited(grid: Grid, emitters: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); emitters];
        amps[index] = Complex64::new(1.0, 0.0);
        Self {
            time: 0.0,
            emitters: amps,
            field: vec![Complex64::new(0.0, 0.0); grid.points],
            grid,
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.emitters.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn field_probability(&self) -> f64 {
        self.field.iter().map(|f| f.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    pub fn norm(&self) -> f64 {
        self.populations().iter().sum::<f64>() + self.field_probability()
    }

    /// Field probability on `x > pivot` and `x < pivot`.
    pub fn field_split(&self, pivot: f64) -> (f64, f64) {
        let (mut right, mut left) = (0.0, 0.0);
        for (j, f) in self.field.iter().enumerate() {
            let p = f.norm_sqr() * self.grid.dx;
            if self.grid.x(j) > pivot {
                right += p;
            } else {
                left += p;
            }
        }
        (right, left)
    }
}

/// Settings for [`evolve_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    pub grid: Grid,
    pub dt: f64,
    pub duration: f64,
    /// Record populations every this many steps.
    pub record_stride: usize,
    /// Width in `λ` of the cosine-taper absorbing layer at each edge.
    #[serde(default)]
    pub absorber: Option<f64>,
    /// Store `|φ(x)|²` every this many steps (0 = never).
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Keep every n-th grid point in snapshots.
    #[serde(default = "one")]
    pub snapshot_decimation: usize,
}

fn one() -> usize {
    1
}

/// Sampled history of an exact run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `populations[i][n]` is `|c_e^i|²` at `times[n]`.
    pub populations: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Field probability to the right / left of the first emitter.
    pub field_right: Vec<f64>,
    pub field_left: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub snapshot_positions: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

/// Split-step propagator for a fixed set of emitters, pulses and static
/// potentials on one grid.
pub struct Propagator {
    grid: Grid,
    emitters: Vec<EmitterSpec>,
    cells: Vec<usize>,
    pulses: Vec<PulseSpec>,
    statics: Vec<StaticLattice>,
    kinetic: Vec<f64>,
    mask: Option<Vec<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(
        grid: Grid,
        emitters: &[EmitterSpec],
        pulses: &[PulseSpec],
        statics: &[StaticLattice],
        absorber: Option<f64>,
    ) -> Result<Self> {
        grid.validate()?;
        for e in emitters {
            e.validate()?;
        }
        for p in pulses {
            p.validate()?;
        }
        let mut cells = Vec::with_capacity(emitters.len());
        for e in emitters {
            let cell = grid
                .cell_of(e.position)
                .ok_or_else(|| Error::Domain(format!("emitter at x = {} lies outside the grid", e.position)))?;
            if cells.contains(&cell) {
                return Err(Error::Domain("two emitters share one grid cell".into()));
            }
            cells.push(cell);
        }
        let kinetic = grid.wavenumbers().iter().map(|k| k * k / (2.0 * MASS_OVER_HBAR)).collect();
        let mask = match absorber {
            Some(width) => {
                require_positive("absorber", width)?;
                if 2.0 * width >= grid.length() {
                    return Err(Error::validation("absorber", "wider than half the domain"));
                }
                Some(absorbing_mask(&grid, width))
            }
            None => None,
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Ok(Self {
            grid,
            emitters: emitters.to_vec(),
            cells,
            pulses: pulses.to_vec(),
            statics: statics.to_vec(),
            kinetic,
            mask,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self, x: f64, t: f64) -> f64 {
        self.pulses.iter().map(|p| p.potential(x, t)).sum::<f64>()
            + self.statics.iter().map(|s| s.potential(x)).sum::<f64>()
    }

    fn emitter_block(&self, i: usize) -> f64 {
        self.emitters[i].coupling / self.grid.dx.sqrt()
    }

    /// Upper bound on the spectral radius of the discretized Hamiltonian.
    pub fn max_energy(&self) -> f64 {
        let kinetic = self.kinetic.iter().copied().fold(0.0, f64::max);
        let potential: f64 = self.pulses.iter().map(|p| p.v_a).sum::<f64>()
            + self.statics.iter().map(|s| s.depth.abs()).sum::<f64>();
        let emitter = (0..self.emitters.len())
            .map(|i| self.emitters[i].detuning.abs() + self.emitter_block(i))
            .fold(0.0, f64::max);
        kinetic + potential + emitter.max(potential)
    }

    pub fn check_step(&self, dt: f64) -> Result<()> {
        let product = dt.abs() * self.max_energy();
        if product > STEP_LIMIT {
            Err(Error::StepSize {
                product,
                limit: STEP_LIMIT,
            })
        } else {
            Ok(())
        }
    }

    /// Work in `ψ_j = φ_j √dx` so the field part of the norm is a plain sum.
    fn potential_half_step(&self, psi: &mut [Complex64], emitters: &mut [Complex64], t_mid: f64, tau: f64) {
        for (j, value) in psi.iter_mut().enumerate() {
            let v = self.potential(self.grid.x(j), t_mid);
            *value *= Complex64::from_polar(1.0, -v * tau);
        }
        for (i, &cell) in self.cells.iter().enumerate() {
            let v = self.potential(self.grid.x(cell), t_mid);
            let (c, f) = rotate_pair(
                self.emitters[i].detuning,
                v,
                self.emitter_block(i),
                tau,
                emitters[i],
                psi[cell] * Complex64::from_polar(1.0, v * tau),
            );
            emitters[i] = c;
            psi[cell] = f;
        }
    }

    fn kinetic_step(&mut self, psi: &mut [Complex64], dt: f64) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        let norm = 1.0 / self.grid.points as f64;
        for (value, e) in psi.iter_mut().zip(&self.kinetic) {
            *value *= Complex64::from_polar(norm, -e * dt);
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    /// Advance `state` by `dt` (negative `dt` runs backwards).
    pub fn step(&mut self, state: &mut ExcitationState, dt: f64) {
        let sq = self.grid.dx.sqrt();
        let mut psi: Vec<Complex64> = state.field.iter().map(|f| f * sq).collect();
        self.step_scaled(&mut psi, &mut state.emitters, state.time, dt);
        for (f, p) in state.field.iter_mut().zip(&psi) {
            *f = p / sq;
        }
        state.time += dt;
    }

    fn step_scaled(&mut self, psi: &mut [Complex64], emitters: &mut [Complex64], t: f64, dt: f64) {
        let t_mid = t + 0.5 * dt;
        self.potential_half_step(psi, emitters, t_mid, 0.5 * dt);
        self.kinetic_step(psi, dt);
        self.potential_half_step(psi, emitters, t_mid, 0.5 * dt);
        if let Some(mask) = &self.mask {
            for (p, m) in psi.iter_mut().zip(mask) {
                *p *= m;
            }
        }
    }
}

/// `exp(-iτ [[δ, G], [G, V]])` applied to `(c, f)`.
fn rotate_pair(delta: f64, v: f64, coupling: f64, tau: f64, c: Complex64, f: Complex64) -> (Complex64, Complex64) {
    let mean = 0.5 * (delta + v);
    let half = 0.5 * (delta - v);
    let r = (half * half + coupling * coupling).sqrt();
    let phase = Complex64::from_polar(1.0, -mean * tau);
    let (cos, sinc) = if r == 0.0 {
        (1.0, tau)
    } else {
        ((r * tau).cos(), (r * tau).sin() / r)
    };
    let c_new = phase * (c * (cos - I * sinc * half) - I * sinc * coupling * f);
    let f_new = phase * (f * (cos + I * sinc * half) - I * sinc * coupling * c);
    (c_new, f_new)
}

fn absorbing_mask(grid: &Grid, width: f64) -> Vec<f64> {
    let lo = grid.x_min;
    let hi = grid.x_min + grid.length();
    (0..grid.points)
        .map(|j| {
            let x = grid.x(j);
            let depth = (lo + width - x).max(x - (hi - width)).max(0.0) / width;
            if depth <= 0.0 {
                1.0
            } else {
                (0.5 * PI * depth.min(1.0)).cos().powf(0.125)
            }
        })
        .collect()
}

/// Propagate `initial` (or emitter 0 excited) for `config.duration`.
pub fn evolve_exact(
    emitters: &[EmitterSpec],
    pulses: &[PulseSpec],
    statics: &[StaticLattice],
    config: &ExactConfig,
    initial: Option<ExcitationState>,
) -> Result<Trajectory> {
    require_positive("dt", config.dt)?;
    require_positive("duration", config.duration)?;
    if emitters.is_empty() {
        return Err(Error::validation("emitters", "at least one emitter is required"));
    }
    let mut prop = Propagator::new(config.grid, emitters, pulses, statics, config.absorber)?;
    prop.check_step(config.dt)?;
    let mut state = initial.unwrap_or_else(|| ExcitationState::excited(config.grid, emitters.len(), 0));
    if state.field.len() != config.grid.points || state.emitters.len() != emitters.len() {
        return Err(Error::validation("initial", "state does not match grid or emitter count"));
    }
    let steps = (config.duration / config.dt).round() as usize;
    let stride = config.record_stride.max(1);
    let decimation = config.snapshot_decimation.max(1);
    let guard = guard_cells(&config.grid);
    let pivot = emitters[0].position;

    let mut traj = Trajectory {
        times: Vec::new(),
        populations: vec![Vec::new(); emitters.len()],
        norms: Vec::new(),
        field_right: Vec::new(),
        field_left: Vec::new(),
        snapshot_times: Vec::new(),
        snapshot_positions: (0..config.grid.points).step_by(decimation).map(|j| config.grid.x(j)).collect(),
        snapshots: Vec::new(),
    };
    let record = |traj: &mut Trajectory, s: &ExcitationState| {
        traj.times.push(s.time);
        for (i, p) in s.populations().into_iter().enumerate() {
            traj.populations[i].push(p);
        }
        traj.norms.push(s.norm());
        let (r, l) = s.field_split(pivot);
        traj.field_right.push(r);
        traj.field_left.push(l);
    };
    record(&mut traj, &state);

    let sq = config.grid.dx.sqrt();
    let mut psi: Vec<Complex64> = state.field.iter().map(|f| f * sq).collect();
    for n in 1..=steps {
        prop.step_scaled(&mut psi, &mut state.emitters, state.time, config.dt);
        state.time = n as f64 * config.dt;
        let recording = n % stride == 0 || n == steps;
        let snapshot = config.snapshot_stride > 0 && n % config.snapshot_stride == 0;
        if recording || snapshot {
            for (f, p) in state.field.iter_mut().zip(&psi) {
                *f = p / sq;
            }
        }
        if recording {
            if config.absorber.is_none() {
                let edge: f64 = guard.iter().map(|&j| psi[j].norm_sqr()).sum();
                if edge > BOUNDARY_TOLERANCE {
                    return Err(Error::Domain(format!(
                        "field probability {edge:.2e} reached the boundary at t = {:.1}",
                        state.time
                    )));
                }
            }
            record(&mut traj, &state);
        }
        if snapshot {
            traj.snapshot_times.push(state.time);
            traj.snapshots.push(state.field.iter().step_by(decimation).map(|f| f.norm_sqr()).collect());
        }
    }
    Ok(traj)
}

fn guard_cells(grid: &Grid) -> Vec<usize> {
    let band = ((BOUNDARY_GUARD / grid.dx).ceil() as usize).min(grid.points / 4);
    (0..band).chain(grid.points - band..grid.points).collect()
}

/// Rate `Γ` from a least-squares fit of `ln p` against `t` on `[t_lo, t_hi]`.
pub fn fit_decay_rate(times: &[f64], populations: &[f64], t_lo: f64, t_hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(populations)
        .filter(|(t, p)| **t >= t_lo && **t <= t_hi && **p > 0.0)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

/// Directional rates (in `Γ_0`) against `V_a` for a right-moving wave at fixed
/// `Ω` and detuning. Left-moving waves use the mirrored rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub omega: f64,
    pub detuning: f64,
    pub potentials: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub gamma_l: Vec<f64>,
    /// Entries where a resonance sat at a band extremum; their velocity was
    /// clamped to the floor.
    pub near_divergent: Vec<bool>,
}

impl RateTable {
    /// Rates on `points` equally spaced amplitudes in `[0, v_a_max]`.
    pub fn build(omega: f64, detuning: f64, v_a_max: f64, points: usize) -> Result<Self> {
        require_nonnegative("v_a_max", v_a_max)?;
        if points < 2 {
            return Err(Error::validation("points", "need at least two table entries"));
        }
        let potentials: Vec<f64> = (0..points)
            .map(|i| v_a_max * i as f64 / (points - 1) as f64)
            .collect();
        let grid = floquet1d::zone_grid(floquet1d::DEFAULT_K_POINTS);
        let rows: Vec<Result<(f64, f64, bool)>> = potentials
            .par_iter()
            .map(|&v_a| {
                let spec = LatticeSpec1D::homogeneous(v_a, omega);
                let bands = floquet1d::quasi_energy_bands(&spec, &grid, None)?;
                let res = floquet1d::find_resonances(detuning, &bands);
                let near = res.require_markov_valid().is_err();
                let r = floquet1d::rates_unchecked(&res, 0.0, VELOCITY_FLOOR);
                Ok((r.gamma_r, r.gamma_l, near))
            })
            .collect();
        let mut table = Self {
            omega,
            detuning,
            potentials,
            gamma_r: Vec::with_capacity(points),
            gamma_l: Vec::with_capacity(points),
            near_divergent: Vec::with_capacity(points),
        };
        for row in rows {
            let (r, l, near) = row?;
            table.gamma_r.push(r);
            table.gamma_l.push(l);
            table.near_divergent.push(near);
        }
        Ok(table)
    }

    /// Linearly interpolated `(Γ_R, Γ_L)` for a wave moving in `direction`.
    pub fn rates(&self, v_a: f64, direction: Direction) -> Result<(f64, f64)> {
        let lo = self.potentials[0];
        let hi = *self.potentials.last().unwrap_or(&lo);
        if !(v_a >= lo - 1e-12 && v_a <= hi + 1e-12) {
            return Err(Error::InterpolationRange { value: v_a, lo, hi });
        }
        let pos = ((v_a - lo) / (hi - lo) * (self.potentials.len() - 1) as f64).clamp(0.0, (self.potentials.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.potentials.len() - 2);
        let w = pos - i as f64;
        let r = self.gamma_r[i] * (1.0 - w) + self.gamma_r[i + 1] * w;
        let l = self.gamma_l[i] * (1.0 - w) + self.gamma_l[i + 1] * w;
        Ok(match direction {
            Direction::Right => (r, l),
            Direction::Left => (l, r),
        })
    }
}

/// Output of [`evolve_quasistatic`]. Fluxes are emitted probability per unit
/// time, `Γ_{R,L}(t) p_e(t)`, in `Ω_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiStaticTrajectory {
    pub times: Vec<f64>,
    pub excited: Vec<f64>,
    pub flux_right: Vec<f64>,
    pub flux_left: Vec<f64>,
    /// Cumulative emitted probability to the right / left.
    pub emitted_right: Vec<f64>,
    pub emitted_left: Vec<f64>,
}

/// Largest internal step of [`evolve_quasistatic`]; output times may be coarser.
pub const QUASISTATIC_MAX_STEP: f64 = 0.05;

/// Markovian decay `ċ_e = -(iδ + Γ(t)/2) c_e` with `Γ_{R,L}(t)` taken from the
/// table at the amplitude each pulse has at the emitter.
pub fn evolve_quasistatic(
    emitter: &EmitterSpec,
    pulses: &[PulseSpec],
    table: &RateTable,
    times: &[f64],
) -> Result<QuasiStaticTrajectory> {
    emitter.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("times", "must be non-decreasing"));
    }
    let gamma0 = crate::scales::gamma0(emitter.coupling);
    let ng = emitter.nonguided_decay * gamma0;
    let rates_at = |t: f64| -> Result<(f64, f64)> {
        let mut active: Option<(f64, f64)> = None;
        for p in pulses {
            let amp = p.amplitude_at(emitter.position, t);
            if amp <= 1e-9 {
                continue;
            }
            if active.is_some() {
                return Err(Error::Unsupported(
                    "overlapping acoustic pulses in the quasi-static model".into(),
                ));
            }
            if (p.omega - table.omega).abs() > 1e-12 {
                return Err(Error::validation("omega", "pulse frequency differs from the rate table"));
            }
            active = Some(table.rates(amp, p.direction)?);
        }
        let (r, l) = match active {
            Some(v) => v,
            None => table.rates(0.0, Direction::Right)?,
        };
        Ok((r * gamma0, l * gamma0))
    };

    let mut out = QuasiStaticTrajectory {
        times: times.to_vec(),
        excited: Vec::with_capacity(times.len()),
        flux_right: Vec::with_capacity(times.len()),
        flux_left: Vec::with_capacity(times.len()),
        emitted_right: Vec::with_capacity(times.len()),
        emitted_left: Vec::with_capacity(times.len()),
    };
    let Some(&first) = times.first() else {
        return Ok(out);
    };
    let (mut exponent, mut er, mut el) = (0.0f64, 0.0, 0.0);
    let mut t = first;
    let mut rate = rates_at(t)?;
    for &target in times {
        let span = target - t;
        let sub = (span / QUASISTATIC_MAX_STEP).ceil().max(1.0) as usize;
        let h = span / sub as f64;
        for _ in 0..sub {
            if h == 0.0 {
                break;
            }
            let next = rates_at(t + h)?;
            let p0 = (-exponent).exp();
            exponent += 0.5 * h * (rate.0 + rate.1 + next.0 + next.1 + 2.0 * ng);
            let p1 = (-exponent).exp();
            er += 0.5 * h * (rate.0 * p0 + next.0 * p1);
            el += 0.5 * h * (rate.1 * p0 + next.1 * p1);
            t += h;
            rate = next;
        }
        t = target;
        let p = (-exponent).exp();
        out.excited.push(p);
        out.flux_right.push(rate.0 * p);
        out.flux_left.push(rate.1 * p);
        out.emitted_right.push(er);
        out.emitted_left.push(el);
    }
    Ok(out)
}

/// Smallest half-width of the bound-state box, in `λ`.
pub const MIN_BOX_HALF_WIDTH: f64 = 4.0;

/// Discretization of the co-moving bound-state problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundStateGrid {
    pub dx: f64,
    /// Box half-width in units of the pulse width `Δx`.
    pub half_width_in_widths: f64,
}

impl Default for BoundStateGrid {
    fn default() -> Self {
        Self {
            dx: 1.0 / 16.0,
            half_width_in_widths: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStateSet {
    /// `E_n - ħω_c` in `E_r`, ascending.
    pub energies: Vec<f64>,
    /// Co-moving coordinate `ξ = x - x_0 - vt` of the grid.
    pub positions: Vec<f64>,
    /// `states[n][j] = φ_n(ξ_j)` in `1/√λ`.
    pub states: Vec<Vec<Complex64>>,
    pub velocity: f64,
    /// Bottom of the boosted continuum, `-m* v²/2`.
    pub continuum_edge: f64,
    pub dx: f64,
}

impl BoundStateSet {
    /// `φ_n(ξ)` by cubic interpolation; zero outside the box.
    pub fn amplitude(&self, n: usize, xi: f64) -> Complex64 {
        let state = &self.states[n];
        let pos = (xi - self.positions[0]) / self.dx;
        if pos < 0.0 || pos > (state.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = pos.floor() as isize;
        let s = pos - i as f64;
        let at = |j: isize| -> Complex64 {
            if j < 0 || j as usize >= state.len() {
                Complex64::new(0.0, 0.0)
            } else {
                state[j as usize]
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        p1 + (p2 - p0) * (0.5 * s)
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * (0.5 * s * s)
            + (-p0 + p1 * 3.0 - p2 * 3.0 + p3) * (0.5 * s * s * s)
    }

    /// `∫ |φ_n(ξ)| dξ`, which sets the pulse area `g/v ∫|φ_n|`.
    pub fn absolute_integral(&self, n: usize) -> f64 {
        self.states[n].iter().map(|c| c.norm()).sum::<f64>() * self.dx
    }
}

/// Bound states of `-(1/2m*)∂² + V(ξ) + iv∂` for a gaussian pulse in its rest
/// frame, from a Fourier-spectral Hermitian discretization on a periodic box.
pub fn comoving_bound_states(pulse: &PulseSpec, velocity: f64, grid: BoundStateGrid) -> Result<BoundStateSet> {
    pulse.validate()?;
    let width = match pulse.envelope {
        Envelope::Gaussian { width, .. } => width,
        _ => return Err(Error::Unsupported("bound states require a gaussian pulse".into())),
    };
    require_finite("velocity", velocity)?;
    require_positive("dx", grid.dx)?;
    if grid.half_width_in_widths < 4.0 {
        return Err(Error::validation("half_width_in_widths", "box must extend at least 4Δx beyond the pulse centre"));
    }
    let half = (grid.half_width_in_widths * width).max(MIN_BOX_HALF_WIDTH);
    let n = (2.0 * half / grid.dx).round() as usize;
    let dx = 2.0 * half / n as f64;
    let positions: Vec<f64> = (0..n).map(|j| -half + j as f64 * dx).collect();
    let box_grid = Grid {
        x_min: -half,
        dx,
        points: n,
    };
    let symbol: Vec<f64> = box_grid
        .wavenumbers()
        .iter()
        .map(|k| k * k / (2.0 * MASS_OVER_HBAR) - velocity * k)
        .collect();
    // Kernel of the translation-invariant part: h(Δ) = (1/N) Σ_k s(k) e^{ikΔ}.
    let kernel: Vec<Complex64> = (0..n)
        .map(|d| {
            symbol
                .iter()
                .enumerate()
                .map(|(m, s)| Complex64::from_polar(*s, K_A * (m * d) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    let rest = PulseSpec {
        envelope: Envelope::Gaussian { width, center: 0.0 },
        ..*pulse
    };
    let matrix = DMatrix::from_fn(n, n, |r, c| {
        let d = (r + n - c) % n;
        let mut h = kernel[d];
        if r == c {
            h += rest.potential(positions[r], 0.0);
        }
        h
    });
    let (values, vectors) = eigh_complex(matrix);
    let continuum_edge = -0.5 * MASS_OVER_HBAR * velocity * velocity;
    let mut energies = Vec::new();
    let mut states = Vec::new();
    let norm = 1.0 / dx.sqrt();
    for (j, &e) in values.iter().enumerate() {
        if e >= continuum_edge {
            break;
        }
        let mut phi: Vec<Complex64> = vectors.column(j).iter().map(|c| c * norm).collect();
        // Fix the global phase so the largest component is real positive.
        let peak = phi.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(Complex64::new(1.0, 0.0));
        let rot = peak.conj() / peak.norm();
        for c in &mut phi {
            *c *= rot;
        }
        energies.push(e);
        states.push(phi);
    }
    Ok(BoundStateSet {
        energies,
        positions,
        states,
        velocity,
        continuum_edge,
        dx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    /// Pulse centre at `t = 0`, in `λ`.
    pub pulse_start: f64,
    pub duration: f64,
    pub dt: f64,
    /// Bound state used as the cavity mode.
    #[serde(default)]
    pub level: usize,
    #[serde(default = "one")]
    pub record_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityTrajectory {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub cavity: Vec<f64>,
    /// Final excitation of the last emitter.
    pub transfer: f64,
    /// `∫ |g_i(t)| dt` for each emitter.
    pub pulse_areas: Vec<f64>,
    /// Smallest gap between the cavity mode and any other bound level or
    /// the continuum; the single-mode model needs `|g_i|, |Ω|` well below it.
    pub mode_gap: f64,
}

/// Single-mode moving-cavity model with `g_i(t) = g φ_0(x_i - x_0 - vt)`.
/// Emitter 0 starts excited.
pub fn moving_cavity_evolve(emitters: &[EmitterSpec], bound: &BoundStateSet, config: &CavityConfig) -> Result<CavityTrajectory> {
    if emitters.is_empty() {
        return Err(Error::validation("emitters", "at least one emitter is required"));
    }
    for e in emitters {
        e.validate()?;
    }
    require_positive("dt", config.dt)?;
    require_positive("duration", config.duration)?;
    if config.level >= bound.energies.len() {
        return Err(Error::validation("level", "no such bound state"));
    }
    let v = bound.velocity;
    let reach = *bound.positions.last().unwrap_or(&0.0);
    let start = bound.positions[0];
    let last = emitters.iter().map(|e| e.position).fold(f64::NEG_INFINITY, f64::max);
    let first = emitters.iter().map(|e| e.position).fold(f64::INFINITY, f64::min);
    let centre_end = config.pulse_start + v * config.duration;
    let cleared = if v >= 0.0 {
        centre_end + start > last && config.pulse_start + reach < first
    } else {
        centre_end + reach < first && config.pulse_start + start > last
    };
    if !cleared {
        return Err(Error::IncompletePassage(format!(
            "pulse must start beyond the first emitter and clear the last one (centre moves {} -> {})",
            config.pulse_start, centre_end
        )));
    }
    let e0 = bound.energies[config.level];
    let mode_gap = bound
        .energies
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != config.level)
        .map(|(_, e)| (e - e0).abs())
        .chain(std::iter::once((bound.continuum_edge - e0).abs()))
        .fold(f64::INFINITY, f64::min);

    let n_em = emitters.len();
    let coupling = |t: f64| -> Vec<Complex64> {
        emitters
            .iter()
            .map(|e| bound.amplitude(config.level, e.position - config.pulse_start - v * t) * e.coupling)
            .collect()
    };
    // Rotating frame at the cavity frequency.
    let detunings: Vec<f64> = emitters.iter().map(|e| e.detuning - e0).collect();
    let rhs = |t: f64, y: &[Complex64]| -> Vec<Complex64> {
        let g = coupling(t);
        let mut dy = vec![Complex64::new(0.0, 0.0); n_em + 1];
        for i in 0..n_em {
            dy[i] = -I * (detunings[i] * y[i] + g[i] * y[n_em]);
            dy[n_em] += -I * g[i].conj() * y[i];
        }
        dy
    };
    let mut y = vec![Complex64::new(0.0, 0.0); n_em + 1];
    y[0] = Complex64::new(1.0, 0.0);
    let steps = (config.duration / config.dt).ceil() as usize;
    let dt = config.duration / steps as f64;
    let stride = config.record_stride.max(1);
    let mut out = CavityTrajectory {
        times: vec![0.0],
        populations: (0..n_em).map(|i| vec![y[i].norm_sqr()]).collect(),
        cavity: vec![0.0],
        transfer: 0.0,
        pulse_areas: vec![0.0; n_em],
        mode_gap,
    };
    let mut g_prev = coupling(0.0);
    for n in 0..steps {
        let t = n as f64 * dt;
        y = rk4(&rhs, t, &y, dt);
        let g_next = coupling(t + dt);
        for i in 0..n_em {
            out.pulse_areas[i] += 0.5 * dt * (g_prev[i].norm() + g_next[i].norm());
        }
        g_prev = g_next;
        if (n + 1) % stride == 0 || n + 1 == steps {
            out.times.push(t + dt);
            for i in 0..n_em {
                out.populations[i].push(y[i].norm_sqr());
            }
            out.cavity.push(y[n_em].norm_sqr());
        }
    }
    out.transfer = y[n_em - 1].norm_sqr();
    Ok(out)
}

pub(crate) fn rk4<F>(f: &F, t: f64, y: &[Complex64], dt: f64) -> Vec<Complex64>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    let axpy = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x + y * s).collect()
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(y, &k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, &axpy(y, &k2, 0.5 * dt));
    let k4 = f(t + dt, &axpy(y, &k3, dt));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
        .collect()
}

/// How the emitter frequency is chosen in each cell of a transfer scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TuningMode {
    /// Both emitters resonant with the cell's own lowest bound state.
    Retuned,
    /// Both emitters at a fixed detuning.
    Fixed { detuning: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferScanSpec {
    pub omega: f64,
    pub coupling: f64,
    pub separation: f64,
    pub tuning: TuningMode,
    pub dt: f64,
    #[serde(default)]
    pub grid: Option<BoundStateGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferCell {
    pub v_a: f64,
    pub width: f64,
    /// `E_0 - ħω_c`, absent when the pulse binds no state.
    pub bound_energy: Option<f64>,
    pub transfer: f64,
    pub pulse_area: f64,
}

/// `p_e^(2)(T_f)` of the moving-cavity model over a grid of pulse amplitudes
/// and widths. Cells without a bound state report zero transfer.
pub fn transfer_scan(potentials: &[f64], widths: &[f64], spec: &TransferScanSpec) -> Result<Vec<TransferCell>> {
    require_positive("omega", spec.omega)?;
    require_positive("separation", spec.separation)?;
    let cells: Vec<(f64, f64)> = potentials
        .iter()
        .flat_map(|&v| widths.iter().map(move |&w| (v, w)))
        .collect();
    cells
        .par_iter()
        .map(|&(v_a, width)| transfer_cell(v_a, width, spec))
        .collect()
}

fn transfer_cell(v_a: f64, width: f64, spec: &TransferScanSpec) -> Result<TransferCell> {
    let pulse = PulseSpec {
        v_a,
        omega: spec.omega,
        direction: Direction::Right,
        envelope: Envelope::Gaussian { width, center: 0.0 },
    };
    let velocity = pulse.velocity();
    let grid = spec.grid.unwrap_or_default();
    let bound = comoving_bound_states(&pulse, velocity, grid)?;
    let Some(&e0) = bound.energies.first() else {
        return Ok(TransferCell {
            v_a,
            width,
            bound_energy: None,
            transfer: 0.0,
            pulse_area: 0.0,
        });
    };
    let detuning = match spec.tuning {
        TuningMode::Retuned => e0,
        TuningMode::Fixed { detuning } => detuning,
    };
    let emitters = [
        EmitterSpec::new(0.0, detuning, spec.coupling),
        EmitterSpec::new(spec.separation, detuning, spec.coupling),
    ];
    let half = *bound.positions.last().unwrap_or(&0.0);
    let start = -half - 1.0;
    let duration = (spec.separation + 2.0 * half + 2.0) / velocity;
    let traj = moving_cavity_evolve(
        &emitters,
        &bound,
        &CavityConfig {
            pulse_start: start,
            duration,
            dt: spec.dt,
            level: 0,
            record_stride: usize::MAX,
        },
    )?;
    Ok(TransferCell {
        v_a,
        width,
        bound_energy: Some(e0),
        transfer: traj.transfer,
        pulse_area: traj.pulse_areas[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid {
        Grid::centred(0.0, 16.0, 1.0 / 16.0)
    }

    #[test]
    fn uncoupled_emitter_only_acquires_a_phase() {
        let e = EmitterSpec::new(0.0, 0.3, 0.0);
        let cfg = ExactConfig {
            grid: small_grid(),
            dt: 5e-3,
            duration: 5.0,
            record_stride: 100,
            absorber: None,
            snapshot_stride: 0,
            snapshot_decimation: 1,
        };
        let mut prop = Propagator::new(cfg.grid, &[e], &[], &[], None).unwrap();
        let mut state = ExcitationState::excited(cfg.grid, 1, 0);
        for _ in 0..1000 {
            prop.step(&mut state, cfg.dt);
        }
        let expected = Complex64::from_polar(1.0, -0.3 * state.time);
        assert!((state.emitters[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn pair_rotation_is_unitary() {
        let (c, f) = rotate_pair(0.3, -0.2, 0.7, 0.4, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        assert!((c.norm_sqr() + f.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn step_size_is_checked() {
        let prop = Propagator::new(small_grid(), &[EmitterSpec::new(0.0, 0.0, 0.01)], &[], &[], None).unwrap();
        assert!(matches!(prop.check_step(0.1), Err(Error::StepSize { .. })));
        assert!(prop.check_step(5e-3).is_ok());
    }

    #[test]
    fn ramp_envelope_is_continuous_and_bounded() {
        let env = Envelope::RampedPlateau {
            start: 10.0,
            ramp_on: 5.0,
            hold: 3.0,
            ramp_off: 5.0,
        };
        assert_eq!(env.temporal(0.0), 0.0);
        assert!((env.temporal(15.0) - 1.0).abs() < 1e-12);
        assert!((env.temporal(12.5) - 0.5).abs() < 1e-12);
        assert_eq!(env.temporal(30.0), 0.0);
    }

    #[test]
    fn absorbing_mask_is_flat_inside() {
        let g = small_grid();
        let m = absorbing_mask(&g, 4.0);
        assert_eq!(m[g.points / 2], 1.0);
        // per-step factor; the layer compounds it over many steps
        assert!(m[0] < 0.01);
        assert!(m.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let half = g.points / 2;
        assert!(m[..half].windows(2).all(|w| w[0] <= w[1]));
        assert!(m[half..].windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let p: Vec<f64> = t.iter().map(|t| (-0.02 * t).exp()).collect();
        assert!((fit_decay_rate(&t, &p, 10.0, 90.0).unwrap() - 0.02).abs() < 1e-12);
    }
}
