//! Two orthogonal travelling waves on a planar waveguide: the lowest
//! quasi-energy sheet, its resonance isocontours, polar emission and
//! directional emitter-emitter couplings.
//!
//! The potential is separable, so the lowest sheet is the sum of two
//! one-dimensional sheets. Each axis uses the lowest Floquet branch: at
//! `q = k + k_a n` the energy is `ω̃(k) + Ωn` and the weight is the
//! harmonic-`n` component. The default window is the first zone, i.e. only
//! the `ℓ = ℓ' = 0` channel, where contours end on the zone boundary; wider
//! windows add the neighbouring channels with their unfolded wavevectors.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_nonnegative, require_positive, Error, Result};
use crate::floquet1d::{self, Basis, LatticeSpec1D, VELOCITY_FLOOR};
use crate::linalg::eigvalsh_real;
use crate::scales::{free_dispersion, free_group_velocity, K_A};

const REFINE_TOLERANCE: f64 = 1e-8;
const SERIES_LIMIT: f64 = 20.0;

fn right_angle() -> f64 {
    PI / 2.0
}

/// Two acoustic waves `k_1 = k_a x̂` and `k_2 = k_a ŷ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec2D {
    /// `V_1` in `E_r`.
    pub v1: f64,
    /// `V_2` in `E_r`.
    pub v2: f64,
    /// `Ω_1` in `Ω_r`.
    pub omega1: f64,
    /// `Ω_2` in `Ω_r`.
    pub omega2: f64,
    /// Angle between the two acoustic wavevectors. Only `π/2` is supported
    /// by the separable solver.
    #[serde(default = "right_angle")]
    pub angle: f64,
}

impl LatticeSpec2D {
    pub fn new(v1: f64, v2: f64, omega1: f64, omega2: f64) -> Self {
        Self {
            v1,
            v2,
            omega1,
            omega2,
            angle: right_angle(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_nonnegative("v1", self.v1)?;
        require_nonnegative("v2", self.v2)?;
        require_finite("omega1", self.omega1)?;
        require_finite("omega2", self.omega2)?;
        require_finite("angle", self.angle)
    }

    fn require_orthogonal(&self) -> Result<()> {
        if (self.angle - right_angle()).abs() > 1e-12 {
            return Err(Error::Unsupported(format!(
                "separable solver needs orthogonal waves, got angle {}",
                self.angle
            )));
        }
        Ok(())
    }
}

/// One point of the lowest sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetPoint {
    /// `ω̃ - ω_c` in `Ω_r`.
    pub energy: f64,
    /// `|u^(0,0)|²` of the unfolded channel.
    pub weight: f64,
    /// Group velocity in `λ Ω_r`.
    pub velocity: [f64; 2],
}

/// Lowest extended-zone branch of a single axis.
#[derive(Debug, Clone)]
struct AxisSheet {
    spec: LatticeSpec1D,
    basis: Option<Basis>,
}

#[derive(Debug, Clone, Copy)]
struct AxisPoint {
    energy: f64,
    weight: f64,
    velocity: f64,
}

impl AxisSheet {
    fn new(v_a: f64, omega: f64) -> Result<Self> {
        let spec = LatticeSpec1D::homogeneous(v_a, omega);
        let basis = if v_a == 0.0 {
            None
        } else {
            Some(floquet1d::certify_truncation(&spec)?.basis)
        };
        Ok(Self { spec, basis })
    }

    fn eval(&self, q: f64) -> AxisPoint {
        let Some(basis) = &self.basis else {
            return AxisPoint {
                energy: free_dispersion(q),
                weight: 1.0,
                velocity: free_group_velocity(q),
            };
        };
        let n = (q / K_A).round();
        let k = q - n * K_A;
        let system = floquet1d::solve_at(&self.spec, basis, k);
        let vector = system.vector(0);
        let harmonic = n as i64;
        let weight = (0..basis.dim())
            .filter(|&i| basis.floquet_index(i) == harmonic)
            .map(|i| vector[i] * vector[i])
            .sum();
        AxisPoint {
            energy: system.values[0] + self.spec.omega * n,
            weight,
            velocity: basis.group_velocity(&vector, k),
        }
    }
}

#[derive(Debug, Clone)]
struct Sheet {
    x: AxisSheet,
    y: AxisSheet,
}

impl Sheet {
    fn new(spec: &LatticeSpec2D) -> Result<Self> {
        spec.validate()?;
        spec.require_orthogonal()?;
        Ok(Self {
            x: AxisSheet::new(spec.v1, spec.omega1)?,
            y: AxisSheet::new(spec.v2, spec.omega2)?,
        })
    }
}

fn combine(x: AxisPoint, y: AxisPoint) -> SheetPoint {
    SheetPoint {
        energy: x.energy + y.energy,
        weight: x.weight * y.weight,
        velocity: [x.velocity, y.velocity],
    }
}

/// Lowest sheet at wavevector `k` (in `1/λ`, extended zone).
pub fn quasi_energy_2d(spec: &LatticeSpec2D, k: [f64; 2]) -> Result<SheetPoint> {
    let sheet = Sheet::new(spec)?;
    Ok(combine(sheet.x.eval(k[0]), sheet.y.eval(k[1])))
}

/// Lowest sheet from two truncated one-dimensional Floquet matrices with
/// `|ℓ| ≤ l_max`, for comparison with [`brute_force_lowest`].
pub fn separable_lowest(spec: &LatticeSpec2D, k: [f64; 2], l_max: usize) -> Result<f64> {
    spec.validate()?;
    spec.require_orthogonal()?;
    let x = eigvalsh_real(floquet1d::build_floquet_matrix(k[0], spec.v1, spec.omega1, l_max))[0];
    let y = eigvalsh_real(floquet1d::build_floquet_matrix(k[1], spec.v2, spec.omega2, l_max))[0];
    Ok(x + y)
}

/// Lowest eigenvalue of the full two-dimensional Floquet matrix over
/// harmonics `|ℓ|, |ℓ'| ≤ l_max`. Handles any angle between the waves.
pub fn brute_force_lowest(spec: &LatticeSpec2D, k: [f64; 2], l_max: usize) -> Result<f64> {
    spec.validate()?;
    let side = 2 * l_max + 1;
    let dim = side * side;
    let k1 = [K_A, 0.0];
    let k2 = [K_A * spec.angle.cos(), K_A * spec.angle.sin()];
    let index = |a: usize, b: usize| a * side + b;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..side {
        let l1 = a as f64 - l_max as f64;
        for b in 0..side {
            let l2 = b as f64 - l_max as f64;
            let qx = k[0] + l1 * k1[0] + l2 * k2[0];
            let qy = k[1] + l1 * k1[1] + l2 * k2[1];
            let i = index(a, b);
            m[(i, i)] = (qx * qx + qy * qy) / (K_A * K_A) - spec.omega1 * l1 - spec.omega2 * l2;
            if a + 1 < side {
                let j = index(a + 1, b);
                m[(i, j)] = spec.v1 / 2.0;
                m[(j, i)] = spec.v1 / 2.0;
            }
            if b + 1 < side {
                let j = index(a, b + 1);
                m[(i, j)] = spec.v2 / 2.0;
                m[(j, i)] = spec.v2 / 2.0;
            }
        }
    }
    Ok(eigvalsh_real(m)[0])
}

/// Marching-squares grid over the window
/// `[-(2 zones + 1)π, (2 zones + 1)π]²`; `zones = 0` is the first zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourGrid {
    /// Grid intervals per `2π`.
    pub points_per_zone: usize,
    /// Zones kept on each side of the first.
    pub zones: usize,
}

impl Default for ContourGrid {
    fn default() -> Self {
        Self {
            points_per_zone: 512,
            zones: 0,
        }
    }
}

impl ContourGrid {
    pub fn half_width(&self) -> f64 {
        (2 * self.zones + 1) as f64 * PI
    }

    fn axis(&self) -> Vec<f64> {
        let intervals = self.points_per_zone * (2 * self.zones + 1);
        let w = self.half_width();
        (0..=intervals)
            .map(|i| -w + 2.0 * w * i as f64 / intervals as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_zone < 8 {
            return Err(Error::validation("points_per_zone", "need at least 8"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub k: [f64; 2],
    pub weight: f64,
    pub velocity: [f64; 2],
}

impl ContourPoint {
    fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Ordered polyline. Closed polylines repeat their first point at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<ContourPoint>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceContour {
    pub detuning: f64,
    pub grid: ContourGrid,
    pub polylines: Vec<Polyline>,
    /// Largest weight at an open end on the window boundary.
    pub boundary_weight: f64,
}

impl ResonanceContour {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &ContourPoint> {
        self.polylines.iter().flat_map(|p| p.points.iter())
    }

    fn segments(&self) -> impl Iterator<Item = (&ContourPoint, &ContourPoint)> {
        self.polylines
            .iter()
            .flat_map(|p| p.points.windows(2).map(|w| (&w[0], &w[1])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    Horizontal(usize, usize),
    Vertical(usize, usize),
}

fn illinois<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    let mut side = 0;
    for _ in 0..200 {
        if (b - a).abs() < REFINE_TOLERANCE {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc * fb > 0.0 {
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
        if (fb - fa).abs() < f64::MIN_POSITIVE {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Isocontour `ω̃(k) = ω_eg` of the lowest sheet.
pub fn resonance_contour(detuning: f64, spec: &LatticeSpec2D, grid: ContourGrid) -> Result<ResonanceContour> {
    require_finite("detuning", detuning)?;
    grid.validate()?;
    let sheet = Sheet::new(spec)?;
    let axis = grid.axis();
    let n = axis.len();
    let ex: Vec<AxisPoint> = axis.par_iter().map(|&q| sheet.x.eval(q)).collect();
    let ey: Vec<AxisPoint> = axis.par_iter().map(|&q| sheet.y.eval(q)).collect();
    let level = |i: usize, j: usize| ex[i].energy + ey[j].energy - detuning;
    let positive = |i: usize, j: usize| level(i, j) > 0.0;

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let corners = [positive(i, j), positive(i + 1, j), positive(i + 1, j + 1), positive(i, j + 1)];
            if corners.iter().all(|&c| c == corners[0]) {
                continue;
            }
            let edges = [
                Edge::Horizontal(i, j),
                Edge::Vertical(i + 1, j),
                Edge::Horizontal(i, j + 1),
                Edge::Vertical(i, j),
            ];
            let crossing: Vec<usize> = (0..4).filter(|&e| corners[e] != corners[(e + 1) % 4]).collect();
            if crossing.len() == 2 {
                segments.push((edges[crossing[0]], edges[crossing[1]]));
            } else {
                let centre = 0.25 * (level(i, j) + level(i + 1, j) + level(i + 1, j + 1) + level(i, j + 1)) > 0.0;
                if centre == corners[0] {
                    segments.push((edges[0], edges[1]));
                    segments.push((edges[2], edges[3]));
                } else {
                    segments.push((edges[3], edges[0]));
                    segments.push((edges[1], edges[2]));
                }
            }
        }
    }

    let mut edges: Vec<Edge> = segments.iter().flat_map(|&(a, b)| [a, b]).collect();
    edges.sort_by_key(|e| match *e {
        Edge::Horizontal(i, j) => (0, i, j),
        Edge::Vertical(i, j) => (1, i, j),
    });
    edges.dedup();
    let points: Vec<ContourPoint> = edges
        .par_iter()
        .map(|edge| match *edge {
            Edge::Horizontal(i, j) => {
                let target = detuning - ey[j].energy;
                let q = illinois(|q| sheet.x.eval(q).energy - target, axis[i], axis[i + 1]);
                let p = combine(sheet.x.eval(q), ey[j]);
                ContourPoint {
                    k: [q, axis[j]],
                    weight: p.weight,
                    velocity: p.velocity,
                }
            }
            Edge::Vertical(i, j) => {
                let target = detuning - ex[i].energy;
                let q = illinois(|q| sheet.y.eval(q).energy - target, axis[j], axis[j + 1]);
                let p = combine(ex[i], sheet.y.eval(q));
                ContourPoint {
                    k: [axis[i], q],
                    weight: p.weight,
                    velocity: p.velocity,
                }
            }
        })
        .collect();
    let lookup: HashMap<Edge, usize> = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
    for (s, (a, b)) in segments.iter().enumerate() {
        adjacency[lookup[a]].push(s);
        adjacency[lookup[b]].push(s);
    }
    let mut used = vec![false; segments.len()];
    let other = |s: usize, from: usize| -> usize {
        let (a, b) = segments[s];
        if lookup[&a] == from {
            lookup[&b]
        } else {
            lookup[&a]
        }
    };
    let mut polylines = Vec::new();
    let mut boundary_weight: f64 = 0.0;
    let mut trace = |start: usize, used: &mut Vec<bool>| -> Option<Polyline> {
        let mut chain = vec![start];
        let mut current = start;
        loop {
            let next = adjacency[current].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            current = other(s, current);
            chain.push(current);
            if current == start {
                break;
            }
        }
        if chain.len() < 2 {
            return None;
        }
        let closed = chain.first() == chain.last();
        if !closed {
            for end in [chain[0], chain[chain.len() - 1]] {
                boundary_weight = boundary_weight.max(points[end].weight);
            }
        }
        Some(Polyline {
            points: chain.iter().map(|&e| points[e]).collect(),
            closed,
        })
    };
    // Open chains start at an edge with a single segment.
    for e in 0..edges.len() {
        if adjacency[e].len() == 1 && !used[adjacency[e][0]] {
            if let Some(p) = trace(e, &mut used) {
                polylines.push(p);
            }
        }
    }
    for e in 0..edges.len() {
        if adjacency[e].iter().any(|&s| !used[s]) {
            if let Some(p) = trace(e, &mut used) {
                polylines.push(p);
            }
        }
    }
    Ok(ResonanceContour {
        detuning,
        grid,
        polylines,
        boundary_weight,
    })
}

/// `Γ(φ)` on uniform bins over `[0, 2π)`; its integral is the total rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarEmission {
    /// Bin centres.
    pub angles: Vec<f64>,
    pub density: Vec<f64>,
}

impl PolarEmission {
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / self.angles.len() as f64
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }

    pub fn peak_angle(&self) -> f64 {
        let i = (0..self.density.len())
            .max_by(|&a, &b| self.density[a].total_cmp(&self.density[b]))
            .unwrap_or(0);
        self.angles[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emission2D {
    /// `Γ` in `Ω_r`.
    pub gamma: f64,
    pub polar: PolarEmission,
    /// Segments dropped for touching the velocity floor.
    pub excluded_segments: usize,
    /// Contour length of the dropped segments.
    pub excluded_length: f64,
}

fn segment_length(a: &ContourPoint, b: &ContourPoint) -> f64 {
    (b.k[0] - a.k[0]).hypot(b.k[1] - a.k[1])
}

fn slow(p: &ContourPoint) -> bool {
    p.speed() < VELOCITY_FLOOR
}

/// Total and polar emission rates for coupling `g` (in units with `λ = 1`).
pub fn emission_2d(contour: &ResonanceContour, coupling: f64, bins: usize) -> Result<Emission2D> {
    require_nonnegative("coupling", coupling)?;
    if bins == 0 {
        return Err(Error::validation("bins", "need at least one bin"));
    }
    let prefactor = coupling * coupling / (2.0 * PI);
    let width = 2.0 * PI / bins as f64;
    let mut density = vec![0.0; bins];
    let mut gamma = 0.0;
    let mut excluded_segments = 0;
    let mut excluded_length = 0.0;
    for (a, b) in contour.segments() {
        let len = segment_length(a, b);
        if slow(a) || slow(b) {
            excluded_segments += 1;
            excluded_length += len;
            continue;
        }
        for p in [a, b] {
            let c = 0.5 * prefactor * p.weight / p.speed() * len;
            gamma += c;
            let angle = p.velocity[1].atan2(p.velocity[0]).rem_euclid(2.0 * PI);
            let bin = ((angle / width) as usize).min(bins - 1);
            density[bin] += c / width;
        }
    }
    Ok(Emission2D {
        gamma,
        polar: PolarEmission {
            angles: (0..bins).map(|i| (i as f64 + 0.5) * width).collect(),
            density,
        },
        excluded_segments,
        excluded_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling2D {
    /// `A_12` in `Ω_r`.
    pub a12: Complex64,
    /// `Γ` in `Ω_r`.
    pub gamma: f64,
    pub lambda: f64,
}

fn step(x: f64) -> f64 {
    crate::cascade::heaviside(x)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Phase integral of one segment with the wavevector linear along it.
fn segment_amplitude(a: &ContourPoint, b: &ContourPoint, separation: [f64; 2]) -> Complex64 {
    let len = segment_length(a, b);
    let fa = a.weight / a.speed() * step(a.velocity[0] * separation[0] + a.velocity[1] * separation[1]);
    let fb = b.weight / b.speed() * step(b.velocity[0] * separation[0] + b.velocity[1] * separation[1]);
    if fa == 0.0 && fb == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase_a = a.k[0] * separation[0] + a.k[1] * separation[1];
    let phase_b = b.k[0] * separation[0] + b.k[1] * separation[1];
    let half = 0.5 * (phase_b - phase_a);
    Complex64::from_polar(0.5 * (fa + fb) * len * sinc(half), 0.5 * (phase_a + phase_b))
}

/// `A_12(R)` and `Λ(R)` for emitters separated by `R` (in `λ`), with
/// `gamma_ng` in `Ω_r`.
pub fn coupling_2d(contour: &ResonanceContour, coupling: f64, separation: [f64; 2], gamma_ng: f64) -> Result<Coupling2D> {
    require_nonnegative("gamma_ng", gamma_ng)?;
    require_finite("separation", separation[0])?;
    require_finite("separation", separation[1])?;
    let emission = emission_2d(contour, coupling, 1)?;
    Ok(coupling_with(contour, coupling, separation, gamma_ng, emission.gamma))
}

fn coupling_with(contour: &ResonanceContour, coupling: f64, separation: [f64; 2], gamma_ng: f64, gamma: f64) -> Coupling2D {
    let prefactor = coupling * coupling / (2.0 * PI);
    let a12: Complex64 = contour
        .segments()
        .filter(|(a, b)| !slow(a) && !slow(b))
        .map(|(a, b)| segment_amplitude(a, b, separation))
        .sum::<Complex64>()
        * prefactor;
    let total = gamma + gamma_ng;
    Coupling2D {
        a12,
        gamma,
        lambda: if total > 0.0 { a12.norm() / total } else { 0.0 },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `lambda[iy][ix]`
    pub lambda: Vec<Vec<f64>>,
    pub gamma: f64,
}

/// `Λ(R)` on a rectangular grid of separations. The contour is extracted
/// once and reused for every cell.
pub fn correlation_map(
    spec: &LatticeSpec2D,
    detuning: f64,
    xs: &[f64],
    ys: &[f64],
    gamma_ng: f64,
    grid: ContourGrid,
) -> Result<CorrelationMap> {
    require_nonnegative("gamma_ng", gamma_ng)?;
    let contour = resonance_contour(detuning, spec, grid)?;
    // Λ does not depend on g; fix it to one.
    let gamma = emission_2d(&contour, 1.0, 1)?.gamma;
    let lambda = ys
        .par_iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| coupling_with(&contour, 1.0, [x, y], gamma_ng, gamma).lambda)
                .collect()
        })
        .collect();
    Ok(CorrelationMap {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        lambda,
        gamma,
    })
}

/// `Γ = g² k_a² / (2Ω_r)` of the unmodulated sheet, in `Ω_r`.
pub fn isotropic_rate(coupling: f64) -> f64 {
    coupling * coupling * K_A * K_A / 2.0
}

/// `A_12 = g² k_r/(2 v_g) [J_0(k_r R) + i H_0(k_r R)]` of the unmodulated
/// sheet at detuning `δ > 0`.
pub fn isotropic_coupling(coupling: f64, detuning: f64, distance: f64) -> Result<Complex64> {
    require_positive("detuning", detuning)?;
    require_nonnegative("distance", distance)?;
    let k_r = K_A * detuning.sqrt();
    let x = k_r * distance;
    let scale = coupling * coupling * k_r / (2.0 * free_group_velocity(k_r));
    Ok(Complex64::new(bessel_j0(x)?, struve_h0(x)?) * scale)
}

/// Double-double arithmetic for the alternating power series.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn square(x: f64) -> Self {
        let hi = x * x;
        Self {
            hi,
            lo: x.mul_add(x, -hi),
        }
    }

    fn normalized(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, other: Self) -> Self {
        let s = self.hi + other.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (other.hi - bb);
        Self::normalized(s, err + self.lo + other.lo)
    }

    fn mul(self, other: Self) -> Self {
        let p = self.hi * other.hi;
        let err = self.hi.mul_add(other.hi, -p) + self.hi * other.lo + self.lo * other.hi;
        Self::normalized(p, err)
    }

    fn div(self, d: f64) -> Self {
        let q = self.hi / d;
        let p = q * d;
        let err = q.mul_add(d, -p);
        let r = (self.hi - p - err + self.lo) / d;
        Self::normalized(q, r)
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

fn require_argument(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("argument must be finite and non-negative, got {x}")));
    }
    Ok(())
}

/// Complex Hankel factor `Σ_k i^k b_k / x^k` with `H_0^(1)(x) ≈
/// √(2/πx) e^{i(x-π/4)}` times this sum.
fn hankel_sum(x: f64) -> Complex64 {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut coefficient = 1.0;
    let mut previous = f64::INFINITY;
    let mut i_power = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        let m = (2 * k - 1) as f64;
        coefficient *= -(m * m) / (k as f64 * 8.0 * x);
        if coefficient.abs() >= previous {
            break;
        }
        previous = coefficient.abs();
        i_power *= Complex64::new(0.0, 1.0);
        sum += i_power * coefficient;
        if coefficient.abs() < 1e-17 {
            break;
        }
    }
    sum
}

fn hankel0(x: f64) -> Complex64 {
    let chi = x - PI / 4.0;
    Complex64::from_polar((2.0 / (PI * x)).sqrt(), chi) * hankel_sum(x)
}

/// Bessel function `J_0(x)` for `x ≥ 0`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    require_argument(x)?;
    if x > SERIES_LIMIT {
        return Ok(hankel0(x).re);
    }
    let quarter = DoubleDouble::square(x).div(4.0).neg();
    let mut term = DoubleDouble::new(1.0);
    let mut sum = term;
    for k in 1..200 {
        term = term.mul(quarter).div((k * k) as f64);
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 {
            break;
        }
    }
    Ok(sum.value())
}

/// Bessel function `Y_0(x)` for `x > 20`, from the Hankel expansion.
fn bessel_y0_asymptotic(x: f64) -> f64 {
    hankel0(x).im
}

/// Struve function `H_0(x)` for `x ≥ 0`.
pub fn struve_h0(x: f64) -> Result<f64> {
    require_argument(x)?;
    if x > SERIES_LIMIT {
        let mut sum = 0.0;
        let mut term = 1.0 / x;
        let mut previous = f64::INFINITY;
        for k in 0..200 {
            if term.abs() >= previous {
                break;
            }
            sum += term;
            previous = term.abs();
            let m = (2 * k + 1) as f64;
            term *= -(m * m) / (x * x);
        }
        return Ok(bessel_y0_asymptotic(x) + 2.0 / PI * sum);
    }
    let minus_square = DoubleDouble::square(x).neg();
    let mut term = DoubleDouble::new(x);
    let mut sum = term;
    for k in 0..200 {
        let m = (2 * k + 3) as f64;
        term = term.mul(minus_square).div(m * m);
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 {
            break;
        }
    }
    Ok(2.0 / PI * sum.value())
}
