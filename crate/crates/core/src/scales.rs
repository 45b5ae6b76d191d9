//! Reduction of material and geometry parameters to the dimensionless units
//! used by every solver in this crate.
//!
//! Internal convention: lengths in acoustic wavelengths λ (so `k_a = 2π`),
//! frequencies and energies in the photonic recoil frequency `Ω_r = E_r/ħ`,
//! times in `1/Ω_r`. In these units the free guided-mode dispersion is
//! `ω(k) - ω_c = (k/2π)²`, the group velocity is `k/(2π²)`, the effective
//! mass is `m*/ħ = 2π²` and the speed of sound is `Ω/2π`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::linalg::eigvalsh_real;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 2.0 * PI * HBAR;

/// Acoustic wavevector in internal units.
pub const K_A: f64 = 2.0 * PI;

/// Free dispersion `ω(k) - ω_c` in units of `Ω_r`, `k` in `1/λ`.
pub fn free_dispersion(k: f64) -> f64 {
    (k / K_A).powi(2)
}

/// Free group velocity `ħk/m*` in units of `λ Ω_r`.
pub fn free_group_velocity(k: f64) -> f64 {
    2.0 * k / (K_A * K_A)
}

/// Effective photon mass over ħ in internal units (`m*/ħ = 2π²`).
pub const MASS_OVER_HBAR: f64 = K_A * K_A / 2.0;

/// Characteristic decay rate `Γ_0 = 4π g_0²` for coupling `g_0` in units of
/// `Ω_r` (with `g = g_0 √λ`).
pub fn gamma0(g0: f64) -> f64 {
    4.0 * PI * g0 * g0
}

/// Optical material constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub name: String,
    pub refractive_index: f64,
    /// m/s
    pub speed_of_sound: f64,
    /// `ω_c / 2π` in Hz.
    pub optical_frequency: f64,
    /// `δn/n`
    pub index_modulation: f64,
}

impl MaterialSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.refractive_index.is_finite() && self.refractive_index > 1.0) {
            return Err(Error::validation(
                "refractive_index",
                format!("must exceed 1, got {}", self.refractive_index),
            ));
        }
        require_positive("speed_of_sound", self.speed_of_sound)?;
        require_positive("optical_frequency", self.optical_frequency)?;
        if !(self.index_modulation >= 0.0 && self.index_modulation < 1.0) {
            return Err(Error::validation(
                "index_modulation",
                format!("must lie in [0, 1), got {}", self.index_modulation),
            ));
        }
        Ok(())
    }

    /// `ω_c` in rad/s.
    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.optical_frequency
    }

    /// Quadratic-dispersion effective mass `m* = ω_c ħ n² / c²` in kg.
    pub fn effective_mass(&self) -> f64 {
        self.omega_c() * HBAR * self.refractive_index.powi(2) / SPEED_OF_LIGHT.powi(2)
    }

    pub fn diamond() -> Self {
        Self::preset("diamond", 2.4, 1.7e4)
    }

    pub fn fused_silica() -> Self {
        Self::preset("fused silica", 1.5, 5.7e3)
    }

    pub fn silicon() -> Self {
        Self::preset("silicon", 3.9, 8.4e3)
    }

    fn preset(name: &str, n: f64, v: f64) -> Self {
        Self {
            name: name.to_string(),
            refractive_index: n,
            speed_of_sound: v,
            optical_frequency: 400e12,
            index_modulation: 1e-4,
        }
    }
}

/// A material at a given acoustic wavelength, reduced to recoil units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub material: String,
    /// m
    pub acoustic_wavelength: f64,
    /// 1/m
    pub acoustic_wavevector: f64,
    /// kg
    pub effective_mass: f64,
    /// `Ω_r` in rad/s.
    pub recoil_frequency: f64,
    /// `E_r = ħΩ_r` in J.
    pub recoil_energy: f64,
    /// `Ω` in rad/s.
    pub acoustic_frequency: f64,
    /// `Ω / Ω_r`
    pub acoustic_frequency_ratio: f64,
    /// `V_a / E_r`
    pub potential_ratio: f64,
    /// `g_0 / Ω_r`, when a coupling has been supplied.
    pub coupling_ratio: Option<f64>,
    /// `Γ_0 = 4π g_0²/Ω_r` in rad/s, when a coupling has been supplied.
    pub characteristic_rate: Option<f64>,
}

impl ScaledParams {
    /// Attach an emitter coupling `g_0` (rad/s).
    pub fn with_coupling(mut self, g0: f64) -> Result<Self> {
        require_nonnegative("g0", g0)?;
        let ratio = g0 / self.recoil_frequency;
        self.coupling_ratio = Some(ratio);
        self.characteristic_rate = Some(4.0 * PI * g0 * g0 / self.recoil_frequency);
        Ok(self)
    }

    pub fn acoustic_frequency_ghz(&self) -> f64 {
        self.acoustic_frequency / (2.0 * PI) / 1e9
    }

    pub fn recoil_frequency_ghz(&self) -> f64 {
        self.recoil_frequency / (2.0 * PI) / 1e9
    }
}

pub fn derive_scales(material: &MaterialSpec, wavelength: f64) -> Result<ScaledParams> {
    material.validate()?;
    require_positive("wavelength", wavelength)?;
    let k_a = 2.0 * PI / wavelength;
    let mass = material.effective_mass();
    let omega_r = HBAR * k_a * k_a / (2.0 * mass);
    let omega = material.speed_of_sound * k_a;
    let v_a_over_hbar = material.omega_c() * material.index_modulation;
    Ok(ScaledParams {
        material: material.name.clone(),
        acoustic_wavelength: wavelength,
        acoustic_wavevector: k_a,
        effective_mass: mass,
        recoil_frequency: omega_r,
        recoil_energy: HBAR * omega_r,
        acoustic_frequency: omega,
        acoustic_frequency_ratio: omega / omega_r,
        potential_ratio: v_a_over_hbar / omega_r,
        coupling_ratio: None,
        characteristic_rate: None,
    })
}

/// Slow-light miniband produced by a static cosine potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinibandSpec {
    /// J
    pub static_depth: f64,
    /// m
    pub static_period: f64,
    /// Width of the lowest band, rad/s.
    pub bandwidth: f64,
    /// `2ħ/(B a²)`, kg.
    pub effective_mass_eff: f64,
    /// `ħ k_a² / (2 m*_eff)` in rad/s for the supplied acoustic wavevector.
    pub recoil_eff: f64,
    /// Number of plane-wave harmonics on each side at convergence.
    pub harmonics: usize,
}

/// Lowest Bloch band of `-∂²/(k_st²) + s cos(k_st x)` in units of the
/// lattice recoil `ħk_st²/2m`. Returns the band minimum and maximum.
pub(crate) fn lowest_static_band(depth: f64, harmonics: usize) -> (f64, f64) {
    // Symmetric cosine potential: the lowest band is monotone between the
    // zone centre and the zone edge.
    let at = |q: f64| -> f64 {
        let n = 2 * harmonics + 1;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let nu = i as f64 - harmonics as f64;
            m[(i, i)] = (nu + q).powi(2);
            if i + 1 < n {
                m[(i, i + 1)] = depth / 2.0;
                m[(i + 1, i)] = depth / 2.0;
            }
        }
        eigvalsh_real(m)[0]
    };
    let a = at(0.0);
    let b = at(0.5);
    (a.min(b), a.max(b))
}

const MINIBAND_START_HARMONICS: usize = 16;
const MINIBAND_TOLERANCE: f64 = 1e-8;
const MINIBAND_MAX_HARMONICS: usize = 1024;
/// Eigenvalue roundoff in units of `ε‖M‖`.
const ROUNDOFF_FACTOR: f64 = 16.0;

/// [`lowest_static_band`] with the cutoff doubled until the width is stable
/// to [`MINIBAND_TOLERANCE`] or to eigenvalue roundoff, which dominates for
/// deep lattices where the width is a small difference of two band edges.
fn converged_static_band(depth: f64) -> Result<((f64, f64), usize)> {
    let mut harmonics = MINIBAND_START_HARMONICS;
    let mut previous = lowest_static_band(depth, harmonics);
    loop {
        let next_harmonics = 2 * harmonics;
        let next = lowest_static_band(depth, next_harmonics);
        let (old, new) = (previous.1 - previous.0, next.1 - next.0);
        let floor = ROUNDOFF_FACTOR * f64::EPSILON * ((next_harmonics * next_harmonics) as f64 + depth);
        if (new - old).abs() <= MINIBAND_TOLERANCE * new.abs() + floor {
            return Ok((next, next_harmonics));
        }
        if next_harmonics >= MINIBAND_MAX_HARMONICS {
            return Err(Error::Convergence {
                what: "miniband width".into(),
                discrepancy: ((new - old) / new).abs(),
                cutoff_lo: harmonics,
                cutoff_hi: next_harmonics,
            });
        }
        harmonics = next_harmonics;
        previous = next;
    }
}

/// Lowest-band width `B` of the static lattice `V_st cos(2πx/a)` together with
/// the tight-binding effective mass `2ħ/(Ba²)` and the corresponding recoil
/// frequency for acoustic wavevector `k_a` (1/m).
pub fn miniband_params(v_st: f64, a: f64, m_bare: f64, k_a: f64) -> Result<MinibandSpec> {
    require_positive("static_depth", v_st)?;
    require_positive("static_period", a)?;
    require_positive("effective_mass", m_bare)?;
    require_positive("acoustic_wavevector", k_a)?;
    let k_st = 2.0 * PI / a;
    let recoil_st = HBAR * k_st * k_st / (2.0 * m_bare); // rad/s
    let depth = v_st / (HBAR * recoil_st);

    let ((lo, hi), harmonics) = converged_static_band(depth)?;
    let bandwidth = (hi - lo) * recoil_st;
    let m_eff = 2.0 * HBAR / (bandwidth * a * a);
    Ok(MinibandSpec {
        static_depth: v_st,
        static_period: a,
        bandwidth,
        effective_mass_eff: m_eff,
        recoil_eff: HBAR * k_a * k_a / (2.0 * m_eff),
        harmonics,
    })
}

/// Lowest band of a static lattice `V_st cos(M k_a x)` in internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledMiniband {
    /// Band minimum relative to `ω_c`, in `Ω_r`.
    pub bottom: f64,
    /// Width `B` in `Ω_r`.
    pub bandwidth: f64,
    /// `Ω_r,eff / Ω_r = m*/m*_eff` for the tight-binding mass `2ħ/(Ba²)`.
    pub recoil_ratio: f64,
}

/// Miniband of depth `v_st` (in `E_r`) and period `λ/period_ratio`.
pub fn scaled_miniband(v_st: f64, period_ratio: usize) -> Result<ScaledMiniband> {
    require_positive("static_depth", v_st)?;
    if period_ratio == 0 {
        return Err(Error::validation("period_ratio", "must be a positive integer"));
    }
    let m2 = (period_ratio * period_ratio) as f64;
    let depth = v_st / m2;
    let ((lo, hi), _) = converged_static_band(depth)?;
    let bandwidth = (hi - lo) * m2;
    Ok(ScaledMiniband {
        bottom: lo * m2,
        bandwidth,
        recoil_ratio: bandwidth * PI * PI / m2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conventions_are_consistent() {
        // Γ_0 = g²/|v_g(k_a/4)| with g = g_0 in units of √λ Ω_r.
        let g0 = 0.015;
        let direct = g0 * g0 / free_group_velocity(K_A / 4.0);
        assert!((direct - gamma0(g0)).abs() < 1e-15 * gamma0(g0));
        assert!((free_dispersion(K_A) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_modulation_gives_zero_potential() {
        let mut m = MaterialSpec::silicon();
        m.index_modulation = 0.0;
        let s = derive_scales(&m, 20e-6).unwrap();
        assert_eq!(s.potential_ratio, 0.0);
    }

    #[test]
    fn invalid_inputs_name_the_field() {
        let m = MaterialSpec::diamond();
        match derive_scales(&m, -1.0) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "wavelength"),
            other => panic!("unexpected {other:?}"),
        }
        let mut bad = MaterialSpec::diamond();
        bad.refractive_index = 0.9;
        match derive_scales(&bad, 1e-5) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "refractive_index"),
            other => panic!("unexpected {other:?}"),
        }
        bad = MaterialSpec::diamond();
        bad.index_modulation = 1.5;
        assert!(matches!(derive_scales(&bad, 1e-5), Err(Error::Validation { .. })));
    }

    #[test]
    fn diamond_ten_micron_row() {
        let s = derive_scales(&MaterialSpec::diamond(), 10e-6).unwrap();
        assert!((s.acoustic_frequency_ghz() - 1.70).abs() < 1e-9);
        assert!((s.recoil_frequency_ghz() - 195.0).abs() / 195.0 < 0.03);
        assert!((s.potential_ratio - 0.2).abs() / 0.2 < 0.03);
        // Ω = v k_a exactly and E_r = ħΩ_r exactly
        assert_eq!(s.acoustic_frequency, 1.7e4 * s.acoustic_wavevector);
        assert_eq!(s.recoil_energy, HBAR * s.recoil_frequency);
    }

    #[test]
    fn characteristic_rate_matches_group_velocity_form() {
        let s = derive_scales(&MaterialSpec::diamond(), 10e-6)
            .unwrap()
            .with_coupling(2.0 * PI * 300e6)
            .unwrap();
        let g0 = 2.0 * PI * 300e6;
        let g_sq = g0 * g0 * s.acoustic_wavelength;
        let v_g = HBAR * (s.acoustic_wavevector / 4.0) / s.effective_mass;
        let direct = g_sq / v_g;
        let gamma0 = s.characteristic_rate.unwrap();
        assert!((direct - gamma0).abs() <= 4.0 * f64::EPSILON * gamma0);
    }

    #[test]
    fn lowest_band_of_weak_lattice_approaches_free_folding() {
        // free folded band: q² for |q| <= 1/2, width 1/4
        let (lo, hi) = lowest_static_band(1e-6, 16);
        assert!((hi - lo - 0.25).abs() < 1e-5);
    }
}
