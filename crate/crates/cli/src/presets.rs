//! Named runs that regenerate the data behind each figure and table.

use std::f64::consts::PI;

use aowqed_core::cascade::RampProtocol;
use aowqed_core::dynamics1d::{
    BoundStateGrid, Direction, EmitterSpec, Envelope, PulseSpec, StaticLattice, TransferScanSpec, TuningMode,
};
use aowqed_core::floquet1d::{LatticeSpec1D, MapAxis};
use aowqed_core::floquet2d::{ContourGrid, LatticeSpec2D};

use crate::config::*;
use crate::error::CliError;

pub const PRESETS: [&str; 17] = [
    "table1",
    "fig1c",
    "fig2a",
    "fig2b",
    "fig3",
    "fig3c",
    "fig4",
    "fig4inset",
    "fig5b",
    "fig5c",
    "fig7a",
    "fig7b",
    "fig7c",
    "fig8a",
    "fig8b",
    "fig9a",
    "fig9b",
];

const FIG2_DETUNINGS: (f64, f64, usize) = (-0.5, 1.5, 201);

fn pulse(v_a: f64, omega: f64, direction: Direction, envelope: Envelope) -> PulseSpec {
    PulseSpec {
        v_a,
        omega,
        direction,
        envelope,
    }
}

fn fig5_pulse() -> PulseSpec {
    pulse(
        0.5,
        0.05,
        Direction::Right,
        Envelope::Gaussian {
            width: 2.0,
            center: -14.0,
        },
    )
}

fn fig7_lattice(v1: f64, v2: f64) -> LatticeSpec2D {
    LatticeSpec2D::new(v1, v2, 0.2, 0.2)
}

fn corrmap(lattice: LatticeSpec2D, detuning: f64) -> Job {
    Job::Corrmap(CorrmapParams {
        lattice,
        detuning,
        xs: Sweep::range(-20.0, 20.0, 81),
        ys: Sweep::range(-20.0, 20.0, 81),
        gamma_ng: 0.0,
        contour_grid: ContourGrid::default(),
        radial: Some(Radial {
            angle: PI / 4.0,
            distances: Sweep::range(0.5, 40.0, 80),
        }),
    })
}

fn bands2d(lattice: LatticeSpec2D, detuning: f64) -> Job {
    Job::Bands2d(Bands2dParams {
        lattice,
        k_points: 65,
        detuning: Some(detuning),
        contour_grid: ContourGrid::default(),
        polar_bins: Some(72),
    })
}

fn job(name: &str) -> Option<Job> {
    let (d_lo, d_hi, d_n) = FIG2_DETUNINGS;
    Some(match name {
        "table1" => Job::Scales(ScalesParams::Table(ScalesTable {
            materials: None,
            rows: ["diamond", "fused silica", "silicon"]
                .iter()
                .flat_map(|m| {
                    [10.0, 30.0, 50.0].map(|wavelength_um| ScalesRow {
                        material: m.to_string(),
                        wavelength_um,
                    })
                })
                .collect(),
            coupling_ghz: None,
        })),
        "fig1c" => Job::Bands1d(Bands1dParams {
            lattice: LatticeSpec1D::homogeneous(0.2, 0.4),
            k_points: 512,
            detuning: Some(0.25),
            energy_window: [-0.5, 1.5],
        }),
        "fig2a" => Job::Dmap(DmapParams {
            axis: MapAxis::Potential,
            fixed: 0.2,
            detunings: Sweep::range(d_lo, d_hi, d_n),
            parameters: Sweep::range(0.0, 1.0, 51),
            k_points: 1024,
            coupling: None,
        }),
        "fig2b" => Job::Dmap(DmapParams {
            axis: MapAxis::Frequency,
            fixed: 0.2,
            detunings: Sweep::range(d_lo, d_hi, d_n),
            parameters: Sweep::range(0.0, 1.0, 51),
            k_points: 1024,
            coupling: None,
        }),
        "fig3" => Job::DecaySim(DecaySimParams {
            emitter: EmitterSpec::new(0.0, -0.2, 0.015),
            pulses: vec![
                pulse(
                    0.8,
                    0.2,
                    Direction::Right,
                    Envelope::RampedPlateau {
                        start: 0.0,
                        ramp_on: 50.0,
                        hold: 150.0,
                        ramp_off: 50.0,
                    },
                ),
                pulse(
                    0.8,
                    0.2,
                    Direction::Left,
                    Envelope::RampedPlateau {
                        start: 450.0,
                        ramp_on: 50.0,
                        hold: 600.0,
                        ramp_off: 50.0,
                    },
                ),
            ],
            statics: vec![],
            domain: Domain {
                centre: None,
                half_width: 64.0,
                dx: 1.0 / 16.0,
                absorber: Some(10.0),
            },
            duration: 1200.0,
            dt: Some(7e-3),
            record_interval: 2.0,
            quasistatic: Some(QuasiStaticSpec {
                table_points: 321,
                v_a_max: 0.8,
            }),
            superlattice_rates: false,
            fit_window: None,
            snapshots: Some(Snapshots {
                interval: 10.0,
                decimation: 8,
            }),
        }),
        "fig3c" => Job::Rates1d(Rates1dParams {
            lattice: LatticeSpec1D::homogeneous(0.0, 0.2),
            detuning: -0.2,
            sweep: SweepParameter::VA,
            values: Sweep::range(0.0, 1.2, 121),
            coupling: 0.015,
            k_points: 2048,
        }),
        "fig4" => Job::Entangle(EntangleParams::Ramp(EntangleRamp {
            protocol: RampProtocol {
                v_a: 0.4,
                omega: 0.2,
                detuning: 0.08,
                coupling: 0.08,
                gamma_ng: 0.001,
                rabi_over_gamma: 2.0,
                separation: 4.3,
                ramp_start: 200.0,
                ramp_end: 700.0,
                duration: 2000.0,
                dt: 0.5,
                table_points: 21,
                record_every: 100,
            },
        })),
        "fig4inset" => Job::Entangle(EntangleParams::Map(EntangleMap {
            omega: 0.2,
            coupling: 0.08,
            gamma_ng: 0.002,
            rabi_over_gamma: 1.3,
            detunings: Sweep::range(-0.1, 0.3, 21),
            potentials: Sweep::range(0.0, 0.8, 9),
            separations: Sweep::range(3.0, 6.0, 31),
        })),
        "fig5b" => Job::Conveyor(ConveyorParams::Transfer(ConveyorTransfer {
            pulse: fig5_pulse(),
            separation: 6.0,
            coupling: 0.007,
            detuning: None,
            bound_grid: BoundStateGrid::default(),
            cavity_dt: 0.5,
            duration: None,
            record_interval: 2.0,
            full_model: Some(FullModel {
                domain: Domain {
                    centre: Some(0.0),
                    half_width: 32.0,
                    dx: 1.0 / 16.0,
                    absorber: Some(6.0),
                },
                dt: None,
            }),
        })),
        "fig5c" => Job::Conveyor(ConveyorParams::Scan(ConveyorScan {
            spec: TransferScanSpec {
                omega: 0.05,
                coupling: 0.007,
                separation: 6.0,
                tuning: TuningMode::Retuned,
                dt: 0.5,
                grid: Some(BoundStateGrid {
                    dx: 1.0 / 8.0,
                    half_width_in_widths: 6.0,
                }),
            },
            potentials: Sweep::range(0.1, 1.0, 10),
            widths: Sweep::range(0.5, 4.0, 8),
        })),
        "fig7a" => bands2d(fig7_lattice(0.0, 0.0), 0.02),
        "fig7b" => bands2d(fig7_lattice(0.0, 0.4), 0.2),
        "fig7c" => bands2d(fig7_lattice(0.4, 0.4), 0.1),
        "fig8a" => corrmap(fig7_lattice(0.0, 0.0), 0.02),
        "fig8b" => corrmap(fig7_lattice(0.4, 0.4), 0.1),
        "fig9a" => Job::Scales(ScalesParams::Miniband(MinibandScan {
            materials: None,
            material: "silicon".into(),
            lattice_period_um: 3.0,
            acoustic_frequency_ghz: 1.0,
            depths_ghz: Sweep::range(50.0, 4000.0, 80),
        })),
        "fig9b" => Job::DecaySim(DecaySimParams {
            emitter: EmitterSpec::new(1.0 / 12.0, -0.25, 0.02),
            pulses: vec![pulse(0.3, 0.4, Direction::Right, Envelope::Constant)],
            statics: vec![StaticLattice {
                depth: 2.5,
                period_ratio: 3,
            }],
            domain: Domain {
                centre: None,
                half_width: 64.0,
                dx: 1.0 / 32.0,
                absorber: Some(8.0),
            },
            duration: 400.0,
            dt: None,
            record_interval: 1.0,
            quasistatic: None,
            superlattice_rates: true,
            fit_window: Some([50.0, 300.0]),
            snapshots: None,
        }),
        _ => return None,
    })
}

/// The explicit run behind a preset.
pub fn expand(name: &str) -> Result<RunConfig, CliError> {
    let job = job(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    let mut config = RunConfig::new(name, job);
    config.preset = Some(name.to_string());
    Ok(config)
}
