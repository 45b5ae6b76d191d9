//! Dry-run checks: parameter ranges and the weak-coupling condition.

use aowqed_core::dynamics1d::{EmitterSpec, PulseSpec};
use serde::Serialize;

use crate::config::{
    ConveyorParams, ConveyorScan, ConveyorTransfer, DecaySimParams, Domain, EntangleMap, EntangleParams, EntangleRamp, Job,
    MinibandScan, RunConfig, ScalesParams, ScalesTable, Sweep,
};

/// `g_0/Ω_r` above which Born-Markov rates are flagged.
pub const MARKOV_COUPLING_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Report {
    fn check(&mut self, field: &str, result: aowqed_core::Result<()>) {
        if let Err(e) = result {
            self.errors.push(format!("{field}: {e}"));
        }
    }

    fn sweep(&mut self, field: &str, sweep: &Sweep) {
        if let Err(e) = sweep.check(field) {
            self.errors.push(e);
        }
    }

    fn positive(&mut self, field: &str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.errors.push(format!("{field}: must be finite and > 0, got {value}"));
        }
    }

    fn at_least(&mut self, field: &str, value: usize, min: usize) {
        if value < min {
            self.errors.push(format!("{field}: need at least {min}, got {value}"));
        }
    }

    fn markov(&mut self, field: &str, coupling: f64) {
        if coupling > MARKOV_COUPLING_LIMIT {
            self.warnings.push(format!(
                "{field}: g0/Ω_r = {coupling} exceeds {MARKOV_COUPLING_LIMIT}; Born-Markov rates are unreliable"
            ));
        }
    }

    fn emitter(&mut self, field: &str, e: &EmitterSpec) {
        self.check(field, e.validate());
    }

    fn pulse(&mut self, field: &str, p: &PulseSpec) {
        self.check(field, p.validate());
    }

    fn domain(&mut self, field: &str, d: &Domain) {
        self.positive(&format!("{field}.half_width"), d.half_width);
        self.positive(&format!("{field}.dx"), d.dx);
        if let Some(a) = d.absorber {
            self.positive(&format!("{field}.absorber"), a);
            if a >= d.half_width {
                self.errors
                    .push(format!("{field}.absorber: wider than the half-width {}", d.half_width));
            }
        }
    }
}

pub fn validate(config: &RunConfig) -> Report {
    let mut r = Report::default();
    match &config.job {
        Job::Scales(ScalesParams::Table(ScalesTable { rows, .. })) => {
            if rows.is_empty() {
                r.errors.push("params.rows: no rows".into());
            }
            for (i, row) in rows.iter().enumerate() {
                r.positive(&format!("params.rows[{i}].wavelength_um"), row.wavelength_um);
            }
        }
        Job::Scales(ScalesParams::Miniband(MinibandScan {
            lattice_period_um,
            acoustic_frequency_ghz,
            depths_ghz,
            ..
        })) => {
            r.positive("params.lattice_period_um", *lattice_period_um);
            r.positive("params.acoustic_frequency_ghz", *acoustic_frequency_ghz);
            r.sweep("params.depths_ghz", depths_ghz);
        }
        Job::Bands1d(p) => {
            r.check("params.lattice", p.lattice.validate());
            r.at_least("params.k_points", p.k_points, 2);
            if p.energy_window[0] >= p.energy_window[1] {
                r.errors.push("params.energy_window: lower bound must be below upper".into());
            }
        }
        Job::Rates1d(p) => {
            r.check("params.lattice", p.lattice.validate());
            r.at_least("params.k_points", p.k_points, 2);
            r.sweep("params.values", &p.values);
            r.markov("params.coupling", p.coupling);
        }
        Job::Dmap(p) => {
            r.at_least("params.k_points", p.k_points, 2);
            r.sweep("params.detunings", &p.detunings);
            r.sweep("params.parameters", &p.parameters);
            if let Some(g) = p.coupling {
                r.markov("params.coupling", g);
            }
        }
        Job::DecaySim(p) => decay_sim(&mut r, p),
        Job::Entangle(EntangleParams::Ramp(EntangleRamp { protocol })) => {
            r.positive("params.protocol.dt", protocol.dt);
            r.positive("params.protocol.duration", protocol.duration);
            r.at_least("params.protocol.table_points", protocol.table_points, 2);
            if protocol.ramp_end < protocol.ramp_start {
                r.errors.push("params.protocol.ramp_end: before ramp_start".into());
            }
            r.markov("params.protocol.coupling", protocol.coupling);
        }
        Job::Entangle(EntangleParams::Map(EntangleMap {
            coupling,
            detunings,
            potentials,
            separations,
            ..
        })) => {
            r.sweep("params.detunings", detunings);
            r.sweep("params.potentials", potentials);
            r.sweep("params.separations", separations);
            r.markov("params.coupling", *coupling);
        }
        Job::Conveyor(ConveyorParams::Transfer(ConveyorTransfer {
            pulse,
            separation,
            coupling,
            cavity_dt,
            record_interval,
            full_model,
            ..
        })) => {
            r.pulse("params.pulse", pulse);
            r.positive("params.separation", *separation);
            r.positive("params.cavity_dt", *cavity_dt);
            r.positive("params.record_interval", *record_interval);
            r.check(
                "params.coupling",
                EmitterSpec::new(0.0, 0.0, *coupling).validate(),
            );
            if let Some(full) = full_model {
                r.domain("params.full_model.domain", &full.domain);
            }
        }
        Job::Conveyor(ConveyorParams::Scan(ConveyorScan {
            spec,
            potentials,
            widths,
        })) => {
            r.positive("params.spec.dt", spec.dt);
            r.sweep("params.potentials", potentials);
            r.sweep("params.widths", widths);
        }
        Job::Bands2d(p) => {
            r.check("params.lattice", p.lattice.validate());
            r.check("params.contour_grid", p.contour_grid.validate());
            r.at_least("params.k_points", p.k_points, 2);
        }
        Job::Emission2d(p) => {
            r.check("params.lattice", p.lattice.validate());
            r.check("params.contour_grid", p.contour_grid.validate());
            r.at_least("params.bins", p.bins, 1);
        }
        Job::Corrmap(p) => {
            r.check("params.lattice", p.lattice.validate());
            r.check("params.contour_grid", p.contour_grid.validate());
            r.sweep("params.xs", &p.xs);
            r.sweep("params.ys", &p.ys);
            if let Some(radial) = &p.radial {
                r.sweep("params.radial.distances", &radial.distances);
            }
        }
    }
    r
}

fn decay_sim(r: &mut Report, p: &DecaySimParams) {
    r.emitter("params.emitter", &p.emitter);
    for (i, pulse) in p.pulses.iter().enumerate() {
        r.pulse(&format!("params.pulses[{i}]"), pulse);
    }
    r.domain("params.domain", &p.domain);
    r.positive("params.duration", p.duration);
    r.positive("params.record_interval", p.record_interval);
    if let Some(dt) = p.dt {
        r.positive("params.dt", dt);
    }
    if let Some(q) = p.quasistatic {
        r.at_least("params.quasistatic.table_points", q.table_points, 2);
        let peak = p.pulses.iter().map(|x| x.v_a).fold(0.0, f64::max);
        if q.v_a_max < peak {
            r.errors.push(format!(
                "params.quasistatic.v_a_max: {} is below the strongest pulse {peak}",
                q.v_a_max
            ));
        }
    }
    if p.quasistatic.is_some() || p.superlattice_rates {
        r.markov("params.emitter.coupling", p.emitter.coupling);
    }
}
