use aowqed_core::dynamics1d::{
    comoving_bound_states, evolve_exact, moving_cavity_evolve, transfer_scan, CavityConfig, EmitterSpec, Envelope,
    ExactConfig, Propagator,
};

use super::decay::{grid_for, STEP_FACTOR};
use super::{stride, sup_deviation, transfer_delay};
use crate::config::{ConveyorParams, ConveyorScan, ConveyorTransfer};
use crate::error::{CliError, Context};
use crate::output::{num, Outcome, Table};

pub fn run(p: &ConveyorParams) -> Result<Outcome, CliError> {
    match p {
        ConveyorParams::Transfer(ConveyorTransfer {
            pulse,
            separation,
            coupling,
            detuning,
            bound_grid,
            cavity_dt,
            duration,
            record_interval,
            full_model,
        }) => {
            let Envelope::Gaussian { center, .. } = pulse.envelope else {
                return Err(CliError::Schema {
                    path: "params.pulse.envelope".into(),
                    message: "the conveyor needs a gaussian pulse".into(),
                });
            };
            let bound = comoving_bound_states(pulse, pulse.velocity(), *bound_grid).context("dynamics1d")?;
            let Some(&ground) = bound.energies.first() else {
                return Err(CliError::Schema {
                    path: "params.pulse".into(),
                    message: "the pulse binds no state".into(),
                });
            };
            let detuning = detuning.unwrap_or(ground);
            let emitters = [
                EmitterSpec::new(0.0, detuning, *coupling),
                EmitterSpec::new(*separation, detuning, *coupling),
            ];
            let duration = duration.unwrap_or((separation + 2.0 * center.abs()) / pulse.speed());
            let cavity = moving_cavity_evolve(
                &emitters,
                &bound,
                &CavityConfig {
                    pulse_start: center,
                    duration,
                    dt: *cavity_dt,
                    level: 0,
                    record_stride: stride(*record_interval, *cavity_dt),
                },
            )
            .context("dynamics1d")?;
            let mut out = Outcome::default();
            let mut table = Table::new(&["t", "p_sender", "p_receiver", "p_cavity"]);
            for (n, &t) in cavity.times.iter().enumerate() {
                table.push_numbers(&[t, cavity.populations[0][n], cavity.populations[1][n], cavity.cavity[n]]);
            }
            out.table("", table);
            out.summarize("bound_energies", &bound.energies);
            out.summarize("detuning", detuning);
            out.summarize("duration", duration);
            out.summarize("transfer", cavity.transfer);
            out.summarize("pulse_areas", &cavity.pulse_areas);
            out.summarize("mode_gap", cavity.mode_gap);
            out.summarize(
                "delay",
                transfer_delay(&cavity.times, &cavity.populations[0], &cavity.populations[1]),
            );
            let largest = coupling.abs().max(pulse.omega.abs());
            if cavity.mode_gap < 10.0 * largest {
                out.warnings.push(format!(
                    "mode gap {} is within a factor 10 of the couplings; the single-mode model is approximate",
                    num(cavity.mode_gap)
                ));
            }

            if let Some(full) = full_model {
                let grid = grid_for(&full.domain, 0.0);
                let dt = match full.dt {
                    Some(dt) => dt,
                    None => {
                        let prop = Propagator::new(grid, &emitters, &[*pulse], &[], full.domain.absorber)
                            .context("dynamics1d")?;
                        STEP_FACTOR / prop.max_energy()
                    }
                };
                let config = ExactConfig {
                    grid,
                    dt,
                    duration,
                    record_stride: stride(*record_interval, dt),
                    absorber: full.domain.absorber,
                    snapshot_stride: 0,
                    snapshot_decimation: 1,
                };
                let traj = evolve_exact(&emitters, &[*pulse], &[], &config, None).context("dynamics1d")?;
                let mut table = Table::new(&["t", "p_sender", "p_receiver", "norm"]);
                for (n, &t) in traj.times.iter().enumerate() {
                    table.push_numbers(&[t, traj.populations[0][n], traj.populations[1][n], traj.norms[n]]);
                }
                out.table("_full", table);
                let deviation = (0..2)
                    .map(|i| {
                        sup_deviation(&traj.times, &traj.populations[i], &cavity.times, &cavity.populations[i], f64::INFINITY)
                    })
                    .fold(0.0, f64::max);
                out.summarize("full_dt", dt);
                out.summarize("full_transfer", traj.populations[1].last());
                out.summarize(
                    "full_delay",
                    transfer_delay(&traj.times, &traj.populations[0], &traj.populations[1]),
                );
                out.summarize("full_vs_cavity_sup_deviation", deviation);
            }
            Ok(out)
        }
        ConveyorParams::Scan(ConveyorScan {
            spec,
            potentials,
            widths,
        }) => {
            let cells = transfer_scan(&potentials.values(), &widths.values(), spec).context("dynamics1d")?;
            let mut table = Table::new(&["v_a", "width", "bound_energy", "transfer", "pulse_area"]);
            let mut unbound = 0;
            for c in &cells {
                unbound += usize::from(c.bound_energy.is_none());
                table.push(vec![
                    num(c.v_a),
                    num(c.width),
                    c.bound_energy.map(num).unwrap_or_default(),
                    num(c.transfer),
                    num(c.pulse_area),
                ]);
            }
            let mut out = Outcome::default();
            if let Some(best) = cells.iter().max_by(|a, b| a.transfer.total_cmp(&b.transfer)) {
                out.summarize("best", best);
            }
            out.summarize("unbound_cells", unbound);
            out.table("", table);
            Ok(out)
        }
    }
}
