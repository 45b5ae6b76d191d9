use aowqed_core::dynamics1d::{
    evolve_exact, evolve_quasistatic, fit_decay_rate, Envelope, ExactConfig, Grid, Propagator, PulseSpec, RateTable,
};
use aowqed_core::floquet1d::{slow_light_rates, LatticeSpec1D};
use aowqed_core::scales::gamma0;

use super::{stride, sup_deviation};
use crate::config::{DecaySimParams, Domain};
use crate::error::{CliError, Context};
use crate::output::{num, Outcome, Table};

/// Courant-like safety factor for the default step.
pub(crate) const STEP_FACTOR: f64 = 0.45;

pub(crate) fn grid_for(domain: &Domain, default_centre: f64) -> Grid {
    Grid::centred(domain.centre.unwrap_or(default_centre), domain.half_width, domain.dx)
}

fn schema(path: &str, message: &str) -> CliError {
    CliError::Schema {
        path: path.to_string(),
        message: message.to_string(),
    }
}

/// The single continuous wave and static lattice the superlattice rates need.
fn superlattice(p: &DecaySimParams) -> Result<LatticeSpec1D, CliError> {
    let [pulse] = p.pulses.as_slice() else {
        return Err(schema("params.pulses", "superlattice rates need exactly one pulse"));
    };
    let [lattice] = p.statics.as_slice() else {
        return Err(schema("params.statics", "superlattice rates need exactly one static lattice"));
    };
    if pulse.envelope != Envelope::Constant {
        return Err(schema("params.pulses[0].envelope", "superlattice rates need a constant envelope"));
    }
    Ok(LatticeSpec1D::superlattice(
        pulse.v_a,
        pulse.omega * pulse.direction.sign(),
        lattice.depth,
        lattice.period_ratio,
        p.emitter.position,
    ))
}

fn common_omega(pulses: &[PulseSpec]) -> Result<f64, CliError> {
    let omega = pulses.first().map(|p| p.omega).unwrap_or(0.0);
    if pulses.iter().any(|p| p.omega != omega) {
        return Err(schema("params.pulses", "quasi-static rates need a common acoustic frequency"));
    }
    Ok(omega)
}

pub fn run(p: &DecaySimParams) -> Result<Outcome, CliError> {
    let grid = grid_for(&p.domain, p.emitter.position);
    let emitters = [p.emitter];
    let dt = match p.dt {
        Some(dt) => dt,
        None => {
            let prop = Propagator::new(grid, &emitters, &p.pulses, &p.statics, p.domain.absorber).context("dynamics1d")?;
            STEP_FACTOR / prop.max_energy()
        }
    };
    let config = ExactConfig {
        grid,
        dt,
        duration: p.duration,
        record_stride: stride(p.record_interval, dt),
        absorber: p.domain.absorber,
        snapshot_stride: p.snapshots.map_or(0, |s| stride(s.interval, dt)),
        snapshot_decimation: p.snapshots.map_or(1, |s| s.decimation),
    };
    let traj = evolve_exact(&emitters, &p.pulses, &p.statics, &config, None).context("dynamics1d")?;
    let excited = &traj.populations[0];

    let mut out = Outcome::default();
    let mut header = vec!["t", "p_exact", "norm", "field_right", "field_left"];
    let mut extra: Vec<&[f64]> = Vec::new();

    let quasistatic = match p.quasistatic {
        Some(q) => {
            let table = RateTable::build(common_omega(&p.pulses)?, p.emitter.detuning, q.v_a_max, q.table_points)
                .context("dynamics1d")?;
            let flagged = table.near_divergent.iter().filter(|&&b| b).count();
            if flagged > 0 {
                out.warnings
                    .push(format!("{flagged} rate-table entries at a band extremum; velocity clamped"));
            }
            Some(evolve_quasistatic(&p.emitter, &p.pulses, &table, &traj.times).context("dynamics1d")?)
        }
        None => None,
    };
    if let Some(q) = &quasistatic {
        header.extend(["p_quasistatic", "emitted_right", "emitted_left"]);
        extra.extend([q.excited.as_slice(), &q.emitted_right, &q.emitted_left]);
        out.summarize(
            "quasistatic_sup_deviation",
            sup_deviation(&traj.times, excited, &q.times, &q.excited, f64::INFINITY),
        );
    }

    let markov = if p.superlattice_rates {
        let rates = slow_light_rates(&superlattice(p)?, p.emitter.detuning).context("floquet1d")?;
        let scale = gamma0(p.emitter.coupling);
        let ng = p.emitter.nonguided_decay;
        let curve = |rate: f64| -> Vec<f64> { traj.times.iter().map(|t| (-(rate + ng) * scale * t).exp()).collect() };
        out.summarize("born_markov_rate", rates.born_markov);
        out.summarize("effective_mass_rate", rates.effective_mass);
        out.summarize("miniband", rates.miniband);
        Some((curve(rates.born_markov), curve(rates.effective_mass)))
    } else {
        None
    };
    if let Some((bm, em)) = &markov {
        header.extend(["p_born_markov", "p_effective_mass"]);
        extra.extend([bm.as_slice(), em.as_slice()]);
        out.summarize(
            "born_markov_sup_deviation",
            sup_deviation(&traj.times, excited, &traj.times, bm, f64::INFINITY),
        );
        out.summarize(
            "effective_mass_sup_deviation",
            sup_deviation(&traj.times, excited, &traj.times, em, f64::INFINITY),
        );
    }

    let mut table = Table::new(&header);
    for (n, &t) in traj.times.iter().enumerate() {
        let mut row = vec![t, excited[n], traj.norms[n], traj.field_right[n], traj.field_left[n]];
        row.extend(extra.iter().map(|col| col[n]));
        table.push_numbers(&row);
    }
    out.table("", table);

    if !traj.snapshots.is_empty() {
        let mut header = vec!["t".to_string()];
        header.extend(traj.snapshot_positions.iter().map(|x| num(*x)));
        let mut field = Table::new(&header);
        for (t, row) in traj.snapshot_times.iter().zip(&traj.snapshots) {
            let mut cells = vec![*t];
            cells.extend(row);
            field.push_numbers(&cells);
        }
        out.table("_field", field);
    }

    if let Some([lo, hi]) = p.fit_window {
        let rate = fit_decay_rate(&traj.times, excited, lo, hi);
        out.summarize("fitted_rate", rate);
        out.summarize("fitted_rate_over_gamma0", rate.map(|r| r / gamma0(p.emitter.coupling)));
    }
    out.summarize("dt", dt);
    out.summarize("grid", grid);
    out.summarize("final_excited", excited.last());
    out.summarize("final_norm", traj.norms.last());
    out.summarize("final_field_right", traj.field_right.last());
    out.summarize("final_field_left", traj.field_left.last());
    Ok(out)
}
