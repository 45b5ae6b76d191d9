use aowqed_core::floquet1d::{
    directionality_map, find_resonances, quasi_energy_bands, rates_unchecked, resonance_rate, zone_grid, CellFlag,
    FloquetBands, LatticeSpec1D, MapAxis, VELOCITY_FLOOR,
};
use aowqed_core::scales::gamma0;
use rayon::prelude::*;

use super::flag;
use crate::config::{Bands1dParams, DmapParams, Rates1dParams, SweepParameter};
use crate::error::{CliError, Context};
use crate::output::{num, Outcome, Table};

pub fn bands(p: &Bands1dParams) -> Result<Outcome, CliError> {
    let bands = quasi_energy_bands(&p.lattice, &zone_grid(p.k_points), None).context("floquet1d")?;
    let [lo, hi] = p.energy_window;
    let mut table = Table::new(&["k", "branch", "quasi_energy", "group_velocity"]);
    for sample in &bands.samples {
        for (j, (&e, &v)) in sample.values.iter().zip(&sample.velocities).enumerate() {
            if e >= lo && e <= hi && !sample.is_edge_state(j) {
                table.push(vec![num(sample.k), j.to_string(), num(e), num(v)]);
            }
        }
    }
    let mut out = Outcome::default();
    out.certify(bands.certificate);
    out.summarize("band_floor", bands.band_floor());
    out.table("", table);
    if let Some(detuning) = p.detuning {
        resonance_table(&mut out, &bands, detuning);
    }
    Ok(out)
}

fn resonance_table(out: &mut Outcome, bands: &FloquetBands, detuning: f64) {
    let res = find_resonances(detuning, bands);
    let mut table = Table::new(&[
        "k",
        "unfolded_k",
        "branch",
        "harmonic",
        "weight",
        "group_velocity",
        "rate",
        "near_divergent",
    ]);
    for r in &res.entries {
        table.push(vec![
            num(r.k),
            num(r.unfolded_k),
            r.branch.to_string(),
            r.harmonic.to_string(),
            num(r.weight),
            num(r.group_velocity),
            num(resonance_rate(r)),
            flag(r.near_divergent),
        ]);
    }
    let rates = rates_unchecked(&res, 0.0, VELOCITY_FLOOR);
    out.summarize("detuning", detuning);
    out.summarize("gamma_r", rates.gamma_r);
    out.summarize("gamma_l", rates.gamma_l);
    out.summarize("directionality", rates.directionality);
    if let Err(e) = res.require_markov_valid() {
        out.warnings.push(e.to_string());
    }
    out.table("_resonances", table);
}

pub fn rates(p: &Rates1dParams) -> Result<Outcome, CliError> {
    let values = p.values.values();
    let grid = zone_grid(p.k_points);
    let spec_for = |value: f64| -> LatticeSpec1D {
        let mut spec = p.lattice;
        match p.sweep {
            SweepParameter::VA => spec.v_a = value,
            SweepParameter::Omega => spec.omega = value,
            SweepParameter::Detuning => {}
        }
        spec
    };
    // a detuning sweep shares one band structure
    let shared = match p.sweep {
        SweepParameter::Detuning => Some(quasi_energy_bands(&p.lattice, &grid, None).context("floquet1d")?),
        _ => None,
    };
    let rows: Vec<Result<_, CliError>> = values
        .par_iter()
        .map(|&value| {
            let owned;
            let bands = match &shared {
                Some(b) => b,
                None => {
                    owned = quasi_energy_bands(&spec_for(value), &grid, None).context("floquet1d")?;
                    &owned
                }
            };
            let detuning = match p.sweep {
                SweepParameter::Detuning => value,
                _ => p.detuning,
            };
            let res = find_resonances(detuning, bands);
            let near = res.require_markov_valid().is_err();
            let rates = rates_unchecked(&res, p.coupling, VELOCITY_FLOOR);
            Ok((value, rates, near, res.entries.len(), bands.certificate))
        })
        .collect();
    let column = match p.sweep {
        SweepParameter::VA => "v_a",
        SweepParameter::Omega => "omega",
        SweepParameter::Detuning => "detuning",
    };
    let mut table = Table::new(&[column, "gamma_r", "gamma_l", "directionality", "resonances", "near_divergent"]);
    let mut out = Outcome::default();
    let mut flagged = 0;
    for row in rows {
        let (value, rates, near, count, certificate) = row?;
        flagged += usize::from(near);
        table.push(vec![
            num(value),
            num(rates.gamma_r),
            num(rates.gamma_l),
            num(rates.directionality),
            count.to_string(),
            flag(near),
        ]);
        if shared.is_none() || out.certificates.is_empty() {
            out.certify(certificate);
        }
    }
    if flagged > 0 {
        out.warnings.push(format!(
            "{flagged} sweep point(s) have a resonance at a band extremum; velocity clamped to {VELOCITY_FLOOR}"
        ));
    }
    out.summarize("gamma0", gamma0(p.coupling));
    out.table("", table);
    Ok(out)
}

pub fn dmap(p: &DmapParams) -> Result<Outcome, CliError> {
    let map = directionality_map(p.axis, p.fixed, &p.detunings.values(), &p.parameters.values(), p.k_points)
        .context("floquet1d")?;
    let column = match p.axis {
        MapAxis::Potential => "v_a",
        MapAxis::Frequency => "omega",
    };
    let mut table = Table::new(&["detuning", column, "directionality", "gamma_r", "gamma_l", "flag"]);
    let mut near = 0;
    for c in &map.cells {
        let label = match c.flag {
            CellFlag::Ok => "ok",
            CellFlag::OutsideBand => "outside_band",
            CellFlag::NearDivergent => {
                near += 1;
                "near_divergent"
            }
        };
        table.push(vec![
            num(c.detuning),
            num(c.parameter),
            num(c.directionality),
            num(c.gamma_r),
            num(c.gamma_l),
            label.to_string(),
        ]);
    }
    let mut out = Outcome::default();
    for c in &map.certificates {
        out.certify(c);
    }
    if near > 0 {
        out.warnings
            .push(format!("{near} cell(s) near a band extremum; |D| clipped"));
    }
    out.summarize("axis", map.axis);
    out.summarize("fixed", map.fixed);
    if let Some(g) = p.coupling {
        out.summarize("gamma0", gamma0(g));
    }
    out.table("", table);
    Ok(out)
}
