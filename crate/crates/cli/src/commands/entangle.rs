use aowqed_core::cascade::{averaged_concurrence, run_ramp_protocol};
use aowqed_core::Error;
use rayon::prelude::*;

use super::flag;
use crate::config::{EntangleMap, EntangleParams, EntangleRamp};
use crate::error::{CliError, Context};
use crate::output::{num, Outcome, Table};

pub fn run(p: &EntangleParams) -> Result<Outcome, CliError> {
    match p {
        EntangleParams::Ramp(EntangleRamp { protocol }) => {
            let outcome = run_ramp_protocol(protocol).context("cascade")?;
            let mut table = Table::new(&["t", "v_a", "purity", "concurrence", "correlation"]);
            for n in 0..outcome.times.len() {
                table.push_numbers(&[
                    outcome.times[n],
                    outcome.potential[n],
                    outcome.purity[n],
                    outcome.concurrence[n],
                    outcome.correlation[n],
                ]);
            }
            let mut out = Outcome::default();
            out.summarize("rabi", outcome.rabi);
            out.summarize("phases", &outcome.phases);
            out.summarize("final_purity", outcome.purity.last());
            out.summarize("final_concurrence", outcome.concurrence.last());
            out.summarize("final_correlation", outcome.correlation.last());
            out.table("", table);
            Ok(out)
        }
        EntangleParams::Map(EntangleMap {
            omega,
            coupling,
            gamma_ng,
            rabi_over_gamma,
            detunings,
            potentials,
            separations,
        }) => {
            let seps = separations.values();
            let cells: Vec<(f64, f64)> = potentials
                .values()
                .into_iter()
                .flat_map(|v| detunings.values().into_iter().map(move |d| (d, v)))
                .collect();
            let values: Vec<Result<Option<f64>, CliError>> = cells
                .par_iter()
                .map(|&(d, v)| {
                    match averaged_concurrence(v, *omega, d, *coupling, *gamma_ng, *rabi_over_gamma, &seps) {
                        Ok(c) => Ok(Some(c)),
                        // no Markovian steady state at a band extremum
                        Err(Error::NearDivergent { .. }) => Ok(None),
                        Err(e) => Err(e).context("cascade"),
                    }
                })
                .collect();
            let mut table = Table::new(&["detuning", "v_a", "concurrence", "near_divergent"]);
            let mut skipped = 0;
            for (&(d, v), c) in cells.iter().zip(values) {
                let c = c?;
                skipped += usize::from(c.is_none());
                table.push(vec![num(d), num(v), c.map(num).unwrap_or_default(), flag(c.is_none())]);
            }
            let mut out = Outcome::default();
            if skipped > 0 {
                out.warnings
                    .push(format!("{skipped} cell(s) at a band extremum left empty"));
            }
            out.summarize("separations", seps.len());
            out.table("", table);
            Ok(out)
        }
    }
}
