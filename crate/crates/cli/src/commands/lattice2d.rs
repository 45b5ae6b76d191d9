use std::f64::consts::PI;

use aowqed_core::floquet2d::{
    correlation_map, coupling_2d, emission_2d, isotropic_rate, quasi_energy_2d, resonance_contour, ResonanceContour,
};
use rayon::prelude::*;

use crate::config::{Bands2dParams, CorrmapParams, Emission2dParams};
use crate::error::{CliError, Context};
use crate::output::{num, Outcome, Table};

fn contour_table(contour: &ResonanceContour) -> Table {
    let mut table = Table::new(&["polyline", "closed", "kx", "ky", "weight", "vx", "vy"]);
    for (i, line) in contour.polylines.iter().enumerate() {
        for p in &line.points {
            table.push(vec![
                i.to_string(),
                super::flag(line.closed),
                num(p.k[0]),
                num(p.k[1]),
                num(p.weight),
                num(p.velocity[0]),
                num(p.velocity[1]),
            ]);
        }
    }
    table
}

fn emission_tables(
    out: &mut Outcome,
    suffix: &str,
    contour: &ResonanceContour,
    coupling: f64,
    bins: usize,
) -> Result<(), CliError> {
    let emission = emission_2d(contour, coupling, bins).context("floquet2d")?;
    let mut polar = Table::new(&["angle", "density"]);
    for (a, d) in emission.polar.angles.iter().zip(&emission.polar.density) {
        polar.push_numbers(&[*a, *d]);
    }
    let mean = emission.polar.integral() / (2.0 * PI);
    let peak = emission.polar.density.iter().copied().fold(0.0, f64::max);
    out.summarize("gamma", emission.gamma);
    out.summarize("isotropic_gamma", isotropic_rate(coupling));
    out.summarize("peak_angle", emission.polar.peak_angle());
    out.summarize("peak_to_mean", if mean > 0.0 { peak / mean } else { 0.0 });
    out.summarize("excluded_segments", emission.excluded_segments);
    out.summarize("excluded_length", emission.excluded_length);
    if emission.excluded_segments > 0 {
        out.warnings.push(format!(
            "{} contour segment(s) below the velocity floor excluded",
            emission.excluded_segments
        ));
    }
    out.table(suffix, polar);
    Ok(())
}

fn note_contour(out: &mut Outcome, contour: &ResonanceContour) {
    out.summarize("polylines", contour.polylines.len());
    out.summarize("boundary_weight", contour.boundary_weight);
    if contour.is_empty() {
        out.warnings.push("no resonance contour at this detuning".into());
    }
}

pub fn bands(p: &Bands2dParams) -> Result<Outcome, CliError> {
    p.lattice.validate().context("floquet2d")?;
    if p.k_points < 2 {
        return Err(CliError::Schema {
            path: "params.k_points".into(),
            message: "need at least two points per axis".into(),
        });
    }
    let axis: Vec<f64> = (0..p.k_points)
        .map(|i| -PI + 2.0 * PI * i as f64 / (p.k_points - 1) as f64)
        .collect();
    let rows: Vec<Result<Vec<f64>, CliError>> = axis
        .par_iter()
        .flat_map_iter(|&ky| {
            axis.iter().map(move |&kx| {
                let s = quasi_energy_2d(&p.lattice, [kx, ky]).context("floquet2d")?;
                Ok(vec![kx, ky, s.energy, s.weight, s.velocity[0], s.velocity[1]])
            })
        })
        .collect();
    let mut sheet = Table::new(&["kx", "ky", "quasi_energy", "weight", "vx", "vy"]);
    for row in rows {
        sheet.push_numbers(&row?);
    }
    let mut out = Outcome::default();
    out.table("", sheet);
    if let Some(detuning) = p.detuning {
        let contour = resonance_contour(detuning, &p.lattice, p.contour_grid).context("floquet2d")?;
        note_contour(&mut out, &contour);
        out.table("_contour", contour_table(&contour));
        if let Some(bins) = p.polar_bins {
            emission_tables(&mut out, "_polar", &contour, 1.0, bins)?;
        }
    }
    Ok(out)
}

pub fn emission(p: &Emission2dParams) -> Result<Outcome, CliError> {
    let contour = resonance_contour(p.detuning, &p.lattice, p.contour_grid).context("floquet2d")?;
    let mut out = Outcome::default();
    note_contour(&mut out, &contour);
    emission_tables(&mut out, "", &contour, p.coupling, p.bins)?;
    out.table("_contour", contour_table(&contour));
    Ok(out)
}

pub fn corrmap(p: &CorrmapParams) -> Result<Outcome, CliError> {
    let map = correlation_map(&p.lattice, p.detuning, &p.xs.values(), &p.ys.values(), p.gamma_ng, p.contour_grid)
        .context("floquet2d")?;
    let mut table = Table::new(&["x", "y", "lambda"]);
    for (y, row) in map.ys.iter().zip(&map.lambda) {
        for (x, l) in map.xs.iter().zip(row) {
            table.push_numbers(&[*x, *y, *l]);
        }
    }
    let mut out = Outcome::default();
    out.summarize("gamma", map.gamma);
    out.table("", table);
    if let Some(radial) = &p.radial {
        let contour = resonance_contour(p.detuning, &p.lattice, p.contour_grid).context("floquet2d")?;
        let (s, c) = radial.angle.sin_cos();
        let rows: Vec<Result<Vec<f64>, CliError>> = radial
            .distances
            .values()
            .par_iter()
            .map(|&d| {
                let k = coupling_2d(&contour, 1.0, [d * c, d * s], p.gamma_ng).context("floquet2d")?;
                Ok(vec![d, k.lambda, k.a12.re, k.a12.im])
            })
            .collect();
        let mut radial_table = Table::new(&["distance", "lambda", "a12_re", "a12_im"]);
        for row in rows {
            radial_table.push_numbers(&row?);
        }
        out.table("_radial", radial_table);
    }
    Ok(out)
}
