use std::f64::consts::PI;

use aowqed_core::scales::{derive_scales, miniband_params, HBAR, PLANCK};

use crate::config::{find_material, load_materials, MinibandScan, ScalesParams, ScalesTable};
use crate::error::{CliError, Context};
use crate::output::{num, Outcome, Table};

const GHZ: f64 = 1e9;
const UM: f64 = 1e-6;

fn rad_per_s_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI) / GHZ
}

pub fn run(params: &ScalesParams) -> Result<Outcome, CliError> {
    match params {
        ScalesParams::Table(ScalesTable {
            materials,
            rows,
            coupling_ghz,
        }) => table(materials.as_deref(), rows, *coupling_ghz),
        ScalesParams::Miniband(MinibandScan {
            materials,
            material,
            lattice_period_um,
            acoustic_frequency_ghz,
            depths_ghz,
        }) => {
            let materials = load_materials(materials.as_deref())?;
            let spec = find_material(&materials, material)?;
            let m_bare = spec.effective_mass();
            let period = lattice_period_um * UM;
            let k_a = 2.0 * PI * acoustic_frequency_ghz * GHZ / spec.speed_of_sound;
            let bare_recoil = HBAR * k_a * k_a / (2.0 * m_bare);
            let mut table = Table::new(&[
                "static_depth_ghz",
                "bandwidth_ghz",
                "mass_ratio",
                "recoil_eff_ghz",
                "recoil_ratio",
                "harmonics",
            ]);
            for depth in depths_ghz.values() {
                let mb = miniband_params(PLANCK * depth * GHZ, period, m_bare, k_a).context("scales")?;
                table.push(vec![
                    num(depth),
                    num(rad_per_s_to_ghz(mb.bandwidth)),
                    num(mb.effective_mass_eff / m_bare),
                    num(rad_per_s_to_ghz(mb.recoil_eff)),
                    num(mb.recoil_eff / bare_recoil),
                    mb.harmonics.to_string(),
                ]);
            }
            let mut out = Outcome::default();
            out.summarize("material", &spec);
            out.summarize("acoustic_wavelength_m", 2.0 * PI / k_a);
            out.summarize("bare_recoil_ghz", rad_per_s_to_ghz(bare_recoil));
            out.table("", table);
            Ok(out)
        }
    }
}

fn table(
    materials: Option<&std::path::Path>,
    rows: &[crate::config::ScalesRow],
    coupling_ghz: Option<f64>,
) -> Result<Outcome, CliError> {
    let materials = load_materials(materials)?;
    let mut header = vec![
        "material",
        "wavelength_um",
        "acoustic_frequency_ghz",
        "recoil_frequency_ghz",
        "frequency_ratio",
        "potential_ratio",
        "effective_mass_kg",
    ];
    if coupling_ghz.is_some() {
        header.extend(["coupling_ratio", "gamma0_ghz"]);
    }
    let mut table = Table::new(&header);
    let mut scaled = Vec::with_capacity(rows.len());
    for row in rows {
        let spec = find_material(&materials, &row.material)?;
        let mut s = derive_scales(&spec, row.wavelength_um * UM).context("scales")?;
        if let Some(g) = coupling_ghz {
            s = s.with_coupling(2.0 * PI * g * GHZ).context("scales")?;
        }
        let mut cells = vec![
            row.material.clone(),
            num(row.wavelength_um),
            num(s.acoustic_frequency_ghz()),
            num(s.recoil_frequency_ghz()),
            num(s.acoustic_frequency_ratio),
            num(s.potential_ratio),
            num(s.effective_mass),
        ];
        if let (Some(ratio), Some(rate)) = (s.coupling_ratio, s.characteristic_rate) {
            cells.extend([num(ratio), num(rad_per_s_to_ghz(rate))]);
        }
        table.push(cells);
        scaled.push(s);
    }
    let mut out = Outcome::default();
    out.summarize("rows", scaled);
    out.table("", table);
    Ok(out)
}
