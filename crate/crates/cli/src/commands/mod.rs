mod bands1d;
mod conveyor;
mod decay;
mod entangle;
mod lattice2d;
mod scales;

use crate::config::Job;
use crate::error::CliError;
use crate::output::Outcome;

pub fn execute(job: &Job) -> Result<Outcome, CliError> {
    match job {
        Job::Scales(p) => scales::run(p),
        Job::Bands1d(p) => bands1d::bands(p),
        Job::Rates1d(p) => bands1d::rates(p),
        Job::Dmap(p) => bands1d::dmap(p),
        Job::DecaySim(p) => decay::run(p),
        Job::Entangle(p) => entangle::run(p),
        Job::Conveyor(p) => conveyor::run(p),
        Job::Bands2d(p) => lattice2d::bands(p),
        Job::Emission2d(p) => lattice2d::emission(p),
        Job::Corrmap(p) => lattice2d::corrmap(p),
    }
}

/// Number of solver steps closest to `interval`, at least one.
pub(crate) fn stride(interval: f64, dt: f64) -> usize {
    ((interval / dt).round() as usize).max(1)
}

/// Largest absolute difference between two series sampled at `times` and
/// `ref_times`, interpolating the reference linearly.
pub(crate) fn sup_deviation(times: &[f64], values: &[f64], ref_times: &[f64], reference: &[f64], t_max: f64) -> f64 {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t <= t_max)
        .map(|(&t, &v)| (v - interpolate(ref_times, reference, t)).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[i - 1] * (1.0 - w) + ys[i] * w
}

/// First time `values` crosses `level` (upward when `rising`), linearly
/// interpolated.
pub(crate) fn crossing_time(times: &[f64], values: &[f64], level: f64, rising: bool) -> Option<f64> {
    times.windows(2).zip(values.windows(2)).find_map(|(t, v)| {
        let crosses = if rising {
            v[0] < level && v[1] >= level
        } else {
            v[0] > level && v[1] <= level
        };
        crosses.then(|| t[0] + (t[1] - t[0]) * (level - v[0]) / (v[1] - v[0]))
    })
}

/// Release time of the sender (its population falls through 1/2) to the
/// receiver reaching half its final population.
pub(crate) fn transfer_delay(times: &[f64], sender: &[f64], receiver: &[f64]) -> Option<f64> {
    let released = crossing_time(times, sender, 0.5, false)?;
    let half = 0.5 * receiver.last().copied()?;
    let absorbed = crossing_time(times, receiver, half, true)?;
    Some(absorbed - released)
}

pub(crate) fn flag(b: bool) -> String {
    u8::from(b).to_string()
}
