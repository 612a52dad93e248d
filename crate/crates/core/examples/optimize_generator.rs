//! Steepest-descent design of the data generator from both initializations.
//!
//! Prints the cost trajectory summary and the column statistics that tell the
//! two solutions apart: the permutation start keeps one dominant entry per
//! column, the random start spreads energy across the band.

use uwofdm_lab::design::{dominant_share, peak_to_mean, DescentOptions, InitKind};
use uwofdm_lab::harness::design_generators;
use uwofdm_lab::sysmodel::build_carrier_maps;
use uwofdm_lab::SystemConfig;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let maps = build_carrier_maps(&cfg)?;
    for init in [InitKind::Permutation, InitKind::RandomNormal] {
        let opts = DescentOptions {
            max_iters: 1500,
            ..Default::default()
        };
        let (gens, run, _) = design_generators(&cfg, init, &opts, 20)?;
        let share = dominant_share(&gens.g_d);
        let spread = peak_to_mean(&gens.g_d, &maps);
        println!(
            "{init:?}: {} steps, J_d {:.5} -> {:.5}, mean dominant share {:.3}, mean peak/mean {:.3}",
            run.costs.len() - 1,
            run.costs[0],
            run.costs.last().unwrap(),
            mean(&share),
            mean(&spread),
        );
    }
    Ok(())
}
