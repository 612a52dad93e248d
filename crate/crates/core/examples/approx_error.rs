//! Power of the neglected zero-subcarrier leakage against the received
//! signal power per subcarrier, for each unique word at `eps = 0.1`.

use uwofdm_lab::airlink::UwSpec;
use uwofdm_lab::design::{permutation_init, pilots_from_exponents};
use uwofdm_lab::genmat::GeneratorSet;
use uwofdm_lab::harness::run_approx_error;
use uwofdm_lab::sysmodel::build_carrier_maps;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let maps = build_carrier_maps(&cfg)?;
    let a = permutation_init(&cfg, &maps)?;
    let gens = GeneratorSet::uw_ofdm(&a, pilots_from_exponents(&[17, 14, 3, 0], 20), &maps, &cfg)?;
    let report = run_approx_error(&cfg, &gens, &[UwSpec::Zero, UwSpec::Cazac, UwSpec::Barker], 0.1)?;
    for (spec, rows) in report {
        let worst = rows
            .iter()
            .min_by(|a, b| a.ratio_db().total_cmp(&b.ratio_db()))
            .unwrap();
        println!(
            "{:>6}: worst ratio {:>7.2} dB at subcarrier {}",
            spec.name(),
            worst.ratio_db(),
            worst.subcarrier
        );
    }
    Ok(())
}
