//! Data- and pilot-induced ICI power at the pilot subcarriers.

use uwofdm_lab::airlink::UwSpec;
use uwofdm_lab::design::{DescentOptions, InitKind};
use uwofdm_lab::harness::{design_generators, run_ici_sweep, write_ici_csv, Link, Scenario};
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let (gens, _, _) = design_generators(&cfg, InitKind::Permutation, &DescentOptions::default(), 20)?;
    let cp = Link::cp_reference("cp-ofdm", &cfg, &gens.p)?;
    let uw = Link::uw_ofdm("uw-ofdm", &cfg, gens, &UwSpec::Cazac)?;
    let sc = Scenario {
        n_realizations: 500,
        ..Default::default()
    };
    let rows = vec![
        (uw.label.clone(), run_ici_sweep(&uw, &sc)?),
        (cp.label.clone(), run_ici_sweep(&cp, &sc)?),
    ];
    write_ici_csv(std::io::stdout().lock(), sc.seed, &rows)
}
