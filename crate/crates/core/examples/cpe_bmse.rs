//! Monte-Carlo BMSE of the compensated CPE estimate, UW-OFDM against the
//! CP-OFDM reference with the same pilots and channels.
//!
//! ```text
//! cargo run --release --example cpe_bmse -- 1000
//! ```

use uwofdm_lab::airlink::UwSpec;
use uwofdm_lab::design::{DescentOptions, InitKind};
use uwofdm_lab::harness::{design_generators, run_cpe_bmse, Link, Scenario};
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = SystemConfig::reference_uw();
    let (gens, _, _) = design_generators(&cfg, InitKind::Permutation, &DescentOptions::default(), 20)?;
    let cp = Link::cp_reference("cp-ofdm", &cfg, &gens.p)?;
    let uw = Link::uw_ofdm("uw-ofdm", &cfg, gens, &UwSpec::Cazac)?;
    let sc = Scenario {
        n_realizations: n,
        ..Default::default()
    };

    let a = run_cpe_bmse(&uw, &sc)?;
    let b = run_cpe_bmse(&cp, &sc)?;
    println!("{:>5} {:>12} {:>12} {:>7}", "eps", "UW-OFDM", "CP-OFDM", "ratio");
    for (u, c) in a.iter().zip(&b) {
        println!(
            "{:>5} {:>12.3e} {:>12.3e} {:>7.4}",
            u.eps,
            u.bmse,
            c.bmse,
            u.bmse / c.bmse
        );
    }
    Ok(())
}
