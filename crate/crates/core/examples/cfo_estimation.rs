//! One noiseless burst through a multipath channel with CFO: raw and
//! compensated CPE per symbol, and the CFO recovered from symbol 0 and from
//! consecutive symbols.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwofdm_lab::airlink::{
    assemble_burst, common_phase, default_uw_energy, draw_channel, make_uw, receive_exact, UwSpec,
};
use uwofdm_lab::design::{DescentOptions, InitKind};
use uwofdm_lab::estimator::{channel_weights, estimate_burst, estimate_cfo_from_delta, wrap_pi};
use uwofdm_lab::harness::{design_generators, qpsk, TAU_RMS};
use uwofdm_lab::sysmodel::build_carrier_maps;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let maps = build_carrier_maps(&cfg)?;
    let (gens, _, _) = design_generators(&cfg, InitKind::Permutation, &DescentOptions::default(), 20)?;
    let uw = make_uw(&UwSpec::Cazac, &cfg, &maps, default_uw_energy(&cfg))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ch = draw_channel(&mut rng, TAU_RMS, &cfg, &maps)?;

    let eps = 0.04;
    let data: Vec<_> = (0..cfg.l).map(|_| qpsk(cfg.n_d, &mut rng)).collect();
    let burst = assemble_burst(&data, &gens, &uw, &maps, &cfg)?;
    let rx = receive_exact(&burst, &ch, eps, 0.0, &mut rng, &maps, &cfg)?;
    let w = channel_weights(&ch.h, &maps);
    let est = estimate_burst(&rx, &gens, &uw, &ch.h, &w, &maps, &cfg)?;

    println!("pilot offset: m = {:.4} rad, q = {:.4} rad", est.m, est.q);
    for (l, (raw, comp)) in est.phi_hat.iter().zip(&est.phi_hathat).enumerate() {
        let truth = common_phase(eps, l, &cfg);
        println!(
            "symbol {l}: phi_hat {raw:.4}, compensated error {:+.2e}",
            wrap_pi(comp - truth)
        );
    }
    println!("eps = {eps}, from symbol 0: {:.4}", est.eps_hat);
    if est.phi_hat.len() > 1 {
        println!(
            "from symbols 0/1: {:.4}",
            estimate_cfo_from_delta(est.phi_hat[1], est.phi_hat[0], &cfg)
        );
    }
    Ok(())
}
