//! Checks the zero-word property of a designed generator set: random data
//! and pilots always produce a time signal whose last `N_u` samples vanish,
//! so the unique word can be added on top.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwofdm_lab::airlink::{assemble_tx_symbol, default_uw_energy, make_uw, UwSpec};
use uwofdm_lab::design::{permutation_init, pilots_from_exponents};
use uwofdm_lab::genmat::{tail_residual, GeneratorSet};
use uwofdm_lab::harness::qpsk;
use uwofdm_lab::sysmodel::build_carrier_maps;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let maps = build_carrier_maps(&cfg)?;
    let a = permutation_init(&cfg, &maps)?;
    let gens = GeneratorSet::uw_ofdm(&a, pilots_from_exponents(&[17, 14, 3, 0], 20), &maps, &cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = qpsk(cfg.n_d, &mut rng);
        worst = worst.max(tail_residual(&(&gens.g_d * d + &gens.g_p * &gens.p), &maps, &cfg)?);
    }
    println!("max relative tail over 200 symbols: {worst:.2e}");

    let uw = make_uw(&UwSpec::Cazac, &cfg, &maps, default_uw_energy(&cfg))?;
    let x = assemble_tx_symbol(&qpsk(cfg.n_d, &mut rng), &gens, &uw, &maps, &cfg)?;
    let tail = x.rows(cfg.n - cfg.n_u, cfg.n_u);
    let diff = (tail - &uw.x_u).norm();
    println!("with a CAZAC word the tail equals x_u up to {diff:.2e}");
    Ok(())
}
