//! LMMSE data estimation after removing the pilot and unique-word terms, at a
//! few noise levels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwofdm_lab::airlink::{
    assemble_tx_symbol, cfo_freq_matrix, default_uw_energy, draw_channel, make_uw, receive_symbol, UwSpec,
};
use uwofdm_lab::design::{DescentOptions, InitKind};
use uwofdm_lab::estimator::lmmse_data_estimate;
use uwofdm_lab::harness::{design_generators, qpsk, TAU_RMS};
use uwofdm_lab::sysmodel::build_carrier_maps;
use uwofdm_lab::SystemConfig;

fn main() -> uwofdm_lab::Result<()> {
    let cfg = SystemConfig::reference_uw();
    let maps = build_carrier_maps(&cfg)?;
    let (gens, _, _) = design_generators(&cfg, InitKind::Permutation, &DescentOptions::default(), 20)?;
    let uw = make_uw(&UwSpec::Cazac, &cfg, &maps, default_uw_energy(&cfg))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ch = draw_channel(&mut rng, TAU_RMS, &cfg, &maps)?;
    let cfo = cfo_freq_matrix(0.0, 0, &cfg, &maps)?;
    let known = (&gens.g_p * &gens.p + &uw.x_tilde_nonzero).component_mul(&ch.h);

    for noise_var in [0.0, 1e-3, 1e-2, 1e-1] {
        let mut err = 0.0;
        let trials = 200;
        for _ in 0..trials {
            let d = qpsk(cfg.n_d, &mut rng);
            let x = assemble_tx_symbol(&d, &gens, &uw, &maps, &cfg)?;
            let y = receive_symbol(&x, &ch, &cfo, noise_var, &mut rng, true, &maps, &cfg)?;
            let est = lmmse_data_estimate(&(y - &known), &gens.g_d, &ch.h, noise_var, &cfg)?;
            err += (est.d_hat - d).norm_squared() / cfg.n_d as f64;
        }
        println!(
            "sigma_n^2 = {noise_var:<6} mean squared data error {:.3e}",
            err / trials as f64
        );
    }
    Ok(())
}
