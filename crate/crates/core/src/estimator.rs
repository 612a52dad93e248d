//! Receive-side estimation: LMMSE data estimate, pilot extraction, common
//! phase error (CPE) estimate, the affine pilot offset `phi_pil = m eps + q`,
//! CFO recovery and ICI powers at the pilot subcarriers.
//!
//! In UW-OFDM the pilot subcarriers also carry redundancy from the pilot
//! generator and the unique word's spectrum, so the pilot-based CPE estimate
//! is biased by `phi_pil`. The bias is evaluated noiselessly at two offsets
//! with known channel and removed after the CFO has been estimated.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::airlink::{lambda_stat_entry, window_start, UniqueWord};
use crate::error::{Error, Result};
use crate::genmat::GeneratorSet;
use crate::numerics::{inverse, CMatrix, CVector, ZERO};
use crate::sysmodel::{CarrierMaps, SystemConfig};

/// Channel bins weaker than this are not inverted.
pub const WEAK_BIN: f64 = 1e-6;

/// Correlations smaller than this have no usable angle.
pub const MIN_CORRELATION: f64 = 1e-12;

/// Second offset of the two-point `phi_pil` fit.
pub const FIT_EPS: f64 = 0.1;

/// Wraps to `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Wraps to `[0, 2 pi)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone)]
pub struct LmmseEstimate {
    pub d_hat: CVector,
    /// Error covariance `N sigma_n^2 (G^H H^H H G + N sigma_n^2 / sigma_d^2 I)^{-1}`.
    pub c_ee: CMatrix,
}

/// LMMSE estimate of `d` from `y = H G d + v` with `v ~ CN(0, N sigma_n^2 I)`.
///
/// `y` must already have the pilot and unique-word contributions removed.
pub fn lmmse_data_estimate(
    y: &CVector,
    g: &CMatrix,
    h: &CVector,
    noise_var: f64,
    cfg: &SystemConfig,
) -> Result<LmmseEstimate> {
    if y.len() != g.nrows() || h.len() != g.nrows() {
        return Err(Error::Dimension("observation, generator and channel disagree".into()));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::InvalidArgument(
            "noise variance must be finite and non-negative".into(),
        ));
    }
    let hg = CMatrix::from_fn(g.nrows(), g.ncols(), |r, c| h[r] * g[(r, c)]);
    let noise = cfg.n as f64 * noise_var;
    let normal =
        hg.adjoint() * &hg + CMatrix::identity(g.ncols(), g.ncols()) * Complex64::new(noise / cfg.sigma_d2, 0.0);
    let inv = inverse(&normal).map_err(|_| Error::Singular("LMMSE normal matrix is singular".into()))?;
    let d_hat = &inv * hg.adjoint() * y;
    Ok(LmmseEstimate {
        d_hat,
        c_ee: inv * Complex64::new(noise, 0.0),
    })
}

fn check_pilot_bins(h: &CVector, maps: &CarrierMaps) -> Result<()> {
    for &r in &maps.pilot_rel {
        let mag = h[r].norm();
        if !(mag > WEAK_BIN) {
            return Err(Error::WeakChannelBin {
                subcarrier: maps.used[r],
                magnitude: mag,
            });
        }
    }
    Ok(())
}

/// `p_hat = E_p H^{-1} y`: equalize the pilot bins and pick them in `I_p` order.
pub fn extract_pilots(y: &CVector, h: &CVector, maps: &CarrierMaps) -> Result<CVector> {
    if y.len() != maps.used.len() || h.len() != maps.used.len() {
        return Err(Error::Dimension(
            "observation or channel does not cover the used subcarriers".into(),
        ));
    }
    check_pilot_bins(h, maps)?;
    Ok(CVector::from_iterator(
        maps.pilot_rel.len(),
        maps.pilot_rel.iter().map(|&r| y[r] / h[r]),
    ))
}

/// Default pilot weights `|H_p|^2`.
pub fn channel_weights(h: &CVector, maps: &CarrierMaps) -> Vec<f64> {
    maps.pilot_rel.iter().map(|&r| h[r].norm_sqr()).collect()
}

/// `phi_hat = arg(p^H W_p p_hat)` in `[0, 2 pi)`.
pub fn estimate_cpe(p_hat: &CVector, p: &CVector, w: &[f64]) -> Result<f64> {
    if p_hat.len() != p.len() || w.len() != p.len() {
        return Err(Error::Dimension("pilot estimate, pilots and weights disagree".into()));
    }
    if w.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument("pilot weights must be non-negative".into()));
    }
    let corr: Complex64 = (0..p.len()).map(|k| p[k].conj() * w[k] * p_hat[k]).sum();
    angle(corr)
}

fn angle(z: Complex64) -> Result<f64> {
    if !(z.norm() >= MIN_CORRELATION) {
        return Err(Error::UndefinedAngle(z.norm()));
    }
    Ok(wrap_2pi(z.arg()))
}

/// Rows of `Lambda_{h,stat} = H^{-1} Lambda'_stat H` at the pilot subcarriers.
fn lambda_h_pilot_rows(eps: f64, h: &CVector, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<CMatrix> {
    if h.len() != maps.used.len() {
        return Err(Error::Dimension("channel does not cover the used subcarriers".into()));
    }
    if !(eps.abs() <= 0.5) {
        return Err(Error::InvalidArgument(format!("|eps| = {eps} exceeds 0.5")));
    }
    check_pilot_bins(h, maps)?;
    let u = &maps.used;
    Ok(CMatrix::from_fn(maps.pilot_rel.len(), u.len(), |k, m| {
        let r = maps.pilot_rel[k];
        lambda_stat_entry(eps, u[r], u[m], cfg.n) * h[m] / h[r]
    }))
}

/// Angle of the noiseless, data-free pilot term at offset `eps`:
///
/// `arg sum_k w_k (l_k g_k |p_k|^2 + l_k B^T x_u~ conj(p_k))`
///
/// with `l_k` the pilot row of `Lambda_{h,stat}` and `g_k` the pilot
/// generator column. Radians in `(-pi, pi]`.
pub fn phi_pil(
    eps: f64,
    gens: &GeneratorSet,
    uw: &UniqueWord,
    h: &CVector,
    w: &[f64],
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<f64> {
    let rows = lambda_h_pilot_rows(eps, h, maps, cfg)?;
    if w.len() != rows.nrows() || gens.p.len() != rows.nrows() {
        return Err(Error::Dimension("pilot weights or pilots do not match N_p".into()));
    }
    let uw_part = &rows * &uw.x_tilde_nonzero;
    let mut acc = ZERO;
    for k in 0..rows.nrows() {
        let own = rows.row(k).transpose().dot(&gens.g_p.column(k));
        let pk = gens.p[k];
        acc += (own * pk.norm_sqr() + uw_part[k] * pk.conj()) * w[k];
    }
    if !(acc.norm() >= MIN_CORRELATION) {
        return Err(Error::UndefinedAngle(acc.norm()));
    }
    Ok(acc.arg())
}

/// Affine pilot offset `phi_pil(eps) ~ m eps + q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotOffset {
    /// Radians per unit `eps`.
    pub m: f64,
    /// Radians.
    pub q: f64,
}

impl PilotOffset {
    pub const NONE: PilotOffset = PilotOffset { m: 0.0, q: 0.0 };

    pub fn at(&self, eps: f64) -> f64 {
        self.m * eps + self.q
    }

    /// `N_pil = m N / (2 pi)`, the offset slope in samples.
    pub fn n_pil(&self, cfg: &SystemConfig) -> f64 {
        self.m * cfg.n as f64 / (2.0 * PI)
    }
}

/// Two-point fit of `phi_pil` at `eps = 0` and `eps = FIT_EPS`.
pub fn fit_phi_pil(
    gens: &GeneratorSet,
    uw: &UniqueWord,
    h: &CVector,
    w: &[f64],
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<PilotOffset> {
    let q = phi_pil(0.0, gens, uw, h, w, maps, cfg)?;
    let at = phi_pil(FIT_EPS, gens, uw, h, w, maps, cfg)?;
    Ok(PilotOffset {
        m: wrap_pi(at - q) / FIT_EPS,
        q,
    })
}

/// `phi_hathat = phi_hat - m eps_hat - q` (not wrapped).
pub fn compensate_cpe(phi_hat: f64, m: f64, q: f64, eps_hat: f64) -> f64 {
    phi_hat - m * eps_hat - q
}

/// `eps_hat = (phi_hat - q) N / (2 pi (s_l + (N-1)/2 + N_pil))`, with `s_l`
/// the window start of symbol `l` (`N l + N_u` in UW-OFDM).
///
/// Valid only while the true accumulated phase stays below `2 pi`; callers
/// pass `phi_hat - q` already brought to the intended branch.
pub fn estimate_cfo_from_cpe(phi_hat: f64, m: f64, q: f64, l: usize, cfg: &SystemConfig) -> f64 {
    let n = cfg.n as f64;
    let n_pil = m * n / (2.0 * PI);
    (phi_hat - q) * n / (2.0 * PI * (window_start(l, cfg) as f64 + (n - 1.0) / 2.0 + n_pil))
}

/// `eps_hat` from consecutive CPE estimates; the pilot offset cancels.
///
/// The wrapped phase step is divided by `2 pi` times the symbol spacing in
/// units of `N` (exactly 1 in UW-OFDM).
pub fn estimate_cfo_from_delta(phi_hat_l: f64, phi_hat_lm1: f64, cfg: &SystemConfig) -> f64 {
    let stride = (window_start(1, cfg) - window_start(0, cfg)) as f64 / cfg.n as f64;
    wrap_pi(phi_hat_l - phi_hat_lm1) / (2.0 * PI * stride)
}

/// CPE and CFO estimates of one burst.
#[derive(Debug, Clone, PartialEq)]
pub struct CpeResult {
    /// Raw estimates in `[0, 2 pi)`, one per symbol.
    pub phi_hat: Vec<f64>,
    /// Offset-compensated estimates.
    pub phi_hathat: Vec<f64>,
    pub m: f64,
    pub q: f64,
    /// From symbol 0.
    pub eps_hat: f64,
}

/// Runs the complete pilot-based chain on received symbols of one burst.
pub fn estimate_burst(
    rx: &[CVector],
    gens: &GeneratorSet,
    uw: &UniqueWord,
    h: &CVector,
    w: &[f64],
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<CpeResult> {
    if rx.is_empty() {
        return Err(Error::InvalidArgument("no received symbols".into()));
    }
    let phi_hat = rx
        .iter()
        .map(|y| estimate_cpe(&extract_pilots(y, h, maps)?, &gens.p, w))
        .collect::<Result<Vec<f64>>>()?;
    let off = fit_phi_pil(gens, uw, h, w, maps, cfg)?;
    let eps_hat = estimate_cfo_from_cpe(off.q + wrap_pi(phi_hat[0] - off.q), off.m, off.q, 0, cfg);
    let phi_hathat = phi_hat
        .iter()
        .map(|&p| compensate_cpe(p, off.m, off.q, eps_hat))
        .collect();
    Ok(CpeResult {
        phi_hat,
        phi_hathat,
        m: off.m,
        q: off.q,
        eps_hat,
    })
}

/// Mean data-induced ICI power over the pilot subcarriers:
/// `sigma_d^2 / N_p sum_k || l_k G_d ||^2`.
pub fn data_ici_power(g_d: &CMatrix, h: &CVector, eps: f64, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<f64> {
    let rows = lambda_h_pilot_rows(eps, h, maps, cfg)?;
    if g_d.nrows() != rows.ncols() {
        return Err(Error::Dimension("G_d does not cover the used subcarriers".into()));
    }
    let leak = rows * g_d;
    Ok(cfg.sigma_d2 * leak.norm_squared() / leak.nrows() as f64)
}

/// Data-induced ICI at each pilot for one data vector.
pub fn data_ici(
    g_d: &CMatrix,
    d: &CVector,
    h: &CVector,
    eps: f64,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<CVector> {
    Ok(lambda_h_pilot_rows(eps, h, maps, cfg)? * (g_d * d))
}

/// Pilot-induced ICI at each pilot: `l_k sum_{m != k} g_m p_m`.
pub fn pilot_ici(
    g_p: &CMatrix,
    p: &CVector,
    h: &CVector,
    eps: f64,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<CVector> {
    let rows = lambda_h_pilot_rows(eps, h, maps, cfg)?;
    if g_p.ncols() != rows.nrows() || p.len() != rows.nrows() {
        return Err(Error::Dimension("pilot generator does not match N_p".into()));
    }
    Ok(CVector::from_fn(rows.nrows(), |k, _| {
        let mut others = p.clone();
        others[k] = ZERO;
        rows.row(k).transpose().dot(&(g_p * others))
    }))
}

/// Mean pilot-induced ICI power over the pilot subcarriers.
pub fn pilot_ici_power(
    g_p: &CMatrix,
    p: &CVector,
    h: &CVector,
    eps: f64,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<f64> {
    let v = pilot_ici(g_p, p, h, eps, maps, cfg)?;
    Ok(v.norm_squared() / v.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{
        assemble_burst, cfo_freq_matrix, common_phase, draw_channel, make_uw, receive_exact, ChannelRealization, UwSpec,
    };
    use crate::design::{permutation_init, pilots_from_exponents};
    use crate::numerics::{cis, max_abs_diff, ONE};
    use crate::sysmodel::build_carrier_maps;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (SystemConfig, CarrierMaps, GeneratorSet) {
        let cfg = SystemConfig::reference_uw();
        let maps = build_carrier_maps(&cfg).unwrap();
        let a = permutation_init(&cfg, &maps).unwrap();
        let gens = GeneratorSet::uw_ofdm(&a, pilots_from_exponents(&[17, 14, 3, 0], 20), &maps, &cfg).unwrap();
        (cfg, maps, gens)
    }

    fn qpsk(n: usize, rng: &mut ChaCha8Rng) -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_fn(n, |_, _| {
            Complex64::new(if rng.random() { s } else { -s }, if rng.random() { s } else { -s })
        })
    }

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn wrapping() {
        assert!((wrap_pi(3.5 * PI) + 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap_pi(PI), PI);
        assert!((wrap_pi(-PI) - PI).abs() < 1e-12);
        assert!((wrap_2pi(-0.1) - (2.0 * PI - 0.1)).abs() < 1e-12);
        assert_eq!(wrap_2pi(0.0), 0.0);
    }

    #[test]
    fn lmmse_scaled_identity() {
        let cfg = SystemConfig::reference_uw();
        let mut g = CMatrix::zeros(52, 32);
        for c in 0..32 {
            g[(c + 3, c)] = Complex64::new(1.5f64.sqrt(), 0.0);
        }
        let h = CVector::from_element(52, ONE);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = qpsk(32, &mut rng);
        let est = lmmse_data_estimate(&(&g * &d), &g, &h, 0.0, &cfg).unwrap();
        assert!(max_abs_diff(&est.d_hat, &d) < 1e-12);

        let nv = 0.1 / 64.0;
        let est = lmmse_data_estimate(&(&g * &d), &g, &h, nv, &cfg).unwrap();
        let expect = 0.1 / (1.5 + 0.1);
        for i in 0..32 {
            assert!((est.c_ee[(i, i)].re - expect).abs() < 1e-12);
        }
        let mut rank_deficient = g.clone();
        rank_deficient.column_mut(4).fill(ZERO);
        assert!(lmmse_data_estimate(&(&g * &d), &rank_deficient, &h, 0.0, &cfg).is_err());
    }

    #[test]
    fn lmmse_mse_matches_error_covariance() {
        let cfg = SystemConfig::reference_uw();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = CMatrix::from_fn(52, 32, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = CVector::from_element(52, ONE);
        let noise_var = 0.5 / 64.0;
        let mut acc = 0.0;
        let draws = 10_000;
        let mut trace = 0.0;
        for _ in 0..draws {
            let d = qpsk(32, &mut rng);
            let std = (64.0 * noise_var / 2.0f64).sqrt();
            let v = CVector::from_fn(52, |_, _| {
                let re: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                let im: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                Complex64::new(re * std, im * std)
            });
            let est = lmmse_data_estimate(&(&g * &d + v), &g, &h, noise_var, &cfg).unwrap();
            acc += (est.d_hat - d).norm_squared() / 32.0;
            trace = est.c_ee.trace().re / 32.0;
        }
        let mse = acc / draws as f64;
        assert!((mse / trace - 1.0).abs() < 0.03, "{mse} vs {trace}");
    }

    #[test]
    fn pilot_extraction_without_cfo() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = ChannelRealization::identity(&cfg, &maps).unwrap();
        for spec in [UwSpec::Zero, UwSpec::Cazac] {
            let uw = make_uw(&spec, &cfg, &maps, 16.0).unwrap();
            let burst = assemble_burst(&[qpsk(32, &mut rng)], &gens, &uw, &maps, &cfg).unwrap();
            let y = receive_exact(&burst, &ch, 0.0, 0.0, &mut rng, &maps, &cfg).unwrap();
            let p_hat = extract_pilots(&y[0], &ch.h, &maps).unwrap();
            assert!(max_abs_diff(&p_hat, &(&gens.p + uw.at_pilots(&maps))) < 1e-12);
        }
        let mut weak = ch.h.clone();
        weak[maps.pilot_rel[2]] = Complex64::new(1e-9, 0.0);
        match extract_pilots(&ch.h, &weak, &maps) {
            Err(Error::WeakChannelBin { subcarrier, .. }) => assert_eq!(subcarrier, 43),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pilot_extraction_with_cfo_matches_matrix_path() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = ChannelRealization::identity(&cfg, &maps).unwrap();
        let uw = UniqueWord::zero(&cfg, &maps).unwrap();
        let burst = assemble_burst(&[CVector::zeros(32)], &gens, &uw, &maps, &cfg).unwrap();
        let y = receive_exact(&burst, &ch, 0.1, 0.0, &mut rng, &maps, &cfg).unwrap();
        let p_hat = extract_pilots(&y[0], &ch.h, &maps).unwrap();
        let cfo = cfo_freq_matrix(0.1, 0, &cfg, &maps).unwrap();
        let oracle = &cfo.lambda_stat * (&gens.g_p * &gens.p) * cis(cfo.phi_l);
        for (k, &r) in maps.pilot_rel.iter().enumerate() {
            assert!((p_hat[k] - oracle[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn cpe_estimates() {
        let p = pilots_from_exponents(&[17, 14, 3, 0], 20);
        let w = ones(4);
        assert!(estimate_cpe(&p, &p, &w).unwrap().abs() < 1e-12);
        let rotated = &p * cis(0.3);
        assert!((estimate_cpe(&rotated, &p, &w).unwrap() - 0.3).abs() < 1e-12);
        let neg = &p * cis(-0.3);
        assert!((estimate_cpe(&neg, &p, &w).unwrap() - (2.0 * PI - 0.3)).abs() < 1e-12);
        let scaled: Vec<f64> = [0.3, 1.2, 0.7, 2.0].to_vec();
        let a = estimate_cpe(&(&p * cis(1.0) + &p * Complex64::new(0.0, 0.01)), &p, &scaled).unwrap();
        let b = estimate_cpe(
            &(&p * cis(1.0) + &p * Complex64::new(0.0, 0.01)),
            &p,
            &scaled.iter().map(|x| x * 7.5).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(matches!(
            estimate_cpe(&CVector::zeros(4), &p, &w),
            Err(Error::UndefinedAngle(_))
        ));
        assert!(estimate_cpe(&p, &p, &[1.0, -1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn cpe_zero_uw_awgn() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = ChannelRealization::identity(&cfg, &maps).unwrap();
        let uw = UniqueWord::zero(&cfg, &maps).unwrap();
        let burst = assemble_burst(&[qpsk(32, &mut rng)], &gens, &uw, &maps, &cfg).unwrap();
        let y = receive_exact(&burst, &ch, 0.05, 0.0, &mut rng, &maps, &cfg).unwrap();
        let phi = estimate_cpe(&extract_pilots(&y[0], &ch.h, &maps).unwrap(), &gens.p, &ones(4)).unwrap();
        let phi0 = common_phase(0.05, 0, &cfg);
        assert!((phi0 - 2.0 * PI / 64.0 * 0.05 * 47.5).abs() < 1e-12);
        assert!((phi0 - 0.23316).abs() < 1e-5);
        let pil = phi_pil(0.05, &gens, &uw, &ch.h, &ones(4), &maps, &cfg).unwrap();
        // data ICI is the only unmodelled part
        assert!((phi - phi0 - pil).abs() < 0.05, "{phi} {phi0} {pil}");

        let y0 = receive_exact(&burst, &ch, 0.0, 0.0, &mut rng, &maps, &cfg).unwrap();
        let phi_at_zero = estimate_cpe(&extract_pilots(&y0[0], &ch.h, &maps).unwrap(), &gens.p, &ones(4)).unwrap();
        assert!(wrap_pi(phi_at_zero).abs() < 1e-9);
    }

    #[test]
    fn phi_pil_closed_form_at_zero() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = draw_channel(&mut rng, 100e-9, &cfg, &maps).unwrap();
        let w = channel_weights(&ch.h, &maps);
        for spec in [UwSpec::Zero, UwSpec::Cazac, UwSpec::Barker] {
            let uw = make_uw(&spec, &cfg, &maps, 16.0).unwrap();
            let q = phi_pil(0.0, &gens, &uw, &ch.h, &w, &maps, &cfg).unwrap();
            let xp = uw.at_pilots(&maps);
            let closed: Complex64 = (0..4)
                .map(|k| (gens.p[k].norm_sqr() + xp[k] * gens.p[k].conj()) * w[k])
                .sum();
            assert!((q - closed.arg()).abs() < 1e-9);
        }
        let zero = UniqueWord::zero(&cfg, &maps).unwrap();
        let id = ChannelRealization::identity(&cfg, &maps).unwrap();
        let off = fit_phi_pil(&gens, &zero, &id.h, &ones(4), &maps, &cfg).unwrap();
        assert!(off.q.abs() <= 1e-9);
    }

    #[test]
    fn phi_pil_is_nearly_affine_for_cazac() {
        let (cfg, maps, gens) = setup();
        let uw = make_uw(&UwSpec::Cazac, &cfg, &maps, 16.0).unwrap();
        let id = ChannelRealization::identity(&cfg, &maps).unwrap();
        let off = fit_phi_pil(&gens, &uw, &id.h, &ones(4), &maps, &cfg).unwrap();
        for i in 1..=5 {
            let eps = 0.02 * i as f64;
            let v = phi_pil(eps, &gens, &uw, &id.h, &ones(4), &maps, &cfg).unwrap();
            assert!(wrap_pi(v - off.at(eps)).abs() <= 0.01);
        }
    }

    #[test]
    fn compensation_and_cfo_formulas() {
        let cfg = SystemConfig::reference_uw();
        assert_eq!(compensate_cpe(0.7, 0.0, 0.0, 0.03), 0.7);
        assert!((compensate_cpe(0.5, 2.0, 0.1, 0.05) - 0.3).abs() < 1e-15);
        assert_eq!(estimate_cfo_from_cpe(0.4, 1.0, 0.4, 0, &cfg), 0.0);
        // no offset: inverse of the CPE formula
        let phi = common_phase(0.05, 0, &cfg);
        assert!((estimate_cfo_from_cpe(phi, 0.0, 0.0, 0, &cfg) - 0.05).abs() < 1e-14);
        let phi3 = common_phase(0.02, 3, &cfg);
        assert!((estimate_cfo_from_cpe(phi3, 0.0, 0.0, 3, &cfg) - 0.02).abs() < 1e-14);
        assert!((estimate_cfo_from_delta(0.2 * PI, 0.0, &cfg) - 0.1).abs() < 1e-15);
        assert!((estimate_cfo_from_delta(0.1, 2.0 * PI + 0.1, &cfg)).abs() < 1e-12);
    }

    #[test]
    fn end_to_end_cfo_zero_uw_awgn() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = ChannelRealization::identity(&cfg, &maps).unwrap();
        let uw = UniqueWord::zero(&cfg, &maps).unwrap();
        // data ICI makes single bursts scatter; the estimator is unbiased on average
        let runs = 200;
        let mut sum = 0.0;
        for _ in 0..runs {
            let burst = assemble_burst(&[qpsk(32, &mut rng)], &gens, &uw, &maps, &cfg).unwrap();
            let y = receive_exact(&burst, &ch, 0.05, 0.0, &mut rng, &maps, &cfg).unwrap();
            let r = estimate_burst(&y, &gens, &uw, &ch.h, &ones(4), &maps, &cfg).unwrap();
            assert!((r.eps_hat / 0.05 - 1.0).abs() < 0.5);
            sum += r.eps_hat;
        }
        let mean = sum / runs as f64;
        assert!((mean / 0.05 - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn compensation_reduces_cpe_error() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let uw = make_uw(&UwSpec::Cazac, &cfg, &maps, 16.0).unwrap();
        let ch = ChannelRealization::identity(&cfg, &maps).unwrap();
        let burst = assemble_burst(&[qpsk(32, &mut rng)], &gens, &uw, &maps, &cfg).unwrap();
        let y = receive_exact(&burst, &ch, 0.1, 0.0, &mut rng, &maps, &cfg).unwrap();
        let r = estimate_burst(&y, &gens, &uw, &ch.h, &ones(4), &maps, &cfg).unwrap();
        let phi0 = common_phase(0.1, 0, &cfg);
        assert!(wrap_pi(r.phi_hathat[0] - phi0).abs() < wrap_pi(r.phi_hat[0] - phi0).abs());
    }

    #[test]
    fn delta_estimator_on_multipath() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let uw = make_uw(&UwSpec::Cazac, &cfg, &maps, 16.0).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        for _ in 0..20 {
            let ch = draw_channel(&mut rng, 100e-9, &cfg, &maps).unwrap();
            let data: Vec<CVector> = (0..8).map(|_| qpsk(32, &mut rng)).collect();
            let burst = assemble_burst(&data, &gens, &uw, &maps, &cfg).unwrap();
            let y = receive_exact(&burst, &ch, 0.03, 0.0, &mut rng, &maps, &cfg).unwrap();
            let r = estimate_burst(&y, &gens, &uw, &ch.h, &channel_weights(&ch.h, &maps), &maps, &cfg).unwrap();
            for l in 1..8 {
                total += estimate_cfo_from_delta(r.phi_hat[l], r.phi_hat[l - 1], &cfg);
                count += 1;
            }
        }
        let mean = total / count as f64;
        assert!((mean / 0.03 - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn ici_powers_vanish_without_cfo() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ch = draw_channel(&mut rng, 100e-9, &cfg, &maps).unwrap();
        assert_eq!(data_ici_power(&gens.g_d, &ch.h, 0.0, &maps, &cfg).unwrap(), 0.0);
        assert_eq!(
            pilot_ici_power(&gens.g_p, &gens.p, &ch.h, 0.0, &maps, &cfg).unwrap(),
            0.0
        );
        let mut last = (0.0, 0.0);
        for i in 1..=10 {
            let eps = 0.01 * i as f64;
            let d = data_ici_power(&gens.g_d, &ch.h, eps, &maps, &cfg).unwrap();
            let p = pilot_ici_power(&gens.g_p, &gens.p, &ch.h, eps, &maps, &cfg).unwrap();
            assert!(d > last.0 && p > last.1);
            last = (d, p);
        }
    }

    #[test]
    fn data_ici_closed_form_matches_sample_mean() {
        let (cfg, maps, gens) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = draw_channel(&mut rng, 100e-9, &cfg, &maps).unwrap();
        let closed = data_ici_power(&gens.g_d, &ch.h, 0.1, &maps, &cfg).unwrap();
        let mut acc = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            let v = data_ici(&gens.g_d, &qpsk(32, &mut rng), &ch.h, 0.1, &maps, &cfg).unwrap();
            acc += v.norm_squared() / 4.0;
        }
        assert!((acc / draws as f64 / closed - 1.0).abs() < 0.03);
    }

    #[test]
    fn pilot_ici_two_routes() {
        let (cfg, maps, gens) = setup();
        let ch = ChannelRealization::identity(&cfg, &maps).unwrap();
        let cfo = cfo_freq_matrix(0.1, 0, &cfg, &maps).unwrap();
        let direct: f64 = (0..4)
            .map(|k| {
                let r = maps.pilot_rel[k];
                let mut s = ZERO;
                for m in (0..4).filter(|&m| m != k) {
                    s += cfo.lambda_stat.row(r).transpose().dot(&gens.g_p.column(m)) * gens.p[m];
                }
                s.norm_sqr()
            })
            .sum::<f64>()
            / 4.0;
        let fast = pilot_ici_power(&gens.g_p, &gens.p, &ch.h, 0.1, &maps, &cfg).unwrap();
        assert!((direct - fast).abs() < 1e-15);
    }
}
