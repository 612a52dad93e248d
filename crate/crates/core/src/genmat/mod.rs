//! Generator matrices satisfying the zero-word constraint.
//!
//! A data generator `G_d = B_p A_d [I; T_d]` keeps data off the pilot
//! subcarriers, and a pilot generator `G_p = P_p [I; T_p]` places each pilot
//! unscaled on its subcarrier while spreading the minimum-norm redundancy
//! needed to null the last `N_u` time samples. Both map into the `N - N_z`
//! used subcarriers; `B` then inserts the zero subcarriers.
//!
//! The redundancy blocks use `T = -M22^{-1} M21`; the negative sign is what
//! makes the time-domain tail vanish.

pub mod archive;

use crate::error::{Error, Result};
use crate::numerics::{block_partition, energy, idft_matrix, inverse, pseudo_inverse, solve, vstack, CMatrix, CVector};
use crate::sysmodel::{ensure_valid, CarrierMaps, Mode, SystemConfig};

/// Data and pilot generators of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub mode: Mode,
    /// Degrees of freedom behind `G_d` (identity for CP-OFDM).
    pub a_d: CMatrix,
    /// `(N - N_z) x N_d`.
    pub g_d: CMatrix,
    /// `(N - N_z) x N_p`.
    pub g_p: CMatrix,
    pub p: CVector,
    pub alpha: f64,
}

impl GeneratorSet {
    /// Builds a UW-OFDM set from `A_d`, scaling `G_d` to the reference data power.
    pub fn uw_ofdm(a_d: &CMatrix, p: CVector, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<Self> {
        if cfg.mode != Mode::UwOfdm {
            return Err(Error::InvalidArgument(
                "UW-OFDM generator set needs a UW-OFDM config".into(),
            ));
        }
        if p.len() != cfg.n_p {
            return Err(Error::Dimension(format!(
                "pilot vector has {} entries, N_p = {}",
                p.len(),
                cfg.n_p
            )));
        }
        let g_d = scale_g_d(&build_g_d(a_d, maps, cfg)?, cfg)?;
        let g_p = build_g_p(maps, cfg)?;
        Ok(Self {
            mode: Mode::UwOfdm,
            a_d: a_d.clone(),
            g_d,
            g_p,
            p,
            alpha: cfg.alpha(),
        })
    }

    /// Total transmit-side pilot energy `N * E_p` of this set.
    pub fn pilot_energy(&self) -> f64 {
        pilot_energy(&self.g_p, &self.p)
    }
}

/// Maps payload-slot coefficients to the last `N_u` time samples:
/// the bottom `N_u` rows of `F^{-1} B B_p`.
pub fn payload_tail_map(maps: &CarrierMaps, cfg: &SystemConfig) -> Result<CMatrix> {
    let full = idft_matrix(cfg.n)? * &maps.b * &maps.b_p;
    Ok(full.rows(cfg.n - cfg.n_u, cfg.n_u).into_owned())
}

fn check_a(a: &CMatrix, cfg: &SystemConfig) -> Result<()> {
    let k = cfg.n_payload();
    if a.shape() != (k, k) {
        return Err(Error::Dimension(format!(
            "A must be {k}x{k}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Redundancy block `T = -M22^{-1} M21` from the partition of `F^{-1} B B_p A`
/// at row split `N - N_u` and column split `N_d`.
///
/// Without pilots `B_p` is the identity and this is the pilotless `T`; with
/// pilots it is `T_d`.
pub fn compute_t(a: &CMatrix, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<CMatrix> {
    ensure_valid(cfg)?;
    if cfg.mode != Mode::UwOfdm {
        return Err(Error::InvalidArgument(
            "zero-word completion needs a UW-OFDM config".into(),
        ));
    }
    check_a(a, cfg)?;
    let m = idft_matrix(cfg.n)? * &maps.b * &maps.b_p * a;
    let blocks = block_partition(&m, cfg.n - cfg.n_u, cfg.n_d)?;
    let t =
        solve(&blocks.m22, &blocks.m21).map_err(|e| Error::ZeroWordInfeasible(format!("M22 not invertible ({e})")))?;
    Ok(-t)
}

/// 2-norm condition number of `M22` for a candidate `A`.
pub fn m22_condition(a: &CMatrix, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<f64> {
    check_a(a, cfg)?;
    let m = idft_matrix(cfg.n)? * &maps.b * &maps.b_p * a;
    let blocks = block_partition(&m, cfg.n - cfg.n_u, cfg.n_d)?;
    let sv = blocks.m22.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// `G_d = B_p A_d [I; T_d]`, unscaled.
pub fn build_g_d(a_d: &CMatrix, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<CMatrix> {
    let t_d = compute_t(a_d, maps, cfg)?;
    let stacked = vstack(&CMatrix::identity(cfg.n_d, cfg.n_d), &t_d)?;
    Ok(&maps.b_p * a_d * stacked)
}

/// `G_p = P_p [I; T_p]` with `T_p = -pinv(M''22) M''21` from `F^{-1} B P_p`.
pub fn build_g_p(maps: &CarrierMaps, cfg: &SystemConfig) -> Result<CMatrix> {
    ensure_valid(cfg)?;
    if cfg.n_p == 0 {
        return Err(Error::InvalidArgument("configuration has no pilots".into()));
    }
    let m = idft_matrix(cfg.n)? * &maps.b * &maps.p_p;
    let blocks = block_partition(&m, cfg.n - cfg.n_u, cfg.n_p)?;
    let t_p = -(pseudo_inverse(&blocks.m22)? * &blocks.m21);
    let stacked = vstack(&CMatrix::identity(cfg.n_p, cfg.n_p), &t_p)?;
    Ok(&maps.p_p * stacked)
}

/// `N * E_p = p^H G_p^H G_p p`.
pub fn pilot_energy(g_p: &CMatrix, p: &CVector) -> f64 {
    energy(&(g_p * p))
}

/// Scales `G_d` so that `trace(G_d^H G_d) = alpha * N_d`.
///
/// For a Gram matrix proportional to the identity this gives `G_d^H G_d = alpha I`
/// exactly; otherwise the mean data power per non-pilot subcarrier is matched.
pub fn scale_g_d(g_d: &CMatrix, cfg: &SystemConfig) -> Result<CMatrix> {
    let e = energy(g_d);
    if e == 0.0 || !e.is_finite() {
        return Err(Error::InvalidArgument("cannot scale a zero or non-finite G_d".into()));
    }
    let target = cfg.alpha() * g_d.ncols() as f64;
    Ok(g_d * num_complex::Complex64::new((target / e).sqrt(), 0.0))
}

/// Relative zero-word residual `||tail|| / ||x||` of the time signal
/// `F^{-1} B v` for a used-subcarrier vector `v`.
pub fn tail_residual(used: &CVector, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<f64> {
    let x = idft_matrix(cfg.n)? * (&maps.b * used);
    let total = energy(&x).sqrt();
    if total == 0.0 {
        return Ok(0.0);
    }
    let tail = energy(&x.rows(cfg.n - cfg.n_u, cfg.n_u)).sqrt();
    Ok(tail / total)
}

/// Inverse of `A` checked for use as a generator degree of freedom.
pub fn ensure_nonsingular(a: &CMatrix) -> Result<()> {
    inverse(a).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cis, max_abs, ONE, ZERO};
    use crate::sysmodel::build_carrier_maps;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn reference() -> (SystemConfig, CarrierMaps) {
        let cfg = SystemConfig::reference_uw();
        let maps = build_carrier_maps(&cfg).unwrap();
        (cfg, maps)
    }

    fn random_cvec(n: usize, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn table_i_permutation(cfg: &SystemConfig, maps: &CarrierMaps) -> CMatrix {
        crate::design::permutation_init(cfg, maps).unwrap()
    }

    fn pilotless() -> (SystemConfig, CarrierMaps) {
        let mut i_z = vec![0];
        i_z.extend(26..=38);
        i_z.extend([63, 1]);
        i_z.sort();
        let cfg = SystemConfig {
            n_p: 0,
            n_z: 16,
            i_z,
            i_p: vec![],
            i_r: vec![2, 5, 9, 13, 17, 20, 24, 25, 39, 40, 44, 47, 51, 54, 58, 62],
            ..SystemConfig::reference_uw()
        };
        let maps = build_carrier_maps(&cfg).unwrap();
        (cfg, maps)
    }

    #[test]
    fn pilotless_t_zero_word() {
        let (cfg, maps) = pilotless();
        let a = CMatrix::identity(48, 48);
        let t = compute_t(&a, &maps, &cfg).unwrap();
        assert_eq!(t.shape(), (16, 32));
        let g = &a * vstack(&CMatrix::identity(32, 32), &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let d = random_cvec(32, &mut rng);
            assert!(tail_residual(&(&g * d), &maps, &cfg).unwrap() < 1e-10);
        }
        assert!(m22_condition(&a, &maps, &cfg).unwrap().is_finite());
    }

    #[test]
    fn random_a_gives_finite_t() {
        let (cfg, maps) = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = CMatrix::from_fn(48, 48, |_, _| Complex64::new(rng.random::<f64>() - 0.5, 0.0));
        let cond = m22_condition(&a, &maps, &cfg).unwrap();
        assert!(cond.is_finite() && cond >= 1.0);
        let t = compute_t(&a, &maps, &cfg).unwrap();
        assert!(crate::numerics::is_finite(&t));
    }

    #[test]
    fn singular_m22_is_infeasible() {
        let (cfg, maps) = reference();
        let mut a = CMatrix::identity(48, 48);
        // wipe the redundancy columns
        for c in 32..48 {
            a.column_mut(c).fill(ZERO);
        }
        assert!(matches!(compute_t(&a, &maps, &cfg), Err(Error::ZeroWordInfeasible(_))));
    }

    #[test]
    fn g_d_zero_word_and_pilot_rows() {
        let (cfg, maps) = reference();
        let g_d = build_g_d(&table_i_permutation(&cfg, &maps), &maps, &cfg).unwrap();
        assert_eq!(g_d.shape(), (52, 32));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let d = random_cvec(32, &mut rng);
            assert!(tail_residual(&(&g_d * d), &maps, &cfg).unwrap() <= 1e-10);
        }
        for &abs in &cfg.i_p {
            let r = maps.rel_of(abs).unwrap();
            assert!(g_d.row(r).iter().all(|z| *z == ZERO));
        }
    }

    #[test]
    fn permutation_g_d_is_diagonal_dominant() {
        let (cfg, maps) = reference();
        let g_d = build_g_d(&table_i_permutation(&cfg, &maps), &maps, &cfg).unwrap();
        for c in 0..g_d.ncols() {
            let col = g_d.column(c);
            let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let rest: f64 = col.iter().map(|z| z.norm()).sum::<f64>() - peak;
            // one subcarrier carries most of the column
            assert!(peak > 0.5 * col.norm(), "column {c}");
            assert!(peak > rest / 10.0);
        }
    }

    #[test]
    fn g_p_structure() {
        let (cfg, maps) = reference();
        let g_p = build_g_p(&maps, &cfg).unwrap();
        assert_eq!(g_p.shape(), (52, 4));
        for (k, &r) in maps.pilot_rel.iter().enumerate() {
            for c in 0..4 {
                let expect = if c == k { ONE } else { ZERO };
                assert_eq!(g_p[(r, c)], expect);
            }
        }
        let ones = CVector::from_element(4, ONE);
        assert!(tail_residual(&(&g_p * ones), &maps, &cfg).unwrap() <= 1e-10);
        // minor spreading on the other subcarriers
        let mut off = g_p.clone();
        for &r in &maps.pilot_rel {
            off.row_mut(r).fill(ZERO);
        }
        assert!(max_abs(&off) < 0.5);
    }

    #[test]
    fn pilot_energy_reference_value() {
        let (cfg, maps) = reference();
        let g_p = build_g_p(&maps, &cfg).unwrap();
        let p = CVector::from_iterator(4, [17, 14, 3, 0].iter().map(|&k| cis(2.0 * PI * k as f64 / 20.0)));
        let e = pilot_energy(&g_p, &p);
        assert!((e - 5.1783).abs() < 5e-4, "{e}");
        assert_eq!(pilot_energy(&g_p, &CVector::zeros(4)), 0.0);
        let rotated = &p * cis(1.234);
        assert!((pilot_energy(&g_p, &rotated) - e).abs() < 1e-12);
    }

    #[test]
    fn scaling() {
        let (cfg, maps) = reference();
        let g_d = build_g_d(&table_i_permutation(&cfg, &maps), &maps, &cfg).unwrap();
        let s = scale_g_d(&g_d, &cfg).unwrap();
        assert!((energy(&s) / 32.0 - 1.5).abs() < 1e-12);
        let again = scale_g_d(&s, &cfg).unwrap();
        assert!(crate::numerics::max_abs_diff(&again, &s) < 1e-12);
        assert!(scale_g_d(&CMatrix::zeros(52, 32), &cfg).is_err());
    }

    #[test]
    fn zero_word_many_pairs() {
        let (cfg, maps) = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = CMatrix::from_fn(48, 48, |_, _| Complex64::new(rng.random::<f64>() - 0.5, 0.0));
        let g_d = build_g_d(&a, &maps, &cfg).unwrap();
        let g_p = build_g_p(&maps, &cfg).unwrap();
        for _ in 0..200 {
            let d = random_cvec(32, &mut rng);
            let p = random_cvec(4, &mut rng);
            assert!(tail_residual(&(&g_d * &d), &maps, &cfg).unwrap() <= 1e-10);
            assert!(tail_residual(&(&g_p * &p), &maps, &cfg).unwrap() <= 1e-10);
            assert!(tail_residual(&(&g_d * &d + &g_p * &p), &maps, &cfg).unwrap() <= 1e-10);
        }
    }
}
