//! Experiment orchestration: CP-OFDM reference, Monte-Carlo CPE and ICI
//! sweeps, the minimum pilot-energy table and CSV output.
//!
//! Realization `i` of a sweep draws its channel from ChaCha stream `2i` and
//! its data from stream `2i + 1` of the scenario seed. Two systems run with
//! the same seed therefore see identical channels, and results do not depend
//! on how realizations are spread over threads.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::airlink::{
    approx_error_powers, assemble_burst, common_phase, default_uw_energy, draw_channel, make_uw, receive_exact,
    ApproxErrorRow, ChannelRealization, UniqueWord, UwSpec,
};
use crate::design::{
    initial_a_d, optimize_ad, optimize_pilots, DescentOptions, DescentResult, InitKind, PilotSearchResult,
};
use crate::error::{Error, Result};
use crate::estimator::{channel_weights, data_ici_power, estimate_burst, pilot_ici_power, wrap_pi};
use crate::genmat::{build_g_p, GeneratorSet};
use crate::numerics::{CMatrix, CVector, ONE, ZERO};
use crate::sysmodel::{build_carrier_maps, ensure_valid, CarrierMaps, Mode, SystemConfig};

/// RMS delay spread of the reference channel model.
pub const TAU_RMS: f64 = 100e-9;

pub const DEFAULT_REALIZATIONS: usize = 1000;

/// CSV layout version written into every header comment.
pub const SCHEMA_VERSION: u32 = 1;

/// Default CFO grid `0, 0.02, ..., 0.1`.
pub fn default_eps_grid() -> Vec<f64> {
    (0..=5).map(|i| 0.02 * i as f64).collect()
}

/// Parses `a:b:step` into `a, a+step, ...` up to and including `b`.
pub fn parse_eps_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidArgument(format!("eps grid '{s}' is not of the form a:b:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

/// The CP-OFDM counterpart of a UW-OFDM configuration: redundant
/// subcarriers become data subcarriers and the guard becomes a cyclic prefix
/// of the same length.
pub fn cp_reference_config(cfg: &SystemConfig) -> SystemConfig {
    SystemConfig {
        mode: Mode::CpOfdm,
        n_d: cfg.n_d + cfg.n_r,
        n_r: 0,
        i_r: Vec::new(),
        ..cfg.clone()
    }
}

/// `G_d = B_p`, `G_p = P_p [I; 0]`, using the given pilot values.
pub fn build_cp_reference(cfg: &SystemConfig, maps: &CarrierMaps, p: &CVector) -> Result<GeneratorSet> {
    ensure_valid(cfg)?;
    if cfg.mode != Mode::CpOfdm {
        return Err(Error::InvalidArgument(
            "CP-OFDM reference needs a CP-OFDM config".into(),
        ));
    }
    if p.len() != cfg.n_p {
        return Err(Error::Dimension(format!(
            "pilot vector has {} entries, N_p = {}",
            p.len(),
            cfg.n_p
        )));
    }
    let n_used = cfg.n_used();
    let select = CMatrix::from_fn(n_used, cfg.n_p, |r, c| if r == c { ONE } else { ZERO });
    Ok(GeneratorSet {
        mode: Mode::CpOfdm,
        a_d: CMatrix::identity(cfg.n_d, cfg.n_d),
        g_d: maps.b_p.clone(),
        g_p: &maps.p_p * select,
        p: p.clone(),
        alpha: cfg.alpha(),
    })
}

/// Everything needed to simulate one system.
#[derive(Debug, Clone)]
pub struct Link {
    pub label: String,
    pub cfg: SystemConfig,
    pub maps: CarrierMaps,
    pub gens: GeneratorSet,
    pub uw: UniqueWord,
}

impl Link {
    pub fn uw_ofdm(label: &str, cfg: &SystemConfig, gens: GeneratorSet, uw: &UwSpec) -> Result<Self> {
        let maps = build_carrier_maps(cfg)?;
        if gens.mode != Mode::UwOfdm || cfg.mode != Mode::UwOfdm {
            return Err(Error::InvalidArgument(
                "UW-OFDM link needs a UW-OFDM config and generators".into(),
            ));
        }
        let uw = make_uw(uw, cfg, &maps, default_uw_energy(cfg))?;
        Ok(Self {
            label: label.into(),
            cfg: cfg.clone(),
            maps,
            gens,
            uw,
        })
    }

    /// CP-OFDM reference for a UW-OFDM configuration, with the same pilots.
    pub fn cp_reference(label: &str, uw_cfg: &SystemConfig, p: &CVector) -> Result<Self> {
        let cfg = cp_reference_config(uw_cfg);
        let maps = build_carrier_maps(&cfg)?;
        let gens = build_cp_reference(&cfg, &maps, p)?;
        let uw = UniqueWord::zero(&cfg, &maps)?;
        Ok(Self {
            label: label.into(),
            cfg,
            maps,
            gens,
            uw,
        })
    }

    pub fn n_data(&self) -> usize {
        self.gens.g_d.ncols()
    }
}

/// Optimized UW-OFDM generators: descent on `A_d` from `init`, pilots from the
/// exhaustive search over a `cardinality`-PSK alphabet.
pub fn design_generators(
    cfg: &SystemConfig,
    init: InitKind,
    opts: &DescentOptions,
    cardinality: usize,
) -> Result<(GeneratorSet, DescentResult, PilotSearchResult)> {
    let maps = build_carrier_maps(cfg)?;
    let a0 = initial_a_d(init, cfg, &maps, opts)?;
    let descent = optimize_ad(&a0, &maps, cfg, opts)?;
    let pilots = optimize_pilots(&build_g_p(&maps, cfg)?, cardinality)?;
    let gens = GeneratorSet::uw_ofdm(&descent.a_d, pilots.p.clone(), &maps, cfg)?;
    Ok((gens, descent, pilots))
}

/// Monte-Carlo settings shared by the sweeps.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub eps_grid: Vec<f64>,
    pub n_realizations: usize,
    /// Time-domain noise variance `sigma_n^2`.
    pub noise_var: f64,
    pub seed: u64,
    pub tau_rms: f64,
    /// Symbols per simulated burst.
    pub symbols: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            eps_grid: default_eps_grid(),
            n_realizations: DEFAULT_REALIZATIONS,
            noise_var: 0.0,
            seed: 1,
            tau_rms: TAU_RMS,
            symbols: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidArgument("at least one realization is needed".into()));
        }
        if self.symbols == 0 {
            return Err(Error::InvalidArgument("at least one symbol per burst is needed".into()));
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(0.0..0.5).contains(e)) {
            return Err(Error::InvalidArgument("eps grid values must lie in [0, 0.5)".into()));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise variance must be finite and non-negative".into(),
            ));
        }
        if !(self.tau_rms > 0.0) {
            return Err(Error::InvalidArgument("tau_rms must be positive".into()));
        }
        Ok(())
    }

    fn channel_rng(&self, i: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(2 * i as u64);
        r
    }

    fn data_rng(&self, i: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(2 * i as u64 + 1);
        r
    }
}

/// Unit-variance QPSK symbols.
pub fn qpsk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(n, |_, _| {
        let re = if rng.random::<bool>() { s } else { -s };
        let im = if rng.random::<bool>() { s } else { -s };
        Complex64::new(re, im)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmseRow {
    pub eps: f64,
    /// Mean squared error of the compensated CPE estimate of symbol 0 (rad^2).
    pub bmse: f64,
    /// Standard error of that mean.
    pub std_err: f64,
    pub n_used: usize,
}

/// Squared CPE error of one noiseless (or noisy) burst realization.
fn cpe_error(link: &Link, sc: &Scenario, eps: f64, i: usize) -> Result<f64> {
    let ch = draw_channel(&mut sc.channel_rng(i), sc.tau_rms, &link.cfg, &link.maps)?;
    let mut rng = sc.data_rng(i);
    let data: Vec<CVector> = (0..sc.symbols).map(|_| qpsk(link.n_data(), &mut rng)).collect();
    let burst = assemble_burst(&data, &link.gens, &link.uw, &link.maps, &link.cfg)?;
    let rx = receive_exact(&burst, &ch, eps, sc.noise_var, &mut rng, &link.maps, &link.cfg)?;
    let w = channel_weights(&ch.h, &link.maps);
    let est = estimate_burst(&rx, &link.gens, &link.uw, &ch.h, &w, &link.maps, &link.cfg)?;
    let err = wrap_pi(est.phi_hathat[0] - common_phase(eps, 0, &link.cfg));
    Ok(err * err)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// BMSE of the compensated CPE estimate per CFO value.
///
/// Realizations that fail (weak pilot bins, undefined angles) are skipped and
/// show up as `n_used < n_realizations`.
pub fn run_cpe_bmse(link: &Link, sc: &Scenario) -> Result<Vec<BmseRow>> {
    sc.validate()?;
    Ok(sc
        .eps_grid
        .iter()
        .map(|&eps| {
            let per: Vec<Option<f64>> = (0..sc.n_realizations)
                .into_par_iter()
                .map(|i| cpe_error(link, sc, eps, i).ok())
                .collect();
            let used: Vec<f64> = per.into_iter().flatten().collect();
            let (bmse, std_err) = mean_and_stderr(&used);
            BmseRow {
                eps,
                bmse,
                std_err,
                n_used: used.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IciRow {
    pub eps: f64,
    pub data_ici: f64,
    pub pilot_ici: f64,
    pub n_used: usize,
}

/// Closed-form data and pilot ICI powers at the pilots, averaged over channels.
pub fn run_ici_sweep(link: &Link, sc: &Scenario) -> Result<Vec<IciRow>> {
    sc.validate()?;
    let channels: Vec<ChannelRealization> = (0..sc.n_realizations)
        .into_par_iter()
        .map(|i| draw_channel(&mut sc.channel_rng(i), sc.tau_rms, &link.cfg, &link.maps))
        .collect::<Result<_>>()?;
    Ok(sc
        .eps_grid
        .iter()
        .map(|&eps| {
            let per: Vec<Option<(f64, f64)>> = channels
                .par_iter()
                .map(|ch| {
                    let d = data_ici_power(&link.gens.g_d, &ch.h, eps, &link.maps, &link.cfg).ok()?;
                    let p = pilot_ici_power(&link.gens.g_p, &link.gens.p, &ch.h, eps, &link.maps, &link.cfg).ok()?;
                    Some((d, p))
                })
                .collect();
            let used: Vec<(f64, f64)> = per.into_iter().flatten().collect();
            let n = used.len().max(1) as f64;
            IciRow {
                eps,
                data_ici: used.iter().map(|v| v.0).sum::<f64>() / n,
                pilot_ici: used.iter().map(|v| v.1).sum::<f64>() / n,
                n_used: used.len(),
            }
        })
        .collect())
}

/// Minimum pilot energies for each alphabet size.
pub fn run_pilot_table(cfg: &SystemConfig, cardinalities: &[usize]) -> Result<Vec<PilotSearchResult>> {
    let maps = build_carrier_maps(cfg)?;
    let g_p = build_g_p(&maps, cfg)?;
    cardinalities.iter().map(|&c| optimize_pilots(&g_p, c)).collect()
}

/// Approximation-error report per unique word with `H = I`.
pub fn run_approx_error(
    cfg: &SystemConfig,
    gens: &GeneratorSet,
    uws: &[UwSpec],
    eps: f64,
) -> Result<Vec<(UwSpec, Vec<ApproxErrorRow>)>> {
    let maps = build_carrier_maps(cfg)?;
    let ch = ChannelRealization::identity(cfg, &maps)?;
    uws.iter()
        .map(|spec| {
            let uw = make_uw(spec, cfg, &maps, default_uw_energy(cfg))?;
            Ok((spec.clone(), approx_error_powers(gens, &uw, &ch, eps, &maps, cfg)?))
        })
        .collect()
}

/// CSV writer that starts with the version comment line.
pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvOut<W> {
    pub fn new(mut w: W, seed: Option<u64>, header: &[&str]) -> Result<Self> {
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        writeln!(
            w,
            "# uwofdm-lab v{} schema={} seed={}",
            env!("CARGO_PKG_VERSION"),
            SCHEMA_VERSION,
            seed
        )?;
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Shortest round-trip text; infinities as `inf`.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:?}")
    }
}

pub fn write_bmse_csv<W: Write>(w: W, seed: u64, rows: &[(String, Vec<BmseRow>)]) -> Result<()> {
    let mut out = CsvOut::new(w, Some(seed), &["system", "eps", "bmse", "std_err", "n_used"])?;
    for (label, table) in rows {
        for r in table {
            out.row([
                label.clone(),
                fmt_f64(r.eps),
                fmt_f64(r.bmse),
                fmt_f64(r.std_err),
                r.n_used.to_string(),
            ])?;
        }
    }
    out.finish()
}

pub fn write_ici_csv<W: Write>(w: W, seed: u64, rows: &[(String, Vec<IciRow>)]) -> Result<()> {
    let mut out = CsvOut::new(w, Some(seed), &["system", "eps", "data_ici", "pilot_ici", "n_used"])?;
    for (label, table) in rows {
        for r in table {
            out.row([
                label.clone(),
                fmt_f64(r.eps),
                fmt_f64(r.data_ici),
                fmt_f64(r.pilot_ici),
                r.n_used.to_string(),
            ])?;
        }
    }
    out.finish()
}

/// `cardinality,energy,exponents` with exponents space-separated.
pub fn write_pilot_table_csv<W: Write>(w: W, rows: &[PilotSearchResult]) -> Result<()> {
    let mut out = CsvOut::new(w, None, &["cardinality", "energy", "exponents"])?;
    for r in rows {
        let k: Vec<String> = r.exponents.iter().map(|k| k.to_string()).collect();
        out.row([r.cardinality.to_string(), fmt_f64(r.energy), k.join(" ")])?;
    }
    out.finish()
}

pub fn write_approx_error_csv<W: Write>(w: W, rows: &[ApproxErrorRow]) -> Result<()> {
    let mut out = CsvOut::new(w, None, &["subcarrier", "sigma2_k", "sigma2_delta", "ratio_db"])?;
    for r in rows {
        out.row([
            r.subcarrier.to_string(),
            fmt_f64(r.sigma2_k),
            fmt_f64(r.sigma2_delta),
            fmt_f64(r.ratio_db()),
        ])?;
    }
    out.finish()
}
