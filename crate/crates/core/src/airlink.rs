//! Physical-layer path: unique words, transmit assembly, multipath channel,
//! carrier frequency offset in time and frequency, and the exact and
//! approximate receive models.
//!
//! A CFO of `eps` subcarrier spacings rotates burst sample `t` by
//! `exp(j 2 pi eps t / N)`. Seen through the DFT window of symbol `l` this is
//! `exp(j psi_l)` times the frequency-domain matrix `Lambda'`, whose entries are
//!
//! ```text
//! Lambda'[k, m] = (1/N) sum_n exp(j 2 pi (m + eps - k) n / N)
//!               = exp(j pi eps (N-1)/N) * Lambda'_stat[k, m]
//! ```
//!
//! The channel acts as a circular convolution inside each DFT window: in
//! UW-OFDM the window is preceded by a unique word (the previous symbol's tail
//! or the burst-leading word), in CP-OFDM by the cyclic prefix.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::genmat::GeneratorSet;
use crate::numerics::{cis, dft_matrix, idft_matrix, CMatrix, CVector, ONE, ZERO};
use crate::sysmodel::{CarrierMaps, Mode, SystemConfig};

/// Barker-13 chip signs.
pub const BARKER_13: [f64; 13] = [1., 1., 1., 1., 1., -1., -1., 1., 1., -1., 1., -1., 1.];

/// Source of the unique-word samples.
#[derive(Debug, Clone, PartialEq)]
pub enum UwSpec {
    Zero,
    /// Zadoff-Chu sequence of root 1 and length `N_u`.
    Cazac,
    /// Barker-13 in the first 13 samples, zero-padded to `N_u`.
    Barker,
    Custom(Vec<Complex64>),
}

impl UwSpec {
    /// Parses `zero`, `cazac`, `barker` or `custom:PATH` (reading the file).
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(UwSpec::Zero),
            "cazac" => Ok(UwSpec::Cazac),
            "barker" => Ok(UwSpec::Barker),
            _ => match s.strip_prefix("custom:") {
                Some(path) => Ok(UwSpec::Custom(read_uw_file(path)?)),
                None => Err(Error::InvalidArgument(format!(
                    "unknown unique word '{s}' (expected zero, cazac, barker or custom:PATH)"
                ))),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UwSpec::Zero => "zero",
            UwSpec::Cazac => "cazac",
            UwSpec::Barker => "barker",
            UwSpec::Custom(_) => "custom",
        }
    }
}

/// Reads one complex sample per line as `re,im`. Blank lines and lines
/// starting with `#` are skipped.
pub fn read_uw_file(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "unique-word sample {} needs two fields 're,im', got {}",
                i + 1,
                rec.len()
            )));
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("unique-word sample {}: {e}", i + 1)))
        };
        out.push(Complex64::new(parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(out)
}

/// Unit average sample power: `||x_u||^2 = N_u`.
pub fn default_uw_energy(cfg: &SystemConfig) -> f64 {
    cfg.n_u as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniqueWord {
    pub kind: UwSpec,
    /// Time-domain samples, length `N_u`.
    pub x_u: CVector,
    /// `F_N [0; x_u]`, length `N`.
    pub x_tilde: CVector,
    /// `x_tilde` on the used subcarriers.
    pub x_tilde_nonzero: CVector,
    /// `x_tilde` on the zero subcarriers.
    pub x_tilde_zero: CVector,
}

impl UniqueWord {
    pub fn zero(cfg: &SystemConfig, maps: &CarrierMaps) -> Result<Self> {
        make_uw(&UwSpec::Zero, cfg, maps, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.x_u.iter().all(|z| *z == ZERO)
    }

    /// `x_tilde` restricted to the pilot subcarriers, in `I_p` order.
    pub fn at_pilots(&self, maps: &CarrierMaps) -> CVector {
        CVector::from_iterator(
            maps.pilot_rel.len(),
            maps.pilot_rel.iter().map(|&r| self.x_tilde_nonzero[r]),
        )
    }
}

/// Builds a unique word of total energy `energy` (ignored for the zero word).
pub fn make_uw(spec: &UwSpec, cfg: &SystemConfig, maps: &CarrierMaps, energy: f64) -> Result<UniqueWord> {
    let n_u = cfg.n_u;
    if n_u == 0 {
        return Err(Error::InvalidArgument("N_u must be at least 1".into()));
    }
    let raw: CVector = match spec {
        UwSpec::Zero => CVector::zeros(n_u),
        UwSpec::Cazac => CVector::from_fn(n_u, |n, _| {
            let n = n as f64;
            // even length: n^2, odd length: n(n+1)
            let e = if n_u.is_multiple_of(2) { n * n } else { n * (n + 1.0) };
            cis(-PI * e / n_u as f64)
        }),
        UwSpec::Barker => {
            if n_u < BARKER_13.len() {
                return Err(Error::InvalidArgument(format!("Barker-13 does not fit N_u = {n_u}")));
            }
            CVector::from_fn(n_u, |n, _| BARKER_13.get(n).map_or(ZERO, |&s| Complex64::new(s, 0.0)))
        }
        UwSpec::Custom(samples) => {
            if samples.len() != n_u {
                return Err(Error::Dimension(format!(
                    "custom unique word has {} samples, N_u = {n_u}",
                    samples.len()
                )));
            }
            CVector::from_column_slice(samples)
        }
    };
    let x_u = if matches!(spec, UwSpec::Zero) {
        raw
    } else {
        if !(energy >= 0.0 && energy.is_finite()) {
            return Err(Error::InvalidArgument(
                "unique-word energy must be finite and non-negative".into(),
            ));
        }
        let e = raw.norm_squared();
        if e == 0.0 {
            return Err(Error::InvalidArgument("unique word has no energy to scale".into()));
        }
        raw * Complex64::new((energy / e).sqrt(), 0.0)
    };
    uw_from_samples(spec.clone(), x_u, cfg, maps)
}

fn uw_from_samples(kind: UwSpec, x_u: CVector, cfg: &SystemConfig, maps: &CarrierMaps) -> Result<UniqueWord> {
    let mut padded = CVector::zeros(cfg.n);
    padded.rows_mut(cfg.n - cfg.n_u, cfg.n_u).copy_from(&x_u);
    let x_tilde = dft_matrix(cfg.n)? * padded;
    Ok(UniqueWord {
        kind,
        x_tilde_nonzero: select(&x_tilde, &maps.used),
        x_tilde_zero: select(&x_tilde, &maps.zero),
        x_tilde,
        x_u,
    })
}

fn select(v: &CVector, idx: &[usize]) -> CVector {
    CVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Multipath channel with its sampled frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Impulse response, length at most `N_u`.
    pub taps: CVector,
    /// DFT of the zero-padded taps, length `N`.
    pub h_full: CVector,
    /// Response on the used subcarriers.
    pub h: CVector,
    /// Response on the zero subcarriers.
    pub h_zero: CVector,
    /// Response on the pilot subcarriers, `I_p` order.
    pub h_pilot: CVector,
}

impl ChannelRealization {
    pub fn from_taps(taps: CVector, cfg: &SystemConfig, maps: &CarrierMaps) -> Result<Self> {
        if taps.is_empty() || taps.len() > cfg.n_u.max(1) {
            return Err(Error::Dimension(format!(
                "channel needs 1..={} taps, got {}",
                cfg.n_u,
                taps.len()
            )));
        }
        let mut padded = CVector::zeros(cfg.n);
        padded.rows_mut(0, taps.len()).copy_from(&taps);
        let h_full = dft_matrix(cfg.n)? * padded;
        let h = select(&h_full, &maps.used);
        let h_pilot = CVector::from_iterator(maps.pilot_rel.len(), maps.pilot_rel.iter().map(|&r| h[r]));
        Ok(Self {
            h_zero: select(&h_full, &maps.zero),
            h,
            h_pilot,
            h_full,
            taps,
        })
    }

    /// Ideal channel `H = I`.
    pub fn identity(cfg: &SystemConfig, maps: &CarrierMaps) -> Result<Self> {
        Self::from_taps(CVector::from_element(1, ONE), cfg, maps)
    }

    /// Smallest response magnitude on the used subcarriers and its absolute index.
    pub fn weakest_bin(&self, maps: &CarrierMaps) -> (usize, f64) {
        self.h
            .iter()
            .enumerate()
            .map(|(r, z)| (maps.used[r], z.norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }
}

/// Tap variances `exp(-m T_s / tau_rms)`, `m < N_u`, before normalization.
pub fn power_delay_profile(tau_rms: f64, cfg: &SystemConfig) -> Result<Vec<f64>> {
    if !(tau_rms > 0.0 && tau_rms.is_finite()) {
        return Err(Error::InvalidArgument("tau_rms must be positive".into()));
    }
    Ok((0..cfg.n_u).map(|m| (-(m as f64) * cfg.t_s / tau_rms).exp()).collect())
}

/// Circular complex Gaussian taps following [`power_delay_profile`].
pub fn draw_raw_taps<R: Rng + ?Sized>(rng: &mut R, tau_rms: f64, cfg: &SystemConfig) -> Result<CVector> {
    let pdp = power_delay_profile(tau_rms, cfg)?;
    Ok(CVector::from_iterator(
        pdp.len(),
        pdp.iter().map(|v| {
            let std = (0.5 * v).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * std, im * std)
        }),
    ))
}

/// Rayleigh multipath channel with an exponential power-delay profile,
/// normalized to unit energy per realization.
pub fn draw_channel<R: Rng + ?Sized>(
    rng: &mut R,
    tau_rms: f64,
    cfg: &SystemConfig,
    maps: &CarrierMaps,
) -> Result<ChannelRealization> {
    let mut taps = draw_raw_taps(rng, tau_rms, cfg)?;
    let norm = taps.norm();
    taps /= Complex64::new(norm, 0.0);
    ChannelRealization::from_taps(taps, cfg, maps)
}

/// One symbol's transmit signal `x'' = F^{-1}(B G_d d + B G_p p + x_tilde_u)`.
pub fn assemble_tx_symbol(
    d: &CVector,
    gens: &GeneratorSet,
    uw: &UniqueWord,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<CVector> {
    if d.len() != gens.g_d.ncols() {
        return Err(Error::Dimension(format!(
            "data vector has {} entries, generator expects {}",
            d.len(),
            gens.g_d.ncols()
        )));
    }
    if gens.g_d.nrows() != cfg.n_used() || gens.p.len() != gens.g_p.ncols() {
        return Err(Error::Dimension(
            "generator set does not match the configuration".into(),
        ));
    }
    if uw.x_tilde.len() != cfg.n {
        return Err(Error::Dimension("unique word does not match the configuration".into()));
    }
    if cfg.mode == Mode::CpOfdm && !uw.is_zero() {
        return Err(Error::InvalidArgument("CP-OFDM symbols carry no unique word".into()));
    }
    let used = &gens.g_d * d + &gens.g_p * &gens.p;
    Ok(idft_matrix(cfg.n)? * (&maps.b * used + &uw.x_tilde))
}

/// Burst of `data.len()` symbols.
///
/// UW-OFDM: `[x_u, x''_0, x''_1, ...]`. CP-OFDM: each symbol preceded by its
/// last `N_u` samples.
pub fn assemble_burst(
    data: &[CVector],
    gens: &GeneratorSet,
    uw: &UniqueWord,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<CVector> {
    let (n, g) = (cfg.n, cfg.n_u);
    let mut out: Vec<Complex64> = Vec::with_capacity(burst_len(data.len(), cfg));
    if cfg.mode == Mode::UwOfdm {
        out.extend(uw.x_u.iter());
    }
    for d in data {
        let x = assemble_tx_symbol(d, gens, uw, maps, cfg)?;
        if cfg.mode == Mode::CpOfdm {
            out.extend(x.rows(n - g, g).iter());
        }
        out.extend(x.iter());
    }
    Ok(CVector::from_vec(out))
}

/// Burst length for `l` symbols.
pub fn burst_len(l: usize, cfg: &SystemConfig) -> usize {
    match cfg.mode {
        Mode::UwOfdm => cfg.n_u + cfg.n * l,
        Mode::CpOfdm => (cfg.n + cfg.n_u) * l,
    }
}

/// First burst sample of the DFT window of symbol `l`.
pub fn window_start(l: usize, cfg: &SystemConfig) -> usize {
    match cfg.mode {
        Mode::UwOfdm => cfg.n * l + cfg.n_u,
        Mode::CpOfdm => (cfg.n + cfg.n_u) * l + cfg.n_u,
    }
}

fn symbols_in(burst: &CVector, cfg: &SystemConfig) -> Result<usize> {
    let (n, g) = (cfg.n, cfg.n_u);
    let l = match cfg.mode {
        Mode::UwOfdm => burst
            .len()
            .checked_sub(g)
            .filter(|r| r.is_multiple_of(n))
            .map(|r| r / n),
        Mode::CpOfdm => burst.len().is_multiple_of(n + g).then_some(burst.len() / (n + g)),
    };
    l.filter(|&l| l > 0)
        .ok_or_else(|| Error::Dimension(format!("burst length {} does not match the configuration", burst.len())))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.abs() <= 0.5) {
        return Err(Error::InvalidArgument(format!("|eps| = {eps} exceeds 0.5")));
    }
    Ok(())
}

/// Diagonal of `Lambda_N^(l)` and the accumulated phase `psi_l`.
pub fn cfo_time_matrix(eps: f64, l: usize, cfg: &SystemConfig) -> Result<(CVector, f64)> {
    check_eps(eps)?;
    let psi = accumulated_phase(eps, l, cfg);
    let n = cfg.n as f64;
    let diag = CVector::from_fn(cfg.n, |i, _| cis(psi + 2.0 * PI * eps * i as f64 / n));
    Ok((diag, psi))
}

/// `psi_l = 2 pi eps s_l / N` with `s_l` the window start of symbol `l`.
pub fn accumulated_phase(eps: f64, l: usize, cfg: &SystemConfig) -> f64 {
    2.0 * PI * eps * window_start(l, cfg) as f64 / cfg.n as f64
}

/// Common phase error `phi_l = psi_l + (2 pi / N) eps (N-1)/2`.
pub fn common_phase(eps: f64, l: usize, cfg: &SystemConfig) -> f64 {
    accumulated_phase(eps, l, cfg) + PI * eps * (cfg.n as f64 - 1.0) / cfg.n as f64
}

/// `Lambda'_stat[k, m] = sin(pi x) / (N sin(pi x / N)) * exp(j pi (m-k)(N-1)/N)`,
/// `x = m + eps - k`.
pub fn lambda_stat_entry(eps: f64, k: usize, m: usize, n: usize) -> Complex64 {
    if eps == 0.0 {
        return if k == m { ONE } else { ZERO };
    }
    let nf = n as f64;
    let dk = m as f64 - k as f64;
    let x = dk + eps;
    let den = nf * (PI * x / nf).sin();
    let mag = if den.abs() < 1e-300 { 1.0 } else { (PI * x).sin() / den };
    cis(PI * dk * (nf - 1.0) / nf) * mag
}

/// `Lambda'_stat` as an `N x N` matrix.
pub fn lambda_stat_full(eps: f64, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |k, m| lambda_stat_entry(eps, k, m, n))
}

/// `Lambda'_stat` restricted to used rows and columns.
pub fn lambda_stat_used(eps: f64, maps: &CarrierMaps, n: usize) -> CMatrix {
    let u = &maps.used;
    CMatrix::from_fn(u.len(), u.len(), |r, c| lambda_stat_entry(eps, u[r], u[c], n))
}

/// CFO matrices of one symbol.
#[derive(Debug, Clone)]
pub struct CfoState {
    pub eps: f64,
    pub l: usize,
    pub psi_l: f64,
    pub phi_l: f64,
    /// Diagonal of `Lambda_N^(l)`.
    pub lambda_time: CVector,
    /// `Lambda'`, without the symbol phase.
    pub lambda_freq_full: CMatrix,
    pub lambda_stat_full: CMatrix,
    /// `exp(j psi_l) Lambda'` on used rows and columns.
    pub lambda: CMatrix,
    /// `exp(j psi_l) Lambda'` on used rows and zero columns.
    pub lambda_zn: CMatrix,
    /// `Lambda'_stat` on used rows and columns.
    pub lambda_stat: CMatrix,
}

impl CfoState {
    /// Same offset, another symbol: only the phase factor changes.
    pub fn at_symbol(&self, l: usize, cfg: &SystemConfig) -> Self {
        let psi = accumulated_phase(self.eps, l, cfg);
        let rot = cis(psi - self.psi_l);
        Self {
            eps: self.eps,
            l,
            psi_l: psi,
            phi_l: common_phase(self.eps, l, cfg),
            lambda_time: &self.lambda_time * rot,
            lambda_freq_full: self.lambda_freq_full.clone(),
            lambda_stat_full: self.lambda_stat_full.clone(),
            lambda: &self.lambda * rot,
            lambda_zn: &self.lambda_zn * rot,
            lambda_stat: self.lambda_stat.clone(),
        }
    }
}

/// Closed-form frequency-domain CFO matrices for symbol `l`.
pub fn cfo_freq_matrix(eps: f64, l: usize, cfg: &SystemConfig, maps: &CarrierMaps) -> Result<CfoState> {
    let (lambda_time, psi) = cfo_time_matrix(eps, l, cfg)?;
    let n = cfg.n;
    let stat = lambda_stat_full(eps, n);
    let freq = &stat * cis(PI * eps * (n as f64 - 1.0) / n as f64);
    let with_phase = &freq * cis(psi);
    let (u, z) = (&maps.used, &maps.zero);
    Ok(CfoState {
        eps,
        l,
        psi_l: psi,
        phi_l: common_phase(eps, l, cfg),
        lambda_time,
        lambda: CMatrix::from_fn(u.len(), u.len(), |r, c| with_phase[(u[r], u[c])]),
        lambda_zn: CMatrix::from_fn(u.len(), z.len(), |r, c| with_phase[(u[r], z[c])]),
        lambda_stat: CMatrix::from_fn(u.len(), u.len(), |r, c| stat[(u[r], u[c])]),
        lambda_freq_full: freq,
        lambda_stat_full: stat,
    })
}

/// Received used-subcarrier vector of one symbol from its time-domain
/// transmit signal `x''`, optionally keeping the zero-subcarrier leakage.
pub fn receive_symbol<R: Rng + ?Sized>(
    x_time: &CVector,
    channel: &ChannelRealization,
    cfo: &CfoState,
    noise_var: f64,
    rng: &mut R,
    include_leakage: bool,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<CVector> {
    if x_time.len() != cfg.n || channel.h_full.len() != cfg.n {
        return Err(Error::Dimension(
            "symbol or channel does not match the configuration".into(),
        ));
    }
    let x = dft_matrix(cfg.n)? * x_time;
    let on_used = CVector::from_iterator(
        maps.used.len(),
        maps.used.iter().enumerate().map(|(r, &a)| channel.h[r] * x[a]),
    );
    let mut y = &cfo.lambda * on_used;
    if include_leakage && !maps.zero.is_empty() {
        let on_zero = CVector::from_iterator(
            maps.zero.len(),
            maps.zero.iter().enumerate().map(|(r, &a)| channel.h_zero[r] * x[a]),
        );
        y += &cfo.lambda_zn * on_zero;
    }
    if noise_var > 0.0 {
        // frequency-domain noise variance N sigma_n^2
        let std = (cfg.n as f64 * noise_var / 2.0).sqrt();
        for v in y.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *v += Complex64::new(re * std, im * std);
        }
    } else if noise_var < 0.0 || !noise_var.is_finite() {
        return Err(Error::InvalidArgument(
            "noise variance must be finite and non-negative".into(),
        ));
    }
    Ok(y)
}

fn receive_burst<R: Rng + ?Sized>(
    burst: &CVector,
    channel: &ChannelRealization,
    eps: f64,
    noise_var: f64,
    rng: &mut R,
    include_leakage: bool,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<Vec<CVector>> {
    let l_count = symbols_in(burst, cfg)?;
    let base = cfo_freq_matrix(eps, 0, cfg, maps)?;
    let n = cfg.n;
    (0..l_count)
        .map(|l| {
            let start = window_start(l, cfg);
            let x = burst.rows(start, n).into_owned();
            let cfo = base.at_symbol(l, cfg);
            receive_symbol(&x, channel, &cfo, noise_var, rng, include_leakage, maps, cfg)
        })
        .collect()
}

/// Per-symbol received vectors including the zero-subcarrier leakage term:
///
/// `Y = Lambda H G_d d + Lambda H G_p p + Lambda H B^T x_u~ + Lambda_zn H_z x_u~_z + v`
pub fn receive_exact<R: Rng + ?Sized>(
    burst: &CVector,
    channel: &ChannelRealization,
    eps: f64,
    noise_var: f64,
    rng: &mut R,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<Vec<CVector>> {
    receive_burst(burst, channel, eps, noise_var, rng, true, maps, cfg)
}

/// As [`receive_exact`] without the `Lambda_zn H_z x_u~_z` term.
pub fn receive_approx<R: Rng + ?Sized>(
    burst: &CVector,
    channel: &ChannelRealization,
    eps: f64,
    noise_var: f64,
    rng: &mut R,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<Vec<CVector>> {
    receive_burst(burst, channel, eps, noise_var, rng, false, maps, cfg)
}

/// Time-domain reference receiver: linear convolution of the whole burst,
/// sample-wise CFO rotation from the burst start, then one DFT per window.
pub fn receive_time_domain(
    burst: &CVector,
    channel: &ChannelRealization,
    eps: f64,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<Vec<CVector>> {
    check_eps(eps)?;
    let l_count = symbols_in(burst, cfg)?;
    let len = burst.len();
    let taps = &channel.taps;
    let mut y = CVector::zeros(len);
    for t in 0..len {
        let mut acc = ZERO;
        for (m, h) in taps.iter().enumerate().take(t + 1) {
            acc += h * burst[t - m];
        }
        y[t] = acc * cis(2.0 * PI * eps * t as f64 / cfg.n as f64);
    }
    let f = dft_matrix(cfg.n)?;
    Ok((0..l_count)
        .map(|l| {
            let spec = &f * y.rows(window_start(l, cfg), cfg.n);
            select(&spec, &maps.used)
        })
        .collect())
}

/// Per-subcarrier signal and approximation-error powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxErrorRow {
    /// Absolute subcarrier index.
    pub subcarrier: usize,
    pub sigma2_k: f64,
    pub sigma2_delta: f64,
}

impl ApproxErrorRow {
    /// `10 log10(sigma2_k / sigma2_delta)`, `+inf` without error.
    pub fn ratio_db(&self) -> f64 {
        if self.sigma2_delta == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (self.sigma2_k / self.sigma2_delta).log10()
        }
    }
}

/// Expected received power per used subcarrier under the approximate model
/// (random data of variance `sigma_d^2`, no noise) against the power of the
/// neglected `Lambda_zn H_z x_u~_z` term.
pub fn approx_error_powers(
    gens: &GeneratorSet,
    uw: &UniqueWord,
    channel: &ChannelRealization,
    eps: f64,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
) -> Result<Vec<ApproxErrorRow>> {
    let cfo = cfo_freq_matrix(eps, 0, cfg, maps)?;
    let hdiag = |v: &CVector| v.component_mul(&channel.h);
    let data = &cfo.lambda
        * CMatrix::from_fn(gens.g_d.nrows(), gens.g_d.ncols(), |r, c| {
            channel.h[r] * gens.g_d[(r, c)]
        });
    let fixed = &cfo.lambda * hdiag(&(&gens.g_p * &gens.p + &uw.x_tilde_nonzero));
    let leak = if maps.zero.is_empty() {
        CVector::zeros(maps.used.len())
    } else {
        &cfo.lambda_zn * uw.x_tilde_zero.component_mul(&channel.h_zero)
    };
    Ok(maps
        .used
        .iter()
        .enumerate()
        .map(|(r, &abs)| ApproxErrorRow {
            subcarrier: abs,
            sigma2_k: cfg.sigma_d2 * data.row(r).norm_squared() + fixed[r].norm_sqr(),
            sigma2_delta: leak[r].norm_sqr(),
        })
        .collect())
}
