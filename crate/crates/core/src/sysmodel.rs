//! System parameterization and the 0/1 matrices that place logical symbol
//! slots onto physical subcarriers.
//!
//! Absolute subcarrier indices `0..N` are canonical. Positions relative to
//! the ordering of non-zero subcarriers are derived on construction of
//! [`CarrierMaps`] and never configured directly.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{real_to_complex, CMatrix};

/// Signaling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    #[serde(rename = "uw-ofdm")]
    UwOfdm,
    #[serde(rename = "cp-ofdm")]
    CpOfdm,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::UwOfdm => "uw-ofdm",
            Mode::CpOfdm => "cp-ofdm",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uw-ofdm" | "uw" => Ok(Mode::UwOfdm),
            "cp-ofdm" | "cp" => Ok(Mode::CpOfdm),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

/// PHY parameters of one system.
///
/// `n_u` is the unique-word length in UW-OFDM mode and the cyclic-prefix
/// length in CP-OFDM mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default)]
    pub mode: Mode,
    pub n: usize,
    pub n_d: usize,
    pub n_r: usize,
    pub n_p: usize,
    pub n_z: usize,
    pub n_u: usize,
    pub i_z: Vec<usize>,
    pub i_p: Vec<usize>,
    pub i_r: Vec<usize>,
    /// OFDM symbols per burst.
    pub l: usize,
    /// Sample period in seconds.
    pub t_s: f64,
    pub sigma_d2: f64,
    /// Linear design SNR `sigma_d^2 / (N sigma_n^2)` used by the data cost.
    pub snr_design: f64,
}

const REFERENCE_ZERO: [usize; 12] = [0, 27, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37];
const REFERENCE_PILOTS: [usize; 4] = [7, 21, 43, 57];
const REFERENCE_REDUNDANT: [usize; 16] = [2, 5, 9, 13, 17, 20, 24, 26, 38, 40, 44, 47, 51, 54, 58, 62];

impl SystemConfig {
    /// The 64-point UW-OFDM reference setup.
    pub fn reference_uw() -> Self {
        Self {
            mode: Mode::UwOfdm,
            n: 64,
            n_d: 32,
            n_r: 16,
            n_p: 4,
            n_z: 12,
            n_u: 16,
            i_z: REFERENCE_ZERO.to_vec(),
            i_p: REFERENCE_PILOTS.to_vec(),
            i_r: REFERENCE_REDUNDANT.to_vec(),
            l: 8,
            t_s: 50e-9,
            sigma_d2: 1.0,
            snr_design: 10.0,
        }
    }

    /// The matching CP-OFDM reference setup (48 data subcarriers, 16-sample CP).
    pub fn reference_cp() -> Self {
        Self {
            mode: Mode::CpOfdm,
            n_d: 48,
            n_r: 0,
            i_r: Vec::new(),
            ..Self::reference_uw()
        }
    }

    /// Number of non-zero (used) subcarriers, `N - N_z`.
    pub fn n_used(&self) -> usize {
        self.n - self.n_z
    }

    /// Number of non-pilot used subcarriers, `N_d + N_r`.
    pub fn n_payload(&self) -> usize {
        self.n_d + self.n_r
    }

    /// Ratio `N_d' / N_d` between the data carriers of the CP reference
    /// (all non-pilot used carriers) and this system's data symbols.
    pub fn alpha(&self) -> f64 {
        self.n_payload() as f64 / self.n_d as f64
    }

    /// `N sigma_n^2 / sigma_d^2` implied by the design SNR.
    pub fn design_noise_ratio(&self) -> f64 {
        1.0 / self.snr_design
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// SHA-256 over the canonical JSON encoding, hex encoded.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes to JSON");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Returns every violated invariant; an empty list means the config is valid.
pub fn validate_config(cfg: &SystemConfig) -> Vec<String> {
    let mut v = Vec::new();
    if cfg.n == 0 {
        v.push("N must be at least 1".to_string());
    }
    if cfg.n_d == 0 {
        v.push("N_d must be at least 1".to_string());
    }
    let sum = cfg.n_d + cfg.n_r + cfg.n_p + cfg.n_z;
    if sum != cfg.n {
        v.push(format!(
            "N sum mismatch: N_d + N_r + N_p + N_z = {sum} but N = {}",
            cfg.n
        ));
    }
    if cfg.n_u == 0 || cfg.n_u >= cfg.n {
        v.push(format!("N_u = {} must lie in [1, N-1]", cfg.n_u));
    }
    match cfg.mode {
        Mode::UwOfdm => {
            if cfg.n_r != cfg.n_u {
                v.push(format!(
                    "N_r = {} must equal N_u = {} in UW-OFDM mode",
                    cfg.n_r, cfg.n_u
                ));
            }
        }
        Mode::CpOfdm => {
            if cfg.n_r != 0 || !cfg.i_r.is_empty() {
                v.push("CP-OFDM mode requires N_r = 0 and an empty I_r".to_string());
            }
        }
    }

    let sets: [(&str, &Vec<usize>, usize); 3] = [
        ("I_z", &cfg.i_z, cfg.n_z),
        ("I_p", &cfg.i_p, cfg.n_p),
        ("I_r", &cfg.i_r, cfg.n_r),
    ];
    for (name, set, expected) in sets.iter() {
        if set.len() != *expected {
            v.push(format!("{name} has {} entries, expected {expected}", set.len()));
        }
        if let Some(bad) = set.iter().find(|&&i| i >= cfg.n) {
            v.push(format!(
                "{name} index {bad} out of range [0, {}]",
                cfg.n.saturating_sub(1)
            ));
        }
        let unique: BTreeSet<_> = set.iter().collect();
        if unique.len() != set.len() {
            v.push(format!("duplicate index in {name}"));
        }
    }
    for a in 0..sets.len() {
        for b in (a + 1)..sets.len() {
            let sa: BTreeSet<_> = sets[a].1.iter().collect();
            let common: Vec<_> = sets[b].1.iter().filter(|i| sa.contains(i)).collect();
            if !common.is_empty() {
                v.push(format!(
                    "index overlap between {} and {}: {:?}",
                    sets[a].0, sets[b].0, common
                ));
            }
        }
    }
    if cfg.i_p.windows(2).any(|w| w[0] >= w[1]) {
        v.push("I_p must be strictly ascending".to_string());
    }
    if cfg.l == 0 {
        v.push("L must be at least 1".to_string());
    }
    if !(cfg.t_s > 0.0 && cfg.t_s.is_finite()) {
        v.push("T_s must be positive".to_string());
    }
    if !(cfg.sigma_d2 > 0.0 && cfg.sigma_d2.is_finite()) {
        v.push("sigma_d2 must be positive".to_string());
    }
    if !(cfg.snr_design > 0.0 && cfg.snr_design.is_finite()) {
        v.push("snr_design must be positive".to_string());
    }
    v
}

/// Fails with the full violation list when the config is invalid.
pub fn ensure_valid(cfg: &SystemConfig) -> Result<()> {
    let v = validate_config(cfg);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(v))
    }
}

/// Placement and selection matrices for one configuration.
///
/// * `b`   (N x (N-N_z)): inserts the zero subcarriers.
/// * `b_p` ((N-N_z) x (N_d+N_r)): inserts zero rows at the pilot positions.
/// * `p_p` ((N-N_z) x (N-N_z)): logical slot `k < N_p` goes to pilot `I_p[k]`,
///   the remaining slots fill the non-pilot used subcarriers in ascending order.
/// * `e_p` (N_p x (N-N_z)): extracts the pilot rows in `I_p` order.
#[derive(Debug, Clone)]
pub struct CarrierMaps {
    pub b: CMatrix,
    pub b_p: CMatrix,
    pub p_p: CMatrix,
    pub e_p: CMatrix,
    /// Absolute indices of used subcarriers, ascending.
    pub used: Vec<usize>,
    /// Absolute indices of zero subcarriers, ascending.
    pub zero: Vec<usize>,
    /// Position of each pilot within `used`, in `I_p` order.
    pub pilot_rel: Vec<usize>,
    /// Positions of the non-pilot used subcarriers within `used`, ascending.
    pub payload_rel: Vec<usize>,
}

impl CarrierMaps {
    /// Absolute subcarrier index of each non-pilot used slot.
    pub fn payload_abs(&self) -> Vec<usize> {
        self.payload_rel.iter().map(|&r| self.used[r]).collect()
    }

    /// Position of an absolute index within the used ordering.
    pub fn rel_of(&self, abs: usize) -> Option<usize> {
        self.used.binary_search(&abs).ok()
    }
}

pub fn build_carrier_maps(cfg: &SystemConfig) -> Result<CarrierMaps> {
    ensure_valid(cfg)?;
    let zero_set: BTreeSet<usize> = cfg.i_z.iter().copied().collect();
    let used: Vec<usize> = (0..cfg.n).filter(|i| !zero_set.contains(i)).collect();
    let zero: Vec<usize> = zero_set.into_iter().collect();
    let n_used = used.len();

    let rel = |abs: usize| used.binary_search(&abs).expect("validated index is used");
    let pilot_rel: Vec<usize> = cfg.i_p.iter().map(|&a| rel(a)).collect();
    let payload_rel: Vec<usize> = (0..n_used).filter(|r| !pilot_rel.contains(r)).collect();

    let mut b = DMatrix::<f64>::zeros(cfg.n, n_used);
    for (col, &abs) in used.iter().enumerate() {
        b[(abs, col)] = 1.0;
    }
    let mut b_p = DMatrix::<f64>::zeros(n_used, payload_rel.len());
    for (col, &r) in payload_rel.iter().enumerate() {
        b_p[(r, col)] = 1.0;
    }
    let mut p_p = DMatrix::<f64>::zeros(n_used, n_used);
    for (slot, &r) in pilot_rel.iter().chain(payload_rel.iter()).enumerate() {
        p_p[(r, slot)] = 1.0;
    }
    let mut e_p = DMatrix::<f64>::zeros(pilot_rel.len(), n_used);
    for (k, &r) in pilot_rel.iter().enumerate() {
        e_p[(k, r)] = 1.0;
    }

    Ok(CarrierMaps {
        b: real_to_complex(&b),
        b_p: real_to_complex(&b_p),
        p_p: real_to_complex(&p_p),
        e_p: real_to_complex(&e_p),
        used,
        zero,
        pilot_rel,
        payload_rel,
    })
}
