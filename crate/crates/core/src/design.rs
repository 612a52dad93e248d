//! Numerical design of the generator degrees of freedom.
//!
//! * Data generator: steepest descent on the entries of `A_d` minimizing the
//!   sum of LMMSE error variances `J_d` under AWGN with `H = I`, at a fixed
//!   design SNR. `G_d` is renormalized to `trace(G_d^H G_d) = alpha * N_d`
//!   before every cost evaluation, so the cost is invariant to the scale of `A_d`.
//! * Pilots: exhaustive search over a constant-modulus PSK alphabet for the
//!   vector with minimum induced energy `p^H G_p^H G_p p`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::genmat::{build_g_d, payload_tail_map, pilot_energy, scale_g_d};
use crate::numerics::{cis, energy, inverse, solve, CMatrix, CVector, ONE, ZERO};
use crate::sysmodel::{CarrierMaps, SystemConfig};

/// Largest pilot search space enumerated before refusing.
pub const PILOT_SEARCH_GUARD: u128 = 10_000_000;

/// Energies closer than this are treated as equal by the pilot search.
pub const PILOT_TIE_TOL: f64 = 1e-9;

/// How the descent direction is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// Closed-form gradient of the normalized cost.
    #[default]
    Analytic,
    /// Central differences with a per-entry step `1e-6 * max(|a|, 1)`.
    CentralDifference,
}

/// Whether `A_d` is restricted to real entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdDomain {
    #[default]
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// Permutation routing redundancy onto `I_r`.
    Permutation,
    /// i.i.d. standard normal entries.
    RandomNormal,
}

impl std::str::FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perm" | "permutation" => Ok(InitKind::Permutation),
            "random" | "random-normal" => Ok(InitKind::RandomNormal),
            other => Err(Error::InvalidArgument(format!("unknown init '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub max_iters: usize,
    /// Relative cost decrease below which an iteration counts as stalled.
    pub tol_rel: f64,
    /// Consecutive stalled iterations that end the descent.
    pub stall_window: usize,
    pub step_init: f64,
    pub backtrack_factor: f64,
    /// Seed for the random-normal initialization.
    pub seed: u64,
    pub gradient: GradientMode,
    pub domain: AdDomain,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol_rel: 1e-8,
            stall_window: 5,
            step_init: 1.0,
            backtrack_factor: 0.5,
            seed: 1,
            gradient: GradientMode::Analytic,
            domain: AdDomain::Real,
        }
    }
}

impl DescentOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol_rel > 0.0 && self.tol_rel < 1.0) {
            return Err(Error::InvalidArgument("tol_rel must lie in (0, 1)".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::InvalidArgument("step_init must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidArgument("backtrack_factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DescentResult {
    pub a_d: CMatrix,
    /// Cost before the first step followed by the cost after every accepted step.
    pub costs: Vec<f64>,
    /// True when the stall criterion ended the run (as opposed to `max_iters`).
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotSearchResult {
    pub p: CVector,
    pub exponents: Vec<usize>,
    /// `N * E_p`.
    pub energy: f64,
    pub cardinality: usize,
}

/// `J_d(A_d)`: trace of the LMMSE error covariance for `H = I`, with `G_d`
/// built from `A_d` and scaled to `trace(G_d^H G_d) = alpha * N_d`.
pub fn cost_jd(a_d: &CMatrix, maps: &CarrierMaps, cfg: &SystemConfig) -> Result<f64> {
    let g_d = scale_g_d(&build_g_d(a_d, maps, cfg)?, cfg)?;
    lmmse_trace(&g_d, cfg)
}

/// `trace(N sigma_n^2 (G^H G + N sigma_n^2 / sigma_d^2 I)^{-1})` at the design SNR.
pub fn lmmse_trace(g: &CMatrix, cfg: &SystemConfig) -> Result<f64> {
    let ratio = cfg.design_noise_ratio();
    let noise = cfg.sigma_d2 * ratio;
    let n = g.ncols();
    let s = g.adjoint() * g + CMatrix::identity(n, n) * Complex64::new(ratio, 0.0);
    let si = inverse(&s)?;
    Ok(noise * si.trace().re)
}

/// Cost and gradient of `J_d` over `A_d`, specialized for repeated evaluation.
///
/// With `W` the map from payload slots to the time-domain tail, the unscaled
/// generator restricted to payload rows is `G = A1 + A2 T`, `T = -(W A2)^{-1} W A1`.
pub struct DataCost {
    tail: CMatrix,
    n_d: usize,
    beta: f64,
    ratio: f64,
    noise: f64,
}

struct Eval {
    cost: f64,
    grad: Option<CMatrix>,
}

impl DataCost {
    pub fn new(maps: &CarrierMaps, cfg: &SystemConfig) -> Result<Self> {
        Ok(Self {
            tail: payload_tail_map(maps, cfg)?,
            n_d: cfg.n_d,
            beta: cfg.alpha() * cfg.n_d as f64,
            ratio: cfg.design_noise_ratio(),
            noise: cfg.sigma_d2 * cfg.design_noise_ratio(),
        })
    }

    pub fn value(&self, a: &CMatrix) -> Result<f64> {
        Ok(self.eval(a, false)?.cost)
    }

    /// Cost and the gradient with respect to the real (and, for complex
    /// entries, imaginary) parts of `A_d`, packed as `dJ/dRe + j dJ/dIm`.
    pub fn value_and_gradient(&self, a: &CMatrix) -> Result<(f64, CMatrix)> {
        let e = self.eval(a, true)?;
        Ok((e.cost, e.grad.expect("gradient requested")))
    }

    fn eval(&self, a: &CMatrix, want_grad: bool) -> Result<Eval> {
        let k = a.nrows();
        let nd = self.n_d;
        let a1 = a.columns(0, nd);
        let a2 = a.columns(nd, k - nd);
        let v = &self.tail * a2;
        let x = solve(&v, &self.tail)?;
        let t = -(&x * a1);
        let g = a1 + a2 * &t;

        let q = g.adjoint() * &g;
        let tr_q = q.trace().re;
        if !(tr_q > 0.0 && tr_q.is_finite()) {
            return Err(Error::Singular("degenerate data generator".into()));
        }
        let c2 = self.beta / tr_q;
        let eye = CMatrix::identity(nd, nd);
        let s = &q * Complex64::new(c2, 0.0) + &eye * Complex64::new(self.ratio, 0.0);
        let si = inverse(&s)?;
        let cost = self.noise * si.trace().re;
        if !want_grad {
            return Ok(Eval { cost, grad: None });
        }

        // dJ = tr(Z dQ), Z = -noise*c2 * (S^-2 - tr(S^-2 Q)/tr(Q) I)
        let s2 = &si * &si;
        let coupling = (&s2 * &q).trace().re / tr_q;
        let z = (s2 - eye * Complex64::new(coupling, 0.0)) * Complex64::new(-self.noise * c2, 0.0);
        // dG = Pi (dA1 + dA2 T) with Pi = I - A2 (W A2)^{-1} W
        let y = z * g.adjoint();
        let pi = CMatrix::identity(k, k) - a2 * &x;
        let r = y * pi;
        let tr_ = &t * &r;
        let mut m = CMatrix::zeros(k, k);
        m.columns_mut(0, nd).copy_from(&r.transpose());
        m.columns_mut(nd, k - nd).copy_from(&tr_.transpose());
        // dJ = 2 Re sum(M .* dA)
        let grad = m.map(|z| Complex64::new(2.0 * z.re, -2.0 * z.im));
        Ok(Eval { cost, grad: Some(grad) })
    }

    /// Central-difference gradient, same packing as [`Self::value_and_gradient`].
    pub fn numerical_gradient(&self, a: &CMatrix, domain: AdDomain) -> Result<CMatrix> {
        let mut grad = CMatrix::zeros(a.nrows(), a.ncols());
        let mut probe = a.clone();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let orig = a[(i, j)];
                let h = 1e-6 * orig.norm().max(1.0);
                let mut part = |delta: Complex64| -> Result<f64> {
                    probe[(i, j)] = orig + delta;
                    let up = self.value(&probe)?;
                    probe[(i, j)] = orig - delta;
                    let down = self.value(&probe)?;
                    probe[(i, j)] = orig;
                    Ok((up - down) / (2.0 * h))
                };
                let re = part(Complex64::new(h, 0.0))?;
                let im = match domain {
                    AdDomain::Real => 0.0,
                    AdDomain::Complex => part(Complex64::new(0.0, h))?,
                };
                grad[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(grad)
    }
}

/// Permutation that routes the redundancy rows of `[I; T_d]` onto the
/// subcarriers of `I_r` and the data rows onto the remaining non-pilot
/// subcarriers, both in ascending subcarrier order.
pub fn permutation_init(cfg: &SystemConfig, maps: &CarrierMaps) -> Result<CMatrix> {
    if cfg.i_r.len() != cfg.n_r {
        return Err(Error::InvalidArgument(format!(
            "|I_r| = {} but N_r = {}",
            cfg.i_r.len(),
            cfg.n_r
        )));
    }
    let payload = maps.payload_abs();
    let mut redundant: Vec<usize> = cfg.i_r.clone();
    redundant.sort_unstable();
    let mut slots = Vec::with_capacity(payload.len());
    slots.extend((0..payload.len()).filter(|&i| !redundant.contains(&payload[i])));
    for abs in &redundant {
        let pos = payload
            .iter()
            .position(|p| p == abs)
            .ok_or_else(|| Error::InvalidArgument(format!("redundant index {abs} is not a payload subcarrier")))?;
        slots.push(pos);
    }
    if slots.len() != payload.len() {
        return Err(Error::InvalidArgument(
            "I_r does not fit the payload subcarriers".into(),
        ));
    }
    let k = payload.len();
    let mut a = CMatrix::zeros(k, k);
    for (col, &row) in slots.iter().enumerate() {
        a[(row, col)] = ONE;
    }
    Ok(a)
}

/// `A^(0)` with i.i.d. `N(0, 1)` entries (complex entries use unit variance per part).
pub fn random_normal_init(cfg: &SystemConfig, seed: u64, domain: AdDomain) -> CMatrix {
    let k = cfg.n_payload();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(k, k, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        match domain {
            AdDomain::Real => Complex64::new(re, 0.0),
            AdDomain::Complex => Complex64::new(re, StandardNormal.sample(&mut rng)),
        }
    })
}

pub fn initial_a_d(kind: InitKind, cfg: &SystemConfig, maps: &CarrierMaps, opts: &DescentOptions) -> Result<CMatrix> {
    match kind {
        InitKind::Permutation => permutation_init(cfg, maps),
        InitKind::RandomNormal => Ok(random_normal_init(cfg, opts.seed, opts.domain)),
    }
}

/// Steepest descent with Armijo backtracking on `J_d(A_d)`.
pub fn optimize_ad(
    a0: &CMatrix,
    maps: &CarrierMaps,
    cfg: &SystemConfig,
    opts: &DescentOptions,
) -> Result<DescentResult> {
    opts.validate()?;
    let k = cfg.n_payload();
    if a0.shape() != (k, k) {
        return Err(Error::Dimension(format!("A_d must be {k}x{k}")));
    }
    let objective = DataCost::new(maps, cfg)?;
    let project = |g: CMatrix| match opts.domain {
        AdDomain::Real => g.map(|z| Complex64::new(z.re, 0.0)),
        AdDomain::Complex => g,
    };
    let gradient = |a: &CMatrix| -> Result<(f64, CMatrix)> {
        match opts.gradient {
            GradientMode::Analytic => objective.value_and_gradient(a),
            GradientMode::CentralDifference => Ok((objective.value(a)?, objective.numerical_gradient(a, opts.domain)?)),
        }
    };

    let mut a = match opts.domain {
        AdDomain::Real => a0.map(|z| Complex64::new(z.re, 0.0)),
        AdDomain::Complex => a0.clone(),
    };
    let (mut cost, g) = gradient(&a).map_err(|_| Error::ZeroWordInfeasible("initial A_d".into()))?;
    if !cost.is_finite() {
        return Err(Error::NonFiniteCost(0));
    }
    let mut grad = project(g);
    let mut costs = vec![cost];
    let mut step = opts.step_init;
    let mut stalled = 0;
    let mut converged = false;
    const ARMIJO: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-300;

    for iter in 1..=opts.max_iters {
        let slope = energy(&grad);
        if slope == 0.0 {
            converged = true;
            break;
        }
        let accepted = loop {
            let candidate = &a - &grad * Complex64::new(step, 0.0);
            match objective.value(&candidate) {
                Ok(c) if !c.is_finite() => return Err(Error::NonFiniteCost(iter)),
                Ok(c) if c <= cost - ARMIJO * step * slope => break Some((candidate, c)),
                // singular iterates and insufficient decrease both shrink the step
                _ => {
                    step *= opts.backtrack_factor;
                    if step < MIN_STEP {
                        break None;
                    }
                }
            }
        };
        let Some((next, next_cost)) = accepted else {
            converged = true;
            break;
        };
        let rel = (cost - next_cost) / cost.abs().max(f64::MIN_POSITIVE);
        a = next;
        let (c, g) = gradient(&a)?;
        cost = c;
        grad = project(g);
        costs.push(cost);
        step /= opts.backtrack_factor;

        stalled = if rel < opts.tol_rel { stalled + 1 } else { 0 };
        if stalled >= opts.stall_window {
            converged = true;
            break;
        }
    }
    Ok(DescentResult {
        a_d: a,
        costs,
        converged,
    })
}

/// Per-column share `max |g_ij| / ||g_j||` of the dominant entry.
pub fn dominant_share(g_d: &CMatrix) -> Vec<f64> {
    g_d.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).fold(0.0, f64::max) / c.norm())
        .collect()
}

/// Per-column ratio of the largest entry magnitude to the mean entry
/// magnitude over the non-pilot used subcarriers.
pub fn peak_to_mean(g_d: &CMatrix, maps: &CarrierMaps) -> Vec<f64> {
    g_d.column_iter()
        .map(|c| {
            let mags: Vec<f64> = maps.payload_rel.iter().map(|&r| c[r].norm()).collect();
            let mean = mags.iter().sum::<f64>() / mags.len() as f64;
            mags.iter().cloned().fold(0.0, f64::max) / mean
        })
        .collect()
}

/// PSK alphabet `exp(j 2 pi kappa / |A|)`.
pub fn psk_alphabet(cardinality: usize) -> Vec<Complex64> {
    (0..cardinality)
        .map(|k| cis(2.0 * PI * k as f64 / cardinality as f64))
        .collect()
}

pub fn pilots_from_exponents(exponents: &[usize], cardinality: usize) -> CVector {
    CVector::from_iterator(
        exponents.len(),
        exponents.iter().map(|&k| cis(2.0 * PI * k as f64 / cardinality as f64)),
    )
}

/// Exhaustive minimum-energy pilot search over `{0..|A|-1}^{N_p}`.
///
/// Among minimizers within [`PILOT_TIE_TOL`] the lexicographically smallest
/// exponent tuple wins. The search is split on the first exponent and reduced
/// in order, so the result does not depend on thread scheduling.
pub fn optimize_pilots(g_p: &CMatrix, cardinality: usize) -> Result<PilotSearchResult> {
    if cardinality < 2 {
        return Err(Error::InvalidArgument("pilot alphabet needs at least 2 symbols".into()));
    }
    let np = g_p.ncols();
    if np == 0 {
        return Err(Error::InvalidArgument("no pilots to optimize".into()));
    }
    let space = (cardinality as u128).checked_pow(np as u32).unwrap_or(u128::MAX);
    if space > PILOT_SEARCH_GUARD {
        return Err(Error::SearchSpaceTooLarge(space));
    }

    let q = g_p.adjoint() * g_p;
    let alphabet = psk_alphabet(cardinality);
    let energy_of = |k: &[usize]| -> f64 {
        let mut acc = ZERO;
        for i in 0..np {
            let mut row = ZERO;
            for j in 0..np {
                row += q[(i, j)] * alphabet[k[j]];
            }
            acc += alphabet[k[i]].conj() * row;
        }
        acc.re
    };

    let best_in_branch = |first: usize| -> (f64, Vec<usize>) {
        let mut k = vec![0usize; np];
        k[0] = first;
        let mut best = (f64::INFINITY, k.clone());
        loop {
            let e = energy_of(&k);
            if e < best.0 - PILOT_TIE_TOL {
                best = (e, k.clone());
            }
            // odometer over positions 1..np, last position fastest
            let mut pos = np;
            loop {
                if pos == 1 {
                    return best;
                }
                pos -= 1;
                k[pos] += 1;
                if k[pos] < cardinality {
                    break;
                }
                k[pos] = 0;
            }
        }
    };

    let branches: Vec<(f64, Vec<usize>)> = if np == 1 {
        (0..cardinality).map(|c| (energy_of(&[c]), vec![c])).collect()
    } else {
        (0..cardinality).into_par_iter().map(best_in_branch).collect()
    };
    let mut best = (f64::INFINITY, Vec::new());
    for b in branches {
        if b.0 < best.0 - PILOT_TIE_TOL {
            best = b;
        }
    }

    let p = pilots_from_exponents(&best.1, cardinality);
    Ok(PilotSearchResult {
        energy: pilot_energy(g_p, &p),
        p,
        exponents: best.1,
        cardinality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmat::build_g_p;
    use crate::sysmodel::build_carrier_maps;
    use rand::seq::SliceRandom;

    fn reference() -> (SystemConfig, CarrierMaps) {
        let cfg = SystemConfig::reference_uw();
        let maps = build_carrier_maps(&cfg).unwrap();
        (cfg, maps)
    }

    #[test]
    fn closed_form_for_scaled_identity_gram() {
        let (cfg, _) = reference();
        // G with orthogonal equal-norm columns: G^H G = alpha I
        let mut g = CMatrix::zeros(52, 32);
        for c in 0..32 {
            g[(c, c)] = Complex64::new(cfg.alpha().sqrt(), 0.0);
        }
        let r = cfg.design_noise_ratio();
        let expect = 32.0 * cfg.sigma_d2 * r / (cfg.alpha() + r);
        let got = lmmse_trace(&g, &cfg).unwrap();
        assert!((got - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn fast_cost_matches_reference_route() {
        let (cfg, maps) = reference();
        let dc = DataCost::new(&maps, &cfg).unwrap();
        for a in [
            permutation_init(&cfg, &maps).unwrap(),
            random_normal_init(&cfg, 4, AdDomain::Real),
            random_normal_init(&cfg, 5, AdDomain::Complex),
        ] {
            let slow = cost_jd(&a, &maps, &cfg).unwrap();
            let fast = dc.value(&a).unwrap();
            assert!((slow - fast).abs() <= 1e-10 * slow, "{slow} vs {fast}");
            assert!(slow > 0.0);
        }
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let (cfg, maps) = reference();
        let dc = DataCost::new(&maps, &cfg).unwrap();
        for domain in [AdDomain::Real, AdDomain::Complex] {
            let a = random_normal_init(&cfg, 8, domain);
            let (_, g) = dc.value_and_gradient(&a).unwrap();
            // spot-check a handful of entries; the full sweep is slow
            let mut probe = a.clone();
            for &(i, j) in &[(0usize, 0usize), (3, 40), (17, 5), (47, 47), (30, 33)] {
                let h = 1e-6;
                let orig = a[(i, j)];
                probe[(i, j)] = orig + h;
                let up = dc.value(&probe).unwrap();
                probe[(i, j)] = orig - h;
                let down = dc.value(&probe).unwrap();
                probe[(i, j)] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!(
                    (fd - g[(i, j)].re).abs() <= 1e-6 * fd.abs().max(1e-3),
                    "re ({i},{j}) {fd} {}",
                    g[(i, j)].re
                );
                if domain == AdDomain::Complex {
                    let hj = Complex64::new(0.0, h);
                    probe[(i, j)] = orig + hj;
                    let up = dc.value(&probe).unwrap();
                    probe[(i, j)] = orig - hj;
                    let down = dc.value(&probe).unwrap();
                    probe[(i, j)] = orig;
                    let fd = (up - down) / (2.0 * h);
                    assert!((fd - g[(i, j)].im).abs() <= 1e-6 * fd.abs().max(1e-3));
                }
            }
        }
    }

    #[test]
    fn permutation_init_is_permutation() {
        let (cfg, maps) = reference();
        let p = permutation_init(&cfg, &maps).unwrap();
        for i in 0..48 {
            let row: f64 = p.row(i).iter().map(|z| z.re).sum();
            let col: f64 = p.column(i).iter().map(|z| z.re).sum();
            assert_eq!((row, col), (1.0, 1.0));
        }
        let bad = SystemConfig {
            i_r: vec![2, 5],
            ..cfg.clone()
        };
        assert!(permutation_init(&bad, &maps).is_err());
    }

    #[test]
    fn permutation_redundancy_lands_on_ir() {
        let (cfg, maps) = reference();
        let a = permutation_init(&cfg, &maps).unwrap();
        let g = build_g_d(&a, &maps, &cfg).unwrap();
        // the redundancy a data symbol induces is largest on I_r
        let t = crate::genmat::compute_t(&a, &maps, &cfg).unwrap();
        assert_eq!(t.shape(), (16, 32));
        let ir_rows: Vec<usize> = cfg.i_r.iter().map(|&i| maps.rel_of(i).unwrap()).collect();
        let data_rows: Vec<usize> = maps
            .payload_rel
            .iter()
            .copied()
            .filter(|r| !ir_rows.contains(r))
            .collect();
        let ir_energy: f64 = ir_rows.iter().map(|&r| g.row(r).norm_squared()).sum();
        let data_energy: f64 = data_rows.iter().map(|&r| g.row(r).norm_squared()).sum();
        assert!(ir_energy > 0.0);
        // data rows keep the identity block
        assert!((data_energy - 32.0).abs() < 1e-9);
    }

    #[test]
    fn descent_is_monotone_and_improves() {
        let (cfg, maps) = reference();
        let opts = DescentOptions {
            max_iters: 60,
            ..Default::default()
        };
        let a0 = permutation_init(&cfg, &maps).unwrap();
        let res = optimize_ad(&a0, &maps, &cfg, &opts).unwrap();
        assert!(res.costs.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.costs.last().unwrap() < &res.costs[0]);
        let g = build_g_d(&res.a_d, &maps, &cfg).unwrap();
        let d = CVector::from_element(32, ONE);
        assert!(crate::genmat::tail_residual(&(&g * d), &maps, &cfg).unwrap() < 1e-10);
    }

    #[test]
    fn descent_with_numerical_gradient_runs() {
        let (cfg, maps) = reference();
        let opts = DescentOptions {
            max_iters: 2,
            gradient: GradientMode::CentralDifference,
            ..Default::default()
        };
        let a0 = permutation_init(&cfg, &maps).unwrap();
        let res = optimize_ad(&a0, &maps, &cfg, &opts).unwrap();
        assert_eq!(res.costs.len(), 3);
        assert!(res.costs[2] <= res.costs[1] && res.costs[1] < res.costs[0]);
    }

    #[test]
    fn descent_options_validated() {
        let (cfg, maps) = reference();
        let a0 = permutation_init(&cfg, &maps).unwrap();
        let bad = DescentOptions {
            backtrack_factor: 1.5,
            ..Default::default()
        };
        assert!(optimize_ad(&a0, &maps, &cfg, &bad).is_err());
        let bad = DescentOptions {
            max_iters: 0,
            ..Default::default()
        };
        assert!(optimize_ad(&a0, &maps, &cfg, &bad).is_err());
    }

    #[test]
    fn pilot_search_small_alphabets() {
        let (cfg, maps) = reference();
        let g_p = build_g_p(&maps, &cfg).unwrap();
        let r2 = optimize_pilots(&g_p, 2).unwrap();
        assert!((r2.energy - 5.4633).abs() < 5e-4, "{}", r2.energy);
        assert_eq!(r2.cardinality, 2);
        assert!(r2.p.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!((r2.energy - pilot_energy(&g_p, &r2.p)).abs() < 1e-12);
        assert!(optimize_pilots(&g_p, 1).is_err());
        assert!(matches!(optimize_pilots(&g_p, 60), Err(Error::SearchSpaceTooLarge(_))));
    }

    #[test]
    fn pilot_search_matches_shuffled_enumeration() {
        let (cfg, maps) = reference();
        let g_p = build_g_p(&maps, &cfg).unwrap();
        let card = 6;
        let found = optimize_pilots(&g_p, card).unwrap();

        let mut all: Vec<Vec<usize>> = Vec::new();
        for a in 0..card {
            for b in 0..card {
                for c in 0..card {
                    for d in 0..card {
                        all.push(vec![a, b, c, d]);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        all.shuffle(&mut rng);
        let min = all
            .iter()
            .map(|k| pilot_energy(&g_p, &pilots_from_exponents(k, card)))
            .fold(f64::INFINITY, f64::min);
        assert!((found.energy - min).abs() < 1e-12);
    }

    #[test]
    fn pilot_search_tie_break_is_lexicographic() {
        // identity G_p: every constant-modulus vector has the same energy
        let g_p = CMatrix::identity(3, 3);
        let r = optimize_pilots(&g_p, 4).unwrap();
        assert_eq!(r.exponents, vec![0, 0, 0]);
        assert!((r.energy - 3.0).abs() < 1e-12);
    }
}
