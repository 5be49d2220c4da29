//! Analytic parameter calculus for the subexponential pipeline.
//!
//! Everything here is plain floating-point arithmetic on desk-scale
//! inputs: the subexponential size function [`l_exponent`], the balanced
//! sieve parameters of [`derive_parameters`] (smoothness bound `B`,
//! coefficient height `a`, sieve degree `k`), the recursive norm schedule
//! of [`descent_schedule`] governing how fast ideal norms shrink during
//! the descent, and a semi-rigorous smoothness probability estimate.
//!
//! Asymptotic `o(1)` terms are dropped throughout, and configurable desk
//! floors (`B >= 20`, `a >= 1`, `k >= 1`) keep the formulas usable on the
//! tiny discriminants this crate is exercised with.

use num_traits::Signed;
use serde::Serialize;

use crate::field::{bigint_log2, NumberField};
use crate::{Error, Result};

/// Floors and knobs for [`derive_parameters`].
#[derive(Clone, Debug, Serialize)]
pub struct ParamConfig {
    /// Lower bound for the smoothness bound `B`.
    pub b_floor: u64,
    /// Lower bound for the coefficient-height exponent `a`.
    pub a_floor: u32,
    /// Lower bound for the sieve degree `k`.
    pub k_floor: u32,
    /// The constant `K` in the `N + K r` relation-count target.
    pub k_extra: u32,
    /// Forced value of `rho` (must stay at or above `(kappa/3)^(1/3)`);
    /// `None` picks the optimum.
    pub rho: Option<f64>,
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig {
            b_floor: 20,
            a_floor: 1,
            k_floor: 1,
            k_extra: 3,
            rho: None,
        }
    }
}

/// The balanced sieve parameters for one field.
#[derive(Clone, Debug, Serialize)]
pub struct ParameterSet {
    /// `log2 |disc|`.
    pub log2_disc: f64,
    /// `M = log2 log2 |disc|`.
    pub m: f64,
    /// `kappa = n d / log2 |disc|` with `d` the coefficient height of `T`
    /// in bits.
    pub kappa: f64,
    /// Family exponent `alpha = ln n / ln log2 |disc|` (diagnostic; the
    /// asymptotic family assumes `alpha` in `[1/3, 2/3)`).
    pub alpha: f64,
    /// Cost exponent of the smoothness bound; optimal value
    /// `(kappa/3)^(1/3)`.
    pub rho: f64,
    /// Coefficient-height constant (equal root of the balance quadratic).
    pub delta: f64,
    /// Sieve-degree constant (other root; equals `delta` at the optimum).
    pub nu: f64,
    /// Smoothness bound for the factor base.
    pub b: u64,
    /// Sieve coefficients range over `[-2^a, 2^a]`.
    pub a: u32,
    /// Sieve polynomials have degree at most `k`.
    pub k: u32,
    /// Relation surplus constant.
    pub k_extra: u32,
    /// Total cost exponent `3 rho = (9 kappa)^(1/3)`.
    pub c_total: f64,
}

impl ParameterSet {
    /// How many relations to collect: factor-base size plus `K r` surplus
    /// plus a flat desk-scale margin.
    pub fn relation_target(&self, fb_size: usize, unit_rank: usize) -> usize {
        fb_size + self.k_extra as usize * unit_rank + 10
    }
}

/// The per-level norm-shrinkage schedule for the descent.
#[derive(Clone, Debug, Serialize)]
pub struct DescentSchedule {
    /// Per-step effort exponent `e = (24 kappa / 9)^(1/3)`.
    pub e: f64,
    /// `chi = 2 sqrt(kappa) / (3 e)`.
    pub chi: f64,
    /// Limiting per-step lattice constant `sqrt((c_inf + e)/kappa)`.
    pub sigma: f64,
    /// Per-step lattice constants `sigma_i = sqrt((c_(i-1) + e)/kappa)`.
    pub sigmas: Vec<f64>,
    /// Level exponents `tau_i = 1/(3 2^(i-1))`, with `tau_0 = 2/3`.
    pub taus: Vec<f64>,
    /// Level cost constants `c_0 = 1`, `c_i = chi sqrt(c_(i-1) + e)`.
    pub cs: Vec<f64>,
    /// Fixed point `(chi/2)(chi + sqrt(chi^2 + 4e)) = (kappa/3)^(1/3)`.
    pub c_inf: f64,
    /// Root of `(3/E)^(1/3) = (2/E)(1 + sqrt(1+E))`; evaluates to 24.
    pub e0: f64,
}

/// Exponent form of the subexponential function: returns
/// `beta (log2|disc|)^alpha (log2 log2|disc|)^(1-alpha)`, i.e. the base-2
/// logarithm of `L(alpha, beta)`.
pub fn l_exponent(log2_disc: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::DomainError(format!(
            "alpha = {alpha} outside [0, 1]"
        )));
    }
    if log2_disc <= 2.0 {
        return Err(Error::DomainError(format!(
            "log2 |disc| = {log2_disc} too small"
        )));
    }
    if beta <= 0.0 {
        return Err(Error::DomainError(format!("beta = {beta} must be > 0")));
    }
    let m = log2_disc.log2();
    Ok(beta * log2_disc.powf(alpha) * m.powf(1.0 - alpha))
}

/// Solves the balance system for a given `kappa`, optionally with a forced
/// `rho`: returns `(rho, delta, nu)` where `delta, nu` are the roots of
/// `X^2 - (6 rho^2 / kappa) X + 3 rho / kappa`.
pub fn optimize(kappa: f64, forced_rho: Option<f64>) -> Result<(f64, f64, f64)> {
    let rho_min = (kappa / 3.0).cbrt();
    let rho = forced_rho.unwrap_or(rho_min);
    let s = 6.0 * rho * rho / kappa; // delta + nu
    let p = 3.0 * rho / kappa; // delta nu
    let disc = s * s - 4.0 * p;
    if disc < -1e-12 {
        return Err(Error::DomainError(format!(
            "rho = {rho} below the feasibility threshold {rho_min}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let delta = (s + root) / 2.0;
    let nu = (s - root) / 2.0;
    Ok((rho, delta, nu))
}

/// Derives the full parameter set for a field from its measured size
/// constants: `kappa = n d / log2 |disc|`, optimal `rho = (kappa/3)^(1/3)`,
/// `B = max(ceil(2^l_exponent(1/3, rho)), floor)`, and the sieve box
/// `a = ceil(delta d / (log2|disc|/M)^(1/3))`,
/// `k = ceil(nu n / (log2|disc|/M)^(1/3))` clamped to `[1, n-1]`.
pub fn derive_parameters(f: &NumberField, config: &ParamConfig) -> Result<ParameterSet> {
    let n = f.degree as f64;
    let log2_disc = bigint_log2(&f.disc.abs());
    if log2_disc <= 2.0 {
        return Err(Error::DomainError(format!(
            "log2 |disc| = {log2_disc} too small for the parameter calculus"
        )));
    }
    let m = log2_disc.log2();
    // d = max_i log2 |t_i| over the coefficients of T
    let d = f
        .poly
        .coeffs
        .iter()
        .map(|c| {
            use num_traits::Zero;
            if c.is_zero() { 0.0 } else { bigint_log2(&c.abs()) }
        })
        .fold(0.0f64, f64::max);
    if d == 0.0 {
        return Err(Error::DegenerateField);
    }
    let kappa = n * d / log2_disc;
    let (rho, delta, nu) = optimize(kappa, config.rho)?;
    let alpha = n.ln() / log2_disc.ln();
    let b_exp = l_exponent(log2_disc, 1.0 / 3.0, rho)?;
    let b_raw = if b_exp < 62.0 {
        b_exp.exp2().ceil() as u64
    } else {
        u64::MAX
    };
    let b = b_raw.max(config.b_floor);
    let denom = (log2_disc / m).cbrt();
    let a = ((delta * d / denom).ceil() as u32).max(config.a_floor);
    let k_raw = ((nu * n / denom).ceil() as u32).max(config.k_floor);
    // representatives have degree below n, so cap the sieve degree
    let k = k_raw.min(f.degree as u32 - 1).max(1);
    Ok(ParameterSet {
        log2_disc,
        m,
        kappa,
        alpha,
        rho,
        delta,
        nu,
        b,
        a,
        k,
        k_extra: config.k_extra,
        c_total: 3.0 * rho,
    })
}

/// Builds the descent schedule for `depth` levels: effort exponent
/// `e = (24 kappa / 9)^(1/3)`, the level sequences `tau_i`, `c_i`,
/// `sigma_i`, their fixed point `c_inf`, and the balance root `E0`.
pub fn descent_schedule(kappa: f64, depth: usize) -> DescentSchedule {
    assert!(kappa > 0.0 && depth >= 1);
    let e = (24.0 * kappa / 9.0).cbrt();
    let chi = 2.0 * kappa.sqrt() / (3.0 * e);
    let c_inf = chi / 2.0 * (chi + (chi * chi + 4.0 * e).sqrt());
    let mut taus = vec![2.0 / 3.0];
    let mut cs = vec![1.0];
    let mut sigmas = vec![f64::NAN]; // sigma_0 unused: level 0 is the input
    for i in 1..=depth {
        taus.push(1.0 / (3.0 * 2f64.powi(i as i32 - 1)));
        let prev = cs[i - 1];
        cs.push(chi * (prev + e).sqrt());
        sigmas.push(((prev + e) / kappa).sqrt());
    }
    DescentSchedule {
        e,
        chi,
        sigma: ((c_inf + e) / kappa).sqrt(),
        sigmas,
        taus,
        cs,
        c_inf,
        e0: solve_e0(),
    }
}

/// Bisection for the least positive root of
/// `(3/E)^(1/3) - (2/E)(1 + sqrt(1+E))`; the exact answer is 24.
pub fn solve_e0() -> f64 {
    let g = |e: f64| (3.0 / e).cbrt() - (2.0 / e) * (1.0 + (1.0 + e).sqrt());
    let (mut lo, mut hi) = (1.0f64, 100.0f64);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// Probability that a number of `iota` bits is `2^mu`-smooth. Returns 1
/// for `u = iota/mu <= 1`; the Dickman function (integrated numerically)
/// for `u <= 2`; and the coarse estimate
/// `2^(-u (log2 u + log2 log2 u - 1))`, clamped to `(0, 1]`, beyond that.
pub fn smoothness_estimate(iota: f64, mu: f64) -> f64 {
    if mu <= 0.0 || iota <= mu {
        return 1.0;
    }
    let u = iota / mu;
    if u <= 2.0 {
        return dickman(u);
    }
    let exponent = -u * (u.log2() + u.log2().log2() - 1.0);
    exponent.exp2().clamp(f64::MIN_POSITIVE, 1.0)
}

/// Dickman's function on `[0, 3]` by fourth-order integration of the
/// delay equation `u rho'(u) = -rho(u - 1)` on a fixed grid.
pub fn dickman(u: f64) -> f64 {
    if u <= 1.0 {
        return 1.0;
    }
    assert!(u <= 3.0, "grid covers [0, 3] only");
    const STEP: f64 = 1.0 / 4096.0;
    let samples = dickman_grid(STEP);
    let idx = (u / STEP) as usize;
    if idx + 1 >= samples.len() {
        return samples[samples.len() - 1];
    }
    let frac = u / STEP - idx as f64;
    samples[idx] * (1.0 - frac) + samples[idx + 1] * frac
}

fn dickman_grid(step: f64) -> Vec<f64> {
    let n = (3.0 / step) as usize + 2;
    let mut rho = vec![1.0f64; n];
    let lookup = |rho: &[f64], x: f64| -> f64 {
        if x <= 1.0 {
            return 1.0;
        }
        let i = (x / step) as usize;
        let frac = x / step - i as f64;
        rho[i] * (1.0 - frac) + rho[i.min(n - 2) + 1] * frac
    };
    for i in 0..n - 1 {
        let x = i as f64 * step;
        if x + step <= 1.0 {
            continue; // rho = 1 on [0, 1]
        }
        let f = |rho_ref: &[f64], t: f64| -> f64 {
            if t < 1.0 {
                0.0
            } else {
                -lookup(rho_ref, t - 1.0) / t
            }
        };
        let k1 = f(&rho, x);
        let k2 = f(&rho, x + step / 2.0);
        let k3 = k2;
        let k4 = f(&rho, x + step);
        rho[i + 1] = rho[i] + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rho
}
