//! One-point tail asymptotics of the powered norm process `Z^c(t0)` at a
//! point of unit variance, with exact chi-square and crude Monte Carlo
//! oracles.
//!
//! The asymptotic has the common shape `K u^rho Psi(u^{1/c} / d)`; the
//! coefficient triple `(K, rho, d)` depends only on which side of 2 the norm
//! order falls.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::geometry::{critical_scale, NormOrder, WeightVector};
use crate::rng::{chunks, StreamFactory};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Power exponent `c > 0` applied to the norm process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerExponent(f64);

impl PowerExponent {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid("c", format!("must be positive, got {c}")));
        }
        Ok(Self(c))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Standard normal survival function, evaluated through `erfc` at double
/// precision.
pub fn normal_survival(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// The Mills-ratio form `phi(z)/z`, the large-z equivalent of
/// [`normal_survival`]. Used wherever a formula is wanted exactly as the
/// limit display writes it.
pub fn normal_survival_asymptotic(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (SQRT_2PI * z)
}

/// Exact chi-square survival `P{chi^2_m > u}` via the regularized upper
/// incomplete gamma function.
pub fn chi_square_survival(m_dof: u32, u: f64) -> f64 {
    assert!(m_dof >= 1);
    if u <= 0.0 {
        return 1.0;
    }
    gamma_ur(0.5 * m_dof as f64, 0.5 * u)
}

/// Evaluable one-point tail `K u^rho Psi(u^{1/c}/d)`.
#[derive(Debug, Clone, Serialize)]
pub struct PointwiseTail {
    pub coefficient: f64,
    pub u_power: f64,
    pub scale: f64,
    pub c: f64,
}

impl PointwiseTail {
    /// Tail value with the survival function evaluated exactly.
    pub fn evaluate(&self, u: f64) -> f64 {
        self.coefficient
            * u.powf(self.u_power)
            * normal_survival(u.powf(1.0 / self.c) / self.scale)
    }

    /// Tail value in the limit form, with `Psi` replaced by `phi(z)/z`.
    pub fn evaluate_limit(&self, u: f64) -> f64 {
        self.coefficient
            * u.powf(self.u_power)
            * normal_survival_asymptotic(u.powf(1.0 / self.c) / self.scale)
    }

    /// Threshold beyond which the evaluated tail is strictly decreasing:
    /// `rho d^2 c / u^{2/c} < 1` for `u > u0`.
    pub fn monotone_threshold(&self) -> f64 {
        if self.u_power <= 0.0 {
            0.0
        } else {
            (self.u_power * self.scale * self.scale * self.c).powf(0.5 * self.c)
        }
    }
}

/// One-point tail asymptotics of `P{Z^c(t0) > u}` assuming unit variance at
/// `t0`. Callers with `sigma(t0) != 1` rescale `u`, not this function.
pub fn pointwise_tail_asymptotic(
    p: &NormOrder,
    c: PowerExponent,
    weights: &WeightVector,
) -> PointwiseTail {
    let n = weights.n();
    let m = weights.m();
    let geo = critical_scale(p, weights);
    if p.p() > 2.0 {
        PointwiseTail {
            coefficient: 2.0 * m as f64,
            u_power: 0.0,
            scale: 1.0,
            c: c.value(),
        }
    } else if p.p() == 2.0 {
        // Convention: the product over i > m is empty (= 1) when m = n.
        let prod: f64 = weights.values()[m..]
            .iter()
            .map(|di| (1.0 - di * di).powf(-0.5))
            .product();
        PointwiseTail {
            coefficient: SQRT_2PI * 2f64.powf(0.5 * (2.0 - m as f64)) * prod
                / gamma(0.5 * m as f64),
            u_power: (m as f64 - 1.0) / c.value(),
            scale: 1.0,
            c: c.value(),
        }
    } else {
        PointwiseTail {
            coefficient: 2f64.powi(n as i32) * (2.0 - p.p()).powf(0.5 * (1.0 - n as f64)),
            u_power: 0.0,
            scale: geo.critical_scale,
            c: c.value(),
        }
    }
}

/// A crude Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McProbability {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub hits: u64,
    /// Set when fewer than 10 hits were observed; the estimate is then
    /// unreliable.
    pub low_hits: bool,
}

impl McProbability {
    fn from_hits(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            hits,
            low_hits: hits < 10,
        }
    }
}

/// Empirical frequency of `||N(0, I_n) * d||_p^c > u`, chunk-parallel and
/// deterministic for a fixed seed.
pub fn pointwise_tail_mc(
    p: &NormOrder,
    c: PowerExponent,
    weights: &WeightVector,
    u: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McProbability> {
    if n_samples < 10_000 {
        return Err(Error::invalid("n_samples", "need at least 10^4 samples"));
    }
    // ||y||_p > u^{1/c}; for finite p compare p-th powers to skip a root.
    let u_root = if u <= 0.0 { 0.0 } else { u.powf(1.0 / c.value()) };
    let threshold_pow = if p.is_infinite() {
        u_root
    } else {
        u_root.powf(p.p())
    };
    let factory = StreamFactory::new(seed);
    let d = weights.values().to_vec();
    let pv = p.p();
    let hits: u64 = chunks(n_samples as usize)
        .into_par_iter()
        .map(|(idx, _, len)| {
            let mut rng = factory.stream(idx);
            let mut local = 0u64;
            for _ in 0..len {
                let stat = if pv.is_infinite() {
                    d.iter().fold(0.0f64, |acc, di| {
                        let x: f64 = rng.sample(StandardNormal);
                        acc.max((di * x).abs())
                    })
                } else if pv == 1.0 {
                    d.iter()
                        .map(|di| {
                            let x: f64 = rng.sample(StandardNormal);
                            (di * x).abs()
                        })
                        .sum()
                } else if pv == 2.0 {
                    d.iter()
                        .map(|di| {
                            let x: f64 = rng.sample(StandardNormal);
                            let y = di * x;
                            y * y
                        })
                        .sum()
                } else {
                    d.iter()
                        .map(|di| {
                            let x: f64 = rng.sample(StandardNormal);
                            (di * x).abs().powf(pv)
                        })
                        .sum()
                };
                // p = 2 accumulates squares, so compare against u^{2/c}.
                let thr = if pv == 2.0 {
                    u_root * u_root
                } else {
                    threshold_pow
                };
                if stat > thr {
                    local += 1;
                }
            }
            local
        })
        .sum();
    Ok(McProbability::from_hits(hits, n_samples))
}
