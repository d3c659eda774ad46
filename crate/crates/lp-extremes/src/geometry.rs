//! Weight vectors, L^p/L^q duality, and the critical-scale optimization.
//!
//! For weights `d_1 = ... = d_m = 1 > d_{m+1} >= ... >= d_n > 0` the weighted
//! quadratic `sum_i d_i^2 v_i^2` attains a maximum `d^2` over the dual unit
//! sphere `S_q = { v : ||v||_q = 1 }`.  The value `d` (the critical scale) and
//! the structure of the maximizer set depend only on which side of 2 the norm
//! order `p` falls:
//!
//! - `p in (2, inf]`: `d = 1`, attained at the `2m` signed axis points,
//! - `p = 2`: `d = 1`, attained on the whole subsphere `{ v_i = 0, i > m }`,
//! - `p in [1, 2)`: `d = [sum_i d_i^{2p/(2-p)}]^{(2-p)/(2p)}`, attained at the
//!   `2^n` sign patterns of `z_i = (d_i/d)^{2/(q-2)}` (`z_i = 1` when `p = 1`).

use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum n for which the full `2^n` maximizer list is materialized.
const MAX_ENUMERATED_SIGN_POINTS: usize = 12;

/// Verification tolerance for maximizer representatives.
pub const MAXIMIZER_TOL: f64 = 1e-12;

/// The weights `(d_1, ..., d_n)` with the leading block of exact ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    values: Vec<f64>,
    m: usize,
}

impl WeightVector {
    /// Validates and wraps a weight vector. Weights must be sorted
    /// non-increasing with `values[0] = 1` and all entries positive; unsorted
    /// input is an error, never silently reordered.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("need at least one weight".into()));
        }
        if values[0] != 1.0 {
            return Err(Error::InvalidWeights(format!(
                "leading weight must be exactly 1, got {}",
                values[0]
            )));
        }
        for pair in values.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::InvalidWeights(format!(
                    "weights must be non-increasing, got {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        if let Some(&bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWeights(format!(
                "weights must be positive and finite, got {bad}"
            )));
        }
        let m = values.iter().take_while(|v| **v == 1.0).count();
        Ok(Self { values, m })
    }

    /// `n` unit weights.
    pub fn ones(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
            m: n,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Multiplicity of the leading unit weight.
    pub fn m(&self) -> usize {
        self.m
    }
}

/// A norm order `p in [1, inf]` together with its dual exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormOrder {
    p: f64,
    q: f64,
}

impl NormOrder {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidNormOrder(p));
        }
        Ok(Self {
            p,
            q: dual_exponent_unchecked(p),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_infinite(&self) -> bool {
        self.p.is_infinite()
    }
}

fn dual_exponent_unchecked(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// The dual exponent `q` with `1/p + 1/q = 1`, `q = inf` for `p = 1` and
/// `q = 1` for `p = inf`.
pub fn dual_exponent(p: f64) -> Result<f64> {
    Ok(NormOrder::new(p)?.q())
}

/// Structure of the argmax set of the weighted quadratic on `S_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaximizerKind {
    /// `p in [1, 2)`: the `2^n` sign patterns of a single magnitude vector.
    DiscreteSignPoints,
    /// `p = 2`: the subsphere spanned by the leading `m` coordinates.
    Sphere,
    /// `p in (2, inf]`: the `2m` signed axis points.
    AxisPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointCount {
    Finite(u64),
    Continuum,
}

/// Critical scale and maximizer description for a `(p, weights)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct DualGeometry {
    pub critical_scale: f64,
    pub maximizer_kind: MaximizerKind,
    pub point_count: PointCount,
    /// Maximizers on `S_q` (exhaustive for the discrete kinds up to `2^12`
    /// points, the `m` canonical axis points for the sphere case).
    pub representatives: Vec<Vec<f64>>,
}

impl DualGeometry {
    pub fn d(&self) -> f64 {
        self.critical_scale
    }

    pub fn d_squared(&self) -> f64 {
        self.critical_scale * self.critical_scale
    }
}

/// Value of the objective `sum_i d_i^2 v_i^2`.
pub fn weighted_quadratic(v: &[f64], weights: &WeightVector) -> f64 {
    v.iter()
        .zip(weights.values())
        .map(|(vi, di)| di * di * vi * vi)
        .sum()
}

/// Solves the critical-scale problem for `(p, weights)`.
pub fn critical_scale(p: &NormOrder, weights: &WeightVector) -> DualGeometry {
    let n = weights.n();
    let m = weights.m();
    if p.p() > 2.0 {
        // 2m signed axis points, d = 1.
        let mut reps = Vec::with_capacity(2 * m);
        for i in 0..m {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[i] = sign;
                reps.push(v);
            }
        }
        DualGeometry {
            critical_scale: 1.0,
            maximizer_kind: MaximizerKind::AxisPoints,
            point_count: PointCount::Finite(2 * m as u64),
            representatives: reps,
        }
    } else if p.p() == 2.0 {
        let reps = (0..m)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        DualGeometry {
            critical_scale: 1.0,
            maximizer_kind: MaximizerKind::Sphere,
            point_count: PointCount::Continuum,
            representatives: reps,
        }
    } else {
        // p in [1, 2): d = [sum d_i^{2p/(2-p)}]^{(2-p)/(2p)} and magnitudes
        // z_i = (d_i/d)^{2/(q-2)}, which degenerates to z_i = 1 at p = 1.
        let pv = p.p();
        let d = if pv == 1.0 {
            weights
                .values()
                .iter()
                .map(|di| di * di)
                .sum::<f64>()
                .sqrt()
        } else {
            let e = 2.0 * pv / (2.0 - pv);
            weights
                .values()
                .iter()
                .map(|di| di.powf(e))
                .sum::<f64>()
                .powf((2.0 - pv) / (2.0 * pv))
        };
        let magnitudes: Vec<f64> = if pv == 1.0 {
            vec![1.0; n]
        } else {
            let expo = 2.0 / (p.q() - 2.0);
            weights.values().iter().map(|di| (di / d).powf(expo)).collect()
        };
        let reps = if n <= MAX_ENUMERATED_SIGN_POINTS {
            let mut reps = Vec::with_capacity(1 << n);
            for mask in 0u64..(1 << n) {
                let v: Vec<f64> = magnitudes
                    .iter()
                    .enumerate()
                    .map(|(i, z)| if mask >> i & 1 == 1 { -z } else { *z })
                    .collect();
                reps.push(v);
            }
            reps
        } else {
            vec![magnitudes]
        };
        DualGeometry {
            critical_scale: d,
            maximizer_kind: MaximizerKind::DiscreteSignPoints,
            point_count: PointCount::Finite(1u64 << n.min(63)),
            representatives: reps,
        }
    }
}

/// The q-norm of a plain vector, with the `p = 1 / p = inf` conventions.
pub fn q_norm(v: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// The weighted norm `||(d_1 x_1, ..., d_n x_n)||_p`.
pub fn weighted_lp_norm(x: &[f64], p: &NormOrder, weights: &WeightVector) -> f64 {
    assert_eq!(x.len(), weights.n(), "dimension mismatch");
    if p.is_infinite() {
        x.iter()
            .zip(weights.values())
            .fold(0.0, |acc, (xi, di)| acc.max((di * xi).abs()))
    } else if p.p() == 1.0 {
        x.iter()
            .zip(weights.values())
            .map(|(xi, di)| (di * xi).abs())
            .sum()
    } else {
        x.iter()
            .zip(weights.values())
            .map(|(xi, di)| (di * xi).abs().powf(p.p()))
            .sum::<f64>()
            .powf(1.0 / p.p())
    }
}

/// A vector `v` on `S_q` with `sum_i d_i v_i x_i = ||x * d||_p`.
pub fn dual_witness(x: &[f64], p: &NormOrder, weights: &WeightVector) -> Result<Vec<f64>> {
    assert_eq!(x.len(), weights.n(), "dimension mismatch");
    let y: Vec<f64> = x
        .iter()
        .zip(weights.values())
        .map(|(xi, di)| di * xi)
        .collect();
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    if p.p() == 1.0 {
        // q = inf: any sign vector matching y works.
        Ok(y.iter().map(|yi| yi.signum() * f64::from(*yi != 0.0)).collect())
    } else if p.is_infinite() {
        // q = 1: unit mass on the largest coordinate.
        let (imax, &ymax) = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty");
        let mut v = vec![0.0; y.len()];
        v[imax] = ymax.signum();
        Ok(v)
    } else {
        let norm = weighted_lp_norm(x, p, weights);
        let scale = norm.powf(p.p() - 1.0);
        Ok(y
            .iter()
            .map(|yi| yi.signum() * yi.abs().powf(p.p() - 1.0) / scale)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dual_exponents() {
        assert_eq!(dual_exponent(2.0).unwrap(), 2.0);
        assert_eq!(dual_exponent(1.0).unwrap(), f64::INFINITY);
        assert_relative_eq!(dual_exponent(3.0).unwrap(), 1.5);
        assert_eq!(dual_exponent(f64::INFINITY).unwrap(), 1.0);
        assert!(dual_exponent(0.5).is_err());
        assert!(dual_exponent(f64::NAN).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![0.9]).is_err());
        assert!(WeightVector::new(vec![1.0, 1.1]).is_err());
        assert!(WeightVector::new(vec![1.0, 0.5, 0.8]).is_err());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        let w = WeightVector::new(vec![1.0, 1.0, 0.5]).unwrap();
        assert_eq!(w.m(), 2);
        assert_eq!(w.n(), 3);
    }

    #[test]
    fn sphere_case() {
        let w = WeightVector::new(vec![1.0, 1.0, 0.5]).unwrap();
        let g = critical_scale(&NormOrder::new(2.0).unwrap(), &w);
        assert_eq!(g.critical_scale, 1.0);
        assert_eq!(g.maximizer_kind, MaximizerKind::Sphere);
        assert_eq!(g.point_count, PointCount::Continuum);
        assert_eq!(g.representatives.len(), 2);
    }

    #[test]
    fn axis_case() {
        let w = WeightVector::new(vec![1.0, 0.5]).unwrap();
        let g = critical_scale(&NormOrder::new(4.0).unwrap(), &w);
        assert_eq!(g.critical_scale, 1.0);
        assert_eq!(g.maximizer_kind, MaximizerKind::AxisPoints);
        assert_eq!(g.point_count, PointCount::Finite(2));
        assert_eq!(g.representatives, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn sign_point_case_p1() {
        let w = WeightVector::ones(2);
        let g = critical_scale(&NormOrder::new(1.0).unwrap(), &w);
        assert_relative_eq!(g.critical_scale, 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(g.point_count, PointCount::Finite(4));
        for rep in &g.representatives {
            assert_relative_eq!(q_norm(rep, f64::INFINITY), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn representatives_lie_on_sq_and_attain_d2() {
        let weights = [
            WeightVector::ones(3),
            WeightVector::new(vec![1.0, 0.8, 0.3]).unwrap(),
            WeightVector::new(vec![1.0, 1.0, 0.6]).unwrap(),
        ];
        for w in &weights {
            for p in [1.0, 1.3, 1.7, 2.0, 2.5, 4.0, f64::INFINITY] {
                let no = NormOrder::new(p).unwrap();
                let g = critical_scale(&no, w);
                for rep in &g.representatives {
                    assert!(
                        (q_norm(rep, no.q()) - 1.0).abs() < MAXIMIZER_TOL,
                        "p={p}: representative off S_q"
                    );
                    assert!(
                        (weighted_quadratic(rep, w) - g.d_squared()).abs() < MAXIMIZER_TOL,
                        "p={p}: representative does not attain d^2"
                    );
                }
            }
        }
    }

    #[test]
    fn lp_norms() {
        let w2 = WeightVector::ones(2);
        let p2 = NormOrder::new(2.0).unwrap();
        assert_relative_eq!(weighted_lp_norm(&[3.0, 4.0], &p2, &w2), 5.0);
        let w15 = WeightVector::new(vec![1.0, 0.5]).unwrap();
        let p1 = NormOrder::new(1.0).unwrap();
        assert_relative_eq!(weighted_lp_norm(&[1.0, -1.0], &p1, &w15), 1.5);
        let pinf = NormOrder::new(f64::INFINITY).unwrap();
        assert_relative_eq!(weighted_lp_norm(&[2.0, -7.0], &pinf, &w2), 7.0);
    }

    #[test]
    fn witnesses() {
        let w = WeightVector::ones(2);
        let p2 = NormOrder::new(2.0).unwrap();
        assert_eq!(dual_witness(&[1.0, 0.0], &p2, &w).unwrap(), vec![1.0, 0.0]);
        let v = dual_witness(&[3.0, 4.0], &p2, &w).unwrap();
        assert_relative_eq!(v[0], 0.6, max_relative = 1e-12);
        assert_relative_eq!(v[1], 0.8, max_relative = 1e-12);

        let p1 = NormOrder::new(1.0).unwrap();
        assert_eq!(dual_witness(&[1.0, 1.0], &p1, &w).unwrap(), vec![1.0, 1.0]);

        assert!(dual_witness(&[0.0, 0.0], &p2, &w).is_err());
    }

    #[test]
    fn witness_attains_norm() {
        // sum d_i v_i x_i = ||x*d||_p to 1e-10 across orders.
        let w = WeightVector::new(vec![1.0, 0.7, 0.4]).unwrap();
        let xs = [[1.0, -2.0, 3.0], [0.5, 0.0, -0.1], [-4.0, 4.0, 4.0]];
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let no = NormOrder::new(p).unwrap();
            for x in &xs {
                let v = dual_witness(x, &no, &w).unwrap();
                assert!((q_norm(&v, no.q()) - 1.0).abs() < 1e-12);
                let pairing: f64 = x
                    .iter()
                    .zip(v.iter())
                    .zip(w.values())
                    .map(|((xi, vi), di)| di * vi * xi)
                    .sum();
                let norm = weighted_lp_norm(x, &no, &w);
                assert!(
                    (pairing - norm).abs() <= 1e-10 * norm.max(1.0),
                    "p={p}: pairing {pairing} vs norm {norm}"
                );
            }
        }
    }

    #[test]
    fn critical_scale_monotone_to_one_near_two() {
        // d(p) decreases to 1 as p -> 2- when d_i < 1 for i > m.
        let w = WeightVector::new(vec![1.0, 0.5, 0.25]).unwrap();
        let mut last = f64::INFINITY;
        for p in [1.0, 1.2, 1.4, 1.6, 1.8, 1.9, 1.99, 1.999] {
            let g = critical_scale(&NormOrder::new(p).unwrap(), &w);
            assert!(g.critical_scale <= last + 1e-15, "not monotone at p={p}");
            assert!(g.critical_scale >= 1.0);
            last = g.critical_scale;
        }
        assert!((last - 1.0).abs() < 2e-3);
    }
}
