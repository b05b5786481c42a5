//! Half-space depth q and ω = −ln q.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{RadialDistribution, ScalarDistribution};
use crate::error::{Error, Result};
use crate::rng;
use crate::specfun::log_reg_inc_beta;

/// min(P(X <= x), P(X >= x)).
pub fn depth_1d(s: &ScalarDistribution, x: f64) -> f64 {
    ln_depth_1d(s, x).exp()
}

pub fn ln_depth_1d(s: &ScalarDistribution, x: f64) -> f64 {
    s.ln_cdf(x).min(s.ln_tail(x)).min(0.0)
}

/// Depth of a point under a rotation-invariant law: the marginal tail at |x|.
pub fn depth_radial(r: &RadialDistribution, x: &[f64]) -> Result<f64> {
    Ok(ln_depth_radial(r, x)?.exp())
}

pub fn ln_depth_radial(r: &RadialDistribution, x: &[f64]) -> Result<f64> {
    if x.len() != r.dim() {
        return Err(Error::Domain(format!("point has {} coordinates, law has {}", x.len(), r.dim())));
    }
    ln_depth_radial_norm(r, x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// ln q at any point of norm s.
pub fn ln_depth_radial_norm(r: &RadialDistribution, s: f64) -> Result<f64> {
    if s == 0.0 && r.dim() > 1 {
        return Ok(-std::f64::consts::LN_2);
    }
    r.marginal_ln_tail(s.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBand {
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
    pub ln_exact: f64,
}

/// Depth under the density ∝ (1 − |x|²)^β on the unit ball at |x| = x,
/// with the envelope (1 − x²)^{β+(n+1)/2} · [h_lo, h_hi].
pub fn depth_beta_band(n: usize, beta: f64, x: f64) -> Result<BetaBand> {
    if n < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(beta > -1.0) {
        return Err(Error::Domain(format!("beta must exceed -1, got {beta}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    let nf = n as f64;
    let c = beta + 0.5 * (nf + 1.0);
    // X_1² ~ Beta(1/2, β + (n+1)/2)
    let y = (1.0 - x) * (1.0 + x);
    let ln_exact = -std::f64::consts::LN_2 + log_reg_inc_beta(c, 0.5, y)?;
    let ln_pref = c * y.ln();
    let two_sqrt_pi = 2.0 * std::f64::consts::PI.sqrt();
    let lo = ln_pref - (two_sqrt_pi * (beta + 0.5 * nf + 1.0).sqrt()).ln();
    // the upper constant needs β + n/2 > 0; otherwise the envelope is vacuous
    let hi = if beta + 0.5 * nf > 0.0 {
        ln_pref - (two_sqrt_pi * x * (beta + 0.5 * nf).sqrt()).ln()
    } else {
        f64::INFINITY
    };
    Ok(BetaBand {
        exact: ln_exact.exp(),
        lower: lo.exp(),
        upper: hi.exp(),
        ln_exact,
    })
}

/// Directional estimate of the depth of `x` in a point cloud: the smallest
/// fraction of points in a closed half-space through x, over `m` random
/// directions. Never below the empirical depth.
pub fn depth_mc(cloud: &[Vec<f64>], x: &[f64], m: usize, seed: u64) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::Domain("empty cloud".into()));
    }
    if m == 0 {
        return Err(Error::Domain("need at least one direction".into()));
    }
    let n = x.len();
    if cloud.iter().any(|p| p.len() != n) {
        return Err(Error::Domain("cloud and point dimensions differ".into()));
    }
    let total = cloud.len() as f64;
    if n == 1 {
        let le = cloud.iter().filter(|p| p[0] <= x[0]).count();
        let ge = cloud.iter().filter(|p| p[0] >= x[0]).count();
        return Ok(le.min(ge) as f64 / total);
    }
    let best = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, rng::STREAM_DIRECTIONS, k as u64);
            let xi: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
            let px: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
            let mut ge = 0usize;
            let mut le = 0usize;
            for p in cloud {
                let v: f64 = xi.iter().zip(p).map(|(a, b)| a * b).sum();
                if v >= px {
                    ge += 1;
                }
                if v <= px {
                    le += 1;
                }
            }
            ge.min(le)
        })
        .min()
        .unwrap();
    Ok(best as f64 / total)
}

/// −ln q, with +inf at q = 0.
pub fn omega(q: f64) -> f64 {
    if q <= 0.0 {
        f64::INFINITY
    } else {
        -q.ln()
    }
}
