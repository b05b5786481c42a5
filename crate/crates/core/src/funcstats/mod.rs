//! Moments of Λ*(X) and ω(X), separability constants, Beta-law formulas and
//! the inequality battery.

mod battery;

pub use battery::{
    verify_battery, BatteryConfig, BatteryReport, Check, CheckContext, CheckRecord, CheckRegistry, CheckStatus,
    Outcome,
};

use std::f64::consts::{E, LN_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cramer::{kappa, CramerEvaluator};
use crate::depth::{depth_beta_band, depth_mc, ln_depth_1d, ln_depth_radial_norm};
use crate::dist::{sample_points, Law, ProductDistribution, RadialDistribution, ScalarDistribution};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_vec, log_window, QuadConfig};
use crate::rng;
use crate::specfun::digamma_trigamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

impl Method {
    pub const DEFAULT_SAMPLES: usize = 200_000;
}

/// Quadrature error estimates or Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdErrors {
    pub e_cramer: f64,
    pub var_cramer: f64,
    pub exp_neg_cramer: f64,
    pub e_omega: f64,
    pub var_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatReport {
    pub law: String,
    pub dim: usize,
    pub e_cramer: f64,
    pub var_cramer: f64,
    pub exp_neg_cramer: f64,
    pub e_omega: f64,
    pub var_omega: f64,
    pub beta_param: f64,
    pub tau_param: f64,
    pub method: Method,
    pub std_errors: StdErrors,
}

/// Raw moments [1, Λ*, Λ*², e^{−Λ*}, ω, ω²] and their error estimates.
#[derive(Debug, Clone, Copy)]
struct Moments {
    m: [f64; 6],
    err: [f64; 6],
}

fn stats_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_panels: 10_000,
    }
}

const WINDOW_CUT: f64 = 45.0;

fn scalar_moments(s: &ScalarDistribution, with_omega: bool) -> Result<Moments> {
    let ev = CramerEvaluator::scalar(s);
    if s.lattice() {
        return lattice_moments(s, &ev, with_omega);
    }
    let (a, b) = s.support();
    let Some((lo, hi, _, _)) = log_window(&mut |x| s.ln_density(x), a, b, s.mean(), WINDOW_CUT) else {
        return Err(Error::Quadrature(format!("no mass found for {}", s.name())));
    };
    let mut fail = None;
    let q = integrate_vec(
        |x| {
            let lf = s.ln_density(x);
            if lf == f64::NEG_INFINITY {
                return [0.0; 6];
            }
            let f = lf.exp();
            let l = match ev.value(x) {
                Ok(v) => v,
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            };
            let w = if with_omega { -ln_depth_1d(s, x) } else { 0.0 };
            [f, f * l, f * l * l, f * (-l).exp(), f * w, f * w * w]
        },
        lo,
        hi,
        &[s.median(), s.mean()],
        &stats_cfg(),
    )?;
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(Moments {
        m: q.value,
        err: q.abs_err,
    })
}

fn lattice_moments(s: &ScalarDistribution, ev: &CramerEvaluator, with_omega: bool) -> Result<Moments> {
    let (a, b) = s.support();
    let start = s.mean().round().clamp(a, b);
    let mut m = [0.0; 6];
    let mut add = |k: f64| -> Result<bool> {
        let lp = s.ln_density(k);
        let p = lp.exp();
        if p == 0.0 {
            return Ok(lp > -WINDOW_CUT);
        }
        let l = ev.value(k)?;
        let w = if with_omega { -ln_depth_1d(s, k) } else { 0.0 };
        let v = [p, p * l, p * l * l, p * (-l).exp(), p * w, p * w * w];
        for (acc, x) in m.iter_mut().zip(v) {
            *acc += x;
        }
        Ok(lp > -WINDOW_CUT)
    };
    let mut k = start;
    while k <= b && (add(k)? || k < s.mean()) {
        k += 1.0;
    }
    let mut k = start - 1.0;
    while k >= a && (add(k)? || k > s.mean()) {
        k -= 1.0;
    }
    Ok(Moments {
        m,
        err: [f64::EPSILON * 64.0; 6],
    })
}

fn radial_moments(r: &RadialDistribution, with_omega: bool) -> Result<Moments> {
    let ev = CramerEvaluator::radial(r);
    if let Some(r0) = r.point_mass() {
        let l = ev.value(r0)?;
        let w = if with_omega { -ln_depth_radial_norm(r, r0)? } else { 0.0 };
        return Ok(Moments {
            m: [1.0, l, l * l, (-l).exp(), w, w * w],
            err: [0.0; 6],
        });
    }
    let Some((lo, hi, _, at)) = log_window(&mut |x| r.ln_radial_density(x), 0.0, r.r_max(), r.radial_moment(1.0), WINDOW_CUT)
    else {
        return Err(Error::Quadrature(format!("no mass found for {}", r.name())));
    };
    let mut fail = None;
    let q = integrate_vec(
        |x| {
            let lf = r.ln_radial_density(x);
            if lf == f64::NEG_INFINITY || x <= 0.0 {
                return [0.0; 6];
            }
            let f = lf.exp();
            let pair = ev.value(x).and_then(|l| {
                let w = if with_omega { -ln_depth_radial_norm(r, x)? } else { 0.0 };
                Ok((l, w))
            });
            let (l, w) = match pair {
                Ok(p) => p,
                Err(e) => {
                    fail.get_or_insert(e);
                    (0.0, 0.0)
                }
            };
            [f, f * l, f * l * l, f * (-l).exp(), f * w, f * w * w]
        },
        lo,
        hi,
        &[at],
        &stats_cfg(),
    )?;
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(Moments {
        m: q.value,
        err: q.abs_err,
    })
}

fn finish(law: &Law, method: Method, mo: Moments, errs: Option<StdErrors>) -> Result<StatReport> {
    let [m0, m1, m2, m3, m4, m5] = mo.m;
    // normalise away the truncated tails of the window
    let (e, e2, en, w, w2) = (m1 / m0, m2 / m0, m3 / m0, m4 / m0, m5 / m0);
    let var = (e2 - e * e).max(0.0);
    let varw = (w2 - w * w).max(0.0);
    let std_errors = errs.unwrap_or_else(|| {
        let [d0, d1, d2, d3, d4, d5] = mo.err;
        StdErrors {
            e_cramer: d1 + e.abs() * d0,
            var_cramer: d2 + 2.0 * e.abs() * d1 + e2.abs() * d0,
            exp_neg_cramer: d3 + en * d0,
            e_omega: d4 + w.abs() * d0,
            var_omega: d5 + 2.0 * w.abs() * d4 + w2.abs() * d0,
        }
    });
    let rep = StatReport {
        law: law.label(),
        dim: law.dim(),
        e_cramer: e,
        var_cramer: var,
        exp_neg_cramer: en,
        e_omega: w,
        var_omega: varw,
        beta_param: if e > 0.0 { var / (e * e) } else { f64::NAN },
        tau_param: if w > 0.0 { varw / (w * w) } else { f64::NAN },
        method,
        std_errors,
    };
    check_invariant(&rep)?;
    Ok(rep)
}

/// E Λ* ≤ E ω for every report.
fn check_invariant(rep: &StatReport) -> Result<()> {
    let slack = match rep.method {
        Method::Quadrature => 1e-7 * (1.0 + rep.e_omega.abs()),
        Method::MonteCarlo { .. } => 3.0 * (rep.std_errors.e_cramer.powi(2) + rep.std_errors.e_omega.powi(2)).sqrt(),
    };
    if rep.e_cramer > rep.e_omega + slack || rep.e_cramer.is_nan() {
        return Err(Error::Invariant(format!(
            "E Λ* = {} exceeds E ω = {} for {}",
            rep.e_cramer, rep.e_omega, rep.law
        )));
    }
    Ok(())
}

/// Expectations and variances of Λ*(X) and ω(X).
pub fn stat_report(law: &Law, method: Method) -> Result<StatReport> {
    if let Law::Radial(r) = law {
        if r.point_mass().is_some() && r.dim() > 1 {
            return Err(Error::Domain(
                "on a sphere Λ* and ω are infinite almost surely; no finite statistics".into(),
            ));
        }
    }
    match method {
        Method::Quadrature => {
            let mo = match law {
                Law::Scalar(s) => scalar_moments(s, true)?,
                Law::Radial(r) => radial_moments(r, true)?,
                Law::Product(_) => {
                    return Err(Error::Domain(
                        "quadrature statistics need a 1-D or radial law; use Monte Carlo for products".into(),
                    ))
                }
            };
            finish(law, method, mo, None)
        }
        Method::MonteCarlo { samples, seed } => mc_report(law, samples, seed),
    }
}

/// Per-point (Λ*, ω) for Monte Carlo.
fn mc_pairs(law: &Law, pts: &[Vec<f64>], seed: u64) -> Result<Vec<(f64, f64)>> {
    match law {
        Law::Scalar(s) => {
            let ev = CramerEvaluator::scalar(s);
            pts.par_iter()
                .map(|p| Ok((ev.value(p[0])?, -ln_depth_1d(s, p[0]))))
                .collect()
        }
        Law::Radial(r) => {
            let ev = CramerEvaluator::radial(r);
            pts.par_iter()
                .map(|p| {
                    let s = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                    Ok((ev.value(s)?, -ln_depth_radial_norm(r, s)?))
                })
                .collect()
        }
        Law::Product(prod) => product_pairs(prod, law, pts, seed),
    }
}

/// Product laws have no exact depth. ω is estimated on a subsample from a
/// reference cloud by directional search, then raised to Λ* where the
/// estimate falls below it (Chernoff gives ω ≥ Λ* pointwise).
const PRODUCT_OMEGA_POINTS: usize = 2000;
const PRODUCT_REFERENCE: usize = 4096;

fn product_pairs(prod: &ProductDistribution, law: &Law, pts: &[Vec<f64>], seed: u64) -> Result<Vec<(f64, f64)>> {
    let evs: Vec<CramerEvaluator> = prod.factors.iter().map(CramerEvaluator::scalar).collect();
    let reference = sample_points(law, PRODUCT_REFERENCE, seed, rng::STREAM_REFERENCE);
    let m = 32 * prod.dim();
    let total = reference.len() as f64;
    pts.iter()
        .take(PRODUCT_OMEGA_POINTS.min(pts.len()))
        .map(|p| {
            let mut l = 0.0;
            for (ev, x) in evs.iter().zip(p) {
                l += ev.value(*x)?;
            }
            let q = depth_mc(&reference, p, m, seed)?;
            let w = -((q * total + 0.5) / (total + 1.0)).ln();
            Ok((l, w.max(l)))
        })
        .collect()
}

fn mc_report(law: &Law, samples: usize, seed: u64) -> Result<StatReport> {
    if samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    let pts = sample_points(law, samples, seed, rng::STREAM_SAMPLES);
    let mut pairs = mc_pairs(law, &pts, seed)?;
    // Λ* over the full sample, ω over what mc_pairs returned
    let ls: Vec<f64> = if pairs.len() < pts.len() {
        let Law::Product(prod) = law else { unreachable!() };
        let evs: Vec<CramerEvaluator> = prod.factors.iter().map(CramerEvaluator::scalar).collect();
        pts.par_iter()
            .map(|p| evs.iter().zip(p).map(|(ev, x)| ev.value(*x)).sum::<Result<f64>>())
            .collect::<Result<_>>()?
    } else {
        pairs.iter().map(|p| p.0).collect()
    };
    let ws: Vec<f64> = pairs.drain(..).map(|p| p.1).collect();
    let (e, var, se_e, se_var) = mean_var(&ls);
    let en: Vec<f64> = ls.iter().map(|l| (-l).exp()).collect();
    let (em, _, se_en, _) = mean_var(&en);
    let (w, varw, se_w, se_varw) = mean_var(&ws);
    let rep = StatReport {
        law: law.label(),
        dim: law.dim(),
        e_cramer: e,
        var_cramer: var,
        exp_neg_cramer: em,
        e_omega: w,
        var_omega: varw,
        beta_param: var / (e * e),
        tau_param: varw / (w * w),
        method: Method::MonteCarlo { samples, seed },
        std_errors: StdErrors {
            e_cramer: se_e,
            var_cramer: se_var,
            exp_neg_cramer: se_en,
            e_omega: se_w,
            var_omega: se_varw,
        },
    };
    check_invariant(&rep)?;
    Ok(rep)
}

/// (mean, variance, se of mean, se of variance); infinite values are
/// treated as non-finite samples and make the result infinite.
fn mean_var(v: &[f64]) -> (f64, f64, f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let c2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let c4 = v.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (m, c2, (c2 / n).sqrt(), ((c4 - c2 * c2).max(0.0) / n).sqrt())
}

/// E Λ*, Var Λ*, E e^{−Λ*} without the depth side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CramerMoments {
    pub e_cramer: f64,
    pub var_cramer: f64,
    pub exp_neg_cramer: f64,
}

/// Quadrature moments of Λ*; products use additivity over factors.
pub fn cramer_moments(law: &Law) -> Result<CramerMoments> {
    let from = |mo: Moments| {
        let [m0, m1, m2, m3, ..] = mo.m;
        let e = m1 / m0;
        CramerMoments {
            e_cramer: e,
            var_cramer: (m2 / m0 - e * e).max(0.0),
            exp_neg_cramer: m3 / m0,
        }
    };
    match law {
        Law::Scalar(s) => Ok(from(scalar_moments(s, false)?)),
        Law::Radial(r) => Ok(from(radial_moments(r, false)?)),
        Law::Product(p) => {
            let parts: Vec<CramerMoments> = p
                .factors
                .par_iter()
                .map(|f| Ok(from(scalar_moments(f, false)?)))
                .collect::<Result<_>>()?;
            Ok(CramerMoments {
                e_cramer: parts.iter().map(|c| c.e_cramer).sum(),
                var_cramer: parts.iter().map(|c| c.var_cramer).sum(),
                exp_neg_cramer: parts.iter().map(|c| c.exp_neg_cramer).product(),
            })
        }
    }
}

/// E e^{−Λ*(X)} for independent coordinates: the product over factors.
pub fn separability_product(factors: &[ScalarDistribution]) -> Result<f64> {
    if factors.is_empty() {
        return Err(Error::Domain("no factors".into()));
    }
    factors
        .par_iter()
        .map(|f| Ok(cramer_moments(&Law::Scalar(f.clone()))?.exp_neg_cramer))
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.iter().product())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaDigamma {
    pub n: usize,
    pub beta: f64,
    pub e_omega_formula: f64,
    pub e_omega2_formula: f64,
}

/// Leading terms of E ω and E ω² for the density ∝ (1 − |x|²)^β:
/// c(ψ(n/2+β+1) − ψ(β+1)) and c²((ψ(n/2+β+1) − ψ(β+1))² + ψ'(β+1) − ψ'(n/2+β+1))
/// with c = β + (n+1)/2.
pub fn beta_digamma_stats(n: usize, beta: f64) -> Result<BetaDigamma> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    if !(beta > -1.0) {
        return Err(Error::Domain(format!("beta must exceed -1, got {beta}")));
    }
    let c = beta + 0.5 * (n as f64 + 1.0);
    let (p_hi, p1_hi) = digamma_trigamma(0.5 * n as f64 + beta + 1.0)?;
    let (p_lo, p1_lo) = digamma_trigamma(beta + 1.0)?;
    let d = p_hi - p_lo;
    Ok(BetaDigamma {
        n,
        beta,
        e_omega_formula: c * d,
        e_omega2_formula: c * c * (d * d + p1_lo - p1_hi),
    })
}

/// Leading digamma terms next to Monte Carlo estimates of E ω and E ω².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaDigammaCheck {
    pub n: usize,
    pub beta: f64,
    pub e_omega_formula: f64,
    pub e_omega2_formula: f64,
    pub e_omega_mc: f64,
    pub e_omega_se: f64,
    pub e_omega2_mc: f64,
    pub samples: usize,
    /// allowed gap for the leading term: 5 ln(β + n)
    pub slack: f64,
    pub within_slack: bool,
}

/// Samples the Beta ball law and evaluates ω exactly at each point.
pub fn beta_digamma_check(n: usize, beta: f64, samples: usize, seed: u64) -> Result<BetaDigammaCheck> {
    let f = beta_digamma_stats(n, beta)?;
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let law = Law::Radial(RadialDistribution::beta(n, beta)?);
    let pts = sample_points(&law, samples, seed, rng::STREAM_SAMPLES);
    let w: Vec<f64> = pts
        .par_iter()
        .map(|x| {
            let s = x.iter().map(|v| v * v).sum::<f64>().sqrt().min(1.0 - f64::EPSILON);
            Ok(-depth_beta_band(n, beta, s.max(f64::MIN_POSITIVE))?.ln_exact)
        })
        .collect::<Result<_>>()?;
    let (m, var, se, _) = mean_var(&w);
    let slack = 5.0 * (beta + n as f64).ln();
    Ok(BetaDigammaCheck {
        n,
        beta,
        e_omega_formula: f.e_omega_formula,
        e_omega2_formula: f.e_omega2_formula,
        e_omega_mc: m,
        e_omega_se: se,
        e_omega2_mc: var + m * m,
        samples,
        slack,
        within_slack: (m - f.e_omega_formula).abs() <= slack,
    })
}

/// ln(ε / 2^{1−ε}).
pub fn eps_offset(eps: f64) -> f64 {
    eps.ln() - (1.0 - eps) * LN_2
}

/// Right-hand side of Λ* ≥ (1−ε)ω + ln(ε/2^{1−ε}).
pub fn cramer_lower_bound(omega: f64, eps: f64) -> f64 {
    (1.0 - eps) * omega + eps_offset(eps)
}

/// The bound above at its best ε = 1/ln(1/(2q)), valid for q < 1/(2e).
pub fn cramer_lower_optimized(q: f64) -> Option<f64> {
    if q <= 0.0 || q >= 1.0 / (2.0 * E) {
        return None;
    }
    let a = -(2.0 * q).ln();
    Some(a - a.ln() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaTau {
    pub eps: f64,
    pub lower: f64,
    pub beta_param: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Two-sided comparison of β(μ) with τ(μ) at a given ε ∈ (0, 1).
pub fn beta_tau_bounds(rep: &StatReport, eps: f64, tol: f64) -> Result<BetaTau> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let off = eps_offset(eps);
    let tau = rep.tau_param;
    let lower = (1.0 - eps).powi(2) * tau + 2.0 * (1.0 - eps) * off / rep.e_omega + eps * eps - 2.0 * eps;
    let factor = (1.0 - off / rep.e_cramer) / (1.0 - eps);
    let upper = (tau + 2.0 * eps - eps * eps - 2.0 * (1.0 - eps) * off / rep.e_omega) * factor * factor;
    let b = rep.beta_param;
    Ok(BetaTau {
        eps,
        lower,
        beta_param: b,
        upper,
        holds: lower <= b + tol && b <= upper + tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarExpRecord {
    pub var_cramer: f64,
    pub e_cramer: f64,
    pub var_bound: f64,
    pub mean_bound: f64,
    /// 2∫_0^{1/2} ln²u du
    pub integral_square_log: f64,
    /// 2 + 2 ln 2 + ln² 2, the closed form of the integral above
    pub integral_square_log_closed: f64,
    /// 2 + ln² 2 + ln 2, the expression printed next to the constant
    pub printed_expression: f64,
    /// 2∫_0^{1/(2e)} (ln(1/(2u ln(1/(2u)))) − 1) du
    pub integral_lower: f64,
    pub pass: bool,
}

/// Var Λ* < 4 and E Λ* > 0.1484 for a continuous log-concave law, with the
/// two integrals behind those constants.
pub fn var_exp_bounds_check(s: &ScalarDistribution) -> Result<VarExpRecord> {
    if s.lattice() || !s.log_concave() {
        return Err(Error::HypothesisNotMet(format!("{} is not a continuous log-concave law", s.name())));
    }
    let cm = cramer_moments(&Law::Scalar(s.clone()))?;
    let (isq, ilow) = var_exp_integrals()?;
    Ok(VarExpRecord {
        var_cramer: cm.var_cramer,
        e_cramer: cm.e_cramer,
        var_bound: 4.0,
        mean_bound: 0.1484,
        integral_square_log: isq,
        integral_square_log_closed: 2.0 + 2.0 * LN_2 + LN_2 * LN_2,
        printed_expression: 2.0 + LN_2 * LN_2 + LN_2,
        integral_lower: ilow,
        pass: cm.var_cramer < 4.0 && cm.e_cramer > 0.1484,
    })
}

/// (2∫_0^{1/2} ln²u du, 2∫_0^{1/(2e)} (ln(1/(2u ln(1/(2u)))) − 1) du).
pub fn var_exp_integrals() -> Result<(f64, f64)> {
    let cfg = QuadConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_panels: 10_000,
    };
    let a = 2.0 * integrate(|u| u.ln().powi(2), 0.0, 0.5, &cfg)?;
    let b = 2.0
        * integrate(
            |u| {
                let l = -(2.0 * u).ln();
                l - l.ln() - 1.0
            },
            0.0,
            0.5 / E,
            &cfg,
        )?;
    Ok((a, b))
}

/// Side-by-side record of 2πe^{−γ−1/2}, its logarithm and the computed
/// E Λ*_U(U) for U uniform on [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaNote {
    pub kappa: f64,
    pub ln_kappa: f64,
    pub e_cramer_uniform: f64,
    pub matches_kappa: bool,
    pub matches_ln_kappa: bool,
}

pub fn kappa_note() -> Result<KappaNote> {
    let e = cramer_moments(&Law::Scalar(ScalarDistribution::uniform(-1.0, 1.0)?))?.e_cramer;
    let k = kappa();
    Ok(KappaNote {
        kappa: k,
        ln_kappa: k.ln(),
        e_cramer_uniform: e,
        matches_kappa: (e - k).abs() < 1e-6,
        matches_ln_kappa: (e - k.ln()).abs() < 1e-6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub n: usize,
    pub exp_neg_cramer: f64,
    pub root: f64,
    pub nonincreasing: bool,
}

/// (E e^{−Λ*(ℰ_n)})^{1/n} for the exponential radial law, n = 1..=k.
/// Exploratory: the monotonicity is conjectured, not proved.
pub fn conjecture_table(k: usize) -> Result<Vec<ConjectureRow>> {
    let vals: Vec<f64> = (1..=k)
        .into_par_iter()
        .map(|n| Ok(cramer_moments(&Law::Radial(RadialDistribution::radial_exp(n)?))?.exp_neg_cramer))
        .collect::<Result<_>>()?;
    let mut prev = f64::INFINITY;
    Ok(vals
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = i + 1;
            let root = v.powf(1.0 / n as f64);
            let row = ConjectureRow {
                n,
                exp_neg_cramer: *v,
                root,
                nonincreasing: root <= prev + 1e-9,
            };
            prev = root;
            row
        })
        .collect())
}

/// E q(X)^p by quadrature for a 1-D law (sums for lattice laws).
pub fn depth_moment_1d(s: &ScalarDistribution, p: f64) -> Result<f64> {
    if s.lattice() {
        let (a, b) = s.support();
        let mut acc = 0.0;
        let start = s.mean().round().clamp(a, b);
        let mut k = start;
        loop {
            let lp = s.ln_density(k);
            acc += (lp + p * ln_depth_1d(s, k)).exp();
            k += 1.0;
            if k > b || (lp < -WINDOW_CUT && k > s.mean()) {
                break;
            }
        }
        let mut k = start - 1.0;
        while k >= a {
            let lp = s.ln_density(k);
            acc += (lp + p * ln_depth_1d(s, k)).exp();
            if lp < -WINDOW_CUT && k < s.mean() {
                break;
            }
            k -= 1.0;
        }
        return Ok(acc);
    }
    if p <= -1.0 {
        return Ok(f64::INFINITY);
    }
    let (a, b) = s.support();
    let m = s.median();
    let lg = |x: f64| s.ln_density(x) + p * ln_depth_1d(s, x);
    let cfg = QuadConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_panels: 10_000,
    };
    // near a finite endpoint q equals the cdf (or tail) itself, so the
    // last sliver integrates exactly to q^{1+p}/(1+p); double precision
    // cannot resolve x closer to e than that anyway
    let mut total = 0.0;
    for e in [a, b] {
        if e.is_finite() {
            let w = m - e;
            let d0 = 1e-7 * w;
            let q0 = ln_depth_1d(s, e + d0).exp();
            total += q0.powf(1.0 + p) / (1.0 + p);
            let breaks: Vec<f64> = (1..7).map(|j| e + w * 10f64.powi(-j)).collect();
            let q = integrate_vec(
                |x| {
                    let v = lg(x).exp();
                    [if v.is_nan() { 0.0 } else { v }]
                },
                e + d0,
                m,
                &breaks,
                &cfg,
            )?;
            total += q.value[0].abs();
        } else {
            let (lo, hi) = if e > m { (m, e) } else { (e, m) };
            let Some((wlo, whi, peak, _)) = log_window(&mut { lg }, lo, hi, m, WINDOW_CUT) else {
                continue;
            };
            let q = integrate_vec(
                |x| {
                    let v = (lg(x) - peak).exp();
                    [if v.is_nan() { 0.0 } else { v }]
                },
                wlo,
                whi,
                &[],
                &cfg,
            )?;
            total += q.value[0] * peak.exp();
        }
    }
    Ok(total)
}

/// 1/(2^p (p+1)): E q^p when q(X) is distributed as min(U, 1−U).
pub fn uniform_depth_moment(p: f64) -> f64 {
    1.0 / (2f64.powf(p) * (p + 1.0))
}
