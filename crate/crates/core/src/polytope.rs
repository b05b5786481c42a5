//! Random polytopes K_N = conv{X_1, ..., X_N}: hull membership with
//! certificates, Monte Carlo estimates of E μ(K_N), DFM sandwich bounds and
//! threshold scans.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cramer::CramerEvaluator;
use crate::dist::spec::{BuildContext, DistSpec, FamilyRegistry};
use crate::dist::{Law, ProductDistribution, RadialDistribution};
use crate::error::{Error, Result};
use crate::funcstats::{cramer_lower_bound, cramer_moments, stat_report, Method};
use crate::quad::monotone_root;
use crate::rng;
use crate::specfun::ln_gamma;

// ---------------------------------------------------------------- membership

/// Witness for "x ∈ conv(V)" or "x ∉ conv(V)", checkable by arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HullCertificate {
    /// x = Σ λ_k V[vertices[k]], λ ≥ 0, Σ λ = 1, at most n+1 terms.
    Inside {
        vertices: Vec<usize>,
        coefficients: Vec<f64>,
        residual: f64,
    },
    /// ⟨ξ, x⟩ − max_i ⟨ξ, V_i⟩ = margin > 0.
    Outside { direction: Vec<f64>, margin: f64 },
}

const MAX_ITER: usize = 100_000;
const REPRO_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl HullCertificate {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullCertificate::Inside { .. })
    }

    /// Re-check the certificate against the data.
    pub fn verify(&self, vertices: &[Vec<f64>], x: &[f64]) -> bool {
        match self {
            HullCertificate::Inside { vertices: idx, coefficients, .. } => {
                if idx.len() != coefficients.len() || idx.len() > x.len() + 1 || idx.is_empty() {
                    return false;
                }
                if idx.iter().any(|i| *i >= vertices.len()) || coefficients.iter().any(|c| !(*c >= 0.0)) {
                    return false;
                }
                let sum: f64 = coefficients.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return false;
                }
                let mut y = vec![0.0; x.len()];
                for (i, c) in idx.iter().zip(coefficients) {
                    for (yk, vk) in y.iter_mut().zip(&vertices[*i]) {
                        *yk += c * vk;
                    }
                }
                let r: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                r <= REPRO_TOL * (1.0 + norm(x))
            }
            HullCertificate::Outside { direction, margin } => {
                if direction.len() != x.len() || !(*margin > 0.0) {
                    return false;
                }
                let px = dot(direction, x);
                let top = vertices.iter().map(|v| dot(direction, v)).fold(f64::NEG_INFINITY, f64::max);
                px - top > 0.0
            }
        }
    }
}

/// Affine minimiser of |Σ μ_k p_k| subject to Σ μ_k = 1.
fn affine_min(pts: &[&[f64]]) -> Vec<f64> {
    let m = pts.len();
    if m == 1 {
        return vec![1.0];
    }
    let n = pts[0].len();
    let p0 = pts[0];
    let d = DMatrix::from_fn(n, m - 1, |i, k| pts[k + 1][i] - p0[i]);
    let b = DVector::from_fn(n, |i, _| -p0[i]);
    let scale = d.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let a = d
        .svd(true, true)
        .solve(&b, 1e-13 * scale)
        .unwrap_or_else(|_| DVector::zeros(m - 1));
    let mut mu = Vec::with_capacity(m);
    mu.push(1.0 - a.iter().sum::<f64>());
    mu.extend(a.iter());
    mu
}

/// Wolfe's minimum-norm-point iteration on the translated cloud V − x.
///
/// Stops as soon as the current point y certifies separation
/// (min_i ⟨y, V_i − x⟩ > 0) or lies within 1e-10(1+|x|) of the origin.
pub fn hull_membership(vertices: &[Vec<f64>], x: &[f64]) -> Result<HullCertificate> {
    if vertices.is_empty() {
        return Err(Error::Domain("hull of an empty set".into()));
    }
    let n = x.len();
    if vertices.iter().any(|v| v.len() != n) {
        return Err(Error::Domain("vertex and point dimensions differ".into()));
    }
    let p: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| v.iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let inside_tol = 1e-10 * (1.0 + norm(x));
    let scale2 = p.iter().map(|v| dot(v, v)).fold(0.0, f64::max);

    let first = (0..p.len())
        .min_by(|a, b| dot(&p[*a], &p[*a]).total_cmp(&dot(&p[*b], &p[*b])))
        .unwrap();
    let mut set = vec![first];
    let mut lam = vec![1.0];
    let mut y = p[first].clone();
    let combine = |set: &[usize], lam: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (i, l) in set.iter().zip(lam) {
            for (yk, pk) in y.iter_mut().zip(&p[*i]) {
                *yk += l * pk;
            }
        }
        y
    };

    let mut iter = 0;
    loop {
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::Indeterminate(format!("membership budget of {MAX_ITER} iterations exhausted")));
        }
        if norm(&y) <= inside_tol {
            let cert = HullCertificate::Inside {
                residual: norm(&combine(&set, &lam)),
                vertices: set,
                coefficients: lam,
            };
            return finish(cert, vertices, x);
        }
        let (j, m) = p
            .iter()
            .enumerate()
            .map(|(i, v)| (i, dot(&y, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if m > 0.0 {
            let cert = HullCertificate::Outside {
                direction: y.iter().map(|v| -v).collect(),
                margin: m,
            };
            return finish(cert, vertices, x);
        }
        // y is already optimal up to roundoff, yet neither test fired
        if dot(&y, &y) - m <= 1e-14 * scale2 || set.contains(&j) {
            return Err(Error::Indeterminate(format!(
                "probe within {:.3e} of the hull boundary",
                norm(&y)
            )));
        }
        set.push(j);
        lam.push(0.0);
        loop {
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::Indeterminate(format!("membership budget of {MAX_ITER} iterations exhausted")));
            }
            let pts: Vec<&[f64]> = set.iter().map(|i| p[*i].as_slice()).collect();
            let mu = affine_min(&pts);
            if mu.iter().all(|v| *v > 0.0) {
                lam = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, u) in lam.iter().zip(&mu) {
                if *u <= 0.0 && l - u > 0.0 {
                    theta = theta.min(l / (l - u));
                }
            }
            for (l, u) in lam.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * u;
            }
            // drop the points whose weight reached zero, at least one
            let kmin = (0..lam.len()).min_by(|a, b| lam[*a].total_cmp(&lam[*b])).unwrap();
            let mut keep = Vec::with_capacity(set.len());
            for k in 0..set.len() {
                if k != kmin && lam[k] > 1e-15 {
                    keep.push(k);
                }
            }
            set = keep.iter().map(|k| set[*k]).collect();
            lam = keep.iter().map(|k| lam[*k]).collect();
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
        }
        y = combine(&set, &lam);
    }
}

fn finish(cert: HullCertificate, vertices: &[Vec<f64>], x: &[f64]) -> Result<HullCertificate> {
    if cert.verify(vertices, x) {
        Ok(cert)
    } else {
        Err(Error::Indeterminate("certificate failed re-verification".into()))
    }
}

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dist: DistSpec,
    pub n: usize,
    /// Vertex counts; empty means generate a log-spaced list.
    #[serde(rename = "N_list", default)]
    pub n_list: Vec<u64>,
    pub trials: usize,
    pub probe_count: usize,
    pub delta: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn law(&self) -> Result<Law> {
        let law = FamilyRegistry::default().build(&self.dist, &BuildContext::default())?;
        if law.dim() != self.n {
            return Err(Error::Spec(format!("n = {} but the law lives in dimension {}", self.n, law.dim())));
        }
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Spec("n must be >= 1".into()));
        }
        if self.trials == 0 || self.probe_count == 0 {
            return Err(Error::Spec("trials and probe_count must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Spec(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let Some(bad) = self.n_list.iter().find(|v| **v as usize <= self.n) {
            return Err(Error::Spec(format!("every N must exceed n = {}, got {bad}", self.n)));
        }
        Ok(())
    }
}

/// Log-spaced integers between e^{lo} and e^{hi}, all above n.
pub fn auto_n_list(n: usize, lo: f64, hi: f64, count: usize) -> Vec<u64> {
    let count = count.max(2);
    let mut out: Vec<u64> = (0..count)
        .map(|k| {
            let e = lo + (hi - lo) * k as f64 / (count - 1) as f64;
            (e.exp().round() as u64).max(n as u64 + 1)
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub const AUTO_LOW: f64 = 0.4;
pub const AUTO_HIGH: f64 = 1.8;
pub const AUTO_COUNT: usize = 16;

// ---------------------------------------------------------------- DFM

/// The DFM sandwich at one level.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DfmBounds {
    pub level: f64,
    pub mu_a: f64,
    pub inf_q: f64,
    pub sup_q: f64,
    pub upper: f64,
    pub lower: f64,
}

/// Ingredients μ(A), inf_A q, sup_{A^c} q for a family of sets A_t.
///
/// For 1-D and rotation-invariant laws A_t = {ω ≤ t} exactly. For products
/// the depth is not available, so A_t = {Λ* ≤ t}: Chernoff bounds q off
/// A_t and the ε-inequality bounds it on A_t, with μ(A_t) estimated from a
/// reference sample and widened by two standard errors.
pub struct DfmModel {
    kind: DfmKind,
}

enum DfmKind {
    Scalar,
    Radial(RadialDistribution),
    Product { sorted: Vec<f64>, log_concave: bool },
}

const DFM_REFERENCE: usize = 20_000;

impl DfmModel {
    pub fn new(law: &Law, seed: u64) -> Result<Self> {
        if !law.continuous() {
            return Err(Error::Domain("DFM bounds need a law without atoms".into()));
        }
        let kind = match law {
            Law::Scalar(_) => DfmKind::Scalar,
            Law::Radial(r) => DfmKind::Radial(r.clone()),
            Law::Product(p) => DfmKind::Product {
                sorted: product_reference(p, seed)?,
                log_concave: p.factors.iter().all(|f| f.log_concave()),
            },
        };
        Ok(Self { kind })
    }

    fn ingredients(&self, t: f64) -> Result<Ingredients> {
        let e = (-t).exp();
        let exact = |mu: f64, inf_q: f64, sup_q: f64| Ingredients {
            mu_lo: mu,
            mu_hi: mu,
            inf_q,
            sup_q,
        };
        if t == f64::INFINITY {
            return Ok(exact(1.0, 0.0, 0.0));
        }
        if t < 0.0 {
            return Ok(exact(0.0, 1.0, 0.5));
        }
        match &self.kind {
            // q = min(F, 1 − F), so A = [F^{-1}(e^{-t}), F^{-1}(1 − e^{-t})]
            DfmKind::Scalar => Ok(exact((1.0 - 2.0 * e).max(0.0), e, e.min(0.5))),
            DfmKind::Radial(r) => {
                if e > 0.5 {
                    return Ok(exact(0.0, e, 0.5));
                }
                let rt = level_radius(r, t)?;
                Ok(exact(r.radial_cdf(rt), e, e))
            }
            DfmKind::Product { sorted, log_concave } => {
                let m = sorted.len() as f64;
                let p = sorted.partition_point(|v| *v <= t) as f64 / m;
                let se = (p * (1.0 - p) / m).sqrt().max(1.0 / m);
                // on A, Λ* ≤ t and Λ* ≥ (1−ε)ω + off(ε) give ω ≤ (t − off)/(1 − ε)
                let inf_q = if *log_concave {
                    let best = (1..200)
                        .map(|k| {
                            let eps = k as f64 / 200.0;
                            (t - cramer_lower_bound(0.0, eps)) / (1.0 - eps)
                        })
                        .fold(f64::INFINITY, f64::min);
                    (-best).exp().min(0.5)
                } else {
                    0.0
                };
                Ok(Ingredients {
                    mu_lo: (p - 2.0 * se).max(0.0),
                    mu_hi: (p + 2.0 * se).min(1.0),
                    inf_q,
                    sup_q: e.min(0.5),
                })
            }
        }
    }

    /// Bounds at level t for N vertices in dimension n.
    pub fn bounds(&self, n: usize, big_n: f64, t: f64) -> Result<DfmBounds> {
        if !(big_n > n as f64) {
            return Err(Error::Domain(format!("lower bound needs N > n, got N = {big_n}, n = {n}")));
        }
        let g = self.ingredients(t)?;
        let upper = (g.mu_hi + big_n * g.sup_q).clamp(0.0, 1.0);
        let lower = if g.mu_lo <= 0.0 || g.inf_q <= 0.0 {
            0.0
        } else {
            let nf = n as f64;
            let ln_binom = ln_gamma(big_n + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(big_n - nf + 1.0);
            let ln_term = std::f64::consts::LN_2 + ln_binom + (big_n - nf) * (-g.inf_q).ln_1p();
            (g.mu_lo * (1.0 - ln_term.exp()).max(0.0)).clamp(0.0, 1.0)
        };
        Ok(DfmBounds {
            level: t,
            mu_a: 0.5 * (g.mu_lo + g.mu_hi),
            inf_q: g.inf_q,
            sup_q: g.sup_q,
            upper,
            lower,
        })
    }

    /// Tightest bounds over a grid of levels.
    pub fn envelope(&self, n: usize, big_n: f64) -> Result<(f64, f64)> {
        let top = big_n.ln() + 40.0;
        let start = match self.kind {
            DfmKind::Product { .. } => 0.0,
            _ => std::f64::consts::LN_2,
        };
        let mut up = 1.0f64;
        let mut low = 0.0f64;
        for k in 0..=400 {
            let t = start + (top - start) * k as f64 / 400.0;
            let b = self.bounds(n, big_n, t)?;
            up = up.min(b.upper);
            low = low.max(b.lower);
        }
        Ok((up, low))
    }
}

/// μ(A) as an interval (exact laws have mu_lo = mu_hi).
struct Ingredients {
    mu_lo: f64,
    mu_hi: f64,
    inf_q: f64,
    sup_q: f64,
}

fn product_reference(p: &ProductDistribution, seed: u64) -> Result<Vec<f64>> {
    let evs: Vec<CramerEvaluator> = p.factors.iter().map(CramerEvaluator::scalar).collect();
    let law = Law::Product(p.clone());
    let pts = crate::dist::sample_points(&law, DFM_REFERENCE, seed, rng::STREAM_REFERENCE);
    let mut v = pts
        .par_iter()
        .map(|x| x.iter().zip(&evs).map(|(xi, ev)| ev.value(*xi)).sum::<Result<f64>>())
        .collect::<Result<Vec<f64>>>()?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Radius r with P(X_1 ≥ r) = e^{-t}.
fn level_radius(r: &RadialDistribution, t: f64) -> Result<f64> {
    let g = |s: f64| r.marginal_ln_tail(s).unwrap_or(f64::NEG_INFINITY) + t;
    let rmax = r.r_max();
    let mut hi = if rmax.is_finite() { rmax } else { r.radial_moment(1.0).max(1.0) };
    while g(hi) > 0.0 {
        if rmax.is_finite() {
            return Ok(rmax);
        }
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain(format!("no level radius for t = {t}")));
        }
    }
    monotone_root(g, 0.0, hi, 1e-13 * hi, 1e-12)
}

/// Sandwich at one level; builds a fresh model.
pub fn dfm_bounds(law: &Law, big_n: f64, t: f64) -> Result<DfmBounds> {
    DfmModel::new(law, 0)?.bounds(law.dim(), big_n, t)
}

// ---------------------------------------------------------------- estimation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NPoint {
    #[serde(rename = "N")]
    pub n_vertices: u64,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub wilson_halfwidth: f64,
    pub trial_se: f64,
    pub inside: u64,
    pub total: u64,
    pub indeterminate: u64,
    pub dfm_upper: Option<f64>,
    pub dfm_lower: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    /// per-N estimates only
    Estimates,
    Ok,
    /// at least one crossing lies outside N_list
    RangeExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdReport {
    pub law: String,
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
    pub probe_count: usize,
    pub points: Vec<NPoint>,
    pub rho1_hat: Option<f64>,
    pub rho2_hat: Option<f64>,
    pub e_cramer_ref: Option<f64>,
    pub rho1_ratio: Option<f64>,
    pub rho2_ratio: Option<f64>,
    pub status: ScanStatus,
    pub indeterminate_rate: f64,
    /// more than 0.1% of membership calls were indeterminate
    pub flagged: bool,
    pub beta_over_n: Option<f64>,
    pub dfm_note: Option<String>,
    /// Formula bounds on ρ₁, ρ₂ from E Λ* and β = Var Λ*/(E Λ*)²
    pub rho_bounds: Option<RhoBounds>,
}

const Z95: f64 = 1.959_963_984_540_054;

/// Symmetric half-width covering the Wilson 95% interval around p̂.
pub fn wilson_halfwidth(k: u64, total: u64) -> f64 {
    if total == 0 {
        return 1.0;
    }
    let t = total as f64;
    let p = k as f64 / t;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / t;
    let c = (p + z2 / (2.0 * t)) / den;
    let h = Z95 / den * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    (c + h - p).max(p - (c - h))
}

#[derive(Clone, Default)]
struct TrialCounts {
    inside: Vec<u64>,
    indeterminate: Vec<u64>,
}

/// One trial: nested vertex sets (K_N uses the first N draws), one shared
/// set of probes. Inside at N implies inside at every larger N.
fn run_trial(law: &Law, ns: &[u64], probes: usize, seed: u64, trial: u64) -> TrialCounts {
    let nmax = *ns.last().unwrap() as usize;
    let mut rv = rng::stream(seed, rng::STREAM_VERTICES, trial);
    let verts: Vec<Vec<f64>> = (0..nmax).map(|_| law.sample(&mut rv)).collect();
    let mut rp = rng::stream(seed, rng::STREAM_PROBES, trial);
    let mut out = TrialCounts {
        inside: vec![0; ns.len()],
        indeterminate: vec![0; ns.len()],
    };
    for _ in 0..probes {
        let x = law.sample(&mut rp);
        for (j, &nv) in ns.iter().enumerate() {
            match hull_membership(&verts[..nv as usize], &x) {
                Ok(c) if c.is_inside() => {
                    for k in j..ns.len() {
                        out.inside[k] += 1;
                    }
                    break;
                }
                Ok(_) => {}
                Err(_) => out.indeterminate[j] += 1,
            }
        }
    }
    out
}

fn estimate(law: &Law, cfg: &SimConfig, ns: &[u64]) -> Result<(Vec<NPoint>, f64)> {
    let trials: Vec<TrialCounts> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(law, ns, cfg.probe_count, cfg.seed, t))
        .collect();
    let mut points = Vec::with_capacity(ns.len());
    let mut indet_all = 0u64;
    for (j, &nv) in ns.iter().enumerate() {
        let inside: u64 = trials.iter().map(|t| t.inside[j]).sum();
        let indet: u64 = trials.iter().map(|t| t.indeterminate[j]).sum();
        indet_all += indet;
        let total = (cfg.trials * cfg.probe_count) as u64 - indet;
        let est = if total > 0 { inside as f64 / total as f64 } else { f64::NAN };
        let fr: Vec<f64> = trials
            .iter()
            .map(|t| {
                let m = cfg.probe_count as u64 - t.indeterminate[j];
                if m == 0 {
                    est
                } else {
                    t.inside[j] as f64 / m as f64
                }
            })
            .collect();
        let se = if fr.len() > 1 {
            let m = fr.iter().sum::<f64>() / fr.len() as f64;
            let v = fr.iter().map(|f| (f - m) * (f - m)).sum::<f64>() / (fr.len() - 1) as f64;
            (v / fr.len() as f64).sqrt()
        } else {
            0.0
        };
        let w = wilson_halfwidth(inside, total);
        points.push(NPoint {
            n_vertices: nv,
            estimate: est,
            ci_halfwidth: w.max(Z95 * se),
            wilson_halfwidth: w,
            trial_se: se,
            inside,
            total,
            indeterminate: indet,
            dfm_upper: None,
            dfm_lower: None,
        });
    }
    let calls = (cfg.trials * cfg.probe_count * ns.len()) as f64;
    Ok((points, indet_all as f64 / calls))
}

fn attach_dfm(law: &Law, cfg: &SimConfig, points: &mut [NPoint]) -> Option<String> {
    let model = match DfmModel::new(law, cfg.seed) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    let bounds: Vec<Result<(f64, f64)>> = points
        .par_iter()
        .map(|p| model.envelope(cfg.n, p.n_vertices as f64))
        .collect();
    let mut note = None;
    for (p, b) in points.iter_mut().zip(bounds) {
        match b {
            Ok((u, l)) => {
                p.dfm_upper = Some(u);
                p.dfm_lower = Some(l);
            }
            Err(e) => {
                note.get_or_insert(e.to_string());
            }
        }
    }
    if let Law::Product(_) = law {
        note.get_or_insert("product law: levels of Λ*, μ(A) from a reference sample".into());
    }
    note
}

fn beta_over_n(cfg: &SimConfig) -> Option<f64> {
    (cfg.dist.family == "beta").then(|| cfg.dist.params.get("beta").and_then(|b| b.as_f64()).unwrap_or(0.0) / cfg.n as f64)
}

fn base_report(law: &Law, cfg: &SimConfig, points: Vec<NPoint>, rate: f64) -> ThresholdReport {
    ThresholdReport {
        law: law.label(),
        n: cfg.n,
        delta: cfg.delta,
        seed: cfg.seed,
        trials: cfg.trials,
        probe_count: cfg.probe_count,
        points,
        rho1_hat: None,
        rho2_hat: None,
        e_cramer_ref: None,
        rho1_ratio: None,
        rho2_ratio: None,
        status: ScanStatus::Estimates,
        indeterminate_rate: rate,
        flagged: rate > 1e-3,
        beta_over_n: beta_over_n(cfg),
        dfm_note: None,
        rho_bounds: None,
    }
}

/// Per-N estimates of E μ(K_N) with confidence half-widths and DFM bounds.
/// Needs an explicit N_list.
pub fn expected_measure_mc(cfg: &SimConfig) -> Result<ThresholdReport> {
    cfg.validate()?;
    if cfg.n_list.is_empty() {
        return Err(Error::Spec("N_list is empty".into()));
    }
    let law = cfg.law()?;
    let mut ns = cfg.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let (mut points, rate) = estimate(&law, cfg, &ns)?;
    let note = attach_dfm(&law, cfg, &mut points);
    let mut rep = base_report(&law, cfg, points, rate);
    rep.dfm_note = note;
    Ok(rep)
}

/// (E Λ*, Var Λ*): quadrature where available, additivity for products.
pub fn e_cramer_reference(law: &Law) -> Result<(f64, f64)> {
    match law {
        Law::Product(_) => {
            let m = cramer_moments(law)?;
            Ok((m.e_cramer, m.var_cramer))
        }
        _ => {
            let r = stat_report(law, Method::Quadrature)?;
            Ok((r.e_cramer, r.var_cramer))
        }
    }
}

/// Estimates over N_list (auto-generated around e^{E Λ*} when empty) and
/// the crossings ρ̂₁, ρ̂₂.
pub fn threshold_scan(cfg: &SimConfig) -> Result<ThresholdReport> {
    cfg.validate()?;
    let law = cfg.law()?;
    let (e_ref, var_ref) = e_cramer_reference(&law)?;
    let mut ns = if cfg.n_list.is_empty() {
        auto_n_list(cfg.n, AUTO_LOW * e_ref, AUTO_HIGH * e_ref, AUTO_COUNT)
    } else {
        cfg.n_list.clone()
    };
    ns.sort_unstable();
    ns.dedup();
    let (mut points, rate) = estimate(&law, cfg, &ns)?;
    let note = attach_dfm(&law, cfg, &mut points);
    let mut rep = base_report(&law, cfg, points, rate);
    rep.dfm_note = note;
    rep.e_cramer_ref = Some(e_ref);
    let (r1, r2) = crossings(&rep.points, cfg.delta);
    rep.rho1_hat = r1;
    rep.rho2_hat = r2;
    rep.rho1_ratio = r1.map(|r| r / e_ref);
    rep.rho2_ratio = r2.map(|r| r / e_ref);
    rep.rho_bounds = rho_bound_eval(e_ref, var_ref / (e_ref * e_ref), cfg.delta, cfg.n).ok();
    rep.status = match (r1, r2) {
        (Some(_), Some(_)) => ScanStatus::Ok,
        _ => ScanStatus::RangeExhausted,
    };
    Ok(rep)
}

/// ln of the largest N with estimate + hw ≤ δ, and of the smallest N with
/// estimate − hw ≥ 1 − δ.
pub fn crossings(points: &[NPoint], delta: f64) -> (Option<f64>, Option<f64>) {
    let r1 = points
        .iter()
        .filter(|p| p.estimate + p.ci_halfwidth <= delta)
        .map(|p| p.n_vertices)
        .max();
    let r2 = points
        .iter()
        .filter(|p| p.estimate - p.ci_halfwidth >= 1.0 - delta)
        .map(|p| p.n_vertices)
        .min();
    (r1.map(|v| (v as f64).ln()), r2.map(|v| (v as f64).ln()))
}

/// Columns N, estimate, ci_halfwidth, dfm_upper, dfm_lower; reals at 17
/// significant digits, missing bounds left empty.
pub fn write_csv<W: Write>(rep: &ThresholdReport, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["N", "estimate", "ci_halfwidth", "dfm_upper", "dfm_lower"])?;
    let opt = |v: Option<f64>| v.map(crate::real17).unwrap_or_default();
    for p in &rep.points {
        wr.write_record([
            p.n_vertices.to_string(),
            crate::real17(p.estimate),
            crate::real17(p.ci_halfwidth),
            opt(p.dfm_upper),
            opt(p.dfm_lower),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- ρ bounds

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RhoBound {
    Value { value: f64 },
    HypothesisNotMet { reason: String },
}

impl RhoBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            RhoBound::Value { value } => Some(*value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoBounds {
    pub rho1_lower: RhoBound,
    pub rho2_upper: RhoBound,
}

/// ρ₁ ≥ (1 − √(8β/δ)) E Λ*, and ρ₂ ≤ (1 + max{√(128β/δ), 8 ln(3e E Λ*/2)/(3 E Λ*)}) E Λ*.
pub fn rho_bound_eval(e_cramer: f64, beta_param: f64, delta: f64, n: usize) -> Result<RhoBounds> {
    if n == 0 || !(e_cramer > 0.0) || !(beta_param >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "need n >= 1, E Λ* > 0, β >= 0; got n = {n}, E Λ* = {e_cramer}, β = {beta_param}"
        )));
    }
    let rho1_lower = if !(delta < 1.0) {
        RhoBound::HypothesisNotMet {
            reason: format!("delta = {delta} is not below 1"),
        }
    } else if 8.0 * beta_param > delta {
        RhoBound::HypothesisNotMet {
            reason: format!("8β = {} exceeds delta = {delta}", 8.0 * beta_param),
        }
    } else {
        RhoBound::Value {
            value: (1.0 - (8.0 * beta_param / delta).sqrt()) * e_cramer,
        }
    };
    let rho2_upper = if !(128.0 * beta_param < delta) || !(delta < 1.0) {
        RhoBound::HypothesisNotMet {
            reason: format!("needs 128β < delta < 1, got 128β = {}, delta = {delta}", 128.0 * beta_param),
        }
    } else {
        let a = (128.0 * beta_param / delta).sqrt();
        let b = 8.0 * (std::f64::consts::E * 1.5 * e_cramer).ln() / (3.0 * e_cramer);
        RhoBound::Value {
            value: (1.0 + a.max(b)) * e_cramer,
        }
    };
    Ok(RhoBounds { rho1_lower, rho2_upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn triangle_inside_coefficients() {
        let c = hull_membership(&tri(), &[0.25, 0.25]).unwrap();
        let HullCertificate::Inside { vertices, coefficients, .. } = c else {
            panic!("expected inside")
        };
        let mut w = [0.0; 3];
        for (i, l) in vertices.iter().zip(&coefficients) {
            w[*i] = *l;
        }
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.25).abs() < 1e-12 && (w[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn triangle_outside_direction() {
        let c = hull_membership(&tri(), &[1.0, 1.0]).unwrap();
        let HullCertificate::Outside { direction, margin } = c else {
            panic!("expected outside")
        };
        assert!(margin > 0.0);
        assert!((direction[0] - direction[1]).abs() < 1e-12 * direction[0].abs());
    }

    #[test]
    fn rho2_example() {
        let r = rho_bound_eval(100.0, 1e-4, 0.1, 10).unwrap();
        assert!((r.rho2_upper.value().unwrap() - 135.777).abs() < 0.01);
    }
}
