//! Inequality checks behind a registry of trait objects.

use std::f64::consts::E;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    beta_tau_bounds, cramer_lower_bound, cramer_lower_optimized, cramer_moments, depth_moment_1d, stat_report,
    uniform_depth_moment, CramerMoments, Method, StatReport,
};
use crate::cramer::CramerEvaluator;
use crate::cumulant::{sphere_marginal_cumulant, CumulantFn};
use crate::depth::{ln_depth_1d, ln_depth_radial_norm};
use crate::dist::{radial_exp_marginal_cumulant, Law, RadialDistribution, ScalarDistribution};
use crate::error::{Error, Result};
use crate::quad::{integrate_vec, log_window, QuadConfig};
use crate::specfun::reg_inc_gamma_q;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub eps: Vec<f64>,
    pub grid_points: usize,
    pub tilt_points: usize,
    pub order_points: usize,
    /// tolerance for expectation checks
    pub tol: f64,
    /// tolerance for pointwise checks, relative to 1 + |value|
    pub pointwise_tol: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.3, 0.5, 0.9],
            grid_points: 200,
            tilt_points: 50,
            order_points: 50,
            tol: 1e-7,
            pointwise_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    /// smallest slack; negative means the inequality is violated
    pub worst_margin: Option<f64>,
    pub location: Option<String>,
    pub tolerance: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryReport {
    pub law: String,
    pub dim: usize,
    pub records: Vec<CheckRecord>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.records
            .iter()
            .all(|r| matches!(r.status, CheckStatus::Pass | CheckStatus::Skipped))
    }
    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Worst slack over a check, with where it occurred.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub margin: f64,
    pub location: String,
    pub tol: f64,
}

impl Outcome {
    fn new(tol: f64) -> Self {
        Self {
            margin: f64::INFINITY,
            location: String::new(),
            tol,
        }
    }
    /// Record slack scaled so that `tol` applies uniformly.
    fn see(&mut self, margin: f64, scale: f64, loc: impl FnOnce() -> String) {
        let m = margin / scale.max(1.0);
        if m < self.margin || m.is_nan() {
            self.margin = m;
            self.location = loc();
        }
    }
}

/// Shared inputs; expensive reports are computed once.
pub struct CheckContext<'a> {
    pub law: &'a Law,
    /// isotropic copy for radial laws
    pub iso: Option<RadialDistribution>,
    pub cfg: &'a BatteryConfig,
    stats: OnceLock<std::result::Result<StatReport, String>>,
    moments: OnceLock<std::result::Result<CramerMoments, String>>,
    exp_ref: OnceLock<std::result::Result<CramerMoments, String>>,
}

impl<'a> CheckContext<'a> {
    pub fn new(law: &'a Law, cfg: &'a BatteryConfig) -> Self {
        let iso = match law {
            Law::Radial(r) => Some(r.isotropize()),
            _ => None,
        };
        Self {
            law,
            iso,
            cfg,
            stats: OnceLock::new(),
            moments: OnceLock::new(),
            exp_ref: OnceLock::new(),
        }
    }
    fn stats(&self) -> Result<&StatReport> {
        self.stats
            .get_or_init(|| {
                let law = match &self.iso {
                    Some(r) => Law::Radial(r.clone()),
                    None => self.law.clone(),
                };
                stat_report(&law, Method::Quadrature).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Quadrature(e.clone()))
    }
    fn moments(&self) -> Result<&CramerMoments> {
        self.moments
            .get_or_init(|| cramer_moments(self.law).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Quadrature(e.clone()))
    }
    /// Moments for the exponential radial law in the same dimension.
    fn exp_reference(&self) -> Result<&CramerMoments> {
        self.exp_ref
            .get_or_init(|| {
                RadialDistribution::radial_exp(self.law.dim())
                    .and_then(|r| cramer_moments(&Law::Radial(r)))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Quadrature(e.clone()))
    }
    fn scalar(&self) -> Option<&ScalarDistribution> {
        match self.law {
            Law::Scalar(s) => Some(s),
            _ => None,
        }
    }
    fn log_concave(&self) -> bool {
        match self.law {
            Law::Scalar(s) => s.log_concave(),
            Law::Radial(r) => r.classes().log_concave,
            Law::Product(p) => p.factors.iter().all(|f| f.log_concave()),
        }
    }
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    /// `Some(reason)` when the check does not apply to this law.
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String>;
    fn run(&self, ctx: &CheckContext) -> Result<Outcome>;
}

pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl CheckRegistry {
    pub fn empty() -> Self {
        Self { checks: Vec::new() }
    }
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Chernoff));
        r.register(Box::new(CramerLowerEps));
        r.register(Box::new(CramerLowerOptimized));
        r.register(Box::new(DepthMoments));
        r.register(Box::new(SeparabilityBound));
        r.register(Box::new(SymmetricSeparabilityMax));
        r.register(Box::new(VarExpBounds));
        r.register(Box::new(ProductOneShot));
        r.register(Box::new(CramerBelowOmega));
        r.register(Box::new(BetaTau));
        r.register(Box::new(SphereCumulantLower));
        r.register(Box::new(ExpCumulantUpper));
        r.register(Box::new(GaussianCumulantOrder));
        r.register(Box::new(ExpSeparabilityMax));
        r.register(Box::new(ExpMeanLower));
        r.register(Box::new(GaussianSeparability));
        r.register(Box::new(ConvexOrder));
        r.register(Box::new(LcConvVariance));
        r.register(Box::new(LcConvMean));
        r
    }
    pub fn register(&mut self, c: Box<dyn Check>) {
        self.checks.push(c);
    }
    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }
    pub fn run(&self, law: &Law, cfg: &BatteryConfig) -> BatteryReport {
        let ctx = CheckContext::new(law, cfg);
        let mut records: Vec<CheckRecord> = self
            .checks
            .par_iter()
            .map(|c| {
                let name = c.name().to_string();
                if let Some(why) = c.skip_reason(&ctx) {
                    return CheckRecord {
                        name,
                        status: CheckStatus::Skipped,
                        worst_margin: None,
                        location: None,
                        tolerance: None,
                        note: Some(why),
                    };
                }
                match c.run(&ctx) {
                    Ok(o) => CheckRecord {
                        name,
                        status: if o.margin >= -o.tol { CheckStatus::Pass } else { CheckStatus::Fail },
                        worst_margin: Some(o.margin),
                        location: Some(o.location),
                        tolerance: Some(o.tol),
                        note: None,
                    },
                    Err(e) => CheckRecord {
                        name,
                        status: CheckStatus::Error,
                        worst_margin: None,
                        location: None,
                        tolerance: None,
                        note: Some(e.to_string()),
                    },
                }
            })
            .collect();
        records.sort_by(|a, b| a.name.cmp(&b.name));
        BatteryReport {
            law: law.label(),
            dim: law.dim(),
            records,
        }
    }
}

/// Runs every built-in check that applies to `law`.
pub fn verify_battery(law: &Law, cfg: &BatteryConfig) -> BatteryReport {
    CheckRegistry::builtin().run(law, cfg)
}

// ---- grids ----

/// Points spread over the bulk of a 1-D law (integers for lattice laws).
pub(crate) fn scalar_grid(s: &ScalarDistribution, k: usize) -> Vec<f64> {
    let (lo, hi) = s.support();
    let m = s.mean();
    let sd = s.variance().sqrt();
    let a = lo.max(m - 10.0 * sd);
    let b = hi.min(m + 10.0 * sd);
    if s.lattice() {
        let a = a.ceil();
        let b = b.floor();
        let count = (b - a) as usize + 1;
        let step = count.div_ceil(k).max(1);
        return (0..count).step_by(step).map(|i| a + i as f64).collect();
    }
    (0..k).map(|j| a + (b - a) * (j as f64 + 0.5) / k as f64).collect()
}

/// Norms in (0, bulk end) for radial marginals.
fn radial_grid(r: &RadialDistribution, k: usize) -> Vec<f64> {
    let m1 = r.radial_moment(1.0);
    let sd = (r.second_moment() - m1 * m1).max(0.0).sqrt();
    let end = r.r_max().min(m1 + 10.0 * sd.max(0.1 * m1));
    (0..k).map(|j| end * (j as f64 + 0.5) / k as f64).collect()
}

/// (x, Λ*(x), ω(x)) on the pointwise grid.
fn pointwise(ctx: &CheckContext) -> Result<Vec<(f64, f64, f64)>> {
    let k = ctx.cfg.grid_points;
    match ctx.law {
        Law::Scalar(s) => {
            let ev = CramerEvaluator::scalar(s);
            let xs = scalar_grid(s, k);
            let ls = ev.conjugate_grid(&xs)?;
            Ok(xs.iter().zip(ls).map(|(x, c)| (*x, c.value, -ln_depth_1d(s, *x))).collect())
        }
        Law::Radial(_) => {
            let r = ctx.iso.as_ref().unwrap();
            let ev = CramerEvaluator::radial(r);
            let xs = radial_grid(r, k);
            let ls = ev.conjugate_grid(&xs)?;
            xs.iter()
                .zip(ls)
                .map(|(x, c)| Ok((*x, c.value, -ln_depth_radial_norm(r, *x)?)))
                .collect()
        }
        Law::Product(_) => Err(Error::Domain("no exact depth for product laws".into())),
    }
}

fn need_depth(ctx: &CheckContext) -> Option<String> {
    matches!(ctx.law, Law::Product(_)).then(|| "no exact depth for product laws".to_string())
}

fn need_log_concave(ctx: &CheckContext) -> Option<String> {
    (!ctx.log_concave()).then(|| "law is not log-concave".to_string())
}

fn need_continuous_lc_scalar(ctx: &CheckContext) -> Option<String> {
    match ctx.scalar() {
        None => Some("needs a 1-D law".into()),
        Some(s) if s.lattice() => Some("needs a continuous law".into()),
        Some(s) if !s.log_concave() => Some("law is not log-concave".into()),
        _ => None,
    }
}

fn need_lc_radial(ctx: &CheckContext) -> Option<String> {
    match ctx.law {
        Law::Radial(r) if r.classes().log_concave => None,
        Law::Radial(_) => Some("law is not log-concave".into()),
        _ => Some("needs a rotation-invariant law".into()),
    }
}

// ---- pointwise checks ----

/// q ≤ e^{−Λ*}, i.e. ω ≥ Λ*.
struct Chernoff;
impl Check for Chernoff {
    fn name(&self) -> &'static str {
        "chernoff"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_depth(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let mut o = Outcome::new(ctx.cfg.pointwise_tol);
        for (x, l, w) in pointwise(ctx)? {
            if l.is_infinite() && w.is_infinite() {
                continue;
            }
            o.see(w - l, 1.0 + l.abs(), || format!("x={x}"));
        }
        Ok(o)
    }
}

/// Λ* ≥ (1−ε)ω + ln(ε/2^{1−ε}) for each configured ε.
struct CramerLowerEps;
impl Check for CramerLowerEps {
    fn name(&self) -> &'static str {
        "cramer_lower_eps"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_depth(ctx).or_else(|| need_log_concave(ctx))
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let mut o = Outcome::new(ctx.cfg.pointwise_tol);
        for (x, l, w) in pointwise(ctx)? {
            if l.is_infinite() {
                continue;
            }
            for &eps in &ctx.cfg.eps {
                o.see(l - cramer_lower_bound(w, eps), 1.0 + l.abs(), || format!("x={x}, eps={eps}"));
            }
        }
        Ok(o)
    }
}

/// Λ* ≥ ln(1/(2q ln(1/(2q)))) − 1 where q < 1/(2e).
struct CramerLowerOptimized;
impl Check for CramerLowerOptimized {
    fn name(&self) -> &'static str {
        "cramer_lower_optimized"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_depth(ctx).or_else(|| need_log_concave(ctx))
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let mut o = Outcome::new(ctx.cfg.pointwise_tol);
        for (x, l, w) in pointwise(ctx)? {
            if let Some(b) = cramer_lower_optimized((-w).exp()) {
                if l.is_finite() {
                    o.see(l - b, 1.0 + l.abs(), || format!("x={x}"));
                }
            }
        }
        if o.margin == f64::INFINITY {
            o.location = "no grid point with q < 1/(2e)".into();
        }
        Ok(o)
    }
}

// ---- 1-D expectation checks ----

/// E q^p equals 1/(2^p(p+1)) for continuous laws, and lies on the correct
/// side of it for atomic ones.
struct DepthMoments;
const DEPTH_POWERS: [f64; 5] = [-0.9, -0.5, 0.5, 1.0, 2.0];
impl Check for DepthMoments {
    fn name(&self) -> &'static str {
        "depth_moments"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        ctx.scalar().is_none().then(|| "needs a 1-D law".into())
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let s = ctx.scalar().unwrap();
        let mut o = Outcome::new(1e-6);
        for p in DEPTH_POWERS {
            let v = depth_moment_1d(s, p)?;
            let b = uniform_depth_moment(p);
            let m = if s.lattice() {
                if p > 0.0 {
                    v - b
                } else {
                    b - v
                }
            } else {
                -(v - b).abs()
            };
            o.see(m, 1.0, || format!("p={p}, E q^p={v}"));
        }
        Ok(o)
    }
}

/// E e^{−Λ*} ≤ 1 − 1/(4e).
struct SeparabilityBound;
impl Check for SeparabilityBound {
    fn name(&self) -> &'static str {
        "separability_bound"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_continuous_lc_scalar(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let v = ctx.moments()?.exp_neg_cramer;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(1.0 - 0.25 / E - v, 1.0, || format!("E e^-L*={v}"));
        Ok(o)
    }
}

fn laplace_constant() -> Result<f64> {
    static C: OnceLock<std::result::Result<f64, String>> = OnceLock::new();
    C.get_or_init(|| {
        ScalarDistribution::laplace(1.0)
            .and_then(|l| cramer_moments(&Law::Scalar(l)))
            .map(|m| m.exp_neg_cramer)
            .map_err(|e| e.to_string())
    })
    .clone()
    .map_err(Error::Quadrature)
}

/// Symmetric log-concave 1-D laws: E e^{−Λ*} at most the Laplace value.
struct SymmetricSeparabilityMax;
impl Check for SymmetricSeparabilityMax {
    fn name(&self) -> &'static str {
        "symmetric_separability_max"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_continuous_lc_scalar(ctx).or_else(|| {
            (!ctx.scalar().unwrap().symmetric()).then(|| "law is not symmetric".into())
        })
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let v = ctx.moments()?.exp_neg_cramer;
        let c = laplace_constant()?;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(c - v, 1.0, || format!("E e^-L*={v}, laplace={c}"));
        Ok(o)
    }
}

/// Var Λ* < 4 and E Λ* > 0.1484.
struct VarExpBounds;
impl Check for VarExpBounds {
    fn name(&self) -> &'static str {
        "var_exp_bounds"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_continuous_lc_scalar(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let m = ctx.moments()?;
        let mut o = Outcome::new(0.0);
        o.see(4.0 - m.var_cramer, 1.0, || format!("var={}", m.var_cramer));
        o.see(m.e_cramer - 0.1484, 1.0, || format!("mean={}", m.e_cramer));
        Ok(o)
    }
}

/// Independent symmetric log-concave coordinates: E e^{−Λ*} ≤ c^n with c
/// the Laplace value.
struct ProductOneShot;
impl Check for ProductOneShot {
    fn name(&self) -> &'static str {
        "product_one_shot"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        match ctx.law {
            Law::Product(p) if p.factors.iter().all(|f| f.symmetric() && f.log_concave() && !f.lattice()) => None,
            Law::Product(_) => Some("factors are not all symmetric continuous log-concave".into()),
            _ => Some("needs a product law".into()),
        }
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let v = ctx.moments()?.exp_neg_cramer;
        let c = laplace_constant()?.powi(ctx.law.dim() as i32);
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(c - v, 1.0, || format!("E e^-L*={v}, bound={c}"));
        Ok(o)
    }
}

// ---- expectation checks from the full report ----

struct CramerBelowOmega;
impl Check for CramerBelowOmega {
    fn name(&self) -> &'static str {
        "cramer_below_omega"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_depth(ctx).or_else(|| match ctx.law {
            Law::Radial(r) if r.point_mass().is_some() && r.dim() > 1 => {
                Some("both means are infinite on a sphere".into())
            }
            _ => None,
        })
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let s = ctx.stats()?;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(s.e_omega - s.e_cramer, 1.0 + s.e_omega, || {
            format!("E L*={}, E omega={}", s.e_cramer, s.e_omega)
        });
        Ok(o)
    }
}

/// Two-sided β/τ comparison at ε = 1/n.
struct BetaTau;
impl Check for BetaTau {
    fn name(&self) -> &'static str {
        "beta_tau"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_depth(ctx)
            .or_else(|| need_log_concave(ctx))
            .or_else(|| (ctx.law.dim() < 2).then(|| "eps = 1/n needs n >= 2".into()))
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let s = ctx.stats()?;
        let eps = 1.0 / ctx.law.dim() as f64;
        let b = beta_tau_bounds(s, eps, 0.0)?;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(b.beta_param - b.lower, 1.0, || format!("lower={}, beta={}", b.lower, b.beta_param));
        o.see(b.upper - b.beta_param, 1.0, || format!("upper={}, beta={}", b.upper, b.beta_param));
        Ok(o)
    }
}

// ---- rotation-invariant comparisons (on the isotropic copy) ----

fn tilt_grid(ctx: &CheckContext, cap: f64) -> Vec<f64> {
    let k = ctx.cfg.tilt_points;
    let r = ctx.iso.as_ref().unwrap();
    let end = cap.min(0.98 * r.tilt_bound() / r.scale()).min(10.0);
    (1..=k).map(|j| end * j as f64 / k as f64).collect()
}

/// Λ_X(t) ≥ Λ_{√n ϑ}(t).
struct SphereCumulantLower;
impl Check for SphereCumulantLower {
    fn name(&self) -> &'static str {
        "sphere_cumulant_lower"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_lc_radial(ctx).or_else(|| (ctx.law.dim() < 2).then(|| "needs n >= 2".into()))
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let r = ctx.iso.as_ref().unwrap();
        let n = r.dim();
        let cf = CumulantFn::radial(r);
        let mut o = Outcome::new(ctx.cfg.tol);
        for t in tilt_grid(ctx, f64::INFINITY) {
            let lx = cf.value(t)?;
            let ls = sphere_marginal_cumulant(n, (n as f64).sqrt() * t)?;
            o.see(lx - ls, 1.0 + lx.abs(), || format!("t={t}"));
        }
        Ok(o)
    }
}

/// Λ_X(t) ≤ Λ_ℰ(t).
struct ExpCumulantUpper;
impl Check for ExpCumulantUpper {
    fn name(&self) -> &'static str {
        "exp_cumulant_upper"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_lc_radial(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let r = ctx.iso.as_ref().unwrap();
        let n = r.dim();
        let cf = CumulantFn::radial(r);
        let mut o = Outcome::new(ctx.cfg.tol);
        for t in tilt_grid(ctx, 0.98 * ((n + 1) as f64).sqrt()) {
            let lx = cf.value(t)?;
            let le = radial_exp_marginal_cumulant(n, t)[0];
            o.see(le - lx, 1.0 + lx.abs(), || format!("t={t}"));
        }
        Ok(o)
    }
}

/// LC_conc: Λ_X(t) ≤ t²/2; LC_conv: Λ_X(t) ≥ t²/2.
struct GaussianCumulantOrder;
impl Check for GaussianCumulantOrder {
    fn name(&self) -> &'static str {
        "gaussian_cumulant_order"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_lc_radial(ctx).or_else(|| {
            let c = ctx.iso.as_ref().unwrap().classes();
            (!c.lc_conc && !c.lc_conv).then(|| "no LC_conc / LC_conv tag".into())
        })
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let r = ctx.iso.as_ref().unwrap();
        let c = r.classes();
        let cf = CumulantFn::radial(r);
        let mut o = Outcome::new(ctx.cfg.tol);
        for t in tilt_grid(ctx, f64::INFINITY) {
            let lx = cf.value(t)?;
            let g = 0.5 * t * t;
            if c.lc_conc {
                o.see(g - lx, 1.0 + lx.abs(), || format!("conc, t={t}"));
            }
            if c.lc_conv {
                o.see(lx - g, 1.0 + lx.abs(), || format!("conv, t={t}"));
            }
        }
        Ok(o)
    }
}

/// E e^{−Λ*_X} ≤ E e^{−Λ*_ℰ}.
struct ExpSeparabilityMax;
impl Check for ExpSeparabilityMax {
    fn name(&self) -> &'static str {
        "exp_separability_max"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_lc_radial(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let v = ctx.moments()?.exp_neg_cramer;
        let e = ctx.exp_reference()?.exp_neg_cramer;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(e - v, 1.0, || format!("X={v}, exp={e}"));
        Ok(o)
    }
}

/// E Λ*_X ≥ E Λ*_ℰ.
struct ExpMeanLower;
impl Check for ExpMeanLower {
    fn name(&self) -> &'static str {
        "exp_mean_lower"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_lc_radial(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let v = ctx.moments()?.e_cramer;
        let e = ctx.exp_reference()?.e_cramer;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(v - e, 1.0 + e, || format!("X={v}, exp={e}"));
        Ok(o)
    }
}

/// LC_conc: E e^{−Λ*} ≤ 2^{−n/2}; LC_conv: ≥.
struct GaussianSeparability;
impl Check for GaussianSeparability {
    fn name(&self) -> &'static str {
        "gaussian_separability"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        GaussianCumulantOrder.skip_reason(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let c = ctx.iso.as_ref().unwrap().classes();
        let v = ctx.moments()?.exp_neg_cramer;
        let g = 2f64.powf(-0.5 * ctx.law.dim() as f64);
        let mut o = Outcome::new(ctx.cfg.tol);
        if c.lc_conc {
            o.see(g - v, 1.0, || format!("conc: X={v}, gauss={g}"));
        }
        if c.lc_conv {
            o.see(v - g, 1.0, || format!("conv: X={v}, gauss={g}"));
        }
        Ok(o)
    }
}

/// E(|X|² − x)_+ against E(|G|² − x)_+ on a grid.
struct ConvexOrder;
impl Check for ConvexOrder {
    fn name(&self) -> &'static str {
        "convex_order"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        GaussianCumulantOrder.skip_reason(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let r = ctx.iso.as_ref().unwrap();
        let c = r.classes();
        let n = r.dim() as f64;
        let k = ctx.cfg.order_points;
        let top = n + 8.0 * (2.0 * n).sqrt() + 10.0;
        let mut o = Outcome::new(ctx.cfg.tol);
        for j in 0..k {
            let x = top * j as f64 / k as f64;
            let gx = n * reg_inc_gamma_q(0.5 * n + 1.0, 0.5 * x)? - x * reg_inc_gamma_q(0.5 * n, 0.5 * x)?;
            let xx = stop_loss_sq(r, x)?;
            if c.lc_conc {
                o.see(gx - xx, 1.0, || format!("conc, x={x}"));
            }
            if c.lc_conv {
                o.see(xx - gx, 1.0, || format!("conv, x={x}"));
            }
        }
        Ok(o)
    }
}

/// E(R² − x)_+.
fn stop_loss_sq(r: &RadialDistribution, x: f64) -> Result<f64> {
    if let Some(r0) = r.point_mass() {
        return Ok((r0 * r0 - x).max(0.0));
    }
    let a = x.sqrt();
    if a >= r.r_max() {
        return Ok(0.0);
    }
    let Some((lo, hi, _, at)) = log_window(&mut |s| r.ln_radial_density(s), a, r.r_max(), a.max(r.radial_moment(1.0)), 45.0)
    else {
        return Ok(0.0);
    };
    let q = integrate_vec(
        |s| {
            let f = r.ln_radial_density(s).exp();
            [(s * s - x) * f]
        },
        lo,
        hi,
        &[at],
        &QuadConfig::default(),
    )?;
    Ok(q.value[0])
}

/// Var Λ* ≤ 52n for LC_conv laws.
struct LcConvVariance;
impl Check for LcConvVariance {
    fn name(&self) -> &'static str {
        "lc_conv_variance"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        need_lc_radial(ctx).or_else(|| (!ctx.iso.as_ref().unwrap().classes().lc_conv).then(|| "not LC_conv".into()))
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let v = ctx.moments()?.var_cramer;
        let b = 52.0 * ctx.law.dim() as f64;
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(b - v, 1.0, || format!("var={v}"));
        Ok(o)
    }
}

/// (√2 − 1 + ln(2(√2 − 1)))(n+1)/2 ≤ E Λ* ≤ n/2 for LC_conv laws.
struct LcConvMean;
impl Check for LcConvMean {
    fn name(&self) -> &'static str {
        "lc_conv_mean"
    }
    fn skip_reason(&self, ctx: &CheckContext) -> Option<String> {
        LcConvVariance.skip_reason(ctx)
    }
    fn run(&self, ctx: &CheckContext) -> Result<Outcome> {
        let e = ctx.moments()?.e_cramer;
        let n = ctx.law.dim() as f64;
        let s = 2f64.sqrt() - 1.0;
        let lo = (s + (2.0 * s).ln()) * 0.5 * (n + 1.0);
        let mut o = Outcome::new(ctx.cfg.tol);
        o.see(e - lo, 1.0 + e, || format!("mean={e}, lower={lo}"));
        o.see(0.5 * n - e, 1.0 + e, || format!("mean={e}, upper={}", 0.5 * n));
        Ok(o)
    }
}
