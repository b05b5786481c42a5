//! Cumulant generating functions Λ(t) = ln E e^{tX} with derivatives.
//!
//! Radial laws are handled through their one-dimensional marginal X_1,
//! whose cumulant is ln E_R φ(tR) with φ the moment generating function of
//! a coordinate of the uniform law on the sphere.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::dist::{sphere_ln_mgf, RadialDistribution, ScalarDistribution};
use crate::error::{Error, Result};
use crate::quad::{integrate_vec, log_window, QuadConfig};
use crate::specfun::{ln_bessel_i_scaled_est, ln_gamma, log_sum_exp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    ClosedForm,
    Quadrature,
    BesselSeries,
    RadialMixture,
}

#[derive(Debug, Clone)]
pub enum Source {
    Scalar(ScalarDistribution),
    /// First coordinate of a rotation-invariant law.
    RadialMarginal(RadialDistribution),
}

/// Cumulant of a one-dimensional variable plus the evaluation route.
#[derive(Debug, Clone)]
pub struct CumulantFn {
    source: Source,
    mode: EvalMode,
    domain: (f64, f64),
}

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

impl CumulantFn {
    /// Default route: closed form when the family has one, else quadrature.
    pub fn scalar(s: &ScalarDistribution) -> Self {
        let mode = if s.cumulant(0.0).is_some() {
            EvalMode::ClosedForm
        } else {
            EvalMode::Quadrature
        };
        Self {
            domain: s.tilt_domain(),
            source: Source::Scalar(s.clone()),
            mode,
        }
    }

    pub fn scalar_with(s: &ScalarDistribution, mode: EvalMode) -> Result<Self> {
        match mode {
            EvalMode::ClosedForm if s.cumulant(0.0).is_none() => {
                Err(Error::Domain(format!("{} has no closed-form cumulant", s.name())))
            }
            EvalMode::ClosedForm | EvalMode::Quadrature => Ok(Self {
                domain: s.tilt_domain(),
                source: Source::Scalar(s.clone()),
                mode,
            }),
            _ => Err(Error::Domain(format!("{mode:?} applies to radial marginals only"))),
        }
    }

    /// Marginal of a radial law, closed form when known, otherwise the
    /// Bessel series (sphere) or the radial mixture.
    pub fn radial(r: &RadialDistribution) -> Self {
        let mode = if r.point_mass().is_some() {
            EvalMode::BesselSeries
        } else if r.profile().marginal_cumulant_closed(0.0).is_some() {
            EvalMode::ClosedForm
        } else if r.profile().marginal_ln_density_closed(0.0).is_some() {
            EvalMode::Quadrature
        } else {
            EvalMode::RadialMixture
        };
        Self::radial_unchecked(r, mode)
    }

    pub fn radial_with(r: &RadialDistribution, mode: EvalMode) -> Result<Self> {
        let ok = match mode {
            EvalMode::ClosedForm => r.profile().marginal_cumulant_closed(0.0).is_some(),
            EvalMode::BesselSeries => r.point_mass().is_some(),
            EvalMode::RadialMixture => true,
            EvalMode::Quadrature => r.point_mass().is_none(),
        };
        if !ok {
            return Err(Error::Domain(format!("{mode:?} unavailable for {}", r.name())));
        }
        Ok(Self::radial_unchecked(r, mode))
    }

    fn radial_unchecked(r: &RadialDistribution, mode: EvalMode) -> Self {
        let b = r.tilt_bound();
        Self {
            domain: (-b, b),
            source: Source::RadialMarginal(r.clone()),
            mode,
        }
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }
    pub fn source(&self) -> &Source {
        &self.source
    }
    /// Open interval where Λ is finite.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
    /// Closed convex hull of the support of the variable.
    pub fn support(&self) -> (f64, f64) {
        match &self.source {
            Source::Scalar(s) => s.support(),
            Source::RadialMarginal(r) => (-r.r_max(), r.r_max()),
        }
    }
    pub fn mean(&self) -> f64 {
        match &self.source {
            Source::Scalar(s) => s.mean(),
            Source::RadialMarginal(_) => 0.0,
        }
    }
    /// ln P(X = x).
    pub fn ln_atom(&self, x: f64) -> f64 {
        match &self.source {
            Source::Scalar(s) if s.lattice() => s.ln_density(x),
            Source::RadialMarginal(r) if r.dim() == 1 && r.point_mass().is_some() => {
                if x.abs() == r.point_mass().unwrap() {
                    -LN_2
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => f64::NEG_INFINITY,
        }
    }
    pub fn lattice(&self) -> bool {
        matches!(&self.source, Source::Scalar(s) if s.lattice())
    }

    /// Closed-form Λ* for this route, if any.
    pub(crate) fn closed_conjugate(&self, x: f64) -> Option<f64> {
        if self.mode != EvalMode::ClosedForm {
            return None;
        }
        match &self.source {
            Source::Scalar(s) => s.conjugate(x),
            Source::RadialMarginal(r) => r.profile().marginal_conjugate_closed(x / r.scale()),
        }
    }

    /// Λ(t), +inf outside the domain.
    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.derivs(t)?[0])
    }

    /// [Λ(t), Λ'(t), Λ''(t)]. Outside the domain returns [+inf, NaN, NaN].
    pub fn derivs(&self, t: f64) -> Result<[f64; 3]> {
        let (lo, hi) = self.domain;
        if !(t > lo && t < hi) && t != 0.0 {
            return Ok([f64::INFINITY, f64::NAN, f64::NAN]);
        }
        match (&self.source, self.mode) {
            (Source::Scalar(s), EvalMode::ClosedForm) => Ok(s.cumulant(t).expect("closed form checked")),
            (Source::Scalar(s), _) => scalar_quadrature(s, t),
            (Source::RadialMarginal(r), EvalMode::ClosedForm) => {
                let c = r.scale();
                let [l, d1, d2] = r.profile().marginal_cumulant_closed(c * t).expect("closed form checked");
                Ok([l, c * d1, c * c * d2])
            }
            (Source::RadialMarginal(r), EvalMode::Quadrature) => radial_marginal_quadrature(r, t),
            (Source::RadialMarginal(r), _) => radial_mixture(r, t),
        }
    }
}

/// Tilted moments by direct integration against the density (or sums over
/// the lattice).
fn scalar_quadrature(s: &ScalarDistribution, t: f64) -> Result<[f64; 3]> {
    let (a, b) = s.support();
    if s.lattice() {
        return lattice_sum(s, t);
    }
    let (e, span) = if t > 0.0 { (b, b - s.mean()) } else { (a, s.mean() - a) };
    if e.is_finite() && t.abs() * span > ENDPOINT_SWITCH {
        return endpoint_tilted(|x| s.ln_density(x), e, t, b - a);
    }
    let mut lf = |x: f64| s.ln_density(x) + t * x;
    let Some((lo, hi, peak, at)) = log_window(&mut lf, a, b, s.mean(), 45.0) else {
        return Err(Error::Quadrature(format!("empty integrand for {}", s.name())));
    };
    let q = integrate_vec(
        |x| {
            let w = (s.ln_density(x) + t * x - peak).exp();
            let w = if w.is_nan() { 0.0 } else { w };
            let y = x - at;
            [w, y * w, y * y * w]
        },
        lo,
        hi,
        &[at, s.median(), 0.0],
        &QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_panels: 10_000,
        },
    )?;
    let [m0, m1, m2] = q.value;
    let d1 = m1 / m0;
    Ok([peak + m0.ln(), at + d1, (m2 / m0 - d1 * d1).max(0.0)])
}

const ENDPOINT_SWITCH: f64 = 30.0;

/// Λ and its derivatives when a large tilt piles the mass against the
/// finite endpoint `e` it points to. Integrates over the distance d to e
/// with weight e^{-|t| d}, on panels refined geometrically toward e.
fn endpoint_tilted<F: Fn(f64) -> f64>(ln_f: F, e: f64, t: f64, width: f64) -> Result<[f64; 3]> {
    let dir = t.signum();
    let ta = t.abs();
    let g = |d: f64| ln_f(e - dir * d) - ta * d;
    let floor = 1e-6 / ta;
    let mut breaks = Vec::new();
    let mut d = width;
    while d > floor {
        breaks.push(d);
        d *= 0.5;
    }
    let shift = breaks
        .iter()
        .map(|d| g(*d))
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::Quadrature("empty tilted integrand".into()));
    }
    let q = integrate_vec(
        |d| {
            let w = (g(d) - shift).exp();
            let w = if w.is_nan() { 0.0 } else { w };
            [w, d * w, d * d * w]
        },
        0.0,
        width,
        &breaks,
        &QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_panels: 10_000,
        },
    )?;
    let [m0, m1, m2] = q.value;
    let md = m1 / m0;
    Ok([t * e + shift + m0.ln(), e - dir * md, (m2 / m0 - md * md).max(0.0)])
}

fn lattice_sum(s: &ScalarDistribution, t: f64) -> Result<[f64; 3]> {
    let (a, b) = s.support();
    let m = s.mean().round().clamp(a, b);
    let lw = |k: f64| s.ln_density(k) + t * k;
    let mut ks = vec![m];
    let mut best = lw(m);
    let mut k = m + 1.0;
    while k <= b {
        let v = lw(k);
        best = best.max(v);
        ks.push(k);
        if v < best - 45.0 {
            break;
        }
        k += 1.0;
        if ks.len() > 50_000_000 {
            return Err(Error::Quadrature("lattice sum did not terminate".into()));
        }
    }
    let mut k = m - 1.0;
    while k >= a {
        let v = lw(k);
        best = best.max(v);
        ks.push(k);
        if v < best - 45.0 {
            break;
        }
        k -= 1.0;
    }
    let ls: Vec<f64> = ks.iter().map(|k| lw(*k)).collect();
    let z = log_sum_exp(&ls);
    let mut m1 = 0.0;
    for (k, l) in ks.iter().zip(&ls) {
        m1 += (l - z).exp() * k;
    }
    let mut v = 0.0;
    for (k, l) in ks.iter().zip(&ls) {
        v += (l - z).exp() * (k - m1) * (k - m1);
    }
    Ok([z, m1, v])
}

/// Λ_{X_1} through the mixture over the radius.
fn radial_mixture(r: &RadialDistribution, t: f64) -> Result<[f64; 3]> {
    let n = r.dim();
    let ta = t.abs();
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    if let Some(r0) = r.point_mass() {
        let [l0, l1, l2] = sphere_ln_mgf(n, ta * r0);
        let d1 = r0 * (l1 - l0).exp();
        return Ok([l0, sign * d1, r0 * r0 * (l2 - l0).exp() - d1 * d1]);
    }
    if ta == 0.0 {
        return Ok([0.0, 0.0, r.second_moment() / n as f64]);
    }
    let mut l0 = |x: f64| r.ln_radial_density(x) + sphere_ln_mgf(n, ta * x)[0];
    let Some((lo, hi, peak, at)) = log_window(&mut l0, 0.0, r.r_max(), r.radial_moment(1.0), 45.0) else {
        return Err(Error::Quadrature("empty radial integrand".into()));
    };
    let q = integrate_vec(
        |x| {
            let d = r.ln_radial_density(x);
            if d == f64::NEG_INFINITY || x <= 0.0 {
                return [0.0; 3];
            }
            let [p0, p1, p2] = sphere_ln_mgf(n, ta * x);
            [
                (d + p0 - peak).exp(),
                x * (d + p1 - peak).exp(),
                x * x * (d + p2 - peak).exp(),
            ]
        },
        lo,
        hi,
        &[at],
        &cfg(),
    )?;
    let [m0, m1, m2] = q.value;
    let d1 = m1 / m0;
    Ok([peak + m0.ln(), sign * d1, (m2 / m0 - d1 * d1).max(0.0)])
}

/// Λ_{X_1} by integrating e^{ts} against the marginal density (closed form
/// when the profile has one, otherwise itself a quadrature, which is slow).
fn radial_marginal_quadrature(r: &RadialDistribution, t: f64) -> Result<[f64; 3]> {
    let rmax = r.r_max();
    if rmax.is_finite() && t.abs() * rmax > ENDPOINT_SWITCH {
        let e = rmax.copysign(t);
        return endpoint_tilted(|s| r.marginal_ln_density(s).unwrap_or(f64::NEG_INFINITY), e, t, 2.0 * rmax);
    }
    let mut lf = |s: f64| r.marginal_ln_density(s).unwrap_or(f64::NEG_INFINITY) + t * s;
    let Some((lo, hi, peak, at)) = log_window(&mut lf, -rmax, rmax, 0.0, 45.0) else {
        return Err(Error::Quadrature("empty marginal integrand".into()));
    };
    let q = integrate_vec(
        |s| {
            let w = (r.marginal_ln_density(s).unwrap_or(f64::NEG_INFINITY) + t * s - peak).exp();
            let y = s - at;
            [w, y * w, y * y * w]
        },
        lo,
        hi,
        &[at, 0.0],
        &QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_panels: 10_000,
        },
    )?;
    let [m0, m1, m2] = q.value;
    let d1 = m1 / m0;
    Ok([peak + m0.ln(), at + d1, (m2 / m0 - d1 * d1).max(0.0)])
}

/// Λ of a coordinate of the uniform law on S^{n-1}:
/// ln Γ(n/2) + ln[(t/2)^{-(n-2)/2} I_{(n-2)/2}(|t|)].
pub fn sphere_marginal_cumulant(n: usize, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere marginal cumulant needs n >= 2, got {n}")));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    let a = 0.5 * n as f64 - 1.0;
    Ok(ln_gamma(0.5 * n as f64) + ln_bessel_i_scaled_est(a, t)?.0)
}

/// ln E_R exp(Λ_ϑ(tR)) for a radial law.
pub fn radial_marginal_cumulant(r: &RadialDistribution, t: f64) -> Result<f64> {
    CumulantFn::radial_with(r, EvalMode::RadialMixture)?.value(t)
}

/// (Λ'(t), Λ''(t)): tilted mean and variance.
pub fn cumulant_derivs(cf: &CumulantFn, t: f64) -> Result<(f64, f64)> {
    let [_, d1, d2] = cf.derivs(t)?;
    if d1.is_nan() {
        return Err(Error::Domain(format!("t = {t} outside the cumulant domain {:?}", cf.domain())));
    }
    Ok((d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_examples() {
        assert!((sphere_marginal_cumulant(3, 2.0).unwrap() - (2f64.sinh() / 2.0).ln()).abs() < 1e-14);
        assert!((sphere_marginal_cumulant(3, 2.0).unwrap() - 0.595_220_192_054_223).abs() < 1e-12);
        assert!((sphere_marginal_cumulant(2, 1.0).unwrap() - 0.235_914).abs() < 1e-6);
    }

    #[test]
    fn radial_exp_mixture_example() {
        let r = RadialDistribution::radial_exp(5).unwrap();
        let v = radial_marginal_cumulant(&r, 1.0).unwrap();
        assert!((v + 3.0 * (5.0f64 / 6.0).ln()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn gamma_derivs() {
        let g = ScalarDistribution::gamma(2.5).unwrap();
        let cf = CumulantFn::scalar(&g);
        let (d1, d2) = cumulant_derivs(&cf, 0.3).unwrap();
        assert!((d1 - 2.5 / 0.7).abs() < 1e-14);
        assert!((d2 - 2.5 / 0.49).abs() < 1e-13);
    }
}
