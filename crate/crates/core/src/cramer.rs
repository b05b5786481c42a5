//! Legendre transform Λ*(x) = sup_t (tx − Λ(t)) and related diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cumulant::{CumulantFn, Source};
use crate::dist::{RadialDistribution, ScalarDistribution};
use crate::error::{Error, Result};
use crate::specfun::euler_gamma;

/// Λ*(x) with its maximising tilt. Both may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub value: f64,
    pub tilt: f64,
}

#[derive(Debug, Clone)]
pub struct CramerEvaluator {
    cf: CumulantFn,
    support: (f64, f64),
    mean: f64,
}

const MAX_STEPS: usize = 400;

impl CramerEvaluator {
    pub fn new(cf: CumulantFn) -> Self {
        Self {
            support: cf.support(),
            mean: cf.mean(),
            cf,
        }
    }
    pub fn scalar(s: &ScalarDistribution) -> Self {
        Self::new(CumulantFn::scalar(s))
    }
    /// Transform of the first coordinate of a radial law.
    pub fn radial(r: &RadialDistribution) -> Self {
        Self::new(CumulantFn::radial(r))
    }
    pub fn cumulant(&self) -> &CumulantFn {
        &self.cf
    }
    pub fn support(&self) -> (f64, f64) {
        self.support
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Λ*(x) only; uses a closed form when the source has one.
    pub fn value(&self, x: f64) -> Result<f64> {
        if let Some(v) = self.edge(x) {
            return Ok(v.value);
        }
        if let Some(v) = self.cf.closed_conjugate(x) {
            return Ok(v.max(0.0));
        }
        Ok(self.solve(x, None)?.value)
    }

    pub fn conjugate(&self, x: f64) -> Result<Conjugate> {
        self.conjugate_warm(x, None)
    }

    fn conjugate_warm(&self, x: f64, warm: Option<f64>) -> Result<Conjugate> {
        if let Some(v) = self.edge(x) {
            return Ok(v);
        }
        let mut c = self.solve(x, warm)?;
        if let Some(v) = self.cf.closed_conjugate(x) {
            c.value = v.max(0.0);
        }
        Ok(c)
    }

    /// Cases settled without root finding: outside the support, at an
    /// endpoint, at the mean.
    fn edge(&self, x: f64) -> Option<Conjugate> {
        let (lo, hi) = self.support;
        if x.is_nan() {
            return Some(Conjugate { value: f64::NAN, tilt: f64::NAN });
        }
        if x > hi || x < lo {
            let tilt = if x > hi { f64::INFINITY } else { f64::NEG_INFINITY };
            return Some(Conjugate { value: f64::INFINITY, tilt });
        }
        if x == hi || x == lo {
            let tilt = if x == hi { f64::INFINITY } else { f64::NEG_INFINITY };
            if hi == lo {
                return Some(Conjugate { value: 0.0, tilt: 0.0 });
            }
            return Some(Conjugate { value: -self.cf.ln_atom(x), tilt });
        }
        if x == self.mean {
            return Some(Conjugate { value: 0.0, tilt: 0.0 });
        }
        None
    }

    /// Safeguarded Newton on Λ'(t) = x inside a growing bracket.
    fn solve(&self, x: f64, warm: Option<f64>) -> Result<Conjugate> {
        let dir = if x > self.mean { 1.0 } else { -1.0 };
        let (tlo, thi) = self.cf.domain();
        let umax = if dir > 0.0 { thi } else { -tlo };
        let (slo, shi) = self.support;
        let room = if dir > 0.0 { shi - x } else { x - slo };
        let ftol = (1e-10 * (1.0 + x.abs())).min(1e-3 * room);

        // F(u) = dir·(Λ'(dir·u) − x) increases from F(0) < 0.
        let eval = |u: f64| -> Result<(f64, f64, f64)> {
            let [l, d1, d2] = self.cf.derivs(dir * u)?;
            if d1.is_nan() {
                return Err(Error::Domain(format!("tilt {} left the cumulant domain", dir * u)));
            }
            Ok((l, dir * (d1 - x), d2))
        };

        let mut lo = 0.0;
        let mut flo = dir * (self.mean - x);
        if let Some(w) = warm {
            let w = dir * w;
            if w > 0.0 && w < umax {
                let (_, f, _) = eval(w)?;
                if f <= 0.0 {
                    lo = w;
                    flo = f;
                }
            }
        }
        let mut step = lo.max(1.0);
        let (mut hi, fhi);
        let mut k = 0;
        loop {
            let mut cand = lo + step;
            if cand >= umax {
                cand = lo + 0.5 * (umax - lo);
            }
            let (_, f, _) = eval(cand)?;
            if f >= 0.0 {
                hi = cand;
                fhi = f;
                break;
            }
            lo = cand;
            flo = f;
            step *= 2.0;
            k += 1;
            if k > MAX_STEPS {
                return Err(Error::Domain(format!(
                    "no tilt bracket for x = {x}: Λ' stays below x up to t = {}",
                    dir * lo
                )));
            }
        }

        // secant start
        let mut u = if fhi > flo { lo - flo * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        if !(u > lo && u < hi) {
            u = 0.5 * (lo + hi);
        }
        let mut best = (f64::INFINITY, u, 0.0);
        for _ in 0..MAX_STEPS {
            let (l, f, d2) = eval(u)?;
            if f.abs() < best.0 {
                best = (f.abs(), u, l);
            }
            if f.abs() <= ftol {
                break;
            }
            if f < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
                break;
            }
            let newton = u - f / d2.max(f64::MIN_POSITIVE);
            u = if newton > lo && newton < hi && d2 > 0.0 {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        let (_, u, l) = best;
        let t = dir * u;
        Ok(Conjugate {
            value: (x * t - l).max(0.0),
            tilt: t,
        })
    }

    /// Pointwise transform on a sorted grid, warm-starting each tilt from its
    /// neighbour.
    pub fn conjugate_grid(&self, xs: &[f64]) -> Result<Vec<Conjugate>> {
        if xs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("conjugate grid must be sorted".into()));
        }
        let mut out = Vec::with_capacity(xs.len());
        let mut prev: Option<Conjugate> = None;
        // above the mean tilts grow with x, below they shrink toward 0, so
        // the warm start is taken from the neighbour nearer the mean
        let split = xs.partition_point(|x| *x < self.mean);
        let mut below = Vec::with_capacity(split);
        for x in xs[..split].iter().rev() {
            let c = self.conjugate_warm(*x, prev.map(|p| p.tilt).filter(|t| t.is_finite()))?;
            prev = Some(c);
            below.push(c);
        }
        below.reverse();
        out.extend(below);
        prev = None;
        for x in &xs[split..] {
            let c = self.conjugate_warm(*x, prev.map(|p| p.tilt).filter(|t| t.is_finite()))?;
            prev = Some(c);
            out.push(c);
        }
        Ok(out)
    }

    /// |sup_x (tx − Λ*(x)) − Λ(t)| over a grid around the tilted mean.
    pub fn biconjugate_residual(&self, t: f64) -> Result<f64> {
        let [l, d1, d2] = self.cf.derivs(t)?;
        if d1.is_nan() {
            return Err(Error::Domain(format!("t = {t} outside the cumulant domain")));
        }
        let sd = d2.sqrt().max(1e-8);
        let (slo, shi) = self.support;
        let mut xs: Vec<f64> = (0..=400)
            .map(|k| d1 + sd * (-4.0 + 8.0 * k as f64 / 400.0))
            .filter(|x| *x > slo && *x < shi)
            .collect();
        xs.push(d1);
        xs.sort_by(f64::total_cmp);
        let vals = self.conjugate_grid(&xs)?;
        let sup = xs
            .iter()
            .zip(&vals)
            .map(|(x, c)| t * x - c.value)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((sup - l).abs())
    }

    /// ln P(X >= x) for x above the mean, ln P(X <= x) below.
    fn ln_tail_toward(&self, x: f64) -> Result<f64> {
        let upper = x >= self.mean;
        Ok(match self.cf.source() {
            Source::Scalar(s) => {
                if upper {
                    s.ln_tail(x)
                } else {
                    s.ln_cdf(x)
                }
            }
            Source::RadialMarginal(r) => r.marginal_ln_tail(x.abs())?,
        })
    }

    /// −ln Z(x) / Λ*(x), the tail taken on the side of x away from the mean.
    pub fn condition_ratio(&self, x: f64) -> Result<f64> {
        let v = self.value(x)?;
        if v == 0.0 {
            return Err(Error::Domain(format!("condition ratio undefined at x = {x}: Λ*(x) = 0")));
        }
        let lz = self.ln_tail_toward(x)?;
        if lz == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("condition ratio undefined at x = {x}: zero tail")));
        }
        Ok(-lz / v)
    }

    /// Grid approaching the right end of the support: x* − (x* − m)2^{-k}
    /// for bounded support, m·2^{k/2} for unbounded (shifted by a standard
    /// deviation when the mean is not positive).
    pub fn ratio_scan_grid(&self, count: usize) -> Vec<f64> {
        let (_, hi) = self.support;
        let m = self.mean;
        (1..=count)
            .map(|k| {
                if hi.is_finite() {
                    hi - (hi - m) * 2f64.powi(-(k as i32))
                } else if m > 0.0 {
                    m * 2f64.powf(0.5 * k as f64)
                } else {
                    m + self.sd() * 2f64.powf(0.5 * k as f64)
                }
            })
            .collect()
    }

    fn sd(&self) -> f64 {
        self.cf.derivs(0.0).map(|d| d[2].sqrt()).unwrap_or(1.0)
    }

    pub fn ratio_scan(&self, count: usize) -> Vec<RatioPoint> {
        self.ratio_scan_grid(count)
            .into_iter()
            .map(|x| RatioPoint {
                x,
                ratio: self.condition_ratio(x).ok(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioPoint {
    pub x: f64,
    pub ratio: Option<f64>,
}

/// 2π e^{−γ−1/2}. Its logarithm, not the constant itself, equals the mean
/// of the transform of the uniform law on [−1, 1].
pub fn kappa() -> f64 {
    2.0 * PI * (-euler_gamma() - 0.5).exp()
}

/// Closed form of E Λ*_U(U) for U uniform on [−1, 1].
pub fn uniform_mean_transform() -> f64 {
    kappa().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_near_edge() {
        let u = ScalarDistribution::uniform(-1.0, 1.0).unwrap();
        let ev = CramerEvaluator::scalar(&u);
        let c = ev.conjugate(0.5).unwrap();
        let [_, d1, _] = ev.cumulant().derivs(c.tilt).unwrap();
        assert!((d1 - 0.5).abs() < 1e-10);
        assert!(ev.value(1.0 - 1e-9).unwrap().is_finite());
        assert_eq!(ev.value(1.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn poisson_left_endpoint() {
        let p = ScalarDistribution::poisson(2.0).unwrap();
        let ev = CramerEvaluator::scalar(&p);
        assert!((ev.value(0.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kappa_log() {
        assert!((uniform_mean_transform() - 0.760_661_401_507_813).abs() < 1e-13);
    }
}
