//! Adaptive Gauss–Kronrod (G7/K15) quadrature and bracketed root finding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_panels: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    pub abs_err: [f64; K],
    pub panels: usize,
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    val: [f64; K],
    err: [f64; K],
    score: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, o: &Self) -> bool {
        self.score == o.score
    }
}
impl<const K: usize> Eq for Panel<K> {}
impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.score.total_cmp(&o.score)
    }
}

fn gk15<const K: usize, F: FnMut(f64) -> [f64; K]>(f: &mut F, a: f64, b: f64) -> ([f64; K], [f64; K]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; K];
    let mut rg = [0.0; K];
    for k in 0..K {
        rk[k] = fc[k] * WGK[7];
        rg[k] = fc[k] * WG[3];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..K {
            let s = f1[k] + f2[k];
            rk[k] += WGK[j] * s;
            if j % 2 == 1 {
                rg[k] += WG[j / 2] * s;
            }
        }
    }
    let mut val = [0.0; K];
    let mut err = [0.0; K];
    for k in 0..K {
        val[k] = rk[k] * h;
        err[k] = ((rk[k] - rg[k]) * h).abs();
    }
    (val, err)
}

/// Adaptive integration of a vector-valued integrand over [a, b] split at
/// the given interior breakpoints. Every component must meet
/// `max(abs_tol, rel_tol |I_k|)`.
pub fn integrate_vec<const K: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult<K>>
where
    F: FnMut(f64) -> [f64; K],
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: [0.0; K],
            abs_err: [0.0; K],
            panels: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = vec![lo];
    let mut bs: Vec<f64> = breaks.iter().cloned().filter(|x| *x > lo && *x < hi).collect();
    bs.sort_by(f64::total_cmp);
    bs.dedup();
    pts.extend(bs);
    pts.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = [0.0; K];
    let mut total_err = [0.0; K];
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        for k in 0..K {
            total[k] += v[k];
            total_err[k] += e[k];
        }
        heap.push(Panel {
            a: w[0],
            b: w[1],
            val: v,
            err: e,
            score: 0.0,
        });
    }
    let tol = |tot: &[f64; K], k: usize| cfg.abs_tol.max(cfg.rel_tol * tot[k].abs());
    let rescore = |p: &mut Panel<K>, tot: &[f64; K]| {
        p.score = (0..K)
            .map(|k| p.err[k] / tol(tot, k))
            .fold(0.0, f64::max);
    };
    let mut v: Vec<Panel<K>> = heap.into_vec();
    for p in v.iter_mut() {
        rescore(p, &total);
    }
    let mut heap: BinaryHeap<Panel<K>> = v.into();
    let mut panels = heap.len();
    loop {
        let done = (0..K).all(|k| total_err[k] <= tol(&total, k));
        if done {
            break;
        }
        if panels >= cfg.max_panels {
            let worst = (0..K)
                .map(|k| total_err[k] / tol(&total, k))
                .fold(0.0, f64::max);
            // accept a near miss from roundoff-limited integrands
            if worst < 100.0 {
                break;
            }
            return Err(Error::Quadrature(format!(
                "panel budget {} exhausted on [{lo}, {hi}], err/tol = {worst:.3e}",
                cfg.max_panels
            )));
        }
        let p = heap.pop().expect("nonempty heap");
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // interval cannot be split further
            heap.push(Panel { score: 0.0, ..p });
            if heap.iter().all(|q| q.score == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        for k in 0..K {
            total[k] += v1[k] + v2[k] - p.val[k];
            total_err[k] += e1[k] + e2[k] - p.err[k];
        }
        let mut c1 = Panel { a: p.a, b: m, val: v1, err: e1, score: 0.0 };
        let mut c2 = Panel { a: m, b: p.b, val: v2, err: e2, score: 0.0 };
        rescore(&mut c1, &total);
        rescore(&mut c2, &total);
        heap.push(c1);
        heap.push(c2);
        panels += 1;
        if panels % 64 == 0 {
            // refresh totals and scores to limit drift
            let mut v: Vec<Panel<K>> = std::mem::take(&mut heap).into_vec();
            total = [0.0; K];
            total_err = [0.0; K];
            for p in &v {
                for k in 0..K {
                    total[k] += p.val[k];
                    total_err[k] += p.err[k];
                }
            }
            for p in v.iter_mut() {
                rescore(p, &total);
            }
            heap = v.into();
        }
    }
    let mut value = [0.0; K];
    let mut abs_err = [0.0; K];
    for p in heap.iter() {
        for k in 0..K {
            value[k] += p.val[k];
            abs_err[k] += p.err[k];
        }
    }
    for x in value.iter_mut() {
        *x *= sign;
    }
    Ok(QuadResult { value, abs_err, panels })
}

/// Scalar adaptive integration over a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    integrate_vec(|x| [f(x)], a, b, &[], cfg).map(|r| r.value[0])
}

/// Finite window [lo, hi] carrying all but a negligible part of
/// exp(ln_f) on (a, b), plus the log of the peak value and its location.
///
/// `cut` is the drop in log below the peak at which the integrand is
/// treated as zero.
pub fn log_window<F: FnMut(f64) -> f64>(
    ln_f: &mut F,
    a: f64,
    b: f64,
    hint: f64,
    cut: f64,
) -> Option<(f64, f64, f64, f64)> {
    let mut xs: Vec<f64> = Vec::new();
    let scale = if a.is_finite() && b.is_finite() { b - a } else { 1.0 + hint.abs() };
    let start = if hint > a && hint < b {
        hint
    } else if a.is_finite() && b.is_finite() {
        0.5 * (a + b)
    } else if a.is_finite() {
        a + scale
    } else if b.is_finite() {
        b - scale
    } else {
        0.0
    };
    xs.push(start);
    // coarse grid inside finite parts
    if a.is_finite() && b.is_finite() {
        for i in 0..=64 {
            xs.push(a + (b - a) * i as f64 / 64.0);
        }
    }
    let mut best_x = start;
    let mut best = f64::NEG_INFINITY;
    for &x in &xs {
        let v = ln_f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    // walk outward from the running peak until the integrand is negligible
    let walk = |ln_f: &mut F, dir: f64, best: &mut f64, best_x: &mut f64| -> f64 {
        let limit = if dir > 0.0 { b } else { a };
        let mut step = 0.01 * scale.max(1e-3);
        let mut x = *best_x;
        loop {
            let nx = x + dir * step;
            if (dir > 0.0 && nx >= limit) || (dir < 0.0 && nx <= limit) {
                return limit;
            }
            let v = ln_f(nx);
            if v > *best {
                *best = v;
                *best_x = nx;
            }
            x = nx;
            if v < *best - cut {
                return x;
            }
            step *= 1.6;
            if step > 1e12 {
                return x;
            }
        }
    };
    let mut hi = walk(ln_f, 1.0, &mut best, &mut best_x);
    let mut lo = walk(ln_f, -1.0, &mut best, &mut best_x);
    // walks may have moved the peak; redo once from the new peak
    let hi2 = walk(ln_f, 1.0, &mut best, &mut best_x);
    let lo2 = walk(ln_f, -1.0, &mut best, &mut best_x);
    hi = hi.max(hi2);
    lo = lo.min(lo2);
    if best == f64::NEG_INFINITY || best.is_nan() {
        return None;
    }
    Some((lo, hi, best, best_x))
}

/// ln ∫_a^b exp(ln_f(x)) dx for a possibly infinite interval, integrating
/// exp(ln_f - peak) on a truncated window.
pub fn integrate_log<F: FnMut(f64) -> f64>(
    mut ln_f: F,
    a: f64,
    b: f64,
    hint: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let Some((lo, hi, peak, at)) = log_window(&mut ln_f, a, b, hint, 45.0) else {
        return Ok(f64::NEG_INFINITY);
    };
    let r = integrate_vec(
        |x| {
            let v = ln_f(x) - peak;
            [if v.is_nan() { 0.0 } else { v.exp() }]
        },
        lo,
        hi,
        &[at],
        &QuadConfig {
            abs_tol: cfg.abs_tol.min(1e-14),
            ..*cfg
        },
    )?;
    Ok(peak + r.value[0].ln())
}

/// Root of a monotone function g on a bracket [lo, hi] where g(lo) and
/// g(hi) have opposite signs. Illinois-modified regula falsi with a
/// bisection safeguard.
pub fn monotone_root<F: FnMut(f64) -> f64>(mut g: F, mut lo: f64, mut hi: f64, xtol: f64, ftol: f64) -> Result<f64> {
    let mut glo = g(lo);
    let mut ghi = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::Domain(format!("root not bracketed on [{lo}, {hi}]")));
    }
    let mut side = 0i32;
    for it in 0..400 {
        let mut x = (lo * ghi - hi * glo) / (ghi - glo);
        if !(x > lo && x < hi) || it % 4 == 3 {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x);
        if gx.abs() <= ftol || (hi - lo) <= xtol {
            return Ok(x);
        }
        if gx.signum() == glo.signum() {
            lo = x;
            glo = gx;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            ghi = gx;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}
