//! Real-argument Gamma/Beta machinery, `3F2` at unit argument, and the norm ladder
//! constants built from them.
//!
//! Every factorial ratio goes through [`ln_gamma_ratio`] and is exponentiated once, so
//! nothing here overflows for the orders the library deals with.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Hard cap on the number of `3F2` terms.
pub const F32_TERM_CAP: usize = 1_000_000;

/// Default tolerance (relative to `max(1, |value|)`) above which a capped series is
/// reported as saturated.
pub const F32_DEFAULT_TOLERANCE: f64 = 1e-12;

/// A summed series together with its convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms_used: usize,
    /// Bound on the discarded remainder; `f64::INFINITY` when no bound is available.
    pub tail_estimate: f64,
    /// Set when the term cap was hit with `tail_estimate` above the requested tolerance.
    pub saturated: bool,
}

// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// `zeta(k) - 1` for `k = 2..=ZETA_TERMS+1`, by a short direct sum plus an
/// Euler-Maclaurin tail.
fn zeta_minus_one_table() -> &'static [f64] {
    const ZETA_TERMS: usize = 48;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (2..ZETA_TERMS + 2)
            .map(|k| {
                let kf = k as f64;
                let a = 20.0_f64;
                let mut head = 0.0;
                for n in (2..20).rev() {
                    head += (n as f64).powf(-kf);
                }
                let mut tail = a.powf(1.0 - kf) / (kf - 1.0) + 0.5 * a.powf(-kf);
                // rising factorial k (k+1) ... (k+2j-2) / (2j)!
                let mut rising = kf;
                let mut fact = 2.0;
                for (j, b) in BERNOULLI.iter().take(6).enumerate() {
                    let j = j + 1;
                    tail += b / fact * rising * a.powf(-kf - (2 * j) as f64 + 1.0);
                    let (m1, m2) = ((2 * j - 1) as f64, (2 * j) as f64);
                    rising *= (kf + m1) * (kf + m2);
                    fact *= (m2 + 1.0) * (m2 + 2.0);
                }
                head + tail
            })
            .collect()
    })
}

/// `ln Gamma(1 + eps)` for `|eps| <= 0.5`.
fn ln_gamma_1p(eps: f64) -> f64 {
    let table = zeta_minus_one_table();
    let mut sum = 0.0;
    let mut pow = -eps;
    for (i, zm1) in table.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -eps;
        let term = zm1 * pow / k;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -eps.ln_1p() + eps * (1.0 - EULER_GAMMA) + sum
}

fn stirling_series(x: f64) -> f64 {
    let inv = x.recip();
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut s = 0.0;
    for (k, b) in BERNOULLI.iter().take(8).enumerate() {
        let two_k = (2 * (k + 1)) as f64;
        s += b / (two_k * (two_k - 1.0)) * pow;
        pow *= inv2;
    }
    s
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_unchecked(x + 1.0) - x.ln()
    } else if x < 1.5 {
        ln_gamma_1p(x - 1.0)
    } else if x < 2.5 {
        (x - 1.0).ln() + ln_gamma_1p(x - 2.0)
    } else if x < 12.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        prod.ln() + ln_gamma_unchecked(y)
    } else {
        (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + stirling_series(x)
    }
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::param(
            "x",
            format!("log_gamma requires x > 0, got {x}"),
        ));
    }
    Ok(ln_gamma_unchecked(x))
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// `ln Gamma(x + a) - ln Gamma(x + b)` without forming the two large logarithms when
/// `x` is large.
pub fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> Result<f64> {
    let (ya, yb) = (x + a, x + b);
    if !(ya > 0.0 && yb > 0.0) {
        return Err(Error::param(
            "x",
            format!("gamma ratio needs positive arguments, got {ya} and {yb}"),
        ));
    }
    if ya.min(yb) < 15.0 || x <= 0.0 {
        return Ok(ln_gamma_unchecked(ya) - ln_gamma_unchecked(yb));
    }
    // (y - 1/2) ln y - y for y = x + a, with ln y = ln x + ln(1 + a/x).
    let part = |c: f64| (x + c - 0.5) * (c / x).ln_1p();
    Ok((a - b) * x.ln() + part(a) - part(b) - (a - b) + stirling_series(ya) - stirling_series(yb))
}

/// `ln B(p, q)`.
pub fn ln_beta(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::param(
            "p/q",
            format!("beta requires p, q > 0, got {p}, {q}"),
        ));
    }
    Ok(ln_gamma_unchecked(p) + ln_gamma_unchecked(q) - ln_gamma_unchecked(p + q))
}

/// `B(p, q) = Gamma(p) Gamma(q) / Gamma(p + q)`.
pub fn beta_fn(p: f64, q: f64) -> Result<f64> {
    ln_beta(p, q).map(f64::exp)
}

/// Parameters of `3F2(a1, a2, a3; b1, b2; 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypParams {
    pub a: [f64; 3],
    pub b: [f64; 2],
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

impl HypParams {
    pub fn new(a: [f64; 3], b: [f64; 2]) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("a/b", "parameters must be finite"));
        }
        if b.iter().any(|&v| is_nonpositive_integer(v)) {
            return Err(Error::param(
                "b",
                format!("lower parameters {b:?} include a non-positive integer"),
            ));
        }
        Ok(Self { a, b })
    }

    /// Convergence margin `b1 + b2 - a1 - a2 - a3`.
    pub fn margin(&self) -> f64 {
        self.b.iter().sum::<f64>() - self.a.iter().sum::<f64>()
    }

    fn terminates(&self) -> bool {
        self.a.iter().any(|&v| is_nonpositive_integer(v))
    }
}

/// Direct summation of the `3F2` series at unit argument.
///
/// Stops once `|term_k| < 1e-16 |partial|` with `k >= 20`, or at [`F32_TERM_CAP`] terms.
/// The tail bound is the geometric estimate `|term_k| r / (1 - r)` from the last term
/// ratio `r`, or infinity when `r >= 1`.
pub fn f32_unit_direct(h: &HypParams, tolerance: f64) -> Result<SeriesValue> {
    let margin = h.margin();
    if !h.terminates() && margin <= 0.0 {
        return Err(Error::Divergent { margin });
    }
    let [a1, a2, a3] = h.a;
    let [b1, b2] = h.b;
    let mut term = 1.0_f64;
    let mut prev = f64::NAN;
    // Neumaier-compensated partial sum.
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    let mut k = 0usize;
    loop {
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        let partial = sum + comp;
        if k >= 20 && term.abs() < 1e-16 * partial.abs() {
            break;
        }
        if k + 1 >= F32_TERM_CAP {
            break;
        }
        let kf = k as f64;
        prev = term;
        term *= (a1 + kf) * (a2 + kf) * (a3 + kf) / ((b1 + kf) * (b2 + kf) * (kf + 1.0));
        k += 1;
    }
    let value = sum + comp;
    let tail_estimate = if term == 0.0 {
        0.0
    } else {
        let r = (term / prev).abs();
        if r.is_finite() && r < 1.0 {
            // The geometric estimate undercounts an algebraic tail ~ k^{-1-s}; the
            // integral estimate |term| (k+1)/s covers it.
            let geometric = term.abs() * r / (1.0 - r);
            let algebraic = if margin > 0.0 {
                term.abs() * (k as f64 + 1.0) / margin
            } else {
                0.0
            };
            geometric.max(algebraic)
        } else {
            f64::INFINITY
        }
    };
    let capped = k + 1 >= F32_TERM_CAP;
    Ok(SeriesValue {
        value,
        terms_used: k + 1,
        tail_estimate,
        saturated: capped && tail_estimate > tolerance * value.abs().max(1.0),
    })
}

/// `3F2(a1, a2, a3; b1, b2; 1)`.
///
/// When one upper parameter exceeds the convergence margin, the series is first moved
/// through Thomae's relation
/// `3F2(a,b,c;d,e;1) = Γ(d)Γ(e)Γ(s) / (Γ(a)Γ(s+b)Γ(s+c)) · 3F2(d-a, e-a, s; s+b, s+c; 1)`,
/// whose margin is `a`, and the transformed series is summed directly.
pub fn f32_unit(h: &HypParams) -> Result<SeriesValue> {
    f32_unit_with_tolerance(h, F32_DEFAULT_TOLERANCE)
}

pub fn f32_unit_with_tolerance(h: &HypParams, tolerance: f64) -> Result<SeriesValue> {
    let s = h.margin();
    if h.terminates() {
        return f32_unit_direct(h, tolerance);
    }
    if s <= 0.0 {
        return Err(Error::Divergent { margin: s });
    }
    let [d, e] = h.b;
    // A transformed series is worth it if it terminates or converges faster.
    let quality = |i: usize| {
        let a = h.a[i];
        if is_nonpositive_integer(d - a) || is_nonpositive_integer(e - a) {
            f64::INFINITY
        } else {
            a
        }
    };
    let best = (0..3)
        .filter(|&i| {
            let a = h.a[i];
            let (b, c) = (h.a[(i + 1) % 3], h.a[(i + 2) % 3]);
            quality(i) > s && a > 0.0 && d > 0.0 && e > 0.0 && s + b > 0.0 && s + c > 0.0
        })
        .max_by(|&i, &j| quality(i).total_cmp(&quality(j)));
    let Some(i) = best else {
        return f32_unit_direct(h, tolerance);
    };
    let a = h.a[i];
    let (b, c) = (h.a[(i + 1) % 3], h.a[(i + 2) % 3]);
    let ln_pref = ln_gamma_unchecked(d) + ln_gamma_unchecked(e) + ln_gamma_unchecked(s)
        - ln_gamma_unchecked(a)
        - ln_gamma_unchecked(s + b)
        - ln_gamma_unchecked(s + c);
    let pref = ln_pref.exp();
    let inner = HypParams::new([d - a, e - a, s], [s + b, s + c])?;
    let series = f32_unit_direct(&inner, tolerance / pref.max(1e-300))?;
    Ok(SeriesValue {
        value: pref * series.value,
        terms_used: series.terms_used,
        tail_estimate: pref * series.tail_estimate,
        saturated: series.saturated,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::param(
            "alpha",
            format!("weight exponent must exceed -1 (got {alpha}); alpha = -1 is the Hardy case"),
        ));
    }
    Ok(())
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("N", "order must be at least 1"));
    }
    Ok(())
}

/// `c_{N,alpha} = Γ(N+1)/Γ(N+2+α) · 3F2(N+1, N, N; 2N, N+2+α; 1)`.
pub fn c_alpha(n: usize, alpha: f64) -> Result<SeriesValue> {
    check_order(n)?;
    check_alpha(alpha)?;
    let nf = n as f64;
    let h = HypParams::new([nf + 1.0, nf, nf], [2.0 * nf, nf + 2.0 + alpha])?;
    let series = f32_unit(&h)?;
    let pref = ln_gamma_ratio(nf, 1.0, 2.0 + alpha)?.exp();
    Ok(SeriesValue {
        value: pref * series.value,
        tail_estimate: pref * series.tail_estimate,
        ..series
    })
}

/// Squared-norm ratio `‖φ_{N+m}‖² / ‖ψ‖²` of the ladder of associated differentials:
/// `(2N-1)! / ((N-1)!)² · ((N+m-1)!)² / (m! (2N+m-1)!)`.
pub fn norm_ratio(n: usize, m: usize) -> f64 {
    assert!(n >= 1, "norm_ratio requires N >= 1");
    let (nf, mf) = (n as f64, m as f64);
    let head = ln_gamma_unchecked(2.0 * nf) - 2.0 * ln_gamma_unchecked(nf);
    // Γ(N+m)/Γ(m+1) · Γ(N+m)/Γ(2N+m), both as ratios at base m.
    let r1 = ln_gamma_ratio(mf, nf, 1.0).expect("positive arguments");
    let r2 = ln_gamma_ratio(mf, nf, 2.0 * nf).expect("positive arguments");
    (head + r1 + r2).exp()
}

/// Fiber weight `Γ(n+1)/Γ(n+2+α)` of the fiberwise norm expansion.
pub fn fiber_weight(n: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(ln_gamma_ratio(n as f64, 1.0, 2.0 + alpha)?.exp())
}

/// The `alpha -> -1` limit of [`fiber_weight`], identically one.
pub fn hardy_weight(_n: usize) -> f64 {
    1.0
}

/// Ladder partial sum `Σ_{m=0..M} fiber_weight(N+m, α) · norm_ratio(N, m)`.
///
/// This is the term-by-term route to `c_{N,alpha}`, independent of the `3F2` evaluation.
/// The tail estimate integrates the `m^{-2-α}` decay of the last term.
pub fn moment_sum(n: usize, alpha: f64, terms: usize) -> Result<SeriesValue> {
    moment_sum_with(n, alpha, terms, norm_ratio)
}

/// [`moment_sum`] with the ladder ratio supplied by the caller.
pub fn moment_sum_with(
    n: usize,
    alpha: f64,
    terms: usize,
    ratio: impl Fn(usize, usize) -> f64,
) -> Result<SeriesValue> {
    check_order(n)?;
    check_alpha(alpha)?;
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    let mut last = 0.0;
    for m in 0..=terms {
        let term = fiber_weight(n + m, alpha)? * ratio(n, m);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        last = term;
    }
    let tail_estimate = if terms == 0 {
        f64::INFINITY
    } else {
        last * terms as f64 / (1.0 + alpha)
    };
    Ok(SeriesValue {
        value: sum + comp,
        terms_used: terms + 1,
        tail_estimate,
        saturated: false,
    })
}

/// Limit of the ladder sum by Richardson extrapolation of [`moment_sum`] over
/// `M, 2M, 4M, 8M, 16M`, eliminating the remainder exponents `1+α, 2+α, 3+α, 4+α`.
///
/// The returned tail estimate is the size of the last elimination step.
pub fn moment_limit(n: usize, alpha: f64, terms: usize) -> Result<SeriesValue> {
    moment_limit_with(n, alpha, terms, norm_ratio)
}

pub fn moment_limit_with(
    n: usize,
    alpha: f64,
    terms: usize,
    ratio: impl Fn(usize, usize) -> f64 + Copy,
) -> Result<SeriesValue> {
    const LEVELS: usize = 5;
    if terms < 16 {
        return Err(Error::param(
            "M",
            "extrapolation needs at least 16 base terms",
        ));
    }
    let mut table = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        table.push(moment_sum_with(n, alpha, terms << level, ratio)?.value);
    }
    let mut last_step = f64::INFINITY;
    for j in 0..LEVELS - 1 {
        let factor = 2f64.powf(1.0 + alpha + j as f64);
        let next: Vec<f64> = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        last_step = (next[next.len() - 1] - table[table.len() - 1]).abs();
        table = next;
    }
    Ok(SeriesValue {
        value: table[0],
        terms_used: (terms << (LEVELS - 1)) + 1,
        tail_estimate: last_step,
        saturated: false,
    })
}

/// `E_{N,m} = N + (N+1) + ... + (N+m-1) = m (2N + m - 1) / 2`.
pub fn eigenvalue(n: usize, m: usize) -> f64 {
    (m as f64) * (2.0 * n as f64 + m as f64 - 1.0) / 2.0
}

/// Limit of `m · norm_ratio(N, m)` as `m -> ∞`, namely `(2N-1)! / ((N-1)!)²`.
pub fn norm_ratio_decay_constant(n: usize) -> f64 {
    let nf = n as f64;
    (ln_gamma_unchecked(2.0 * nf) - 2.0 * ln_gamma_unchecked(nf)).exp()
}

/// Constant term `Γ(α+2) / (π² (4g - 4))` of the weighted Bergman kernel on a genus `g`
/// quotient.
pub fn kernel_constant(alpha: f64, genus: u32) -> Result<f64> {
    check_alpha(alpha)?;
    if genus < 2 {
        return Err(Error::param(
            "genus",
            format!("genus must be at least 2, got {genus}"),
        ));
    }
    Ok(gamma(alpha + 2.0)? / (PI * PI * (4.0 * genus as f64 - 4.0)))
}
