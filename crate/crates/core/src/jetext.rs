//! The jet extension operator, its Taylor coefficients at the origin, Cauchy extraction of
//! fiber jets, and finite-difference residuals for the differential identities it satisfies.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fuchsian::{self, GeneratorSet, GroupBall};
use crate::mobius::{DiskPoint, MobiusTransform, PointPair, DISK_MARGIN};
use crate::quadrature::QuadratureSpec;
use crate::specfun::ln_beta;

/// Below this separation `extend` returns zero for `N >= 1`.
pub const DIAGONAL_CUTOFF: f64 = 1e-12;
/// Smallest finite-difference step accepted by the residual checkers.
pub const MIN_STEP: f64 = 1e-8;
pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_BOX_STEP: f64 = 1e-3;
pub const DEFAULT_JET_NODES: usize = 256;
/// `jet_extract` fails when the sampled function exceeds this magnitude.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// A density `τ ↦ ψ(τ)` supplied by the caller. Must tolerate concurrent calls.
pub type Density = dyn Fn(Complex64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub enum Body {
    /// `ψ(τ) = Σ c_k τ^k`.
    PowerSeries(Vec<Complex64>),
    /// Truncated Poincaré series `Σ_γ γ'(τ)^N` over a word-length ball.
    Poincare(Arc<GroupBall>),
    Evaluator(Arc<Density>),
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::PowerSeries(c) => f.debug_tuple("PowerSeries").field(c).finish(),
            Body::Poincare(b) => write!(f, "Poincare({} elements)", b.len()),
            Body::Evaluator(_) => f.write_str("Evaluator(..)"),
        }
    }
}

/// `ψ(τ) (dτ)^N` on the disk.
#[derive(Debug, Clone)]
pub struct NDifferential {
    order: usize,
    body: Body,
}

impl NDifferential {
    pub fn new(order: usize, body: Body) -> Self {
        Self { order, body }
    }

    pub fn power_series(order: usize, coeffs: Vec<Complex64>) -> Self {
        Self::new(order, Body::PowerSeries(coeffs))
    }

    /// `τ^k (dτ)^N`.
    pub fn monomial(order: usize, k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self::power_series(order, c)
    }

    pub fn poincare(order: usize, ball: Arc<GroupBall>) -> Self {
        Self::new(order, Body::Poincare(ball))
    }

    pub fn evaluator<F>(order: usize, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(order, Body::Evaluator(Arc::new(f)))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn coeffs(&self) -> Option<&[Complex64]> {
        match &self.body {
            Body::PowerSeries(c) => Some(c),
            _ => None,
        }
    }

    /// Set when the body is a Poincaré series of an order where it does not converge.
    pub fn convergence_warning(&self) -> Option<String> {
        match self.body {
            Body::Poincare(_) if self.order < 2 => Some(format!(
                "Poincare series of order {} does not converge; values are partial sums",
                self.order
            )),
            _ => None,
        }
    }

    /// Density value `ψ(τ)`.
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        match &self.body {
            Body::PowerSeries(c) => horner(c, tau),
            Body::Poincare(ball) => fuchsian::density_shells(ball, self.order, tau).0,
            Body::Evaluator(f) => f(tau),
        }
    }

    /// `γ*ψ`, with density `ψ(γτ) γ'(τ)^N`.
    pub fn pullback(&self, g: &MobiusTransform) -> Self {
        let (inner, g, n) = (self.clone(), *g, self.order as u32);
        Self::evaluator(self.order, move |tau| {
            inner.eval(g.apply_complex(tau)) * g.derivative(tau).powu(n)
        })
    }

    /// `a·self + b·other`; both must have the same order.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::param(
                "order",
                format!("cannot combine orders {} and {}", self.order, other.order),
            ));
        }
        if let (Some(p), Some(q)) = (self.coeffs(), other.coeffs()) {
            let zero = Complex64::new(0.0, 0.0);
            let len = p.len().max(q.len());
            let c = (0..len)
                .map(|k| a * p.get(k).unwrap_or(&zero) + b * q.get(k).unwrap_or(&zero))
                .collect();
            return Ok(Self::power_series(self.order, c));
        }
        let (p, q) = (self.clone(), other.clone());
        Ok(Self::evaluator(self.order, move |t| {
            a * p.eval(t) + b * q.eval(t)
        }))
    }

    pub fn scaled(&self, a: f64) -> Self {
        match &self.body {
            Body::PowerSeries(c) => {
                Self::power_series(self.order, c.iter().map(|x| x * a).collect())
            }
            _ => {
                let p = self.clone();
                Self::evaluator(self.order, move |t| p.eval(t) * a)
            }
        }
    }

    /// Parses the differential JSON form. Relative `generators_ref` paths resolve against
    /// `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let cfg: DifferentialConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!(
                "differential config, line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        cfg.resolve(base_dir)
    }
}

fn horner(c: &[Complex64], tau: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * tau + ck)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferentialKind {
    PowerSeries,
    Poincare,
}

/// Serialized form of an [`NDifferential`]. Kept flat so parse errors carry positions.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferentialConfig {
    pub kind: DifferentialKind,
    pub order: usize,
    #[serde(default)]
    pub coeffs: Option<Vec<Complex64>>,
    #[serde(default)]
    pub word_length: Option<usize>,
    #[serde(default)]
    pub generators_ref: Option<PathBuf>,
}

impl DifferentialConfig {
    pub fn resolve(&self, base_dir: &Path) -> Result<NDifferential> {
        let missing = |field: &str| {
            Error::Config(format!(
                "{:?} differential needs field `{field}`",
                self.kind
            ))
        };
        match self.kind {
            DifferentialKind::PowerSeries => {
                let coeffs = self.coeffs.as_ref().ok_or_else(|| missing("coeffs"))?;
                if coeffs
                    .iter()
                    .any(|c| !c.re.is_finite() || !c.im.is_finite())
                {
                    return Err(Error::Config("coeffs must be finite".into()));
                }
                Ok(NDifferential::power_series(self.order, coeffs.clone()))
            }
            DifferentialKind::Poincare => {
                let len = self.word_length.ok_or_else(|| missing("word_length"))?;
                let rel = self
                    .generators_ref
                    .as_ref()
                    .ok_or_else(|| missing("generators_ref"))?;
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let gens = GeneratorSet::from_json(&text)?;
                let ball = fuchsian::enumerate(&gens, len)?;
                Ok(NDifferential::poincare(self.order, Arc::new(ball)))
            }
        }
    }
}

/// `I(ψ)(z, w) = (w-z)^N ∫₀¹ ψ(z + s(w-z)) β_N(ds)` with `β_N` the Beta(N, N) law.
///
/// Order 0 returns `ψ(z)`, the constant for a constant density.
pub fn extend(psi: &NDifferential, p: &PointPair, q: &QuadratureSpec) -> Result<Complex64> {
    extend_complex(psi, p.z.value(), p.w.value(), q)
}

/// [`extend`] on raw coordinates, which must lie in the disk.
pub fn extend_complex(
    psi: &NDifferential,
    z: Complex64,
    w: Complex64,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    let n = psi.order;
    if n == 0 {
        return Ok(psi.eval(z));
    }
    let d = w - z;
    let r = d.norm();
    if r < DIAGONAL_CUTOFF {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let nf = n as f64;
    let ln_scale = nf * r.ln() - ln_beta(nf, nf)?;
    let phase = Complex64::from_polar(1.0, nf * d.arg());
    let mut acc = Complex64::new(0.0, 0.0);
    for &(s, wt) in q.points() {
        let ln_w = wt.ln() + (nf - 1.0) * (s.ln() + (-s).ln_1p()) + ln_scale;
        acc += psi.eval(z + d * s) * ln_w.exp();
    }
    Ok(acc * phase)
}

/// `I(ψ)(z, w)` by integrating `ψ(τ) ((w-τ)(τ-z)/(w-z))^{N-1} dτ / B(N, N)` along the
/// polygon `z → waypoints → w`. For holomorphic ψ the result does not depend on the path.
pub fn extend_along(
    psi: &NDifferential,
    z: Complex64,
    waypoints: &[Complex64],
    w: Complex64,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    let n = psi.order;
    if n == 0 {
        return Ok(psi.eval(z));
    }
    let d = w - z;
    if d.norm() < DIAGONAL_CUTOFF {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let nf = n as f64;
    let norm = (-ln_beta(nf, nf)?).exp();
    let mut vertices = Vec::with_capacity(waypoints.len() + 2);
    vertices.push(z);
    vertices.extend_from_slice(waypoints);
    vertices.push(w);
    let mut acc = Complex64::new(0.0, 0.0);
    for leg in vertices.windows(2) {
        let (a, b) = (leg[0], leg[1]);
        let step = b - a;
        for &(s, wt) in q.points() {
            let tau = a + step * s;
            let bracket = ((w - tau) * (tau - z) / d).powu(n as u32 - 1);
            acc += psi.eval(tau) * bracket * step * wt;
        }
    }
    Ok(acc * norm)
}

/// Taylor coefficients `f_{N+m}(0)`, `m = 0..=M`, of `w ↦ I(ψ)(0, w)`:
/// `Γ(2N)Γ(N+m) / (Γ(N)Γ(2N+m)) · c_m`.
pub fn taylor_at_zero(psi: &NDifferential, m_max: usize) -> Result<Vec<Complex64>> {
    let c = psi.coeffs().ok_or(Error::UnsupportedBody)?;
    let n = psi.order;
    let zero = Complex64::new(0.0, 0.0);
    let coeff = |m: usize| *c.get(m).unwrap_or(&zero);
    if n == 0 {
        let mut out = vec![zero; m_max + 1];
        out[0] = coeff(0);
        return Ok(out);
    }
    Ok((0..=m_max)
        .map(|m| coeff(m) * taylor_factor(n, m))
        .collect())
}

/// `Γ(2N)Γ(N+m) / (Γ(N)Γ(2N+m)) = Π_{j<N} (N+j)/(N+m+j)`, accumulated as an exact integer
/// ratio while it fits in the mantissa.
fn taylor_factor(n: usize, m: usize) -> f64 {
    const EXACT: f64 = 9.0e15;
    let (mut num, mut den, mut ratio) = (1.0f64, 1.0f64, 1.0f64);
    for j in 0..n {
        let (a, b) = ((n + j) as f64, (n + m + j) as f64);
        if den * b > EXACT {
            ratio *= num / den;
            num = 1.0;
            den = 1.0;
        }
        num *= a;
        den *= b;
    }
    ratio * (num / den)
}

/// A truncated power series value with the magnitude of its last term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSum {
    pub value: Complex64,
    pub last_term: f64,
}

/// `Σ_{m=0..=M} f_{N+m}(0) w^{N+m}`.
pub fn eval_series_at_zero(
    psi: &NDifferential,
    w: DiskPoint,
    m_max: usize,
) -> Result<TruncatedSum> {
    let coeffs = taylor_at_zero(psi, m_max)?;
    let w = w.value();
    let mut value = Complex64::new(0.0, 0.0);
    let mut last_term = 0.0;
    let mut power = w.powu(psi.order as u32);
    for c in coeffs {
        let term = c * power;
        value += term;
        last_term = term.norm();
        power *= w;
    }
    Ok(TruncatedSum { value, last_term })
}

/// Settings for Cauchy extraction of fiber jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetSpec {
    /// Circle radius in the `t` coordinate; `None` uses `0.5 (1 - |z|)`.
    pub radius: Option<f64>,
    pub nodes: usize,
}

impl Default for JetSpec {
    fn default() -> Self {
        Self {
            radius: None,
            nodes: DEFAULT_JET_NODES,
        }
    }
}

impl JetSpec {
    /// Radius actually used at `z`, clamped so the `w` circle keeps a margin of
    /// `0.1 (1 - |z|)` from the boundary.
    pub fn radius_at(&self, z: DiskPoint) -> Result<f64> {
        let a = z.value().norm();
        let r = self.radius.unwrap_or(0.5 * (1.0 - a));
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::param(
                "radius",
                format!("jet radius must be in (0, 1), got {r}"),
            ));
        }
        // max |w| on the circle is (r + a)/(1 + a r); keep 1 - max|w| >= 0.1 (1 - a).
        Ok(r.min(0.9 / (1.0 + 0.1 * a)))
    }
}

/// `f_n(z)`, the `t^n` coefficient of `t ↦ f(z, (t + z)/(1 + z̄ t))`, by the trapezoidal
/// Cauchy integral on `|t| = r`.
pub fn jet_extract<F>(f: &F, z: DiskPoint, n: usize, spec: &JetSpec) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64) -> Complex64 + ?Sized,
{
    if spec.nodes < 8 {
        return Err(Error::param(
            "nodes",
            format!("need at least 8 jet nodes, got {}", spec.nodes),
        ));
    }
    let r = spec.radius_at(z)?;
    let zc = z.value();
    let k = spec.nodes;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k {
        let theta = 2.0 * PI * j as f64 / k as f64;
        let t = Complex64::from_polar(r, theta);
        let w = (t + zc) / (Complex64::new(1.0, 0.0) + zc.conj() * t);
        let v = f(zc, w);
        let mag = v.norm();
        if !(mag <= OVERFLOW_GUARD) {
            return Err(Error::Overflow { magnitude: mag });
        }
        acc += v * Complex64::from_polar(1.0, -(n as f64) * theta);
    }
    Ok(acc / (k as f64 * r.powi(n as i32)))
}

/// Coefficient `u(z)` of the `n`-th associated differential in the `dz` frame:
/// `f_n(z) · (√2 / (1 - |z|²))^n`.
pub fn associated_coefficient<F>(f: &F, z: DiskPoint, n: usize, spec: &JetSpec) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64) -> Complex64 + ?Sized,
{
    let scale = SQRT_2 / z.defect();
    Ok(jet_extract(f, z, n, spec)? * scale.powi(n as i32))
}

fn check_step(h: f64) -> Result<()> {
    if !(h >= MIN_STEP) {
        return Err(Error::StepTooSmall { step: h });
    }
    Ok(())
}

/// Stencil points `z ± h`, `z ± ih`, all required to stay inside the disk.
fn stencil(z: Complex64, h: f64) -> Result<[Complex64; 4]> {
    let pts = [
        z + h,
        z - h,
        z + Complex64::new(0.0, h),
        z - Complex64::new(0.0, h),
    ];
    for p in pts {
        DiskPoint::new(p)?;
    }
    if 1.0 - (z.norm() + h) < DISK_MARGIN {
        return Err(Error::OutsideDisk { re: z.re, im: z.im });
    }
    Ok(pts)
}

/// `∂g/∂z̄` by central differences.
fn dbar<G>(g: G, z: Complex64, h: f64) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let [xp, xm, yp, ym] = stencil(z, h)?;
    let dx = (g(xp)? - g(xm)?) / (2.0 * h);
    let dy = (g(yp)? - g(ym)?) / (2.0 * h);
    Ok(0.5 * (dx + Complex64::i() * dy))
}

/// `max(|∂f/∂z̄|, |∂f/∂w̄|)` at `p` by central differences with step `h`.
pub fn cr_residual<F>(f: &F, p: &PointPair, h: f64) -> Result<f64>
where
    F: Fn(Complex64, Complex64) -> Complex64 + ?Sized,
{
    check_step(h)?;
    let (z, w) = (p.z.value(), p.w.value());
    let dz = dbar(|x| Ok(f(x, w)), z, h)?;
    let dw = dbar(|x| Ok(f(z, x)), w, h)?;
    Ok(dz.norm().max(dw.norm()))
}

/// `|∂f_n/∂z̄ + n z f_n/(1-|z|²) + (n-1) f_{n-1}/(1-|z|²)|`, with the jets from
/// [`jet_extract`] and `∂/∂z̄` by central differences.
pub fn recurrence_residual<F>(f: &F, z: DiskPoint, n: usize, spec: &JetSpec, h: f64) -> Result<f64>
where
    F: Fn(Complex64, Complex64) -> Complex64 + ?Sized,
{
    check_step(h)?;
    let jet = |x: Complex64, k: usize| jet_extract(f, DiskPoint::new(x)?, k, spec);
    let zc = z.value();
    let defect = z.defect();
    let d = dbar(|x| jet(x, n), zc, h)?;
    let fn_ = jet(zc, n)?;
    let prev = if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        jet(zc, n - 1)? * (n as f64 - 1.0)
    };
    Ok((d + (zc * fn_ * n as f64 + prev) / defect).norm())
}

/// `|□u - λu|` at `z`, where `□u = -(1/g)(u_{zz̄} + ∂_z log h · u_{z̄})` acts on the `dz`-frame
/// coefficient of a section of `K^n`, `g = 2/(1-|z|²)²` and `h = g^{-n}`.
pub fn box0_residual<U>(u: &U, n: usize, z: DiskPoint, h: f64, lambda: f64) -> Result<f64>
where
    U: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    check_step(h)?;
    let zc = z.value();
    let [xp, xm, yp, ym] = stencil(zc, h)?;
    let (fxp, fxm, fyp, fym) = (u(xp)?, u(xm)?, u(yp)?, u(ym)?);
    let u0 = u(zc)?;
    let laplacian = (fxp + fxm + fyp + fym - 4.0 * u0) / (h * h);
    let u_zzbar = 0.25 * laplacian;
    let u_zbar = 0.5 * ((fxp - fxm) + Complex64::i() * (fyp - fym)) / (2.0 * h);
    let defect = z.defect();
    let g = 2.0 / (defect * defect);
    let dlog_h = -(n as f64) * 2.0 * zc.conj() / defect;
    let boxed = -(u_zzbar + dlog_h * u_zbar) / g;
    Ok((boxed - lambda * u0).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::from_parts(re, im).unwrap()
    }

    fn one(order: usize) -> NDifferential {
        NDifferential::power_series(order, vec![c(1.0, 0.0)])
    }

    fn wrapper(
        psi: NDifferential,
        q: QuadratureSpec,
    ) -> impl Fn(Complex64, Complex64) -> Complex64 {
        move |z, w| extend_complex(&psi, z, w, &q).unwrap()
    }

    #[test]
    fn extend_examples() {
        let q = QuadratureSpec::default();
        let p = PointPair::new(pt(0.1, -0.3), pt(-0.4, 0.2));
        let got = extend(&one(1), &p, &q).unwrap();
        assert!((got - (p.w.value() - p.z.value())).norm() < 1e-15);

        let w = pt(0.6, 0.35);
        for n in 1..=10 {
            let got = extend(&one(n), &PointPair::new(DiskPoint::origin(), w), &q).unwrap();
            assert!((got - w.value().powu(n as u32)).norm() < 1e-14, "N = {n}");
        }

        let tau = NDifferential::monomial(2, 1);
        let got = extend(&tau, &PointPair::new(DiskPoint::origin(), w), &q).unwrap();
        assert!((got - 0.5 * w.value().powu(3)).norm() < 1e-15);
    }

    #[test]
    fn order_zero_and_diagonal() {
        let q = QuadratureSpec::default();
        let k = NDifferential::power_series(0, vec![c(2.5, -1.0)]);
        let p = PointPair::new(pt(0.2, 0.1), pt(-0.5, 0.3));
        assert_eq!(extend(&k, &p, &q).unwrap(), c(2.5, -1.0));
        let z = pt(0.3, 0.3);
        assert_eq!(
            extend(&one(3), &PointPair::new(z, z), &q).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn large_order_does_not_underflow() {
        let q = QuadratureSpec::new(128).unwrap();
        let w = pt(0.99, 0.0);
        let got = extend(&one(600), &PointPair::new(DiskPoint::origin(), w), &q).unwrap();
        let want = 0.99f64.powi(600);
        assert!(((got.re - want) / want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn taylor_examples() {
        let psi = NDifferential::power_series(3, vec![c(0.7, -0.2), c(1.0, 1.0)]);
        assert_eq!(taylor_at_zero(&psi, 0).unwrap()[0], c(0.7, -0.2));
        let f = taylor_at_zero(&NDifferential::monomial(2, 1), 1).unwrap();
        assert_eq!(f[1], c(0.5, 0.0));
        // Large orders against the log-gamma form.
        for &(n, m) in &[(40usize, 7usize), (300, 40), (5, 1000)] {
            let (nf, mf) = (n as f64, m as f64);
            let lg = crate::specfun::log_gamma;
            let want = (lg(2.0 * nf).unwrap() + lg(nf + mf).unwrap()
                - lg(nf).unwrap()
                - lg(2.0 * nf + mf).unwrap())
            .exp();
            let got = taylor_factor(n, m);
            assert!(
                ((got - want) / want).abs() < 1e-11,
                "{n} {m}: {got} vs {want}"
            );
        }
        for k in 0..10 {
            let f = taylor_at_zero(&NDifferential::monomial(1, k), k).unwrap();
            assert!((f[k].re - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
        let bad = NDifferential::evaluator(2, |t| t);
        assert_eq!(taylor_at_zero(&bad, 3), Err(Error::UnsupportedBody));
    }

    #[test]
    fn series_at_zero_matches_quadrature() {
        let q = QuadratureSpec::default();
        let coeffs: Vec<Complex64> = (0..=8)
            .map(|k| c((0.3 * k as f64).sin(), (0.7 * k as f64).cos()))
            .collect();
        for n in 1..=5 {
            let psi = NDifferential::power_series(n, coeffs.clone());
            for &(re, im) in &[(0.8, 0.0), (0.0, -0.5), (-0.4, 0.6), (0.1, 0.1)] {
                let w = pt(re, im);
                let s = eval_series_at_zero(&psi, w, 40).unwrap();
                let e = extend(&psi, &PointPair::new(DiskPoint::origin(), w), &q).unwrap();
                assert!((s.value - e).norm() < 1e-12, "N = {n}: {} vs {e}", s.value);
                assert_eq!(s.last_term, 0.0);
            }
        }
        let s = eval_series_at_zero(&one(4), DiskPoint::origin(), 5).unwrap();
        assert_eq!(s.value, c(0.0, 0.0));
    }

    #[test]
    fn jets_of_t_powers() {
        let z = pt(0.3, -0.4);
        let spec = JetSpec::default();
        for k in 0..5 {
            let f = move |z: Complex64, w: Complex64| ((w - z) / (1.0 - z.conj() * w)).powu(k);
            for n in 0..6 {
                let got = jet_extract(&f, z, n, &spec).unwrap();
                let want = if n as u32 == k { 1.0 } else { 0.0 };
                assert!((got - want).norm() < 1e-13, "k = {k}, n = {n}: {got}");
            }
        }
    }

    #[test]
    fn jets_of_extension_at_origin() {
        let f = wrapper(one(2), QuadratureSpec::default());
        let spec = JetSpec::default();
        let z = DiskPoint::origin();
        for n in 0..4 {
            let got = jet_extract(&f, z, n, &spec).unwrap();
            let want = if n == 2 { 1.0 } else { 0.0 };
            assert!((got - want).norm() < 1e-13, "n = {n}: {got}");
        }
        let z = pt(0.4, 0.2);
        let psi = NDifferential::power_series(2, vec![c(1.0, 0.0), c(0.5, -0.5), c(0.0, 0.3)]);
        let f = wrapper(psi, QuadratureSpec::default());
        for n in 0..5 {
            let a = jet_extract(
                &f,
                z,
                n,
                &JetSpec {
                    radius: None,
                    nodes: 128,
                },
            )
            .unwrap();
            let b = jet_extract(
                &f,
                z,
                n,
                &JetSpec {
                    radius: None,
                    nodes: 256,
                },
            )
            .unwrap();
            assert!((a - b).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn jet_overflow_guard() {
        let f = |_z: Complex64, w: Complex64| (1.0 / (w - 0.3)).powu(400);
        let r = jet_extract(&f, pt(0.3, 0.0), 2, &JetSpec::default());
        assert!(matches!(r, Err(Error::Overflow { .. })), "{r:?}");
    }

    #[test]
    fn radius_is_clamped() {
        let spec = JetSpec {
            radius: Some(0.99),
            nodes: 64,
        };
        let z = pt(0.5, 0.0);
        let r = spec.radius_at(z).unwrap();
        let a = 0.5;
        let max_w = (r + a) / (1.0 + a * r);
        assert!(1.0 - max_w >= 0.1 * (1.0 - a) - 1e-15);
        assert!(JetSpec {
            radius: Some(1.5),
            nodes: 64
        }
        .radius_at(z)
        .is_err());
    }

    #[test]
    fn cr_residual_examples() {
        let p = PointPair::new(pt(0.2, -0.1), pt(-0.3, 0.4));
        let zw = |z: Complex64, w: Complex64| z * w;
        assert!(cr_residual(&zw, &p, 1e-4).unwrap() < 1e-9);
        let anti = |z: Complex64, _w: Complex64| z.conj();
        assert!((cr_residual(&anti, &p, 1e-4).unwrap() - 1.0).abs() < 1e-9);
        let psi = NDifferential::power_series(3, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.2, 0.0)]);
        let f = wrapper(psi, QuadratureSpec::default());
        assert!(cr_residual(&f, &p, 1e-4).unwrap() < 1e-6);
        assert_eq!(
            cr_residual(&zw, &p, 1e-9),
            Err(Error::StepTooSmall { step: 1e-9 })
        );
    }

    #[test]
    fn recurrence_holds_for_extension() {
        let spec = JetSpec::default();
        for n_ord in 1..=3 {
            let psi =
                NDifferential::power_series(n_ord, vec![c(0.5, 0.2), c(-0.3, 0.4), c(0.1, 0.0)]);
            let f = wrapper(psi, QuadratureSpec::default());
            for &(re, im) in &[(0.0, 0.0), (0.3, -0.2), (-0.5, 0.1)] {
                for n in 0..=n_ord + 3 {
                    let r = recurrence_residual(&f, pt(re, im), n, &spec, 1e-4).unwrap();
                    assert!(r < 1e-6, "N = {n_ord}, n = {n}, z = ({re}, {im}): {r}");
                }
            }
        }
    }

    #[test]
    fn recurrence_for_difference_and_detector() {
        let spec = JetSpec::default();
        let z = pt(0.35, 0.25);
        let diff = |z: Complex64, w: Complex64| w - z;
        assert!(recurrence_residual(&diff, z, 1, &spec, 1e-4).unwrap() < 1e-8);

        let eps = 1e-3;
        let n = 1usize;
        let perturbed = move |zz: Complex64, w: Complex64| {
            let t = (w - zz) / (1.0 - zz.conj() * w);
            w - zz + eps * zz.conj() * t
        };
        let r = recurrence_residual(&perturbed, z, n, &spec, 1e-4).unwrap();
        let zc = z.value();
        let expected = (eps * (1.0 + n as f64 * zc * zc.conj() / z.defect())).norm();
        assert!((r - expected).abs() < 1e-8, "{r} vs {expected}");
    }

    #[test]
    fn box0_holomorphic_and_hand_stencil() {
        let z = pt(0.3, -0.2);
        let hol = |x: Complex64| Ok(x * x + 2.0 * x);
        for n in 0..4 {
            assert!(box0_residual(&hol, n, z, 1e-3, 0.0).unwrap() < 1e-6);
        }
        let anti = |x: Complex64| Ok(x.conj());
        assert!(box0_residual(&anti, 0, z, 1e-3, 0.0).unwrap() < 1e-10);
        // n = 1: □ z̄ = z̄ (1 - |z|²).
        let want = (z.value().conj() * z.defect()).norm();
        assert!((box0_residual(&anti, 1, z, 1e-3, 0.0).unwrap() - want).abs() < 1e-10);
        assert!(box0_residual(&anti, 1, z, 1e-9, 0.0).is_err());
    }

    #[test]
    fn associated_coefficients_are_eigenforms() {
        let spec = JetSpec::default();
        for n in 1..=3usize {
            let psi = NDifferential::power_series(n, vec![c(1.0, 0.0), c(0.4, -0.3), c(0.0, 0.25)]);
            let f = wrapper(psi, QuadratureSpec::default());
            for m in 0..=3usize {
                let lambda = crate::specfun::eigenvalue(n, m);
                let u = |x: Complex64| associated_coefficient(&f, DiskPoint::new(x)?, n + m, &spec);
                for &(re, im) in &[(0.1, 0.2), (-0.35, 0.05)] {
                    let z = pt(re, im);
                    let u0 = u(z.value()).unwrap().norm();
                    let r = box0_residual(&u, n + m, z, 1e-3, lambda).unwrap();
                    assert!(r < 1e-4 * (1.0 + lambda * u0), "N = {n}, m = {m}: {r}");
                }
            }
        }
    }

    #[test]
    fn json_forms() {
        let base = Path::new(".");
        let psi = NDifferential::from_json(
            r#"{ "order": 2, "kind": "power_series", "coeffs": [[1.0, 0.0], [0.0, 2.0]] }"#,
            base,
        )
        .unwrap();
        assert_eq!(psi.order(), 2);
        assert_eq!(psi.coeffs().unwrap(), &[c(1.0, 0.0), c(0.0, 2.0)]);
        let err = NDifferential::from_json(
            r#"{ "order": 2, "kind": "power_series", "coeffs": [[1.0]] }"#,
            base,
        );
        assert!(matches!(err, Err(Error::Config(m)) if m.contains("line 1")));
        let missing = NDifferential::from_json(
            r#"{ "order": 2, "kind": "poincare", "word_length": 1, "generators_ref": "/nonexistent.json" }"#,
            base,
        );
        assert!(matches!(missing, Err(Error::Config(_))));
        let no_coeffs = NDifferential::from_json(r#"{ "order": 2, "kind": "power_series" }"#, base);
        assert!(matches!(no_coeffs, Err(Error::Config(m)) if m.contains("coeffs")));
    }

    #[test]
    fn poincare_body_and_warning() {
        let ball = Arc::new(fuchsian::enumerate(&GeneratorSet::regular_octagon(), 1).unwrap());
        let psi = NDifferential::poincare(1, ball.clone());
        assert!(psi.convergence_warning().is_some());
        let psi4 = NDifferential::poincare(4, ball.clone());
        assert!(psi4.convergence_warning().is_none());
        let tau = pt(0.1, 0.2);
        let direct = fuchsian::poincare_density(&ball, 4, tau).value;
        assert_eq!(psi4.eval(tau.value()), direct);
    }

    fn arb_point(r: f64) -> impl Strategy<Value = DiskPoint> {
        (0.0..r, 0.0..std::f64::consts::TAU)
            .prop_map(|(rho, th)| DiskPoint::new(Complex64::from_polar(rho, th)).unwrap())
    }

    fn arb_series(max_deg: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_deg + 1)
            .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    fn arb_mobius() -> impl Strategy<Value = MobiusTransform> {
        (arb_point(0.6), 0.0..std::f64::consts::TAU).prop_map(|(p, th)| {
            MobiusTransform::translation(p).compose(&MobiusTransform::rotation(th))
        })
    }

    fn path_modulus(
        psi: &NDifferential,
        z: Complex64,
        p: Complex64,
        w: Complex64,
        q: &QuadratureSpec,
    ) -> f64 {
        let nf = psi.order() as f64;
        let norm = (-ln_beta(nf, nf).unwrap()).exp();
        let mut acc = 0.0;
        for (a, b) in [(z, p), (p, w)] {
            for &(s, wt) in q.points() {
                let tau = a + (b - a) * s;
                let br = ((w - tau) * (tau - z) / (w - z))
                    .norm()
                    .powi(psi.order() as i32 - 1);
                acc += psi.eval(tau).norm() * br * (b - a).norm() * wt;
            }
        }
        acc * norm
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mobius_equivariance(
            g in arb_mobius(), coeffs in arb_series(6), n in 1usize..=5,
            z in arb_point(0.6), w in arb_point(0.6)
        ) {
            let q = QuadratureSpec::default();
            let psi = NDifferential::power_series(n, coeffs);
            let lhs = extend(&psi.pullback(&g), &PointPair::new(z, w), &q).unwrap();
            let rhs = extend(&psi, &PointPair::new(z, w).mapped(&g), &q).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn path_independence(
            coeffs in arb_series(8), n in 1usize..=6,
            z in arb_point(0.8), w in arb_point(0.8), p in arb_point(0.8)
        ) {
            let q = QuadratureSpec::default();
            let psi = NDifferential::power_series(n, coeffs);
            let direct = extend_complex(&psi, z.value(), w.value(), &q).unwrap();
            let bent = extend_along(&psi, z.value(), &[p.value()], w.value(), &q).unwrap();
            // Long detours around a short segment cancel heavily; the absolute tolerance is
            // taken relative to the integral of the integrand's modulus along the detour.
            let scale = path_modulus(&psi, z.value(), p.value(), w.value(), &q);
            prop_assert!((direct - bent).norm() < 1e-10 * scale.max(1.0), "{} vs {}, scale {}", direct, bent, scale);
        }

        #[test]
        fn linearity(
            c1 in arb_series(8), n in 1usize..=6,
            a in (-2.0..2.0f64, -2.0..2.0f64), b in (-2.0..2.0f64, -2.0..2.0f64),
            z in arb_point(0.9), w in arb_point(0.9)
        ) {
            let q = QuadratureSpec::default();
            let (a, b) = (c(a.0, a.1), c(b.0, b.1));
            let p1 = NDifferential::power_series(n, c1);
            let p2 = NDifferential::evaluator(n, move |t| (t * 0.5).exp());
            let mix = p1.combine(a, &p2, b).unwrap();
            let p = PointPair::new(z, w);
            let lhs = extend(&mix, &p, &q).unwrap();
            let rhs = a * extend(&p1, &p, &q).unwrap() + b * extend(&p2, &p, &q).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn diagonal_vanishing_order(coeffs in arb_series(4), n in 1usize..=6, z in arb_point(0.7), th in 0.0..std::f64::consts::TAU) {
            let q = QuadratureSpec::default();
            let mut coeffs = coeffs;
            coeffs[0] = c(1.0, 0.0);
            let psi = NDifferential::power_series(n, coeffs);
            let dir = Complex64::from_polar(1.0, th);
            let vals: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&eps| {
                extend_complex(&psi, z.value(), z.value() + dir * eps, &q).unwrap().norm()
            }).collect();
            prop_assert!(vals.iter().all(|&v| v > 0.0));
            let slope = (vals[0].ln() - vals[2].ln()) / (1e-2f64.ln() - 1e-4f64.ln());
            prop_assert!((slope - n as f64).abs() < 0.05, "slope {}", slope);
        }

        #[test]
        fn quadrature_convergence(coeffs in arb_series(16), n in 1usize..=8, z in arb_point(0.9), w in arb_point(0.9)) {
            let psi = NDifferential::power_series(n, coeffs);
            let p = PointPair::new(z, w);
            let a = extend(&psi, &p, &QuadratureSpec::new(64).unwrap()).unwrap();
            let b = extend(&psi, &p, &QuadratureSpec::new(128).unwrap()).unwrap();
            prop_assert!((a - b).norm() < 1e-11);
        }
    }
}
