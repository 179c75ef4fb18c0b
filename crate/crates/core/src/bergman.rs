//! Weighted norms from the fiberwise expansion, Hardy partial sums, surface norms by
//! quadrature, and truncated weighted Bergman kernels.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::jetext::{extend, DifferentialConfig, NDifferential};
use crate::mobius::{DiskPoint, PointPair};
use crate::quadrature::QuadratureSpec;
use crate::specfun::{c_alpha, fiber_weight, kernel_constant, norm_ratio};

/// Squared norms `‖φ_n‖²` of the associated differentials, by fiber index `n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DifferentialNormList {
    entries: Vec<(usize, f64)>,
}

impl DifferentialNormList {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::param(
                "entries",
                "fiber indices must be strictly increasing",
            ));
        }
        if let Some(&(n, v)) = entries.iter().find(|e| !(e.1.is_finite() && e.1 >= 0.0)) {
            return Err(Error::param(
                "entries",
                format!("squared norm at n = {n} is {v}"),
            ));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }
}

/// `π Σ Γ(n+1)/Γ(n+2+α) ‖φ_n‖²`.
pub fn weighted_norm(d: &DifferentialNormList, alpha: f64) -> Result<f64> {
    let mut total = 0.0;
    for &(n, sq) in &d.entries {
        total += fiber_weight(n, alpha)? * sq;
    }
    Ok(PI * total)
}

/// The ladder `‖φ_{N+m}‖² = norm_ratio(N, m) ‖ψ‖²`, `m = 0..=M`, of `I(ψ)`.
pub fn ladder_norms(order: usize, m_max: usize, psi_sq_norm: f64) -> Result<DifferentialNormList> {
    if order == 0 {
        return Err(Error::param("N", "order must be at least 1"));
    }
    DifferentialNormList::new(
        (0..=m_max)
            .map(|m| (order + m, psi_sq_norm * norm_ratio(order, m)))
            .collect(),
    )
}

/// `‖I(ψ)‖²_α = π ‖ψ‖² c_{N,α}`.
pub fn i_image_norm(order: usize, alpha: f64, psi_sq_norm: f64) -> Result<f64> {
    Ok(PI * psi_sq_norm * c_alpha(order, alpha)?.value)
}

/// `π Σ_{m=0..=M} norm_ratio(N, m)`: partial sums of the divergent Hardy norm of `I(ψ)`
/// for unit `‖ψ‖`.
pub fn hardy_partial(order: usize, m_max: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::param("N", "order must be at least 1"));
    }
    let mut acc = 0.0;
    for m in (0..=m_max).rev() {
        acc += norm_ratio(order, m);
    }
    Ok(PI * acc)
}

/// Least-squares fit `hardy_partial(N, M) ≈ slope · ln M + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn hardy_divergence_fit(order: usize, ms: &[usize]) -> Result<DivergenceFit> {
    if ms.len() < 2 || ms.iter().any(|&m| m < 2) {
        return Err(Error::param("M", "need at least two cutoffs, each >= 2"));
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys = ms
        .iter()
        .map(|&m| hardy_partial(order, m))
        .collect::<Result<Vec<_>>>()?;
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DivergenceFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Weighted sample points standing in for `∫_F · dλ` over a fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceQuadrature {
    samples: Vec<(DiskPoint, f64)>,
}

impl SurfaceQuadrature {
    pub fn new(samples: Vec<(DiskPoint, f64)>) -> Result<Self> {
        if let Some(&(_, w)) = samples.iter().find(|s| !(s.1 > 0.0 && s.1.is_finite())) {
            return Err(Error::param(
                "weight",
                format!("weights must be positive, got {w}"),
            ));
        }
        Ok(Self { samples })
    }

    /// Product rule on `|τ| < ρ`: Gauss-Legendre in the radius, trapezoid in the angle.
    pub fn euclidean_disk(rho: f64, radial: usize, angular: usize) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::param(
                "rho",
                format!("radius must be in (0, 1), got {rho}"),
            ));
        }
        if angular == 0 {
            return Err(Error::param("angular", "need at least one angle"));
        }
        let rule = QuadratureSpec::new(radial)?;
        let dtheta = 2.0 * PI / angular as f64;
        let mut samples = Vec::with_capacity(radial * angular);
        for &(s, w) in rule.points() {
            let r = rho * s;
            for j in 0..angular {
                let tau = DiskPoint::new(Complex64::from_polar(r, (j as f64 + 0.5) * dtheta))?;
                samples.push((tau, w * rho * r * dtheta));
            }
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(DiskPoint, f64)] {
        &self.samples
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum()
    }
}

/// Pointwise weight `((1-|τ|²)²/2)^N · 4/(1-|τ|²)²` of `|ψ|²` against `dλ`.
fn metric_weight(order: usize, tau: DiskPoint) -> f64 {
    let d = tau.defect();
    (0.5 * d * d).powi(order as i32) * 4.0 / (d * d)
}

/// `∫_F |ψ|² g^{-N} ω_g` approximated by `q`. Meaningful only when `q` samples a
/// fundamental domain of a group leaving `ψ` invariant.
pub fn surface_norm(psi: &NDifferential, q: &SurfaceQuadrature) -> f64 {
    q.samples
        .iter()
        .map(|&(tau, w)| psi.eval(tau.value()).norm_sqr() * metric_weight(psi.order(), tau) * w)
        .sum()
}

/// Matrix of surface inner products `⟨ψ_i, ψ_j⟩`; all differentials must share an order.
pub fn surface_gram(psis: &[NDifferential], q: &SurfaceQuadrature) -> Result<DMatrix<Complex64>> {
    let Some(first) = psis.first() else {
        return Ok(DMatrix::zeros(0, 0));
    };
    if psis.iter().any(|p| p.order() != first.order()) {
        return Err(Error::param(
            "order",
            "Gram matrix needs differentials of one order",
        ));
    }
    let k = psis.len();
    let mut g = DMatrix::zeros(k, k);
    for &(tau, w) in &q.samples {
        let mw = metric_weight(first.order(), tau) * w;
        let vals: Vec<Complex64> = psis.iter().map(|p| p.eval(tau.value())).collect();
        for i in 0..k {
            for j in 0..k {
                g[(i, j)] += vals[i] * vals[j].conj() * mw;
            }
        }
    }
    Ok(g)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// One differential contributing to the kernel, with its squared norm.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    pub psi: NDifferential,
    pub sq_norm: f64,
}

/// Differentials assumed mutually orthogonal; each is normalized by its `sq_norm`.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    families: Vec<KernelFamily>,
    genus: u32,
}

impl KernelBasis {
    pub fn new(families: Vec<KernelFamily>, genus: u32) -> Result<Self> {
        if genus < 2 {
            return Err(Error::param(
                "genus",
                format!("genus must be at least 2, got {genus}"),
            ));
        }
        for f in &families {
            if f.psi.order() == 0 {
                return Err(Error::param("order", "kernel families need order >= 1"));
            }
            if !(f.sq_norm > 0.0 && f.sq_norm.is_finite()) {
                return Err(Error::param(
                    "sq_norm",
                    format!("family squared norm must be positive, got {}", f.sq_norm),
                ));
            }
        }
        Ok(Self { families, genus })
    }

    pub fn families(&self) -> &[KernelFamily] {
        &self.families
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn with_family(&self, family: KernelFamily) -> Result<Self> {
        let mut families = self.families.clone();
        families.push(family);
        Self::new(families, self.genus)
    }
}

/// Kernel evaluation with the per-family constants computed once.
#[derive(Debug, Clone)]
pub struct KernelAssembler {
    basis: KernelBasis,
    constant: f64,
    /// `1 / (π c_{N,α} ‖ψ‖²)` per family.
    scales: Vec<f64>,
    quad: QuadratureSpec,
}

impl KernelAssembler {
    pub fn new(basis: KernelBasis, alpha: f64, quad: QuadratureSpec) -> Result<Self> {
        let constant = kernel_constant(alpha, basis.genus)?;
        let scales = basis
            .families
            .iter()
            .map(|f| Ok(1.0 / (PI * c_alpha(f.psi.order(), alpha)?.value * f.sq_norm)))
            .collect::<Result<_>>()?;
        Ok(Self {
            basis,
            constant,
            scales,
            quad,
        })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `I(ψ)(p)` for every family, unnormalized.
    pub fn extensions(&self, p: &PointPair) -> Result<Vec<Complex64>> {
        self.basis
            .families
            .iter()
            .map(|f| extend(&f.psi, p, &self.quad))
            .collect()
    }

    fn combine(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let sum: Complex64 = a
            .iter()
            .zip(b)
            .zip(&self.scales)
            .map(|((x, y), s)| x * y.conj() * s)
            .sum();
        sum + self.constant
    }

    pub fn eval(&self, p: &PointPair, p2: &PointPair) -> Result<Complex64> {
        Ok(self.combine(&self.extensions(p)?, &self.extensions(p2)?))
    }

    /// `[B(p_i, p_j)]`.
    pub fn gram(&self, points: &[PointPair]) -> Result<DMatrix<Complex64>> {
        let ext = points
            .iter()
            .map(|p| self.extensions(p))
            .collect::<Result<Vec<_>>>()?;
        let k = points.len();
        Ok(DMatrix::from_fn(k, k, |i, j| {
            self.combine(&ext[i], &ext[j])
        }))
    }
}

/// `Γ(α+2)/(π²(4g-4)) + (1/π) Σ (1/c_{N,α}) I(ψ̂)(p) conj(I(ψ̂)(p2))`, `ψ̂ = ψ/‖ψ‖`.
pub fn kernel_assemble(
    basis: &KernelBasis,
    alpha: f64,
    p: &PointPair,
    p2: &PointPair,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    KernelAssembler::new(basis.clone(), alpha, q.clone())?.eval(p, p2)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyConfig {
    order: usize,
    psi: DifferentialConfig,
    sq_norm: f64,
}

/// Kernel JSON: `{ "genus": g, "alpha": a, "families": [{ "order", "psi", "sq_norm" }] }`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub genus: u32,
    pub alpha: f64,
    families: Vec<FamilyConfig>,
}

impl KernelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(format!(
                "kernel config, line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn basis(&self, base_dir: &Path) -> Result<KernelBasis> {
        let families = self
            .families
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let psi = f.psi.resolve(base_dir)?;
                if psi.order() != f.order {
                    return Err(Error::Config(format!(
                        "family {}: order {} but psi has order {}",
                        i + 1,
                        f.order,
                        psi.order()
                    )));
                }
                Ok(KernelFamily {
                    psi,
                    sq_norm: f.sq_norm,
                })
            })
            .collect::<Result<_>>()?;
        KernelBasis::new(families, self.genus)
    }
}
