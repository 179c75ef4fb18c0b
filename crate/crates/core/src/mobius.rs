//! Disk automorphisms and the two-point invariants built from them.
//!
//! A [`MobiusTransform`] is the SU(1,1) matrix `[[alpha, beta], [conj(beta), conj(alpha)]]`
//! acting by `z -> (alpha z + beta) / (conj(beta) z + conj(alpha))`. Since `g` and `-g` act
//! identically, every transform is stored in a sign-canonical form and re-normalized to
//! `|alpha|^2 - |beta|^2 = 1` after construction and composition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with `1 - |z|` below this are treated as boundary points and rejected.
pub const DISK_MARGIN: f64 = 1e-12;

/// Bracket poles are reported when `tau` is this close to an endpoint.
pub const POLE_TOLERANCE: f64 = 1e-14;

/// A complex number strictly inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || 1.0 - z.norm() < DISK_MARGIN {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        Ok(DiskPoint(z))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn origin() -> Self {
        DiskPoint(Complex64::new(0.0, 0.0))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    /// `1 - |z|^2`, the conformal factor of the Poincaré metric.
    #[inline]
    pub fn defect(self) -> f64 {
        1.0 - self.0.norm_sqr()
    }
}

impl<'de> Deserialize<'de> for DiskPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let z = Complex64::deserialize(d)?;
        DiskPoint::new(z).map_err(serde::de::Error::custom)
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// An element of PSU(1,1), stored as its canonical SU(1,1) representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusTransform {
    alpha: Complex64,
    beta: Complex64,
}

impl MobiusTransform {
    /// Builds a transform from any pair with `|alpha|^2 > |beta|^2`, rescaling it onto SU(1,1).
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::param(
                "alpha/beta",
                format!("|alpha|^2 - |beta|^2 = {det} is not positive"),
            ));
        }
        Ok(Self { alpha, beta }.normalized())
    }

    pub fn identity() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    /// The hyperbolic translation carrying the origin to `p`.
    pub fn translation(p: DiskPoint) -> Self {
        let s = p.defect().sqrt().recip();
        Self {
            alpha: Complex64::new(s, 0.0),
            beta: p.value() * s,
        }
    }

    /// Rotation `z -> e^{i theta} z`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            alpha: Complex64::from_polar(1.0, 0.5 * theta),
            beta: Complex64::new(0.0, 0.0),
        }
        .normalized()
    }

    #[inline]
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `|alpha|^2 - |beta|^2 - 1`.
    pub fn det_residual(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr() - 1.0
    }

    fn normalized(self) -> Self {
        let det = self.alpha.norm_sqr() - self.beta.norm_sqr();
        let s = det.sqrt().recip();
        Self {
            alpha: self.alpha * s,
            beta: self.beta * s,
        }
        .sign_canonical()
    }

    /// Picks the representative with `Re alpha > 0`. Products and inverses of SU(1,1)
    /// matrices stay on SU(1,1), and rescaling large elements by the computed
    /// determinant would amplify its cancellation error, so they only get this step.
    fn sign_canonical(self) -> Self {
        // |alpha| >= 1 on SU(1,1), so alpha always decides the sign.
        if self.alpha.re < 0.0 || (self.alpha.re == 0.0 && self.alpha.im < 0.0) {
            Self {
                alpha: -self.alpha,
                beta: -self.beta,
            }
        } else {
            self
        }
    }

    /// `(alpha z + beta) / (conj(beta) z + conj(alpha))`.
    pub fn apply(&self, z: DiskPoint) -> DiskPoint {
        let w = self.apply_complex(z.value());
        // Roundoff can only push |w| up to 1 - O(eps) for points already that close.
        DiskPoint(w)
    }

    /// Action on an arbitrary complex number (no disk check).
    #[inline]
    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.alpha * z + self.beta) / (self.beta.conj() * z + self.alpha.conj())
    }

    /// Complex derivative `1 / (conj(beta) z + conj(alpha))^2`.
    #[inline]
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = self.beta.conj() * z + self.alpha.conj();
        (d * d).inv()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
        }
        .sign_canonical()
    }

    pub fn inverse(&self) -> Self {
        Self {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
        .sign_canonical()
    }

    /// Max entrywise modulus difference, minimized over the sign ambiguity.
    pub fn distance(&self, other: &Self) -> f64 {
        let plus = (self.alpha - other.alpha)
            .norm()
            .max((self.beta - other.beta).norm());
        let minus = (self.alpha + other.alpha)
            .norm()
            .max((self.beta + other.beta).norm());
        plus.min(minus)
    }

    /// `|2 Re alpha|`, the absolute trace. Exceeds 2 exactly for hyperbolic elements.
    pub fn abs_trace(&self) -> f64 {
        (2.0 * self.alpha.re).abs()
    }

    /// Conjugate `sigma ∘ self ∘ sigma^{-1}`.
    pub fn conjugate_by(&self, sigma: &Self) -> Self {
        sigma.compose(self).compose(&sigma.inverse())
    }
}

impl Default for MobiusTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl<'de> Deserialize<'de> for MobiusTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: Complex64,
            beta: Complex64,
        }
        let raw = Raw::deserialize(d)?;
        MobiusTransform::new(raw.alpha, raw.beta).map_err(serde::de::Error::custom)
    }
}

/// A point `(z, w)` of the bidisk. The diagonal `z = w` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub z: DiskPoint,
    pub w: DiskPoint,
}

impl PointPair {
    pub fn new(z: DiskPoint, w: DiskPoint) -> Self {
        Self { z, w }
    }

    pub fn from_complex(z: Complex64, w: Complex64) -> Result<Self> {
        Ok(Self {
            z: DiskPoint::new(z)?,
            w: DiskPoint::new(w)?,
        })
    }

    /// Simultaneous action `(g z, g w)`.
    pub fn mapped(&self, g: &MobiusTransform) -> Self {
        Self {
            z: g.apply(self.z),
            w: g.apply(self.w),
        }
    }
}

/// Fiber coordinate `t = (w - z) / (1 - conj(z) w)`.
pub fn t_coord(p: &PointPair) -> Complex64 {
    let (z, w) = (p.z.value(), p.w.value());
    (w - z) / (1.0 - z.conj() * w)
}

/// Inverse of [`t_coord`] at fixed `z`: `w = (t + z) / (1 + conj(z) t)`.
pub fn w_from_t(z: DiskPoint, t: Complex64) -> Result<DiskPoint> {
    if !(t.norm() < 1.0) {
        return Err(Error::param(
            "t",
            format!("|t| = {} is not below 1", t.norm()),
        ));
    }
    let z = z.value();
    DiskPoint::new((t + z) / (1.0 + z.conj() * t))
}

/// The invariant weight `1 - |t|^2 = (1-|z|^2)(1-|w|^2) / |1 - conj(z) w|^2`.
pub fn delta(p: &PointPair) -> f64 {
    let (z, w) = (p.z.value(), p.w.value());
    p.z.defect() * p.w.defect() / (1.0 - z.conj() * w).norm_sqr()
}

/// Coefficient of the invariant 1-form `[w, tau, z] = (w - z) dtau / ((w - tau)(tau - z))`.
pub fn bracket(w: DiskPoint, tau: Complex64, z: DiskPoint) -> Result<Complex64> {
    let (w, z) = (w.value(), z.value());
    if (w - z).norm() == 0.0 {
        return Err(Error::DegeneratePair);
    }
    if (tau - z).norm() < POLE_TOLERANCE || (tau - w).norm() < POLE_TOLERANCE {
        return Err(Error::Pole);
    }
    Ok((w - z) / ((w - tau) * (tau - z)))
}

/// Coefficient `g(z) = 2 / (1 - |z|^2)^2` of the Poincaré metric.
#[inline]
pub fn poincare_metric(z: Complex64) -> f64 {
    let s = 1.0 - z.norm_sqr();
    2.0 / (s * s)
}

/// `d log g / dz = 2 conj(z) / (1 - |z|^2)`.
#[inline]
pub fn dlog_metric_dz(z: Complex64) -> Complex64 {
    2.0 * z.conj() / (1.0 - z.norm_sqr())
}

/// Pointwise squared norm of the (1,1)-differential `g dz ⊗ dz̄`; identically one.
pub fn metric_form_norm_sqr(z: DiskPoint) -> f64 {
    let g = poincare_metric(z.value());
    let frame = z.defect() * z.defect() / 2.0;
    g * g * frame * frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arb_point(rmax: f64) -> impl Strategy<Value = DiskPoint> {
        (0.0..rmax, 0.0..std::f64::consts::TAU)
            .prop_map(|(r, th)| DiskPoint::new(Complex64::from_polar(r, th)).unwrap())
    }

    fn arb_mobius() -> impl Strategy<Value = MobiusTransform> {
        (arb_point(0.9), 0.0..std::f64::consts::TAU).prop_map(|(p, th)| {
            MobiusTransform::translation(p).compose(&MobiusTransform::rotation(th))
        })
    }

    #[test]
    fn rejects_boundary_points() {
        assert!(DiskPoint::new(c(1.0, 0.0)).is_err());
        assert!(DiskPoint::new(c(0.6, 0.8)).is_err());
        assert!(DiskPoint::new(c(1.0 - 1e-13, 0.0)).is_err());
        assert!(DiskPoint::new(c(f64::NAN, 0.0)).is_err());
        assert!(DiskPoint::new(c(0.999, 0.0)).is_ok());
    }

    #[test]
    fn identity_and_translation_actions() {
        let z = DiskPoint::from_parts(0.3, 0.1).unwrap();
        assert_eq!(MobiusTransform::identity().apply(z).value(), z.value());

        let g = MobiusTransform::new(c(2f64.sqrt(), 0.0), c(1.0, 0.0)).unwrap();
        let img = g.apply(DiskPoint::origin()).value();
        assert_abs_diff_eq!(img.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-13);
        assert_abs_diff_eq!(img.im, 0.0, epsilon = 1e-15);

        let d = g.derivative(c(0.0, 0.0));
        assert_abs_diff_eq!(d.re, 0.5, epsilon = 1e-15);
        assert_eq!(
            MobiusTransform::identity().derivative(c(0.4, -0.2)),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn new_rescales_and_canonicalizes() {
        let g = MobiusTransform::new(c(-2.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!(g.det_residual().abs() < 1e-15);
        assert!(g.alpha().re > 0.0);
        assert!(MobiusTransform::new(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        let neg = MobiusTransform::new(-g.alpha(), -g.beta()).unwrap();
        assert_eq!(neg, g);
    }

    #[test]
    fn long_composition_chain_keeps_determinant() {
        let g = MobiusTransform::new(c(1.3, 0.4), c(0.2, -0.9)).unwrap();
        let h = MobiusTransform::new(c(0.9, -1.1), c(-0.5, 0.3)).unwrap();
        let mut acc = MobiusTransform::identity();
        for k in 0..1000 {
            acc = if k % 3 == 0 {
                acc.compose(&h.inverse())
            } else {
                acc.compose(&g)
            };
            acc = acc.compose(&g.inverse());
            assert!(acc.det_residual().abs() <= 1e-12);
        }
    }

    #[test]
    fn t_coordinate_examples() {
        let w = DiskPoint::from_parts(0.2, -0.4).unwrap();
        let z = DiskPoint::from_parts(-0.35, 0.1).unwrap();
        assert_eq!(t_coord(&PointPair::new(DiskPoint::origin(), w)), w.value());
        assert_eq!(t_coord(&PointPair::new(z, z)).norm(), 0.0);
        assert!(w_from_t(z, c(1.0, 0.0)).is_err());
        assert_abs_diff_eq!(delta(&PointPair::new(z, z)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            delta(&PointPair::new(DiskPoint::origin(), w)),
            1.0 - w.value().norm_sqr(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn bracket_examples_and_errors() {
        let w = DiskPoint::from_parts(0.5, 0.0).unwrap();
        let z = DiskPoint::from_parts(-0.5, 0.0).unwrap();
        let b = bracket(w, c(0.0, 0.0), z).unwrap();
        assert_abs_diff_eq!(b.re, 4.0, epsilon = 1e-15);
        assert_eq!(bracket(w, z.value(), z), Err(Error::Pole));
        assert_eq!(bracket(w, w.value(), z), Err(Error::Pole));
        assert_eq!(bracket(z, c(0.1, 0.0), z), Err(Error::DegeneratePair));
    }

    #[test]
    fn metric_form_has_unit_norm() {
        for &(re, im) in &[(0.0, 0.0), (0.5, 0.3), (-0.9, 0.1), (0.0, -0.99)] {
            let z = DiskPoint::from_parts(re, im).unwrap();
            assert_abs_diff_eq!(metric_form_norm_sqr(z), 1.0, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(g in arb_mobius(), z in arb_point(0.95)) {
            let back = g.apply(g.inverse().apply(z)).value();
            prop_assert!((back - z.value()).norm() < 1e-12);
            prop_assert!(g.apply(z).value().norm() < 1.0);
            prop_assert!(g.compose(&g.inverse()).distance(&MobiusTransform::identity()) < 1e-12);
            prop_assert!(MobiusTransform::identity().compose(&g).distance(&g) < 1e-14 * g.alpha().norm());
        }

        #[test]
        fn chain_rule_and_associativity(
            g in arb_mobius(), h in arb_mobius(), k in arb_mobius(), z in arb_point(0.9)
        ) {
            let gh = g.compose(&h);
            let lhs = gh.derivative(z.value());
            let rhs = g.derivative(h.apply(z).value()) * h.derivative(z.value());
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            let a = gh.compose(&k);
            let b = g.compose(&h.compose(&k));
            prop_assert!(a.distance(&b) <= 1e-12 * a.alpha().norm().max(1.0));
        }

        #[test]
        fn two_point_invariants(g in arb_mobius(), z in arb_point(0.9), w in arb_point(0.9)) {
            let p = PointPair::new(z, w);
            let q = p.mapped(&g);
            prop_assert!((delta(&p) - delta(&q)).abs() < 1e-12);
            prop_assert!((t_coord(&p).norm() - t_coord(&q).norm()).abs() < 1e-12);
            prop_assert!((delta(&p) - (1.0 - t_coord(&p).norm_sqr())).abs() < 1e-13);
            let back = w_from_t(z, t_coord(&p)).unwrap();
            prop_assert!((back.value() - w.value()).norm() < 1e-13);
        }

        #[test]
        fn bracket_is_an_invariant_one_form(
            g in arb_mobius(), z in arb_point(0.8), w in arb_point(0.8), tau in arb_point(0.8)
        ) {
            let (zv, wv, tv) = (z.value(), w.value(), tau.value());
            prop_assume!((zv - wv).norm() > 1e-3 && (tv - zv).norm() > 1e-3 && (tv - wv).norm() > 1e-3);
            let b = bracket(w, tv, z).unwrap();
            let split = 1.0 / (wv - tv) + 1.0 / (tv - zv);
            prop_assert!((b - split).norm() <= 1e-13 * b.norm().max(1.0));
            let moved = bracket(g.apply(w), g.apply_complex(tv), g.apply(z)).unwrap() * g.derivative(tv);
            prop_assert!((moved - b).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }
}
