//! The acceptance suite A1-A10 as a seeded, machine-readable run.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bergman::{
    hardy_partial, min_hermitian_eigenvalue, KernelAssembler, KernelBasis, KernelFamily,
};
use crate::error::{Error, Result};
use crate::fuchsian::{density_shell_magnitudes, enumerate, pair_series, GeneratorSet};
use crate::jetext::{
    associated_coefficient, box0_residual, cr_residual, eval_series_at_zero, extend,
    extend_complex, recurrence_residual, JetSpec, NDifferential,
};
use crate::mobius::{DiskPoint, MobiusTransform, PointPair};
use crate::quadrature::QuadratureSpec;
use crate::specfun::{
    c_alpha, eigenvalue, gamma, log_gamma, moment_limit_with, moment_sum_with, norm_ratio,
};

pub const CRITERIA: [&str; 10] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Multiplies every numeric tolerance.
    pub tolerance_scale: f64,
    pub quad_nodes: usize,
    /// Relative perturbation applied to `norm_ratio` inside A4 (detector sanity hook).
    pub norm_ratio_perturbation: f64,
    /// Criteria to run; empty means all.
    pub suite: Vec<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance_scale: 1.0,
            quad_nodes: crate::quadrature::DEFAULT_NODES,
            norm_ratio_perturbation: 0.0,
            suite: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            tolerance,
            detail,
        }
    }

    fn within(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self::new(name, measured <= tolerance, measured, tolerance, detail)
    }

    fn errored(name: &str, e: &Error) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Fail,
            measured: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {e}"),
        }
    }

    /// `"A1 PASS measured=... tolerance=... detail"`.
    pub fn line(&self) -> String {
        let s = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        };
        format!(
            "{} {s} measured={:e} tolerance={:e} {}",
            self.name, self.measured, self.tolerance, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub holojet: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub status: Status,
    pub checks: Vec<Check>,
    pub versions: Versions,
    pub config: VerifyConfig,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Runs the selected criteria (all by default) in A1..A10 order.
pub fn run(cfg: &VerifyConfig) -> Result<RunReport> {
    let selected: Vec<&str> = if cfg.suite.is_empty() {
        CRITERIA.to_vec()
    } else {
        for s in &cfg.suite {
            if !CRITERIA.contains(&s.as_str()) {
                return Err(Error::Config(format!("unknown criterion `{s}`")));
            }
        }
        CRITERIA
            .iter()
            .copied()
            .filter(|c| cfg.suite.iter().any(|s| s == c))
            .collect()
    };
    let checks: Vec<Check> = selected.iter().map(|name| run_check(name, cfg)).collect();
    let status = if checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    };
    Ok(RunReport {
        status,
        checks,
        versions: Versions {
            holojet: env!("CARGO_PKG_VERSION"),
        },
        config: cfg.clone(),
    })
}

/// Runs one criterion by name. Unknown names produce a failing check.
pub fn run_check(name: &str, cfg: &VerifyConfig) -> Check {
    let Some(idx) = CRITERIA.iter().position(|c| *c == name) else {
        return Check::errored(name, &Error::Config(format!("unknown criterion `{name}`")));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(idx as u64 + 1);
    let quad = match QuadratureSpec::new(cfg.quad_nodes) {
        Ok(q) => q,
        Err(e) => return Check::errored(name, &e),
    };
    let ctx = Ctx {
        cfg,
        quad,
        scale: cfg.tolerance_scale,
    };
    let result = match idx {
        0 => ctx.a1(&mut rng),
        1 => ctx.a2(),
        2 => ctx.a3(&mut rng),
        3 => ctx.a4(),
        4 => ctx.a5(&mut rng),
        5 => ctx.a6(&mut rng),
        6 => ctx.a7(&mut rng),
        7 => ctx.a8(),
        8 => ctx.a9(&mut rng),
        _ => ctx.a10(&mut rng),
    };
    result.unwrap_or_else(|e| Check::errored(name, &e))
}

/// The three-family basis used by A9 and the sample kernel config.
pub fn mock_kernel_basis() -> KernelBasis {
    let c = Complex64::new;
    let fam = |order, coeffs: Vec<Complex64>, sq_norm| KernelFamily {
        psi: NDifferential::power_series(order, coeffs),
        sq_norm,
    };
    KernelBasis::new(
        vec![
            fam(2, vec![c(1.0, 0.0), c(0.0, 0.5)], 1.0),
            fam(3, vec![c(0.0, 0.0), c(1.0, 0.0), c(-0.25, 0.25)], 0.5),
            fam(
                4,
                vec![c(0.5, -0.5), c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)],
                2.0,
            ),
        ],
        2,
    )
    .expect("mock basis is valid")
}

fn unit_box(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_series(rng: &mut ChaCha8Rng, max_deg: usize) -> Vec<Complex64> {
    (0..=max_deg).map(|_| unit_box(rng)).collect()
}

/// Uniform in angle, uniform in radius on `[0, r)`.
fn random_point(rng: &mut ChaCha8Rng, r: f64) -> DiskPoint {
    let z = Complex64::from_polar(rng.gen_range(0.0..r), rng.gen_range(0.0..2.0 * PI));
    DiskPoint::new(z).expect("radius below one")
}

fn random_pair(rng: &mut ChaCha8Rng, r: f64) -> PointPair {
    PointPair::new(random_point(rng, r), random_point(rng, r))
}

/// 20 points on `|w| <= 0.8`: four radii by five angles.
fn w_grid() -> Vec<DiskPoint> {
    let mut out = Vec::with_capacity(20);
    for i in 1..=4 {
        for j in 0..5 {
            let z = Complex64::from_polar(0.2 * i as f64, 2.0 * PI * (j as f64 + 0.3) / 5.0);
            out.push(DiskPoint::new(z).expect("inside"));
        }
    }
    out
}

struct Ctx<'a> {
    cfg: &'a VerifyConfig,
    quad: QuadratureSpec,
    scale: f64,
}

impl Ctx<'_> {
    fn extender(&self, psi: NDifferential) -> impl Fn(Complex64, Complex64) -> Complex64 + '_ {
        move |z, w| extend_complex(&psi, z, w, &self.quad).unwrap_or(Complex64::new(f64::NAN, 0.0))
    }

    fn a1(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let tol = 1e-10 * self.scale;
        let mut worst = 0.0f64;
        for n in 1..=5 {
            let psi = NDifferential::power_series(n, random_series(rng, 8));
            for w in w_grid() {
                let a = extend(&psi, &PointPair::new(DiskPoint::origin(), w), &self.quad)?;
                let b = eval_series_at_zero(&psi, w, 40)?.value;
                worst = worst.max((a - b).norm());
            }
        }
        Ok(Check::within(
            "A1",
            worst,
            tol,
            "quadrature vs series at z = 0, N = 1..5".into(),
        ))
    }

    fn a2(&self) -> Result<Check> {
        let tol = 1e-11 * self.scale;
        let mut worst = 0.0f64;
        for n in 1..=6usize {
            for k in 0..=8usize {
                let (nf, kf) = (n as f64, k as f64);
                let coef = (log_gamma(2.0 * nf)? + log_gamma(nf + kf)?
                    - log_gamma(nf)?
                    - log_gamma(2.0 * nf + kf)?)
                .exp();
                let psi = NDifferential::monomial(n, k);
                for w in w_grid() {
                    let got = extend(&psi, &PointPair::new(DiskPoint::origin(), w), &self.quad)?;
                    let want = coef * w.value().powu((n + k) as u32);
                    worst = worst.max((got - want).norm());
                }
            }
        }
        Ok(Check::within(
            "A2",
            worst,
            tol,
            "monomials N <= 6, k <= 8".into(),
        ))
    }

    fn a3(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let tol = 1e-10 * self.scale;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let g = MobiusTransform::translation(random_point(rng, 0.7))
                .compose(&MobiusTransform::rotation(rng.gen_range(0.0..2.0 * PI)));
            let n = rng.gen_range(1..=5);
            let deg = rng.gen_range(0..=6);
            let psi = NDifferential::power_series(n, random_series(rng, deg));
            let p = random_pair(rng, 0.7);
            let lhs = extend(&psi.pullback(&g), &p, &self.quad)?;
            let rhs = extend(&psi, &p.mapped(&g), &self.quad)?;
            worst = worst.max((lhs - rhs).norm());
        }
        Ok(Check::within(
            "A3",
            worst,
            tol,
            "100 random (γ, ψ, z, w)".into(),
        ))
    }

    fn a4(&self) -> Result<Check> {
        let tol = 1e-8 * self.scale;
        let eps = self.cfg.norm_ratio_perturbation;
        let ratio = |n: usize, m: usize| norm_ratio(n, m) * (1.0 + eps);
        let mut worst = (0.0f64, 0usize, 0.0f64);
        let mut worst_limit = 0.0f64;
        for n in 1..=6 {
            for &alpha in &[-0.5, 0.0, 1.0, 2.0] {
                let target = c_alpha(n, alpha)?.value;
                let partial = moment_sum_with(n, alpha, 10_000, ratio)?.value;
                let err = (partial - target).abs();
                if err > worst.0 {
                    worst = (err, n, alpha);
                }
                let limit = moment_limit_with(n, alpha, 10_000, ratio)?.value;
                worst_limit = worst_limit.max((limit - target).abs());
            }
        }
        let gauss = (c_alpha(1, 0.0)?.value - 1.0).abs();
        let gauss_tol = 1e-12 * self.scale;
        let ok = worst.0 <= tol && gauss <= gauss_tol;
        let detail = format!(
            "partial sum at M = 1e4: worst at N = {}, alpha = {}; |c(1,0) - 1| = {gauss:e} \
             (tol {gauss_tol:e}); extrapolated ladder vs c: {worst_limit:e}",
            worst.1, worst.2
        );
        Ok(Check::new("A4", ok, worst.0, tol, detail))
    }

    fn a5(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let tol = 1e-9 * self.scale;
        let gens = GeneratorSet::regular_octagon();
        gens.validate()?;
        let ball = enumerate(&gens, 3)?;
        let one = NDifferential::power_series(4, vec![Complex64::new(1.0, 0.0)]);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let p = random_pair(rng, 0.6);
            let mut termwise = Complex64::new(0.0, 0.0);
            for g in ball.transforms() {
                termwise += extend(&one.pullback(&g), &p, &self.quad)?;
            }
            let series = pair_series(&ball, 4, &p).value;
            worst = worst.max((termwise - series).norm());
        }
        Ok(Check::within(
            "A5",
            worst,
            tol,
            format!(
                "octagon ball L = 3 ({} elements), N = 4, 5 pairs",
                ball.len()
            ),
        ))
    }

    fn a6(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let tol = 1e-6 * self.scale;
        let mut worst_cr = 0.0f64;
        for _ in 0..20 {
            let n = rng.gen_range(1..=4);
            let psi = NDifferential::power_series(n, random_series(rng, 4));
            let f = self.extender(psi);
            worst_cr = worst_cr.max(cr_residual(&f, &random_pair(rng, 0.8), 1e-4)?);
        }
        let spec = JetSpec::default();
        let mut worst_rec = 0.0f64;
        for n_ord in 1..=3 {
            let psi = NDifferential::power_series(n_ord, random_series(rng, 3));
            let f = self.extender(psi);
            for _ in 0..3 {
                let z = random_point(rng, 0.6);
                for n in 0..=n_ord + 3 {
                    worst_rec = worst_rec.max(recurrence_residual(&f, z, n, &spec, 1e-4)?);
                }
            }
        }
        let worst = worst_cr.max(worst_rec);
        Ok(Check::within(
            "A6",
            worst,
            tol,
            format!("Cauchy-Riemann {worst_cr:e} at 20 points; jet recurrence {worst_rec:e}"),
        ))
    }

    fn a7(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let tol = 1e-4 * self.scale;
        let points: Vec<DiskPoint> = (0..5).map(|_| random_point(rng, 0.5)).collect();
        let fine = JetSpec::default();
        let coarse = JetSpec {
            radius: None,
            nodes: 128,
        };
        let mut worst = 0.0f64;
        let (mut coarse_max, mut fine_max) = (0.0f64, 0.0f64);
        for n in 1..=3usize {
            let psi = NDifferential::power_series(n, random_series(rng, 3));
            let f = self.extender(psi);
            for m in 0..=3usize {
                let lambda = eigenvalue(n, m);
                let u_fine =
                    |x: Complex64| associated_coefficient(&f, DiskPoint::new(x)?, n + m, &fine);
                let u_coarse =
                    |x: Complex64| associated_coefficient(&f, DiskPoint::new(x)?, n + m, &coarse);
                for &z in &points {
                    let u0 = u_fine(z.value())?.norm();
                    let r = box0_residual(&u_fine, n + m, z, 1e-3, lambda)?;
                    worst = worst.max(r / (1.0 + lambda * u0));
                    fine_max = fine_max.max(r);
                    coarse_max = coarse_max.max(box0_residual(&u_coarse, n + m, z, 4e-3, lambda)?);
                }
            }
        }
        let refines = fine_max < coarse_max;
        Ok(Check::new(
            "A7",
            worst <= tol && refines,
            worst,
            tol,
            format!(
                "normalized residual; refinement (h 4e-3 -> 1e-3, jet nodes 128 -> 256): \
                 {coarse_max:e} -> {fine_max:e}"
            ),
        ))
    }

    fn a8(&self) -> Result<Check> {
        let tol = 0.05 * self.scale;
        let ms = [1_000usize, 10_000, 100_000];
        let mut worst = 0.0f64;
        let mut positive = true;
        let mut rows = Vec::new();
        for n in 1..=4 {
            let r: Vec<f64> = ms
                .iter()
                .map(|&m| Ok(hardy_partial(n, m)? / (m as f64).ln()))
                .collect::<Result<_>>()?;
            positive &= r.iter().all(|&x| x > 0.0);
            for w in r.windows(2) {
                worst = worst.max(((w[1] - w[0]) / w[0]).abs());
            }
            rows.push(format!("N={n}: {:.4} {:.4} {:.4}", r[0], r[1], r[2]));
        }
        let decay_tol = 0.01 * self.scale;
        let mut decay = 0.0f64;
        for n in 1..=4 {
            let a = 1e4 * norm_ratio(n, 10_000);
            let b = 2e4 * norm_ratio(n, 20_000);
            decay = decay.max(((b - a) / a).abs());
        }
        let ok = worst <= tol && positive && decay <= decay_tol;
        Ok(Check::new(
            "A8",
            ok,
            worst,
            tol,
            format!(
                "partial/ln M at M = 1e3, 1e4, 1e5: {}; m*ratio change 1e4 -> 2e4: {decay:e} (tol {decay_tol:e})",
                rows.join("; ")
            ),
        ))
    }

    fn a9(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let herm_tol = 1e-12 * self.scale;
        let psd_tol = -1e-10 * self.scale;
        let mut constant_ok = true;
        for g in 2..=4u32 {
            for &alpha in &[-0.5, 0.0, 1.0, 2.0] {
                let empty =
                    KernelAssembler::new(KernelBasis::new(vec![], g)?, alpha, self.quad.clone())?;
                let p = random_pair(rng, 0.5);
                let k = empty.eval(&p, &p)?;
                let want = gamma(alpha + 2.0)? / (PI * PI * (4.0 * g as f64 - 4.0));
                constant_ok &= k.re == want && k.im == 0.0;
            }
        }
        let k = KernelAssembler::new(mock_kernel_basis(), 0.0, self.quad.clone())?;
        let points: Vec<PointPair> = (0..8).map(|_| random_pair(rng, 0.8)).collect();
        let gram = k.gram(&points)?;
        let mut herm = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                herm = herm.max((gram[(i, j)] - gram[(j, i)].conj()).norm());
            }
        }
        let min_eig = min_hermitian_eigenvalue(&gram);
        let ok = constant_ok && herm <= herm_tol && min_eig > psd_tol;
        Ok(Check::new(
            "A9",
            ok,
            herm,
            herm_tol,
            format!(
                "constant term exact: {constant_ok}; Gram min eigenvalue {min_eig:e} (floor {psd_tol:e})"
            ),
        ))
    }

    fn a10(&self, rng: &mut ChaCha8Rng) -> Result<Check> {
        let tol = 1e-9 * self.scale;
        let gens = GeneratorSet::regular_octagon();
        let residual = gens.relation_residuals().into_iter().fold(0.0, f64::max);
        let (sizes, ambiguous) = match enumerate(&gens, 5) {
            Ok(ball) => {
                let sizes = ball.shell_sizes();
                let mut decays = true;
                let tau = random_point(rng, 0.5);
                for n in 2..=6 {
                    let mags = density_shell_magnitudes(&ball, n, tau);
                    decays &= mags[2..].windows(2).all(|w| w[1] < w[0]);
                }
                (Some((sizes, decays)), 0)
            }
            Err(Error::DiscretenessSuspect { .. }) => (None, 1),
            Err(e) => return Err(e),
        };
        let (growing, decays, sizes_text) = match &sizes {
            Some((s, d)) => (s.windows(2).all(|w| w[1] > w[0]), *d, format!("{s:?}")),
            None => (false, false, "enumeration aborted".into()),
        };
        let ok = residual <= tol && growing && ambiguous == 0 && decays;
        Ok(Check::new(
            "A10",
            ok,
            residual,
            tol,
            format!(
                "shells {sizes_text}, ambiguous dedup events {ambiguous}, shell sums decay (N = 2..6): {decays}"
            ),
        ))
    }
}
