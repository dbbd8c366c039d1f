//! Profile functions, compactly supported bump perturbations, and the
//! perturbed profile f + eps * g.

use std::sync::Arc;

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of uniform points in the validation grid.
const GRID_POINTS: usize = 2048;
/// Relative tolerance for the derivative-consistency checks.
const DERIV_RTOL: f64 = 1e-6;

/// A positive profile on [a, b] with analytically supplied first and second
/// derivatives. Immutable after construction; evaluation is pure.
#[derive(Clone)]
pub struct ProfileSpec {
    pub a: f64,
    pub b: f64,
    pub f: RealFn,
    pub f_prime: RealFn,
    pub f_double_prime: RealFn,
}

impl std::fmt::Debug for ProfileSpec {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(out, "ProfileSpec {{ a: {}, b: {} }}", self.a, self.b)
    }
}

impl ProfileSpec {
    /// Build without running any checks. `validate_profile` can be applied
    /// afterwards; the checked constructor is `new`.
    pub fn new_unchecked(a: f64, b: f64, f: RealFn, f_prime: RealFn, f_double_prime: RealFn) -> Self {
        assert!(b > a, "profile interval must have b > a");
        Self {
            a,
            b,
            f,
            f_prime,
            f_double_prime,
        }
    }

    /// Build and validate: positivity on the grid and consistency of the
    /// supplied derivatives against finite differences.
    pub fn new(a: f64, b: f64, f: RealFn, f_prime: RealFn, f_double_prime: RealFn) -> Result<Self> {
        let p = Self::new_unchecked(a, b, f, f_prime, f_double_prime);
        let report = validate_profile(&p);
        if let Some((x, value)) = report.positivity_violation {
            return Err(Error::PositivityViolation { x, value });
        }
        if !report.derivatives_consistent {
            return Err(Error::InvalidProfile(format!(
                "derivative consistency residuals {:.3e} (f') / {:.3e} (f'') exceed {DERIV_RTOL:.0e}",
                report.max_residual_f_prime, report.max_residual_f_double_prime
            )));
        }
        Ok(p)
    }

    /// The constant profile f = alpha (a finite cylinder of radius alpha).
    pub fn constant(alpha: f64, a: f64, b: f64) -> Self {
        assert!(alpha > 0.0);
        Self::new_unchecked(
            a,
            b,
            Arc::new(move |_| alpha),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        )
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// The validation grid: uniform points plus clusters near both endpoints.
    pub fn validation_grid(&self) -> Vec<f64> {
        let mut grid = Vec::with_capacity(GRID_POINTS + 16);
        let len = self.length();
        for i in 0..GRID_POINTS {
            grid.push(self.a + len * (i as f64 + 0.5) / GRID_POINTS as f64);
        }
        for k in 1..=8 {
            let off = len * 1e-6 * k as f64;
            grid.push(self.a + off);
            grid.push(self.b - off);
        }
        grid
    }
}

/// Diagnostics from `validate_profile`; failures are carried, not raised.
#[derive(Debug, Clone)]
pub struct ProfileReport {
    pub grid_points: usize,
    pub min_f: f64,
    pub min_f_at: f64,
    pub positivity_violation: Option<(f64, f64)>,
    pub max_residual_f_prime: f64,
    pub max_residual_f_double_prime: f64,
    pub derivatives_consistent: bool,
}

impl ProfileReport {
    pub fn is_ok(&self) -> bool {
        self.positivity_violation.is_none() && self.derivatives_consistent
    }
}

/// Check positivity of f and consistency of f'/f'' with central finite
/// differences of f/f' on the validation grid.
pub fn validate_profile(p: &ProfileSpec) -> ProfileReport {
    let grid = p.validation_grid();
    let len = p.length();
    let h = (1e-5 * len).clamp(1e-9, 1e-3);

    let mut min_f = f64::INFINITY;
    let mut min_f_at = p.a;
    let mut violation = None;
    let mut r1_max: f64 = 0.0;
    let mut r2_max: f64 = 0.0;

    for &x in &grid {
        let fx = (p.f)(x);
        if fx < min_f {
            min_f = fx;
            min_f_at = x;
        }
        if fx <= 0.0 && violation.is_none() {
            violation = Some((x, fx));
        }
        // interior-shifted central stencil
        let xc = x.clamp(p.a + h, p.b - h);
        let fd1 = ((p.f)(xc + h) - (p.f)(xc - h)) / (2.0 * h);
        let fp = (p.f_prime)(xc);
        r1_max = r1_max.max((fd1 - fp).abs() / (fp.abs().max(fd1.abs()) + 1.0));
        let fd2 = ((p.f_prime)(xc + h) - (p.f_prime)(xc - h)) / (2.0 * h);
        let fpp = (p.f_double_prime)(xc);
        r2_max = r2_max.max((fd2 - fpp).abs() / (fpp.abs().max(fd2.abs()) + 1.0));
    }

    ProfileReport {
        grid_points: grid.len(),
        min_f,
        min_f_at,
        positivity_violation: violation,
        max_residual_f_prime: r1_max,
        max_residual_f_double_prime: r2_max,
        derivatives_consistent: r1_max < DERIV_RTOL && r2_max < DERIV_RTOL,
    }
}

/// A smooth perturbation with compact support (c - delta, c + delta); g and
/// all of its derivatives vanish at the support edges.
#[derive(Clone)]
pub struct BumpSpec {
    pub c: f64,
    pub delta: f64,
    pub g: RealFn,
    pub g_prime: RealFn,
    pub g_double_prime: RealFn,
}

impl std::fmt::Debug for BumpSpec {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(out, "BumpSpec {{ c: {}, delta: {} }}", self.c, self.delta)
    }
}

impl BumpSpec {
    pub fn support(&self) -> (f64, f64) {
        (self.c - self.delta, self.c + self.delta)
    }

    /// The open support must sit inside the open interval (a, b); a support
    /// edge may coincide with an endpoint since g vanishes there to all
    /// orders.
    pub fn fits_inside(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = self.support();
        lo >= a && hi <= b
    }
}

/// Exponent cap beyond which the bump kernel is numerically zero; keeps the
/// rational prefactors of the derivatives from touching inf * 0.
const BUMP_EXP_CAP: f64 = 1300.0;

fn bump_kernel(z: f64, delta: f64) -> (f64, f64, f64) {
    // One lobe of exp(-(z/(z^2 - delta^2))^2) and its closed-form first and
    // second derivatives; zero outside |z| < delta (the edge limit is 0).
    if z.abs() >= delta {
        return (0.0, 0.0, 0.0);
    }
    let den = z * z - delta * delta;
    let w = z / den;
    if w * w > BUMP_EXP_CAP {
        return (0.0, 0.0, 0.0);
    }
    let e = (-w * w).exp();
    let wp = -(z * z + delta * delta) / (den * den);
    let wpp = 2.0 * z * (z * z + 3.0 * delta * delta) / (den * den * den);
    let g = e;
    let gp = -2.0 * w * wp * e;
    let gpp = e * (4.0 * w * w * wp * wp - 2.0 * (wp * wp + w * wpp));
    (g, gp, gpp)
}

/// Gaussian-type bump centered at c with half-width delta.
pub fn make_gaussian_bump(c: f64, delta: f64) -> BumpSpec {
    assert!(delta > 0.0, "bump half-width must be positive");
    BumpSpec {
        c,
        delta,
        g: Arc::new(move |x| bump_kernel(x - c, delta).0),
        g_prime: Arc::new(move |x| bump_kernel(x - c, delta).1),
        g_double_prime: Arc::new(move |x| bump_kernel(x - c, delta).2),
    }
}

/// Mixed bump: a positive lobe on (c - delta, c) and a negative lobe on
/// (c, c + delta); odd about c.
pub fn make_mixed_gaussian_bump(c: f64, delta: f64) -> BumpSpec {
    assert!(delta > 0.0, "bump half-width must be positive");
    let half = delta / 2.0;
    let lobe = move |x: f64| -> (f64, f64, f64) {
        if x < c {
            bump_kernel(x - (c - half), half)
        } else {
            let (g, gp, gpp) = bump_kernel(x - (c + half), half);
            (-g, -gp, -gpp)
        }
    };
    BumpSpec {
        c,
        delta,
        g: Arc::new(move |x| lobe(x).0),
        g_prime: Arc::new(move |x| lobe(x).1),
        g_double_prime: Arc::new(move |x| lobe(x).2),
    }
}

/// The perturbed profile f + eps * g. Endpoints are unchanged; fails with
/// `PositivityViolation` when the sum dips below zero on the validation grid.
pub fn perturbed_profile(p: &ProfileSpec, bump: &BumpSpec, epsilon: f64) -> Result<ProfileSpec> {
    if !bump.fits_inside(p.a, p.b) {
        return Err(Error::InvalidProfile(format!(
            "bump support ({}, {}) is not inside ({}, {})",
            bump.c - bump.delta,
            bump.c + bump.delta,
            p.a,
            p.b
        )));
    }
    let (f, g) = (p.f.clone(), bump.g.clone());
    let (fp, gp) = (p.f_prime.clone(), bump.g_prime.clone());
    let (fpp, gpp) = (p.f_double_prime.clone(), bump.g_double_prime.clone());
    let out = ProfileSpec::new_unchecked(
        p.a,
        p.b,
        Arc::new(move |x| f(x) + epsilon * g(x)),
        Arc::new(move |x| fp(x) + epsilon * gp(x)),
        Arc::new(move |x| fpp(x) + epsilon * gpp(x)),
    );
    for x in out.validation_grid() {
        let v = (out.f)(x);
        if v <= 0.0 {
            return Err(Error::PositivityViolation { x, value: v });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{adaptive_quad, QuadratureSpec};
    use proptest::prelude::*;

    fn unit_profile() -> ProfileSpec {
        ProfileSpec::constant(1.0, 0.0, 1.0)
    }

    #[test]
    fn gaussian_bump_center_and_edges() {
        let b = make_gaussian_bump(0.5, 0.3);
        assert_eq!((b.g)(0.5), 1.0);
        assert_eq!((b.g)(0.2), 0.0);
        assert_eq!((b.g)(0.8), 0.0);
        assert_eq!((b.g)(1.5), 0.0);
    }

    #[test]
    fn gaussian_bump_value_at_055() {
        // g(0.55) for c = 0.5, delta = 0.1: z = 0.05, w = z/(z^2 - 0.01),
        // g = exp(-w^2) = exp(-(0.05/-0.0075)^2) = exp(-400/9);
        // frozen from a 30-digit evaluation of the closed formula.
        let b = make_gaussian_bump(0.5, 0.1);
        let expect = 4.989109392795010672e-20;
        let got = (b.g)(0.55);
        assert!(
            ((got - expect) / expect).abs() < 1e-12,
            "g(0.55) = {got:e}, expected {expect:e}"
        );
    }

    #[test]
    fn gaussian_bump_smooth_at_edges() {
        let b = make_gaussian_bump(0.5, 0.3);
        for x in [0.2, 0.8, 0.2 - 1e-9, 0.8 + 1e-9, 0.19, 0.81] {
            assert!((b.g)(x).abs() < 1e-12);
            assert!((b.g_prime)(x).abs() < 1e-12);
            assert!((b.g_double_prime)(x).abs() < 1e-12);
        }
        // derivatives stay finite (no inf * 0 NaN) approaching the edge
        for x in [0.2 + 1e-7, 0.8 - 1e-7, 0.2 + 1e-3, 0.8 - 1e-3] {
            assert!((b.g_prime)(x).is_finite());
            assert!((b.g_double_prime)(x).is_finite());
        }
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let b = make_gaussian_bump(0.5, 0.3);
        let h = 1e-6;
        for &x in &[0.35, 0.5, 0.62, 0.75] {
            let fd1 = ((b.g)(x + h) - (b.g)(x - h)) / (2.0 * h);
            assert!(((b.g_prime)(x) - fd1).abs() < 1e-7, "x = {x}");
            let fd2 = ((b.g_prime)(x + h) - (b.g_prime)(x - h)) / (2.0 * h);
            assert!(((b.g_double_prime)(x) - fd2).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn mixed_bump_is_odd_about_center() {
        let b = make_mixed_gaussian_bump(0.5, 0.3);
        assert_eq!((b.g)(0.5), 0.0);
        let lobe_center = 0.5 - 0.15;
        assert!(((b.g)(lobe_center) - 1.0).abs() < 1e-15);
        assert!(((b.g)(0.5 + 0.15) + 1.0).abs() < 1e-15);
        for t in [0.01, 0.05, 0.1, 0.2, 0.29] {
            let s = (b.g)(0.5 + t) + (b.g)(0.5 - t);
            assert!(s.abs() < 1e-15, "t = {t}: asymmetry {s}");
        }
    }

    #[test]
    fn bump_gradient_integrates_to_zero() {
        let spec = QuadratureSpec::default();
        for bump in [make_gaussian_bump(0.5, 0.3), make_mixed_gaussian_bump(0.5, 0.3)] {
            let (lo, hi) = bump.support();
            let g_prime = bump.g_prime.clone();
            let (v, _) = adaptive_quad(&|x| g_prime(x), lo, hi, &spec).unwrap();
            assert!(v.abs() < 1e-10, "int g' = {v:e}");
        }
    }

    #[test]
    fn mixed_bump_integrates_to_zero() {
        let spec = QuadratureSpec::default();
        let bump = make_mixed_gaussian_bump(0.5, 0.3);
        let (lo, hi) = bump.support();
        let g = bump.g.clone();
        let (v, _) = adaptive_quad(&|x| g(x), lo, hi, &spec).unwrap();
        assert!(v.abs() < 1e-10, "int g = {v:e}");
    }

    #[test]
    fn perturbed_profile_identity_at_zero_epsilon() {
        let p = unit_profile();
        let bump = make_gaussian_bump(0.5, 0.3);
        let q = perturbed_profile(&p, &bump, 0.0).unwrap();
        for x in q.validation_grid() {
            assert_eq!((q.f)(x), (p.f)(x));
        }
    }

    #[test]
    fn perturbed_profile_adds_bump_at_center() {
        let p = unit_profile();
        let bump = make_gaussian_bump(0.5, 0.3);
        let q = perturbed_profile(&p, &bump, 0.1).unwrap();
        assert!(((q.f)(0.5) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn perturbed_profile_detects_positivity_violation() {
        let p = unit_profile();
        let bump = make_gaussian_bump(0.5, 0.3);
        let res = perturbed_profile(&p, &bump, -2.0);
        assert!(matches!(res, Err(Error::PositivityViolation { .. })));
    }

    #[test]
    fn validate_accepts_constant() {
        let report = validate_profile(&unit_profile());
        assert!(report.is_ok());
        assert_eq!(report.min_f, 1.0);
    }

    #[test]
    fn validate_flags_inconsistent_derivative() {
        let p = ProfileSpec::new_unchecked(
            0.0,
            1.0,
            Arc::new(|x| 1.0 + x),
            Arc::new(|_| 0.0), // wrong on purpose
            Arc::new(|_| 0.0),
        );
        let report = validate_profile(&p);
        assert!(!report.derivatives_consistent);
        assert!(report.max_residual_f_prime > 0.1);
        assert!(ProfileSpec::new(
            0.0,
            1.0,
            Arc::new(|x| 1.0 + x),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0)
        )
        .is_err());
    }

    #[test]
    fn validate_flags_positivity_failure() {
        let p = ProfileSpec::new_unchecked(
            0.0,
            1.0,
            Arc::new(|x| x - 0.5),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        );
        let report = validate_profile(&p);
        assert!(report.positivity_violation.is_some());
        assert!(!report.is_ok());
    }

    proptest! {
        #[test]
        fn epsilon_additivity(e1 in -0.3f64..0.3, e2 in -0.3f64..0.3) {
            let p = unit_profile();
            let bump = make_gaussian_bump(0.5, 0.3);
            prop_assume!(1.0 + (e1 + e2) > 0.05 && 1.0 + e1 > 0.05);
            let once = perturbed_profile(&p, &bump, e1 + e2).unwrap();
            let twice =
                perturbed_profile(&perturbed_profile(&p, &bump, e1).unwrap(), &bump, e2).unwrap();
            for i in 0..64 {
                let x = i as f64 / 63.0;
                prop_assert!(((once.f)(x) - (twice.f)(x)).abs() < 1e-14);
            }
        }

        #[test]
        fn mixed_bump_antisymmetry(t in 1e-6f64..0.299) {
            let b = make_mixed_gaussian_bump(0.5, 0.3);
            prop_assert!(((b.g)(0.5 + t) + (b.g)(0.5 - t)).abs() < 1e-14);
        }
    }
}
