//! Closed forms and independent oracles for the constant profile f = alpha:
//! exact radial solutions, perturbation ratios, the variation-of-parameters
//! cross-check, the direct eigenvalue double sum, and the contour
//! representation evaluated at integer s through its limit form.

use crate::error::Result;
use crate::numerics::{adaptive_quad, improper_quad_from, QuadratureSpec};
use crate::profile::{BumpSpec, ProfileSpec};
use crate::radial::solve_taylor_ratios;

/// A finite cylinder: radius alpha over the interval [a, b].
#[derive(Debug, Clone, Copy)]
pub struct CylinderConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl CylinderConfig {
    pub fn new(alpha: f64, a: f64, b: f64) -> Self {
        assert!(alpha > 0.0 && b > a);
        Self { alpha, a, b }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn profile(&self) -> ProfileSpec {
        ProfileSpec::constant(self.alpha, self.a, self.b)
    }

    /// Growth rate of the k-mode at uniform parameter u.
    fn rate(&self, k: f64, u: f64) -> f64 {
        k * (1.0 + u * u * self.alpha * self.alpha).sqrt() / self.alpha
    }
}

/// X_0(b; i lambda) = sinh(L lambda)/lambda (interval length at lambda = 0).
pub fn closed_x0(cfg: &CylinderConfig, lambda: f64) -> f64 {
    let len = cfg.length();
    if lambda == 0.0 {
        len
    } else {
        (len * lambda).sinh() / lambda
    }
}

/// ln X_0(b; i lambda), safe for large lambda.
pub fn closed_log_x0(cfg: &CylinderConfig, lambda: f64) -> f64 {
    assert!(lambda > 0.0);
    let x = cfg.length() * lambda;
    x - (2.0 * lambda).ln() + (-(-2.0 * x).exp()).ln_1p()
}

/// X_k(b; i u k) = alpha sinh(L k sqrt(1+u^2 alpha^2)/alpha) / (k sqrt(1+u^2 alpha^2)).
pub fn closed_xk(cfg: &CylinderConfig, k: u32, u: f64) -> f64 {
    let r = cfg.rate(k as f64, u);
    (cfg.length() * r).sinh() / r
}

/// ln X_k(b; i u k), safe for large arguments.
pub fn closed_log_xk(cfg: &CylinderConfig, k: f64, u: f64) -> f64 {
    let r = cfg.rate(k, u);
    let x = cfg.length() * r;
    x - (2.0 * r).ln() + (-(-2.0 * x).exp()).ln_1p()
}

/// cosh(y) * csch(x) for x > 0, evaluated in log space so that arguments in
/// the hundreds stay finite.
fn cosh_csch(y: f64, x: f64) -> f64 {
    let ya = y.abs();
    if x < 1e-4 {
        // both arguments tiny here (|y| <= x in every use below)
        return ya.cosh() / x.sinh();
    }
    let e = (ya - x).exp();
    e * (1.0 + (-2.0 * ya).exp()) / (1.0 - (-2.0 * x).exp())
}

/// 1 - coth(x) for x > 0 without cancellation.
fn one_minus_coth(x: f64) -> f64 {
    if x > 350.0 {
        0.0
    } else {
        -2.0 / (2.0 * x).exp_m1()
    }
}

fn bump_quad<F: Fn(f64) -> f64>(
    bump: &BumpSpec,
    cfg: &CylinderConfig,
    weight: F,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (lo, hi) = bump.support();
    let g = bump.g.clone();
    adaptive_quad(&|t| weight(t) * g(t), lo.max(cfg.a), hi.min(cfg.b), spec)
        .map(|(v, _)| v)
        .map_err(|e| e.in_context("cylinder bump integral"))
}

pub fn integral_of_bump(cfg: &CylinderConfig, bump: &BumpSpec, spec: &QuadratureSpec) -> Result<f64> {
    bump_quad(bump, cfg, |_| 1.0, spec)
}

/// Xhat_0/X_0 at i lambda:
/// -(lambda/alpha) int cosh((a+b-2t) lambda) csch(L lambda) g(t) dt,
/// with the lambda -> 0 limit -int g / (alpha L).
pub fn ratio0(
    cfg: &CylinderConfig,
    bump: &BumpSpec,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (a, b, alpha) = (cfg.a, cfg.b, cfg.alpha);
    if lambda < 1e-8 {
        return Ok(-integral_of_bump(cfg, bump, spec)? / (alpha * cfg.length()));
    }
    let len = cfg.length();
    let v = bump_quad(
        bump,
        cfg,
        |t| cosh_csch((a + b - 2.0 * t) * lambda, len * lambda),
        spec,
    )?;
    Ok(-(lambda / alpha) * v)
}

/// Xhat_k/X_k at i u k (the closed-form force integrand).
pub fn ratiok(
    cfg: &CylinderConfig,
    bump: &BumpSpec,
    k: f64,
    u: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (a, b, alpha) = (cfg.a, cfg.b, cfg.alpha);
    let beta = (1.0 + u * u * alpha * alpha).sqrt();
    let r = cfg.rate(k, u);
    let x = cfg.length() * r;
    let ig = integral_of_bump(cfg, bump, spec)?;
    let ua2 = u * u * alpha * alpha;
    let v = if ua2 == 0.0 {
        0.0
    } else {
        bump_quad(bump, cfg, |t| cosh_csch((a + b - 2.0 * t) * r, x), spec)?
    };
    // coth(x) int g + u^2 a^2 csch(x) int cosh(.) g, with the overall factor
    let coth = 1.0 - one_minus_coth(x);
    Ok(-(k / (alpha * alpha * beta)) * (coth * ig + ua2 * v))
}

/// The subtracted integrand of the cylinder energy-change series:
/// ratiok + k int g / (alpha^2 sqrt(1+u^2 alpha^2)), combined analytically so
/// the large-u cancellation costs no precision.
pub fn ratiok_plus_subtraction(
    cfg: &CylinderConfig,
    bump: &BumpSpec,
    k: f64,
    u: f64,
    int_g: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (a, b, alpha) = (cfg.a, cfg.b, cfg.alpha);
    let beta = (1.0 + u * u * alpha * alpha).sqrt();
    let r = cfg.rate(k, u);
    let x = cfg.length() * r;
    let ua2 = u * u * alpha * alpha;
    let v = if ua2 == 0.0 {
        0.0
    } else {
        bump_quad(bump, cfg, |t| cosh_csch((a + b - 2.0 * t) * r, x), spec)?
    };
    Ok((k / (alpha * alpha * beta)) * (one_minus_coth(x) * int_g - ua2 * v))
}

/// Report from recomputing Xhat through the explicit variation-of-parameters
/// route v1 X1 + v2 X2 and comparing with the closed-form ratio.
#[derive(Debug, Clone, Copy)]
pub struct VopReport {
    pub wronskian: f64,
    pub wronskian_expected: f64,
    pub ratio_vop: f64,
    pub ratio_closed: f64,
}

impl VopReport {
    pub fn agreement(&self) -> f64 {
        (self.ratio_vop - self.ratio_closed).abs()
    }
}

/// k = 0: fundamental pair e^{x lambda}, e^{-x lambda}; k != 0: same with
/// rate k sqrt(1+u^2 alpha^2)/alpha. The Wronskian is -2 (rate) in both
/// cases. `k = 0` uses `u` as the bare spectral parameter lambda.
pub fn variation_of_parameters_check(
    cfg: &CylinderConfig,
    bump: &BumpSpec,
    k: u32,
    u_or_lambda: f64,
    spec: &QuadratureSpec,
) -> Result<VopReport> {
    let (a, b, alpha) = (cfg.a, cfg.b, cfg.alpha);
    let (rate, ratio_closed) = if k == 0 {
        let lambda = u_or_lambda;
        (lambda, ratio0(cfg, bump, lambda, spec)?)
    } else {
        let u = u_or_lambda;
        (cfg.rate(k as f64, u), ratiok(cfg, bump, k as f64, u, spec)?)
    };
    // X1 = e^{x r}, X2 = e^{-x r}: W = X1 X2' - X1' X2 = -2r.
    let wronskian = -2.0 * rate;
    // v1(b) = (1/W) int X2 G dt and v2(b) = -(1/W) int X1 G dt with
    // G = (g'/alpha) X' + (2 k^2 g / alpha^3) X on the cylinder; the
    // g'-part is moved onto g by parts ((X2 X')' g etc., boundary terms
    // vanish by compact support). X is the initial-value solution
    // sinh((t-a) r)/r with X' = cosh((t-a) r).
    let k2 = (k as f64) * (k as f64);
    let g = bump.g.clone();
    let (lo, hi) = bump.support();
    let integrand_1 = |t: f64| {
        let s = (t - a) * rate;
        let x2 = (-(t * rate)).exp();
        let xp = s.cosh();
        let xv = s.sinh() / rate;
        // d/dt [X2 X'] = X2' X' + X2 X'' = -r X2 X' + r^2 X2 X
        let d_x2_xp = -rate * x2 * xp + x2 * rate * rate * xv;
        let extra = 2.0 * k2 / (alpha * alpha * alpha) * g(t) * x2 * xv;
        -d_x2_xp * g(t) / alpha + extra
    };
    let integrand_2 = |t: f64| {
        let s = (t - a) * rate;
        let x1 = (t * rate).exp();
        let xp = s.cosh();
        let xv = s.sinh() / rate;
        let d_x1_xp = rate * x1 * xp + x1 * rate * rate * xv;
        let extra = 2.0 * k2 / (alpha * alpha * alpha) * g(t) * x1 * xv;
        d_x1_xp * g(t) / alpha - extra
    };
    let (i1, _) = adaptive_quad(&integrand_1, lo.max(a), hi.min(b), spec)
        .map_err(|e| e.in_context("variation-of-parameters v1"))?;
    let (i2, _) = adaptive_quad(&integrand_2, lo.max(a), hi.min(b), spec)
        .map_err(|e| e.in_context("variation-of-parameters v2"))?;
    let v1 = i1 / wronskian;
    let v2 = i2 / wronskian;
    // Xhat(b) = v1(b) X1(b) + v2(b) X2(b)
    let x1b = (b * rate).exp();
    let x2b = (-(b * rate)).exp();
    let xhat_b = v1 * x1b + v2 * x2b;
    let xb = ((b - a) * rate).sinh() / rate;
    Ok(VopReport {
        wronskian,
        wronskian_expected: -2.0 * rate,
        ratio_vop: xhat_b / xb,
        ratio_closed,
    })
}

/// Cutoffs for the direct eigenvalue double sum.
#[derive(Debug, Clone, Copy)]
pub struct ZetaCutoffs {
    pub n_cut: usize,
    pub k_cut: usize,
}

impl Default for ZetaCutoffs {
    fn default() -> Self {
        Self {
            n_cut: 120,
            k_cut: 120,
        }
    }
}

fn loose_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-10, 28)
}

/// Partial n-sum of ((n pi / L)^2 + m^2)^{-s} plus a midpoint integral tail.
fn slice_sum(cfg: &CylinderConfig, m2: f64, s: f64, n_cut: usize) -> f64 {
    let step = std::f64::consts::PI / cfg.length();
    let mut sum = 0.0;
    for n in 1..=n_cut {
        let nn = n as f64 * step;
        sum += (nn * nn + m2).powf(-s);
    }
    let tail = improper_quad_from(
        &|x| {
            let xx = (n_cut as f64 + 0.5 + x) * step;
            (xx * xx + m2).powf(-s) * step
        },
        0.0,
        &loose_spec(),
    )
    .map(|(v, _)| v)
    .unwrap_or(0.0);
    sum + tail / step * step
}

/// One k-slice of the direct sum (exposed for tests: the k = 0 slice at
/// L = pi, s = 2 is zeta_R(4)).
pub fn zeta_direct_k_slice(cfg: &CylinderConfig, k: usize, s: f64, n_cut: usize) -> f64 {
    let m = k as f64 / cfg.alpha;
    slice_sum(cfg, m * m, s, n_cut)
}

fn zeta_direct_at(cfg: &CylinderConfig, s: f64, cuts: ZetaCutoffs) -> f64 {
    let mut total = slice_sum(cfg, 0.0, s, cuts.n_cut);
    for k in 1..=cuts.k_cut {
        let m = k as f64 / cfg.alpha;
        total += 2.0 * slice_sum(cfg, m * m, s, cuts.n_cut);
    }
    // midpoint tail over continuous k
    let tail = improper_quad_from(
        &|x| {
            let kappa = cuts.k_cut as f64 + 0.5 + x;
            let m = kappa / cfg.alpha;
            2.0 * slice_sum(cfg, m * m, s, cuts.n_cut)
        },
        0.0,
        &loose_spec(),
    )
    .map(|(v, _)| v)
    .unwrap_or(0.0);
    total + tail
}

/// Direct eigenvalue double sum zeta(s) = sum_{n >= 1, k in Z} lambda_{n,k}^{-2s}
/// for the cylinder spectrum lambda^2 = (n pi/L)^2 + (k/alpha)^2, s >= 2.
/// Returns the value computed at doubled cutoffs together with an error
/// bound taken from the cutoff-doubling difference.
pub fn eigenvalue_zeta_direct(cfg: &CylinderConfig, s: f64, cuts: ZetaCutoffs) -> (f64, f64) {
    assert!(s >= 2.0, "direct sum restricted to s >= 2");
    let v1 = zeta_direct_at(cfg, s, cuts);
    let v2 = zeta_direct_at(
        cfg,
        s,
        ZetaCutoffs {
            n_cut: cuts.n_cut * 2,
            k_cut: cuts.k_cut * 2,
        },
    );
    (v2, (v2 - v1).abs() + 1e-13 * v2.abs())
}

/// Result of the integer-s contour evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PipelineZeta {
    pub value: f64,
    pub k_used: usize,
    pub tail_bound: f64,
}

/// Taylor coefficients of log X_k(b; i y) in y^2 at y = 0 from the
/// variational-chain ratios.
fn log_taylor_coeffs(ratios: &[f64]) -> Vec<f64> {
    let r = |m: usize| if m == 0 { 1.0 } else { ratios[m - 1] };
    let mut c = vec![0.0; ratios.len() + 1];
    if !ratios.is_empty() {
        c[1] = r(1);
    }
    if ratios.len() >= 2 {
        c[2] = r(2) - 0.5 * r(1) * r(1);
    }
    if ratios.len() >= 3 {
        c[3] = r(3) - r(1) * r(2) + r(1).powi(3) / 3.0;
    }
    if ratios.len() >= 4 {
        c[4] = r(4) - r(1) * r(3) - 0.5 * r(2) * r(2) + r(1) * r(1) * r(2) - 0.25 * r(1).powi(4);
    }
    c
}

/// Contour representation of zeta at integer s in 2..=4, via its limit form:
/// at integer s only the y^{2s} Taylor coefficient c_s(k) of
/// log X_k(b; i y) survives the sin(pi s) factor, giving
/// zeta(s) = (-1)^{s+1} s [c_s(0) + 2 sum_{k>=1} c_s(k)].
pub fn zeta_pipeline_at_integer_s(
    cfg: &CylinderConfig,
    s: u32,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<PipelineZeta> {
    assert!((2..=4).contains(&s), "integer s supported in 2..=4");
    let profile = cfg.profile();
    let order = s as usize;
    let coeff = |k: f64| -> Result<f64> {
        let ratios = solve_taylor_ratios(&profile, k, order, tol)?;
        Ok(log_taylor_coeffs(&ratios)[order])
    };
    let sign = if s % 2 == 0 { -1.0 } else { 1.0 };
    let factor = sign * s as f64;

    let mut sum = coeff(0.0)?;
    let mut k = 0usize;
    let mut last = f64::INFINITY;
    while k < k_cap {
        k += 1;
        last = coeff(k as f64)?;
        sum += 2.0 * last;
        // midpoint-tail error of the continuation shrinks like k^-(2s+1);
        // stop once the projected correction error is negligible
        let proj = last.abs() * (k as f64) / (2.0 * s as f64 - 2.0);
        if k >= 8 && proj * 0.05 < 0.25 * tol.abs_tol {
            break;
        }
    }
    // signed midpoint tail correction over continuous kappa
    let (tail_corr, tail_err) = improper_quad_from(
        &|x| coeff(k as f64 + 0.5 + x).unwrap_or(0.0),
        0.0,
        &tol.scaled(10.0),
    )
    .map(|(v, e)| (2.0 * v, e))
    .unwrap_or((0.0, last.abs()));
    sum += tail_corr;
    Ok(PipelineZeta {
        value: factor * sum,
        k_used: k,
        tail_bound: (factor.abs()) * (tail_err + last.abs() / 24.0),
    })
}

/// Finite-difference oracle for the energy change: central differences of
/// the assembled energy on perturbed profiles, Richardson-extrapolated over
/// a halving epsilon sequence.
#[derive(Debug, Clone)]
pub struct FdDerivative {
    /// Richardson-extrapolated derivative from the two smallest steps.
    pub derivative: f64,
    /// Central-difference quotients, one per requested epsilon.
    pub quotients: Vec<(f64, f64)>,
    /// Observed convergence orders log2(d_i - d_{i+1})/(d_{i+1} - d_{i+2}).
    pub orders: Vec<f64>,
}

pub fn finite_difference_energy_derivative(
    cfg: &CylinderConfig,
    bump: &BumpSpec,
    epsilons: &[f64],
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<FdDerivative> {
    let profile = cfg.profile();
    let mut quotients = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if eps == 0.0 {
            quotients.push((0.0, 0.0));
            continue;
        }
        let plus = crate::profile::perturbed_profile(&profile, bump, eps)?;
        let minus = crate::profile::perturbed_profile(&profile, bump, -eps)?;
        let e_plus = crate::speczeta::casimir_energy(&plus, k_cap, tol)?.energy;
        let e_minus = crate::speczeta::casimir_energy(&minus, k_cap, tol)?.energy;
        quotients.push((eps, (e_plus - e_minus) / (2.0 * eps)));
    }
    let mut orders = Vec::new();
    for w in quotients.windows(3) {
        let (d0, d1, d2) = (w[0].1, w[1].1, w[2].1);
        let num = (d0 - d1).abs();
        let den = (d1 - d2).abs();
        if den > 0.0 {
            // assumes a halving epsilon sequence
            orders.push((num / den).log2());
        }
    }
    let derivative = match quotients.len() {
        0 => 0.0,
        1 => quotients[0].1,
        n => {
            let d_last = quotients[n - 1].1;
            let d_prev = quotients[n - 2].1;
            (4.0 * d_last - d_prev) / 3.0
        }
    };
    Ok(FdDerivative {
        derivative,
        quotients,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::make_gaussian_bump;
    use crate::radial::{solve_perturbation_ratio, RadialProblem};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-12, 1e-11, 30)
    }

    fn unit() -> CylinderConfig {
        CylinderConfig::new(1.0, 0.0, 1.0)
    }

    #[test]
    fn closed_x0_limits() {
        assert_eq!(closed_x0(&unit(), 0.0), 1.0);
        assert!((closed_x0(&unit(), 1.0) - 1.0f64.sinh()).abs() < 1e-15);
        let cfg2 = CylinderConfig::new(2.0, 0.0, 1.0);
        // alpha=2, k=1, u=0: rate = 1/2, X = 2 sinh(L/2)
        assert!((closed_xk(&cfg2, 1, 0.0) - 2.0 * 0.5f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn log_forms_match_plain_forms() {
        let cfg = unit();
        for lambda in [0.5, 2.0, 10.0] {
            assert!((closed_log_x0(&cfg, lambda) - closed_x0(&cfg, lambda).ln()).abs() < 1e-12);
        }
        for (k, u) in [(1u32, 0.3), (4, 1.5)] {
            assert!(
                (closed_log_xk(&cfg, k as f64, u) - closed_xk(&cfg, k, u).ln()).abs() < 1e-12
            );
        }
    }

    #[test]
    fn ratio_zero_for_zero_bump() {
        let bump = BumpSpec {
            c: 0.5,
            delta: 0.1,
            g: std::sync::Arc::new(|_| 0.0),
            g_prime: std::sync::Arc::new(|_| 0.0),
            g_double_prime: std::sync::Arc::new(|_| 0.0),
        };
        assert_eq!(ratio0(&unit(), &bump, 1.0, &spec()).unwrap(), 0.0);
        assert_eq!(ratiok(&unit(), &bump, 2.0, 1.0, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn ratio_invariant_under_bump_reflection() {
        let cfg = unit();
        let b1 = make_gaussian_bump(0.3, 0.2);
        let b2 = make_gaussian_bump(0.7, 0.2);
        for lambda in [0.4, 2.0, 9.0] {
            let r1 = ratio0(&cfg, &b1, lambda, &spec()).unwrap();
            let r2 = ratio0(&cfg, &b2, lambda, &spec()).unwrap();
            assert!((r1 - r2).abs() < 1e-10, "lambda = {lambda}: {r1} vs {r2}");
        }
        for (k, u) in [(1.0, 0.5), (3.0, 2.0)] {
            let r1 = ratiok(&cfg, &b1, k, u, &spec()).unwrap();
            let r2 = ratiok(&cfg, &b2, k, u, &spec()).unwrap();
            assert!((r1 - r2).abs() < 1e-10);
        }
    }

    #[test]
    fn ratio_matches_generic_ode_solver() {
        let cfg = unit();
        let bump = make_gaussian_bump(0.5, 0.3);
        let closed = ratio0(&cfg, &bump, 1.0, &spec()).unwrap();
        let rp = RadialProblem::new(cfg.profile(), 0, 1.0);
        let generic = solve_perturbation_ratio(&rp, &bump, &spec()).unwrap();
        assert!(
            (closed - generic).abs() < 1e-8,
            "closed {closed} vs generic {generic}"
        );
        let closed_k = ratiok(&cfg, &bump, 2.0, 1.0, &spec()).unwrap();
        let rp_k = RadialProblem::new(cfg.profile(), 2, 2.0);
        let generic_k = solve_perturbation_ratio(&rp_k, &bump, &spec()).unwrap();
        assert!(
            (closed_k - generic_k).abs() < 1e-8,
            "closed {closed_k} vs generic {generic_k}"
        );
    }

    #[test]
    fn vop_wronskians_and_route_agreement() {
        let cfg = unit();
        let bump = make_gaussian_bump(0.5, 0.25);
        let r0 = variation_of_parameters_check(&cfg, &bump, 0, 1.3, &spec()).unwrap();
        assert_eq!(r0.wronskian, -2.0 * 1.3);
        assert!(r0.agreement() < 1e-9, "k=0 agreement {}", r0.agreement());
        for (k, u) in [(1u32, 0.2), (1, 1.0), (2, 0.5), (3, 1.5), (2, 2.0)] {
            let rep = variation_of_parameters_check(&cfg, &bump, k, u, &spec()).unwrap();
            let expect_w = -2.0 * (k as f64) * (1.0 + u * u).sqrt();
            assert!((rep.wronskian - expect_w).abs() < 1e-12);
            assert!(
                rep.agreement() < 1e-9,
                "(k,u)=({k},{u}): {} vs {}",
                rep.ratio_vop,
                rep.ratio_closed
            );
        }
    }

    #[test]
    fn direct_zeta_k0_slice_is_riemann_zeta4() {
        // L = pi: lambda_{n,0}^2 = n^2, so the k = 0 slice at s = 2 is zeta_R(4).
        let cfg = CylinderConfig::new(1.0, 0.0, std::f64::consts::PI);
        let v = zeta_direct_k_slice(&cfg, 0, 2.0, 200);
        let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((v - zeta4).abs() < 1e-9, "slice {v} vs zeta(4) {zeta4}");
    }

    #[test]
    fn direct_zeta_monotone_in_s() {
        // all lambda^2 > 1 for L = 1, so termwise the s = 3 sum is smaller
        let cfg = unit();
        let (v2, _) = eigenvalue_zeta_direct(&cfg, 2.0, ZetaCutoffs::default());
        let (v3, _) = eigenvalue_zeta_direct(&cfg, 3.0, ZetaCutoffs::default());
        assert!(v3 < v2);
    }

    #[test]
    fn direct_zeta_tail_bound_is_honest() {
        let cfg = unit();
        let cuts = ZetaCutoffs { n_cut: 60, k_cut: 60 };
        let (v, bound) = eigenvalue_zeta_direct(&cfg, 2.0, cuts);
        let (v2, _) = eigenvalue_zeta_direct(
            &cfg,
            2.0,
            ZetaCutoffs {
                n_cut: 120,
                k_cut: 120,
            },
        );
        assert!((v2 - v).abs() <= bound, "drift {} vs bound {}", (v2 - v).abs(), bound);
    }

    #[test]
    fn pipeline_zeta_matches_direct_sum() {
        let tol = QuadratureSpec::new(1e-8, 1e-10, 30);
        for (len, s) in [(1.0, 2u32), (2.0, 2), (1.0, 3)] {
            let cfg = CylinderConfig::new(1.0, 0.0, len);
            let pipe = zeta_pipeline_at_integer_s(&cfg, s, 400, &tol).unwrap();
            let (direct, dbound) = eigenvalue_zeta_direct(&cfg, s as f64, ZetaCutoffs::default());
            assert!(
                (pipe.value - direct).abs() < 1e-6 + dbound,
                "L={len}, s={s}: pipeline {} vs direct {}",
                pipe.value,
                direct
            );
        }
    }

    #[test]
    fn pipeline_zeta_grows_with_length() {
        let tol = QuadratureSpec::new(1e-8, 1e-10, 30);
        let z1 = zeta_pipeline_at_integer_s(&CylinderConfig::new(1.0, 0.0, 1.0), 2, 400, &tol)
            .unwrap()
            .value;
        let z2 = zeta_pipeline_at_integer_s(&CylinderConfig::new(1.0, 0.0, 2.0), 2, 400, &tol)
            .unwrap()
            .value;
        assert!(z2 > z1);
    }
}
