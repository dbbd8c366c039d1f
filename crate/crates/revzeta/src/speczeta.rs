//! Assembly of the zeta ledger: asymptotic A-terms and finite Z-terms at the
//! determinant point (s = 0 derivatives) and the energy point (s = -1/2),
//! their variations under a bump perturbation, and the total energy change.
//!
//! Conventions carried throughout:
//! - the k = 0 subtraction at order N removes log A+ and the powers
//!   lambda^{-i}, i = -1..N-2; at N = 4 the boundary-constant series
//!   contributes the extra lambda^{-2} coefficient -s_1(a)/s_{-1}(a), which
//!   is folded into the i = 2 subtraction weight;
//! - the k != 0 subtraction is the same construction in powers of k at
//!   fixed u;
//! - all improper integrals are evaluated by parts first (no numerical
//!   d/d lambda of solver output), then mapped to [0, 1).

use rayon::prelude::*;

use crate::cylinder::{integral_of_bump, ratio0, ratiok_plus_subtraction, CylinderConfig};
use crate::error::{Error, Result};
use crate::numerics::{
    adaptive_quad, improper_quad, integral_tail_estimate, QuadratureSpec, SeriesResult,
};
use crate::profile::{BumpSpec, ProfileSpec};
use crate::radial::{
    subtracted_log_x0, subtracted_log_xk, solve_ratio_reduced, solve_radial, RadialProblem,
};
use crate::symexpr::EvalCtx;
use crate::wkb::{ds_tree, dw_tree, eval_tree, s_tree, w_tree};

/// zeta_R'(-2) = -zeta(3)/(4 pi^2), to 20 digits.
pub const ZETA_R_PRIME_MINUS_2: f64 = -0.030448457058393270780;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPoint {
    /// s = 0, derivative values (functional determinant).
    DetPoint,
    /// s = -1/2 (Casimir energy).
    EnergyPoint,
}

/// Finite part and residue of one meromorphic term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TermValue {
    pub finite_part: f64,
    pub residue: f64,
}

/// A-terms indexed by i = -1, 0, 1, 2.
#[derive(Debug, Clone, Default)]
pub struct TermTable {
    values: [TermValue; 4],
}

impl TermTable {
    pub fn get(&self, i: i32) -> TermValue {
        self.values[(i + 1) as usize]
    }

    fn set(&mut self, i: i32, v: TermValue) {
        self.values[(i + 1) as usize] = v;
    }

    pub fn finite_sum(&self) -> f64 {
        self.values.iter().map(|v| v.finite_part).sum()
    }

    pub fn residue_sum(&self) -> f64 {
        self.values.iter().map(|v| v.residue).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorBudget {
    /// Sum of quadrature error estimates.
    pub quadrature: f64,
    /// Certified bound on the discarded k-series tail.
    pub series_tail: f64,
    /// Bound on the discarded large-lambda / large-u integral tails.
    pub integral_tail: f64,
}

/// The full ledger at one evaluation point.
#[derive(Debug, Clone)]
pub struct ZetaDecomposition {
    pub at: EvalPoint,
    pub a0_terms: TermTable,
    pub aneq_terms: TermTable,
    pub z0: f64,
    pub zneq: f64,
    pub k_used: usize,
    pub error_budget: ErrorBudget,
}

impl ZetaDecomposition {
    pub fn total_finite(&self) -> f64 {
        self.z0 + self.zneq + self.a0_terms.finite_sum() + self.aneq_terms.finite_sum()
    }

    pub fn total_residue(&self) -> f64 {
        self.a0_terms.residue_sum() + self.aneq_terms.residue_sum()
    }
}

fn quad(
    fun: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
    what: &'static str,
) -> Result<f64> {
    adaptive_quad(&|x| fun(x), lo, hi, spec)
        .map(|(v, _)| v)
        .map_err(|e| e.in_context(what))
}

fn fp(p: &ProfileSpec, x: f64) -> f64 {
    (p.f_prime)(x)
}

fn fv(p: &ProfileSpec, x: f64) -> f64 {
    (p.f)(x)
}

fn fpp(p: &ProfileSpec, x: f64) -> f64 {
    (p.f_double_prime)(x)
}

/// The six printed derivative values A'(0) entering the determinant.
#[derive(Debug, Clone, Copy)]
pub struct DetATerms {
    pub a0_m1: f64,
    pub a0_0: f64,
    pub a0_1: f64,
    pub aneq_m1: f64,
    pub aneq_0: f64,
    pub aneq_1: f64,
}

impl DetATerms {
    pub fn sum(&self) -> f64 {
        self.a0_m1 + self.a0_0 + self.a0_1 + self.aneq_m1 + self.aneq_0 + self.aneq_1
    }
}

pub fn a_terms_det(p: &ProfileSpec, spec: &QuadratureSpec) -> Result<DetATerms> {
    let (a, b) = (p.a, p.b);
    let a0_m1 = -quad(&|t| (1.0 + fp(p, t).powi(2)).sqrt(), a, b, spec, "A0_-1'(0)")?;
    let a0_1 = -quad(
        &|t| {
            let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
            let opf = 1.0 + d1 * d1;
            d1 * d1 / (8.0 * f * f * opf.sqrt()) + d2 / (4.0 * f * opf.powf(1.5))
        },
        a,
        b,
        spec,
        "A0_1'(0)",
    )?;
    let aneq_m1 = quad(
        &|t| (1.0 + fp(p, t).powi(2)).sqrt() / fv(p, t),
        a,
        b,
        spec,
        "Aneq_-1'(0)",
    )? / 6.0;
    let aneq_0 =
        0.5 * (2.0 * std::f64::consts::PI * (fv(p, a).powi(2) + fv(p, b).powi(2))).ln();
    let aneq_1 = quad(
        &|t| {
            let d1 = fp(p, t);
            d1 * d1 / (1.0 + d1 * d1).sqrt()
        },
        a,
        b,
        spec,
        "Aneq_1'(0) first",
    )? / 6.0
        + quad(
            &|t| {
                let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
                f * d2 / (1.0 + d1 * d1).sqrt()
            },
            a,
            b,
            spec,
            "Aneq_1'(0) second",
        )? / 2.0;
    Ok(DetATerms {
        a0_m1,
        a0_0: 0.0,
        a0_1,
        aneq_m1,
        aneq_0,
        aneq_1,
    })
}

/// Boundary quantity entering A^0_2(-1/2).
fn curvature_boundary_term(p: &ProfileSpec, x: f64) -> f64 {
    let (f, d1, d2) = (fv(p, x), fp(p, x), fpp(p, x));
    let opf = 1.0 + d1 * d1;
    (d1 * d1 + d1.powi(4) - 2.0 * f * d2) / (f * f * opf * opf)
}

/// The A-term tables at s = -1/2 (finite parts and residues as printed; the
/// unprinted finite parts of the two pole terms enter as zero, which for
/// A^0_1 is exact).
pub fn a_terms_energy(
    p: &ProfileSpec,
    spec: &QuadratureSpec,
) -> Result<(TermTable, TermTable)> {
    use std::f64::consts::PI;
    let (a, b) = (p.a, p.b);
    let mut a0 = TermTable::default();
    let mut an = TermTable::default();

    a0.set(
        -1,
        TermValue {
            finite_part: quad(&|t| (1.0 + fp(p, t).powi(2)).sqrt(), a, b, spec, "A0_-1")?
                / (2.0 * PI),
            residue: 0.0,
        },
    );
    a0.set(
        0,
        TermValue {
            finite_part: -1.0 / PI,
            residue: 0.0,
        },
    );
    let res_a0_1 = quad(
        &|t| {
            let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
            let opf = 1.0 + d1 * d1;
            -d1 * d1 / (8.0 * f * f * opf.sqrt()) + d2 / (4.0 * f * opf.powf(1.5))
        },
        a,
        b,
        spec,
        "Res A0_1",
    )? / (2.0 * PI);
    a0.set(
        1,
        TermValue {
            finite_part: 0.0,
            residue: res_a0_1,
        },
    );
    a0.set(
        2,
        TermValue {
            finite_part: -(curvature_boundary_term(p, a) + curvature_boundary_term(p, b))
                / (8.0 * PI),
            residue: 0.0,
        },
    );

    an.set(
        -1,
        TermValue {
            finite_part: ZETA_R_PRIME_MINUS_2 / PI
                * quad(
                    &|t| (1.0 + fp(p, t).powi(2)).sqrt() / fv(p, t).powi(2),
                    a,
                    b,
                    spec,
                    "Aneq_-1",
                )?,
            residue: 0.0,
        },
    );
    an.set(
        0,
        TermValue {
            finite_part: (1.0 / fv(p, a) + 1.0 / fv(p, b)) / 24.0,
            residue: 0.0,
        },
    );
    let res_an_1 = quad(
        &|t| {
            let (f, d1) = (fv(p, t), fp(p, t));
            d1 * d1 / (f * f * (1.0 + d1 * d1).sqrt())
        },
        a,
        b,
        spec,
        "Res Aneq_1 first",
    )? / (16.0 * PI)
        - quad(
            &|t| {
                let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
                d2 / (f * (1.0 + d1 * d1).powf(1.5))
            },
            a,
            b,
            spec,
            "Res Aneq_1 second",
        )? / (8.0 * PI);
    an.set(
        1,
        TermValue {
            finite_part: 0.0,
            residue: res_an_1,
        },
    );
    an.set(
        2,
        TermValue {
            finite_part: quad(
                &|t| {
                    let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
                    d1 * d2 / (f * (1.0 + d1 * d1).powi(4))
                },
                a,
                b,
                spec,
                "FP Aneq_2",
            )? / 16.0,
            residue: residue_at_minus_half(p),
        },
    );
    Ok((a0, an))
}

/// Res zeta(-1/2): the boundary formula surviving after the bulk residues
/// cancel.
pub fn residue_at_minus_half(p: &ProfileSpec) -> f64 {
    let term = |x: f64| {
        let (f, d1, d2) = (fv(p, x), fp(p, x), fpp(p, x));
        let opf = 1.0 + d1 * d1;
        -(d1 * d1 / (f * opf)) / 256.0 - (d2 / (opf * opf)) / 32.0
    };
    term(p.a) + term(p.b)
}

/// Integrals of the s-coefficients with the order-N boundary-series
/// correction folded into the i = 2 weight; also returns s_{-1}(a).
fn s_hat_integrals(p: &ProfileSpec, n: usize, spec: &QuadratureSpec) -> Result<(Vec<f64>, f64)> {
    let ctx = EvalCtx::new(p);
    let mut hats = Vec::with_capacity(n);
    for m in 0..n {
        let i = m as i32 - 1;
        let tree = s_tree(i);
        let v = quad(&|x| eval_tree(tree, &ctx, x), p.a, p.b, spec, "s-coefficient integral")?;
        hats.push(v);
    }
    if n == 4 {
        let s1a = eval_tree(s_tree(1), &ctx, p.a);
        let sm1a = eval_tree(s_tree(-1), &ctx, p.a);
        hats[3] -= s1a / sm1a;
    }
    let sm1a = eval_tree(s_tree(-1), &ctx, p.a);
    Ok((hats, sm1a))
}

/// Z^0'(0) = -log X_0(b;0) - log(2 s_{-1}(a)) + sum_{i=-1}^{1} int s_i.
pub fn z0_prime_zero(p: &ProfileSpec, tol: &QuadratureSpec) -> Result<f64> {
    let (hats, sm1a) = s_hat_integrals(p, 3, tol)?;
    let x0 = solve_radial(&RadialProblem::new(p.clone(), 0, 0.0), tol)?;
    Ok(-x0.ln() - (2.0 * sm1a).ln() + hats.iter().sum::<f64>())
}

/// Z^neq'(0) = -2 sum_k [log X_k(b;0) + log(2k w_{-1}(a))|_0
///             - sum_{i=-1}^{1} k^{-i} int w_i|_0].
/// The i = -1 subtraction happens inside the reduced solve; the i = 0, 1
/// integrals vanish identically at u = 0 and are carried only as computed
/// residuals.
pub fn zneq_prime_zero(
    p: &ProfileSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<SeriesResult> {
    let ctx = EvalCtx::new(p);
    let w_m1_a = eval_tree(w_tree(-1), &ctx, p.a);
    let w0_int = quad(
        &|x| eval_tree(w_tree(0), &ctx, x),
        p.a,
        p.b,
        tol,
        "w0 integral at u=0",
    )?;
    let w1_int = quad(
        &|x| eval_tree(w_tree(1), &ctx, x),
        p.a,
        p.b,
        tol,
        "w1 integral at u=0",
    )?;
    let summand = |k: f64| -> f64 {
        let reduced = match subtracted_log_xk(p, k, 0.0, tol) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        -2.0 * (reduced + (2.0 * k * w_m1_a).ln() - w0_int - w1_int / k)
    };
    let cap = k_cap.min(200);
    let result = crate::numerics::series_with_tail(
        |k| summand(k as f64),
        |kk| integral_tail_estimate(&summand, kk as f64),
        0.1 * tol.abs_tol,
        cap,
    )?;
    if result.sum.is_nan() {
        return Err(Error::StiffnessFailure { x: p.b });
    }
    Ok(result)
}

/// Determinant-point assembly.
#[derive(Debug, Clone)]
pub struct DeterminantResult {
    /// zeta'_Delta(0); the log-determinant is its negative.
    pub zeta_prime: f64,
    pub z0_prime: f64,
    pub zneq_prime: f64,
    pub a_terms: DetATerms,
    pub k_used: usize,
    pub tail_bound: f64,
}

impl DeterminantResult {
    pub fn log_determinant(&self) -> f64 {
        -self.zeta_prime
    }

    pub fn decomposition(&self) -> ZetaDecomposition {
        let mut a0 = TermTable::default();
        let mut an = TermTable::default();
        a0.set(-1, TermValue { finite_part: self.a_terms.a0_m1, residue: 0.0 });
        a0.set(0, TermValue { finite_part: self.a_terms.a0_0, residue: 0.0 });
        a0.set(1, TermValue { finite_part: self.a_terms.a0_1, residue: 0.0 });
        an.set(-1, TermValue { finite_part: self.a_terms.aneq_m1, residue: 0.0 });
        an.set(0, TermValue { finite_part: self.a_terms.aneq_0, residue: 0.0 });
        an.set(1, TermValue { finite_part: self.a_terms.aneq_1, residue: 0.0 });
        ZetaDecomposition {
            at: EvalPoint::DetPoint,
            a0_terms: a0,
            aneq_terms: an,
            z0: self.z0_prime,
            zneq: self.zneq_prime,
            k_used: self.k_used,
            error_budget: ErrorBudget {
                series_tail: self.tail_bound,
                ..Default::default()
            },
        }
    }
}

pub fn functional_determinant(
    p: &ProfileSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<DeterminantResult> {
    let z0_prime = z0_prime_zero(p, tol)?;
    let series = zneq_prime_zero(p, k_cap, tol)?;
    let a_terms = a_terms_det(p, tol)?;
    Ok(DeterminantResult {
        zeta_prime: z0_prime + series.sum + a_terms.sum(),
        z0_prime,
        zneq_prime: series.sum,
        a_terms,
        k_used: series.k_used,
        tail_bound: series.tail_bound,
    })
}

/// Cheap bound data used to skip solves whose contribution is certifiably
/// below double precision.
fn min_w_leading_scale(p: &ProfileSpec) -> f64 {
    let mut f_max: f64 = 0.0;
    let mut f_min = f64::INFINITY;
    for x in p.validation_grid() {
        let v = fv(p, x);
        f_max = f_max.max(v);
        f_min = f_min.min(v);
    }
    // w_{-1}(x; u) >= sqrt(1 + u^2 f_min^2)/f_max >= u f_min / f_max
    (f_min / f_max).max(1e-6)
}

/// The subtracted k = 0 remainder at the energy point:
/// log X_0(b; i lambda) - log A+_N - sum lambda^{-i} int s_i, order N = 4.
pub fn z0_energy_remainder(
    p: &ProfileSpec,
    lambda: f64,
    hats: &[f64],
    sm1a: f64,
    tol: &QuadratureSpec,
) -> Result<f64> {
    let reduced = subtracted_log_x0(p, lambda, tol)?; // log X0 - lambda * hats[0]
    Ok(reduced + (2.0 * lambda * sm1a).ln()
        - (hats[1] + hats[2] / lambda + hats[3] / (lambda * lambda)))
}

/// Z^0(-1/2), integrated by parts:
/// -(1/pi) [ P_N(1) - int_0^1 log X_0 - int_1^inf remainder ].
pub fn z0_minus_half(p: &ProfileSpec, tol: &QuadratureSpec) -> Result<(f64, f64)> {
    let (hats, sm1a) = s_hat_integrals(p, 4, tol)?;
    let p_n_at_1 = -(2.0 * sm1a).ln() + hats.iter().sum::<f64>();
    let head = adaptive_quad(
        &|lambda| {
            if lambda < 1e-12 {
                return solve_radial(&RadialProblem::new(p.clone(), 0, 0.0), tol)
                    .map(|v| v.ln())
                    .unwrap_or(f64::NAN);
            }
            solve_radial(&RadialProblem::new(p.clone(), 0, lambda), tol)
                .map(|v| v.ln())
                .unwrap_or(f64::NAN)
        },
        0.0,
        1.0,
        tol,
    )
    .map_err(|e| e.in_context("Z0(-1/2) head integral"))?;
    let lambda_max = 1e4;
    let tail = improper_quad(
        &|v| {
            let lambda = 1.0 + v;
            if lambda > lambda_max {
                return 0.0;
            }
            z0_energy_remainder(p, lambda, &hats, sm1a, tol).unwrap_or(f64::NAN)
        },
        &tol.scaled(0.5),
    )
    .map_err(|e| e.in_context("Z0(-1/2) remainder integral"))?;
    if head.0.is_nan() || tail.0.is_nan() {
        return Err(Error::StiffnessFailure { x: p.b });
    }
    let value = -(p_n_at_1 - head.0 - tail.0) / std::f64::consts::PI;
    Ok((value, (head.1 + tail.1) / std::f64::consts::PI))
}

/// Per-u data for the k != 0 subtraction at order 4.
struct UniformHats {
    w_m1_a: f64,
    w0_int: f64,
    w1_int: f64,
    w2_hat: f64,
}

fn uniform_hats(p: &ProfileSpec, u: f64, spec: &QuadratureSpec) -> Result<UniformHats> {
    let ctx = EvalCtx::new(p).with_u(u);
    let w_m1_a = eval_tree(w_tree(-1), &ctx, p.a);
    let w0_int = quad(&|x| eval_tree(w_tree(0), &ctx, x), p.a, p.b, spec, "w0 integral")?;
    let w1_int = quad(&|x| eval_tree(w_tree(1), &ctx, x), p.a, p.b, spec, "w1 integral")?;
    let w2_int = quad(&|x| eval_tree(w_tree(2), &ctx, x), p.a, p.b, spec, "w2 integral")?;
    let w1_a = eval_tree(w_tree(1), &ctx, p.a);
    Ok(UniformHats {
        w_m1_a,
        w0_int,
        w1_int,
        w2_hat: w2_int - w1_a / w_m1_a,
    })
}

/// The subtracted uniform bracket at the energy point (order N = 4):
/// log X_k(b; i u k) - log B+_N - sum k^{-i} int w_i(.; u).
pub fn zneq_energy_bracket(
    p: &ProfileSpec,
    k: f64,
    u: f64,
    tol: &QuadratureSpec,
) -> Result<f64> {
    let hats = uniform_hats(p, u, &tol.scaled(0.1))?;
    let reduced = subtracted_log_xk(p, k, u, tol)?;
    Ok(reduced + (2.0 * k * hats.w_m1_a).ln()
        - (hats.w0_int + hats.w1_int / k + hats.w2_hat / (k * k)))
}

/// Deterministic K selection: grow K geometrically until the integral tail
/// estimate certifies the target.
fn choose_k<H: Fn(f64) -> f64>(h: &H, target: f64, k_cap: usize) -> Result<(usize, f64)> {
    let mut k = 8usize;
    loop {
        let bound = integral_tail_estimate(h, k as f64);
        if bound <= target {
            return Ok((k, bound));
        }
        if k >= k_cap {
            return Err(Error::TailBoundUnmet {
                k_cap,
                bound,
                target,
            });
        }
        k = (k * 2).min(k_cap);
    }
}

/// Fixed-panel evaluation of int_0^inf fun du used inside tail estimates
/// (coarse, deterministic, no adaptivity).
fn coarse_improper<F: Fn(f64) -> f64>(fun: &F) -> f64 {
    // 12 uniform panels of the 15-point Kronrod rule on the transformed
    // interval; accuracy is far beyond what a tail estimate needs.
    let panels = 12usize;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = i as f64 / panels as f64;
        let hi = (i + 1) as f64 / panels as f64;
        let spec = QuadratureSpec::new(1.0, 1.0, 1);
        // single-panel Kronrod via adaptive_quad with depth 1
        if let Ok((v, _)) = adaptive_quad(
            &|t: f64| {
                let om = 1.0 - t;
                if om < 1e-8 {
                    return 0.0;
                }
                fun(t / om) / (om * om)
            },
            lo,
            hi,
            &spec,
        ) {
            total += v;
        }
    }
    total
}

/// Z^neq(-1/2) = (2/pi) sum_k k int_0^inf bracket(k, u) du (parts form),
/// with the k-sum taken inside the u-integral at a K fixed in advance by the
/// tail estimate.
pub fn zneq_minus_half(
    p: &ProfileSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<SeriesResult> {
    use std::f64::consts::PI;
    let scale = min_w_leading_scale(p);
    let len = p.length();
    let inner_tol = tol.scaled(0.1);
    let bracket = |k: f64, u: f64, hats: &UniformHats| -> f64 {
        // beyond this point the remainder is below double precision
        if k * (1.0 + u * u).sqrt() * scale * len > 800.0 {
            return 0.0;
        }
        match subtracted_log_xk(p, k, u, &inner_tol) {
            Ok(reduced) => {
                reduced + (2.0 * k * hats.w_m1_a).ln()
                    - (hats.w0_int + hats.w1_int / k + hats.w2_hat / (k * k))
            }
            Err(_) => f64::NAN,
        }
    };
    let tail_fn = |kappa: f64| -> f64 {
        kappa
            * coarse_improper(&|u| match uniform_hats(p, u, &inner_tol.scaled(10.0)) {
                Ok(h) => bracket(kappa, u, &h),
                Err(_) => 0.0,
            })
    };
    let cap = k_cap.min(200);
    let (k_used, tail_bound) = choose_k(&tail_fn, 0.1 * tol.abs_tol * PI / 2.0, cap)?;

    let integrand = |u: f64| -> f64 {
        let hats = match uniform_hats(p, u, &inner_tol) {
            Ok(h) => h,
            Err(_) => return f64::NAN,
        };
        let terms: Vec<f64> = (1..=k_used)
            .into_par_iter()
            .map(|k| k as f64 * bracket(k as f64, u, &hats))
            .collect();
        terms.iter().sum()
    };
    let (value, _err) = improper_quad(&integrand, &tol.scaled(0.5))
        .map_err(|e| e.in_context("Zneq(-1/2) u-integral"))?;
    if value.is_nan() {
        return Err(Error::StiffnessFailure { x: p.b });
    }
    Ok(SeriesResult {
        sum: 2.0 * value / PI,
        k_used,
        tail_bound: 2.0 * tail_bound / PI,
    })
}

/// The assembled energy-point result.
#[derive(Debug, Clone)]
pub struct CasimirEnergy {
    /// Finite part of zeta(-1/2) across the whole ledger.
    pub energy: f64,
    /// Res zeta(-1/2) (boundary formula); the energy is physical only when
    /// this vanishes.
    pub residue: f64,
    pub ledger: ZetaDecomposition,
}

pub fn casimir_energy(
    p: &ProfileSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<CasimirEnergy> {
    let (z0, z0_err) = z0_minus_half(p, tol)?;
    let series = zneq_minus_half(p, k_cap, tol)?;
    let (a0, an) = a_terms_energy(p, tol)?;
    let ledger = ZetaDecomposition {
        at: EvalPoint::EnergyPoint,
        a0_terms: a0,
        aneq_terms: an,
        z0,
        zneq: series.sum,
        k_used: series.k_used,
        error_budget: ErrorBudget {
            quadrature: z0_err,
            series_tail: series.tail_bound,
            integral_tail: 0.0,
        },
    };
    Ok(CasimirEnergy {
        energy: ledger.total_finite(),
        residue: residue_at_minus_half(p),
        ledger,
    })
}

/// All printed first-order variations of the A-terms at eps = 0.
#[derive(Debug, Clone, Copy)]
pub struct DeltaATerms {
    pub d_a0_m1: f64,
    pub d_a0_0: f64,
    pub d_res_a0_1: f64,
    pub d_a0_2: f64,
    pub d_aneq_m1: f64,
    pub d_aneq_0: f64,
    pub d_res_aneq_1: f64,
    pub d_res_aneq_2: f64,
    pub d_fp_aneq_2: f64,
}

pub fn delta_a_terms(
    p: &ProfileSpec,
    bump: &BumpSpec,
    spec: &QuadratureSpec,
) -> Result<DeltaATerms> {
    use std::f64::consts::PI;
    let (lo, hi) = bump.support();
    let (lo, hi) = (lo.max(p.a), hi.min(p.b));
    let g = |t: f64| (bump.g)(t);
    let gp = |t: f64| (bump.g_prime)(t);
    let gpp = |t: f64| (bump.g_double_prime)(t);

    let d_a0_m1 = quad(
        &|t| {
            let d1 = fp(p, t);
            d1 * gp(t) / (1.0 + d1 * d1).sqrt()
        },
        lo,
        hi,
        spec,
        "d A0_-1",
    )? / (2.0 * PI);

    // the five printed integrals of d/deps Res A^0_1
    let d_res_a0_1 = quad(
        &|t| {
            let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
            let opf = 1.0 + d1 * d1;
            d1 * d1 * g(t) / (4.0 * f.powi(3) * opf.sqrt())
                - d1 * (2.0 + d1 * d1) * gp(t) / (8.0 * f * f * opf.powf(1.5))
                - d2 * g(t) / (4.0 * f * f * opf.powf(1.5))
                - 3.0 * d1 * d2 * gp(t) / (4.0 * f * opf.powf(2.5))
                + gpp(t) / (4.0 * f * opf.powf(1.5))
        },
        lo,
        hi,
        spec,
        "d Res A0_1",
    )? / (2.0 * PI);

    let d_aneq_m1 = -2.0 * ZETA_R_PRIME_MINUS_2 / PI
        * quad(
            &|t| {
                let (f, d1) = (fv(p, t), fp(p, t));
                (1.0 + d1 * d1).sqrt() * g(t) / f.powi(3)
            },
            lo,
            hi,
            spec,
            "d Aneq_-1 first",
        )?
        + ZETA_R_PRIME_MINUS_2 / PI
            * quad(
                &|t| {
                    let (f, d1) = (fv(p, t), fp(p, t));
                    d1 * gp(t) / (f * f * (1.0 + d1 * d1).sqrt())
                },
                lo,
                hi,
                spec,
                "d Aneq_-1 second",
            )?;

    // printed as the term-by-term negative of d/deps Res A^0_1
    let d_res_aneq_1 = quad(
        &|t| {
            let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
            let opf = 1.0 + d1 * d1;
            -d1 * d1 * g(t) / (4.0 * f.powi(3) * opf.sqrt())
                + d1 * (2.0 + d1 * d1) * gp(t) / (8.0 * f * f * opf.powf(1.5))
                + d2 * g(t) / (4.0 * f * f * opf.powf(1.5))
                + 3.0 * d1 * d2 * gp(t) / (4.0 * f * opf.powf(2.5))
                - gpp(t) / (4.0 * f * opf.powf(1.5))
        },
        lo,
        hi,
        spec,
        "d Res Aneq_1",
    )? / (2.0 * PI);

    let d_fp_aneq_2 = quad(
        &|t| {
            let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
            let opf = 1.0 + d1 * d1;
            -d1 * d2 * g(t) / (f * f * opf.powi(4))
                + d2 * (1.0 - 7.0 * d1 * d1) * gp(t) / (f * opf.powi(5))
                + d1 * gpp(t) / (f * opf.powi(4))
        },
        lo,
        hi,
        spec,
        "d FP Aneq_2",
    )? / 16.0;

    Ok(DeltaATerms {
        d_a0_m1,
        d_a0_0: 0.0,
        d_res_a0_1,
        d_a0_2: 0.0,
        d_aneq_m1,
        d_aneq_0: 0.0,
        d_res_aneq_1,
        d_res_aneq_2: 0.0,
        d_fp_aneq_2,
    })
}

/// The change in the Casimir energy with its per-term breakdown; `delta_e`
/// is the ordered sum of the breakdown entries.
#[derive(Debug, Clone)]
pub struct EnergyChangeResult {
    pub delta_e: f64,
    pub term_breakdown: Vec<(String, f64)>,
    pub k_used: usize,
    pub tail_bound: f64,
    pub quadrature_errors: Vec<f64>,
}

impl EnergyChangeResult {
    fn from_breakdown(
        breakdown: Vec<(String, f64)>,
        k_used: usize,
        tail_bound: f64,
        quadrature_errors: Vec<f64>,
    ) -> Self {
        let delta_e = breakdown.iter().map(|(_, v)| v).sum();
        Self {
            delta_e,
            term_breakdown: breakdown,
            k_used,
            tail_bound,
            quadrature_errors,
        }
    }
}

/// The three consolidated g-weighted integrals of the energy-change formula.
pub fn grand_formula_integrals(
    p: &ProfileSpec,
    bump: &BumpSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    use std::f64::consts::PI;
    let (lo, hi) = bump.support();
    let (lo, hi) = (lo.max(p.a), hi.min(p.b));
    let g = |t: f64| (bump.g)(t);
    let first = -quad(
        &|t| {
            let (d1, d2) = (fp(p, t), fpp(p, t));
            d2 * g(t) / (1.0 + d1 * d1).powf(1.5)
        },
        lo,
        hi,
        spec,
        "grand integral 1",
    )? / (2.0 * PI);
    let second = -ZETA_R_PRIME_MINUS_2 / PI
        * quad(
            &|t| {
                let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
                (f * d2 + 2.0 * d1 * d1 + 2.0) * g(t) / (f.powi(3) * (1.0 + d1 * d1).powf(1.5))
            },
            lo,
            hi,
            spec,
            "grand integral 2",
        )?;
    let third = quad(
        &|t| {
            let (f, d1, d2) = (fv(p, t), fp(p, t), fpp(p, t));
            let opf = 1.0 + d1 * d1;
            (2.0 * d1.powi(3) * opf + f * d1 * (5.0 * d1 * d1 - 3.0) * d2) * g(t)
                / (f.powi(3) * opf.powi(5))
        },
        lo,
        hi,
        spec,
        "grand integral 3",
    )? / 16.0;
    Ok((first, second, third))
}

/// Integrals of the eps-derivative coefficient trees over the bump support.
fn delta_s_integrals(p: &ProfileSpec, bump: &BumpSpec, spec: &QuadratureSpec) -> Result<[f64; 4]> {
    let ctx = EvalCtx::with_bump(p, bump);
    let (lo, hi) = bump.support();
    let (lo, hi) = (lo.max(p.a), hi.min(p.b));
    let mut out = [0.0; 4];
    for (m, slot) in out.iter_mut().enumerate() {
        let tree = ds_tree(m as i32 - 1);
        *slot = quad(&|x| eval_tree(tree, &ctx, x), lo, hi, spec, "d/deps s integral")?;
    }
    Ok(out)
}

fn delta_w_integrals(
    p: &ProfileSpec,
    bump: &BumpSpec,
    u: f64,
    spec: &QuadratureSpec,
) -> Result<[f64; 4]> {
    let ctx = EvalCtx::with_bump(p, bump).with_u(u);
    let (lo, hi) = bump.support();
    let (lo, hi) = (lo.max(p.a), hi.min(p.b));
    let mut out = [0.0; 4];
    for (m, slot) in out.iter_mut().enumerate() {
        let tree = dw_tree(m as i32 - 1);
        *slot = quad(&|x| eval_tree(tree, &ctx, x), lo, hi, spec, "d/deps w integral")?;
    }
    Ok(out)
}

/// d/deps Z^0(-1/2) at eps = 0 (parts form): with D(lambda) the subtracted
/// power sum of the eps-derivative integrals,
/// -(1/pi) [ D(1) - int_0^1 r0 - int_1^inf (r0 - D) ].
fn delta_z0(p: &ProfileSpec, bump: &BumpSpec, tol: &QuadratureSpec) -> Result<(f64, f64)> {
    use std::f64::consts::PI;
    let ds = delta_s_integrals(p, bump, &tol.scaled(0.1))?;
    let d_of = |lambda: f64| ds[0] * lambda + ds[1] + ds[2] / lambda + ds[3] / (lambda * lambda);
    let r0 = |lambda: f64| -> f64 {
        solve_ratio_reduced(p, bump, 0.0, lambda, tol).unwrap_or(f64::NAN)
    };
    let head = adaptive_quad(&|lambda| r0(lambda.max(1e-10)), 0.0, 1.0, tol)
        .map_err(|e| e.in_context("dZ0 head integral"))?;
    let lambda_max = 1e4;
    let tail = improper_quad(
        &|v| {
            let lambda = 1.0 + v;
            if lambda > lambda_max {
                return 0.0;
            }
            r0(lambda) - d_of(lambda)
        },
        &tol.scaled(0.5),
    )
    .map_err(|e| e.in_context("dZ0 remainder integral"))?;
    if head.0.is_nan() || tail.0.is_nan() {
        return Err(Error::StiffnessFailure { x: p.b });
    }
    Ok((-(d_of(1.0) - head.0 - tail.0) / PI, (head.1 + tail.1) / PI))
}

/// d/deps Z^neq(-1/2) at eps = 0 (parts form):
/// (2/pi) sum_k k int_0^inf [ r_k(u) - sum_i k^{-i} int d/deps w_i(.;u) ] du.
fn delta_zneq(
    p: &ProfileSpec,
    bump: &BumpSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<(f64, usize, f64)> {
    use std::f64::consts::PI;
    let scale = min_w_leading_scale(p);
    let len = p.length();
    let inner_tol = tol.scaled(0.1);
    let summand = |k: f64, u: f64, dw: &[f64; 4]| -> f64 {
        if k * (1.0 + u * u).sqrt() * scale * len > 800.0 {
            return 0.0;
        }
        let r = match solve_ratio_reduced(p, bump, k, u * k, &inner_tol) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        r - (dw[0] * k + dw[1] + dw[2] / k + dw[3] / (k * k))
    };
    let tail_fn = |kappa: f64| -> f64 {
        kappa
            * coarse_improper(&|u| match delta_w_integrals(p, bump, u, &inner_tol.scaled(10.0)) {
                Ok(dw) => summand(kappa, u, &dw),
                Err(_) => 0.0,
            })
    };
    let cap = k_cap.min(200);
    let (k_used, tail_bound) = choose_k(&tail_fn, 0.1 * tol.abs_tol * PI / 2.0, cap)?;
    let integrand = |u: f64| -> f64 {
        let dw = match delta_w_integrals(p, bump, u, &inner_tol) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let terms: Vec<f64> = (1..=k_used)
            .into_par_iter()
            .map(|k| k as f64 * summand(k as f64, u, &dw))
            .collect();
        terms.iter().sum()
    };
    let (value, _err) = improper_quad(&integrand, &tol.scaled(0.5))
        .map_err(|e| e.in_context("dZneq u-integral"))?;
    if value.is_nan() {
        return Err(Error::StiffnessFailure { x: p.b });
    }
    Ok((2.0 * value / PI, k_used, 2.0 * tail_bound / PI))
}

/// The energy change for a general profile: three consolidated g-integrals
/// plus the two finite-term variations.
pub fn delta_energy(
    p: &ProfileSpec,
    bump: &BumpSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<EnergyChangeResult> {
    if !bump.fits_inside(p.a, p.b) {
        return Err(Error::InvalidProfile(
            "bump support must sit inside the profile interval".into(),
        ));
    }
    let (g1, g2, g3) = grand_formula_integrals(p, bump, tol)?;
    let (dz0, dz0_err) = delta_z0(p, bump, tol)?;
    let (dzneq, k_used, tail_bound) = delta_zneq(p, bump, k_cap, tol)?;
    Ok(EnergyChangeResult::from_breakdown(
        vec![
            ("dA0_-1".into(), g1),
            ("dAneq_-1".into(), g2),
            ("dFPAneq_2".into(), g3),
            ("dZ0".into(), dz0),
            ("dZneq".into(), dzneq),
        ],
        k_used,
        tail_bound,
        vec![dz0_err],
    ))
}

/// The energy change on the cylinder through the closed-form ratios.
pub fn delta_energy_cylinder(
    cfg: &CylinderConfig,
    bump: &BumpSpec,
    k_cap: usize,
    tol: &QuadratureSpec,
) -> Result<EnergyChangeResult> {
    use std::f64::consts::PI;
    if !bump.fits_inside(cfg.a, cfg.b) {
        return Err(Error::InvalidProfile(
            "bump support must sit inside the cylinder interval".into(),
        ));
    }
    let alpha = cfg.alpha;
    let int_g = integral_of_bump(cfg, bump, tol)?;
    let term_a = -2.0 * ZETA_R_PRIME_MINUS_2 / (PI * alpha.powi(3)) * int_g;

    let (r0_int, r0_err) = improper_quad(
        &|lambda| ratio0(cfg, bump, lambda, &tol.scaled(0.1)).unwrap_or(f64::NAN),
        &tol.scaled(0.5),
    )
    .map_err(|e| e.in_context("cylinder dZ0 integral"))?;
    if r0_int.is_nan() {
        return Err(Error::StiffnessFailure { x: cfg.b });
    }
    let dz0 = r0_int / PI;

    let inner = |k: f64| -> f64 {
        improper_quad(
            &|u| ratiok_plus_subtraction(cfg, bump, k, u, int_g, &tol.scaled(0.1)).unwrap_or(0.0),
            &tol.scaled(0.5),
        )
        .map(|(v, _)| v)
        .unwrap_or(f64::NAN)
    };
    let tail_fn = |kappa: f64| kappa * inner(kappa);
    let cap = k_cap.min(200);
    let (k_used, tail_bound) = choose_k(&tail_fn, 0.1 * tol.abs_tol * PI / 2.0, cap)?;
    let terms: Vec<f64> = (1..=k_used)
        .into_par_iter()
        .map(|k| k as f64 * inner(k as f64))
        .collect();
    if terms.iter().any(|t| t.is_nan()) {
        return Err(Error::StiffnessFailure { x: cfg.b });
    }
    let dzneq = 2.0 * terms.iter().sum::<f64>() / PI;

    Ok(EnergyChangeResult::from_breakdown(
        vec![
            ("dA0_-1".into(), 0.0),
            ("dAneq_-1".into(), term_a),
            ("dFPAneq_2".into(), 0.0),
            ("dZ0".into(), dz0),
            ("dZneq".into(), dzneq),
        ],
        k_used,
        2.0 * tail_bound / PI,
        vec![r0_err],
    ))
}
