//! WKB coefficient sequences for the radial problem: the s-series (k = 0,
//! large lambda) and the uniform w-series (k != 0, lambda = u k), their
//! definite integrals, the boundary constants log A+ / log B+, and the
//! epsilon-derivatives of everything at epsilon = 0.
//!
//! The recursions are run once over a small expression tree (atoms f^(n),
//! g^(n), u) so that the x-derivatives the recursion needs, and the
//! epsilon-derivatives the energy variation needs, are exact rewrites.

use std::collections::HashMap;
use std::sync::Arc;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_quad, QuadratureSpec};
use crate::profile::{perturbed_profile, BumpSpec, ProfileSpec};
use crate::symexpr::{
    add, constant, diff_eps, diff_x, div, f_deriv, mul, neg, pow, sqrt, sub, u_param, EvalCtx,
    Expr, ExprRef,
};

/// Highest truncation order the tables support (N = 4 is what the energy
/// point needs; coefficients run over i = -1 .. N-2).
pub const N_MAX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// k = 0 series in powers of lambda^-i.
    SSeries,
    /// Uniform k != 0 series in powers of k^-i at fixed u.
    WSeries,
}

struct Trees {
    s: Vec<ExprRef>,
    w: Vec<ExprRef>,
    ds: Vec<ExprRef>,
    dw: Vec<ExprRef>,
}

fn p_coefficient_expr() -> ExprRef {
    let opf = add(constant(1.0), pow(f_deriv(1), 2.0));
    sub(
        div(f_deriv(1), f_deriv(0)),
        div(mul(f_deriv(1), f_deriv(2)), opf),
    )
}

/// Run the shared recursion
///   next = -(cur' + P cur + sum_{j=0}^{i} t_j t_{i-j}) / (2 t_{-1})
/// starting from the supplied leading coefficient.
fn build_series(leading: ExprRef) -> Vec<ExprRef> {
    let p = p_coefficient_expr();
    let mut tab: Vec<ExprRef> = vec![leading.clone()];
    for idx in 0..(N_MAX - 1) {
        // tab[m] holds index i = m - 1; building index idx via i = idx - 1
        let cur = tab[idx].clone();
        let mut acc = add(diff_x(&cur), mul(p.clone(), cur));
        let i = idx as i32 - 1;
        for j in 0..=i {
            let tj = tab[(j + 1) as usize].clone();
            let tij = tab[(i - j + 1) as usize].clone();
            acc = add(acc, mul(tj, tij));
        }
        tab.push(neg(div(acc, mul(constant(2.0), leading.clone()))));
    }
    tab
}

fn trees() -> &'static Trees {
    static TREES: OnceLock<Trees> = OnceLock::new();
    TREES.get_or_init(|| {
        let opf = add(constant(1.0), pow(f_deriv(1), 2.0));
        let s_lead = sqrt(opf.clone());
        let w_lead = sqrt(div(
            mul(
                add(constant(1.0), mul(pow(u_param(), 2.0), pow(f_deriv(0), 2.0))),
                opf,
            ),
            pow(f_deriv(0), 2.0),
        ));
        let s = build_series(s_lead);
        let w = build_series(w_lead);
        let ds = s.iter().map(diff_eps).collect();
        let dw = w.iter().map(diff_eps).collect();
        Trees { s, w, ds, dw }
    })
}

/// DAG-aware evaluation: shared subtrees produced by differentiation are
/// evaluated once per point.
fn eval_dag(e: &ExprRef, ctx: &EvalCtx<'_>, x: f64, memo: &mut HashMap<usize, f64>) -> f64 {
    let key = Arc::as_ptr(e) as usize;
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let v = match &**e {
        Expr::Const(c) => *c,
        Expr::Add(a, b) => eval_dag(a, ctx, x, memo) + eval_dag(b, ctx, x, memo),
        Expr::Sub(a, b) => eval_dag(a, ctx, x, memo) - eval_dag(b, ctx, x, memo),
        Expr::Mul(a, b) => eval_dag(a, ctx, x, memo) * eval_dag(b, ctx, x, memo),
        Expr::Div(a, b) => eval_dag(a, ctx, x, memo) / eval_dag(b, ctx, x, memo),
        Expr::Pow(a, p) => {
            let base = eval_dag(a, ctx, x, memo);
            if *p == 2.0 {
                base * base
            } else if *p == -1.0 {
                1.0 / base
            } else {
                base.powf(*p)
            }
        }
        Expr::Neg(a) => -eval_dag(a, ctx, x, memo),
        _ => crate::symexpr::eval(e, ctx, x),
    };
    memo.insert(key, v);
    v
}

pub(crate) fn eval_tree(e: &ExprRef, ctx: &EvalCtx<'_>, x: f64) -> f64 {
    let mut memo = HashMap::new();
    eval_dag(e, ctx, x, &mut memo)
}

pub(crate) fn s_tree(i: i32) -> &'static ExprRef {
    &trees().s[(i + 1) as usize]
}

pub(crate) fn w_tree(i: i32) -> &'static ExprRef {
    &trees().w[(i + 1) as usize]
}

pub(crate) fn ds_tree(i: i32) -> &'static ExprRef {
    &trees().ds[(i + 1) as usize]
}

pub(crate) fn dw_tree(i: i32) -> &'static ExprRef {
    &trees().dw[(i + 1) as usize]
}

/// A built coefficient table: evaluable coefficients for i = -1 .. N-2 and
/// their definite integrals over [a, b].
pub struct CoefficientTable {
    pub kind: SeriesKind,
    /// Truncation order N; the table holds indices -1 ..= N-2.
    pub order: usize,
    /// The uniform parameter; present iff kind is WSeries.
    pub u: Option<f64>,
    /// True when the coefficients are the epsilon-derivatives at eps = 0.
    pub epsilon_table: bool,
    profile: ProfileSpec,
    bump: Option<BumpSpec>,
    coefficients: Vec<ExprRef>,
    pub integrals: Vec<f64>,
}

impl CoefficientTable {
    fn ctx(&self) -> EvalCtx<'_> {
        EvalCtx {
            profile: &self.profile,
            bump: self.bump.as_ref(),
            u: self.u.unwrap_or(0.0),
        }
    }

    /// Evaluate coefficient i (i = -1 .. N-2) at x.
    pub fn coefficient(&self, i: i32, x: f64) -> f64 {
        eval_tree(&self.coefficients[(i + 1) as usize], &self.ctx(), x)
    }

    /// The definite integral of coefficient i over [a, b].
    pub fn integral(&self, i: i32) -> f64 {
        self.integrals[(i + 1) as usize]
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

fn table_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-11, 30)
}

fn integrate_coefficients(
    exprs: &[ExprRef],
    profile: &ProfileSpec,
    bump: Option<&BumpSpec>,
    u: f64,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    let spec = table_spec();
    exprs
        .iter()
        .map(|e| {
            let ctx = EvalCtx {
                profile,
                bump,
                u,
            };
            adaptive_quad(&|x| eval_tree(e, &ctx, x), lo, hi, &spec)
                .map(|(v, _)| v)
                .map_err(|err| err.in_context("wkb coefficient integral"))
        })
        .collect()
}

/// The s-series table for the k = 0 expansion, coefficients i = -1 .. N-2.
pub fn s_coefficients(p: &ProfileSpec, n: usize) -> Result<CoefficientTable> {
    assert!((1..=N_MAX).contains(&n), "supported truncation orders are 1..=4");
    let exprs: Vec<ExprRef> = (0..n).map(|m| trees().s[m].clone()).collect();
    let integrals = integrate_coefficients(&exprs, p, None, 0.0, p.a, p.b)?;
    Ok(CoefficientTable {
        kind: SeriesKind::SSeries,
        order: n,
        u: None,
        epsilon_table: false,
        profile: p.clone(),
        bump: None,
        coefficients: exprs,
        integrals,
    })
}

/// The uniform w-series table at fixed u, coefficients i = -1 .. N-2.
pub fn w_coefficients(p: &ProfileSpec, n: usize, u: f64) -> Result<CoefficientTable> {
    assert!((1..=N_MAX).contains(&n), "supported truncation orders are 1..=4");
    assert!(u >= 0.0);
    let exprs: Vec<ExprRef> = (0..n).map(|m| trees().w[m].clone()).collect();
    let integrals = integrate_coefficients(&exprs, p, None, u, p.a, p.b)?;
    Ok(CoefficientTable {
        kind: SeriesKind::WSeries,
        order: n,
        u: Some(u),
        epsilon_table: false,
        profile: p.clone(),
        bump: None,
        coefficients: exprs,
        integrals,
    })
}

/// log A+ truncated consistently with an order-N subtraction: the series
/// part of the boundary constant only contributes powers lambda^-2j with
/// 2j <= N-2.
pub fn log_a_plus(p: &ProfileSpec, lambda: f64, n: usize) -> f64 {
    assert!(lambda > 0.0);
    let ctx = EvalCtx::new(p);
    let s_m1_a = eval_tree(s_tree(-1), &ctx, p.a);
    let mut series = 0.0;
    let mut j = 1usize;
    while 2 * j <= n.saturating_sub(2) {
        let s_odd_a = eval_tree(s_tree(2 * j as i32 - 1), &ctx, p.a);
        series += s_odd_a / s_m1_a * lambda.powi(-2 * j as i32);
        j += 1;
    }
    -(2.0 * lambda * s_m1_a).ln() - (1.0 + series).ln()
}

/// log B+ for the uniform series, same truncation rule in powers of k^-2j.
pub fn log_b_plus(p: &ProfileSpec, k: u32, u: f64, n: usize) -> f64 {
    assert!(k >= 1);
    let ctx = EvalCtx::new(p).with_u(u);
    let w_m1_a = eval_tree(w_tree(-1), &ctx, p.a);
    let kf = k as f64;
    let mut series = 0.0;
    let mut j = 1usize;
    while 2 * j <= n.saturating_sub(2) {
        let w_odd_a = eval_tree(w_tree(2 * j as i32 - 1), &ctx, p.a);
        series += w_odd_a / w_m1_a * kf.powi(-2 * j as i32);
        j += 1;
    }
    -(2.0 * kf * w_m1_a).ln() - (1.0 + series).ln()
}

/// Tables of the epsilon-derivatives at eps = 0 of the s- or w-coefficients
/// (w when `u` is supplied). Every term carries one g-factor, so the
/// integrals run over the bump support only. The symbolic derivative is
/// cross-checked against Richardson-extrapolated finite differences of the
/// base tables; disagreement raises `DifferentiationFailure`.
pub fn epsilon_derivative_tables(
    p: &ProfileSpec,
    bump: &BumpSpec,
    n: usize,
    u: Option<f64>,
) -> Result<CoefficientTable> {
    assert!((1..=N_MAX).contains(&n), "supported truncation orders are 1..=4");
    let (kind, exprs): (SeriesKind, Vec<ExprRef>) = match u {
        None => (
            SeriesKind::SSeries,
            (0..n).map(|m| trees().ds[m].clone()).collect(),
        ),
        Some(_) => (
            SeriesKind::WSeries,
            (0..n).map(|m| trees().dw[m].clone()).collect(),
        ),
    };
    let uu = u.unwrap_or(0.0);
    let (lo, hi) = bump.support();
    let lo = lo.max(p.a);
    let hi = hi.min(p.b);
    let integrals = integrate_coefficients(&exprs, p, Some(bump), uu, lo, hi)?;

    // Finite-difference cross-check on a few interior points of the support.
    let base: Vec<ExprRef> = match kind {
        SeriesKind::SSeries => (0..n).map(|m| trees().s[m].clone()).collect(),
        SeriesKind::WSeries => (0..n).map(|m| trees().w[m].clone()).collect(),
    };
    let h1 = 1e-4;
    let h2 = 1e-5;
    let plus1 = perturbed_profile(p, bump, h1)?;
    let minus1 = perturbed_profile(p, bump, -h1)?;
    let plus2 = perturbed_profile(p, bump, h2)?;
    let minus2 = perturbed_profile(p, bump, -h2)?;
    let sym_ctx = EvalCtx {
        profile: p,
        bump: Some(bump),
        u: uu,
    };
    for step in 1..=4 {
        let x = lo + (hi - lo) * step as f64 / 5.0;
        for (m, expr) in exprs.iter().enumerate() {
            let sym = eval_tree(expr, &sym_ctx, x);
            let d = |pp: &ProfileSpec, mm: &ProfileSpec, h: f64| {
                let cp = EvalCtx::new(pp).with_u(uu);
                let cm = EvalCtx::new(mm).with_u(uu);
                (eval_tree(&base[m], &cp, x) - eval_tree(&base[m], &cm, x)) / (2.0 * h)
            };
            let d1 = d(&plus1, &minus1, h1);
            let d2 = d(&plus2, &minus2, h2);
            // Richardson over the 10:1 step pair
            let fd = (100.0 * d2 - d1) / 99.0;
            let scale = sym.abs().max(fd.abs()).max(1.0);
            if (sym - fd).abs() > 1e-4 * scale {
                return Err(Error::DifferentiationFailure(format!(
                    "eps-derivative of coefficient {} at x = {x}: symbolic {sym:e} vs finite-difference {fd:e}",
                    m as i32 - 1
                )));
            }
        }
    }

    Ok(CoefficientTable {
        kind,
        order: n,
        u,
        epsilon_table: true,
        profile: p.clone(),
        bump: Some(bump.clone()),
        coefficients: exprs,
        integrals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::make_gaussian_bump;

    fn linear_profile() -> ProfileSpec {
        ProfileSpec::new_unchecked(
            1.0,
            2.0,
            Arc::new(|x| x),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        )
    }

    #[test]
    fn constant_profile_collapses_s_series() {
        let p = ProfileSpec::constant(3.0, 0.0, 1.0);
        let t = s_coefficients(&p, 4).unwrap();
        for x in [0.1, 0.5, 0.9] {
            assert!((t.coefficient(-1, x) - 1.0).abs() < 1e-12);
            for i in 0..=2 {
                assert!(t.coefficient(i, x).abs() < 1e-12, "s_{i}({x})");
            }
        }
        for i in 0..=2 {
            assert!(t.integral(i).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_profile_collapses_w_series() {
        let alpha = 2.0f64;
        let u = 1.5f64;
        let p = ProfileSpec::constant(alpha, 0.0, 1.0);
        let t = w_coefficients(&p, 4, u).unwrap();
        let expect = (1.0 + u * u * alpha * alpha).sqrt() / alpha;
        for x in [0.25, 0.75] {
            assert!((t.coefficient(-1, x) - expect).abs() < 1e-12);
            for i in 0..=2 {
                assert!(t.coefficient(i, x).abs() < 1e-12, "w_{i}({x})");
            }
        }
    }

    #[test]
    fn s_series_matches_hand_expansion_for_linear_profile() {
        // For f(x) = x the recursion unrolls by hand to
        // s_{-1} = sqrt(2), s_0 = -1/(2x), s_1 = -sqrt(2)/(16 x^2),
        // s_2 = -1/(16 x^3).
        let p = linear_profile();
        let t = s_coefficients(&p, 4).unwrap();
        let x = 1.5;
        assert!((t.coefficient(-1, x) - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((t.coefficient(0, x) + 1.0 / (2.0 * x)).abs() < 1e-12);
        assert!((t.coefficient(1, x) + 2.0f64.sqrt() / (16.0 * x * x)).abs() < 1e-12);
        assert!((t.coefficient(2, x) + 1.0 / (16.0 * x * x * x)).abs() < 1e-10);
    }

    #[test]
    fn s_leading_integral_is_arclength() {
        let p = linear_profile();
        let t = s_coefficients(&p, 2).unwrap();
        assert!((t.integral(-1) - 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn w_series_reduces_at_u_zero() {
        // w_{-1}|_{u=0} = sqrt(1+f'^2)/f, and all higher coefficients vanish
        // identically at u = 0.
        let p = linear_profile();
        let t = w_coefficients(&p, 4, 0.0).unwrap();
        for x in [1.2, 1.5, 1.9] {
            let expect = 2.0f64.sqrt() / x;
            assert!((t.coefficient(-1, x) - expect).abs() < 1e-12);
            for i in 0..=2 {
                assert!(t.coefficient(i, x).abs() < 1e-11, "w_{i}({x}) at u=0");
            }
        }
    }

    #[test]
    fn w_series_matches_hand_expansion_at_u_one() {
        // Hand expansion for f(x) = x: w_0 = -u^2 x/(2(1+u^2x^2)); at u = 1
        // w_1 unrolls to the bracket below (see the recursion with
        // w_0' + P w_0 + w_0^2).
        let p = linear_profile();
        let t = w_coefficients(&p, 4, 1.0).unwrap();
        let x: f64 = 1.5;
        let w0_expect = -x / (2.0 * (1.0 + x * x));
        assert!((t.coefficient(0, x) - w0_expect).abs() < 1e-12);
        let opx = 1.0 + x * x;
        let w_m1 = (2.0 * opx).sqrt() / x;
        let w0p = -0.5 * (1.0 - x * x) / (opx * opx);
        let pw0 = (1.0 / x) * w0_expect;
        let sum = w0p + pw0 + w0_expect * w0_expect;
        let w1_expect = -sum / (2.0 * w_m1);
        assert!(
            (t.coefficient(1, x) - w1_expect).abs() < 1e-12,
            "w1({x}) = {} vs {}",
            t.coefficient(1, x),
            w1_expect
        );
        // frozen value from the hand expansion
        assert!((t.coefficient(1, x) - 0.012184730289650487).abs() < 1e-12);
    }

    #[test]
    fn log_a_plus_constant_profile() {
        let p = ProfileSpec::constant(5.0, 0.0, 1.0);
        assert!((log_a_plus(&p, 1.0, 3) + 2.0f64.ln()).abs() < 1e-14);
        assert!((log_a_plus(&p, 10.0, 3) + 20.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_a_plus_linear_profile_matches_formula() {
        // N = 4 keeps the j = 1 series term: s_1(a)/s_{-1}(a) = -1/16 at a=1.
        let p = linear_profile();
        let lambda: f64 = 5.0;
        let expect = -(2.0 * lambda * 2.0f64.sqrt()).ln() - (1.0f64 - (1.0 / 16.0) / 25.0).ln();
        assert!((log_a_plus(&p, lambda, 4) - expect).abs() < 1e-12);
        // N = 3 drops the series part
        let expect3 = -(2.0 * lambda * 2.0f64.sqrt()).ln();
        assert!((log_a_plus(&p, lambda, 3) - expect3).abs() < 1e-12);
    }

    #[test]
    fn log_b_plus_trivial_cases() {
        let p1 = ProfileSpec::constant(1.0, 0.0, 1.0);
        assert!((log_b_plus(&p1, 1, 0.0, 3) + 2.0f64.ln()).abs() < 1e-14);
        let p2 = ProfileSpec::constant(2.0, 0.0, 1.0);
        // w_{-1}(a) = sqrt(5)/2, so -log(2*3*sqrt(5)/2) = -log(3 sqrt 5)
        let expect = -(3.0 * 5.0f64.sqrt()).ln();
        assert!((log_b_plus(&p2, 3, 1.0, 3) - expect).abs() < 1e-14);
    }

    #[test]
    fn log_b_plus_linear_profile_with_series_term() {
        let p = linear_profile();
        let (k, u) = (2u32, 0.5f64);
        // hand values at a = 1: w_{-1}(1) = sqrt(2.5), w_1(1) = 0.15/(2 sqrt 2.5)
        let w_m1_a = 2.5f64.sqrt();
        let w1_a = 0.15 / (2.0 * 2.5f64.sqrt());
        let expect = -(2.0 * 2.0 * w_m1_a).ln() - (1.0 + w1_a / w_m1_a / 4.0).ln();
        assert!(
            (log_b_plus(&p, k, u, 4) - expect).abs() < 1e-12,
            "logB+ = {} vs {}",
            log_b_plus(&p, k, u, 4),
            expect
        );
    }

    #[test]
    fn epsilon_tables_vanish_on_cylinder_s_series() {
        let p = ProfileSpec::constant(1.0, 0.0, 1.0);
        let bump = make_gaussian_bump(0.5, 0.3);
        let t = epsilon_derivative_tables(&p, &bump, 4, None).unwrap();
        for i in -1..=2 {
            assert!(
                t.integral(i).abs() < 1e-10,
                "int d/deps s_{i} = {:e}",
                t.integral(i)
            );
        }
    }

    #[test]
    fn epsilon_tables_cylinder_w_leading_integral() {
        let alpha = 1.0f64;
        let u = 0.7f64;
        let p = ProfileSpec::constant(alpha, 0.0, 1.0);
        let bump = make_gaussian_bump(0.5, 0.3);
        let t = epsilon_derivative_tables(&p, &bump, 4, Some(u)).unwrap();
        let spec = QuadratureSpec::default();
        let g = bump.g.clone();
        let (int_g, _) = adaptive_quad(&|x| g(x), 0.2, 0.8, &spec).unwrap();
        let expect = -int_g / (alpha * alpha * (1.0 + u * u * alpha * alpha).sqrt());
        assert!(
            (t.integral(-1) - expect).abs() < 1e-10,
            "int d/deps w_-1 = {} vs {}",
            t.integral(-1),
            expect
        );
        for i in 0..=2 {
            assert!(t.integral(i).abs() < 1e-9, "int d/deps w_{i}");
        }
    }

    #[test]
    fn epsilon_derivative_of_s_leading_matches_closed_form() {
        // d/deps s_{-1} = f' g' / sqrt(1 + f'^2)
        let p = ProfileSpec::new_unchecked(
            0.0,
            1.0,
            Arc::new(|x| 1.0 + x / 4.0),
            Arc::new(|_| 0.25),
            Arc::new(|_| 0.0),
        );
        let bump = make_gaussian_bump(0.5, 0.2);
        let t = epsilon_derivative_tables(&p, &bump, 2, None).unwrap();
        for x in [0.4, 0.5, 0.6] {
            let expect = 0.25 * (bump.g_prime)(x) / (1.0f64 + 0.0625).sqrt();
            assert!((t.coefficient(-1, x) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_tables_track_finite_differences_on_grid() {
        let p = ProfileSpec::new_unchecked(
            0.0,
            1.0,
            Arc::new(|x: f64| (x - 0.5f64).cosh()),
            Arc::new(|x: f64| (x - 0.5f64).sinh()),
            Arc::new(|x: f64| (x - 0.5f64).cosh()),
        );
        let bump = make_gaussian_bump(0.5, 0.2);
        let t = epsilon_derivative_tables(&p, &bump, 4, Some(0.8)).unwrap();
        let h = 1e-5;
        let plus = perturbed_profile(&p, &bump, h).unwrap();
        let minus = perturbed_profile(&p, &bump, -h).unwrap();
        let tp = w_coefficients(&plus, 4, 0.8).unwrap();
        let tm = w_coefficients(&minus, 4, 0.8).unwrap();
        for i in -1..=2 {
            for x in [0.42, 0.5, 0.58] {
                let fd = (tp.coefficient(i, x) - tm.coefficient(i, x)) / (2.0 * h);
                let sym = t.coefficient(i, x);
                let scale = sym.abs().max(fd.abs()).max(1e-6);
                assert!(
                    ((sym - fd) / scale).abs() < 1e-4,
                    "i = {i}, x = {x}: sym {sym:e} fd {fd:e}"
                );
            }
        }
    }

    #[test]
    fn table_shape_and_leading_coefficient_invariants() {
        let p = linear_profile();
        let t = s_coefficients(&p, 3).unwrap();
        assert_eq!(t.len(), 3); // indices -1, 0, 1
        assert_eq!(t.kind, SeriesKind::SSeries);
        let tw = w_coefficients(&p, 4, 2.0).unwrap();
        assert_eq!(tw.len(), 4);
        for x in [1.1, 1.6] {
            let f = x;
            let expect = ((1.0f64 + 4.0 * f * f) * 2.0 / (f * f)).sqrt();
            assert!((tw.coefficient(-1, x) - expect).abs() < 1e-12);
        }
    }
}
