//! Minimal expression trees over the profile atoms f, g and the uniform
//! parameter u. The WKB recursions need exact x-derivatives of their own
//! output, and the energy variation needs exact epsilon-derivatives at
//! epsilon = 0 under f -> f + eps*g; both are tree rewrites here.
//!
//! Atoms of order >= 3 (f''' and beyond) evaluate through guarded central
//! differences of the supplied second derivative with one Richardson step.

use std::fmt;
use std::sync::Arc;

use crate::profile::{BumpSpec, ProfileSpec};

#[derive(Debug)]
pub enum Expr {
    Const(f64),
    /// n-th derivative of the profile f (n = 0 is f itself).
    F(u8),
    /// n-th derivative of the bump g.
    G(u8),
    /// The uniform-expansion parameter.
    U,
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// base^exponent; fractional exponents are only ever applied to
    /// structurally positive bases (1 + f'^2, f^2, ...).
    Pow(Arc<Expr>, f64),
    Neg(Arc<Expr>),
}

pub type ExprRef = Arc<Expr>;

pub fn constant(v: f64) -> ExprRef {
    Arc::new(Expr::Const(v))
}

pub fn f_deriv(n: u8) -> ExprRef {
    Arc::new(Expr::F(n))
}

pub fn g_deriv(n: u8) -> ExprRef {
    Arc::new(Expr::G(n))
}

pub fn u_param() -> ExprRef {
    Arc::new(Expr::U)
}

fn is_zero(e: &ExprRef) -> bool {
    matches!(**e, Expr::Const(c) if c == 0.0)
}

fn is_one(e: &ExprRef) -> bool {
    matches!(**e, Expr::Const(c) if c == 1.0)
}

fn const_of(e: &ExprRef) -> Option<f64> {
    match **e {
        Expr::Const(c) => Some(c),
        _ => None,
    }
}

pub fn add(a: ExprRef, b: ExprRef) -> ExprRef {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_of(&a), const_of(&b)) {
        return constant(x + y);
    }
    Arc::new(Expr::Add(a, b))
}

pub fn sub(a: ExprRef, b: ExprRef) -> ExprRef {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return neg(b);
    }
    if let (Some(x), Some(y)) = (const_of(&a), const_of(&b)) {
        return constant(x - y);
    }
    Arc::new(Expr::Sub(a, b))
}

pub fn mul(a: ExprRef, b: ExprRef) -> ExprRef {
    if is_zero(&a) || is_zero(&b) {
        return constant(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_of(&a), const_of(&b)) {
        return constant(x * y);
    }
    Arc::new(Expr::Mul(a, b))
}

pub fn div(a: ExprRef, b: ExprRef) -> ExprRef {
    if is_zero(&a) {
        return constant(0.0);
    }
    if is_one(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_of(&a), const_of(&b)) {
        return constant(x / y);
    }
    Arc::new(Expr::Div(a, b))
}

pub fn pow(base: ExprRef, exponent: f64) -> ExprRef {
    if exponent == 0.0 {
        return constant(1.0);
    }
    if exponent == 1.0 {
        return base;
    }
    if let Some(x) = const_of(&base) {
        return constant(x.powf(exponent));
    }
    Arc::new(Expr::Pow(base, exponent))
}

pub fn neg(a: ExprRef) -> ExprRef {
    if let Some(x) = const_of(&a) {
        return constant(-x);
    }
    Arc::new(Expr::Neg(a))
}

pub fn sqrt(a: ExprRef) -> ExprRef {
    pow(a, 0.5)
}

/// Exact derivative with respect to x.
pub fn diff_x(e: &ExprRef) -> ExprRef {
    match &**e {
        Expr::Const(_) | Expr::U => constant(0.0),
        Expr::F(n) => f_deriv(n + 1),
        Expr::G(n) => g_deriv(n + 1),
        Expr::Add(a, b) => add(diff_x(a), diff_x(b)),
        Expr::Sub(a, b) => sub(diff_x(a), diff_x(b)),
        Expr::Mul(a, b) => add(mul(diff_x(a), b.clone()), mul(a.clone(), diff_x(b))),
        Expr::Div(a, b) => sub(
            div(diff_x(a), b.clone()),
            div(mul(a.clone(), diff_x(b)), mul(b.clone(), b.clone())),
        ),
        Expr::Pow(base, p) => mul(
            mul(constant(*p), pow(base.clone(), p - 1.0)),
            diff_x(base),
        ),
        Expr::Neg(a) => neg(diff_x(a)),
    }
}

/// Derivative with respect to epsilon at epsilon = 0 under f -> f + eps g:
/// every f-atom turns into the matching g-atom.
pub fn diff_eps(e: &ExprRef) -> ExprRef {
    match &**e {
        Expr::Const(_) | Expr::U | Expr::G(_) => constant(0.0),
        Expr::F(n) => g_deriv(*n),
        Expr::Add(a, b) => add(diff_eps(a), diff_eps(b)),
        Expr::Sub(a, b) => sub(diff_eps(a), diff_eps(b)),
        Expr::Mul(a, b) => add(mul(diff_eps(a), b.clone()), mul(a.clone(), diff_eps(b))),
        Expr::Div(a, b) => sub(
            div(diff_eps(a), b.clone()),
            div(mul(a.clone(), diff_eps(b)), mul(b.clone(), b.clone())),
        ),
        Expr::Pow(base, p) => mul(
            mul(constant(*p), pow(base.clone(), p - 1.0)),
            diff_eps(base),
        ),
        Expr::Neg(a) => neg(diff_eps(a)),
    }
}

/// Evaluation bindings: a profile, an optional bump (g-atoms evaluate to 0
/// without one) and a value for u.
pub struct EvalCtx<'a> {
    pub profile: &'a ProfileSpec,
    pub bump: Option<&'a BumpSpec>,
    pub u: f64,
}

impl<'a> EvalCtx<'a> {
    pub fn new(profile: &'a ProfileSpec) -> Self {
        Self {
            profile,
            bump: None,
            u: 0.0,
        }
    }

    pub fn with_bump(profile: &'a ProfileSpec, bump: &'a BumpSpec) -> Self {
        Self {
            profile,
            bump: Some(bump),
            u: 0.0,
        }
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    fn f_n(&self, n: u8, x: f64) -> f64 {
        match n {
            0 => (self.profile.f)(x),
            1 => (self.profile.f_prime)(x),
            2 => (self.profile.f_double_prime)(x),
            3 => deriv1_fd(&*self.profile.f_double_prime, x, self.profile.a, self.profile.b),
            4 => deriv2_fd(&*self.profile.f_double_prime, x, self.profile.a, self.profile.b),
            _ => unreachable!("profile derivatives above order 4 are never generated"),
        }
    }

    fn g_n(&self, n: u8, x: f64) -> f64 {
        let Some(bump) = self.bump else { return 0.0 };
        match n {
            0 => (bump.g)(x),
            1 => (bump.g_prime)(x),
            2 => (bump.g_double_prime)(x),
            3 => deriv1_fd(&*bump.g_double_prime, x, self.profile.a, self.profile.b),
            4 => deriv2_fd(&*bump.g_double_prime, x, self.profile.a, self.profile.b),
            _ => unreachable!("bump derivatives above order 4 are never generated"),
        }
    }
}

const FD_STEP: f64 = 1e-4;

/// First derivative of `h` by central differences with one Richardson step,
/// stencil shifted inward when x sits within 2h of the domain edge.
fn deriv1_fd(h: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64, a: f64, b: f64) -> f64 {
    let step = FD_STEP * ((b - a).abs().min(1.0));
    let xc = x.clamp(a + 2.0 * step, b - 2.0 * step);
    let d = |s: f64| (h(xc + s) - h(xc - s)) / (2.0 * s);
    (4.0 * d(step / 2.0) - d(step)) / 3.0
}

/// Second derivative of `h`, same guarding and Richardson step.
fn deriv2_fd(h: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64, a: f64, b: f64) -> f64 {
    let step = FD_STEP * ((b - a).abs().min(1.0));
    let xc = x.clamp(a + 2.0 * step, b - 2.0 * step);
    let d = |s: f64| (h(xc + s) - 2.0 * h(xc) + h(xc - s)) / (s * s);
    (4.0 * d(step / 2.0) - d(step)) / 3.0
}

pub fn eval(e: &ExprRef, ctx: &EvalCtx<'_>, x: f64) -> f64 {
    match &**e {
        Expr::Const(c) => *c,
        Expr::F(n) => ctx.f_n(*n, x),
        Expr::G(n) => ctx.g_n(*n, x),
        Expr::U => ctx.u,
        Expr::Add(a, b) => eval(a, ctx, x) + eval(b, ctx, x),
        Expr::Sub(a, b) => eval(a, ctx, x) - eval(b, ctx, x),
        Expr::Mul(a, b) => eval(a, ctx, x) * eval(b, ctx, x),
        Expr::Div(a, b) => eval(a, ctx, x) / eval(b, ctx, x),
        Expr::Pow(base, p) => {
            let v = eval(base, ctx, x);
            if *p == 2.0 {
                v * v
            } else if *p == -1.0 {
                1.0 / v
            } else {
                v.powf(*p)
            }
        }
        Expr::Neg(a) => -eval(a, ctx, x),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(out, "{c}"),
            Expr::F(0) => write!(out, "f"),
            Expr::F(n) => write!(out, "f{}", "'".repeat(*n as usize)),
            Expr::G(0) => write!(out, "g"),
            Expr::G(n) => write!(out, "g{}", "'".repeat(*n as usize)),
            Expr::U => write!(out, "u"),
            Expr::Add(a, b) => write!(out, "({a} + {b})"),
            Expr::Sub(a, b) => write!(out, "({a} - {b})"),
            Expr::Mul(a, b) => write!(out, "({a} * {b})"),
            Expr::Div(a, b) => write!(out, "({a} / {b})"),
            Expr::Pow(a, p) => write!(out, "({a})^{p}"),
            Expr::Neg(a) => write!(out, "-({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileSpec;

    #[test]
    fn differentiates_products_and_powers() {
        // d/dx (f * f'^2) = f' * f'^2 + f * 2 f' f''
        let e = mul(f_deriv(0), pow(f_deriv(1), 2.0));
        let de = diff_x(&e);
        let p = ProfileSpec::new_unchecked(
            0.0,
            2.0,
            Arc::new(|x: f64| x * x),
            Arc::new(|x: f64| 2.0 * x),
            Arc::new(|_| 2.0),
        );
        let ctx = EvalCtx::new(&p);
        let x = 0.7;
        let expect = 2.0 * x * (2.0 * x) * (2.0 * x) + x * x * 2.0 * (2.0 * x) * 2.0;
        assert!((eval(&de, &ctx, x) - expect).abs() < 1e-12);
    }

    #[test]
    fn epsilon_derivative_swaps_atoms() {
        // d/deps sqrt(1 + f'^2) = f' g' / sqrt(1 + f'^2)
        let s_m1 = sqrt(add(constant(1.0), pow(f_deriv(1), 2.0)));
        let d = diff_eps(&s_m1);
        let p = ProfileSpec::new_unchecked(
            0.0,
            1.0,
            Arc::new(|x: f64| 1.0 + x),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        );
        let bump = crate::profile::make_gaussian_bump(0.5, 0.3);
        let ctx = EvalCtx::with_bump(&p, &bump);
        let x = 0.55;
        let expect = 1.0 * (bump.g_prime)(x) / (2.0f64).sqrt();
        assert!((eval(&d, &ctx, x) - expect).abs() < 1e-12);
    }

    #[test]
    fn third_derivative_via_finite_differences() {
        let p = ProfileSpec::new_unchecked(
            0.0,
            1.0,
            Arc::new(|x: f64| (x - 0.5f64).cosh()),
            Arc::new(|x: f64| (x - 0.5f64).sinh()),
            Arc::new(|x: f64| (x - 0.5f64).cosh()),
        );
        let ctx = EvalCtx::new(&p);
        let e = f_deriv(3);
        let x = 0.3;
        let expect = (x - 0.5f64).sinh();
        assert!(
            (eval(&e, &ctx, x) - expect).abs() < 1e-8,
            "f''' fd = {}, exact = {}",
            eval(&e, &ctx, x),
            expect
        );
    }
}
