//! Shared numerical engine: adaptive Gauss-Kronrod quadrature, the
//! `t/(1-t)` transform for improper integrals, and series summation with
//! integral tail bounds.

use crate::error::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half;
/// the even-index entries are the embedded 7-point Gauss nodes).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and subdivision budget for one quadrature (also reused as the
/// accuracy request for ODE solves).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Self {
        assert!(abs_tol > 0.0 && rel_tol > 0.0 && max_subdivisions >= 1);
        Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        }
    }

    /// Same budget with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: (self.rel_tol * factor).max(1e-15),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 30,
        }
    }
}

/// One Gauss-Kronrod evaluation on `[lo, hi]`: returns (K15 value, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(fun: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let f_center = fun(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = fun(center - dx);
        let f2 = fun(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive quadrature of `fun` over `[lo, hi]` by recursive bisection of the
/// embedded 7/15 pair. Returns the value and an error estimate; fails with
/// `SubdivisionLimit` when the local error cannot be brought under the
/// tolerance within the subdivision budget.
pub fn adaptive_quad<F: Fn(f64) -> f64>(
    fun: &F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    assert!(lo < hi, "adaptive_quad requires lo < hi");
    // First pass to learn the scale for the relative tolerance.
    let (whole, _) = gk15(fun, lo, hi);
    let tol = spec.abs_tol.max(spec.rel_tol * whole.abs());
    let mut value = 0.0;
    let mut err = 0.0;
    quad_panel(
        fun,
        lo,
        hi,
        tol,
        spec.max_subdivisions,
        &mut value,
        &mut err,
    )?;
    Ok((value, err))
}

fn quad_panel<F: Fn(f64) -> f64>(
    fun: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    depth_left: usize,
    value: &mut f64,
    err: &mut f64,
) -> Result<()> {
    let (k, e) = gk15(fun, lo, hi);
    if e <= tol || (hi - lo) < 1e-14 * (lo.abs() + hi.abs() + 1.0) {
        *value += k;
        *err += e;
        return Ok(());
    }
    if depth_left == 0 {
        return Err(Error::SubdivisionLimit {
            limit: 0,
            err_estimate: e,
        });
    }
    let mid = 0.5 * (lo + hi);
    quad_panel(fun, lo, mid, 0.5 * tol, depth_left - 1, value, err)?;
    quad_panel(fun, mid, hi, 0.5 * tol, depth_left - 1, value, err)
}

/// Integral of `fun` over `[0, inf)` via the substitution `u = t/(1-t)`,
/// which maps the half line onto `[0, 1)`. The endpoint t = 1 is never
/// evaluated (the Kronrod nodes are interior) and the last sliver of the
/// unit interval is capped where the Jacobian would only amplify roundoff.
pub fn improper_quad<F: Fn(f64) -> f64>(fun: &F, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    // Decay guard: the transform assumes the integrand dies out.
    let mut prev = f64::INFINITY;
    for &u in &[1.0e3, 2.0e3, 4.0e3, 8.0e3] {
        let v = fun(u).abs();
        if v > prev * 1.0000001 && v > spec.abs_tol * 1e-3 {
            return Err(Error::NonDecayDetected { u, value: v });
        }
        prev = v.max(spec.abs_tol * 1e-3);
    }
    let transformed = |t: f64| {
        let om = 1.0 - t;
        if om < 1e-8 {
            return 0.0;
        }
        let u = t / om;
        fun(u) / (om * om)
    };
    adaptive_quad(&transformed, 0.0, 1.0, spec)
}

/// Integral of `fun` over `[lo, inf)`: shifted `t/(1-t)` transform.
pub fn improper_quad_from<F: Fn(f64) -> f64>(
    fun: &F,
    lo: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    improper_quad(&|u| fun(lo + u), spec)
}

/// Result of a truncated series with a tail estimate.
#[derive(Debug, Clone, Copy)]
pub struct SeriesResult {
    pub sum: f64,
    pub k_used: usize,
    pub tail_bound: f64,
}

/// Sum `term(k)` for k = 1, 2, ... until `tail(K)` certifies that the
/// discarded remainder is below `target_tol`. The tail closure must return an
/// upper bound on |sum_{k > K} term(k)|. Terms are accumulated in ascending
/// order so results are reproducible.
pub fn series_with_tail<T, B>(
    term: T,
    tail: B,
    target_tol: f64,
    k_cap: usize,
) -> Result<SeriesResult>
where
    T: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
{
    let mut sum = 0.0;
    let mut k = 0usize;
    let mut next_check = 4usize;
    let mut last_bound = f64::INFINITY;
    while k < k_cap {
        k += 1;
        sum += term(k);
        if k == next_check || k == k_cap {
            last_bound = tail(k).abs();
            if last_bound <= target_tol {
                return Ok(SeriesResult {
                    sum,
                    k_used: k,
                    tail_bound: last_bound,
                });
            }
            next_check = (next_check * 2).min(k_cap);
        }
    }
    Err(Error::TailBoundUnmet {
        k_cap,
        bound: last_bound,
        target: target_tol,
    })
}

/// Estimate `|int_K^inf h(kappa) dkappa|` by 8-point Gauss-Legendre panels in
/// log space, one panel per decade, stopping once a decade contributes
/// a negligible fraction. This is the evaluation scheme behind the series
/// tail bounds: the continuous-argument summand is handed in as `h`.
pub fn integral_tail_estimate<H: Fn(f64) -> f64>(h: &H, k_from: f64) -> f64 {
    // 8-point Gauss-Legendre on [0, 1].
    const GL_X: [f64; 8] = [
        0.0198550717512319,
        0.1016667612931866,
        0.2372337950418355,
        0.4082826787521751,
        0.5917173212478249,
        0.7627662049581645,
        0.8983332387068134,
        0.9801449282487681,
    ];
    const GL_W: [f64; 8] = [
        0.0506142681451881,
        0.1111905172266872,
        0.1568533229389436,
        0.1813418916891810,
        0.1813418916891810,
        0.1568533229389436,
        0.1111905172266872,
        0.0506142681451881,
    ];
    let mut total = 0.0;
    let mut lo = k_from.max(1.0);
    for _ in 0..6 {
        let hi = lo * 10.0;
        let (lla, llb) = (lo.ln(), hi.ln());
        let mut panel = 0.0;
        for i in 0..8 {
            let lk = lla + (llb - lla) * GL_X[i];
            let kappa = lk.exp();
            // d kappa = kappa d(ln kappa)
            panel += GL_W[i] * h(kappa).abs() * kappa;
        }
        panel *= llb - lla;
        total += panel;
        if panel < 1e-3 * total.max(1e-300) || panel == 0.0 {
            break;
        }
        lo = hi;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let (v, _) = adaptive_quad(&|x| x * x, 0.0, 1.0, &spec()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        // degree-10 polynomial is inside the exactness range of the base rule
        let (v10, _) = adaptive_quad(&|x| x.powi(10), 0.0, 1.0, &spec()).unwrap();
        assert!((v10 - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_sine() {
        let (v, e) = adaptive_quad(&|x| x.sin(), 0.0, PI, &spec()).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "value {v}, err {e}");
    }

    #[test]
    fn subdivision_limit_is_reported() {
        let tight = QuadratureSpec::new(1e-15, 1e-15, 2);
        let res = adaptive_quad(&|x: f64| (1.0 / (1e-4 + x * x)).sin(), 0.0, 1.0, &tight);
        assert!(matches!(res, Err(Error::SubdivisionLimit { .. })));
    }

    #[test]
    fn improper_exponential() {
        let (v, _) = improper_quad(&|u| (-u).exp(), &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn improper_lorentzian() {
        let (v, _) = improper_quad(&|u| 1.0 / (1.0 + u * u), &spec()).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn improper_gaussian_moment() {
        let (v, _) = improper_quad(&|u| u * (-u * u).exp(), &spec()).unwrap();
        assert!((v - 0.5).abs() < 1e-10);
    }

    #[test]
    fn improper_matches_split_form() {
        // int_0^inf e^{-u} = int_0^10 e^{-u} + e^{-10}
        let (v, _) = improper_quad(&|u| (-u).exp(), &spec()).unwrap();
        let (head, _) = adaptive_quad(&|u| (-u).exp(), 0.0, 10.0, &spec()).unwrap();
        assert!((v - (head + (-10.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn non_decay_is_detected() {
        let res = improper_quad(&|u| 1.0 + u * 1e-6, &spec());
        assert!(matches!(res, Err(Error::NonDecayDetected { .. })));
    }

    #[test]
    fn geometric_series_with_exact_tail() {
        let r = series_with_tail(|k| 0.5f64.powi(k as i32), |kk| 0.5f64.powi(kk as i32), 1e-12, 100)
            .unwrap();
        assert!((r.sum + r.tail_bound - 1.0).abs() < 1e-9);
        assert!((r.sum - 1.0).abs() < 1e-11);
    }

    #[test]
    fn quartic_series_hits_zeta4() {
        let r = series_with_tail(
            |k| 1.0 / (k as f64).powi(4),
            |kk| 1.0 / (3.0 * (kk as f64).powi(3)),
            1e-6,
            10_000,
        )
        .unwrap();
        let zeta4 = PI.powi(4) / 90.0;
        assert!((r.sum - zeta4).abs() < 1e-6, "sum {} vs {}", r.sum, zeta4);
        assert!(r.tail_bound <= 1e-6);
    }

    #[test]
    fn tail_bound_unmet_errors() {
        let res = series_with_tail(|k| 1.0 / k as f64, |kk| 10.0 / kk as f64, 1e-9, 50);
        assert!(matches!(res, Err(Error::TailBoundUnmet { .. })));
    }

    #[test]
    fn integral_tail_tracks_power_law() {
        // int_10^inf k^{-4} dk = 1/(3*10^3)
        let est = integral_tail_estimate(&|k| k.powi(-4), 10.0);
        assert!((est - 1.0 / 3000.0).abs() < 1e-6, "est {est}");
    }
}
