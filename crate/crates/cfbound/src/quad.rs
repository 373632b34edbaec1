//! Adaptive Gauss–Legendre quadrature, one-dimensional and nested 2-D.
//!
//! The driver bisects panels until the two-half refinement of a 15-point
//! rule agrees with the parent panel, splitting the tolerance between the
//! halves. A couple of forced subdivision levels guard against a deceptively
//! smooth-looking first panel.

use crate::error::{Error, Result};
use std::cell::RefCell;
use std::sync::OnceLock;

const PANEL_POINTS: usize = 15;
const MIN_DEPTH: usize = 2;
const MAX_DEPTH: usize = 34;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..60 {
            let (p, d) = legendre_with_deriv(n, x);
            deriv = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let k = k as f64;
        let p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_POINTS))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = panel_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// ∫_a^b f, to absolute tolerance `tol`. A degenerate range gives 0.
///
/// Cells that hit the subdivision cap are kept, but their residual is
/// tallied; integration fails only when the unresolved total exceeds the
/// budget. Bounded integrands with boundary layers (an infinite derivative
/// at an endpoint, say) thus converge, while genuinely non-integrable
/// singularities still surface as errors.
pub fn adaptive_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let whole = panel(f, a, b);
    let mut unresolved = 0.0;
    let value = refine(f, a, b, whole, tol, 0, &mut unresolved);
    if unresolved > tol {
        return Err(Error::NonConvergence {
            what: "adaptive quadrature",
        });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    unresolved: &mut f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let two_half = left + right;
    let residual = (two_half - whole).abs();
    if depth >= MIN_DEPTH && residual <= tol {
        return two_half;
    }
    if depth >= MAX_DEPTH {
        *unresolved += residual;
        return two_half;
    }
    let tol = 0.5 * tol;
    refine(f, a, mid, left, tol, depth + 1, unresolved)
        + refine(f, mid, b, right, tol, depth + 1, unresolved)
}

/// ∫_{y0}^{y1} ∫_{x0(y)}^{x1(y)} f(x, y) dx dy by nested adaptive rules.
///
/// The inner tolerance is scaled so that accumulated inner error stays below
/// half the requested budget, with the other half spent on the outer rule.
pub fn adaptive_2d<F, R>(f: &F, y0: f64, y1: f64, x_range: &R, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    R: Fn(f64) -> (f64, f64),
{
    if !(y1 > y0) {
        return Ok(0.0);
    }
    let inner_tol = 0.25 * tol / (y1 - y0);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |y: f64| {
        let (x0, x1) = x_range(y);
        match adaptive_1d(&|x| f(x, y), x0, x1, inner_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let outer = adaptive_1d(&g, y0, y1, 0.5 * tol)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}
