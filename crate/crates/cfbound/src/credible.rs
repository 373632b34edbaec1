//! Credible statements about a run-set interval: how probable it is that the
//! observed envelope sits within a chosen tolerance of the true bounds.
//!
//! The machinery treats the per-run query values as draws from a
//! four-parameter Beta distribution on an unknown support enclosing the
//! observed `[a, b]`. Under a uniform prior on the two slack widths
//! `(Δa, Δb)` restricted to the feasible triangle `Δa + Δb ≤ a + (1 − b)`,
//! the posterior probability that both slacks stay below `δ/2` is a ratio of
//! two integrals of a closed-form kernel. With Beta(1, 1) shapes the ratio
//! collapses to an explicit expression; the degenerate zero-width envelope
//! gets its own closed form.

use serde::Serialize;

use crate::emcc::RunSet;
use crate::error::{Error, Result};
use crate::quad;
use crate::special;

/// Absolute tolerance for the coverage quadratures.
const QUAD_TOL: f64 = 1e-8;
/// Interval widths at or below this are treated as "all runs agree".
pub const IDENTIFIABILITY_WIDTH_TOL: f64 = 1e-9;

/// A coverage question about a run set: how likely is it that the true
/// bounds lie within `delta/2` of the observed endpoints on each side.
#[derive(Debug, Clone, Copy)]
pub struct CoverageQuery<'a> {
    pub runset: &'a RunSet,
    pub delta: f64,
}

impl<'a> CoverageQuery<'a> {
    pub fn new(runset: &'a RunSet, delta: f64) -> Result<Self> {
        if runset.values.is_empty() {
            return Err(Error::Domain("coverage query over an empty run set".into()));
        }
        let l = runset.interval.width();
        if !(l > 0.0) {
            return Err(Error::Domain(
                "coverage query needs a positive-width interval (identical runs \
                 are handled by the identifiability formula)"
                    .into(),
            ));
        }
        if !(delta > 0.0) || delta >= l {
            return Err(Error::Domain(format!(
                "allowed error delta must lie in (0, interval width); got {delta} against width {l}"
            )));
        }
        Ok(CoverageQuery { runset, delta })
    }

    /// Number of runs behind the interval.
    pub fn k(&self) -> usize {
        self.runset.values.len()
    }

    /// Observed interval width.
    pub fn l(&self) -> f64 {
        self.runset.interval.width()
    }

    /// Relative half-error ε = δ / (2L).
    pub fn epsilon(&self) -> f64 {
        self.delta / (2.0 * self.l())
    }
}

/// Maximum-likelihood Beta shapes for the rescaled run values.
#[derive(Debug, Clone, Serialize)]
pub struct BetaFit {
    pub alpha: f64,
    pub beta: f64,
    /// Observed support the values were rescaled over.
    pub support: (f64, f64),
    /// Log-likelihood at the optimum (four-parameter density, i.e. including
    /// the `−k·ln L` support-scaling term).
    pub log_likelihood: f64,
}

/// Probability that one Beta(α, β) draw on support `[a − x, b + y]` lands
/// inside `[a, b]`, raised to the k-th power: the likelihood kernel of the
/// slack pair `(x, y)` given k in-interval observations. Depends on the
/// endpoints only through the width `l`.
pub fn kernel(x: f64, y: f64, l: f64, alpha: f64, beta: f64, k: usize) -> Result<f64> {
    if !(l > 0.0) || x < 0.0 || y < 0.0 {
        return Err(Error::Domain(format!(
            "kernel needs l > 0 and nonnegative slacks; got l={l}, x={x}, y={y}"
        )));
    }
    if !(alpha > 0.0) || !(beta > 0.0) || k == 0 {
        return Err(Error::Domain(format!(
            "kernel needs positive shapes and k ≥ 1; got α={alpha}, β={beta}, k={k}"
        )));
    }
    let span = l + x + y;
    let hi = ((l + x) / span).min(1.0);
    let lo = (x / span).min(1.0);
    let mass = (special::betainc_reg(hi, alpha, beta)? - special::betainc_reg(lo, alpha, beta)?)
        .clamp(0.0, 1.0);
    if mass == 0.0 {
        return Ok(0.0);
    }
    let value = (k as f64 * mass.ln()).exp();
    if !value.is_finite() {
        return Err(Error::Domain(
            "kernel evaluation produced a non-finite value".into(),
        ));
    }
    Ok(value)
}

/// Coverage probability under maximum-likelihood Beta shapes: the ratio of
/// the kernel's integral over the `δ/2`-box (clipped to the feasible
/// triangle) to its integral over the whole triangle `x + y ≤ 1 − L`.
pub fn coverage_beta(q: &CoverageQuery, fit: &BetaFit) -> Result<f64> {
    let k = q.k();
    let l = q.l();
    let (alpha, beta) = (fit.alpha, fit.beta);
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "coverage needs positive finite shapes; got α={alpha}, β={beta}"
        )));
    }
    let c = 1.0 - l;
    if c <= 1e-12 {
        return Err(Error::Domain(
            "interval spans the whole unit range; no slack left to integrate over".into(),
        ));
    }
    // Latch numerical failures from inside the quadrature closures.
    let w = |x: f64, y: f64| kernel(x, y, l, alpha, beta, k).unwrap_or(f64::NAN);
    let h = (0.5 * q.delta).min(c);
    let num = quad::adaptive_2d(&w, 0.0, h, &|y| (0.0, h.min(c - y)), QUAD_TOL)?;
    let den = quad::adaptive_2d(&w, 0.0, c, &|y| (0.0, c - y), QUAD_TOL)?;
    if !num.is_finite() || !den.is_finite() {
        return Err(Error::Domain(
            "coverage quadrature hit a non-finite kernel value".into(),
        ));
    }
    if den <= 0.0 {
        return Err(Error::Domain(
            "coverage denominator underflowed to zero".into(),
        ));
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Closed-form coverage for Beta(1, 1) shapes.
pub fn coverage_uniform(q: &CoverageQuery) -> Result<f64> {
    let k = q.k();
    if k < 3 {
        return Err(Error::Domain(format!(
            "uniform coverage formula needs at least three runs; got {k}"
        )));
    }
    let l = q.l();
    if l >= 1.0 - 1e-12 {
        return Err(Error::Domain(
            "interval width too close to 1; formula denominator degenerates".into(),
        ));
    }
    let eps = q.epsilon();
    let e2k = 2 - k as i32;
    let num = 1.0 + (1.0 + 2.0 * eps).powi(e2k) - 2.0 * (1.0 + eps).powi(e2k);
    let lk = l.powi(k as i32 - 2);
    let den = (1.0 - lk) - (k as f64 - 2.0) * (1.0 - l) * lk;
    Ok((num / den).clamp(0.0, 1.0))
}

/// Probability that an identically-valued set of k runs pins the exact
/// bounds: 1 + 9·3^{−k} − 8·2^{−k}. Exactly 0 at k = 1 and k = 2.
pub fn identifiability_probability(k: usize) -> f64 {
    assert!(k >= 1, "identifiability probability needs k >= 1");
    let k = k as i32;
    1.0 + 9.0 / 3f64.powi(k) - 8.0 / 2f64.powi(k)
}

/// Maximum-likelihood Beta(α, β) fit to the run values rescaled over the
/// observed interval. Endpoint values are pulled inward by 1e−9 before
/// rescaling so the log-likelihood stays finite.
pub fn fit_beta(runset: &RunSet) -> Result<BetaFit> {
    let values = &runset.values;
    let k = values.len();
    if k < 3 {
        return Err(Error::Domain(format!(
            "beta fit needs at least three runs; got {k}"
        )));
    }
    let a = runset.interval.lower;
    let b = runset.interval.upper;
    let l = b - a;
    if l <= 2e-9 {
        return Err(Error::Domain(
            "all runs are (numerically) equal; use the identifiability formula instead".into(),
        ));
    }
    let lo = a + 1e-9;
    let hi = b - 1e-9;
    let kf = k as f64;
    let mut mean_ln = 0.0;
    let mut mean_ln1 = 0.0;
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for &v in values {
        let t = (v.clamp(lo, hi) - a) / l;
        mean_ln += t.ln();
        mean_ln1 += (1.0 - t).ln();
        mean += t;
        mean_sq += t * t;
    }
    mean_ln /= kf;
    mean_ln1 /= kf;
    mean /= kf;
    let var = (mean_sq / kf - mean * mean).max(1e-12);

    // moment-matching start
    let common = (mean * (1.0 - mean) / var - 1.0).max(1e-2);
    let mut alpha = (mean * common).clamp(1e-2, 1e3);
    let mut beta = ((1.0 - mean) * common).clamp(1e-2, 1e3);

    let per_obs_ll =
        |al: f64, be: f64| (al - 1.0) * mean_ln + (be - 1.0) * mean_ln1 - special::ln_beta(al, be);

    let mut converged = false;
    for _ in 0..200 {
        let s = alpha + beta;
        let ga = mean_ln - special::digamma(alpha) + special::digamma(s);
        let gb = mean_ln1 - special::digamma(beta) + special::digamma(s);
        if ga.abs().max(gb.abs()) < 1e-11 {
            converged = true;
            break;
        }
        let ts = special::trigamma(s);
        let ha = special::trigamma(alpha) - ts;
        let hb = special::trigamma(beta) - ts;
        let det = ha * hb - ts * ts;
        if !(det > 0.0) {
            return Err(Error::NonConvergence {
                what: "beta maximum-likelihood fit",
            });
        }
        let da = (hb * ga + ts * gb) / det;
        let db = (ts * ga + ha * gb) / det;
        // damp: stay positive and never decrease the likelihood
        let base = per_obs_ll(alpha, beta);
        let mut lam = 1.0;
        let mut stepped = false;
        for _ in 0..60 {
            let na = alpha + lam * da;
            let nb = beta + lam * db;
            if na > 1e-8 && nb > 1e-8 && per_obs_ll(na, nb) >= base - 1e-13 {
                alpha = na;
                beta = nb;
                stepped = true;
                break;
            }
            lam *= 0.5;
        }
        if !stepped {
            converged = ga.abs().max(gb.abs()) < 1e-6;
            break;
        }
    }
    if !converged {
        let s = alpha + beta;
        let ga = mean_ln - special::digamma(alpha) + special::digamma(s);
        let gb = mean_ln1 - special::digamma(beta) + special::digamma(s);
        if ga.abs().max(gb.abs()) >= 1e-6 {
            return Err(Error::NonConvergence {
                what: "beta maximum-likelihood fit",
            });
        }
    }
    let log_likelihood = kf * per_obs_ll(alpha, beta) - kf * l.ln();
    Ok(BetaFit {
        alpha,
        beta,
        support: (a, b),
        log_likelihood,
    })
}

/// Outcome of the run-more-or-stop decision.
#[derive(Debug, Clone, Serialize)]
pub struct StopReport {
    /// True when the coverage estimate reaches the requested target.
    pub stop: bool,
    /// The coverage (or identifiability) probability the decision used.
    pub coverage: f64,
    /// Whether the zero-width "all runs agree" route was taken.
    pub identifiable: bool,
    /// The Beta fit, when one was performed.
    pub fit: Option<BetaFit>,
}

/// Decide whether the run set already supports its interval at the requested
/// credibility `target` for absolute error `delta`.
///
/// Zero-width envelopes route to the identifiability formula; fewer than
/// three scattered runs can never certify anything (coverage 0); otherwise
/// the Beta shapes are fitted and the coverage ratio integrated. A `delta`
/// at or above the interval width is clamped just below it, which only
/// understates the coverage.
pub fn stopping_rule(runset: &RunSet, delta: f64, target: f64) -> Result<StopReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "allowed error delta must be positive; got {delta}"
        )));
    }
    let k = runset.values.len();
    if k == 0 {
        return Err(Error::Domain("stopping rule over an empty run set".into()));
    }
    let l = runset.interval.width();
    if l <= IDENTIFIABILITY_WIDTH_TOL {
        let coverage = identifiability_probability(k);
        return Ok(StopReport {
            stop: coverage >= target,
            coverage,
            identifiable: true,
            fit: None,
        });
    }
    if k < 3 {
        return Ok(StopReport {
            stop: 0.0 >= target,
            coverage: 0.0,
            identifiable: false,
            fit: None,
        });
    }
    let fit = fit_beta(runset)?;
    if 1.0 - l <= 1e-12 {
        // Envelope already spans everything expressible; no slack remains,
        // so the true bounds cannot sit further than any δ from it.
        return Ok(StopReport {
            stop: true,
            coverage: 1.0,
            identifiable: false,
            fit: Some(fit),
        });
    }
    let delta_eff = delta.min(l * (1.0 - 1e-9));
    let query = CoverageQuery::new(runset, delta_eff)?;
    let coverage = coverage_beta(&query, &fit)?;
    Ok(StopReport {
        stop: coverage >= target,
        coverage,
        identifiable: false,
        fit: Some(fit),
    })
}
