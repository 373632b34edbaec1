//! Expectation-maximization over exogenous PMFs, restarted into bounds.
//!
//! A partially specified model pins the structural equations but not the
//! exogenous distributions. Each restart draws random PMFs, runs EM against
//! the partitioned dataset until the parameters stop moving, and evaluates
//! the counterfactual query on the fitted model. Because the likelihood has
//! no local maxima, every converged restart lands on the attainable ceiling
//! and therefore inside the exact identification interval; min and max over
//! restarts bound that interval from the inside, tightening as restarts are
//! added.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{twin_query, CounterfactualQuery, Evaluator};
use crate::par::map_runs;
use crate::scm::Scm;
use crate::selection::{ll_star, SelectedDataset};

/// One PMF per exogenous variable, in [`Scm::exogenous_ids`] order.
pub type ExogenousAssignment = Vec<Vec<f64>>;

/// Smallest mass any state keeps after an initialization draw; keeps every
/// start strictly interior so the no-local-maxima guarantee applies.
pub const INIT_FLOOR: f64 = 1e-9;

/// Initialization concentration is drawn log-uniformly from this range.
/// Small concentrations start runs near the corners of the probability
/// simplex, which is what spreads restart values across the whole
/// identification interval.
pub const INIT_ALPHA_RANGE: (f64, f64) = (0.005, 1.0);

/// Distance used to decide convergence of the exogenous PMFs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceMetric {
    /// Largest absolute per-entry change.
    #[default]
    MaxAbs,
    /// Sum of absolute changes over all entries.
    L1,
}

impl ConvergenceMetric {
    fn distance(self, a: &ExogenousAssignment, b: &ExogenousAssignment) -> f64 {
        let mut acc = 0.0f64;
        for (pa, pb) in a.iter().zip(b) {
            for (&x, &y) in pa.iter().zip(pb) {
                let d = (x - y).abs();
                match self {
                    ConvergenceMetric::MaxAbs => acc = acc.max(d),
                    ConvergenceMetric::L1 => acc += d,
                }
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Convergence threshold on the parameter metric.
    pub epsilon: f64,
    /// Iteration cap per restart; hitting it flags the run as unconverged
    /// but still returns it.
    pub max_iters: usize,
    pub metric: ConvergenceMetric,
    /// Base RNG seed; restart i draws from stream i of this seed.
    pub seed: u64,
    /// Number of restarts.
    pub runs: usize,
    /// Initialization redraws allowed per restart when a draw gives zero
    /// probability to something observed.
    pub max_attempts: u32,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            epsilon: 1e-6,
            max_iters: 500,
            metric: ConvergenceMetric::default(),
            seed: 0,
            runs: 30,
            max_attempts: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// Restart index (RNG stream).
    pub run: usize,
    /// Initialization draws consumed (1 = first draw worked).
    pub attempts: u32,
    /// EM steps taken.
    pub iterations: usize,
    /// Whether the parameter metric dropped below epsilon before the cap.
    pub converged: bool,
    /// Log-likelihood of the returned parameters.
    pub final_ll: f64,
    /// The dataset's attainable ceiling (shared across runs).
    pub ll_ceiling: f64,
    /// Largest gap between a fitted probability and its empirical target.
    pub max_residual: f64,
    /// Most negative log-likelihood change observed between consecutive
    /// iterations; EM theory puts this at ≥ 0 up to roundoff.
    pub min_ll_increase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFailure {
    pub run: usize,
    pub attempts: u32,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }
}

/// Everything the restart driver produces: fitted exogenous PMFs and
/// diagnostics per successful restart (in restart order), query values when
/// a query was evaluated, and the interval the values span.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSet {
    pub values: Vec<f64>,
    pub interval: Interval,
    pub assignments: Vec<ExogenousAssignment>,
    pub diagnostics: Vec<RunDiagnostics>,
    pub failures: Vec<RunFailure>,
}

/// Fit results without a query attached (the `fit`-then-`query` workflow).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSet {
    pub assignments: Vec<ExogenousAssignment>,
    pub diagnostics: Vec<RunDiagnostics>,
    pub failures: Vec<RunFailure>,
}

/// Clone of `scm` with the assignment's PMFs installed.
pub fn apply_assignment(scm: &Scm, assignment: &ExogenousAssignment) -> Result<Scm> {
    let exo = scm.exogenous_ids();
    if exo.len() != assignment.len() {
        return Err(Error::InvalidPmf {
            name: "assignment".into(),
            reason: format!(
                "{} PMFs for {} exogenous variables",
                assignment.len(),
                exo.len()
            ),
        });
    }
    let mut out = scm.clone();
    for (&u, pmf) in exo.iter().zip(assignment) {
        out.set_pmf(u, pmf.clone())?;
    }
    Ok(out)
}

/// One synchronous EM update: every exogenous PMF moves to the posterior
/// pseudo-count mixture [dropped·P(U|S=0) + Σ kept·P(U|x)] / total.
/// Zero probability on anything observed aborts with a restart signal.
pub fn em_step(
    scm: &Scm,
    current: &ExogenousAssignment,
    ds: &SelectedDataset,
) -> Result<ExogenousAssignment> {
    let ev = Evaluator::build(scm)?;
    em_step_ll(&ev, current, ds).map(|(next, _)| next)
}

/// The update plus the log-likelihood of the CURRENT parameters, which the
/// same accumulation pass yields for free.
fn em_step_ll(
    ev: &Evaluator,
    current: &ExogenousAssignment,
    ds: &SelectedDataset,
) -> Result<(ExogenousAssignment, f64)> {
    let mut acc: Vec<Vec<f64>> = ev
        .exogenous_cards()
        .iter()
        .map(|&c| vec![0.0; c])
        .collect();
    let mut ll = 0.0;
    if ds.d0() > 0 {
        let p_s0 = ev.accumulate_s0_posterior(current, ds.d0() as f64, &mut acc)?;
        if p_s0 <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        ll += ds.d0() as f64 * p_s0.ln();
    }
    for (row, &m) in ds.counts() {
        let p = ev.accumulate_posterior(row, current, m as f64, &mut acc);
        if p <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        ll += m as f64 * p.ln();
    }
    // each accumulator holds `total` pseudo-counts up to roundoff;
    // normalizing by the actual sum keeps the PMFs exactly stochastic
    for pmf in &mut acc {
        let s: f64 = pmf.iter().sum();
        if s > 0.0 {
            for v in pmf.iter_mut() {
                *v /= s;
            }
        }
    }
    Ok((acc, ll))
}

/// Fitted-model probabilities vs the empirical targets: log-likelihood and
/// the largest residual, in one pass.
fn evaluate_fit(ev: &Evaluator, pmfs: &ExogenousAssignment, ds: &SelectedDataset) -> (f64, f64) {
    let d = ds.total() as f64;
    let mut ll = 0.0;
    let mut max_residual = 0.0f64;
    if ev.s0_size() > 0 || ds.d0() > 0 {
        let p_s0 = ev
            .accumulate_s0_posterior(pmfs, 0.0, &mut [])
            .unwrap_or(0.0);
        max_residual = max_residual.max((p_s0 - ds.d0() as f64 / d).abs());
        if ds.d0() > 0 {
            ll = if p_s0 > 0.0 {
                ds.d0() as f64 * p_s0.ln()
            } else {
                f64::NEG_INFINITY
            };
        }
    }
    for (row, &m) in ds.counts() {
        let p = ev.accumulate_posterior(row, pmfs, 0.0, &mut []);
        max_residual = max_residual.max((p - m as f64 / d).abs());
        ll += if p > 0.0 {
            m as f64 * p.ln()
        } else {
            f64::NEG_INFINITY
        };
    }
    (ll, max_residual)
}

fn draw_initialization(rng: &mut ChaCha8Rng, cards: &[usize]) -> ExogenousAssignment {
    let (lo, hi) = INIT_ALPHA_RANGE;
    cards
        .iter()
        .map(|&k| {
            let alpha = lo * (hi / lo).powf(rng.random::<f64>());
            let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
            let mut pmf: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
            let sum: f64 = pmf.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                for v in &mut pmf {
                    *v /= sum;
                }
            } else {
                // the whole draw underflowed: land on a random vertex
                let i = rng.random_range(0..k);
                pmf = vec![0.0; k];
                pmf[i] = 1.0;
            }
            let mut total = 0.0;
            for v in &mut pmf {
                *v = v.max(INIT_FLOOR);
                total += *v;
            }
            for v in &mut pmf {
                *v /= total;
            }
            pmf
        })
        .collect()
}

struct FittedRun {
    assignment: ExogenousAssignment,
    diagnostics: RunDiagnostics,
}

fn run_restart(
    ev: &Evaluator,
    ds: &SelectedDataset,
    config: &EmConfig,
    ll_ceiling: f64,
    run: usize,
) -> std::result::Result<FittedRun, RunFailure> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(run as u64);
    let mut attempts = 0u32;
    'attempt: loop {
        if attempts >= config.max_attempts {
            return Err(RunFailure {
                run,
                attempts,
                reason: "zero probability on observed data at every initialization".into(),
            });
        }
        attempts += 1;
        let mut current = draw_initialization(&mut rng, ev.exogenous_cards());
        let mut prev_ll = f64::NEG_INFINITY;
        let mut min_ll_increase = f64::MAX;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < config.max_iters {
            let (next, ll_now) = match em_step_ll(ev, &current, ds) {
                Ok(r) => r,
                Err(_) => continue 'attempt,
            };
            if prev_ll > f64::NEG_INFINITY {
                min_ll_increase = min_ll_increase.min(ll_now - prev_ll);
            }
            prev_ll = ll_now;
            let delta = config.metric.distance(&current, &next);
            current = next;
            iterations += 1;
            if delta <= config.epsilon {
                converged = true;
                break;
            }
        }
        let (final_ll, max_residual) = evaluate_fit(ev, &current, ds);
        if final_ll == f64::NEG_INFINITY {
            continue 'attempt;
        }
        if prev_ll > f64::NEG_INFINITY {
            min_ll_increase = min_ll_increase.min(final_ll - prev_ll);
        }
        if min_ll_increase == f64::MAX {
            min_ll_increase = 0.0;
        }
        return Ok(FittedRun {
            assignment: current,
            diagnostics: RunDiagnostics {
                run,
                attempts,
                iterations,
                converged,
                final_ll,
                ll_ceiling,
                max_residual,
                min_ll_increase,
            },
        });
    }
}

/// A single restart (stream 0 of the seed): random initialization, EM to
/// convergence, fitted PMFs plus diagnostics.
pub fn emcc_run(
    scm: &Scm,
    ds: &SelectedDataset,
    config: &EmConfig,
) -> Result<(ExogenousAssignment, RunDiagnostics)> {
    let ev = Evaluator::build(scm)?;
    let ceiling = ll_star(scm, ds)?;
    match run_restart(&ev, ds, config, ceiling, 0) {
        Ok(r) => Ok((r.assignment, r.diagnostics)),
        Err(f) => Err(Error::AllRestartsFailed {
            attempts: f.attempts as usize,
            reason: f.reason,
        }),
    }
}

fn fit_impl(scm: &Scm, ds: &SelectedDataset, config: &EmConfig, parallel: bool) -> Result<FitSet> {
    if config.runs == 0 {
        return Err(Error::InvalidQuery("restart count must be positive".into()));
    }
    if !(config.epsilon > 0.0) || config.max_iters == 0 {
        return Err(Error::InvalidQuery(
            "epsilon must be positive and the iteration cap nonzero".into(),
        ));
    }
    let ev = Evaluator::build(scm)?;
    let ceiling = ll_star(scm, ds)?;
    let results = map_runs(config.runs, parallel, |run| {
        run_restart(&ev, ds, config, ceiling, run)
    });
    let mut assignments = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failures = Vec::new();
    for res in results {
        match res {
            Ok(r) => {
                assignments.push(r.assignment);
                diagnostics.push(r.diagnostics);
            }
            Err(f) => failures.push(f),
        }
    }
    if assignments.is_empty() {
        let f = &failures[0];
        return Err(Error::AllRestartsFailed {
            attempts: f.attempts as usize,
            reason: f.reason.clone(),
        });
    }
    Ok(FitSet {
        assignments,
        diagnostics,
        failures,
    })
}

/// Multi-restart fit without a query: per-restart exogenous PMFs and
/// diagnostics, restarts independent and evaluated on the rayon pool when
/// the `parallel` feature allows.
pub fn fit(scm: &Scm, ds: &SelectedDataset, config: &EmConfig) -> Result<FitSet> {
    fit_impl(scm, ds, config, true)
}

/// Evaluates one query on every fitted assignment, in order.
pub fn evaluate_runs(
    scm: &Scm,
    assignments: &[ExogenousAssignment],
    query: &CounterfactualQuery,
) -> Result<Vec<f64>> {
    assignments
        .iter()
        .map(|a| twin_query(&apply_assignment(scm, a)?, query))
        .collect()
}

fn bound_query_impl(
    scm: &Scm,
    ds: &SelectedDataset,
    query: &CounterfactualQuery,
    config: &EmConfig,
    parallel: bool,
) -> Result<RunSet> {
    let fitted = fit_impl(scm, ds, config, parallel)?;
    let values = evaluate_runs(scm, &fitted.assignments, query)?;
    let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RunSet {
        values,
        interval: Interval { lower, upper },
        assignments: fitted.assignments,
        diagnostics: fitted.diagnostics,
        failures: fitted.failures,
    })
}

/// The full pipeline: restart EM `config.runs` times, evaluate the query on
/// each fitted model, and report the span of the values. Every converged
/// restart sits inside the exact identification interval, so the span
/// approaches it from the inside as restarts grow; prefixes are stable, so
/// enlarging `runs` with the same seed only widens the interval.
pub fn bound_query(
    scm: &Scm,
    ds: &SelectedDataset,
    query: &CounterfactualQuery,
    config: &EmConfig,
) -> Result<RunSet> {
    bound_query_impl(scm, ds, query, config, true)
}

/// [`bound_query`] pinned to the sequential driver regardless of features —
/// the baseline half of the executor benchmark.
pub fn bound_query_seq(
    scm: &Scm,
    ds: &SelectedDataset,
    query: &CounterfactualQuery,
    config: &EmConfig,
) -> Result<RunSet> {
    bound_query_impl(scm, ds, query, config, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::exogenous_posterior;
    use crate::scm::{binary_skeleton, build_conservative};
    use crate::selection::{check_compatibility, partition, DEFAULT_COMPAT_TOL};
    use std::collections::BTreeMap;

    fn drug_model() -> Scm {
        let skeleton = binary_skeleton(&[("Z", &[]), ("X", &["Z"]), ("Y", &["X", "Z"])]);
        build_conservative(&skeleton, "U_").unwrap()
    }

    fn drug_model_selected() -> Scm {
        drug_model()
            .embed_selector("S", &["Z", "X"], vec![0, 1, 1, 0])
            .unwrap()
    }

    fn study_rows() -> Vec<Vec<usize>> {
        let blocks: [(usize, usize, usize, u64); 8] = [
            (0, 0, 0, 2),
            (0, 0, 1, 114),
            (0, 1, 0, 41),
            (0, 1, 1, 313),
            (1, 0, 0, 107),
            (1, 0, 1, 13),
            (1, 1, 0, 109),
            (1, 1, 1, 1),
        ];
        let mut rows = Vec::new();
        for (z, x, y, n) in blocks {
            for _ in 0..n {
                rows.push(vec![z, x, y]);
            }
        }
        rows
    }

    fn uniform_assignment(scm: &Scm) -> ExogenousAssignment {
        scm.exogenous_ids()
            .iter()
            .map(|&u| vec![1.0 / scm.cardinality(u) as f64; scm.cardinality(u)])
            .collect()
    }

    #[test]
    fn step_concentrates_invertible_model_in_one_move() {
        let m = build_conservative(&binary_skeleton(&[("X", &[])]), "U_").unwrap();
        let ds = SelectedDataset::from_counts(
            [(vec![1], 1u64)].into_iter().collect(),
            0,
        )
        .unwrap();
        let next = em_step(&m, &vec![vec![0.5, 0.5]], &ds).unwrap();
        assert_eq!(next, vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn step_outputs_are_normalized() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let next = em_step(&m, &uniform_assignment(&m), &ds).unwrap();
        for pmf in &next {
            let s: f64 = pmf.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(pmf.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn step_matches_posterior_mixture() {
        // the update is the multiplicity-weighted mixture of posteriors;
        // rebuild it from the generic inference engine and compare
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let mut full = m.clone();
        for (u, pmf) in full.exogenous_ids().into_iter().zip(uniform_assignment(&m)) {
            full.set_pmf(u, pmf).unwrap();
        }
        let next = em_step(&full, &uniform_assignment(&m), &ds).unwrap();

        let d = ds.total() as f64;
        let exo = full.exogenous_ids();
        let mut expect: ExogenousAssignment = exo
            .iter()
            .map(|&u| vec![0.0; full.cardinality(u)])
            .collect();
        let post_s0 = exogenous_posterior(&full, &[("S", 0)]).unwrap();
        for (slot, pmf) in post_s0.iter().enumerate() {
            for (i, &p) in pmf.iter().enumerate() {
                expect[slot][i] += ds.d0() as f64 * p;
            }
        }
        for (row, &mult) in ds.counts() {
            let ev: Vec<(&str, usize)> = ["Z", "X", "Y"]
                .iter()
                .zip(row)
                .map(|(&n, &s)| (n, s))
                .collect();
            let post = exogenous_posterior(&full, &ev).unwrap();
            for (slot, pmf) in post.iter().enumerate() {
                for (i, &p) in pmf.iter().enumerate() {
                    expect[slot][i] += mult as f64 * p;
                }
            }
        }
        for pmf in &mut expect {
            for v in pmf.iter_mut() {
                *v /= d;
            }
        }
        for (a, b) in next.iter().zip(&expect) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn restart_on_study_reaches_the_ceiling() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let config = EmConfig { seed: 7, ..EmConfig::default() };
        let (assignment, diag) = emcc_run(&m, &ds, &config).unwrap();
        assert!(diag.converged, "no convergence in {} iters", diag.iterations);
        assert!(diag.min_ll_increase >= -1e-9, "ll decreased: {}", diag.min_ll_increase);
        assert!(diag.final_ll <= diag.ll_ceiling + 1e-9);
        assert!(
            diag.ll_ceiling - diag.final_ll <= 1e-3 * ds.total() as f64,
            "gap {}",
            diag.ll_ceiling - diag.final_ll
        );
        assert!(diag.max_residual <= DEFAULT_COMPAT_TOL, "residual {}", diag.max_residual);

        // the dropped-share constraint at convergence, via the public check
        let fitted = apply_assignment(&m, &assignment).unwrap();
        let report = check_compatibility(&fitted, &ds, DEFAULT_COMPAT_TOL).unwrap();
        assert!(report.compatible, "max residual {}", report.max_residual);
        let s0 = &report.residuals[0];
        assert!((s0.actual - 226.0 / 700.0).abs() < 1e-4);
    }

    #[test]
    fn conservative_limit_saturates_the_dropped_share() {
        let m = drug_model_selected();
        let ds = SelectedDataset::conservative_limit();
        let config = EmConfig { seed: 3, ..EmConfig::default() };
        let (_, diag) = emcc_run(&m, &ds, &config).unwrap();
        assert!(diag.converged);
        // ceiling is 0 = log 1: the selector can drop everything
        assert_eq!(diag.ll_ceiling, 0.0);
        assert!(diag.max_residual <= 1e-4, "residual {}", diag.max_residual);
    }

    #[test]
    fn single_restart_interval_is_a_point() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let config = EmConfig { runs: 1, seed: 11, ..EmConfig::default() };
        let rs = bound_query(&m, &ds, &CounterfactualQuery::pns("X", "Y"), &config).unwrap();
        assert_eq!(rs.values.len(), 1);
        assert_eq!(rs.interval.lower, rs.values[0]);
        assert_eq!(rs.interval.upper, rs.values[0]);
    }

    #[test]
    fn restart_prefixes_nest() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let mk = |runs| EmConfig { runs, seed: 5, ..EmConfig::default() };
        let q = CounterfactualQuery::pns("X", "Y");
        let small = bound_query(&m, &ds, &q, &mk(3)).unwrap();
        let large = bound_query(&m, &ds, &q, &mk(6)).unwrap();
        assert_eq!(&large.values[..3], &small.values[..]);
        assert!(large.interval.contains(&small.interval));
    }

    #[test]
    fn identical_configs_reproduce_bitwise() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let config = EmConfig { runs: 4, seed: 9, ..EmConfig::default() };
        let q = CounterfactualQuery::pns("X", "Y");
        let a = bound_query(&m, &ds, &q, &config).unwrap();
        let b = bound_query(&m, &ds, &q, &config).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.assignments, b.assignments);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_drivers_agree() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let config = EmConfig { runs: 4, seed: 2, ..EmConfig::default() };
        let q = CounterfactualQuery::pns("X", "Y");
        let par = bound_query(&m, &ds, &q, &config).unwrap();
        let seq = bound_query_seq(&m, &ds, &q, &config).unwrap();
        assert_eq!(par.values, seq.values);
        assert_eq!(par.assignments, seq.assignments);
    }

    #[test]
    fn unbiased_study_bounds_stay_in_the_exact_interval() {
        // no selector, every record kept: the fitted models must place the
        // two-world probability inside the known exact interval
        let m = drug_model();
        let counts: BTreeMap<Vec<usize>, u64> = [
            (vec![0, 0, 0], 2u64),
            (vec![0, 0, 1], 114),
            (vec![0, 1, 0], 41),
            (vec![0, 1, 1], 313),
            (vec![1, 0, 0], 107),
            (vec![1, 0, 1], 13),
            (vec![1, 1, 0], 109),
            (vec![1, 1, 1], 1),
        ]
        .into_iter()
        .collect();
        let ds = SelectedDataset::from_counts(counts, 0).unwrap();
        let config = EmConfig { runs: 8, seed: 1, ..EmConfig::default() };
        let rs = bound_query(&m, &ds, &CounterfactualQuery::pns("X", "Y"), &config).unwrap();
        assert!(rs.interval.lower >= 0.0);
        assert!(rs.interval.upper <= 0.01458 + 1e-6, "upper {}", rs.interval.upper);
        for d in &rs.diagnostics {
            assert!(d.min_ll_increase >= -1e-9);
        }
    }
}
