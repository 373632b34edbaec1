//! Datasets seen through a selector: partitioning, likelihood, the
//! attainable ceiling, and compatibility diagnostics.
//!
//! A biased acquisition process keeps a record when the embedded selector
//! fires and otherwise leaves only the fact that *something* was dropped.
//! [`SelectedDataset`] stores what survives: multiplicities for the kept
//! configurations and a bare count of dropped rows. The likelihood of such
//! data splits into a term for the dropped mass and one per kept record;
//! [`ll_star`] is the model-free ceiling of that likelihood, and
//! [`check_compatibility`] measures how close a fully specified model comes
//! to attaining it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::inference::Evaluator;
use crate::scm::{Scm, VarId};

/// Default tolerance on probability residuals in [`check_compatibility`].
pub const DEFAULT_COMPAT_TOL: f64 = 1e-4;

/// Compatibility additionally requires the log-likelihood to sit within
/// this factor times the record count of its ceiling.
pub const LL_GAP_FACTOR: f64 = 1e-3;

/// Multiplicities of the kept (selected) configurations plus the number of
/// dropped rows. Keys are full observable configurations — states for every
/// endogenous variable except the selector, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedDataset {
    counts: BTreeMap<Vec<usize>, u64>,
    d0: u64,
}

impl SelectedDataset {
    /// Dataset from explicit multiplicities. Zero-count entries are
    /// dropped; keys must all have the same width.
    pub fn from_counts(counts: BTreeMap<Vec<usize>, u64>, d0: u64) -> Result<Self> {
        let counts: BTreeMap<Vec<usize>, u64> =
            counts.into_iter().filter(|&(_, m)| m > 0).collect();
        let mut width = None;
        for key in counts.keys() {
            match width {
                None => width = Some(key.len()),
                Some(w) if w != key.len() => {
                    return Err(Error::InvalidDataset(
                        "records have inconsistent widths".into(),
                    ))
                }
                Some(_) => {}
            }
        }
        Ok(SelectedDataset { counts, d0 })
    }

    /// The limit where acquisition keeps nothing: no kept records, and a
    /// single dropped row standing in for "all of them". Every quantity
    /// downstream is invariant in the dropped count when nothing was kept,
    /// so the unit count is canonical.
    pub fn conservative_limit() -> Self {
        SelectedDataset {
            counts: BTreeMap::new(),
            d0: 1,
        }
    }

    pub fn d0(&self) -> u64 {
        self.d0
    }

    /// Number of kept records (with multiplicity).
    pub fn d1(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Total records the acquisition process saw.
    pub fn total(&self) -> u64 {
        self.d0 + self.d1()
    }

    pub fn counts(&self) -> &BTreeMap<Vec<usize>, u64> {
        &self.counts
    }

    pub fn is_conservative_limit(&self) -> bool {
        self.counts.is_empty()
    }
}

/// The selector's structural function restricted to observable rows.
struct SelectorView<'a> {
    scm: &'a Scm,
    selector: VarId,
    /// observable-row slot of each selector parent
    parent_slots: Vec<usize>,
}

impl<'a> SelectorView<'a> {
    fn new(scm: &'a Scm) -> Result<Self> {
        let selector = scm
            .selector()
            .ok_or_else(|| Error::InvalidModel("model has no selector".into()))?;
        let observables = scm.observable_ids();
        let eq = scm.equation(selector).expect("selector equation");
        let parent_slots = eq
            .parents
            .iter()
            .map(|p| {
                observables
                    .iter()
                    .position(|v| v == p)
                    .expect("selector parents are observable")
            })
            .collect();
        Ok(SelectorView {
            scm,
            selector,
            parent_slots,
        })
    }

    fn keeps(&self, row: &[usize]) -> bool {
        let eq = self.scm.equation(self.selector).expect("selector equation");
        let shape = self
            .scm
            .equation_shape(self.selector)
            .expect("selector shape");
        let parent_states: Vec<usize> =
            self.parent_slots.iter().map(|&s| row[s]).collect();
        eq.eval(shape, &parent_states) == 1
    }
}

fn validate_row(scm: &Scm, observables: &[VarId], row: &[usize]) -> Result<()> {
    if row.len() != observables.len() {
        return Err(Error::InvalidDataset(format!(
            "record has {} values, model observes {} variables",
            row.len(),
            observables.len()
        )));
    }
    for (slot, (&state, &v)) in row.iter().zip(observables).enumerate() {
        if state >= scm.cardinality(v) {
            return Err(Error::InvalidDataset(format!(
                "state {state} out of range for '{}' (column {slot})",
                scm.var(v).name
            )));
        }
    }
    Ok(())
}

/// Splits complete observable rows by the model's selector: rows it keeps
/// are counted per configuration, rows it drops contribute only to the
/// dropped total. Row order is immaterial to the result.
pub fn partition(scm: &Scm, rows: &[Vec<usize>]) -> Result<SelectedDataset> {
    let view = SelectorView::new(scm)?;
    let observables = scm.observable_ids();
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut d0 = 0u64;
    for row in rows {
        validate_row(scm, &observables, row)?;
        if view.keeps(row) {
            *counts.entry(row.clone()).or_insert(0) += 1;
        } else {
            d0 += 1;
        }
    }
    Ok(SelectedDataset { counts, d0 })
}

fn validate_dataset(scm: &Scm, ds: &SelectedDataset) -> Result<()> {
    let observables = scm.observable_ids();
    let view = if scm.selector().is_some() {
        Some(SelectorView::new(scm)?)
    } else {
        if ds.d0 > 0 {
            return Err(Error::InvalidModel(
                "dataset has dropped rows but the model has no selector".into(),
            ));
        }
        None
    };
    for row in ds.counts.keys() {
        validate_row(scm, &observables, row)?;
        if let Some(view) = &view {
            if !view.keeps(row) {
                return Err(Error::InvalidDataset(format!(
                    "kept record {row:?} is one the selector drops"
                )));
            }
        }
    }
    Ok(())
}

/// Log-likelihood of a partitioned dataset under a fully specified model:
/// the dropped count times log P(selector = 0) plus, per kept record, the
/// log-probability of its configuration. Returns `f64::NEG_INFINITY` (never
/// NaN) when the model gives zero probability to anything observed, so
/// restart logic can branch on it.
pub fn log_likelihood(scm: &Scm, ds: &SelectedDataset) -> Result<f64> {
    scm.require_full()?;
    validate_dataset(scm, ds)?;
    let ev = Evaluator::build(scm)?;
    let pmfs: Vec<Vec<f64>> = ev
        .exogenous_ids()
        .iter()
        .map(|&u| scm.pmf(u).expect("full model").to_vec())
        .collect();
    Ok(log_likelihood_with(&ev, &pmfs, ds))
}

/// Same computation against a prebuilt [`Evaluator`] and explicit exogenous
/// PMFs — the form the maximization loop calls every iteration.
pub fn log_likelihood_with(ev: &Evaluator, pmfs: &[Vec<f64>], ds: &SelectedDataset) -> f64 {
    let mut ll = 0.0;
    if ds.d0 > 0 {
        let p_s0 = ev
            .accumulate_s0_posterior(pmfs, 0.0, &mut [])
            .expect("selector presence checked by caller");
        if p_s0 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += ds.d0 as f64 * p_s0.ln();
    }
    for (row, &m) in &ds.counts {
        let p = ev.accumulate_posterior(row, pmfs, 0.0, &mut []);
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += m as f64 * p.ln();
    }
    ll
}

/// The ceiling no model can beat on this dataset: fit the dropped share and
/// every kept configuration at their empirical frequencies (all measured
/// against the full record count). The two dataset terms are maximized
/// separately, so any actual model — which must realize both from one
/// distribution — stays at or below it.
pub fn ll_star(scm: &Scm, ds: &SelectedDataset) -> Result<f64> {
    validate_dataset(scm, ds)?;
    let d = ds.total();
    if d == 0 {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let d = d as f64;
    let mut v = 0.0;
    if ds.d0 > 0 {
        v += ds.d0 as f64 * (ds.d0 as f64 / d).ln();
    }
    for &m in ds.counts.values() {
        v += m as f64 * (m as f64 / d).ln();
    }
    Ok(v)
}

/// One probability-residual entry of a [`CompatibilityReport`].
#[derive(Debug, Clone)]
pub struct Residual {
    /// `None` for the dropped-share constraint, otherwise the kept
    /// configuration.
    pub config: Option<Vec<usize>>,
    /// Model probability.
    pub actual: f64,
    /// Empirical target.
    pub target: f64,
}

impl Residual {
    pub fn gap(&self) -> f64 {
        (self.actual - self.target).abs()
    }
}

/// Outcome of [`check_compatibility`]: per-constraint residuals plus the
/// likelihood gap, and the verdict combining both views (they agree in
/// exact arithmetic; testing both catches numerical drift).
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub residuals: Vec<Residual>,
    pub max_residual: f64,
    pub ll: f64,
    pub ll_ceiling: f64,
}

impl CompatibilityReport {
    pub fn ll_gap(&self) -> f64 {
        self.ll_ceiling - self.ll
    }
}

/// Does the model reproduce the empirical distribution of the partitioned
/// data? Checks the dropped share against its frequency and each kept
/// configuration's probability against its frequency (all relative to the
/// full record count), each within `tol`; the log-likelihood must also sit
/// within [`LL_GAP_FACTOR`]·(record count) of [`ll_star`]. Diagnostic: all
/// residuals are returned regardless of verdict.
pub fn check_compatibility(scm: &Scm, ds: &SelectedDataset, tol: f64) -> Result<CompatibilityReport> {
    scm.require_full()?;
    validate_dataset(scm, ds)?;
    let d = ds.total();
    if d == 0 {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let ev = Evaluator::build(scm)?;
    let pmfs: Vec<Vec<f64>> = ev
        .exogenous_ids()
        .iter()
        .map(|&u| scm.pmf(u).expect("full model").to_vec())
        .collect();
    let d_f = d as f64;

    let mut residuals = Vec::with_capacity(ds.counts.len() + 1);
    if scm.selector().is_some() {
        let p_s0 = ev.accumulate_s0_posterior(&pmfs, 0.0, &mut [])?;
        residuals.push(Residual {
            config: None,
            actual: p_s0,
            target: ds.d0 as f64 / d_f,
        });
    }
    for (row, &m) in &ds.counts {
        let p = ev.accumulate_posterior(row, &pmfs, 0.0, &mut []);
        residuals.push(Residual {
            config: Some(row.clone()),
            actual: p,
            target: m as f64 / d_f,
        });
    }
    let max_residual = residuals.iter().map(Residual::gap).fold(0.0, f64::max);
    let ll = log_likelihood_with(&ev, &pmfs, ds);
    let ll_ceiling = ll_star(scm, ds)?;
    let compatible = max_residual <= tol && ll >= ll_ceiling - LL_GAP_FACTOR * d_f;
    Ok(CompatibilityReport {
        compatible,
        residuals,
        max_residual,
        ll,
        ll_ceiling,
    })
}

/// Infers how many rows were dropped from the kept count and the model's
/// dropped-share probability, by matching odds: dropped/kept ≈
/// P(S=0)/P(S=1). Rounded to the nearest integer.
pub fn estimate_d0(d1: u64, p_s0: f64) -> Result<u64> {
    if d1 == 0 {
        return Err(Error::Domain("no kept records to scale from".into()));
    }
    if !(0.0..1.0).contains(&p_s0) {
        return Err(Error::Domain(format!(
            "dropped-share probability {p_s0} outside [0, 1); for the \
             keep-nothing limit use the conservative-limit dataset"
        )));
    }
    Ok((d1 as f64 * p_s0 / (1.0 - p_s0)).round() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{binary_skeleton, build_conservative};

    /// Confounder -> treatment -> outcome triangle with uniform response
    /// priors and the parity selector over (confounder, treatment).
    fn drug_model_selected() -> Scm {
        let skeleton = binary_skeleton(&[("Z", &[]), ("X", &["Z"]), ("Y", &["X", "Z"])]);
        let mut m = build_conservative(&skeleton, "U_").unwrap();
        for (name, card) in [("U_Z", 2), ("U_X", 4), ("U_Y", 16)] {
            let id = m.id_of(name).unwrap();
            m.set_pmf(id, vec![1.0 / card as f64; card]).unwrap();
        }
        m.embed_selector("S", &["Z", "X"], vec![0, 1, 1, 0]).unwrap()
    }

    /// The 700-row observational study, rows as (Z, X, Y).
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

    #[test]
    fn partition_splits_study_by_parity_selector() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        assert_eq!(ds.d0(), 226);
        assert_eq!(ds.d1(), 474);
        assert_eq!(ds.total(), 700);
        let expect: BTreeMap<Vec<usize>, u64> = [
            (vec![0, 1, 0], 41),
            (vec![0, 1, 1], 313),
            (vec![1, 0, 0], 107),
            (vec![1, 0, 1], 13),
        ]
        .into_iter()
        .collect();
        assert_eq!(ds.counts(), &expect);
    }

    #[test]
    fn partition_extremes() {
        let base = drug_model_selected().without_selector();
        let keep_all = base.embed_selector("S", &["Z"], vec![1, 1]).unwrap();
        let rows = study_rows();
        let ds = partition(&keep_all, &rows).unwrap();
        assert_eq!(ds.d0(), 0);
        assert_eq!(ds.d1(), 700);

        let keep_none = base.embed_selector("S", &["Z"], vec![0, 0]).unwrap();
        let ds = partition(&keep_none, &rows).unwrap();
        assert_eq!(ds.d0(), 700);
        assert!(ds.counts().is_empty());
    }

    #[test]
    fn partition_rejects_out_of_range_row() {
        let m = drug_model_selected();
        assert!(matches!(
            partition(&m, &[vec![0, 2, 0]]),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn likelihood_of_study_under_uniform_priors() {
        // every configuration has probability 1/8 and the parity selector
        // drops half the mass, so LL = 226·ln(1/2) + 474·ln(1/8)
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let ll = log_likelihood(&m, &ds).unwrap();
        assert!((ll - -1142.3065535627898).abs() < 1e-9, "ll = {ll}");
    }

    #[test]
    fn likelihood_with_nothing_kept_is_dropped_mass_only() {
        let base = drug_model_selected().without_selector();
        let keep_none = base.embed_selector("S", &["Z"], vec![0, 0]).unwrap();
        let ds = partition(&keep_none, &study_rows()).unwrap();
        let ll = log_likelihood(&keep_none, &ds).unwrap();
        // P(S=0) = 1, so the likelihood is saturated at zero
        assert!((ll - 0.0).abs() < 1e-12);

        // parity selector: P(S=0) = 1/2 under uniform priors
        let m = drug_model_selected();
        let ds = SelectedDataset::from_counts(BTreeMap::new(), 226).unwrap();
        let ll = log_likelihood(&m, &ds).unwrap();
        assert!((ll - 226.0 * f64::ln(0.5)).abs() < 1e-9);
    }

    #[test]
    fn zero_probability_observation_yields_sentinel() {
        let mut m = drug_model_selected();
        // force X ≡ 0: the function "map both confounder states to 1" and
        // its siblings get no mass, so any row with X=1 is impossible
        let ux = m.id_of("U_X").unwrap();
        m.set_pmf(ux, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let ds = SelectedDataset::from_counts(
            [(vec![0, 1, 0], 1u64)].into_iter().collect(),
            1,
        )
        .unwrap();
        let ll = log_likelihood(&m, &ds).unwrap();
        assert!(ll.is_infinite() && ll < 0.0);
        assert!(!ll.is_nan());
    }

    #[test]
    fn ceiling_is_bernoulli_mle_without_dropped_rows() {
        let m = build_conservative(&binary_skeleton(&[("X", &[])]), "U_").unwrap();
        let ds = SelectedDataset::from_counts(
            [(vec![0], 30u64), (vec![1], 70u64)].into_iter().collect(),
            0,
        )
        .unwrap();
        let v = ll_star(&m, &ds).unwrap();
        assert!((v - -61.08643020548936).abs() < 1e-10, "v = {v}");
    }

    #[test]
    fn ceiling_on_the_study_partition() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let v = ll_star(&m, &ds).unwrap();
        assert!((v - -876.5602443864782).abs() < 1e-9, "v = {v}");
    }

    #[test]
    fn ceiling_degenerate_single_record_no_drops() {
        let m = build_conservative(&binary_skeleton(&[("X", &[])]), "U_").unwrap();
        let ds = SelectedDataset::from_counts(
            [(vec![1], 57u64)].into_iter().collect(),
            0,
        )
        .unwrap();
        // one repeated record and nothing dropped: empirical fit is exact
        assert_eq!(ll_star(&m, &ds).unwrap(), 0.0);
    }

    #[test]
    fn ceiling_of_conservative_limit_is_zero() {
        let m = drug_model_selected();
        let ds = SelectedDataset::conservative_limit();
        assert_eq!(ll_star(&m, &ds).unwrap(), 0.0);
    }

    #[test]
    fn likelihood_never_beats_ceiling_on_uniform_model() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let ll = log_likelihood(&m, &ds).unwrap();
        let ceiling = ll_star(&m, &ds).unwrap();
        assert!(ll <= ceiling + 1e-9);
    }

    #[test]
    fn uniform_priors_are_incompatible_with_the_study() {
        let m = drug_model_selected();
        let ds = partition(&m, &study_rows()).unwrap();
        let report = check_compatibility(&m, &ds, DEFAULT_COMPAT_TOL).unwrap();
        assert!(!report.compatible);
        // dropped-share constraint alone is off by |1/2 − 226/700| ≈ 0.177
        let s0 = &report.residuals[0];
        assert!(s0.config.is_none());
        assert!((s0.gap() - (0.5 - 226.0 / 700.0)).abs() < 1e-12);
    }

    #[test]
    fn empirical_match_is_compatible_at_zero_tolerance() {
        // uniform model without selector, dataset hitting every
        // configuration equally: the model reproduces the empirical
        // distribution exactly
        let m = drug_model_selected().without_selector();
        let counts: BTreeMap<Vec<usize>, u64> = (0..8u32)
            .map(|i| {
                (
                    vec![(i >> 2) as usize & 1, (i >> 1) as usize & 1, i as usize & 1],
                    10u64,
                )
            })
            .collect();
        let ds = SelectedDataset::from_counts(counts, 0).unwrap();
        let report = check_compatibility(&m, &ds, 1e-12).unwrap();
        assert!(report.compatible, "max residual {}", report.max_residual);
        assert!(report.ll_gap().abs() < 1e-9);
    }

    #[test]
    fn dropped_rows_require_a_selector() {
        let m = drug_model_selected().without_selector();
        let ds = SelectedDataset::from_counts(BTreeMap::new(), 5).unwrap();
        assert!(matches!(
            log_likelihood(&m, &ds),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn kept_record_the_selector_drops_is_rejected() {
        let m = drug_model_selected();
        // (z=0, x=0) has parity 0: the selector drops it
        let ds = SelectedDataset::from_counts(
            [(vec![0, 0, 1], 3u64)].into_iter().collect(),
            0,
        )
        .unwrap();
        assert!(matches!(
            log_likelihood(&m, &ds),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn dropped_count_estimation() {
        assert_eq!(estimate_d0(474, 226.0 / 700.0).unwrap(), 226);
        assert_eq!(estimate_d0(100, 0.5).unwrap(), 100);
        assert_eq!(estimate_d0(100, 0.0).unwrap(), 0);
        assert!(estimate_d0(100, 1.0).is_err());
        assert!(estimate_d0(0, 0.5).is_err());
        assert!(estimate_d0(100, -0.1).is_err());
    }
}
