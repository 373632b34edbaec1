//! Reference implementations used only by integration tests.
//!
//! Everything here deliberately avoids the library's inference machinery:
//! probabilities come from brute-force enumeration of the joint exogenous
//! space with a hand-rolled structural evaluation loop, the incomplete beta
//! function comes from its power series rather than a continued fraction,
//! and coverage integrals come from self-normalized importance sampling.
//! When a fast path and a reference value agree, they agree for a reason.

#![allow(dead_code)]

use std::collections::BTreeMap;

use cfbound::inference::CounterfactualQuery;
use cfbound::scm::{Kind, Scm, ScmBuilder, SkeletonNode, VarId};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Brute-force world enumeration
// ---------------------------------------------------------------------------

/// Calls `f` once per joint exogenous configuration (states listed in
/// [`Scm::exogenous_ids`] order) with its prior probability.
pub fn for_each_world(scm: &Scm, mut f: impl FnMut(&[usize], f64)) {
    let exo = scm.exogenous_ids();
    let cards: Vec<usize> = exo.iter().map(|&u| scm.cardinality(u)).collect();
    let pmfs: Vec<&[f64]> = exo.iter().map(|&u| scm.pmf(u).expect("full model")).collect();
    let mut states = vec![0usize; exo.len()];
    loop {
        let mut p = 1.0;
        for (slot, &s) in states.iter().enumerate() {
            p *= pmfs[slot][s];
        }
        f(&states, p);
        // odometer
        let mut k = states.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            states[k] += 1;
            if states[k] < cards[k] {
                break;
            }
            states[k] = 0;
        }
        if states.iter().all(|&s| s == 0) {
            return;
        }
    }
}

/// Structural evaluation with optional overrides: variables listed in
/// `interventions` are pinned instead of computed. Returns states by var id.
pub fn eval_with(scm: &Scm, exo_states: &[usize], interventions: &[(VarId, usize)]) -> Vec<usize> {
    let exo = scm.exogenous_ids();
    let mut states = vec![0usize; scm.num_vars()];
    for (slot, &u) in exo.iter().enumerate() {
        states[u] = exo_states[slot];
    }
    for &v in scm.topological_order() {
        if scm.var(v).kind == Kind::Exogenous {
            continue;
        }
        if let Some(&(_, s)) = interventions.iter().find(|&&(id, _)| id == v) {
            states[v] = s;
            continue;
        }
        let eq = scm.equation(v).expect("endogenous equation");
        let shape = scm.equation_shape(v).expect("equation shape");
        let parent_states: Vec<usize> = eq.parents.iter().map(|&p| states[p]).collect();
        states[v] = eq.eval(shape, &parent_states);
    }
    states
}

/// P(assignment) by enumeration.
pub fn oracle_joint(scm: &Scm, assignment: &[(&str, usize)]) -> f64 {
    let ids: Vec<(VarId, usize)> = assignment
        .iter()
        .map(|&(n, s)| (scm.id_of(n).expect("known name"), s))
        .collect();
    let mut total = 0.0;
    for_each_world(scm, |exo, p| {
        let states = eval_with(scm, exo, &[]);
        if ids.iter().all(|&(v, s)| states[v] == s) {
            total += p;
        }
    });
    total
}

/// P(U | evidence) for every exogenous variable, by enumeration.
/// Panics when the evidence has probability zero.
pub fn oracle_posterior(scm: &Scm, evidence: &[(&str, usize)]) -> Vec<Vec<f64>> {
    let ids: Vec<(VarId, usize)> = evidence
        .iter()
        .map(|&(n, s)| (scm.id_of(n).expect("known name"), s))
        .collect();
    let exo = scm.exogenous_ids();
    let mut acc: Vec<Vec<f64>> = exo.iter().map(|&u| vec![0.0; scm.cardinality(u)]).collect();
    let mut mass = 0.0;
    for_each_world(scm, |exo_states, p| {
        let states = eval_with(scm, exo_states, &[]);
        if ids.iter().all(|&(v, s)| states[v] == s) {
            mass += p;
            for (slot, &s) in exo_states.iter().enumerate() {
                acc[slot][s] += p;
            }
        }
    });
    assert!(mass > 0.0, "evidence has zero probability");
    for pmf in &mut acc {
        for v in pmf.iter_mut() {
            *v /= mass;
        }
    }
    acc
}

/// Counterfactual query probability by enumeration: every world of the
/// query is evaluated on the same exogenous draw with its interventions
/// pinned.
pub fn oracle_counterfactual(scm: &Scm, query: &CounterfactualQuery) -> f64 {
    let resolve = |var: &str| scm.id_of(var).expect("known name");
    let worlds: Vec<Vec<(VarId, usize)>> = query
        .worlds
        .iter()
        .map(|w| w.interventions.iter().map(|iv| (resolve(&iv.var), iv.state)).collect())
        .collect();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for_each_world(scm, |exo_states, p| {
        let states: Vec<Vec<usize>> = worlds
            .iter()
            .map(|ivs| eval_with(scm, exo_states, ivs))
            .collect();
        let holds = |evs: &[cfbound::inference::Event]| {
            evs.iter().all(|e| states[e.world][resolve(&e.var)] == e.state)
        };
        if holds(&query.given) {
            denominator += p;
            if holds(&query.target) {
                numerator += p;
            }
        }
    });
    assert!(denominator > 0.0, "conditioning event has zero probability");
    numerator / denominator
}

/// Distribution over observable (endogenous minus selector) configurations,
/// keyed by states in [`Scm::observable_ids`] order, and — when a selector
/// is present — the mass it discards.
pub fn oracle_observable_pmf(scm: &Scm) -> (BTreeMap<Vec<usize>, f64>, f64) {
    let obs = scm.observable_ids();
    let mut pmf = BTreeMap::new();
    let mut p_s0 = 0.0;
    for_each_world(scm, |exo_states, p| {
        let states = eval_with(scm, exo_states, &[]);
        let key: Vec<usize> = obs.iter().map(|&v| states[v]).collect();
        *pmf.entry(key).or_insert(0.0) += p;
        if let Some(s) = scm.selector() {
            if states[s] == 0 {
                p_s0 += p;
            }
        }
    });
    (pmf, p_s0)
}

// ---------------------------------------------------------------------------
// Model and data generators
// ---------------------------------------------------------------------------

pub fn dirichlet_flat(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // flat Dirichlet via normalized Exp(1) draws
    let mut v: Vec<f64> = (0..n)
        .map(|_| -f64::ln(1.0 - rng.random::<f64>()))
        .collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// Random fully specified Markovian-or-confounded model: a random DAG over
/// `n_endo` endogenous variables (cards 2–3), each with its own exogenous
/// parent (cards 2–4), plus an occasional shared confounder, with random
/// surjective tables and flat-Dirichlet priors.
pub fn random_fscm(rng: &mut ChaCha8Rng, n_endo: usize) -> Scm {
    let mut b = ScmBuilder::new();
    let endo_cards: Vec<usize> = (0..n_endo).map(|_| rng.random_range(2..=3)).collect();
    let endo_names: Vec<String> = (0..n_endo).map(|i| format!("V{i}")).collect();
    for (name, &card) in endo_names.iter().zip(&endo_cards) {
        b.endogenous(name, card);
    }
    let exo_cards: Vec<usize> = (0..n_endo).map(|_| rng.random_range(2..=4)).collect();
    for (i, &card) in exo_cards.iter().enumerate() {
        b.exogenous(&format!("N{i}"), card);
    }
    // one optional confounder shared by two endogenous variables
    let confounder = if n_endo >= 2 && rng.random::<f64>() < 0.5 {
        let card = rng.random_range(2..=3);
        b.exogenous("C", card);
        let mut pair = [rng.random_range(0..n_endo), rng.random_range(0..n_endo)];
        while pair[0] == pair[1] {
            pair[1] = rng.random_range(0..n_endo);
        }
        Some((pair, card))
    } else {
        None
    };

    for i in 0..n_endo {
        let mut parents: Vec<String> = vec![format!("N{i}")];
        let mut cards: Vec<usize> = vec![exo_cards[i]];
        for j in 0..i {
            if rng.random::<f64>() < 0.4 {
                parents.push(endo_names[j].clone());
                cards.push(endo_cards[j]);
            }
        }
        if let Some(([a, bb], c_card)) = confounder {
            if a == i || bb == i {
                parents.push("C".into());
                cards.push(c_card);
            }
        }
        let table = random_surjective_table(rng, &cards, endo_cards[i]);
        let parent_refs: Vec<&str> = parents.iter().map(|s| s.as_str()).collect();
        b.equation(&endo_names[i], &parent_refs, table);
    }
    for (i, &card) in exo_cards.iter().enumerate() {
        b.pmf(&format!("N{i}"), dirichlet_flat(rng, card));
    }
    if let Some((_, card)) = confounder {
        b.pmf("C", dirichlet_flat(rng, card));
    }
    b.build().expect("generated model is valid")
}

/// Uniformly random table from the parent space onto `card` states,
/// resampled until surjective.
pub fn random_surjective_table(rng: &mut ChaCha8Rng, parent_cards: &[usize], card: usize) -> Vec<usize> {
    let len: usize = parent_cards.iter().product::<usize>().max(1);
    assert!(len >= card, "parent space too small for surjectivity");
    loop {
        let table: Vec<usize> = (0..len).map(|_| rng.random_range(0..card)).collect();
        let mut hit = vec![false; card];
        for &t in &table {
            hit[t] = true;
        }
        if hit.iter().all(|&h| h) {
            return table;
        }
    }
}

/// Random conservative model whose endogenous layer forms a COMPLETE DAG
/// over a shuffled order (every earlier variable is a parent of every later
/// one), with flat-Dirichlet exogenous priors. Dense wiring keeps the
/// selected-stratum factorization achievable, which the likelihood-ceiling
/// tests rely on.
pub fn random_complete_conservative(rng: &mut ChaCha8Rng, n_endo: usize, max_card: usize) -> Scm {
    let mut order: Vec<usize> = (0..n_endo).collect();
    // Fisher-Yates
    for i in (1..n_endo).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let cards: Vec<usize> = (0..n_endo).map(|_| rng.random_range(2..=max_card)).collect();
    let mut skeleton = Vec::new();
    for (pos, &v) in order.iter().enumerate() {
        skeleton.push(SkeletonNode {
            name: format!("V{v}"),
            cardinality: cards[v],
            parents: order[..pos].iter().map(|&p| format!("V{p}")).collect(),
        });
    }
    let mut scm = cfbound::scm::build_conservative(&skeleton, "U_").expect("conservative build");
    for u in scm.exogenous_ids() {
        let pmf = dirichlet_flat(rng, scm.cardinality(u));
        scm.set_pmf(u, pmf).expect("valid pmf");
    }
    scm
}

/// Random non-constant selector table over the given parent cardinalities.
pub fn random_selector_table(rng: &mut ChaCha8Rng, parent_cards: &[usize]) -> Vec<usize> {
    let len: usize = parent_cards.iter().product::<usize>().max(1);
    loop {
        let table: Vec<usize> = (0..len).map(|_| rng.random_range(0..2)).collect();
        if table.iter().any(|&t| t == 0) && table.iter().any(|&t| t == 1) {
            return table;
        }
    }
}

/// Samples `d` observable rows (states in [`Scm::observable_ids`] order).
pub fn sample_dataset(scm: &Scm, rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<usize>> {
    let exo = scm.exogenous_ids();
    let pmfs: Vec<&[f64]> = exo.iter().map(|&u| scm.pmf(u).expect("full model")).collect();
    let obs = scm.observable_ids();
    let mut rows = Vec::with_capacity(d);
    let mut exo_states = vec![0usize; exo.len()];
    for _ in 0..d {
        for (slot, pmf) in pmfs.iter().enumerate() {
            exo_states[slot] = sample_pmf(rng, pmf);
        }
        let states = eval_with(scm, &exo_states, &[]);
        rows.push(obs.iter().map(|&v| states[v]).collect());
    }
    rows
}

pub fn sample_pmf(rng: &mut ChaCha8Rng, pmf: &[f64]) -> usize {
    let mut t = rng.random::<f64>();
    for (i, &p) in pmf.iter().enumerate() {
        t -= p;
        if t < 0.0 {
            return i;
        }
    }
    pmf.len() - 1
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Special-function references
// ---------------------------------------------------------------------------

/// Lanczos log-gamma (g = 7, 9 terms), accurate to ~1e-13 for x > 0.
pub fn ln_gamma_ref(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return f64::ln(std::f64::consts::PI / f64::sin(std::f64::consts::PI * x))
            - ln_gamma_ref(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * f64::ln(2.0 * std::f64::consts::PI) + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta by its power series,
/// B(z;a,b) = z^a · Σ_n (1−b)_n zⁿ / (n!(a+n)), switched through the
/// symmetry identity when z is past the mean so the series always converges
/// quickly.
pub fn betainc_series(z: f64, a: f64, b: f64) -> f64 {
    assert!((0.0..=1.0).contains(&z) && a > 0.0 && b > 0.0);
    if z == 0.0 {
        return 0.0;
    }
    if z == 1.0 {
        return 1.0;
    }
    if z > a / (a + b) {
        return 1.0 - betainc_series(1.0 - z, b, a);
    }
    let mut coeff = 1.0; // (1−b)_n zⁿ / n!
    let mut sum = 1.0 / a;
    let mut n = 0.0;
    loop {
        coeff *= (n + 1.0 - b) * z / (n + 1.0);
        let term = coeff / (a + n + 1.0);
        sum += term;
        n += 1.0;
        if term.abs() <= sum.abs() * 1e-17 || n > 200_000.0 {
            break;
        }
    }
    let ln_beta = ln_gamma_ref(a) + ln_gamma_ref(b) - ln_gamma_ref(a + b);
    f64::exp(a * z.ln() + sum.ln() - ln_beta)
}

/// The restart-coverage kernel evaluated through the series reference.
pub fn kernel_ref(x: f64, y: f64, l: f64, alpha: f64, beta: f64, k: u32) -> f64 {
    let s = l + x + y;
    let hi = betainc_series((l + x) / s, alpha, beta);
    let lo = betainc_series(x / s, alpha, beta);
    (hi - lo).powi(k as i32)
}

/// Monte-Carlo reference for the beta-weighted coverage ratio: uniform
/// proposals on the triangle x,y ≥ 0, x+y ≤ 1−L, kernel values as weights,
/// and the indicator of the δ-box as the ratio numerator. Returns the
/// self-normalized estimate and its large-sample standard error.
pub fn mc_coverage(
    l: f64,
    alpha: f64,
    beta: f64,
    k: u32,
    delta: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = rng_for(seed);
    let span = 1.0 - l;
    let half = delta / 2.0;
    let mut sw = 0.0;
    let mut swg = 0.0;
    let mut pts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut u: f64 = rng.random();
        let mut v: f64 = rng.random();
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let x = u * span;
        let y = v * span;
        let w = kernel_ref(x, y, l, alpha, beta, k);
        let g = if x <= half && y <= half { 1.0 } else { 0.0 };
        sw += w;
        swg += w * g;
        pts.push((w, g));
    }
    let r = swg / sw;
    let mean_w = sw / samples as f64;
    let mut var = 0.0;
    for &(w, g) in &pts {
        let e = w * (g - r) / mean_w;
        var += e * e;
    }
    var /= (samples as f64) * (samples as f64 - 1.0);
    (r, var.sqrt())
}
