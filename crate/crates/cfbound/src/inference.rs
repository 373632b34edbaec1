//! Exact inference: observational, interventional, and counterfactual.
//!
//! Two engines live here. The generic one compiles a model (or a multi-world
//! twin of it) into factors and runs variable elimination — it answers any
//! query but rebuilds its factor list each call. [`Evaluator`] is the
//! workhorse for expectation-maximization: it preindexes, per confounded
//! component, which joint exogenous states are consistent with each
//! configuration of the component's endogenous boundary, making repeated
//! posterior computations cheap as the exogenous PMFs change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{eliminate, Factor};
use crate::index::Shape;
use crate::scm::{Kind, Scm, VarId, DEFAULT_ENUMERATION_CAP};

/// Queries spanning more worlds than this are rejected unless the query
/// raises its own `max_worlds`.
pub const DEFAULT_MAX_WORLDS: usize = 2;

fn default_max_worlds() -> usize {
    DEFAULT_MAX_WORLDS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    pub var: String,
    pub state: usize,
}

/// One hypothetical world: the base model under these interventions.
/// An empty list is the factual world.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct World {
    #[serde(default)]
    pub interventions: Vec<Intervention>,
}

/// An endogenous variable taking a state in one world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    #[serde(default)]
    pub world: usize,
    pub var: String,
    pub state: usize,
}

/// A conjunction-over-worlds probability: P(target | given), where events in
/// different worlds share the same exogenous draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualQuery {
    pub worlds: Vec<World>,
    pub target: Vec<Event>,
    #[serde(default)]
    pub given: Vec<Event>,
    /// Guard against accidentally huge twin networks; raise explicitly for
    /// queries over three or more worlds.
    #[serde(default = "default_max_worlds")]
    pub max_worlds: usize,
}

impl CounterfactualQuery {
    /// Probability of necessity and sufficiency for binary cause/effect:
    /// the effect follows the cause in both directions.
    pub fn pns(cause: &str, effect: &str) -> Self {
        CounterfactualQuery {
            worlds: vec![
                World { interventions: vec![Intervention { var: cause.into(), state: 1 }] },
                World { interventions: vec![Intervention { var: cause.into(), state: 0 }] },
            ],
            target: vec![
                Event { world: 0, var: effect.into(), state: 1 },
                Event { world: 1, var: effect.into(), state: 0 },
            ],
            given: Vec::new(),
            max_worlds: DEFAULT_MAX_WORLDS,
        }
    }

    /// Probability of necessity: among factual (cause=1, effect=1) cases,
    /// the effect would have been absent had the cause been absent.
    pub fn pn(cause: &str, effect: &str) -> Self {
        CounterfactualQuery {
            worlds: vec![
                World::default(),
                World { interventions: vec![Intervention { var: cause.into(), state: 0 }] },
            ],
            target: vec![Event { world: 1, var: effect.into(), state: 0 }],
            given: vec![
                Event { world: 0, var: cause.into(), state: 1 },
                Event { world: 0, var: effect.into(), state: 1 },
            ],
            max_worlds: DEFAULT_MAX_WORLDS,
        }
    }

    /// Probability of sufficiency: among factual (cause=0, effect=0) cases,
    /// the effect would have appeared had the cause been present.
    pub fn ps(cause: &str, effect: &str) -> Self {
        CounterfactualQuery {
            worlds: vec![
                World::default(),
                World { interventions: vec![Intervention { var: cause.into(), state: 1 }] },
            ],
            target: vec![Event { world: 1, var: effect.into(), state: 1 }],
            given: vec![
                Event { world: 0, var: cause.into(), state: 0 },
                Event { world: 0, var: effect.into(), state: 0 },
            ],
            max_worlds: DEFAULT_MAX_WORLDS,
        }
    }
}

/// Factor list for one model, with endogenous variables shifted into the id
/// block of world `w` (exogenous ids stay shared across worlds).
fn world_factors(base: &Scm, model: &Scm, world: usize, out: &mut Vec<Factor>) {
    let shift = world * base.num_vars();
    for v in model.endogenous_ids() {
        let eq = model.equation(v).expect("endogenous equation");
        let parents: Vec<(usize, usize)> = eq
            .parents
            .iter()
            .map(|&p| {
                let id = match model.var(p).kind {
                    Kind::Exogenous => p,
                    Kind::Endogenous => p + shift,
                };
                (id, model.cardinality(p))
            })
            .collect();
        out.push(Factor::from_table(
            v + shift,
            model.cardinality(v),
            &parents,
            &eq.table,
        ));
    }
}

fn pmf_factors(scm: &Scm, out: &mut Vec<Factor>) -> Result<()> {
    for u in scm.exogenous_ids() {
        let pmf = scm
            .pmf(u)
            .ok_or_else(|| Error::PartialModel(scm.var(u).name.clone()))?;
        out.push(Factor::from_pmf(u, pmf));
    }
    Ok(())
}

/// Canonicalize events into evidence pairs in a twin id space. Returns
/// `None` when two events contradict each other (the conjunction is then
/// impossible, probability zero).
fn canonical_evidence(
    scm: &Scm,
    events: &[Event],
    n_worlds: usize,
) -> Result<Option<Vec<(usize, usize)>>> {
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(events.len());
    for e in events {
        let id = scm
            .id_of(&e.var)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown variable '{}'", e.var)))?;
        if scm.var(id).kind != Kind::Endogenous {
            return Err(Error::InvalidQuery(format!(
                "'{}' is exogenous and cannot appear in an event",
                e.var
            )));
        }
        if e.state >= scm.cardinality(id) {
            return Err(Error::InvalidQuery(format!(
                "state {} out of range for '{}'",
                e.state, e.var
            )));
        }
        if e.world >= n_worlds {
            return Err(Error::InvalidQuery(format!(
                "event on world {} but only {} world(s) declared",
                e.world, n_worlds
            )));
        }
        let key = id + e.world * scm.num_vars();
        match pairs.iter().find(|&&(k, _)| k == key) {
            Some(&(_, s)) if s != e.state => return Ok(None),
            Some(_) => {}
            None => pairs.push((key, e.state)),
        }
    }
    Ok(Some(pairs))
}

/// Evaluate a counterfactual query on a fully specified model by building
/// the twin network (one endogenous copy per world, shared exogenous layer)
/// and eliminating it twice: once for P(target ∧ given), once for P(given).
pub fn twin_query(scm: &Scm, query: &CounterfactualQuery) -> Result<f64> {
    scm.require_full()?;
    if query.worlds.is_empty() {
        return Err(Error::InvalidQuery("query declares no worlds".into()));
    }
    if query.worlds.len() > query.max_worlds.max(1) {
        return Err(Error::InvalidQuery(format!(
            "{} worlds exceed the limit of {}",
            query.worlds.len(),
            query.max_worlds.max(1)
        )));
    }
    if query.target.is_empty() {
        return Err(Error::InvalidQuery("empty target conjunction".into()));
    }

    let mut factors = Vec::new();
    pmf_factors(scm, &mut factors)?;
    for (w, world) in query.worlds.iter().enumerate() {
        let mut model = scm.clone();
        for iv in &world.interventions {
            let id = scm
                .id_of(&iv.var)
                .ok_or_else(|| Error::InvalidQuery(format!("unknown variable '{}'", iv.var)))?;
            model = model.intervene(id, iv.state)?;
        }
        world_factors(scm, &model, w, &mut factors);
    }

    let given = match canonical_evidence(scm, &query.given, query.worlds.len())? {
        Some(g) => g,
        None => return Err(Error::ZeroProbabilityEvidence),
    };
    let denominator = if given.is_empty() {
        1.0
    } else {
        eliminate(factors.clone(), &[], &given).sum()
    };
    if denominator <= 0.0 {
        return Err(Error::ZeroProbabilityEvidence);
    }

    let mut joint_events = query.target.clone();
    joint_events.extend_from_slice(&query.given);
    let numerator = match canonical_evidence(scm, &joint_events, query.worlds.len())? {
        Some(ev) => eliminate(factors, &[], &ev).sum(),
        None => 0.0, // target contradicts given: the conjunction is empty
    };

    Ok((numerator / denominator).clamp(0.0, 1.0))
}

/// P(assignment) for a partial assignment of (variable name, state) pairs.
pub fn joint_probability(scm: &Scm, assignment: &[(&str, usize)]) -> Result<f64> {
    scm.require_full()?;
    let mut evidence = Vec::with_capacity(assignment.len());
    for &(name, state) in assignment {
        let id = scm
            .id_of(name)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown variable '{name}'")))?;
        if state >= scm.cardinality(id) {
            return Err(Error::InvalidQuery(format!(
                "state {state} out of range for '{name}'"
            )));
        }
        match evidence.iter().find(|&&(k, _)| k == id) {
            Some(&(_, s)) if s != state => return Ok(0.0),
            Some(_) => {}
            None => evidence.push((id, state)),
        }
    }
    let mut factors = Vec::new();
    pmf_factors(scm, &mut factors)?;
    world_factors(scm, scm, 0, &mut factors);
    Ok(eliminate(factors, &[], &evidence).sum().clamp(0.0, 1.0))
}

/// Posterior PMF of every exogenous variable given evidence on endogenous
/// variables — the E-step quantity. Returned in [`Scm::exogenous_ids`]
/// order. Evidence may include the selector (e.g. "S"=0 for the unselected
/// stratum).
pub fn exogenous_posterior(scm: &Scm, evidence: &[(&str, usize)]) -> Result<Vec<Vec<f64>>> {
    scm.require_full()?;
    let mut pairs = Vec::with_capacity(evidence.len());
    for &(name, state) in evidence {
        let id = scm
            .id_of(name)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown variable '{name}'")))?;
        if state >= scm.cardinality(id) {
            return Err(Error::InvalidQuery(format!(
                "state {state} out of range for '{name}'"
            )));
        }
        match pairs.iter().find(|&&(k, _)| k == id) {
            Some(&(_, s)) if s != state => return Err(Error::ZeroProbabilityEvidence),
            Some(_) => {}
            None => pairs.push((id, state)),
        }
    }
    let mut factors = Vec::new();
    pmf_factors(scm, &mut factors)?;
    world_factors(scm, scm, 0, &mut factors);

    let mut out = Vec::new();
    for u in scm.exogenous_ids() {
        let marginal = eliminate(factors.clone(), &[u], &pairs);
        let mass = marginal.sum();
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        out.push(marginal.normalized().values().to_vec());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Component-indexed evaluator (the EM fast path)
// ---------------------------------------------------------------------------

struct Component {
    /// Endogenous members, topologically ordered.
    members: Vec<VarId>,
    /// Exogenous variables whose children lie in this component, sorted.
    exo: Vec<VarId>,
    exo_shape: Shape,
    /// Endogenous boundary: members ∪ their endogenous parents, sorted.
    boundary: Vec<VarId>,
    boundary_shape: Shape,
    /// CSR adjacency: consistent joint-exogenous indices per boundary config.
    offsets: Vec<u32>,
    items: Vec<u32>,
}

/// Preindexed inference state for one selector-embedded (or plain) model.
///
/// The index answers, for any FULL observable configuration x, both P(x)
/// and the per-exogenous posteriors P(U|x), as restricted sums over each
/// confounded component — and, when a selector is present, the same for the
/// unselected stratum S=0 by enumerating its preimage.
pub struct Evaluator {
    observables: Vec<VarId>,
    obs_cards: Vec<usize>,
    obs_shape: Shape,
    exo_ids: Vec<VarId>,
    exo_cards: Vec<usize>,
    /// var id -> slot in exo_ids (usize::MAX elsewhere)
    exo_slot: Vec<usize>,
    components: Vec<Component>,
    /// Exogenous variables with no children: posterior = prior.
    orphans: Vec<usize>, // slots
    /// Observable-shape indices of the selector's zero preimage.
    s0_configs: Option<Vec<usize>>,
}

impl Evaluator {
    pub fn build(scm: &Scm) -> Result<Self> {
        let observables = scm.observable_ids();
        let obs_cards: Vec<usize> = observables.iter().map(|&v| scm.cardinality(v)).collect();
        let obs_shape = Shape::checked(&obs_cards)
            .filter(|s| (s.len() as u64) <= DEFAULT_ENUMERATION_CAP)
            .ok_or(Error::EnumerationCapExceeded {
                states: u64::MAX,
                cap: DEFAULT_ENUMERATION_CAP,
            })?;
        let exo_ids = scm.exogenous_ids();
        let exo_cards: Vec<usize> = exo_ids.iter().map(|&u| scm.cardinality(u)).collect();
        let mut exo_slot = vec![usize::MAX; scm.num_vars()];
        for (slot, &u) in exo_ids.iter().enumerate() {
            exo_slot[u] = slot;
        }

        // topological position for ordering members
        let mut topo_pos = vec![0usize; scm.num_vars()];
        for (pos, &v) in scm.topological_order().iter().enumerate() {
            topo_pos[v] = pos;
        }

        let mut components = Vec::new();
        let mut claimed = vec![false; exo_ids.len()];
        for group in scm.c_components() {
            if group.len() == 1 && Some(group[0]) == scm.selector() {
                continue; // the selector is deterministic in x: factor is always 1
            }
            let mut members = group.clone();
            members.sort_unstable_by_key(|&v| topo_pos[v]);

            let mut exo: Vec<VarId> = Vec::new();
            let mut boundary: Vec<VarId> = members.clone();
            for &m in &members {
                for p in scm.exogenous_parents(m) {
                    if !exo.contains(&p) {
                        exo.push(p);
                    }
                }
                for p in scm.endogenous_parents(m) {
                    if !boundary.contains(&p) {
                        boundary.push(p);
                    }
                }
            }
            exo.sort_unstable();
            boundary.sort_unstable();
            for &u in &exo {
                claimed[exo_slot[u]] = true;
            }

            let exo_shape = Shape::checked(&exo.iter().map(|&u| scm.cardinality(u)).collect::<Vec<_>>())
                .filter(|s| (s.len() as u64) <= DEFAULT_ENUMERATION_CAP)
                .ok_or(Error::EnumerationCapExceeded {
                    states: u64::MAX,
                    cap: DEFAULT_ENUMERATION_CAP,
                })?;
            let boundary_shape = Shape::checked(
                &boundary.iter().map(|&v| scm.cardinality(v)).collect::<Vec<_>>(),
            )
            .filter(|s| (s.len() as u64) <= DEFAULT_ENUMERATION_CAP)
            .ok_or(Error::EnumerationCapExceeded {
                states: u64::MAX,
                cap: DEFAULT_ENUMERATION_CAP,
            })?;

            // enumerate (u_C, external parent config) pairs; member values
            // follow deterministically, locating the one consistent
            // boundary config for the pair
            let externals: Vec<VarId> = boundary
                .iter()
                .copied()
                .filter(|v| !members.contains(v))
                .collect();
            let ext_shape = Shape::new(
                &externals.iter().map(|&v| scm.cardinality(v)).collect::<Vec<_>>(),
            );

            let mut lists: Vec<Vec<u32>> = vec![Vec::new(); boundary_shape.len()];
            let mut states = vec![0usize; scm.num_vars()];
            let mut exo_states = vec![0usize; exo.len()];
            let mut ext_states = vec![0usize; externals.len()];
            let mut bkey = vec![0usize; boundary.len()];
            let mut pbuf: Vec<usize> = Vec::new();
            for u_idx in 0..exo_shape.len() {
                exo_shape.decode_into(u_idx, &mut exo_states);
                for (slot, &u) in exo.iter().enumerate() {
                    states[u] = exo_states[slot];
                }
                for e_idx in 0..ext_shape.len() {
                    ext_shape.decode_into(e_idx, &mut ext_states);
                    for (slot, &v) in externals.iter().enumerate() {
                        states[v] = ext_states[slot];
                    }
                    for &m in &members {
                        let eq = scm.equation(m).expect("endogenous member");
                        let shape = scm.equation_shape(m).expect("member shape");
                        pbuf.clear();
                        pbuf.extend(eq.parents.iter().map(|&p| states[p]));
                        states[m] = eq.eval(shape, &pbuf);
                    }
                    for (slot, &v) in boundary.iter().enumerate() {
                        bkey[slot] = states[v];
                    }
                    lists[boundary_shape.index_of(&bkey)].push(u_idx as u32);
                }
            }
            let mut offsets = Vec::with_capacity(lists.len() + 1);
            let mut items = Vec::new();
            offsets.push(0u32);
            for l in &lists {
                items.extend_from_slice(l);
                offsets.push(items.len() as u32);
            }

            components.push(Component {
                members,
                exo,
                exo_shape,
                boundary,
                boundary_shape,
                offsets,
                items,
            });
        }

        let orphans: Vec<usize> = (0..exo_ids.len()).filter(|&s| !claimed[s]).collect();

        // selector zero-preimage over observable configurations
        let s0_configs = match scm.selector() {
            Some(s) => {
                let eq = scm.equation(s).expect("selector equation");
                let shape = scm.equation_shape(s).expect("selector shape");
                let mut obs_pos = vec![usize::MAX; scm.num_vars()];
                for (slot, &v) in observables.iter().enumerate() {
                    obs_pos[v] = slot;
                }
                let mut zero = Vec::new();
                let mut obs_states = vec![0usize; observables.len()];
                let mut pbuf = vec![0usize; eq.parents.len()];
                for idx in 0..obs_shape.len() {
                    obs_shape.decode_into(idx, &mut obs_states);
                    for (slot, &p) in eq.parents.iter().enumerate() {
                        pbuf[slot] = obs_states[obs_pos[p]];
                    }
                    if eq.eval(shape, &pbuf) == 0 {
                        zero.push(idx);
                    }
                }
                Some(zero)
            }
            None => None,
        };

        Ok(Evaluator {
            observables,
            obs_cards,
            obs_shape,
            exo_ids,
            exo_cards,
            exo_slot,
            components,
            orphans,
            s0_configs,
        })
    }

    pub fn observables(&self) -> &[VarId] {
        &self.observables
    }

    pub fn observable_cards(&self) -> &[usize] {
        &self.obs_cards
    }

    pub fn exogenous_ids(&self) -> &[VarId] {
        &self.exo_ids
    }

    pub fn exogenous_cards(&self) -> &[usize] {
        &self.exo_cards
    }

    pub fn obs_index(&self, states: &[usize]) -> usize {
        self.obs_shape.index_of(states)
    }

    /// Number of configurations in the selector's zero preimage (0 when no
    /// selector is embedded).
    pub fn s0_size(&self) -> usize {
        self.s0_configs.as_ref().map_or(0, |v| v.len())
    }

    /// P(x) for a full observable configuration under `pmfs` (indexed like
    /// [`Evaluator::exogenous_ids`]), while adding `weight`·P(u|x) into
    /// `acc` (same indexing) for every exogenous variable. Passing
    /// `weight = 0` computes the probability alone. Returns 0 when the
    /// configuration has no support; `acc` is then untouched.
    pub fn accumulate_posterior(
        &self,
        obs_states: &[usize],
        pmfs: &[Vec<f64>],
        weight: f64,
        acc: &mut [Vec<f64>],
    ) -> f64 {
        let mut p_x = 1.0;
        // first pass: component totals
        let mut totals = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let total = self.component_total(comp, obs_states, pmfs);
            totals.push(total);
            p_x *= total;
            if total == 0.0 {
                return 0.0;
            }
        }
        if weight != 0.0 {
            for (comp, &total) in self.components.iter().zip(&totals) {
                self.component_accumulate(comp, obs_states, pmfs, weight / total, acc);
            }
            for &slot in &self.orphans {
                for (a, &p) in acc[slot].iter_mut().zip(&pmfs[slot]) {
                    *a += weight * p;
                }
            }
        }
        p_x
    }

    fn boundary_index(&self, comp: &Component, obs_states: &[usize]) -> usize {
        // observables are the full endogenous layer minus the selector, and
        // selector variables never sit on a boundary, so every boundary var
        // has an observable slot
        let mut key = 0usize;
        for (slot, &v) in comp.boundary.iter().enumerate() {
            let obs_slot = self
                .observables
                .binary_search(&v)
                .expect("boundary variable observable");
            key += comp.boundary_shape.strides()[slot] * obs_states[obs_slot];
        }
        key
    }

    fn component_total(&self, comp: &Component, obs_states: &[usize], pmfs: &[Vec<f64>]) -> f64 {
        let b = self.boundary_index(comp, obs_states);
        let lo = comp.offsets[b] as usize;
        let hi = comp.offsets[b + 1] as usize;
        let mut total = 0.0;
        let mut exo_states = vec![0usize; comp.exo.len()];
        for &u_idx in &comp.items[lo..hi] {
            comp.exo_shape.decode_into(u_idx as usize, &mut exo_states);
            let mut w = 1.0;
            for (slot, &u) in comp.exo.iter().enumerate() {
                w *= pmfs[self.exo_slot[u]][exo_states[slot]];
            }
            total += w;
        }
        total
    }

    fn component_accumulate(
        &self,
        comp: &Component,
        obs_states: &[usize],
        pmfs: &[Vec<f64>],
        scale: f64,
        acc: &mut [Vec<f64>],
    ) {
        let b = self.boundary_index(comp, obs_states);
        let lo = comp.offsets[b] as usize;
        let hi = comp.offsets[b + 1] as usize;
        let mut exo_states = vec![0usize; comp.exo.len()];
        for &u_idx in &comp.items[lo..hi] {
            comp.exo_shape.decode_into(u_idx as usize, &mut exo_states);
            let mut w = 1.0;
            for (slot, &u) in comp.exo.iter().enumerate() {
                w *= pmfs[self.exo_slot[u]][exo_states[slot]];
            }
            if w == 0.0 {
                continue;
            }
            let w = w * scale;
            for (slot, &u) in comp.exo.iter().enumerate() {
                acc[self.exo_slot[u]][exo_states[slot]] += w;
            }
        }
    }

    /// P(S=0) under `pmfs`, adding `weight`·P(u|S=0) into `acc` when the
    /// mass is positive. Enumerates the selector's zero preimage, reusing
    /// the full-configuration machinery per member. Errors when no selector
    /// is embedded.
    pub fn accumulate_s0_posterior(
        &self,
        pmfs: &[Vec<f64>],
        weight: f64,
        acc: &mut [Vec<f64>],
    ) -> Result<f64> {
        let configs = self
            .s0_configs
            .as_ref()
            .ok_or_else(|| Error::InvalidQuery("model has no selector".into()))?;
        let mut obs_states = vec![0usize; self.observables.len()];

        let mut p_s0 = 0.0;
        if weight == 0.0 {
            for &idx in configs {
                self.obs_shape.decode_into(idx, &mut obs_states);
                p_s0 += self.accumulate_posterior(&obs_states, pmfs, 0.0, acc);
            }
            return Ok(p_s0);
        }

        // mixture Σ_x P(x)·P(u|x) / P(S=0): accumulate P(x)-weighted
        // posteriors into a scratch buffer, then rescale by the stratum mass
        let mut scratch: Vec<Vec<f64>> = self.exo_cards.iter().map(|&c| vec![0.0; c]).collect();
        for &idx in configs {
            self.obs_shape.decode_into(idx, &mut obs_states);
            let p_x = self.accumulate_posterior(&obs_states, pmfs, 0.0, &mut scratch);
            if p_x > 0.0 {
                self.accumulate_posterior(&obs_states, pmfs, p_x, &mut scratch);
                p_s0 += p_x;
            }
        }
        if p_s0 > 0.0 {
            let scale = weight / p_s0;
            for (slot, s) in scratch.iter().enumerate() {
                for (a, &v) in acc[slot].iter_mut().zip(s) {
                    *a += scale * v;
                }
            }
        }
        Ok(p_s0)
    }
}
