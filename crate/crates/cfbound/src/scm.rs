//! Discrete structural causal models.
//!
//! A model is a DAG over *endogenous* variables (each defined by a
//! deterministic structural equation over its parents) and *exogenous*
//! variables (roots, each with an optional probability mass function).
//! A model with every exogenous PMF present is *fully specified*; one with
//! missing PMFs is *partially specified* and only gains numbers through
//! estimation (see [`crate::emcc`]).
//!
//! Two constructions matter in practice:
//!
//! * [`build_conservative`] takes an endogenous-only DAG and attaches to each
//!   endogenous variable one fresh exogenous parent whose states index ALL
//!   functions from the endogenous-parent configurations to the child — the
//!   canonical "every response the data cannot rule out" specification.
//! * [`Scm::embed_selector`] adds a binary selection indicator `S` computed
//!   deterministically from endogenous parents. Records with `S = 0` are the
//!   ones a biased acquisition process drops; the selector variable is exempt
//!   from the surjectivity and exogenous-noise bookkeeping below because it
//!   models the acquisition process, not the system.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::index::{checked_pow, digit, Shape};

/// Default ceiling on joint exogenous states for enumeration-based checks.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;

/// PMFs whose total differs from 1 by at most this much are renormalized;
/// anything worse is rejected as a data error.
pub const PMF_NORMALIZATION_TOL: f64 = 1e-9;

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Endogenous,
    Exogenous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
    pub kind: Kind,
}

/// Deterministic map from a parent configuration to a child state.
///
/// `table` is row-major over `parents` with the last-listed parent fastest;
/// `table[i] < child cardinality` for all entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralEquation {
    pub child: VarId,
    pub parents: Vec<VarId>,
    pub table: Vec<usize>,
    /// Set by [`Scm::intervene`]; intervened constants skip the surjectivity
    /// requirement (a forced value produces exactly one state by design).
    pub intervened: bool,
}

impl StructuralEquation {
    /// Evaluate the equation at the given parent states (scope order).
    pub fn eval(&self, shape: &Shape, parent_states: &[usize]) -> usize {
        self.table[shape.index_of(parent_states)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    vars: Vec<Variable>,
    by_name: HashMap<String, VarId>,
    /// Indexed by variable id; `None` for exogenous variables.
    equations: Vec<Option<StructuralEquation>>,
    /// Parent-scope shapes, parallel to `equations`.
    shapes: Vec<Option<Shape>>,
    /// Indexed by variable id; only exogenous entries may be `Some`.
    pmfs: Vec<Option<Vec<f64>>>,
    selector: Option<VarId>,
    children: Vec<Vec<VarId>>,
    topo: Vec<VarId>,
}

/// Incremental construction with validation deferred to [`ScmBuilder::build`].
#[derive(Debug, Default)]
pub struct ScmBuilder {
    vars: Vec<Variable>,
    equations: Vec<(String, Vec<String>, Vec<usize>)>,
    pmfs: Vec<(String, Vec<f64>)>,
    selector: Option<String>,
}

impl ScmBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn endogenous(&mut self, name: &str, cardinality: usize) -> &mut Self {
        self.vars.push(Variable {
            name: name.to_string(),
            cardinality,
            kind: Kind::Endogenous,
        });
        self
    }

    pub fn exogenous(&mut self, name: &str, cardinality: usize) -> &mut Self {
        self.vars.push(Variable {
            name: name.to_string(),
            cardinality,
            kind: Kind::Exogenous,
        });
        self
    }

    /// Structural equation for `child`; `parents` in table scope order.
    pub fn equation(&mut self, child: &str, parents: &[&str], table: Vec<usize>) -> &mut Self {
        self.equations.push((
            child.to_string(),
            parents.iter().map(|s| s.to_string()).collect(),
            table,
        ));
        self
    }

    pub fn pmf(&mut self, var: &str, pmf: Vec<f64>) -> &mut Self {
        self.pmfs.push((var.to_string(), pmf));
        self
    }

    /// Adds a binary selection indicator with the given endogenous parents.
    /// `table` entries must be 0/1; 1 means the record is kept.
    pub fn selector(&mut self, name: &str, parents: &[&str], table: Vec<usize>) -> &mut Self {
        self.endogenous(name, 2);
        self.equation(name, parents, table);
        self.selector = Some(name.to_string());
        self
    }

    pub fn build(&self) -> Result<Scm> {
        let mut by_name = HashMap::new();
        for (id, v) in self.vars.iter().enumerate() {
            if v.name.is_empty() {
                return Err(Error::InvalidModel("empty variable name".into()));
            }
            if v.cardinality == 0 {
                return Err(Error::InvalidModel(format!(
                    "variable '{}' has cardinality 0",
                    v.name
                )));
            }
            if by_name.insert(v.name.clone(), id).is_some() {
                return Err(Error::InvalidModel(format!(
                    "duplicate variable name '{}'",
                    v.name
                )));
            }
        }
        let lookup = |name: &str| -> Result<VarId> {
            by_name
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidModel(format!("unknown variable '{name}'")))
        };

        let selector = self.selector.as_deref().map(lookup).transpose()?;

        let mut equations: Vec<Option<StructuralEquation>> = vec![None; self.vars.len()];
        let mut shapes: Vec<Option<Shape>> = vec![None; self.vars.len()];
        for (child_name, parent_names, table) in &self.equations {
            let child = lookup(child_name)?;
            if self.vars[child].kind != Kind::Endogenous {
                return Err(Error::InvalidModel(format!(
                    "exogenous variable '{child_name}' cannot have an equation"
                )));
            }
            if equations[child].is_some() {
                return Err(Error::InvalidModel(format!(
                    "duplicate equation for '{child_name}'"
                )));
            }
            let parents: Vec<VarId> = parent_names
                .iter()
                .map(|n| lookup(n))
                .collect::<Result<_>>()?;
            let mut seen = parents.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != parents.len() {
                return Err(Error::InvalidModel(format!(
                    "duplicate parent in equation for '{child_name}'"
                )));
            }
            if parents.contains(&child) {
                return Err(Error::InvalidModel(format!(
                    "'{child_name}' cannot be its own parent"
                )));
            }
            if selector == Some(child) {
                for &p in &parents {
                    if self.vars[p].kind != Kind::Endogenous {
                        return Err(Error::InvalidModel(format!(
                            "selector '{child_name}' must have endogenous parents only"
                        )));
                    }
                }
            }
            let cards: Vec<usize> = parents.iter().map(|&p| self.vars[p].cardinality).collect();
            let shape = Shape::checked(&cards).ok_or_else(|| {
                Error::InvalidModel(format!("parent space of '{child_name}' overflows"))
            })?;
            if table.len() != shape.len() {
                return Err(Error::InvalidModel(format!(
                    "equation table for '{child_name}' has {} entries, expected {}",
                    table.len(),
                    shape.len()
                )));
            }
            let card = self.vars[child].cardinality;
            for &t in table {
                if t >= card {
                    return Err(Error::InvalidModel(format!(
                        "equation table for '{child_name}' assigns state {t} (cardinality {card})"
                    )));
                }
            }
            // Surjectivity: every child state must be producible. The
            // selector is exempt (constant selectors are legitimate —
            // "keep nothing"/"keep everything" are valid acquisition rules).
            if selector != Some(child) {
                let mut hit = vec![false; card];
                for &t in table {
                    hit[t] = true;
                }
                if let Some(state) = hit.iter().position(|h| !h) {
                    return Err(Error::NonSurjective {
                        child: child_name.clone(),
                        state,
                    });
                }
            }
            equations[child] = Some(StructuralEquation {
                child,
                parents,
                table: table.clone(),
                intervened: false,
            });
            shapes[child] = Some(shape);
        }

        for (id, v) in self.vars.iter().enumerate() {
            if v.kind == Kind::Endogenous && equations[id].is_none() {
                return Err(Error::InvalidModel(format!(
                    "endogenous variable '{}' has no equation",
                    v.name
                )));
            }
        }

        // The selection indicator records which units survive acquisition;
        // letting it feed back into the mechanism would make "selected"
        // part of the data-generating process.
        if let Some(s) = selector {
            for eq in equations.iter().flatten() {
                if eq.parents.contains(&s) {
                    return Err(Error::InvalidModel(format!(
                        "selector '{}' cannot be a parent of '{}'",
                        self.vars[s].name, self.vars[eq.child].name
                    )));
                }
            }
        }

        let mut pmfs: Vec<Option<Vec<f64>>> = vec![None; self.vars.len()];
        for (name, pmf) in &self.pmfs {
            let id = lookup(name)?;
            if self.vars[id].kind != Kind::Exogenous {
                return Err(Error::InvalidModel(format!(
                    "'{name}' is endogenous and cannot carry a distribution"
                )));
            }
            pmfs[id] = Some(validate_pmf(name, self.vars[id].cardinality, pmf)?);
        }

        let mut scm = Scm {
            vars: self.vars.clone(),
            by_name,
            equations,
            shapes,
            pmfs,
            selector,
            children: Vec::new(),
            topo: Vec::new(),
        };
        scm.rebuild_adjacency()?;
        Ok(scm)
    }
}

/// Checks length and non-negativity; renormalizes totals within
/// [`PMF_NORMALIZATION_TOL`] of 1 and rejects anything further out.
pub fn validate_pmf(name: &str, cardinality: usize, pmf: &[f64]) -> Result<Vec<f64>> {
    if pmf.len() != cardinality {
        return Err(Error::InvalidPmf {
            name: name.into(),
            reason: format!("{} entries for cardinality {}", pmf.len(), cardinality),
        });
    }
    let mut sum = 0.0;
    for &p in pmf {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidPmf {
                name: name.into(),
                reason: format!("entry {p} is not a probability"),
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PMF_NORMALIZATION_TOL {
        return Err(Error::InvalidPmf {
            name: name.into(),
            reason: format!("total mass {sum} is off by more than {PMF_NORMALIZATION_TOL}"),
        });
    }
    Ok(pmf.iter().map(|p| p / sum).collect())
}

impl Scm {
    fn rebuild_adjacency(&mut self) -> Result<()> {
        let n = self.vars.len();
        let mut children = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for eq in self.equations.iter().flatten() {
            indegree[eq.child] = eq.parents.len();
            for &p in &eq.parents {
                children[p].push(eq.child);
            }
        }
        // Kahn with an id-ordered frontier: deterministic topological order.
        let mut frontier: Vec<VarId> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        let mut remaining = indegree;
        while let Some(&v) = frontier.first() {
            frontier.remove(0);
            topo.push(v);
            for &c in &children[v] {
                remaining[c] -= 1;
                if remaining[c] == 0 {
                    // keep the frontier sorted by id
                    let pos = frontier.partition_point(|&x| x < c);
                    frontier.insert(pos, c);
                }
            }
        }
        if topo.len() != n {
            return Err(Error::InvalidModel("cycle in structural equations".into()));
        }
        self.children = children;
        self.topo = topo;
        Ok(())
    }

    // ---- accessors ----------------------------------------------------

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id]
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.vars[id].cardinality
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn equation(&self, id: VarId) -> Option<&StructuralEquation> {
        self.equations[id].as_ref()
    }

    pub fn equation_shape(&self, id: VarId) -> Option<&Shape> {
        self.shapes[id].as_ref()
    }

    pub fn pmf(&self, id: VarId) -> Option<&[f64]> {
        self.pmfs[id].as_deref()
    }

    pub fn set_pmf(&mut self, id: VarId, pmf: Vec<f64>) -> Result<()> {
        if self.vars[id].kind != Kind::Exogenous {
            return Err(Error::InvalidModel(format!(
                "'{}' is endogenous and cannot carry a distribution",
                self.vars[id].name
            )));
        }
        self.pmfs[id] = Some(validate_pmf(
            &self.vars[id].name,
            self.vars[id].cardinality,
            &pmf,
        )?);
        Ok(())
    }

    pub fn selector(&self) -> Option<VarId> {
        self.selector
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id]
    }

    /// All variable ids in a fixed topological order (deterministic).
    pub fn topological_order(&self) -> &[VarId] {
        &self.topo
    }

    /// Endogenous ids in declaration order, INCLUDING any selector.
    pub fn endogenous_ids(&self) -> Vec<VarId> {
        (0..self.vars.len())
            .filter(|&v| self.vars[v].kind == Kind::Endogenous)
            .collect()
    }

    /// Endogenous ids in declaration order, excluding the selector: the
    /// variables a dataset record assigns.
    pub fn observable_ids(&self) -> Vec<VarId> {
        self.endogenous_ids()
            .into_iter()
            .filter(|&v| Some(v) != self.selector)
            .collect()
    }

    pub fn exogenous_ids(&self) -> Vec<VarId> {
        (0..self.vars.len())
            .filter(|&v| self.vars[v].kind == Kind::Exogenous)
            .collect()
    }

    pub fn endogenous_parents(&self, id: VarId) -> Vec<VarId> {
        match &self.equations[id] {
            Some(eq) => eq
                .parents
                .iter()
                .copied()
                .filter(|&p| self.vars[p].kind == Kind::Endogenous)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn exogenous_parents(&self, id: VarId) -> Vec<VarId> {
        match &self.equations[id] {
            Some(eq) => eq
                .parents
                .iter()
                .copied()
                .filter(|&p| self.vars[p].kind == Kind::Exogenous)
                .collect(),
            None => Vec::new(),
        }
    }

    /// True when every exogenous variable carries a PMF.
    pub fn is_full(&self) -> bool {
        self.exogenous_ids().iter().all(|&u| self.pmfs[u].is_some())
    }

    /// First exogenous variable missing a PMF, as an error (for call sites
    /// that need a fully specified model).
    pub fn require_full(&self) -> Result<()> {
        for u in self.exogenous_ids() {
            if self.pmfs[u].is_none() {
                return Err(Error::PartialModel(self.vars[u].name.clone()));
            }
        }
        Ok(())
    }

    /// Exactly one exogenous parent per endogenous variable and one child per
    /// exogenous variable (the selector does not count — it has none).
    pub fn is_markovian(&self) -> bool {
        for v in self.endogenous_ids() {
            if Some(v) == self.selector {
                continue;
            }
            if self.exogenous_parents(v).len() != 1 {
                return false;
            }
        }
        self.exogenous_ids()
            .iter()
            .all(|&u| self.children[u].len() <= 1)
    }

    // ---- structure operations ------------------------------------------

    /// Partition of the endogenous variables into confounded components:
    /// two variables share a component iff they are linked by a chain of
    /// shared exogenous parents. Components and their members are sorted by
    /// id, so the output is deterministic.
    pub fn c_components(&self) -> Vec<Vec<VarId>> {
        let endo = self.endogenous_ids();
        let mut comp: HashMap<VarId, usize> = endo.iter().map(|&v| (v, v)).collect();
        fn find(comp: &mut HashMap<VarId, usize>, v: VarId) -> VarId {
            let p = comp[&v];
            if p == v {
                v
            } else {
                let root = find(comp, p);
                comp.insert(v, root);
                root
            }
        }
        for u in self.exogenous_ids() {
            let kids = &self.children[u];
            for w in kids.windows(2) {
                let a = find(&mut comp, w[0]);
                let b = find(&mut comp, w[1]);
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    comp.insert(hi, lo);
                }
            }
        }
        let mut groups: HashMap<VarId, Vec<VarId>> = HashMap::new();
        for &v in &endo {
            groups.entry(find(&mut comp, v)).or_default().push(v);
        }
        let mut out: Vec<Vec<VarId>> = groups.into_values().collect();
        for g in &mut out {
            g.sort_unstable();
        }
        out.sort_by_key(|g| g[0]);
        out
    }

    /// New model with a selection indicator embedded. Non-destructive: the
    /// original endogenous layer is untouched and
    /// [`Scm::without_selector`] restores an equal model.
    pub fn embed_selector(
        &self,
        name: &str,
        parents: &[&str],
        table: Vec<usize>,
    ) -> Result<Scm> {
        if self.selector.is_some() {
            return Err(Error::InvalidModel("model already has a selector".into()));
        }
        if self.by_name.contains_key(name) {
            return Err(Error::InvalidModel(format!(
                "selector name '{name}' already in use"
            )));
        }
        for &t in &table {
            if t > 1 {
                return Err(Error::InvalidModel(
                    "selector table entries must be 0/1".into(),
                ));
            }
        }
        let mut b = self.to_builder();
        b.selector(name, parents, table);
        b.build()
    }

    /// Drops the selector variable (no-op result when there is none).
    pub fn without_selector(&self) -> Scm {
        let Some(s) = self.selector else {
            return self.clone();
        };
        let mut b = ScmBuilder::new();
        for (id, v) in self.vars.iter().enumerate() {
            if id == s {
                continue;
            }
            match v.kind {
                Kind::Endogenous => b.endogenous(&v.name, v.cardinality),
                Kind::Exogenous => b.exogenous(&v.name, v.cardinality),
            };
        }
        for eq in self.equations.iter().flatten() {
            if eq.child == s {
                continue;
            }
            let parents: Vec<&str> = eq.parents.iter().map(|&p| self.vars[p].name.as_str()).collect();
            b.equation(&self.vars[eq.child].name, &parents, eq.table.clone());
        }
        for u in self.exogenous_ids() {
            if let Some(p) = &self.pmfs[u] {
                b.pmf(&self.vars[u].name, p.clone());
            }
        }
        b.build().expect("removing a selector cannot invalidate the model")
    }

    fn to_builder(&self) -> ScmBuilder {
        let mut b = ScmBuilder::new();
        for v in &self.vars {
            match v.kind {
                Kind::Endogenous => b.endogenous(&v.name, v.cardinality),
                Kind::Exogenous => b.exogenous(&v.name, v.cardinality),
            };
        }
        for eq in self.equations.iter().flatten() {
            let parents: Vec<&str> = eq.parents.iter().map(|&p| self.vars[p].name.as_str()).collect();
            b.equation(&self.vars[eq.child].name, &parents, eq.table.clone());
        }
        for u in self.exogenous_ids() {
            if let Some(p) = &self.pmfs[u] {
                b.pmf(&self.vars[u].name, p.clone());
            }
        }
        if let Some(s) = self.selector {
            b.selector = Some(self.vars[s].name.clone());
        }
        b
    }

    /// Force `var` to `state`: its equation becomes a parentless constant and
    /// incoming arcs disappear. Returns a new model; chaining interventions
    /// on distinct variables commutes and repeating one is idempotent.
    pub fn intervene(&self, var: VarId, state: usize) -> Result<Scm> {
        if self.vars[var].kind != Kind::Endogenous {
            return Err(Error::InvalidQuery(format!(
                "cannot intervene on exogenous '{}'",
                self.vars[var].name
            )));
        }
        if state >= self.vars[var].cardinality {
            return Err(Error::InvalidQuery(format!(
                "state {state} out of range for '{}'",
                self.vars[var].name
            )));
        }
        let mut out = self.clone();
        out.equations[var] = Some(StructuralEquation {
            child: var,
            parents: Vec::new(),
            table: vec![state],
            intervened: true,
        });
        out.shapes[var] = Some(Shape::new(&[]));
        out.rebuild_adjacency()?;
        Ok(out)
    }

    /// Evaluate all endogenous variables for one joint exogenous state.
    /// `exo_states` is indexed parallel to [`Scm::exogenous_ids`]. The result
    /// is indexed by variable id (exogenous slots carry their given states).
    pub fn evaluate(&self, exo_states: &[usize]) -> Vec<usize> {
        let mut states = vec![0usize; self.vars.len()];
        for (slot, &u) in self.exogenous_ids().iter().enumerate() {
            states[u] = exo_states[slot];
        }
        let mut buf = Vec::new();
        for &v in &self.topo {
            if let (Some(eq), Some(shape)) = (&self.equations[v], &self.shapes[v]) {
                buf.clear();
                buf.extend(eq.parents.iter().map(|&p| states[p]));
                states[v] = eq.eval(shape, &buf);
            }
        }
        states
    }

    /// Whether every endogenous configuration is produced by some joint
    /// exogenous state. Enumerates the joint exogenous space; errors out
    /// above `cap` states.
    pub fn check_joint_surjectivity(&self, cap: u64) -> Result<bool> {
        let exo = self.exogenous_ids();
        let cards: Vec<usize> = exo.iter().map(|&u| self.vars[u].cardinality).collect();
        let mut total: u64 = 1;
        for &c in &cards {
            total = total
                .checked_mul(c as u64)
                .ok_or(Error::EnumerationCapExceeded { states: u64::MAX, cap })?;
            if total > cap {
                return Err(Error::EnumerationCapExceeded { states: total, cap });
            }
        }
        let endo = self.endogenous_ids();
        let endo_cards: Vec<usize> = endo.iter().map(|&v| self.vars[v].cardinality).collect();
        let endo_shape = match Shape::checked(&endo_cards) {
            Some(s) => s,
            // more endogenous configurations than fit in usize — certainly
            // more than `cap` exogenous states can cover
            None => return Ok(false),
        };
        if endo_shape.len() as u64 > total {
            return Ok(false);
        }
        let mut reached = vec![false; endo_shape.len()];
        let mut count = 0usize;
        let exo_shape = Shape::new(&cards);
        let mut key = vec![0usize; endo.len()];
        exo_shape.for_each(|_, exo_states| {
            let states = self.evaluate(exo_states);
            for (i, &v) in endo.iter().enumerate() {
                key[i] = states[v];
            }
            let idx = endo_shape.index_of(&key);
            if !reached[idx] {
                reached[idx] = true;
                count += 1;
            }
        });
        Ok(count == endo_shape.len())
    }
}

/// One node of the endogenous skeleton handed to [`build_conservative`].
#[derive(Debug, Clone)]
pub struct SkeletonNode {
    pub name: String,
    pub cardinality: usize,
    /// Endogenous parents, in the order the equation will list them.
    pub parents: Vec<String>,
}

/// Attach one conservative exogenous parent to every endogenous variable of
/// a bare DAG: exogenous states enumerate every function from the
/// endogenous-parent configurations to the child, so the exogenous
/// cardinality is `card^(∏ parent cards)`. The synthesized parent is named
/// `prefix + name` and listed first in each equation.
pub fn build_conservative(skeleton: &[SkeletonNode], prefix: &str) -> Result<Scm> {
    let mut b = ScmBuilder::new();
    for node in skeleton {
        b.endogenous(&node.name, node.cardinality);
    }
    for node in skeleton {
        let parent_cards: Vec<usize> = node
            .parents
            .iter()
            .map(|p| {
                skeleton
                    .iter()
                    .find(|n| &n.name == p)
                    .map(|n| n.cardinality)
                    .ok_or_else(|| Error::InvalidModel(format!("unknown parent '{p}'")))
            })
            .collect::<Result<_>>()?;
        let shape = Shape::checked(&parent_cards)
            .ok_or_else(|| Error::InvalidModel(format!("parent space of '{}' overflows", node.name)))?;
        let n_configs = shape.len();
        let exo_card = checked_pow(node.cardinality, n_configs).ok_or_else(|| {
            Error::InvalidModel(format!(
                "conservative state space for '{}' overflows ({}^{})",
                node.name, node.cardinality, n_configs
            ))
        })?;
        let exo_name = format!("{prefix}{}", node.name);
        b.exogenous(&exo_name, exo_card);
        // u-major table: entry (u, pc) = digit pc of u in base `cardinality`.
        let mut table = Vec::with_capacity(exo_card * n_configs);
        for u in 0..exo_card {
            for pc in 0..n_configs {
                table.push(digit(u, node.cardinality, pc));
            }
        }
        let mut parents: Vec<&str> = vec![&exo_name];
        parents.extend(node.parents.iter().map(|s| s.as_str()));
        b.equation(&node.name, &parents, table);
    }
    b.build()
}

/// Convenience for binary skeletons: `(name, parents)` pairs.
pub fn binary_skeleton(nodes: &[(&str, &[&str])]) -> Vec<SkeletonNode> {
    nodes
        .iter()
        .map(|(name, parents)| SkeletonNode {
            name: name.to_string(),
            cardinality: 2,
            parents: parents.iter().map(|s| s.to_string()).collect(),
        })
        .collect()
}
