//! Dense tabular factors and variable elimination.
//!
//! Factors carry a sorted variable scope so products and marginalizations
//! are canonical; elimination order is min-fill with smallest-id tie-break,
//! which keeps every computation deterministic across runs and thread
//! counts. Values are plain `f64` probabilities (not log-space): the models
//! in scope are small and the EM layer re-normalizes at every step.

use crate::index::Shape;

/// A nonnegative table over a sorted scope of variable ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    shape: Shape,
    values: Vec<f64>,
}

impl Factor {
    /// `vars` must be strictly ascending; `values` row-major with the last
    /// variable fastest.
    pub fn new(vars: Vec<usize>, cards: &[usize], values: Vec<f64>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]), "scope must be sorted");
        let shape = Shape::new(cards);
        debug_assert_eq!(shape.len(), values.len());
        Factor { vars, shape, values }
    }

    pub fn constant(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            shape: Shape::new(&[]),
            values: vec![value],
        }
    }

    /// Marginal factor holding a PMF for one variable.
    pub fn from_pmf(var: usize, pmf: &[f64]) -> Self {
        Factor::new(vec![var], &[pmf.len()], pmf.to_vec())
    }

    /// Indicator factor of a deterministic equation: scope is
    /// `parents ∪ {child}` (re-sorted), value 1 exactly where
    /// `table[parent configuration] == child state`.
    ///
    /// `parents` lists (id, cardinality) in the equation's scope order and
    /// `table` is row-major over that order, last parent fastest.
    pub fn from_table(
        child: usize,
        child_card: usize,
        parents: &[(usize, usize)],
        table: &[usize],
    ) -> Self {
        let mut scope: Vec<(usize, usize)> = parents.to_vec();
        scope.push((child, child_card));
        scope.sort_unstable_by_key(|&(v, _)| v);
        let vars: Vec<usize> = scope.iter().map(|&(v, _)| v).collect();
        let cards: Vec<usize> = scope.iter().map(|&(_, c)| c).collect();
        let shape = Shape::new(&cards);
        let parent_shape = Shape::new(&parents.iter().map(|&(_, c)| c).collect::<Vec<_>>());

        let child_pos = vars.binary_search(&child).expect("child in scope");
        let parent_pos: Vec<usize> = parents
            .iter()
            .map(|&(p, _)| vars.binary_search(&p).expect("parent in scope"))
            .collect();

        let mut values = vec![0.0; shape.len()];
        let mut states = vec![0usize; vars.len()];
        let mut parent_states = vec![0usize; parents.len()];
        for (idx, v) in values.iter_mut().enumerate() {
            shape.decode_into(idx, &mut states);
            for (slot, &pos) in parent_pos.iter().enumerate() {
                parent_states[slot] = states[pos];
            }
            if table[parent_shape.index_of(&parent_states)] == states[child_pos] {
                *v = 1.0;
            }
        }
        Factor { vars, shape, values }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn card_of(&self, var: usize) -> Option<usize> {
        self.vars
            .binary_search(&var)
            .ok()
            .map(|i| self.shape.cards()[i])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scalе to total mass 1; a zero-mass factor is left untouched so the
    /// caller can detect impossible evidence from `sum()`.
    pub fn normalized(mut self) -> Self {
        let s = self.sum();
        if s > 0.0 {
            for v in &mut self.values {
                *v /= s;
            }
        }
        self
    }

    /// Pointwise product over the union scope.
    pub fn product(&self, other: &Factor) -> Factor {
        // merge scopes
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let mut cards = Vec::with_capacity(vars.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < other.vars.len() {
            let take_left = match (self.vars.get(i), other.vars.get(j)) {
                (Some(&a), Some(&b)) => a <= b,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => unreachable!(),
            };
            if take_left {
                let v = self.vars[i];
                vars.push(v);
                cards.push(self.shape.cards()[i]);
                i += 1;
                if other.vars.get(j) == Some(&v) {
                    debug_assert_eq!(self.shape.cards()[i - 1], other.shape.cards()[j]);
                    j += 1;
                }
            } else {
                vars.push(other.vars[j]);
                cards.push(other.shape.cards()[j]);
                j += 1;
            }
        }
        let shape = Shape::new(&cards);

        // per-result-variable strides into each operand (0 when absent)
        let stride_for = |f: &Factor| -> Vec<usize> {
            vars.iter()
                .map(|v| match f.vars.binary_search(v) {
                    Ok(pos) => f.shape.strides()[pos],
                    Err(_) => 0,
                })
                .collect()
        };
        let ls = stride_for(self);
        let rs = stride_for(other);

        let mut values = vec![0.0; shape.len()];
        let mut states = vec![0usize; vars.len()];
        let (mut li, mut ri) = (0usize, 0usize);
        for (idx, out) in values.iter_mut().enumerate() {
            if idx > 0 {
                // odometer increment keeps operand offsets in lockstep
                for pos in (0..vars.len()).rev() {
                    states[pos] += 1;
                    li += ls[pos];
                    ri += rs[pos];
                    if states[pos] < shape.cards()[pos] {
                        break;
                    }
                    li -= ls[pos] * states[pos];
                    ri -= rs[pos] * states[pos];
                    states[pos] = 0;
                }
            }
            *out = self.values[li] * other.values[ri];
        }
        Factor { vars, shape, values }
    }

    /// Marginalize one variable out of the scope.
    pub fn sum_out(&self, var: usize) -> Factor {
        let pos = match self.vars.binary_search(&var) {
            Ok(p) => p,
            Err(_) => return self.clone(),
        };
        let card = self.shape.cards()[pos];
        let stride = self.shape.strides()[pos];
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let mut cards = self.shape.cards().to_vec();
        cards.remove(pos);
        let shape = Shape::new(&cards);
        let mut values = vec![0.0; shape.len()];
        // outer = blocks above `pos`, inner = contiguous run below it
        let outer = self.values.len() / (stride * card);
        for o in 0..outer {
            let base = o * stride * card;
            for s in 0..card {
                let src = base + s * stride;
                let dst = o * stride;
                for t in 0..stride {
                    values[dst + t] += self.values[src + t];
                }
            }
        }
        Factor { vars, shape, values }
    }

    /// Condition on `var = state`, dropping it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let pos = match self.vars.binary_search(&var) {
            Ok(p) => p,
            Err(_) => return self.clone(),
        };
        let card = self.shape.cards()[pos];
        debug_assert!(state < card);
        let stride = self.shape.strides()[pos];
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let mut cards = self.shape.cards().to_vec();
        cards.remove(pos);
        let shape = Shape::new(&cards);
        let mut values = Vec::with_capacity(shape.len());
        let block = stride * card;
        let outer = self.values.len() / block;
        for o in 0..outer {
            let src = o * block + state * stride;
            values.extend_from_slice(&self.values[src..src + stride]);
        }
        Factor { vars, shape, values }
    }
}

/// Multiply all factors containing `var`, sum `var` out, and push the
/// result back. Factors not mentioning `var` pass through untouched.
fn eliminate_var(factors: &mut Vec<Factor>, var: usize) {
    let mut bucket: Option<Factor> = None;
    let mut rest = Vec::with_capacity(factors.len());
    for f in factors.drain(..) {
        if f.vars.binary_search(&var).is_ok() {
            bucket = Some(match bucket {
                Some(acc) => acc.product(&f),
                None => f,
            });
        } else {
            rest.push(f);
        }
    }
    if let Some(b) = bucket {
        rest.push(b.sum_out(var));
    }
    *factors = rest;
}

/// Sum-product variable elimination.
///
/// Applies `evidence` as reductions, eliminates every variable outside
/// `keep` (min-fill order, smallest id on ties), and returns the product of
/// what remains: an UNNORMALIZED factor over `keep` whose total mass is the
/// probability of the evidence.
pub fn eliminate(mut factors: Vec<Factor>, keep: &[usize], evidence: &[(usize, usize)]) -> Factor {
    for &(var, state) in evidence {
        for f in &mut factors {
            if f.vars.binary_search(&var).is_ok() {
                *f = f.reduce(var, state);
            }
        }
    }
    factors.retain(|f| !f.vars.is_empty() || f.values[0] != 1.0);

    // all scope variables not kept
    let mut to_eliminate: Vec<usize> = Vec::new();
    for f in &factors {
        for &v in &f.vars {
            if !keep.contains(&v) && !to_eliminate.contains(&v) {
                to_eliminate.push(v);
            }
        }
    }
    to_eliminate.sort_unstable();

    // interaction graph for min-fill scoring
    let mut neighbors: std::collections::BTreeMap<usize, std::collections::BTreeSet<usize>> =
        Default::default();
    let touch = |a: usize, b: usize, nb: &mut std::collections::BTreeMap<usize, std::collections::BTreeSet<usize>>| {
        nb.entry(a).or_default().insert(b);
        nb.entry(b).or_default().insert(a);
    };
    for f in &factors {
        for (i, &a) in f.vars.iter().enumerate() {
            neighbors.entry(a).or_default();
            for &b in &f.vars[i + 1..] {
                touch(a, b, &mut neighbors);
            }
        }
    }

    while !to_eliminate.is_empty() {
        // min-fill: count absent neighbor pairs that eliminating v would connect
        let mut best: Option<(usize, usize)> = None; // (fill, var)
        for &v in &to_eliminate {
            let nb: Vec<usize> = neighbors
                .get(&v)
                .map(|s| s.iter().copied().filter(|n| *n != v).collect())
                .unwrap_or_default();
            let mut fill = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !neighbors[&a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            if best.map_or(true, |(bf, bv)| fill < bf || (fill == bf && v < bv)) {
                best = Some((fill, v));
            }
        }
        let (_, var) = best.expect("nonempty elimination set");
        to_eliminate.retain(|&v| v != var);

        // update the interaction graph: clique the neighborhood, drop var
        let nb: Vec<usize> = neighbors
            .get(&var)
            .map(|s| s.iter().copied().filter(|n| *n != var).collect())
            .unwrap_or_default();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                touch(a, b, &mut neighbors);
            }
        }
        for &n in &nb {
            if let Some(s) = neighbors.get_mut(&n) {
                s.remove(&var);
            }
        }
        neighbors.remove(&var);

        eliminate_var(&mut factors, var);
    }

    let mut result = Factor::constant(1.0);
    for f in &factors {
        result = result.product(f);
    }
    result
}
