//! Row-major configuration indexing over tuples of finite variables.
//!
//! Throughout the crate a *configuration* of variables `(V1, …, Vm)` with
//! cardinalities `(c1, …, cm)` is flattened row-major with the LAST listed
//! variable fastest: `index = ((s1·c2 + s2)·c3 + s3)…`. Structural-equation
//! tables, selector tables and factor storage all share this convention.

/// Strides for a row-major layout (last variable fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    cards: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Shape {
    /// Panics on zero cardinalities; use [`Shape::checked`] for fallible
    /// construction with overflow detection.
    pub fn new(cards: &[usize]) -> Self {
        Self::checked(cards).expect("cardinality product overflows usize")
    }

    pub fn checked(cards: &[usize]) -> Option<Self> {
        let mut strides = vec![0usize; cards.len()];
        let mut len: usize = 1;
        for (i, &c) in cards.iter().enumerate().rev() {
            if c == 0 {
                return None;
            }
            strides[i] = len;
            len = len.checked_mul(c)?;
        }
        Some(Shape { cards: cards.to_vec(), strides, len })
    }

    /// Total number of configurations (the empty tuple has exactly one).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn arity(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn index_of(&self, states: &[usize]) -> usize {
        debug_assert_eq!(states.len(), self.cards.len());
        let mut idx = 0;
        for (i, &s) in states.iter().enumerate() {
            debug_assert!(s < self.cards[i]);
            idx += s * self.strides[i];
        }
        idx
    }

    /// Inverse of [`Shape::index_of`], writing into `out`.
    pub fn decode_into(&self, idx: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.cards.len());
        for (i, &c) in self.cards.iter().enumerate() {
            out[i] = (idx / self.strides[i]) % c;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        self.decode_into(idx, &mut out);
        out
    }

    /// Iterate all configurations in index order, reusing one buffer.
    pub fn for_each(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut states = vec![0usize; self.cards.len()];
        for idx in 0..self.len {
            f(idx, &states);
            // odometer increment, last digit fastest
            for i in (0..states.len()).rev() {
                states[i] += 1;
                if states[i] < self.cards[i] {
                    break;
                }
                states[i] = 0;
            }
        }
    }
}

/// Little-endian digit of `value` in base `base` at position `pos`.
///
/// Used to decode conservative function indices: digit at position `pc`
/// gives the child state assigned to endogenous-parent configuration `pc`.
pub fn digit(value: usize, base: usize, pos: usize) -> usize {
    (value / base.pow(pos as u32)) % base
}

/// `base^exp` with overflow detection (function counts get large fast).
pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
