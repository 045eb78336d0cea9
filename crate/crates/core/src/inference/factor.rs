//! Dense factors over discrete variables.

use crate::model::Cpt;

/// Non-negative table over a set of variables.
///
/// `vars` is kept sorted ascending; `values` is laid out in mixed radix with
/// the first variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// Build from an explicit table. `vars` must be strictly ascending.
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(vars.len(), cards.len());
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        Factor { vars, cards, values }
    }

    /// Factor for `P(node | parents)`; `node` and `parents` are variable
    /// indices and `cpt` is laid out in the order `parents` are given.
    pub fn from_cpt(node: usize, parents: &[usize], cpt: &Cpt) -> Self {
        let mut scope: Vec<(usize, usize)> = parents
            .iter()
            .zip(cpt.parent_cards())
            .map(|(&p, &c)| (p, c))
            .collect();
        scope.push((node, cpt.card()));
        scope.sort_unstable();
        let vars: Vec<usize> = scope.iter().map(|s| s.0).collect();
        let cards: Vec<usize> = scope.iter().map(|s| s.1).collect();
        // position of each scope var within (parents..., node)
        let source_pos: Vec<usize> = vars
            .iter()
            .map(|v| {
                parents
                    .iter()
                    .position(|p| p == v)
                    .unwrap_or(parents.len())
            })
            .collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0usize; vars.len()];
        let mut parent_states = vec![0usize; parents.len()];
        for _ in 0..size {
            let mut state = 0;
            for (k, &pos) in source_pos.iter().enumerate() {
                if pos == parents.len() {
                    state = assign[k];
                } else {
                    parent_states[pos] = assign[k];
                }
            }
            values.push(cpt.prob(&parent_states, state));
            increment(&mut assign, &cards);
        }
        Factor { vars, cards, values }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.binary_search(&var).is_ok()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at a full assignment given in `vars` order.
    pub fn get(&self, assignment: &[usize]) -> f64 {
        let idx = assignment
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s);
        self.values[idx]
    }

    /// Fix `var` to `state`, dropping it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let Ok(k) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let inner: usize = self.cards[k + 1..].iter().product();
        let card = self.cards[k];
        let outer = self.values.len() / (inner * card);
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * card * inner + state * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Factor { vars, cards, values }
    }

    /// Marginalize `var` out.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Ok(k) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let inner: usize = self.cards[k + 1..].iter().product();
        let card = self.cards[k];
        let outer = self.values.len() / (inner * card);
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = o * card * inner + s * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Factor { vars, cards, values }
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let mut cards = Vec::with_capacity(vars.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < other.vars.len() {
            let take_self = j >= other.vars.len()
                || (i < self.vars.len() && self.vars[i] <= other.vars[j]);
            if take_self {
                if j < other.vars.len() && self.vars[i] == other.vars[j] {
                    j += 1;
                }
                vars.push(self.vars[i]);
                cards.push(self.cards[i]);
                i += 1;
            } else {
                vars.push(other.vars[j]);
                cards.push(other.cards[j]);
                j += 1;
            }
        }
        let sa = strides_in(&vars, &self.vars, &self.cards);
        let sb = strides_in(&vars, &other.vars, &other.cards);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // odometer step, updating both source offsets incrementally
            for k in (0..assign.len()).rev() {
                assign[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if assign[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                assign[k] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    /// Divide through by the total mass; returns that mass.
    pub fn normalize(&mut self) -> f64 {
        let z = self.total();
        if z > 0.0 {
            for v in &mut self.values {
                *v /= z;
            }
        }
        z
    }
}

fn increment(assign: &mut [usize], cards: &[usize]) {
    for k in (0..assign.len()).rev() {
        assign[k] += 1;
        if assign[k] < cards[k] {
            return;
        }
        assign[k] = 0;
    }
}

/// Stride of each variable of `target` within a factor over `vars` (0 when absent).
fn strides_in(target: &[usize], vars: &[usize], cards: &[usize]) -> Vec<usize> {
    let mut own = vec![0usize; vars.len()];
    let mut acc = 1;
    for k in (0..vars.len()).rev() {
        own[k] = acc;
        acc *= cards[k];
    }
    target
        .iter()
        .map(|v| vars.binary_search(v).map_or(0, |k| own[k]))
        .collect()
}
