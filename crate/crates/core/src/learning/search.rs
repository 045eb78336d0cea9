//! Constrained hill climbing over DAGs with tabu moves and random restarts.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Dag, KnowledgeConstraints};
use crate::pipeline::DiscretizedDataset;

use super::counts::check_alignment;
use super::score::{bic_score, node_score, ScoredStructure};
use super::LearningError;

/// Improvements below this are treated as ties.
const IMPROVE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_parents: usize,
    pub rng_seed: u64,
    pub tabu_length: usize,
    pub max_iters_per_restart: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 5,
            max_parents: 4,
            rng_seed: 0,
            tabu_length: 10,
            max_iters_per_restart: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Op {
    Add,
    Delete,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Move {
    op: Op,
    parent: usize,
    child: usize,
}

impl Move {
    fn inverse(self) -> Move {
        match self.op {
            Op::Add => Move { op: Op::Delete, ..self },
            Op::Delete => Move { op: Op::Add, ..self },
            Op::Reverse => Move {
                op: Op::Reverse,
                parent: self.child,
                child: self.parent,
            },
        }
    }
}

struct Searcher<'a> {
    data: &'a DiscretizedDataset,
    cards: Vec<usize>,
    n: usize,
    allowed: Vec<bool>,
    forced: Vec<bool>,
    max_parents: usize,
    /// Node names ranked lexicographically, for tie-breaks.
    name_rank: Vec<usize>,
    cache: HashMap<(usize, Vec<usize>), f64>,
}

impl Searcher<'_> {
    fn family(&mut self, node: usize, parents: &[usize]) -> f64 {
        if let Some(&s) = self.cache.get(&(node, parents.to_vec())) {
            return s;
        }
        let s = node_score(self.data, node, parents, &self.cards);
        self.cache.insert((node, parents.to_vec()), s);
        s
    }

    fn with_parent(dag: &Dag, child: usize, extra: usize) -> Vec<usize> {
        let mut ps = dag.parents_of(child).to_vec();
        let at = ps.binary_search(&extra).unwrap_err();
        ps.insert(at, extra);
        ps
    }

    fn without_parent(dag: &Dag, child: usize, gone: usize) -> Vec<usize> {
        dag.parents_of(child).iter().copied().filter(|&p| p != gone).collect()
    }

    fn legal(&self, dag: &Dag, m: Move) -> bool {
        let (p, c) = (m.parent, m.child);
        let idx = p * self.n + c;
        match m.op {
            Op::Add => {
                !dag.has_edge_idx(p, c)
                    && self.allowed[idx]
                    && dag.parents_of(c).len() < self.max_parents
                    && !dag.reaches(c, p)
            }
            Op::Delete => dag.has_edge_idx(p, c) && !self.forced[idx],
            Op::Reverse => {
                if !dag.has_edge_idx(p, c)
                    || self.forced[idx]
                    || !self.allowed[c * self.n + p]
                    || dag.parents_of(p).len() >= self.max_parents
                {
                    return false;
                }
                // c -> p closes a cycle iff p still reaches c without the edge
                let mut tmp = dag.clone();
                tmp.delete_edge(p, c).expect("edge present");
                !tmp.reaches(p, c)
            }
        }
    }

    fn delta(&mut self, dag: &Dag, m: Move) -> f64 {
        let (p, c) = (m.parent, m.child);
        let old_c = self.family(c, dag.parents_of(c));
        match m.op {
            Op::Add => self.family(c, &Self::with_parent(dag, c, p)) - old_c,
            Op::Delete => self.family(c, &Self::without_parent(dag, c, p)) - old_c,
            Op::Reverse => {
                let old_p = self.family(p, dag.parents_of(p));
                self.family(c, &Self::without_parent(dag, c, p)) - old_c
                    + self.family(p, &Self::with_parent(dag, p, c))
                    - old_p
            }
        }
    }

    fn candidates(&self, dag: &Dag) -> Vec<Move> {
        let mut out = Vec::new();
        for p in 0..self.n {
            for c in 0..self.n {
                if p == c {
                    continue;
                }
                for op in [Op::Add, Op::Delete, Op::Reverse] {
                    let m = Move { op, parent: p, child: c };
                    if self.legal(dag, m) {
                        out.push(m);
                    }
                }
            }
        }
        out
    }

    /// Order for equal deltas: operator, then parent name, then child name.
    fn tie_key(&self, m: Move) -> (Op, usize, usize) {
        (m.op, self.name_rank[m.parent], self.name_rank[m.child])
    }

    fn apply(dag: &mut Dag, m: Move) {
        match m.op {
            Op::Add => dag.insert_edge(m.parent, m.child),
            Op::Delete => dag.delete_edge(m.parent, m.child),
            Op::Reverse => dag
                .delete_edge(m.parent, m.child)
                .and_then(|_| dag.insert_edge(m.child, m.parent)),
        }
        .expect("move was checked legal");
    }

    fn total(&mut self, dag: &Dag) -> f64 {
        (0..self.n).map(|i| self.family(i, dag.parents_of(i))).sum()
    }

    fn perturb(&self, dag: &mut Dag, rng: &mut ChaCha8Rng, steps: usize) {
        for _ in 0..steps {
            let moves = self.candidates(dag);
            if moves.is_empty() {
                return;
            }
            let m = moves[rng.random_range(0..moves.len())];
            Self::apply(dag, m);
        }
    }

    fn climb(&mut self, start: Dag, cfg: &SearchConfig) -> (Dag, f64) {
        let mut dag = start;
        let mut score = self.total(&dag);
        let mut best = (dag.clone(), score);
        let mut tabu: Vec<Move> = Vec::new();
        let mut stale = 0usize;
        for _ in 0..cfg.max_iters_per_restart {
            let mut chosen: Option<(Move, f64)> = None;
            for m in self.candidates(&dag) {
                let d = self.delta(&dag, m);
                let is_tabu = tabu.contains(&m);
                if is_tabu && score + d <= best.1 + IMPROVE_EPS {
                    continue;
                }
                let better = match chosen {
                    None => true,
                    Some((cm, cd)) => match d.partial_cmp(&cd).unwrap_or(Ordering::Equal) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => self.tie_key(m) < self.tie_key(cm),
                    },
                };
                if better {
                    chosen = Some((m, d));
                }
            }
            let Some((m, d)) = chosen else { break };
            if d > IMPROVE_EPS {
                stale = 0;
            } else if stale < cfg.tabu_length {
                stale += 1;
            } else {
                break;
            }
            Self::apply(&mut dag, m);
            score += d;
            if cfg.tabu_length > 0 {
                tabu.push(m.inverse());
                if tabu.len() > cfg.tabu_length {
                    tabu.remove(0);
                }
            }
            if score > best.1 + IMPROVE_EPS {
                best = (dag.clone(), score);
            }
        }
        best
    }
}

/// Best-scoring constraint-compliant DAG found over all restarts.
///
/// Each restart starts from the forced edges; restarts after the first
/// first apply random legal moves drawn from a generator seeded with
/// `rng_seed + restart`. Equal scores keep the earlier restart.
pub fn learn_structure(
    data: &DiscretizedDataset,
    kc: &KnowledgeConstraints,
    cfg: &SearchConfig,
) -> Result<ScoredStructure, LearningError> {
    if cfg.restarts == 0 || cfg.max_parents == 0 {
        return Err(LearningError::InvalidConfig(
            "restarts and max_parents must be at least 1".into(),
        ));
    }
    if data.is_empty() {
        return Err(LearningError::EmptyData);
    }
    let names: Vec<String> = data.catalog().names().map(String::from).collect();
    let empty = Dag::new(names.clone())?;
    check_alignment(&empty, data)?;
    let mask = kc.resolve(&empty)?;
    let n = names.len();

    let mut skeleton = empty.clone();
    for (p, c) in mask.forced_edges() {
        skeleton
            .insert_edge(p, c)
            .map_err(|e| LearningError::InfeasibleConstraints(e.to_string()))?;
    }
    for (c, name) in names.iter().enumerate() {
        if skeleton.parents_of(c).len() > cfg.max_parents {
            return Err(LearningError::InfeasibleConstraints(format!(
                "{} has {} forced parents but max_parents is {}",
                name,
                skeleton.parents_of(c).len(),
                cfg.max_parents
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut name_rank = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        name_rank[i] = rank;
    }
    let mut searcher = Searcher {
        data,
        cards: data.catalog().cardinalities(),
        n,
        allowed: (0..n * n).map(|k| mask.allowed(k / n, k % n)).collect(),
        forced: (0..n * n).map(|k| mask.forced(k / n, k % n)).collect(),
        max_parents: cfg.max_parents,
        name_rank,
        cache: HashMap::new(),
    };

    let mut best: Option<(Dag, f64)> = None;
    for r in 0..cfg.restarts {
        let mut start = skeleton.clone();
        if r > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(r as u64));
            searcher.perturb(&mut start, &mut rng, n.max(2));
        }
        let (dag, score) = searcher.climb(start, cfg);
        if best.as_ref().is_none_or(|(_, s)| score > *s + IMPROVE_EPS) {
            best = Some((dag, score));
        }
    }
    let (dag, _) = best.expect("at least one restart");
    bic_score(&dag, data)
}
