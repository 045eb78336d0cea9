use std::collections::BTreeMap;

use super::ModelError;

/// Directed acyclic graph over named nodes.
///
/// Nodes keep the order they were given in; parent lists are kept sorted by
/// node index, which is the order CPTs enumerate parent configurations in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// Edgeless graph over `nodes`.
    pub fn new<I, S>(nodes: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(ModelError::DuplicateVariable(n.clone()));
            }
        }
        let parents = vec![Vec::new(); nodes.len()];
        Ok(Dag {
            nodes,
            index,
            parents,
        })
    }

    /// Graph over `nodes` containing `edges`, each checked as it is added.
    pub fn with_edges<I, S, E, T>(nodes: I, edges: E) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (T, T)>,
        T: AsRef<str>,
    {
        let mut dag = Dag::new(nodes)?;
        for (p, c) in edges {
            let (pi, ci) = (dag.index_of(p.as_ref())?, dag.index_of(c.as_ref())?);
            dag.insert_edge(pi, ci)?;
        }
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ModelError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    /// Parent indices of node `i`, ascending.
    pub fn parents_of(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn parent_names(&self, name: &str) -> Result<Vec<&str>, ModelError> {
        let i = self.index_of(name)?;
        Ok(self.parents[i].iter().map(|&p| self.name(p)).collect())
    }

    pub fn children_of(&self, i: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| self.parents[c].binary_search(&i).is_ok())
            .collect()
    }

    pub fn has_edge_idx(&self, parent: usize, child: usize) -> bool {
        self.parents[child].binary_search(&parent).is_ok()
    }

    pub fn has_edge(&self, parent: &str, child: &str) -> bool {
        match (self.index.get(parent), self.index.get(child)) {
            (Some(&p), Some(&c)) => self.has_edge_idx(p, c),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// All edges as index pairs, ordered by (child, parent).
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect()
    }

    /// All edges as name pairs, sorted by (parent, child) name.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut e: Vec<(String, String)> = self
            .edge_indices()
            .into_iter()
            .map(|(p, c)| (self.nodes[p].clone(), self.nodes[c].clone()))
            .collect();
        e.sort();
        e
    }

    /// True if a directed path `from ->* to` exists (a node reaches itself).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let children = self.child_lists();
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &v in &children[u] {
                if v == to {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    fn child_lists(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        children
    }

    /// Whether `parent -> child` can be added without a duplicate, self-loop
    /// or cycle.
    pub fn can_add_idx(&self, parent: usize, child: usize) -> bool {
        parent != child && !self.has_edge_idx(parent, child) && !self.reaches(child, parent)
    }

    pub(crate) fn insert_edge(&mut self, parent: usize, child: usize) -> Result<(), ModelError> {
        if parent == child {
            return Err(ModelError::SelfLoop(self.nodes[parent].clone()));
        }
        if self.has_edge_idx(parent, child) {
            return Err(ModelError::DuplicateEdge(
                self.nodes[parent].clone(),
                self.nodes[child].clone(),
            ));
        }
        if self.reaches(child, parent) {
            return Err(ModelError::Cycle(
                self.nodes[parent].clone(),
                self.nodes[child].clone(),
            ));
        }
        let ps = &mut self.parents[child];
        let pos = ps.partition_point(|&p| p < parent);
        ps.insert(pos, parent);
        Ok(())
    }

    pub(crate) fn delete_edge(&mut self, parent: usize, child: usize) -> Result<(), ModelError> {
        match self.parents[child].binary_search(&parent) {
            Ok(pos) => {
                self.parents[child].remove(pos);
                Ok(())
            }
            Err(_) => Err(ModelError::MissingEdge(
                self.nodes[parent].clone(),
                self.nodes[child].clone(),
            )),
        }
    }

    /// New graph with `parent -> child` added; `self` is left unchanged.
    pub fn add_edge(&self, parent: &str, child: &str) -> Result<Dag, ModelError> {
        let (p, c) = (self.index_of(parent)?, self.index_of(child)?);
        self.add_edge_idx(p, c)
    }

    pub fn add_edge_idx(&self, parent: usize, child: usize) -> Result<Dag, ModelError> {
        let mut next = self.clone();
        next.insert_edge(parent, child)?;
        Ok(next)
    }

    pub fn remove_edge(&self, parent: &str, child: &str) -> Result<Dag, ModelError> {
        let (p, c) = (self.index_of(parent)?, self.index_of(child)?);
        let mut next = self.clone();
        next.delete_edge(p, c)?;
        Ok(next)
    }

    /// New graph with `parent -> child` replaced by `child -> parent`.
    pub fn reverse_edge(&self, parent: &str, child: &str) -> Result<Dag, ModelError> {
        let (p, c) = (self.index_of(parent)?, self.index_of(child)?);
        let mut next = self.clone();
        next.delete_edge(p, c)?;
        next.insert_edge(c, p)?;
        Ok(next)
    }

    /// Kahn's algorithm, smallest ready index first.
    pub fn topological_order(&self) -> Vec<usize> {
        let children = self.child_lists();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..self.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &v in &children[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    ready.insert(v);
                }
            }
        }
        debug_assert_eq!(order.len(), self.len(), "acyclicity invariant broken");
        order
    }

    /// Indices of `seeds` and all their ancestors.
    pub fn ancestral_set(&self, seeds: &[usize]) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(u) = stack.pop() {
            if keep[u] {
                continue;
            }
            keep[u] = true;
            stack.extend(self.parents[u].iter().copied());
        }
        keep
    }
}
