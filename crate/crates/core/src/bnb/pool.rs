use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::expr::NodeContext;

use super::{BnbNode, Strategy};

/// Instance-level features shared by every node's scoring context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreEnv {
    pub root_dual_bound: f64,
    pub num_constraints: usize,
    pub num_variables: usize,
    pub big_m: f64,
}

impl ScoreEnv {
    pub fn context(&self, node: &BnbNode) -> NodeContext {
        NodeContext {
            depth: node.depth,
            best_estimate: node.best_estimate,
            lower_bound: node.lower_bound,
            root_dual_bound: self.root_dual_bound,
            num_constraints: self.num_constraints,
            num_variables: self.num_variables,
            big_m: self.big_m,
        }
    }
}

/// Queue key: score, then creation id. Distinct nodes never compare equal.
#[derive(Debug, Clone, Copy)]
struct Key(f64, usize);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// The open nodes, ordered by the strategy's score (smaller is better).
#[derive(Debug, Clone)]
pub struct NodePool {
    strategy: Strategy,
    env: ScoreEnv,
    nodes: BTreeMap<Key, BnbNode>,
    /// Children of the most recently expanded node (depth-first preference).
    recent: Vec<Key>,
}

impl NodePool {
    pub fn new(strategy: Strategy, env: ScoreEnv) -> Self {
        NodePool {
            strategy,
            env,
            nodes: BTreeMap::new(),
            recent: Vec::new(),
        }
    }

    pub fn score(&self, node: &BnbNode) -> f64 {
        match &self.strategy {
            Strategy::LbBfs => node.lower_bound,
            Strategy::BeBfs | Strategy::BeDfs => node.best_estimate,
            Strategy::ScoreBfs(expr) => expr.evaluate(&self.env.context(node)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn push(&mut self, node: BnbNode) {
        let key = Key(self.score(&node), node.id);
        let prev = self.nodes.insert(key, node);
        debug_assert!(prev.is_none(), "duplicate node id");
    }

    /// Marks `ids` as the children of the node just expanded.
    pub fn set_recent_children(&mut self, children: &[&BnbNode]) {
        self.recent = children.iter().map(|n| Key(self.score(n), n.id)).collect();
    }

    /// Removes and returns the next node to process.
    pub fn next_node(&mut self) -> Option<BnbNode> {
        let recent = std::mem::take(&mut self.recent);
        if matches!(self.strategy, Strategy::BeDfs) {
            if let Some(key) = recent.into_iter().filter(|k| self.nodes.contains_key(k)).min() {
                return self.nodes.remove(&key);
            }
        }
        self.nodes.pop_first().map(|(_, n)| n)
    }

    /// Smallest LP bound among open nodes.
    pub fn min_lower_bound(&self) -> Option<f64> {
        self.nodes
            .values()
            .map(|n| n.lower_bound)
            .min_by(|a, b| a.total_cmp(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn node(id: usize, z: f64, depth: usize, be: f64) -> BnbNode {
        BnbNode {
            id,
            depth,
            bound_changes: Vec::new(),
            lower_bound: z,
            frac: vec![(0, 0.5)],
            best_estimate: be,
            x: Vec::new(),
        }
    }

    fn env() -> ScoreEnv {
        ScoreEnv {
            root_dual_bound: 0.0,
            num_constraints: 1,
            num_variables: 1,
            big_m: 1e8,
        }
    }

    #[test]
    fn lb_bfs_takes_minimum() {
        let mut p = NodePool::new(Strategy::LbBfs, env());
        for (id, z) in [7.0, 3.0, 5.0].into_iter().enumerate() {
            p.push(node(id, z, 1, 0.0));
        }
        assert_eq!(p.next_node().unwrap().lower_bound, 3.0);
    }

    #[test]
    fn depth_first_expression_prefers_deeper() {
        let s = Strategy::ScoreBfs(parse("(sub lb (mul bigM depth))").unwrap());
        let mut p = NodePool::new(s, env());
        p.push(node(0, 4.0, 0, 0.0));
        p.push(node(1, 5.0, 1, 0.0));
        let n = p.next_node().unwrap();
        assert_eq!((n.lower_bound, n.depth), (5.0, 1));
    }

    #[test]
    fn be_dfs_prefers_recent_children() {
        let mut p = NodePool::new(Strategy::BeDfs, env());
        let shallow = node(0, 1.0, 1, 2.0);
        let c1 = node(1, 3.0, 2, 6.0);
        let c2 = node(2, 3.0, 2, 5.0);
        p.push(shallow);
        p.push(c1.clone());
        p.push(c2.clone());
        p.set_recent_children(&[&c1, &c2]);
        assert_eq!(p.next_node().unwrap().id, 2);
        // Preference lasts for one selection only.
        assert_eq!(p.next_node().unwrap().id, 0);

        let mut p = NodePool::new(Strategy::BeBfs, env());
        p.push(node(0, 1.0, 1, 2.0));
        p.push(c1.clone());
        p.set_recent_children(&[&c1]);
        assert_eq!(p.next_node().unwrap().id, 0);
    }

    #[test]
    fn ties_break_by_creation_id() {
        let mut p = NodePool::new(Strategy::LbBfs, env());
        p.push(node(5, 1.0, 0, 0.0));
        p.push(node(2, 1.0, 0, 0.0));
        p.push(node(9, 1.0, 0, 0.0));
        let order: Vec<usize> = std::iter::from_fn(|| p.next_node().map(|n| n.id)).collect();
        assert_eq!(order, vec![2, 5, 9]);
    }
}
