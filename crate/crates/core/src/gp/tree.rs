use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FunctionSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Func(FunctionSymbol),
    /// Index into the terminal set (liquid item or raw input).
    Leaf(u32),
}

impl Node {
    #[inline]
    pub fn arity(self) -> usize {
        match self {
            Node::Func(s) => s.arity(),
            Node::Leaf(_) => 0,
        }
    }
}

/// Expression tree stored in prefix order. Each subtree occupies a
/// contiguous range of `nodes`, which makes subtree swaps plain splices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GpTree {
    nodes: Vec<Node>,
}

impl GpTree {
    pub fn leaf(index: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf(index as u32)],
        }
    }

    pub fn apply(symbol: FunctionSymbol, children: Vec<GpTree>) -> Result<Self> {
        if children.len() != symbol.arity() {
            return Err(Error::Arity {
                symbol,
                expected: symbol.arity(),
                got: children.len(),
            });
        }
        let mut nodes = vec![Node::Func(symbol)];
        for c in children {
            nodes.extend(c.nodes);
        }
        Ok(Self { nodes })
    }

    /// Accepts a prefix-order node sequence if it encodes exactly one tree.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let mut open = 1usize;
        for (i, n) in nodes.iter().enumerate() {
            if open == 0 {
                return Err(Error::usage(format!("trailing nodes after position {i}")));
            }
            open = open - 1 + n.arity();
        }
        if open != 0 || nodes.is_empty() {
            return Err(Error::usage("node sequence is not a complete tree"));
        }
        Ok(Self { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        debug_assert!(Self::from_nodes(nodes.clone()).is_ok());
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of levels; a lone leaf has height 1.
    pub fn height(&self) -> usize {
        let mut stack: Vec<usize> = Vec::with_capacity(16);
        for n in self.nodes.iter().rev() {
            let h = match n.arity() {
                0 => 1,
                a => {
                    let mut best = 0;
                    for _ in 0..a {
                        best = best.max(stack.pop().expect("well-formed tree"));
                    }
                    best + 1
                }
            };
            stack.push(h);
        }
        stack.pop().unwrap_or(0)
    }

    /// One past the last node of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        let mut open = 1usize;
        let mut i = start;
        while open > 0 {
            open = open - 1 + self.nodes[i].arity();
            i += 1;
        }
        i
    }

    pub fn subtree(&self, start: usize) -> GpTree {
        Self {
            nodes: self.nodes[start..self.subtree_end(start)].to_vec(),
        }
    }

    /// Copy of `self` with the subtree at `start` replaced by `with`.
    pub fn replace_subtree(&self, start: usize, with: &[Node]) -> GpTree {
        let end = self.subtree_end(start);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - start) + with.len());
        nodes.extend_from_slice(&self.nodes[..start]);
        nodes.extend_from_slice(with);
        nodes.extend_from_slice(&self.nodes[end..]);
        Self { nodes }
    }

    /// Depth of node `index` counted from the root at depth 1.
    pub fn depth_of(&self, index: usize) -> usize {
        // Walk the prefix order keeping the remaining child count per level.
        let mut pending: Vec<usize> = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if i == index {
                return pending.len() + 1;
            }
            match n.arity() {
                0 => {
                    while let Some(top) = pending.last_mut() {
                        *top -= 1;
                        if *top == 0 {
                            pending.pop();
                        } else {
                            break;
                        }
                    }
                }
                a => pending.push(a),
            }
        }
        panic!("node index {index} out of range");
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf(i) => Some(*i as usize),
            Node::Func(_) => None,
        })
    }

    pub fn max_leaf(&self) -> Option<usize> {
        self.leaves().max()
    }

    pub fn symbols(&self) -> impl Iterator<Item = FunctionSymbol> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Func(s) => Some(*s),
            Node::Leaf(_) => None,
        })
    }

    /// Checks the height limit and terminal bounds.
    pub fn validate(&self, max_height: usize, terminal_count: usize) -> Result<()> {
        if let Some(index) = self.leaves().find(|&i| i >= terminal_count) {
            return Err(Error::TerminalOutOfRange {
                index,
                count: terminal_count,
            });
        }
        let h = self.height();
        if h > max_height {
            return Err(Error::usage(format!("tree height {h} exceeds limit {max_height}")));
        }
        Ok(())
    }
}

impl fmt::Display for GpTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &GpTree, i: usize, f: &mut fmt::Formatter<'_>) -> Result<usize, fmt::Error> {
            match t.nodes[i] {
                Node::Leaf(j) => {
                    write!(f, "t{j}")?;
                    Ok(i + 1)
                }
                Node::Func(s) => {
                    write!(f, "{s}(")?;
                    let mut next = i + 1;
                    for c in 0..s.arity() {
                        if c > 0 {
                            f.write_str(", ")?;
                        }
                        next = go(t, next, f)?;
                    }
                    f.write_str(")")?;
                    Ok(next)
                }
            }
        }
        go(self, 0, f).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FunctionSymbol::*;

    fn sample() -> GpTree {
        // AND(OR(t0, t1), t2)
        GpTree::apply(
            And,
            vec![
                GpTree::apply(Or, vec![GpTree::leaf(0), GpTree::leaf(1)]).unwrap(),
                GpTree::leaf(2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn shape_queries() {
        let t = sample();
        assert_eq!(t.len(), 5);
        assert_eq!(t.height(), 3);
        assert_eq!(t.subtree_end(1), 4);
        assert_eq!(t.subtree(1).to_string(), "OR(t0, t1)");
        assert_eq!(t.to_string(), "AND(OR(t0, t1), t2)");
        assert_eq!(t.max_leaf(), Some(2));
        assert_eq!(GpTree::leaf(4).height(), 1);
        let depths: Vec<_> = (0..t.len()).map(|i| t.depth_of(i)).collect();
        assert_eq!(depths, vec![1, 2, 3, 3, 2]);
    }

    #[test]
    fn replace_subtree_splices() {
        let t = sample();
        let r = t.replace_subtree(1, &[Node::Leaf(7)]);
        assert_eq!(r.to_string(), "AND(t7, t2)");
        assert_eq!(t.replace_subtree(0, t.nodes()), t);
    }

    #[test]
    fn from_nodes_rejects_malformed() {
        assert!(GpTree::from_nodes(vec![]).is_err());
        assert!(GpTree::from_nodes(vec![Node::Func(And), Node::Leaf(0)]).is_err());
        assert!(GpTree::from_nodes(vec![Node::Leaf(0), Node::Leaf(1)]).is_err());
        assert!(GpTree::from_nodes(vec![Node::Func(Sin), Node::Leaf(0)]).is_ok());
    }

    #[test]
    fn validate_bounds() {
        let t = sample();
        assert!(t.validate(3, 3).is_ok());
        assert!(matches!(t.validate(3, 2), Err(Error::TerminalOutOfRange { index: 2, .. })));
        assert!(t.validate(2, 3).is_err());
    }
}
