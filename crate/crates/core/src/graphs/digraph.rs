use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{ConeMap, Staged};

/// A directed graph on `{0, .., n-1}` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Digraph {
    n: usize,
    succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        for (i, j) in arcs {
            succ[i].push(j);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Digraph { n, succ }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.succ[i].binary_search(&j).is_ok()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.succ.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j))).collect()
    }
}

/// `G(f)`: arc `(i, j)` when `f(ω_{j})_i = ∞`, self-loops included.
pub fn digraph_of(f: &dyn ConeMap) -> Digraph {
    let n = f.dim();
    let cols: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut x = vec![Staged::ONE; n];
            x[j] = Staged::Inf(0);
            f.eval_staged(&x).iter().enumerate().filter(|(_, v)| v.is_inf()).map(|(i, _)| i).collect()
        })
        .collect();
    let arcs = cols.iter().enumerate().flat_map(|(j, rows)| rows.iter().map(move |&i| (i, j)));
    Digraph::from_arcs(n, arcs)
}

/// Strongly connected components ordered so that arcs only go from later
/// components to earlier ones. Final classes therefore come first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// No arc leaves the component.
    pub is_final: Vec<bool>,
    /// Gcd of cycle lengths; `None` for a single vertex without a loop.
    pub cyclicity: Vec<Option<usize>>,
}

impl SccDecomposition {
    pub fn final_classes(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&c| self.is_final[c]).collect()
    }

    pub fn unique_final_class(&self) -> Option<usize> {
        match self.final_classes().as_slice() {
            [c] => Some(*c),
            _ => None,
        }
    }

    pub fn is_primitive(&self, c: usize) -> bool {
        self.cyclicity[c] == Some(1)
    }
}

/// Tarjan's algorithm without recursion, followed by a period computation
/// per component.
pub fn scc_decompose(g: &Digraph) -> SccDecomposition {
    let n = g.n();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(top) = call.last_mut() {
            let v = top.0;
            let succ = g.successors(v);
            if top.1 < succ.len() {
                let w = succ[top.1];
                top.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }

    let mut component_of = vec![0; n];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let is_final = components
        .iter()
        .enumerate()
        .map(|(c, comp)| comp.iter().all(|&v| g.successors(v).iter().all(|&w| component_of[w] == c)))
        .collect();
    let cyclicity = components.iter().enumerate().map(|(c, comp)| period(g, comp, &component_of, c)).collect();
    SccDecomposition { components, component_of, is_final, cyclicity }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn period(g: &Digraph, comp: &[usize], component_of: &[usize], c: usize) -> Option<usize> {
    let root = comp[0];
    let mut level = std::collections::HashMap::new();
    level.insert(root, 0usize);
    let mut queue = std::collections::VecDeque::from([root]);
    let mut d = 0;
    let mut has_arc = false;
    while let Some(v) = queue.pop_front() {
        let lv = level[&v];
        for &w in g.successors(v) {
            if component_of[w] != c {
                continue;
            }
            has_arc = true;
            match level.get(&w) {
                Some(&lw) => d = gcd(d, (lv + 1).abs_diff(lw)),
                None => {
                    level.insert(w, lv + 1);
                    queue.push_back(w);
                }
            }
        }
    }
    has_arc.then_some(d)
}
