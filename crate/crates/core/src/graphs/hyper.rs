use std::collections::HashMap;
use std::sync::Mutex;

use crate::cone::{ConeMap, CoreError, Pole, SharedMap, Staged, SubsetMask, MAX_MASK_DIM};

/// Memoised oracle for one of the two boundary hypergraphs of a map.
///
/// With `Pole::Zero` it answers for `H⁻₀(f)`: `(T, {j})` is a hyperarc when
/// `j ∉ T` and `f(e_{[n]∖T})_j = 0`. With `Pole::Inf` it answers for
/// `H⁺∞(f)`: `f(ω_T)_j = ∞`.
#[derive(Debug)]
pub struct HypergraphProbe {
    map: SharedMap,
    pole: Pole,
    cache: Mutex<HashMap<u32, u32>>,
}

impl HypergraphProbe {
    pub fn new(map: SharedMap, pole: Pole) -> Result<Self, CoreError> {
        let n = map.dim();
        if n > MAX_MASK_DIM {
            return Err(CoreError::DimensionTooLarge { n, max: MAX_MASK_DIM });
        }
        Ok(HypergraphProbe { map, pole, cache: Mutex::new(HashMap::new()) })
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn pole(&self) -> Pole {
        self.pole
    }

    /// True when answers come from numeric growth estimates.
    pub fn is_heuristic(&self) -> bool {
        !self.map.is_exact()
    }

    /// Heads `j ∉ T` of hyperarcs with tail `T`.
    pub fn hyperarc_targets(&self, tail: SubsetMask) -> SubsetMask {
        let n = self.dim();
        if let Some(&bits) = self.cache.lock().unwrap().get(&tail.bits()) {
            return SubsetMask::new(n, bits).expect("cached mask");
        }
        let x: Vec<Staged> = (0..n).map(|i| if tail.contains(i) { self.pole.at(0) } else { Staged::ONE }).collect();
        let y = self.map.eval_staged(&x);
        let mut out = SubsetMask::empty(n);
        for (j, v) in y.iter().enumerate() {
            if !tail.contains(j) && self.pole.matches(*v) {
                out = out.with(j);
            }
        }
        self.cache.lock().unwrap().insert(tail.bits(), out.bits());
        out
    }

    /// Smallest invariant superset of `j`.
    pub fn reach(&self, j: SubsetMask) -> SubsetMask {
        let mut s = j;
        loop {
            let t = self.hyperarc_targets(s);
            if t.is_empty() {
                return s;
            }
            s = s.union(t);
        }
    }

    pub fn is_invariant(&self, i: SubsetMask) -> bool {
        self.hyperarc_targets(i).is_empty()
    }

    /// Nonempty proper invariant subsets, by size.
    pub fn invariant_sets(&self) -> Vec<SubsetMask> {
        SubsetMask::proper_subsets_by_size(self.dim()).into_iter().filter(|&m| self.is_invariant(m)).collect()
    }

    /// Hyperarcs `(T, j)` whose tail is inclusion-minimal for head `j`.
    ///
    /// Every tail is scanned when `n <= full_scan`; otherwise only
    /// singletons, complements of singletons and already cached tails.
    pub fn minimal_hyperarcs(&self, full_scan: usize) -> Vec<(SubsetMask, usize)> {
        let n = self.dim();
        let tails: Vec<SubsetMask> = if n <= full_scan {
            SubsetMask::proper_subsets_by_size(n)
        } else {
            let mut t: Vec<SubsetMask> = (0..n).map(|i| SubsetMask::singleton(n, i)).collect();
            t.extend((0..n).map(|i| SubsetMask::singleton(n, i).complement()));
            t.extend(self.cache.lock().unwrap().keys().map(|&b| SubsetMask::new(n, b).expect("cached mask")));
            t.retain(|m| m.is_proper_nonempty());
            t.sort_by_key(|m| (m.count(), m.bits()));
            t.dedup();
            t
        };
        let mut out = Vec::new();
        for &tail in &tails {
            let heads = self.hyperarc_targets(tail);
            for j in heads.indices() {
                let minimal = tail.indices().into_iter().all(|i| !self.hyperarc_targets(tail.without(i)).contains(j));
                if minimal {
                    out.push((tail, j));
                }
            }
        }
        out
    }
}

/// `{j}` reachable from the empty set in `H⁻₀(f)`: the coordinates that
/// vanish under iteration from the interior. Works for any dimension.
pub fn lower_collapse_set(f: &dyn ConeMap) -> Vec<bool> {
    let n = f.dim();
    let mut gone = vec![false; n];
    loop {
        let x: Vec<Staged> = gone.iter().map(|&g| if g { Staged::Zero(0) } else { Staged::ONE }).collect();
        let y = f.eval_staged(&x);
        let mut grew = false;
        for j in 0..n {
            if !gone[j] && y[j].is_zero() {
                gone[j] = true;
                grew = true;
            }
        }
        if !grew {
            return gone;
        }
    }
}
