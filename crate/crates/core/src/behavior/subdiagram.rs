use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{desugar, TmModel};

use super::Subdiagram;

/// Default limit on the number of subdiagrams one enumeration may produce.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("more than {cap} subdiagrams within bound {bound}")]
    BoundTooLarge { bound: usize, cap: usize },
}

/// Whether `sub` is non-empty, every arc's endpoints are among its stages,
/// and its stages are weakly connected through its arcs.
pub fn is_connected(model: &TmModel, sub: &Subdiagram) -> bool {
    if sub.stages.is_empty() {
        return false;
    }
    let stages: Vec<_> = sub.stages.iter().collect();
    let index: HashMap<_, _> = stages.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut parent: Vec<usize> = (0..stages.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for id in &sub.arcs {
        let Some(arc) = model.arc(id) else {
            return false;
        };
        let (Some(&a), Some(&b)) = (index.get(arc.source()), index.get(arc.target())) else {
            return false;
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let root = find(&mut parent, 0);
    (0..stages.len()).all(|i| find(&mut parent, i) == root)
}

/// The stage/arc incidence graph: stages are vertices `0..s`, arcs are
/// vertices `s..s+a`, each arc adjacent to its endpoint stages.
struct Incidence {
    stage_count: usize,
    adj: Vec<Vec<usize>>,
    /// Endpoint vertices for each arc vertex.
    ends: Vec<Vec<usize>>,
}

impl Incidence {
    fn build(model: &TmModel) -> (Incidence, Vec<crate::model::StageRef>, Vec<String>) {
        let stages = model.stage_refs();
        let index: HashMap<_, _> = stages
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut arcs = Vec::new();
        let mut ends = Vec::new();
        for a in model.arcs() {
            if let (Some(&s), Some(&t)) = (index.get(a.source()), index.get(a.target())) {
                arcs.push(a.id().to_string());
                let mut e = vec![s, t];
                e.dedup();
                ends.push(e);
            }
        }
        let n = stages.len() + arcs.len();
        let mut adj = vec![Vec::new(); n];
        for (k, e) in ends.iter().enumerate() {
            let v = stages.len() + k;
            for &s in e {
                adj[v].push(s);
                adj[s].push(v);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        (
            Incidence {
                stage_count: stages.len(),
                adj,
                ends,
            },
            stages,
            arcs,
        )
    }

    fn closed(&self, set: &[usize]) -> bool {
        set.iter().all(|&v| {
            v < self.stage_count
                || self.ends[v - self.stage_count]
                    .iter()
                    .all(|e| set.contains(e))
        })
    }
}

struct Search<'a> {
    g: &'a Incidence,
    bound: usize,
    cap: usize,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn extend(
        &mut self,
        sub: &mut Vec<usize>,
        ext: BTreeSet<usize>,
        root: usize,
    ) -> Result<(), ()> {
        if self.g.closed(sub) {
            if self.found.len() == self.cap {
                return Err(());
            }
            let mut s = sub.clone();
            s.sort_unstable();
            self.found.push(s);
        }
        if sub.len() == self.bound {
            return Ok(());
        }
        let mut ext = ext;
        while let Some(w) = ext.pop_first() {
            let mut next = ext.clone();
            for &u in &self.g.adj[w] {
                if u > root && !sub.contains(&u) && !sub.iter().any(|&x| self.g.adj[x].contains(&u))
                {
                    next.insert(u);
                }
            }
            sub.push(w);
            let r = self.extend(sub, next, root);
            sub.pop();
            r?;
        }
        Ok(())
    }
}

/// All connected subdiagrams with at most `max_elements` stages plus arcs,
/// ordered by size and then by element position in the model.
pub fn enumerate_subdiagrams(
    model: &TmModel,
    max_elements: usize,
) -> Result<Vec<Subdiagram>, EnumerateError> {
    enumerate_subdiagrams_capped(model, max_elements, DEFAULT_CAP)
}

pub fn enumerate_subdiagrams_capped(
    model: &TmModel,
    max_elements: usize,
    cap: usize,
) -> Result<Vec<Subdiagram>, EnumerateError> {
    let model = desugar(model);
    let (g, stages, arcs) = Incidence::build(&model);
    let mut search = Search {
        g: &g,
        bound: max_elements,
        cap,
        found: Vec::new(),
    };
    if max_elements > 0 {
        for v in 0..g.adj.len() {
            let ext: BTreeSet<usize> = g.adj[v].iter().copied().filter(|&u| u > v).collect();
            let mut sub = vec![v];
            search
                .extend(&mut sub, ext, v)
                .map_err(|_| EnumerateError::BoundTooLarge {
                    bound: max_elements,
                    cap,
                })?;
        }
    }
    let mut found = search.found;
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found
        .into_iter()
        .map(|set| {
            let mut sub = Subdiagram::default();
            for v in set {
                if v < g.stage_count {
                    sub.stages.insert(stages[v].clone());
                } else {
                    sub.arcs.insert(arcs[v - g.stage_count].clone());
                }
            }
            sub
        })
        .collect())
}
