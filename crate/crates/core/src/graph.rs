//! Explicit finite digraph utilities shared by the automata, game and
//! verification modules. Graphs are adjacency lists indexed by `usize`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Strongly connected components (iterative Tarjan). Returns the component
/// index of every node and the number of components. Components are
/// numbered in reverse topological order (sinks first).
pub fn sccs(succ: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0;
    let mut count = 0;
    // (node, next edge offset)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*edge) {
                *edge += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    (comp, count)
}

/// For every component, whether it contains a cycle (more than one node, or
/// a single node with a self-loop).
pub fn cyclic_components(succ: &[Vec<usize>], comp: &[usize], count: usize) -> Vec<bool> {
    let mut size = vec![0usize; count];
    let mut cyclic = vec![false; count];
    for (v, &c) in comp.iter().enumerate() {
        size[c] += 1;
        if succ[v].contains(&v) {
            cyclic[c] = true;
        }
    }
    for c in 0..count {
        if size[c] > 1 {
            cyclic[c] = true;
        }
    }
    cyclic
}

/// Nodes that lie on a cycle through some accepting node.
pub fn on_accepting_cycle(succ: &[Vec<usize>], accepting: &[bool]) -> Vec<bool> {
    let (comp, count) = sccs(succ);
    let cyclic = cyclic_components(succ, &comp, count);
    let mut good = vec![false; count];
    for (v, &c) in comp.iter().enumerate() {
        if accepting[v] && cyclic[c] {
            good[c] = true;
        }
    }
    comp.iter().map(|&c| good[c]).collect()
}

/// Nodes from which some cycle through an accepting node is reachable.
pub fn reaching_accepting_cycle(succ: &[Vec<usize>], accepting: &[bool]) -> Vec<bool> {
    let targets = on_accepting_cycle(succ, accepting);
    backward_reach(succ, &targets)
}

/// Nodes that can reach a node in `targets` (targets included).
pub fn backward_reach(succ: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, ws) in succ.iter().enumerate() {
        for &w in ws {
            pred[w].push(v);
        }
    }
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| targets[v]).collect();
    while let Some(w) = queue.pop_front() {
        for &v in &pred[w] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Nodes reachable from `initials`.
pub fn forward_reach(succ: &[Vec<usize>], initials: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::new();
    for &i in initials {
        if !seen[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Breadth-first shortest path from any of `from` to a node satisfying
/// `goal`, moving only through nodes satisfying `allowed`. The path includes
/// both endpoints.
pub fn bfs_path(
    succ: &[Vec<usize>],
    from: &[usize],
    goal: impl Fn(usize) -> bool,
    allowed: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let mut parent = vec![NONE; succ.len()];
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::new();
    for &s in from {
        if allowed(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = vec![v];
            let mut cur = v;
            while parent[cur] != NONE {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &succ[v] {
            if allowed(w) && !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Searches for a reachable cycle through an accepting node. On success
/// returns `(stem, cycle)` such that `stem · cycle^ω` is an infinite path
/// from one of `initials`, and `cycle[0]` is accepting.
pub fn find_accepting_lasso(
    succ: &[Vec<usize>],
    initials: &[usize],
    accepting: &[bool],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let reach = forward_reach(succ, initials);
    let (comp, count) = sccs(succ);
    let cyclic = cyclic_components(succ, &comp, count);
    let is_target = |v: usize| reach[v] && accepting[v] && cyclic[comp[v]];
    let to_target = bfs_path(succ, initials, is_target, |_| true)?;
    let anchor = *to_target.last().expect("nonempty path");
    let stem = to_target[..to_target.len() - 1].to_vec();

    // Shortest return path to the anchor inside its component.
    let c = comp[anchor];
    let starts: Vec<usize> = succ[anchor]
        .iter()
        .copied()
        .filter(|&w| comp[w] == c)
        .collect();
    let back = bfs_path(succ, &starts, |v| v == anchor, |v| comp[v] == c)?;
    let mut cycle = Vec::with_capacity(back.len());
    cycle.push(anchor);
    cycle.extend_from_slice(&back[..back.len() - 1]);
    Some((stem, cycle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_of_two_cycles_and_a_bridge() {
        // 0 <-> 1 -> 2 <-> 3, 4 isolated
        let g = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let (comp, count) = sccs(&g);
        assert_eq!(count, 3);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[2], comp[3]);
        assert_ne!(comp[0], comp[2]);
        let cyclic = cyclic_components(&g, &comp, count);
        assert!(cyclic[comp[0]] && cyclic[comp[2]] && !cyclic[comp[4]]);
        // sinks first
        assert!(comp[2] < comp[0]);
    }

    #[test]
    fn lasso_search() {
        let g = vec![vec![1], vec![2], vec![1]];
        let (stem, cycle) = find_accepting_lasso(&g, &[0], &[false, false, true]).unwrap();
        assert_eq!(stem, vec![0, 1]);
        assert_eq!(cycle, vec![2, 1]);
        assert!(find_accepting_lasso(&g, &[0], &[true, false, false]).is_none());
        let self_loop = vec![vec![0]];
        let (stem, cycle) = find_accepting_lasso(&self_loop, &[0], &[true]).unwrap();
        assert!(stem.is_empty());
        assert_eq!(cycle, vec![0]);
    }

    #[test]
    fn reaching_cycles() {
        let g = vec![vec![1], vec![1], vec![0]];
        assert_eq!(
            reaching_accepting_cycle(&g, &[false, true, false]),
            vec![true, true, true]
        );
        assert_eq!(
            reaching_accepting_cycle(&g, &[true, false, false]),
            vec![false; 3]
        );
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let g: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        let (_, count) = sccs(&g);
        assert_eq!(count, 1);
    }
}
