//! Progressive edge growth: each new edge of a variable goes to a
//! lowest-degree check among those farthest from it in the current graph.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Builds a Tanner graph with exactly the requested variable degrees.
///
/// Variables are processed in nondecreasing degree order; ties among
/// equally good checks are broken with a generator seeded from `seed`.
pub fn peg_construct(
    n_vars: usize,
    n_checks: usize,
    var_degrees: &[usize],
    seed: u64,
) -> Result<ParityCheckMatrix> {
    peg_construct_capped(n_vars, n_checks, var_degrees, None, seed)
}

/// [`peg_construct`] where no check may exceed `check_cap` edges. With
/// `n_vars * dv == n_checks * dc` and a cap of `dc` the result is exactly
/// (dv, dc)-regular.
pub fn peg_construct_capped(
    n_vars: usize,
    n_checks: usize,
    var_degrees: &[usize],
    check_cap: Option<usize>,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if n_vars == 0 || n_checks == 0 {
        return Err(Error::Construction("graph needs at least one variable and one check".into()));
    }
    if var_degrees.len() != n_vars {
        return Err(Error::Construction(format!(
            "{} degrees given for {n_vars} variables",
            var_degrees.len()
        )));
    }
    if let Some(&d) = var_degrees.iter().find(|&&d| d == 0 || d > n_checks) {
        return Err(Error::Construction(format!("variable degree {d} infeasible with {n_checks} checks")));
    }
    let cap = check_cap.unwrap_or(usize::MAX);
    if cap.saturating_mul(n_checks) < var_degrees.iter().sum::<usize>() {
        return Err(Error::Construction(format!("{n_checks} checks of degree <= {cap} cannot hold all edges")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n_vars).collect();
    order.sort_by_key(|&v| var_degrees[v]);

    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n_vars];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); n_checks];
    let mut search = Bfs::new(n_vars, n_checks);
    let mut candidates = Vec::new();

    for &v in &order {
        for _ in 0..var_degrees[v] {
            search.depths(v, &var_adj, &check_adj);
            let open = |c: usize| check_adj[c].len() < cap && !var_adj[v].contains(&c);
            let far = (0..n_checks).filter(|&c| open(c)).map(|c| search.depth[c]).max().ok_or_else(|| {
                Error::Construction(format!("no admissible check left for variable {v}"))
            })?;
            candidates.clear();
            candidates.extend((0..n_checks).filter(|&c| open(c) && search.depth[c] == far));
            let min_deg = candidates.iter().map(|&c| check_adj[c].len()).min().expect("candidates nonempty");
            candidates.retain(|&c| check_adj[c].len() == min_deg);
            let &c = candidates.choose(&mut rng).expect("candidates nonempty");
            var_adj[v].push(c);
            check_adj[c].push(v);
        }
    }
    ParityCheckMatrix::from_var_lists(n_checks, var_adj)
}

/// Reusable breadth-first search state.
struct Bfs {
    /// Distance in check levels from the root; `usize::MAX` if unreachable.
    depth: Vec<usize>,
    var_seen: Vec<u32>,
    epoch: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Bfs {
    fn new(n_vars: usize, n_checks: usize) -> Self {
        Self {
            depth: vec![usize::MAX; n_checks],
            var_seen: vec![0; n_vars],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Fills `depth` for the tree rooted at variable `root`.
    fn depths(&mut self, root: usize, var_adj: &[Vec<usize>], check_adj: &[Vec<usize>]) {
        self.epoch += 1;
        let epoch = self.epoch;
        self.depth.fill(usize::MAX);
        self.var_seen[root] = epoch;
        self.frontier.clear();
        self.frontier.push(root);
        let mut level = 0;
        while !self.frontier.is_empty() {
            self.next.clear();
            for &v in &self.frontier {
                for &c in &var_adj[v] {
                    if self.depth[c] != usize::MAX {
                        continue;
                    }
                    self.depth[c] = level;
                    for &u in &check_adj[c] {
                        if self.var_seen[u] != epoch {
                            self.var_seen[u] = epoch;
                            self.next.push(u);
                        }
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
            level += 1;
        }
    }
}
