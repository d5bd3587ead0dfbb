//! Exact solver for the database-grouping problem: maximize the number of
//! disjoint groups of size >= 2 such that no communication link covers a
//! whole group, breaking ties by smallest total group size, then by
//! lexicographically smallest group list.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{CommMatrix, DbSet, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Fewest total member count first, then lexicographic. Matches the rate
    /// objective: the achieved rate grows as the member total shrinks.
    MinTotalDatabases,
    /// Lexicographic only.
    LexSmallest,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_nodes: u64,
    pub tie_break: TieBreak,
    pub require_g_exceeds_t: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_nodes: 5_000_000,
            tie_break: TieBreak::MinTotalDatabases,
            require_g_exceeds_t: true,
        }
    }
}

/// The scheme applies only when not every size-X subset of databases is a
/// link: C(N, X) - Omega_X != 0.
pub fn feasibility_check(params: &SystemParams, b: &CommMatrix) -> bool {
    let x = b.max_link_size();
    if x == 0 {
        return true;
    }
    binomial(params.n, x) != b.omega(x) as u128
}

/// Upper bound on the group count: sum over link sizes i in 2..=X of
/// C(N, i) - Omega_i. The solver further caps g at floor(N/2).
pub fn groups_upper_bound(params: &SystemParams, b: &CommMatrix) -> u128 {
    let x = b.max_link_size().max(2);
    (2..=x)
        .map(|i| binomial(params.n, i) - b.omega(i) as u128)
        .sum()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// True iff groups are pairwise disjoint, each has size >= 2, and no link
/// covers any group entirely.
pub fn is_valid_grouping(grouping: &crate::model::Grouping, b: &CommMatrix) -> bool {
    let mut seen = DbSet::empty();
    for g in grouping.groups() {
        if g.len() < 2 || g.intersects(&seen) {
            return false;
        }
        seen.0 |= g.0;
        if !b.permits_group(g) {
            return false;
        }
    }
    true
}

/// Best tail for a remaining-database mask: group count, total members,
/// group list in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tail {
    g: usize,
    total: usize,
    groups: Vec<Vec<usize>>,
}

impl Tail {
    fn empty() -> Self {
        Tail {
            g: 0,
            total: 0,
            groups: Vec::new(),
        }
    }

    fn better_than(&self, other: &Tail, tie: TieBreak) -> bool {
        if self.g != other.g {
            return self.g > other.g;
        }
        match tie {
            TieBreak::MinTotalDatabases => {
                if self.total != other.total {
                    return self.total < other.total;
                }
            }
            TieBreak::LexSmallest => {}
        }
        self.groups < other.groups
    }
}

struct Search<'a> {
    links: &'a [DbSet],
    max_group: usize,
    tie: TieBreak,
    /// Restrict branching to minimal valid groups. Sound whenever the total
    /// member count is minimized, because a valid subset always improves the
    /// total; pure lexicographic search must consider non-minimal groups too
    /// (a longer group sharing a prefix can sort earlier).
    minimal_only: bool,
    budget: u64,
    nodes: u64,
    memo: HashMap<u64, Tail>,
}

impl Search<'_> {
    /// Exact best tail over databases in `mask`. Branches on the lowest
    /// remaining database: drop it, or form a minimal valid group around it.
    /// Minimal groups suffice: validity is upward closed, so replacing a
    /// group by a valid subset never lowers g and always lowers the total.
    fn solve(&mut self, mask: u64) -> Result<Tail> {
        if mask.count_ones() < 2 {
            return Ok(Tail::empty());
        }
        if let Some(hit) = self.memo.get(&mask) {
            return Ok(hit.clone());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::NodeBudgetExceeded {
                budget: self.budget,
            });
        }
        let lowest = mask.trailing_zeros() as usize;
        let rest = mask & !(1u64 << lowest);
        let mut best = self.solve(rest)?;
        let others = DbSet(rest).indices();
        for size in 2..=self.max_group.min(others.len() + 1) {
            for combo in others.iter().copied().combinations(size - 1) {
                let mut members = vec![lowest];
                members.extend(combo);
                let set = DbSet::from_indices(&members);
                let admissible = if self.minimal_only {
                    self.is_minimal_valid(&set, &members)
                } else {
                    self.is_valid(&set)
                };
                if !admissible {
                    continue;
                }
                let mut candidate = self.solve(mask & !set.0)?;
                candidate.g += 1;
                candidate.total += members.len();
                candidate.groups.insert(0, members.clone());
                if candidate.better_than(&best, self.tie) {
                    best = candidate;
                }
            }
        }
        self.memo.insert(mask, best.clone());
        Ok(best)
    }

    fn is_valid(&self, set: &DbSet) -> bool {
        self.links.iter().all(|link| !set.is_subset_of(link))
    }

    /// Valid, and no proper subset of size >= 2 is valid. Checking the
    /// (size-1)-subsets suffices by upward closure.
    fn is_minimal_valid(&self, set: &DbSet, members: &[usize]) -> bool {
        if !self.is_valid(set) {
            return false;
        }
        if members.len() == 2 {
            return true;
        }
        for leave_out in members {
            let sub = DbSet(set.0 & !(1u64 << leave_out));
            if self.is_valid(&sub) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub grouping: crate::model::Grouping,
    pub nodes: u64,
}

/// Solves the grouping problem exactly. Databases left in no group are
/// reported through `Grouping::dropped`.
pub fn solve_grouping(
    params: &SystemParams,
    b: &CommMatrix,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    let n = params.n;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    // A minimal valid group has at most X + 1 members: anything larger than
    // the largest link has a valid smaller subset.
    let max_group = (b.max_link_size() + 1).clamp(2, n);
    let mut search = Search {
        links: b.links(),
        max_group,
        tie: cfg.tie_break,
        minimal_only: cfg.tie_break == TieBreak::MinTotalDatabases,
        budget: cfg.max_nodes.max(1),
        nodes: 0,
        memo: HashMap::new(),
    };
    let best = search.solve(full)?;
    if best.g == 0 {
        return Err(Error::Infeasible);
    }
    if cfg.require_g_exceeds_t && best.g <= params.t {
        return Err(Error::GNotGreaterThanT {
            g: best.g,
            t: params.t,
        });
    }
    let sets = best
        .groups
        .iter()
        .map(|g| DbSet::from_indices(g))
        .collect();
    Ok(SolveOutcome {
        grouping: crate::model::Grouping::new(n, sets)?,
        nodes: search.nodes,
    })
}

/// Trims every group of size d*n_i + m (0 <= m < d) down to d*n_i members,
/// choosing the lexicographically smallest member subset that no link
/// covers. Groups already at a multiple of d are kept as-is.
pub fn lemma1_reduction(
    grouping: &crate::model::Grouping,
    d: usize,
    b: &CommMatrix,
) -> Result<crate::model::Grouping> {
    if d < 2 {
        return Err(Error::BadTrimShares { d, size: 0 });
    }
    let mut out = Vec::with_capacity(grouping.g());
    for g in grouping.groups() {
        let size = g.len();
        if size < d {
            return Err(Error::BadTrimShares { d, size });
        }
        let target = size / d * d;
        if target == size {
            out.push(*g);
            continue;
        }
        let members = g.indices();
        let trimmed = members
            .iter()
            .copied()
            .combinations(target)
            .map(|combo| DbSet::from_indices(&combo))
            .find(|set| b.permits_group(set))
            .ok_or_else(|| Error::TrimViolatesSecurity {
                group: g.external(),
                target,
            })?;
        out.push(trimmed);
    }
    crate::model::Grouping::new(grouping.n(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Grouping;

    fn params(n: usize) -> SystemParams {
        SystemParams::new(n, 2, 1, 65537, 0).unwrap()
    }

    fn single_link() -> CommMatrix {
        CommMatrix::from_links(4, &[vec![1, 2]]).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        assert!(feasibility_check(&params(4), &single_link()));
        let saturated =
            CommMatrix::from_links(3, &[vec![1, 2], vec![1, 3], vec![2, 3]]).unwrap();
        assert!(!feasibility_check(&params(3), &saturated));
    }

    #[test]
    fn upper_bound_matches_direct_evaluation() {
        assert_eq!(groups_upper_bound(&params(4), &single_link()), 5);
        let empty = CommMatrix::from_links(5, &[]).unwrap();
        assert_eq!(groups_upper_bound(&params(5), &empty), binomial(5, 2));
    }

    #[test]
    fn validity_checks_link_coverage() {
        let b = single_link();
        let good = Grouping::from_lists(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        assert!(is_valid_grouping(&good, &b));
        let covered = Grouping::from_lists(4, &[vec![1, 2]]).unwrap();
        assert!(!is_valid_grouping(&covered, &b));
    }

    #[test]
    fn solves_single_link_instance() {
        let out = solve_grouping(&params(4), &single_link(), &SolverConfig::default()).unwrap();
        assert_eq!(
            out.grouping.external_lists(),
            vec![vec![1, 3], vec![2, 4]]
        );
        assert!(out.grouping.dropped().is_empty());
    }

    #[test]
    fn infeasible_when_every_pair_linked_and_nothing_bigger_helps() {
        // N = 2 with the only possible pair linked: no group can form.
        let b = CommMatrix::from_links(2, &[vec![1, 2]]).unwrap();
        let cfg = SolverConfig {
            require_g_exceeds_t: false,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_grouping(&params(2), &b, &cfg),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn g_not_greater_than_t_detected() {
        let b = CommMatrix::from_links(4, &[]).unwrap();
        let p = SystemParams::new(4, 2, 2, 65537, 0).unwrap();
        assert!(matches!(
            solve_grouping(&p, &b, &SolverConfig::default()),
            Err(Error::GNotGreaterThanT { g: 2, t: 2 })
        ));
    }

    #[test]
    fn node_budget_enforced() {
        let b = CommMatrix::from_links(12, &[]).unwrap();
        let cfg = SolverConfig {
            max_nodes: 3,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_grouping(&params(12), &b, &cfg),
            Err(Error::NodeBudgetExceeded { .. })
        ));
    }

    #[test]
    fn solver_output_respects_bounds() {
        let b = CommMatrix::from_links(6, &[vec![1, 2, 3], vec![4, 5]]).unwrap();
        let out = solve_grouping(&params(6), &b, &SolverConfig::default()).unwrap();
        assert!(is_valid_grouping(&out.grouping, &b));
        assert!(out.grouping.g() as u128 <= groups_upper_bound(&params(6), &b));
        assert!(out.grouping.g() <= 3);
    }

    #[test]
    fn trim_keeps_exact_multiples() {
        let g = Grouping::from_lists(6, &[vec![1, 2]]).unwrap();
        let b = CommMatrix::from_links(6, &[]).unwrap();
        assert_eq!(lemma1_reduction(&g, 2, &b).unwrap(), g);
    }

    #[test]
    fn trim_drops_leftover_members() {
        let g = Grouping::from_lists(6, &[vec![1, 3, 4]]).unwrap();
        let b = CommMatrix::from_links(6, &[vec![5, 6]]).unwrap();
        let trimmed = lemma1_reduction(&g, 2, &b).unwrap();
        assert_eq!(trimmed.external_lists(), vec![vec![1, 3]]);
    }

    #[test]
    fn trim_avoids_covered_subsets() {
        // {1,3} is covered by a link, so the trim must pick another pair.
        let g = Grouping::from_lists(6, &[vec![1, 3, 4]]).unwrap();
        let b = CommMatrix::from_links(6, &[vec![1, 3]]).unwrap();
        let trimmed = lemma1_reduction(&g, 2, &b).unwrap();
        assert_eq!(trimmed.external_lists(), vec![vec![1, 4]]);
        // Every pair covered: trim fails.
        let b2 = CommMatrix::from_links(6, &[vec![1, 3], vec![1, 4], vec![3, 4]]).unwrap();
        assert!(matches!(
            lemma1_reduction(&g, 2, &b2),
            Err(Error::TrimViolatesSecurity { .. })
        ));
    }
}
