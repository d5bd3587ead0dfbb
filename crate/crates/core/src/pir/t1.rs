//! Query structure for the no-collusion scheme. Each group plays the role of
//! one database of the classical capacity-achieving scheme: the query is K
//! disjoint blocks, block i holding every i-sum type with exactly
//! (g - 1)^(i - 1) instances per type. Desired-message symbols are fresh per
//! group; each undesired sum downloaded at one group is reused as side
//! information exactly once at every other group in the next block.

use std::collections::HashMap;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::subpacket_len;

/// One requested sum in the permuted symbol domain: `terms` lists
/// (message, symbol) pairs, sorted by message. For rows containing the
/// desired message, `side_info` points at the previously downloaded row
/// (group, row index) whose value equals the undesired part of the sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct T1Row {
    pub block: usize,
    pub terms: Vec<(usize, usize)>,
    pub side_info: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T1Plan {
    /// Per message: permutation mapping plan symbol j to the underlying
    /// message symbol perms[m][j].
    pub perms: Vec<Vec<usize>>,
    /// Identical rows are sent to every member of a group.
    pub group_rows: Vec<Vec<T1Row>>,
}

impl T1Plan {
    pub fn rows_per_group(&self) -> usize {
        self.group_rows.first().map_or(0, |r| r.len())
    }
}

/// Deterministic structural builder used by both the seeded generator and
/// the privacy oracle.
pub fn build_t1_plan(
    g: usize,
    k: usize,
    desired: usize,
    perms: Vec<Vec<usize>>,
) -> Result<T1Plan> {
    if g < 2 {
        return Err(Error::GNotGreaterThanT { g, t: 1 });
    }
    if desired >= k {
        return Err(Error::BadParams(format!(
            "desired message {desired} outside 0..{k}"
        )));
    }
    let l = subpacket_len(g, k)?;
    if perms.len() != k || perms.iter().any(|p| p.len() != l) {
        return Err(Error::SubpacketMismatch {
            l: perms.first().map_or(0, |p| p.len()),
            expected: l,
        });
    }

    let mut counters = vec![0usize; k];
    let mut fresh = |m: usize, counters: &mut Vec<usize>| {
        let idx = counters[m];
        counters[m] += 1;
        idx
    };
    let mut group_rows: Vec<Vec<T1Row>> = vec![Vec::new(); g];
    // (block, undesired type) -> per source group, row indices of its
    // instances, in download order.
    let mut registry: HashMap<(usize, Vec<usize>), Vec<Vec<usize>>> = HashMap::new();

    for block in 1..=k {
        let instances = (g - 1).pow(block as u32 - 1);
        for type_set in (0..k).combinations(block) {
            if type_set.contains(&desired) {
                let side_type: Vec<usize> = type_set
                    .iter()
                    .copied()
                    .filter(|&m| m != desired)
                    .collect();
                for slot in 0..instances {
                    for n in 0..g {
                        let (terms, side_info) = if side_type.is_empty() {
                            (vec![(desired, fresh(desired, &mut counters))], None)
                        } else {
                            // slot-th available instance at the other groups,
                            // ordered by source group then download order.
                            let sources = &registry[&(block - 1, side_type.clone())];
                            let available: Vec<(usize, usize)> = (0..g)
                                .filter(|&src| src != n)
                                .flat_map(|src| {
                                    sources[src].iter().map(move |&row| (src, row))
                                })
                                .collect();
                            let (src_group, src_row) = available[slot];
                            let mut terms = group_rows[src_group][src_row].terms.clone();
                            terms.push((desired, fresh(desired, &mut counters)));
                            terms.sort_unstable();
                            (terms, Some((src_group, src_row)))
                        };
                        group_rows[n].push(T1Row {
                            block,
                            terms,
                            side_info,
                        });
                    }
                }
            } else {
                let entry = registry
                    .entry((block, type_set.clone()))
                    .or_insert_with(|| vec![Vec::new(); g]);
                for _slot in 0..instances {
                    for n in 0..g {
                        let terms: Vec<(usize, usize)> = type_set
                            .iter()
                            .map(|&m| (m, fresh(m, &mut counters)))
                            .collect();
                        entry[n].push(group_rows[n].len());
                        group_rows[n].push(T1Row {
                            block,
                            terms,
                            side_info: None,
                        });
                    }
                }
            }
        }
    }
    debug_assert_eq!(counters[desired], l);
    Ok(T1Plan {
        perms,
        group_rows,
    })
}

pub fn sample_perms<R: Rng + ?Sized>(k: usize, l: usize, rng: &mut R) -> Vec<Vec<usize>> {
    (0..k)
        .map(|_| {
            let mut p: Vec<usize> = (0..l).collect();
            for i in (1..l).rev() {
                p.swap(i, rng.random_range(0..=i));
            }
            p
        })
        .collect()
}

pub fn identity_perms(k: usize, l: usize) -> Vec<Vec<usize>> {
    (0..k).map(|_| (0..l).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows_as_terms(plan: &T1Plan, group: usize) -> Vec<Vec<(usize, usize)>> {
        plan.group_rows[group]
            .iter()
            .map(|r| r.terms.clone())
            .collect()
    }

    #[test]
    fn two_groups_two_messages_structure() {
        let plan = build_t1_plan(2, 2, 0, identity_perms(2, 4)).unwrap();
        // group 1: a1, b1, a3+b2; group 2: a2, b2, a4+b1 (0-indexed here)
        assert_eq!(
            rows_as_terms(&plan, 0),
            vec![
                vec![(0, 0)],
                vec![(1, 0)],
                vec![(0, 2), (1, 1)],
            ]
        );
        assert_eq!(
            rows_as_terms(&plan, 1),
            vec![
                vec![(0, 1)],
                vec![(1, 1)],
                vec![(0, 3), (1, 0)],
            ]
        );
        assert_eq!(plan.group_rows[0][2].side_info, Some((1, 1)));
    }

    #[test]
    fn three_groups_two_messages_structure() {
        let plan = build_t1_plan(3, 2, 0, identity_perms(2, 9)).unwrap();
        // 4 rows per group, 12 group-level symbols in total
        for n in 0..3 {
            assert_eq!(plan.group_rows[n].len(), 4);
        }
        assert_eq!(
            rows_as_terms(&plan, 0),
            vec![
                vec![(0, 0)],
                vec![(1, 0)],
                vec![(0, 3), (1, 1)],
                vec![(0, 6), (1, 2)],
            ]
        );
        assert_eq!(
            rows_as_terms(&plan, 1),
            vec![
                vec![(0, 1)],
                vec![(1, 1)],
                vec![(0, 4), (1, 0)],
                vec![(0, 7), (1, 2)],
            ]
        );
        assert_eq!(
            rows_as_terms(&plan, 2),
            vec![
                vec![(0, 2)],
                vec![(1, 2)],
                vec![(0, 5), (1, 0)],
                vec![(0, 8), (1, 1)],
            ]
        );
    }

    #[test]
    fn single_message_collapses_to_one_download_per_group() {
        let plan = build_t1_plan(3, 1, 0, identity_perms(1, 3)).unwrap();
        for n in 0..3 {
            assert_eq!(plan.group_rows[n].len(), 1);
            assert_eq!(plan.group_rows[n][0].terms, vec![(0, n)]);
        }
    }

    #[test]
    fn block_counts_follow_the_instance_rule() {
        for (g, k) in [(2usize, 3usize), (3, 3), (4, 2)] {
            let l = subpacket_len(g, k).unwrap();
            let plan = build_t1_plan(g, k, 0, identity_perms(k, l)).unwrap();
            for rows in &plan.group_rows {
                for block in 1..=k {
                    let per_type = (g - 1).pow(block as u32 - 1);
                    let mut by_type: HashMap<Vec<usize>, usize> = HashMap::new();
                    for row in rows.iter().filter(|r| r.block == block) {
                        let ty: Vec<usize> = row.terms.iter().map(|t| t.0).collect();
                        *by_type.entry(ty).or_default() += 1;
                    }
                    assert_eq!(by_type.len(), crate::grouping::binomial(k, block) as usize);
                    assert!(by_type.values().all(|&c| c == per_type));
                }
                let expected_total: usize = (1..=k)
                    .map(|i| {
                        crate::grouping::binomial(k, i) as usize
                            * (g - 1).pow(i as u32 - 1)
                    })
                    .sum();
                assert_eq!(rows.len(), expected_total);
            }
        }
    }

    #[test]
    fn desired_indices_cover_the_subpacket_exactly_once() {
        for (g, k, desired) in [(2usize, 2usize, 1usize), (3, 3, 1), (4, 3, 2)] {
            let l = subpacket_len(g, k).unwrap();
            let plan = build_t1_plan(g, k, desired, identity_perms(k, l)).unwrap();
            // Desired-message indices are fresh on every appearance, so each
            // of the L symbols shows up exactly once across all groups.
            let mut seen = vec![0usize; l];
            for rows in &plan.group_rows {
                for row in rows {
                    for &(m, j) in &row.terms {
                        if m == desired {
                            seen[j] += 1;
                        }
                    }
                }
            }
            assert_eq!(seen, vec![1; l]);
        }
    }

    #[test]
    fn indices_within_a_group_are_distinct_per_message() {
        for (g, k) in [(2usize, 3usize), (3, 2), (3, 3)] {
            let l = subpacket_len(g, k).unwrap();
            let plan = build_t1_plan(g, k, 0, identity_perms(k, l)).unwrap();
            for rows in &plan.group_rows {
                let mut used: HashMap<usize, Vec<usize>> = HashMap::new();
                for row in rows {
                    for &(m, j) in &row.terms {
                        used.entry(m).or_default().push(j);
                    }
                }
                for (_, mut idx) in used {
                    let before = idx.len();
                    idx.sort_unstable();
                    idx.dedup();
                    assert_eq!(idx.len(), before);
                }
            }
        }
    }
}
