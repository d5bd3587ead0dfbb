//! Independent oracles for the information-theoretic contracts: storage
//! security against every communication link, index privacy against
//! colluding databases, and exact decodability.

pub mod lemma;

use std::collections::{HashMap, HashSet};

use itertools::Itertools;

use crate::coding::Matrix;
use crate::error::{Error, Result};
use crate::model::{DbSet, Grouping, SystemParams};
use crate::pir::{build_t1_plan, identity_perms, SimRun, StoragePlan, T1Row};

/// Linear description of what a database set stores: each stored share is
/// `message_coeffs[i] * W + (noise_coeffs row i) . N` where W is the K x L
/// message matrix and N the vector of K x L noise matrices. Every scalar
/// expands blockwise to K*L symbol coordinates, so column-space containment
/// of the expanded maps reduces to containment of these skeletons.
#[derive(Debug, Clone)]
pub struct LinearStorageMap {
    pub message_coeffs: Vec<u64>,
    pub noise_coeffs: Matrix,
    /// Block size K * L of the expansion.
    pub expansion: usize,
}

impl LinearStorageMap {
    pub fn extract(plan: &StoragePlan, set: &DbSet) -> Self {
        let shares: Vec<_> = set
            .iter()
            .filter_map(|db| plan.roles.get(db).and_then(|r| r.as_ref()))
            .collect();
        let mut message_coeffs = Vec::with_capacity(shares.len());
        let mut noise_coeffs = Matrix::zeros(shares.len(), plan.noise_count);
        for (i, role) in shares.iter().enumerate() {
            message_coeffs.push(u64::from(role.has_messages));
            for &t in &role.noise_terms {
                noise_coeffs[(i, t)] = 1;
            }
        }
        LinearStorageMap {
            message_coeffs,
            noise_coeffs,
            expansion: plan.k * plan.l,
        }
    }

    /// Fully expanded (A, B) with A acting on message symbols and B on noise
    /// symbols. Only used by small-scale cross-checks.
    pub fn materialize(&self) -> (Matrix, Matrix) {
        let b = self.expansion;
        let rows = self.message_coeffs.len() * b;
        let mut a_full = Matrix::zeros(rows, b);
        let mut b_full = Matrix::zeros(rows, self.noise_coeffs.cols() * b);
        for (i, &c) in self.message_coeffs.iter().enumerate() {
            for j in 0..b {
                a_full[(i * b + j, j)] = c;
                for t in 0..self.noise_coeffs.cols() {
                    b_full[(i * b + j, t * b + j)] = self.noise_coeffs[(i, t)];
                }
            }
        }
        (a_full, b_full)
    }
}

/// True iff the stored view of `link` is statistically independent of
/// uniformly distributed messages under uniform noise: the message column
/// must lie in the column space of the noise incidence matrix.
pub fn security_rank_check(plan: &StoragePlan, link: &DbSet) -> bool {
    let map = LinearStorageMap::extract(plan, link);
    if map.message_coeffs.iter().all(|&c| c == 0) {
        return true;
    }
    let field = &plan.field;
    let shares = map.message_coeffs.len();
    let noise_rank = map.noise_coeffs.rank(field);
    let mut augmented = Matrix::zeros(shares, map.noise_coeffs.cols() + 1);
    for i in 0..shares {
        for t in 0..map.noise_coeffs.cols() {
            augmented[(i, t)] = map.noise_coeffs[(i, t)];
        }
        augmented[(i, map.noise_coeffs.cols())] = map.message_coeffs[i];
    }
    noise_rank == augmented.rank(field)
}

/// Mixed-radix odometer; returns false once every counter has wrapped.
fn advance(counters: &mut [usize], lens: &[usize]) -> bool {
    for (c, &len) in counters.iter_mut().zip(lens) {
        *c += 1;
        if *c < len {
            return true;
        }
        *c = 0;
    }
    false
}

/// Exhaustive mutual-information check on a tiny storage template: walks
/// every (message, noise) assignment, forms the joint distribution of the
/// messages and the link's stored view, and verifies it factorizes exactly.
pub fn security_mi_bruteforce(
    plan: &StoragePlan,
    link: &DbSet,
    budget: u128,
) -> Result<bool> {
    let q = plan.field.modulus();
    let dims = plan.k * plan.l;
    let members: Vec<usize> = link
        .iter()
        .filter(|&db| plan.roles[db].is_some())
        .collect();
    let mut touched: Vec<usize> = members
        .iter()
        .flat_map(|&db| plan.roles[db].as_ref().unwrap().noise_terms.clone())
        .collect();
    touched.sort_unstable();
    touched.dedup();

    let states = (q as u128)
        .checked_pow((dims * (1 + touched.len())) as u32)
        .unwrap_or(u128::MAX);
    if states > budget {
        return Err(Error::StateSpaceTooLarge {
            needed: states,
            budget,
        });
    }

    let message_states = (q as u128).pow(dims as u32) as u64;
    let noise_states = (q as u128).pow((dims * touched.len()) as u32) as u64;
    // view-key -> per-message-state counts
    let mut table: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    for w_state in 0..message_states {
        let w = unrank_vector(w_state, dims, q);
        for z_state in 0..noise_states {
            let z = unrank_vector(z_state, dims * touched.len(), q);
            let mut view = Vec::with_capacity(members.len() * dims);
            for &db in &members {
                let role = plan.roles[db].as_ref().unwrap();
                for sym in 0..dims {
                    let mut v = if role.has_messages { w[sym] } else { 0 };
                    for &t in &role.noise_terms {
                        let slot = touched.binary_search(&t).unwrap();
                        v = plan.field.add(v, z[slot * dims + sym]);
                    }
                    view.push(v);
                }
            }
            table.entry(view).or_insert_with(|| vec![0; message_states as usize])
                [w_state as usize] += 1;
        }
    }
    // Zero mutual information iff every view is reached equally often from
    // every message assignment.
    Ok(table
        .values()
        .all(|counts| counts.iter().all(|&c| c == counts[0])))
}

fn unrank_vector(mut state: u64, dims: usize, q: u64) -> Vec<u64> {
    let mut v = vec![0u64; dims];
    for slot in v.iter_mut() {
        *slot = state % q;
        state /= q;
    }
    v
}

/// Groups observed by a colluding set. Members of one group receive
/// byte-identical group queries (the replication invariant, asserted by
/// [`replication_check`]), so the observable view collapses to the set of
/// distinct group queries.
fn observed_groups(grouping: &Grouping, colluding: &[usize]) -> Vec<usize> {
    let mut groups: Vec<usize> = colluding
        .iter()
        .filter_map(|&db| grouping.group_of(db))
        .collect();
    groups.sort_unstable();
    groups.dedup();
    groups
}

/// Asserts that every member of each group receives the identical group
/// query under the protocol's addressing.
pub fn replication_check(plan: &crate::pir::QueryPlan, grouping: &Grouping) -> bool {
    // Query rows are addressed per group and answered from each member's
    // share of the same group; the view can differ between members only if
    // group membership is inconsistent.
    grouping
        .groups()
        .iter()
        .enumerate()
        .all(|(gi, g)| g.indices().iter().all(|&db| grouping.group_of(db) == Some(gi)))
        && plan.g == grouping.g()
}

/// Exact privacy oracle for the no-collusion scheme: for every desired
/// index, the distribution of the colluding set's query view is enumerated
/// in full and compared for equality.
///
/// The per-message index permutations act on each view only through the
/// indices the view actually uses, so the enumeration ranges over injective
/// placements of those indices; the images of unused indices multiply every
/// view's probability by the same constant and cancel exactly.
pub fn privacy_bruteforce(
    params: &SystemParams,
    grouping: &Grouping,
    colluding: &[usize],
    budget: u128,
) -> Result<bool> {
    let groups = observed_groups(grouping, colluding);
    // Colluders inside one group share a single group-level query, so the
    // contract covers any set spanning at most T groups.
    if groups.len() > params.t {
        return Err(Error::BadParams(
            "colluding set spans more groups than the privacy threshold".into(),
        ));
    }
    if params.k == 1 {
        return Ok(true);
    }
    if groups.is_empty() {
        // Dropped databases receive no query at all.
        return Ok(true);
    }
    if params.t > 1 {
        // The colluding-case randomness is a tuple of uniform full-rank
        // matrices; its state space is astronomically large even at the
        // smallest protocol shapes.
        return Err(Error::StateSpaceTooLarge {
            needed: u128::MAX,
            budget,
        });
    }

    let g = grouping.g();
    let l = crate::model::subpacket_len(g, params.k)?;
    let mut reference: Option<HashSet<Vec<Vec<(usize, usize)>>>> = None;
    for desired in 0..params.k {
        let plan = build_t1_plan(g, params.k, desired, identity_perms(params.k, l))?;
        let rows: Vec<&T1Row> = groups
            .iter()
            .flat_map(|&gi| plan.group_rows[gi].iter())
            .collect();
        let views = enumerate_views(&rows, params.k, l, budget)?;
        match &reference {
            None => reference = Some(views),
            Some(set) => {
                if *set != views {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// All concrete views reachable from a structural view by injectively
/// relabeling each message's used indices into 0..L.
fn enumerate_views(
    rows: &[&T1Row],
    k: usize,
    l: usize,
    budget: u128,
) -> Result<HashSet<Vec<Vec<(usize, usize)>>>> {
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); k];
    for row in rows {
        for &(m, j) in &row.terms {
            if !used[m].contains(&j) {
                used[m].push(j);
            }
        }
    }
    let mut total: u128 = 1;
    for u in &used {
        for i in 0..u.len() {
            total = total.saturating_mul((l - i) as u128);
        }
    }
    if total > budget {
        return Err(Error::StateSpaceTooLarge {
            needed: total,
            budget,
        });
    }
    let position: Vec<HashMap<usize, usize>> = used
        .iter()
        .map(|u| u.iter().enumerate().map(|(i, &j)| (j, i)).collect())
        .collect();

    let placements: Vec<Vec<Vec<usize>>> = used
        .iter()
        .map(|u| (0..l).permutations(u.len()).collect())
        .collect();
    let lens: Vec<usize> = placements.iter().map(|p| p.len()).collect();
    let mut views = HashSet::new();
    let mut assignment: Vec<usize> = vec![0; k];
    loop {
        let view: Vec<Vec<(usize, usize)>> = rows
            .iter()
            .map(|row| {
                row.terms
                    .iter()
                    .map(|&(m, j)| (m, placements[m][assignment[m]][position[m][&j]]))
                    .collect()
            })
            .collect();
        views.insert(view);
        if !advance(&mut assignment, &lens) {
            return Ok(views);
        }
    }
}

/// Joint check of the query view together with the colluding databases'
/// stored content, by full enumeration of messages, noise, and
/// permutations. Only feasible at the tiniest shapes; guarded by `budget`.
pub fn privacy_joint_bruteforce(
    params: &SystemParams,
    grouping: &Grouping,
    colluding: &[usize],
    budget: u128,
) -> Result<bool> {
    if params.t != 1 {
        return Err(Error::StateSpaceTooLarge {
            needed: u128::MAX,
            budget,
        });
    }
    let g = grouping.g();
    let l = crate::model::subpacket_len(g, params.k)?;
    let q = params.q;
    let field = crate::coding::Field::new(q)?;
    let dims = params.k * l;
    let (roles, _) = StoragePlan::standard_roles(grouping)?;
    let groups = observed_groups(grouping, colluding);
    let touched: Vec<usize> = {
        let mut t: Vec<usize> = colluding
            .iter()
            .filter_map(|&db| roles[db].as_ref())
            .flat_map(|r| r.noise_terms.clone())
            .collect();
        t.sort_unstable();
        t.dedup();
        t
    };

    let mut perm_count: u128 = 1;
    for _ in 0..params.k {
        perm_count = perm_count.saturating_mul((1..=l as u128).product());
    }
    let states = (q as u128)
        .checked_pow((dims * (1 + touched.len())) as u32)
        .unwrap_or(u128::MAX)
        .saturating_mul(perm_count);
    if states > budget {
        return Err(Error::StateSpaceTooLarge {
            needed: states,
            budget,
        });
    }

    let perms_per_message: Vec<Vec<usize>> = (0..l).permutations(l).map(|p| p).collect();
    let message_states = (q as u128).pow(dims as u32) as u64;
    let noise_states = (q as u128).pow((dims * touched.len()) as u32) as u64;

    let mut dists: Vec<HashMap<(Vec<Vec<(usize, usize)>>, Vec<u64>), u64>> = Vec::new();
    for desired in 0..params.k {
        let mut dist = HashMap::new();
        let mut perm_choice = vec![0usize; params.k];
        loop {
            let perms: Vec<Vec<usize>> = perm_choice
                .iter()
                .map(|&c| perms_per_message[c].clone())
                .collect();
            let plan = build_t1_plan(g, params.k, desired, perms.clone())?;
            let query_view: Vec<Vec<(usize, usize)>> = groups
                .iter()
                .flat_map(|&gi| plan.group_rows[gi].iter())
                .map(|row| {
                    row.terms
                        .iter()
                        .map(|&(m, j)| (m, perms[m][j]))
                        .collect()
                })
                .collect();
            for w_state in 0..message_states {
                let w = unrank_vector(w_state, dims, q);
                for z_state in 0..noise_states {
                    let z = unrank_vector(z_state, dims * touched.len(), q);
                    let mut stored_view = Vec::new();
                    for &db in colluding {
                        if let Some(role) = roles[db].as_ref() {
                            for sym in 0..dims {
                                let mut v = if role.has_messages { w[sym] } else { 0 };
                                for &t in &role.noise_terms {
                                    let slot = touched.binary_search(&t).unwrap();
                                    v = field.add(v, z[slot * dims + sym]);
                                }
                                stored_view.push(v);
                            }
                        }
                    }
                    *dist
                        .entry((query_view.clone(), stored_view))
                        .or_insert(0u64) += 1;
                }
            }
            let mut m = 0;
            loop {
                if m == params.k {
                    break;
                }
                perm_choice[m] += 1;
                if perm_choice[m] < perms_per_message.len() {
                    break;
                }
                perm_choice[m] = 0;
                m += 1;
            }
            if m == params.k {
                break;
            }
        }
        dists.push(dist);
    }
    Ok(dists.windows(2).all(|w| w[0] == w[1]))
}

/// Exact decodability: the transcript's decoded symbols equal the stored
/// desired message, symbol for symbol.
pub fn decodability_check(run: &SimRun) -> bool {
    run.transcript.decoded == run.messages.row(run.transcript.plan.desired)
}
