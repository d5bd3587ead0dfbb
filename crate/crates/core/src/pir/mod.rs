//! Group-based retrieval protocol: noise-shared storage, query generation,
//! deterministic answering, and decoding.

pub mod colluding;
pub mod storage;
pub mod t1;

use rand::Rng;

use crate::coding::{random_full_rank, Field, Matrix};
use crate::error::{Error, Result};
use crate::model::{subpacket_len, Grouping, SystemParams};

pub use colluding::{build_t_plan, per_group_downloads, round_instances, TPlan, TRow};
pub use storage::{
    build_storage, build_storage_with_noise, random_messages, ShareRole, StoragePlan,
};
pub use t1::{build_t1_plan, identity_perms, sample_perms, T1Plan, T1Row};

#[derive(Debug, Clone)]
pub enum QueryScheme {
    NoCollusion(T1Plan),
    Colluding(TPlan),
}

/// The full query plan for one retrieval. Every member of a group receives
/// the identical group query.
#[derive(Debug, Clone)]
pub struct QueryPlan {
    pub desired: usize,
    pub g: usize,
    pub k: usize,
    pub l: usize,
    pub scheme: QueryScheme,
}

impl QueryPlan {
    pub fn rows_per_group(&self) -> usize {
        match &self.scheme {
            QueryScheme::NoCollusion(p) => p.rows_per_group(),
            QueryScheme::Colluding(p) => p.rows_per_group(),
        }
    }

    /// Concrete coefficient rows for one group's query, in the form the
    /// databases see them: per row, per touched message, an L-length
    /// coefficient vector over that message's symbols.
    pub fn concrete_rows(&self, group: usize) -> Vec<Vec<(usize, Vec<u64>)>> {
        match &self.scheme {
            QueryScheme::NoCollusion(p) => p.group_rows[group]
                .iter()
                .map(|row| {
                    row.terms
                        .iter()
                        .map(|&(m, j)| {
                            let mut coeff = vec![0u64; self.l];
                            coeff[p.perms[m][j]] = 1;
                            (m, coeff)
                        })
                        .collect()
                })
                .collect(),
            QueryScheme::Colluding(p) => p.group_rows[group]
                .iter()
                .map(|row| p.row_coefficients(self.desired, row))
                .collect(),
        }
    }
}

fn check_subpacket(params: &SystemParams, g: usize) -> Result<usize> {
    let l = subpacket_len(g, params.k)?;
    if params.l != 0 && params.l != l {
        return Err(Error::SubpacketMismatch {
            l: params.l,
            expected: l,
        });
    }
    Ok(l)
}

/// No-collusion query plan with fresh uniform per-message index
/// permutations.
pub fn generate_queries_t1<R: Rng + ?Sized>(
    params: &SystemParams,
    grouping: &Grouping,
    desired: usize,
    rng: &mut R,
) -> Result<QueryPlan> {
    let g = grouping.g();
    let l = check_subpacket(params, g)?;
    let perms = sample_perms(params.k, l, rng);
    let plan = build_t1_plan(g, params.k, desired, perms)?;
    Ok(QueryPlan {
        desired,
        g,
        k: params.k,
        l,
        scheme: QueryScheme::NoCollusion(plan),
    })
}

/// Colluding-case query plan with fresh uniform full-rank precoders.
pub fn generate_queries_tpir<R: Rng + ?Sized>(
    params: &SystemParams,
    grouping: &Grouping,
    desired: usize,
    rng: &mut R,
) -> Result<QueryPlan> {
    let g = grouping.g();
    let l = check_subpacket(params, g)?;
    let field = Field::new(params.q)?;
    let precoders = (0..params.k)
        .map(|_| random_full_rank(l, &field, rng))
        .collect();
    let plan = build_t_plan(g, params.t, params.k, desired, &field, precoders)?;
    Ok(QueryPlan {
        desired,
        g,
        k: params.k,
        l,
        scheme: QueryScheme::Colluding(plan),
    })
}

/// Dispatches on T.
pub fn generate_queries<R: Rng + ?Sized>(
    params: &SystemParams,
    grouping: &Grouping,
    desired: usize,
    rng: &mut R,
) -> Result<QueryPlan> {
    let g = grouping.g();
    if params.t >= g {
        return Err(Error::GNotGreaterThanT { g, t: params.t });
    }
    if params.t == 1 {
        generate_queries_t1(params, grouping, desired, rng)
    } else {
        generate_queries_tpir(params, grouping, desired, rng)
    }
}

/// Evaluates the group query on one database's stored matrix. Deterministic
/// given (storage, query).
pub fn answer(db: usize, plan: &StoragePlan, query: &QueryPlan) -> Result<Vec<u64>> {
    let role = plan.roles[db]
        .as_ref()
        .ok_or(Error::UngroupedDatabaseQueried { db: db + 1 })?;
    let stored = plan.stored[db]
        .as_ref()
        .ok_or(Error::UngroupedDatabaseQueried { db: db + 1 })?;
    let field = &plan.field;
    let mut out = Vec::with_capacity(query.rows_per_group());
    match &query.scheme {
        QueryScheme::NoCollusion(p) => {
            for row in &p.group_rows[role.group] {
                let mut acc = 0u64;
                for &(m, j) in &row.terms {
                    acc = field.add(acc, stored.row(m)[p.perms[m][j]]);
                }
                out.push(acc);
            }
        }
        QueryScheme::Colluding(p) => {
            for row in &p.group_rows[role.group] {
                let mut acc = 0u64;
                for (m, coeff) in p.row_coefficients(query.desired, row) {
                    let stored_row = stored.row(m);
                    for (col, &c) in coeff.iter().enumerate() {
                        if c != 0 {
                            acc = field.add(acc, field.mul(c, stored_row[col]));
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

/// Per group, a linear combination of the answering members that cancels
/// every noise term and leaves exactly one copy of the message functional.
/// Solving the small incidence system keeps replicated-share layouts (used
/// by the redundancy checks) on the same code path as standard groups.
fn cancellation_recipe(
    plan: &StoragePlan,
    answers: &[Option<Vec<u64>>],
    group: usize,
) -> Result<Vec<(usize, u64)>> {
    let field = &plan.field;
    let members: Vec<usize> = plan.grouping.groups()[group]
        .indices()
        .into_iter()
        .filter(|&db| answers[db].is_some())
        .collect();
    if members.is_empty() {
        return Err(Error::InconsistentAnswers(format!(
            "group {} has no answering members",
            group + 1
        )));
    }
    let mut noise_ids: Vec<usize> = members
        .iter()
        .flat_map(|&db| plan.roles[db].as_ref().unwrap().noise_terms.clone())
        .collect();
    noise_ids.sort_unstable();
    noise_ids.dedup();

    // Rows: message equation then one per noise id; columns: members plus
    // the augmented target.
    let rows = 1 + noise_ids.len();
    let cols = members.len();
    let mut aug = Matrix::zeros(rows, cols + 1);
    for (ci, &db) in members.iter().enumerate() {
        let role = plan.roles[db].as_ref().unwrap();
        aug[(0, ci)] = u64::from(role.has_messages);
        for (ri, id) in noise_ids.iter().enumerate() {
            if role.noise_terms.contains(id) {
                aug[(ri + 1, ci)] = 1;
            }
        }
    }
    aug[(0, cols)] = 1;

    // Row reduce and read off one solution with free variables at zero.
    let mut pivot_of_row = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| aug[(r, col)] != 0) else {
            continue;
        };
        for j in 0..=cols {
            let tmp = aug[(rank, j)];
            aug[(rank, j)] = aug[(p, j)];
            aug[(p, j)] = tmp;
        }
        let inv = field.inv(aug[(rank, col)])?;
        for j in 0..=cols {
            aug[(rank, j)] = field.mul(aug[(rank, j)], inv);
        }
        for r in 0..rows {
            if r != rank && aug[(r, col)] != 0 {
                let f = aug[(r, col)];
                for j in 0..=cols {
                    let v = field.mul(f, aug[(rank, j)]);
                    aug[(r, j)] = field.sub(aug[(r, j)], v);
                }
            }
        }
        pivot_of_row.push(col);
        rank += 1;
    }
    if (rank..rows).any(|r| aug[(r, cols)] != 0) {
        let m = plan.grouping.groups()[group].len();
        return Err(Error::NoiseCancellationUnsolvable {
            m,
            q: field.modulus(),
        });
    }
    let mut combo = vec![0u64; cols];
    for (r, &col) in pivot_of_row.iter().enumerate() {
        combo[col] = aug[(r, cols)];
    }
    Ok(members
        .into_iter()
        .zip(combo)
        .filter(|&(_, c)| c != 0)
        .collect())
}

/// Noise-cancelled group-level row values.
fn group_values(
    plan: &StoragePlan,
    query: &QueryPlan,
    answers: &[Option<Vec<u64>>],
) -> Result<Vec<Vec<u64>>> {
    let field = &plan.field;
    let rows = query.rows_per_group();
    let mut values = Vec::with_capacity(query.g);
    for group in 0..query.g {
        let recipe = cancellation_recipe(plan, answers, group)?;
        for &(db, _) in &recipe {
            let len = answers[db].as_ref().map_or(0, |a| a.len());
            if len != rows {
                return Err(Error::InconsistentAnswers(format!(
                    "database {} answered {len} rows, expected {rows}",
                    db + 1
                )));
            }
        }
        let mut v = vec![0u64; rows];
        for &(db, c) in &recipe {
            let ans = answers[db].as_ref().unwrap();
            for (slot, value) in v.iter_mut().enumerate() {
                *value = field.add(*value, field.mul(c, ans[slot]));
            }
        }
        values.push(v);
    }
    Ok(values)
}

/// Recovers all L symbols of the desired message from the answers of the
/// grouped databases.
pub fn decode(
    query: &QueryPlan,
    plan: &StoragePlan,
    answers: &[Option<Vec<u64>>],
) -> Result<Vec<u64>> {
    let field = &plan.field;
    let values = group_values(plan, query, answers)?;
    match &query.scheme {
        QueryScheme::NoCollusion(p) => {
            let mut out = vec![0u64; query.l];
            for (n, rows) in p.group_rows.iter().enumerate() {
                for (r, row) in rows.iter().enumerate() {
                    let Some(&(_, j)) = row.terms.iter().find(|&&(m, _)| m == query.desired)
                    else {
                        continue;
                    };
                    let interference = match row.side_info {
                        Some((src_g, src_r)) => values[src_g][src_r],
                        None => 0,
                    };
                    let u = field.sub(values[n][r], interference);
                    out[p.perms[query.desired][j]] = u;
                }
            }
            Ok(out)
        }
        QueryScheme::Colluding(p) => {
            // Aggregate coded values per chunk, then extend via the MDS
            // structure to the side-information positions.
            let mut sigma: Vec<Vec<u64>> = p.chunks.iter().map(|c| vec![0u64; c.y]).collect();
            for (n, rows) in p.group_rows.iter().enumerate() {
                for (r, row) in rows.iter().enumerate() {
                    if row.desired_pos.is_none() {
                        if let Some((ci, pos)) = row.coded {
                            sigma[ci][pos] = values[n][r];
                        }
                    }
                }
            }
            for (ci, chunk) in p.chunks.iter().enumerate() {
                let mds = crate::coding::MdsGenerator::vandermonde(chunk.y, chunk.z, field)?;
                let head = mds.matrix().submatrix_rows(&(0..chunk.z).collect::<Vec<_>>());
                let rhs = Matrix::from_rows(
                    sigma[ci][..chunk.z].iter().map(|&v| vec![v]).collect(),
                )?;
                let info = head.solve(&rhs, field)?;
                for pos in chunk.z..chunk.y {
                    let mut acc = 0u64;
                    for (j, &c) in mds.row(pos).iter().enumerate() {
                        acc = field.add(acc, field.mul(c, info[(j, 0)]));
                    }
                    sigma[ci][pos] = acc;
                }
            }
            let mut coded_desired = vec![0u64; query.l];
            for (n, rows) in p.group_rows.iter().enumerate() {
                for (r, row) in rows.iter().enumerate() {
                    if let Some(pos) = row.desired_pos {
                        let interference = match row.coded {
                            Some((ci, cpos)) => sigma[ci][cpos],
                            None => 0,
                        };
                        coded_desired[pos] = field.sub(values[n][r], interference);
                    }
                }
            }
            let rhs = Matrix::from_rows(coded_desired.iter().map(|&v| vec![v]).collect())?;
            let w = p.precoders[query.desired].solve(&rhs, field)?;
            Ok((0..query.l).map(|i| w[(i, 0)]).collect())
        }
    }
}

/// Queries, answers, the decoded message, and download counts for one
/// retrieval.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub plan: QueryPlan,
    pub answers: Vec<Option<Vec<u64>>>,
    pub decoded: Vec<u64>,
    pub per_group_download: Vec<usize>,
    pub total_download: usize,
}

impl Transcript {
    pub fn download_count(&self) -> (usize, &[usize]) {
        (self.total_download, &self.per_group_download)
    }
}

/// One end-to-end retrieval plus the messages it ran against.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub storage: StoragePlan,
    pub messages: Matrix,
    pub transcript: Transcript,
}

/// Runs one full retrieval with fresh random messages, storage noise, and
/// query randomness drawn from `rng`.
pub fn simulate<R: Rng + ?Sized>(
    params: &SystemParams,
    grouping: &Grouping,
    desired: usize,
    rng: &mut R,
) -> Result<SimRun> {
    let field = Field::new(params.q)?;
    let l = check_subpacket(params, grouping.g())?;
    let messages = random_messages(params.k, l, &field, rng);
    let storage = build_storage(grouping, &messages, params, rng)?;
    let plan = generate_queries(params, grouping, desired, rng)?;

    let mut answers: Vec<Option<Vec<u64>>> = vec![None; params.n];
    for group in grouping.groups() {
        for db in group.indices() {
            answers[db] = Some(answer(db, &storage, &plan)?);
        }
    }
    let decoded = decode(&plan, &storage, &answers)?;
    let per_group_download: Vec<usize> = grouping
        .groups()
        .iter()
        .map(|g| {
            g.indices()
                .iter()
                .map(|&db| answers[db].as_ref().map_or(0, |a| a.len()))
                .sum()
        })
        .collect();
    let total_download = per_group_download.iter().sum();
    Ok(SimRun {
        storage,
        messages,
        transcript: Transcript {
            plan,
            answers,
            decoded,
            per_group_download,
            total_download,
        },
    })
}
