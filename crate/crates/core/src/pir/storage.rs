//! Noise-shared storage: within a group of m databases, m - 1 members hold
//! the messages plus an independent uniform noise matrix each, and the last
//! member holds the sum of all the group's noise matrices.

use rand::Rng;

use crate::coding::{Field, Matrix};
use crate::error::{Error, Result};
use crate::model::{Grouping, SystemParams};

/// What one database stores, as a linear form:
/// `stored = (messages if has_messages) + sum of the listed noise matrices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareRole {
    pub group: usize,
    pub has_messages: bool,
    /// Global indices into the plan's noise registry.
    pub noise_terms: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StoragePlan {
    pub k: usize,
    pub l: usize,
    pub field: Field,
    pub grouping: Grouping,
    /// Per database: `None` for dropped databases, which store nothing.
    pub roles: Vec<Option<ShareRole>>,
    pub stored: Vec<Option<Matrix>>,
    /// Total number of K x L noise matrices across all groups.
    pub noise_count: usize,
}

impl StoragePlan {
    /// Materializes stored matrices from explicit roles and noise values.
    /// `build_storage` supplies the standard roles; verification harnesses
    /// supply replicated-share layouts.
    pub fn assemble(
        params: &SystemParams,
        grouping: &Grouping,
        messages: &Matrix,
        roles: Vec<Option<ShareRole>>,
        noise: &[Matrix],
    ) -> Result<Self> {
        let field = Field::new(params.q)?;
        let k = messages.rows();
        let l = messages.cols();
        if roles.len() != grouping.n() {
            return Err(Error::DimensionMismatch("one role slot per database".into()));
        }
        for m in noise {
            if m.rows() != k || m.cols() != l {
                return Err(Error::DimensionMismatch("noise matrices are K x L".into()));
            }
        }
        let mut stored = Vec::with_capacity(roles.len());
        for role in &roles {
            match role {
                None => stored.push(None),
                Some(r) => {
                    let mut acc = if r.has_messages {
                        messages.clone()
                    } else {
                        Matrix::zeros(k, l)
                    };
                    for &t in &r.noise_terms {
                        acc = acc.add(&noise[t], &field)?;
                    }
                    stored.push(Some(acc));
                }
            }
        }
        Ok(StoragePlan {
            k,
            l,
            field,
            grouping: grouping.clone(),
            roles,
            stored,
            noise_count: noise.len(),
        })
    }

    /// The standard role layout: per group, members in ascending database
    /// order; all but the last hold messages plus one fresh noise term, the
    /// last holds the sum of the group's noise terms.
    pub fn standard_roles(grouping: &Grouping) -> Result<(Vec<Option<ShareRole>>, usize)> {
        let mut roles: Vec<Option<ShareRole>> = vec![None; grouping.n()];
        let mut next_noise = 0;
        for (gi, group) in grouping.groups().iter().enumerate() {
            let members = group.indices();
            let m = members.len();
            if m < 2 {
                return Err(Error::GroupTooSmall {
                    group: gi + 1,
                    size: m,
                });
            }
            let ids: Vec<usize> = (0..m - 1).map(|i| next_noise + i).collect();
            for (pos, &db) in members.iter().enumerate() {
                roles[db] = Some(if pos < m - 1 {
                    ShareRole {
                        group: gi,
                        has_messages: true,
                        noise_terms: vec![ids[pos]],
                    }
                } else {
                    ShareRole {
                        group: gi,
                        has_messages: false,
                        noise_terms: ids.clone(),
                    }
                });
            }
            next_noise += m - 1;
        }
        Ok((roles, next_noise))
    }
}

/// Draws fresh uniform noise and assembles the standard storage layout.
pub fn build_storage<R: Rng + ?Sized>(
    grouping: &Grouping,
    messages: &Matrix,
    params: &SystemParams,
    rng: &mut R,
) -> Result<StoragePlan> {
    let field = Field::new(params.q)?;
    let (roles, noise_count) = StoragePlan::standard_roles(grouping)?;
    let noise: Vec<Matrix> = (0..noise_count)
        .map(|_| Matrix::uniform(messages.rows(), messages.cols(), &field, rng))
        .collect();
    StoragePlan::assemble(params, grouping, messages, roles, &noise)
}

/// Deterministic variant for tests: the caller supplies the noise matrices,
/// laid out group by group (m - 1 matrices per group of size m).
pub fn build_storage_with_noise(
    grouping: &Grouping,
    messages: &Matrix,
    params: &SystemParams,
    noise: &[Matrix],
) -> Result<StoragePlan> {
    let (roles, noise_count) = StoragePlan::standard_roles(grouping)?;
    if noise.len() != noise_count {
        return Err(Error::DimensionMismatch(format!(
            "expected {noise_count} noise matrices, got {}",
            noise.len()
        )));
    }
    StoragePlan::assemble(params, grouping, messages, roles, noise)
}

pub fn random_messages<R: Rng + ?Sized>(
    k: usize,
    l: usize,
    field: &Field,
    rng: &mut R,
) -> Matrix {
    Matrix::uniform(k, l, field, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn setup() -> (SystemParams, Grouping, Matrix) {
        let params = SystemParams::new(4, 2, 1, 65537, 9)
            .unwrap()
            .with_group_count(2)
            .unwrap();
        let grouping = Grouping::from_lists(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        let field = Field::new(params.q).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let messages = random_messages(params.k, params.l, &field, &mut rng);
        (params, grouping, messages)
    }

    #[test]
    fn standard_layout_assigns_noise_sum_to_largest_index() {
        let (params, grouping, messages) = setup();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let plan = build_storage(&grouping, &messages, &params, &mut rng).unwrap();
        // group {1,3}: database 1 noisy share, database 3 noise only
        assert!(plan.roles[0].as_ref().unwrap().has_messages);
        assert!(!plan.roles[2].as_ref().unwrap().has_messages);
        assert!(plan.roles[1].as_ref().unwrap().has_messages);
        assert!(!plan.roles[3].as_ref().unwrap().has_messages);
        // stored(1) - stored(3) recovers the messages for a pair group
        let diff = plan.stored[0]
            .as_ref()
            .unwrap()
            .sub(plan.stored[2].as_ref().unwrap(), &plan.field)
            .unwrap();
        assert_eq!(diff, messages);
    }

    #[test]
    fn zero_noise_hook_stores_messages_in_clear() {
        let (params, grouping, messages) = setup();
        let zeros = vec![Matrix::zeros(params.k, params.l); 2];
        let plan =
            build_storage_with_noise(&grouping, &messages, &params, &zeros).unwrap();
        assert_eq!(plan.stored[0].as_ref().unwrap(), &messages);
        assert_eq!(
            plan.stored[2].as_ref().unwrap(),
            &Matrix::zeros(params.k, params.l)
        );
    }

    #[test]
    fn noise_sum_identity_holds_per_group() {
        // sum of the m - 1 noisy shares minus the noise-only share equals
        // (m - 1) copies of the messages.
        let params = SystemParams::new(6, 2, 1, 65537, 9)
            .unwrap()
            .with_group_count(2)
            .unwrap();
        let grouping = Grouping::from_lists(6, &[vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let field = Field::new(params.q).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let messages = random_messages(params.k, params.l, &field, &mut rng);
        let plan = build_storage(&grouping, &messages, &params, &mut rng).unwrap();
        let mut acc = Matrix::zeros(params.k, params.l);
        for db in [0usize, 1] {
            acc = acc.add(plan.stored[db].as_ref().unwrap(), &field).unwrap();
        }
        acc = acc.sub(plan.stored[2].as_ref().unwrap(), &field).unwrap();
        let twice = messages.add(&messages, &field).unwrap();
        assert_eq!(acc, twice);
    }

    #[test]
    fn dropped_databases_store_nothing() {
        let params = SystemParams::new(7, 2, 1, 65537, 9)
            .unwrap()
            .with_group_count(3)
            .unwrap();
        let grouping =
            Grouping::from_lists(7, &[vec![1, 4], vec![2, 5], vec![3, 6]]).unwrap();
        let field = Field::new(params.q).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let messages = random_messages(params.k, params.l, &field, &mut rng);
        let plan = build_storage(&grouping, &messages, &params, &mut rng).unwrap();
        assert!(plan.stored[6].is_none());
        assert!(plan.roles[6].is_none());
    }
}
