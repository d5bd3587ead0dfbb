//! Bundled instances used across the test suites and shipped as CLI example
//! configurations, plus a seeded random-instance generator.

use rand::Rng;

use crate::error::Result;
use crate::model::{CommMatrix, Grouping, SystemParams};

/// One complete problem instance. `grouping` is populated for instances
/// whose link inventory is not enumerated and must therefore skip the
/// solver; `x_override` supplies the security level for baseline
/// comparisons in the same situation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub params: SystemParams,
    pub comm: CommMatrix,
    pub grouping: Option<Grouping>,
    pub x_override: Option<usize>,
}

pub const DEFAULT_Q: u64 = 65537;

/// Four databases, two messages, no collusion, a single pairwise link.
pub fn four_db_single_link() -> Instance {
    Instance {
        params: SystemParams::new(4, 2, 1, DEFAULT_Q, 41).unwrap(),
        comm: CommMatrix::from_links(4, &[vec![1, 2]]).unwrap(),
        grouping: None,
        x_override: None,
    }
}

/// Seven databases, two messages, no collusion, nine links of mixed sizes;
/// the optimum leaves one database unused.
pub fn seven_db_nine_links() -> Instance {
    Instance {
        params: SystemParams::new(7, 2, 1, DEFAULT_Q, 42).unwrap(),
        comm: CommMatrix::from_entries(&[
            vec![1, 1, 1, 0, 0, 0, 0, 0, 1],
            vec![1, 0, 0, 1, 1, 0, 0, 0, 1],
            vec![1, 0, 1, 1, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 1, 1, 0, 0],
            vec![0, 1, 1, 0, 0, 1, 0, 1, 0],
            vec![0, 1, 0, 0, 1, 1, 0, 0, 1],
            vec![0, 0, 0, 0, 0, 0, 1, 1, 1],
        ])
        .unwrap(),
        grouping: None,
        x_override: None,
    }
}

/// Six databases, three messages, two colluding, seven links.
pub fn six_db_seven_links() -> Instance {
    Instance {
        params: SystemParams::new(6, 3, 2, DEFAULT_Q, 43).unwrap(),
        comm: CommMatrix::from_entries(&[
            vec![0, 1, 1, 1, 1, 0, 0],
            vec![1, 0, 0, 0, 0, 1, 1],
            vec![0, 1, 1, 0, 0, 1, 1],
            vec![1, 0, 0, 1, 1, 0, 0],
            vec![0, 1, 0, 1, 0, 1, 0],
            vec![0, 0, 1, 0, 1, 0, 1],
        ])
        .unwrap(),
        grouping: None,
        x_override: None,
    }
}

/// Thirty databases with nineteen highly connected ones (link inventory not
/// enumerated): the ten-pair grouping is supplied directly, along with the
/// security level X = 19 for baseline comparisons.
pub fn thirty_db_ten_pairs() -> Instance {
    let pairs: Vec<Vec<usize>> = (0..10).map(|i| vec![2 * i + 1, 2 * i + 2]).collect();
    Instance {
        params: SystemParams::new(30, 2, 1, DEFAULT_Q, 44).unwrap(),
        comm: CommMatrix::from_links(30, &[]).unwrap(),
        grouping: Some(Grouping::from_lists(30, &pairs).unwrap()),
        x_override: Some(19),
    }
}

/// Four databases with two disjoint pairwise links: every link has exactly
/// N - g members and lambda/M equals g over the grouped total, so the
/// achieved rate meets the converse bound.
pub fn tight_four_db() -> Instance {
    Instance {
        params: SystemParams::new(4, 2, 1, DEFAULT_Q, 45).unwrap(),
        comm: CommMatrix::from_links(4, &[vec![1, 2], vec![3, 4]]).unwrap(),
        grouping: None,
        x_override: None,
    }
}

/// Six-database variant of the bound-meeting construction, valid for both
/// T = 1 and T = 2.
pub fn tight_six_db(t: usize) -> Instance {
    Instance {
        params: SystemParams::new(6, 2, t, DEFAULT_Q, 46).unwrap(),
        comm: CommMatrix::from_links(6, &[vec![1, 2, 3], vec![4, 5, 6]]).unwrap(),
        grouping: None,
        x_override: None,
    }
}

pub fn all_golden() -> Vec<Instance> {
    vec![
        four_db_single_link(),
        seven_db_nine_links(),
        six_db_seven_links(),
        thirty_db_ten_pairs(),
    ]
}

/// Random instance with N <= 8 databases, K <= 3 messages, T = 1, and a
/// handful of random links. Always feasible: the generator rejects link
/// sets that forbid every pair.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> Result<Instance> {
    loop {
        let n = rng.random_range(4..=8usize);
        let k = rng.random_range(1..=3usize);
        let m = rng.random_range(0..=4usize);
        let links: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let size = rng.random_range(2..n);
                let mut dbs: Vec<usize> = (1..=n).collect();
                for i in (1..dbs.len()).rev() {
                    dbs.swap(i, rng.random_range(0..=i));
                }
                dbs.truncate(size);
                dbs.sort_unstable();
                dbs
            })
            .collect();
        let comm = CommMatrix::from_links(n, &links)?;
        let params = SystemParams::new(n, k, 1, DEFAULT_Q, rng.random())?;
        if comm.max_link_size() + params.t > n {
            continue;
        }
        // At least two disjoint uncovered pairs must exist so the solver can
        // return a grouping with g > T = 1.
        let cfg = crate::grouping::SolverConfig::default();
        if crate::grouping::solve_grouping(&params, &comm, &cfg).is_ok() {
            return Ok(Instance {
                params,
                comm,
                grouping: None,
                x_override: None,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_matrices_have_expected_shape() {
        let e2 = seven_db_nine_links();
        assert_eq!(e2.comm.m(), 9);
        assert_eq!(e2.comm.max_link_size(), 4);
        assert_eq!(e2.comm.omega(3), 6);
        assert_eq!(e2.comm.omega(2), 2);
        assert_eq!(e2.comm.omega(4), 1);

        let e3 = six_db_seven_links();
        assert_eq!(e3.comm.m(), 7);
        assert_eq!(e3.comm.max_link_size(), 3);
        let mut sizes: Vec<usize> = e3.comm.links().iter().map(|l| l.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 3, 3, 3, 3, 3, 3]);
        assert_eq!(e3.comm.lambda_max(), 4);
    }

    #[test]
    fn random_instances_are_solvable() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let inst = random_instance(&mut rng).unwrap();
            assert!(inst.params.n <= 8);
            assert!(crate::grouping::feasibility_check(&inst.params, &inst.comm));
        }
    }
}
