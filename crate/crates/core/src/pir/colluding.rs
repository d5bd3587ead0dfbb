//! Query structure for 1 < T < g colluding databases. The desired message is
//! precoded by a uniformly random full-rank L x L matrix; every undesired
//! sum type gets its own MDS-expanded chunk so that the positions reused as
//! side information in the next round are reconstructible from the
//! downloaded ones, while any T group-level views stay jointly uniform.
//!
//! Per group, round i downloads (g - T)^(i-1) * T^(K-i) instances of each of
//! the C(K, i) i-sum types.

use itertools::Itertools;

use crate::coding::{Field, Matrix, MdsGenerator};
use crate::error::{Error, Result};
use crate::model::subpacket_len;

/// Coded block for one undesired sum type. The first `z` positions are
/// downloaded in round |subset|; positions z..y serve as side information in
/// round |subset| + 1. Every member message contributes `z` fresh precoder
/// rows expanded through the same y x z MDS generator, so aligned positions
/// sum to an MDS codeword of the aggregated information vector.
#[derive(Debug, Clone)]
pub struct Chunk {
    pub subset: Vec<usize>,
    pub z: usize,
    pub y: usize,
    /// Per member message, parallel to `subset`: the y x L coefficient bank
    /// MDS * precoder_rows.
    pub coded_rows: Vec<Matrix>,
}

/// One requested linear combination. The concrete coefficient on a message
/// row comes from the desired precoder or a chunk's coded bank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TRow {
    pub round: usize,
    pub desired_pos: Option<usize>,
    /// (chunk index, aligned position).
    pub coded: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct TPlan {
    pub t: usize,
    /// K uniformly random full-rank L x L matrices, one per message.
    pub precoders: Vec<Matrix>,
    pub chunks: Vec<Chunk>,
    pub group_rows: Vec<Vec<TRow>>,
}

impl TPlan {
    pub fn rows_per_group(&self) -> usize {
        self.group_rows.first().map_or(0, |r| r.len())
    }

    /// Concrete coefficient rows (one L-vector per touched message) for a
    /// row of the group query.
    pub fn row_coefficients(&self, desired: usize, row: &TRow) -> Vec<(usize, Vec<u64>)> {
        let mut out = Vec::new();
        if let Some(pos) = row.desired_pos {
            out.push((desired, self.precoders[desired].row(pos).to_vec()));
        }
        if let Some((ci, pos)) = row.coded {
            let chunk = &self.chunks[ci];
            for (slot, &m) in chunk.subset.iter().enumerate() {
                out.push((m, chunk.coded_rows[slot].row(pos).to_vec()));
            }
        }
        out.sort_by_key(|(m, _)| *m);
        out
    }
}

/// Per-group instance count of each i-sum type in round `i` (1-based).
pub fn round_instances(g: usize, t: usize, k: usize, i: usize) -> usize {
    (g - t).pow(i as u32 - 1) * t.pow((k - i) as u32)
}

/// Per-group total download of the colluding scheme.
pub fn per_group_downloads(g: usize, t: usize, k: usize) -> usize {
    (1..=k)
        .map(|i| crate::grouping::binomial(k, i) as usize * round_instances(g, t, k, i))
        .sum()
}

pub fn build_t_plan(
    g: usize,
    t: usize,
    k: usize,
    desired: usize,
    field: &Field,
    precoders: Vec<Matrix>,
) -> Result<TPlan> {
    if t < 2 || t >= g {
        return Err(Error::TRangeViolation { t, g });
    }
    if desired >= k {
        return Err(Error::BadParams(format!(
            "desired message {desired} outside 0..{k}"
        )));
    }
    let l = subpacket_len(g, k)?;
    if precoders.len() != k
        || precoders
            .iter()
            .any(|p| p.rows() != l || p.cols() != l)
    {
        return Err(Error::SubpacketMismatch {
            l: precoders.first().map_or(0, |p| p.rows()),
            expected: l,
        });
    }

    // Chunk registry over undesired subsets, by (size, lex) order. Precoder
    // rows of each message are consumed sequentially across its chunks.
    let undesired: Vec<usize> = (0..k).filter(|&m| m != desired).collect();
    let mut chunks = Vec::new();
    let mut row_cursor = vec![0usize; k];
    for size in 1..k {
        let z = g * round_instances(g, t, k, size);
        let reuse = g * (g - t).pow(size as u32) * t.pow((k - size - 1) as u32);
        let y = z + reuse;
        for subset in undesired.iter().copied().combinations(size) {
            let mds = MdsGenerator::vandermonde(y, z, field)?;
            let mut coded_rows = Vec::with_capacity(subset.len());
            for &m in &subset {
                let rows: Vec<usize> = (row_cursor[m]..row_cursor[m] + z).collect();
                row_cursor[m] += z;
                let info = precoders[m].submatrix_rows(&rows);
                coded_rows.push(mds.matrix().mul(&info, field)?);
            }
            chunks.push(Chunk {
                subset,
                z,
                y,
                coded_rows,
            });
        }
    }
    let chunk_index = |subset: &[usize]| {
        chunks
            .iter()
            .position(|c| c.subset == subset)
            .expect("chunk registered for every undesired subset")
    };

    let mut group_rows: Vec<Vec<TRow>> = vec![Vec::new(); g];
    let mut next_desired = 0usize;
    for round in 1..=k {
        let per_group = round_instances(g, t, k, round);
        for type_set in (0..k).combinations(round) {
            if type_set.contains(&desired) {
                let side: Vec<usize> = type_set
                    .iter()
                    .copied()
                    .filter(|&m| m != desired)
                    .collect();
                for n in 0..g {
                    for slot in 0..per_group {
                        let coded = if side.is_empty() {
                            None
                        } else {
                            let ci = chunk_index(&side);
                            Some((ci, chunks[ci].z + n * per_group + slot))
                        };
                        group_rows[n].push(TRow {
                            round,
                            desired_pos: Some(next_desired),
                            coded,
                        });
                        next_desired += 1;
                    }
                }
            } else {
                let ci = chunk_index(&type_set);
                for n in 0..g {
                    for slot in 0..per_group {
                        group_rows[n].push(TRow {
                            round,
                            desired_pos: None,
                            coded: Some((ci, n * per_group + slot)),
                        });
                    }
                }
            }
        }
    }
    debug_assert_eq!(next_desired, l);
    Ok(TPlan {
        t,
        precoders,
        chunks,
        group_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::random_full_rank;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn plan(g: usize, t: usize, k: usize, desired: usize) -> TPlan {
        let field = Field::new(65537).unwrap();
        let l = subpacket_len(g, k).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let precoders = (0..k)
            .map(|_| random_full_rank(l, &field, &mut rng))
            .collect();
        build_t_plan(g, t, k, desired, &field, precoders).unwrap()
    }

    #[test]
    fn example_shape_downloads_nineteen_per_group() {
        let p = plan(3, 2, 3, 0);
        for rows in &p.group_rows {
            assert_eq!(rows.len(), 19);
        }
        // 12 singles, 6 pairs, 1 triple
        for rows in &p.group_rows {
            for (round, expected) in [(1usize, 12usize), (2, 6), (3, 1)] {
                assert_eq!(rows.iter().filter(|r| r.round == round).count(), expected);
            }
        }
        assert_eq!(per_group_downloads(3, 2, 3), 19);
    }

    #[test]
    fn chunk_shapes_match_the_reuse_budget() {
        let p = plan(3, 2, 3, 0);
        // subsets {1}, {2} expand 12 -> 18; subset {1,2} expands 6 -> 9
        let singles: Vec<_> = p.chunks.iter().filter(|c| c.subset.len() == 1).collect();
        assert_eq!(singles.len(), 2);
        for c in singles {
            assert_eq!((c.z, c.y), (12, 18));
        }
        let pair = p.chunks.iter().find(|c| c.subset.len() == 2).unwrap();
        assert_eq!((pair.z, pair.y), (6, 9));
    }

    #[test]
    fn round_counts_for_listed_tuples() {
        assert_eq!(per_group_downloads(3, 2, 2), 5);
        assert_eq!(per_group_downloads(4, 2, 2), 6);
        assert_eq!(per_group_downloads(4, 3, 2), 7);
    }

    #[test]
    fn desired_positions_partition_the_subpacket() {
        for (g, t, k, d) in [(3usize, 2usize, 2usize, 0usize), (3, 2, 3, 1), (4, 3, 2, 1)] {
            let p = plan(g, t, k, d);
            let l = subpacket_len(g, k).unwrap();
            let mut seen = vec![0usize; l];
            for rows in &p.group_rows {
                for row in rows {
                    if let Some(pos) = row.desired_pos {
                        seen[pos] += 1;
                    }
                }
            }
            assert_eq!(seen, vec![1; l]);
        }
    }

    #[test]
    fn rejects_bad_t() {
        let field = Field::new(65537).unwrap();
        assert!(matches!(
            build_t_plan(3, 3, 2, 0, &field, vec![]),
            Err(Error::TRangeViolation { .. })
        ));
        assert!(matches!(
            build_t_plan(3, 1, 2, 0, &field, vec![]),
            Err(Error::TRangeViolation { .. })
        ));
    }
}
