//! Core domain types: system parameters, the communication matrix with its
//! link sets, database groupings, and the column-weight counts shared by the
//! solver and the rate analysis.
//!
//! Databases are 1-indexed in every external format and 0-indexed internally;
//! the conversion happens at ingestion and rendering only.

use num::BigRational;

use crate::coding::is_prime;
use crate::error::{Error, Result};

/// Exact rational used for every rate value. Floating point appears only in
/// human-readable rendering.
pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// System-wide parameters. `l` is the subpacket length in field symbols and
/// is fixed to g^K once a grouping with g groups is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub l: usize,
    pub q: u64,
    pub seed: u64,
}

impl SystemParams {
    pub fn new(n: usize, k: usize, t: usize, q: u64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewDatabases { n });
        }
        if k < 1 {
            return Err(Error::BadParams("K must be at least 1".into()));
        }
        if t < 1 || t > n {
            return Err(Error::BadParams(format!("T = {t} outside 1..=N")));
        }
        if !is_prime(q) {
            return Err(Error::BadParams(format!("q = {q} is not prime")));
        }
        if q <= n as u64 {
            return Err(Error::BadParams(format!(
                "q = {q} must exceed N = {n} to leave room for evaluation points"
            )));
        }
        Ok(SystemParams {
            n,
            k,
            t,
            l: 0,
            q,
            seed,
        })
    }

    /// Fixes the subpacket length to g^K for a grouping with `g` groups.
    pub fn with_group_count(mut self, g: usize) -> Result<Self> {
        self.l = subpacket_len(g, self.k)?;
        Ok(self)
    }
}

pub fn subpacket_len(g: usize, k: usize) -> Result<usize> {
    let mut l = 1usize;
    for _ in 0..k {
        l = l
            .checked_mul(g)
            .filter(|&v| v <= 1 << 22)
            .ok_or(Error::SubpacketTooLarge { g, k })?;
    }
    Ok(l)
}

/// Set of databases stored as a bitmask (internal indices 0..N-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DbSet(pub u64);

impl DbSet {
    pub fn empty() -> Self {
        DbSet(0)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        DbSet(indices.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn contains(&self, db: usize) -> bool {
        self.0 >> db & 1 == 1
    }

    pub fn insert(&mut self, db: usize) {
        self.0 |= 1 << db;
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(&self, other: &DbSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(&self, other: &DbSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// Members as 0-indexed ascending indices.
    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Members as 1-indexed ascending indices, for display.
    pub fn external(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

/// The N x M binary communication matrix together with its column supports
/// (the link sets). Duplicate columns are collapsed on ingestion; a counter
/// of collapsed duplicates is kept for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommMatrix {
    n: usize,
    links: Vec<DbSet>,
    duplicates_collapsed: usize,
}

impl CommMatrix {
    /// Validates a raw binary matrix given as rows. Rejects non-binary
    /// entries, empty columns, and weight-1 columns (security against each
    /// single database is a standing assumption, never a column).
    pub fn from_entries(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewDatabases { n });
        }
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        let mut links = Vec::with_capacity(m);
        for col in 0..m {
            let mut set = DbSet::empty();
            for (row, r) in rows.iter().enumerate() {
                match r[col] {
                    0 => {}
                    1 => set.insert(row),
                    value => return Err(Error::NonBinaryEntry { row, col, value }),
                }
            }
            match set.len() {
                0 => return Err(Error::EmptyColumn { col }),
                1 => return Err(Error::SingletonLinkColumn { col }),
                _ => links.push(set),
            }
        }
        Ok(Self::from_link_sets(n, links))
    }

    /// Builds from 1-indexed link lists, the form used by configuration
    /// files.
    pub fn from_links(n: usize, links: &[Vec<usize>]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewDatabases { n });
        }
        if n > 64 {
            return Err(Error::BadParams(format!("N = {n} exceeds the supported 64")));
        }
        let mut sets = Vec::with_capacity(links.len());
        for (col, link) in links.iter().enumerate() {
            let mut set = DbSet::empty();
            for &db in link {
                if db < 1 || db > n {
                    return Err(Error::DatabaseOutOfRange { db, n });
                }
                set.insert(db - 1);
            }
            match set.len() {
                0 => return Err(Error::EmptyColumn { col }),
                1 => return Err(Error::SingletonLinkColumn { col }),
                _ => sets.push(set),
            }
        }
        Ok(Self::from_link_sets(n, sets))
    }

    fn from_link_sets(n: usize, sets: Vec<DbSet>) -> Self {
        let mut links: Vec<DbSet> = Vec::with_capacity(sets.len());
        let mut duplicates = 0;
        for set in sets {
            if links.contains(&set) {
                duplicates += 1;
            } else {
                links.push(set);
            }
        }
        CommMatrix {
            n,
            links,
            duplicates_collapsed: duplicates,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns M after duplicate collapse.
    pub fn m(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[DbSet] {
        &self.links
    }

    pub fn duplicates_collapsed(&self) -> usize {
        self.duplicates_collapsed
    }

    /// X: the maximum link size, 0 when there are no links.
    pub fn max_link_size(&self) -> usize {
        self.links.iter().map(|l| l.len()).max().unwrap_or(0)
    }

    /// The binary entries, reconstructed row-major.
    pub fn entries(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|row| {
                self.links
                    .iter()
                    .map(|l| u64::from(l.contains(row)))
                    .collect()
            })
            .collect()
    }

    /// Omega_i: the number of columns whose support size equals `i`.
    pub fn omega(&self, i: usize) -> usize {
        self.links.iter().filter(|l| l.len() == i).count()
    }

    /// lambda: the maximum over databases of the number of links that
    /// exclude it (maximum row sum of the complement matrix).
    pub fn lambda_max(&self) -> usize {
        (0..self.n)
            .map(|db| self.links.iter().filter(|l| !l.contains(db)).count())
            .max()
            .unwrap_or(0)
    }

    /// True when at least one member of `group` lies outside every link,
    /// i.e. no link covers the whole group.
    pub fn permits_group(&self, group: &DbSet) -> bool {
        self.links.iter().all(|link| !group.is_subset_of(link))
    }
}

/// Disjoint database groups of size >= 2 plus the set of dropped databases.
/// Groups are kept in canonical order (ascending smallest member).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    n: usize,
    groups: Vec<DbSet>,
}

impl Grouping {
    pub fn new(n: usize, groups: Vec<DbSet>) -> Result<Self> {
        let mut seen = DbSet::empty();
        for (gi, g) in groups.iter().enumerate() {
            if g.len() < 2 {
                return Err(Error::GroupTooSmall {
                    group: gi + 1,
                    size: g.len(),
                });
            }
            if g.iter().any(|db| db >= n) {
                return Err(Error::DatabaseOutOfRange {
                    db: g.iter().max().unwrap_or(0) + 1,
                    n,
                });
            }
            if g.intersects(&seen) {
                return Err(Error::BadParams("groups are not pairwise disjoint".into()));
            }
            seen.0 |= g.0;
        }
        let mut groups = groups;
        groups.sort_by_key(|g| g.0 & g.0.wrapping_neg());
        Ok(Grouping { n, groups })
    }

    /// Builds from 1-indexed member lists.
    pub fn from_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let mut groups = Vec::with_capacity(lists.len());
        for list in lists {
            for &db in list {
                if db < 1 || db > n {
                    return Err(Error::DatabaseOutOfRange { db, n });
                }
            }
            groups.push(DbSet::from_indices(
                &list.iter().map(|&db| db - 1).collect::<Vec<_>>(),
            ));
        }
        Grouping::new(n, groups)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[DbSet] {
        &self.groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len()).collect()
    }

    pub fn total_grouped(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    pub fn dropped(&self) -> DbSet {
        let used = self.groups.iter().fold(0u64, |m, g| m | g.0);
        DbSet(!used & ((1u64 << self.n) - 1))
    }

    /// Group index of a database, if any.
    pub fn group_of(&self, db: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(db))
    }

    /// Groups as 1-indexed member lists.
    pub fn external_lists(&self) -> Vec<Vec<usize>> {
        self.groups.iter().map(|g| g.external()).collect()
    }

    /// The ceil(N/2) x N binary similarity-matrix form, display only: row i
    /// marks the members of group i, remaining rows are zero.
    pub fn similarity_matrix(&self) -> Vec<Vec<u64>> {
        let rows = self.n.div_ceil(2);
        let mut s = vec![vec![0u64; self.n]; rows];
        for (i, g) in self.groups.iter().enumerate() {
            for db in g.iter() {
                s[i][db] = 1;
            }
        }
        s
    }
}
