//! Closed-form rate computations: the group-based achievable rate, the
//! classical baseline for symmetric security, the converse upper bound, the
//! beneficial security-level range, and the tightness condition. All values
//! are exact rationals.

use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{CommMatrix, DbSet, Grouping, Rational};

/// Capacity of T-colluding PIR with g databases and K messages:
/// (1 + T/g + ... + (T/g)^(K-1))^-1.
pub fn c_tpir(t: usize, g: usize, k: usize) -> Result<Rational> {
    if t < 1 || t >= g {
        return Err(Error::TRangeViolation { t, g });
    }
    if k < 1 {
        return Err(Error::BadParams("K must be at least 1".into()));
    }
    let ratio = Rational::new(BigInt::from(t), BigInt::from(g));
    let mut term = Rational::one();
    let mut sum = Rational::zero();
    for _ in 0..k {
        sum += &term;
        term *= &ratio;
    }
    Ok(sum.recip())
}

/// Achievable rate (g / sum M_i) * C_TPIR(T, g, K).
pub fn achievable_rate(grouping: &Grouping, t: usize, k: usize) -> Result<Rational> {
    let g = grouping.g();
    if t >= g {
        return Err(Error::GNotGreaterThanT { g, t });
    }
    let fraction = Rational::new(BigInt::from(g), BigInt::from(grouping.total_grouped()));
    Ok(fraction * c_tpir(t, g, k)?)
}

/// K -> infinity limit of the achievable rate: (g / sum M_i) * (1 - T/g).
pub fn asymptotic_achievable_rate(grouping: &Grouping, t: usize) -> Result<Rational> {
    let g = grouping.g();
    if t >= g {
        return Err(Error::GNotGreaterThanT { g, t });
    }
    let fraction = Rational::new(BigInt::from(g), BigInt::from(grouping.total_grouped()));
    let privacy = Rational::one() - Rational::new(BigInt::from(t), BigInt::from(g));
    Ok(fraction * privacy)
}

/// Asymptotic capacity of the classical symmetric scheme:
/// 1 - (X + T)/N when X + T < N, otherwise 0.
pub fn xstpir_asymptotic_rate(x: usize, t: usize, n: usize) -> Rational {
    if x + t >= n {
        return Rational::zero();
    }
    Rational::one() - Rational::new(BigInt::from(x + t), BigInt::from(n))
}

/// Geometric penalty of a link: sum over j in 1..K of (T / (N - |link|))^j.
fn eta(link_size: usize, t: usize, n: usize, k: usize) -> Rational {
    let ratio = Rational::new(BigInt::from(t), BigInt::from(n - link_size));
    let mut term = ratio.clone();
    let mut sum = Rational::zero();
    for _ in 1..k {
        sum += &term;
        term *= &ratio;
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    pub bound: Rational,
    /// Set when the matrix has no links, where the bound degenerates to 1.
    pub unconstrained: bool,
}

/// Converse upper bound lambda / (M + sum_i eta(X_i)) for a given
/// communication matrix.
pub fn upper_bound(b: &CommMatrix, t: usize, n: usize, k: usize) -> Result<UpperBound> {
    let x = b.max_link_size();
    if x + t > n {
        return Err(Error::XTTooLarge { x, t, n });
    }
    if b.m() == 0 {
        return Ok(UpperBound {
            bound: Rational::one(),
            unconstrained: true,
        });
    }
    let lambda = Rational::from(BigInt::from(b.lambda_max()));
    let mut denom = Rational::from(BigInt::from(b.m()));
    for link in b.links() {
        denom += eta(link.len(), t, n, k);
    }
    Ok(UpperBound {
        bound: lambda / denom,
        unconstrained: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMode {
    /// Lower endpoint from the K -> infinity rate.
    Asymptotic,
    /// Lower endpoint from the finite-K achievable rate.
    FiniteK(usize),
}

/// Security levels X for which the grouped scheme beats the classical
/// baseline: lo = ceil(N (1 - (g - T)/sum M_i) - T) in asymptotic mode (with
/// the finite-K analog substituting the finite rate), hi = N - g.
pub fn beneficial_x_range(
    grouping: &Grouping,
    t: usize,
    n: usize,
    mode: RangeMode,
) -> Result<(i64, i64)> {
    let rate = match mode {
        RangeMode::Asymptotic => asymptotic_achievable_rate(grouping, t)?,
        RangeMode::FiniteK(k) => achievable_rate(grouping, t, k)?,
    };
    // Smallest X with 1 - (X+T)/N <= rate, i.e. X >= N(1 - rate) - T.
    let threshold = Rational::from(BigInt::from(n)) * (Rational::one() - rate)
        - Rational::from(BigInt::from(t));
    let lo = ceil_to_i64(&threshold);
    let hi = (n - grouping.g()) as i64;
    if lo > hi {
        return Err(Error::EmptyRange { lo, hi });
    }
    Ok((lo, hi))
}

fn ceil_to_i64(r: &Rational) -> i64 {
    use num::ToPrimitive;
    r.ceil()
        .to_integer()
        .to_i64()
        .expect("range endpoint fits in i64")
}

/// Rate when a single group of M_1 databases serves all requests: 1/(M_1 K).
pub fn single_group_rate(m1: usize, k: usize) -> Result<Rational> {
    if m1 < 2 {
        return Err(Error::GroupTooSmall { group: 1, size: m1 });
    }
    if k < 1 {
        return Err(Error::BadParams("K must be at least 1".into()));
    }
    Ok(Rational::new(BigInt::one(), BigInt::from(m1 * k)))
}

/// True iff every link has exactly N - g members and lambda/M equals
/// g / sum M_i, the condition under which the achievable rate meets the
/// converse bound.
pub fn tightness_check(b: &CommMatrix, grouping: &Grouping) -> bool {
    if b.m() == 0 {
        return false;
    }
    let n = b.n();
    let g = grouping.g();
    if b.links().iter().any(|l| l.len() != n - g) {
        return false;
    }
    let lhs = Rational::new(BigInt::from(b.lambda_max()), BigInt::from(b.m()));
    let rhs = Rational::new(BigInt::from(g), BigInt::from(grouping.total_grouped()));
    lhs == rhs
}

/// Variant of the tightness condition with the whole fleet in groups
/// (lambda/M = g/N). The two forms agree exactly when no database is
/// dropped; reports surface both when they differ.
pub fn tightness_check_no_drop_form(b: &CommMatrix, grouping: &Grouping) -> bool {
    if b.m() == 0 {
        return false;
    }
    let n = b.n();
    let g = grouping.g();
    if b.links().iter().any(|l| l.len() != n - g) {
        return false;
    }
    let lhs = Rational::new(BigInt::from(b.lambda_max()), BigInt::from(b.m()));
    let rhs = Rational::new(BigInt::from(g), BigInt::from(n));
    lhs == rhs
}

/// Full closed-form summary for one instance.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub achievable: Rational,
    pub asymptotic_achievable: Rational,
    pub baseline_xstpir: Rational,
    pub upper_bound: Rational,
    pub bound_unconstrained: bool,
    pub beneficial_x_range: Option<(i64, i64)>,
    pub beneficial_x_range_finite_k: Option<(i64, i64)>,
    pub tight: bool,
    pub tight_no_drop_form: bool,
    pub g: usize,
    pub group_sizes: Vec<usize>,
    pub dropped: DbSet,
}

/// Composes the per-quantity operations. `x_for_baseline` normally comes
/// from the matrix; instances whose link inventory is not enumerated can
/// override it.
pub fn rate_report(
    b: &CommMatrix,
    grouping: &Grouping,
    t: usize,
    k: usize,
    x_for_baseline: Option<usize>,
) -> Result<RateReport> {
    let n = b.n();
    let x = x_for_baseline.unwrap_or_else(|| b.max_link_size());
    let achievable = achievable_rate(grouping, t, k)?;
    let asymptotic = asymptotic_achievable_rate(grouping, t)?;
    let bound = upper_bound(b, t, n, k)?;
    Ok(RateReport {
        achievable,
        asymptotic_achievable: asymptotic,
        baseline_xstpir: xstpir_asymptotic_rate(x, t, n),
        upper_bound: bound.bound,
        bound_unconstrained: bound.unconstrained,
        beneficial_x_range: beneficial_x_range(grouping, t, n, RangeMode::Asymptotic).ok(),
        beneficial_x_range_finite_k: beneficial_x_range(grouping, t, n, RangeMode::FiniteK(k))
            .ok(),
        tight: tightness_check(b, grouping),
        tight_no_drop_form: tightness_check_no_drop_form(b, grouping),
        g: grouping.g(),
        group_sizes: grouping.group_sizes(),
        dropped: grouping.dropped(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational;

    #[test]
    fn tpir_capacity_values() {
        assert_eq!(c_tpir(1, 2, 2).unwrap(), rational(2, 3));
        assert_eq!(c_tpir(2, 3, 3).unwrap(), rational(9, 19));
        assert_eq!(c_tpir(3, 7, 1).unwrap(), rational(1, 1));
        assert!(matches!(
            c_tpir(2, 2, 3),
            Err(Error::TRangeViolation { .. })
        ));
    }

    #[test]
    fn achievable_rates_for_known_groupings() {
        let g1 = Grouping::from_lists(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(achievable_rate(&g1, 1, 2).unwrap(), rational(1, 3));

        let g2 = Grouping::from_lists(7, &[vec![1, 4], vec![2, 5], vec![3, 6]]).unwrap();
        assert_eq!(achievable_rate(&g2, 1, 2).unwrap(), rational(3, 8));

        let g3 = Grouping::from_lists(6, &[vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        assert_eq!(achievable_rate(&g3, 2, 3).unwrap(), rational(9, 38));
    }

    #[test]
    fn classical_baseline_values() {
        assert_eq!(xstpir_asymptotic_rate(2, 1, 4), rational(1, 4));
        assert_eq!(xstpir_asymptotic_rate(4, 1, 7), rational(2, 7));
        assert_eq!(xstpir_asymptotic_rate(19, 1, 30), rational(1, 3));
        assert_eq!(xstpir_asymptotic_rate(3, 1, 4), rational(0, 1));
    }

    #[test]
    fn upper_bound_single_link() {
        let b = CommMatrix::from_links(4, &[vec![1, 2]]).unwrap();
        let ub = upper_bound(&b, 1, 4, 2).unwrap();
        assert_eq!(ub.bound, rational(2, 3));
        assert!(!ub.unconstrained);
        let g = Grouping::from_lists(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        assert!(achievable_rate(&g, 1, 2).unwrap() <= ub.bound);
    }

    #[test]
    fn upper_bound_k1_and_no_links() {
        let b = CommMatrix::from_links(5, &[vec![1, 2], vec![3, 4, 5]]).unwrap();
        let ub = upper_bound(&b, 1, 5, 1).unwrap();
        let lambda = b.lambda_max() as i64;
        assert_eq!(ub.bound, rational(lambda, b.m() as i64));

        let empty = CommMatrix::from_links(5, &[]).unwrap();
        let ub = upper_bound(&empty, 1, 5, 3).unwrap();
        assert!(ub.unconstrained);
        assert_eq!(ub.bound, rational(1, 1));
    }

    #[test]
    fn upper_bound_rejects_oversized_x() {
        let b = CommMatrix::from_links(4, &[vec![1, 2, 3, 4]]).unwrap();
        assert!(matches!(
            upper_bound(&b, 1, 4, 2),
            Err(Error::XTTooLarge { .. })
        ));
    }

    #[test]
    fn beneficial_range_endpoints() {
        let pairs: Vec<Vec<usize>> = (0..10).map(|i| vec![2 * i + 1, 2 * i + 2]).collect();
        let g = Grouping::from_lists(30, &pairs).unwrap();
        assert_eq!(
            beneficial_x_range(&g, 1, 30, RangeMode::Asymptotic).unwrap(),
            (16, 20)
        );

        let g1 = Grouping::from_lists(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(
            beneficial_x_range(&g1, 1, 4, RangeMode::Asymptotic).unwrap(),
            (2, 2)
        );
    }

    #[test]
    fn beneficial_range_boundary_cases() {
        let g = Grouping::from_lists(6, &[vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        // asymptotic rate (2/6)(1/2) = 1/6: lo = ceil(6*(5/6) - 1) = 4 = hi.
        assert_eq!(
            beneficial_x_range(&g, 1, 6, RangeMode::Asymptotic).unwrap(),
            (4, 4)
        );
        let g2 = Grouping::from_lists(6, &[vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        assert_eq!(
            beneficial_x_range(&g2, 2, 6, RangeMode::Asymptotic).unwrap(),
            (3, 3)
        );
        // With every database grouped the lower endpoint meets N - g
        // exactly; since sum M_i <= N, the range is never empty for T < g.
        assert!(matches!(
            beneficial_x_range(&g, 2, 6, RangeMode::Asymptotic),
            Err(Error::GNotGreaterThanT { .. })
        ));
    }

    #[test]
    fn single_group_rate_values() {
        assert_eq!(single_group_rate(2, 2).unwrap(), rational(1, 4));
        assert_eq!(single_group_rate(2, 1).unwrap(), rational(1, 2));
        assert_eq!(single_group_rate(5, 3).unwrap(), rational(1, 15));
        assert!(single_group_rate(1, 2).is_err());
    }

    #[test]
    fn tightness_on_constructed_instance() {
        let b = CommMatrix::from_links(4, &[vec![1, 2], vec![3, 4]]).unwrap();
        let g = Grouping::from_lists(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        assert!(tightness_check(&b, &g));
        assert!(tightness_check_no_drop_form(&b, &g));
        let ub = upper_bound(&b, 1, 4, 2).unwrap();
        assert_eq!(achievable_rate(&g, 1, 2).unwrap(), ub.bound);

        let empty = CommMatrix::from_links(4, &[]).unwrap();
        assert!(!tightness_check(&empty, &g));
    }

    #[test]
    fn tightness_fails_on_mixed_link_sizes() {
        let b = CommMatrix::from_links(
            7,
            &[
                vec![1, 2, 3],
                vec![1, 5, 6],
                vec![1, 3, 5],
                vec![2, 3, 4],
                vec![2, 4, 6],
                vec![4, 5, 6],
                vec![4, 7],
                vec![5, 7],
                vec![1, 2, 6, 7],
            ],
        )
        .unwrap();
        let g = Grouping::from_lists(7, &[vec![1, 4], vec![2, 5], vec![3, 6]]).unwrap();
        assert!(!tightness_check(&b, &g));
    }

    #[test]
    fn asymptotic_consistency_at_large_k() {
        let g = Grouping::from_lists(6, &[vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        for t in [1, 2] {
            let finite = achievable_rate(&g, t, 64).unwrap();
            let limit = asymptotic_achievable_rate(&g, t).unwrap();
            let gap = crate::model::rational_to_f64(&finite)
                - crate::model::rational_to_f64(&limit);
            assert!(gap.abs() < 1e-9, "gap {gap}");
        }
    }
}
