//! Baseline pairings without prices.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Matching, PayoffMatrix, Selector};

/// Deferred acceptance with every price pinned at zero.
///
/// D2D pairs propose in selector order (index order for
/// [`Selector::Lowest`], a seeded shuffle otherwise) down their list of
/// acceptable CUs by decreasing value; a CU keeps the first proposal it gets.
pub fn matching_without_transfer(values: &PayoffMatrix, selector: &mut Selector) -> Matching {
    let (cus, dps) = (values.cus(), values.dps());
    let mut order: Vec<usize> = (0..dps).collect();
    if let Selector::Seeded(rng) = selector {
        order.shuffle(rng);
    }
    let mut cu_partner = vec![None; cus];
    let mut dp_partner = vec![None; dps];
    for n in order {
        let mut prefs: Vec<usize> = (0..cus).filter(|&m| values.get(m, n) >= 0.0).collect();
        // Stable sort keeps the lowest CU index first among equal values.
        prefs.sort_by(|&a, &b| values.get(b, n).total_cmp(&values.get(a, n)));
        if let Some(m) = prefs.into_iter().find(|&m| cu_partner[m].is_none()) {
            cu_partner[m] = Some(n);
            dp_partner[n] = Some(m);
        }
    }
    Matching::from_parts(cu_partner, dp_partner, vec![0; cus], 0.0)
}

/// Uniformly random one-to-one pairing of `min{M, N}` pairs, ignoring
/// values.
pub fn random_matching<R: Rng + ?Sized>(cus: usize, dps: usize, rng: &mut R) -> Matching {
    let mut cu_partner = vec![None; cus];
    let mut dp_partner = vec![None; dps];
    if cus <= dps {
        let mut perm: Vec<usize> = (0..dps).collect();
        perm.shuffle(rng);
        for m in 0..cus {
            cu_partner[m] = Some(perm[m]);
            dp_partner[perm[m]] = Some(m);
        }
    } else {
        let mut perm: Vec<usize> = (0..cus).collect();
        perm.shuffle(rng);
        for n in 0..dps {
            dp_partner[n] = Some(perm[n]);
            cu_partner[perm[n]] = Some(n);
        }
    }
    Matching::from_parts(cu_partner, dp_partner, vec![0; cus], 0.0)
}

#[cfg(test)]
mod tests {
    use super::super::assignment_value;
    use super::*;
    use crate::rng;

    #[test]
    fn first_proposer_wins() {
        let v = PayoffMatrix::from_rows(&[vec![5.0, 3.0]]).unwrap();
        let m = matching_without_transfer(&v, &mut Selector::Lowest);
        assert_eq!(m.cu_partner(0), Some(0));
        assert_eq!(m.price(0), 0.0);
        assert_eq!(assignment_value(&v, &m), 5.0);
    }

    #[test]
    fn two_by_two_trace() {
        let v = PayoffMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let m = matching_without_transfer(&v, &mut Selector::Lowest);
        assert_eq!(m.dp_partner(0), Some(1));
        assert_eq!(m.dp_partner(1), Some(0));
        assert_eq!(assignment_value(&v, &m), 5.0);
    }

    #[test]
    fn unacceptable_values_stay_unmatched() {
        let v = PayoffMatrix::from_rows(&[vec![-1.0, -1.0], vec![-1.0, -2.0]]).unwrap();
        let m = matching_without_transfer(&v, &mut Selector::seeded(1));
        assert_eq!(m.matched_count(), 0);
    }

    #[test]
    fn random_single_pair() {
        let m = random_matching(1, 1, &mut rng::stream(5));
        assert_eq!(m.cu_partner(0), Some(0));
    }

    #[test]
    fn random_is_reproducible_and_sized() {
        let a = random_matching(3, 7, &mut rng::stream(11));
        let b = random_matching(3, 7, &mut rng::stream(11));
        assert_eq!(a, b);
        assert_eq!(a.matched_count(), 3);
        assert_eq!(
            random_matching(6, 2, &mut rng::stream(2)).matched_count(),
            2
        );
    }

    #[test]
    fn random_perfect_pairings_are_equally_likely() {
        let mut r = rng::stream(77);
        let trials = 10_000;
        let diag = (0..trials)
            .filter(|_| random_matching(2, 2, &mut r).cu_partner(0) == Some(0))
            .count();
        let freq = diag as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }
}
