//! Pooling prototypes from several support shots.

use crate::error::{Error, Result};
use crate::types::PrototypeSet;

/// Concatenates prototype sets in shot order. Every output vector records the
/// position of the input set it came from.
pub fn merge_shots(sets: &[PrototypeSet]) -> Result<PrototypeSet> {
    let first = sets.first().ok_or(Error::EmptyList)?;
    let dim = first.dim();
    let mut vectors = Vec::new();
    let mut shots = Vec::new();
    for (shot, set) in sets.iter().enumerate() {
        if set.dim() != dim {
            return Err(Error::dims("prototype dim across shots", dim, set.dim()));
        }
        vectors.extend(set.vectors().iter().cloned());
        shots.extend(std::iter::repeat_n(shot, set.count()));
    }
    PrototypeSet::with_shots(dim, vectors, shots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: usize, dim: usize, base: f32) -> PrototypeSet {
        PrototypeSet::new(dim, (0..n).map(|i| vec![base + i as f32; dim]).collect()).unwrap()
    }

    #[test]
    fn single_set_unchanged() {
        let a = set(3, 2, 1.0);
        assert_eq!(merge_shots(std::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn counts_add_and_order_is_kept() {
        let m = merge_shots(&[set(5, 2, 0.0), set(3, 2, 100.0)]).unwrap();
        assert_eq!(m.count(), 8);
        assert_eq!(m.shots(), &[0, 0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(m.vector(5), &[100.0, 100.0]);
    }

    #[test]
    fn five_shots_traceable() {
        let sets: Vec<_> = (0..5).map(|k| set(1 + k % 5, 3, 10.0 * k as f32)).collect();
        let m = merge_shots(&sets).unwrap();
        assert!(m.count() <= 25);
        assert_eq!(m.count(), sets.iter().map(|s| s.count()).sum::<usize>());
        let mut offset = 0;
        for (k, s) in sets.iter().enumerate() {
            for j in 0..s.count() {
                assert_eq!(m.shots()[offset + j], k);
                assert_eq!(m.vector(offset + j), s.vector(j));
            }
            offset += s.count();
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(merge_shots(&[]), Err(Error::EmptyList)));
        assert!(matches!(
            merge_shots(&[set(1, 2, 0.0), set(1, 3, 0.0)]),
            Err(Error::DimMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn flattening_is_associative(counts in proptest::collection::vec(0usize..4, 1..6), split in 0usize..6) {
            let sets: Vec<_> = counts.iter().enumerate().map(|(k, &n)| set(n, 2, k as f32 * 7.0)).collect();
            let split = split.min(sets.len());
            let whole = merge_shots(&sets).unwrap();
            prop_assert_eq!(whole.count(), counts.iter().sum::<usize>());
            if split > 0 && split < sets.len() {
                let left = merge_shots(&sets[..split]).unwrap();
                let right = merge_shots(&sets[split..]).unwrap();
                let both = merge_shots(&[left, right]).unwrap();
                prop_assert_eq!(both.vectors(), whole.vectors());
            }
        }
    }
}
