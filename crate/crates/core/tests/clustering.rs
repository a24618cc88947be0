mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asgnet::gpa::allocate;
use asgnet::seeding::place_seeds;
use asgnet::{merge_shots, sgc_cluster, BinaryMask, FeatureMap, PrototypeSet, SgcConfig};

#[test]
fn separated_blobs_recover_both_values() {
    // two 12x12 blocks, feature 0 on the left and 10 on the right
    let (h, w) = (16, 40);
    let in_left = |r: usize, c: usize| (2..14).contains(&r) && (2..14).contains(&c);
    let in_right = |r: usize, c: usize| (2..14).contains(&r) && (26..38).contains(&c);
    let mask = BinaryMask::from_fn(h, w, |r, c| in_left(r, c) || in_right(r, c)).unwrap();
    let feat =
        FeatureMap::from_fn(1, h, w, |_, r, c| if in_right(r, c) { 10.0 } else { 0.0 }).unwrap();
    let cfg = SgcConfig::new(144, 2, 5).with_spatial_factor(1e6);
    let protos = sgc_cluster(&feat, &mask, &cfg).unwrap();
    assert_eq!(protos.count(), 2);

    let seeds = place_seeds(&mask, 2).unwrap();
    let points: Vec<Vec<f64>> = mask
        .foreground_indices()
        .into_iter()
        .map(|i| vec![feat.data()[i] as f64])
        .collect();
    let init = seeds
        .coords()
        .iter()
        .map(|&(r, c)| vec![feat.get(0, r, c) as f64])
        .collect();
    let reference = common::soft_kmeans(&points, init, 200);

    let mut got: Vec<f64> = protos.vectors().iter().map(|v| v[0] as f64).collect();
    let mut want: Vec<f64> = reference.into_iter().map(|v| v[0]).collect();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-3, "{got:?} vs {want:?}");
    }
    assert!((got[0] - 0.0).abs() < 1e-3 && (got[1] - 10.0).abs() < 1e-3);
}

#[test]
fn end_to_end_matches_loop_oracle_with_default_area() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..10 {
        let (h, w, c) = (24, 24, 3);
        let feat = FeatureMap::from_fn(c, h, w, |_, _, _| rng.random_range(-1.0..1.0)).unwrap();
        let mask = BinaryMask::from_fn(h, w, |_, _| rng.random_bool(0.7)).unwrap();
        let cfg = SgcConfig::default();
        let protos = sgc_cluster(&feat, &mask, &cfg).unwrap();
        let n = protos.count();
        assert_eq!(n, (mask.count() / 100).min(5));
        let seeds = common::brute_force_seeds(mask.bits(), h, w, n);
        let want =
            common::loop_clustering(feat.data(), c, h, w, mask.bits(), &seeds, 10.0, 5, 1e-12);
        for (g, o) in protos.vectors().iter().zip(&want) {
            for (&a, &b) in g.iter().zip(o) {
                assert!((a as f64 - b).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn allocation_matches_composed_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (c, h, w, n) = (4, 5, 6, 3);
    let query = FeatureMap::from_fn(c, h, w, |_, _, _| rng.random_range(-1.0..1.0)).unwrap();
    let protos = PrototypeSet::new(
        c,
        (0..n)
            .map(|_| (0..c).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
    )
    .unwrap();
    let a = allocate(&protos, &query, None).unwrap();
    let pixels = h * w;
    for p in 0..pixels {
        let px = query.pixel(p);
        let sims: Vec<f64> = (0..n)
            .map(|i| common::cosine(protos.vector(i), &px))
            .collect();
        let mut best = 0;
        for i in 1..n {
            if sims[i] > sims[best] {
                best = i;
            }
        }
        for (i, &s) in sims.iter().enumerate() {
            assert!((a.similarity.get(i, p) as f64 - s).abs() < 1e-6);
        }
        assert_eq!(a.guide.indices()[p], best);
        let merged = a.merged.pixel(p);
        assert_eq!(&merged[..c], &px[..]);
        assert_eq!(&merged[c..2 * c], protos.vector(best));
        assert!((merged[2 * c] as f64 - sims.iter().sum::<f64>()).abs() < 1e-6);
    }
}

#[test]
fn guide_feature_holds_best_prototype_for_merged_shots() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let c = 5;
    let shots: Vec<PrototypeSet> = (0..3)
        .map(|k| {
            PrototypeSet::new(
                c,
                (0..2 + k)
                    .map(|_| (0..c).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let merged = merge_shots(&shots).unwrap();
    assert_eq!(merged.count(), 9);
    let query = FeatureMap::from_fn(c, 4, 4, |_, _, _| rng.random_range(-1.0..1.0)).unwrap();
    let a = allocate(&merged, &query, None).unwrap();
    for p in 0..16 {
        let g = a.guide.indices()[p];
        let best = (0..merged.count())
            .map(|i| a.similarity.get(i, p))
            .fold(f32::NEG_INFINITY, f32::max);
        assert_eq!(a.similarity.get(g, p), best);
        assert_eq!(a.guide_feature.pixel(p), merged.vector(g));
    }
}
