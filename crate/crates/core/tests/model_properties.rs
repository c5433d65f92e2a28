mod common;

use common::*;
use pathquery_core::eval::{pessimistic_rank, quantile_from_scores};
use pathquery_core::io::{read_checkpoint, read_path_queries, write_checkpoint, write_path_queries, DatasetHeader};
use pathquery_core::rng;
use pathquery_core::training::{LossMode, Objective};
use pathquery_core::*;
use proptest::prelude::*;

fn vocab(n: usize, n_rel: usize) -> Vocab {
    let mut v = Vocab::new();
    for i in 0..n {
        v.intern_entity(&format!("e{i}"));
    }
    for r in 0..n_rel {
        v.intern_relation(&format!("r{r}")).unwrap();
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_match_textbook_formulas(seed in any::<u64>(), len in 1usize..=4, dim in 1usize..=6) {
        let v = vocab(6, 3);
        let mut rng = rng::seeded(seed);
        for kind in ModelKind::ALL {
            let p = gaussian_params(kind, dim, &v, 0.7, &mut rng);
            let path = random_path(&mut rng, 3, len);
            let q = PathQuery::new(EntityId(1), path.clone());
            for t in v.entity_ids() {
                let want = naive_score(&p, EntityId(1), &path, t);
                let got = p.score(&q, t).unwrap();
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{kind}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn diagonal_model_is_bilinear_with_diagonal_matrices(seed in any::<u64>(), len in 1usize..=4) {
        let v = vocab(5, 3);
        let d = 4;
        let diag = gaussian_params(ModelKind::BilinearDiag, d, &v, 0.8, &mut rng::seeded(seed));
        let mut full = ModelParams::zeros_for(ModelKind::Bilinear, d, &v);
        for e in v.entity_ids() {
            full.entity_mut(e).copy_from_slice(diag.entity(e));
        }
        for r in v.relation_ids() {
            for i in 0..d {
                full.relation_mut(r)[i * d + i] = diag.relation(r)[i];
            }
        }
        let path = random_path(&mut rng::seeded(seed ^ 1), 3, len);
        let q = PathQuery::new(EntityId(0), path);
        for t in v.entity_ids() {
            let (a, b) = (diag.score(&q, t).unwrap(), full.score(&q, t).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn transe_scores_ignore_coordinate_order(seed in any::<u64>(), len in 1usize..=4) {
        use rand::seq::SliceRandom;
        let v = vocab(5, 3);
        let d = 5;
        let mut rng = rng::seeded(seed);
        let p = gaussian_params(ModelKind::TransE, d, &v, 0.8, &mut rng);
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rng);
        let mut shuffled = p.clone();
        for e in v.entity_ids() {
            let src = p.entity(e).to_vec();
            for (i, &j) in perm.iter().enumerate() {
                shuffled.entity_mut(e)[i] = src[j];
            }
        }
        for r in v.relation_ids() {
            let src = p.relation(r).to_vec();
            for (i, &j) in perm.iter().enumerate() {
                shuffled.relation_mut(r)[i] = src[j];
            }
        }
        let q = PathQuery::new(EntityId(2), random_path(&mut rng, 3, len));
        for t in v.entity_ids() {
            let (a, b) = (p.score(&q, t).unwrap(), shuffled.score(&q, t).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn metrics_ignore_monotone_rescaling(
        pos in -20i32..20,
        negs in prop::collection::vec(-20i32..20, 0..30),
        scale in 0.01f64..10.0,
        shift in -20.0f64..20.0,
    ) {
        let f = |x: i32| (x as f64 * scale + shift).exp2();
        let raw: Vec<f64> = negs.iter().map(|&x| x as f64).collect();
        let moved: Vec<f64> = negs.iter().map(|&x| f(x)).collect();
        prop_assert_eq!(quantile_from_scores(pos as f64, &raw), quantile_from_scores(f(pos), &moved));
        prop_assert_eq!(pessimistic_rank(pos as f64, &raw), pessimistic_rank(f(pos), &moved));
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly(seed in any::<u64>(), dim in 1usize..=5, std in 1e-6f64..1e6) {
        let v = vocab(4, 2).with_inverses().unwrap();
        for kind in ModelKind::ALL {
            let p = gaussian_params(kind, dim, &v, std, &mut rng::seeded(seed));
            let mut bytes = Vec::new();
            write_checkpoint(&p, &mut bytes).unwrap();
            let back = read_checkpoint(bytes.as_slice()).unwrap();
            let bits = |p: &ModelParams| -> Vec<u64> {
                p.entity_values().iter().chain(p.relation_values()).map(|x| x.to_bits()).collect()
            };
            prop_assert_eq!(bits(&back), bits(&p));
            prop_assert_eq!(back, p);
        }
    }
}

#[test]
fn transe_length_two_gradients_agree_across_relations() {
    let v = vocab(6, 2);
    let mut rng = rng::seeded(3);
    let p = gaussian_params(ModelKind::TransE, 4, &v, 0.5, &mut rng);
    let ex = QueryExample::new(PathQuery::new(EntityId(0), vec![RelationId(0), RelationId(1)]), EntityId(1));
    let negs = [EntityId(2), EntityId(3), EntityId(4)];
    for mode in [LossMode::Sum, LossMode::Max] {
        let obj = Objective { mode, margin: 10.0, aux_l2: 0.0 };
        let (loss, grad) = obj.loss_and_gradient(&p, &ex, &negs);
        assert!(loss.value > 0.0);
        assert_eq!(grad.relations[&RelationId(0)], grad.relations[&RelationId(1)]);
    }
}

#[test]
fn ten_thousand_examples_round_trip() {
    let split = synthetic::RingGraph::default().split(0.2, 4).unwrap();
    let cfg = PathGenConfig { max_length: 5, train_count: 10_000, test_count: 0, seed: 4 };
    let data = generate_datasets(&split.train, &split.full, &cfg).unwrap();
    assert!(data.train.len() >= 10_000);
    let header = DatasetHeader::new().with("seed", 4).with("generator", pathquery_core::rng::GENERATOR_NAME);
    let mut bytes = Vec::new();
    write_path_queries(&split.train, &header, &data.train, &mut bytes).unwrap();
    let (h, back) = read_path_queries(bytes.as_slice(), &split.train).unwrap();
    assert_eq!(h, header);
    assert_eq!(back, data.train);
}
