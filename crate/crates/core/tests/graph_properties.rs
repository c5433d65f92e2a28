mod common;

use std::collections::{BTreeSet, HashSet};

use common::*;
use pathquery_core::*;
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 1usize..=25, 1usize..=4, 0usize..=80)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn denotation_matches_path_enumeration(
        (seed, n, n_rel, m) in graph_strategy(),
        closed in any::<bool>(),
        path_seed in any::<u64>(),
    ) {
        let mut rng = pathquery_core::rng::seeded(seed);
        let mut g = random_graph(&mut rng, n, n_rel, m);
        if closed {
            g = g.close_inverses().unwrap();
        }
        let triples = triple_list(&g);
        let mut rng = pathquery_core::rng::seeded(path_seed);
        for len in 1..=4 {
            let path = random_path(&mut rng, g.relation_count(), len);
            for s in g.vocab().entity_ids() {
                let q = PathQuery::new(s, path.clone());
                let correct = g.denotation(&q);
                prop_assert_eq!(&correct, &brute_denotation(&triples, s, &path));
                let last = *path.last().unwrap();
                let cands = brute_candidates(&triples, last);
                prop_assert_eq!(g.candidates(&q), &cands);
                let wrong: BTreeSet<EntityId> = cands.difference(&correct).copied().collect();
                prop_assert_eq!(g.incorrect_answers(&q), wrong);
            }
        }
    }

    #[test]
    fn closure_adds_exactly_the_reversed_edges((seed, n, n_rel, m) in graph_strategy()) {
        let mut rng = pathquery_core::rng::seeded(seed);
        let g = random_graph(&mut rng, n, n_rel, m);
        let c = g.close_inverses().unwrap();
        prop_assert_eq!(c.triple_count(), 2 * g.triple_count());
        for t in g.triples() {
            let inv = c.vocab().inverse(t.relation).unwrap();
            prop_assert!(c.contains(t));
            prop_assert!(c.contains(&Triple::new(t.target, inv, t.source)));
        }
        prop_assert!(c.close_inverses().is_err());
    }

    #[test]
    fn generated_examples_are_valid_and_disjoint(seed in any::<u64>(), l_max in 1usize..=4) {
        let split = synthetic::RingGraph { entities: 12, skip: 3 }.split(0.25, seed).unwrap();
        let cfg = PathGenConfig { max_length: l_max, train_count: 200, test_count: 200, seed };
        let data = generate_datasets(&split.train, &split.full, &cfg).unwrap();
        let edges = split.train.triple_count();
        prop_assert_eq!(data.train.len(), edges + if l_max >= 2 { 200 } else { 0 });
        prop_assert_eq!(data.test.len() + data.removed_overlap, 200);
        for ex in &data.train {
            prop_assert!(split.train.denotation(&ex.query).contains(&ex.answer));
        }
        let train_queries: HashSet<&PathQuery> = data.train.iter().map(|e| &e.query).collect();
        for ex in &data.test {
            prop_assert!(split.full.denotation(&ex.query).contains(&ex.answer));
            prop_assert!(!train_queries.contains(&ex.query));
            prop_assert!(ex.query.len() <= l_max);
        }
    }

    #[test]
    fn query_text_round_trips((seed, n, n_rel, m) in graph_strategy(), len in 1usize..=5) {
        let mut rng = pathquery_core::rng::seeded(seed);
        let g = random_graph(&mut rng, n, n_rel, m).close_inverses().unwrap();
        let path = random_path(&mut rng, g.relation_count(), len);
        let q = PathQuery::new(EntityId(0), path);
        let text = g.query_display(&q).to_string();
        prop_assert_eq!(g.parse_query(&text).unwrap(), q);
    }
}

#[test]
fn train_edges_only_when_walks_disabled() {
    let split = synthetic::RingGraph::default().split(0.2, 0).unwrap();
    let cfg = PathGenConfig { max_length: 1, train_count: 500, test_count: 0, seed: 0 };
    let data = generate_datasets(&split.train, &split.full, &cfg).unwrap();
    let edges: BTreeSet<(EntityId, RelationId, EntityId)> =
        split.train.triples().map(|t| (t.source, t.relation, t.target)).collect();
    let got: BTreeSet<(EntityId, RelationId, EntityId)> =
        data.train.iter().map(|e| (e.query.source, e.query.path()[0], e.answer)).collect();
    assert_eq!(got, edges);
    assert_eq!(data.train.len(), edges.len());
}

#[test]
fn test_set_must_extend_train_graph() {
    let a = load_triples("x\tr\ty\n".as_bytes()).unwrap();
    let b = a.with_vocab(a.vocab().clone()).unwrap();
    let empty = KnowledgeGraph::from_triples(a.vocab().clone(), []).unwrap();
    assert!(generate_datasets(&b, &empty, &PathGenConfig::default()).is_err());
}
