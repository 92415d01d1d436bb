use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use xptype::axes::AxisSet;
use xptype::relalg::{NodeType, Relation, TypeUniverse, UniverseExt};

const N: usize = 8;

fn universe() -> Arc<TypeUniverse> {
    let u = TypeUniverse::new([
        NodeType::element("a"),
        NodeType::element("b"),
        NodeType::element("c"),
        NodeType::attribute("id"),
    ]);
    assert_eq!(u.len(), N);
    u
}

type Pairs = BTreeSet<(usize, usize)>;

fn arb_pairs() -> impl Strategy<Value = Pairs> {
    // densities from sparse to nearly full
    (0u32..=100).prop_flat_map(|pct| {
        prop::collection::vec(prop::bool::weighted(f64::from(pct) / 100.0), N * N).prop_map(|bits| {
            bits.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(k, _)| (k / N, k % N))
                .collect()
        })
    })
}

fn rel(u: &Arc<TypeUniverse>, p: &Pairs) -> Relation {
    let mut r = Relation::empty(u);
    for &(i, j) in p {
        r.insert_index(i, j);
    }
    r
}

fn pairs(r: &Relation) -> Pairs {
    r.index_pairs().collect()
}

// Reference operations on explicit pair sets.

fn compose(x: &Pairs, y: &Pairs) -> Pairs {
    x.iter()
        .flat_map(|&(a, b)| y.iter().filter(move |&&(c, _)| c == b).map(move |&(_, d)| (a, d)))
        .collect()
}

fn inverse(x: &Pairs) -> Pairs {
    x.iter().map(|&(a, b)| (b, a)).collect()
}

fn identity() -> Pairs {
    (0..N).map(|i| (i, i)).collect()
}

fn plus(x: &Pairs) -> Pairs {
    let mut acc = x.clone();
    loop {
        let next: Pairs = acc.union(&compose(&acc, x)).copied().collect();
        if next == acc {
            return acc;
        }
        acc = next;
    }
}

fn star(x: &Pairs) -> Pairs {
    plus(x).union(&identity()).copied().collect()
}

fn union(x: &Pairs, y: &Pairs) -> Pairs {
    x.union(y).copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn operations_match_pair_sets(x in arb_pairs(), y in arb_pairs()) {
        let u = universe();
        let (r, s) = (rel(&u, &x), rel(&u, &y));
        prop_assert_eq!(pairs(&r.compose(&s)), compose(&x, &y));
        prop_assert_eq!(pairs(&r.union(&s)), union(&x, &y));
        prop_assert_eq!(pairs(&r.intersect(&s)), x.intersection(&y).copied().collect::<Pairs>());
        prop_assert_eq!(pairs(&r.difference(&s)), x.difference(&y).copied().collect::<Pairs>());
        prop_assert_eq!(pairs(&r.inverse()), inverse(&x));
        prop_assert_eq!(pairs(&r.transitive_closure()), plus(&x));
        prop_assert_eq!(pairs(&r.reflexive_transitive_closure()), star(&x));
        prop_assert_eq!(pairs(&r.symmetric_closure()), union(&x, &inverse(&x)));
    }

    #[test]
    fn algebraic_laws(x in arb_pairs(), y in arb_pairs(), z in arb_pairs()) {
        let u = universe();
        let (r, s, t) = (rel(&u, &x), rel(&u, &y), rel(&u, &z));
        prop_assert_eq!(r.compose(&s).compose(&t), r.compose(&s.compose(&t)));
        prop_assert_eq!(r.compose(&s.union(&t)), r.compose(&s).union(&r.compose(&t)));
        prop_assert_eq!(s.union(&t).compose(&r), s.compose(&r).union(&t.compose(&r)));
        prop_assert_eq!(r.transitive_closure().transitive_closure(), r.transitive_closure());
        prop_assert_eq!(
            r.reflexive_transitive_closure().reflexive_transitive_closure(),
            r.reflexive_transitive_closure()
        );
        prop_assert_eq!(r.inverse().inverse(), r.clone());
        prop_assert_eq!(r.compose(&s).inverse(), s.inverse().compose(&r.inverse()));
        prop_assert_eq!(r.compose(&Relation::identity(&u)), r.clone());
        prop_assert_eq!(r.transitive_closure(), r.compose(&r.reflexive_transitive_closure()));
        prop_assert!(r.is_subset(&r.transitive_closure()));
    }

    #[test]
    fn derived_axes_follow_their_definitions(c in arb_pairs(), at in arb_pairs(), f in arb_pairs()) {
        let u = universe();
        let axes = AxisSet::derive(rel(&u, &c), rel(&u, &at), rel(&u, &f));
        let p = inverse(&union(&c, &at));
        let big_d = star(&c);
        let big_a = star(&p);
        prop_assert_eq!(pairs(&axes.parent), p.clone());
        prop_assert_eq!(pairs(&axes.self_), identity());
        prop_assert_eq!(pairs(&axes.preceding_sibling), inverse(&f));
        prop_assert_eq!(pairs(&axes.descendant), plus(&c));
        prop_assert_eq!(pairs(&axes.ancestor), plus(&p));
        prop_assert_eq!(pairs(&axes.descendant_or_self), big_d.clone());
        prop_assert_eq!(pairs(&axes.ancestor_or_self), big_a.clone());
        prop_assert_eq!(pairs(&axes.following), compose(&compose(&big_a, &f), &big_d));
        prop_assert_eq!(pairs(&axes.preceding), compose(&compose(&big_a, &inverse(&f)), &big_d));

        let amended = AxisSet::derive_with(rel(&u, &c), rel(&u, &at), rel(&u, &f), true);
        let extra = compose(&compose(&inverse(&at), &c), &big_d);
        prop_assert_eq!(
            pairs(&amended.following),
            union(&compose(&compose(&big_a, &f), &big_d), &extra)
        );
    }

    #[test]
    fn image_and_domain(x in arb_pairs(), members in prop::collection::btree_set(0..N, 0..=N)) {
        let u = universe();
        let r = rel(&u, &x);
        let mut set = u.empty_set();
        for &m in &members {
            set.insert_index(m);
        }
        let image: BTreeSet<usize> = x.iter().filter(|(a, _)| members.contains(a)).map(|&(_, b)| b).collect();
        prop_assert_eq!(r.image(&set).indices().collect::<BTreeSet<_>>(), image);
        let dom: BTreeSet<usize> = x.iter().map(|&(a, _)| a).collect();
        prop_assert_eq!(r.domain().indices().collect::<BTreeSet<_>>(), dom);
    }
}
