use std::collections::BTreeSet;

use borel_ext::f2::BitVector;
use borel_ext::steenrod::{
    adem_product, admissible_basis, admissible_to_milnor, basis_bridge, milnor_basis, milnor_product,
    milnor_product_sum, MilnorSq,
};
use proptest::prelude::*;

fn as_set(v: Vec<MilnorSq>) -> BTreeSet<MilnorSq> {
    v.into_iter().collect()
}

/// Milnor expansion of a sum of admissible words.
fn milnor_of(words: &[borel_ext::steenrod::AdmissibleSq]) -> BTreeSet<MilnorSq> {
    let mut out = BTreeSet::new();
    for w in words {
        for m in admissible_to_milnor(w) {
            if !out.remove(&m) {
                out.insert(m);
            }
        }
    }
    out
}

#[test]
fn bases_are_equinumerous() {
    for d in 0..=40 {
        assert_eq!(milnor_basis(d).len(), admissible_basis(d).len(), "degree {d}");
    }
}

#[test]
fn milnor_matches_adem_through_degree_16() {
    for d1 in 0..=16 {
        for d2 in 0..=16 - d1 {
            for u in admissible_basis(d1) {
                for v in admissible_basis(d2) {
                    let adem = milnor_of(&adem_product(&u, &v));
                    let a = admissible_to_milnor(&u);
                    let b = admissible_to_milnor(&v);
                    let milnor = as_set(milnor_product_sum(&a, &b));
                    assert_eq!(adem, milnor, "{u:?} * {v:?}");
                }
            }
        }
    }
}

#[test]
fn bridge_is_invertible() {
    for d in 0..=20 {
        let b = basis_bridge(d);
        let n = b.milnor.len();
        let id = b.to_milnor.mul(&b.to_admissible).unwrap();
        for i in 0..n {
            assert_eq!(id.row(i), BitVector::unit(n, i), "degree {d}");
        }
    }
}

fn element(max_degree: u32) -> impl Strategy<Value = MilnorSq> {
    (0..=max_degree).prop_flat_map(|d| {
        let basis = milnor_basis(d);
        (0..basis.len()).prop_map(move |i| basis[i].clone())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn products_associate(a in element(8), b in element(6), c in element(6)) {
        let left = milnor_product_sum(&milnor_product(&a, &b), std::slice::from_ref(&c));
        let right = milnor_product_sum(std::slice::from_ref(&a), &milnor_product(&b, &c));
        prop_assert_eq!(as_set(left), as_set(right));
    }

    #[test]
    fn degrees_add(a in element(12), b in element(12)) {
        for m in milnor_product(&a, &b) {
            prop_assert_eq!(m.degree(), a.degree() + b.degree());
        }
    }

    #[test]
    fn unit_is_neutral(a in element(20)) {
        prop_assert_eq!(milnor_product(&MilnorSq::unit(), &a), vec![a.clone()]);
        prop_assert_eq!(milnor_product(&a, &MilnorSq::unit()), vec![a]);
    }
}
