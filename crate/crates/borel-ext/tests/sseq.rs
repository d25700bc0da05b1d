use borel_ext::catalog::SphereCatalog;
use borel_ext::engine::Engine;
use borel_ext::f2::BitVector;
use borel_ext::module::{dictionary_model, stunted_module, GradedModule, Variant};
use borel_ext::sseq::{structure_check, Ahss, Detector};

#[test]
fn sphere_catalog_names() {
    let e = Engine::new(None);
    let cat = SphereCatalog::build(&e, 6, 20).unwrap();
    for (name, s, stem) in [
        ("1", 0, 0),
        ("h0", 1, 0),
        ("h1", 1, 1),
        ("h2", 1, 3),
        ("h3", 1, 7),
        ("h0h2", 2, 3),
        ("h1^2", 2, 2),
        ("h0^3h3", 4, 7),
        ("c0", 3, 8),
        ("Ph1", 5, 9),
        ("Ph2", 5, 11),
        ("d0", 4, 14),
    ] {
        let (ls, lstem, _) = cat.lookup(name).unwrap_or_else(|| panic!("{name} missing"));
        assert_eq!((ls, lstem), (s, stem), "{name}");
    }
    // Every basis name is unique and bases have the dimension of Ext.
    let mut seen = std::collections::BTreeSet::new();
    for (s, stem, v) in cat.entries() {
        assert!(seen.insert(v.name.clone()), "{} repeated", v.name);
        assert_eq!(cat.basis(s, stem).len(), cat.resolution().ext_dim(s, s as i32 + stem));
    }
    assert_eq!(cat.name(1, 0, &BitVector::zeros(1)), "0");
}

#[test]
fn one_cell_module_has_no_differentials() {
    let e = Engine::new(None);
    let ahss = Ahss::new(&e, &GradedModule::sphere(3), 4, 14);
    let pages = ahss.pages(2).unwrap();
    assert!(pages.iter().all(|p| p.differentials.values().all(|d| d.is_zero())));
    assert!(ahss.convergence_check().unwrap().passed());
}

#[test]
fn two_cell_module_converges() {
    let e = Engine::new(None);
    let ahss = Ahss::new(&e, &stunted_module(1, 2).unwrap(), 5, 14);
    let pages = ahss.pages(ahss.span()).unwrap();
    let rep = structure_check(&ahss, &pages).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let conv = ahss.convergence_check().unwrap();
    assert!(conv.passed(), "{conv:?}");
    // d₁ out of the even cell hits h0 times the unit on cell 1.
    assert!(pages[0].differentials.get(&(2, 0, 2)).is_some_and(|d| !d.is_zero()));
}

#[test]
fn parity_law_across_negative_cells() {
    let e = Engine::new(None);
    let ahss = Ahss::new(&e, &stunted_module(-8, 6).unwrap(), 3, 10);
    let pages = ahss.pages(1).unwrap();
    let rep = structure_check(&ahss, &pages).unwrap();
    assert!(rep.parity_failures.is_empty(), "{:?}", rep.parity_failures);
    assert!(rep.parity_checked > 0);
}

#[test]
fn variant_a_differentials() {
    let e = Engine::new(None);
    let cat = SphereCatalog::build(&e, 4, 20).unwrap();
    let ahss = Ahss::new(&e, &dictionary_model(Variant::A, 10, 6), 3, 6);
    let pages = ahss.pages(ahss.span()).unwrap();
    let named: Vec<(String, String)> = pages
        .iter()
        .flat_map(|p| ahss.named_differentials(p, &cat))
        .map(|d| (d.source.label(), d.target.label()))
        .collect();
    assert!(named.contains(&("h0h2[0]".into(), "c0[-6]".into())), "{named:?}");
}

#[test]
fn detection_names_bottom_cells() {
    let e = Engine::new(None);
    let cat = SphereCatalog::build(&e, 3, 12).unwrap();
    let m = stunted_module(1, 4).unwrap();
    let det = Detector::new(&e, &m, 1, 3, 8).unwrap();
    let unit = det.detect(&cat, 1, 0, 1, &BitVector::unit(1, 0)).unwrap();
    assert_eq!(unit.label(), "1[1]");

    let minus_one = GradedModule::sphere(-1);
    let det = Detector::new(&e, &minus_one, -1, 3, 8).unwrap();
    assert_eq!(det.detect(&cat, -1, 0, -1, &BitVector::unit(1, 0)).unwrap().label(), "1[-1]");

    // Every adapted basis vector is named by the lowest cell it reaches.
    let det = Detector::new(&e, &m, 1, 3, 10).unwrap();
    for s in 0..=3 {
        for t in 1..=10 {
            for (v, class) in det.adapted_basis(&cat, 1, s, t) {
                assert_eq!(det.detect(&cat, 1, s, t, &v).as_ref(), Some(&class));
            }
        }
    }
}
