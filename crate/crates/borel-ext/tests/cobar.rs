use borel_ext::cobar::{check_d_squared, cobar_ext, dualize, COBAR_S_MAX, COBAR_T_MAX};
use borel_ext::module::{dictionary_model, stunted_module, GradedModule, Variant};
use borel_ext::validate::{cobar_suite, oracle_modules};
use borel_ext::engine::Engine;

#[test]
fn resolutions_agree_with_the_cobar_complex() {
    let reports = cobar_suite(&Engine::new(None));
    assert_eq!(reports.len(), oracle_modules().len());
    for r in reports {
        assert!(r.passed, "{r}");
    }
}

#[test]
fn dual_coactions_are_coassociative() {
    for m in [
        GradedModule::sphere(0),
        stunted_module(1, 8).unwrap(),
        stunted_module(-9, 3).unwrap(),
        dictionary_model(Variant::A, 6, 6),
        dictionary_model(Variant::B, 6, 6),
    ] {
        let c = dualize(&m).unwrap();
        c.check_coassociative().unwrap();
        assert!(check_d_squared(&c, 3, 10).unwrap() > 0);
    }
}

#[test]
fn h0_tower_in_the_cobar_complex() {
    let c = dualize(&GradedModule::sphere(0)).unwrap();
    let ext = cobar_ext(&c, COBAR_S_MAX, COBAR_T_MAX).unwrap();
    for s in 0..=COBAR_S_MAX {
        assert_eq!(ext.dim(s, s as i32), 1);
    }
    assert_eq!(ext.dim(1, 3), 0);
}
