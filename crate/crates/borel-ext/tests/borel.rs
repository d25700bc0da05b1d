use borel_ext::borel::{may_part, mahowald, normalize_name, rho_truncation_check, BorelError, BorelExt, BorelWindow};
use borel_ext::engine::Engine;
use borel_ext::f2::BitVector;
use borel_ext::module::{column_model, Summand};
use proptest::prelude::*;

const S_MAX: u32 = 6;
const STEM_MAX: i32 = 14;
const COWEIGHTS: std::ops::RangeInclusive<i32> = -2..=8;

fn small(engine: &Engine) -> BorelExt<'_> {
    BorelExt::new(engine, BorelWindow::chart(S_MAX, STEM_MAX, COWEIGHTS)).unwrap()
}

/// Every `(s, stem, coweight)` of the small window.
fn positions() -> impl Iterator<Item = (u32, i32, i32)> {
    COWEIGHTS.flat_map(|c| (0..=STEM_MAX).flat_map(move |stem| (0..=S_MAX).map(move |s| (s, stem + s as i32, stem - c))))
}

#[test]
fn groups_respect_the_grading() {
    let e = Engine::new(None);
    let b = small(&e);
    for (s, t, w) in positions() {
        let g = b.group(s, t, w).unwrap();
        assert_eq!(g.stem(), t - s as i32);
        assert_eq!(g.coweight(), t - s as i32 - w);
        assert_eq!(g.classical_t(), s as i32 + g.coweight() - 1);
        assert_eq!(g.dim, g.basis.len());
        for c in &g.basis {
            assert_eq!(c.vector.len(), g.dim);
            assert_eq!(c.class.summand.is_some(), w <= 0, "summand tags only on w <= 0 at ({s},{t},{w})");
        }
    }
}

#[test]
fn dimensions_split_as_column_models() {
    let e = Engine::new(None);
    let b = small(&e);
    let top = b.window().t_top;
    for w in b.window().w_min..=b.window().w_max {
        let pieces: Vec<_> = column_model(w, top)
            .into_iter()
            .map(|p| (e.resolve(&p.module, S_MAX, top), p.s_shift))
            .collect();
        for s in 0..=S_MAX {
            for tp in -20..=top {
                let t = tp + w + 1;
                if !b.window().contains(s, t, w) {
                    continue;
                }
                let expected: usize = pieces
                    .iter()
                    .filter(|(_, shift)| s >= *shift)
                    .map(|(r, shift)| r.ext_dim(s - shift, tp))
                    .sum();
                assert_eq!(b.dim(s, t, w).unwrap(), expected, "({s},{t},{w})");
            }
        }
    }
}

#[test]
fn rho_lines_join_named_classes_in_one_coweight() {
    let e = Engine::new(None);
    let b = small(&e);
    let mut total = 0;
    for (s, t, w) in positions() {
        for line in b.rho_lines(s, t, w).unwrap() {
            let src = b.group(s, t, w).unwrap();
            let tgt = b.group(s, t - 1, w - 1).unwrap();
            assert_eq!(src.coweight(), tgt.coweight());
            assert_eq!(src.basis[line.source_index].label(), line.source);
            assert_eq!(tgt.basis[line.target_index].label(), line.target);
            total += 1;
        }
        if b.dim(s, t, w).unwrap() == 0 && b.window().contains(s, t - 1, w - 1) {
            let rho = b.rho(s, t, w).unwrap();
            assert_eq!(rho.rows(), 0);
        }
    }
    assert!(total > 0);
}

#[test]
fn quoted_classes_in_a_small_window() {
    let e = Engine::new(None);
    let b = small(&e);
    assert!(b.group(3, 7, 1).unwrap().contains("h0h2[0]"));
    assert!(b.group(3, 6, 0).unwrap().contains("h1^2[1]"));
    assert!(b.group(5, 16, 8).unwrap().contains("h0^3h3[-4]"));
    // The unit of the S^-1 summand.
    let g = b.group(0, 0, 0).unwrap();
    assert_eq!(g.labels(), ["1[-1]"]);
    assert_eq!(g.basis[0].class.summand, Some(Summand::Sphere));
}

#[test]
fn out_of_window_queries_say_how_to_enlarge() {
    let e = Engine::new(None);
    let b = small(&e);
    let err = b.group(9, 23, 11).unwrap_err().to_string();
    assert!(err.contains("--smax 9"), "{err}");
    let err = b.dim(2, 60, 30).unwrap_err().to_string();
    assert!(err.contains("--stem-max"), "{err}");
}

#[test]
fn closed_form_rho_matches_truncations() {
    let e = Engine::new(None);
    for w in -2..=4 {
        let check = rho_truncation_check(&e, w, 4, 10, 24).unwrap();
        assert!(check.passed(), "w = {w}: mismatches at {:?}", check.mismatches);
        e.clear();
    }
}

#[test]
fn rho_vanishes_on_zero_vectors() {
    let e = Engine::new(None);
    let b = small(&e);
    let g = b.group(3, 7, 1).unwrap();
    let image = b.rho_power(3, 7, 1, 3, &BitVector::zeros(g.dim)).unwrap();
    assert!(image.is_zero());
}

#[test]
fn mahowald_invariants_of_the_hopf_classes() {
    let e = Engine::new(None);
    let cat = borel_ext::catalog::SphereCatalog::build(&e, 2, 16).unwrap();
    for (class, expected) in [("h0", "h1[-2]"), ("h1", "h2[-3]"), ("h2", "h3[-5]")] {
        let m = mahowald(&e, &cat, class, 16).unwrap();
        assert_eq!(m.invariant.label(), expected, "{class}");
        assert!(m.certified);
    }
    assert!(matches!(mahowald(&e, &cat, "nope", 16), Err(BorelError::UnknownClass(_))));
}

fn name() -> impl Strategy<Value = String> {
    proptest::string::string_regex("(h[0-9]|c0|P|d0|e0|g){1,4}").unwrap()
}

proptest! {
    #[test]
    fn may_part_strips_any_cell(n in name(), cell in -40..40i32) {
        let label = format!("{n}[{cell}]");
        prop_assert_eq!(may_part(&label), n.as_str());
        prop_assert_eq!(may_part(&n), n.as_str());
    }

    #[test]
    fn superscripts_normalize_to_carets(n in name(), e in 2..10u32) {
        const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
        let plain = format!("{n}^{e}h1");
        let fancy = format!("{n}{}h1", SUP[e as usize]);
        prop_assert_eq!(normalize_name(&fancy), plain.clone());
        prop_assert_eq!(normalize_name(&plain), plain);
    }
}
