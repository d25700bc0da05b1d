use std::sync::Arc;

use borel_ext::engine::Engine;
use borel_ext::f2::{BitMatrix, BitVector};
use borel_ext::module::{cell_sub, stunted_module, GradedModule, ModuleMap, ShortExactSeq};
use borel_ext::resolution::{connecting, induced_map, load_resolution, save_resolution, ExtMap, Resolution};
use borel_ext::steenrod::AlgebraTable;

fn same_resolution(a: &Resolution, b: &Resolution) {
    assert_eq!(a.module(), b.module());
    for s in 0..=a.s_max().min(b.s_max()) {
        let t_max = a.t_max().min(b.t_max());
        let ga: Vec<_> = a.generators(s).iter().filter(|g| g.degree <= t_max).collect();
        let gb: Vec<_> = b.generators(s).iter().filter(|g| g.degree <= t_max).collect();
        assert_eq!(ga, gb, "generators of F_{s} for {}", a.module().name());
    }
}

fn block(map: &ExtMap, s: u32, t: i32, rows: usize, cols: usize) -> BitMatrix {
    map.matrix(s, t).cloned().unwrap_or_else(|| BitMatrix::zeros(rows, cols))
}

#[test]
fn sphere_low_dimensions() {
    let r = Engine::new(None).resolve(&GradedModule::sphere(0), 8, 14);
    for (s, t) in [(0, 0), (1, 1), (1, 2), (1, 4), (2, 2), (3, 3), (1, 8), (2, 4), (2, 8), (3, 6), (4, 11), (5, 14)] {
        assert_eq!(r.ext_dim(s, t), 1, "({s},{t})");
    }
    for (s, t) in [(1, 3), (2, 3), (3, 4), (3, 5), (2, 7)] {
        assert_eq!(r.ext_dim(s, t), 0, "({s},{t})");
    }
    for s in 0..=8 {
        assert_eq!(r.ext_dim(s, s as i32), 1, "h0 tower at s = {s}");
    }
}

#[test]
fn suspension_shifts_the_chart() {
    let e = Engine::new(None);
    let base = e.resolve(&GradedModule::sphere(0), 5, 14);
    let up = e.resolve(&GradedModule::sphere(3), 5, 17);
    for s in 0..=5 {
        for t in 0..=14 {
            assert_eq!(base.ext_dim(s, t), up.ext_dim(s, t + 3));
        }
    }
}

#[test]
fn resolutions_are_exact_minimal_and_deterministic() {
    let algebra = Arc::new(AlgebraTable::new(32));
    for m in [stunted_module(1, 8).unwrap(), stunted_module(-5, -1).unwrap(), GradedModule::from_cells([-6, -4, -3, -2, 0, 1, 2])] {
        let a = Resolution::new(&m, algebra.clone(), 6, 14);
        let b = Resolution::new(&m, algebra.clone(), 6, 14);
        a.verify().unwrap();
        same_resolution(&a, &b);
        for s in 1..=6 {
            for g in a.generators(s) {
                assert!(g.terms.iter().all(|term| term.deg > 0), "degree-zero entry in d(F_{s})");
            }
        }
    }
}

/// Shifting is only valid for the canonical module itself: a stored taller
/// module agrees with it below `t_max` but not after being moved up by a
/// period. Resolving the taller module first must not change later answers.
#[test]
fn engine_answers_do_not_depend_on_request_order() {
    let tall = GradedModule::from_cells(0..=27);
    let short = GradedModule::from_cells(16..=27);
    let later = GradedModule::from_cells(16..=40);

    let warm = Engine::new(None);
    warm.resolve(&tall, 5, 27);
    let a = warm.resolve(&short, 5, 27);
    let b = warm.resolve(&later, 5, 40);

    let cold = Engine::new(None);
    same_resolution(&a, &cold.resolve(&short, 5, 27));
    cold.clear();
    let fresh = cold.resolve(&later, 5, 40);
    for s in 0..=5 {
        for t in 16..=40 {
            assert_eq!(b.ext_dim(s, t), fresh.ext_dim(s, t), "Ext^({s},{t}) of {}", later.name());
        }
    }
}

#[test]
fn periodic_shift_matches_direct_resolution() {
    let algebra = Arc::new(AlgebraTable::new(32));
    let e = Engine::new(None);
    for (a, b) in [(-13, -2), (-21, -9), (17, 29)] {
        let m = stunted_module(a, b).unwrap();
        let via_engine = e.resolve(&m, 5, b + 6);
        let direct = Resolution::new(&m, algebra.clone(), 5, b + 6);
        for s in 0..=5 {
            for t in a..=b + 6 {
                assert_eq!(via_engine.ext_dim(s, t), direct.ext_dim(s, t), "P_{a}^{b} at ({s},{t})");
            }
        }
    }
}

#[test]
fn cache_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let algebra = Arc::new(AlgebraTable::new(32));
    let m = stunted_module(-3, 4).unwrap();
    let r = Resolution::new(&m, algebra.clone(), 4, 12);
    let path = save_resolution(dir.path(), &r).unwrap();
    let back = load_resolution(dir.path(), &m, 4, 12, algebra.clone()).unwrap().expect("cached");
    same_resolution(&r, &back);
    assert!(load_resolution(dir.path(), &m, 5, 12, algebra.clone()).unwrap().is_none());

    let mut bytes = std::fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x5a;
    std::fs::write(&path, &bytes).unwrap();
    assert!(load_resolution(dir.path(), &m, 4, 12, algebra).unwrap().is_none());
    assert!(!path.exists(), "corrupt entries are removed");

    // An engine with a cache directory gives the same answers twice.
    let first = Engine::new(Some(dir.path().to_owned())).resolve(&m, 4, 12);
    let second = Engine::new(Some(dir.path().to_owned())).resolve(&m, 4, 12);
    same_resolution(&first, &second);
}

#[test]
fn induced_map_examples() {
    let e = Engine::new(None);
    let p = stunted_module(1, 2).unwrap();
    let (s1, s2) = (GradedModule::sphere(1), GradedModule::sphere(2));
    let rp = e.resolve(&p, 3, 8);
    let r1 = e.resolve(&s1, 3, 8);
    let r2 = e.resolve(&s2, 3, 8);

    let id = ModuleMap::on_common_cells(&p, &p).unwrap();
    assert!(induced_map(&id, &rp, &rp, 8).unwrap().is_identity());

    // P₁² ↠ S¹: the unit of S¹ goes to the bottom-cell generator.
    let quotient = ModuleMap::on_common_cells(&p, &s1).unwrap();
    let q = induced_map(&quotient, &rp, &r1, 8).unwrap();
    assert_eq!(q.apply(0, 1, &BitVector::unit(1, 0)), Some(BitVector::unit(1, 0)));

    // S² ↪ P₁²: the bottom generator restricts to zero.
    let inclusion = ModuleMap::on_common_cells(&s2, &p).unwrap();
    let i = induced_map(&inclusion, &r2, &rp, 8).unwrap();
    let bottom = i.apply(0, 1, &BitVector::unit(1, 0)).unwrap_or_else(|| BitVector::zeros(0));
    assert!(bottom.is_zero());
}

#[test]
fn induced_maps_compose() {
    let e = Engine::new(None);
    let (a, b, c) = (stunted_module(3, 6).unwrap(), stunted_module(1, 6).unwrap(), stunted_module(1, 4).unwrap());
    let f = ModuleMap::on_common_cells(&a, &b).unwrap();
    let g = ModuleMap::on_common_cells(&b, &c).unwrap();
    let gf = f.compose(&g).unwrap();
    let (s_max, t_max) = (4, 14);
    let (ra, rb, rc) = (e.resolve(&a, s_max, t_max), e.resolve(&b, s_max, t_max), e.resolve(&c, s_max, t_max));
    let fs = induced_map(&f, &ra, &rb, t_max).unwrap();
    let gs = induced_map(&g, &rb, &rc, t_max).unwrap();
    let gfs = induced_map(&gf, &ra, &rc, t_max).unwrap();
    let chained = gs.then(&fs);
    for s in 0..=s_max {
        for t in 0..=t_max {
            let (dc, da) = (rc.ext_dim(s, t), ra.ext_dim(s, t));
            assert_eq!(block(&gfs, s, t, dc, da), block(&chained, s, t, dc, da), "({s},{t})");
        }
    }
}

#[test]
fn connecting_map_examples() {
    let e = Engine::new(None);
    let p = stunted_module(1, 2).unwrap();
    let ses = cell_sub(&p, 2);
    let delta = connecting(&ses, &e.resolve(ses.sub(), 3, 8), &e.resolve(ses.quot(), 3, 8), 8).unwrap();
    assert_eq!(delta.matrix(0, 2), Some(&BitMatrix::identity(1)));

    // Sq³ vanishes on x⁰, so these cells split.
    let split = GradedModule::from_cells([0, 3]);
    let ses = cell_sub(&split, 3);
    let delta = connecting(&ses, &e.resolve(ses.sub(), 4, 12), &e.resolve(ses.quot(), 4, 12), 12).unwrap();
    assert!(delta.blocks.values().all(BitMatrix::is_zero));
}

/// `Ext^s(C) → Ext^s(B) → Ext^s(A) → Ext^{s+1}(C)` is exact.
#[test]
fn long_exact_sequence() {
    let e = Engine::new(None);
    let (s_max, t_max) = (5, 16);
    let mid = stunted_module(1, 8).unwrap();
    for cut in [2, 4, 5] {
        let ses: ShortExactSeq = cell_sub(&mid, cut);
        let (ra, rb, rc) = (
            e.resolve(ses.sub(), s_max, t_max),
            e.resolve(ses.mid(), s_max, t_max),
            e.resolve(ses.quot(), s_max, t_max),
        );
        let p = induced_map(&ses.projection, &rb, &rc, t_max).unwrap();
        let i = induced_map(&ses.inclusion, &ra, &rb, t_max).unwrap();
        let d = connecting(&ses, &ra, &rc, t_max).unwrap();
        for s in 0..s_max {
            for t in 0..=t_max {
                let (a, b, c) = (ra.ext_dim(s, t), rb.ext_dim(s, t), rc.ext_dim(s, t));
                let c1 = rc.ext_dim(s + 1, t);
                let rp = block(&p, s, t, c, b).rank();
                let ri = block(&i, s, t, b, a).rank();
                let rd = block(&d, s, t, a, c1).rank();
                let rp1 = block(&p, s + 1, t, c1, rb.ext_dim(s + 1, t)).rank();
                assert_eq!(rp + ri, b, "at Ext^({s},{t})(mid), cut {cut}");
                assert_eq!(ri + rd, a, "at Ext^({s},{t})(sub), cut {cut}");
                assert_eq!(rd + rp1, c1, "at Ext^({},{t})(quot), cut {cut}", s + 1);
                let _ = c;
            }
        }
    }
}
