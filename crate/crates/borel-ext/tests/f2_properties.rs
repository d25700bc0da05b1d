use borel_ext::f2::{eventual_image, kernel_basis, rref, solve, BitMatrix, BitVector};
use proptest::prelude::*;

fn matrix(max: usize) -> impl Strategy<Value = BitMatrix> {
    (0..=max, 0..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r).prop_map(move |rows| {
            let vs: Vec<BitVector> = rows.iter().map(|b| BitVector::from_bools(b)).collect();
            BitMatrix::from_rows(c, &vs)
        })
    })
}

fn vector(len: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), len).prop_map(|b| BitVector::from_bools(&b))
}

/// Tower `V₃ → V₂ → V₁ → V₀` with dimensions up to 12, plus one extra stage.
fn tower() -> impl Strategy<Value = Vec<BitMatrix>> {
    proptest::collection::vec(1usize..=12, 5).prop_flat_map(|dims| {
        let stages: Vec<_> = (0..4)
            .map(|k| {
                let (r, c) = (dims[k], dims[k + 1]);
                proptest::collection::vec(vector(c), r).prop_map(move |rows| BitMatrix::from_rows(c, &rows))
            })
            .collect();
        stages
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rank_nullity(m in matrix(64)) {
        let (pivots, _) = rref(&m);
        let kernel = kernel_basis(&m);
        prop_assert_eq!(pivots.len(), m.rank());
        prop_assert_eq!(m.rank() + kernel.len(), m.cols());
        prop_assert_eq!(m.transpose().rank(), m.rank());
        prop_assert_eq!(m.rows() - kernel_basis(&m.transpose()).len(), m.rank());
        for v in &kernel {
            prop_assert!(m.mul_vec(v).unwrap().is_zero());
        }
    }

    #[test]
    fn rref_is_reduced_and_keeps_the_row_space(m in matrix(40)) {
        let (pivots, r) = rref(&m);
        prop_assert!(pivots.windows(2).all(|p| p[0] < p[1]));
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..r.rows() {
                prop_assert_eq!(r.get(j, p), i == j);
            }
        }
        for j in pivots.len()..r.rows() {
            prop_assert!(r.row(j).is_zero());
        }
        let mut stacked = m.row_vectors();
        stacked.extend(r.row_vectors());
        prop_assert_eq!(BitMatrix::from_rows(m.cols(), &stacked).rank(), m.rank());
    }

    #[test]
    fn solve_round_trips(m in matrix(48), seed in any::<u64>()) {
        let x = BitVector::from_ones(m.cols(), (0..m.cols()).filter(|i| seed >> (i % 64) & 1 == 1));
        let v = m.mul_vec(&x).unwrap();
        let y = solve(&m, &v).unwrap().expect("v lies in the column space");
        prop_assert_eq!(m.mul_vec(&y).unwrap(), v);
    }

    #[test]
    fn solve_is_sound_when_it_succeeds(m in matrix(24), seed in any::<u64>()) {
        let v = BitVector::from_ones(m.rows(), (0..m.rows()).filter(|i| seed >> (i % 64) & 1 == 1));
        if let Some(x) = solve(&m, &v).unwrap() {
            prop_assert_eq!(m.mul_vec(&x).unwrap(), v);
        }
    }

    #[test]
    fn longer_towers_have_smaller_images(t in tower()) {
        let short = eventual_image(&t[..3]).unwrap();
        let long = eventual_image(&t).unwrap();
        let rank = |b: &[BitVector]| BitMatrix::from_rows(t[0].rows(), b).rank();
        prop_assert!(long.basis.len() <= short.basis.len());
        let mut both = short.basis.clone();
        both.extend(long.basis.iter().cloned());
        prop_assert_eq!(rank(&both), short.basis.len());
    }
}

#[test]
fn solve_rejects_mismatched_lengths() {
    assert!(solve(&BitMatrix::identity(3), &BitVector::zeros(2)).is_err());
}

#[test]
fn eventual_image_rejects_mismatched_towers() {
    assert!(eventual_image(&[BitMatrix::zeros(2, 3), BitMatrix::zeros(2, 2)]).is_err());
}
