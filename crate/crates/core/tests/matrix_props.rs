mod common;

use approx::assert_relative_eq;
use common::{generated, sym_matrix};
use proptest::prelude::*;
use sdpxlab::{symmetrize, SymMatrix};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_matches_forward_map((inst, x, y) in generated(8).prop_flat_map(|inst| {
        let (n, m) = (inst.n, inst.m);
        (Just(inst), sym_matrix(n), prop::collection::vec(-3.0f64..3.0, m))
    })) {
        let lhs = inst.apply_a_adjoint(&y).unwrap().inner(&x);
        let rhs: f64 = inst.apply_a(&x).unwrap().iter().zip(&y).map(|(a, b)| a * b).sum();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn symmetrize_is_idempotent(v in prop::collection::vec(-10.0f64..10.0, 16)) {
        let rows: Vec<Vec<f64>> = v.chunks(4).map(<[f64]>::to_vec).collect();
        let s = symmetrize(&rows).unwrap();
        prop_assert_eq!(symmetrize(&s.to_rows()).unwrap(), s);
    }

    #[test]
    fn symmetrize_is_nearest_symmetric_2x2(v in prop::collection::vec(-10.0f64..10.0, 4), offs in prop::collection::vec(-1.0f64..1.0, 3)) {
        let rows = vec![vec![v[0], v[1]], vec![v[2], v[3]]];
        let s = symmetrize(&rows).unwrap();
        let dist = |m: &SymMatrix| -> f64 {
            (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (m.get(i, j) - rows[i][j]).powi(2)).sum::<f64>()
        };
        let other = SymMatrix::from_upper_fn(2, |i, j| s.get(i, j) + offs[i + j]);
        prop_assert!(dist(&s) <= dist(&other) + 1e-12);
    }
}

#[test]
fn symmetrize_averages_off_diagonal() {
    let s = symmetrize(&[vec![1.0, 2.0], vec![4.0, 3.0]]).unwrap();
    assert_relative_eq!(s.get(0, 1), 3.0);
    assert_relative_eq!(s.get(1, 0), 3.0);
    assert!(symmetrize(&[vec![1.0, 2.0]]).is_err());
}
