//! Independent checks of the dense linear algebra against nalgebra.

use conespec::linalg::{sym_eigen, sym_sqrt};
use conespec::Point;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sym_matrix(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 0.5 * (v[i * n + j] + v[j * n + i]);
            }
        }
        a
    })
}

proptest! {
    #[test]
    fn jacobi_eigenvalues_match_nalgebra(n in 1usize..7, seed in any::<u64>()) {
        let a: Vec<f64> = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            (0..n * n).map(|k| 0.5 * (raw[k] + raw[(k % n) * n + k / n])).collect()
        };
        let ours = sym_eigen(&a, n);
        let mut theirs: Vec<f64> = DMatrix::from_row_slice(n, n, &a).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.values.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn sqrt_matches_nalgebra(b in sym_matrix(4)) {
        let n = 4;
        let bm = DMatrix::from_row_slice(n, n, &b);
        let psd = &bm * &bm;
        let dense: Vec<f64> = (0..n * n).map(|k| psd[(k / n, k % n)]).collect();
        let ours = sym_sqrt(&Point::sym_from_dense(n, &dense), 1e-12).unwrap().to_dense();
        let eig = psd.symmetric_eigen();
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let scale = 1.0 + root.norm();
        for k in 0..n * n {
            prop_assert!((ours[k] - root[(k / n, k % n)]).abs() <= 1e-7 * scale);
        }
    }
}
