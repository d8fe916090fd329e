//! The bundled example pairs, built in code. The JSON fixtures under
//! `fixtures/` serialise the same families.

use crate::fusion::FusionFrame;
use crate::hilbert::{FieldTag, Vector, C64};
use crate::weaving::WeavingPair;

fn unit_family(spans: Vec<Vec<Vector>>) -> FusionFrame {
    let entries: Vec<(f64, Vec<Vector>)> = spans.into_iter().map(|s| (1.0, s)).collect();
    FusionFrame::from_spans(&entries).expect("catalog families are valid")
}

fn lines(vectors: &[&[f64]]) -> FusionFrame {
    unit_family(vectors.iter().map(|v| vec![Vector::real(v)]).collect())
}

/// Lines `span{e_k}` against planes `span{e_k, e_k+1}` in `R^n`, the last
/// plane wrapping to `span{e_n, e_1}`. Every woven frame operator is diagonal
/// with entries in `{1, 2}`.
pub fn example_2_1(n: usize) -> WeavingPair {
    let e = |k: usize| Vector::basis(n, k % n, FieldTag::Real);
    let first = unit_family((0..n).map(|k| vec![e(k)]).collect());
    let second = unit_family((0..n).map(|k| vec![e(k), e(k + 1)]).collect());
    WeavingPair::new(first, second).expect("equal lengths")
}

/// Coordinate axes of `R^3` against the same axes with the first two
/// swapped.
pub fn example_2_2() -> WeavingPair {
    let first = lines(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    let second = lines(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
    WeavingPair::new(first, second).expect("equal lengths")
}

/// Three lines against three lines in `R^2`; phase retrievable for every
/// subset.
pub fn example_3_2() -> WeavingPair {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let first = lines(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 2.0]]);
    let second = lines(&[&[h, h], &[h, -h], &[2.0, 1.0]]);
    WeavingPair::new(first, second).expect("equal lengths")
}

/// Three lines against three lines in `C^2`; `(1, i)` and `(i, 1)` share
/// their measurements at `sigma = {1, 2}`.
pub fn example_3_3() -> WeavingPair {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |v: &[f64]| Vector::complex(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    let first = unit_family(vec![vec![c(&[1.0, 0.0])], vec![c(&[0.0, 1.0])], vec![c(&[1.0, 2.0])]]);
    let second = unit_family(vec![
        vec![c(&[2.0 * h, h])],
        vec![c(&[h, -h])],
        vec![c(&[1.0, 1.0])],
    ]);
    WeavingPair::new(first, second).expect("equal lengths")
}

/// Five lines against five lines in `R^3`.
pub fn example_r3() -> WeavingPair {
    let (first, second) = r3_vectors();
    let first = lines(&first.iter().map(|v| v.as_slice()).collect::<Vec<_>>());
    let second = lines(&second.iter().map(|v| v.as_slice()).collect::<Vec<_>>());
    WeavingPair::new(first, second).expect("equal lengths")
}

/// Spanning vectors of [`example_r3`], as plain coordinates.
pub fn r3_vectors() -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    (
        vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, -1.0, 1.0],
            [2.0 / 3.0, 2.0, -3.0],
        ],
        vec![
            [5.0, -1.5, 0.0],
            [-1.0, 3.0, 1.5],
            [-1.0, -3.0, 2.0 / 3.0],
            [1.0, 1.0, 1.0],
            [1.0, 2.0, 3.0],
        ],
    )
}
