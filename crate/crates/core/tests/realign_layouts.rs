//! Realignment checked entry by entry against hand-written layouts where
//! `a_ij` is the 1-based `(i, j)` entry of `ρ`.

use qsct_core::numerics::{realign, unrealign, Bipartition, ComplexMatrix};
use qsct_core::Complex64;

/// Matrix whose `(i, j)` entry (1-based) encodes `10·i + j`.
fn labelled(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| Complex64::new((10 * (i + 1) + (j + 1)) as f64, 0.0))
}

fn from_labels(rows: &[&[u32]]) -> ComplexMatrix {
    let n = rows.len();
    ComplexMatrix::from_fn(n, rows[0].len(), |i, j| Complex64::new(rows[i][j] as f64, 0.0))
}

#[test]
fn two_by_two_layout() {
    let expected = from_labels(&[
        &[11, 21, 12, 22],
        &[31, 41, 32, 42],
        &[13, 23, 14, 24],
        &[33, 43, 34, 44],
    ]);
    let part = Bipartition::new(2, 2).unwrap();
    let r = realign(&labelled(4), part).unwrap();
    assert_eq!(r, expected);
}

#[test]
fn three_by_three_layout() {
    let expected = from_labels(&[
        &[11, 21, 31, 12, 22, 32, 13, 23, 33],
        &[41, 51, 61, 42, 52, 62, 43, 53, 63],
        &[71, 81, 91, 72, 82, 92, 73, 83, 93],
        &[14, 24, 34, 15, 25, 35, 16, 26, 36],
        &[44, 54, 64, 45, 55, 65, 46, 56, 66],
        &[74, 84, 94, 75, 85, 95, 76, 86, 96],
        &[17, 27, 37, 18, 28, 38, 19, 29, 39],
        &[47, 57, 67, 48, 58, 68, 49, 59, 69],
        &[77, 87, 97, 78, 88, 98, 79, 89, 99],
    ]);
    let part = Bipartition::new(3, 3).unwrap();
    let r = realign(&labelled(9), part).unwrap();
    assert_eq!(r, expected);
}

#[test]
fn unequal_parts_round_trip() {
    for (da, db) in [(2, 3), (3, 2), (2, 4), (4, 3)] {
        let part = Bipartition::new(da, db).unwrap();
        let rho = labelled(da * db);
        let r = realign(&rho, part).unwrap();
        assert_eq!(r.dims(), (da * da, db * db));
        assert_eq!(unrealign(&r, part).unwrap(), rho);
    }
}

#[test]
fn size_mismatch_rejected() {
    let part = Bipartition::new(2, 3).unwrap();
    assert!(realign(&labelled(4), part).is_err());
}
