#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use weavefuse::fusion::FusionFrame;
use weavefuse::hilbert::{random_vector, FieldTag, Vector, C64};
use weavefuse::weaving::{SubsetSelector, WeavingPair};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

/// Random pair in dimension `n` with `m` members per family; member
/// dimensions are drawn from `1..n` and weights from `[0.5, 2]`.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize, m: usize, field: FieldTag) -> WeavingPair {
    let family = |rng: &mut ChaCha8Rng| {
        let entries: Vec<(f64, Vec<Vector>)> = (0..m)
            .map(|_| {
                let k = rng.random_range(1..n);
                let span = (0..k).map(|_| random_vector(rng, n, field)).collect();
                (rng.random_range(0.5..2.0), span)
            })
            .collect();
        FusionFrame::from_spans(&entries).unwrap()
    };
    let first = family(rng);
    let second = family(rng);
    WeavingPair::new(first, second).unwrap()
}

/// Measurements `w_i ||P_i f||` of the woven family, computed from the
/// member bases directly.
pub fn measurements(pair: &WeavingPair, sigma: &SubsetSelector, f: &DVector<C64>) -> Vec<f64> {
    (0..pair.len())
        .map(|i| {
            let m = pair.chosen(sigma, i);
            let b = m.subspace().basis();
            m.weight() * (b.adjoint() * f).norm()
        })
        .collect()
}

/// Smallest `||f - u g||` over unimodular `u`, by scanning and refining the
/// phase angle.
pub fn similarity_gap(f: &DVector<C64>, g: &DVector<C64>, field: FieldTag) -> f64 {
    let at = |theta: f64| (f - g * C64::from_polar(1.0, theta)).norm();
    match field {
        FieldTag::Real => at(0.0).min(at(std::f64::consts::PI)),
        FieldTag::Complex => {
            let steps = 720;
            let mut best = (0.0, f64::INFINITY);
            for k in 0..steps {
                let t = k as f64 * std::f64::consts::TAU / steps as f64;
                let v = at(t);
                if v < best.1 {
                    best = (t, v);
                }
            }
            let mut h = std::f64::consts::TAU / steps as f64;
            while h > 1e-14 {
                for t in [best.0 - h, best.0 + h] {
                    let v = at(t);
                    if v < best.1 {
                        best = (t, v);
                    }
                }
                h *= 0.5;
            }
            best.1
        }
    }
}

/// Result of the direct witness search at one subset.
pub struct WitnessSearch {
    /// Smallest value reached by the rank defect.
    pub defect: f64,
    /// A validated pair with equal measurements, if one was found.
    pub witness: Option<(DVector<C64>, DVector<C64>)>,
}

fn as_real(v: &DVector<C64>, field: FieldTag) -> DVector<f64> {
    match field {
        FieldTag::Real => DVector::from_iterator(v.len(), v.iter().map(|z| z.re)),
        FieldTag::Complex => DVector::from_iterator(2 * v.len(), v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im))),
    }
}

fn from_real(x: &DVector<f64>, field: FieldTag) -> DVector<C64> {
    match field {
        FieldTag::Real => x.map(|r| C64::new(r, 0.0)),
        FieldTag::Complex => {
            let n = x.len() / 2;
            DVector::from_fn(n, |i, _| C64::new(x[i], x[n + i]))
        }
    }
}

/// With `f = a + b` and `g = a - b`, equal measurements reduce to
/// `Re <P_i a, b> = 0` for every member. Columns of the returned matrix are
/// the real forms of `w_i^2 P_i a`; `b` must lie in their orthogonal
/// complement.
fn constraint_matrix(projectors: &[DMatrix<C64>], a: &DVector<C64>, field: FieldTag) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = projectors.iter().map(|p| as_real(&(p * a), field)).collect();
    DMatrix::from_columns(&cols)
}

/// Number of trivial solutions `b` for a given `a`: none over the reals,
/// `b = i t a` over the complex field.
fn trivial(field: FieldTag) -> usize {
    match field {
        FieldTag::Real => 0,
        FieldTag::Complex => 1,
    }
}

/// Singular value whose vanishing leaves a non-trivial `b`, normalised by the
/// largest one.
fn defect(projectors: &[DMatrix<C64>], a: &DVector<C64>, field: FieldTag) -> (f64, DMatrix<f64>) {
    let c = constraint_matrix(projectors, a, field);
    let rows = c.nrows();
    let target = rows - 1 - trivial(field);
    let padded = if c.ncols() < rows {
        let mut p = DMatrix::zeros(rows, rows);
        p.view_mut((0, 0), (rows, c.ncols())).copy_from(&c);
        p
    } else {
        c
    };
    let svd = padded.svd(true, false);
    let mut values: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    values.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let top = values[0].0.max(f64::MIN_POSITIVE);
    let u = svd.u.unwrap();
    let order: Vec<usize> = values.iter().map(|v| v.1).collect();
    let sorted_u = DMatrix::from_columns(&order.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
    (values[target].0 / top, sorted_u)
}

/// Multi-start derivative-free search over unit `a` for a vanishing defect,
/// followed by construction and validation of `(a + b, a - b)`.
pub fn direct_witness_search(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    starts: usize,
    rng: &mut ChaCha8Rng,
) -> WitnessSearch {
    let field = pair.field();
    let n = pair.dim();
    let projectors: Vec<DMatrix<C64>> = (0..pair.len()).map(|i| pair.chosen(sigma, i).weighted_projector()).collect();
    let real_dim = as_real(&DVector::zeros(n), field).len();
    let unit = |x: DVector<f64>| {
        let norm = x.norm();
        x / norm
    };

    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..starts {
        let mut x = unit(DVector::from_fn(real_dim, |_, _| rng.sample::<f64, _>(StandardNormal)));
        let mut fx = defect(&projectors, &from_real(&x, field), field).0;
        let mut step = 0.3;
        let mut evals = 0;
        while step > 1e-15 && fx > 1e-14 && evals < 4000 {
            let trial = unit(&x + DVector::from_fn(real_dim, |_, _| step * rng.sample::<f64, _>(StandardNormal)));
            let ft = defect(&projectors, &from_real(&trial, field), field).0;
            evals += 1;
            if ft < fx {
                x = trial;
                fx = ft;
                step *= 1.5;
            } else {
                step *= 0.9;
            }
        }
        if best.as_ref().is_none_or(|b| fx < b.0) {
            best = Some((fx, x));
        }
        if fx < 1e-12 {
            break;
        }
    }
    let (value, x) = best.expect("at least one start");
    let a = from_real(&x, field);
    let (_, u) = defect(&projectors, &a, field);
    let rows = u.nrows();
    // the left singular vectors past the target span the admissible b
    let mut b = u.column(rows - 1 - trivial(field)).into_owned();
    if field == FieldTag::Complex {
        let ia = as_real(&a.map(|z| z * C64::new(0.0, 1.0)), field);
        let ia = &ia / ia.norm();
        let other = u.column(rows - 1).into_owned();
        // keep the part orthogonal to the trivial direction i a
        let pick = if (&b - &ia * ia.dot(&b)).norm() >= (&other - &ia * ia.dot(&other)).norm() { b } else { other };
        b = &pick - &ia * ia.dot(&pick);
        b /= b.norm();
    }
    let b = from_real(&b, field);
    let f = &a + &b;
    let g = &a - &b;
    let scale = f.norm().max(g.norm());
    let (f, g) = (f / C64::new(scale, 0.0), g / C64::new(scale, 0.0));
    let gap: f64 = measurements(pair, sigma, &f)
        .iter()
        .zip(measurements(pair, sigma, &g))
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let witness = (gap < 1e-8 && similarity_gap(&f, &g, field) > 1e-6).then_some((f, g));
    WitnessSearch { defect: value, witness }
}

/// Verdict of the direct search across every subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Retrievable,
    NotRetrievable,
    Undecided,
}

/// `NotRetrievable` when some subset yields a validated pair, `Retrievable`
/// when every subset's defect stays above `clear`.
pub fn direct_verdict(pair: &WeavingPair, starts: usize, clear: f64, rng: &mut ChaCha8Rng) -> OracleVerdict {
    let m = pair.len();
    let mut all_clear = true;
    for r in 0..1u64 << m {
        let sigma = SubsetSelector::from_rank(m, r);
        let search = direct_witness_search(pair, &sigma, starts, rng);
        if search.witness.is_some() {
            return OracleVerdict::NotRetrievable;
        }
        if search.defect <= clear {
            all_clear = false;
        }
    }
    if all_clear {
        OracleVerdict::Retrievable
    } else {
        OracleVerdict::Undecided
    }
}

/// Whether `vectors` span their ambient space, by searching for a nonzero
/// maximal minor.
pub fn spans_by_minors(vectors: &[[f64; 3]], tol: f64) -> bool {
    let n = 3;
    if vectors.len() < n {
        return false;
    }
    let k = vectors.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let m = DMatrix::from_fn(n, n, |i, j| [vectors[a], vectors[b], vectors[c]][j][i]);
                if m.determinant().abs() > tol {
                    return true;
                }
            }
        }
    }
    false
}

pub fn to_vector(f: &DVector<C64>, field: FieldTag) -> Vector {
    Vector::from_coords(f.clone(), field).unwrap()
}
