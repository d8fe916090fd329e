mod common;

use common::{fixture, measurements, random_pair, similarity_gap, spans_by_minors};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weavefuse::catalog;
use weavefuse::document::load_spec;
use weavefuse::erasure::{scaling_experiment, simulate, sweep_cells, tight_family, ErasureModel, Estimator};
use weavefuse::hilbert::{random_vector, FieldTag, Vector, C64};
use weavefuse::phase::{complement_property, gamma, phase_distance};
use weavefuse::weaving::{sigma_bounds, universal_bounds, SigmaMode, SubsetSelector};

#[test]
fn fixtures_match_the_catalog() {
    let cases = [
        ("example_2_1", catalog::example_2_1(6)),
        ("example_2_2", catalog::example_2_2()),
        ("example_3_2", catalog::example_3_2()),
        ("example_3_3", catalog::example_3_3()),
        ("example_r3", catalog::example_r3()),
    ];
    for (name, built) in cases {
        let loaded = load_spec(fixture(name)).unwrap();
        assert_eq!((loaded.dim(), loaded.len(), loaded.field()), (built.dim(), built.len(), built.field()));
        for i in 0..built.len() {
            for (a, b) in [(loaded.first(), built.first()), (loaded.second(), built.second())] {
                let d = a.member(i).weighted_projector() - b.member(i).weighted_projector();
                assert!(d.norm() < 1e-12, "{name} member {i}");
            }
        }
    }
}

#[test]
fn wrapped_planes_bounds_match_the_diagonal() {
    // the woven operator is diagonal with entry 1 + [k-1 takes a plane]
    for n in 3..=7 {
        let pair = catalog::example_2_1(n);
        for r in 0..1u64 << n {
            let sigma = SubsetSelector::from_rank(n, r);
            let diag: Vec<f64> = (0..n).map(|k| 1.0 + f64::from(!sigma.contains((k + n - 1) % n))).collect();
            let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = diag.iter().copied().fold(0.0, f64::max);
            let b = sigma_bounds(&pair, &sigma).unwrap();
            assert!((b.lower - lo).abs() < 1e-12 && (b.upper - hi).abs() < 1e-12, "n={n} sigma={sigma}");
        }
        let u = universal_bounds(&pair, SigmaMode::Exact).unwrap();
        assert_eq!((u.universal_lower, u.universal_upper), (1.0, 2.0));
    }
}

#[test]
fn gamma_matches_direct_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for field in [FieldTag::Real, FieldTag::Complex] {
        for m in 3..=5 {
            let pair = random_pair(&mut rng, 3, m, field);
            for r in 0..1u64 << m {
                let sigma = SubsetSelector::from_rank(m, r);
                let f = random_vector(&mut rng, 3, field);
                let lib = gamma(&pair, &sigma, &f).unwrap();
                let direct = measurements(&pair, &sigma, f.coords());
                for (a, b) in lib.as_slice().iter().zip(&direct) {
                    assert!((a - b).abs() < 1e-12 * b.max(1.0));
                }
            }
        }
    }
}

#[test]
fn erasure_error_matches_its_expectation() {
    // E ||err||^2 = n / (2m) for a unit vector under the halving estimator
    for (n, m) in [(2, 8), (4, 16), (3, 12)] {
        let pair = tight_family(n, m).unwrap();
        let f = Vector::real(&vec![1.0 / (n as f64).sqrt(); n]);
        let model = ErasureModel::new(0.5, 9).unwrap();
        let report = simulate(&pair, &SubsetSelector::full(m), &f, &model, Estimator::halving(m), 20_000).unwrap();
        let second_moment = report.errors.iter().map(|e| e * e).sum::<f64>() / report.errors.len() as f64;
        let expected = n as f64 / (2.0 * m as f64);
        assert!((second_moment / expected - 1.0).abs() < 0.05, "n={n} m={m}: {second_moment} vs {expected}");
    }
}

#[test]
fn operator_error_scales_like_the_vector_error() {
    let table = scaling_experiment(&sweep_cells(&[4], &[4, 16, 64]), 2000, 8).unwrap();
    let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| ((r.m as f64).ln(), r.mean_operator_error.ln())).collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[pts.len() - 1];
    let slope = (y1 - y0) / (x1 - x0);
    assert!((slope + 0.5).abs() < 0.1, "operator slope {slope}");
}

fn small_vectors(len: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-1i8..=1).prop_map(|a| a.map(f64::from)), len)
}

fn to_vectors(raw: &[[f64; 3]]) -> Vec<Vector> {
    raw.iter()
        .map(|v| if v.iter().all(|x| *x == 0.0) { Vector::real(&[1.0, 0.0, 0.0]) } else { Vector::real(v) })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_check_agrees_with_minors(first in small_vectors(4), second in small_vectors(4)) {
        let (fv, sv) = (to_vectors(&first), to_vectors(&second));
        let raw = |vs: &[Vector]| -> Vec<[f64; 3]> {
            vs.iter().map(|v| [v.coords()[0].re, v.coords()[1].re, v.coords()[2].re]).collect()
        };
        let (fr, sr) = (raw(&fv), raw(&sv));
        let report = complement_property(&fv, &sv, 1e-10).unwrap();
        for r in 0..16u64 {
            let sel = SubsetSelector::from_rank(4, r);
            let chosen: Vec<[f64; 3]> = (0..4).map(|i| if sel.contains(i) { fr[i] } else { sr[i] }).collect();
            let holds = (0..16u32).all(|part| {
                let (a, b): (Vec<usize>, Vec<usize>) = (0..4).partition(|&i| part >> i & 1 == 1);
                let pick = |idx: &[usize]| idx.iter().map(|&i| chosen[i]).collect::<Vec<_>>();
                spans_by_minors(&pick(&a), 1e-10) || spans_by_minors(&pick(&b), 1e-10)
            });
            prop_assert_eq!(holds, report.per_selection[r as usize]);
        }
    }

    #[test]
    fn phase_distance_matches_angle_scan(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_vector(&mut rng, 3, FieldTag::Complex);
        let g = random_vector(&mut rng, 3, FieldTag::Complex);
        let d = phase_distance(&f, &g).unwrap();
        let scan = similarity_gap(f.coords(), g.coords(), FieldTag::Complex);
        prop_assert!((d - scan).abs() < 1e-9 * (1.0 + scan));
        // a unimodular multiple is at distance zero
        let rotated: DVector<C64> = f.coords() * C64::from_polar(1.0, theta);
        let h = Vector::from_coords(rotated, FieldTag::Complex).unwrap();
        prop_assert!(phase_distance(&f, &h).unwrap() < 1e-12 * (1.0 + f.norm()));
    }
}
