use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, random_vector, sym_bracket, FieldTag, Vector, C64};
use crate::weaving::{SubsetSelector, WeavingPair};

const DEGENERATE_BRACKET: f64 = 1e-12;
const REFINE_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub sigma: SubsetSelector,
    /// Smallest observed ratio; an upper estimate of the true constant.
    pub alpha_hat: f64,
    pub samples: usize,
    pub seed: u64,
    /// Pairs dropped for a vanishing bracket.
    pub skipped: usize,
    pub argmin: Option<(Vector, Vector)>,
}

/// Member coefficients `(B_i^H f, B_i^H g)` shared by both sides of the
/// bracket identity.
struct Members {
    bases: Vec<nalgebra::DMatrix<C64>>,
    weights2: Vec<f64>,
}

impl Members {
    fn new(pair: &WeavingPair, sigma: &SubsetSelector) -> Self {
        let chosen = (0..pair.len()).map(|i| pair.chosen(sigma, i));
        let (bases, weights2) = chosen
            .map(|m| (m.subspace().basis().clone(), m.weight() * m.weight()))
            .unzip();
        Members { bases, weights2 }
    }

    /// `w_i^2 tr(P_i [f, g]) = w_i^2 Re <P_i f, g>`.
    fn traces(&self, f: &Vector, g: &Vector) -> impl Iterator<Item = f64> + '_ {
        let (f, g) = (f.coords().clone(), g.coords().clone());
        self.bases.iter().zip(&self.weights2).map(move |(b, w2)| {
            let (a, c) = (b.ad_mul(&f), b.ad_mul(&g));
            w2 * c.dotc(&a).re
        })
    }

    fn numerator(&self, f: &Vector, g: &Vector) -> f64 {
        self.traces(f, g).map(|t| t * t).sum()
    }
}

/// `||[f, g]||_1 = sqrt(|f|^2 |g|^2 - (Im <f, g>)^2)`: the bracket has rank
/// at most two with eigenvalues of opposite sign.
fn bracket_trace_norm(f: &Vector, g: &Vector) -> f64 {
    let a = f.coords().norm_squared();
    let b = g.coords().norm_squared();
    let c = g.coords().dotc(f.coords());
    (a * b - c.im * c.im).max(0.0).sqrt()
}

/// Both sides of
/// `1/4 sum_i w_i^4 |<P_i g, f> + <P_i f, g>|^2 = sum_i (w_i^2 tr(P_i [f, g]))^2`.
pub fn bracket_identity_check(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    f: &Vector,
    g: &Vector,
) -> Result<(f64, f64)> {
    check_dim(pair.len(), sigma.len())?;
    pair.first().check_vector(f)?;
    pair.first().check_vector(g)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..pair.len() {
        let m = pair.chosen(sigma, i);
        let p = m.weighted_projector();
        let w2 = m.weight() * m.weight();
        // <P g, f> with the weight squared folded into P
        let pg_f = f.coords().dotc(&(&p * g.coords()));
        let pf_g = g.coords().dotc(&(&p * f.coords()));
        lhs += (pg_f + pf_g).norm_sqr() / 4.0;
        let bracket = sym_bracket(f, g)?;
        let t = w2 * (m.subspace().basis().adjoint() * bracket.matrix() * m.subspace().basis()).trace().re;
        rhs += t * t;
    }
    Ok((lhs, rhs))
}

/// The ratio minimised by [`alpha_estimate`]; `None` for a vanishing
/// bracket.
pub fn bracket_ratio(pair: &WeavingPair, sigma: &SubsetSelector, f: &Vector, g: &Vector) -> Result<Option<f64>> {
    check_dim(pair.len(), sigma.len())?;
    pair.first().check_vector(f)?;
    pair.first().check_vector(g)?;
    let members = Members::new(pair, sigma);
    Ok(ratio(&members, f, g))
}

fn ratio(members: &Members, f: &Vector, g: &Vector) -> Option<f64> {
    let scale = f.norm() * g.norm();
    let tn = bracket_trace_norm(f, g);
    if scale == 0.0 || tn < DEGENERATE_BRACKET * scale.max(1.0) {
        return None;
    }
    Some(members.numerator(f, g) / (tn * tn))
}

pub fn alpha_estimate(pair: &WeavingPair, sigma: &SubsetSelector, samples: usize, seed: u64) -> Result<AlphaEstimate> {
    alpha_estimate_with(pair, sigma, samples, seed, &[])
}

/// Minimum of the bracket ratio over `samples` Gaussian pairs plus `extra`,
/// with each new record refined by a shrinking random search. The draws for
/// sample `k` depend only on `(seed, k)`, so more samples never raise the
/// estimate.
pub fn alpha_estimate_with(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    samples: usize,
    seed: u64,
    extra: &[(Vector, Vector)],
) -> Result<AlphaEstimate> {
    check_dim(pair.len(), sigma.len())?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    for (f, g) in extra {
        pair.first().check_vector(f)?;
        pair.first().check_vector(g)?;
    }
    let members = Members::new(pair, sigma);
    let (n, field) = (pair.dim(), pair.field());

    let mut best: Option<(f64, Vector, Vector)> = None;
    let mut skipped = 0;
    let consider = |value: f64, f: Vector, g: Vector, best: &mut Option<(f64, Vector, Vector)>| {
        if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
            *best = Some((value, f, g));
        }
    };

    for (f, g) in extra {
        match ratio(&members, f, g) {
            Some(r) => consider(r, f.clone(), g.clone(), &mut best),
            None => skipped += 1,
        }
    }
    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let f = random_vector(&mut rng, n, field);
        let g = random_vector(&mut rng, n, field);
        let Some(r) = ratio(&members, &f, &g) else {
            skipped += 1;
            continue;
        };
        if best.as_ref().is_none_or(|(b, _, _)| r < *b) {
            let (r, f, g) = refine(&members, r, f, g, &mut rng);
            consider(r, f, g, &mut best);
        }
    }

    let Some((alpha_hat, f, g)) = best else {
        return Err(Error::DegenerateSamples);
    };
    Ok(AlphaEstimate {
        sigma: sigma.clone(),
        alpha_hat,
        samples,
        seed,
        skipped,
        argmin: Some((f, g)),
    })
}

fn refine(members: &Members, mut r: f64, mut f: Vector, mut g: Vector, rng: &mut ChaCha8Rng) -> (f64, Vector, Vector) {
    let mut step = 0.1;
    for _ in 0..REFINE_STEPS {
        let scale = f.norm().max(g.norm()) * step;
        let nudge = |v: &Vector, rng: &mut ChaCha8Rng| {
            let d = v.coords().map(|_| match v.field() {
                FieldTag::Real => C64::new(rng.sample(StandardNormal), 0.0),
                FieldTag::Complex => {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                }
            });
            Vector::from_coords(v.coords() + d * C64::new(scale, 0.0), v.field()).expect("field preserved")
        };
        let (tf, tg) = (nudge(&f, rng), nudge(&g, rng));
        match ratio(members, &tf, &tg) {
            Some(t) if t < r => {
                (r, f, g) = (t, tf, tg);
                step *= 1.5;
            }
            _ => step *= 0.7,
        }
    }
    (r, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::hilbert::{outer, trace_norm};

    fn bracket_trace_norm_direct(f: &Vector, g: &Vector) -> Result<f64> {
        Ok(trace_norm(&sym_bracket(f, g)?))
    }

    #[test]
    fn closed_form_trace_norm_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for field in [FieldTag::Real, FieldTag::Complex] {
            for _ in 0..200 {
                let f = random_vector(&mut rng, 3, field);
                let g = random_vector(&mut rng, 3, field);
                let direct = bracket_trace_norm_direct(&f, &g).unwrap();
                assert!((bracket_trace_norm(&f, &g) - direct).abs() < 1e-12 * (1.0 + direct));
            }
        }
    }

    #[test]
    fn identity_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for pair in [catalog::example_3_2(), catalog::example_3_3(), catalog::example_r3()] {
            let m = pair.len();
            for k in 0..1000u64 {
                let sigma = SubsetSelector::from_rank(m, k % (1 << m));
                let f = random_vector(&mut rng, pair.dim(), pair.field());
                let g = random_vector(&mut rng, pair.dim(), pair.field());
                let (lhs, rhs) = bracket_identity_check(&pair, &sigma, &f, &g).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300));
            }
        }
    }

    #[test]
    fn identity_with_equal_arguments_is_gamma_to_the_fourth() {
        let pair = catalog::example_3_2();
        let sigma = SubsetSelector::from_rank(3, 5);
        let f = Vector::real(&[0.4, -1.2]);
        let (lhs, rhs) = bracket_identity_check(&pair, &sigma, &f, &f).unwrap();
        let g = crate::phase::gamma(&pair, &sigma, &f).unwrap();
        let expected: f64 = g.as_slice().iter().map(|x| x.powi(4)).sum();
        assert!((lhs - expected).abs() < 1e-12 && (rhs - expected).abs() < 1e-12);
        // [f, f] is the outer product
        assert!(sym_bracket(&f, &f).unwrap().sub(&outer(&f)).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let pair = catalog::example_3_2();
        let sigma = SubsetSelector::full(3);
        let members = Members::new(&pair, &sigma);
        let f = Vector::real(&[0.3, 0.9]);
        let g = Vector::real(&[-1.1, 0.2]);
        let a = ratio(&members, &f, &g).unwrap();
        let b = ratio(&members, &f.scaled(2.0), &g.scaled(2.0)).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
        assert!((members.numerator(&f.scaled(2.0), &g.scaled(2.0)) / members.numerator(&f, &g) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn retrievable_pair_has_positive_alpha() {
        let pair = catalog::example_3_2();
        for r in 0..8 {
            let est = alpha_estimate(&pair, &SubsetSelector::from_rank(3, r), 2000, 1).unwrap();
            assert!(est.alpha_hat > 1e-4, "{}", est.alpha_hat);
        }
    }

    #[test]
    fn witness_bracket_drives_alpha_to_zero() {
        let pair = catalog::example_3_3();
        let sigma = SubsetSelector::from_indices(3, &[1, 2]).unwrap();
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        // [x + y, x - y] = x (x) x - y (x) y
        let x = Vector::complex(&[one, i]);
        let y = Vector::complex(&[i, one]);
        let extra = [(x.add(&y).unwrap(), x.sub(&y).unwrap())];
        let est = alpha_estimate_with(&pair, &sigma, 100, 2, &extra).unwrap();
        assert!(est.alpha_hat < 1e-12);
    }

    #[test]
    fn more_samples_never_raise_the_estimate() {
        let pair = catalog::example_r3();
        let sigma = SubsetSelector::from_rank(5, 9);
        let a = alpha_estimate(&pair, &sigma, 50, 4).unwrap().alpha_hat;
        let b = alpha_estimate(&pair, &sigma, 200, 4).unwrap().alpha_hat;
        assert!(b <= a);
    }

    #[test]
    fn zero_samples_is_rejected() {
        let pair = catalog::example_3_2();
        assert!(alpha_estimate(&pair, &SubsetSelector::full(3), 0, 0).is_err());
    }

    #[test]
    fn zero_vectors_have_no_ratio() {
        let pair = catalog::example_3_2();
        let z = Vector::zeros(2, FieldTag::Real);
        let members = Members::new(&pair, &SubsetSelector::full(3));
        assert!(ratio(&members, &z, &z).is_none());
    }
}
