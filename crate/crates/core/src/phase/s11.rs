use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::lift::KernelReport;
use super::sigma_stream;
use crate::hilbert::{FieldTag, SymmetricOperator, Vector, C64};

/// Knobs for the kernel search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub starts: usize,
    pub max_iters: usize,
    /// Objective at or below this certifies a rank-one difference.
    pub certify_tol: f64,
    /// Objective at or above this refutes one.
    pub refute_tol: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            starts: 64,
            max_iters: 400,
            certify_tol: 1e-9,
            refute_tol: 1e-6,
            seed: 0,
        }
    }
}

/// `T = f (x) f - g (x) g` found in the kernel, with `||T||_F = 1`.
#[derive(Clone, Debug)]
pub struct S11Witness {
    pub operator: SymmetricOperator,
    pub f: Vector,
    pub g: Vector,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub enum S11Outcome {
    Trivial { objective: f64 },
    Nontrivial(S11Witness),
    Inconclusive { objective: f64 },
}

/// Searches the unit sphere of the kernel for an element with at most one
/// positive and one negative eigenvalue. The objective is the size of the
/// surplus eigenvalues, `(max(l_{n-2}, 0) + max(-l_1, 0)) / ||T||`, with
/// `l` ascending; it vanishes exactly on rank-one differences.
///
/// Each start is a short gradient descent followed by alternating
/// projections. Start points come from the substream of `budget.seed` keyed by the
/// kernel's subset, so results do not depend on evaluation order.
pub fn s11_intersection(k: &KernelReport, budget: &SearchBudget) -> S11Outcome {
    if k.kernel_dim == 0 {
        return S11Outcome::Trivial { objective: f64::INFINITY };
    }
    let search = Search::new(&k.kernel_basis);
    let best = if k.kernel_dim == 1 {
        let c = DVector::from_element(1, 1.0);
        let eval = search.evaluate(&c);
        (c, eval)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(sigma_stream(&k.sigma));
        let mut best: Option<(DVector<f64>, Eval)> = None;
        for _ in 0..budget.starts.max(1) {
            let start = random_unit(&mut rng, k.kernel_dim);
            let (mut c, mut eval) = search.descend(start, budget.max_iters, budget.certify_tol);
            if eval.ratio > budget.certify_tol * 1e-3 {
                (c, eval) = search.polish(c, budget.certify_tol * 1e-3, POLISH_ITERS);
            }
            if best.as_ref().is_none_or(|(_, b)| eval.ratio < b.ratio) {
                best = Some((c, eval));
            }
            if best.as_ref().is_some_and(|(_, b)| b.ratio <= budget.certify_tol) {
                break;
            }
        }
        best.expect("at least one start")
    };

    let (c, eval) = best;
    if eval.ratio <= budget.certify_tol {
        S11Outcome::Nontrivial(search.witness(&c, eval.ratio))
    } else if eval.ratio >= budget.refute_tol {
        S11Outcome::Trivial { objective: eval.ratio }
    } else {
        S11Outcome::Inconclusive { objective: eval.ratio }
    }
}

const POLISH_ITERS: usize = 500;

fn random_unit(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Eval {
    /// Squared surplus, the descent objective.
    phi: f64,
    /// Surplus relative to the spectral norm, the reported objective.
    ratio: f64,
}

struct Search<'a> {
    basis: &'a [SymmetricOperator],
    n: usize,
    field: FieldTag,
}

impl<'a> Search<'a> {
    fn new(basis: &'a [SymmetricOperator]) -> Self {
        Search {
            n: basis[0].dim(),
            field: basis[0].field(),
            basis,
        }
    }

    fn compose(&self, c: &DVector<f64>) -> SymmetricOperator {
        let mut m = DMatrix::from_element(self.n, self.n, C64::new(0.0, 0.0));
        for (b, &x) in self.basis.iter().zip(c.iter()) {
            m += b.matrix() * C64::new(x, 0.0);
        }
        SymmetricOperator::symmetrised(m, self.field)
    }

    fn surplus(&self, values: &[f64]) -> (f64, f64) {
        let n = values.len();
        if n < 2 {
            return (0.0, 0.0);
        }
        ((values[n - 2]).max(0.0), (-values[1]).max(0.0))
    }

    fn evaluate(&self, c: &DVector<f64>) -> Eval {
        let values = self.compose(c).eigenvalues();
        self.eval_from(&values)
    }

    fn eval_from(&self, values: &[f64]) -> Eval {
        let (p, q) = self.surplus(values);
        let scale = values.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
        Eval {
            phi: p * p + q * q,
            ratio: if scale > 0.0 { (p + q) / scale } else { f64::INFINITY },
        }
    }

    /// Objective and its Euclidean gradient in kernel coordinates.
    fn gradient(&self, c: &DVector<f64>) -> (Eval, DVector<f64>) {
        let spectrum = self.compose(c).spectrum();
        let values = &spectrum.values;
        let eval = self.eval_from(values);
        let mut grad = DVector::zeros(c.len());
        let n = values.len();
        if n < 2 {
            return (eval, grad);
        }
        let (p, q) = self.surplus(values);
        let up = spectrum.vectors.column(n - 2);
        let uq = spectrum.vectors.column(1);
        for (j, b) in self.basis.iter().enumerate() {
            // d l / d c_j = <u, K_j u>
            let dp = if p > 0.0 { up.dotc(&(b.matrix() * up)).re } else { 0.0 };
            let dq = if q > 0.0 { -uq.dotc(&(b.matrix() * uq)).re } else { 0.0 };
            grad[j] = 2.0 * (p * dp + q * dq);
        }
        (eval, grad)
    }

    /// Riemannian gradient descent on the unit sphere with backtracking.
    fn descend(&self, mut c: DVector<f64>, iters: usize, tol: f64) -> (DVector<f64>, Eval) {
        let (mut eval, mut grad) = self.gradient(&c);
        let mut step = 1.0;
        for _ in 0..iters {
            if eval.ratio <= tol {
                break;
            }
            let tangent = &grad - &c * grad.dot(&c);
            let gnorm2 = tangent.norm_squared();
            if gnorm2 < 1e-32 {
                break;
            }
            let mut accepted = false;
            while step > 1e-12 {
                let trial = &c - &tangent * step;
                let trial = &trial / trial.norm();
                let e = self.evaluate(&trial);
                if e.phi <= eval.phi - 1e-4 * step * gnorm2 {
                    c = trial;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            let (e, g) = self.gradient(&c);
            eval = e;
            grad = g;
        }
        (c, eval)
    }

    /// Alternating projection between the kernel sphere and rank-one
    /// differences, keeping the best iterate.
    fn polish(&self, mut c: DVector<f64>, target: f64, iters: usize) -> (DVector<f64>, Eval) {
        let mut best = (c.clone(), self.evaluate(&c));
        for _ in 0..iters {
            if best.1.ratio <= target {
                break;
            }
            let spectrum = self.compose(&c).spectrum();
            let n = spectrum.values.len();
            let hi = spectrum.values[n - 1].max(0.0);
            let lo = spectrum.values[0].min(0.0);
            let u = spectrum.vectors.column(n - 1);
            let v = spectrum.vectors.column(0);
            let target_op = u * u.adjoint() * C64::new(hi, 0.0) + v * v.adjoint() * C64::new(lo, 0.0);
            let next = DVector::from_iterator(
                self.basis.len(),
                self.basis.iter().map(|b| b.matrix().dotc(&target_op).re),
            );
            let norm = next.norm();
            if norm == 0.0 {
                break;
            }
            c = next / norm;
            let e = self.evaluate(&c);
            if e.ratio < best.1.ratio {
                best = (c.clone(), e);
            }
        }
        best
    }

    fn witness(&self, c: &DVector<f64>, objective: f64) -> S11Witness {
        let t = self.compose(c);
        let spectrum = t.spectrum();
        let n = spectrum.values.len();
        let factor = |value: f64, k: usize| {
            let col = spectrum.vectors.column(k).into_owned() * C64::new(value.abs().sqrt(), 0.0);
            real_if_needed(col, self.field)
        };
        let hi = spectrum.values[n - 1];
        let lo = spectrum.values[0];
        let f = if hi > 0.0 { factor(hi, n - 1) } else { Vector::zeros(self.n, self.field) };
        let g = if lo < 0.0 && n > 1 { factor(lo, 0) } else { Vector::zeros(self.n, self.field) };
        S11Witness {
            operator: t,
            f,
            g,
            objective,
        }
    }
}

fn real_if_needed(mut col: DVector<C64>, field: FieldTag) -> Vector {
    if field == FieldTag::Real {
        col.iter_mut().for_each(|z| z.im = 0.0);
    }
    Vector::from_coords_unchecked(col, field)
}
