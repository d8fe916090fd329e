//! Random erasures of woven measurements.
//!
//! Each index survives independently with probability `p`. The averaging
//! estimator rescales the surviving weighted projections by a constant; the
//! corrected estimator applies `(1/p) S_sigma^{-1}` instead and is exact when
//! nothing is erased, for any fusion frame.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{bounds_of, frame_operator, FusionFrame, PINV_CUTOFF};
use crate::hilbert::{check_dim, random_vector, FieldTag, Vector, C64, DEFAULT_TOL};
use crate::weaving::{SubsetSelector, WeavingPair, WovenOperators};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureModel {
    keep_prob: f64,
    seed: u64,
}

impl ErasureModel {
    pub fn new(keep_prob: f64, seed: u64) -> Result<Self> {
        if !(keep_prob > 0.0 && keep_prob <= 1.0) {
            return Err(Error::InvalidArgument(format!("keep probability {keep_prob} outside (0, 1]")));
        }
        Ok(ErasureModel { keep_prob, seed })
    }

    pub fn keep_prob(&self) -> f64 {
        self.keep_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Keep indicators for one trial, drawn from the trial's own substream.
    pub fn draw(&self, trial: u64, m: usize) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        (0..m).map(|_| rng.random_bool(self.keep_prob)).collect()
    }

    /// Rademacher signs `2 delta - 1`.
    pub fn signs(kept: &[bool]) -> Vec<i8> {
        kept.iter().map(|&k| if k { 1 } else { -1 }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    /// `scale * sum_kept w_i^2 P_i f`.
    Averaging { scale: f64 },
    /// `(1/p) S_sigma^{-1} sum_kept w_i^2 P_i f`.
    Corrected,
}

impl Estimator {
    /// The `2/m` normalisation, unbiased at `p = 1/2` on families with
    /// `sum w_i^2 P_i = m I`.
    pub fn halving(m: usize) -> Self {
        Estimator::Averaging { scale: 2.0 / m as f64 }
    }
}

fn check_frame(frame: &FusionFrame) -> Result<DMatrix<C64>> {
    let s = frame_operator(frame);
    let lower = bounds_of(&s).lower;
    if lower <= DEFAULT_TOL {
        return Err(Error::NotAFrame { lower_bound: lower });
    }
    Ok(s.pseudo_inverse(PINV_CUTOFF))
}

/// `sum_i delta_i w_i^2 (P_i f) (S^{-1} P_i f)^H`, with `S` the frame
/// operator of the family member `i` is drawn from.
pub fn error_operator(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    f: &Vector,
    deltas: &[bool],
) -> Result<DMatrix<C64>> {
    check_dim(pair.len(), sigma.len())?;
    check_dim(pair.len(), deltas.len())?;
    pair.first().check_vector(f)?;
    let inv_first = check_frame(pair.first())?;
    let inv_second = check_frame(pair.second())?;
    let n = pair.dim();
    let mut e = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (i, &keep) in deltas.iter().enumerate() {
        if !keep {
            continue;
        }
        let member = pair.chosen(sigma, i);
        let inv = if sigma.contains(i) { &inv_first } else { &inv_second };
        let pf = member.subspace().project(f.coords());
        let w2 = member.weight() * member.weight();
        e += (&pf * (inv * &pf).adjoint()) * C64::new(w2, 0.0);
    }
    Ok(e)
}

/// Everything a trial needs, computed once per experiment.
struct Prepared {
    n: usize,
    field: FieldTag,
    /// `w_i^2 P_i f`.
    pieces: Vec<nalgebra::DVector<C64>>,
    /// `w_i^2 P_i`.
    operators: Vec<DMatrix<C64>>,
    /// Left factor applied to the kept sum.
    lead: DMatrix<C64>,
    f: Vector,
}

impl Prepared {
    fn new(pair: &WeavingPair, sigma: &SubsetSelector, f: &Vector, estimator: Estimator, keep_prob: f64) -> Result<Self> {
        check_dim(pair.len(), sigma.len())?;
        pair.first().check_vector(f)?;
        let woven = WovenOperators::new(pair);
        let s = woven.frame_operator(sigma);
        let lower = bounds_of(&s).lower;
        if lower <= DEFAULT_TOL {
            return Err(Error::NotAFrame { lower_bound: lower });
        }
        let n = pair.dim();
        let lead = match estimator {
            Estimator::Averaging { scale } => {
                if !scale.is_finite() {
                    return Err(Error::InvalidArgument(format!("estimator scale {scale}")));
                }
                DMatrix::from_diagonal_element(n, n, C64::new(scale, 0.0))
            }
            Estimator::Corrected => s.pseudo_inverse(PINV_CUTOFF) * C64::new(1.0 / keep_prob, 0.0),
        };
        let operators: Vec<_> = (0..pair.len())
            .map(|i| pair.chosen(sigma, i).weighted_projector())
            .collect();
        let pieces = operators.iter().map(|p| p * f.coords()).collect();
        Ok(Prepared {
            n,
            field: pair.field(),
            pieces,
            operators,
            lead,
            f: f.clone(),
        })
    }

    fn estimate(&self, kept: &[bool]) -> Vector {
        let mut sum = nalgebra::DVector::from_element(self.n, C64::new(0.0, 0.0));
        for (piece, _) in self.pieces.iter().zip(kept).filter(|(_, &k)| k) {
            sum += piece;
        }
        let mut coords = &self.lead * sum;
        if self.field == FieldTag::Real {
            coords.iter_mut().for_each(|z| z.im = 0.0);
        }
        Vector::from_coords(coords, self.field).expect("imaginary parts cleared")
    }

    /// `|| lead * sum_kept w_i^2 P_i - I ||_2`.
    fn operator_error(&self, kept: &[bool]) -> f64 {
        let mut sum = DMatrix::from_element(self.n, self.n, C64::new(0.0, 0.0));
        for (op, _) in self.operators.iter().zip(kept).filter(|(_, &k)| k) {
            sum += op;
        }
        let r = &self.lead * sum - DMatrix::identity(self.n, self.n);
        r.singular_values().max()
    }
}

/// One reconstruction from the kept indices.
pub fn reconstruct_with_erasure(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    f: &Vector,
    kept: &[bool],
    estimator: Estimator,
    keep_prob: f64,
) -> Result<Vector> {
    check_dim(pair.len(), kept.len())?;
    ErasureModel::new(keep_prob, 0)?;
    Ok(Prepared::new(pair, sigma, f, estimator, keep_prob)?.estimate(kept))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureReport {
    pub trials: usize,
    pub errors: Vec<f64>,
    pub mean_error: f64,
    pub std_error: f64,
    /// Mean of `|| lead * sum_kept w_i^2 P_i - I ||_2`.
    pub mean_operator_error: f64,
    pub epsilon: f64,
    pub ratio: f64,
    pub f_norm: f64,
    pub keep_prob: f64,
    pub seed: u64,
    pub estimator: Estimator,
}

/// `sqrt((n / m) ln n)`.
pub fn epsilon(n: usize, m: usize) -> f64 {
    ((n as f64 / m as f64) * (n as f64).ln()).max(0.0).sqrt()
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0_f64, 0.0_f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn simulate(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    f: &Vector,
    model: &ErasureModel,
    estimator: Estimator,
    trials: usize,
) -> Result<ErasureReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let prep = Prepared::new(pair, sigma, f, estimator, model.keep_prob)?;
    let m = pair.len();
    let per_trial: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let kept = model.draw(t, m);
            let err = prep.estimate(&kept).sub(&prep.f).expect("same space").norm();
            (err, prep.operator_error(&kept))
        })
        .collect();

    let count = trials as f64;
    let mean_error = compensated_sum(per_trial.iter().map(|p| p.0)) / count;
    let mean_operator_error = compensated_sum(per_trial.iter().map(|p| p.1)) / count;
    let var = if trials > 1 {
        compensated_sum(per_trial.iter().map(|p| (p.0 - mean_error).powi(2))) / (count - 1.0)
    } else {
        0.0
    };
    let eps = epsilon(pair.dim(), m);
    let f_norm = f.norm();
    Ok(ErasureReport {
        trials,
        errors: per_trial.iter().map(|p| p.0).collect(),
        mean_error,
        std_error: var.sqrt(),
        mean_operator_error,
        epsilon: eps,
        ratio: mean_error / (eps * f_norm),
        f_norm,
        keep_prob: model.keep_prob,
        seed: model.seed,
        estimator,
    })
}

/// Real pair whose two families coincide: the planes
/// `span{e_k, e_{k+1 mod n}}` repeated `m / n` times, each with weight
/// `sqrt(n / 2)`, so every woven frame operator is `m I`.
pub fn tight_family(n: usize, m: usize) -> Result<WeavingPair> {
    if n < 2 || m == 0 || !m.is_multiple_of(n) {
        return Err(Error::ConstructionFailure(format!(
            "need n >= 2 and m a positive multiple of n, got n = {n}, m = {m}"
        )));
    }
    let w = (n as f64 / 2.0).sqrt();
    let entries: Vec<(f64, Vec<Vector>)> = (0..m)
        .map(|i| {
            let k = i % n;
            (
                w,
                vec![
                    Vector::basis(n, k, FieldTag::Real),
                    Vector::basis(n, (k + 1) % n, FieldTag::Real),
                ],
            )
        })
        .collect();
    let family = FusionFrame::from_spans(&entries)?;
    WeavingPair::new(family.clone(), family)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub mean_error: f64,
    pub ratio: f64,
    pub mean_operator_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Largest ratio in the table.
    #[serde(rename = "fitted_M")]
    pub fitted_m: f64,
    pub seed: u64,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,trials,epsilon,mean_error,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.m, r.trials, r.epsilon, r.mean_error, r.ratio));
        }
        out
    }

    /// Least-squares slope of `ln mean_error` against `ln m` for one `n`.
    pub fn slope(&self, n: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.n == n && r.mean_error > 0.0)
            .map(|r| ((r.m as f64).ln(), r.mean_error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Every `(n, factor * n)` cell.
pub fn sweep_cells(dims: &[usize], m_factors: &[usize]) -> Vec<(usize, usize)> {
    dims.iter()
        .flat_map(|&n| m_factors.iter().map(move |&k| (n, k * n)))
        .collect()
}

/// Runs the halving estimator at `p = 1/2` on [`tight_family`] for each
/// cell, with a fixed random unit vector per `n`.
pub fn scaling_experiment(cells: &[(usize, usize)], trials: usize, seed: u64) -> Result<SweepTable> {
    let mut rows = Vec::with_capacity(cells.len());
    for (idx, &(n, m)) in cells.iter().enumerate() {
        let pair = tight_family(n, m)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        let f = random_vector(&mut rng, n, FieldTag::Real);
        let f = f.scaled(1.0 / f.norm());
        let model = ErasureModel::new(0.5, seed.wrapping_add(idx as u64))?;
        let report = simulate(&pair, &SubsetSelector::full(m), &f, &model, Estimator::halving(m), trials)?;
        rows.push(SweepRow {
            n,
            m,
            trials,
            epsilon: report.epsilon,
            mean_error: report.mean_error,
            ratio: report.ratio,
            mean_operator_error: report.mean_operator_error,
        });
    }
    let fitted_m = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(SweepTable { rows, fitted_m, seed })
}
