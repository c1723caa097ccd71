//! Validated finite probability objects.
//!
//! Every constructor checks nonnegativity and normalization against
//! [`EPS_NORM`] and then divides by the sum, so downstream identities see
//! weights that sum to one up to a single rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Gamma};
use serde::Serialize;

use crate::entropy::shannon_weights;
use crate::error::{Error, Result};

/// Normalization acceptance tolerance.
pub const EPS_NORM: f64 = 1e-9;

/// Below this distance from one an order is treated as the Shannon limit.
pub const EPS_Q_ONE: f64 = 1e-8;

/// A finite discrete probability vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        let deficit = 1.0 - sum;
        if deficit.abs() > EPS_NORM {
            return Err(Error::NotNormalized { sum, deficit });
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { weights })
    }

    /// Builds a distribution from nonnegative weights of any positive mass.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::NotNormalized {
                sum,
                deficit: 1.0 - sum,
            });
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Point mass on `index` among `n` outcomes.
    pub fn vertex(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidParameter(format!(
                "vertex index {index} out of range for n = {n}"
            )));
        }
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The same distribution with `extra` zero-probability outcomes appended.
    pub fn expanded(&self, extra: usize) -> Self {
        let mut weights = self.weights.clone();
        weights.extend(std::iter::repeat_n(0.0, extra));
        Self { weights }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.weights
    }

    /// Wraps weights already known to be a normalized probability vector.
    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= EPS_NORM);
        Self { weights }
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            for l in 0..cols {
                data.push(f(k, l));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 || rows[0].is_empty() {
            return Err(Error::Empty);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != cols {
                return Err(Error::Ragged {
                    row,
                    expected: cols,
                    found: values.len(),
                });
            }
            data.extend_from_slice(values);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }
}

/// Joint distribution `r[k][l] = p(B = B_k, A = A_l)`; rows index B, columns index A.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    cells: Matrix,
}

impl JointDistribution {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn from_matrix(cells: Matrix) -> Result<Self> {
        // Reuse the vector validation on the flattened cells.
        let flat = Distribution::new(cells.data)?;
        Ok(Self {
            cells: Matrix {
                rows: cells.rows,
                cols: cells.cols,
                data: flat.into_inner(),
            },
        })
    }

    pub fn n_b(&self) -> usize {
        self.cells.rows
    }

    pub fn n_a(&self) -> usize {
        self.cells.cols
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.cells.get(k, l)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.cells.to_rows()
    }

    /// Row-major flattening into a distribution over `n_b * n_a` outcomes.
    pub fn flatten(&self) -> Distribution {
        Distribution {
            weights: self.cells.data.clone(),
        }
    }

    pub fn marginal_a(&self) -> Distribution {
        Distribution {
            weights: self.cells.column_sums(),
        }
    }

    pub fn marginal_b(&self) -> Distribution {
        Distribution {
            weights: self.cells.row_sums(),
        }
    }

    /// Indices of A outcomes with zero marginal probability.
    pub fn zero_columns(&self) -> Vec<usize> {
        self.cells
            .column_sums()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p <= 0.0)
            .map(|(l, _)| l)
            .collect()
    }

    /// Fails with the first zero A-marginal column, if any.
    pub fn require_positive_marginals(&self) -> Result<()> {
        match self.zero_columns().first() {
            Some(&l) => Err(Error::ZeroMarginalColumn(l)),
            None => Ok(()),
        }
    }

    /// Removes zero-probability A columns, returning the reduced joint and the
    /// removed indices. The cells are unchanged so no renormalization occurs.
    pub fn without_zero_columns(&self) -> (Self, Vec<usize>) {
        let dropped = self.zero_columns();
        if dropped.is_empty() {
            return (self.clone(), dropped);
        }
        let kept: Vec<usize> = (0..self.n_a()).filter(|l| !dropped.contains(l)).collect();
        let cells = Matrix::from_fn(self.n_b(), kept.len(), |k, j| self.get(k, kept[j]));
        (Self { cells }, dropped)
    }
}

impl Serialize for JointDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

/// How conditioning treats A outcomes of probability zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroColumns {
    #[default]
    Strict,
    /// Drop the column and record it in [`ConditionalDistribution::dropped`].
    Lenient,
}

/// Column `l` holds `r[k|l]` over `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    columns: Vec<Distribution>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
}

impl ConditionalDistribution {
    pub(crate) fn from_columns(columns: Vec<Distribution>) -> Self {
        let kept = (0..columns.len()).collect();
        Self {
            columns,
            kept,
            dropped: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[Distribution] {
        &self.columns
    }

    /// Original A indices of the retained columns.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// A indices removed under lenient conditioning.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// `r[k][l] = p[l] * r[k|l]` over the retained columns.
    pub fn reconstruct(&self, marginal: &Distribution) -> Matrix {
        let n_b = self.columns.first().map_or(0, Distribution::len);
        Matrix::from_fn(n_b, self.columns.len(), |k, j| {
            marginal[self.kept[j]] * self.columns[j][k]
        })
    }
}

/// Marginal of A: `p[l] = sum_k r[k][l]`.
pub fn marginal_a(r: &JointDistribution) -> Distribution {
    r.marginal_a()
}

/// Marginal of B: `q[k] = sum_l r[k][l]`.
pub fn marginal_b(r: &JointDistribution) -> Distribution {
    r.marginal_b()
}

/// Conditional distribution of B given each outcome of A.
pub fn condition_on_a(r: &JointDistribution, mode: ZeroColumns) -> Result<ConditionalDistribution> {
    let p = r.marginal_a();
    let mut columns = Vec::with_capacity(r.n_a());
    let mut kept = Vec::with_capacity(r.n_a());
    let mut dropped = Vec::new();
    for l in 0..r.n_a() {
        let pl = p[l];
        if pl <= 0.0 {
            match mode {
                ZeroColumns::Strict => return Err(Error::ZeroMarginalColumn(l)),
                ZeroColumns::Lenient => {
                    dropped.push(l);
                    continue;
                }
            }
        }
        let col: Vec<f64> = (0..r.n_b()).map(|k| r.get(k, l) / pl).collect();
        columns.push(Distribution::from_unnormalized(col)?);
        kept.push(l);
    }
    if columns.is_empty() {
        return Err(Error::ZeroMarginalColumn(0));
    }
    Ok(ConditionalDistribution {
        columns,
        kept,
        dropped,
    })
}

/// Joint of independent A and B: `r[k][l] = q_b[k] * p_a[l]`.
pub fn product_joint(p_a: &Distribution, q_b: &Distribution) -> JointDistribution {
    let cells = Matrix::from_fn(q_b.len(), p_a.len(), |k, l| q_b[k] * p_a[l]);
    let sum = cells.sum();
    JointDistribution {
        cells: Matrix {
            data: cells.data.iter().map(|v| v / sum).collect(),
            ..cells
        },
    }
}

/// `S(A) + S(B) - S(A, B)` in nats, clamped at zero.
pub fn mutual_information(r: &JointDistribution) -> f64 {
    let s_a = shannon_weights(r.marginal_a().weights());
    let s_b = shannon_weights(r.marginal_b().weights());
    let s_ab = shannon_weights(r.cells.as_slice());
    (s_a + s_b - s_ab).max(0.0)
}

/// Draws from the symmetric Dirichlet law of the given concentration.
pub fn sample_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    concentration: f64,
) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    if n == 1 {
        return Ok(Distribution { weights: vec![1.0] });
    }
    let gamma = Gamma::new(concentration, 1.0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let sum: f64 = draws.iter().sum();
        // Very small concentrations can underflow every coordinate.
        if sum > 0.0 && sum.is_finite() {
            return Ok(Distribution {
                weights: draws.into_iter().map(|g| g / sum).collect(),
            });
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for trial `stream` of an ensemble rooted at `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_distribution(n: usize, seed: u64, concentration: f64) -> Result<Distribution> {
    sample_distribution(&mut seeded_rng(seed), n, concentration)
}

pub fn sample_joint<R: Rng + ?Sized>(
    rng: &mut R,
    n_b: usize,
    n_a: usize,
    concentration: f64,
) -> Result<JointDistribution> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::Empty);
    }
    let flat = sample_distribution(rng, n_b * n_a, concentration)?;
    Ok(JointDistribution {
        cells: Matrix {
            rows: n_b,
            cols: n_a,
            data: flat.into_inner(),
        },
    })
}

pub fn random_joint(n_b: usize, n_a: usize, seed: u64, concentration: f64) -> Result<JointDistribution> {
    sample_joint(&mut seeded_rng(seed), n_b, n_a, concentration)
}

/// Positive order parameter shared by the deformed calculus and entropy orders.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct QOrder(f64);

impl QOrder {
    pub const ONE: QOrder = QOrder(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q.is_finite() {
            Ok(Self(q))
        } else {
            Err(Error::InvalidOrder(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - q`, the deformation strength.
    pub fn deformation(self) -> f64 {
        1.0 - self.0
    }

    pub fn is_unit(self) -> bool {
        (self.0 - 1.0).abs() < EPS_Q_ONE
    }

    pub fn reciprocal(self) -> Self {
        Self(1.0 / self.0)
    }
}

impl TryFrom<f64> for QOrder {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

impl std::fmt::Display for QOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}
