//! Real symmetric positive-semidefinite matrices and their spectral structure.
//!
//! Every other module goes through [`SpectralDecomposition`]: negations
//! rewrite eigenvalues, compositions borrow an operand's eigenbasis, and the
//! entailment measures read eigenvalues of differences. Eigenpairs are put in
//! a deterministic order (descending eigenvalue, sign-fixed eigenvectors,
//! lexicographic tie-break) so that basis-dependent operations give the same
//! answer on every run.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximum asymmetry `|m_ij - m_ji|` accepted, relative to `max(1, max |m_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues in `(-PSD_TOL·max(1, λ_max), 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-9;
/// Support/kernel split: eigenvalues `≤ RANK_TOL·λ_max` count as kernel.
pub const RANK_TOL: f64 = 1e-8;
/// Slack allowed on `λ_max ≤ 1` for normalized matrices.
pub const NORMALIZED_TOL: f64 = 1e-9;
/// Eigenvalues closer than this (relative to `max(1, |λ_max|)`) share an eigenspace.
pub const EIGENVALUE_TIE_TOL: f64 = 1e-8;

/// Frobenius norm below which a matrix is treated as zero.
pub(crate) const ZERO_TOL: f64 = 1e-12;

/// A density matrix: real, symmetric, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct Dmat {
    matrix: DMatrix<f64>,
    normalized: bool,
}

impl Dmat {
    /// Validates symmetry and positive semidefiniteness.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let eig = symmetric_eigen(&matrix)?;
        check_psd(&eig)?;
        let normalized = eig.max_eigenvalue() <= 1.0 + NORMALIZED_TOL;
        Ok(Dmat { matrix: symmetrize(matrix), normalized })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self> {
        if let Some(&min) = diagonal.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < 0.0 {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
        }
        let normalized = diagonal.iter().all(|&d| d <= 1.0 + NORMALIZED_TOL);
        let matrix = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
        Ok(Dmat { matrix, normalized })
    }

    pub fn identity(dim: usize) -> Self {
        Dmat { matrix: DMatrix::identity(dim, dim), normalized: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Dmat { matrix: DMatrix::zeros(dim, dim), normalized: true }
    }

    /// The pure state `|v⟩⟨v| / ‖v‖²`.
    pub fn pure(v: &[f64]) -> Result<Self> {
        let v = DVector::from_column_slice(v);
        let norm = v.norm();
        if norm < ZERO_TOL {
            return Err(Error::ZeroMatrix);
        }
        let v = v / norm;
        Ok(Dmat { matrix: &v * v.transpose(), normalized: true })
    }

    /// Wraps a matrix that is PSD by construction, symmetrizing away roundoff.
    pub(crate) fn from_psd_unchecked(matrix: DMatrix<f64>) -> Self {
        Dmat { matrix: symmetrize(matrix), normalized: false }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Whether this matrix is known to have `λ_max ≤ 1`.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn is_zero(&self) -> bool {
        self.frobenius_norm() < ZERO_TOL
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        spectral_decompose(self)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.decompose()?.max_eigenvalue())
    }

    /// Multiplies by a non-negative scalar.
    ///
    /// # Panics
    /// If `factor` is negative or not finite.
    pub fn scaled(&self, factor: f64) -> Dmat {
        assert!(factor >= 0.0 && factor.is_finite(), "scale factor must be finite and >= 0");
        Dmat { matrix: &self.matrix * factor, normalized: self.normalized && factor <= 1.0 }
    }

    /// Non-negative combination `Σ w_i M_i`. Returns `None` for an empty input.
    pub fn mixture<'a, I>(terms: I) -> Result<Option<Dmat>>
    where
        I: IntoIterator<Item = (f64, &'a Dmat)>,
    {
        let mut acc: Option<DMatrix<f64>> = None;
        for (w, m) in terms {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("mixture weight {w}")));
            }
            acc = Some(match acc {
                None => m.matrix() * w,
                Some(a) => {
                    check_dims(a.nrows(), m.dim())?;
                    a + m.matrix() * w
                }
            });
        }
        Ok(acc.map(Dmat::from_psd_unchecked))
    }

    /// Conjugation `Q M Qᵀ`, which preserves positivity.
    pub fn conjugated(&self, q: &DMatrix<f64>) -> Result<Dmat> {
        check_dims(self.dim(), q.nrows())?;
        check_dims(q.nrows(), q.ncols())?;
        Ok(Dmat::from_psd_unchecked(q * &self.matrix * q.transpose()))
    }

    pub(crate) fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }
}

/// Eigenvalues (descending) with orthonormal eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

/// A group of (numerically) equal eigenvalues and the projector onto their span.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub eigenvalue: f64,
    pub projector: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Rank-one projectors `|i⟩⟨i|`, in eigenvalue order.
    pub fn projectors(&self) -> Vec<DMatrix<f64>> {
        self.eigenvectors
            .column_iter()
            .map(|v| v * v.transpose())
            .collect()
    }

    /// Projectors grouped per distinct eigenvalue. Unlike individual
    /// eigenvectors these do not depend on how a degenerate eigenspace was
    /// split.
    pub fn eigenspaces(&self) -> Vec<Eigenspace> {
        let scale = self.eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
        let mut spaces: Vec<(Vec<usize>, f64)> = Vec::new();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            match spaces.last_mut() {
                Some((idx, _)) if (self.eigenvalues[idx[0]] - l).abs() <= EIGENVALUE_TIE_TOL * scale => {
                    idx.push(i)
                }
                _ => spaces.push((vec![i], l)),
            }
        }
        let n = self.dim();
        spaces
            .into_iter()
            .map(|(idx, _)| {
                let mut projector = DMatrix::zeros(n, n);
                let mut sum = 0.0;
                for &i in &idx {
                    let v = self.eigenvectors.column(i);
                    projector += v * v.transpose();
                    sum += self.eigenvalues[i];
                }
                Eigenspace { eigenvalue: sum / idx.len() as f64, projector }
            })
            .collect()
    }

    /// `V f(Λ) Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| f(l)));
        let scaled = &self.eigenvectors * DMatrix::from_diagonal(&d);
        scaled * self.eigenvectors.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_eigenvalues(|l| l)
    }

    /// Eigenvalue threshold separating support from kernel.
    pub fn support_threshold(&self, rank_tol: f64) -> f64 {
        rank_tol * self.max_eigenvalue().max(0.0)
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        let t = self.support_threshold(rank_tol);
        self.eigenvalues.iter().filter(|&&l| l > t).count()
    }
}

/// Decomposes a density matrix, clamping tiny negative eigenvalues to zero.
pub fn spectral_decompose(m: &Dmat) -> Result<SpectralDecomposition> {
    let mut eig = symmetric_eigen(m.matrix())?;
    check_psd(&eig)?;
    for l in &mut eig.eigenvalues {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    Ok(eig)
}

/// Deterministic eigendecomposition of any real symmetric matrix (eigenvalues
/// may be negative).
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { left: m.nrows(), right: m.ncols() });
    }
    let max_asymmetry = max_asymmetry(m);
    let scale = m.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    if max_asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NonSymmetric { max_asymmetry });
    }
    let n = m.nrows();
    let eig = symmetrize(m.clone()).symmetric_eigen();

    let mut pairs: Vec<(f64, DVector<f64>)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, sign_fixed(v.into_owned())))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Within a cluster of tied eigenvalues order eigenvectors lexicographically.
    let value_scale = pairs.iter().fold(1.0_f64, |m, (l, _)| m.max(l.abs()));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end - 1].0 - pairs[end].0).abs() <= EIGENVALUE_TIE_TOL * value_scale {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lexicographic_desc(&a.1, &b.1));
        start = end;
    }

    let eigenvalues = pairs.iter().map(|(l, _)| *l).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (j, (_, v)) in pairs.iter().enumerate() {
        eigenvectors.set_column(j, v);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Divides by `max(1, λ_max)`: only ever scales down.
pub fn normalize_max_eig(m: &Dmat) -> Result<Dmat> {
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let l_max = m.max_eigenvalue()?;
    if l_max <= 1.0 {
        return Ok(m.clone().with_normalized(true));
    }
    Ok(Dmat::from_psd_unchecked(m.matrix() / l_max).with_normalized(true))
}

/// Divides by `λ_max`, so that the result has largest eigenvalue exactly 1.
/// Used wherever a mixture or composition is renormalized.
pub fn scale_to_unit_max_eig(m: &Dmat) -> Result<Dmat> {
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let l_max = m.max_eigenvalue()?;
    if l_max < ZERO_TOL {
        return Err(Error::ZeroMatrix);
    }
    Ok(Dmat::from_psd_unchecked(m.matrix() / l_max).with_normalized(true))
}

/// Crisp Löwner order `A ⊑ B`: the smallest eigenvalue of `B − A` is at least `-tol`.
pub fn loewner_leq(a: &Dmat, b: &Dmat, tol: f64) -> Result<bool> {
    check_dims(a.dim(), b.dim())?;
    let diff = b.matrix() - a.matrix();
    Ok(symmetric_eigen(&diff)?.min_eigenvalue() >= -tol)
}

/// Projector onto the support: eigenvalue 1 where `λ_i > rank_tol·λ_max`, else 0.
pub fn support_projector(m: &Dmat, rank_tol: f64) -> Result<Dmat> {
    let eig = m.decompose()?;
    let t = eig.support_threshold(rank_tol);
    Ok(Dmat::from_psd_unchecked(eig.map_eigenvalues(|l| if l > t { 1.0 } else { 0.0 })).with_normalized(true))
}

/// Principal square root via the spectrum.
pub fn sqrt_psd(m: &Dmat) -> Result<Dmat> {
    let eig = m.decompose()?;
    Ok(Dmat::from_psd_unchecked(eig.map_eigenvalues(f64::sqrt)))
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

fn check_psd(eig: &SpectralDecomposition) -> Result<()> {
    let min = eig.min_eigenvalue();
    if min < -PSD_TOL * eig.max_eigenvalue().abs().max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn sign_fixed(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-10) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

fn lexicographic_desc(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}
