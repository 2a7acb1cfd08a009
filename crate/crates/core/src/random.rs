//! Seeded random density matrices for property suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::spectral::{scale_to_unit_max_eig, Dmat};

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col.neg_mut();
        }
    }
    q
}

/// `G Gᵀ` with `G` Gaussian `dim × rank`, scaled to unit largest eigenvalue.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Dmat {
    let g = gaussian_matrix(rng, dim, rank);
    scale_to_unit_max_eig(&Dmat::from_psd_unchecked(&g * g.transpose())).expect("Gaussian sample is nonzero")
}

/// A random PSD matrix of random rank in `1..=dim`.
pub fn random_dmat<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Dmat {
    let rank = rng.random_range(1..=dim);
    random_psd(rng, dim, rank)
}

/// Random full-rank matrix with eigenvalues in `[0.05, 1]`, largest exactly 1.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Dmat {
    let mut spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    spectrum[0] = 1.0;
    with_spectrum(rng, &spectrum)
}

/// `Q diag(spectrum) Qᵀ` for a random orthogonal `Q`.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> Dmat {
    let q = random_orthogonal(rng, spectrum.len());
    in_basis(&q, spectrum)
}

/// `Q diag(spectrum) Qᵀ`.
pub fn in_basis(q: &DMatrix<f64>, spectrum: &[f64]) -> Dmat {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(spectrum));
    Dmat::from_psd_unchecked(q * d * q.transpose())
}

/// A pair `A ⊑ B` with `λ_max(B) ≤ 1`: `A = a·X`, `B = A + b·Y`.
pub fn random_ordered_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> (Dmat, Dmat) {
    let x = random_dmat(rng, dim);
    let y = random_dmat(rng, dim);
    let a_scale = rng.random_range(0.05..0.6);
    let a = x.scaled(a_scale);
    let b = Dmat::from_psd_unchecked(a.matrix() + y.matrix() * (1.0 - a_scale) * rng.random_range(0.05..1.0));
    (a, b)
}

/// Two invertible matrices sharing an eigenbasis.
pub fn random_commuting_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> (Dmat, Dmat) {
    let q = random_orthogonal(rng, dim);
    let a: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let b: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    (in_basis(&q, &a), in_basis(&q, &b))
}

/// Two matrices of rank `rank` with the same support (a random subspace).
pub fn random_same_support_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> (Dmat, Dmat) {
    let q = random_orthogonal(rng, dim);
    let spectrum = |rng: &mut R| -> Vec<f64> {
        (0..dim).map(|i| if i < rank { rng.random_range(0.05..1.0) } else { 0.0 }).collect()
    };
    let sa = spectrum(rng);
    let sb = spectrum(rng);
    // mix the support basis so A and B do not commute
    let mut rotation = DMatrix::<f64>::identity(dim, dim);
    let inner = random_orthogonal(rng, rank);
    rotation.view_mut((0, 0), (rank, rank)).copy_from(&inner);
    let qb = &q * rotation;
    (in_basis(&q, &sa), in_basis(&qb, &sb))
}

/// `A` supported inside `supp(B)`: B random of rank `rank`, A a random PSD
/// matrix compressed onto that support.
pub fn random_nested_support_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> (Dmat, Dmat) {
    let q = random_orthogonal(rng, dim);
    let sb: Vec<f64> = (0..dim).map(|i| if i < rank { rng.random_range(0.05..1.0) } else { 0.0 }).collect();
    let b = in_basis(&q, &sb);
    let a_rank = rng.random_range(1..=rank);
    let g = gaussian_matrix(rng, rank, a_rank);
    let inner = &g * g.transpose();
    let support = q.columns(0, rank);
    let a = Dmat::from_psd_unchecked(support * inner * support.transpose());
    let a = scale_to_unit_max_eig(&a).expect("nonzero");
    (a, b)
}
