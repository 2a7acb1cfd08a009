//! Graded entailment between density matrices.
//!
//! `k_hyp` grades the Löwner order, `k_ba` and `k_e` are built from the
//! eigenvalues of `B − A`, and `trace_similarity` is the density-matrix
//! analogue of cosine similarity. Arguments are always ordered as "does `A`
//! entail `B`".

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{check_dims, symmetric_eigen, Dmat};

/// Generalized k-hyponymy `1/γ`, `γ = λ_max(B⁺A)`.
///
/// The support condition `supp(A) ⊆ supp(B)` is not checked, so the value
/// may exceed 1 (see [`k_hyp_clamped`]). When the condition holds this is the
/// largest `k` with `B − kA ⪰ 0`. `γ` is read off the congruent matrix
/// `B^{+1/2} A B^{+1/2}`, which has the same spectrum and is symmetric.
pub fn k_hyp(a: &Dmat, b: &Dmat, rank_tol: f64) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let eig = b.decompose()?;
    let t = eig.support_threshold(rank_tol);
    let root_inv = eig.map_eigenvalues(|l| if l > t { 1.0 / l.sqrt() } else { 0.0 });
    let congruent = &root_inv * a.matrix() * &root_inv;
    let congruent = (&congruent + congruent.transpose()) * 0.5;
    let gamma = symmetric_eigen(&congruent)?.max_eigenvalue();
    if gamma <= rank_tol {
        return Err(Error::DegenerateGamma { gamma });
    }
    Ok(1.0 / gamma)
}

/// `min(k_hyp, 1)`.
pub fn k_hyp_clamped(a: &Dmat, b: &Dmat, rank_tol: f64) -> Result<f64> {
    Ok(k_hyp(a, b, rank_tol)?.min(1.0))
}

/// Largest `k` with `λ_min(B − kA) ≥ −tol`, by bisection. Independent of the
/// pseudo-inverse route in [`k_hyp`]; returns 0 when no positive `k` works
/// and infinity for `A = 0`.
pub fn k_hyp_oracle(a: &Dmat, b: &Dmat, tol: f64) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let a_eig = a.decompose()?;
    let support_min = a_eig
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&l| l > tol)
        .fold(f64::INFINITY, f64::min);
    if !support_min.is_finite() {
        return Ok(f64::INFINITY);
    }
    let b_max = b.max_eigenvalue()?;
    let feasible = |k: f64| -> Result<bool> {
        let diff = b.matrix() - a.matrix() * k;
        Ok(symmetric_eigen(&diff)?.min_eigenvalue() >= -tol)
    };
    let (mut lo, mut hi) = (0.0, b_max / support_min + 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `Σλ_i / Σ|λ_i|` over the eigenvalues of `B − A`, in `[−1, 1]`. Equal
/// matrices give 1.
pub fn k_ba(a: &Dmat, b: &Dmat) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let diff = b.matrix() - a.matrix();
    let eig = symmetric_eigen(&diff)?;
    let sum: f64 = eig.eigenvalues().iter().sum();
    let abs_sum: f64 = eig.eigenvalues().iter().map(|l| l.abs()).sum();
    if abs_sum < 1e-12 {
        return Ok(1.0);
    }
    Ok((sum / abs_sum).clamp(-1.0, 1.0))
}

/// Norm applied to the error term and to `A` in [`k_e_with_norm`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorNorm {
    #[default]
    Frobenius,
    /// Sum of absolute eigenvalues.
    Trace,
    /// Largest absolute eigenvalue.
    Operator,
}

impl ErrorNorm {
    fn of_eigenvalues(self, eigenvalues: impl Iterator<Item = f64>) -> f64 {
        match self {
            ErrorNorm::Frobenius => eigenvalues.map(|l| l * l).sum::<f64>().sqrt(),
            ErrorNorm::Trace => eigenvalues.map(f64::abs).sum(),
            ErrorNorm::Operator => eigenvalues.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

/// `1 − ‖E‖/‖A‖` with the Frobenius norm. `E` is the negative part of
/// `B − A` with its sign flipped.
pub fn k_e(a: &Dmat, b: &Dmat) -> Result<f64> {
    k_e_with_norm(a, b, ErrorNorm::Frobenius)
}

pub fn k_e_with_norm(a: &Dmat, b: &Dmat, norm: ErrorNorm) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let diff = b.matrix() - a.matrix();
    let eig = symmetric_eigen(&diff)?;
    let error = norm.of_eigenvalues(eig.eigenvalues().iter().map(|&l| if l < 0.0 { -l } else { 0.0 }));
    let a_norm = norm.of_eigenvalues(a.decompose()?.eigenvalues().iter().copied());
    Ok((1.0 - error / a_norm).clamp(0.0, 1.0))
}

/// `tr(AB) / (‖A‖_F ‖B‖_F)`.
pub fn trace_similarity(a: &Dmat, b: &Dmat) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    // tr(AB) for symmetric A, B is the entrywise inner product
    let tr = a.matrix().dot(b.matrix());
    Ok((tr / (na * nb)).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    KHyp,
    KHypClamped,
    KBa,
    KE,
    TraceSim,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::KHyp => "k_hyp",
            Measure::KHypClamped => "k_hyp_clamped",
            Measure::KBa => "k_BA",
            Measure::KE => "k_E",
            Measure::TraceSim => "trace",
        }
    }

    pub fn evaluate(self, a: &Dmat, b: &Dmat, rank_tol: f64) -> Result<f64> {
        match self {
            Measure::KHyp => k_hyp(a, b, rank_tol),
            Measure::KHypClamped => k_hyp_clamped(a, b, rank_tol),
            Measure::KBa => k_ba(a, b),
            Measure::KE => k_e(a, b),
            Measure::TraceSim => trace_similarity(a, b),
        }
    }

    pub fn score(self, a: &Dmat, b: &Dmat, rank_tol: f64) -> Result<EntailmentScore> {
        Ok(EntailmentScore { measure: self, value: self.evaluate(a, b, rank_tol)? })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "k_hyp" => Ok(Measure::KHyp),
            "k_hyp_clamped" => Ok(Measure::KHypClamped),
            "k_BA" | "k_ba" => Ok(Measure::KBa),
            "k_E" | "k_e" => Ok(Measure::KE),
            "trace" | "trace_sim" => Ok(Measure::TraceSim),
            other => Err(Error::InvalidArgument(format!("unknown measure `{other}`"))),
        }
    }
}

/// A measured value of "`A` entails `B`".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntailmentScore {
    pub measure: Measure,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RANK_TOL;

    fn diag(x: &[f64]) -> Dmat {
        Dmat::from_diagonal(x).unwrap()
    }

    fn apple() -> Dmat {
        diag(&[1.0, 0.0, 0.0, 0.0])
    }

    fn fruit() -> Dmat {
        diag(&[0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0])
    }

    #[test]
    fn k_hyp_examples() {
        assert!((k_hyp(&apple(), &fruit(), RANK_TOL).unwrap() - 0.5).abs() < 1e-14);
        let a = Dmat::from_row_slice(2, &[0.6, 0.2, 0.2, 0.3]).unwrap();
        assert!((k_hyp(&a, &a, RANK_TOL).unwrap() - 1.0).abs() < 1e-12);
        // support condition violated: raw formula gives 2, the oracle 0
        assert!((k_hyp(&fruit(), &apple(), RANK_TOL).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(k_hyp_clamped(&fruit(), &apple(), RANK_TOL).unwrap(), 1.0);
    }

    #[test]
    fn k_hyp_errors() {
        assert!(matches!(k_hyp(&Dmat::zeros(2), &Dmat::identity(2), RANK_TOL), Err(Error::ZeroMatrix)));
        assert!(matches!(
            k_hyp(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), RANK_TOL),
            Err(Error::DegenerateGamma { .. })
        ));
    }

    #[test]
    fn oracle_examples() {
        assert!((k_hyp_oracle(&apple(), &fruit(), 1e-12).unwrap() - 0.5).abs() < 1e-6);
        let a = Dmat::from_row_slice(2, &[0.6, 0.2, 0.2, 0.3]).unwrap();
        assert!((k_hyp_oracle(&a, &a, 1e-12).unwrap() - 1.0).abs() < 1e-6);
        assert!(k_hyp_oracle(&fruit(), &apple(), 1e-12).unwrap().abs() < 1e-6);
    }

    #[test]
    fn k_ba_examples() {
        assert!(k_ba(&apple(), &fruit()).unwrap().abs() < 1e-14);
        assert!((k_ba(&diag(&[0.5, 0.0]), &diag(&[1.0, 0.5])).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(k_ba(&fruit(), &fruit()).unwrap(), 1.0);
        assert!((k_ba(&diag(&[1.0, 0.5]), &diag(&[0.5, 0.0])).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn k_e_examples() {
        assert!((k_e(&apple(), &fruit()).unwrap() - 0.5).abs() < 1e-14);
        assert!((k_e(&diag(&[0.5, 0.0]), &diag(&[1.0, 0.5])).unwrap() - 1.0).abs() < 1e-14);
        assert!(k_e(&apple(), &Dmat::zeros(4)).unwrap().abs() < 1e-14);
        assert!(matches!(k_e(&Dmat::zeros(4), &apple()), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn k_e_is_asymmetric() {
        // fruit − apple ⪰ 0 fails on the apple direction only:
        // E = diag(1/2,0,0,0) one way, diag(0,1/3,1/6,0) the other
        let forward = k_e(&apple(), &fruit()).unwrap();
        let backward = k_e(&fruit(), &apple()).unwrap();
        let expected_backward = 1.0 - (1.0f64 / 9.0 + 1.0 / 36.0).sqrt() / (7.0f64 / 18.0).sqrt();
        assert!((forward - 0.5).abs() < 1e-14);
        assert!((backward - expected_backward).abs() < 1e-14);
        assert!((forward - backward).abs() > 1e-3);
    }

    #[test]
    fn k_e_norm_variants() {
        // E = diag(1/2, 0, 0, 0), A = apple: every norm agrees here
        for norm in [ErrorNorm::Frobenius, ErrorNorm::Trace, ErrorNorm::Operator] {
            assert!((k_e_with_norm(&apple(), &fruit(), norm).unwrap() - 0.5).abs() < 1e-14);
        }
        let a = diag(&[0.5, 0.5]);
        let b = Dmat::zeros(2);
        // ‖E‖ = ‖A‖ under any norm
        assert!(k_e_with_norm(&a, &b, ErrorNorm::Trace).unwrap().abs() < 1e-14);
    }

    #[test]
    fn trace_similarity_examples() {
        let p = Dmat::pure(&[0.6, 0.8]).unwrap();
        assert!((trace_similarity(&p, &p).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(trace_similarity(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap(), 0.0);
        // (1/2) / (1 · √(7/18))
        let expected = 0.5 / (7.0f64 / 18.0).sqrt();
        let got = trace_similarity(&apple(), &fruit()).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.80178).abs() < 1e-5);
        // cross-check against the explicit trace of the product
        let tr = (apple().matrix() * fruit().matrix()).trace();
        assert!((got - tr / (apple().frobenius_norm() * fruit().frobenius_norm())).abs() < 1e-15);
        assert!(matches!(trace_similarity(&Dmat::zeros(2), &p), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn measure_names_round_trip() {
        for m in [Measure::KHyp, Measure::KHypClamped, Measure::KBa, Measure::KE, Measure::TraceSim] {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
    }
}
