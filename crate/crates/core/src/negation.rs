//! Logical negations of a density matrix.
//!
//! All of them act on the eigenvalues only, so the output shares the input's
//! eigenvectors. None of them normalize: normalization happens once, after
//! composition with a context.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{Dmat, NORMALIZED_TOL};

/// Subtraction from identity, `I − X`. Requires `λ_max(X) ≤ 1`.
pub fn neg_sub(x: &Dmat) -> Result<Dmat> {
    let max_eigenvalue = x.max_eigenvalue()?;
    if max_eigenvalue > 1.0 + NORMALIZED_TOL {
        return Err(Error::NotNormalized { max_eigenvalue });
    }
    let eig = x.decompose()?;
    Ok(Dmat::from_psd_unchecked(eig.map_eigenvalues(|l| (1.0 - l).max(0.0))).with_normalized(true))
}

/// Support inverse (Moore–Penrose pseudo-inverse): `1/λ_i` on the support,
/// zero on the kernel.
pub fn neg_supp(x: &Dmat, rank_tol: f64) -> Result<Dmat> {
    let eig = x.decompose()?;
    if eig.rank(rank_tol) == 0 {
        return Err(Error::ZeroMatrix);
    }
    let t = eig.support_threshold(rank_tol);
    Ok(Dmat::from_psd_unchecked(eig.map_eigenvalues(|l| if l > t { 1.0 / l } else { 0.0 })))
}

/// Result of [`neg_ker`].
#[derive(Clone, Debug)]
pub struct KernelInverse {
    pub projector: Dmat,
    /// Set when the input had no kernel; `projector` is then the zero matrix.
    pub input_invertible: bool,
}

/// Kernel inverse: the projector onto the kernel of `x`.
///
/// Only meaningful for singular `x`. An invertible input yields the zero
/// matrix with [`KernelInverse::input_invertible`] set, so that
/// [`neg_inv`] stays total.
pub fn neg_ker(x: &Dmat, rank_tol: f64) -> Result<KernelInverse> {
    let eig = x.decompose()?;
    let t = eig.support_threshold(rank_tol);
    let input_invertible = eig.rank(rank_tol) == eig.dim();
    let projector = Dmat::from_psd_unchecked(eig.map_eigenvalues(|l| if l > t { 0.0 } else { 1.0 }))
        .with_normalized(true);
    Ok(KernelInverse { projector, input_invertible })
}

/// Matrix-inverse negation: `w·neg_supp(X) + (1 − w)·neg_ker(X)`.
pub fn neg_inv(x: &Dmat, support_weight: f64, rank_tol: f64) -> Result<Dmat> {
    if !(0.0..=1.0).contains(&support_weight) {
        return Err(Error::WeightOutOfRange(support_weight));
    }
    let supp = neg_supp(x, rank_tol)?;
    let ker = neg_ker(x, rank_tol)?.projector;
    let mixed = supp.matrix() * support_weight + ker.matrix() * (1.0 - support_weight);
    Ok(Dmat::from_psd_unchecked(mixed))
}

/// Negation choice used by the conversational-negation pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogicalNegation {
    Sub,
    Supp,
    Ker,
    Inv { support_weight: f64 },
}

impl LogicalNegation {
    pub const DEFAULT_SUPPORT_WEIGHT: f64 = 0.5;

    pub fn inv() -> Self {
        LogicalNegation::Inv { support_weight: Self::DEFAULT_SUPPORT_WEIGHT }
    }

    pub fn apply(&self, x: &Dmat, rank_tol: f64) -> Result<Dmat> {
        match *self {
            LogicalNegation::Sub => neg_sub(x),
            LogicalNegation::Supp => neg_supp(x, rank_tol),
            LogicalNegation::Ker => Ok(neg_ker(x, rank_tol)?.projector),
            LogicalNegation::Inv { support_weight } => neg_inv(x, support_weight, rank_tol),
        }
    }

    /// Short label used in result tables.
    pub fn label(&self) -> String {
        match *self {
            LogicalNegation::Sub => "sub".into(),
            LogicalNegation::Supp => "supp".into(),
            LogicalNegation::Ker => "ker".into(),
            LogicalNegation::Inv { support_weight } if support_weight == Self::DEFAULT_SUPPORT_WEIGHT => {
                "inv".into()
            }
            LogicalNegation::Inv { support_weight } => format!("inv({support_weight})"),
        }
    }
}

impl fmt::Display for LogicalNegation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for LogicalNegation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sub" => Ok(LogicalNegation::Sub),
            "supp" => Ok(LogicalNegation::Supp),
            "ker" => Ok(LogicalNegation::Ker),
            "inv" => Ok(LogicalNegation::inv()),
            other => Err(Error::InvalidArgument(format!("unknown negation `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RANK_TOL;

    fn diag(x: &[f64]) -> Dmat {
        Dmat::from_diagonal(x).unwrap()
    }

    fn assert_diag(m: &Dmat, expected: &[f64], tol: f64) {
        let d = (m.matrix() - diag(expected).matrix()).norm();
        assert!(d <= tol, "got\n{}expected diag{expected:?}", m.matrix());
    }

    #[test]
    fn sub_examples() {
        assert_diag(&neg_sub(&diag(&[1.0, 0.0])).unwrap(), &[0.0, 1.0], 1e-15);
        // not an apple: everything orthogonal to it
        assert_diag(&neg_sub(&diag(&[1.0, 0.0, 0.0, 0.0])).unwrap(), &[0.0, 1.0, 1.0, 1.0], 1e-15);
        assert_diag(&neg_sub(&diag(&[0.5, 0.0])).unwrap(), &[0.5, 1.0], 1e-15);
    }

    #[test]
    fn sub_requires_normalized_input() {
        assert!(matches!(neg_sub(&diag(&[2.0, 0.0])), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn supp_examples() {
        assert_diag(&neg_supp(&diag(&[0.5, 0.0]), RANK_TOL).unwrap(), &[2.0, 0.0], 1e-14);
        assert_diag(&neg_supp(&Dmat::identity(3), RANK_TOL).unwrap(), &[1.0, 1.0, 1.0], 1e-14);
        assert_diag(&neg_supp(&diag(&[0.5, 0.25, 0.0]), RANK_TOL).unwrap(), &[2.0, 4.0, 0.0], 1e-14);
        assert!(matches!(neg_supp(&Dmat::zeros(2), RANK_TOL), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn ker_examples() {
        let k = neg_ker(&diag(&[0.5, 0.0]), RANK_TOL).unwrap();
        assert!(!k.input_invertible);
        assert_diag(&k.projector, &[0.0, 1.0], 1e-15);
        assert_diag(&neg_ker(&diag(&[0.5, 0.25, 0.0]), RANK_TOL).unwrap().projector, &[0.0, 0.0, 1.0], 1e-15);
        // applied twice: maximally mixed over the original support
        let twice = neg_ker(&k.projector, RANK_TOL).unwrap().projector;
        assert_diag(&twice, &[1.0, 0.0], 1e-15);
    }

    #[test]
    fn ker_of_invertible_is_flagged_zero() {
        let k = neg_ker(&diag(&[0.5, 0.25]), RANK_TOL).unwrap();
        assert!(k.input_invertible);
        assert!(k.projector.is_zero());
    }

    #[test]
    fn inv_examples() {
        let x = diag(&[0.5, 0.0]);
        assert_diag(&neg_inv(&x, 0.5, RANK_TOL).unwrap(), &[1.0, 0.5], 1e-14);
        assert_eq!(
            neg_inv(&x, 1.0, RANK_TOL).unwrap().matrix(),
            neg_supp(&x, RANK_TOL).unwrap().matrix()
        );
        assert_diag(&neg_inv(&x, 0.0, RANK_TOL).unwrap(), &[0.0, 1.0], 1e-15);
        assert!(matches!(neg_inv(&x, 1.5, RANK_TOL), Err(Error::WeightOutOfRange(_))));
        assert!(matches!(neg_inv(&x, -0.1, RANK_TOL), Err(Error::WeightOutOfRange(_))));
    }

    #[test]
    fn parse_labels() {
        for s in ["sub", "supp", "ker", "inv"] {
            assert_eq!(s.parse::<LogicalNegation>().unwrap().label(), s);
        }
        assert!("not".parse::<LogicalNegation>().is_err());
    }
}
