//! Meaning-update compositions.
//!
//! `spider`, `fuzz` and `phaser` are asymmetric: the second argument `B`
//! supplies the spectral structure (eigenbasis or eigenspace projectors) and
//! the first argument `A` is updated by it. `mult` and `diag_comp` work in the
//! computational basis and are symmetric.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::{check_dims, sqrt_psd, Dmat};

/// Basis-relative Hadamard product: in `B`'s eigenbasis `{|i⟩}`, this is
/// `U (A ⊗ B) U†` with `U = Σ_i |i⟩⟨ii|`, i.e. `Σ_i ⟨i|A|i⟩ λ_i |i⟩⟨i|`.
///
/// Computed directly in `B`'s basis rather than through the `d² × d²` tensor
/// product.
pub fn spider(a: &Dmat, b: &Dmat) -> Result<Dmat> {
    check_dims(a.dim(), b.dim())?;
    let eig = b.decompose()?;
    let v = eig.eigenvectors();
    let in_b_basis = v.transpose() * a.matrix() * v;
    let n = a.dim();
    let mut out = DMatrix::zeros(n, n);
    for (i, &l) in eig.eigenvalues().iter().enumerate() {
        let w = in_b_basis[(i, i)] * l;
        if w != 0.0 {
            let col = v.column(i);
            out += col * col.transpose() * w;
        }
    }
    Ok(Dmat::from_psd_unchecked(out))
}

/// `Σ_i x_i P_i A P_i` where `B = Σ_i x_i P_i` over distinct eigenvalues.
pub fn fuzz(a: &Dmat, b: &Dmat) -> Result<Dmat> {
    check_dims(a.dim(), b.dim())?;
    let n = a.dim();
    let mut out = DMatrix::zeros(n, n);
    for space in b.decompose()?.eigenspaces() {
        if space.eigenvalue != 0.0 {
            let p = &space.projector;
            out += p * a.matrix() * p * space.eigenvalue;
        }
    }
    Ok(Dmat::from_psd_unchecked(out))
}

/// `B^{1/2} A B^{1/2}`.
pub fn phaser(a: &Dmat, b: &Dmat) -> Result<Dmat> {
    check_dims(a.dim(), b.dim())?;
    let root = sqrt_psd(b)?;
    Ok(Dmat::from_psd_unchecked(root.matrix() * a.matrix() * root.matrix()))
}

/// Entrywise product in the computational basis.
pub fn mult(a: &Dmat, b: &Dmat) -> Result<Dmat> {
    check_dims(a.dim(), b.dim())?;
    Ok(Dmat::from_psd_unchecked(a.matrix().component_mul(b.matrix())))
}

/// `dg(A)·dg(B)`: product of the diagonals, off-diagonals dropped.
pub fn diag_comp(a: &Dmat, b: &Dmat) -> Result<Dmat> {
    check_dims(a.dim(), b.dim())?;
    let d = a.matrix().diagonal().component_mul(&b.matrix().diagonal());
    Ok(Dmat::from_psd_unchecked(DMatrix::from_diagonal(&d)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompositionKind {
    Spider,
    Fuzz,
    Phaser,
    Mult,
    Diag,
}

impl CompositionKind {
    pub const ALL: [CompositionKind; 5] = [
        CompositionKind::Spider,
        CompositionKind::Fuzz,
        CompositionKind::Phaser,
        CompositionKind::Mult,
        CompositionKind::Diag,
    ];

    /// Whether the operand order (and hence the basis choice) matters.
    pub fn uses_basis(self) -> bool {
        matches!(self, CompositionKind::Spider | CompositionKind::Fuzz | CompositionKind::Phaser)
    }

    pub fn name(self) -> &'static str {
        match self {
            CompositionKind::Spider => "spider",
            CompositionKind::Fuzz => "fuzz",
            CompositionKind::Phaser => "phaser",
            CompositionKind::Mult => "mult",
            CompositionKind::Diag => "diag",
        }
    }

    /// Applies the composition with `b` in the structural position.
    pub fn apply(self, a: &Dmat, b: &Dmat) -> Result<Dmat> {
        match self {
            CompositionKind::Spider => spider(a, b),
            CompositionKind::Fuzz => fuzz(a, b),
            CompositionKind::Phaser => phaser(a, b),
            CompositionKind::Mult => mult(a, b),
            CompositionKind::Diag => diag_comp(a, b),
        }
    }
}

impl fmt::Display for CompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompositionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CompositionKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown composition `{s}`")))
    }
}

/// Which argument of [`compose`] takes the structural slot (`B` above).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisSlot {
    FirstOperand,
    SecondOperand,
}

/// Composes `first` and `second`, placing the operand named by `slot` in the
/// structural position. `mult` and `diag` ignore `slot`.
pub fn compose(first: &Dmat, second: &Dmat, kind: CompositionKind, slot: BasisSlot) -> Result<Dmat> {
    match slot {
        BasisSlot::FirstOperand => kind.apply(second, first),
        BasisSlot::SecondOperand => kind.apply(first, second),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::negation::neg_supp;
    use crate::spectral::{support_projector, RANK_TOL};

    fn diag(x: &[f64]) -> Dmat {
        Dmat::from_diagonal(x).unwrap()
    }

    fn plus() -> Dmat {
        Dmat::from_row_slice(2, &[0.5, 0.5, 0.5, 0.5]).unwrap()
    }

    fn assert_mat(m: &Dmat, rows: &[f64], tol: f64) {
        let expected = DMatrix::from_row_slice(m.dim(), m.dim(), rows);
        let d = (m.matrix() - &expected).norm();
        assert!(d <= tol, "got\n{}expected\n{expected}", m.matrix());
    }

    fn fruit() -> Dmat {
        diag(&[0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0])
    }

    fn not_apple() -> Dmat {
        diag(&[0.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn spider_examples() {
        let toy = spider(&not_apple(), &fruit()).unwrap();
        assert_mat(&toy, diag(&[0.0, 1.0 / 3.0, 1.0 / 6.0, 0.0]).matrix().as_slice(), 1e-15);

        let x = diag(&[0.75, 0.5, 0.0]);
        let s = spider(&x, &neg_supp(&x, RANK_TOL).unwrap()).unwrap();
        assert_mat(&s, diag(&[1.0, 1.0, 0.0]).matrix().as_slice(), 1e-14);

        assert_mat(&spider(&plus(), &diag(&[1.0, 0.25])).unwrap(), &[0.5, 0.0, 0.0, 0.125], 1e-15);
    }

    #[test]
    fn fuzz_examples() {
        assert_mat(&fuzz(&plus(), &diag(&[1.0, 0.25])).unwrap(), &[0.5, 0.0, 0.0, 0.125], 1e-15);
        assert_mat(&fuzz(&not_apple(), &fruit()).unwrap(), diag(&[0.0, 1.0 / 3.0, 1.0 / 6.0, 0.0]).matrix().as_slice(), 1e-15);
        let x = diag(&[0.75, 0.5, 0.0]);
        assert_mat(&fuzz(&x, &neg_supp(&x, RANK_TOL).unwrap()).unwrap(), diag(&[1.0, 1.0, 0.0]).matrix().as_slice(), 1e-14);
    }

    #[test]
    fn phaser_examples() {
        // B^{1/2} = diag(1, 1/2)
        assert_mat(&phaser(&plus(), &diag(&[1.0, 0.25])).unwrap(), &[0.5, 0.25, 0.25, 0.125], 1e-15);
        assert_mat(&phaser(&not_apple(), &fruit()).unwrap(), diag(&[0.0, 1.0 / 3.0, 1.0 / 6.0, 0.0]).matrix().as_slice(), 1e-15);
        let x = diag(&[0.75, 0.5, 0.0]);
        let p = phaser(&x, &neg_supp(&x, RANK_TOL).unwrap()).unwrap();
        let support = support_projector(&x, RANK_TOL).unwrap();
        assert_mat(&p, support.matrix().as_slice(), 1e-14);
    }

    #[test]
    fn mult_examples() {
        assert_mat(&mult(&plus(), &diag(&[1.0, 0.25])).unwrap(), &[0.5, 0.0, 0.0, 0.125], 1e-15);
        assert_mat(&mult(&plus(), &Dmat::identity(2)).unwrap(), &[0.5, 0.0, 0.0, 0.5], 1e-15);
        let ones = Dmat::from_row_slice(2, &[1.0; 4]).unwrap();
        assert_eq!(mult(&plus(), &ones).unwrap().matrix(), plus().matrix());
    }

    #[test]
    fn diag_examples() {
        let b = diag(&[1.0, 0.25]);
        assert_mat(&diag_comp(&plus(), &b).unwrap(), &[0.5, 0.0, 0.0, 0.125], 1e-15);
        let b2 = Dmat::from_row_slice(2, &[0.7, 0.2, 0.2, 0.3]).unwrap();
        assert_mat(&diag_comp(&Dmat::identity(2), &b2).unwrap(), &[0.7, 0.0, 0.0, 0.3], 1e-15);
        let unit_diag = Dmat::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_mat(&diag_comp(&plus(), &unit_diag).unwrap(), &[0.5, 0.0, 0.0, 0.5], 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        for kind in CompositionKind::ALL {
            assert!(matches!(
                kind.apply(&Dmat::identity(2), &Dmat::identity(3)),
                Err(Error::DimensionMismatch { .. })
            ));
        }
    }

    #[test]
    fn compose_slot_convention() {
        let neg = Dmat::from_row_slice(2, &[0.6, 0.3, 0.3, 0.4]).unwrap();
        let wc = diag(&[0.9, 0.2]);
        let w = compose(&neg, &wc, CompositionKind::Phaser, BasisSlot::FirstOperand).unwrap();
        assert_eq!(w.matrix(), phaser(&wc, &neg).unwrap().matrix());
        let c = compose(&neg, &wc, CompositionKind::Phaser, BasisSlot::SecondOperand).unwrap();
        assert_eq!(c.matrix(), phaser(&neg, &wc).unwrap().matrix());
        assert!((w.matrix() - c.matrix()).norm() > 1e-3);

        let m1 = compose(&neg, &wc, CompositionKind::Mult, BasisSlot::FirstOperand).unwrap();
        let m2 = compose(&neg, &wc, CompositionKind::Mult, BasisSlot::SecondOperand).unwrap();
        assert_eq!(m1.matrix(), m2.matrix());
    }

    #[test]
    fn kind_parsing() {
        for k in CompositionKind::ALL {
            assert_eq!(k.name().parse::<CompositionKind>().unwrap(), k);
        }
        assert!("tensor".parse::<CompositionKind>().is_err());
    }
}
