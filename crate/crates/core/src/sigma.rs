//! The chiral operator pair `Σ±` and the constraint projectors that annihilate
//! `D = Σ⁺ − Σ⁻`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, GradedLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{serde_rational, serde_rational_matrix, serde_rational_vec, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Representation {
    /// `Σ±` act on grade `k` as the scalars `plus[k]`, `minus[k]`.
    GradingDiagonal { plus: Vec<Rational>, minus: Vec<Rational> },
    GeneralMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiralOperatorPair {
    sigma_plus: QMatrix,
    sigma_minus: QMatrix,
    representation: Representation,
    wz_coefficient: Rational,
}

/// One ingredient of the action: either per-grade scalars or a full matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorPart {
    Eigenvalues(Vec<Rational>),
    Matrix(QMatrix),
}

impl OperatorPart {
    fn to_matrix(&self, alg: &GradedLieAlgebra) -> Result<QMatrix> {
        match self {
            OperatorPart::Eigenvalues(ev) => grade_diagonal(alg, ev),
            OperatorPart::Matrix(m) => {
                check_square(alg, m)?;
                Ok(m.clone())
            }
        }
    }
}

fn check_square(alg: &GradedLieAlgebra, m: &QMatrix) -> Result<()> {
    if m.rows() != alg.dim() || m.cols() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), found: m.rows().max(m.cols()) });
    }
    Ok(())
}

/// Diagonal matrix acting on grade `k` as `ev[k]`.
pub fn grade_diagonal(alg: &GradedLieAlgebra, ev: &[Rational]) -> Result<QMatrix> {
    if ev.len() != alg.grading_order() {
        return Err(Error::DimensionMismatch { expected: alg.grading_order(), found: ev.len() });
    }
    Ok(QMatrix::diagonal(&alg.grades().iter().map(|&g| ev[g].clone()).collect::<Vec<_>>()))
}

/// Per-grade scalars of `m` if it acts as a scalar on every grade component.
fn grade_scalars(alg: &GradedLieAlgebra, m: &QMatrix) -> Option<Vec<Rational>> {
    if !m.is_diagonal() {
        return None;
    }
    let mut ev: Vec<Option<Rational>> = vec![None; alg.grading_order()];
    for i in 0..alg.dim() {
        let g = alg.grade_of(i);
        match &ev[g] {
            None => ev[g] = Some(m[(i, i)].clone()),
            Some(v) if *v != m[(i, i)] => return None,
            Some(_) => {}
        }
    }
    Some(ev.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect())
}

impl ChiralOperatorPair {
    pub fn from_eigenvalues(alg: &GradedLieAlgebra, plus: &[Rational], minus: &[Rational], alpha: Rational) -> Result<Self> {
        Ok(ChiralOperatorPair {
            sigma_plus: grade_diagonal(alg, plus)?,
            sigma_minus: grade_diagonal(alg, minus)?,
            representation: Representation::GradingDiagonal { plus: plus.to_vec(), minus: minus.to_vec() },
            wz_coefficient: alpha,
        })
    }

    /// Uses the grading-diagonal representation whenever both matrices allow it.
    pub fn from_matrices(alg: &GradedLieAlgebra, plus: QMatrix, minus: QMatrix, alpha: Rational) -> Result<Self> {
        check_square(alg, &plus)?;
        check_square(alg, &minus)?;
        let representation = match (grade_scalars(alg, &plus), grade_scalars(alg, &minus)) {
            (Some(p), Some(m)) => Representation::GradingDiagonal { plus: p, minus: m },
            _ => Representation::GeneralMatrix,
        };
        Ok(ChiralOperatorPair { sigma_plus: plus, sigma_minus: minus, representation, wz_coefficient: alpha })
    }

    /// `Σ± = Σ̄ ± Σ̄∗ + α` from the antisymmetric part `Σ̄` and symmetric part `Σ̄∗`
    /// of the action.
    pub fn from_action(alg: &GradedLieAlgebra, sym_part: &OperatorPart, antisym_part: &OperatorPart, alpha: Rational) -> Result<Self> {
        let sym = sym_part.to_matrix(alg)?;
        let anti = antisym_part.to_matrix(alg)?;
        let k = alg.killing();
        let ks = k.mul(&sym);
        if ks.transpose() != ks {
            return Err(Error::SymmetryClassViolation { part: "symmetric" });
        }
        let ka = k.mul(&anti);
        if ka.transpose() != ka.scale(&-Rational::one()) {
            return Err(Error::SymmetryClassViolation { part: "antisymmetric" });
        }
        let a = QMatrix::scalar(alg.dim(), &alpha);
        let plus = anti.add(&sym).add(&a);
        let minus = anti.sub(&sym).add(&a);
        Self::from_matrices(alg, plus, minus, alpha)
    }

    pub fn sigma_plus(&self) -> &QMatrix {
        &self.sigma_plus
    }

    pub fn sigma_minus(&self) -> &QMatrix {
        &self.sigma_minus
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn wz_coefficient(&self) -> &Rational {
        &self.wz_coefficient
    }

    pub fn dim(&self) -> usize {
        self.sigma_plus.rows()
    }

    /// Per-grade eigenvalues `(Σ⁺₍ₖ₎, Σ⁻₍ₖ₎)` for grading-diagonal pairs.
    pub fn eigenvalues(&self) -> Option<(&[Rational], &[Rational])> {
        match &self.representation {
            Representation::GradingDiagonal { plus, minus } => Some((plus, minus)),
            Representation::GeneralMatrix => None,
        }
    }

    /// `D = Σ⁺ − Σ⁻`.
    pub fn difference(&self) -> QMatrix {
        self.sigma_plus.sub(&self.sigma_minus)
    }

    pub fn commutes(&self) -> bool {
        self.sigma_plus.commutator(&self.sigma_minus).is_zero()
    }

    /// Tests `(Σ⁺)ᵀ = −Σ⁻ + 2α` with the transpose taken against the invariant form.
    /// Returns the verdict and the exact residual `(Σ⁺)ᵀ + Σ⁻ − 2α`.
    pub fn check_transpose_relation(&self, alg: &GradedLieAlgebra) -> Result<(bool, QMatrix)> {
        let t = alg.form_transpose(&self.sigma_plus)?;
        let two_alpha = &self.wz_coefficient + &self.wz_coefficient;
        let residual = t.add(&self.sigma_minus).sub(&QMatrix::scalar(self.dim(), &two_alpha));
        Ok((residual.is_zero(), residual))
    }

    /// Moore–Penrose inverse of `D`: inverse on the image, zero on the kernel.
    pub fn difference_pseudo_inverse(&self) -> QMatrix {
        self.difference().pseudo_inverse()
    }

    /// A basis of matrices `Π` with `Π D = 0`, one per left-null vector of `D`,
    /// merged per grade when every left-null vector is homogeneous.
    pub fn find_constraint_projectors(&self, alg: &GradedLieAlgebra) -> Vec<ConstraintProjector> {
        let d = self.difference();
        let dim = self.dim();
        let rows = d.left_nullspace();
        let mut singles = Vec::with_capacity(rows.len());
        for w in rows {
            let pivot = w.iter().position(|x| !x.is_zero()).expect("nonzero null vector");
            let support: Vec<usize> = (0..dim).filter(|&i| !w[i].is_zero()).collect();
            let g = alg.grade_of(pivot);
            let homogeneous = support.iter().all(|&i| alg.grade_of(i) == g);
            let mut pi = QMatrix::zeros(dim, dim);
            for (j, v) in w.into_iter().enumerate() {
                pi[(pivot, j)] = v;
            }
            singles.push((homogeneous.then_some(g), pi));
        }
        if singles.iter().any(|(g, _)| g.is_none()) {
            return singles.into_iter().map(|(grade, pi)| ConstraintProjector { pi, grade }).collect();
        }
        let mut merged: Vec<ConstraintProjector> = Vec::new();
        for (g, pi) in singles {
            match merged.iter_mut().find(|p| p.grade == g) {
                Some(p) => p.pi = p.pi.add(&pi),
                None => merged.push(ConstraintProjector { pi, grade: g }),
            }
        }
        merged.sort_by_key(|p| p.grade);
        merged
    }
}

/// A matrix `Π` with `Π (Σ⁺ − Σ⁻) = 0`, tagged with its grade when homogeneous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintProjector {
    pub pi: QMatrix,
    pub grade: Option<usize>,
}

impl ConstraintProjector {
    pub fn annihilates(&self, pair: &ChiralOperatorPair) -> bool {
        self.pi.mul(&pair.difference()).is_zero()
    }
}

/// `J± = ½(J ± ∗J)`.
pub fn chiral_split(j: &AlgebraElement, star_j: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let half = Rational::new(1.into(), 2.into());
    (j.add(star_j).scale(&half), j.sub(star_j).scale(&half))
}

/// Inverse of [`chiral_split`]: `(J, ∗J) = (J⁺ + J⁻, J⁺ − J⁻)`.
pub fn chiral_join(j_plus: &AlgebraElement, j_minus: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    (j_plus.add(j_minus), j_plus.sub(j_minus))
}

/// Operator block of a model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Eigenvalues {
        #[serde(with = "serde_rational_vec")]
        eigenvalues_plus: Vec<Rational>,
        #[serde(with = "serde_rational_vec")]
        eigenvalues_minus: Vec<Rational>,
        #[serde(with = "serde_rational", default = "Rational::zero")]
        alpha: Rational,
    },
    Matrices {
        #[serde(with = "serde_rational_matrix")]
        matrix_plus: Vec<Vec<Rational>>,
        #[serde(with = "serde_rational_matrix")]
        matrix_minus: Vec<Vec<Rational>>,
        #[serde(with = "serde_rational", default = "Rational::zero")]
        alpha: Rational,
    },
}

impl OperatorSpec {
    pub fn build(&self, alg: &GradedLieAlgebra) -> Result<ChiralOperatorPair> {
        match self {
            OperatorSpec::Eigenvalues { eigenvalues_plus, eigenvalues_minus, alpha } => {
                ChiralOperatorPair::from_eigenvalues(alg, eigenvalues_plus, eigenvalues_minus, alpha.clone())
            }
            OperatorSpec::Matrices { matrix_plus, matrix_minus, alpha } => ChiralOperatorPair::from_matrices(
                alg,
                QMatrix::from_rows(matrix_plus.clone()),
                QMatrix::from_rows(matrix_minus.clone()),
                alpha.clone(),
            ),
        }
    }

    pub fn from_pair(pair: &ChiralOperatorPair) -> Self {
        match pair.eigenvalues() {
            Some((p, m)) => OperatorSpec::Eigenvalues {
                eigenvalues_plus: p.to_vec(),
                eigenvalues_minus: m.to_vec(),
                alpha: pair.wz_coefficient().clone(),
            },
            None => OperatorSpec::Matrices {
                matrix_plus: pair.sigma_plus().to_rows(),
                matrix_minus: pair.sigma_minus().to_rows(),
                alpha: pair.wz_coefficient().clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn qs(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn symmetric_space_from_action() {
        let g = GradedLieAlgebra::sl(2, "cyclic").unwrap();
        let pair = ChiralOperatorPair::from_action(
            &g,
            &OperatorPart::Eigenvalues(qs(&[0, -1])),
            &OperatorPart::Eigenvalues(qs(&[0, 0])),
            q(0),
        )
        .unwrap();
        assert_eq!(pair.eigenvalues().unwrap(), (&qs(&[0, -1])[..], &qs(&[0, 1])[..]));
        assert!(pair.check_transpose_relation(&g).unwrap().0);
    }

    #[test]
    fn wrong_symmetry_class_rejected() {
        let g = GradedLieAlgebra::sl(2, "cyclic").unwrap();
        let err = ChiralOperatorPair::from_action(
            &g,
            &OperatorPart::Eigenvalues(qs(&[0, 0])),
            &OperatorPart::Eigenvalues(qs(&[1, 0])),
            q(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SymmetryClassViolation { part: "antisymmetric" }));
    }

    #[test]
    fn z2_projector_and_pseudo_inverse() {
        let g = GradedLieAlgebra::sl(2, "cyclic").unwrap();
        let pair = ChiralOperatorPair::from_eigenvalues(&g, &qs(&[0, -1]), &qs(&[0, 1]), q(0)).unwrap();
        let ps = pair.find_constraint_projectors(&g);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].grade, Some(0));
        assert_eq!(ps[0].pi, g.grade_projector(0));
        let dp = pair.difference_pseudo_inverse();
        let half = Rational::new((-1).into(), 2.into());
        assert_eq!(dp, QMatrix::diagonal(&[q(0), half.clone(), half]));
    }

    #[test]
    fn invertible_difference_has_no_projectors() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        let pair = ChiralOperatorPair::from_eigenvalues(&g, &qs(&[1]), &qs(&[0]), q(0)).unwrap();
        assert!(pair.find_constraint_projectors(&g).is_empty());
        assert_eq!(pair.difference_pseudo_inverse(), QMatrix::identity(3));
    }

    #[test]
    fn chiral_split_round_trip() {
        let j = AlgebraElement::from_ints(&[3, -1, 4]);
        let s = AlgebraElement::from_ints(&[1, 5, -9]);
        let (p, m) = chiral_split(&j, &s);
        assert_eq!(chiral_join(&p, &m), (j.clone(), s));
        let (_, m2) = chiral_split(&j, &j);
        assert!(m2.is_zero());
    }
}
