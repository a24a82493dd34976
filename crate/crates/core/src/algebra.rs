//! Finite-dimensional Lie algebras with an optional Z_N grading.
//!
//! Structure constants are stored sparsely: for every ordered basis pair
//! `(a, b)` the list of nonzero `f^c_{ab}`, so that `[T_a, T_b] = Σ_c f^c_{ab} T_c`.
//! Presets are built from explicit matrix bases and come with fixed canonical
//! orderings so that example values are reproducible.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{q, serde_rational, serde_rational_matrix, Rational};

/// Coefficient vector of a Lie algebra element in the algebra's basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement(pub Vec<Rational>);

impl AlgebraElement {
    pub fn zero(dim: usize) -> Self {
        AlgebraElement(vec![Rational::zero(); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_ints(values: &[i64]) -> Self {
        AlgebraElement(values.iter().map(|&x| q(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        AlgebraElement(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        AlgebraElement(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        AlgebraElement(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Self {
        AlgebraElement(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// JSON description of an algebra: a named preset or raw structure constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Preset(PresetSpec),
    Raw(RawSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetSpec {
    /// `sl`, `su`, `so` or `double`.
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_grading")]
    pub grading: String,
    /// Summand of a `double` preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<AlgebraSpec>>,
}

fn default_grading() -> String {
    "none".into()
}

/// One structure constant `[a, b, c, "p/q"]` meaning `f^c_{ab}`, 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstant(pub usize, pub usize, pub usize, #[serde(with = "serde_rational")] pub Rational);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSpec {
    pub dim: usize,
    pub f: Vec<StructureConstant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grades: Option<Vec<usize>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Invariant form to use instead of the Killing form.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_matrix")]
    pub killing: Option<Vec<Vec<Rational>>>,
}

mod opt_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Vec<Vec<Rational>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match m {
            Some(m) => serde_rational_matrix::serialize(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Vec<Rational>>>, D::Error> {
        serde_rational_matrix::deserialize(d).map(Some)
    }
}

impl AlgebraSpec {
    pub fn preset(name: &str, n: usize, grading: &str) -> Self {
        AlgebraSpec::Preset(PresetSpec { preset: name.into(), n: Some(n), grading: grading.into(), base: None })
    }

    pub fn double(base: AlgebraSpec, grading: &str) -> Self {
        AlgebraSpec::Preset(PresetSpec {
            preset: "double".into(),
            n: None,
            grading: grading.into(),
            base: Some(Box::new(base)),
        })
    }
}

type Table = Vec<Vec<(usize, Rational)>>;

#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    name: String,
    dim: usize,
    table: Table,
    grading_order: usize,
    grades: Vec<usize>,
    killing: QMatrix,
    spec: AlgebraSpec,
}

impl GradedLieAlgebra {
    /// Builds and validates an algebra from its description.
    pub fn build(spec: &AlgebraSpec) -> Result<Self> {
        match spec {
            AlgebraSpec::Raw(raw) => Self::from_raw(raw, spec.clone()),
            AlgebraSpec::Preset(p) => Self::from_preset(p, spec.clone()),
        }
    }

    pub fn sl(n: usize, grading: &str) -> Result<Self> {
        Self::build(&AlgebraSpec::preset("sl", n, grading))
    }

    fn from_raw(raw: &RawSpec, spec: AlgebraSpec) -> Result<Self> {
        let dim = raw.dim;
        if dim == 0 {
            return Err(Error::Validation("algebra dimension must be positive".into()));
        }
        let mut entries: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        for StructureConstant(a, b, c, v) in &raw.f {
            if *a >= dim || *b >= dim || *c >= dim {
                return Err(Error::Validation(format!("structure constant index ({a},{b},{c}) out of range")));
            }
            *entries.entry((*a, *b, *c)).or_insert_with(Rational::zero) += v;
        }
        for (&(a, b, c), v) in &entries {
            if v.is_zero() {
                continue;
            }
            let mirror = entries.get(&(b, a, c)).cloned().unwrap_or_else(Rational::zero);
            if a == b || mirror != -v.clone() {
                return Err(Error::AntisymmetryViolation { a, b, c });
            }
        }
        let mut table: Table = vec![Vec::new(); dim * dim];
        for ((a, b, c), v) in entries {
            if !v.is_zero() {
                table[a * dim + b].push((c, v));
            }
        }
        let order = raw.order.unwrap_or(1).max(1);
        let grades = raw.grades.clone().unwrap_or_else(|| vec![0; dim]);
        let killing = raw.killing.as_ref().map(|k| QMatrix::from_rows(k.clone()));
        Self::assemble("raw".into(), dim, table, order, grades, killing, spec)
    }

    fn from_preset(p: &PresetSpec, spec: AlgebraSpec) -> Result<Self> {
        let unsupported = || Error::UnsupportedGrading { preset: p.preset.clone(), grading: p.grading.clone() };
        if p.preset == "double" {
            let base_spec = p.base.as_ref().ok_or_else(|| Error::Validation("double preset requires a base".into()))?;
            let base = Self::build(base_spec)?;
            let (dim, table, order, grades) = match p.grading.as_str() {
                "none" => double_plain(&base),
                "swap" => double_swap(&base),
                _ => return Err(unsupported()),
            };
            let name = format!("{}+{}", base.name, base.name);
            return Self::assemble(name, dim, table, order, grades, None, spec);
        }
        let n = p.n.ok_or_else(|| Error::Validation(format!("preset {} requires n", p.preset)))?;
        if n < 2 {
            return Err(Error::Validation(format!("preset {} requires n >= 2", p.preset)));
        }
        let (basis, grades, order) = match (p.preset.as_str(), p.grading.as_str()) {
            ("sl", "none") => {
                let b = sl_chevalley(n);
                let len = b.len();
                (b, vec![0; len], 1)
            }
            ("sl", "cyclic") => {
                let b = sl_chevalley(n);
                let grades = sl_chevalley_cyclic_grades(n);
                (b, grades, n)
            }
            ("sl", "cartan_involution") => sl_cartan_involution(n),
            ("su", "none") => {
                let (b, _) = su_basis(n);
                let len = b.len();
                (b, vec![0; len], 1)
            }
            ("su", "cartan_involution") => {
                let (b, g) = su_basis(n);
                (b, g, 2)
            }
            ("so", "none") => {
                let (b, _) = so_basis(n);
                let len = b.len();
                (b, vec![0; len], 1)
            }
            ("so", "reflection") => {
                let (b, g) = so_basis(n);
                (b, g, 2)
            }
            ("sl" | "su" | "so", _) => return Err(unsupported()),
            (other, _) => return Err(Error::Validation(format!("unknown preset {other:?}"))),
        };
        let table = table_from_matrix_basis(&basis);
        let name = format!("{}({})", p.preset, n);
        Self::assemble(name, basis.len(), table, order, grades, None, spec)
    }

    fn assemble(
        name: String,
        dim: usize,
        table: Table,
        order: usize,
        grades: Vec<usize>,
        killing: Option<QMatrix>,
        spec: AlgebraSpec,
    ) -> Result<Self> {
        if grades.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: grades.len() });
        }
        if let Some(&g) = grades.iter().find(|&&g| g >= order) {
            return Err(Error::GradeOutOfRange { grade: g, order });
        }
        let mut alg = GradedLieAlgebra {
            name,
            dim,
            table,
            grading_order: order,
            grades,
            killing: QMatrix::zeros(dim, dim),
            spec,
        };
        alg.check_antisymmetry()?;
        alg.check_grading()?;
        alg.check_jacobi()?;
        alg.killing = match killing {
            Some(k) => {
                if k.rows() != dim || k.cols() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: k.rows() });
                }
                if k.transpose() != k {
                    return Err(Error::Validation("supplied invariant form is not symmetric".into()));
                }
                k
            }
            None => alg.compute_killing(),
        };
        alg.check_invariance()?;
        Ok(alg)
    }

    fn check_antisymmetry(&self) -> Result<()> {
        for a in 0..self.dim {
            for b in 0..self.dim {
                for (c, v) in self.bracket_basis(a, b) {
                    let mirror = self.structure_constant(b, a, *c);
                    if a == b || mirror != -v.clone() {
                        return Err(Error::AntisymmetryViolation { a, b, c: *c });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_grading(&self) -> Result<()> {
        let n = self.grading_order;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for (c, _) in self.bracket_basis(a, b) {
                    if self.grades[*c] != (self.grades[a] + self.grades[b]) % n {
                        return Err(Error::GradingNotClosed {
                            a,
                            b,
                            c: *c,
                            grade_a: self.grades[a],
                            grade_b: self.grades[b],
                            grade_c: self.grades[*c],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Exhaustive Jacobi check over basis triples; antisymmetry makes `a < b < c` sufficient.
    fn check_jacobi(&self) -> Result<()> {
        let dim = self.dim;
        for a in 0..dim {
            for b in a + 1..dim {
                for c in b + 1..dim {
                    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                        for (e, v) in self.bracket_basis(x, y) {
                            for (d, w) in self.bracket_basis(*e, z) {
                                *acc.entry(*d).or_insert_with(Rational::zero) += v * w;
                            }
                        }
                    }
                    if let Some((&d, _)) = acc.iter().find(|(_, v)| !v.is_zero()) {
                        return Err(Error::JacobiViolation { a, b, c, d });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_invariance(&self) -> Result<()> {
        let dim = self.dim;
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let mut s = Rational::zero();
                    for (e, v) in self.bracket_basis(a, b) {
                        s += v * &self.killing[(*e, c)];
                    }
                    for (e, v) in self.bracket_basis(a, c) {
                        s += v * &self.killing[(b, *e)];
                    }
                    if !s.is_zero() {
                        return Err(Error::FormNotInvariant { a, b, c });
                    }
                }
            }
        }
        Ok(())
    }

    /// `tr(ad_a ad_b) = Σ_{c,e} f^e_{ac} f^c_{be}`.
    fn compute_killing(&self) -> QMatrix {
        let dim = self.dim;
        let mut k = QMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in a..dim {
                let mut s = Rational::zero();
                for c in 0..dim {
                    for (e, v) in self.bracket_basis(a, c) {
                        for (c2, w) in self.bracket_basis(b, *e) {
                            if *c2 == c {
                                s += v * w;
                            }
                        }
                    }
                }
                k[(b, a)] = s.clone();
                k[(a, b)] = s;
            }
        }
        k
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grading_order(&self) -> usize {
        self.grading_order
    }

    pub fn grade_of(&self, basis_index: usize) -> usize {
        self.grades[basis_index]
    }

    pub fn grades(&self) -> &[usize] {
        &self.grades
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn killing(&self) -> &QMatrix {
        &self.killing
    }

    /// Basis indices spanning the grade-`k` component.
    pub fn basis_of_grade(&self, k: usize) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.grades[i] == k).collect()
    }

    /// Nonzero `f^c_{ab}` as `(c, value)` pairs.
    pub fn bracket_basis(&self, a: usize, b: usize) -> &[(usize, Rational)] {
        &self.table[a * self.dim + b]
    }

    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> Rational {
        self.bracket_basis(a, b).iter().find(|(k, _)| *k == c).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
    }

    /// All nonzero structure constants in `(a, b, c)` order.
    pub fn structure_constants(&self) -> Vec<StructureConstant> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in 0..self.dim {
                for (c, v) in self.bracket_basis(a, b) {
                    out.push(StructureConstant(a, b, *c, v.clone()));
                }
            }
        }
        out
    }

    /// Raw description equivalent to this algebra (same basis, same form).
    pub fn to_raw_spec(&self) -> RawSpec {
        RawSpec {
            dim: self.dim,
            f: self.structure_constants(),
            grades: Some(self.grades.clone()),
            order: Some(self.grading_order),
            killing: Some(self.killing.to_rows()),
        }
    }

    fn check_dim(&self, x: &AlgebraElement) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(AlgebraElement(self.bracket_coeffs(&x.0, &y.0)))
    }

    /// `z_c = Σ_{ab} f^c_{ab} x_a y_b` on raw coefficient slices.
    pub fn bracket_coeffs(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let mut z = vec![Rational::zero(); self.dim];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let entries = self.bracket_basis(a, b);
                if entries.is_empty() {
                    continue;
                }
                let xy = xa * yb;
                for (c, v) in entries {
                    z[*c] += v * &xy;
                }
            }
        }
        z
    }

    /// Floating bracket for the numeric cross-checks.
    pub fn bracket_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim];
        let table = self.table_f64();
        for (a, xa) in x.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            for (b, yb) in y.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                for (c, v) in &table[a * self.dim + b] {
                    z[*c] += v * xa * yb;
                }
            }
        }
        z
    }

    pub fn table_f64(&self) -> Vec<Vec<(usize, f64)>> {
        self.table.iter().map(|e| e.iter().map(|(c, v)| (*c, crate::rational::to_f64(v))).collect()).collect()
    }

    pub fn project_grade(&self, x: &AlgebraElement, k: usize) -> Result<AlgebraElement> {
        self.check_dim(x)?;
        if k >= self.grading_order {
            return Err(Error::GradeOutOfRange { grade: k, order: self.grading_order });
        }
        Ok(AlgebraElement(
            x.0.iter()
                .enumerate()
                .map(|(i, v)| if self.grades[i] == k { v.clone() } else { Rational::zero() })
                .collect(),
        ))
    }

    /// Diagonal 0/1 matrix projecting onto the grade-`k` component.
    pub fn grade_projector(&self, k: usize) -> QMatrix {
        QMatrix::diagonal(
            &self.grades.iter().map(|&g| if g == k { Rational::one() } else { Rational::zero() }).collect::<Vec<_>>(),
        )
    }

    pub fn killing_form(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<Rational> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(crate::linalg::dot(&x.0, &self.killing.apply(&y.0)))
    }

    /// Matrix of `ad_x` in the algebra basis.
    pub fn ad(&self, x: &AlgebraElement) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim, self.dim);
        for b in 0..self.dim {
            let col = self.bracket_coeffs(&x.0, &AlgebraElement::basis(self.dim, b).0);
            for (c, v) in col.into_iter().enumerate() {
                m[(c, b)] = v;
            }
        }
        m
    }

    /// Whether some pair of basis elements of grades `j` and `k` has a nonzero bracket.
    pub fn grade_pair_nonvanishing(&self, j: usize, k: usize) -> bool {
        let bj = self.basis_of_grade(j);
        let bk = self.basis_of_grade(k);
        bj.iter().any(|&a| bk.iter().any(|&b| !self.bracket_basis(a, b).is_empty()))
    }

    /// Transpose of `m` with respect to the invariant form: `K⁻¹ mᵀ K`.
    pub fn form_transpose(&self, m: &QMatrix) -> Result<QMatrix> {
        let kinv = self.killing.inverse().ok_or(Error::DegenerateForm)?;
        Ok(kinv.mul(&m.transpose()).mul(&self.killing))
    }
}

// ---------------------------------------------------------------------------
// Matrix bases for the presets. Complex matrices are (real, imaginary) pairs.

type CMat = (QMatrix, QMatrix);

fn unit(n: usize, i: usize, j: usize) -> QMatrix {
    let mut m = QMatrix::zeros(n, n);
    m[(i, j)] = Rational::one();
    m
}

fn real(m: QMatrix) -> CMat {
    let n = m.rows();
    (m, QMatrix::zeros(n, n))
}

fn imag(m: QMatrix) -> CMat {
    let n = m.rows();
    (QMatrix::zeros(n, n), m)
}

fn cartan(n: usize, k: usize) -> QMatrix {
    unit(n, k, k).sub(&unit(n, k + 1, k + 1))
}

/// Chevalley basis: `H_1..H_{n-1}`, then `E_ij` for `i < j`, then `E_ij` for `i > j`.
/// For `n = 2` this is `(H, E, F)`.
fn sl_chevalley(n: usize) -> Vec<CMat> {
    let mut basis: Vec<CMat> = (0..n - 1).map(|k| real(cartan(n, k))).collect();
    for i in 0..n {
        for j in i + 1..n {
            basis.push(real(unit(n, i, j)));
        }
    }
    for i in 0..n {
        for j in 0..i {
            basis.push(real(unit(n, i, j)));
        }
    }
    basis
}

/// Grade of `E_ij` is `(j - i) mod n`; the Cartan subalgebra has grade 0. This is the
/// eigen-decomposition of conjugation by `diag(1, ω, ..., ω^{n-1})`, the cyclic
/// automorphism written in a rational eigenbasis.
fn sl_chevalley_cyclic_grades(n: usize) -> Vec<usize> {
    let mut grades = vec![0; n - 1];
    for i in 0..n {
        for j in i + 1..n {
            grades.push((j + n - i) % n);
        }
    }
    for i in 0..n {
        for j in 0..i {
            grades.push((j + n - i) % n);
        }
    }
    grades
}

/// Eigenbasis of `θ(X) = -Xᵀ`: `E_ij - E_ji` (grade 0), then `H_k`, `E_ij + E_ji` (grade 1).
fn sl_cartan_involution(n: usize) -> (Vec<CMat>, Vec<usize>, usize) {
    let mut basis = Vec::new();
    let mut grades = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            basis.push(real(unit(n, i, j).sub(&unit(n, j, i))));
            grades.push(0);
        }
    }
    for k in 0..n - 1 {
        basis.push(real(cartan(n, k)));
        grades.push(1);
    }
    for i in 0..n {
        for j in i + 1..n {
            basis.push(real(unit(n, i, j).add(&unit(n, j, i))));
            grades.push(1);
        }
    }
    (basis, grades, 2)
}

/// Compact real form: `E_ij - E_ji`, then `i(E_ij + E_ji)`, then `i H_k`.
/// Grades refer to complex conjugation, whose fixed points are `so(n)`.
fn su_basis(n: usize) -> (Vec<CMat>, Vec<usize>) {
    let mut basis = Vec::new();
    let mut grades = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            basis.push(real(unit(n, i, j).sub(&unit(n, j, i))));
            grades.push(0);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            basis.push(imag(unit(n, i, j).add(&unit(n, j, i))));
            grades.push(1);
        }
    }
    for k in 0..n - 1 {
        basis.push(imag(cartan(n, k)));
        grades.push(1);
    }
    (basis, grades)
}

/// `E_ij - E_ji` for `i < j`; grades refer to conjugation by `diag(1, ..., 1, -1)`.
fn so_basis(n: usize) -> (Vec<CMat>, Vec<usize>) {
    let mut basis = Vec::new();
    let mut grades = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            basis.push(real(unit(n, i, j).sub(&unit(n, j, i))));
            grades.push(usize::from(j == n - 1));
        }
    }
    (basis, grades)
}

fn cmul(a: &CMat, b: &CMat) -> CMat {
    (a.0.mul(&b.0).sub(&a.1.mul(&b.1)), a.0.mul(&b.1).add(&a.1.mul(&b.0)))
}

fn flatten(m: &CMat) -> Vec<Rational> {
    let n = m.0.rows();
    let mut v = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        v.extend_from_slice(m.0.row(i));
    }
    for i in 0..n {
        v.extend_from_slice(m.1.row(i));
    }
    v
}

fn table_from_matrix_basis(basis: &[CMat]) -> Table {
    let dim = basis.len();
    let cols: Vec<Vec<Rational>> = basis.iter().map(flatten).collect();
    // Left inverse of the (2n² × dim) basis matrix.
    let b = QMatrix::from_rows(cols).transpose();
    let left_inv = b.pseudo_inverse();
    let mut table: Table = vec![Vec::new(); dim * dim];
    for a in 0..dim {
        for c in 0..dim {
            if a == c {
                continue;
            }
            let comm = {
                let ab = cmul(&basis[a], &basis[c]);
                let ba = cmul(&basis[c], &basis[a]);
                (ab.0.sub(&ba.0), ab.1.sub(&ba.1))
            };
            if comm.0.is_zero() && comm.1.is_zero() {
                continue;
            }
            let coords = left_inv.apply(&flatten(&comm));
            table[a * dim + c] = coords.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        }
    }
    table
}

fn double_plain(base: &GradedLieAlgebra) -> (usize, Table, usize, Vec<usize>) {
    let d = base.dim();
    let dim = 2 * d;
    let mut table: Table = vec![Vec::new(); dim * dim];
    for a in 0..d {
        for b in 0..d {
            let e = base.bracket_basis(a, b);
            table[a * dim + b] = e.to_vec();
            table[(a + d) * dim + (b + d)] = e.iter().map(|(c, v)| (c + d, v.clone())).collect();
        }
    }
    (dim, table, 1, vec![0; dim])
}

/// Basis `(e_i, e_i)` (grade 0) then `(e_i, -e_i)` (grade 1) for the exchange automorphism.
fn double_swap(base: &GradedLieAlgebra) -> (usize, Table, usize, Vec<usize>) {
    let d = base.dim();
    let dim = 2 * d;
    let mut table: Table = vec![Vec::new(); dim * dim];
    for a in 0..d {
        for b in 0..d {
            let e = base.bracket_basis(a, b);
            table[a * dim + b] = e.to_vec();
            table[a * dim + (b + d)] = e.iter().map(|(c, v)| (c + d, v.clone())).collect();
            table[(a + d) * dim + b] = e.iter().map(|(c, v)| (c + d, v.clone())).collect();
            table[(a + d) * dim + (b + d)] = e.to_vec();
        }
    }
    let grades = (0..dim).map(|i| usize::from(i >= d)).collect();
    (dim, table, 2, grades)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn sl2_chevalley_brackets() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        let (h, e, f) = (0, 1, 2);
        assert_eq!(g.bracket_basis(h, e), &[(e, q(2))]);
        assert_eq!(g.bracket_basis(h, f), &[(f, q(-2))]);
        assert_eq!(g.bracket_basis(e, f), &[(h, q(1))]);
        assert_eq!(g.killing()[(0, 0)], q(8));
        assert_eq!(g.killing()[(1, 2)], q(4));
    }

    #[test]
    fn project_grade_edge_cases() {
        let g = GradedLieAlgebra::sl(2, "cyclic").unwrap();
        let x = AlgebraElement::from_ints(&[1, 1, 0]);
        assert_eq!(g.project_grade(&x, 0).unwrap(), AlgebraElement::from_ints(&[1, 0, 0]));
        assert!(matches!(g.project_grade(&x, 2), Err(Error::GradeOutOfRange { .. })));
        let u = GradedLieAlgebra::sl(2, "none").unwrap();
        assert_eq!(u.project_grade(&x, 0).unwrap(), x);
    }

    #[test]
    fn cartan_involution_dimensions() {
        let g = GradedLieAlgebra::sl(2, "cartan_involution").unwrap();
        assert_eq!(g.basis_of_grade(0).len(), 1);
        assert_eq!(g.basis_of_grade(1).len(), 2);
        let g3 = GradedLieAlgebra::sl(3, "cartan_involution").unwrap();
        assert_eq!(g3.basis_of_grade(0).len(), 3);
        assert_eq!(g3.basis_of_grade(1).len(), 5);
    }

    #[test]
    fn antisymmetry_violation_is_reported() {
        let raw = RawSpec {
            dim: 3,
            f: vec![StructureConstant(1, 2, 3 - 1, q(1))],
            grades: None,
            order: None,
            killing: None,
        };
        let err = GradedLieAlgebra::build(&AlgebraSpec::Raw(raw)).unwrap_err();
        assert!(matches!(err, Error::AntisymmetryViolation { a: 1, b: 2, c: 2 }), "{err}");
    }

    #[test]
    fn dimension_mismatch() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        let err = g.bracket(&AlgebraElement::zero(3), &AlgebraElement::zero(4)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 4 }));
    }

    #[test]
    fn other_presets_build() {
        for spec in [
            AlgebraSpec::preset("su", 2, "none"),
            AlgebraSpec::preset("su", 3, "cartan_involution"),
            AlgebraSpec::preset("so", 4, "reflection"),
            AlgebraSpec::double(AlgebraSpec::preset("sl", 2, "none"), "swap"),
        ] {
            GradedLieAlgebra::build(&spec).unwrap();
        }
        assert!(matches!(
            GradedLieAlgebra::build(&AlgebraSpec::preset("su", 3, "cyclic")),
            Err(Error::UnsupportedGrading { .. })
        ));
    }
}
