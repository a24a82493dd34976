//! The quadratic integrability condition on `Σ±`, its constraint equations and
//! a structured verdict.
//!
//! For generators `T₁` (in the `J⁺` slot) and `T₂` (in the `J⁻` slot) write
//! `B = [T₁,T₂]`, `C = [Σ⁺T₁,T₂] + [T₁,Σ⁻T₂]` and
//! `Q = [Σ⁺²T₁,T₂] + 2[Σ⁺T₁,Σ⁻T₂] + [T₁,Σ⁻²T₂]`. The ± branch of the condition is
//!
//! `E±(Π) = (Γ∓ + Π)Σ±B − (Γ∓ + Π + Σ±)C + Q`,
//!
//! with `Γ∓ = DΣ∓D⁺ + Σ∓(1 − DD⁺)`, `D = Σ⁺ − Σ⁻` and `D⁺` its pseudo-inverse.
//! `E±` is affine in `Π`: `E±(Π) = E±(0) + Π Y±` with `Y± = Σ±B − C`.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::GradedLieAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix, RowSpace};
use crate::par::{self, Exec};
use crate::rational::{format_rational, serde_rational, serde_rational_matrix, serde_rational_vec, Rational};
use crate::sigma::{ChiralOperatorPair, ConstraintProjector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Integrable,
    IntegrableWithConstraints,
    NotIntegrable,
}

impl Verdict {
    pub fn is_integrable(self) -> bool {
        self != Verdict::NotIntegrable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Integrable => "integrable",
            Verdict::IntegrableWithConstraints => "integrable-with-constraints",
            Verdict::NotIntegrable => "not-integrable",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "both")]
    Both,
}

/// A grade pair `(j, k)`: `j` is the grade of the `J⁻` slot, `k` that of the `J⁺` slot.
/// A basis pair `(a, b)`: `T₁ = e_a`, `T₂ = e_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Position {
    Grades { j: usize, k: usize },
    Basis { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiScalar {
    /// Index into the projector list of the pair.
    pub projector: usize,
    pub grade: Option<usize>,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedTables {
    /// `Σ⁺₍ₖ₎ + Σ⁻₍ⱼ₎ − Σ⁺₍ⱼ₊ₖ₎`, indexed `[j][k]`.
    #[serde(with = "serde_rational_matrix")]
    pub factor_plus: Vec<Vec<Rational>>,
    /// `Σ⁺₍ₖ₎ + Σ⁻₍ⱼ₎ − Σ⁻₍ⱼ₊ₖ₎`, indexed `[j][k]`.
    #[serde(with = "serde_rational_matrix")]
    pub factor_minus: Vec<Vec<Rational>>,
    /// The condition at `Π = 0`; the elementwise product of the factor tables.
    #[serde(with = "serde_rational_matrix")]
    pub residual: Vec<Vec<Rational>>,
    /// The condition with the chosen kernel scalars.
    #[serde(with = "serde_rational_matrix")]
    pub residual_with_pi: Vec<Vec<Rational>>,
    /// Grade pairs whose bracket vanishes identically; excluded from the verdict.
    pub vacuous: Vec<Position>,
    pub kernel_grades: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairResidual {
    pub position: Position,
    pub branch: Branch,
    #[serde(with = "serde_rational_vec")]
    pub at_zero: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub with_pi: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Residuals {
    Graded(GradedTables),
    /// Nonzero residuals only.
    General { pairs: Vec<PairResidual> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegrabilityReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_branch: Option<Branch>,
    pub residuals: Residuals,
    pub constraint_positions: Vec<Position>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen_pi: Option<Vec<PiScalar>>,
    /// `Σ⁺` and `Σ⁻` do not commute while `Σ⁺ − Σ⁻` is singular.
    pub singular_noncommuting: bool,
}

impl IntegrabilityReport {
    /// Kernel combination `Σ pᵢ Πᵢ` realised by the chosen scalars.
    pub fn chosen_pi_matrix(&self, projectors: &[ConstraintProjector], dim: usize) -> QMatrix {
        let mut m = QMatrix::zeros(dim, dim);
        for s in self.chosen_pi.iter().flatten() {
            m = m.add(&projectors[s.projector].pi.scale(&s.value));
        }
        m
    }
}

fn singular_noncommuting(pair: &ChiralOperatorPair) -> bool {
    !pair.commutes() && pair.difference().rank() < pair.dim()
}

// ---------------------------------------------------------------------------
// Graded path

/// Evaluates the condition on the per-grade eigenvalue tables.
pub fn check_graded(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair) -> Result<IntegrabilityReport> {
    let (sp, sm) = pair.eigenvalues().ok_or(Error::NotGradingDiagonal)?;
    let n = alg.grading_order();
    let kernel: Vec<bool> = (0..n).map(|g| sp[g] == sm[g]).collect();
    let zero_table = || vec![vec![Rational::zero(); n]; n];
    let (mut fp, mut fm, mut res) = (zero_table(), zero_table(), zero_table());
    let mut vacuous = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let g = (j + k) % n;
            let c = &sp[k] + &sm[j];
            fp[j][k] = &c - &sp[g];
            fm[j][k] = &c - &sm[g];
            res[j][k] = &fp[j][k] * &fm[j][k];
            if !alg.grade_pair_nonvanishing(k, j) {
                vacuous.push(Position::Grades { j, k });
            }
        }
    }
    let live = |j: usize, k: usize| !vacuous.contains(&Position::Grades { j, k });

    // Kernel grade g: residual F(F − π_g) forces π_g = F wherever F ≠ 0.
    let mut pis: Vec<Option<Rational>> = vec![None; n];
    let mut consistent = true;
    for j in 0..n {
        for k in 0..n {
            let g = (j + k) % n;
            if !live(j, k) || res[j][k].is_zero() {
                continue;
            }
            if !kernel[g] {
                consistent = false;
                continue;
            }
            match &pis[g] {
                None => pis[g] = Some(fp[j][k].clone()),
                Some(p) if *p != fp[j][k] => consistent = false,
                Some(_) => {}
            }
        }
    }
    let mut with_pi = zero_table();
    let mut constraint_positions = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let g = (j + k) % n;
            with_pi[j][k] = match (&pis[g], kernel[g]) {
                (Some(p), true) => &fp[j][k] * (&fp[j][k] - p),
                _ => res[j][k].clone(),
            };
            if live(j, k) && !res[j][k].is_zero() && kernel[g] {
                constraint_positions.push(Position::Grades { j, k });
            }
        }
    }
    let any_residual = (0..n).any(|j| (0..n).any(|k| live(j, k) && !res[j][k].is_zero()));
    let verdict = if !any_residual {
        Verdict::Integrable
    } else if consistent {
        Verdict::IntegrableWithConstraints
    } else {
        Verdict::NotIntegrable
    };
    let kernel_grades: Vec<usize> = (0..n).filter(|&g| kernel[g]).collect();
    let chosen_pi = (verdict == Verdict::IntegrableWithConstraints).then(|| {
        kernel_grades
            .iter()
            .enumerate()
            .map(|(i, &g)| PiScalar { projector: i, grade: Some(g), value: pis[g].clone().unwrap_or_else(Rational::zero) })
            .collect()
    });
    if verdict == Verdict::NotIntegrable {
        constraint_positions.clear();
    }
    Ok(IntegrabilityReport {
        verdict,
        failing_branch: (verdict == Verdict::NotIntegrable).then_some(Branch::Both),
        residuals: Residuals::Graded(GradedTables {
            factor_plus: fp,
            factor_minus: fm,
            residual: res,
            residual_with_pi: with_pi,
            vacuous,
            kernel_grades,
        }),
        constraint_positions,
        chosen_pi,
        singular_noncommuting: singular_noncommuting(pair),
    })
}

// ---------------------------------------------------------------------------
// General path

/// The operators entering the expanded condition, computed once per pair.
#[derive(Clone, Debug)]
pub struct ConditionOperators {
    pub sigma_plus: QMatrix,
    pub sigma_minus: QMatrix,
    pub sigma_plus_sq: QMatrix,
    pub sigma_minus_sq: QMatrix,
    /// `Γ⁻`, used by the + branch.
    pub gamma_for_plus: QMatrix,
    /// `Γ⁺`, used by the − branch.
    pub gamma_for_minus: QMatrix,
}

impl ConditionOperators {
    pub fn new(pair: &ChiralOperatorPair) -> Self {
        let sp = pair.sigma_plus().clone();
        let sm = pair.sigma_minus().clone();
        let d = pair.difference();
        let dp = d.pseudo_inverse();
        let coimage = QMatrix::identity(pair.dim()).sub(&d.mul(&dp));
        let gamma = |s: &QMatrix| d.mul(s).mul(&dp).add(&s.mul(&coimage));
        ConditionOperators {
            gamma_for_plus: gamma(&sm),
            gamma_for_minus: gamma(&sp),
            sigma_plus_sq: sp.mul(&sp),
            sigma_minus_sq: sm.mul(&sm),
            sigma_plus: sp,
            sigma_minus: sm,
        }
    }
}

/// Bracket data of one generator pair.
#[derive(Clone, Debug)]
pub struct PairTerms {
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub q: Vec<Rational>,
    pub y_plus: Vec<Rational>,
    pub y_minus: Vec<Rational>,
    pub e_plus: Vec<Rational>,
    pub e_minus: Vec<Rational>,
}

fn axpy(acc: &mut [Rational], s: &Rational, x: &[Rational]) {
    for (a, v) in acc.iter_mut().zip(x) {
        if !v.is_zero() {
            *a += s * v;
        }
    }
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn pair_terms(alg: &GradedLieAlgebra, ops: &ConditionOperators, t1: &[Rational], t2: &[Rational]) -> PairTerms {
    let br = |x: &[Rational], y: &[Rational]| alg.bracket_coeffs(x, y);
    let p1 = ops.sigma_plus.apply(t1);
    let m2 = ops.sigma_minus.apply(t2);
    let b = br(t1, t2);
    let mut c = br(&p1, t2);
    axpy(&mut c, &Rational::from_integer(1.into()), &br(t1, &m2));
    let mut q = br(&ops.sigma_plus_sq.apply(t1), t2);
    axpy(&mut q, &Rational::from_integer(2.into()), &br(&p1, &m2));
    axpy(&mut q, &Rational::from_integer(1.into()), &br(t1, &ops.sigma_minus_sq.apply(t2)));
    let y_plus = sub(&ops.sigma_plus.apply(&b), &c);
    let y_minus = sub(&ops.sigma_minus.apply(&b), &c);
    let branch = |gamma: &QMatrix, sigma: &QMatrix, y: &[Rational]| {
        let mut e = gamma.apply(y);
        axpy(&mut e, &Rational::from_integer((-1).into()), &sigma.apply(&c));
        axpy(&mut e, &Rational::from_integer(1.into()), &q);
        e
    };
    let e_plus = branch(&ops.gamma_for_plus, &ops.sigma_plus, &y_plus);
    let e_minus = branch(&ops.gamma_for_minus, &ops.sigma_minus, &y_minus);
    PairTerms { b, c, q, y_plus, y_minus, e_plus, e_minus }
}

fn basis_pairs(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|a| (0..dim).map(move |b| (a, b))).collect()
}

fn unit(dim: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[i] = Rational::from_integer(1.into());
    v
}

struct PairOutcome {
    a: usize,
    b: usize,
    terms: PairTerms,
    /// `Πᵢ Y` for every projector (equal on both branches).
    pi_y: Vec<Vec<Rational>>,
}

/// Accumulates `Σ pᵢ (Πᵢ Y)_c + E_c = 0` rows as `[coeffs | E_c]`.
fn push_rows(space: &mut RowSpace, e: &[Rational], pi_y: &[Vec<Rational>]) {
    for c in 0..e.len() {
        if e[c].is_zero() && pi_y.iter().all(|v| v[c].is_zero()) {
            continue;
        }
        let mut row: Vec<Rational> = pi_y.iter().map(|v| v[c].clone()).collect();
        row.push(e[c].clone());
        space.insert(&row);
    }
}

fn solve_space(space: &RowSpace, m: usize) -> Option<Vec<Rational>> {
    if space.contains(&unit(m + 1, m)) {
        return None;
    }
    if m == 0 {
        return Some(Vec::new());
    }
    let rows: Vec<Vec<Rational>> = space.basis().map(|r| r[..m].to_vec()).collect();
    let rhs: Vec<Rational> = space.basis().map(|r| -r[m].clone()).collect();
    if rows.is_empty() {
        return Some(vec![Rational::zero(); m]);
    }
    linalg::solve(&QMatrix::from_rows(rows), &rhs)
}

/// Evaluates the expanded condition on every basis pair and solves exactly for
/// the projector scalars.
pub fn check_general(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair, exec: Exec) -> Result<IntegrabilityReport> {
    let dim = alg.dim();
    if pair.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: pair.dim() });
    }
    let ops = ConditionOperators::new(pair);
    let projectors = pair.find_constraint_projectors(alg);
    let m = projectors.len();
    let outcomes: Vec<PairOutcome> = par::map(exec, &basis_pairs(dim), |&(a, b)| {
        let terms = pair_terms(alg, &ops, &unit(dim, a), &unit(dim, b));
        let pi_y = projectors.iter().map(|p| p.pi.apply(&terms.y_plus)).collect();
        PairOutcome { a, b, terms, pi_y }
    });

    let mut plus = RowSpace::new(m + 1);
    let mut minus = RowSpace::new(m + 1);
    let mut joint = RowSpace::new(m + 1);
    for o in &outcomes {
        push_rows(&mut plus, &o.terms.e_plus, &o.pi_y);
        push_rows(&mut minus, &o.terms.e_minus, &o.pi_y);
    }
    for r in plus.basis().chain(minus.basis()) {
        joint.insert(r);
    }
    let any_residual = outcomes.iter().any(|o| !linalg::vec_is_zero(&o.terms.e_plus) || !linalg::vec_is_zero(&o.terms.e_minus));
    let solution = solve_space(&joint, m);
    let verdict = match (&solution, any_residual) {
        (_, false) => Verdict::Integrable,
        (Some(_), true) => Verdict::IntegrableWithConstraints,
        (None, true) => Verdict::NotIntegrable,
    };
    let failing_branch = (verdict == Verdict::NotIntegrable).then(|| {
        match (solve_space(&plus, m).is_some(), solve_space(&minus, m).is_some()) {
            (true, false) => Branch::Minus,
            (false, true) => Branch::Plus,
            _ => Branch::Both,
        }
    });
    let scalars = match (&solution, verdict) {
        (Some(p), Verdict::IntegrableWithConstraints) => p.clone(),
        _ => vec![Rational::zero(); m],
    };

    let mut pairs = Vec::new();
    let mut constraint_positions = Vec::new();
    for o in &outcomes {
        let mut correction = vec![Rational::zero(); dim];
        for (p, v) in scalars.iter().zip(&o.pi_y) {
            if !p.is_zero() {
                axpy(&mut correction, p, v);
            }
        }
        let position = Position::Basis { a: o.a, b: o.b };
        if verdict == Verdict::IntegrableWithConstraints && !linalg::vec_is_zero(&correction) {
            constraint_positions.push(position);
        }
        for (branch, e) in [(Branch::Plus, &o.terms.e_plus), (Branch::Minus, &o.terms.e_minus)] {
            if linalg::vec_is_zero(e) {
                continue;
            }
            let with_pi: Vec<Rational> = e.iter().zip(&correction).map(|(x, y)| x + y).collect();
            pairs.push(PairResidual { position, branch, at_zero: e.clone(), with_pi });
        }
    }
    let chosen_pi = (verdict == Verdict::IntegrableWithConstraints).then(|| {
        scalars
            .into_iter()
            .enumerate()
            .map(|(i, value)| PiScalar { projector: i, grade: projectors[i].grade, value })
            .collect()
    });
    Ok(IntegrabilityReport {
        verdict,
        failing_branch,
        residuals: Residuals::General { pairs },
        constraint_positions,
        chosen_pi,
        singular_noncommuting: singular_noncommuting(pair),
    })
}

/// Graded path when the pair allows it, general path otherwise.
pub fn check(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair, exec: Exec) -> Result<IntegrabilityReport> {
    match pair.eigenvalues() {
        Some(_) => check_graded(alg, pair),
        None => check_general(alg, pair, exec),
    }
}

/// Residuals of both branches for a fixed kernel map `Π`, keyed by basis pair.
/// Only nonzero entries are returned.
pub fn residuals_for_pi(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair, pi: &QMatrix, exec: Exec) -> Vec<PairResidual> {
    let dim = alg.dim();
    let ops = ConditionOperators::new(pair);
    let per_pair = par::map(exec, &basis_pairs(dim), |&(a, b)| {
        let t = pair_terms(alg, &ops, &unit(dim, a), &unit(dim, b));
        let corr = pi.apply(&t.y_plus);
        let mut out = Vec::new();
        for (branch, e) in [(Branch::Plus, t.e_plus), (Branch::Minus, t.e_minus)] {
            let with_pi: Vec<Rational> = e.iter().zip(&corr).map(|(x, y)| x + y).collect();
            if !linalg::vec_is_zero(&with_pi) {
                out.push(PairResidual { position: Position::Basis { a, b }, branch, at_zero: e, with_pi });
            }
        }
        out
    });
    per_pair.into_iter().flatten().collect()
}

// ---------------------------------------------------------------------------
// Constraints and equations of motion

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintDescriptor {
    pub projector: usize,
    pub grade: Option<usize>,
    pub position: Position,
    /// `Π(Σ±₀ − Σ⁺₁ − Σ⁻₂)[T₁,T₂]`; a single scalar for graded pairs.
    #[serde(with = "serde_rational_vec")]
    pub value: Vec<Rational>,
    pub nonzero: bool,
    pub label: String,
}

/// Constraint expressions for each projector. Graded pairs emit every grade pair;
/// general pairs emit only nonzero basis pairs.
pub fn derive_constraints(
    alg: &GradedLieAlgebra,
    pair: &ChiralOperatorPair,
    projectors: &[ConstraintProjector],
) -> Vec<ConstraintDescriptor> {
    let mut out = Vec::new();
    if let Some((sp, sm)) = pair.eigenvalues() {
        let n = alg.grading_order();
        let graded_proj: Option<Vec<usize>> = projectors.iter().map(|p| p.grade).collect();
        if let Some(grades) = graded_proj {
            for (i, &g) in grades.iter().enumerate() {
                for (j, smj) in sm.iter().enumerate() {
                    for k in 0..n {
                        let value = if (j + k) % n == g { &sp[g] - &sp[k] - smj } else { Rational::zero() };
                        let nonzero = !value.is_zero();
                        out.push(ConstraintDescriptor {
                            projector: i,
                            grade: Some(g),
                            position: Position::Grades { j, k },
                            label: format!("Π^{g} [J+_({k}), J-_({j})] x {}", format_rational(&value)),
                            value: vec![value],
                            nonzero,
                        });
                    }
                }
            }
            return out;
        }
    }
    let dim = alg.dim();
    let ops = ConditionOperators::new(pair);
    for a in 0..dim {
        for b in 0..dim {
            let t = pair_terms(alg, &ops, &unit(dim, a), &unit(dim, b));
            for (i, p) in projectors.iter().enumerate() {
                let value = p.pi.apply(&t.y_plus);
                if linalg::vec_is_zero(&value) {
                    continue;
                }
                out.push(ConstraintDescriptor {
                    projector: i,
                    grade: p.grade,
                    position: Position::Basis { a, b },
                    label: format!("Π_{i} [Σ-part of T+_{a}, T-_{b}]"),
                    value,
                    nonzero: true,
                });
            }
        }
    }
    out
}

/// One term `coefficient · [J⁺_(k), J⁻_(j)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketTerm {
    #[serde(with = "serde_rational")]
    pub coefficient: Rational,
    pub k: usize,
    pub j: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationKind {
    /// `dJ_(g) + Σ terms = 0` on a kernel grade.
    MaurerCartan,
    /// `dJ⁺_(g) + Σ terms = 0`.
    PlusDerivative,
    /// `dJ⁻_(g) + Σ terms = 0`.
    MinusDerivative,
    /// `Σ terms = 0` with no derivative.
    Constraint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedEquation {
    pub kind: EquationKind,
    pub grade: usize,
    pub terms: Vec<BracketTerm>,
}

impl fmt::Display for GradedEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.grade;
        let head = match self.kind {
            EquationKind::MaurerCartan => format!("dJ_({g})"),
            EquationKind::PlusDerivative => format!("dJ+_({g})"),
            EquationKind::MinusDerivative => format!("dJ-_({g})"),
            EquationKind::Constraint => String::new(),
        };
        let mut s = head;
        for t in &self.terms {
            let c = format_rational(&t.coefficient);
            let body = format!("[J+_({}), J-_({})]", t.k, t.j);
            let (sign, mag) = match c.strip_prefix('-') {
                Some(m) => ("-", m.to_string()),
                None => ("+", c),
            };
            let coef = if mag == "1" { String::new() } else { format!("{mag} ") };
            if s.is_empty() {
                s = format!("{}{coef}{body}", if sign == "-" { "-" } else { "" });
            } else {
                s = format!("{s} {sign} {coef}{body}");
            }
        }
        if s.is_empty() {
            s = "0".into();
        }
        write!(f, "{s} = 0")
    }
}

/// The first-order equation `Σ⁺dJ⁺ + Σ⁻dJ⁻ + [Σ⁺J⁺,J⁻] + [J⁺,Σ⁻J⁻] = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EomDescriptor {
    /// Coefficient operator of `dJ⁺`.
    #[serde(with = "serde_rational_matrix")]
    pub dj_plus: Vec<Vec<Rational>>,
    /// Coefficient operator of `dJ⁻`.
    #[serde(with = "serde_rational_matrix")]
    pub dj_minus: Vec<Vec<Rational>>,
    /// Operators acting on `J⁺` and `J⁻` inside the bracket terms.
    #[serde(with = "serde_rational_matrix")]
    pub bracket_left: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational_matrix")]
    pub bracket_right: Vec<Vec<Rational>>,
    /// Per-grade chiral equations after combining with the Maurer–Cartan equation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graded: Option<Vec<GradedEquation>>,
}

pub fn eom_descriptor(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair) -> EomDescriptor {
    let graded = pair.eigenvalues().map(|(sp, sm)| {
        let n = alg.grading_order();
        let mut eqs = Vec::new();
        for g in 0..n {
            let contributing: Vec<(usize, usize)> = (0..n)
                .flat_map(|k| (0..n).map(move |j| (k, j)))
                .filter(|&(k, j)| (j + k) % n == g && alg.grade_pair_nonvanishing(k, j))
                .collect();
            let terms_with = |f: &dyn Fn(&Rational) -> Rational| -> Vec<BracketTerm> {
                contributing
                    .iter()
                    .filter_map(|&(k, j)| {
                        let coefficient = f(&(&sp[k] + &sm[j]));
                        (!coefficient.is_zero()).then_some(BracketTerm { coefficient, k, j })
                    })
                    .collect()
            };
            if sp[g] == sm[g] {
                let one = Rational::from_integer(1.into());
                eqs.push(GradedEquation { kind: EquationKind::MaurerCartan, grade: g, terms: terms_with(&|_| one.clone()) });
                let constraint = terms_with(&|c| c - &sp[g]);
                if !constraint.is_empty() {
                    eqs.push(GradedEquation { kind: EquationKind::Constraint, grade: g, terms: constraint });
                }
            } else {
                let d = &sp[g] - &sm[g];
                eqs.push(GradedEquation {
                    kind: EquationKind::PlusDerivative,
                    grade: g,
                    terms: terms_with(&|c| (c - &sm[g]) / &d),
                });
                eqs.push(GradedEquation {
                    kind: EquationKind::MinusDerivative,
                    grade: g,
                    terms: terms_with(&|c| (&sp[g] - c) / &d),
                });
            }
        }
        eqs
    });
    EomDescriptor {
        dj_plus: pair.sigma_plus().to_rows(),
        dj_minus: pair.sigma_minus().to_rows(),
        bracket_left: pair.sigma_plus().to_rows(),
        bracket_right: pair.sigma_minus().to_rows(),
        graded,
    }
}
