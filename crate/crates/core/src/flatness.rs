//! Order-by-order flatness of `A(λ)` with the derivative terms eliminated.
//!
//! Everything here is bilinear in the generator pair `(t₁, t₂)` standing for
//! `(J⁺, J⁻)`. A residual at order `n` is therefore one bilinear form per
//! output component, i.e. a vector over the `dim²` basis pairs. Constraints are
//! the bilinear forms `w·Y(t₁,t₂)` for rows `w` of the projectors; a residual
//! vanishes modulo constraints when each of its forms lies in their span.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::GradedLieAlgebra;
use crate::error::{Error, Result};
use crate::integrability::Position;
use crate::linalg::{self, QMatrix, RowSpace};
use crate::numeric;
use crate::par::{self, Exec};
use crate::rational::{serde_rational_vec, Rational};
use crate::sigma::{ChiralOperatorPair, ConstraintProjector};

pub const DEFAULT_SEED: u64 = 0x5eed_1a75;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeSolution {
    pub dj_plus: Vec<Rational>,
    pub dj_minus: Vec<Rational>,
    /// The pair sits at a constraint position: some `Π Y` is nonzero.
    pub constrained: bool,
}

/// Precomputed operators shared by all pairs.
#[derive(Clone, Debug)]
pub struct FlatnessContext {
    sigma_plus: QMatrix,
    sigma_minus: QMatrix,
    pinv: QMatrix,
    left_null: Vec<Vec<Rational>>,
    covered: RowSpace,
    projector_rows: Vec<Vec<Rational>>,
}

impl FlatnessContext {
    pub fn new(pair: &ChiralOperatorPair, projectors: &[ConstraintProjector]) -> Self {
        let d = pair.difference();
        let dim = pair.dim();
        let mut covered = RowSpace::new(dim);
        let mut projector_rows = Vec::new();
        for p in projectors {
            for i in 0..dim {
                let r = p.pi.row(i);
                if !linalg::vec_is_zero(r) && covered.insert(r) {
                    projector_rows.push(r.to_vec());
                }
            }
        }
        FlatnessContext {
            sigma_plus: pair.sigma_plus().clone(),
            sigma_minus: pair.sigma_minus().clone(),
            pinv: d.pseudo_inverse(),
            left_null: d.left_nullspace(),
            covered,
            projector_rows,
        }
    }
}

fn first_nonzero(v: &[Rational]) -> usize {
    v.iter().position(|x| !x.is_zero()).unwrap_or(0)
}

/// `dJ⁺ = D⁺(Σ⁻B − C)`, `dJ⁻ = −B − dJ⁺` with `B = [t₁,t₂]`, `C = [Σ⁺t₁,t₂] + [t₁,Σ⁻t₂]`.
pub fn solve_dj(alg: &GradedLieAlgebra, ctx: &FlatnessContext, t1: &[Rational], t2: &[Rational]) -> Result<DerivativeSolution> {
    let b = alg.bracket_coeffs(t1, t2);
    let mut c = alg.bracket_coeffs(&ctx.sigma_plus.apply(t1), t2);
    for (x, y) in c.iter_mut().zip(alg.bracket_coeffs(t1, &ctx.sigma_minus.apply(t2))) {
        *x += y;
    }
    let y: Vec<Rational> = ctx.sigma_minus.apply(&b).into_iter().zip(&c).map(|(s, c)| s - c).collect();
    let mut constrained = false;
    for n in &ctx.left_null {
        if linalg::dot(n, &y).is_zero() {
            continue;
        }
        if !ctx.covered.contains(n) {
            return Err(Error::UnresolvedKernelComponent { a: first_nonzero(t1), b: first_nonzero(t2) });
        }
        constrained = true;
    }
    let dj_plus = ctx.pinv.apply(&y);
    let dj_minus = b.iter().zip(&dj_plus).map(|(b, x)| -b - x).collect();
    Ok(DerivativeSolution { dj_plus, dj_minus, constrained })
}

fn unit(dim: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[i] = Rational::from_integer(1.into());
    v
}

fn basis_pairs(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|a| (0..dim).map(move |b| (a, b))).collect()
}

fn taylor_powers(m: &QMatrix, order: usize) -> Vec<QMatrix> {
    let mut out = vec![QMatrix::identity(m.rows())];
    for k in 1..=order {
        let next = out[k - 1].mul(m).scale(&Rational::new(1.into(), (k as i64).into()));
        out.push(next);
    }
    out
}

/// λⁿ coefficients, `n = 0..=order`, of
/// `e^{λΣ⁺}dJ⁺ + e^{λΣ⁻}dJ⁻ + [e^{λΣ⁺}t₁, e^{λΣ⁻}t₂]` for every basis pair,
/// in row-major pair order.
pub fn series_coefficients(
    alg: &GradedLieAlgebra,
    pair: &ChiralOperatorPair,
    projectors: &[ConstraintProjector],
    order: usize,
    exec: Exec,
) -> Result<Vec<Vec<Vec<Rational>>>> {
    let dim = alg.dim();
    let ctx = FlatnessContext::new(pair, projectors);
    let pp = taylor_powers(pair.sigma_plus(), order);
    let pm = taylor_powers(pair.sigma_minus(), order);
    let per_pair = par::map(exec, &basis_pairs(dim), |&(a, b)| -> Result<Vec<Vec<Rational>>> {
        let sol = solve_dj(alg, &ctx, &unit(dim, a), &unit(dim, b))?;
        let ta: Vec<Vec<Rational>> = pp.iter().map(|m| m.column(a)).collect();
        let tb: Vec<Vec<Rational>> = pm.iter().map(|m| m.column(b)).collect();
        let mut orders = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut f: Vec<Rational> =
                pp[n].apply(&sol.dj_plus).into_iter().zip(pm[n].apply(&sol.dj_minus)).map(|(x, y)| x + y).collect();
            for m in 0..=n {
                for (acc, v) in f.iter_mut().zip(alg.bracket_coeffs(&ta[m], &tb[n - m])) {
                    *acc += v;
                }
            }
            orders.push(f);
        }
        Ok(orders)
    });
    per_pair.into_iter().collect()
}

/// Span of the constraint forms `w·Y(e_a, e_b)` over pair space.
pub fn constraint_space(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair, projectors: &[ConstraintProjector]) -> RowSpace {
    let dim = alg.dim();
    let ctx = FlatnessContext::new(pair, projectors);
    let mut space = RowSpace::new(dim * dim);
    if ctx.projector_rows.is_empty() {
        return space;
    }
    let ys: Vec<Vec<Rational>> = basis_pairs(dim)
        .into_iter()
        .map(|(a, b)| {
            let (t1, t2) = (unit(dim, a), unit(dim, b));
            let bb = alg.bracket_coeffs(&t1, &t2);
            let mut c = alg.bracket_coeffs(&ctx.sigma_plus.apply(&t1), &t2);
            for (x, y) in c.iter_mut().zip(alg.bracket_coeffs(&t1, &ctx.sigma_minus.apply(&t2))) {
                *x += y;
            }
            ctx.sigma_minus.apply(&bb).into_iter().zip(&c).map(|(s, c)| s - c).collect()
        })
        .collect();
    for w in &ctx.projector_rows {
        let form: Vec<Rational> = ys.iter().map(|y| linalg::dot(w, y)).collect();
        if !linalg::vec_is_zero(&form) {
            space.insert(&form);
        }
    }
    space
}

/// Reduces per-pair residual vectors modulo the constraint forms. Input and
/// output are indexed `[pair][component]`.
pub fn reduce_modulo(space: &RowSpace, per_pair: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); dim]; per_pair.len()];
    for c in 0..dim {
        let form: Vec<Rational> = per_pair.iter().map(|v| v[c].clone()).collect();
        if linalg::vec_is_zero(&form) {
            continue;
        }
        let reduced = if space.dim() == 0 { form } else { space.reduce(&form) };
        for (p, v) in reduced.into_iter().enumerate() {
            out[p][c] = v;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesResidual {
    pub order: usize,
    pub position: Position,
    #[serde(with = "serde_rational_vec")]
    pub value: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessSeriesReport {
    pub orders_checked: usize,
    /// Nonzero residuals after reduction, by order.
    pub residuals: Vec<SeriesResidual>,
    pub modulo_constraints: bool,
    pub constraint_forms: usize,
    pub first_nonzero_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_float_residual: Option<f64>,
}

impl FlatnessSeriesReport {
    pub fn is_flat(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn residuals_at(&self, order: usize) -> impl Iterator<Item = &SeriesResidual> {
        self.residuals.iter().filter(move |r| r.order == order)
    }
}

/// Checks every λⁿ coefficient, `n = 0..=order`, on all basis pairs.
pub fn flatness_series(
    alg: &GradedLieAlgebra,
    pair: &ChiralOperatorPair,
    projectors: &[ConstraintProjector],
    order: usize,
    exec: Exec,
) -> Result<FlatnessSeriesReport> {
    if order < 2 {
        return Err(Error::Validation("flatness series needs order >= 2".into()));
    }
    let dim = alg.dim();
    let coeffs = series_coefficients(alg, pair, projectors, order, exec)?;
    let space = constraint_space(alg, pair, projectors);
    let pairs = basis_pairs(dim);
    let per_order: Vec<Vec<SeriesResidual>> = par::map(exec, &(0..=order).collect::<Vec<_>>(), |&n| {
        let raw: Vec<Vec<Rational>> = coeffs.iter().map(|o| o[n].clone()).collect();
        let reduced = reduce_modulo(&space, &raw, dim);
        reduced
            .into_iter()
            .zip(&pairs)
            .filter(|(v, _)| !linalg::vec_is_zero(v))
            .map(|(value, &(a, b))| SeriesResidual { order: n, position: Position::Basis { a, b }, value })
            .collect()
    });
    let residuals: Vec<SeriesResidual> = per_order.into_iter().flatten().collect();
    let first_nonzero_order = residuals.first().map(|r| r.order);
    Ok(FlatnessSeriesReport {
        orders_checked: order,
        residuals,
        modulo_constraints: !projectors.is_empty(),
        constraint_forms: space.dim(),
        first_nonzero_order,
        max_float_residual: None,
    })
}

// ---------------------------------------------------------------------------
// Floating cross-check

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericFlatnessReport {
    pub seed: u64,
    pub trials: usize,
    pub lambdas: Vec<f64>,
    /// Largest relative residual per λ sample.
    pub per_lambda: Vec<f64>,
    pub max_residual: f64,
}

struct FloatModel {
    dim: usize,
    table: Vec<Vec<(usize, f64)>>,
    sp: DMatrix<f64>,
    sm: DMatrix<f64>,
    pinv: DMatrix<f64>,
    /// Orthonormal basis (columns) of the constraint forms in pair space.
    constraints: Option<DMatrix<f64>>,
}

impl FloatModel {
    /// `Σ_ab V_ab [e_a, e_b]`.
    fn bracket_tensor(&self, v: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let x = v[(a, b)];
                if x == 0.0 {
                    continue;
                }
                for (c, f) in &self.table[a * self.dim + b] {
                    out[*c] += f * x;
                }
            }
        }
        out
    }

    fn project(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let Some(q) = &self.constraints else { return v.clone() };
        let flat = DVector::from_iterator(self.dim * self.dim, (0..self.dim).flat_map(|a| (0..self.dim).map(move |b| v[(a, b)])));
        let proj = &flat - q * (q.transpose() * &flat);
        DMatrix::from_fn(self.dim, self.dim, |a, b| proj[a * self.dim + b])
    }

    /// Relative flatness residual at λ for the pair tensor `v`.
    fn residual(&self, v: &DMatrix<f64>, ep: &DMatrix<f64>, em: &DMatrix<f64>) -> f64 {
        let b = self.bracket_tensor(v);
        let c = self.bracket_tensor(&(&self.sp * v + v * self.sm.transpose()));
        let y = &self.sm * &b - c;
        let x = &self.pinv * y;
        let djm = -&b - &x;
        let t1 = ep * x;
        let t2 = em * djm;
        let t3 = self.bracket_tensor(&(ep * v * em.transpose()));
        let total = &t1 + &t2 + &t3;
        let scale = t1.amax().max(t2.amax()).max(t3.amax());
        total.amax() / (1.0 + scale)
    }
}

fn orthonormal_columns(space: &RowSpace) -> Option<DMatrix<f64>> {
    if space.dim() == 0 {
        return None;
    }
    let width = space.width();
    let rows: Vec<Vec<f64>> = space.basis().map(|r| r.iter().map(crate::rational::to_f64).collect()).collect();
    let m = DMatrix::from_fn(width, rows.len(), |i, j| rows[j][i]);
    Some(m.qr().q())
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    let v = DVector::from_fn(dim, |_, _| {
        let p: i64 = rng.gen_range(-9..=9);
        let q: i64 = rng.gen_range(1..=9);
        p as f64 / q as f64
    });
    let n = v.norm();
    if n == 0.0 {
        let mut e = DVector::zeros(dim);
        e[0] = 1.0;
        e
    } else {
        v / n
    }
}

/// Evaluates the exponential flatness expression with dense matrix
/// exponentials on random unit-norm rational inputs, after projecting the pair
/// tensor orthogonally to the constraint forms.
pub fn flatness_numeric(
    alg: &GradedLieAlgebra,
    pair: &ChiralOperatorPair,
    projectors: &[ConstraintProjector],
    lambdas: &[f64],
    trials: usize,
    seed: u64,
    exec: Exec,
) -> NumericFlatnessReport {
    let dim = alg.dim();
    let model = FloatModel {
        dim,
        table: alg.table_f64(),
        sp: pair.sigma_plus().to_f64(),
        sm: pair.sigma_minus().to_f64(),
        pinv: pair.difference_pseudo_inverse().to_f64(),
        constraints: orthonormal_columns(&constraint_space(alg, pair, projectors)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensors: Vec<DMatrix<f64>> = (0..trials)
        .map(|_| {
            let t1 = random_vector(&mut rng, dim);
            let t2 = random_vector(&mut rng, dim);
            model.project(&(&t1 * t2.transpose()))
        })
        .collect();
    let per_lambda: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let ep = numeric::expm(&(&model.sp * l));
            let em = numeric::expm(&(&model.sm * l));
            par::map(exec, &tensors, |v| model.residual(v, &ep, &em)).into_iter().fold(0.0, f64::max)
        })
        .collect();
    let max_residual = per_lambda.iter().copied().fold(0.0, f64::max);
    NumericFlatnessReport { seed, trials, lambdas: lambdas.to_vec(), per_lambda, max_residual }
}

/// Per-order view of nonzero residual positions, for display.
pub fn residual_summary(report: &FlatnessSeriesReport) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for r in &report.residuals {
        *m.entry(r.order).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn qs(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn z4_flat_through_order_eight() {
        let g = GradedLieAlgebra::sl(4, "cyclic").unwrap();
        let p = ChiralOperatorPair::from_eigenvalues(&g, &qs(&[0, -1, -2, 1]), &qs(&[0, -1, 2, 1]), q(0)).unwrap();
        let projs = p.find_constraint_projectors(&g);
        let r = flatness_series(&g, &p, &projs, 8, Exec::Auto).unwrap();
        assert!(r.is_flat(), "{:?}", residual_summary(&r));
        assert!(r.modulo_constraints);
    }

    #[test]
    fn non_integrable_pcm_fails_at_order_two() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        let p = ChiralOperatorPair::from_eigenvalues(&g, &[q(3)], &[q(-1)], q(1)).unwrap();
        let r = flatness_series(&g, &p, &[], 4, Exec::Sequential).unwrap();
        assert_eq!(r.first_nonzero_order, Some(2));
    }

    #[test]
    fn zero_pair_is_flat_numerically() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        let p = ChiralOperatorPair::from_eigenvalues(&g, &[q(0)], &[q(0)], q(0)).unwrap();
        let projs = p.find_constraint_projectors(&g);
        let r = flatness_numeric(&g, &p, &projs, &[0.0, 1.0], 10, 1, Exec::Auto);
        assert!(r.max_residual < 1e-14, "{}", r.max_residual);
    }
}
