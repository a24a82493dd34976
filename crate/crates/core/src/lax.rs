//! The Lax connection `A(λ) = exp(λΣ⁺)J⁺ + exp(λΣ⁻)J⁻` as a Laurent polynomial
//! in `z = e^{rλ}`.
//!
//! When `Σ±` are diagonalizable over the rationals, `exp(λΣ) = Σ_μ e^{μλ} P_μ`
//! with spectral projectors `P_μ`. All eigenvalues are divided by their common
//! content `r`, so the stored powers are coprime integers and `r` is reported
//! as the λ-rescaling. Otherwise the Taylor coefficients `Σⁿ/n!` are stored.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::GradedLieAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};
use crate::numeric;
use crate::rational::{content, format_rational, serde_rational, serde_rational_matrix, to_f64, Rational};
use crate::sigma::ChiralOperatorPair;

pub const DEFAULT_SERIES_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Chirality {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chirality::Plus => "+",
            Chirality::Minus => "-",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentConnection {
    /// Power `p` → `C⁺_p`. In series mode the key is the λ-order instead.
    pub plus: BTreeMap<i64, QMatrix>,
    pub minus: BTreeMap<i64, QMatrix>,
    pub exact: bool,
    /// `r` in `z = e^{rλ}`; 1 in series mode.
    pub lambda_scale: Rational,
    pub warnings: Vec<String>,
}

impl LaurentConnection {
    pub fn dim(&self) -> usize {
        self.plus.values().next().map(QMatrix::rows).unwrap_or(0)
    }

    pub fn part(&self, c: Chirality) -> &BTreeMap<i64, QMatrix> {
        match c {
            Chirality::Plus => &self.plus,
            Chirality::Minus => &self.minus,
        }
    }

    /// Sorted support of both chiralities.
    pub fn powers(&self) -> Vec<i64> {
        let mut p: Vec<i64> = self.plus.keys().chain(self.minus.keys()).copied().collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// Coefficients ordered by `(power, chirality)`.
    pub fn laurent_coefficients(&self) -> Result<Vec<(i64, Chirality, &QMatrix)>> {
        if !self.exact {
            return Err(Error::NotExact);
        }
        let mut out: Vec<(i64, Chirality, &QMatrix)> = self
            .plus
            .iter()
            .map(|(p, m)| (*p, Chirality::Plus, m))
            .chain(self.minus.iter().map(|(p, m)| (*p, Chirality::Minus, m)))
            .collect();
        out.sort_by_key(|(p, c, _)| (*p, *c));
        Ok(out)
    }

    /// Exact value at `z = e^{rλ}` (exact mode) or at λ itself (series mode).
    pub fn evaluate_z(&self, z: &Rational, j_plus: &[Rational], j_minus: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); j_plus.len()];
        for (coeffs, x) in [(&self.plus, j_plus), (&self.minus, j_minus)] {
            for (p, m) in coeffs {
                let w = rational_pow(z, *p);
                for (o, v) in out.iter_mut().zip(m.apply(x)) {
                    *o += &w * v;
                }
            }
        }
        out
    }

    /// Floating evaluation at spectral parameter λ. The second value is a warning
    /// when a truncated series is evaluated beyond `radius`.
    pub fn evaluate(&self, lambda: f64, j_plus: &[f64], j_minus: &[f64], radius: f64) -> (Vec<f64>, Option<String>) {
        let warning = (!self.exact && lambda.abs() > radius)
            .then(|| format!("series truncated at order {} evaluated at |λ| = {} beyond radius {radius}", self.order(), lambda.abs()));
        let mut out = vec![0.0; j_plus.len()];
        let r = to_f64(&self.lambda_scale);
        for (coeffs, x) in [(&self.plus, j_plus), (&self.minus, j_minus)] {
            let xv = DVector::from_column_slice(x);
            for (p, m) in coeffs {
                let w = if self.exact { (*p as f64 * r * lambda).exp() } else { lambda.powi(*p as i32) };
                let y = m.to_f64() * &xv;
                for (o, v) in out.iter_mut().zip(y.iter()) {
                    *o += w * v;
                }
            }
        }
        (out, warning)
    }

    /// Highest stored power or order.
    pub fn order(&self) -> i64 {
        self.powers().last().copied().unwrap_or(0)
    }

    /// `exp(λΣ)` for one chirality in floating point, from the stored coefficients.
    pub fn exp_operator(&self, c: Chirality, lambda: f64) -> DMatrix<f64> {
        let n = self.dim();
        let r = to_f64(&self.lambda_scale);
        let mut m = DMatrix::zeros(n, n);
        for (p, cp) in self.part(c) {
            let w = if self.exact { (*p as f64 * r * lambda).exp() } else { lambda.powi(*p as i32) };
            m += cp.to_f64() * w;
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Term {
            power: i64,
            chirality: Chirality,
            #[serde(with = "serde_rational_matrix")]
            matrix: Vec<Vec<Rational>>,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            exact: bool,
            #[serde(with = "serde_rational")]
            lambda_scale: Rational,
            terms: Vec<Term>,
            #[serde(skip_serializing_if = "Vec::is_empty")]
            warnings: &'a Vec<String>,
        }
        let mut terms: Vec<Term> = self
            .plus
            .iter()
            .map(|(p, m)| (*p, Chirality::Plus, m))
            .chain(self.minus.iter().map(|(p, m)| (*p, Chirality::Minus, m)))
            .map(|(power, chirality, m)| Term { power, chirality, matrix: m.to_rows() })
            .collect();
        terms.sort_by_key(|t| (t.power, t.chirality));
        serde_json::to_value(Out { exact: self.exact, lambda_scale: self.lambda_scale.clone(), terms, warnings: &self.warnings })
            .expect("connection serializes")
    }

    /// Compact rendering, e.g. `e^{-2λ} J+_(2) + e^{-λ} J_(1) + J_(0)`.
    /// Coefficients that are not grade projectors are shown as `C±_p J±`.
    pub fn pretty(&self, alg: &GradedLieAlgebra) -> String {
        if !self.exact {
            let parts: Vec<String> = self.powers().iter().map(|n| format!("λ^{n} (C+_{n} J+ + C-_{n} J-)")).collect();
            return format!("{} + O(λ^{})", parts.join(" + "), self.order() + 1);
        }
        let n = alg.grading_order();
        let grade_of_coeff = |m: &QMatrix| -> Option<Vec<usize>> {
            (0..n).map(|g| alg.grade_projector(g)).enumerate().try_fold(Vec::new(), |mut acc, (g, p)| {
                let restricted = m.mul(&p);
                if restricted == p {
                    acc.push(g);
                    Some(acc)
                } else if restricted.is_zero() {
                    Some(acc)
                } else {
                    None
                }
            })
        };
        let mut terms = Vec::new();
        for p in self.powers() {
            let exp = match p {
                0 => String::new(),
                1 => "e^{λ} ".into(),
                -1 => "e^{-λ} ".into(),
                _ => format!("e^{{{p}λ}} "),
            };
            let gp = self.plus.get(&p).map(grade_of_coeff);
            let gm = self.minus.get(&p).map(grade_of_coeff);
            match (gp, gm) {
                (Some(None), _) | (_, Some(None)) => {
                    for c in [Chirality::Plus, Chirality::Minus] {
                        if self.part(c).contains_key(&p) {
                            terms.push(format!("{exp}C{c}_{p} J{c}"));
                        }
                    }
                }
                (a, b) => {
                    let a = a.flatten().unwrap_or_default();
                    let b = b.flatten().unwrap_or_default();
                    for g in 0..n {
                        let sym = match (a.contains(&g), b.contains(&g)) {
                            (true, true) => format!("J_({g})"),
                            (true, false) => format!("J+_({g})"),
                            (false, true) => format!("J-_({g})"),
                            (false, false) => continue,
                        };
                        terms.push(format!("{exp}{sym}"));
                    }
                }
            }
        }
        let scale = if self.lambda_scale.is_one() { String::new() } else { format!("   [λ rescaled by {}]", format_rational(&self.lambda_scale)) };
        format!("A(λ) = {}{scale}", terms.join(" + "))
    }
}

fn rational_pow(z: &Rational, p: i64) -> Rational {
    if p >= 0 {
        num_traits::pow(z.clone(), p as usize)
    } else {
        num_traits::pow(z.recip(), (-p) as usize)
    }
}

/// `z = (x + 1)/(x − 1)`.
pub fn z_from_x(x: &Rational) -> Rational {
    let one = Rational::one();
    (x + &one) / (x - &one)
}

/// Inverse of [`z_from_x`].
pub fn x_from_z(z: &Rational) -> Rational {
    let one = Rational::one();
    (z + &one) / (z - &one)
}

// ---------------------------------------------------------------------------
// Spectral decomposition

/// Eigenvalue → spectral projector, when `m` is diagonalizable over the rationals.
pub fn spectral_projectors(m: &QMatrix) -> Option<Vec<(Rational, QMatrix)>> {
    let n = m.rows();
    let id = QMatrix::identity(n);
    let sq = m.mul(m);
    if m.is_zero() {
        return Some(vec![(Rational::zero(), id)]);
    }
    if sq == *m {
        return Some(vec![(Rational::zero(), id.sub(m)), (Rational::one(), m.clone())]);
    }
    if sq == m.scale(&-Rational::one()) {
        return Some(vec![(-Rational::one(), m.scale(&-Rational::one())), (Rational::zero(), id.add(m))]);
    }
    if m.is_diagonal() {
        let mut eig: Vec<Rational> = (0..n).map(|i| m[(i, i)].clone()).collect();
        eig.sort();
        eig.dedup();
        return Some(
            eig.into_iter()
                .map(|mu| {
                    let d: Vec<Rational> =
                        (0..n).map(|i| if m[(i, i)] == mu { Rational::one() } else { Rational::zero() }).collect();
                    (mu, QMatrix::diagonal(&d))
                })
                .collect(),
        );
    }
    let poly = minimal_polynomial(m);
    let roots = rational_roots(&poly)?;
    if roots.len() + 1 != poly.len() {
        return None;
    }
    let mut out = Vec::new();
    for (i, mu) in roots.iter().enumerate() {
        let mut p = id.clone();
        for (k, nu) in roots.iter().enumerate() {
            if k != i {
                p = p.mul(&m.sub(&QMatrix::scalar(n, nu))).scale(&(mu - nu).recip());
            }
        }
        out.push((mu.clone(), p));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Some(out)
}

/// Monic minimal polynomial, coefficients from the constant term upwards.
pub fn minimal_polynomial(m: &QMatrix) -> Vec<Rational> {
    let n = m.rows();
    let flat = |a: &QMatrix| a.to_rows().concat();
    let mut powers = vec![QMatrix::identity(n)];
    loop {
        let next = powers.last().unwrap().mul(m);
        let cols: Vec<Vec<Rational>> = powers.iter().map(flat).collect();
        let a = QMatrix::from_rows(cols).transpose();
        if let Some(c) = linalg::solve(&a, &flat(&next)) {
            let mut poly: Vec<Rational> = c.into_iter().map(|x| -x).collect();
            poly.push(Rational::one());
            return poly;
        }
        powers.push(next);
    }
}

const MAX_DIVISOR_SEARCH: u64 = 1 << 40;

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let v = n.abs().to_u64()?;
    if v > MAX_DIVISOR_SEARCH {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= v {
        if v % d == 0 {
            out.push(BigInt::from(d));
            if d * d != v {
                out.push(BigInt::from(v / d));
            }
        }
        d += 1;
    }
    Some(out)
}

fn eval_poly(poly: &[Rational], x: &Rational) -> Rational {
    poly.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Distinct rational roots of `poly` (constant term first), or `None` when the
/// search would be too expensive.
pub fn rational_roots(poly: &[Rational]) -> Option<Vec<Rational>> {
    let lcm = poly.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let mut ints: Vec<BigInt> = poly.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let mut roots = Vec::new();
    if ints.first().is_some_and(Zero::is_zero) {
        roots.push(Rational::zero());
        while ints.first().is_some_and(Zero::is_zero) {
            ints.remove(0);
        }
    }
    if ints.len() <= 1 {
        return Some(roots);
    }
    let ps = divisors(&ints[0])?;
    let qs = divisors(ints.last().unwrap())?;
    let reduced: Vec<Rational> = ints.iter().map(|c| Rational::from_integer(c.clone())).collect();
    let mut found = Vec::new();
    for p in &ps {
        for q in &qs {
            for s in [p.clone(), -p.clone()] {
                let x = Rational::new(s, q.clone());
                if !found.contains(&x) && eval_poly(&reduced, &x).is_zero() {
                    found.push(x);
                }
            }
        }
    }
    roots.extend(found);
    roots.sort();
    Some(roots)
}

// ---------------------------------------------------------------------------
// Construction

fn factorial(n: usize) -> Rational {
    Rational::from_integer((1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
}

fn series(m: &QMatrix, order: usize) -> BTreeMap<i64, QMatrix> {
    let mut out = BTreeMap::new();
    let mut power = QMatrix::identity(m.rows());
    for k in 0..=order {
        out.insert(k as i64, power.scale(&factorial(k).recip()));
        power = power.mul(m);
    }
    out
}

fn grade_spectrum(alg: &GradedLieAlgebra, ev: &[Rational]) -> Vec<(Rational, QMatrix)> {
    let mut by_value: BTreeMap<Rational, QMatrix> = BTreeMap::new();
    for (g, mu) in ev.iter().enumerate() {
        if alg.basis_of_grade(g).is_empty() {
            continue;
        }
        let p = alg.grade_projector(g);
        let e = by_value.entry(mu.clone()).or_insert_with(|| QMatrix::zeros(alg.dim(), alg.dim()));
        *e = e.add(&p);
    }
    by_value.into_iter().collect()
}

/// `exp(λΣ±)` as Laurent coefficients, or as a Taylor series of order `series_order`
/// when some `Σ` is not diagonalizable over the rationals.
pub fn build_lax(alg: &GradedLieAlgebra, pair: &ChiralOperatorPair, series_order: usize) -> LaurentConnection {
    let spectra = match pair.eigenvalues() {
        Some((p, m)) => Some((grade_spectrum(alg, p), grade_spectrum(alg, m))),
        None => spectral_projectors(pair.sigma_plus()).zip(spectral_projectors(pair.sigma_minus())),
    };
    let Some((sp, sm)) = spectra else {
        return LaurentConnection {
            plus: series(pair.sigma_plus(), series_order),
            minus: series(pair.sigma_minus(), series_order),
            exact: false,
            lambda_scale: Rational::one(),
            warnings: vec![format!(
                "operator spectrum is not rational and diagonalizable; storing Taylor series to order {series_order}"
            )],
        };
    };
    let all: Vec<Rational> = sp.iter().chain(&sm).map(|(mu, _)| mu.clone()).collect();
    let r = content(&all).unwrap_or_else(Rational::one);
    let to_map = |s: Vec<(Rational, QMatrix)>| -> BTreeMap<i64, QMatrix> {
        s.into_iter()
            .map(|(mu, p)| ((mu / &r).to_integer().to_i64().expect("Laurent power fits in i64"), p))
            .collect()
    };
    LaurentConnection { plus: to_map(sp), minus: to_map(sm), exact: true, lambda_scale: r, warnings: Vec::new() }
}

// ---------------------------------------------------------------------------
// Shift identities

/// Exact coefficient identities behind `A(λ+λ′) = exp(λ′Σ)A(λ)`:
/// `C_p C_q = δ_pq C_p` and `Σ_p C_p = 1` for each chirality. Returns the
/// largest violating entry (zero when both hold).
pub fn shift_identity_residual(conn: &LaurentConnection) -> Result<Rational> {
    if !conn.exact {
        return Err(Error::NotExact);
    }
    let n = conn.dim();
    let mut worst = Rational::zero();
    for c in [Chirality::Plus, Chirality::Minus] {
        let part = conn.part(c);
        let mut sum = QMatrix::zeros(n, n);
        for (p, cp) in part {
            sum = sum.add(cp);
            for (q, cq) in part {
                let prod = cp.mul(cq);
                let expected = if p == q { cp.clone() } else { QMatrix::zeros(n, n) };
                worst = worst.max(prod.sub(&expected).max_abs());
            }
        }
        worst = worst.max(sum.sub(&QMatrix::identity(n)).max_abs());
    }
    Ok(worst)
}

/// Infinitesimal shift: `p·r·C_p = Σ C_p` for every stored power. Returns the
/// largest violating entry.
pub fn derivative_identity_residual(conn: &LaurentConnection, pair: &ChiralOperatorPair) -> Result<Rational> {
    if !conn.exact {
        return Err(Error::NotExact);
    }
    let mut worst = Rational::zero();
    for (c, sigma) in [(Chirality::Plus, pair.sigma_plus()), (Chirality::Minus, pair.sigma_minus())] {
        for (p, cp) in conn.part(c) {
            let lhs = cp.scale(&(Rational::from_integer((*p).into()) * &conn.lambda_scale));
            worst = worst.max(lhs.sub(&sigma.mul(cp)).max_abs());
        }
    }
    Ok(worst)
}

/// Exact shift check at `z = e^{rλ}`, `w = e^{rλ′}`: compares `A` at `zw` with
/// `exp(λ′Σ)` (its Laurent form at `w`) applied to each chiral part at `z`.
pub fn shift_check_exact(
    conn: &LaurentConnection,
    z: &Rational,
    w: &Rational,
    j_plus: &[Rational],
    j_minus: &[Rational],
) -> Result<Rational> {
    if !conn.exact {
        return Err(Error::NotExact);
    }
    let zero = vec![Rational::zero(); j_plus.len()];
    let shifted = conn.evaluate_z(&(z * w), j_plus, j_minus);
    let a_plus = conn.evaluate_z(z, j_plus, &zero);
    let a_minus = conn.evaluate_z(z, &zero, j_minus);
    let moved = conn.evaluate_z(w, &a_plus, &a_minus);
    Ok(shifted.iter().zip(&moved).map(|(a, b)| crate::rational::abs(&(a - b))).max().unwrap_or_else(Rational::zero))
}

/// Floating shift check against a dense matrix exponential of `Σ±`; returns
/// `max|A(λ+λ′) − exp(λ′Σ)A(λ)| / (1 + max|A(λ+λ′)|)`.
pub fn shift_check(
    conn: &LaurentConnection,
    pair: &ChiralOperatorPair,
    lambda: f64,
    lambda_prime: f64,
    j_plus: &[f64],
    j_minus: &[f64],
) -> f64 {
    let zero = vec![0.0; j_plus.len()];
    let inf = f64::INFINITY;
    let (shifted, _) = conn.evaluate(lambda + lambda_prime, j_plus, j_minus, inf);
    let (a_plus, _) = conn.evaluate(lambda, j_plus, &zero, inf);
    let (a_minus, _) = conn.evaluate(lambda, &zero, j_minus, inf);
    let ep = numeric::expm(&(pair.sigma_plus().to_f64() * lambda_prime));
    let em = numeric::expm(&(pair.sigma_minus().to_f64() * lambda_prime));
    let moved = ep * DVector::from_vec(a_plus) + em * DVector::from_vec(a_minus);
    let diff = shifted.iter().zip(moved.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    diff / (1.0 + numeric::max_abs(&shifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn qs(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn z4_powers() {
        let g = GradedLieAlgebra::sl(4, "cyclic").unwrap();
        let p = ChiralOperatorPair::from_eigenvalues(&g, &qs(&[0, -1, -2, 1]), &qs(&[0, -1, 2, 1]), q(0)).unwrap();
        let conn = build_lax(&g, &p, DEFAULT_SERIES_ORDER);
        assert!(conn.exact);
        assert_eq!(conn.powers(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(conn.pretty(&g), "A(λ) = e^{-2λ} J+_(2) + e^{-λ} J_(1) + J_(0) + e^{λ} J_(3) + e^{2λ} J-_(2)");
        assert!(shift_identity_residual(&conn).unwrap().is_zero());
        assert!(derivative_identity_residual(&conn, &p).unwrap().is_zero());
    }

    #[test]
    fn projector_closed_form() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        // Σ² = Σ with a non-diagonal Σ.
        let s = QMatrix::from_rows(vec![qs(&[1, 1, 0]), qs(&[0, 0, 0]), qs(&[0, 0, 0])]);
        let pair = ChiralOperatorPair::from_matrices(&g, s.clone(), s.scale(&q(-1)), q(0)).unwrap();
        let conn = build_lax(&g, &pair, 8);
        assert!(conn.exact);
        assert_eq!(conn.plus[&1], s);
        assert_eq!(conn.minus[&-1], s);
    }

    #[test]
    fn minimal_polynomial_and_roots() {
        let m = QMatrix::from_rows(vec![qs(&[2, 1]), qs(&[0, -3])]);
        let poly = minimal_polynomial(&m);
        assert_eq!(poly, qs(&[-6, 1, 1]));
        assert_eq!(rational_roots(&poly).unwrap(), qs(&[-3, 2]));
        let halves = vec![frac(-1, 4), q(0), q(1)];
        assert_eq!(rational_roots(&halves).unwrap(), vec![frac(-1, 2), frac(1, 2)]);
    }

    #[test]
    fn jordan_block_falls_back_to_series() {
        let g = GradedLieAlgebra::sl(2, "none").unwrap();
        let s = QMatrix::from_rows(vec![qs(&[0, 1, 0]), qs(&[0, 0, 0]), qs(&[0, 0, 0])]);
        let pair = ChiralOperatorPair::from_matrices(&g, s.clone(), s, q(0)).unwrap();
        let conn = build_lax(&g, &pair, 8);
        assert!(!conn.exact);
        assert_eq!(conn.warnings.len(), 1);
        assert!(matches!(conn.laurent_coefficients(), Err(Error::NotExact)));
    }

    #[test]
    fn parametrisations_invert() {
        let x = frac(7, 3);
        assert_eq!(x_from_z(&z_from_x(&x)), x);
    }
}
