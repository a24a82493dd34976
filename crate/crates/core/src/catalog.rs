//! Named models with their operator tables, expected verdicts and, where a
//! closed form is known, the expected Lax connection.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::algebra::{AlgebraSpec, GradedLieAlgebra};
use crate::error::{Error, Result};
use crate::integrability::Verdict;
use crate::lax::{Chirality, LaurentConnection};
use crate::linalg::QMatrix;
use crate::rational::{format_rational, frac, parse_rational, q, Rational};
use crate::sigma::{ChiralOperatorPair, ConstraintProjector};

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub algebra: GradedLieAlgebra,
    pub pair: ChiralOperatorPair,
    pub projectors: Vec<ConstraintProjector>,
    /// `Err` holds the reason no closed form is recorded.
    pub expected_lax: std::result::Result<LaurentConnection, String>,
    pub expected_verdict: Verdict,
    pub notes: String,
}

impl ModelSpec {
    fn new(
        name: String,
        algebra: GradedLieAlgebra,
        pair: ChiralOperatorPair,
        expected_lax: std::result::Result<LaurentConnection, String>,
        expected_verdict: Verdict,
        notes: &str,
    ) -> Self {
        let projectors = pair.find_constraint_projectors(&algebra);
        ModelSpec { name, algebra, pair, projectors, expected_lax, expected_verdict, notes: notes.into() }
    }

    pub fn expected_lax(&self) -> Result<&LaurentConnection> {
        self.expected_lax.as_ref().map_err(|why| Error::NoClosedForm(why.clone()))
    }
}

/// Signatures accepted by [`builtin`].
pub const MODELS: &[(&str, &str)] = &[
    ("z2_symmetric", "symmetric space coset on sl(2)"),
    ("z3_coset", "Z3 coset on sl(3)"),
    ("z4_superspace", "bosonic Z4 superspace-type coset on sl(4)"),
    ("zn_coset(N)", "Z_N coset on sl(N), N >= 2"),
    ("pcm_gauge_fixed(alpha,beta)", "principal chiral model with WZ term, gauge-fixed"),
    ("pcm_doubled(alpha,beta)", "principal chiral model on g+g, beta != 0"),
    ("general_z2(alpha,beta,gamma)", "three-parameter Z2 family on sl(3)"),
    ("wzw(beta)", "WZW point alpha = beta of the principal chiral model"),
    ("new_z2(beta)", "the constrained Z2 model alpha = beta, gamma = 0"),
];

/// Splits `name(a,b,...)` into the name and rational arguments.
pub fn parse_invocation(s: &str) -> Result<(String, Vec<Rational>)> {
    let s = s.trim();
    let Some(open) = s.find('(') else { return Ok((s.to_string(), Vec::new())) };
    let inner = s[open + 1..].strip_suffix(')').ok_or_else(|| Error::Parse(format!("missing ')' in {s:?}")))?;
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|a| parse_rational(a.trim())).collect::<Result<Vec<_>>>()?
    };
    Ok((s[..open].trim().to_string(), args))
}

fn expect_args(name: &str, args: &[Rational], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::BadParameters(format!("{name} takes {n} argument(s), got {}", args.len())));
    }
    Ok(())
}

fn call_name(name: &str, args: &[Rational]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.iter().map(format_rational).collect::<Vec<_>>().join(","))
    }
}

pub fn builtin(invocation: &str) -> Result<ModelSpec> {
    let (name, args) = parse_invocation(invocation)?;
    match name.as_str() {
        "z2_symmetric" => {
            expect_args(&name, &args, 0)?;
            z2_symmetric()
        }
        "z3_coset" => {
            expect_args(&name, &args, 0)?;
            z3_coset()
        }
        "z4_superspace" => {
            expect_args(&name, &args, 0)?;
            z4_superspace()
        }
        "zn_coset" => {
            expect_args(&name, &args, 1)?;
            let n = crate::rational::to_integer(&args[0])
                .filter(|n| *n >= 2 && *n <= 12)
                .ok_or_else(|| Error::BadParameters(format!("zn_coset needs an integer 2 <= N <= 12, got {}", args[0])))?;
            zn_coset(n as usize)
        }
        "pcm_gauge_fixed" => {
            expect_args(&name, &args, 2)?;
            pcm_gauge_fixed(&args[0], &args[1])
        }
        "pcm_doubled" => {
            expect_args(&name, &args, 2)?;
            pcm_doubled(&args[0], &args[1])
        }
        "general_z2" => {
            expect_args(&name, &args, 3)?;
            general_z2(&args[0], &args[1], &args[2])
        }
        "wzw" => {
            expect_args(&name, &args, 1)?;
            let mut m = pcm_gauge_fixed(&args[0], &args[0])?;
            m.name = call_name("wzw", &args);
            Ok(m)
        }
        "new_z2" => {
            expect_args(&name, &args, 1)?;
            if args[0].is_zero() {
                return Err(Error::BadParameters("new_z2 needs beta != 0".into()));
            }
            let mut m = general_z2(&args[0], &args[0], &Rational::zero())?;
            m.name = call_name("new_z2", &args);
            Ok(m)
        }
        _ => Err(Error::UnknownModel(invocation.to_string())),
    }
}

/// Every fixed-parameter catalog entry, with representative parameters for
/// the parametrised ones.
pub fn representative_models() -> Vec<String> {
    [
        "z2_symmetric",
        "z3_coset",
        "z4_superspace",
        "zn_coset(2)",
        "zn_coset(5)",
        "pcm_gauge_fixed(1,2)",
        "pcm_gauge_fixed(3,0)",
        "pcm_doubled(1,2)",
        "general_z2(1,2,3)",
        "wzw(1)",
        "new_z2(1)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

// ---------------------------------------------------------------------------
// Expected connections

/// One `e^{pλ}` term of a connection in dual form: a coefficient in
/// front of `J_(g)` or of `∗J_(g)`.
struct DualTerm {
    grade: usize,
    power: i64,
    j: Rational,
    star_j: Rational,
}

fn dual(grade: usize, power: i64, j: Rational, star_j: Rational) -> DualTerm {
    DualTerm { grade, power, j, star_j }
}

/// `a J + b ∗J = (a + b) J⁺ + (a − b) J⁻`.
fn graded_connection(alg: &GradedLieAlgebra, scale: Rational, terms: &[DualTerm]) -> LaurentConnection {
    let mut chiral: Vec<(usize, Chirality, i64, Rational)> = Vec::new();
    for t in terms {
        chiral.push((t.grade, Chirality::Plus, t.power, &t.j + &t.star_j));
        chiral.push((t.grade, Chirality::Minus, t.power, &t.j - &t.star_j));
    }
    chiral_connection(alg, scale, &chiral)
}

fn chiral_connection(alg: &GradedLieAlgebra, scale: Rational, terms: &[(usize, Chirality, i64, Rational)]) -> LaurentConnection {
    let flip = scale.is_negative();
    let scale = scale.abs();
    let mut plus: BTreeMap<i64, QMatrix> = BTreeMap::new();
    let mut minus: BTreeMap<i64, QMatrix> = BTreeMap::new();
    let dim = alg.dim();
    for (g, c, p, coeff) in terms {
        if coeff.is_zero() || alg.basis_of_grade(*g).is_empty() {
            continue;
        }
        let p = if flip { -p } else { *p };
        let map = match c {
            Chirality::Plus => &mut plus,
            Chirality::Minus => &mut minus,
        };
        let e = map.entry(p).or_insert_with(|| QMatrix::zeros(dim, dim));
        *e = e.add(&alg.grade_projector(*g).scale(coeff));
    }
    plus.retain(|_, m| !m.is_zero());
    minus.retain(|_, m| !m.is_zero());
    LaurentConnection { plus, minus, exact: true, lambda_scale: scale, warnings: Vec::new() }
}

// ---------------------------------------------------------------------------
// Models

fn qs(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}

pub fn z2_symmetric() -> Result<ModelSpec> {
    let alg = GradedLieAlgebra::sl(2, "cyclic")?;
    let pair = ChiralOperatorPair::from_eigenvalues(&alg, &qs(&[0, -1]), &qs(&[0, 1]), q(0))?;
    let half = frac(1, 2);
    let lax = graded_connection(
        &alg,
        q(1),
        &[
            dual(0, 0, q(1), q(0)),
            dual(1, -1, half.clone(), half.clone()),
            dual(1, 1, half.clone(), -half),
        ],
    );
    Ok(ModelSpec::new("z2_symmetric".into(), alg, pair, Ok(lax), Verdict::Integrable, "symmetric space; sl(2) with E, F odd"))
}

pub fn z3_coset() -> Result<ModelSpec> {
    let alg = GradedLieAlgebra::sl(3, "cyclic")?;
    let pair = ChiralOperatorPair::from_eigenvalues(&alg, &qs(&[0, -1, -2]), &qs(&[0, 2, 1]), q(0))?;
    let half = frac(1, 2);
    let lax = graded_connection(
        &alg,
        q(1),
        &[
            dual(0, 0, q(1), q(0)),
            dual(1, -1, half.clone(), half.clone()),
            dual(1, 2, half.clone(), -half.clone()),
            dual(2, -2, half.clone(), half.clone()),
            dual(2, 1, half.clone(), -half),
        ],
    );
    Ok(ModelSpec::new(
        "z3_coset".into(),
        alg,
        pair,
        Ok(lax),
        Verdict::Integrable,
        "Z3 coset; eigenvalues read off the Laurent exponents of its Lax connection",
    ))
}

pub fn z4_superspace() -> Result<ModelSpec> {
    let alg = GradedLieAlgebra::sl(4, "cyclic")?;
    let pair = ChiralOperatorPair::from_eigenvalues(&alg, &qs(&[0, -1, -2, 1]), &qs(&[0, -1, 2, 1]), q(0))?;
    let half = frac(1, 2);
    let lax = graded_connection(
        &alg,
        q(1),
        &[
            dual(0, 0, q(1), q(0)),
            dual(1, -1, q(1), q(0)),
            dual(2, -2, half.clone(), half.clone()),
            dual(2, 2, half.clone(), -half),
            dual(3, 1, q(1), q(0)),
        ],
    );
    Ok(ModelSpec::new(
        "z4_superspace".into(),
        alg,
        pair,
        Ok(lax),
        Verdict::IntegrableWithConstraints,
        "bosonic Z4 model; odd grades are constrained",
    ))
}

pub fn zn_coset(n: usize) -> Result<ModelSpec> {
    if n < 2 {
        return Err(Error::BadParameters(format!("zn_coset needs N >= 2, got {n}")));
    }
    let alg = GradedLieAlgebra::sl(n, "cyclic")?;
    let ni = n as i64;
    let plus: Vec<Rational> = (0..ni).map(|k| q(-k)).collect();
    let minus: Vec<Rational> = (0..ni).map(|k| if k == 0 { q(0) } else { q(ni - k) }).collect();
    let pair = ChiralOperatorPair::from_eigenvalues(&alg, &plus, &minus, q(0))?;
    let mut terms = Vec::new();
    for k in 0..n {
        terms.push((k, Chirality::Plus, -(k as i64), q(1)));
        let g = (n - k) % n;
        terms.push((g, Chirality::Minus, k as i64, q(1)));
    }
    let lax = chiral_connection(&alg, q(1), &terms);
    Ok(ModelSpec::new(format!("zn_coset({n})"), alg, pair, Ok(lax), Verdict::Integrable, "Z_N coset; sl(N) graded by the cyclic automorphism"))
}

fn pcm_algebra() -> Result<GradedLieAlgebra> {
    GradedLieAlgebra::sl(2, "none")
}

/// Verdict of the gauge-fixed principal chiral model: `(α+β)(α−β) = 0` without
/// constraints, or `β = 0` with `Π = α`.
pub fn pcm_expected_verdict(alpha: &Rational, beta: &Rational) -> Verdict {
    if (alpha + beta).is_zero() || (alpha - beta).is_zero() {
        Verdict::Integrable
    } else if beta.is_zero() {
        Verdict::IntegrableWithConstraints
    } else {
        Verdict::NotIntegrable
    }
}

pub fn pcm_gauge_fixed(alpha: &Rational, beta: &Rational) -> Result<ModelSpec> {
    let alg = pcm_algebra()?;
    let pair = ChiralOperatorPair::from_eigenvalues(&alg, &[alpha + beta], &[alpha - beta], alpha.clone())?;
    let verdict = pcm_expected_verdict(alpha, beta);
    let lax = if alpha.is_zero() && beta.is_zero() {
        Ok(chiral_connection(&alg, q(1), &[(0, Chirality::Plus, 0, q(1)), (0, Chirality::Minus, 0, q(1))]))
    } else if alpha == beta {
        // e^{2βλ} J⁺ + J⁻
        Ok(chiral_connection(&alg, beta * q(2), &[(0, Chirality::Plus, 1, q(1)), (0, Chirality::Minus, 0, q(1))]))
    } else if *alpha == -beta.clone() {
        // J⁺ + e^{-2βλ} J⁻
        Ok(chiral_connection(&alg, beta * q(2), &[(0, Chirality::Plus, 0, q(1)), (0, Chirality::Minus, -1, q(1))]))
    } else if beta.is_zero() {
        // e^{αλ} J
        Ok(chiral_connection(&alg, alpha.clone(), &[(0, Chirality::Plus, 1, q(1)), (0, Chirality::Minus, 1, q(1))]))
    } else {
        Err("gauge-fixed principal chiral model at generic alpha, beta: its flat connection has three distinct exponents".into())
    };
    let args = [alpha.clone(), beta.clone()];
    Ok(ModelSpec::new(call_name("pcm_gauge_fixed", &args), alg, pair, lax, verdict, "principal chiral model, N = 1, Σ± = α ± β"))
}

/// The 2×2 operators on `(x₁, x₂) ∈ g ⊕ g`:
/// `Σ± = (1/2β) [[α±β, −α∓β], [α∓β, −α±β]]`.
pub fn pcm_doubled_blocks(alpha: &Rational, beta: &Rational) -> (QMatrix, QMatrix) {
    let s = (beta * q(2)).recip();
    let block = |sgn: i64| {
        let sb = beta * q(sgn);
        QMatrix::from_rows(vec![vec![alpha + &sb, -(alpha + &sb)], vec![alpha - &sb, -(alpha - &sb)]]).scale(&s)
    };
    (block(1), block(-1))
}

/// Rewrites a 2×2 block on `(x₁, x₂)` in the exchange eigenbasis
/// `(x, x)`, `(x, −x)` and tensors it with the identity on `g`.
fn doubled_operator(block: &QMatrix, d: usize) -> QMatrix {
    let s = QMatrix::from_rows(vec![qs(&[1, 1]), qs(&[1, -1])]);
    let s_inv = s.scale(&frac(1, 2));
    let b = s_inv.mul(block).mul(&s);
    let mut m = QMatrix::zeros(2 * d, 2 * d);
    for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for i in 0..d {
            m[(bi * d + i, bj * d + i)] = b[(bi, bj)].clone();
        }
    }
    m
}

pub fn pcm_doubled(alpha: &Rational, beta: &Rational) -> Result<ModelSpec> {
    if beta.is_zero() {
        return Err(Error::BadParameters("pcm_doubled needs beta != 0".into()));
    }
    let alg = GradedLieAlgebra::build(&AlgebraSpec::double(AlgebraSpec::preset("sl", 2, "none"), "swap"))?;
    let d = alg.dim() / 2;
    let (bp, bm) = pcm_doubled_blocks(alpha, beta);
    let sp = doubled_operator(&bp, d);
    let sm = doubled_operator(&bm, d);
    let pair = ChiralOperatorPair::from_matrices(&alg, sp.clone(), sm.clone(), Rational::zero())?;
    // A(λ) = J + (e^λ − 1)Σ⁺J⁺ − (e^{−λ} − 1)Σ⁻J⁻
    let id = QMatrix::identity(alg.dim());
    let mut plus = BTreeMap::new();
    plus.insert(0, id.sub(&sp));
    plus.insert(1, sp);
    let mut minus = BTreeMap::new();
    minus.insert(0, id.add(&sm));
    minus.insert(-1, sm.scale(&-Rational::one()));
    plus.retain(|_, m: &mut QMatrix| !m.is_zero());
    minus.retain(|_, m: &mut QMatrix| !m.is_zero());
    let lax = LaurentConnection { plus, minus, exact: true, lambda_scale: q(1), warnings: Vec::new() };
    let args = [alpha.clone(), beta.clone()];
    Ok(ModelSpec::new(
        call_name("pcm_doubled", &args),
        alg,
        pair,
        Ok(lax),
        Verdict::Integrable,
        "principal chiral model on g+g with the exchange grading; Σ± are rank-one projector blocks",
    ))
}

/// Verdict of the three-parameter Z₂ family from its closed-form conditions
/// `(α−β)(α+β) − π₀α = (α+2γ−β−π₁)(α−β) = (α+β)(α+β−2γ−π₁) = 0`, where
/// `π₀` may be nonzero only if `β = 0` and `π₁` only if `γ = 0`.
pub fn general_z2_expected_verdict(alpha: &Rational, beta: &Rational, gamma: &Rational) -> Verdict {
    let holds = |p0: &Rational, p1: &Rational| {
        let e0 = (alpha - beta) * (alpha + beta) - p0 * alpha;
        let e1 = (alpha + gamma * q(2) - beta - p1) * (alpha - beta);
        let e2 = (alpha + beta) * (alpha + beta - gamma * q(2) - p1);
        e0.is_zero() && e1.is_zero() && e2.is_zero()
    };
    let zero = Rational::zero();
    if holds(&zero, &zero) {
        return Verdict::Integrable;
    }
    let mut p0s = vec![zero.clone()];
    if beta.is_zero() {
        p0s.push(alpha.clone());
    }
    let mut p1s = vec![zero];
    if gamma.is_zero() {
        p1s.push(alpha - beta);
        p1s.push(alpha + beta);
    }
    if p0s.iter().any(|p0| p1s.iter().any(|p1| holds(p0, p1))) {
        Verdict::IntegrableWithConstraints
    } else {
        Verdict::NotIntegrable
    }
}

pub fn general_z2_algebra() -> Result<GradedLieAlgebra> {
    GradedLieAlgebra::sl(3, "cartan_involution")
}

pub fn general_z2_pair(alg: &GradedLieAlgebra, alpha: &Rational, beta: &Rational, gamma: &Rational) -> Result<ChiralOperatorPair> {
    ChiralOperatorPair::from_eigenvalues(alg, &[beta + alpha, gamma + alpha], &[alpha - beta, alpha - gamma], alpha.clone())
}

pub fn general_z2(alpha: &Rational, beta: &Rational, gamma: &Rational) -> Result<ModelSpec> {
    let alg = general_z2_algebra()?;
    let pair = general_z2_pair(&alg, alpha, beta, gamma)?;
    let verdict = general_z2_expected_verdict(alpha, beta, gamma);
    let lax = if alpha == beta && gamma.is_zero() && !beta.is_zero() {
        // e^{2λ} J⁺_(0) + J⁻_(0) + e^{λ} J_(1), λ rescaled by β
        Ok(chiral_connection(
            &alg,
            beta.clone(),
            &[
                (0, Chirality::Plus, 2, q(1)),
                (0, Chirality::Minus, 0, q(1)),
                (1, Chirality::Plus, 1, q(1)),
                (1, Chirality::Minus, 1, q(1)),
            ],
        ))
    } else {
        Err("no closed-form connection recorded for this point of the Z2 family".into())
    };
    let args = [alpha.clone(), beta.clone(), gamma.clone()];
    Ok(ModelSpec::new(
        call_name("general_z2", &args),
        alg,
        pair,
        lax,
        verdict,
        "sl(3) graded by X -> -X^T; Σ⁺ = (β+α, γ+α), Σ⁻ = (α−β, α−γ)",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::build_lax;

    #[test]
    fn invocation_parsing() {
        assert_eq!(parse_invocation("general_z2(1, -1/2, 0)").unwrap(), ("general_z2".into(), vec![q(1), frac(-1, 2), q(0)]));
        assert!(matches!(builtin("nope"), Err(Error::UnknownModel(_))));
        assert!(matches!(builtin("zn_coset(1)"), Err(Error::BadParameters(_))));
        assert!(matches!(builtin("pcm_doubled(1,0)"), Err(Error::BadParameters(_))));
    }

    #[test]
    fn z2_connection_matches() {
        let m = z2_symmetric().unwrap();
        assert_eq!(build_lax(&m.algebra, &m.pair, 8), *m.expected_lax().unwrap());
    }

    #[test]
    fn doubled_pcm_blocks_are_projectors() {
        let (p, m) = pcm_doubled_blocks(&q(3), &q(2));
        assert_eq!(p.mul(&p), p);
        assert_eq!(m.mul(&m), m.scale(&q(-1)));
    }

    #[test]
    fn general_z2_reference_points() {
        assert_eq!(general_z2_expected_verdict(&q(1), &q(1), &q(0)), Verdict::IntegrableWithConstraints);
        assert_eq!(general_z2_expected_verdict(&q(1), &q(2), &q(3)), Verdict::NotIntegrable);
        assert_eq!(general_z2_expected_verdict(&q(2), &q(2), &q(2)), Verdict::Integrable);
    }
}
