//! Parameter scans over families whose `Σ±` eigenvalues are linear in the
//! parameters, with exact discovery of the integrable loci.
//!
//! On a grading-diagonal pair every live grade-pair entry of the condition is a
//! product of two linear forms: `F⁺F⁻` on non-kernel grades and `F(F − π_g)` on
//! kernel grades. A locus is obtained by choosing one vanishing factor per
//! entry; the resulting linear subspaces are projected onto parameter space and
//! only maximal ones are kept.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::GradedLieAlgebra;
use crate::catalog;
use crate::error::Result;
use crate::integrability::{check_general, check_graded, Residuals, Verdict};
use crate::linalg::{QMatrix, RowSpace};
use crate::par::{self, Exec};
use crate::rational::{format_rational, q, serde_rational, serde_rational_vec, Rational};
use crate::sigma::{ChiralOperatorPair, OperatorPart};

/// `Σ±₍g₎ = plus[g]·θ`, `Σ⁻₍g₎ = minus[g]·θ` for parameters `θ`.
#[derive(Clone, Debug)]
pub struct LinearGradedFamily {
    pub name: String,
    pub params: Vec<String>,
    pub algebra: GradedLieAlgebra,
    pub plus: Vec<Vec<Rational>>,
    pub minus: Vec<Vec<Rational>>,
    /// Known loci: label and spanning vectors.
    pub named_loci: Vec<(String, Vec<Vec<Rational>>)>,
}

fn qv(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}

impl LinearGradedFamily {
    /// `(α, β, γ)` on sl(3) with `Σ± = (α ± β, α ± γ)`.
    pub fn general_z2() -> Result<Self> {
        Ok(LinearGradedFamily {
            name: "general_z2".into(),
            params: vec!["alpha".into(), "beta".into(), "gamma".into()],
            algebra: catalog::general_z2_algebra()?,
            plus: vec![qv(&[1, 1, 0]), qv(&[1, 0, 1])],
            minus: vec![qv(&[1, -1, 0]), qv(&[1, 0, -1])],
            named_loci: vec![
                ("pcm-wzw".into(), vec![qv(&[1, 1, 1])]),
                ("pcm-wzw-mirror".into(), vec![qv(&[1, -1, -1])]),
                ("new-model".into(), vec![qv(&[1, 1, 0])]),
                ("new-model-mirror".into(), vec![qv(&[1, -1, 0])]),
                ("symmetric-space".into(), vec![qv(&[0, 0, 1])]),
                ("wz-only".into(), vec![qv(&[1, 0, 0])]),
            ],
        })
    }

    /// `(α, β)` on ungraded sl(2) with `Σ± = α ± β`.
    pub fn pcm() -> Result<Self> {
        Ok(LinearGradedFamily {
            name: "pcm".into(),
            params: vec!["alpha".into(), "beta".into()],
            algebra: GradedLieAlgebra::sl(2, "none")?,
            plus: vec![qv(&[1, 1])],
            minus: vec![qv(&[1, -1])],
            named_loci: vec![
                ("wzw".into(), vec![qv(&[1, 1])]),
                ("wzw-mirror".into(), vec![qv(&[-1, 1])]),
                ("constrained".into(), vec![qv(&[1, 0])]),
            ],
        })
    }

    fn dot(form: &[Rational], theta: &[Rational]) -> Rational {
        form.iter().zip(theta).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn eigenvalues(&self, theta: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        (
            self.plus.iter().map(|f| Self::dot(f, theta)).collect(),
            self.minus.iter().map(|f| Self::dot(f, theta)).collect(),
        )
    }

    pub fn pair(&self, theta: &[Rational]) -> Result<ChiralOperatorPair> {
        let (p, m) = self.eigenvalues(theta);
        ChiralOperatorPair::from_eigenvalues(&self.algebra, &p, &m, Rational::zero())
    }

    fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Maximal parameter subspaces on which the condition holds for some `π`.
    pub fn discover_loci(&self) -> Vec<Vec<Vec<Rational>>> {
        let n = self.algebra.grading_order();
        let m = self.n_params();
        let width = m + n;
        let sub = |a: &[Rational], b: &[Rational]| -> Vec<Rational> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let extend = |f: &[Rational]| -> Vec<Rational> {
            let mut v = f.to_vec();
            v.resize(width, Rational::zero());
            v
        };
        let pi_var = |g: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); width];
            v[m + g] = Rational::one();
            v
        };
        let diff: Vec<Vec<Rational>> = (0..n).map(|g| sub(&self.plus[g], &self.minus[g])).collect();
        let live: Vec<(usize, usize)> = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .filter(|&(j, k)| self.algebra.grade_pair_nonvanishing(k, j))
            .collect();

        let mut found: Vec<RowSpace> = Vec::new();
        for mask in 0u32..(1 << n) {
            let kernel = |g: usize| mask & (1 << g) != 0;
            let mut base = RowSpace::new(width);
            for (g, d) in diff.iter().enumerate() {
                if kernel(g) {
                    base.insert(&extend(d));
                } else {
                    base.insert(&pi_var(g));
                }
            }
            let entries: Vec<[Vec<Rational>; 2]> = live
                .iter()
                .map(|&(j, k)| {
                    let g = (j + k) % n;
                    let c: Vec<Rational> = self.plus[k].iter().zip(&self.minus[j]).map(|(a, b)| a + b).collect();
                    let fp = extend(&sub(&c, &self.plus[g]));
                    let fm = extend(&sub(&c, &self.minus[g]));
                    if kernel(g) {
                        let shifted = sub(&fp, &pi_var(g));
                        [fp, shifted]
                    } else {
                        [fp, fm]
                    }
                })
                .collect();
            let mut solutions = Vec::new();
            dfs(&entries, 0, base, &mut solutions);
            for eqs in solutions {
                found.push(project(&eqs, m));
            }
        }
        maximal(found).into_iter().map(|s| s.basis().map(<[Rational]>::to_vec).collect()).collect()
    }

    pub fn label_for(&self, span: &[Vec<Rational>]) -> Option<String> {
        let target = span_space(span, self.n_params());
        self.named_loci.iter().find(|(_, s)| same_space(&span_space(s, self.n_params()), &target)).map(|(l, _)| l.clone())
    }

    /// Defining equations of a locus as readable strings.
    pub fn equations(&self, span: &[Vec<Rational>]) -> Vec<String> {
        let m = self.n_params();
        let rows: Vec<Vec<Rational>> = if span.is_empty() { Vec::new() } else { span.to_vec() };
        let annihilator = if rows.is_empty() {
            (0..m).map(|i| (0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
        } else {
            QMatrix::from_rows(rows).nullspace()
        };
        let mut space = RowSpace::new(m);
        for a in &annihilator {
            space.insert(a);
        }
        space.basis().map(|row| self.format_equation(row)).collect()
    }

    fn format_equation(&self, row: &[Rational]) -> String {
        let p = row.iter().position(|x| !x.is_zero()).expect("nonzero equation");
        let lead = row[p].clone();
        let mut rhs = Vec::new();
        for (i, c) in row.iter().enumerate().skip(p + 1) {
            if c.is_zero() {
                continue;
            }
            let coeff = -(c / &lead);
            let name = &self.params[i];
            let term = if coeff.is_one() {
                name.clone()
            } else if coeff == -Rational::one() {
                format!("-{name}")
            } else {
                format!("{}*{name}", format_rational(&coeff))
            };
            rhs.push(term);
        }
        let rhs = if rhs.is_empty() { "0".to_string() } else { rhs.join(" + ").replace("+ -", "- ") };
        format!("{} = {rhs}", self.params[p])
    }
}

fn dfs(entries: &[[Vec<Rational>; 2]], idx: usize, eqs: RowSpace, out: &mut Vec<RowSpace>) {
    if idx == entries.len() {
        out.push(eqs);
        return;
    }
    let [a, b] = &entries[idx];
    if eqs.contains(a) || eqs.contains(b) {
        dfs(entries, idx + 1, eqs, out);
        return;
    }
    for f in [a, b] {
        let mut next = eqs.clone();
        next.insert(f);
        dfs(entries, idx + 1, next, out);
    }
}

/// Projects the solution set of `eqs` (over parameters and π's) onto the
/// first `m` coordinates.
fn project(eqs: &RowSpace, m: usize) -> RowSpace {
    let rows: Vec<Vec<Rational>> = eqs.basis().map(<[Rational]>::to_vec).collect();
    let null = if rows.is_empty() {
        (0..eqs.width()).map(|i| (0..eqs.width()).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
    } else {
        QMatrix::from_rows(rows).nullspace()
    };
    let mut s = RowSpace::new(m);
    for v in null {
        s.insert(&v[..m]);
    }
    s
}

fn span_space(span: &[Vec<Rational>], m: usize) -> RowSpace {
    let mut s = RowSpace::new(m);
    for v in span {
        s.insert(v);
    }
    s
}

fn contained(a: &RowSpace, b: &RowSpace) -> bool {
    a.basis().all(|v| b.contains(v))
}

fn same_space(a: &RowSpace, b: &RowSpace) -> bool {
    a.dim() == b.dim() && contained(a, b)
}

fn maximal(mut spaces: Vec<RowSpace>) -> Vec<RowSpace> {
    spaces.retain(|s| s.dim() > 0);
    spaces.sort_by_key(|s| std::cmp::Reverse(s.dim()));
    let mut kept: Vec<RowSpace> = Vec::new();
    for s in spaces {
        if !kept.iter().any(|k| contained(&s, k)) {
            kept.push(s);
        }
    }
    kept.sort_by(|a, b| {
        let ka: Vec<&[Rational]> = a.basis().collect();
        let kb: Vec<&[Rational]> = b.basis().collect();
        kb.cmp(&ka)
    });
    kept
}

// ---------------------------------------------------------------------------
// Scans

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Locus {
    pub label: String,
    pub equations: Vec<String>,
    pub dimension: usize,
    pub verdict: Verdict,
    /// Grid points lying on this locus.
    pub grid_points: usize,
    #[serde(skip)]
    pub span: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSummary {
    #[serde(with = "serde_rational_vec")]
    pub params: Vec<Rational>,
    pub verdict: Verdict,
    /// Largest residual entry at `Π = 0`.
    #[serde(with = "serde_rational")]
    pub residual_norm: Rational,
    #[serde(with = "serde_rational_vec")]
    pub pi: Vec<Rational>,
    pub loci: Vec<String>,
    /// Verdict of the doubled formulation, for the principal chiral family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubled_verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub family: String,
    pub params: Vec<String>,
    pub points: Vec<PointSummary>,
    pub loci: Vec<Locus>,
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut out = self.params.join(",");
        let doubled = self.points.iter().any(|p| p.doubled_verdict.is_some());
        out.push_str(",verdict,residual_norm,pi,loci");
        if doubled {
            out.push_str(",doubled_verdict");
        }
        out.push('\n');
        for p in &self.points {
            let params: Vec<String> = p.params.iter().map(format_rational).collect();
            let pi: Vec<String> = p.pi.iter().map(format_rational).collect();
            out.push_str(&format!(
                "{},{},{},{},{}",
                params.join(","),
                p.verdict,
                format_rational(&p.residual_norm),
                pi.join(" "),
                p.loci.join(" ")
            ));
            if doubled {
                out.push_str(&format!(",{}", p.doubled_verdict.map(|v| v.to_string()).unwrap_or_default()));
            }
            out.push('\n');
        }
        out
    }

    pub fn pretty(&self) -> String {
        let mut out = format!("family {} over {} grid points\n", self.family, self.points.len());
        let count = |v: Verdict| self.points.iter().filter(|p| p.verdict == v).count();
        out.push_str(&format!(
            "  integrable: {}, with constraints: {}, not integrable: {}\n",
            count(Verdict::Integrable),
            count(Verdict::IntegrableWithConstraints),
            count(Verdict::NotIntegrable)
        ));
        out.push_str("loci:\n");
        for l in &self.loci {
            out.push_str(&format!("  {:<18} {:<28} {} ({} grid points)\n", l.label, l.equations.join(", "), l.verdict, l.grid_points));
        }
        if self.points.iter().any(|p| p.doubled_verdict.is_some()) {
            let bad = self.points.iter().filter(|p| p.doubled_verdict == Some(Verdict::NotIntegrable)).count();
            out.push_str(&format!("doubled formulation: {bad} non-integrable points with beta != 0\n"));
        }
        out
    }
}

/// Every tuple of `values` of length `m`, lexicographic.
pub fn lattice(values: &[Rational], m: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Rational>| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// `lo, lo + step, ..., ≤ hi`.
pub fn range_values(lo: &Rational, hi: &Rational, step: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    if step <= &Rational::zero() {
        return out;
    }
    let mut x = lo.clone();
    while &x <= hi {
        out.push(x.clone());
        x += step;
    }
    out
}

fn in_span(span: &[Vec<Rational>], theta: &[Rational]) -> bool {
    span_space(span, theta.len()).contains(theta)
}

fn generic_point(span: &[Vec<Rational>], m: usize) -> Vec<Rational> {
    let mut p = vec![Rational::zero(); m];
    for (i, v) in span.iter().enumerate() {
        let w = q(2 * i as i64 + 3);
        for (a, b) in p.iter_mut().zip(v) {
            *a += &w * b;
        }
    }
    p
}

fn summarize(family: &LinearGradedFamily, theta: &[Rational], loci: &[Locus]) -> Result<PointSummary> {
    let pair = family.pair(theta)?;
    let report = check_graded(&family.algebra, &pair)?;
    let residual_norm = match &report.residuals {
        Residuals::Graded(t) => t.residual.iter().flatten().map(crate::rational::abs).max().unwrap_or_else(Rational::zero),
        Residuals::General { .. } => Rational::zero(),
    };
    let pi = report.chosen_pi.as_ref().map(|v| v.iter().map(|s| s.value.clone()).collect()).unwrap_or_default();
    let labels = loci.iter().filter(|l| in_span(&l.span, theta)).map(|l| l.label.clone()).collect();
    Ok(PointSummary { params: theta.to_vec(), verdict: report.verdict, residual_norm, pi, loci: labels, doubled_verdict: None })
}

/// Discovers the loci of `family` and checks every grid point.
pub fn scan(family: &LinearGradedFamily, grid: &[Vec<Rational>], exec: Exec) -> Result<ScanResult> {
    let m = family.n_params();
    let mut loci = Vec::new();
    for (i, span) in family.discover_loci().into_iter().enumerate() {
        let witness = generic_point(&span, m);
        let verdict = check_graded(&family.algebra, &family.pair(&witness)?)?.verdict;
        loci.push(Locus {
            label: family.label_for(&span).unwrap_or_else(|| format!("locus-{i}")),
            equations: family.equations(&span),
            dimension: span.len(),
            verdict,
            grid_points: 0,
            span,
        });
    }
    let points: Vec<PointSummary> =
        par::map(exec, grid, |theta| summarize(family, theta, &loci)).into_iter().collect::<Result<Vec<_>>>()?;
    for l in &mut loci {
        l.grid_points = points.iter().filter(|p| p.loci.contains(&l.label)).count();
    }
    Ok(ScanResult { family: family.name.clone(), params: family.params.clone(), points, loci })
}

/// General Z₂ family with pairs assembled from the action data: symmetric part
/// `(β, γ)` per grade, no antisymmetric part, WZ coefficient `α`.
pub fn scan_general_z2(grid: &[Vec<Rational>], exec: Exec) -> Result<ScanResult> {
    let family = LinearGradedFamily::general_z2()?;
    for theta in grid {
        let from_action = ChiralOperatorPair::from_action(
            &family.algebra,
            &OperatorPart::Eigenvalues(vec![theta[1].clone(), theta[2].clone()]),
            &OperatorPart::Eigenvalues(vec![Rational::zero(), Rational::zero()]),
            theta[0].clone(),
        )?;
        debug_assert_eq!(from_action.eigenvalues(), family.pair(theta)?.eigenvalues());
    }
    scan(&family, grid, exec)
}

/// Gauge-fixed principal chiral family, plus the doubled formulation at every
/// point with `β ≠ 0`.
pub fn scan_pcm(grid: &[Vec<Rational>], exec: Exec) -> Result<ScanResult> {
    let family = LinearGradedFamily::pcm()?;
    let mut result = scan(&family, grid, exec)?;
    let doubled: Vec<Option<Verdict>> = par::map(exec, grid, |theta| -> Result<Option<Verdict>> {
        if theta[1].is_zero() {
            return Ok(None);
        }
        let m = catalog::pcm_doubled(&theta[0], &theta[1])?;
        Ok(Some(check_general(&m.algebra, &m.pair, Exec::Sequential)?.verdict))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for (p, d) in result.points.iter_mut().zip(doubled) {
        p.doubled_verdict = d;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm_loci() {
        let f = LinearGradedFamily::pcm().unwrap();
        let loci = f.discover_loci();
        let mut labels: Vec<String> = loci.iter().map(|s| f.label_for(s).unwrap()).collect();
        labels.sort();
        assert_eq!(labels, vec!["constrained", "wzw", "wzw-mirror"]);
    }

    #[test]
    fn general_z2_loci() {
        let f = LinearGradedFamily::general_z2().unwrap();
        let loci = f.discover_loci();
        let mut labels: Vec<String> = loci.iter().map(|s| f.label_for(s).unwrap_or_else(|| format!("{s:?}"))).collect();
        labels.sort();
        assert_eq!(
            labels,
            vec!["new-model", "new-model-mirror", "pcm-wzw", "pcm-wzw-mirror", "symmetric-space", "wz-only"]
        );
        let new_model = loci.iter().find(|s| f.label_for(s).as_deref() == Some("new-model")).unwrap();
        assert_eq!(f.equations(new_model), vec!["alpha = beta", "gamma = 0"]);
    }

    #[test]
    fn lattice_size() {
        let v = range_values(&q(-3), &q(3), &q(1));
        assert_eq!(v.len(), 7);
        assert_eq!(lattice(&v, 3).len(), 343);
    }
}
