//! Canonical submodular / supermodular decomposition `l = f* + g*`.
//!
//! `g*` is the non-negative supermodular function with the smallest total
//! `Σ_A g(A)` such that `l - g*` is submodular. It is computed by a linear
//! program whose rows are local exchange inequalities. Symmetric losses and
//! losses that only depend on false-negative / false-positive counts get
//! reduced LPs of linear and quadratic size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{
    solve_lp_with, Constraint, LpProblem, LpSolution, LpStatus, RowKind, SolveOptions, VarMeta,
};
use crate::scalar::Scalar;
use crate::setfn::{binomial, check_structure, Repr, SetFunction, StructureReport, Subset};

/// Largest ground set for which the full `2^p - 1` variable LP is built.
pub const FULL_LP_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Full,
    Symmetric,
    Fpfn,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "full" => Ok(Method::Full),
            "symmetric" => Ok(Method::Symmetric),
            "fpfn" => Ok(Method::Fpfn),
            other => Err(Error::Config(format!("unknown decomposition method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition<T> {
    /// Supermodular, non-negative, increasing part.
    pub g_star: SetFunction<T>,
    /// Submodular remainder `l - g*`.
    pub f_star: SetFunction<T>,
    pub certificate: LpSolution<T>,
    /// LP actually solved.
    pub method: Method,
    /// Factor turning the certificate objective into `Σ_A g*(A)`.
    pub objective_scale: T,
}

/// Snaps right-hand sides that are pure rounding noise to zero.
fn clean_rhs<T: Scalar>(v: T) -> T {
    if v.abs() <= T::pivot_tolerance() {
        T::zero()
    } else {
        v
    }
}

/// Exchange gap `h(A∪i) + h(A∪j) - h(A) - h(A∪{i,j})` of a table.
fn exchange_gap<T: Scalar>(table: &[T], a: usize, i: usize, j: usize) -> T {
    table[a | 1 << i].clone() + table[a | 1 << j].clone() - table[a].clone() - table[a | 1 << i | 1 << j].clone()
}

/// Full LP over `g(A)` for every non-empty `A` (variable `A - 1`).
pub fn build_full_lp<T: Scalar>(l: &SetFunction<T>) -> Result<LpProblem<T>> {
    let p = l.p();
    l.ground().require_exhaustive(FULL_LP_CAP)?;
    let table = l.table(FULL_LP_CAP)?;
    let n = (1usize << p) - 1;
    let var = |a: usize| a - 1;

    // Coefficients of `g(A∪{i,j}) + g(A) - g(A∪i) - g(A∪j)`; g(∅) is fixed at 0.
    let second_difference = |a: usize, i: usize, j: usize| {
        let mut coeffs = vec![(var(a | 1 << i | 1 << j), T::one())];
        if a != 0 {
            coeffs.push((var(a), T::one()));
        }
        coeffs.push((var(a | 1 << i), -T::one()));
        coeffs.push((var(a | 1 << j), -T::one()));
        coeffs
    };

    let mut supermodular = Vec::new();
    let mut submodular = Vec::new();
    for a in 0..=n {
        for i in 0..p {
            if a >> i & 1 == 1 {
                continue;
            }
            for j in (i + 1)..p {
                if a >> j & 1 == 1 {
                    continue;
                }
                let coeffs = second_difference(a, i, j);
                supermodular.push(Constraint { coeffs: coeffs.clone(), rhs: T::zero(), kind: RowKind::Supermodular });
                // (l - g) submodular: l-gap - g-gap >= 0, i.e. -g-gap >= -l-gap.
                submodular.push(Constraint {
                    coeffs,
                    rhs: clean_rhs(-exchange_gap(&table, a, i, j)),
                    kind: RowKind::Submodular,
                });
            }
        }
    }
    let nonnegative = (0..p).map(|j| Constraint {
        coeffs: vec![(var(1 << j), T::one())],
        rhs: T::zero(),
        kind: RowKind::Nonnegative,
    });

    let mut constraints = supermodular;
    constraints.extend(nonnegative);
    constraints.extend(submodular);
    Ok(LpProblem {
        objective: vec![T::one(); n],
        constraints,
        variables: (1..=n).map(|a| VarMeta::Subset(a as u128)).collect(),
    })
}

/// Linear-size LP over a symmetric profile: variables `c_g[1..=p]`
/// (variable `k - 1`), objective weights `binom(p, k)` divided by their
/// largest value.
///
/// The optimum is the pointwise-smallest feasible profile, so any positive
/// weighting selects it; the rescaling only keeps the weights near 1 when
/// `binom(p, k)` would otherwise reach 1e29 at `p = 100`.
pub fn build_symmetric_lp<T: Scalar>(c: &[T], p: usize) -> Result<LpProblem<T>> {
    if c.len() != p + 1 || p == 0 {
        return Err(Error::InvalidSetFunction(format!(
            "symmetric profile for p={p} needs {} entries, got {}",
            p + 1,
            c.len()
        )));
    }
    if !c[0].is_zero() {
        return Err(Error::InvalidSetFunction("symmetric profile must have c[0] = 0".into()));
    }
    // Second difference centred at k: x[k+1] - 2 x[k] + x[k-1], with x[0] = 0.
    let second_difference = |k: usize| {
        let mut coeffs = vec![(k, T::one()), (k - 1, -(T::one() + T::one()))];
        if k >= 2 {
            coeffs.push((k - 2, T::one()));
        }
        coeffs
    };
    let mut constraints = Vec::new();
    for k in 1..p {
        constraints.push(Constraint { coeffs: second_difference(k), rhs: T::zero(), kind: RowKind::Supermodular });
    }
    constraints.push(Constraint { coeffs: vec![(0, T::one())], rhs: T::zero(), kind: RowKind::Nonnegative });
    for k in 1..p {
        let d2 = c[k + 1].clone() - c[k].clone() - c[k].clone() + c[k - 1].clone();
        constraints.push(Constraint { coeffs: second_difference(k), rhs: clean_rhs(d2), kind: RowKind::Submodular });
    }
    Ok(LpProblem {
        objective: normalise_weights((1..=p).map(|k| binomial::<T>(p, k)).collect()),
        constraints,
        variables: (1..=p).map(VarMeta::Cardinality).collect(),
    })
}

fn weight_scale<T: Scalar>(w: &[T]) -> T {
    let top = w.iter().cloned().fold(T::zero(), T::max_of);
    if top.is_zero() {
        T::one()
    } else {
        top
    }
}

fn normalise_weights<T: Scalar>(w: Vec<T>) -> Vec<T> {
    let top = weight_scale(&w);
    w.into_iter().map(|v| v / top.clone()).collect()
}

/// Largest subset-count weight of the reduced LPs: `max_k binom(p, k)` for a
/// symmetric profile, `max_a binom(m, a) · max_b binom(p_neg, b)` for a grid.
pub fn reduced_objective_scale<T: Scalar>(method: Method, p: usize, m: usize) -> T {
    let row = |n: usize| weight_scale(&(0..=n).map(|k| binomial::<T>(n, k)).collect::<Vec<_>>());
    match method {
        Method::Symmetric => row(p),
        Method::Fpfn => row(m) * row(p - m),
        Method::Full | Method::Auto => T::one(),
    }
}

/// Quadratic-size LP over a `(m + 1) x (p_neg + 1)` grid indexed by
/// (false negatives, false positives), weighted by `binom(m, a) binom(p_neg, b)`
/// and normalised like the symmetric LP. Variable for `(a, b)` is
/// `a * (p_neg + 1) + b - 1`.
pub fn build_fpfn_lp<T: Scalar>(c: &[T], m: usize, p_neg: usize) -> Result<LpProblem<T>> {
    let cols = p_neg + 1;
    if c.len() != (m + 1) * cols {
        return Err(Error::Dimension(format!(
            "fpfn grid must be {}x{} = {} values, got {}",
            m + 1,
            cols,
            (m + 1) * cols,
            c.len()
        )));
    }
    if !c[0].is_zero() {
        return Err(Error::InvalidSetFunction("fpfn grid must have c(0,0) = 0".into()));
    }
    let cell = |a: usize, b: usize| a * cols + b;
    let var = |a: usize, b: usize| cell(a, b) - 1;
    // Mixed second difference h(x) + h(y) - h(x + u) - h(x + v) reversed so that
    // `coeffs·g >= 0` is the supermodular direction.
    let stencil = |base: (usize, usize), du: (usize, usize), dv: (usize, usize)| {
        let (a, b) = base;
        let plus = |d: (usize, usize)| (a + d.0, b + d.1);
        let top = (a + du.0 + dv.0, b + du.1 + dv.1);
        let terms = [(top, 1i64), (base, 1), (plus(du), -1), (plus(dv), -1)];
        let coeffs: Vec<(usize, T)> = terms
            .iter()
            .filter(|((x, y), _)| (*x, *y) != (0, 0))
            .map(|((x, y), s)| (var(*x, *y), T::ratio(*s, 1)))
            .collect();
        let gap = terms
            .iter()
            .fold(T::zero(), |acc, ((x, y), s)| acc + T::ratio(*s, 1) * c[cell(*x, *y)].clone());
        (coeffs, gap)
    };
    let mut shapes = Vec::new();
    for a in 0..=m {
        for b in 0..=p_neg {
            if a + 2 <= m {
                shapes.push(stencil((a, b), (1, 0), (1, 0)));
            }
            if b + 2 <= p_neg {
                shapes.push(stencil((a, b), (0, 1), (0, 1)));
            }
            if a < m && b < p_neg {
                shapes.push(stencil((a, b), (1, 0), (0, 1)));
            }
        }
    }
    let mut constraints: Vec<Constraint<T>> = shapes
        .iter()
        .map(|(coeffs, _)| Constraint { coeffs: coeffs.clone(), rhs: T::zero(), kind: RowKind::Supermodular })
        .collect();
    if m >= 1 {
        constraints.push(Constraint { coeffs: vec![(var(1, 0), T::one())], rhs: T::zero(), kind: RowKind::Nonnegative });
    }
    if p_neg >= 1 {
        constraints.push(Constraint { coeffs: vec![(var(0, 1), T::one())], rhs: T::zero(), kind: RowKind::Nonnegative });
    }
    constraints.extend(
        shapes
            .into_iter()
            .map(|(coeffs, gap)| Constraint { coeffs, rhs: clean_rhs(gap), kind: RowKind::Submodular }),
    );
    let n = (m + 1) * cols - 1;
    Ok(LpProblem {
        objective: normalise_weights(
            (1..=n)
                .map(|k| binomial::<T>(m, k / cols) * binomial::<T>(p_neg, k % cols))
                .collect(),
        ),
        constraints,
        variables: (1..=n).map(|k| VarMeta::Counts(k / cols, k % cols)).collect(),
    })
}

fn require_optimal<T: Scalar>(sol: &LpSolution<T>, what: &str) -> Result<()> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp {
            status: format!("{:?}", sol.status).to_lowercase(),
            detail: format!("{what} decomposition LP must be feasible and bounded; this is an internal error"),
        });
    }
    Ok(())
}

/// `D l` with automatic method dispatch.
pub fn decompose<T: Scalar>(l: &SetFunction<T>) -> Result<Decomposition<T>> {
    decompose_with(l, Method::Auto, &SolveOptions::default())
}

pub fn decompose_with<T: Scalar>(l: &SetFunction<T>, method: Method, opts: &SolveOptions) -> Result<Decomposition<T>> {
    let p = l.p();
    let method = match (method, l.repr()) {
        (Method::Auto, Repr::Symmetric(_)) => Method::Symmetric,
        (Method::Auto, Repr::FpFn { .. }) => Method::Fpfn,
        (Method::Auto, _) => Method::Full,
        (m, _) => m,
    };
    let g_star = match method {
        Method::Symmetric => {
            let Repr::Symmetric(c) = l.repr() else {
                return Err(Error::Config("symmetric method needs a symmetric profile".into()));
            };
            let prob = build_symmetric_lp(c, p)?;
            let sol = solve_lp_with(&prob, opts)?;
            require_optimal(&sol, "symmetric")?;
            let mut profile = vec![T::zero()];
            profile.extend(sol.x.iter().cloned());
            (SetFunction::symmetric(profile)?, sol)
        }
        Method::Fpfn => {
            let Repr::FpFn { grid, m, positives } = l.repr() else {
                return Err(Error::Config("fpfn method needs an fpfn grid".into()));
            };
            let prob = build_fpfn_lp(grid, *m, p - m)?;
            let sol = solve_lp_with(&prob, opts)?;
            require_optimal(&sol, "fpfn")?;
            let mut g = vec![T::zero()];
            g.extend(sol.x.iter().cloned());
            (SetFunction::fpfn(p, *m, *positives, g)?, sol)
        }
        Method::Full | Method::Auto => {
            let prob = build_full_lp(l)?;
            let sol = solve_lp_with(&prob, opts)?;
            require_optimal(&sol, "full")?;
            let mut g = vec![T::zero()];
            g.extend(sol.x.iter().cloned());
            (SetFunction::dense(p, g)?, sol)
        }
    };
    let (g_star, certificate) = g_star;
    let f_star = l.sub(&g_star)?;
    let m = match l.repr() {
        Repr::FpFn { m, .. } => *m,
        _ => 0,
    };
    let objective_scale = reduced_objective_scale(method, p, m);
    Ok(Decomposition { g_star, f_star, certificate, method, objective_scale })
}

impl<T: Scalar> Decomposition<T> {
    /// Reuses this decomposition for another loss with the same reduced
    /// structure: a symmetric profile of the same `p`, or an fpfn grid with the
    /// same `(p, m)` but possibly different positive positions. `g*` is carried
    /// over on the reduced coordinates and `f*` is recomputed as `l - g*`.
    pub fn transplant(&self, l: &SetFunction<T>) -> Result<Self> {
        let g_star = match (self.g_star.repr(), l.repr()) {
            (Repr::Symmetric(c), Repr::Symmetric(_)) if self.g_star.p() == l.p() => SetFunction::symmetric(c.clone())?,
            (Repr::FpFn { grid, m, .. }, Repr::FpFn { m: lm, positives, .. }) if self.g_star.p() == l.p() && m == lm => {
                SetFunction::fpfn(l.p(), *m, *positives, grid.clone())?
            }
            _ => {
                return Err(Error::Config(
                    "a decomposition can only be transplanted between losses of the same reduced shape".into(),
                ))
            }
        };
        let f_star = l.sub(&g_star)?;
        Ok(Self { g_star, f_star, certificate: self.certificate.clone(), method: self.method, objective_scale: self.objective_scale.clone() })
    }

    /// `Σ_A g*(A)`, the minimised objective.
    pub fn objective(&self, cap: usize) -> Result<T> {
        self.g_star.total(cap)
    }

    /// Whether `f*` is non-negative everywhere (exhaustive for dense/oracle,
    /// exact over the profile or grid otherwise).
    pub fn f_star_nonnegative(&self) -> Result<bool> {
        let neg_tol = -T::tolerance();
        Ok(match self.f_star.repr() {
            Repr::Symmetric(c) => c.iter().all(|v| *v >= neg_tol),
            Repr::FpFn { grid, .. } => grid.iter().all(|v| *v >= neg_tol),
            _ => self.f_star.table(crate::setfn::DEFAULT_EXHAUSTIVE_CAP)?.iter().all(|v| *v >= neg_tol),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    /// `max_A |f*(A) + g*(A) - l(A)|`.
    pub additivity_residual: f64,
    pub g_structure: StructureReport,
    pub f_structure: StructureReport,
    pub f_star_nonnegative: bool,
    pub certificate_optimal: bool,
    pub certificate_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
    /// `Σ g*` minus the rescaled certificate objective, relative to `max(1, |Σ g*|)`.
    /// Non-zero means `g*` is not the LP minimiser.
    pub objective_excess: f64,
}

impl VerifyReport {
    /// Every defining property of the canonical decomposition holds.
    pub fn passes(&self, tol: f64) -> bool {
        self.additivity_residual <= tol
            && self.g_structure.is_supermodular
            && self.g_structure.is_nonnegative
            && self.g_structure.is_increasing
            && self.f_structure.is_submodular
            && self.certificate_optimal
            && self.certificate_gap <= tol
            && self.objective_excess.abs() <= tol
    }
}

/// Exhaustively re-checks a decomposition against `l`.
pub fn verify_decomposition<T: Scalar>(d: &Decomposition<T>, l: &SetFunction<T>, cap: usize) -> Result<VerifyReport> {
    let tol = T::tolerance();
    let sum = d.f_star.add(&d.g_star)?;
    let additivity_residual = sum.max_abs_diff(l, cap)?.to_f64_lossy();
    let g_structure = check_structure(&d.g_star, &tol, cap)?;
    let f_structure = check_structure(&d.f_star, &tol, cap)?;
    let f_star_nonnegative = f_structure.is_nonnegative;
    let cert = &d.certificate;
    let total = d.g_star.total(cap)?;
    let denom = T::max_of(T::one(), total.abs());
    let objective_excess = ((total - cert.objective.clone() * d.objective_scale.clone()) / denom).to_f64_lossy();
    Ok(VerifyReport {
        additivity_residual,
        g_structure,
        f_structure,
        f_star_nonnegative,
        certificate_optimal: cert.status == LpStatus::Optimal,
        certificate_gap: cert.duality_gap().to_f64_lossy(),
        primal_residual: cert.primal_residual.to_f64_lossy(),
        dual_residual: cert.dual_residual.to_f64_lossy(),
        complementarity: cert.complementarity.to_f64_lossy(),
        objective_excess,
    })
}

/// Convenience: decomposition of a loss that is known to be submodular
/// (`g* = 0`) without solving anything.
pub fn trivial_decomposition<T: Scalar>(l: &SetFunction<T>) -> Result<Decomposition<T>> {
    let g_star = SetFunction::zero(l.p())?;
    let prob = LpProblem { objective: vec![], constraints: vec![], variables: vec![] };
    Ok(Decomposition {
        f_star: l.clone(),
        g_star,
        certificate: prob.certificate(vec![], vec![], 0),
        method: Method::Auto,
        objective_scale: T::one(),
    })
}

/// Helper used by tests and the CLI: the supermodular closed form
/// `g(S) = l(S) - Σ_{j∈S} l({j})`.
pub fn supermodular_closed_form<T: Scalar>(l: &SetFunction<T>, cap: usize) -> Result<SetFunction<T>> {
    let singles: Vec<T> = (0..l.p()).map(|j| l.eval(Subset::singleton(j))).collect();
    l.sub(&SetFunction::modular(singles)?.to_dense(cap)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LpRoute};
    use num_rational::BigRational;

    #[test]
    fn full_lp_sizes() {
        let l = SetFunction::<f64>::symmetric(vec![0., 1., 1.]).unwrap();
        let prob = build_full_lp(&l).unwrap();
        assert_eq!(prob.num_vars(), 3);
        assert_eq!(prob.count_rows(RowKind::Supermodular), 1);
        assert_eq!(prob.count_rows(RowKind::Submodular), 1);
        assert_eq!(prob.count_rows(RowKind::Nonnegative), 2);

        let l = SetFunction::<f64>::symmetric(vec![0., 1., 1., 2.]).unwrap();
        let prob = build_full_lp(&l).unwrap();
        assert_eq!(prob.num_vars(), 7);
        assert_eq!(prob.count_rows(RowKind::Supermodular), 6);
        assert_eq!(prob.count_rows(RowKind::Submodular), 6);
        assert_eq!(prob.count_rows(RowKind::Nonnegative), 3);

        let l = SetFunction::<f64>::symmetric(vec![0., 4.]).unwrap();
        let prob = build_full_lp(&l).unwrap();
        assert_eq!((prob.num_vars(), prob.num_rows()), (1, 1));
        let d = decompose_with(&l, Method::Full, &Default::default()).unwrap();
        assert_eq!(d.g_star.eval(Subset::singleton(0)), 0.0);
    }

    #[test]
    fn full_lp_cap() {
        let l = SetFunction::<f64>::zero(13).unwrap();
        assert!(matches!(build_full_lp(&l), Err(Error::AboveCap { .. })));
    }

    #[test]
    fn symmetric_lp_example() {
        let c: Vec<f64> = vec![0., 1., 1., 2.];
        let prob = build_symmetric_lp(&c, 3).unwrap();
        let sol = solve_lp(&prob).unwrap();
        // Weights binom(3, k) / 3.
        assert!((sol.objective - 1.0 / 3.0).abs() < 1e-12);
        assert!(sol.x.iter().zip([0.0_f64, 0., 1.]).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn symmetric_closed_forms() {
        let concave = SetFunction::<f64>::symmetric(vec![0., 1., 1.5, 1.75, 1.8]).unwrap();
        let d = decompose(&concave).unwrap();
        assert!(matches!(d.g_star.repr(), Repr::Symmetric(c) if c.iter().all(|v| *v == 0.0)));

        let convex = SetFunction::<f64>::symmetric(vec![0., 1., 3., 6.]).unwrap();
        let d = decompose(&convex).unwrap();
        let Repr::Symmetric(cg) = d.g_star.repr() else { panic!() };
        for (a, b) in cg.iter().zip([0., 0., 1., 3.]) {
            assert!((a - b).abs() < 1e-12, "{cg:?}");
        }
    }

    #[test]
    fn decompose_symmetric_example() {
        let l = SetFunction::<f64>::symmetric(vec![0., 1., 1., 2.]).unwrap();
        let d = decompose(&l).unwrap();
        assert_eq!(d.method, Method::Symmetric);
        let Repr::Symmetric(cf) = d.f_star.repr() else { panic!() };
        for (a, b) in cf.iter().zip([0., 1., 1., 1.]) {
            assert!((a - b).abs() < 1e-12);
        }
        let report = verify_decomposition(&d, &l, 16).unwrap();
        assert!(report.passes(1e-8), "{report:?}");
    }

    #[test]
    fn fpfn_bilinear_and_modular() {
        let (m, n) = (2, 3);
        let grid: Vec<f64> = (0..(m + 1) * (n + 1)).map(|k| ((k / (n + 1)) * (k % (n + 1))) as f64).collect();
        let l = SetFunction::fpfn_leading(m, n, grid.clone()).unwrap();
        let d = decompose(&l).unwrap();
        assert!(d.g_star.max_abs_diff(&l, 16).unwrap() < 1e-9);

        let grid: Vec<f64> = (0..(m + 1) * (n + 1)).map(|k| (k / (n + 1) + k % (n + 1)) as f64).collect();
        let l = SetFunction::fpfn_leading(m, n, grid).unwrap();
        let d = decompose(&l).unwrap();
        assert!(d.g_star.table(16).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn fpfn_dimension_mismatch() {
        assert!(matches!(build_fpfn_lp(&[0.0, 1.0, 2.0], 1, 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn tampering_is_flagged() {
        let l = SetFunction::<f64>::dense(3, vec![0., 0.3, 0.2, 0.9, 0.4, 0.5, 0.6, 0.7]).unwrap();
        let mut d = decompose(&l).unwrap();
        assert!(verify_decomposition(&d, &l, 16).unwrap().passes(1e-8));
        let mut table = d.g_star.table(16).unwrap();
        table[5] += 1e-3;
        d.g_star = SetFunction::dense(3, table).unwrap();
        let report = verify_decomposition(&d, &l, 16).unwrap();
        assert!(report.additivity_residual > 1e-4);
        assert!(!report.passes(1e-8));
    }

    #[test]
    fn routes_and_orders_agree_exactly_in_rationals() {
        let r = |n, d| BigRational::ratio(n, d);
        let values = vec![r(0, 1), r(1, 3), r(1, 2), r(1, 1), r(1, 5), r(2, 3), r(3, 4), r(6, 5)];
        let l = SetFunction::dense(3, values).unwrap();
        let base = decompose(&l).unwrap();
        for route in [LpRoute::Primal, LpRoute::Dual] {
            let opts = SolveOptions { route, variable_order: Some((0..7).rev().collect()), max_pivots: None };
            let other = decompose_with(&l, Method::Full, &opts).unwrap();
            assert_eq!(other.g_star.table(16).unwrap(), base.g_star.table(16).unwrap());
        }
        let report = verify_decomposition(&base, &l, 16).unwrap();
        assert!(report.passes(0.0));
    }
}
