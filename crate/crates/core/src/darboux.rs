//! Darboux polynomials, exponential factors and the cofactor obstruction for
//! the two smooth branches of the system.
//!
//! Every verdict here is exact: it either exhibits the zero polynomial as
//! the residual of the defining identity, or returns the nonzero residual.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linsolve;
use crate::polyalg::{Monomial, Poly3, PolyError, Rat, Var};

/// Largest degree accepted by the bounded search.
pub const MAX_SEARCH_DEGREE: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DarbouxError {
    #[error("cofactor has degree {0}, at most 1 is allowed")]
    CofactorDegree(u32),
    #[error("candidate is constant")]
    ConstantCandidate,
    #[error("exponential factor has a zero denominator")]
    ZeroDenominator,
    #[error("denominator divides numerator; g and h are not coprime")]
    NotCoprime,
    #[error("search degree {0} exceeds {MAX_SEARCH_DEGREE}")]
    SearchDegree(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Which half-space the smooth branch is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `y >= 0`, where `|y| = y`.
    Upper,
    /// `y < 0`, where `|y| = -y`.
    Lower,
}

impl Branch {
    pub fn sigma(self) -> i64 {
        match self {
            Branch::Upper => 1,
            Branch::Lower => -1,
        }
    }

    pub fn from_sigma(sigma: i64) -> Option<Branch> {
        match sigma {
            1 => Some(Branch::Upper),
            -1 => Some(Branch::Lower),
            _ => None,
        }
    }
}

/// Polynomial vector field `(y, -a x + y z, sigma b y - c x y - x^2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchField {
    pub branch: Branch,
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    components: [Poly3; 3],
}

impl BranchField {
    pub fn new(branch: Branch, a: Rat, b: Rat, c: Rat) -> Self {
        let (x, y, z) = (Poly3::x(), Poly3::y(), Poly3::z());
        let sb = Rat::from_integer(branch.sigma().into()) * &b;
        let p = y.clone();
        let q = &(&y * &z) - &x.scale(&a);
        let r = &(&y.scale(&sb) - &(&x * &y).scale(&c)) - &(&x * &x);
        BranchField {
            branch,
            a,
            b,
            c,
            components: [p, q, r],
        }
    }

    pub fn from_ints(branch: Branch, a: i64, b: i64, c: i64) -> Self {
        let r = |v: i64| Rat::from_integer(v.into());
        BranchField::new(branch, r(a), r(b), r(c))
    }

    pub fn components(&self) -> &[Poly3; 3] {
        &self.components
    }

    /// `X(f) = P f_x + Q f_y + R f_z`.
    pub fn lie_derivative(&self, f: &Poly3) -> Result<Poly3, PolyError> {
        let mut acc = Poly3::zero();
        for (comp, var) in self.components.iter().zip(Var::ALL) {
            let d = f.diff(var);
            if !d.is_zero() {
                acc = &acc + &comp.checked_mul(&d)?;
            }
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// Left-hand side of the checked identity.
    pub lhs: Poly3,
    /// Right-hand side of the checked identity.
    pub rhs: Poly3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DarbouxVerdict {
    pub passed: bool,
    pub residual: Poly3,
    pub certificate: Certificate,
}

impl DarbouxVerdict {
    fn from_identity(lhs: Poly3, rhs: Poly3) -> Self {
        let residual = &lhs - &rhs;
        DarbouxVerdict {
            passed: residual.is_zero(),
            residual,
            certificate: Certificate { lhs, rhs },
        }
    }
}

fn check_cofactor(k: &Poly3) -> Result<(), DarbouxError> {
    match k.degree() {
        Some(d) if d > 1 => Err(DarbouxError::CofactorDegree(d)),
        _ => Ok(()),
    }
}

/// Checks `X(f) = K f`.
pub fn verify_darboux(vf: &BranchField, f: &Poly3, k: &Poly3) -> Result<DarbouxVerdict, DarbouxError> {
    check_cofactor(k)?;
    if f.is_constant() {
        return Err(DarbouxError::ConstantCandidate);
    }
    let lhs = vf.lie_derivative(f)?;
    let rhs = k.checked_mul(f)?;
    Ok(DarbouxVerdict::from_identity(lhs, rhs))
}

/// The unique cofactor of `f`, if `f` is a Darboux polynomial.
pub fn solve_cofactor(vf: &BranchField, f: &Poly3) -> Result<Option<Poly3>, DarbouxError> {
    if f.is_constant() {
        return Err(DarbouxError::ConstantCandidate);
    }
    let xf = vf.lie_derivative(f)?;
    Ok(xf
        .div_exact(f)
        .filter(|k| k.degree().is_none_or(|d| d <= 1)))
}

/// Basis of the non-constant polynomials `f` of degree `<= degree` solving
/// the linear system `X(f) - K f = 0` for a fixed cofactor `K`.
///
/// For `K = 0` every constant is a solution; the constant monomial is left
/// out of the unknowns, so an empty result means "only constants".
pub fn search_darboux_fixed_cofactor(
    vf: &BranchField,
    degree: u32,
    k: &Poly3,
) -> Result<Vec<Poly3>, DarbouxError> {
    check_cofactor(k)?;
    if degree > MAX_SEARCH_DEGREE {
        return Err(DarbouxError::SearchDegree(degree));
    }
    let lo = if k.is_zero() { 1 } else { 0 };
    let unknowns = Monomial::all_up_to(lo, degree);
    let equations = Monomial::all_up_to(0, degree + 1);
    let row_of = |m: &Monomial| equations.binary_search(m).expect("image degree <= d + 1");

    let mut rows = vec![vec![Rat::zero(); unknowns.len()]; equations.len()];
    for (j, m) in unknowns.iter().enumerate() {
        let basis = Poly3::term(Rat::one(), *m);
        let image = &vf.lie_derivative(&basis)? - &k.checked_mul(&basis)?;
        for (em, coef) in image.terms() {
            rows[row_of(em)][j] = coef.clone();
        }
    }
    rows.retain(|row| row.iter().any(|c| !c.is_zero()));

    let basis = linsolve::nullspace(&rows, unknowns.len())
        .into_iter()
        .map(|v| {
            let terms = unknowns.iter().copied().zip(v);
            Poly3::from_terms(terms).map(|p| p.primitive())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(basis)
}

/// Runs the fixed-cofactor search for `K = n z`, `n = 1..=degree`, followed
/// by any caller-supplied cofactors.
pub fn sweep_darboux(
    vf: &BranchField,
    degree: u32,
    extra: &[Poly3],
) -> Result<Vec<(Poly3, Vec<Poly3>)>, DarbouxError> {
    let mut cofactors: Vec<Poly3> = (1..=degree as i64)
        .map(|n| Poly3::z().scale(&Rat::from_integer(n.into())))
        .collect();
    cofactors.extend(extra.iter().cloned());
    cofactors
        .into_iter()
        .map(|k| search_darboux_fixed_cofactor(vf, degree, &k).map(|found| (k, found)))
        .collect()
}

/// Checks `E = exp(g/h)` through `h X(g) - g X(h) = L h^2`.
pub fn verify_exponential_factor(
    vf: &BranchField,
    g: &Poly3,
    h: &Poly3,
    l: &Poly3,
) -> Result<DarbouxVerdict, DarbouxError> {
    if h.is_zero() {
        return Err(DarbouxError::ZeroDenominator);
    }
    check_cofactor(l)?;
    match g.div_exact(h) {
        Some(q) if q.is_constant() => return Err(DarbouxError::ConstantCandidate),
        Some(_) if !h.is_constant() => return Err(DarbouxError::NotCoprime),
        _ => {}
    }
    let lhs = &h.checked_mul(&vf.lie_derivative(g)?)? - &g.checked_mul(&vf.lie_derivative(h)?)?;
    let rhs = l.checked_mul(&h.checked_mul(h)?)?;
    Ok(DarbouxVerdict::from_identity(lhs, rhs))
}

/// Coordinates of a degree-<=1 polynomial in the basis `(1, x, y, z)`.
fn affine_coords(p: &Poly3) -> [Rat; 4] {
    [
        p.coeff(&Monomial::ONE),
        p.coeff(&Monomial::of(Var::X)),
        p.coeff(&Monomial::of(Var::Y)),
        p.coeff(&Monomial::of(Var::Z)),
    ]
}

/// All `(lambda_i, mu_j)` with `sum lambda_i K_i + sum mu_j L_j = 0`.
/// An empty basis means these building blocks admit no Darboux first
/// integral.
pub fn darboux_obstruction(
    cofactors: &[Poly3],
    exp_cofactors: &[Poly3],
) -> Result<Vec<Vec<Rat>>, DarbouxError> {
    let all: Vec<&Poly3> = cofactors.iter().chain(exp_cofactors).collect();
    for k in &all {
        check_cofactor(k)?;
    }
    let cols: Vec<[Rat; 4]> = all.iter().map(|k| affine_coords(k)).collect();
    let rows: Vec<Vec<Rat>> = (0..4)
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    Ok(linsolve::nullspace(&rows, all.len())
        .iter()
        .map(|v| linsolve::normalize(v))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly3 {
        Poly3::parse(s).unwrap()
    }

    fn q(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn field(branch: Branch, a: Rat) -> BranchField {
        BranchField::new(branch, a, q(1, 1), q(9, 1))
    }

    #[test]
    fn components_follow_the_branch_sign() {
        let up = BranchField::from_ints(Branch::Upper, 2, 3, 5);
        let down = BranchField::from_ints(Branch::Lower, 2, 3, 5);
        assert_eq!(up.components()[0], p("y"));
        assert_eq!(up.components()[1], p("-2*x + y*z"));
        assert_eq!(up.components()[2], p("3*y - 5*x*y - x^2"));
        assert_eq!(down.components()[2], p("-3*y - 5*x*y - x^2"));
        // the branches differ by a multiple of y
        let diff = &up.components()[2] - &down.components()[2];
        assert_eq!(diff.div_exact(&Poly3::y()), Some(p("6")));
    }

    #[test]
    fn lie_derivative_examples() {
        let vf = BranchField::from_ints(Branch::Lower, 1, 2, 3);
        assert_eq!(vf.lie_derivative(&p("x")).unwrap(), p("y"));
        assert_eq!(vf.lie_derivative(&p("z")).unwrap(), p("-2*y - 3*x*y - x^2"));
        let vf0 = BranchField::from_ints(Branch::Upper, 0, 2, 3);
        assert_eq!(vf0.lie_derivative(&p("y")).unwrap(), p("y*z"));
    }

    #[test]
    fn verify_examples() {
        let a0 = field(Branch::Upper, q(0, 1));
        let a1 = field(Branch::Upper, q(1, 1));
        assert!(verify_darboux(&a0, &p("y"), &p("z")).unwrap().passed);
        let v = verify_darboux(&a1, &p("y"), &p("z")).unwrap();
        assert!(!v.passed);
        assert_eq!(v.residual, p("-x"));
        assert!(verify_darboux(&a0, &p("y^3"), &p("3*z")).unwrap().passed);
    }

    #[test]
    fn verify_rejects_bad_inputs() {
        let vf = field(Branch::Upper, q(0, 1));
        assert_eq!(
            verify_darboux(&vf, &p("y"), &p("z^2")),
            Err(DarbouxError::CofactorDegree(2))
        );
        assert_eq!(
            verify_darboux(&vf, &p("7"), &p("z")),
            Err(DarbouxError::ConstantCandidate)
        );
    }

    #[test]
    fn cofactor_solving() {
        assert_eq!(
            solve_cofactor(&field(Branch::Upper, q(0, 1)), &p("y")).unwrap(),
            Some(p("z"))
        );
        assert_eq!(solve_cofactor(&field(Branch::Upper, q(5, 2)), &p("y")).unwrap(), None);
        for a in [q(0, 1), q(1, 1), q(5, 2)] {
            assert_eq!(solve_cofactor(&field(Branch::Lower, a), &p("x^2 + y^2")).unwrap(), None);
        }
        assert_eq!(
            solve_cofactor(&field(Branch::Upper, q(0, 1)), &Poly3::one()),
            Err(DarbouxError::ConstantCandidate)
        );
    }

    #[test]
    fn search_finds_y_only_when_a_vanishes() {
        let vf = field(Branch::Upper, q(0, 1));
        assert_eq!(search_darboux_fixed_cofactor(&vf, 1, &p("z")).unwrap(), vec![p("y")]);
        let vf = BranchField::new(Branch::Upper, q(5, 2), q(1, 1), q(9, 1));
        for n in 1..=3 {
            let k = Poly3::z().scale(&q(n, 1));
            assert!(search_darboux_fixed_cofactor(&vf, 3, &k).unwrap().is_empty());
        }
    }

    #[test]
    fn search_with_zero_cofactor_finds_no_first_integral() {
        for a in [-1, 0, 1, 3] {
            for branch in [Branch::Upper, Branch::Lower] {
                let vf = BranchField::from_ints(branch, a, 2, -1);
                assert!(search_darboux_fixed_cofactor(&vf, 2, &Poly3::zero()).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn search_degree_is_bounded() {
        let vf = field(Branch::Upper, q(0, 1));
        assert_eq!(
            search_darboux_fixed_cofactor(&vf, 11, &p("z")),
            Err(DarbouxError::SearchDegree(11))
        );
    }

    #[test]
    fn exponential_factor_examples() {
        for (a, b, c) in [(-1, 0, 1), (0, 1, 0), (3, -2, 9)] {
            let vf = BranchField::from_ints(Branch::Upper, a, b, c);
            let v = verify_exponential_factor(&vf, &p("x"), &Poly3::one(), &p("y")).unwrap();
            assert!(v.passed);
        }
        let vf = field(Branch::Upper, q(1, 1));
        let v = verify_exponential_factor(&vf, &p("y"), &Poly3::one(), &p("z")).unwrap();
        assert!(!v.passed);
        // X(y) - z with a = 1
        assert_eq!(v.residual, p("y*z - x - z"));
        assert_eq!(
            verify_exponential_factor(&vf, &Poly3::zero(), &Poly3::one(), &Poly3::zero()),
            Err(DarbouxError::ConstantCandidate)
        );
        assert_eq!(
            verify_exponential_factor(&vf, &p("x"), &Poly3::zero(), &p("y")),
            Err(DarbouxError::ZeroDenominator)
        );
        assert_eq!(
            verify_exponential_factor(&vf, &p("x*y"), &p("y"), &p("y")),
            Err(DarbouxError::NotCoprime)
        );
    }

    #[test]
    fn obstruction_examples() {
        assert!(darboux_obstruction(&[p("z")], &[p("y")]).unwrap().is_empty());
        assert!(darboux_obstruction(&[], &[p("y")]).unwrap().is_empty());
        let k = p("1 + 2*x - z");
        let ns = darboux_obstruction(&[k.clone(), -k], &[]).unwrap();
        assert_eq!(ns, vec![vec![q(1, 1), q(1, 1)]]);
        assert_eq!(
            darboux_obstruction(&[p("x*y")], &[]),
            Err(DarbouxError::CofactorDegree(2))
        );
    }
}
