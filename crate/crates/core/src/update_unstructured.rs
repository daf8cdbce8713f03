//! No-spillover updating without structure: the general solution family and
//! the explicit subset built from the fixed pair's annihilator.

use crate::error::{Error, Result};
use crate::numerics::{fro, has_full_column_rank, hcat, identity, inverse, pseudoinverse, rcond, vcat, CMatrix};
use crate::pencil::{deflation_residual, DeflatingPair, DeflationReport, StructureTag, StructuredPencil};
use crate::tol;

/// Change pair, targets and, when known, the fixed pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateProblem {
    pub change: DeflatingPair,
    pub xa: CMatrix,
    pub lambda_a: CMatrix,
    pub fixed: Option<DeflatingPair>,
}

impl UpdateProblem {
    pub fn new(
        change: DeflatingPair,
        xa: CMatrix,
        lambda_a: CMatrix,
        fixed: Option<DeflatingPair>,
    ) -> Result<Self> {
        let n = change.x.nrows();
        let p = change.p();
        if xa.shape() != (n, p) || lambda_a.shape() != (p, p) {
            return Err(Error::DimensionMismatch(format!(
                "targets: X_a is {:?}, Λ_a is {:?}, expected {n}x{p} and {p}x{p}",
                xa.shape(),
                lambda_a.shape()
            )));
        }
        crate::numerics::check_finite("X_a", &xa)?;
        crate::numerics::check_finite("Lambda_a", &lambda_a)?;
        if !has_full_column_rank(&xa) {
            return Err(Error::RankDeficient("X_a".into()));
        }
        if let Some(f) = &fixed {
            if f.x.nrows() != n {
                return Err(Error::DimensionMismatch("fixed pair row count".into()));
            }
            let basis = hcat(&[&xa, &f.x])?;
            if basis.is_square() && rcond(&basis) <= tol::NUM {
                return Err(Error::SingularBasis);
            }
            if !has_full_column_rank(&basis) {
                return Err(Error::SingularBasis);
            }
        }
        Ok(Self {
            change,
            xa,
            lambda_a,
            fixed,
        })
    }

    /// `X_a = X_c`: only the eigenvalues move.
    pub fn same_vectors(change: DeflatingPair, lambda_a: CMatrix, fixed: Option<DeflatingPair>) -> Result<Self> {
        let xa = change.x.clone();
        Self::new(change, xa, lambda_a, fixed)
    }

    pub fn n(&self) -> usize {
        self.change.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.change.p()
    }

    fn fixed(&self) -> Result<&DeflatingPair> {
        self.fixed.as_ref().ok_or(Error::MissingFixedPair)
    }
}

/// Structure diagnostics of a structured update's core pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureDiagnostics {
    /// Symmetry residuals of `(M̂, K̂)`.
    pub core_residuals: (f64, f64),
    /// Symmetry residuals of `(M̂, (M̂+G)Λ_a)`.
    pub alt_residuals: (f64, f64),
    pub core_structured: bool,
    pub alt_structured: bool,
}

impl StructureDiagnostics {
    pub fn criteria_agree(&self) -> bool {
        self.core_structured == self.alt_structured
    }
}

/// What produced an update and with which intermediate quantities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub method: String,
    pub g: Option<CMatrix>,
    pub u: Option<CMatrix>,
    pub r_a: Option<CMatrix>,
    pub params: Vec<(String, CMatrix)>,
    pub scalars: Vec<(String, f64)>,
    /// The spectral disjointness condition was assumed, not checked.
    pub assumed_spectral_condition: bool,
    pub structure: Option<StructureDiagnostics>,
    /// Tag the updated pencil carries.
    pub result_tag: Option<StructureTag>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(method: &str) -> Self {
        Self {
            method: method.into(),
            ..Self::default()
        }
    }

    pub fn param(&self, name: &str) -> Option<&CMatrix> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

/// Residuals of the updated pencil on the target and fixed pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub target: DeflationReport,
    pub spillover: Option<DeflationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateResult {
    pub delta_m: CMatrix,
    pub delta_k: CMatrix,
    pub provenance: Provenance,
    pub report: UpdateReport,
}

impl UpdateResult {
    /// Assembles a result and evaluates the target (and optional fixed) residuals.
    pub fn assemble(
        m: &CMatrix,
        k: &CMatrix,
        delta_m: CMatrix,
        delta_k: CMatrix,
        targets: (&CMatrix, &CMatrix),
        fixed: Option<&DeflatingPair>,
        provenance: Provenance,
    ) -> Result<Self> {
        let m1 = m + &delta_m;
        let k1 = k + &delta_k;
        let target = deflation_residual(&m1, &k1, targets.0, targets.1)?;
        let spillover = fixed
            .map(|f| deflation_residual(&m1, &k1, &f.x, &f.lambda))
            .transpose()?;
        Ok(Self {
            delta_m,
            delta_k,
            provenance,
            report: UpdateReport { target, spillover },
        })
    }
}

/// Which formula produced `R_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RaBranch {
    Direct,
    /// `X_a = X_c`; carries the relative disagreement with `MX_c(Λ_c−Λ_a)`.
    SameVectors { agreement: f64 },
}

/// `R_a = −(MX_aΛ_a + KX_a)`.
pub fn residual_ra(l: &StructuredPencil, problem: &UpdateProblem) -> Result<(CMatrix, RaBranch)> {
    if problem.n() != l.n() {
        return Err(Error::DimensionMismatch("problem and pencil sizes differ".into()));
    }
    let xa = &problem.xa;
    let ra = -(&l.m * xa * &problem.lambda_a + &l.k * xa);
    let branch = if *xa == problem.change.x {
        let alt = &l.m * xa * (&problem.change.lambda - &problem.lambda_a);
        let scale = fro(&ra).max(fro(&alt)).max(f64::MIN_POSITIVE);
        RaBranch::SameVectors {
            agreement: fro(&(&ra - &alt)) / scale,
        }
    } else {
        RaBranch::Direct
    };
    Ok((ra, branch))
}

fn split_y(y: &CMatrix, n: usize) -> (CMatrix, CMatrix) {
    (y.columns(0, n).into_owned(), y.columns(n, n).into_owned())
}

/// `[ΔM ΔK] = BA† + Z(I − AA†)` with `A = [X_fΛ_f, X_aΛ_a; X_f, X_a]`, `B = [0 R_a]`.
/// `z = None` gives the minimum-norm member.
pub fn general_solution(
    l: &StructuredPencil,
    problem: &UpdateProblem,
    z: Option<&CMatrix>,
) -> Result<UpdateResult> {
    let f = problem.fixed()?;
    let n = l.n();
    let (ra, _) = residual_ra(l, problem)?;
    let top = hcat(&[&(&f.x * &f.lambda), &(&problem.xa * &problem.lambda_a)])?;
    let bottom = hcat(&[&f.x, &problem.xa])?;
    let a = vcat(&[&top, &bottom])?;
    if !has_full_column_rank(&a) {
        return Err(Error::RankDeficientA);
    }
    let b = hcat(&[&CMatrix::zeros(n, f.p()), &ra])?;
    let a_pinv = pseudoinverse(&a);
    let mut y = &b * &a_pinv;
    let mut prov = Provenance::new("general-solution");
    if let Some(z) = z {
        if z.shape() != (n, 2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "Z must be {n}x{}, got {:?}",
                2 * n,
                z.shape()
            )));
        }
        y += z * (identity(2 * n) - &a * &a_pinv);
        prov.params.push(("Z".into(), z.clone()));
    }
    let (dm, dk) = split_y(&y, n);
    prov.r_a = Some(ra);
    prov.result_tag = Some(StructureTag::Unstructured);
    UpdateResult::assemble(&l.m, &l.k, dm, dk, (&problem.xa, &problem.lambda_a), Some(f), prov)
}

/// First `p` rows of `[X_a X_f]⁻¹`, i.e. `U^⋆` with `U^⋆X_a = I`, `U^⋆X_f = 0`.
pub fn annihilator(problem: &UpdateProblem) -> Result<CMatrix> {
    let f = problem.fixed()?;
    let basis = hcat(&[&problem.xa, &f.x])?;
    if !basis.is_square() {
        return Err(Error::DimensionMismatch(
            "[X_a X_f] must be square for the explicit update".into(),
        ));
    }
    if rcond(&basis) <= tol::NUM {
        return Err(Error::SingularBasis);
    }
    let inv = inverse(&basis).map_err(|_| Error::SingularBasis)?;
    Ok(inv.rows(0, problem.p()).into_owned())
}

/// `ΔM = M̃U^⋆`, `ΔK = (R_a − M̃Λ_a)U^⋆`.
pub fn theorem41_update(
    l: &StructuredPencil,
    problem: &UpdateProblem,
    mtilde: &CMatrix,
) -> Result<UpdateResult> {
    let n = l.n();
    let p = problem.p();
    if mtilde.shape() != (n, p) {
        return Err(Error::DimensionMismatch(format!("M̃ must be {n}x{p}")));
    }
    let ustar = annihilator(problem)?;
    let (ra, _) = residual_ra(l, problem)?;
    let ktilde = &ra - mtilde * &problem.lambda_a;
    let dm = mtilde * &ustar;
    let dk = &ktilde * &ustar;
    let mut prov = Provenance::new("explicit-annihilator");
    prov.u = Some(ustar.adjoint());
    prov.r_a = Some(ra);
    prov.params.push(("Mtilde".into(), mtilde.clone()));
    prov.params.push(("Ktilde".into(), ktilde));
    prov.result_tag = Some(StructureTag::Unstructured);
    UpdateResult::assemble(&l.m, &l.k, dm, dk, (&problem.xa, &problem.lambda_a), problem.fixed.as_ref(), prov)
}

/// All solutions of `X·Λ_a + Y = rhs`, parametrized by `(Z₁, Z₂)`:
/// returns `(X, Y)` with `H = (Λ_a^*Λ_a + I)⁻¹`.
pub fn parametrized_pair(
    rhs: &CMatrix,
    lambda_a: &CMatrix,
    z1: &CMatrix,
    z2: &CMatrix,
) -> Result<(CMatrix, CMatrix)> {
    let p = lambda_a.nrows();
    if !lambda_a.is_square() || rhs.ncols() != p || z1.shape() != rhs.shape() || z2.shape() != rhs.shape() {
        return Err(Error::DimensionMismatch(format!(
            "parametrization: rhs {:?}, Λ_a {:?}, Z1 {:?}, Z2 {:?}",
            rhs.shape(),
            lambda_a.shape(),
            z1.shape(),
            z2.shape()
        )));
    }
    let ip = identity(p);
    let la_h = lambda_a.adjoint();
    let h = inverse(&(&la_h * lambda_a + &ip))?;
    let x = rhs * &h * &la_h + z1 * (&ip - lambda_a * &h * &la_h) - z2 * &h * &la_h;
    let y = rhs * &h - z1 * lambda_a * &h + z2 * (&ip - &h);
    Ok((x, y))
}

/// `(M̃, K̃)` with `M̃Λ_a + K̃ = R_a` for any `(Z₁, Z₂)` of size `n×p`.
pub fn theorem41_parametrized(
    l: &StructuredPencil,
    problem: &UpdateProblem,
    z1: &CMatrix,
    z2: &CMatrix,
) -> Result<(CMatrix, CMatrix)> {
    let (ra, _) = residual_ra(l, problem)?;
    parametrized_pair(&ra, &problem.lambda_a, z1, z2)
}

/// Relative residual of `XΛ_a + Y = rhs`.
pub fn linear_residual(x: &CMatrix, y: &CMatrix, lambda_a: &CMatrix, rhs: &CMatrix) -> f64 {
    let r = fro(&(x * lambda_a + y - rhs));
    let scale = fro(x) * fro(lambda_a) + fro(y) + fro(rhs);
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real_diag, real_matrix};

    fn diag_problem() -> (StructuredPencil, UpdateProblem) {
        let l = StructuredPencil::unstructured(identity(2), -real_diag(&[3.0, 5.0])).unwrap();
        let change = DeflatingPair::new(real_matrix(2, 1, &[1.0, 0.0]), real_diag(&[3.0])).unwrap();
        let fixed = DeflatingPair::new(real_matrix(2, 1, &[0.0, 1.0]), real_diag(&[5.0])).unwrap();
        let p = UpdateProblem::same_vectors(change, real_diag(&[7.0]), Some(fixed)).unwrap();
        (l, p)
    }

    #[test]
    fn ra_on_diagonal_pencil() {
        let (l, p) = diag_problem();
        let (ra, branch) = residual_ra(&l, &p).unwrap();
        // (d1 − μ) e1 = (3 − 7) e1
        assert!((ra - real_matrix(2, 1, &[-4.0, 0.0])).norm() < 1e-15);
        assert!(matches!(branch, RaBranch::SameVectors { agreement } if agreement < 1e-15));
    }

    #[test]
    fn ra_vanishes_for_unchanged_targets() {
        let (l, p) = diag_problem();
        let p = UpdateProblem::same_vectors(p.change.clone(), p.change.lambda.clone(), p.fixed).unwrap();
        assert_eq!(residual_ra(&l, &p).unwrap().0.norm(), 0.0);
        let r = general_solution(&l, &p, None).unwrap();
        assert!(r.delta_m.norm() < 1e-15 && r.delta_k.norm() < 1e-15);
    }

    #[test]
    fn explicit_update_on_unit_vectors() {
        let (l, p) = diag_problem();
        let ustar = annihilator(&p).unwrap();
        assert!((ustar - real_matrix(1, 2, &[1.0, 0.0])).norm() < 1e-15);
        let r = theorem41_update(&l, &p, &CMatrix::zeros(2, 1)).unwrap();
        assert_eq!(r.delta_m.norm(), 0.0);
        assert!((r.delta_k - real_matrix(2, 2, &[-4.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
        assert!(r.report.target.pass && r.report.spillover.unwrap().pass);
    }

    #[test]
    fn missing_fixed_pair_is_refused() {
        let (l, p) = diag_problem();
        let p = UpdateProblem { fixed: None, ..p };
        assert_eq!(general_solution(&l, &p, None).unwrap_err(), Error::MissingFixedPair);
        assert_eq!(theorem41_update(&l, &p, &CMatrix::zeros(2, 1)).unwrap_err(), Error::MissingFixedPair);
    }

    #[test]
    fn parametrization_trivial_case() {
        let ra = real_matrix(2, 1, &[1.0, 2.0]);
        let z = CMatrix::zeros(2, 1);
        let (mt, kt) = parametrized_pair(&ra, &CMatrix::zeros(1, 1), &z, &z).unwrap();
        assert_eq!(mt.norm(), 0.0);
        assert!((kt - ra).norm() < 1e-15);
    }

    #[test]
    fn duplicated_target_is_singular_basis() {
        let (_, p) = diag_problem();
        let fixed = DeflatingPair::new(real_matrix(2, 1, &[1.0, 0.0]), real_diag(&[5.0])).unwrap();
        let e = UpdateProblem::same_vectors(p.change, real_diag(&[7.0]), Some(fixed)).unwrap_err();
        assert_eq!(e, Error::SingularBasis);
    }
}
