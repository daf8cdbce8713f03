//! Structure-preserving no-spillover updates that need only the change pair.

use crate::error::{Error, Result};
use crate::numerics::{c, eigvals, fro, inverse, rcond, same_eigenvalue, CMatrix, C64};
use crate::pencil::{deflation_residual, Star, StructureTag, StructuredPencil};
use crate::tol;
use crate::update_unstructured::{parametrized_pair, Provenance, StructureDiagnostics, UpdateResult};
use crate::verify::min_cost_assignment;

/// A `p×p` pair `(M̂, K̂)` solving `M̂Λ_a + K̂ = G(Λ_c − Λ_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSolution {
    pub mhat: CMatrix,
    pub khat: CMatrix,
}

impl CoreSolution {
    /// Relative residual of the core equation.
    pub fn residual(&self, g: &CMatrix, lambda_c: &CMatrix, lambda_a: &CMatrix) -> f64 {
        let rhs = g * (lambda_c - lambda_a);
        let r = fro(&(&self.mhat * lambda_a + &self.khat - &rhs));
        let scale = fro(&self.mhat) * fro(lambda_a) + fro(&self.khat) + fro(&rhs);
        if scale > 0.0 {
            r / scale
        } else {
            r
        }
    }
}

fn check_square(name: &str, a: &CMatrix, p: usize) -> Result<()> {
    if a.shape() != (p, p) {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be {p}x{p}, got {:?}",
            a.shape()
        )));
    }
    Ok(())
}

/// `G = X_c^⋆MX_c` and its reciprocal condition number.
pub fn gramian_g(l: &StructuredPencil, xc: &CMatrix) -> Result<(CMatrix, f64)> {
    let star = l.star()?;
    if xc.nrows() != l.n() {
        return Err(Error::DimensionMismatch("X_c row count".into()));
    }
    let g = star.mat(xc) * &l.m * xc;
    let rc = rcond(&g);
    Ok((g, rc))
}

/// How `U` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// `U = MX_cG⁻¹`.
    ViaM,
    /// `U = KX_c(X_c^⋆KX_c)⁻¹`.
    ViaK,
}

/// The left factor `U` with `X_c^⋆U = I`.
pub fn build_u(l: &StructuredPencil, xc: &CMatrix, g: &CMatrix, route: Route) -> Result<CMatrix> {
    let star = l.star()?;
    match route {
        Route::ViaM => {
            let rc = rcond(g);
            if rc < tol::G_RCOND {
                return Err(Error::SingularG { rcond: rc });
            }
            Ok(&l.m * xc * inverse(g).map_err(|_| Error::SingularG { rcond: rc })?)
        }
        Route::ViaK => {
            let f = star.mat(xc) * &l.k * xc;
            let rc = rcond(&f);
            if rc < tol::G_RCOND {
                return Err(Error::SingularKGramian { rcond: rc });
            }
            Ok(&l.k * xc * inverse(&f).map_err(|_| Error::SingularKGramian { rcond: rc })?)
        }
    }
}

/// `K̂ = G(Λ_c − Λ_a) − M̂Λ_a`.
pub fn solve_core(g: &CMatrix, lambda_c: &CMatrix, lambda_a: &CMatrix, mhat: &CMatrix) -> Result<CoreSolution> {
    let p = g.nrows();
    check_square("G", g, p)?;
    check_square("Λ_c", lambda_c, p)?;
    check_square("Λ_a", lambda_a, p)?;
    check_square("M̂", mhat, p)?;
    let khat = g * (lambda_c - lambda_a) - mhat * lambda_a;
    Ok(CoreSolution {
        mhat: mhat.clone(),
        khat,
    })
}

/// `M̂ = tG`, `K̂ = G(Λ_c − (1+t)Λ_a)`.
pub fn t_family(g: &CMatrix, lambda_c: &CMatrix, lambda_a: &CMatrix, t: f64) -> Result<CoreSolution> {
    solve_core(g, lambda_c, lambda_a, &(g * c(t, 0.0)))
}

/// The full solution set of the core equation, parametrized by `(Z₁, Z₂)`.
pub fn solve_core_parametrized(
    g: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    z1: &CMatrix,
    z2: &CMatrix,
) -> Result<CoreSolution> {
    let p = g.nrows();
    check_square("G", g, p)?;
    check_square("Λ_c", lambda_c, p)?;
    check_square("Z1", z1, p)?;
    check_square("Z2", z2, p)?;
    let rhs = g * (lambda_c - lambda_a);
    let (mhat, khat) = parametrized_pair(&rhs, lambda_a, z1, z2)?;
    Ok(CoreSolution { mhat, khat })
}

/// Symmetry residuals of `λM̂+K̂` and of `λM̂+(M̂+G)Λ_a` under `tag`.
pub fn structure_diagnostics(
    core: &CoreSolution,
    g: &CMatrix,
    lambda_a: &CMatrix,
    tag: StructureTag,
) -> Option<StructureDiagnostics> {
    let StructureTag::Structured { star, eps1, eps2 } = tag else {
        return None;
    };
    let res = |a: &CMatrix, b: &CMatrix| pencil_symmetry_residuals(a, b, star, eps1.value(), eps2.value());
    let core_residuals = res(&core.mhat, &core.khat);
    let alt_k = (&core.mhat + g) * lambda_a;
    let alt_residuals = res(&core.mhat, &alt_k);
    let ok = |r: (f64, f64)| r.0 <= tol::STRUCT && r.1 <= tol::STRUCT;
    Some(StructureDiagnostics {
        core_residuals,
        alt_residuals,
        core_structured: ok(core_residuals),
        alt_structured: ok(alt_residuals),
    })
}

/// Symmetry residuals of `(A, B)` scaled by `‖A‖_F + ‖B‖_F`, so that a
/// coefficient at roundoff level does not count as unstructured.
pub fn pencil_symmetry_residuals(a: &CMatrix, b: &CMatrix, star: Star, e1: f64, e2: f64) -> (f64, f64) {
    let s = fro(a) + fro(b);
    if s == 0.0 {
        return (0.0, 0.0);
    }
    (
        fro(&(star.mat(a) - a * c(e1, 0.0))) / s,
        fro(&(star.mat(b) - b * c(e2, 0.0))) / s,
    )
}

/// Applies a core through `U`: `ΔM = LUM̂U^⋆`, `ΔK = LUK̂U^⋆`, where `L`
/// is an optional extra left factor.
pub(crate) fn lift_core(
    u: &CMatrix,
    star: Star,
    core: &CoreSolution,
    left: Option<&CMatrix>,
) -> (CMatrix, CMatrix) {
    let us = star.mat(u);
    let (mut dm, mut dk) = (u * &core.mhat * &us, u * &core.khat * &us);
    if let Some(j) = left {
        dm = j * dm;
        dk = j * dk;
    }
    (dm, dk)
}

pub(crate) fn check_change_pair(
    m: &CMatrix,
    k: &CMatrix,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
) -> Result<()> {
    let p = xc.ncols();
    if xc.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch("X_c row count".into()));
    }
    check_square("Λ_c", lambda_c, p)?;
    check_square("Λ_a", lambda_a, p)?;
    crate::numerics::check_finite("Lambda_a", lambda_a)?;
    let rep = deflation_residual(m, k, xc, lambda_c)?;
    if !rep.pass {
        return Err(Error::NotEigenpair(format!(
            "(X_c, Λ_c) has relative residual {:.3e}",
            rep.rel
        )));
    }
    Ok(())
}

/// `ΔM = UM̂U^⋆`, `ΔK = UK̂U^⋆` with `U = MX_cG⁻¹`.
///
/// The disjointness of `σ(Λ_c)` from the mirrored fixed spectrum cannot be
/// checked here and is recorded as assumed.
pub fn structured_update(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    core: &CoreSolution,
) -> Result<UpdateResult> {
    let star = l.star()?;
    check_change_pair(&l.m, &l.k, xc, lambda_c, lambda_a)?;
    let (g, rc) = gramian_g(l, xc)?;
    if rc < tol::G_RCOND {
        return Err(Error::SingularG { rcond: rc });
    }
    check_square("M̂", &core.mhat, xc.ncols())?;
    check_square("K̂", &core.khat, xc.ncols())?;
    let residual = core.residual(&g, lambda_c, lambda_a);
    if residual > tol::CORE {
        return Err(Error::CoreEquationViolated { residual });
    }
    let u = build_u(l, xc, &g, Route::ViaM)?;
    let (dm, dk) = lift_core(&u, star, core, None);
    let diag = structure_diagnostics(core, &g, lambda_a, l.tag);
    let mut prov = Provenance::new("structured");
    prov.assumed_spectral_condition = true;
    if let Some(d) = &diag {
        if !d.criteria_agree() {
            prov.notes.push(format!(
                "core structure criteria disagree: residuals {:?} vs {:?}",
                d.core_residuals, d.alt_residuals
            ));
        }
    }
    prov.result_tag = Some(if diag.as_ref().is_some_and(|d| d.core_structured) {
        l.tag
    } else {
        StructureTag::Unstructured
    });
    prov.structure = diag;
    prov.g = Some(g);
    prov.u = Some(u);
    prov.params.push(("Mhat".into(), core.mhat.clone()));
    prov.params.push(("Khat".into(), core.khat.clone()));
    UpdateResult::assemble(&l.m, &l.k, dm, dk, (xc, lambda_a), None, prov)
}

/// `ZΛ_aZ⁻¹`. Updating towards it makes `(X_cZ, Λ_a)` a deflating pair
/// of the updated pencil.
pub fn conjugate_targets(z: &CMatrix, lambda_a: &CMatrix) -> Result<(CMatrix, String)> {
    let p = lambda_a.nrows();
    check_square("Z", z, p)?;
    if rcond(z) <= tol::NUM {
        return Err(Error::SingularZ);
    }
    let zi = inverse(z).map_err(|_| Error::SingularZ)?;
    Ok((
        z * lambda_a * zi,
        "after updating with ZΛ_aZ⁻¹ for X_c, (X_cZ, Λ_a) is a deflating pair".into(),
    ))
}

/// Whether `σ(Λ_c)` is closed under `λ ↦ ε₁ε₂λ^⋆` (always true when unstructured).
pub fn spectral_closure_check(lambda_c: &CMatrix, tag: StructureTag) -> bool {
    if tag == StructureTag::Unstructured {
        return true;
    }
    let ev = eigvals(lambda_c);
    let mirrored: Vec<C64> = ev.iter().map(|&z| tag.partner(z).expect("structured")).collect();
    multiset_equal(&ev, &mirrored, tol::EIG_EQ)
}

pub(crate) fn multiset_equal(a: &[C64], b: &[C64], rel: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|&x| b.iter().map(|&y| (x - y).norm() / (1.0 + x.norm().max(y.norm()))).collect())
        .collect();
    let assign = min_cost_assignment(&cost);
    assign
        .iter()
        .enumerate()
        .all(|(i, j)| j.is_some_and(|j| same_eigenvalue(a[i], b[j], rel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{diag, identity, real_diag, real_matrix, I};
    use crate::pencil::DeflatingPair;

    fn herm() -> (StructuredPencil, CMatrix, CMatrix) {
        let l = StructuredPencil::new(identity(3), -real_diag(&[1.0, 2.0, 4.0]), StructureTag::HERMITIAN).unwrap();
        let xc = real_matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        (l, xc, real_diag(&[1.0, 2.0]))
    }

    #[test]
    fn normalized_gramian_is_identity_and_u_is_mx() {
        let (l, xc, lc) = herm();
        let (g, rc) = gramian_g(&l, &xc).unwrap();
        assert_eq!(g, identity(2));
        assert_eq!(rc, 1.0);
        let u = build_u(&l, &xc, &g, Route::ViaM).unwrap();
        assert_eq!(u, &l.m * &xc);
        let uk = build_u(&l, &xc, &g, Route::ViaK).unwrap();
        assert!((uk - &u).norm() < 1e-14);
        let _ = lc;
    }

    #[test]
    fn isotropic_vector_gives_zero_gramian() {
        let m = real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let l = StructuredPencil::new(m, identity(2), StructureTag::T_EVEN).unwrap();
        let (g, rc) = gramian_g(&l, &real_matrix(2, 1, &[1.0, 0.3])).unwrap();
        assert_eq!(g[(0, 0)].norm(), 0.0);
        assert_eq!(rc, 0.0);
    }

    #[test]
    fn core_completions() {
        let g = identity(2);
        let lc = real_diag(&[1.0, 2.0]);
        let z = solve_core(&g, &lc, &lc, &CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(z.khat.norm(), 0.0);
        let la = real_diag(&[3.0, -1.0]);
        let t = 0.7;
        let fam = t_family(&g, &lc, &la, t).unwrap();
        let expect = &g * (&lc - &la * c(1.0 + t, 0.0));
        assert!((fam.khat - expect).norm() < 1e-14);
        let zero = CMatrix::zeros(2, 2);
        let par = solve_core_parametrized(&g, &lc, &zero, &zero, &zero).unwrap();
        assert_eq!(par.mhat.norm(), 0.0);
        assert!((par.khat - &lc).norm() < 1e-15);
    }

    #[test]
    fn zero_mhat_branch() {
        let (l, xc, lc) = herm();
        let la = real_diag(&[1.5, 3.0]);
        let g = identity(2);
        let core = solve_core(&g, &lc, &la, &CMatrix::zeros(2, 2)).unwrap();
        let r = structured_update(&l, &xc, &lc, &la, &core).unwrap();
        assert_eq!(r.delta_m.norm(), 0.0);
        let u = &l.m * &xc;
        assert!((&r.delta_k - &u * (&lc - &la) * u.adjoint()).norm() < 1e-14);
        assert_eq!(r.provenance.result_tag, Some(StructureTag::HERMITIAN));
        assert!(r.report.target.pass);
        let fixed = DeflatingPair::new(real_matrix(3, 1, &[0.0, 0.0, 1.0]), real_diag(&[4.0])).unwrap();
        let m1 = &l.m + &r.delta_m;
        let k1 = &l.k + &r.delta_k;
        assert!(deflation_residual(&m1, &k1, &fixed.x, &fixed.lambda).unwrap().abs < 1e-14);
    }

    #[test]
    fn core_violation_is_rejected() {
        let (l, xc, lc) = herm();
        let bad = CoreSolution {
            mhat: identity(2),
            khat: identity(2),
        };
        let e = structured_update(&l, &xc, &lc, &real_diag(&[5.0, 6.0]), &bad).unwrap_err();
        assert_eq!(e.name(), "CoreEquationViolated");
    }

    #[test]
    fn closure_examples() {
        assert!(spectral_closure_check(&real_diag(&[1.0, -3.0]), StructureTag::HERMITIAN));
        assert!(spectral_closure_check(&diag(&[I, I * -3.0]), StructureTag::STAR_EVEN));
        assert!(!spectral_closure_check(&diag(&[c(1.0, 1.0)]), StructureTag::STAR_EVEN));
        assert!(spectral_closure_check(&diag(&[c(1.0, 1.0), c(-1.0, 1.0)]), StructureTag::STAR_EVEN));
    }

    #[test]
    fn conjugate_targets_realification() {
        let lam = c(0.4, 2.0);
        let (same, _) = conjugate_targets(&identity(2), &diag(&[lam, lam.conj()])).unwrap();
        assert_eq!(same, diag(&[lam, lam.conj()]));
        let z = crate::pencil::realification_transform();
        let zi = inverse(&z).unwrap();
        let (blk, _) = conjugate_targets(&zi, &diag(&[lam, lam.conj()])).unwrap();
        assert!((blk - crate::pencil::realification_block(lam)).norm() < 1e-14);
        let e = conjugate_targets(&CMatrix::zeros(2, 2), &identity(2)).unwrap_err();
        assert_eq!(e, Error::SingularZ);
    }
}
