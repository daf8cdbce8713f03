//! Structured pencils `λM + K` and the algebra of their deflating pairs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    c, col_matrix, fro, has_full_column_rank, hcat, herm_part_eigs, fix_phase, rcond, same_eigenvalue, solve,
    CMatrix, CVector, C64,
};
use crate::tol;

/// The adjoint used by a structure: transpose or conjugate transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Star {
    #[serde(rename = "T")]
    Trans,
    #[serde(rename = "*")]
    Conj,
}

impl Star {
    pub fn mat(self, a: &CMatrix) -> CMatrix {
        match self {
            Star::Trans => a.transpose(),
            Star::Conj => a.adjoint(),
        }
    }

    pub fn scalar(self, z: C64) -> C64 {
        match self {
            Star::Trans => z,
            Star::Conj => z.conj(),
        }
    }
}

/// ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `(⋆, ε₁, ε₂)`: `M^⋆ = ε₁M`, `K^⋆ = ε₂K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructureTag {
    Structured { star: Star, eps1: Sign, eps2: Sign },
    Unstructured,
}

impl StructureTag {
    pub const SYMMETRIC: Self = Self::new(Star::Trans, Sign::Plus, Sign::Plus);
    pub const HERMITIAN: Self = Self::new(Star::Conj, Sign::Plus, Sign::Plus);
    pub const T_ODD: Self = Self::new(Star::Trans, Sign::Plus, Sign::Minus);
    pub const STAR_ODD: Self = Self::new(Star::Conj, Sign::Plus, Sign::Minus);
    pub const T_EVEN: Self = Self::new(Star::Trans, Sign::Minus, Sign::Plus);
    pub const STAR_EVEN: Self = Self::new(Star::Conj, Sign::Minus, Sign::Plus);

    /// The six named classes in table order.
    pub const NAMED: [Self; 6] = [
        Self::SYMMETRIC,
        Self::HERMITIAN,
        Self::T_ODD,
        Self::STAR_ODD,
        Self::T_EVEN,
        Self::STAR_EVEN,
    ];

    pub const fn new(star: Star, eps1: Sign, eps2: Sign) -> Self {
        StructureTag::Structured { star, eps1, eps2 }
    }

    pub fn star(self) -> Option<Star> {
        match self {
            StructureTag::Structured { star, .. } => Some(star),
            StructureTag::Unstructured => None,
        }
    }

    pub fn eps1(self) -> Option<f64> {
        match self {
            StructureTag::Structured { eps1, .. } => Some(eps1.value()),
            StructureTag::Unstructured => None,
        }
    }

    pub fn eps2(self) -> Option<f64> {
        match self {
            StructureTag::Structured { eps2, .. } => Some(eps2.value()),
            StructureTag::Unstructured => None,
        }
    }

    /// `ε₁ε₂λ^⋆`, the eigenvalue paired with `λ` by the structure.
    pub fn partner(self, lam: C64) -> Option<C64> {
        match self {
            StructureTag::Structured { star, eps1, eps2 } => {
                Some(star.scalar(lam) * (eps1.value() * eps2.value()))
            }
            StructureTag::Unstructured => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            t if t == Self::SYMMETRIC => "symmetric",
            t if t == Self::HERMITIAN => "hermitian",
            t if t == Self::T_ODD => "t-odd",
            t if t == Self::STAR_ODD => "star-odd",
            t if t == Self::T_EVEN => "t-even",
            t if t == Self::STAR_EVEN => "star-even",
            StructureTag::Unstructured => "unstructured",
            _ => unreachable!("all eight combinations are named"),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "symmetric" => Self::SYMMETRIC,
            "hermitian" => Self::HERMITIAN,
            "t-odd" => Self::T_ODD,
            "star-odd" | "*-odd" => Self::STAR_ODD,
            "t-even" => Self::T_EVEN,
            "star-even" | "*-even" => Self::STAR_EVEN,
            "unstructured" => Self::Unstructured,
            _ => return None,
        })
    }
}

impl fmt::Display for StructureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `‖A^⋆ − εA‖_F / ‖A‖_F` (absolute when `A = 0`).
pub fn symmetry_residual(a: &CMatrix, star: Star, eps: f64) -> f64 {
    let r = fro(&(star.mat(a) - a * c(eps, 0.0)));
    let s = fro(a);
    if s > 0.0 {
        r / s
    } else {
        r
    }
}

/// Whether `(M, K)` carries `tag` within `tol` (relative).
pub fn has_structure(m: &CMatrix, k: &CMatrix, tag: StructureTag, tol: f64) -> bool {
    match tag {
        StructureTag::Unstructured => true,
        StructureTag::Structured { star, eps1, eps2 } => {
            symmetry_residual(m, star, eps1.value()) <= tol
                && symmetry_residual(k, star, eps2.value()) <= tol
        }
    }
}

/// A square pencil `λM + K` with its claimed structure.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPencil {
    pub m: CMatrix,
    pub k: CMatrix,
    pub tag: StructureTag,
}

impl StructuredPencil {
    pub fn new(m: CMatrix, k: CMatrix, tag: StructureTag) -> Result<Self> {
        Self::with_tolerance(m, k, tag, tol::STRUCT)
    }

    pub fn with_tolerance(m: CMatrix, k: CMatrix, tag: StructureTag, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || k.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "pencil: M is {:?}, K is {:?}",
                m.shape(),
                k.shape()
            )));
        }
        crate::numerics::check_finite("M", &m)?;
        crate::numerics::check_finite("K", &k)?;
        if !has_structure(&m, &k, tag, tol) {
            return Err(Error::StructureViolation(format!(
                "(M, K) is not {tag} within {tol:.1e}"
            )));
        }
        Ok(Self { m, k, tag })
    }

    pub fn unstructured(m: CMatrix, k: CMatrix) -> Result<Self> {
        Self::new(m, k, StructureTag::Unstructured)
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn star(&self) -> Result<Star> {
        self.tag.star().ok_or(Error::MissingStar)
    }

    /// `(M+ΔM, K+ΔK)` under the same tag, without re-validating structure.
    pub fn perturbed(&self, dm: &CMatrix, dk: &CMatrix) -> StructuredPencil {
        StructuredPencil {
            m: &self.m + dm,
            k: &self.k + dk,
            tag: self.tag,
        }
    }
}

/// `(X, Λ)` with `MXΛ + KX = 0`; `Λ` is a general square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatingPair {
    pub x: CMatrix,
    pub lambda: CMatrix,
}

impl DeflatingPair {
    /// Checks shapes and that `X` has full column rank.
    pub fn new(x: CMatrix, lambda: CMatrix) -> Result<Self> {
        let p = x.ncols();
        if lambda.shape() != (p, p) {
            return Err(Error::DimensionMismatch(format!(
                "deflating pair: X has {p} columns, Λ is {:?}",
                lambda.shape()
            )));
        }
        if !has_full_column_rank(&x) {
            return Err(Error::RankDeficient("X".into()));
        }
        Ok(Self { x, lambda })
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Absolute and relative residual of a claimed deflating pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeflationReport {
    pub abs: f64,
    pub rel: f64,
    pub pass: bool,
}

/// `‖MXΛ+KX‖_F`, scaled by `‖M‖‖X‖‖Λ‖ + ‖K‖‖X‖`.
pub fn deflation_residual(m: &CMatrix, k: &CMatrix, x: &CMatrix, lambda: &CMatrix) -> Result<DeflationReport> {
    let n = m.nrows();
    if x.nrows() != n || lambda.nrows() != x.ncols() || lambda.ncols() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "deflating pair {:?}/{:?} against a {n}x{n} pencil",
            x.shape(),
            lambda.shape()
        )));
    }
    let abs = fro(&(m * x * lambda + k * x));
    let scale = fro(m) * fro(x) * fro(lambda) + fro(k) * fro(x);
    let rel = if scale > 0.0 { abs / scale } else { abs };
    Ok(DeflationReport {
        abs,
        rel,
        pass: rel <= tol::DEFL,
    })
}

pub fn validate_deflating_pair(l: &StructuredPencil, d: &DeflatingPair) -> Result<DeflationReport> {
    deflation_residual(&l.m, &l.k, &d.x, &d.lambda)
}

/// All named structure classes whose symmetry residuals pass [`tol::STRUCT`].
pub fn classify_structure(m: &CMatrix, k: &CMatrix) -> Result<Vec<StructureTag>> {
    let n = m.nrows();
    if m.ncols() != n || k.shape() != (n, n) {
        return Err(Error::DimensionMismatch("classify: M and K must be square of equal size".into()));
    }
    Ok(StructureTag::NAMED
        .into_iter()
        .filter(|&t| has_structure(m, k, t, tol::STRUCT))
        .collect())
}

/// `(X₁^⋆MX₂, X₁^⋆KX₂)`. The adjoint comes from the tag, or from `star`
/// when given; an unstructured pencil without override is an error.
pub fn gramians(
    l: &StructuredPencil,
    x1: &CMatrix,
    x2: &CMatrix,
    star: Option<Star>,
) -> Result<(CMatrix, CMatrix)> {
    let star = star.or(l.tag.star()).ok_or(Error::MissingStar)?;
    if x1.nrows() != l.n() || x2.nrows() != l.n() {
        return Err(Error::DimensionMismatch("gramians: row count must equal n".into()));
    }
    let x1s = star.mat(x1);
    Ok((&x1s * &l.m * x2, &x1s * &l.k * x2))
}

/// `−x^⋆Kx / x^⋆Mx`.
pub fn rayleigh_lambda(l: &StructuredPencil, x: &CVector) -> Result<C64> {
    let star = l.star()?;
    if x.nrows() != l.n() {
        return Err(Error::DimensionMismatch("rayleigh: vector length".into()));
    }
    let xm = col_matrix(x);
    let xs = star.mat(&xm);
    let den = (&xs * &l.m * &xm)[(0, 0)];
    if den.norm() <= tol::NUM * fro(&l.m) * x.norm_squared() {
        return Err(Error::IsotropicVector { value: den.norm() });
    }
    Ok(-(&xs * &l.k * &xm)[(0, 0)] / den)
}

fn eigenpair_ok(l: &StructuredPencil, lam: C64, x: &CVector) -> bool {
    let r = (&l.m * x * lam + &l.k * x).norm();
    r <= tol::DEFL * (lam.norm() * fro(&l.m) + fro(&l.k)) * x.norm()
}

/// An eigenvalue couple `(λ₀, ε₁ε₂λ₀^⋆)` with its Gramians.
#[derive(Debug, Clone)]
pub struct Couple {
    pub pair: DeflatingPair,
    /// `x̂^⋆Mx` after scaling: exactly 1 or 0.
    pub g: C64,
    pub gram_m: CMatrix,
    pub gram_k: CMatrix,
}

/// Joins an eigenpair with its structural partner, rescaling `x` so that
/// `g = x̂^⋆Mx` becomes 1 (or is reported as exactly 0 when negligible).
pub fn scale_eigenpair_couple(
    l: &StructuredPencil,
    first: (C64, &CVector),
    second: (C64, &CVector),
) -> Result<Couple> {
    let star = l.star()?;
    let (lam0, x) = first;
    let (mu, xh) = second;
    let partner = l.tag.partner(lam0).expect("structured");
    if same_eigenvalue(lam0, partner, tol::EIG_EQ) {
        return Err(Error::SelfPairedEigenvalue);
    }
    if !same_eigenvalue(mu, partner, tol::EIG_EQ) {
        return Err(Error::NotEigenpair(format!(
            "second eigenvalue {mu} is not the partner {partner}"
        )));
    }
    if !eigenpair_ok(l, lam0, x) {
        return Err(Error::NotEigenpair(format!("({lam0}, x)")));
    }
    if !eigenpair_ok(l, mu, xh) {
        return Err(Error::NotEigenpair(format!("({mu}, x̂)")));
    }
    let xhm = col_matrix(xh);
    let raw_g = (star.mat(&xhm) * &l.m * x)[(0, 0)];
    let scale = fro(&l.m) * x.norm() * xh.norm();
    let (xs, g) = if raw_g.norm() > tol::NUM * scale {
        (x / raw_g, c(1.0, 0.0))
    } else {
        (x.clone_owned(), c(0.0, 0.0))
    };
    let xmat: CMatrix = hcat(&[&col_matrix(&xs), &xhm])?;
    let lambda = crate::numerics::diag(&[lam0, mu]);
    let gram_m = star.mat(&xmat) * &l.m * &xmat;
    let gram_k = star.mat(&xmat) * &l.k * &xmat;
    Ok(Couple {
        pair: DeflatingPair::new(xmat, lambda)?,
        g,
        gram_m,
        gram_k,
    })
}

/// Real deflating pair spanning `{x, x̄}` for a nonreal eigenvalue of a real pencil:
/// `X_r = [re x, im x]`, `Λ_r = [re λ, im λ; −im λ, re λ]`.
pub fn realify_pair(lam: C64, x: &CVector) -> Result<DeflatingPair> {
    if lam.im.abs() <= f64::EPSILON * lam.norm() || lam.im == 0.0 {
        return Err(Error::RealEigenvalue);
    }
    let n = x.nrows();
    let mut xr = CMatrix::zeros(n, 2);
    for i in 0..n {
        xr[(i, 0)] = c(x[i].re, 0.0);
        xr[(i, 1)] = c(x[i].im, 0.0);
    }
    let lr = realification_block(lam);
    DeflatingPair::new(xr, lr)
}

/// `[re λ, im λ; −im λ, re λ]`.
pub fn realification_block(lam: C64) -> CMatrix {
    crate::numerics::real_matrix(2, 2, &[lam.re, lam.im, -lam.im, lam.re])
}

/// `½[1 −i; 1 i]`, mapping `[x x̄]` to `[re x, im x]`.
pub fn realification_transform() -> CMatrix {
    crate::numerics::from_rows(2, 2, &[c(0.5, 0.0), c(0.0, -0.5), c(0.5, 0.0), c(0.0, 0.5)])
        .expect("finite")
}

/// Builds the deflating pair complementary to `d1` from a completion basis `X`.
pub fn complete_deflating_pair(
    l: &StructuredPencil,
    d1: &DeflatingPair,
    x: &CMatrix,
) -> Result<DeflatingPair> {
    let star = l.star()?;
    let n = l.n();
    if d1.x.nrows() != n || x.nrows() != n || d1.p() + x.ncols() != n {
        return Err(Error::DimensionMismatch(
            "completion: [X1 X] must be square of size n".into(),
        ));
    }
    if rcond(&l.m) <= tol::NUM {
        return Err(Error::SingularM);
    }
    let x1s = star.mat(&d1.x);
    let g1 = &x1s * &l.m * &d1.x;
    if rcond(&g1) <= tol::NUM {
        return Err(Error::SingularG1);
    }
    let basis = hcat(&[&d1.x, x])?;
    if rcond(&basis) <= tol::NUM {
        return Err(Error::BadCompletionBasis);
    }
    let coef = solve(&g1, &(&x1s * &l.m * x))?.x;
    let x2 = x - &d1.x * coef;
    let x2s = star.mat(&x2);
    let g2 = &x2s * &l.m * &x2;
    let lambda2 = -solve(&g2, &(&x2s * &l.k * &x2))
        .map_err(|_| Error::BadCompletionBasis)?
        .x;
    DeflatingPair::new(x2, lambda2)
}

/// Which Hermitian positive definite coefficient defines the inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramMode {
    M,
    K,
}

/// Rescales and orthogonalizes columns so that `X'^*WX' = I` (W = M or K).
///
/// With `eigenvalues` given, Gram–Schmidt only acts within groups of equal
/// eigenvalues; otherwise it runs over all columns. Each column is finally
/// rotated so that its largest-magnitude entry is real positive.
pub fn m_normalize_columns(
    l: &StructuredPencil,
    x: &CMatrix,
    mode: GramMode,
    eigenvalues: Option<&[C64]>,
) -> Result<CMatrix> {
    let w = match mode {
        GramMode::M => &l.m,
        GramMode::K => &l.k,
    };
    let what = match mode {
        GramMode::M => "M",
        GramMode::K => "K",
    };
    if x.nrows() != l.n() {
        return Err(Error::DimensionMismatch("normalize: row count".into()));
    }
    if let Some(ev) = eigenvalues {
        if ev.len() != x.ncols() {
            return Err(Error::DimensionMismatch("normalize: one eigenvalue per column".into()));
        }
    }
    let gram = x.adjoint() * w * x;
    let skew = fro(&(&gram - gram.adjoint()));
    let ev = herm_part_eigs(&gram);
    let min = ev.first().copied().unwrap_or(0.0);
    if skew > tol::STRUCT.sqrt() * fro(&gram) || min <= tol::NUM * fro(&gram) {
        return Err(Error::NotPositiveDefinite {
            what: what.into(),
            min_eig: min,
        });
    }
    let p = x.ncols();
    let mut cols: Vec<CVector> = Vec::with_capacity(p);
    for j in 0..p {
        let mut v = x.column(j).into_owned();
        for (i, q) in cols.iter().enumerate() {
            let grouped = eigenvalues.is_none_or(|e| same_eigenvalue(e[i], e[j], tol::EIG_EQ));
            if grouped {
                let proj = (q.adjoint() * w * &v)[(0, 0)];
                v -= q * proj;
            }
        }
        let nrm2 = (v.adjoint() * w * &v)[(0, 0)].re;
        if nrm2 <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                what: what.into(),
                min_eig: nrm2,
            });
        }
        v /= c(nrm2.sqrt(), 0.0);
        fix_phase(&mut v);
        cols.push(v);
    }
    Ok(CMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{diag, identity, real_diag, real_matrix, I};

    fn diag_pencil() -> StructuredPencil {
        StructuredPencil::new(identity(2), -real_diag(&[3.0, 5.0]), StructureTag::HERMITIAN).unwrap()
    }

    #[test]
    fn identity_pencil_is_symmetric_and_hermitian_only() {
        let tags = classify_structure(&identity(2), &identity(2)).unwrap();
        assert_eq!(tags, vec![StructureTag::SYMMETRIC, StructureTag::HERMITIAN]);
    }

    #[test]
    fn skew_hermitian_k_classifies_star_odd() {
        let m = real_matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let h = real_matrix(2, 2, &[1.0, -0.3, -0.3, 4.0]) + diag(&[c(0.0, 0.0), c(0.0, 0.0)]);
        let mut hh = h.clone();
        hh[(0, 1)] = c(-0.3, 0.7);
        hh[(1, 0)] = c(-0.3, -0.7);
        let tags = classify_structure(&m, &(hh * I)).unwrap();
        assert!(tags.contains(&StructureTag::STAR_ODD));
    }

    #[test]
    fn classify_dimension_mismatch() {
        let e = classify_structure(&identity(2), &identity(3)).unwrap_err();
        assert_eq!(e.name(), "DimensionMismatch");
    }

    #[test]
    fn deflation_residual_of_eigenpair() {
        let l = diag_pencil();
        let d = DeflatingPair::new(real_matrix(2, 1, &[1.0, 0.0]), real_diag(&[3.0])).unwrap();
        let r = validate_deflating_pair(&l, &d).unwrap();
        assert_eq!(r.abs, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn gramians_identity_basis_and_missing_star() {
        let l = diag_pencil();
        let (g, f) = gramians(&l, &identity(2), &identity(2), None).unwrap();
        assert_eq!(g, l.m);
        assert_eq!(f, l.k);
        let u = StructuredPencil::unstructured(identity(2), identity(2)).unwrap();
        assert_eq!(gramians(&u, &identity(2), &identity(2), None).unwrap_err(), Error::MissingStar);
        assert!(gramians(&u, &identity(2), &identity(2), Some(Star::Trans)).is_ok());
    }

    #[test]
    fn rayleigh_examples() {
        let l = diag_pencil();
        let x = CVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((rayleigh_lambda(&l, &x).unwrap() - c(3.0, 0.0)).norm() < 1e-15);

        // T-even: x^T M x = 0 for skew-symmetric M
        let m = real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let te = StructuredPencil::new(m, identity(2), StructureTag::T_EVEN).unwrap();
        let x = CVector::from_column_slice(&[c(0.3, 0.1), c(-1.0, 2.0)]);
        assert_eq!(rayleigh_lambda(&te, &x).unwrap_err().name(), "IsotropicVector");
    }

    #[test]
    fn rayleigh_negative_for_definite_pair() {
        let m = real_matrix(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let k = real_matrix(2, 2, &[5.0, -1.0, -1.0, 3.0]);
        let l = StructuredPencil::new(m, k, StructureTag::HERMITIAN).unwrap();
        for x in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.2, -1.0), c(3.0, 0.5)]] {
            let lam = rayleigh_lambda(&l, &CVector::from_column_slice(&x)).unwrap();
            assert!(lam.re < 0.0 && lam.im.abs() < 1e-14);
        }
    }

    #[test]
    fn realify_rotation_example() {
        let x = CVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let d = realify_pair(I, &x).unwrap();
        assert_eq!(d.x, identity(2));
        assert_eq!(d.lambda, real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        assert_eq!(realify_pair(c(2.0, 0.0), &x).unwrap_err(), Error::RealEigenvalue);
    }

    #[test]
    fn realification_transform_maps_pair() {
        let lam = c(0.7, -1.9);
        let z = realification_transform();
        let zi = crate::numerics::inverse(&z).unwrap();
        let lr = &zi * diag(&[lam, lam.conj()]) * &z;
        assert!((lr - realification_block(lam)).norm() < 1e-14);
    }

    #[test]
    fn complete_diagonal() {
        let d = real_diag(&[1.0, 2.0, 4.0]);
        let l = StructuredPencil::new(identity(3), -d, StructureTag::HERMITIAN).unwrap();
        let x1 = real_matrix(3, 1, &[1.0, 0.0, 0.0]);
        let d1 = DeflatingPair::new(x1, real_diag(&[1.0])).unwrap();
        let basis = real_matrix(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let d2 = complete_deflating_pair(&l, &d1, &basis).unwrap();
        assert!((d2.x - &basis).norm() < 1e-15);
        assert!((d2.lambda - real_diag(&[2.0, 4.0])).norm() < 1e-14);
    }

    #[test]
    fn complete_errors() {
        let l = StructuredPencil::new(real_diag(&[1.0, 0.0]), identity(2), StructureTag::HERMITIAN).unwrap();
        let d1 = DeflatingPair::new(real_matrix(2, 1, &[1.0, 0.0]), real_diag(&[-1.0])).unwrap();
        let e = complete_deflating_pair(&l, &d1, &real_matrix(2, 1, &[0.0, 1.0])).unwrap_err();
        assert_eq!(e, Error::SingularM);

        let l = diag_pencil();
        let e = complete_deflating_pair(&l, &d1, &real_matrix(2, 1, &[2.0, 0.0])).unwrap_err();
        assert_eq!(e, Error::BadCompletionBasis);

        // isotropic X1 under an indefinite M
        let m = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let l = StructuredPencil::new(m, identity(2), StructureTag::HERMITIAN).unwrap();
        let d1 = DeflatingPair::new(real_matrix(2, 1, &[1.0, 1.0]), real_diag(&[0.0])).unwrap();
        let e = complete_deflating_pair(&l, &d1, &real_matrix(2, 1, &[0.0, 1.0])).unwrap_err();
        assert_eq!(e, Error::SingularG1);
    }

    #[test]
    fn normalize_orthonormal_is_unchanged() {
        let l = StructuredPencil::new(identity(2), identity(2), StructureTag::HERMITIAN).unwrap();
        let x = identity(2);
        let y = m_normalize_columns(&l, &x, GramMode::M, None).unwrap();
        assert!((y - x).norm() < 1e-15);
    }

    #[test]
    fn normalize_rejects_indefinite() {
        let m = real_diag(&[1.0, -1.0]);
        let l = StructuredPencil::new(m, identity(2), StructureTag::HERMITIAN).unwrap();
        let e = m_normalize_columns(&l, &identity(2), GramMode::M, None).unwrap_err();
        assert_eq!(e.name(), "NotPositiveDefinite");
    }

    #[test]
    fn tag_names_round_trip() {
        for t in StructureTag::NAMED.into_iter().chain([StructureTag::Unstructured]) {
            assert_eq!(StructureTag::parse(t.name()), Some(t));
        }
        assert_eq!(StructureTag::STAR_EVEN.partner(c(1.0, 2.0)), Some(c(-1.0, 2.0)));
        assert_eq!(StructureTag::T_ODD.partner(c(1.0, 2.0)), Some(c(-1.0, -2.0)));
    }
}
