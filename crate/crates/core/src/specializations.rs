//! Closed-form update families for definite Hermitian, odd and even pencils,
//! their real transpose counterparts, and the undamped quadratic lift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    block_diag, c, diag, fro, herm_eigs, identity, inverse, is_real, real_matrix, CMatrix, CVector, C64,
};
use crate::pencil::{m_normalize_columns, GramMode, StructureTag, StructuredPencil};
use crate::tol;
use crate::update_structured::{solve_core, structured_update, CoreSolution};
use crate::update_unstructured::UpdateResult;

/// Tolerance for "real", "imaginary" and "diagonal" parameter checks.
const PARAM_TOL: f64 = 1e-12;

/// Diagonal (or 2×2 block) parameters for a specialized family.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalParams {
    pub z1: CMatrix,
    pub z2: CMatrix,
    pub t: Option<f64>,
    pub mhat_diag: Option<CMatrix>,
}

/// How the core of a specialized update is given.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreParams {
    Mhat(CMatrix),
    Z { z1: CMatrix, z2: CMatrix },
}

fn scale_of(a: &CMatrix) -> f64 {
    PARAM_TOL * fro(a).max(1.0)
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub(crate) fn require_square(name: &str, a: &CMatrix, p: usize) -> Result<()> {
    if a.shape() != (p, p) {
        return Err(Error::DimensionMismatch(format!("{name} must be {p}x{p}, got {:?}", a.shape())));
    }
    Ok(())
}

/// Fails with `NotRealDiagonal` unless `a` is a real diagonal matrix.
pub fn require_real_diag(name: &str, a: &CMatrix) -> Result<()> {
    let tol = scale_of(a);
    if !a.is_square() || off_diagonal_norm(a) > tol || a.diagonal().iter().any(|z| z.im.abs() > tol) {
        return Err(Error::NotRealDiagonal(name.into()));
    }
    Ok(())
}

/// Fails with `NotImaginaryDiagonal` unless `a` is a purely imaginary diagonal matrix.
pub fn require_imag_diag(name: &str, a: &CMatrix) -> Result<()> {
    let tol = scale_of(a);
    if !a.is_square() || off_diagonal_norm(a) > tol || a.diagonal().iter().any(|z| z.re.abs() > tol) {
        return Err(Error::NotImaginaryDiagonal(name.into()));
    }
    Ok(())
}

fn require_positive(what: &str, a: &CMatrix) -> Result<()> {
    let ev = herm_eigs(a)?;
    let min = ev.first().copied().unwrap_or(0.0);
    if min <= tol::NUM * fro(a) {
        return Err(Error::NotPositiveDefinite {
            what: what.into(),
            min_eig: min,
        });
    }
    Ok(())
}

fn require_normalized(gram: &CMatrix, expected: &CMatrix) -> Result<()> {
    let deviation = fro(&(gram - expected)) / fro(expected).max(1.0);
    if deviation > 1e-8 {
        return Err(Error::NotNormalized { deviation });
    }
    Ok(())
}

fn require_tag(l: &StructuredPencil, tag: StructureTag) -> Result<()> {
    if l.tag != tag {
        return Err(Error::StructureViolation(format!("expected a {tag} pencil, got {}", l.tag)));
    }
    Ok(())
}

fn with_method(mut r: UpdateResult, method: &str, params: &CoreParams) -> UpdateResult {
    r.provenance.method = method.into();
    if let CoreParams::Z { z1, z2 } = params {
        r.provenance.params.push(("Z1".into(), z1.clone()));
        r.provenance.params.push(("Z2".into(), z2.clone()));
    }
    r
}

// ---------------------------------------------------------------- Hermitian

/// Core for a Hermitian pencil with `M > 0` and `X_c^*MX_c = I`:
/// `M̂ = H_a[(Λ_c−Λ_a)Λ_a + Z₁ − Z₂Λ_a]`, `K̂ = H_a[(Λ_c−Λ_a) − Z₁Λ_a + Z₂Λ_a²]`,
/// `H_a = (Λ_a² + I)⁻¹`.
pub fn hermitian_params(lambda_c: &CMatrix, lambda_a: &CMatrix, z1: &CMatrix, z2: &CMatrix) -> Result<CoreSolution> {
    let p = lambda_a.nrows();
    require_real_diag("Lambda_a", lambda_a)?;
    require_real_diag("Z1", z1)?;
    require_real_diag("Z2", z2)?;
    require_square("Lambda_c", lambda_c, p)?;
    require_square("Z1", z1, p)?;
    require_square("Z2", z2, p)?;
    let ip = identity(p);
    let h = inverse(&(lambda_a * lambda_a + &ip))?;
    let d = lambda_c - lambda_a;
    let mhat = &h * (&d * lambda_a + z1 - z2 * lambda_a);
    let khat = &h * (&d - z1 * lambda_a + z2 * lambda_a * lambda_a);
    Ok(CoreSolution { mhat, khat })
}

/// Parameters reproducing the positive-diagonal `Φ` family:
/// `Z₁ = H_a⁻¹(Φ − I)`, `Z₂ = Λ_c − Λ_a`, giving `M̂ = Φ − I`.
pub fn phi_params(lambda_c: &CMatrix, lambda_a: &CMatrix, phi: &CMatrix) -> Result<DiagonalParams> {
    let p = lambda_a.nrows();
    require_real_diag("Lambda_a", lambda_a)?;
    require_real_diag("Phi", phi)?;
    require_square("Phi", phi, p)?;
    if let Some(bad) = phi.diagonal().iter().find(|z| z.re <= 0.0) {
        return Err(Error::NotPositiveDefinite {
            what: "Phi".into(),
            min_eig: bad.re,
        });
    }
    let ip = identity(p);
    let h_inv = lambda_a * lambda_a + &ip;
    Ok(DiagonalParams {
        z1: h_inv * (phi - &ip),
        z2: lambda_c - lambda_a,
        t: None,
        mhat_diag: Some(phi - ip),
    })
}

/// `ΔM = MX_cM̂X_c^*M`, `ΔK = MX_c(Λ_c − Λ_a − M̂Λ_a)X_c^*M`.
pub fn hermitian_update(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    mhat: &CMatrix,
) -> Result<UpdateResult> {
    require_tag(l, StructureTag::HERMITIAN)?;
    require_positive("M", &l.m)?;
    require_real_diag("Lambda_a", lambda_a)?;
    require_real_diag("Mhat", mhat)?;
    let p = xc.ncols();
    require_normalized(&(xc.adjoint() * &l.m * xc), &identity(p))?;
    let core = solve_core(&identity(p), lambda_c, lambda_a, mhat)?;
    let r = structured_update(l, xc, lambda_c, lambda_a, &core)?;
    Ok(with_method(r, "hermitian", &CoreParams::Mhat(mhat.clone())))
}

/// Hermitian update from `(Z₁, Z₂)`.
pub fn hermitian_update_z(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    z1: &CMatrix,
    z2: &CMatrix,
) -> Result<UpdateResult> {
    let core = hermitian_params(lambda_c, lambda_a, z1, z2)?;
    let mhat = real_part_diag(&core.mhat);
    let r = hermitian_update(l, xc, lambda_c, lambda_a, &mhat)?;
    Ok(with_method(r, "hermitian", &CoreParams::Z { z1: z1.clone(), z2: z2.clone() }))
}

// M̂ from real diagonal data can pick up roundoff imaginary parts through Λ_c.
fn real_part_diag(a: &CMatrix) -> CMatrix {
    let d: Vec<f64> = a.diagonal().iter().map(|z| z.re).collect();
    crate::numerics::real_diag(&d)
}

/// Strategy for meeting the semidefiniteness bound with one free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsdStrategy {
    Z1Only,
    Z2Only,
}

/// Lower bound `max{(λ_a−λ_c)λ_a, λ_c/λ_a − 1}` on `z₁ − z₂λ_a` for each target.
pub fn psd_bounds(lambda_c: &CMatrix, lambda_a: &CMatrix) -> Result<Vec<f64>> {
    require_real_diag("Lambda_a", lambda_a)?;
    require_square("Lambda_c", lambda_c, lambda_a.nrows())?;
    let mut out = Vec::new();
    for i in 0..lambda_a.nrows() {
        let la = lambda_a[(i, i)].re;
        let lc = lambda_c[(i, i)].re;
        if la >= 0.0 {
            return Err(Error::PositiveTargetEigenvalue(la));
        }
        out.push(((la - lc) * la).max(lc / la - 1.0));
    }
    Ok(out)
}

/// Chooses `(Z₁, Z₂)` so that `z₁ − z₂λ_a` equals the bound plus `slack`;
/// with `K > 0` the resulting `ΔM` and `ΔK` are semidefinite.
pub fn psd_param_selection(
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    strategy: PsdStrategy,
    slack: f64,
) -> Result<DiagonalParams> {
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(Error::BadParameters(format!("slack must be a finite nonnegative number, got {slack}")));
    }
    let bounds = psd_bounds(lambda_c, lambda_a)?;
    let p = bounds.len();
    let mut z1 = vec![0.0; p];
    let mut z2 = vec![0.0; p];
    for (i, b) in bounds.iter().enumerate() {
        let target = b + slack;
        match strategy {
            PsdStrategy::Z1Only => z1[i] = target,
            PsdStrategy::Z2Only => z2[i] = -target / lambda_a[(i, i)].re,
        }
    }
    let z1 = crate::numerics::real_diag(&z1);
    let z2 = crate::numerics::real_diag(&z2);
    let core = hermitian_params(lambda_c, lambda_a, &z1, &z2)?;
    Ok(DiagonalParams {
        z1,
        z2,
        t: None,
        mhat_diag: Some(core.mhat),
    })
}

// ---------------------------------------------------------------- *-odd

/// Core for a `*`-odd pencil with `M > 0`, `X_c^*MX_c = I`:
/// `M̂ = H_a[(Λ_a−Λ_c)Λ_a + Z₁ + Z₂Λ_a]`, `K̂ = H_a[(Λ_c−Λ_a) − Z₁Λ_a − Z₂Λ_a²]`,
/// `H_a = (I − Λ_a²)⁻¹`; `Z₁` real, `Z₂` imaginary diagonal.
pub fn star_odd_params(lambda_c: &CMatrix, lambda_a: &CMatrix, z1: &CMatrix, z2: &CMatrix) -> Result<CoreSolution> {
    let p = lambda_a.nrows();
    require_imag_diag("Lambda_a", lambda_a)?;
    require_real_diag("Z1", z1)?;
    require_imag_diag("Z2", z2)?;
    require_square("Lambda_c", lambda_c, p)?;
    require_square("Z1", z1, p)?;
    require_square("Z2", z2, p)?;
    let ip = identity(p);
    let la2 = lambda_a * lambda_a;
    let h = inverse(&(&ip - &la2))?;
    let mhat = &h * ((lambda_a - lambda_c) * lambda_a + z1 + z2 * lambda_a);
    let khat = &h * ((lambda_c - lambda_a) - z1 * lambda_a - z2 * &la2);
    Ok(CoreSolution { mhat, khat })
}

/// `ΔM` Hermitian, `ΔK` skew-Hermitian.
pub fn star_odd_update(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    params: &CoreParams,
) -> Result<UpdateResult> {
    require_tag(l, StructureTag::STAR_ODD)?;
    require_positive("M", &l.m)?;
    require_imag_diag("Lambda_a", lambda_a)?;
    let p = xc.ncols();
    require_normalized(&(xc.adjoint() * &l.m * xc), &identity(p))?;
    let core = match params {
        CoreParams::Mhat(m) => {
            require_real_diag("Mhat", m)?;
            solve_core(&identity(p), lambda_c, lambda_a, m)?
        }
        CoreParams::Z { z1, z2 } => star_odd_params(lambda_c, lambda_a, z1, z2)?,
    };
    let r = structured_update(l, xc, lambda_c, lambda_a, &core)?;
    Ok(with_method(r, "star-odd", params))
}

// ---------------------------------------------------------------- *-even

fn require_nonzero_diag(a: &CMatrix) -> Result<()> {
    if a.diagonal().iter().any(|z| z.norm() == 0.0) {
        return Err(Error::ZeroChangeEigenvalue);
    }
    Ok(())
}

/// Core for a `*`-even pencil with `K > 0`, `X_c^*KX_c = I` (so `G = −Λ_c⁻¹`):
/// `M̂ = H_a[Λ_c⁻¹(Λ_c−Λ_a)Λ_a + Z₁ + Z₂Λ_a]`, `K̂ = H_a[Λ_c⁻¹(Λ_a−Λ_c) − Z₁Λ_a − Z₂Λ_a²]`;
/// `Z₁` imaginary, `Z₂` real diagonal.
pub fn star_even_params(lambda_c: &CMatrix, lambda_a: &CMatrix, z1: &CMatrix, z2: &CMatrix) -> Result<CoreSolution> {
    let p = lambda_a.nrows();
    require_square("Lambda_c", lambda_c, p)?;
    require_nonzero_diag(lambda_c)?;
    require_imag_diag("Lambda_a", lambda_a)?;
    require_imag_diag("Z1", z1)?;
    require_real_diag("Z2", z2)?;
    require_square("Z1", z1, p)?;
    require_square("Z2", z2, p)?;
    let ip = identity(p);
    let la2 = lambda_a * lambda_a;
    let h = inverse(&(&ip - &la2))?;
    let lci = inverse(lambda_c)?;
    let mhat = &h * (&lci * (lambda_c - lambda_a) * lambda_a + z1 + z2 * lambda_a);
    let khat = &h * (&lci * (lambda_a - lambda_c) - z1 * lambda_a - z2 * &la2);
    Ok(CoreSolution { mhat, khat })
}

/// `M̂ = Λ_c⁻¹ − Λ_a⁻¹`, for which `ΔK = 0`.
pub fn star_even_zero_dk(lambda_c: &CMatrix, lambda_a: &CMatrix) -> Result<CMatrix> {
    require_nonzero_diag(lambda_c)?;
    if lambda_a.diagonal().iter().any(|z| z.norm() == 0.0) {
        return Err(Error::BadParameters("Lambda_a must be nonsingular".into()));
    }
    Ok(inverse(lambda_c)? - inverse(lambda_a)?)
}

/// `ΔM` skew-Hermitian, `ΔK` Hermitian.
pub fn star_even_update(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    params: &CoreParams,
) -> Result<UpdateResult> {
    require_tag(l, StructureTag::STAR_EVEN)?;
    require_nonzero_diag(lambda_c)?;
    require_positive("K", &l.k)?;
    require_imag_diag("Lambda_a", lambda_a)?;
    let p = xc.ncols();
    require_normalized(&(xc.adjoint() * &l.k * xc), &identity(p))?;
    let g = -inverse(lambda_c)?;
    let core = match params {
        CoreParams::Mhat(m) => {
            require_imag_diag("Mhat", m)?;
            solve_core(&g, lambda_c, lambda_a, m)?
        }
        CoreParams::Z { z1, z2 } => star_even_params(lambda_c, lambda_a, z1, z2)?,
    };
    let r = structured_update(l, xc, lambda_c, lambda_a, &core)?;
    Ok(with_method(r, "star-even", params))
}

// ---------------------------------------------------------------- real T-odd / T-even

/// `J₂ = [0 1; −1 0]`.
pub fn j2() -> CMatrix {
    real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// Reads `c_j` from a block diagonal of `[0 c_j; −c_j 0]` blocks.
pub fn rotation_block_values(name: &str, a: &CMatrix) -> Result<Vec<f64>> {
    if !is_real(a, PARAM_TOL) {
        return Err(Error::ComplexInput(name.into()));
    }
    let n = a.nrows();
    if !a.is_square() || !n.is_multiple_of(2) {
        return Err(Error::BadBlockShape(format!("{name} must be square of even size")));
    }
    let tol = scale_of(a);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i / 2 != j / 2 && a[(i, j)].norm() > tol {
                return Err(Error::BadBlockShape(format!("{name} is not 2x2 block diagonal")));
            }
        }
    }
    for b in 0..n / 2 {
        let (i, j) = (2 * b, 2 * b + 1);
        let cval = a[(i, j)].re;
        if a[(i, i)].norm() > tol || a[(j, j)].norm() > tol || (a[(j, i)].re + cval).abs() > tol {
            return Err(Error::BadBlockShape(format!("{name} block {b} is not of the form [0 c; -c 0]")));
        }
        out.push(cval);
    }
    Ok(out)
}

fn require_real(name: &str, a: &CMatrix) -> Result<()> {
    if !is_real(a, PARAM_TOL) {
        return Err(Error::ComplexInput(name.into()));
    }
    Ok(())
}

fn block_params(alpha: &[f64], beta: &[f64], first: &CMatrix, second: &CMatrix, p: usize) -> Result<(CMatrix, CMatrix)> {
    if alpha.len() != p || beta.len() != p {
        return Err(Error::DimensionMismatch(format!("expected {p} block parameters")));
    }
    let z1 = block_diag(&alpha.iter().map(|&a| first * c(a, 0.0)).collect::<Vec<_>>());
    let z2 = block_diag(&beta.iter().map(|&b| second * c(b, 0.0)).collect::<Vec<_>>());
    Ok((z1, z2))
}

/// Core for a real T-odd pencil in realified coordinates (`X̂_c^TMX̂_c = I`),
/// with `Z₁ = diag(α_jI₂)`, `Z₂ = diag(β_jJ₂)`.
pub fn t_odd_real_params(lambda_c: &CMatrix, lambda_a: &CMatrix, alpha: &[f64], beta: &[f64]) -> Result<CoreSolution> {
    rotation_block_values("Lambda_c", lambda_c)?;
    let cs = rotation_block_values("Lambda_a", lambda_a)?;
    let (z1, z2) = block_params(alpha, beta, &identity(2), &j2(), cs.len())?;
    let ip = identity(lambda_a.nrows());
    let la2 = lambda_a * lambda_a;
    let h = inverse(&(&ip - &la2))?;
    let mhat = &h * ((lambda_a - lambda_c) * lambda_a + &z1 + &z2 * lambda_a);
    let khat = &h * ((lambda_c - lambda_a) - &z1 * lambda_a - &z2 * &la2);
    Ok(CoreSolution { mhat, khat })
}

/// Real T-odd update: `ΔM` symmetric, `ΔK` skew-symmetric.
pub fn t_odd_real_update(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    alpha: &[f64],
    beta: &[f64],
) -> Result<UpdateResult> {
    require_tag(l, StructureTag::T_ODD)?;
    require_real("M", &l.m)?;
    require_real("K", &l.k)?;
    require_real("X_c", xc)?;
    let core = t_odd_real_params(lambda_c, lambda_a, alpha, beta)?;
    require_normalized(&(xc.transpose() * &l.m * xc), &identity(xc.ncols()))?;
    let mut r = structured_update(l, xc, lambda_c, lambda_a, &core)?;
    r.provenance.method = "t-odd-real".into();
    r.provenance.scalars.extend(alpha.iter().map(|&a| ("alpha".to_string(), a)));
    r.provenance.scalars.extend(beta.iter().map(|&b| ("beta".to_string(), b)));
    Ok(r)
}

/// Core for a real T-even pencil in realified coordinates (`X̂_c^TKX̂_c = I`,
/// `G = −Λ_c⁻¹`), with `Z₁ = diag(α_jJ₂)`, `Z₂ = diag(β_jI₂)`.
pub fn t_even_real_params(lambda_c: &CMatrix, lambda_a: &CMatrix, alpha: &[f64], beta: &[f64]) -> Result<CoreSolution> {
    let cc = rotation_block_values("Lambda_c", lambda_c)?;
    if cc.contains(&0.0) {
        return Err(Error::ZeroChangeEigenvalue);
    }
    let cs = rotation_block_values("Lambda_a", lambda_a)?;
    let (z1, z2) = block_params(alpha, beta, &j2(), &identity(2), cs.len())?;
    let ip = identity(lambda_a.nrows());
    let la2 = lambda_a * lambda_a;
    let h = inverse(&(&ip - &la2))?;
    let lci = inverse(lambda_c)?;
    let mhat = &h * (&lci * (lambda_c - lambda_a) * lambda_a + &z1 + &z2 * lambda_a);
    let khat = &h * (&lci * (lambda_a - lambda_c) - &z1 * lambda_a - &z2 * &la2);
    Ok(CoreSolution { mhat, khat })
}

/// Real T-even update: `ΔM` skew-symmetric, `ΔK` symmetric.
pub fn t_even_real_update(
    l: &StructuredPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    alpha: &[f64],
    beta: &[f64],
) -> Result<UpdateResult> {
    require_tag(l, StructureTag::T_EVEN)?;
    require_real("M", &l.m)?;
    require_real("K", &l.k)?;
    require_real("X_c", xc)?;
    let core = t_even_real_params(lambda_c, lambda_a, alpha, beta)?;
    require_normalized(&(xc.transpose() * &l.k * xc), &identity(xc.ncols()))?;
    let mut r = structured_update(l, xc, lambda_c, lambda_a, &core)?;
    r.provenance.method = "t-even-real".into();
    r.provenance.scalars.extend(alpha.iter().map(|&a| ("alpha".to_string(), a)));
    r.provenance.scalars.extend(beta.iter().map(|&b| ("beta".to_string(), b)));
    Ok(r)
}

/// Realifies eigenpairs `(ic_j, x_j)` of a real pencil and scales each pair of
/// columns so that `X̂^TWX̂ = I` (W = M or K). Returns `(X̂, Λ̂)`.
pub fn realified_basis(
    l: &StructuredPencil,
    pairs: &[(C64, CVector)],
    mode: GramMode,
) -> Result<(CMatrix, CMatrix)> {
    let w = match mode {
        GramMode::M => &l.m,
        GramMode::K => &l.k,
    };
    let mut cols = Vec::new();
    let mut blocks = Vec::new();
    for (lam, x) in pairs {
        let d = crate::pencil::realify_pair(*lam, x)?;
        let g = d.x.transpose() * w * &d.x;
        let s = g[(0, 0)].re;
        if s <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                what: if mode == GramMode::M { "M".into() } else { "K".into() },
                min_eig: s,
            });
        }
        cols.push(&d.x * c(1.0 / s.sqrt(), 0.0));
        blocks.push(d.lambda);
    }
    let refs: Vec<&CMatrix> = cols.iter().collect();
    Ok((crate::numerics::hcat(&refs)?, block_diag(&blocks)))
}

// ---------------------------------------------------------------- quadratic lift

/// Class of the undamped quadratic `z²M + K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadClass {
    /// `M > 0`, `K` Hermitian: `z²` real.
    Hermitian,
    /// `M > 0`, `K` skew-Hermitian: `z²` imaginary.
    StarOdd,
    /// `M` skew-Hermitian, `K > 0`: `z²` imaginary and nonzero.
    StarEven,
}

impl QuadClass {
    pub fn tag(self) -> StructureTag {
        match self {
            QuadClass::Hermitian => StructureTag::HERMITIAN,
            QuadClass::StarOdd => StructureTag::STAR_ODD,
            QuadClass::StarEven => StructureTag::STAR_EVEN,
        }
    }

    pub fn from_tag(tag: StructureTag) -> Option<Self> {
        match tag {
            t if t == StructureTag::HERMITIAN => Some(QuadClass::Hermitian),
            t if t == StructureTag::STAR_ODD => Some(QuadClass::StarOdd),
            t if t == StructureTag::STAR_EVEN => Some(QuadClass::StarEven),
            _ => None,
        }
    }

    pub fn gram_mode(self) -> GramMode {
        match self {
            QuadClass::StarEven => GramMode::K,
            _ => GramMode::M,
        }
    }
}

/// Quadratic eigenvalues to change, their eigenvectors, and the aimed values.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    pub class: QuadClass,
    pub change: Vec<C64>,
    pub xc: CMatrix,
    pub aimed: Vec<C64>,
}

/// Whether `z²` is purely imaginary: `|re z²| ≤ 1e-8(1+|z|²)`.
pub fn in_e_set(z: C64) -> bool {
    (z * z).re.abs() <= tol::QUAD_CLASS * (1.0 + z.norm_sqr())
}

fn square_is_real(z: C64) -> bool {
    (z * z).im.abs() <= tol::QUAD_CLASS * (1.0 + z.norm_sqr())
}

/// The quadratic problem recast for the pencil `λM + K`, `λ = z²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProblem {
    pub tag: StructureTag,
    pub xc: CMatrix,
    pub lambda_c: CMatrix,
    pub lambda_a: CMatrix,
    pub gram_mode: GramMode,
    pub notes: Vec<String>,
}

fn check_membership(class: QuadClass, z: C64, role: &str) -> Result<()> {
    let ok = match class {
        QuadClass::Hermitian => square_is_real(z),
        QuadClass::StarOdd => in_e_set(z),
        QuadClass::StarEven => in_e_set(z) && z.norm() > 0.0,
    };
    if !ok {
        return Err(Error::EigenvalueOutsideClass(format!("{role} eigenvalue {z} for class {class:?}")));
    }
    Ok(())
}

fn squared(z: C64, class: QuadClass) -> C64 {
    let s = z * z;
    // membership makes one part vanish up to roundoff; drop it
    match class {
        QuadClass::Hermitian => c(s.re, 0.0),
        _ => c(0.0, s.im),
    }
}

/// `Λ_c = diag(z_c)²`, `Λ_a = diag(z_a)²`, with `X_c` normalized in the
/// class's inner product.
pub fn quadratic_lift(l: &StructuredPencil, spec: &QuadraticSpec) -> Result<LiftedProblem> {
    let p = spec.change.len();
    if spec.aimed.len() != p || spec.xc.ncols() != p || spec.xc.nrows() != l.n() {
        return Err(Error::DimensionMismatch("quadratic spec: one eigenvector and one aimed value per change value".into()));
    }
    for &z in &spec.change {
        check_membership(spec.class, z, "change")?;
    }
    for &z in &spec.aimed {
        check_membership(spec.class, z, "aimed")?;
    }
    let lc: Vec<C64> = spec.change.iter().map(|&z| squared(z, spec.class)).collect();
    let la: Vec<C64> = spec.aimed.iter().map(|&z| squared(z, spec.class)).collect();
    let mode = spec.class.gram_mode();
    let xc = m_normalize_columns(l, &spec.xc, mode, Some(&lc))?;
    Ok(LiftedProblem {
        tag: spec.class.tag(),
        xc,
        lambda_c: diag(&lc),
        lambda_a: diag(&la),
        gram_mode: mode,
        notes: vec![format!("squared eigenvalues; {mode:?}-normalized eigenvectors")],
    })
}

/// Lifts and dispatches to the class's pencil update.
pub fn quadratic_update(l: &StructuredPencil, spec: &QuadraticSpec, params: &CoreParams) -> Result<UpdateResult> {
    let lifted = quadratic_lift(l, spec)?;
    let (xc, lc, la) = (&lifted.xc, &lifted.lambda_c, &lifted.lambda_a);
    let mut r = match spec.class {
        QuadClass::Hermitian => match params {
            CoreParams::Mhat(m) => hermitian_update(l, xc, lc, la, m)?,
            CoreParams::Z { z1, z2 } => hermitian_update_z(l, xc, lc, la, z1, z2)?,
        },
        QuadClass::StarOdd => star_odd_update(l, xc, lc, la, params)?,
        QuadClass::StarEven => star_even_update(l, xc, lc, la, params)?,
    };
    r.provenance.method = format!("quadratic-{}", r.provenance.method);
    r.provenance.params.push(("Xc_normalized".into(), lifted.xc.clone()));
    r.provenance.params.push(("Lambda_c".into(), lifted.lambda_c.clone()));
    r.provenance.params.push(("Lambda_a".into(), lifted.lambda_a.clone()));
    r.provenance.notes.extend(lifted.notes);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real_diag, I};
    use crate::update_structured::solve_core_parametrized;

    #[test]
    fn hermitian_params_trivial() {
        let lc = real_diag(&[-2.0, -5.0]);
        let z = CMatrix::zeros(2, 2);
        let core = hermitian_params(&lc, &z, &z, &z).unwrap();
        assert_eq!(core.mhat.norm(), 0.0);
        assert!((core.khat - &lc).norm() < 1e-15);
    }

    #[test]
    fn hermitian_params_match_generic_form() {
        let lc = real_diag(&[-2.0, -5.0]);
        let la = real_diag(&[-2.5, -4.0]);
        let z1 = real_diag(&[0.3, -1.2]);
        let z2 = real_diag(&[2.0, 0.1]);
        let a = hermitian_params(&lc, &la, &z1, &z2).unwrap();
        let b = solve_core_parametrized(&identity(2), &lc, &la, &z1, &z2).unwrap();
        assert!((a.mhat - b.mhat).norm() < 1e-14);
        assert!((a.khat - b.khat).norm() < 1e-14);
    }

    #[test]
    fn phi_family_gives_phi_minus_identity() {
        let lc = real_diag(&[-2.0, -5.0]);
        let la = real_diag(&[-2.5, -4.0]);
        let phi = real_diag(&[1.5, 2.0]);
        let d = phi_params(&lc, &la, &phi).unwrap();
        let core = hermitian_params(&lc, &la, &d.z1, &d.z2).unwrap();
        assert!((&core.mhat - (&phi - identity(2))).norm() < 1e-14);
        assert!((&core.khat - (&lc - &phi * &la)).norm() < 1e-13);
    }

    #[test]
    fn constraint_violations() {
        let la = diag(&[c(1.0, 1e-3)]);
        let z = CMatrix::zeros(1, 1);
        assert_eq!(hermitian_params(&la, &la, &z, &z).unwrap_err().name(), "NotRealDiagonal");
        let lai = diag(&[I]);
        assert_eq!(star_odd_params(&lai, &lai, &z, &diag(&[c(1.0, 0.0)])).unwrap_err().name(), "NotImaginaryDiagonal");
        assert_eq!(star_even_params(&z, &lai, &z, &z).unwrap_err(), Error::ZeroChangeEigenvalue);
    }

    #[test]
    fn psd_selection_equal_spectra_is_zero() {
        let l = real_diag(&[-3.0, -1.0]);
        for s in [PsdStrategy::Z1Only, PsdStrategy::Z2Only] {
            let d = psd_param_selection(&l, &l, s, 0.0).unwrap();
            assert!(d.z1.norm() < 1e-15 && d.z2.norm() < 1e-15);
        }
        let e = psd_param_selection(&l, &real_diag(&[1.0, -1.0]), PsdStrategy::Z1Only, 0.0).unwrap_err();
        assert_eq!(e, Error::PositiveTargetEigenvalue(1.0));
    }

    #[test]
    fn odd_and_even_trivial() {
        let lc = diag(&[I * 2.0, I * -0.5]);
        let z = CMatrix::zeros(2, 2);
        let o = star_odd_params(&lc, &lc, &z, &z).unwrap();
        assert!(o.mhat.norm() < 1e-15 && o.khat.norm() < 1e-15);
        let e = star_even_params(&lc, &lc, &z, &z).unwrap();
        assert!(e.mhat.norm() < 1e-15 && e.khat.norm() < 1e-15);
    }

    #[test]
    fn even_zero_dk_shortcut_core() {
        let lc = diag(&[I * 2.0, I * -0.5]);
        let la = diag(&[I * 1.5, I * -0.7]);
        let mhat = star_even_zero_dk(&lc, &la).unwrap();
        let g = -inverse(&lc).unwrap();
        let core = solve_core(&g, &lc, &la, &mhat).unwrap();
        assert!(core.khat.norm() < 1e-15);
    }

    #[test]
    fn rotation_blocks() {
        let a = block_diag(&[j2() * c(2.0, 0.0), j2() * c(-1.0, 0.0)]);
        assert_eq!(rotation_block_values("L", &a).unwrap(), vec![2.0, -1.0]);
        assert_eq!(rotation_block_values("L", &identity(2)).unwrap_err().name(), "BadBlockShape");
        assert_eq!(rotation_block_values("L", &(j2() * I)).unwrap_err().name(), "ComplexInput");
    }

    #[test]
    fn t_odd_zero_params_unchanged() {
        let lc = block_diag(&[j2() * c(2.0, 0.0)]);
        let core = t_odd_real_params(&lc, &lc, &[0.0], &[0.0]).unwrap();
        assert!(core.mhat.norm() < 1e-15 && core.khat.norm() < 1e-15);
        let core = t_even_real_params(&lc, &lc, &[0.0], &[0.0]).unwrap();
        assert!(core.mhat.norm() < 1e-15 && core.khat.norm() < 1e-15);
    }

    #[test]
    fn e_set_membership() {
        let a: f64 = 3.7;
        let z = c((a / 2.0).sqrt(), (a / 2.0).sqrt());
        assert!(in_e_set(z));
        assert!(((z * z) - c(0.0, a)).norm() < 1e-14);
        assert!(!in_e_set(c(1.0, 0.2)));
        let z = c(1.30078, 1.30078);
        assert!(((z * z).im - 3.3841).abs() < 1e-4);
        let z = c(0.0, 57.4206);
        assert!(((z * z).re + 3297.13).abs() < 1e-2);
    }
}
