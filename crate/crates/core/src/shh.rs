//! Skew-Hamiltonian/Hamiltonian pencils and their J-twisted updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{block_diag, c, fro, identity, inverse, is_real, rcond, real_matrix, same_eigenvalue, CMatrix, CVector, C64};
use crate::pencil::{realification_block, symmetry_residual, Star, StructureTag, StructuredPencil};
use crate::specializations::j2;
use crate::tol;
use crate::update_structured::{check_change_pair, lift_core, solve_core, solve_core_parametrized, structure_diagnostics, CoreSolution};
use crate::update_unstructured::{Provenance, UpdateResult};

/// `J = [0 I_n; −I_n 0]`.
pub fn j_matrix(n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&identity(n));
    j.view_mut((n, 0), (n, n)).copy_from(&(-identity(n)));
    j
}

/// `λM + K` of size `2n` with `(JM)^⋆ = −JM` and `(JK)^⋆ = JK`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShhPencil {
    pub m: CMatrix,
    pub k: CMatrix,
    pub star: Star,
}

/// Symmetry residuals of `(JM, JK)` against `(−1, +1)`.
pub fn shh_residuals(m: &CMatrix, k: &CMatrix, star: Star) -> (f64, f64) {
    let j = j_matrix(m.nrows() / 2);
    (symmetry_residual(&(&j * m), star, -1.0), symmetry_residual(&(&j * k), star, 1.0))
}

impl ShhPencil {
    pub fn new(m: CMatrix, k: CMatrix, star: Star) -> Result<Self> {
        let n2 = m.nrows();
        if !m.is_square() || k.shape() != m.shape() {
            return Err(Error::DimensionMismatch("SHH pencil: M and K must be square of equal size".into()));
        }
        if !n2.is_multiple_of(2) {
            return Err(Error::NotShh(format!("size {n2} is odd")));
        }
        crate::numerics::check_finite("M", &m)?;
        crate::numerics::check_finite("K", &k)?;
        let (rm, rk) = shh_residuals(&m, &k, star);
        if rm > tol::STRUCT || rk > tol::STRUCT {
            return Err(Error::NotShh(format!("residuals (JM): {rm:.3e}, (JK): {rk:.3e}")));
        }
        Ok(Self { m, k, star })
    }

    pub fn n2(&self) -> usize {
        self.m.nrows()
    }

    pub fn j(&self) -> CMatrix {
        j_matrix(self.n2() / 2)
    }

    /// `JL(λ)`, a `(⋆, −1, 1)` pencil.
    pub fn twisted(&self) -> StructuredPencil {
        let j = self.j();
        StructuredPencil {
            m: &j * &self.m,
            k: &j * &self.k,
            tag: self.twisted_tag(),
        }
    }

    pub fn twisted_tag(&self) -> StructureTag {
        match self.star {
            Star::Conj => StructureTag::STAR_EVEN,
            Star::Trans => StructureTag::T_EVEN,
        }
    }

    /// The same matrices viewed as an unstructured pencil.
    pub fn as_pencil(&self) -> StructuredPencil {
        StructuredPencil {
            m: self.m.clone(),
            k: self.k.clone(),
            tag: StructureTag::Unstructured,
        }
    }
}

/// `G = X_c^⋆JMX_c` and its reciprocal condition number.
pub fn shh_gramian(l: &ShhPencil, xc: &CMatrix) -> Result<(CMatrix, f64)> {
    if xc.nrows() != l.n2() {
        return Err(Error::DimensionMismatch("X_c row count".into()));
    }
    let g = l.star.mat(xc) * l.j() * &l.m * xc;
    let rc = rcond(&g);
    Ok((g, rc))
}

/// `ΔM = J^⋆UM̂U^⋆`, `ΔK = J^⋆UK̂U^⋆` with `U = JMX_cG⁻¹`.
pub fn shh_update(
    l: &ShhPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    core: &CoreSolution,
) -> Result<UpdateResult> {
    check_change_pair(&l.m, &l.k, xc, lambda_c, lambda_a)?;
    let (g, rc) = shh_gramian(l, xc)?;
    if rc < tol::G_RCOND {
        return Err(Error::SingularG { rcond: rc });
    }
    let residual = core.residual(&g, lambda_c, lambda_a);
    if residual > tol::CORE {
        return Err(Error::CoreEquationViolated { residual });
    }
    let j = l.j();
    let u = &j * &l.m * xc * inverse(&g).map_err(|_| Error::SingularG { rcond: rc })?;
    let js = l.star.mat(&j);
    let (dm, dk) = lift_core(&u, l.star, core, Some(&js));
    let diag = structure_diagnostics(core, &g, lambda_a, l.twisted_tag());
    let mut prov = Provenance::new(match l.star {
        Star::Conj => "star-shh",
        Star::Trans => "t-shh",
    });
    prov.assumed_spectral_condition = true;
    prov.result_tag = Some(StructureTag::Unstructured);
    if let Some(d) = &diag {
        if !d.criteria_agree() {
            prov.notes.push("core structure criteria disagree".into());
        }
        prov.notes.push(if d.core_structured {
            "updated pencil is skew-Hamiltonian/Hamiltonian".into()
        } else {
            "core is not (⋆,−1,1)-structured; update is unstructured".into()
        });
    }
    prov.structure = diag;
    prov.g = Some(g);
    prov.u = Some(u);
    prov.params.push(("Mhat".into(), core.mhat.clone()));
    prov.params.push(("Khat".into(), core.khat.clone()));
    UpdateResult::assemble(&l.m, &l.k, dm, dk, (xc, lambda_a), None, prov)
}

// ---------------------------------------------------------------- *-SHH

/// Diagonal positions of `Λ`: `(start, size)` with size 2 for a pair
/// `(λ, −λ̄)` and 1 for a purely imaginary value.
pub fn star_shh_blocks(name: &str, lambda: &CMatrix) -> Result<Vec<(usize, usize)>> {
    let p = lambda.nrows();
    let scale = PATTERN_TOL * fro(lambda).max(1.0);
    for i in 0..p {
        for j in 0..p {
            if i != j && lambda[(i, j)].norm() > scale {
                return Err(Error::BadBlockPattern(format!("{name} must be diagonal")));
            }
        }
    }
    let d: Vec<C64> = lambda.diagonal().iter().copied().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < p {
        let z = d[i];
        if z.re.abs() <= scale {
            out.push((i, 1));
            i += 1;
        } else if i + 1 < p && same_eigenvalue(d[i + 1], -z.conj(), tol::EIG_EQ) {
            out.push((i, 2));
            i += 2;
        } else {
            return Err(Error::BadBlockPattern(format!(
                "{name}[{i}] = {z} is neither imaginary nor followed by its mirror {}",
                -z.conj()
            )));
        }
    }
    Ok(out)
}

const PATTERN_TOL: f64 = 1e-8;

fn near(a: C64, b: C64, scale: f64) -> bool {
    (a - b).norm() <= scale
}

fn check_off_blocks(name: &str, a: &CMatrix, blocks: &[(usize, usize)], scale: f64) -> Result<()> {
    let mut owner = vec![0; a.nrows()];
    for (b, &(s, len)) in blocks.iter().enumerate() {
        for o in owner.iter_mut().skip(s).take(len) {
            *o = b;
        }
    }
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if owner[i] != owner[j] && a[(i, j)].norm() > scale {
                return Err(Error::BadBlockPattern(format!("{name} has entries outside its diagonal blocks")));
            }
        }
    }
    Ok(())
}

/// Core for a `*`-SHH update with block-patterned `(Z₁, Z₂)`: pair blocks
/// `[0 α; −ᾱ 0]` and `[0 β; β̄ 0]`, imaginary `z₁` and real `z₂` elsewhere.
pub fn star_shh_params(
    g: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    z1: &CMatrix,
    z2: &CMatrix,
) -> Result<CoreSolution> {
    let blocks = star_shh_blocks("Lambda_c", lambda_c)?;
    let ablocks = star_shh_blocks("Lambda_a", lambda_a)?;
    if ablocks != blocks {
        return Err(Error::BadBlockPattern("Lambda_a must pair entries like Lambda_c".into()));
    }
    let d: Vec<C64> = lambda_c.diagonal().iter().copied().collect();
    for i in 0..d.len() {
        for j in 0..i {
            if same_eigenvalue(d[i], d[j], tol::EIG_EQ) {
                return Err(Error::NotSimpleEigenvalues(format!("Lambda_c repeats {}", d[i])));
            }
        }
    }
    let gs = PATTERN_TOL * fro(g);
    check_off_blocks("G", g, &blocks, gs).map_err(|_| Error::NotSimpleEigenvalues("G is not block diagonal".into()))?;
    for &(s, len) in &blocks {
        let ok = if len == 2 {
            g[(s, s)].norm() <= gs && g[(s + 1, s + 1)].norm() <= gs && near(g[(s + 1, s)], -g[(s, s + 1)].conj(), gs)
        } else {
            g[(s, s)].re.abs() <= gs
        };
        if !ok {
            return Err(Error::NotSimpleEigenvalues(format!("G block at {s} lacks the predicted form")));
        }
    }
    for (name, z, pair_sign, tail_imag) in [("Z1", z1, -1.0, true), ("Z2", z2, 1.0, false)] {
        let zs = PATTERN_TOL * fro(z).max(1.0);
        check_off_blocks(name, z, &blocks, zs)?;
        for &(s, len) in &blocks {
            let ok = if len == 2 {
                z[(s, s)].norm() <= zs
                    && z[(s + 1, s + 1)].norm() <= zs
                    && near(z[(s + 1, s)], z[(s, s + 1)].conj() * pair_sign, zs)
            } else if tail_imag {
                z[(s, s)].re.abs() <= zs
            } else {
                z[(s, s)].im.abs() <= zs
            };
            if !ok {
                return Err(Error::BadBlockPattern(format!("{name} block at {s} lacks the required pattern")));
            }
        }
    }
    solve_core_parametrized(g, lambda_c, lambda_a, z1, z2)
}

// ---------------------------------------------------------------- T-SHH

/// How a group of real eigenvalues is laid out in `Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    /// `(λ, λ̄, −λ̄, −λ)`: block `diag(Λ̂, −Λ̂^T)`, 4 columns.
    Quadruple,
    /// `(ic, −ic)`: block `cJ₂`, 2 columns.
    ImagPair,
    /// `(λ, −λ)` real: block `diag(λ, −λ)`, 2 columns.
    RealPair,
}

impl GroupKind {
    pub fn size(self) -> usize {
        match self {
            GroupKind::Quadruple => 4,
            _ => 2,
        }
    }
}

/// The grouping of a real `T`-SHH change set: kind and representative
/// eigenvalue of each group, in column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigGrouping {
    pub groups: Vec<(GroupKind, C64)>,
}

/// Eigenvector data of one group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupInput {
    /// `x` for `λ`, `x̂` for `−λ̄`.
    Quadruple { lambda: C64, x: CVector, x_hat: CVector },
    /// `x` for `ic`.
    ImagPair { lambda: C64, x: CVector },
    /// Real `x` for `λ`, `x̂` for `−λ`.
    RealPair { lambda: f64, x: CVector, x_hat: CVector },
}

/// The `Λ` block of a group.
pub fn group_block(kind: GroupKind, lam: C64) -> CMatrix {
    match kind {
        GroupKind::Quadruple => {
            let h = realification_block(lam);
            block_diag(&[h.clone(), -h.transpose()])
        }
        GroupKind::ImagPair => j2() * c(lam.im, 0.0),
        GroupKind::RealPair => real_matrix(2, 2, &[lam.re, 0.0, 0.0, -lam.re]),
    }
}

impl EigGrouping {
    pub fn lambda(&self) -> CMatrix {
        block_diag(&self.groups.iter().map(|&(k, l)| group_block(k, l)).collect::<Vec<_>>())
    }

    pub fn offsets(&self) -> Vec<(usize, usize)> {
        let mut s = 0;
        self.groups
            .iter()
            .map(|(k, _)| {
                let o = (s, k.size());
                s += k.size();
                o
            })
            .collect()
    }

    /// All eigenvalues represented, with multiplicity.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for &(k, l) in &self.groups {
            match k {
                GroupKind::Quadruple => out.extend([l, l.conj(), -l.conj(), -l]),
                GroupKind::ImagPair => out.extend([c(0.0, l.im), c(0.0, -l.im)]),
                GroupKind::RealPair => out.extend([c(l.re, 0.0), c(-l.re, 0.0)]),
            }
        }
        out
    }

    /// Reads the grouping back from a block-diagonal `Λ`.
    pub fn infer(lambda: &CMatrix) -> Result<Self> {
        if !is_real(lambda, 1e-14) {
            return Err(Error::ComplexInput("Lambda".into()));
        }
        let p = lambda.nrows();
        let tol = PATTERN_TOL * fro(lambda).max(1.0);
        let at = |i: usize, j: usize| lambda[(i, j)].re;
        let mut groups = Vec::new();
        let mut i = 0;
        while i < p {
            if i + 1 >= p {
                return Err(Error::BadBlockPattern(format!("trailing 1x1 block at {i}")));
            }
            let (a, b) = (at(i, i), at(i, i + 1));
            let (kind, lam) = if b.abs() > tol {
                if a.abs() > tol {
                    (GroupKind::Quadruple, c(a, b))
                } else {
                    (GroupKind::ImagPair, c(0.0, b))
                }
            } else if at(i + 1, i).abs() <= tol && (at(i + 1, i + 1) + a).abs() <= tol && a.abs() > tol {
                (GroupKind::RealPair, c(a, 0.0))
            } else {
                return Err(Error::BadBlockPattern(format!("unrecognized block at {i}")));
            };
            let size = kind.size();
            if i + size > p {
                return Err(Error::BadBlockPattern(format!("truncated block at {i}")));
            }
            let expect = group_block(kind, lam);
            let got = lambda.view((i, i), (size, size)).into_owned();
            if fro(&(got - expect)) > tol {
                return Err(Error::BadBlockPattern(format!("block at {i} does not match the {kind:?} form")));
            }
            groups.push((kind, lam));
            i += size;
        }
        let g = Self { groups };
        check_off_blocks("Lambda", lambda, &g.offsets(), tol)?;
        Ok(g)
    }

    /// Builds the real `X_c` and grouping from eigenvectors.
    pub fn realize(inputs: &[GroupInput]) -> Result<(CMatrix, Self)> {
        let mut cols: Vec<CMatrix> = Vec::new();
        let mut groups = Vec::new();
        let re_im = |x: &CVector| {
            let n = x.nrows();
            CMatrix::from_fn(n, 2, |i, j| if j == 0 { c(x[i].re, 0.0) } else { c(x[i].im, 0.0) })
        };
        for g in inputs {
            match g {
                GroupInput::Quadruple { lambda, x, x_hat } => {
                    cols.push(re_im(x));
                    cols.push(re_im(x_hat));
                    groups.push((GroupKind::Quadruple, *lambda));
                }
                GroupInput::ImagPair { lambda, x } => {
                    cols.push(re_im(x));
                    groups.push((GroupKind::ImagPair, *lambda));
                }
                GroupInput::RealPair { lambda, x, x_hat } => {
                    if !is_real(&crate::numerics::col_matrix(x), 1e-12) || !is_real(&crate::numerics::col_matrix(x_hat), 1e-12) {
                        return Err(Error::ComplexInput("real-pair eigenvectors".into()));
                    }
                    let n = x.nrows();
                    cols.push(CMatrix::from_fn(n, 2, |i, j| c(if j == 0 { x[i].re } else { x_hat[i].re }, 0.0)));
                    groups.push((GroupKind::RealPair, c(*lambda, 0.0)));
                }
            }
        }
        let refs: Vec<&CMatrix> = cols.iter().collect();
        let grouping = Self { groups };
        grouping.validate()?;
        Ok((crate::numerics::hcat(&refs)?, grouping))
    }

    /// Kinds must match the eigenvalues and all represented values must be distinct.
    pub fn validate(&self) -> Result<()> {
        for &(k, l) in &self.groups {
            let ok = match k {
                GroupKind::Quadruple => l.re != 0.0 && l.im != 0.0,
                GroupKind::ImagPair => l.im != 0.0,
                GroupKind::RealPair => l.re != 0.0,
            };
            if !ok {
                return Err(Error::BadBlockPattern(format!("{l} cannot form a {k:?} group")));
            }
        }
        let ev = self.eigenvalues();
        for i in 0..ev.len() {
            for j in 0..i {
                if same_eigenvalue(ev[i], ev[j], tol::EIG_EQ) {
                    return Err(Error::RepeatedEigenvalue(format!("{}", ev[i])));
                }
            }
        }
        Ok(())
    }

    fn same_layout(&self, other: &Self) -> bool {
        self.groups.len() == other.groups.len() && self.groups.iter().zip(&other.groups).all(|(a, b)| a.0 == b.0)
    }
}

/// Parameters of the real `T`-SHH families, one entry per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TShhParams {
    /// `M̂_j = [0, αI+βJ₂; −αI+βJ₂, 0]` for quadruples, `βJ₂` for pairs
    /// (the `α` of a pair is ignored).
    Mhat(Vec<(f64, f64)>),
    /// `(Z₁, Z₂)` blocks: quadruples `[0, αI+βJ₂; −αI+βJ₂, 0]` and
    /// `[0, uI+vJ₂; uI−vJ₂, 0]`; imaginary pairs `βJ₂`, `uI`; real pairs `βJ₂`,
    /// `u[0 1; 1 0]`. Entries are `(α, β, u, v)`.
    Z(Vec<(f64, f64, f64, f64)>),
}

fn off_block(a: CMatrix, b: CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m.view_mut((0, 2), (2, 2)).copy_from(&a);
    m.view_mut((2, 0), (2, 2)).copy_from(&b);
    m
}

fn span(a: f64, b: f64, m: &CMatrix) -> CMatrix {
    identity(2) * c(a, 0.0) + m * c(b, 0.0)
}

/// Checks the block form of `G = X_c^TJMX_c` predicted for distinct eigenvalues.
pub fn check_t_shh_gramian(g: &CMatrix, grouping: &EigGrouping) -> Result<()> {
    let gs = PATTERN_TOL * fro(g);
    let offs = grouping.offsets();
    check_off_blocks("G", g, &offs, gs)?;
    for (&(kind, _), &(s, len)) in grouping.groups.iter().zip(&offs) {
        let blk = g.view((s, s), (len, len)).into_owned();
        let ok = match kind {
            GroupKind::Quadruple => {
                let a = blk.view((0, 0), (2, 2)).norm() <= gs && blk.view((2, 2), (2, 2)).norm() <= gs;
                let cc = blk.view((0, 2), (2, 2)).into_owned();
                let in_span = near(cc[(0, 0)], cc[(1, 1)], gs) && near(cc[(0, 1)], -cc[(1, 0)], gs);
                let low = blk.view((2, 0), (2, 2)).into_owned();
                a && in_span && fro(&(low + cc.transpose())) <= gs
            }
            _ => blk[(0, 0)].norm() <= gs && blk[(1, 1)].norm() <= gs && near(blk[(1, 0)], -blk[(0, 1)], gs),
        };
        if !ok {
            return Err(Error::BadBlockPattern(format!("G block at {s} lacks the predicted form")));
        }
    }
    Ok(())
}

/// Builds the structured core for a real `T`-SHH update.
pub fn t_shh_core(
    g: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    grouping: &EigGrouping,
    params: &TShhParams,
) -> Result<CoreSolution> {
    let n = grouping.groups.len();
    let len = match params {
        TShhParams::Mhat(v) => v.len(),
        TShhParams::Z(v) => v.len(),
    };
    if len != n {
        return Err(Error::DimensionMismatch(format!("expected {n} parameter groups, got {len}")));
    }
    let j = j2();
    let swap = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    match params {
        TShhParams::Mhat(v) => {
            let blocks: Vec<CMatrix> = grouping
                .groups
                .iter()
                .zip(v)
                .map(|(&(kind, _), &(a, b))| match kind {
                    GroupKind::Quadruple => off_block(span(a, b, &j), span(-a, b, &j)),
                    _ => &j * c(b, 0.0),
                })
                .collect();
            solve_core(g, lambda_c, lambda_a, &block_diag(&blocks))
        }
        TShhParams::Z(v) => {
            let mut z1 = Vec::new();
            let mut z2 = Vec::new();
            for (&(kind, _), &(a, b, u, w)) in grouping.groups.iter().zip(v) {
                match kind {
                    GroupKind::Quadruple => {
                        z1.push(off_block(span(a, b, &j), span(-a, b, &j)));
                        z2.push(off_block(span(u, w, &j), span(u, -w, &j)));
                    }
                    GroupKind::ImagPair => {
                        z1.push(&j * c(b, 0.0));
                        z2.push(identity(2) * c(u, 0.0));
                    }
                    GroupKind::RealPair => {
                        z1.push(&j * c(b, 0.0));
                        z2.push(&swap * c(u, 0.0));
                    }
                }
            }
            solve_core_parametrized(g, lambda_c, lambda_a, &block_diag(&z1), &block_diag(&z2))
        }
    }
}

/// Real `T`-SHH update; the grouping is read from the block layout of `Λ_c`.
pub fn t_shh_update(
    l: &ShhPencil,
    xc: &CMatrix,
    lambda_c: &CMatrix,
    lambda_a: &CMatrix,
    params: &TShhParams,
) -> Result<UpdateResult> {
    if l.star != Star::Trans {
        return Err(Error::NotShh("real updates need a transpose-structured pencil".into()));
    }
    for (name, a) in [("M", &l.m), ("K", &l.k), ("X_c", xc)] {
        if !is_real(a, 1e-14) {
            return Err(Error::ComplexInput(name.into()));
        }
    }
    let grouping = EigGrouping::infer(lambda_c)?;
    grouping.validate()?;
    let aimed = EigGrouping::infer(lambda_a)?;
    if !grouping.same_layout(&aimed) {
        return Err(Error::BadBlockPattern("Lambda_a must group like Lambda_c".into()));
    }
    let (g, rc) = shh_gramian(l, xc)?;
    if rc < tol::G_RCOND {
        return Err(Error::SingularG { rcond: rc });
    }
    check_t_shh_gramian(&g, &grouping)?;
    let core = t_shh_core(&g, lambda_c, lambda_a, &grouping, params)?;
    let mut r = shh_update(l, xc, lambda_c, lambda_a, &core)?;
    r.provenance.notes.push(format!(
        "{} groups; column count {} of {}",
        grouping.groups.len(),
        xc.ncols(),
        l.n2()
    ));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{diag, real_diag, I};

    #[test]
    fn j_squares_to_minus_identity() {
        let j = j_matrix(2);
        assert_eq!(&j * &j, -identity(4));
        assert_eq!(j.transpose(), -j);
    }

    #[test]
    fn rejects_non_shh() {
        let e = ShhPencil::new(identity(2), identity(2), Star::Conj).unwrap_err();
        assert_eq!(e.name(), "NotSHH");
        // M = I: JM = J is skew; K = J^{-1} = -J: JK = I symmetric
        let p = ShhPencil::new(identity(2), -j_matrix(1), Star::Trans).unwrap();
        assert_eq!(p.twisted().tag, StructureTag::T_EVEN);
    }

    #[test]
    fn star_blocks_layout() {
        let l = diag(&[c(-0.9, -0.7), c(0.9, -0.7), c(0.0, -0.1)]);
        assert_eq!(star_shh_blocks("L", &l).unwrap(), vec![(0, 2), (2, 1)]);
        let bad = diag(&[c(-0.9, -0.7), c(0.3, 0.0)]);
        assert_eq!(star_shh_blocks("L", &bad).unwrap_err().name(), "BadBlockPattern");
    }

    #[test]
    fn grouping_round_trip() {
        let g = EigGrouping {
            groups: vec![
                (GroupKind::Quadruple, c(0.5, 1.5)),
                (GroupKind::ImagPair, c(0.0, 2.0)),
                (GroupKind::RealPair, c(0.7, 0.0)),
            ],
        };
        g.validate().unwrap();
        let l = g.lambda();
        assert_eq!(l.nrows(), 8);
        assert_eq!(EigGrouping::infer(&l).unwrap(), g);
        let rep = EigGrouping {
            groups: vec![(GroupKind::ImagPair, c(0.0, 2.0)), (GroupKind::ImagPair, c(0.0, -2.0))],
        };
        assert_eq!(rep.validate().unwrap_err().name(), "RepeatedEigenvalue");
        assert_eq!(EigGrouping::infer(&real_diag(&[1.0, 2.0])).unwrap_err().name(), "BadBlockPattern");
    }

    #[test]
    fn quadruple_block_has_the_four_eigenvalues() {
        let lam = c(0.5, 1.5);
        let b = group_block(GroupKind::Quadruple, lam);
        let ev = crate::numerics::eigvals(&b);
        for want in [lam, lam.conj(), -lam.conj(), -lam] {
            assert!(ev.iter().any(|&z| (z - want).norm() < 1e-12));
        }
        let _ = I;
    }
}
