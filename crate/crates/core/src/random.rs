//! Seeded random pencils with planted complementary deflating pairs.
//!
//! Every instance is built as `M = V^{-⋆}D_MV^{-1}`, `K = V^{-⋆}D_KV^{-1}` with
//! `D_K = −D_MΛ` block diagonal, so the columns of `V` are known eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{block_diag, c, diag, identity, inverse, rcond, CMatrix, C64};
use crate::pencil::{DeflatingPair, Star, StructureTag};
use crate::shh::{group_block, j_matrix, EigGrouping, GroupKind};
use crate::specializations::j2;

/// Classes the generator knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RandomClass {
    Structured(StructureTag),
    StarShh,
    TShh,
}

impl RandomClass {
    pub const ALL: [RandomClass; 9] = [
        RandomClass::Structured(StructureTag::SYMMETRIC),
        RandomClass::Structured(StructureTag::HERMITIAN),
        RandomClass::Structured(StructureTag::T_ODD),
        RandomClass::Structured(StructureTag::STAR_ODD),
        RandomClass::Structured(StructureTag::T_EVEN),
        RandomClass::Structured(StructureTag::STAR_EVEN),
        RandomClass::StarShh,
        RandomClass::TShh,
        RandomClass::Structured(StructureTag::Unstructured),
    ];

    pub fn name(self) -> &'static str {
        match self {
            RandomClass::Structured(t) => t.name(),
            RandomClass::StarShh => "star-shh",
            RandomClass::TShh => "t-shh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "star-shh" | "*-shh" => Some(RandomClass::StarShh),
            "t-shh" => Some(RandomClass::TShh),
            _ => StructureTag::parse(s).map(RandomClass::Structured),
        }
    }

    /// The structure of the matrices handed to the update routine.
    pub fn shh_star(self) -> Option<Star> {
        match self {
            RandomClass::StarShh => Some(Star::Conj),
            RandomClass::TShh => Some(Star::Trans),
            _ => None,
        }
    }
}

/// Generator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub class: RandomClass,
    /// Hermitian/`*`-odd: `M > 0`; `*`-even: `K > 0`. Forces 1×1 blocks.
    pub definite: bool,
}

/// A generated instance together with its planted ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub class: RandomClass,
    pub m: CMatrix,
    pub k: CMatrix,
    pub change: DeflatingPair,
    pub fixed: DeflatingPair,
    /// Target vectors; only set for unstructured instances.
    pub target_x: Option<CMatrix>,
    pub target_lambda: CMatrix,
    /// A core scale keeping the updated pencil regular (`M̂ = tG`).
    pub t: f64,
    /// Eigenvalues of the updated pencil.
    pub expected: Vec<C64>,
    pub grouping: Option<EigGrouping>,
}

impl Planted {
    pub fn tag(&self) -> StructureTag {
        match self.class {
            RandomClass::Structured(t) => t,
            _ => StructureTag::Unstructured,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Block {
    /// `(λ, m)`: `D_M = m`.
    Single(C64, C64),
    /// `(λ, g)`: eigenvalues `λ` and its partner, `D_M = [0 ε₁g^⋆; g 0]`.
    Couple(C64, C64),
}

struct Gen {
    rng: ChaCha8Rng,
    used: Vec<C64>,
    /// Upper end of eigenvalue magnitudes; grows with the number drawn.
    span: f64,
}

const MIN_GAP: f64 = 0.25;

impl Gen {
    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn magnitude(&mut self) -> f64 {
        self.rng.random_range(0.5..self.span)
    }

    fn sign(&mut self) -> f64 {
        if self.rng.random_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    }

    fn separated(&self, vals: &[C64]) -> bool {
        let far = |a: C64, b: C64| (a - b).norm() >= MIN_GAP * (1.0 + a.norm().max(b.norm())) * 0.5;
        vals.iter().enumerate().all(|(i, &a)| {
            self.used.iter().all(|&b| far(a, b)) && vals[..i].iter().all(|&b| far(a, b))
        })
    }

    /// Draws eigenvalues via `draw` until they stay clear of all earlier ones.
    fn fresh<F: FnMut(&mut Self) -> Vec<C64>>(&mut self, mut draw: F) -> Result<Vec<C64>> {
        for _ in 0..1000 {
            let v = draw(self);
            if self.separated(&v) {
                self.used.extend(&v);
                return Ok(v);
            }
        }
        Err(Error::BadParameters("could not draw separated eigenvalues".into()))
    }

    fn complex(&mut self) -> C64 {
        C64::from_polar(self.magnitude(), self.rng.random_range(0.0..std::f64::consts::TAU))
    }

    fn generic(&mut self) -> C64 {
        // keep clear of both axes
        loop {
            let z = self.complex();
            if z.re.abs() > 0.3 && z.im.abs() > 0.3 {
                return z;
            }
        }
    }

    fn real(&mut self) -> C64 {
        c(self.sign() * self.magnitude(), 0.0)
    }

    fn imag(&mut self) -> C64 {
        c(0.0, self.sign() * self.magnitude())
    }

    fn matrix(&mut self, rows: usize, cols: usize, complex: bool) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            let re = self.normal();
            let im = if complex { self.normal() } else { 0.0 };
            c(re, im)
        })
    }

    /// Well-conditioned eigenvector basis `I + G/(2√n)`.
    fn basis(&mut self, n: usize, complex: bool) -> Result<(CMatrix, CMatrix)> {
        for _ in 0..100 {
            let v = identity(n) + self.matrix(n, n, complex) * c(0.5 / (n as f64).sqrt(), 0.0);
            if rcond(&v) > 1e-2 {
                let vi = inverse(&v)?;
                return Ok((v, vi));
            }
        }
        Err(Error::BadParameters("could not draw a well-conditioned basis".into()))
    }
}

fn block_values(tag: StructureTag, b: Block) -> Vec<C64> {
    match b {
        Block::Single(l, _) => vec![l],
        Block::Couple(l, _) => vec![l, tag.partner(l).unwrap_or(l)],
    }
}

fn block_dm(tag: StructureTag, b: Block) -> CMatrix {
    match b {
        Block::Single(_, m) => diag(&[m]),
        Block::Couple(_, g) => {
            let star = tag.star().unwrap_or(Star::Trans);
            let e1 = tag.eps1().unwrap_or(1.0);
            let mut d = CMatrix::zeros(2, 2);
            d[(0, 1)] = star.scalar(g) * e1;
            d[(1, 0)] = g;
            d
        }
    }
}

/// Which block kinds a class admits.
fn allows(tag: StructureTag, definite: bool) -> (bool, bool) {
    if definite {
        return (true, false);
    }
    match tag {
        StructureTag::Unstructured => (true, false),
        t if t == StructureTag::SYMMETRIC => (true, false),
        t if t == StructureTag::T_ODD || t == StructureTag::T_EVEN => (false, true),
        _ => (true, true),
    }
}

fn draw_block(g: &mut Gen, tag: StructureTag, couple: bool, definite: bool, like: Option<Block>) -> Result<Block> {
    let star_even = tag == StructureTag::STAR_EVEN;
    if couple {
        let vals = g.fresh(|g| {
            let l = g.generic();
            vec![l, tag.partner(l).unwrap()]
        })?;
        let d = match like {
            Some(Block::Couple(_, d)) => d,
            _ => g.complex(),
        };
        return Ok(Block::Couple(vals[0], d));
    }
    let l = g.fresh(|g| {
        vec![match tag {
            t if t == StructureTag::HERMITIAN => g.real(),
            t if t == StructureTag::STAR_ODD || t == StructureTag::STAR_EVEN => g.imag(),
            _ => g.complex(),
        }]
    })?[0];
    let m = match like {
        Some(Block::Single(_, m)) => m,
        _ if definite && star_even => -l.inv(),
        _ if definite => c(1.0, 0.0),
        _ => match tag {
            t if t == StructureTag::HERMITIAN || t == StructureTag::STAR_ODD => g.real(),
            t if t == StructureTag::STAR_EVEN => g.imag(),
            _ => g.complex(),
        },
    };
    Ok(Block::Single(l, m))
}

fn fill(g: &mut Gen, tag: StructureTag, size: usize, definite: bool) -> Result<Vec<Block>> {
    let (single, couple) = allows(tag, definite);
    if !single && size % 2 == 1 {
        return Err(Error::BadParameters(format!("{} needs an even number of columns", tag.name())));
    }
    let mut out = Vec::new();
    let mut left = size;
    while left > 0 {
        let use_couple = couple && left >= 2 && (!single || g.rng.random_bool(0.5));
        out.push(draw_block(g, tag, use_couple, definite, None)?);
        left -= if use_couple { 2 } else { 1 };
    }
    Ok(out)
}

fn values(tag: StructureTag, blocks: &[Block]) -> Vec<C64> {
    blocks.iter().flat_map(|&b| block_values(tag, b)).collect()
}

fn lambda_of(tag: StructureTag, blocks: &[Block]) -> CMatrix {
    diag(&values(tag, blocks))
}

fn sandwich(vi: &CMatrix, d: &CMatrix, star: Star) -> CMatrix {
    star.mat(vi) * d * vi
}

fn symmetrize(a: &CMatrix, star: Star, eps: f64) -> CMatrix {
    (a + star.mat(a) * c(eps, 0.0)) * c(0.5, 0.0)
}

fn check_sizes(spec: &RandomSpec) -> Result<()> {
    if spec.p == 0 || spec.p >= spec.n {
        return Err(Error::BadParameters(format!("need 0 < p < n, got p = {}, n = {}", spec.p, spec.n)));
    }
    if spec.class.shh_star().is_some() && spec.n % 2 == 1 {
        return Err(Error::BadParameters("SHH pencils have even size".into()));
    }
    if spec.definite {
        let ok = matches!(spec.class, RandomClass::Structured(t)
            if t == StructureTag::HERMITIAN || t == StructureTag::STAR_ODD || t == StructureTag::STAR_EVEN);
        if !ok {
            return Err(Error::BadParameters(format!("no definite variant for {}", spec.class.name())));
        }
    }
    Ok(())
}

/// Generates a planted instance; identical specs give identical output.
pub fn generate(spec: &RandomSpec) -> Result<Planted> {
    check_sizes(spec)?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        used: Vec::new(),
        span: 2.5f64.max(0.5 + 0.3 * (spec.n + spec.p) as f64),
    };
    match spec.class {
        RandomClass::TShh => return generate_t_shh(&mut g, spec),
        RandomClass::Structured(StructureTag::Unstructured) => return generate_unstructured(&mut g, spec),
        _ => {}
    }
    let tag = match spec.class {
        RandomClass::Structured(t) => t,
        _ => StructureTag::STAR_EVEN,
    };
    let star = tag.star().unwrap();
    let (e1, e2) = (tag.eps1().unwrap(), tag.eps2().unwrap());
    let change = fill(&mut g, tag, spec.p, spec.definite)?;
    let fixed = fill(&mut g, tag, spec.n - spec.p, spec.definite)?;
    let targets: Vec<Block> = change
        .iter()
        .map(|&b| draw_block(&mut g, tag, matches!(b, Block::Couple(..)), spec.definite, Some(b)))
        .collect::<Result<_>>()?;
    let all: Vec<Block> = change.iter().chain(&fixed).copied().collect();
    let dm = block_diag(&all.iter().map(|&b| block_dm(tag, b)).collect::<Vec<_>>());
    let lam = lambda_of(tag, &all);
    let dk = -(&dm * &lam);
    let (v, vi) = g.basis(spec.n, true)?;
    let mut m = symmetrize(&sandwich(&vi, &dm, star), star, e1);
    let mut k = symmetrize(&sandwich(&vi, &dk, star), star, e2);
    if spec.class == RandomClass::StarShh {
        // M' = JM is the *-even pencil just built; M = −JM'
        let j = j_matrix(spec.n / 2);
        m = -(&j * m);
        k = -(&j * k);
    }
    let p = spec.p;
    let t = g.rng.random_range(-0.5..1.0);
    let mut expected = values(tag, &targets);
    expected.extend(values(tag, &fixed));
    Ok(Planted {
        class: spec.class,
        m,
        k,
        change: DeflatingPair::new(v.columns(0, p).into_owned(), lambda_of(tag, &change))?,
        fixed: DeflatingPair::new(v.columns(p, spec.n - p).into_owned(), lambda_of(tag, &fixed))?,
        target_x: None,
        target_lambda: lambda_of(tag, &targets),
        t,
        expected,
        grouping: None,
    })
}

fn generate_unstructured(g: &mut Gen, spec: &RandomSpec) -> Result<Planted> {
    let tag = StructureTag::SYMMETRIC;
    let all = fill(g, tag, spec.n, false)?;
    let targets = fill(g, tag, spec.p, false)?;
    let lam = lambda_of(tag, &all);
    let dm = diag(&(0..spec.n).map(|_| g.complex()).collect::<Vec<_>>());
    let dk = -(&dm * &lam);
    let (v, vi) = g.basis(spec.n, true)?;
    let m = vi.adjoint() * &dm * &vi;
    let k = vi.adjoint() * &dk * &vi;
    let p = spec.p;
    let xc = v.columns(0, p).into_owned();
    let xa = &xc + g.matrix(spec.n, p, true) * c(0.2 / (spec.n as f64).sqrt(), 0.0);
    let t = g.rng.random_range(-0.5..1.0);
    let mut expected = values(tag, &targets);
    expected.extend(values(tag, &all[p..]));
    Ok(Planted {
        class: spec.class,
        m,
        k,
        change: DeflatingPair::new(xc, lambda_of(tag, &all[..p]))?,
        fixed: DeflatingPair::new(v.columns(p, spec.n - p).into_owned(), lambda_of(tag, &all[p..]))?,
        target_x: Some(xa),
        target_lambda: lambda_of(tag, &targets),
        t,
        expected,
        grouping: None,
    })
}

fn group_values(kind: GroupKind, l: C64) -> Vec<C64> {
    EigGrouping { groups: vec![(kind, l)] }.eigenvalues()
}

fn draw_group(g: &mut Gen, kind: GroupKind) -> Result<C64> {
    let v = g.fresh(|g| {
        let l = match kind {
            GroupKind::Quadruple => g.generic(),
            GroupKind::ImagPair => c(0.0, g.magnitude()),
            GroupKind::RealPair => c(g.magnitude(), 0.0),
        };
        group_values(kind, l)
    })?;
    Ok(v[0])
}

fn t_shh_layout(g: &mut Gen, size: usize) -> Result<Vec<GroupKind>> {
    if size % 2 == 1 {
        return Err(Error::BadParameters("t-shh needs an even number of columns on each side".into()));
    }
    let mut out = Vec::new();
    let mut left = size;
    while left > 0 {
        let kind = if left >= 4 && g.rng.random_bool(0.5) {
            GroupKind::Quadruple
        } else if g.rng.random_bool(0.5) {
            GroupKind::ImagPair
        } else {
            GroupKind::RealPair
        };
        out.push(kind);
        left -= kind.size();
    }
    Ok(out)
}

/// `D_M` block of a real `T`-SHH group (for the twisted `T`-even pencil).
fn t_shh_dm(kind: GroupKind, u: f64, v: f64) -> CMatrix {
    let jj = j2();
    match kind {
        GroupKind::Quadruple => {
            let cc = identity(2) * c(u, 0.0) + &jj * c(v, 0.0);
            let mut d = CMatrix::zeros(4, 4);
            d.view_mut((0, 2), (2, 2)).copy_from(&cc);
            d.view_mut((2, 0), (2, 2)).copy_from(&(-cc.transpose()));
            d
        }
        _ => jj * c(v, 0.0),
    }
}

fn generate_t_shh(g: &mut Gen, spec: &RandomSpec) -> Result<Planted> {
    let change = t_shh_layout(g, spec.p)?;
    let fixed = t_shh_layout(g, spec.n - spec.p)?;
    let mut groups = Vec::new();
    let mut dms = Vec::new();
    for &kind in change.iter().chain(&fixed) {
        let l = draw_group(g, kind)?;
        let (u, v) = (g.normal(), g.sign() * g.magnitude());
        groups.push((kind, l));
        dms.push(t_shh_dm(kind, u, v));
    }
    let targets: Vec<(GroupKind, C64)> = change
        .iter()
        .map(|&kind| draw_group(g, kind).map(|l| (kind, l)))
        .collect::<Result<_>>()?;
    let all = EigGrouping { groups: groups.clone() };
    let dm = block_diag(&dms);
    let dk = -(&dm * all.lambda());
    let (v, vi) = g.basis(spec.n, false)?;
    let mp = symmetrize(&sandwich(&vi, &dm, Star::Trans), Star::Trans, -1.0);
    let kp = symmetrize(&sandwich(&vi, &dk, Star::Trans), Star::Trans, 1.0);
    let j = j_matrix(spec.n / 2);
    let (m, k) = (-(&j * mp), -(&j * kp));
    let nc = change.len();
    let cg = EigGrouping { groups: groups[..nc].to_vec() };
    let fg = EigGrouping { groups: groups[nc..].to_vec() };
    let tg = EigGrouping { groups: targets };
    let p = spec.p;
    let t = g.rng.random_range(-0.5..1.0);
    let mut expected = tg.eigenvalues();
    expected.extend(fg.eigenvalues());
    Ok(Planted {
        class: spec.class,
        m,
        k,
        change: DeflatingPair::new(v.columns(0, p).into_owned(), cg.lambda())?,
        fixed: DeflatingPair::new(v.columns(p, spec.n - p).into_owned(), fg.lambda())?,
        target_x: None,
        target_lambda: tg.lambda(),
        t,
        expected,
        grouping: Some(cg),
    })
}

/// Checks a block of `Λ` against its group form (used by tests).
pub fn group_matches(kind: GroupKind, l: C64, block: &CMatrix) -> bool {
    crate::numerics::fro(&(group_block(kind, l) - block)) < 1e-14
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::{deflation_residual, has_structure};
    use crate::shh::shh_residuals;

    fn spec(class: RandomClass, seed: u64) -> RandomSpec {
        RandomSpec { seed, n: 8, p: 4, class, definite: false }
    }

    #[test]
    fn deterministic_by_seed() {
        for class in RandomClass::ALL {
            let a = generate(&spec(class, 7)).unwrap();
            let b = generate(&spec(class, 7)).unwrap();
            assert_eq!(a, b, "{}", class.name());
        }
    }

    #[test]
    fn planted_pairs_are_deflating() {
        for class in RandomClass::ALL {
            for seed in 0..5 {
                let pl = generate(&spec(class, seed)).unwrap();
                for d in [&pl.change, &pl.fixed] {
                    let r = deflation_residual(&pl.m, &pl.k, &d.x, &d.lambda).unwrap();
                    assert!(r.rel < 1e-12, "{} seed {seed}: {:e}", class.name(), r.rel);
                }
                match class {
                    RandomClass::Structured(t) if t != StructureTag::Unstructured => {
                        assert!(has_structure(&pl.m, &pl.k, t, 1e-13), "{}", class.name())
                    }
                    RandomClass::StarShh | RandomClass::TShh => {
                        let (a, b) = shh_residuals(&pl.m, &pl.k, class.shh_star().unwrap());
                        assert!(a < 1e-13 && b < 1e-13);
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn t_shh_grouping_is_consistent() {
        let pl = generate(&RandomSpec { seed: 3, n: 12, p: 6, class: RandomClass::TShh, definite: false }).unwrap();
        let g = pl.grouping.unwrap();
        assert_eq!(EigGrouping::infer(&pl.change.lambda).unwrap(), g);
        g.validate().unwrap();
        for (&(kind, l), &(s, len)) in g.groups.iter().zip(&g.offsets()) {
            assert!(group_matches(kind, l, &pl.change.lambda.view((s, s), (len, len)).into_owned()));
        }
        assert!(crate::numerics::is_real(&pl.m, 0.0));
    }

    #[test]
    fn rejects_bad_sizes() {
        let bad = |n, p, class| generate(&RandomSpec { seed: 0, n, p, class, definite: false }).unwrap_err().name();
        assert_eq!(bad(4, 4, RandomClass::Structured(StructureTag::HERMITIAN)), "BadParameters");
        assert_eq!(bad(5, 2, RandomClass::StarShh), "BadParameters");
        assert_eq!(bad(6, 3, RandomClass::Structured(StructureTag::T_ODD)), "BadParameters");
    }
}
