//! File-level orchestration behind the command-line tool.

use crate::error::Error;
use crate::format::{
    complex_list, from_complex_list, DeltaFile, FileError, FileStructure, Mat, PairJson, PairsFile, Params, PencilFile,
    ProblemFile, SolutionFile, FORMAT_VERSION,
};
use crate::numerics::{c, CMatrix, C64};
use crate::pencil::{DeflatingPair, Star, StructureTag, StructuredPencil};
use crate::random::{generate, Planted, RandomSpec};
use crate::shh::{shh_gramian, shh_update, star_shh_params, t_shh_update, ShhPencil, TShhParams};
use crate::specializations::{
    hermitian_update_z, phi_params, psd_param_selection, quadratic_update, t_even_real_update, t_odd_real_update,
    CoreParams, QuadClass, QuadraticSpec,
};
use crate::update_structured::{gramian_g, solve_core, solve_core_parametrized, structured_update, t_family, CoreSolution};
use crate::update_unstructured::{general_solution, theorem41_parametrized, theorem41_update, UpdateProblem, UpdateResult};
use crate::verify::{certify_delta, Certificate, CertifyOptions, PsdTarget};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CERTIFICATE_FAILED: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const MATH: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{source}")]
    Math {
        #[from]
        source: Error,
    },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::File(_) => exit::SCHEMA,
            AppError::Math { .. } => exit::MATH,
        }
    }
}

pub type AppResult<T> = std::result::Result<T, AppError>;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveOptions {
    pub unstructured: bool,
    pub quadratic: bool,
    /// Overrides the deflation and structure tolerances.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub result: UpdateResult,
    pub certificate: Certificate,
}

impl Solved {
    pub fn file(&self) -> SolutionFile {
        SolutionFile::new(&self.result, self.certificate.clone())
    }

    pub fn exit_code(&self) -> i32 {
        if self.certificate.pass {
            exit::PASS
        } else {
            exit::CERTIFICATE_FAILED
        }
    }
}

fn base_options(tol: Option<f64>) -> CertifyOptions {
    let mut o = CertifyOptions::default();
    if let Some(t) = tol {
        o.tol_defl = t;
        o.tol_struct = t;
    }
    o
}

fn opt_mat(m: &Option<Mat>, name: &str) -> Result<Option<CMatrix>, FileError> {
    m.as_ref().map(|m| m.to_matrix(name)).transpose()
}

fn missing(what: &str) -> FileError {
    FileError::Schema(format!("missing {what}"))
}

/// Parsed, dimension-checked problem data.
struct Inputs {
    structure: FileStructure,
    m: CMatrix,
    k: CMatrix,
    xc: CMatrix,
    lc: CMatrix,
    xa: Option<CMatrix>,
    la: CMatrix,
    fixed: Option<(CMatrix, CMatrix)>,
}

fn inputs(p: &ProblemFile) -> AppResult<Inputs> {
    let structure = FileStructure::parse(&p.structure)?;
    let m = p.m.to_matrix("M")?;
    let k = p.k.to_matrix("K")?;
    let n = m.nrows();
    if !m.is_square() || k.shape() != m.shape() {
        return Err(FileError::Schema("M and K must be square of equal size".into()).into());
    }
    let xc = p.change.x("change")?.ok_or_else(|| missing("change.X"))?;
    let lc = p.change.lambda("change")?;
    let la = p.targets.lambda("targets")?;
    let xa = p.targets.x("targets")?;
    let fixed = match &p.fixed {
        Some(f) => Some((f.x("fixed")?.ok_or_else(|| missing("fixed.X"))?, f.lambda("fixed")?)),
        None => None,
    };
    let pc = lc.nrows();
    let bad = xc.shape() != (n, pc)
        || la.nrows() != pc
        || xa.as_ref().is_some_and(|x| x.shape() != (n, pc))
        || fixed.as_ref().is_some_and(|(x, l)| x.shape() != (n, l.nrows()));
    if bad {
        return Err(FileError::Schema("pair dimensions do not match the pencil".into()).into());
    }
    Ok(Inputs { structure, m, k, xc, lc, xa, la, fixed })
}

fn fixed_pair(f: &Option<(CMatrix, CMatrix)>) -> AppResult<Option<DeflatingPair>> {
    Ok(f.as_ref().map(|(x, l)| DeflatingPair::new(x.clone(), l.clone())).transpose()?)
}

fn z_pair(params: &Params) -> Result<Option<(CMatrix, CMatrix)>, FileError> {
    match (opt_mat(&params.z1, "Z1")?, opt_mat(&params.z2, "Z2")?) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(FileError::Schema("Z1 and Z2 must be given together".into())),
    }
}

/// Generic structured core from `Mhat`, `(Z1, Z2)` or `t` (default 0).
fn generic_core(g: &CMatrix, lc: &CMatrix, la: &CMatrix, params: &Params) -> AppResult<CoreSolution> {
    if let Some(mh) = opt_mat(&params.mhat, "Mhat")? {
        return Ok(solve_core(g, lc, la, &mh)?);
    }
    if let Some((z1, z2)) = z_pair(params)? {
        return Ok(solve_core_parametrized(g, lc, la, &z1, &z2)?);
    }
    Ok(t_family(g, lc, la, params.t.unwrap_or(0.0))?)
}

fn real_list(v: &Option<Vec<f64>>, name: &str, len: usize) -> Result<Vec<f64>, FileError> {
    match v {
        Some(v) if v.len() == len => Ok(v.clone()),
        Some(v) => Err(FileError::Schema(format!("{name} has {} entries, expected {len}", v.len()))),
        None => Ok(vec![0.0; len]),
    }
}

/// Solves a problem file and certifies the result.
pub fn solve(p: &ProblemFile, opts: SolveOptions) -> AppResult<Solved> {
    let d = inputs(p)?;
    let mut cert = base_options(opts.tol);
    let params = &p.params;
    let quadratic = opts.quadratic || p.quadratic;

    if opts.unstructured || d.structure == FileStructure::Tag(StructureTag::Unstructured) {
        let tag = match d.structure {
            FileStructure::Tag(t) => t,
            _ => StructureTag::Unstructured,
        };
        let l = StructuredPencil::new(d.m.clone(), d.k.clone(), tag)?;
        let problem = UpdateProblem::new(
            DeflatingPair::new(d.xc.clone(), d.lc.clone())?,
            d.xa.clone().unwrap_or_else(|| d.xc.clone()),
            d.la.clone(),
            fixed_pair(&d.fixed)?,
        )?;
        let result = if let Some(mt) = opt_mat(&params.mtilde, "Mtilde")? {
            theorem41_update(&l, &problem, &mt)?
        } else if let Some((z1, z2)) = z_pair(params)? {
            let (mt, _) = theorem41_parametrized(&l, &problem, &z1, &z2)?;
            theorem41_update(&l, &problem, &mt)?
        } else {
            general_solution(&l, &problem, opt_mat(&params.z, "Z")?.as_ref())?
        };
        cert.tag = Some(result.provenance.result_tag.unwrap_or(StructureTag::Unstructured));
        let certificate = certify_delta(&l, &result.delta_m, &result.delta_k, &problem, &cert)?;
        return Ok(Solved { result, certificate });
    }

    match d.structure {
        FileStructure::Tag(tag) if quadratic => solve_quadratic(&d, tag, params, cert),
        FileStructure::Tag(tag) => solve_structured(&d, tag, params, cert),
        FileStructure::StarShh => solve_shh(&d, Star::Conj, params, cert),
        FileStructure::TShh => solve_shh(&d, Star::Trans, params, cert),
    }
}

fn same_vector_problem(xc: &CMatrix, lc: &CMatrix, la: &CMatrix, fixed: Option<DeflatingPair>) -> AppResult<UpdateProblem> {
    Ok(UpdateProblem::same_vectors(DeflatingPair::new(xc.clone(), lc.clone())?, la.clone(), fixed)?)
}

fn solve_structured(d: &Inputs, tag: StructureTag, params: &Params, mut cert: CertifyOptions) -> AppResult<Solved> {
    let l = StructuredPencil::new(d.m.clone(), d.k.clone(), tag)?;
    let (xc, lc, la) = (&d.xc, &d.lc, &d.la);
    let p = lc.nrows();
    let result = if tag == StructureTag::HERMITIAN && (params.strategy.is_some() || params.phi.is_some()) {
        let dp = match (&params.strategy, opt_mat(&params.phi, "Phi")?) {
            (Some(s), _) => {
                cert.psd = vec![PsdTarget::DeltaM, PsdTarget::DeltaK];
                psd_param_selection(lc, la, *s, params.slack.unwrap_or(0.0))?
            }
            (None, Some(phi)) => phi_params(lc, la, &phi)?,
            (None, None) => unreachable!(),
        };
        hermitian_update_z(&l, xc, lc, la, &dp.z1, &dp.z2)?
    } else if (tag == StructureTag::T_ODD || tag == StructureTag::T_EVEN) && (params.alpha.is_some() || params.beta.is_some()) {
        let alpha = real_list(&params.alpha, "alpha", p / 2)?;
        let beta = real_list(&params.beta, "beta", p / 2)?;
        if tag == StructureTag::T_ODD {
            t_odd_real_update(&l, xc, lc, la, &alpha, &beta)?
        } else {
            t_even_real_update(&l, xc, lc, la, &alpha, &beta)?
        }
    } else {
        let (g, _) = gramian_g(&l, xc)?;
        let core = generic_core(&g, lc, la, params)?;
        structured_update(&l, xc, lc, la, &core)?
    };
    cert.tag = result.provenance.result_tag;
    let problem = same_vector_problem(xc, lc, la, fixed_pair(&d.fixed)?)?;
    let certificate = certify_delta(&l, &result.delta_m, &result.delta_k, &problem, &cert)?;
    Ok(Solved { result, certificate })
}

fn diagonal(a: &CMatrix, name: &str) -> Result<Vec<C64>, FileError> {
    let p = a.nrows();
    let off = (0..p).any(|i| (0..p).any(|j| i != j && a[(i, j)] != c(0.0, 0.0)));
    if off {
        return Err(FileError::Schema(format!("{name} must be diagonal for a quadratic problem")));
    }
    Ok(a.diagonal().iter().copied().collect())
}

fn solve_quadratic(d: &Inputs, tag: StructureTag, params: &Params, mut cert: CertifyOptions) -> AppResult<Solved> {
    let class = QuadClass::from_tag(tag)
        .ok_or_else(|| FileError::Schema(format!("no quadratic form for structure {}", tag.name())))?;
    let l = StructuredPencil::new(d.m.clone(), d.k.clone(), tag)?;
    let spec = QuadraticSpec {
        class,
        change: diagonal(&d.lc, "change.Lambda")?,
        xc: d.xc.clone(),
        aimed: diagonal(&d.la, "targets.Lambda")?,
    };
    let p = spec.change.len();
    let core = if let Some(mh) = opt_mat(&params.mhat, "Mhat")? {
        CoreParams::Mhat(mh)
    } else {
        let (z1, z2) = z_pair(params)?.unwrap_or((CMatrix::zeros(p, p), CMatrix::zeros(p, p)));
        CoreParams::Z { z1, z2 }
    };
    let result = quadratic_update(&l, &spec, &core)?;
    let get = |name: &str| result.provenance.param(name).cloned().expect("quadratic provenance");
    let (xc, lc, la) = (get("Xc_normalized"), get("Lambda_c"), get("Lambda_a"));
    // fixed eigenvalues are z values as well
    let fixed = match &d.fixed {
        Some((x, z)) => Some(DeflatingPair::new(x.clone(), z * z)?),
        None => None,
    };
    cert.tag = result.provenance.result_tag;
    let problem = same_vector_problem(&xc, &lc, &la, fixed)?;
    let certificate = certify_delta(&l, &result.delta_m, &result.delta_k, &problem, &cert)?;
    Ok(Solved { result, certificate })
}

fn solve_shh(d: &Inputs, star: Star, params: &Params, mut cert: CertifyOptions) -> AppResult<Solved> {
    let l = ShhPencil::new(d.m.clone(), d.k.clone(), star)?;
    let (xc, lc, la) = (&d.xc, &d.lc, &d.la);
    let result = if star == Star::Trans && (params.alpha.is_some() || params.beta.is_some()) {
        let groups = crate::shh::EigGrouping::infer(lc)?.groups.len();
        let alpha = real_list(&params.alpha, "alpha", groups)?;
        let beta = real_list(&params.beta, "beta", groups)?;
        let tp = if params.u.is_some() || params.v.is_some() {
            let u = real_list(&params.u, "u", groups)?;
            let v = real_list(&params.v, "v", groups)?;
            TShhParams::Z((0..groups).map(|i| (alpha[i], beta[i], u[i], v[i])).collect())
        } else {
            TShhParams::Mhat(alpha.into_iter().zip(beta).collect())
        };
        t_shh_update(&l, xc, lc, la, &tp)?
    } else {
        let (g, _) = shh_gramian(&l, xc)?;
        let core = match (star, z_pair(params)?) {
            (Star::Conj, Some((z1, z2))) if params.mhat.is_none() => star_shh_params(&g, lc, la, &z1, &z2)?,
            _ => generic_core(&g, lc, la, params)?,
        };
        shh_update(&l, xc, lc, la, &core)?
    };
    let structured = result.provenance.structure.as_ref().is_some_and(|s| s.core_structured);
    cert.tag = Some(StructureTag::Unstructured);
    cert.shh = structured.then_some(star);
    let problem = same_vector_problem(xc, lc, la, fixed_pair(&d.fixed)?)?;
    let certificate = certify_delta(&l.as_pencil(), &result.delta_m, &result.delta_k, &problem, &cert)?;
    Ok(Solved { result, certificate })
}

/// Certifies given updates against a pencil and pairs.
pub fn verify(pencil: &PencilFile, delta: &DeltaFile, pairs: &PairsFile, tol: Option<f64>) -> AppResult<Certificate> {
    let structure = FileStructure::parse(&pencil.structure)?;
    let m = pencil.m.to_matrix("M")?;
    let k = pencil.k.to_matrix("K")?;
    let dm = delta.delta_m.to_matrix("DeltaM")?;
    let dk = delta.delta_k.to_matrix("DeltaK")?;
    if !m.is_square() || k.shape() != m.shape() || dm.shape() != m.shape() || dk.shape() != m.shape() {
        return Err(FileError::Schema("pencil and update sizes differ".into()).into());
    }
    let targets = pairs.targets.as_ref().ok_or_else(|| missing("targets"))?;
    let la = targets.lambda("targets")?;
    let xa = match targets.x("targets")? {
        Some(x) => x,
        None => pairs
            .change
            .as_ref()
            .and_then(|ch| ch.x("change").transpose())
            .transpose()?
            .ok_or_else(|| missing("targets.X or change.X"))?,
    };
    let fixed = match &pairs.fixed {
        Some(f) => Some(DeflatingPair::new(f.x("fixed")?.ok_or_else(|| missing("fixed.X"))?, f.lambda("fixed")?)?),
        None => None,
    };
    let change = match &pairs.change {
        Some(ch) => DeflatingPair::new(ch.x("change")?.unwrap_or_else(|| xa.clone()), ch.lambda("change")?)?,
        None => DeflatingPair::new(xa.clone(), la.clone())?,
    };
    let mut opts = base_options(tol);
    let (l, problem) = match structure {
        FileStructure::Tag(tag) => {
            let l = StructuredPencil::new(m, k, tag)?;
            (l, UpdateProblem::new(change, xa, la, fixed)?)
        }
        FileStructure::StarShh | FileStructure::TShh => {
            let star = if structure == FileStructure::StarShh { Star::Conj } else { Star::Trans };
            let s = ShhPencil::new(m, k, star)?;
            opts.shh = Some(star);
            (s.as_pencil(), UpdateProblem::new(change, xa, la, fixed)?)
        }
    };
    let mut cert = certify_delta(&l, &dm, &dk, &problem, &opts)?;
    if let Some(exp) = &pairs.expected {
        if problem.fixed.as_ref().is_none_or(|f| f.p() + problem.p() != l.n()) {
            let expected = crate::verify::finite(&from_complex_list(exp));
            let rep = crate::verify::spectrum_match(&(&l.m + &dm), &(&l.k + &dk), &expected)?;
            if !rep.passes(opts.tol_spectrum) {
                cert.failures.push(format!("spectrum mismatch: max matched distance {:.3e}", rep.max_distance));
                cert.pass = false;
            }
            cert.spectrum_match = Some(rep);
        }
    }
    Ok(cert)
}

/// A random problem and its hidden fixed pair.
pub fn random_files(spec: &RandomSpec) -> AppResult<(ProblemFile, PairsFile)> {
    let pl = generate(spec)?;
    Ok(planted_files(&pl))
}

pub fn planted_files(pl: &Planted) -> (ProblemFile, PairsFile) {
    let problem = ProblemFile {
        format: FORMAT_VERSION,
        structure: pl.class.name().to_string(),
        m: Mat::from_matrix(&pl.m),
        k: Mat::from_matrix(&pl.k),
        change: PairJson::from_pair(&pl.change),
        targets: PairJson {
            x: pl.target_x.as_ref().map(Mat::from_matrix),
            lambda: Mat::from_matrix(&pl.target_lambda),
        },
        fixed: None,
        params: Params { t: Some(pl.t), ..Params::default() },
        quadratic: false,
    };
    let hidden = PairsFile {
        format: FORMAT_VERSION,
        change: None,
        targets: None,
        fixed: Some(PairJson::from_pair(&pl.fixed)),
        expected: Some(complex_list(&pl.expected)),
    };
    (problem, hidden)
}

/// The problem with its hidden fixed pair filled in.
pub fn with_fixed(mut problem: ProblemFile, hidden: &PairsFile) -> ProblemFile {
    problem.fixed = hidden.fixed.clone();
    problem
}
