//! `A`-linear operators, dyads and the Jordan map induced by a transformation.
//!
//! In the matrix model every `A`-linear operator is right multiplication by
//! an `m x m` matrix, its *right factor*. Operator composition reverses the
//! order of right factors: `(S∘R)f = f·rf_R·rf_S`. All identities below are
//! stated and checked at the operator level.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::module_space::{inner, ModVec, ModuleSpace, TOL_MOD};
use crate::numerics::{herm_eig, seeded_rng, CMatrix, RMatrix};

/// Relative tolerance of everything downstream of oracle evaluations.
pub const TOL_WIG: f64 = 1e-7;
/// Number of seeded operator pairs used to classify parity.
pub const N_PARITY: usize = 16;

const WELLDEF_SEED: u64 = 0x5745_4c4c_4445_4600;
const PARITY_SEED: u64 = 0x5041_5249_5459_0000;
const WELLDEF_RANDOM_BATCHES: usize = 4;

/// An `A`-linear operator `f ↦ f·rf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ALinOp {
    space: ModuleSpace,
    rf: CMatrix,
}

impl ALinOp {
    pub fn new(space: ModuleSpace, rf: CMatrix) -> Result<Self> {
        if rf.shape() != (space.m, space.m) {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} right factor", space.m),
                found: format!("{}x{}", rf.rows(), rf.cols()),
            });
        }
        Ok(ALinOp { space, rf })
    }

    pub fn identity(space: ModuleSpace) -> Self {
        ALinOp { space, rf: CMatrix::identity(space.m) }
    }

    pub fn zero(space: ModuleSpace) -> Self {
        ALinOp { space, rf: CMatrix::zeros(space.m, space.m) }
    }

    pub fn random(space: ModuleSpace, rng: &mut impl Rng) -> Self {
        ALinOp { space, rf: CMatrix::random_gaussian(space.m, space.m, rng) }
    }

    pub fn random_self_adjoint(space: ModuleSpace, rng: &mut impl Rng) -> Self {
        ALinOp { space, rf: CMatrix::random_hermitian(space.m, rng) }
    }

    pub fn space(&self) -> ModuleSpace {
        self.space
    }

    pub fn right_factor(&self) -> &CMatrix {
        &self.rf
    }

    pub fn apply(&self, f: &ModVec) -> Result<ModVec> {
        self.check(f.space())?;
        ModVec::new(self.space, f.mat() * &self.rf)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ALinOp) -> Result<ALinOp> {
        self.check(other.space)?;
        Ok(ALinOp { space: self.space, rf: &other.rf * &self.rf })
    }

    pub fn adjoint(&self) -> ALinOp {
        ALinOp { space: self.space, rf: self.rf.adjoint() }
    }

    pub fn add(&self, other: &ALinOp) -> Result<ALinOp> {
        self.check(other.space)?;
        Ok(ALinOp { space: self.space, rf: &self.rf + &other.rf })
    }

    pub fn sub(&self, other: &ALinOp) -> Result<ALinOp> {
        self.check(other.space)?;
        Ok(ALinOp { space: self.space, rf: &self.rf - &other.rf })
    }

    pub fn scale(&self, s: Complex64) -> ALinOp {
        ALinOp { space: self.space, rf: self.rf.scale(s) }
    }

    pub fn norm(&self) -> f64 {
        self.rf.norm()
    }

    pub fn dist(&self, other: &ALinOp) -> f64 {
        self.rf.dist(&other.rf)
    }

    fn check(&self, space: ModuleSpace) -> Result<()> {
        if space != self.space {
            return Err(Error::ShapeMismatch {
                expected: format!("M_{}x{}", self.space.d, self.space.m),
                found: format!("M_{}x{}", space.d, space.m),
            });
        }
        Ok(())
    }
}

/// The dyad `f ⊙ g : h ↦ [h, g]·f`, with right factor `g*·f`.
pub fn dyad(f: &ModVec, g: &ModVec) -> Result<ALinOp> {
    inner(f, g)?;
    Ok(ALinOp { space: f.space(), rf: &g.mat().adjoint() * f.mat() })
}

pub fn op_apply(s: &ALinOp, f: &ModVec) -> Result<ModVec> {
    s.apply(f)
}

pub fn op_compose(s: &ALinOp, r: &ALinOp) -> Result<ALinOp> {
    s.compose(r)
}

pub fn op_adjoint(s: &ALinOp) -> ALinOp {
    s.adjoint()
}

/// `S = Σ λ_k f_k ⊙ f_k` with `{f_k}` modular orthonormal.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub space: ModuleSpace,
    pub terms: Vec<(f64, ModVec)>,
}

impl SpectralData {
    pub fn reconstruct(&self) -> ALinOp {
        let mut rf = CMatrix::zeros(self.space.m, self.space.m);
        for (lambda, f) in &self.terms {
            rf = &rf + &(&f.mat().adjoint() * f.mat()).scale_real(*lambda);
        }
        ALinOp { space: self.space, rf }
    }

    pub fn vectors(&self) -> Vec<ModVec> {
        self.terms.iter().map(|(_, f)| f.clone()).collect()
    }
}

/// Spectral resolution of a self-adjoint operator.
///
/// Writes `rf = Σ λ_k x_k x_k*` and emits `f_k = u·x_k*` with `u` the first
/// standard basis column of `ℂ^d`, so every `[f_k, f_k] = u·u*`.
pub fn spectral_resolution(s: &ALinOp) -> Result<SpectralData> {
    let scale = s.norm();
    let res = s.rf.hermiticity_residual();
    if res > TOL_MOD * scale {
        return Err(Error::NonSelfAdjoint { residual: res / scale });
    }
    let space = s.space;
    let eig = herm_eig(&s.rf.hermitian_part())?;
    let mut terms = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda.abs() <= TOL_MOD * scale {
            continue;
        }
        let x = eig.vector(k);
        let f = CMatrix::from_fn(space.d, space.m, |i, j| if i == 0 { x[j].conj() } else { Complex64::new(0.0, 0.0) });
        terms.push((lambda, ModVec::new(space, f)?));
    }
    Ok(SpectralData { space, terms })
}

/// A witness `(f, g)` with `S∘(f⊙g)∘R ≠ 0`, searched among matrix units.
pub fn primeness_witness(s: &ALinOp, r: &ALinOp) -> Result<Option<(ModVec, ModVec)>> {
    s.check(r.space)?;
    let space = s.space;
    let scale = s.norm() * r.norm();
    if scale == 0.0 {
        return Ok(None);
    }
    for a in 0..space.m {
        for b in 0..space.m {
            let f = space.basis_vector(0, a);
            let g = space.basis_vector(0, b);
            let prod = s.compose(&dyad(&f, &g)?)?.compose(r)?;
            if prod.norm() > TOL_MOD * scale {
                return Ok(Some((f, g)));
            }
        }
    }
    Ok(None)
}

/// A black-box transformation `T` of the module.
#[derive(Clone)]
pub struct TransformOracle {
    space: ModuleSpace,
    eval: Arc<dyn Fn(&ModVec) -> ModVec + Send + Sync>,
    pub metadata: Option<OracleMetadata>,
}

/// Provenance of generator-produced oracles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMetadata {
    pub kind: String,
    pub seed: u64,
}

impl fmt::Debug for TransformOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformOracle").field("space", &self.space).field("metadata", &self.metadata).finish()
    }
}

impl TransformOracle {
    pub fn new(space: ModuleSpace, eval: impl Fn(&ModVec) -> ModVec + Send + Sync + 'static) -> Self {
        TransformOracle { space, eval: Arc::new(eval), metadata: None }
    }

    pub fn with_metadata(mut self, kind: impl Into<String>, seed: u64) -> Self {
        self.metadata = Some(OracleMetadata { kind: kind.into(), seed });
        self
    }

    pub fn identity(space: ModuleSpace) -> Self {
        Self::new(space, |f| f.clone())
    }

    pub fn space(&self) -> ModuleSpace {
        self.space
    }

    pub fn eval(&self, f: &ModVec) -> ModVec {
        (self.eval)(f)
    }
}

/// Orientation of the induced Jordan *-map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "auto")]
    Automorphism,
    #[serde(rename = "anti")]
    Antiautomorphism,
    #[serde(rename = "undetermined")]
    Undetermined,
}

/// The fixed real basis of `m x m` Hermitian matrices: `E_kk`, then
/// `(E_kl + E_lk)/√2`, then `(iE_kl − iE_lk)/√2`, each group in
/// lexicographic order of `k < l`.
pub fn hermitian_basis(m: usize) -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis: Vec<CMatrix> = (0..m).map(|k| CMatrix::unit(m, m, k, k)).collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|k| (k + 1..m).map(move |l| (k, l))).collect();
    for &(k, l) in &pairs {
        let mut b = CMatrix::zeros(m, m);
        b[(k, l)] = Complex64::new(r, 0.0);
        b[(l, k)] = Complex64::new(r, 0.0);
        basis.push(b);
    }
    for &(k, l) in &pairs {
        let mut b = CMatrix::zeros(m, m);
        b[(k, l)] = Complex64::new(0.0, r);
        b[(l, k)] = Complex64::new(0.0, -r);
        basis.push(b);
    }
    basis
}

fn hermitian_coords(x: &CMatrix, basis: &[CMatrix]) -> Vec<f64> {
    basis.iter().map(|b| x.frob_inner(b).re).collect()
}

fn from_hermitian_coords(c: &[f64], basis: &[CMatrix], m: usize) -> CMatrix {
    let mut out = CMatrix::zeros(m, m);
    for (ck, b) in c.iter().zip(basis) {
        out = &out + &b.scale_real(*ck);
    }
    out
}

/// The real-linear map `ψ` on self-adjoint operators induced by `T`, with
/// its complexification `Ψ(S + iR) = ψ(S) + iψ(R)`.
#[derive(Clone, Debug)]
pub struct JordanMap {
    pub space: ModuleSpace,
    /// Action on coordinates in [`hermitian_basis`].
    pub psi_real: RMatrix,
    pub parity: Parity,
    /// Worst relative disagreement between `ψ` and directly evaluated
    /// alternative decompositions.
    pub welldef_residual: f64,
    basis: Vec<CMatrix>,
}

impl JordanMap {
    /// `ψ(H)` on a Hermitian right factor.
    pub fn psi_hermitian(&self, h: &CMatrix) -> CMatrix {
        let c = hermitian_coords(h, &self.basis);
        let out = self.psi_real.matvec(&c);
        from_hermitian_coords(&out, &self.basis, self.space.m)
    }

    /// `Ψ(S)` for an arbitrary `A`-linear operator.
    pub fn apply(&self, s: &ALinOp) -> ALinOp {
        let re = self.psi_hermitian(&s.rf.hermitian_part());
        let im = self.psi_hermitian(&s.rf.skew_hermitian_part());
        ALinOp { space: self.space, rf: &re + &im.scale(Complex64::new(0.0, 1.0)) }
    }
}

/// `Σ μ_l T g_l ⊙ T g_l`.
fn image_of_decomposition(t: &TransformOracle, terms: &[(f64, ModVec)]) -> Result<CMatrix> {
    let m = t.space().m;
    let mut rf = CMatrix::zeros(m, m);
    for (mu, g) in terms {
        let tg = t.eval(g);
        rf = &rf + &dyad(&tg, &tg)?.rf.scale_real(*mu);
    }
    Ok(rf)
}

fn decomposition_operator(space: ModuleSpace, terms: &[(f64, ModVec)]) -> Result<ALinOp> {
    let mut s = ALinOp::zero(space);
    for (mu, g) in terms {
        s = s.add(&dyad(g, g)?.scale(Complex64::new(*mu, 0.0)))?;
    }
    Ok(s)
}

/// Assembles `ψ` from spectral resolutions of the Hermitian basis and
/// measures how well it agrees with alternative decompositions. Does not
/// reject anything; see [`build_jordan_map`].
pub fn assemble_jordan_map(t: &TransformOracle) -> Result<JordanMap> {
    let space = t.space();
    let m = space.m;
    let basis = hermitian_basis(m);
    let dim = basis.len();
    let mut psi_real = RMatrix::zeros(dim, dim);
    for (j, b) in basis.iter().enumerate() {
        let sd = spectral_resolution(&ALinOp::new(space, b.clone())?)?;
        let image = image_of_decomposition(t, &sd.terms)?;
        psi_real.set_column(j, &hermitian_coords(&image, &basis));
    }
    let mut map = JordanMap { space, psi_real, parity: Parity::Undetermined, welldef_residual: 0.0, basis };

    let mut rng = seeded_rng(WELLDEF_SEED ^ ((space.d as u64) << 32) ^ space.m as u64);
    let mut batches: Vec<Vec<(f64, ModVec)>> = Vec::new();
    for _ in 0..WELLDEF_RANDOM_BATCHES {
        batches.push((0..=m).map(|_| (rng.gen_range(0.1..1.0), space.random_vector(&mut rng))).collect());
    }
    for e in space.standard_basis() {
        let mut batch = vec![(rng.gen_range(0.5..1.0), e)];
        batch.extend((0..2).map(|_| (rng.gen_range(0.1..1.0), space.random_vector(&mut rng))));
        batches.push(batch);
    }
    let mut worst: f64 = 0.0;
    for batch in &batches {
        let s = decomposition_operator(space, batch)?;
        let via_psi = map.psi_hermitian(&s.rf);
        let direct = image_of_decomposition(t, batch)?;
        worst = worst.max(via_psi.dist(&direct) / s.norm());
    }
    map.welldef_residual = worst;
    Ok(map)
}

/// Builds `ψ` and rejects transformations for which it is not well defined.
pub fn build_jordan_map(t: &TransformOracle) -> Result<JordanMap> {
    let map = assemble_jordan_map(t)?;
    if !(map.welldef_residual <= TOL_WIG) {
        return Err(Error::IllDefined { residual: map.welldef_residual, tol: TOL_WIG });
    }
    Ok(map)
}

/// Residuals gathered while classifying parity, relative to `‖S‖·‖R‖`.
#[derive(Clone, Debug, Serialize)]
pub struct ParityReport {
    pub parity: Parity,
    pub hom_residual: f64,
    pub anti_residual: f64,
    pub jordan_residual: f64,
}

/// Decides whether `Ψ` is multiplicative or antimultiplicative on
/// [`N_PARITY`] seeded operator pairs. When both hold (commutative case,
/// `m = 1`) the map is reported as an automorphism.
pub fn classify_parity(psi: &JordanMap) -> Result<ParityReport> {
    if !(psi.welldef_residual <= TOL_WIG) {
        return Err(Error::IllDefined { residual: psi.welldef_residual, tol: TOL_WIG });
    }
    let space = psi.space;
    let (mut hom, mut anti, mut jordan): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..N_PARITY {
        let mut rng = seeded_rng(PARITY_SEED + k as u64);
        let s = ALinOp::random(space, &mut rng);
        let r = ALinOp::random(space, &mut rng);
        let scale = s.norm() * r.norm();
        let (ps, pr) = (psi.apply(&s), psi.apply(&r));
        let psr = psi.apply(&s.compose(&r)?);
        let prs = psi.apply(&r.compose(&s)?);
        let ps_pr = ps.compose(&pr)?;
        let pr_ps = pr.compose(&ps)?;
        hom = hom.max(psr.dist(&ps_pr) / scale);
        anti = anti.max(psr.dist(&pr_ps) / scale);
        jordan = jordan.max(psr.add(&prs)?.dist(&ps_pr.add(&pr_ps)?) / scale);
    }
    if jordan > TOL_WIG {
        return Err(Error::JordanViolation { residual: jordan });
    }
    let parity = if hom <= TOL_WIG {
        Parity::Automorphism
    } else if anti <= TOL_WIG {
        Parity::Antiautomorphism
    } else {
        return Err(Error::ParityAmbiguous { hom, anti });
    };
    Ok(ParityReport { parity, hom_residual: hom, anti_residual: anti, jordan_residual: jordan })
}
