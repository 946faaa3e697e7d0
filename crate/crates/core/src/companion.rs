//! Companion engines: transformations of the algebra `M_d(ℂ)` viewed as a
//! module over itself, and transformations of a real Euclidean space.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorizer::VerificationReport;
use crate::numerics::{abs_elem, herm_eig, lin_dep_pair, random_unitary, seeded_rng, CMatrix, LinDep, RMatrix};
use crate::operator_algebra::{OracleMetadata, TOL_WIG};

const PSI_CHECK_PAIRS: usize = 8;
const RANK_ONE_CHECKS: usize = 8;

/// A black-box map `Φ` of `M_d(ℂ)`.
#[derive(Clone)]
pub struct CstarOracle {
    d: usize,
    eval: Arc<dyn Fn(&CMatrix) -> CMatrix + Send + Sync>,
    pub metadata: Option<OracleMetadata>,
    /// Some `S` with `Φ(S)` a unit multiple of `I`, when the generator knows one.
    pub identity_preimage: Option<CMatrix>,
}

impl fmt::Debug for CstarOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CstarOracle").field("d", &self.d).field("metadata", &self.metadata).finish()
    }
}

impl CstarOracle {
    pub fn new(d: usize, eval: impl Fn(&CMatrix) -> CMatrix + Send + Sync + 'static) -> Self {
        CstarOracle { d, eval: Arc::new(eval), metadata: None, identity_preimage: None }
    }

    pub fn identity(d: usize) -> Self {
        let mut o = Self::new(d, |a| a.clone());
        o.identity_preimage = Some(CMatrix::identity(d));
        o
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eval(&self, a: &CMatrix) -> CMatrix {
        (self.eval)(a)
    }

    /// `I` followed by the matrix units `E_ij` in row-major order.
    pub fn canonical_basis(d: usize) -> Vec<CMatrix> {
        let mut out = vec![CMatrix::identity(d)];
        for i in 0..d {
            for j in 0..d {
                out.push(CMatrix::unit(d, d, i, j));
            }
        }
        out
    }
}

/// Checks `|Φ(A)Φ(B)*| = |AB*|` on every unordered pair of samples.
pub fn cstar_verify(phi: &CstarOracle, samples: &[CMatrix], tol: f64) -> Result<VerificationReport> {
    let images: Vec<CMatrix> = samples.iter().map(|a| phi.eval(a)).collect();
    let mut residuals = Vec::new();
    for i in 0..samples.len() {
        for j in i..samples.len() {
            let lhs = abs_elem(&(&images[i] * &images[j].adjoint()))?;
            let rhs = abs_elem(&(&samples[i] * &samples[j].adjoint()))?;
            let scale = samples[i].norm() * samples[j].norm();
            let r = lhs.dist(&rhs);
            residuals.push(((i, j), if scale > 0.0 { r / scale } else { r }));
        }
    }
    Ok(VerificationReport::from_residuals(residuals, tol))
}

/// Diagnostics of the map `ψ(A*A − B*B) = Φ(A)*Φ(A) − Φ(B)*Φ(B)`.
#[derive(Clone, Debug, Serialize)]
pub struct PsiCheckReport {
    /// Worst disagreement of `ψ` across pairs with equal `A*A − B*B`,
    /// relative to `‖A‖² + ‖B‖²`.
    pub welldef_residual: f64,
    /// `‖ψ(I)² − ψ(I)‖`.
    pub identity_projection: f64,
    /// `‖ψ(I) − I‖`.
    pub identity_deviation: f64,
    /// `‖ψ(S*S) − I‖` at the known preimage `S` of `I`.
    pub preimage_residual: Option<f64>,
    /// Smallest eigenvalue of `n·ψ(I) − I` with `n = ⌈‖S‖²⌉`.
    pub ordering_min_eigenvalue: Option<f64>,
}

fn psi_value(phi: &CstarOracle, a: &CMatrix, b: &CMatrix) -> CMatrix {
    let pa = phi.eval(a);
    let pb = phi.eval(b);
    &(&pa.adjoint() * &pa) - &(&pb.adjoint() * &pb)
}

/// Evaluates `ψ` on pairs `(A, B)` and `(VA, V'B)` with unitary `V, V'`,
/// which have the same `A*A − B*B`. The canonical basis is always among the
/// first arguments.
pub fn cstar_psi_check(phi: &CstarOracle, seed: u64) -> Result<PsiCheckReport> {
    let d = phi.d();
    let mut rng = seeded_rng(seed);
    let mut firsts = CstarOracle::canonical_basis(d);
    firsts.extend((0..PSI_CHECK_PAIRS).map(|_| CMatrix::random_gaussian(d, d, &mut rng)));
    let mut worst: f64 = 0.0;
    for a in &firsts {
        let b = CMatrix::random_gaussian(d, d, &mut rng);
        let v = random_unitary(d, rng.gen());
        let v2 = random_unitary(d, rng.gen());
        let lhs = psi_value(phi, a, &b);
        let rhs = psi_value(phi, &(&v * a), &(&v2 * &b));
        worst = worst.max(lhs.dist(&rhs) / (a.norm().powi(2) + b.norm().powi(2)));
    }

    let u = phi.eval(&CMatrix::identity(d));
    let psi_i = &u.adjoint() * &u;
    let identity = CMatrix::identity(d);
    let (preimage_residual, ordering_min_eigenvalue) = match &phi.identity_preimage {
        Some(s) => {
            let ps = phi.eval(s);
            let residual = (&ps.adjoint() * &ps).dist(&identity);
            let n = s.norm().powi(2).ceil().max(1.0);
            let gap = &psi_i.scale_real(n) - &identity;
            let min = herm_eig(&gap.hermitian_part())?.values.last().copied().unwrap_or(0.0);
            (Some(residual), Some(min))
        }
        None => (None, None),
    };
    Ok(PsiCheckReport {
        welldef_residual: worst,
        identity_projection: (&psi_i * &psi_i).dist(&psi_i),
        identity_deviation: psi_i.dist(&identity),
        preimage_residual,
        ordering_min_eigenvalue,
    })
}

/// One row of the phase table of [`CstarFactorization`].
#[derive(Clone, Debug, Serialize)]
pub struct CstarPhaseEntry {
    #[serde(rename = "A")]
    pub a: CMatrix,
    pub phase: Complex64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CstarResiduals {
    /// `‖U*U − I‖`.
    pub left_unitarity: f64,
    /// `‖UU* − I‖`.
    pub right_unitarity: f64,
    /// `max ‖Φ(A) − ε(A)·A·U‖ / ‖A‖`.
    pub reconstruction: f64,
}

/// `Φ(A) = ε(A)·A·U`.
#[derive(Clone, Debug, Serialize)]
pub struct CstarFactorization {
    #[serde(rename = "U")]
    pub u: CMatrix,
    pub phases: Vec<CstarPhaseEntry>,
    pub residuals: CstarResiduals,
}

/// [`cstar_factorize_with_samples`] over the canonical basis only.
pub fn cstar_factorize(phi: &CstarOracle) -> Result<CstarFactorization> {
    cstar_factorize_with_samples(phi, &[])
}

/// Sets `U = Φ(I)` and reads the phase of every canonical basis element and
/// every sample off the dependence of `A` and `Φ(A)·U*`.
pub fn cstar_factorize_with_samples(phi: &CstarOracle, samples: &[CMatrix]) -> Result<CstarFactorization> {
    let d = phi.d();
    let identity = CMatrix::identity(d);
    let u = phi.eval(&identity);
    let mut residuals = CstarResiduals {
        left_unitarity: (&u.adjoint() * &u).dist(&identity),
        right_unitarity: (&u * &u.adjoint()).dist(&identity),
        ..Default::default()
    };
    let worst = residuals.left_unitarity.max(residuals.right_unitarity);
    if !(worst <= TOL_WIG) {
        return Err(Error::NotUnitary { residual: worst });
    }

    let mut phases = Vec::new();
    for a in CstarOracle::canonical_basis(d).iter().chain(samples) {
        let norm = a.norm();
        if norm == 0.0 {
            phases.push(CstarPhaseEntry { a: a.clone(), phase: Complex64::new(1.0, 0.0) });
            continue;
        }
        let pa = phi.eval(a);
        let lambda = match lin_dep_pair(a, &(&pa * &u.adjoint()), TOL_WIG) {
            Some(LinDep::Multiple(l)) => l,
            _ => {
                let au = a * &u;
                let l = pa.frob_inner(&au) / (norm * norm);
                return Err(Error::PhaseInconsistent { residual: pa.dist(&au.scale(l)) / norm });
            }
        };
        let modulus = lambda.norm();
        if (modulus - 1.0).abs() > TOL_WIG {
            return Err(Error::PhaseInconsistent { residual: (modulus - 1.0).abs() });
        }
        let phase = lambda / modulus;
        let r = pa.dist(&(a * &u).scale(phase)) / norm;
        if r > TOL_WIG {
            return Err(Error::PhaseInconsistent { residual: r });
        }
        residuals.reconstruction = residuals.reconstruction.max(r);
        phases.push(CstarPhaseEntry { a: a.clone(), phase });
    }
    Ok(CstarFactorization { u, phases, residuals })
}

/// A black-box map `T` of `ℝⁿ`.
#[derive(Clone)]
pub struct RealOracle {
    n: usize,
    eval: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub metadata: Option<OracleMetadata>,
}

impl fmt::Debug for RealOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealOracle").field("n", &self.n).field("metadata", &self.metadata).finish()
    }
}

impl RealOracle {
    pub fn new(n: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        RealOracle { n, eval: Arc::new(eval), metadata: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub(crate) fn unit_vector(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Checks `|⟨Tx, Ty⟩| = |⟨x, y⟩|` on every unordered pair of samples.
pub fn real_verify(t: &RealOracle, samples: &[Vec<f64>], tol: f64) -> Result<VerificationReport> {
    let images: Vec<Vec<f64>> = samples.iter().map(|x| t.eval(x)).collect();
    let mut residuals = Vec::new();
    for i in 0..samples.len() {
        for j in i..samples.len() {
            let r = (dot(&images[i], &images[j]).abs() - dot(&samples[i], &samples[j]).abs()).abs();
            let scale = norm(&samples[i]) * norm(&samples[j]);
            residuals.push(((i, j), if scale > 0.0 { r / scale } else { r }));
        }
    }
    Ok(VerificationReport::from_residuals(residuals, tol))
}

#[derive(Clone, Debug, Serialize)]
pub struct SignEntry {
    pub vec: Vec<f64>,
    pub sign: i8,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RealResiduals {
    /// `‖UᵀU − I‖`.
    pub orthogonality: f64,
    /// `max ‖Tx ⊗ Tx − Ux ⊗ Ux‖ / ‖x‖²` on seeded vectors.
    pub rank_one: f64,
    /// `max ‖Tx − sign(x)·Ux‖ / ‖x‖`.
    pub reconstruction: f64,
}

/// `Tx = sign(x)·Ux` with `U` orthogonal.
#[derive(Clone, Debug, Serialize)]
pub struct RealFactorization {
    #[serde(rename = "U")]
    pub u: RMatrix,
    pub signs: Vec<SignEntry>,
    pub residuals: RealResiduals,
}

/// [`real_factorize_with_samples`] over the standard basis only.
pub fn real_factorize(t: &RealOracle) -> Result<RealFactorization> {
    real_factorize_with_samples(t, &[])
}

/// Builds `U` column by column: `u₁ = Te₁` and `u_j = σ_j·Te_j` with the sign
/// `σ_j` fixed by `T(e_k + e_j) = ±(u_k + u_j)`, using `k = 1` first and the
/// other resolved columns when that reference is ambiguous.
pub fn real_factorize_with_samples(t: &RealOracle, samples: &[Vec<f64>]) -> Result<RealFactorization> {
    let n = t.n();
    let mut u = RMatrix::identity(n);
    if n > 1 {
        let mut cols: Vec<Vec<f64>> = vec![t.eval(&unit_vector(n, 0))];
        for j in 1..n {
            let tej = t.eval(&unit_vector(n, j));
            let mut chosen = None;
            for k in 0..j {
                let mut probe = unit_vector(n, k);
                probe[j] = 1.0;
                let target = t.eval(&probe);
                let tol = TOL_WIG * norm(&probe);
                let matches: Vec<f64> = [1.0, -1.0]
                    .into_iter()
                    .filter(|&sigma| {
                        let cand: Vec<f64> = cols[k].iter().zip(&tej).map(|(a, b)| a + sigma * b).collect();
                        let neg: Vec<f64> = cand.iter().map(|x| -x).collect();
                        dist(&target, &cand).min(dist(&target, &neg)) <= tol
                    })
                    .collect();
                match matches.as_slice() {
                    [sigma] => {
                        chosen = Some(*sigma);
                        break;
                    }
                    [] => return Err(Error::SignChainBroken { column: j }),
                    _ => continue,
                }
            }
            let sigma = chosen.ok_or(Error::SignChainBroken { column: j })?;
            cols.push(tej.iter().map(|x| sigma * x).collect());
        }
        for (j, c) in cols.iter().enumerate() {
            u.set_column(j, c);
        }
    }

    let mut residuals =
        RealResiduals { orthogonality: u.transpose().matmul(&u).dist(&RMatrix::identity(n)), ..Default::default() };
    if !(residuals.orthogonality <= TOL_WIG) {
        return Err(Error::NotOrthogonal { residual: residuals.orthogonality });
    }

    let mut signs = Vec::new();
    let basis: Vec<Vec<f64>> = (0..n).map(|i| unit_vector(n, i)).collect();
    for x in basis.iter().chain(samples) {
        let nx = norm(x);
        if nx == 0.0 {
            signs.push(SignEntry { vec: x.clone(), sign: 1 });
            continue;
        }
        let tx = t.eval(x);
        let ux = u.matvec(x);
        let s = if dot(&tx, &ux) >= 0.0 { 1.0 } else { -1.0 };
        let r = dist(&tx, &ux.iter().map(|v| s * v).collect::<Vec<_>>()) / nx;
        if r > TOL_WIG {
            return Err(Error::SignInconsistent { residual: r });
        }
        residuals.reconstruction = residuals.reconstruction.max(r);
        signs.push(SignEntry { vec: x.clone(), sign: s as i8 });
    }

    let mut rng = seeded_rng(0x5245_414c ^ n as u64);
    for _ in 0..RANK_ONE_CHECKS {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let tx = t.eval(&x);
        let ux = u.matvec(&x);
        let outer = |v: &[f64]| RMatrix::from_fn(n, n, |i, j| v[i] * v[j]);
        let r = outer(&tx).dist(&outer(&ux)) / dot(&x, &x);
        residuals.rank_one = residuals.rank_one.max(r);
    }
    Ok(RealFactorization { u, signs, residuals })
}

/// Worst relative disagreement of `ψ(S) = Σ λ_k Tx_k ⊗ Tx_k` between the
/// spectral decomposition of `S` and a random decomposition `S = Σ μ_l y_l ⊗ y_l`.
pub fn real_psi_welldef(t: &RealOracle, seed: u64, trials: usize) -> Result<f64> {
    let n = t.n();
    let mut rng = seeded_rng(seed);
    let outer = |v: &[f64]| RMatrix::from_fn(n, n, |i, j| v[i] * v[j]);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut s = RMatrix::zeros(n, n);
        let mut direct = RMatrix::zeros(n, n);
        for _ in 0..n + 2 {
            let mu: f64 = rng.gen_range(-1.0..1.0);
            let y: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            s = add_real(&s, &outer(&y).scale(mu));
            direct = add_real(&direct, &outer(&t.eval(&y)).scale(mu));
        }
        let eig = herm_eig(&s.to_complex())?;
        let mut spectral = RMatrix::zeros(n, n);
        for (k, &lambda) in eig.values.iter().enumerate() {
            let x: Vec<f64> = eig.vector(k).iter().map(|z| z.re).collect();
            spectral = add_real(&spectral, &outer(&t.eval(&x)).scale(lambda));
        }
        worst = worst.max(spectral.dist(&direct) / s.norm());
    }
    Ok(worst)
}

fn add_real(a: &RMatrix, b: &RMatrix) -> RMatrix {
    RMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}
