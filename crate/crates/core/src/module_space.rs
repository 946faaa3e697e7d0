//! The Hilbert `M_d(ℂ)`-module of `d x m` complex matrices.
//!
//! The algebra acts by left multiplication and the generalized inner product
//! is `[f, g] = f·g*`, a `d x d` matrix. Tracing it gives the ordinary
//! Frobenius inner product, which turns the module into a Hilbert space.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, CMatrix};

/// Relative tolerance of the module-level checks.
pub const TOL_MOD: f64 = 1e-9;

/// Eigenvalues of `[g, g]` below this fraction of the largest one are treated
/// as zero when splitting `g` into minimal pieces.
const SPLIT_RANK_TOL: f64 = 1e-12;

/// Sizes of the coefficient algebra `M_d(ℂ)` and of the module `M_{d x m}(ℂ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModuleSpace {
    pub d: usize,
    pub m: usize,
}

impl ModuleSpace {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidSpec(format!("module sizes must be positive, got d={d}, m={m}")));
        }
        Ok(ModuleSpace { d, m })
    }

    pub fn zero(&self) -> ModVec {
        ModVec { space: *self, mat: CMatrix::zeros(self.d, self.m) }
    }

    /// Matrix unit `E_ij` viewed as a module vector.
    pub fn basis_vector(&self, i: usize, j: usize) -> ModVec {
        ModVec { space: *self, mat: CMatrix::unit(self.d, self.m, i, j) }
    }

    /// All `d·m` matrix units in row-major order.
    pub fn standard_basis(&self) -> Vec<ModVec> {
        (0..self.d).flat_map(|i| (0..self.m).map(move |j| (i, j))).map(|(i, j)| self.basis_vector(i, j)).collect()
    }

    pub fn random_vector(&self, rng: &mut impl Rng) -> ModVec {
        ModVec { space: *self, mat: CMatrix::random_gaussian(self.d, self.m, rng) }
    }

    pub fn vector(&self, mat: CMatrix) -> Result<ModVec> {
        ModVec::new(*self, mat)
    }
}

/// A vector of the module: a `d x m` complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModVecRepr", into = "ModVecRepr")]
pub struct ModVec {
    space: ModuleSpace,
    mat: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct ModVecRepr {
    d: usize,
    m: usize,
    #[serde(flatten)]
    mat: CMatrix,
}

impl From<ModVec> for ModVecRepr {
    fn from(v: ModVec) -> Self {
        ModVecRepr { d: v.space.d, m: v.space.m, mat: v.mat }
    }
}

impl TryFrom<ModVecRepr> for ModVec {
    type Error = Error;

    fn try_from(r: ModVecRepr) -> Result<Self> {
        ModVec::new(ModuleSpace::new(r.d, r.m)?, r.mat)
    }
}

impl ModVec {
    pub fn new(space: ModuleSpace, mat: CMatrix) -> Result<Self> {
        if mat.shape() != (space.d, space.m) {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", space.d, space.m),
                found: format!("{}x{}", mat.rows(), mat.cols()),
            });
        }
        Ok(ModVec { space, mat })
    }

    pub fn space(&self) -> ModuleSpace {
        self.space
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn add(&self, other: &ModVec) -> ModVec {
        debug_assert_eq!(self.space, other.space);
        ModVec { space: self.space, mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &ModVec) -> ModVec {
        debug_assert_eq!(self.space, other.space);
        ModVec { space: self.space, mat: &self.mat - &other.mat }
    }

    pub fn scale(&self, s: Complex64) -> ModVec {
        ModVec { space: self.space, mat: self.mat.scale(s) }
    }

    /// Module action `a·f` of an algebra element.
    pub fn left_mul(&self, a: &CMatrix) -> ModVec {
        assert_eq!(a.shape(), (self.space.d, self.space.d), "left_mul: algebra element has wrong size");
        ModVec { space: self.space, mat: a * &self.mat }
    }

    /// `‖f‖ = sqrt(tr [f, f])`.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn dist(&self, other: &ModVec) -> f64 {
        self.mat.dist(&other.mat)
    }

    pub fn is_zero(&self) -> bool {
        self.mat.data().iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

fn check_space(f: &ModVec, g: &ModVec) -> Result<()> {
    if f.space != g.space {
        return Err(Error::ShapeMismatch {
            expected: format!("vector of M_{}x{}", f.space.d, f.space.m),
            found: format!("vector of M_{}x{}", g.space.d, g.space.m),
        });
    }
    Ok(())
}

/// Generalized inner product `[f, g] = f·g*`.
pub fn inner(f: &ModVec, g: &ModVec) -> Result<CMatrix> {
    check_space(f, g)?;
    Ok(&f.mat * &g.mat.adjoint())
}

/// Hilbert-space inner product `tr [f, g]`.
pub fn tr_inner(f: &ModVec, g: &ModVec) -> Result<Complex64> {
    check_space(f, g)?;
    Ok(f.mat.frob_inner(&g.mat))
}

/// Orthogonal projection of `f` onto the submodule generated by `generators`.
///
/// The submodule is the linear span of all `e_ij·g_k`; it is orthonormalized
/// in the trace inner product and `f` is projected onto it.
pub fn submodule_project(f: &ModVec, generators: &[ModVec]) -> Result<ModVec> {
    for g in generators {
        check_space(f, g)?;
    }
    let space = f.space;
    let basis = submodule_basis(space, generators);
    let mut proj = space.zero().mat;
    for q in &basis {
        let c = f.mat.frob_inner(q);
        proj = &proj + &q.scale(c);
    }
    Ok(ModVec { space, mat: proj })
}

fn submodule_basis(space: ModuleSpace, generators: &[ModVec]) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::new();
    for g in generators {
        for i in 0..space.d {
            for j in 0..space.d {
                let unit = CMatrix::unit(space.d, space.d, i, j);
                let mut v = &unit * &g.mat;
                let start = v.norm();
                if start == 0.0 {
                    continue;
                }
                for _ in 0..2 {
                    for q in &basis {
                        let c = v.frob_inner(q);
                        v = &v - &q.scale(c);
                    }
                }
                let n = v.norm();
                if n > 1e-10 * start {
                    basis.push(v.scale_real(1.0 / n));
                }
            }
        }
    }
    basis
}

/// How one member of a [`ModularFamily`] arose from the input: it is
/// `(1/λ)·e·g` for the orthogonalized input `g`, the minimal projection `e`
/// and the singular value `λ` of `g` on `e`.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub source: usize,
    pub lambda: f64,
    pub projection: CMatrix,
}

/// A modular orthonormal family together with its provenance.
#[derive(Clone, Debug)]
pub struct ModularFamily {
    pub vectors: Vec<ModVec>,
    pub provenance: Vec<Provenance>,
    /// The pairwise orthogonal vectors produced by the first stage, indexed
    /// by `Provenance::source`.
    pub orthogonalized: Vec<ModVec>,
}

/// Modular Gram–Schmidt.
///
/// First stage: subtract from each input its projection onto the submodule
/// spanned by the previous survivors, so the survivors satisfy `[g_i, g_j] = 0`.
/// Second stage: split each survivor along the spectral projections of
/// `[g, g] = Σ λ_k² e_k` into `h_k = (1/λ_k)·e_k·g`.
pub fn modular_gram_schmidt(input: &[ModVec]) -> Result<ModularFamily> {
    if let Some(first) = input.first() {
        for f in input {
            check_space(first, f)?;
        }
    }
    let mut survivors: Vec<ModVec> = Vec::new();
    for f in input {
        let start = f.norm();
        if start == 0.0 {
            continue;
        }
        let mut g = f.clone();
        for _ in 0..2 {
            g = g.sub(&submodule_project(&g, &survivors)?);
        }
        if g.norm() > TOL_MOD * start {
            survivors.push(g);
        }
    }

    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for (source, g) in survivors.iter().enumerate() {
        let gram = inner(g, g)?.hermitian_part();
        let eig = herm_eig(&gram)?;
        let top = eig.values.first().copied().unwrap_or(0.0);
        for (k, &mu) in eig.values.iter().enumerate() {
            if mu <= SPLIT_RANK_TOL * top || mu <= 0.0 {
                continue;
            }
            let lambda = mu.sqrt();
            let v = eig.vector(k);
            let col = CMatrix::from_fn(v.len(), 1, |i, _| v[i]);
            let projection = &col * &col.adjoint();
            let h = g.left_mul(&projection).scale(Complex64::new(1.0 / lambda, 0.0));
            vectors.push(h);
            provenance.push(Provenance { source, lambda, projection });
        }
    }
    Ok(ModularFamily { vectors, provenance, orthogonalized: survivors })
}

/// Diagnostics of [`check_modular_orthonormal`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct OrthonormalityReport {
    pub pass: bool,
    /// Largest `‖[f_α, f_β]‖` over `α ≠ β`.
    pub max_cross: f64,
    /// Largest `‖p² − p‖` over the Gram elements `p = [f, f]`.
    pub max_idempotency: f64,
    pub max_hermiticity: f64,
    /// Largest second eigenvalue of a Gram element (rank-one test).
    pub max_second_eigenvalue: f64,
    /// Largest `|1 − top eigenvalue|`.
    pub max_top_deviation: f64,
    /// Largest `‖[f, f]·f − f‖`.
    pub max_absorption: f64,
}

/// Checks pairwise orthogonality and that every `[f, f]` is a minimal
/// (rank-one) projection.
pub fn check_modular_orthonormal(family: &[ModVec], tol: f64) -> Result<OrthonormalityReport> {
    let mut r = OrthonormalityReport::default();
    for (a, f) in family.iter().enumerate() {
        for g in &family[a + 1..] {
            r.max_cross = r.max_cross.max(inner(f, g)?.norm());
        }
        let p = inner(f, f)?;
        r.max_idempotency = r.max_idempotency.max((&p * &p).dist(&p));
        r.max_hermiticity = r.max_hermiticity.max(p.hermiticity_residual());
        let eig = herm_eig(&p.hermitian_part())?;
        r.max_top_deviation = r.max_top_deviation.max((1.0 - eig.values[0]).abs());
        if eig.values.len() > 1 {
            r.max_second_eigenvalue = r.max_second_eigenvalue.max(eig.values[1].abs());
        }
        r.max_absorption = r.max_absorption.max(f.left_mul(&p).dist(f));
    }
    r.pass = [r.max_cross, r.max_idempotency, r.max_hermiticity, r.max_second_eigenvalue, r.max_top_deviation, r.max_absorption]
        .iter()
        .all(|&x| x <= tol);
    Ok(r)
}

/// Vectors `g = h` with `[g, h] = I_d`: the `d x m` matrix with ones on the
/// leading diagonal. Requires `m ≥ d`, since `[g, h]` has rank at most `m`.
pub fn make_unit_pair(space: ModuleSpace) -> Result<(ModVec, ModVec)> {
    if space.m < space.d {
        return Err(Error::LowModularDimension { d: space.d, m: space.m });
    }
    let one = Complex64::new(1.0, 0.0);
    let g = CMatrix::from_fn(space.d, space.m, |i, j| if i == j { one } else { Complex64::new(0.0, 0.0) });
    let v = ModVec { space, mat: g };
    Ok((v.clone(), v))
}
