//! Recovery of `T f = φ(f)·U f` from a transformation that preserves the
//! modulus of the generalized inner product.
//!
//! The pipeline follows the constructive route: induce the Jordan map `Ψ`,
//! decide whether it is multiplicative or antimultiplicative, then read `U`
//! off `f ↦ Ψ(f⊙g)·Th` (resp. `f ↦ Ψ(g⊙f)·Th`) for a pair with `[g, h] = I`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::module_space::{inner, make_unit_pair, ModVec, ModuleSpace};
use crate::numerics::{abs_elem, lin_dep_pair, seeded_rng, CMatrix, LinDep};
use crate::operator_algebra::{
    build_jordan_map, classify_parity, dyad, ALinOp, JordanMap, Parity, TransformOracle, TOL_WIG,
};

const CHECK_SEED: u64 = 0x4641_4354_4f52_0000;
const CHECK_SAMPLES: usize = 8;

/// The recovered operator: `f ↦ f·W`, or `f ↦ conj(f)·W` when conjugate-linear.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveredOperator {
    #[serde(skip)]
    pub space: ModuleSpace,
    pub conjugate_linear: bool,
    #[serde(rename = "W")]
    pub w: CMatrix,
}

impl RecoveredOperator {
    pub fn apply(&self, f: &ModVec) -> ModVec {
        let base = if self.conjugate_linear { f.mat().conj() } else { f.mat().clone() };
        ModVec::new(self.space, &base * &self.w).expect("recovered operator preserves shape")
    }

    /// `U⁻¹`, which equals `U*` in the linear case.
    pub fn apply_inverse(&self, f: &ModVec) -> ModVec {
        let y = f.mat() * &self.w.adjoint();
        let y = if self.conjugate_linear { y.conj() } else { y };
        ModVec::new(self.space, y).expect("recovered operator preserves shape")
    }

    /// The operator as an `A`-linear map; `None` in the conjugate-linear case.
    pub fn as_linear(&self) -> Option<ALinOp> {
        (!self.conjugate_linear).then(|| ALinOp::new(self.space, self.w.clone()).expect("square right factor"))
    }
}

/// One row of the phase table.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseEntry {
    pub vec: ModVec,
    pub phase: Complex64,
}

/// Diagnostics of a factorization; all relative.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FactorResiduals {
    pub welldef: f64,
    pub hom: f64,
    pub anti: f64,
    pub jordan: f64,
    /// `‖W*W − I‖`.
    pub unitarity: f64,
    /// Deviation of the construction formula from (conjugate-)`A`-linearity.
    pub a_linearity: f64,
    /// `‖[Uf, Uf'] − [f, f']‖`, or against `[f', f]` when conjugate-linear.
    pub preservation: f64,
    pub intertwining: f64,
    /// `max ‖Tf − φ(f)·Uf‖ / ‖f‖` over the phase table.
    pub reconstruction: f64,
}

/// Result of [`factorize`].
#[derive(Clone, Debug, Serialize)]
pub struct WignerFactorization {
    pub parity: Parity,
    #[serde(flatten)]
    pub u: RecoveredOperator,
    pub phases: Vec<PhaseEntry>,
    pub residuals: FactorResiduals,
}

impl WignerFactorization {
    pub fn phase_of(&self, f: &ModVec) -> Option<Complex64> {
        self.phases.iter().find(|p| &p.vec == f).map(|p| p.phase)
    }
}

/// Outcome of checking `|[Tf, Tf']| = |[f, f']|` on sample pairs.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub max_condition_residual: f64,
    pub pair_count: usize,
    pub pass: bool,
    /// Index pairs `(i, j)`, `i ≤ j`, whose residual exceeds the tolerance.
    pub offending_pairs: Vec<(usize, usize)>,
}

impl VerificationReport {
    pub(crate) fn from_residuals(residuals: impl IntoIterator<Item = ((usize, usize), f64)>, tol: f64) -> Self {
        let mut max: f64 = 0.0;
        let mut count = 0;
        let mut offending = Vec::new();
        for (pair, r) in residuals {
            count += 1;
            max = max.max(r);
            if !(r <= tol) {
                offending.push(pair);
            }
        }
        VerificationReport { max_condition_residual: max, pair_count: count, pass: offending.is_empty(), offending_pairs: offending }
    }
}

/// Checks the modulus condition on every unordered pair of samples, the
/// diagonal included. Residuals are relative to `‖f‖·‖f'‖`.
pub fn verify_instance(t: &TransformOracle, samples: &[ModVec], tol: f64) -> Result<VerificationReport> {
    let images: Vec<ModVec> = samples.iter().map(|f| t.eval(f)).collect();
    let mut residuals = Vec::new();
    for i in 0..samples.len() {
        for j in i..samples.len() {
            let lhs = abs_elem(&inner(&images[i], &images[j])?)?;
            let rhs = abs_elem(&inner(&samples[i], &samples[j])?)?;
            let scale = samples[i].norm() * samples[j].norm();
            let r = lhs.dist(&rhs);
            residuals.push(((i, j), if scale > 0.0 { r / scale } else { r }));
        }
    }
    Ok(VerificationReport::from_residuals(residuals, tol))
}

/// Phase `φ(f)` with `Tf = φ(f)·Uf`, normalized to unit modulus. The zero
/// vector gets phase 1.
pub fn recover_phase(t: &TransformOracle, u: &RecoveredOperator, f: &ModVec) -> Result<Complex64> {
    let norm = f.norm();
    if norm == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let tf = t.eval(f);
    let uf = u.apply(f);
    let lambda = match lin_dep_pair(uf.mat(), tf.mat(), TOL_WIG) {
        Some(LinDep::Multiple(l)) => l,
        _ => {
            let lambda = tf.mat().frob_inner(uf.mat()) / uf.mat().norm().powi(2);
            return Err(Error::PhaseInconsistent { residual: tf.dist(&uf.scale(lambda)) / norm });
        }
    };
    let modulus = lambda.norm();
    if (modulus - 1.0).abs() > TOL_WIG {
        return Err(Error::PhaseInconsistent { residual: (modulus - 1.0).abs() });
    }
    let phase = lambda / modulus;
    let residual = tf.dist(&uf.scale(phase)) / norm;
    if residual > TOL_WIG {
        return Err(Error::PhaseInconsistent { residual });
    }
    Ok(phase)
}

/// [`factorize_with_samples`] with the standard basis as the phase table.
pub fn factorize(t: &TransformOracle) -> Result<WignerFactorization> {
    factorize_with_samples(t, &[])
}

/// Runs the full recovery. The phase table covers the standard basis of the
/// module followed by `samples`.
pub fn factorize_with_samples(t: &TransformOracle, samples: &[ModVec]) -> Result<WignerFactorization> {
    let space = t.space();
    let (g, h) = make_unit_pair(space)?;
    let mut psi = build_jordan_map(t)?;
    let parity_report = classify_parity(&psi)?;
    psi.parity = parity_report.parity;
    let conjugate_linear = psi.parity == Parity::Antiautomorphism;
    if conjugate_linear && space.d > 1 {
        return Err(Error::ParityContradiction { d: space.d });
    }

    let th = t.eval(&h);
    let construct = |f: &ModVec| -> Result<ModVec> {
        let op = if conjugate_linear { dyad(&g, f)? } else { dyad(f, &g)? };
        psi.apply(&op).apply(&th)
    };

    let mut w = CMatrix::zeros(space.m, space.m);
    for j in 0..space.m {
        let image = construct(&space.basis_vector(0, j))?;
        for k in 0..space.m {
            w[(j, k)] = image.mat()[(0, k)];
        }
    }
    let u = RecoveredOperator { space, conjugate_linear, w };

    let mut residuals = FactorResiduals {
        welldef: psi.welldef_residual,
        hom: parity_report.hom_residual,
        anti: parity_report.anti_residual,
        jordan: parity_report.jordan_residual,
        unitarity: (&u.w.adjoint() * &u.w).dist(&CMatrix::identity(space.m)),
        ..Default::default()
    };
    if residuals.unitarity > TOL_WIG {
        return Err(Error::NotAUnitary { residual: residuals.unitarity });
    }

    let mut rng = seeded_rng(CHECK_SEED ^ ((space.d as u64) << 32) ^ space.m as u64);
    for _ in 0..CHECK_SAMPLES {
        let f = space.random_vector(&mut rng);
        let f2 = space.random_vector(&mut rng);
        let a = CMatrix::random_gaussian(space.d, space.d, &mut rng);
        let r = ALinOp::random(space, &mut rng);

        let uf = construct(&f)?;
        let uaf = construct(&f.left_mul(&a))?;
        let a_action = if conjugate_linear { a.conj() } else { a.clone() };
        let lin = uaf.dist(&uf.left_mul(&a_action)) / (a.norm() * f.norm());
        let consistency = uf.dist(&u.apply(&f)) / f.norm();
        residuals.a_linearity = residuals.a_linearity.max(lin).max(consistency);

        let (uf, uf2) = (u.apply(&f), u.apply(&f2));
        let expected = if conjugate_linear { inner(&f2, &f)? } else { inner(&f, &f2)? };
        let pres = inner(&uf, &uf2)?.dist(&expected) / (f.norm() * f2.norm());
        residuals.preservation = residuals.preservation.max(pres);

        residuals.intertwining = residuals.intertwining.max(intertwining_residual(&u, &psi, &r, &f)?);
    }
    if residuals.a_linearity > TOL_WIG || residuals.preservation > TOL_WIG {
        return Err(Error::NotAUnitary { residual: residuals.a_linearity.max(residuals.preservation) });
    }

    let mut phases = Vec::new();
    for f in space.standard_basis().iter().chain(samples) {
        let phase = recover_phase(t, &u, f)?;
        let norm = f.norm();
        if norm > 0.0 {
            let r = t.eval(f).dist(&u.apply(f).scale(phase)) / norm;
            residuals.reconstruction = residuals.reconstruction.max(r);
        }
        phases.push(PhaseEntry { vec: f.clone(), phase });
    }

    Ok(WignerFactorization { parity: psi.parity, u, phases, residuals })
}

/// `‖U(Rf) − Ψ(R)·Uf‖ / (‖R‖·‖f‖)`, with `Ψ(R)*` in place of `Ψ(R)` when `U`
/// is conjugate-linear.
pub fn intertwining_residual(u: &RecoveredOperator, psi: &JordanMap, r: &ALinOp, f: &ModVec) -> Result<f64> {
    let lhs = u.apply(&r.apply(f)?);
    let pr = psi.apply(r);
    let op = if u.conjugate_linear { pr.adjoint() } else { pr };
    let rhs = op.apply(&u.apply(f))?;
    Ok(lhs.dist(&rhs) / (r.norm() * f.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: usize, m: usize) -> ModuleSpace {
        ModuleSpace::new(d, m).unwrap()
    }

    fn right_mul_oracle(s: ModuleSpace, w: CMatrix, phase: Complex64) -> TransformOracle {
        TransformOracle::new(s, move |f: &ModVec| ModVec::new(f.space(), (f.mat() * &w).scale(phase)).unwrap())
    }

    #[test]
    fn identity_verifies_exactly() {
        let s = space(2, 3);
        let mut rng = seeded_rng(1);
        let samples: Vec<ModVec> = (0..4).map(|_| s.random_vector(&mut rng)).collect();
        let rep = verify_instance(&TransformOracle::identity(s), &samples, 1e-12).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.pair_count, 10);
        assert_eq!(rep.max_condition_residual, 0.0);
    }

    #[test]
    fn identity_factorizes_to_identity() {
        let s = space(2, 2);
        let fac = factorize(&TransformOracle::identity(s)).unwrap();
        assert_eq!(fac.parity, Parity::Automorphism);
        assert!(!fac.u.conjugate_linear);
        assert!(fac.u.w.dist(&CMatrix::identity(2)) < 1e-12);
        for p in &fac.phases {
            assert!((p.phase - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_of_rotated_image() {
        let s = space(2, 3);
        let w = crate::numerics::random_unitary(3, 4);
        let u = RecoveredOperator { space: s, conjugate_linear: false, w: w.clone() };
        let t = right_mul_oracle(s, w, Complex64::new(0.0, 1.0));
        let mut rng = seeded_rng(3);
        let f = s.random_vector(&mut rng);
        let phase = recover_phase(&t, &u, &f).unwrap();
        assert!((phase - Complex64::new(0.0, 1.0)).norm() < 1e-13);
        assert_eq!(recover_phase(&t, &u, &s.zero()).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn phase_rejects_scaled_image() {
        let s = space(1, 2);
        let u = RecoveredOperator { space: s, conjugate_linear: false, w: CMatrix::identity(2) };
        let t = right_mul_oracle(s, CMatrix::identity(2), Complex64::new(1.01, 0.0));
        let err = recover_phase(&t, &u, &s.basis_vector(0, 0)).unwrap_err();
        assert!(matches!(err, Error::PhaseInconsistent { .. }));
    }

    #[test]
    fn conjugation_factorizes_as_antiunitary() {
        let s = space(1, 4);
        let t = TransformOracle::new(s, |f: &ModVec| ModVec::new(f.space(), f.mat().conj()).unwrap());
        let fac = factorize(&t).unwrap();
        assert_eq!(fac.parity, Parity::Antiautomorphism);
        assert!(fac.u.conjugate_linear);
        assert!(fac.u.w.dist(&CMatrix::identity(4)) < 1e-12);
        assert!(fac.phases.iter().all(|p| (p.phase - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn conjugation_contradicts_for_matrix_coefficients() {
        let s = space(2, 3);
        let t = TransformOracle::new(s, |f: &ModVec| ModVec::new(f.space(), f.mat().conj()).unwrap());
        assert_eq!(factorize(&t).unwrap_err(), Error::ParityContradiction { d: 2 });
    }

    #[test]
    fn low_modular_dimension_is_reported() {
        let s = space(3, 2);
        let err = factorize(&TransformOracle::identity(s)).unwrap_err();
        assert_eq!(err, Error::LowModularDimension { d: 3, m: 2 });
    }

    #[test]
    fn scaled_output_fails_verification() {
        let s = space(2, 2);
        let target = s.basis_vector(0, 1);
        let hit = target.clone();
        let t = TransformOracle::new(s, move |f: &ModVec| if *f == hit { f.scale(Complex64::new(1.01, 0.0)) } else { f.clone() });
        let samples = s.standard_basis();
        let rep = verify_instance(&t, &samples, 1e-9).unwrap();
        assert!(!rep.pass);
        assert!(rep.offending_pairs.contains(&(1, 1)));
        assert!(rep.offending_pairs.iter().all(|&(i, j)| i == 1 || j == 1));
    }
}
