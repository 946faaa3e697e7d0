//! Instance generators, corruption models and run reports.
//!
//! A generated instance is pure data: the hidden unitary (or orthogonal)
//! matrix, a seed for the phase function, and an optional corruption. The
//! phase function hashes the canonical bytes of its input together with the
//! seed, so every oracle built from an instance is deterministic.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::companion::{
    cstar_factorize_with_samples, cstar_psi_check, cstar_verify, real_factorize_with_samples, real_verify,
    unit_vector, CstarOracle, RealOracle,
};
use crate::error::{Error, Result};
use crate::factorizer::{factorize_with_samples, verify_instance, VerificationReport};
use crate::module_space::{make_unit_pair, ModVec, ModuleSpace};
use crate::numerics::{random_orthogonal, random_unitary, seeded_rng, CMatrix, RMatrix};
use crate::operator_algebra::TransformOracle;

const SAMPLE_SALT: u64 = 0x5341_4d50_4c45_5300;
const ORTHOGONAL_SALT: u64 = 0x4f52_5448_4f00_0000;

/// Family of transformations an instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    ModuleUnitary,
    ModuleAntiunitary,
    Cstar,
    Real,
}

impl InstanceKind {
    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::ModuleUnitary => "module-unitary",
            InstanceKind::ModuleAntiunitary => "module-antiunitary",
            InstanceKind::Cstar => "cstar",
            InstanceKind::Real => "real",
        }
    }

    /// Parses a CLI kind; the flag is `true` for the `corrupted-*` forms.
    pub fn parse(s: &str) -> Result<(InstanceKind, bool)> {
        let (base, corrupted) = match s.strip_prefix("corrupted-") {
            Some(rest) => (rest, true),
            None => (s, false),
        };
        let kind = match base {
            "module-unitary" | "module" => InstanceKind::ModuleUnitary,
            "module-antiunitary" => InstanceKind::ModuleAntiunitary,
            "cstar" => InstanceKind::Cstar,
            "real" => InstanceKind::Real,
            _ => return Err(Error::InvalidSpec(format!("unknown kind `{s}`"))),
        };
        Ok((kind, corrupted))
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Multiplicative scaling `(1 + epsilon)` of the oracle output at one
/// canonical basis element, selected by `target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    pub epsilon: f64,
    pub target: usize,
}

/// What to generate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub seed: u64,
    pub corruption: Option<Corruption>,
}

impl InstanceSpec {
    pub fn module_unitary(d: usize, m: usize, seed: u64) -> Self {
        InstanceSpec { kind: InstanceKind::ModuleUnitary, d: Some(d), m: Some(m), n: None, seed, corruption: None }
    }

    pub fn module_antiunitary(m: usize, seed: u64) -> Self {
        InstanceSpec { kind: InstanceKind::ModuleAntiunitary, d: Some(1), m: Some(m), n: None, seed, corruption: None }
    }

    pub fn cstar(d: usize, seed: u64) -> Self {
        InstanceSpec { kind: InstanceKind::Cstar, d: Some(d), m: None, n: None, seed, corruption: None }
    }

    pub fn real(n: usize, seed: u64) -> Self {
        InstanceSpec { kind: InstanceKind::Real, d: None, m: None, n: Some(n), seed, corruption: None }
    }

    pub fn corrupted(mut self, epsilon: f64, target: usize) -> Self {
        self.corruption = Some(Corruption { epsilon, target });
        self
    }
}

/// Hidden data of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HiddenOperator {
    Complex(CMatrix),
    Real(RMatrix),
}

/// A generated instance. Its oracle is fully determined by these fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub kind: InstanceKind,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub seed: u64,
    /// `W` for module kinds, `U0` for the others.
    pub operator: HiddenOperator,
    pub corruption: Option<Corruption>,
}

/// An oracle of any kind.
#[derive(Clone, Debug)]
pub enum Oracle {
    Module(TransformOracle),
    Cstar(CstarOracle),
    Real(RealOracle),
}

fn require(v: Option<usize>, name: &str, kind: InstanceKind) -> Result<usize> {
    match v {
        Some(x) if x >= 1 => Ok(x),
        Some(_) => Err(Error::InvalidSpec(format!("{kind} needs {name} >= 1"))),
        None => Err(Error::InvalidSpec(format!("{kind} needs --{name}"))),
    }
}

/// Generates an instance from a spec.
pub fn gen_instance(spec: &InstanceSpec) -> Result<Instance> {
    let kind = spec.kind;
    let (d, m, n, operator) = match kind {
        InstanceKind::ModuleUnitary | InstanceKind::ModuleAntiunitary => {
            let d = require(spec.d, "d", kind)?;
            let m = require(spec.m, "m", kind)?;
            if kind == InstanceKind::ModuleAntiunitary {
                if d != 1 {
                    return Err(Error::InvalidSpec(format!("module-antiunitary requires d = 1, got d = {d}")));
                }
                if m < 2 {
                    return Err(Error::InvalidSpec(
                        "module-antiunitary requires m >= 2; for m = 1 conjugation is a phase times a unitary".into(),
                    ));
                }
            }
            (Some(d), Some(m), None, HiddenOperator::Complex(random_unitary(m, spec.seed)))
        }
        InstanceKind::Cstar => {
            let d = require(spec.d, "d", kind)?;
            (Some(d), None, None, HiddenOperator::Complex(random_unitary(d, spec.seed)))
        }
        InstanceKind::Real => {
            let n = require(spec.n, "n", kind)?;
            (None, None, Some(n), HiddenOperator::Real(random_orthogonal(n, spec.seed ^ ORTHOGONAL_SALT)))
        }
    };
    let instance = Instance { kind, d, m, n, seed: spec.seed, operator, corruption: spec.corruption };
    if let Some(c) = spec.corruption {
        if !c.epsilon.is_finite() || c.epsilon <= 0.0 {
            return Err(Error::InvalidSpec(format!("corruption epsilon must be positive, got {}", c.epsilon)));
        }
        let size = instance.canonical_basis_len();
        if c.target >= size {
            return Err(Error::InvalidSpec(format!("corruption target {} out of range 0..{size}", c.target)));
        }
    }
    Ok(instance)
}

/// Uniform draw in `[0, 1)` from the canonical bytes of `(seed, tag, values)`.
fn hash_unit(seed: u64, tag: &[u8], rows: usize, cols: usize, values: impl Iterator<Item = f64>) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag);
    h.update((rows as u64).to_le_bytes());
    h.update((cols as u64).to_le_bytes());
    for v in values {
        let v = if v == 0.0 { 0.0 } else { v };
        h.update(v.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    (u64::from_le_bytes(head) >> 11) as f64 / (1u64 << 53) as f64
}

fn matrix_angle(seed: u64, tag: &[u8], a: &CMatrix) -> f64 {
    let u = hash_unit(seed, tag, a.rows(), a.cols(), a.data().iter().flat_map(|z| [z.re, z.im]));
    std::f64::consts::TAU * u
}

/// Unit-modulus phase assigned to a module vector.
pub fn module_phase(seed: u64, f: &CMatrix) -> Complex64 {
    Complex64::from_polar(1.0, matrix_angle(seed, b"module", f))
}

/// Phase assigned to an algebra element, normalized so that `I ↦ 1`.
pub fn cstar_phase(seed: u64, a: &CMatrix) -> Complex64 {
    let base = matrix_angle(seed, b"cstar", &CMatrix::identity(a.rows()));
    Complex64::from_polar(1.0, matrix_angle(seed, b"cstar", a) - base)
}

/// `±1` assigned to a real vector.
pub fn real_sign(seed: u64, x: &[f64]) -> f64 {
    if hash_unit(seed, b"real", x.len(), 1, x.iter().copied()) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl Instance {
    pub fn spec(&self) -> InstanceSpec {
        InstanceSpec { kind: self.kind, d: self.d, m: self.m, n: self.n, seed: self.seed, corruption: self.corruption }
    }

    pub fn module_space(&self) -> Option<ModuleSpace> {
        match self.kind {
            InstanceKind::ModuleUnitary | InstanceKind::ModuleAntiunitary => {
                ModuleSpace::new(self.d?, self.m?).ok()
            }
            _ => None,
        }
    }

    /// Size of the basis the corruption target indexes: the standard basis
    /// of the module, `I` plus the matrix units of `M_d`, or the standard
    /// basis of `ℝⁿ`.
    pub fn canonical_basis_len(&self) -> usize {
        match self.kind {
            InstanceKind::ModuleUnitary | InstanceKind::ModuleAntiunitary => {
                self.d.unwrap_or(0) * self.m.unwrap_or(0)
            }
            InstanceKind::Cstar => 1 + self.d.unwrap_or(0).pow(2),
            InstanceKind::Real => self.n.unwrap_or(0),
        }
    }

    pub fn complex_operator(&self) -> Option<&CMatrix> {
        match &self.operator {
            HiddenOperator::Complex(c) => Some(c),
            HiddenOperator::Real(_) => None,
        }
    }

    pub fn real_operator(&self) -> Option<&RMatrix> {
        match &self.operator {
            HiddenOperator::Real(r) => Some(r),
            HiddenOperator::Complex(_) => None,
        }
    }

    /// Builds the oracle this instance describes.
    pub fn oracle(&self) -> Result<Oracle> {
        let seed = self.seed;
        match self.kind {
            InstanceKind::ModuleUnitary | InstanceKind::ModuleAntiunitary => {
                let space = self.module_space().ok_or_else(|| Error::InvalidSpec("missing module sizes".into()))?;
                let w = self.complex_operator().ok_or_else(|| Error::InvalidSpec("missing W".into()))?.clone();
                if w.shape() != (space.m, space.m) {
                    return Err(Error::InvalidSpec("W has the wrong size".into()));
                }
                let anti = self.kind == InstanceKind::ModuleAntiunitary;
                let target = self.corruption.map(|c| (space.standard_basis()[c.target].clone(), 1.0 + c.epsilon));
                let t = TransformOracle::new(space, move |f: &ModVec| {
                    let base = if anti { f.mat().conj() } else { f.mat().clone() };
                    let mut out = (&base * &w).scale(module_phase(seed, f.mat()));
                    if let Some((hit, factor)) = &target {
                        if f == hit {
                            out = out.scale_real(*factor);
                        }
                    }
                    ModVec::new(f.space(), out).expect("shape preserved")
                })
                .with_metadata(self.kind.name(), seed);
                Ok(Oracle::Module(t))
            }
            InstanceKind::Cstar => {
                let d = self.d.ok_or_else(|| Error::InvalidSpec("missing d".into()))?;
                let u0 = self.complex_operator().ok_or_else(|| Error::InvalidSpec("missing U0".into()))?.clone();
                if u0.shape() != (d, d) {
                    return Err(Error::InvalidSpec("U0 has the wrong size".into()));
                }
                let basis = CstarOracle::canonical_basis(d);
                let target = self.corruption.map(|c| (basis[c.target].clone(), 1.0 + c.epsilon));
                let preimage = u0.adjoint();
                let mut phi = CstarOracle::new(d, move |a: &CMatrix| {
                    let mut out = (a * &u0).scale(cstar_phase(seed, a));
                    if let Some((hit, factor)) = &target {
                        if a == hit {
                            out = out.scale_real(*factor);
                        }
                    }
                    out
                });
                phi.metadata = Some(crate::operator_algebra::OracleMetadata { kind: self.kind.name().into(), seed });
                phi.identity_preimage = Some(preimage);
                Ok(Oracle::Cstar(phi))
            }
            InstanceKind::Real => {
                let n = self.n.ok_or_else(|| Error::InvalidSpec("missing n".into()))?;
                let u0 = self.real_operator().ok_or_else(|| Error::InvalidSpec("missing U0".into()))?.clone();
                if (u0.rows(), u0.cols()) != (n, n) {
                    return Err(Error::InvalidSpec("U0 has the wrong size".into()));
                }
                let target = self.corruption.map(|c| (unit_vector(n, c.target), 1.0 + c.epsilon));
                let mut t = RealOracle::new(n, move |x: &[f64]| {
                    let s = real_sign(seed, x);
                    let factor = match &target {
                        Some((hit, factor)) if hit.as_slice() == x => *factor,
                        _ => 1.0,
                    };
                    u0.matvec(x).into_iter().map(|v| s * factor * v).collect()
                });
                t.metadata = Some(crate::operator_algebra::OracleMetadata { kind: self.kind.name().into(), seed });
                Ok(Oracle::Real(t))
            }
        }
    }

    /// The generator's phase at a module vector (corruption ignored).
    pub fn true_module_phase(&self, f: &CMatrix) -> Complex64 {
        module_phase(self.seed, f)
    }

    pub fn true_cstar_phase(&self, a: &CMatrix) -> Complex64 {
        cstar_phase(self.seed, a)
    }

    pub fn true_real_sign(&self, x: &[f64]) -> f64 {
        real_sign(self.seed, x)
    }

    /// Seeded Gaussian module vectors, disjoint from anything used during
    /// construction.
    pub fn fresh_module_samples(&self, count: usize) -> Vec<ModVec> {
        let Some(space) = self.module_space() else { return Vec::new() };
        let mut rng = seeded_rng(self.seed ^ SAMPLE_SALT);
        (0..count).map(|_| space.random_vector(&mut rng)).collect()
    }

    pub fn fresh_cstar_samples(&self, count: usize) -> Vec<CMatrix> {
        let d = self.d.unwrap_or(1);
        let mut rng = seeded_rng(self.seed ^ SAMPLE_SALT);
        (0..count).map(|_| CMatrix::random_gaussian(d, d, &mut rng)).collect()
    }

    pub fn fresh_real_samples(&self, count: usize) -> Vec<Vec<f64>> {
        use rand::Rng;
        let n = self.n.unwrap_or(1);
        let mut rng = seeded_rng(self.seed ^ SAMPLE_SALT);
        (0..count).map(|_| (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect()).collect()
    }

    /// Verifier sample set: canonical basis, the unit pair (module kinds)
    /// and `count` fresh samples.
    pub fn verify(&self, count: usize, tol: f64) -> Result<VerificationReport> {
        match self.oracle()? {
            Oracle::Module(t) => {
                let space = t.space();
                let mut samples = space.standard_basis();
                if let Ok((g, _)) = make_unit_pair(space) {
                    samples.push(g);
                }
                samples.extend(self.fresh_module_samples(count));
                verify_instance(&t, &samples, tol)
            }
            Oracle::Cstar(phi) => {
                let mut samples = CstarOracle::canonical_basis(phi.d());
                samples.extend(self.fresh_cstar_samples(count));
                cstar_verify(&phi, &samples, tol)
            }
            Oracle::Real(t) => {
                let n = t.n();
                let mut samples: Vec<Vec<f64>> = (0..n).map(|i| unit_vector(n, i)).collect();
                samples.extend(self.fresh_real_samples(count));
                real_verify(&t, &samples, tol)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(s)?;
        gen_check(&inst)?;
        Ok(inst)
    }
}

fn gen_check(inst: &Instance) -> Result<()> {
    let regenerated = gen_instance(&inst.spec())?;
    match (&regenerated.operator, &inst.operator) {
        (HiddenOperator::Complex(a), HiddenOperator::Complex(b)) if a.shape() == b.shape() => Ok(()),
        (HiddenOperator::Real(a), HiddenOperator::Real(b)) if (a.rows(), a.cols()) == (b.rows(), b.cols()) => Ok(()),
        _ => Err(Error::InvalidSpec("stored operator does not match the instance sizes".into())),
    }
}

/// One line of a residual table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ResidualRow {
    fn new(name: &str, value: f64, threshold: f64) -> Self {
        ResidualRow { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

/// Thresholds a factorization report is judged against.
pub mod thresholds {
    pub const WELLDEF: f64 = 1e-9;
    pub const MODULE_UNITARITY: f64 = 1e-9;
    pub const CSTAR_UNITARITY: f64 = 1e-10;
    pub const PSI_IDENTITY: f64 = 1e-9;
    pub const ORTHOGONALITY: f64 = 1e-8;
    pub const DEFAULT_TOL: f64 = 1e-8;
}

/// Outcome of running one instance end to end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceSpec,
    pub verification: VerificationSummary,
    /// Summary of the factorization, or the error that stopped it.
    pub factorization: FactorizationOutcome,
    pub residuals: Vec<ResidualRow>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub max_condition_residual: f64,
    pub pair_count: usize,
    pub pass: bool,
    pub offending_pairs: Vec<(usize, usize)>,
}

impl From<VerificationReport> for VerificationSummary {
    fn from(r: VerificationReport) -> Self {
        VerificationSummary {
            max_condition_residual: r.max_condition_residual,
            pair_count: r.pair_count,
            pass: r.pass,
            offending_pairs: r.offending_pairs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FactorizationOutcome {
    Ok { summary: String },
    Error { error: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Runs verifier and factorizer on an instance. Returns the report and, on
/// success, the factorization as JSON.
pub fn run_instance(inst: &Instance, samples: usize, tol: f64) -> Result<(RunReport, Option<serde_json::Value>)> {
    let verification = inst.verify(samples, tol)?;
    let mut rows = vec![ResidualRow::new("verification", verification.max_condition_residual, tol)];
    let (outcome, json) = match inst.oracle()? {
        Oracle::Module(t) => match factorize_with_samples(&t, &inst.fresh_module_samples(samples)) {
            Ok(fac) => {
                let r = &fac.residuals;
                rows.push(ResidualRow::new("welldef", r.welldef, thresholds::WELLDEF));
                rows.push(ResidualRow::new("unitarity", r.unitarity, thresholds::MODULE_UNITARITY));
                rows.push(ResidualRow::new("a_linearity", r.a_linearity, thresholds::MODULE_UNITARITY));
                rows.push(ResidualRow::new("preservation", r.preservation, thresholds::MODULE_UNITARITY));
                rows.push(ResidualRow::new("intertwining", r.intertwining, thresholds::MODULE_UNITARITY));
                rows.push(ResidualRow::new("reconstruction", r.reconstruction, tol));
                let summary = format!(
                    "parity {}, conjugate-linear {}, {} phases",
                    serde_json::to_value(fac.parity)?.as_str().unwrap_or("?"),
                    fac.u.conjugate_linear,
                    fac.phases.len()
                );
                (FactorizationOutcome::Ok { summary }, Some(serde_json::to_value(&fac)?))
            }
            Err(e) => (FactorizationOutcome::Error { error: e.to_string() }, None),
        },
        Oracle::Cstar(phi) => {
            let psi = cstar_psi_check(&phi, inst.seed ^ SAMPLE_SALT)?;
            rows.push(ResidualRow::new("psi_welldef", psi.welldef_residual, thresholds::WELLDEF));
            rows.push(ResidualRow::new("psi_identity", psi.identity_deviation, thresholds::PSI_IDENTITY));
            match cstar_factorize_with_samples(&phi, &inst.fresh_cstar_samples(samples)) {
                Ok(fac) => {
                    let r = &fac.residuals;
                    rows.push(ResidualRow::new("left_unitarity", r.left_unitarity, thresholds::CSTAR_UNITARITY));
                    rows.push(ResidualRow::new("right_unitarity", r.right_unitarity, thresholds::CSTAR_UNITARITY));
                    rows.push(ResidualRow::new("reconstruction", r.reconstruction, tol));
                    let summary = format!("{} phases", fac.phases.len());
                    (FactorizationOutcome::Ok { summary }, Some(serde_json::to_value(&fac)?))
                }
                Err(e) => (FactorizationOutcome::Error { error: e.to_string() }, None),
            }
        }
        Oracle::Real(t) => match real_factorize_with_samples(&t, &inst.fresh_real_samples(samples)) {
            Ok(fac) => {
                let r = &fac.residuals;
                rows.push(ResidualRow::new("orthogonality", r.orthogonality, thresholds::ORTHOGONALITY));
                rows.push(ResidualRow::new("rank_one", r.rank_one, tol));
                rows.push(ResidualRow::new("reconstruction", r.reconstruction, tol));
                let summary = format!("{} signs", fac.signs.len());
                (FactorizationOutcome::Ok { summary }, Some(serde_json::to_value(&fac)?))
            }
            Err(e) => (FactorizationOutcome::Error { error: e.to_string() }, None),
        },
    };
    let factor_ok = matches!(outcome, FactorizationOutcome::Ok { .. });
    let verdict = if verification.pass && factor_ok && rows.iter().all(|r| r.pass) { Verdict::Pass } else { Verdict::Fail };
    let report = RunReport {
        instance: inst.spec(),
        verification: verification.into(),
        factorization: outcome,
        residuals: rows,
        verdict,
        wall_clock_ms: None,
    };
    Ok((report, json))
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Human-readable rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let spec = &self.instance;
        let sizes: Vec<String> = [("d", spec.d), ("m", spec.m), ("n", spec.n)]
            .iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
            .collect();
        out.push_str(&format!("instance   {} {} seed={}", spec.kind, sizes.join(" "), spec.seed));
        if let Some(c) = spec.corruption {
            out.push_str(&format!(" corrupted(epsilon={:e}, target={})", c.epsilon, c.target));
        }
        out.push('\n');
        let v = &self.verification;
        out.push_str(&format!(
            "verify     {} ({} pairs, max residual {:.3e}, {} offending)\n",
            if v.pass { "pass" } else { "FAIL" },
            v.pair_count,
            v.max_condition_residual,
            v.offending_pairs.len()
        ));
        match &self.factorization {
            FactorizationOutcome::Ok { summary } => out.push_str(&format!("factorize  ok: {summary}\n")),
            FactorizationOutcome::Error { error } => out.push_str(&format!("factorize  rejected: {error}\n")),
        }
        for r in &self.residuals {
            out.push_str(&format!(
                "  {:<16} {:>11.3e}  <= {:<8.1e} {}\n",
                r.name,
                r.value,
                r.threshold,
                if r.pass { "ok" } else { "FAIL" }
            ));
        }
        if let Some(ms) = self.wall_clock_ms {
            out.push_str(&format!("time       {ms:.1} ms\n"));
        }
        out.push_str(&format!("verdict    {}\n", if self.verdict == Verdict::Pass { "PASS" } else { "FAIL" }));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parsing() {
        assert_eq!(InstanceKind::parse("cstar").unwrap(), (InstanceKind::Cstar, false));
        assert_eq!(InstanceKind::parse("corrupted-module").unwrap(), (InstanceKind::ModuleUnitary, true));
        assert_eq!(InstanceKind::parse("corrupted-real").unwrap(), (InstanceKind::Real, true));
        assert!(InstanceKind::parse("quaternion").is_err());
    }

    #[test]
    fn antiunitary_needs_scalar_coefficients() {
        let spec = InstanceSpec { d: Some(2), ..InstanceSpec::module_antiunitary(3, 1) };
        assert!(matches!(gen_instance(&spec), Err(Error::InvalidSpec(_))));
        assert!(gen_instance(&InstanceSpec::module_antiunitary(1, 1)).is_err());
        assert!(gen_instance(&InstanceSpec::module_antiunitary(2, 1)).is_ok());
    }

    #[test]
    fn corruption_target_is_range_checked() {
        assert!(gen_instance(&InstanceSpec::real(3, 0).corrupted(1e-2, 3)).is_err());
        assert!(gen_instance(&InstanceSpec::real(3, 0).corrupted(-1e-2, 0)).is_err());
        assert!(gen_instance(&InstanceSpec::cstar(2, 0).corrupted(1e-2, 4)).is_ok());
    }

    #[test]
    fn phases_are_unit_and_deterministic() {
        let f = CMatrix::unit(2, 3, 1, 2);
        let p = module_phase(9, &f);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert_eq!(p, module_phase(9, &f));
        assert_ne!(p, module_phase(10, &f));
        assert_eq!(cstar_phase(4, &CMatrix::identity(3)), Complex64::new(1.0, 0.0));
        assert!([1.0, -1.0].contains(&real_sign(1, &[0.5, 2.0])));
    }

    #[test]
    fn negative_zero_hashes_like_zero() {
        let a = CMatrix::zeros(1, 2);
        let b = a.map(|_| Complex64::new(-0.0, -0.0));
        assert_eq!(module_phase(3, &a), module_phase(3, &b));
    }

    #[test]
    fn generated_module_instance_verifies() {
        let inst = gen_instance(&InstanceSpec::module_unitary(2, 3, 1)).unwrap();
        assert!(inst.verify(8, 1e-9).unwrap().pass);
    }

    #[test]
    fn corrupted_module_instance_fails_verification() {
        let inst = gen_instance(&InstanceSpec::module_unitary(2, 3, 1).corrupted(1e-2, 4)).unwrap();
        let rep = inst.verify(8, 1e-9).unwrap();
        assert!(!rep.pass);
        assert!(rep.offending_pairs.contains(&(4, 4)));
    }

    #[test]
    fn instance_json_is_stable() {
        let spec = InstanceSpec::cstar(2, 5).corrupted(1e-3, 1);
        let a = gen_instance(&spec).unwrap().to_json().unwrap();
        let b = gen_instance(&spec).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let back = Instance::from_json(&a).unwrap();
        assert_eq!(back.to_json().unwrap(), a);
    }

    #[test]
    fn run_report_of_valid_real_instance_passes() {
        let inst = gen_instance(&InstanceSpec::real(3, 2)).unwrap();
        let (report, json) = run_instance(&inst, 8, 1e-8).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{}", report.render());
        assert!(json.unwrap().get("U").is_some());
    }
}
