//! The acceptance battery: ten criteria, each a deterministic sweep over
//! seeded instances. Shared by `wigner selftest` and the acceptance tests.

use serde::{Deserialize, Serialize};

use crate::companion::{cstar_factorize_with_samples, cstar_psi_check, real_factorize_with_samples};
use crate::error::Error;
use crate::factorizer::factorize_with_samples;
use crate::harness::{gen_instance, run_instance, Instance, InstanceSpec, Oracle, Verdict};
use crate::module_space::{
    check_modular_orthonormal, inner, modular_gram_schmidt, submodule_project, ModVec, ModuleSpace, TOL_MOD,
};
use crate::numerics::{abs_elem, gaussian_complex, seeded_rng, CMatrix};
use crate::operator_algebra::{
    assemble_jordan_map, build_jordan_map, classify_parity, dyad, spectral_resolution, ALinOp, Parity,
    TransformOracle,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Seeds per `(d, m)` configuration.
    pub seeds_per_config: usize,
    /// Fresh samples per instance.
    pub samples: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { seed: DEFAULT_SEED, seeds_per_config: 100, samples: 32 }
    }
}

impl SelftestConfig {
    pub fn with_seed(seed: u64) -> Self {
        SelftestConfig { seed, ..Default::default() }
    }
}

/// Worst observed value of one quantity against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub threshold: f64,
    /// `true` when smaller is better; `false` for lower bounds.
    pub upper: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub cases: usize,
    pub checks: Vec<Check>,
    pub failures: usize,
    /// First few failure descriptions.
    pub failure_examples: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

const MAX_EXAMPLES: usize = 5;

struct Tracker {
    checks: Vec<Check>,
    cases: usize,
    failures: usize,
    examples: Vec<String>,
}

impl Tracker {
    fn new() -> Self {
        Tracker { checks: Vec::new(), cases: 0, failures: 0, examples: Vec::new() }
    }

    fn entry(&mut self, name: &str, threshold: f64, upper: bool) -> &mut Check {
        if let Some(i) = self.checks.iter().position(|c| c.name == name) {
            return &mut self.checks[i];
        }
        let worst = if upper { 0.0 } else { f64::INFINITY };
        self.checks.push(Check { name: name.into(), worst, threshold, upper, pass: true });
        self.checks.last_mut().unwrap()
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.examples.len() < MAX_EXAMPLES {
            self.examples.push(msg);
        }
    }

    /// Records `value ≤ threshold`.
    fn at_most(&mut self, name: &str, value: f64, threshold: f64, ctx: &str) {
        let c = self.entry(name, threshold, true);
        let ok = value <= threshold;
        if !(value <= c.worst) {
            c.worst = value;
        }
        c.pass &= ok;
        if !ok {
            self.fail(format!("{ctx}: {name} = {value:.3e} > {threshold:.1e}"));
        }
    }

    /// Records `value ≥ threshold`.
    fn at_least(&mut self, name: &str, value: f64, threshold: f64, ctx: &str) {
        let c = self.entry(name, threshold, false);
        let ok = value >= threshold;
        if !(value >= c.worst) {
            c.worst = value;
        }
        c.pass &= ok;
        if !ok {
            self.fail(format!("{ctx}: {name} = {value:.3e} < {threshold:.1e}"));
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what());
        }
    }

    fn finish(self, id: u8, name: &str) -> CriterionResult {
        let pass = self.failures == 0 && self.checks.iter().all(|c| c.pass);
        CriterionResult {
            id,
            name: name.into(),
            cases: self.cases,
            checks: self.checks,
            failures: self.failures,
            failure_examples: self.examples,
            pass,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn case_seed(base: u64, criterion: u64, a: usize, b: usize, s: usize) -> u64 {
    splitmix(base ^ splitmix((criterion << 48) ^ ((a as u64) << 40) ^ ((b as u64) << 32) ^ s as u64))
}

fn module_configs() -> Vec<(usize, usize)> {
    (1..=3).flat_map(|d| (d..=d + 2).map(move |m| (d, m))).collect()
}

fn small_configs() -> Vec<(usize, usize)> {
    (1..=3).flat_map(|d| (1..=5).map(move |m| (d, m))).collect()
}

fn module_oracle(inst: &Instance) -> TransformOracle {
    match inst.oracle() {
        Ok(Oracle::Module(t)) => t,
        _ => unreachable!("module instance"),
    }
}

fn gen(spec: InstanceSpec) -> Instance {
    gen_instance(&spec).expect("selftest specs are valid")
}

/// Relative distance between `[Uf, Uf']` and `expected`.
fn preservation_gap(uf: &ModVec, ug: &ModVec, expected: &CMatrix, scale: f64) -> f64 {
    inner(uf, ug).map(|ip| ip.dist(expected) / scale).unwrap_or(f64::INFINITY)
}

/// Valid unitary instances factor, `U` is `A`-unitary and agrees
/// with the generator up to a global phase.
pub fn criterion_1(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for (d, m) in module_configs() {
        for s in 0..cfg.seeds_per_config {
            let seed = case_seed(cfg.seed, 1, d, m, s);
            let ctx = format!("d={d} m={m} seed={seed}");
            let inst = gen(InstanceSpec::module_unitary(d, m, seed));
            let oracle = module_oracle(&inst);
            let samples = inst.fresh_module_samples(cfg.samples);
            t.cases += 1;
            let fac = match factorize_with_samples(&oracle, &samples) {
                Ok(f) => f,
                Err(e) => {
                    t.fail(format!("{ctx}: factorization failed: {e}"));
                    continue;
                }
            };
            t.require(fac.parity == Parity::Automorphism && !fac.u.conjugate_linear, || {
                format!("{ctx}: expected an automorphism")
            });
            t.at_most("a_linearity", fac.residuals.a_linearity, 1e-9, &ctx);
            t.at_most("preservation", fac.residuals.preservation, 1e-9, &ctx);

            let w_true = inst.complex_operator().unwrap();
            let overlap = fac.u.w.frob_inner(w_true);
            let gauge = overlap / overlap.norm();
            t.at_most("gauge_distance", fac.u.w.dist(&w_true.scale(gauge)) / w_true.norm(), 1e-8, &ctx);

            let mut rng = seeded_rng(seed ^ 0xa11);
            for f in &samples {
                let tf = oracle.eval(f);
                let uf = fac.u.apply(f);
                let Some(phase) = fac.phase_of(f) else {
                    t.fail(format!("{ctx}: sample missing from phase table"));
                    continue;
                };
                t.at_most("reconstruction", tf.dist(&uf.scale(phase)) / f.norm(), 1e-8, &ctx);
                t.at_most("phase_vs_generator", (phase * gauge - inst.true_module_phase(f.mat())).norm(), 1e-8, &ctx);
                let a = CMatrix::random_gaussian(d, d, &mut rng);
                let lin = fac.u.apply(&f.left_mul(&a)).dist(&uf.left_mul(&a)) / (a.norm() * f.norm());
                t.at_most("u_of_af", lin, 1e-9, &ctx);
            }
            for pair in samples.windows(2) {
                let (f, g) = (&pair[0], &pair[1]);
                let expected = inner(f, g).unwrap();
                let gap = preservation_gap(&fac.u.apply(f), &fac.u.apply(g), &expected, f.norm() * g.norm());
                t.at_most("inner_product_preserved", gap, 1e-9, &ctx);
            }
        }
    }
    t.finish(1, "unitary factorization")
}

/// Parity dichotomy: automorphism whenever `d ≥ 2`; antiautomorphism for the
/// conjugation family at `d = 1`; conjugation at `d ≥ 2` is rejected.
pub fn criterion_2(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for (d, m) in module_configs().into_iter().filter(|&(d, _)| d >= 2) {
        for s in 0..cfg.seeds_per_config {
            let seed = case_seed(cfg.seed, 2, d, m, s);
            let ctx = format!("unitary d={d} m={m} seed={seed}");
            let oracle = module_oracle(&gen(InstanceSpec::module_unitary(d, m, seed)));
            t.cases += 1;
            match build_jordan_map(&oracle).and_then(|psi| classify_parity(&psi)) {
                Ok(rep) => {
                    t.require(rep.parity == Parity::Automorphism, || format!("{ctx}: parity {:?}", rep.parity));
                    t.at_most("hom_residual", rep.hom_residual, 1e-9, &ctx);
                }
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
        }
    }
    for m in 2..=4 {
        for s in 0..cfg.seeds_per_config {
            let seed = case_seed(cfg.seed, 2, 1, m, 1000 + s);
            let ctx = format!("antiunitary m={m} seed={seed}");
            let inst = gen(InstanceSpec::module_antiunitary(m, seed));
            let oracle = module_oracle(&inst);
            let samples = inst.fresh_module_samples(cfg.samples.min(8));
            t.cases += 1;
            let fac = match factorize_with_samples(&oracle, &samples) {
                Ok(f) => f,
                Err(e) => {
                    t.fail(format!("{ctx}: {e}"));
                    continue;
                }
            };
            t.require(fac.parity == Parity::Antiautomorphism && fac.u.conjugate_linear, || {
                format!("{ctx}: expected a conjugate-linear factor, got {:?}", fac.parity)
            });
            t.at_most("anti_residual", fac.residuals.anti, 1e-9, &ctx);
            t.at_most("anti_reconstruction", fac.residuals.reconstruction, 1e-8, &ctx);
            for pair in samples.windows(2) {
                let (f, g) = (&pair[0], &pair[1]);
                let expected = inner(g, f).unwrap();
                let gap = preservation_gap(&fac.u.apply(f), &fac.u.apply(g), &expected, f.norm() * g.norm());
                t.at_most("conjugate_preservation", gap, 1e-9, &ctx);
            }
        }
    }
    for (d, m) in [(2, 2), (2, 3), (3, 3)] {
        let space = ModuleSpace::new(d, m).unwrap();
        let w = crate::numerics::random_unitary(m, case_seed(cfg.seed, 2, d, m, 9999));
        let oracle = TransformOracle::new(space, move |f| ModVec::new(f.space(), &f.mat().conj() * &w).unwrap());
        t.cases += 1;
        match factorize_with_samples(&oracle, &[]) {
            Err(Error::ParityContradiction { .. }) | Err(Error::IllDefined { .. }) => {}
            other => t.fail(format!("conjugation d={d} m={m}: expected rejection, got {:?}", other.map(|f| f.parity))),
        }
    }
    t.finish(2, "parity dichotomy")
}

/// The modulus separates `E₁₂` from its adjoint for `d ≥ 2` and is
/// conjugation invariant for `d = 1`.
pub fn criterion_3(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for d in 2..=8 {
        let ctx = format!("d={d}");
        let e12 = CMatrix::unit(d, d, 0, 1);
        let (a, b) = (abs_elem(&e12), abs_elem(&e12.adjoint()));
        t.cases += 1;
        match (a, b) {
            (Ok(a), Ok(b)) => {
                t.at_most("abs_e12_exact", a.dist(&CMatrix::unit(d, d, 1, 1)), 0.0, &ctx);
                t.at_most("abs_e21_exact", b.dist(&CMatrix::unit(d, d, 0, 0)), 0.0, &ctx);
                t.at_least("separation", a.dist(&b), std::f64::consts::SQRT_2, &ctx);
            }
            _ => t.fail(format!("{ctx}: modulus failed")),
        }
    }
    let mut rng = seeded_rng(case_seed(cfg.seed, 3, 1, 1, 0));
    for _ in 0..10 * cfg.seeds_per_config {
        let a = CMatrix::from_fn(1, 1, |_, _| gaussian_complex(&mut rng));
        t.cases += 1;
        let (x, y) = (abs_elem(&a).unwrap(), abs_elem(&a.conj()).unwrap());
        t.at_most("scalar_conjugation_gap", x.dist(&y), 0.0, &format!("a={}", a[(0, 0)]));
    }
    t.finish(3, "modulus witness")
}

/// Modular Gram–Schmidt and spectral resolution.
pub fn criterion_4(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for (d, m) in small_configs() {
        let space = ModuleSpace::new(d, m).unwrap();
        for s in 0..cfg.seeds_per_config {
            let seed = case_seed(cfg.seed, 4, d, m, s);
            let ctx = format!("d={d} m={m} seed={seed}");
            let mut rng = seeded_rng(seed);
            let input: Vec<ModVec> = (0..1 + s % 3).map(|_| space.random_vector(&mut rng)).collect();
            t.cases += 1;
            match modular_gram_schmidt(&input) {
                Ok(fam) => {
                    match check_modular_orthonormal(&fam.vectors, TOL_MOD) {
                        Ok(rep) => {
                            t.require(rep.pass, || format!("{ctx}: family not modular orthonormal"));
                            t.at_most("gs_cross", rep.max_cross, TOL_MOD, &ctx);
                            t.at_most("gs_idempotency", rep.max_idempotency, TOL_MOD, &ctx);
                        }
                        Err(e) => t.fail(format!("{ctx}: {e}")),
                    }
                    for f in &input {
                        let p = submodule_project(f, &fam.vectors).unwrap();
                        t.at_most("span_input_in_output", f.dist(&p) / f.norm(), TOL_MOD, &ctx);
                    }
                    for h in &fam.vectors {
                        let p = submodule_project(h, &input).unwrap();
                        t.at_most("span_output_in_input", h.dist(&p) / h.norm(), TOL_MOD, &ctx);
                    }
                }
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }

            let op = ALinOp::random_self_adjoint(space, &mut rng);
            t.cases += 1;
            match spectral_resolution(&op) {
                Ok(sd) => {
                    t.at_most("spectral_reconstruction", sd.reconstruct().dist(&op) / op.norm(), 1e-10, &ctx);
                    match check_modular_orthonormal(&sd.vectors(), TOL_MOD) {
                        Ok(rep) => t.require(rep.pass, || format!("{ctx}: spectral family not orthonormal")),
                        Err(e) => t.fail(format!("{ctx}: {e}")),
                    }
                }
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
        }
    }
    t.finish(4, "gram-schmidt and spectral resolution")
}

/// Dyad calculus identities on random tuples.
pub fn criterion_5(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for (d, m) in small_configs() {
        let space = ModuleSpace::new(d, m).unwrap();
        let mut rng = seeded_rng(case_seed(cfg.seed, 5, d, m, 0));
        let ctx = format!("d={d} m={m}");
        for _ in 0..10 * cfg.seeds_per_config {
            t.cases += 1;
            let (f, g, f2, g2) = (
                space.random_vector(&mut rng),
                space.random_vector(&mut rng),
                space.random_vector(&mut rng),
                space.random_vector(&mut rng),
            );
            let s = ALinOp::random(space, &mut rng);
            let fg = dyad(&f, &g).unwrap();
            let scale = s.norm() * f.norm() * g.norm();
            let left = s.compose(&fg).unwrap().dist(&dyad(&s.apply(&f).unwrap(), &g).unwrap()) / scale;
            let right = fg.compose(&s).unwrap().dist(&dyad(&f, &s.adjoint().apply(&g).unwrap()).unwrap()) / scale;
            t.at_most("compose_left", left, 1e-12, &ctx);
            t.at_most("compose_right", right, 1e-12, &ctx);

            let product = fg.compose(&dyad(&f2, &g2).unwrap()).unwrap();
            let scale2 = f.norm() * g.norm() * f2.norm() * g2.norm();
            let via_left = dyad(&f.left_mul(&inner(&f2, &g).unwrap()), &g2).unwrap();
            let via_right = dyad(&f, &g2.left_mul(&inner(&g, &f2).unwrap())).unwrap();
            t.at_most("product_left_form", product.dist(&via_left) / scale2, 1e-12, &ctx);
            t.at_most("product_right_form", product.dist(&via_right) / scale2, 1e-12, &ctx);
        }
    }
    t.finish(5, "dyad calculus")
}

/// Well-definedness of the induced map on valid instances, and its failure
/// under corruption.
pub fn criterion_6(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    let per_config = (cfg.seeds_per_config / 5).max(1);
    for (d, m) in module_configs() {
        for s in 0..per_config {
            let seed = case_seed(cfg.seed, 6, d, m, s);
            let valid = gen(InstanceSpec::module_unitary(d, m, seed));
            let ctx = format!("valid d={d} m={m} seed={seed}");
            t.cases += 1;
            match assemble_jordan_map(&module_oracle(&valid)) {
                Ok(psi) => t.at_most("valid_welldef", psi.welldef_residual, 1e-9, &ctx),
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }

            let target = s % (d * m);
            let bad = gen(InstanceSpec::module_unitary(d, m, seed).corrupted(1e-2, target));
            let ctx = format!("corrupted d={d} m={m} seed={seed} target={target}");
            let oracle = module_oracle(&bad);
            t.cases += 1;
            match assemble_jordan_map(&oracle) {
                Ok(psi) => t.at_least("corrupted_welldef", psi.welldef_residual, 1e-4, &ctx),
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
            t.require(matches!(build_jordan_map(&oracle), Err(Error::IllDefined { .. })), || {
                format!("{ctx}: corruption not reported as ill-defined")
            });
        }
    }
    for m in 2..=4 {
        for s in 0..per_config {
            let seed = case_seed(cfg.seed, 6, 1, m, 1000 + s);
            let ctx = format!("antiunitary m={m} seed={seed}");
            t.cases += 1;
            match assemble_jordan_map(&module_oracle(&gen(InstanceSpec::module_antiunitary(m, seed)))) {
                Ok(psi) => t.at_most("valid_welldef", psi.welldef_residual, 1e-9, &ctx),
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
        }
    }
    t.finish(6, "well-definedness of the induced map")
}

/// Factorization of maps of `M_d(ℂ)`.
pub fn criterion_7(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for d in 1..=4 {
        for s in 0..cfg.seeds_per_config {
            let seed = case_seed(cfg.seed, 7, d, 0, s);
            let ctx = format!("d={d} seed={seed}");
            let inst = gen(InstanceSpec::cstar(d, seed));
            let Ok(Oracle::Cstar(phi)) = inst.oracle() else { unreachable!() };
            let samples = inst.fresh_cstar_samples(16);
            t.cases += 1;
            let fac = match cstar_factorize_with_samples(&phi, &samples) {
                Ok(f) => f,
                Err(e) => {
                    t.fail(format!("{ctx}: {e}"));
                    continue;
                }
            };
            let u0 = inst.complex_operator().unwrap();
            t.at_most("u_equals_generator", fac.u.dist(u0), 0.0, &ctx);
            t.at_most("unitarity", fac.residuals.left_unitarity.max(fac.residuals.right_unitarity), 1e-10, &ctx);
            t.at_most("reconstruction", fac.residuals.reconstruction, 1e-8, &ctx);
            for entry in &fac.phases {
                t.at_most("phase_vs_generator", (entry.phase - inst.true_cstar_phase(&entry.a)).norm(), 1e-8, &ctx);
            }
            match cstar_psi_check(&phi, seed) {
                Ok(rep) => {
                    t.at_most("psi_identity", rep.identity_deviation, 1e-9, &ctx);
                    t.at_most("psi_welldef", rep.welldef_residual, 1e-9, &ctx);
                }
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
        }
    }
    t.finish(7, "algebra factorization")
}

/// Factorization of real maps preserving `|⟨x, y⟩|`.
pub fn criterion_8(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for n in 1..=8 {
        for s in 0..cfg.seeds_per_config {
            let seed = case_seed(cfg.seed, 8, n, 0, s);
            let ctx = format!("n={n} seed={seed}");
            let inst = gen(InstanceSpec::real(n, seed));
            let Ok(Oracle::Real(oracle)) = inst.oracle() else { unreachable!() };
            let samples = inst.fresh_real_samples(16);
            t.cases += 1;
            let fac = match real_factorize_with_samples(&oracle, &samples) {
                Ok(f) => f,
                Err(e) => {
                    t.fail(format!("{ctx}: {e}"));
                    continue;
                }
            };
            let u0 = inst.real_operator().unwrap();
            let overlap: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| u0[(i, j)] * fac.u[(i, j)]).sum();
            let g = if overlap >= 0.0 { 1.0 } else { -1.0 };
            t.at_most("u_vs_generator", fac.u.dist(&u0.scale(g)), 1e-8, &ctx);
            for e in &fac.signs {
                t.require(e.sign == 1 || e.sign == -1, || format!("{ctx}: sign {}", e.sign));
                t.require(f64::from(e.sign) * g == inst.true_real_sign(&e.vec), || {
                    format!("{ctx}: sign disagrees with generator")
                });
            }
            match inst.verify(16, 1e-10) {
                Ok(rep) => t.at_most("verifier_residual", rep.max_condition_residual, 1e-10, &ctx),
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
        }
    }
    t.finish(8, "real factorization")
}

const EPSILONS: [f64; 3] = [1e-3, 1e-2, 1e-1];

fn rejection_specs(cfg: &SelftestConfig) -> Vec<InstanceSpec> {
    let per = (cfg.seeds_per_config / 20).max(1);
    let mut specs = Vec::new();
    for s in 0..per {
        for (d, m) in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 4)] {
            specs.push(InstanceSpec::module_unitary(d, m, case_seed(cfg.seed, 9, d, m, s)));
        }
        for m in [2, 3] {
            specs.push(InstanceSpec::module_antiunitary(m, case_seed(cfg.seed, 9, 1, m, 100 + s)));
        }
        for d in 1..=3 {
            specs.push(InstanceSpec::cstar(d, case_seed(cfg.seed, 9, d, 0, 200 + s)));
        }
        for n in [1, 2, 4] {
            specs.push(InstanceSpec::real(n, case_seed(cfg.seed, 9, n, 0, 300 + s)));
        }
    }
    specs
}

/// Corrupted instances are rejected by both verifier and factorizer.
pub fn criterion_9(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    for spec in rejection_specs(cfg) {
        let size = gen(spec.clone()).canonical_basis_len();
        for (k, &eps) in EPSILONS.iter().enumerate() {
            let target = (spec.seed as usize + k) % size;
            let inst = gen(spec.clone().corrupted(eps, target));
            let ctx = format!("{} seed={} eps={eps:e} target={target}", spec.kind, spec.seed);
            t.cases += 1;
            match run_instance(&inst, 8, 1e-8) {
                Ok((report, _)) => {
                    t.require(!report.verification.pass, || format!("{ctx}: verifier accepted"));
                    t.require(report.verdict == Verdict::Fail, || format!("{ctx}: run report passed"));
                }
                Err(e) => t.fail(format!("{ctx}: {e}")),
            }
        }
    }
    t.finish(9, "rejection of corrupted instances")
}

/// Generating and running an instance twice gives identical bytes.
pub fn criterion_10(cfg: &SelftestConfig) -> CriterionResult {
    let mut t = Tracker::new();
    let specs = [
        InstanceSpec::module_unitary(2, 3, cfg.seed),
        InstanceSpec::module_antiunitary(3, cfg.seed),
        InstanceSpec::cstar(3, cfg.seed),
        InstanceSpec::real(4, cfg.seed),
        InstanceSpec::module_unitary(2, 2, cfg.seed).corrupted(1e-2, 1),
    ];
    for spec in specs {
        let ctx = format!("{} seed={}", spec.kind, spec.seed);
        t.cases += 1;
        let render = || -> crate::Result<(String, String, String)> {
            let inst = gen_instance(&spec)?;
            let (report, fac) = run_instance(&inst, 8, 1e-8)?;
            Ok((inst.to_json()?, report.to_json()?, serde_json::to_string(&fac)?))
        };
        match (render(), render()) {
            (Ok(a), Ok(b)) => {
                t.require(a.0 == b.0, || format!("{ctx}: instance bytes differ"));
                t.require(a.1 == b.1, || format!("{ctx}: report bytes differ"));
                t.require(a.2 == b.2, || format!("{ctx}: factorization bytes differ"));
            }
            (Err(e), _) | (_, Err(e)) => t.fail(format!("{ctx}: {e}")),
        }
    }
    t.finish(10, "determinism")
}

pub type CriterionFn = fn(&SelftestConfig) -> CriterionResult;

pub const CRITERIA: [CriterionFn; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    let criteria: Vec<CriterionResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = CRITERIA.iter().map(|c| scope.spawn(move || c(cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    let pass = criteria.iter().all(|c| c.pass);
    SelftestReport { seed: cfg.seed, criteria, pass }
}

impl CriterionResult {
    /// One summary line.
    pub fn line(&self) -> String {
        let worst = self
            .checks
            .iter()
            .map(|c| format!("{}{}{:.2e}", c.name, if c.upper { "<=" } else { ">=" }, c.worst))
            .collect::<Vec<_>>()
            .join(", ");
        let sep = if worst.is_empty() { "" } else { "; " };
        format!(
            "criterion {:>2} {:<40} {} ({} cases{sep}{worst})",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.cases,
        )
    }
}

impl SelftestReport {
    pub fn render(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        for c in &self.criteria {
            out.push_str(&c.line());
            out.push('\n');
            for ex in &c.failure_examples {
                out.push_str(&format!("    {ex}\n"));
            }
        }
        out.push_str(if self.pass { "overall PASS\n" } else { "overall FAIL\n" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SelftestConfig {
        SelftestConfig { seed: 7, seeds_per_config: 2, samples: 4 }
    }

    #[test]
    fn tracker_bounds() {
        let mut t = Tracker::new();
        t.at_most("x", 1e-3, 1e-2, "a");
        t.at_least("y", 5.0, 1.0, "b");
        let r = t.finish(0, "t");
        assert!(r.pass);
        let mut t = Tracker::new();
        t.at_most("x", f64::NAN, 1e-2, "a");
        assert!(!t.finish(0, "t").pass);
    }

    #[test]
    fn cheap_criteria_pass_on_small_sweeps() {
        for c in [criterion_3, criterion_5, criterion_8, criterion_10] {
            let r = c(&tiny());
            assert!(r.pass, "{}", r.line());
        }
    }
}
