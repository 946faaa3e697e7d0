//! Invariants over randomly drawn sizes and seeds.

use num_complex::Complex64;
use proptest::prelude::*;

use wigner_core::harness::{gen_instance, Instance, InstanceSpec, Oracle};
use wigner_core::module_space::{
    check_modular_orthonormal, inner, modular_gram_schmidt, ModVec, ModuleSpace, TOL_MOD,
};
use wigner_core::numerics::{abs_elem, herm_eig, random_unitary, seeded_rng, CMatrix};
use wigner_core::operator_algebra::{build_jordan_map, dyad, ALinOp, TransformOracle, TOL_WIG};

fn sizes() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), d..=d + 2))
}

fn module_oracle(inst: &Instance) -> TransformOracle {
    match inst.oracle().unwrap() {
        Oracle::Module(t) => t,
        _ => unreachable!(),
    }
}

fn vectors(space: ModuleSpace, seed: u64, count: usize) -> Vec<ModVec> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| space.random_vector(&mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn inner_product_axioms((d, m) in sizes(), seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let space = ModuleSpace::new(d, m).unwrap();
        let v = vectors(space, seed, 3);
        let (f, g, h) = (&v[0], &v[1], &v[2]);
        let scale = f.norm() * h.norm() + g.norm() * h.norm();

        // positivity, with tr[f, f] = ‖f‖² so [f, f] = 0 forces f = 0
        let ff = inner(f, f).unwrap();
        let eig = herm_eig(&ff.hermitian_part()).unwrap();
        prop_assert!(*eig.values.last().unwrap() >= -1e-12 * f.norm().powi(2));
        prop_assert!((ff.trace().re - f.norm().powi(2)).abs() <= 1e-12 * f.norm().powi(2));

        // left A-linearity in the first argument
        let mut rng = seeded_rng(seed ^ 1);
        let a = CMatrix::random_gaussian(d, d, &mut rng);
        let b = CMatrix::identity(d).scale(Complex64::new(re, im));
        let lhs = inner(&f.left_mul(&a).add(&g.left_mul(&b)), h).unwrap();
        let rhs = &(&a * &inner(f, h).unwrap()) + &(&b * &inner(g, h).unwrap());
        prop_assert!(lhs.dist(&rhs) <= 1e-12 * (a.norm() + b.norm()) * scale);

        // hermitian symmetry
        prop_assert!(inner(f, g).unwrap().adjoint().dist(&inner(g, f).unwrap()) <= 1e-13 * f.norm() * g.norm());
    }

    #[test]
    fn dyad_adjoint_swaps_factors((d, m) in sizes(), seed in any::<u64>()) {
        let space = ModuleSpace::new(d, m).unwrap();
        let v = vectors(space, seed, 2);
        let lhs = dyad(&v[0], &v[1]).unwrap().adjoint();
        let rhs = dyad(&v[1], &v[0]).unwrap();
        prop_assert!(lhs.dist(&rhs) <= 1e-13 * v[0].norm() * v[1].norm());
    }

    #[test]
    fn modulus_squares_to_gram(n in 1usize..=5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let a = CMatrix::random_gaussian(n, n, &mut rng);
        let r = abs_elem(&a).unwrap();
        let gram = &a.adjoint() * &a;
        prop_assert!((&r * &r).dist(&gram) <= 1e-10 * gram.norm());
        // |u a| = |a| for unitary u
        let u = random_unitary(n, seed ^ 2);
        prop_assert!(abs_elem(&(&u * &a)).unwrap().dist(&r) <= 1e-10 * r.norm());
    }

    #[test]
    fn gram_schmidt_is_idempotent((d, m) in sizes(), seed in any::<u64>(), count in 1usize..=3) {
        let space = ModuleSpace::new(d, m).unwrap();
        let first = modular_gram_schmidt(&vectors(space, seed, count)).unwrap();
        let second = modular_gram_schmidt(&first.vectors).unwrap();
        prop_assert_eq!(first.vectors.len(), second.vectors.len());
        for (x, y) in first.vectors.iter().zip(&second.vectors) {
            prop_assert!(x.dist(y) <= 1e-9);
        }
    }

    #[test]
    fn modular_base_expands_every_vector((d, m) in sizes(), seed in any::<u64>()) {
        // inputs of full rank span the module, so the output is a base
        let space = ModuleSpace::new(d, m).unwrap();
        let count = m.div_ceil(d) + 1;
        let base = modular_gram_schmidt(&vectors(space, seed, count)).unwrap().vectors;
        prop_assert_eq!(base.len(), m);
        let f = &vectors(space, seed ^ 3, 1)[0];
        let mut sum = space.zero();
        for h in &base {
            sum = sum.add(&h.left_mul(&inner(f, h).unwrap()));
        }
        prop_assert!(sum.dist(f) <= 1e-10 * f.norm());
    }

    #[test]
    fn induced_map_is_star_preserving_jordan((d, m) in sizes(), seed in any::<u64>()) {
        let inst = gen_instance(&InstanceSpec::module_unitary(d, m, seed)).unwrap();
        let psi = build_jordan_map(&module_oracle(&inst)).unwrap();
        let space = ModuleSpace::new(d, m).unwrap();
        let mut rng = seeded_rng(seed ^ 4);
        let s = ALinOp::random(space, &mut rng);
        let star = psi.apply(&s.adjoint()).dist(&psi.apply(&s).adjoint());
        prop_assert!(star <= TOL_WIG * s.norm());

        let h = ALinOp::random_self_adjoint(space, &mut rng);
        let ph = psi.apply(&h);
        let lhs = ph.compose(&ph).unwrap();
        let rhs = psi.apply(&h.compose(&h).unwrap());
        prop_assert!(lhs.dist(&rhs) <= TOL_WIG * h.norm().powi(2));
    }

    #[test]
    fn valid_oracles_keep_families_orthonormal((d, m) in sizes(), seed in any::<u64>(), anti in any::<bool>()) {
        let spec = if anti && d == 1 && m >= 2 {
            InstanceSpec::module_antiunitary(m, seed)
        } else {
            InstanceSpec::module_unitary(d, m, seed)
        };
        let inst = gen_instance(&spec).unwrap();
        let t = module_oracle(&inst);
        let space = ModuleSpace::new(d, m).unwrap();
        let family = modular_gram_schmidt(&vectors(space, seed ^ 5, 2)).unwrap().vectors;
        let images: Vec<ModVec> = family.iter().map(|f| t.eval(f)).collect();
        prop_assert!(check_modular_orthonormal(&images, TOL_MOD).unwrap().pass);
    }

    #[test]
    fn generated_instances_verify(seed in any::<u64>(), kind in 0usize..4, size in 1usize..=4) {
        let spec = match kind {
            0 => InstanceSpec::module_unitary(size.min(3), size + 1, seed),
            1 => InstanceSpec::module_antiunitary(size + 1, seed),
            2 => InstanceSpec::cstar(size, seed),
            _ => InstanceSpec::real(size, seed),
        };
        let inst = gen_instance(&spec).unwrap();
        prop_assert!(inst.verify(6, 1e-9).unwrap().pass);
        let bad = gen_instance(&spec.corrupted(1e-3, seed as usize % inst.canonical_basis_len())).unwrap();
        prop_assert!(!bad.verify(6, 1e-9).unwrap().pass);
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>(), n in 1usize..=5) {
        let inst = gen_instance(&InstanceSpec::real(n, seed)).unwrap();
        let json = inst.to_json().unwrap();
        let back = Instance::from_json(&json).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_json().unwrap(), json);
    }
}
