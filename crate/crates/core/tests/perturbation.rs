//! Noisy oracles: every output gets a pseudo-random relative perturbation of
//! size eps. Small noise must be absorbed, large noise rejected, and nothing
//! in between may come back as a wrong factorization.

use wigner_core::factorizer::{factorize_with_samples, verify_instance};
use wigner_core::harness::{gen_instance, module_phase, InstanceSpec, Oracle};
use wigner_core::module_space::ModVec;
use wigner_core::numerics::{seeded_rng, CMatrix};
use wigner_core::operator_algebra::TransformOracle;

const EPS: [f64; 8] = [0.0, 1e-15, 1e-13, 1e-11, 1e-9, 1e-7, 1e-5, 1e-3];

fn noisy(inner: TransformOracle, eps: f64) -> TransformOracle {
    let space = inner.space();
    TransformOracle::new(space, move |f: &ModVec| {
        let clean = inner.eval(f);
        let z = module_phase(0x006e_6f69_7365, f.mat());
        let mut rng = seeded_rng(z.re.to_bits() ^ z.im.to_bits().rotate_left(17));
        let n = CMatrix::random_gaussian(space.d, space.m, &mut rng);
        let noise = n.scale_real(eps * f.norm() / n.norm());
        ModVec::new(space, clean.mat() + &noise).unwrap()
    })
}

#[test]
fn noise_sweep() {
    for (d, m) in [(1, 2), (2, 2), (2, 3), (3, 4)] {
        for seed in 0..4u64 {
            let inst = gen_instance(&InstanceSpec::module_unitary(d, m, seed)).unwrap();
            let Oracle::Module(clean) = inst.oracle().unwrap() else { unreachable!() };
            let samples = inst.fresh_module_samples(8);
            let mut probe = clean.space().standard_basis();
            probe.extend(samples.iter().cloned());
            let mut last_residual = 0.0;
            for eps in EPS {
                let t = noisy(clean.clone(), eps);
                let rep = verify_instance(&t, &probe, 1e-8).unwrap();
                let r = rep.max_condition_residual;
                println!("d={d} m={m} seed={seed} eps={eps:.0e} verify={r:.2e}");
                // the condition residual tracks the noise level; the floor
                // comes from square roots of nearly singular pairings
                assert!(r <= 10.0 * eps + 1e-10, "eps={eps} residual={r}");
                if eps >= 1e-7 {
                    assert!(r >= 0.01 * eps, "eps={eps} residual={r}");
                    assert!(r >= 0.1 * last_residual);
                }
                last_residual = r;

                match factorize_with_samples(&t, &samples) {
                    Ok(fac) => {
                        assert!(eps < 1e-5, "eps={eps} accepted");
                        // whatever is accepted reconstructs to the noise level
                        for f in &samples {
                            let phase = fac.phase_of(f).unwrap();
                            let gap = t.eval(f).dist(&fac.u.apply(f).scale(phase)) / f.norm();
                            assert!(gap <= 1e-7, "eps={eps} gap={gap}");
                        }
                    }
                    Err(e) => assert!(eps >= 1e-9, "eps={eps} rejected: {e}"),
                }
            }
        }
    }
}
