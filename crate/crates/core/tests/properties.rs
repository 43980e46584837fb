use std::path::Path;

use proptest::prelude::*;

use obsreg::io::snapshot::{decode, encode, SnapshotFile, SnapshotKind};
use obsreg::monitor::{check, CriterionInputs, GradientSource, Variant};
use obsreg::observers::{cutoff_eigenvalue, observe_modal, observe_nodal};
use obsreg::solver::initial::random_field;
use obsreg::tetra::{h1_data_norms, mean_correct};
use obsreg::TorusConfig;

fn torus(length: f64, n: usize) -> TorusConfig {
    TorusConfig::new(length, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leray_projection_is_idempotent_and_divergence_free(seed in any::<u64>(), length in 0.5f64..10.0) {
        let f = random_field(torus(length, 8), 1.0, seed, false);
        let p = f.leray_project();
        prop_assert!(p.max_divergence() < 1e-12 * f.norms().h1.max(1.0));
        prop_assert!(p.leray_project().sub(&p).norms().l2 <= 1e-14 * p.norms().l2.max(1.0));
        prop_assert!(p.norms().l2 <= f.norms().l2 * (1.0 + 1e-14));
    }

    #[test]
    fn physical_round_trip(seed in any::<u64>(), amplitude in 0.01f64..100.0) {
        let f = random_field(torus(1.0, 8), amplitude, seed, true);
        let back = f.to_physical().to_spectral(true);
        prop_assert!(back.sub(&f).norms().l2 <= 1e-13 * f.norms().l2);
    }

    #[test]
    fn snapshot_bytes_round_trip(seed in any::<u64>(), time in -1e6f64..1e6) {
        let snap = SnapshotFile { time, kind: SnapshotKind::Nudged, field: random_field(torus(3.0, 6), 1.0, seed, true) };
        let bytes = encode(&snap);
        let back = decode(&bytes, Path::new("p")).unwrap();
        prop_assert_eq!(encode(&back), bytes);
        prop_assert_eq!(back, snap);
    }

    #[test]
    fn interpolant_hits_vertex_values(seed in any::<u64>(), n in 2usize..6) {
        let u = random_field(torus(1.0, 8), 1.0, seed, true);
        let nodal = observe_nodal(&u, n).unwrap();
        let interp = mean_correct(nodal.clone());
        let off = interp.mean_offset();
        for j in 0..n {
            let x = [j as f64 * nodal.h, ((j + 1) % n) as f64 * nodal.h, 0.0];
            let v = nodal.sample([j, (j + 1) % n, 0]);
            let got = interp.evaluate(x);
            for d in 0..3 {
                prop_assert!((got[d] + off[d] - v[d]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn data_norm_brackets_interpolant_gradient(seed in any::<u64>(), n in 2usize..9) {
        let u = random_field(torus(2.0, 8), 1.0, seed, true);
        let norms = h1_data_norms(&observe_nodal(&u, n).unwrap());
        prop_assert!(norms.lower <= norms.exact * (1.0 + 1e-12));
        prop_assert!(norms.exact <= norms.upper * (1.0 + 1e-12));
    }

    #[test]
    fn modal_projection_is_monotone_in_cutoff(seed in any::<u64>(), a in 1usize..200, b in 1usize..200) {
        let u = random_field(torus(1.0, 8), 1.0, seed, true);
        let (lo, hi) = (a.min(b), a.max(b));
        let h1 = |c: usize| observe_modal(&u, c).unwrap().reconstruct().norms().h1;
        prop_assert!(h1(lo) <= h1(hi) * (1.0 + 1e-14));
        prop_assert!(h1(hi) <= u.norms().h1 * (1.0 + 1e-14));
        prop_assert!(cutoff_eigenvalue(u.config(), lo).unwrap() <= cutoff_eigenvalue(u.config(), hi).unwrap());
    }

    #[test]
    fn satisfied_criterion_stays_satisfied_at_finer_scale(
        h in 0.01f64..5.0,
        shrink in 0.01f64..1.0,
        nu in 0.01f64..2.0,
        w2 in 0.0f64..3.0,
        grad in 0.0f64..2.0,
        late in any::<bool>(),
    ) {
        let inputs = |h: f64| CriterionInputs {
            nu,
            lambda1: 1.0,
            c: 1.0,
            h,
            m2: w2,
            w2,
            initial_gradient: grad,
            gradient_source: GradientSource::Reference,
            variant: if late { Variant::Characterization } else { Variant::Sufficient },
            window: (if late { 0.5 } else { 0.0 }, 1.0),
        };
        let coarse = check(&inputs(h));
        let fine = check(&inputs(h * shrink));
        prop_assert!(coarse.is_consistent() && fine.is_consistent());
        prop_assert!(!coarse.satisfied || fine.satisfied);
    }
}
