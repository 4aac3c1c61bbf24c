use std::collections::BTreeMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toric_core::catalog::{projective_product, standard_bundles, standard_varieties, CatalogBundle};
use toric_core::cohomology::ToricVariety;
use toric_core::collections::{check_collection, construct_fibered_collection, default_step, DEFAULT_T_CAP};
use toric_core::fan::{PrimitiveRelation, TDivisor};
use toric_core::homology::{reduced_homology, support_complex};
use toric_core::lattice::{int_vector, rank, IntMatrix, RationalPolyhedron, Sense};

fn matrix(rows: &[Vec<i64>]) -> IntMatrix {
    let cols = rows.first().map_or(0, Vec::len);
    IntMatrix::from_rows(cols, rows.iter().map(|r| int_vector(r)).collect()).unwrap()
}

fn simplex(n: usize, k: i64) -> RationalPolyhedron {
    let mut p = RationalPolyhedron::new(n);
    for i in 0..n {
        let mut e = vec![0i64; n];
        e[i] = 1;
        p.add(int_vector(&e), Sense::Ge, BigInt::from(0)).unwrap();
    }
    p.add(int_vector(&vec![1; n]), Sense::Le, BigInt::from(k)).unwrap();
    p
}

fn brute_force_count(p: &RationalPolyhedron, n: usize, lo: i64, hi: i64) -> u64 {
    let mut count = 0;
    let mut x = vec![lo; n];
    loop {
        if p.contains(&int_vector(&x)) {
            count += 1;
        }
        let mut i = 0;
        while i < n {
            if x[i] < hi {
                x[i] += 1;
                break;
            }
            x[i] = lo;
            i += 1;
        }
        if i == n {
            return count;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_equals_rank_of_transpose(rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 1..5)) {
        let m = matrix(&rows);
        prop_assert_eq!(rank(&m), rank(&m.transpose()));
    }

    #[test]
    fn simplex_point_count_is_binomial(n in 1usize..=3, k in 0i64..=4) {
        let p = simplex(n, k);
        let counted = p.count_lattice_points().finite().unwrap();
        prop_assert_eq!(counted, brute_force_count(&p, n, -1, k + 1));
        let mut c: u64 = 1;
        for i in 0..n as u64 {
            c = c * (k as u64 + n as u64 - i) / (i + 1);
        }
        prop_assert_eq!(counted, c);
    }

    #[test]
    fn random_box_cuts_match_brute_force(
        cuts in prop::collection::vec((prop::collection::vec(-3i64..=3, 2), -4i64..=6), 0..4),
    ) {
        let mut p = RationalPolyhedron::new(2);
        for i in 0..2 {
            let mut e = vec![0i64; 2];
            e[i] = 1;
            p.add(int_vector(&e), Sense::Le, BigInt::from(4)).unwrap();
            e[i] = -1;
            p.add(int_vector(&e), Sense::Le, BigInt::from(4)).unwrap();
        }
        for (normal, bound) in &cuts {
            p.add(int_vector(normal), Sense::Le, BigInt::from(*bound)).unwrap();
        }
        prop_assert_eq!(p.count_lattice_points().finite().unwrap(), brute_force_count(&p, 2, -5, 5));
    }

    #[test]
    fn unimodular_change_of_coordinates_preserves_counts(s in -3i64..=3, k in 0i64..=4) {
        // y = U x with U = [[1, s], [0, 1]]; a.x <= b becomes (a U^-1).y <= b
        let p = simplex(2, k);
        let mut q = RationalPolyhedron::new(2);
        for ineq in p.inequalities() {
            let a0 = &ineq.normal[0];
            let a1 = &ineq.normal[1];
            q.add(vec![a0.clone(), a1 - a0 * s], Sense::Le, ineq.bound.clone()).unwrap();
        }
        prop_assert_eq!(p.count_lattice_points(), q.count_lattice_points());
    }

    #[test]
    fn canonical_representation_ignores_characters(
        coeffs in prop::collection::vec(-5i64..=5, 4),
        m in prop::collection::vec(-5i64..=5, 2),
        a in 0i64..=3,
    ) {
        let fan = toric_core::catalog::hirzebruch(a).unwrap().bundle.total().clone();
        let d = TDivisor::from_i64(&coeffs);
        let shifted = &d + &fan.principal_divisor(&int_vector(&m));
        prop_assert_eq!(fan.canonical(&d).unwrap(), fan.canonical(&shifted).unwrap());
    }
}

#[test]
fn cohomology_does_not_depend_on_the_representation() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for fan in standard_varieties().unwrap() {
        let x = ToricVariety::new(fan.clone());
        for _ in 0..5 {
            let d = TDivisor::new((0..fan.num_rays()).map(|_| BigInt::from(r.gen_range(-4..=4))).collect());
            let base = x.dims(&d).unwrap();
            for _ in 0..10 {
                let m: Vec<BigInt> = (0..fan.rank()).map(|_| BigInt::from(r.gen_range(-6..=6))).collect();
                assert_eq!(x.dims(&(&d + &fan.principal_divisor(&m))).unwrap(), base, "{}", fan.name());
            }
        }
    }
}

#[test]
fn homology_euler_characteristic_matches_face_counts() {
    for fan in standard_varieties().unwrap() {
        let s = fan.num_rays();
        assert!(s <= 10);
        for mask in 0u32..(1 << s) {
            let rays: Vec<usize> = (0..s).filter(|i| mask & (1 << i) != 0).collect();
            let c = support_complex(&fan, &rays);
            assert_eq!(reduced_homology(&c).euler_characteristic(), c.reduced_euler_characteristic());
        }
    }
}

fn convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[test]
fn cohomology_of_box_bundles_is_the_convolution() {
    for (m, n) in [(1, 1), (1, 2)] {
        let b = projective_product(m, n).unwrap().bundle;
        let (f, z, x) = (b.fiber_variety(), b.base_variety(), b.total_variety());
        for p in -4..=4 {
            for q in -4..=4 {
                let lf = TDivisor::ray(b.fiber().num_rays(), m, p);
                let lz = TDivisor::ray(b.base().num_rays(), n, q);
                let total = &b.lift_from_fiber(&lf).unwrap() + &b.pullback_from_base(&lz).unwrap();
                let want = convolve(&f.dims(&lf).unwrap(), &z.dims(&lz).unwrap());
                assert_eq!(x.dims(&total).unwrap(), want, "P{m}xP{n} O({p},{q})");
            }
        }
    }
}

#[test]
fn serre_duality_beyond_the_catalog_grid() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    for fan in standard_varieties().unwrap() {
        let x = ToricVariety::new(fan.clone());
        let k = fan.canonical_class();
        for _ in 0..10 {
            let d = TDivisor::new((0..fan.num_rays()).map(|_| BigInt::from(r.gen_range(-7..=7))).collect());
            let mut dual = x.dims(&(&k - &d)).unwrap();
            dual.reverse();
            assert_eq!(x.dims(&d).unwrap(), dual);
        }
    }
}

fn relation_map(r: &PrimitiveRelation, rays: &[usize]) -> (Vec<usize>, BTreeMap<usize, BigInt>) {
    let mut collection: Vec<usize> = r.collection.iter().map(|&i| rays[i]).collect();
    collection.sort_unstable();
    let coeffs = r
        .support_cone_rays
        .iter()
        .zip(&r.coefficients)
        .filter(|(_, c)| **c != BigInt::from(0))
        .map(|(&i, c)| (rays[i], c.clone()))
        .collect();
    (collection, coeffs)
}

#[test]
fn primitive_collections_split_into_fiber_and_lifted_base_ones() {
    for entry in standard_bundles().unwrap() {
        let b = &entry.bundle;
        let map = b.ray_map();
        let total: Vec<_> = b
            .total()
            .primitive_collections()
            .iter()
            .map(|r| relation_map(r, &(0..b.total().num_rays()).collect::<Vec<_>>()))
            .collect();
        let fiber: Vec<_> = b
            .fiber()
            .primitive_collections()
            .iter()
            .map(|r| relation_map(r, &map.fiber_rays))
            .collect();
        let base: Vec<_> = b
            .base()
            .primitive_collections()
            .iter()
            .map(|r| relation_map(r, &map.base_rays))
            .collect();
        assert_eq!(total.len(), fiber.len() + base.len(), "{}", b.total().name());
        for f in &fiber {
            assert!(total.contains(f), "fiber relation kept verbatim");
        }
        for (collection, coeffs) in &base {
            let (_, lifted) = total.iter().find(|(c, _)| c == collection).expect("base collection lifts");
            for (ray, c) in lifted {
                if map.base_rays.contains(ray) {
                    assert_eq!(coeffs.get(ray), Some(c), "base part of the relation is unchanged");
                }
            }
            if b.twist().is_zero() {
                assert_eq!(lifted, coeffs);
            }
        }
    }
}

#[test]
fn block_construction_stabilizes_once_it_succeeds() {
    let mut entries: Vec<CatalogBundle> = standard_bundles().unwrap();
    entries.push(toric_core::catalog::hirzebruch(0).unwrap());
    for entry in entries {
        let b = &entry.bundle;
        let step = default_step(b);
        let first = construct_fibered_collection(b, &entry.fiber_collection, &entry.base_collection, &step, DEFAULT_T_CAP)
            .unwrap()
            .t;
        for t in first..=DEFAULT_T_CAP {
            let d = step.scaled(&BigInt::from(t));
            let c = toric_core::collections::block_collection(b, &entry.fiber_collection, &entry.base_collection, &d)
                .unwrap();
            let r = check_collection(b.total(), &c).unwrap();
            assert!(r.is_strongly_exceptional, "{} t={t}", b.total().name());
            assert!(r.gram_unitriangular);
        }
    }
}

#[test]
fn every_catalog_fan_has_matching_poincare_and_euler() {
    for fan in standard_varieties().unwrap() {
        let p = fan.poincare_polynomial();
        assert_eq!(p.iter().sum::<i64>() as usize, fan.euler_characteristic(), "{}", fan.name());
        let mut rev = p.clone();
        rev.reverse();
        assert_eq!(p, rev, "Poincare duality for {}", fan.name());
    }
}
