//! Line-bundle cohomology on a smooth complete toric variety.
//!
//! A representation `r` of `L` is `r0 + div(chi^m)` for a character `m`.
//! Its support complex only depends on which coordinates are non-negative,
//! so the characters are grouped by sign pattern `S`: for every pattern with
//! nonzero reduced homology we count the characters realizing it and add
//! `count * H~_{n-1-p}(Supp(S))` to `h^p`.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CohomologyError;
use crate::fan::{Fan, TDivisor};
use crate::fibration::FibrationBundle;
use crate::homology::{reduced_homology, support_complex, HomologyProfile};
use crate::lattice::{LatticePoints, RationalPolyhedron, Sense};

/// A sign pattern with nonzero reduced homology, cached per fan.
#[derive(Clone, Debug)]
struct PatternInfo {
    nonneg: Vec<usize>,
    homology: HomologyProfile,
    bounded: bool,
}

/// A fan together with its lazily computed sign-pattern homology cache.
#[derive(Debug)]
pub struct ToricVariety {
    fan: Fan,
    patterns: OnceLock<Vec<PatternInfo>>,
}

impl Clone for ToricVariety {
    fn clone(&self) -> Self {
        ToricVariety {
            fan: self.fan.clone(),
            patterns: self.patterns.clone(),
        }
    }
}

/// One sign pattern's share of the cohomology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Contribution {
    /// Rays carrying a non-negative coefficient.
    pub nonneg_rays: Vec<usize>,
    pub characters: u64,
    /// Reduced homology of the support complex, index `q + 1`.
    pub homology: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyTable {
    /// `h^0 .. h^n`.
    pub dims: Vec<u64>,
    /// Patterns that actually contributed (nonzero homology, nonzero count).
    pub ledger: Vec<Contribution>,
}

impl CohomologyTable {
    pub fn h(&self, p: usize) -> u64 {
        self.dims.get(p).copied().unwrap_or(0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.dims.iter().skip(1).all(|&d| d == 0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(p, &d)| if p % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

impl fmt::Display for CohomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "h: {}", parts.join(" "))
    }
}

impl ToricVariety {
    pub fn new(fan: Fan) -> Self {
        ToricVariety {
            fan,
            patterns: OnceLock::new(),
        }
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn into_fan(self) -> Fan {
        self.fan
    }

    fn patterns(&self) -> &[PatternInfo] {
        self.patterns.get_or_init(|| {
            let s = self.fan.num_rays();
            (0u64..(1u64 << s))
                .into_par_iter()
                .filter_map(|mask| {
                    let nonneg: Vec<usize> = (0..s).filter(|i| mask & (1 << i) != 0).collect();
                    let homology = reduced_homology(&support_complex(&self.fan, &nonneg));
                    if homology.is_zero() {
                        return None;
                    }
                    let bounded = self.pattern_region(&nonneg, None).recession_cone_is_trivial();
                    Some(PatternInfo {
                        nonneg,
                        homology,
                        bounded,
                    })
                })
                .collect()
        })
    }

    /// Characters `m` for which `r0 + div(chi^m)` has exactly the sign
    /// pattern `nonneg`. With `r0 = None` the bounds are zero, which is all
    /// the recession-cone test needs.
    fn pattern_region(&self, nonneg: &[usize], r0: Option<&TDivisor>) -> RationalPolyhedron {
        let fan = &self.fan;
        let mut poly = RationalPolyhedron::new(fan.rank());
        for (i, v) in fan.rays().iter().enumerate() {
            let c = r0.map_or_else(BigInt::default, |r| r.coeffs()[i].clone());
            if nonneg.contains(&i) {
                poly.add(v.clone(), Sense::Ge, -c).expect("ray has the ambient rank");
            } else {
                poly.add(v.clone(), Sense::Lt, -c).expect("ray has the ambient rank");
            }
        }
        poly
    }

    /// `h^p(X, O(d))` for all `p`, with the per-pattern ledger.
    pub fn cohomology(&self, d: &TDivisor) -> Result<CohomologyTable, CohomologyError> {
        self.fan.check_divisor(d)?;
        let n = self.fan.rank();
        let contributions: Vec<Contribution> = self
            .patterns()
            .par_iter()
            .map(|pat| -> Result<Option<Contribution>, CohomologyError> {
                if !pat.bounded {
                    return Err(CohomologyError::NonFinite {
                        pattern: pat.nonneg.clone(),
                    });
                }
                let region = self.pattern_region(&pat.nonneg, Some(d));
                match region.count_assuming_bounded() {
                    LatticePoints::Finite(0) => Ok(None),
                    LatticePoints::Finite(count) => Ok(Some(Contribution {
                        nonneg_rays: pat.nonneg.clone(),
                        characters: count,
                        homology: pat.homology.dims().to_vec(),
                    })),
                    LatticePoints::Unbounded => Err(CohomologyError::NonFinite {
                        pattern: pat.nonneg.clone(),
                    }),
                }
            })
            .filter_map(Result::transpose)
            .collect::<Result<_, _>>()?;
        let mut dims = vec![0u64; n + 1];
        for c in &contributions {
            let h = HomologyProfile::from_dims(c.homology.clone());
            for (p, slot) in dims.iter_mut().enumerate() {
                *slot += c.characters * h.get(n as isize - 1 - p as isize);
            }
        }
        Ok(CohomologyTable {
            dims,
            ledger: contributions,
        })
    }

    pub fn dims(&self, d: &TDivisor) -> Result<Vec<u64>, CohomologyError> {
        Ok(self.cohomology(d)?.dims)
    }

    pub fn is_acyclic(&self, d: &TDivisor) -> Result<bool, CohomologyError> {
        Ok(self.cohomology(d)?.is_acyclic())
    }

    /// `chi(O(a), O(b)) = sum_k (-1)^k h^k(b - a)`.
    pub fn euler_pairing(&self, a: &TDivisor, b: &TDivisor) -> Result<i64, CohomologyError> {
        self.fan.check_divisor(a)?;
        Ok(self.cohomology(&(b - a))?.euler_characteristic())
    }
}

/// One-off cohomology computation without keeping the pattern cache.
pub fn cohomology(fan: &Fan, d: &TDivisor) -> Result<CohomologyTable, CohomologyError> {
    ToricVariety::new(fan.clone()).cohomology(d)
}

pub fn is_acyclic(fan: &Fan, d: &TDivisor) -> Result<bool, CohomologyError> {
    Ok(cohomology(fan, d)?.is_acyclic())
}

pub fn euler_pairing(fan: &Fan, a: &TDivisor, b: &TDivisor) -> Result<i64, CohomologyError> {
    ToricVariety::new(fan.clone()).euler_pairing(a, b)
}

/// `O(k * T_ray)` helper used by tests and the catalog.
pub fn ray_multiple(fan: &Fan, ray: usize, k: i64) -> TDivisor {
    TDivisor::ray(fan.num_rays(), ray, BigInt::from(k))
}

/// A representation on a fibration's total space split along the rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationSplit {
    /// Coefficients on the fiber rays; a representation of `L|_F`.
    pub fiber: TDivisor,
    /// Coefficients on the base rays; a representation of the base part of
    /// `L` shifted by `correction`.
    pub base: TDivisor,
    /// `D^g`: coefficient `sum_k a_k g_k^j` on base free ray `j`.
    pub correction: TDivisor,
}

/// Splits a representation `r` of the class `class` on the total space.
pub fn decompose_representation(
    bundle: &FibrationBundle,
    class: &TDivisor,
    r: &TDivisor,
) -> Result<RepresentationSplit, CohomologyError> {
    let total = bundle.total();
    if !total.linearly_equivalent(class, r)? {
        return Err(CohomologyError::NotARepresentation);
    }
    Ok(split_representation(bundle, r))
}

fn split_representation(bundle: &FibrationBundle, r: &TDivisor) -> RepresentationSplit {
    let fiber = bundle.fiber_part(r);
    let base = bundle.base_part(r);
    let correction = bundle.twist_correction(&fiber);
    RepresentationSplit {
        fiber,
        base,
        correction,
    }
}

fn nonneg_rays(r: &TDivisor) -> Vec<usize> {
    r.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.sign() != num_bigint::Sign::Minus)
        .map(|(i, _)| i)
        .collect()
}

/// Reduced homology of `Supp(r)` on the total space against the join of the
/// fiber and base supports.
pub fn kunneth_check(bundle: &FibrationBundle, r: &TDivisor) -> Result<bool, CohomologyError> {
    bundle.total().check_divisor(r)?;
    let split = split_representation(bundle, r);
    let whole = reduced_homology(&support_complex(bundle.total(), &nonneg_rays(r)));
    let f = reduced_homology(&support_complex(bundle.fiber(), &nonneg_rays(&split.fiber)));
    let b = reduced_homology(&support_complex(bundle.base(), &nonneg_rays(&split.base)));
    let len = whole.dims().len();
    Ok(f.join(&b).resized(len) == whole)
}

/// For `L` on the fiber with no sections and no higher cohomology, whether
/// `lift(L) + pullback(H)` is acyclic on the total space.
pub fn acyclic_pullback_check(
    bundle: &FibrationBundle,
    l_fiber: &TDivisor,
    h_base: &TDivisor,
) -> Result<bool, CohomologyError> {
    let on_fiber = bundle.fiber_variety().cohomology(l_fiber)?;
    if on_fiber.dims.iter().any(|&d| d != 0) {
        return Err(CohomologyError::FiberHypothesis { dims: on_fiber.dims });
    }
    let combined = &bundle.lift_from_fiber(l_fiber)? + &bundle.pullback_from_base(h_base)?;
    bundle.total_variety().is_acyclic(&combined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> Fan {
        Fan::from_i64("P1", &[&[1], &[-1]], &[&[0], &[1]]).unwrap()
    }

    fn p2() -> Fan {
        Fan::from_i64("P2", &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[2, 0]]).unwrap()
    }

    #[test]
    fn cohomology_examples_on_p2() {
        let x = ToricVariety::new(p2());
        assert_eq!(x.dims(&TDivisor::from_i64(&[0, 0, 2])).unwrap(), vec![6, 0, 0]);
        assert_eq!(x.dims(&TDivisor::from_i64(&[0, 0, -3])).unwrap(), vec![0, 0, 1]);
        assert_eq!(x.dims(&TDivisor::zero(3)).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn structure_sheaf_is_trivial_everywhere() {
        let f = Fan::from_i64(
            "F3",
            &[&[1, 0], &[-1, 0], &[0, 1], &[3, -1]],
            &[&[0, 2], &[0, 3], &[1, 2], &[1, 3]],
        )
        .unwrap();
        assert_eq!(cohomology(&f, &TDivisor::zero(4)).unwrap().dims, vec![1, 0, 0]);
    }

    #[test]
    fn acyclicity_on_p1() {
        let x = ToricVariety::new(p1());
        assert!(x.is_acyclic(&TDivisor::from_i64(&[0, -1])).unwrap());
        assert!(!x.is_acyclic(&TDivisor::from_i64(&[0, -2])).unwrap());
        assert!(x.is_acyclic(&TDivisor::zero(2)).unwrap());
        assert_eq!(x.dims(&TDivisor::from_i64(&[0, -2])).unwrap(), vec![0, 1]);
    }

    #[test]
    fn euler_pairing_examples() {
        let x = ToricVariety::new(p1());
        let o = TDivisor::zero(2);
        for k in -1..6 {
            let ok = TDivisor::from_i64(&[0, k]);
            assert_eq!(x.euler_pairing(&o, &ok).unwrap(), k + 1);
        }
        let y = ToricVariety::new(p2());
        let a = TDivisor::from_i64(&[3, -1, 2]);
        assert_eq!(y.euler_pairing(&a, &a).unwrap(), 1);
        assert_eq!(
            y.euler_pairing(&TDivisor::zero(3), &TDivisor::from_i64(&[0, 0, -3])).unwrap(),
            1
        );
    }

    #[test]
    fn ledger_attributes_h0_and_top_degree() {
        let x = ToricVariety::new(p2());
        let t = x.cohomology(&TDivisor::from_i64(&[0, 0, 2])).unwrap();
        assert_eq!(t.ledger.len(), 1);
        assert_eq!(t.ledger[0].nonneg_rays, vec![0, 1, 2]);
        assert_eq!(t.ledger[0].characters, 6);

        let t = x.cohomology(&TDivisor::from_i64(&[0, 0, -4])).unwrap();
        assert_eq!(t.dims, vec![0, 0, 3]);
        assert_eq!(t.ledger.len(), 1);
        assert!(t.ledger[0].nonneg_rays.is_empty());
    }

    fn bundle(a: i64) -> FibrationBundle {
        crate::fibration::build_fibration(p1(), p1(), crate::lattice::IntMatrix::from_i64(&[&[a]]), 0, 0)
            .unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let a = 3;
        let b = bundle(a);
        let r = TDivisor::from_i64(&[1, 0, 0, 0]);
        let s = decompose_representation(&b, &r, &r).unwrap();
        assert_eq!(s.fiber, TDivisor::from_i64(&[1, 0]));
        assert_eq!(s.base, TDivisor::zero(2));
        assert_eq!(s.correction, TDivisor::from_i64(&[0, a]));

        let r = TDivisor::from_i64(&[0, 0, 4, -2]);
        let s = decompose_representation(&b, &r, &r).unwrap();
        assert!(s.fiber.is_zero() && s.correction.is_zero());

        let p = bundle(0);
        let r = TDivisor::from_i64(&[2, -1, 3, 5]);
        let s = decompose_representation(&p, &r, &r).unwrap();
        assert!(s.correction.is_zero());
        assert_eq!(s.base, TDivisor::from_i64(&[3, 5]));
    }

    #[test]
    fn decomposition_rejects_other_classes() {
        let b = bundle(1);
        let err = decompose_representation(&b, &TDivisor::zero(4), &TDivisor::from_i64(&[0, 1, 0, 0]));
        assert!(matches!(err, Err(CohomologyError::NotARepresentation)));
    }

    #[test]
    fn kunneth_examples_on_product() {
        let p = bundle(0);
        assert!(kunneth_check(&p, &TDivisor::zero(4)).unwrap());
        assert!(kunneth_check(&p, &TDivisor::from_i64(&[-1, -1, 0, 0])).unwrap());
        assert!(kunneth_check(&bundle(1), &TDivisor::from_i64(&[-1, 2, -3, 0])).unwrap());
    }

    #[test]
    fn acyclic_pullback_examples() {
        let l = TDivisor::from_i64(&[0, -1]);
        for (a, h) in [(1, 5), (2, -7), (0, 3)] {
            assert!(acyclic_pullback_check(&bundle(a), &l, &TDivisor::from_i64(&[0, h])).unwrap());
        }
        assert!(matches!(
            acyclic_pullback_check(&bundle(1), &TDivisor::zero(2), &TDivisor::zero(2)),
            Err(CohomologyError::FiberHypothesis { .. })
        ));
    }

    #[test]
    fn wrong_length_divisor_is_rejected() {
        let x = ToricVariety::new(p2());
        assert!(matches!(
            x.cohomology(&TDivisor::zero(4)),
            Err(CohomologyError::Fan(_))
        ));
    }
}
