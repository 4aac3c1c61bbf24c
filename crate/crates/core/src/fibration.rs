//! Toric fiber bundles `X -> Z` with fiber `F`.
//!
//! In the lattice basis made of a fiber cone and a base cone, the total fan
//! has rays `(v_i, 0)` for the fiber rays, `(0, e_i)` for the rays of the
//! chosen base cone, and `(sum_k g_k^j v_k, e_j)` for every other base ray,
//! where `g` is the integer twist matrix. Maximal cones are all sums of a
//! fiber maximal cone with a lifted base maximal cone.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cohomology::ToricVariety;
use crate::error::{FanError, FibrationError};
use crate::fan::{Fan, FanData, PicBasis, TDivisor};
use crate::lattice::{rank, IntMatrix, IntVector};

/// Where the fiber and base rays sit among the total rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayMap {
    /// `fiber_rays[i]` is the total ray lifted from fiber ray `i`.
    pub fiber_rays: Vec<usize>,
    /// `base_rays[j]` is the total ray lifted from base ray `j`.
    pub base_rays: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FibrationBundle {
    fiber: ToricVariety,
    base: ToricVariety,
    total: ToricVariety,
    fiber_pic: PicBasis,
    base_pic: PicBasis,
    total_pic: PicBasis,
    twist: IntMatrix,
    ray_map: RayMap,
}

/// Assembles the total fan from fiber, base and twist data and validates it.
///
/// `twist` has one row per ray of the fiber basis cone and one column per
/// base ray outside the base basis cone (in increasing ray order).
pub fn build_fibration(
    fiber: Fan,
    base: Fan,
    twist: IntMatrix,
    fiber_basis_cone: usize,
    base_basis_cone: usize,
) -> Result<FibrationBundle, FibrationError> {
    let fiber_pic = fiber.pic_basis(fiber_basis_cone)?;
    let base_pic = base.pic_basis(base_basis_cone)?;
    let d = fiber.rank();
    let m = base.rank();
    if twist.rows() != d || twist.cols() != base_pic.free_rays.len() {
        return Err(FibrationError::TwistShape {
            rows: twist.rows(),
            cols: twist.cols(),
            expected_rows: d,
            expected_cols: base_pic.free_rays.len(),
        });
    }

    let mut rays: Vec<IntVector> = Vec::with_capacity(fiber.num_rays() + base.num_rays());
    for v in fiber.rays() {
        let mut r = v.clone();
        r.resize(d + m, BigInt::zero());
        rays.push(r);
    }
    for (j, w) in base.rays().iter().enumerate() {
        let mut r = vec![BigInt::zero(); d];
        if let Some(col) = base_pic.free_rays.iter().position(|&f| f == j) {
            for (k, &b) in fiber_pic.basis_rays.iter().enumerate() {
                let g = &twist[(k, col)];
                for (x, y) in r.iter_mut().zip(fiber.ray(b)) {
                    *x += g * y;
                }
            }
        }
        r.extend(w.iter().cloned());
        rays.push(r);
    }
    let ray_map = RayMap {
        fiber_rays: (0..fiber.num_rays()).collect(),
        base_rays: (fiber.num_rays()..fiber.num_rays() + base.num_rays()).collect(),
    };

    let lift = |nu: usize, tau: usize| -> Vec<usize> {
        fiber.max_cones()[nu]
            .iter()
            .map(|&i| ray_map.fiber_rays[i])
            .chain(base.max_cones()[tau].iter().map(|&j| ray_map.base_rays[j]))
            .collect()
    };
    let mut cones = vec![lift(fiber_basis_cone, base_basis_cone)];
    for tau in 0..base.max_cones().len() {
        for nu in 0..fiber.max_cones().len() {
            if (nu, tau) != (fiber_basis_cone, base_basis_cone) {
                cones.push(lift(nu, tau));
            }
        }
    }
    let name = if twist.is_zero() {
        format!("{}x{}", fiber.name(), base.name())
    } else {
        let rows: Vec<String> = (0..twist.rows())
            .map(|i| {
                let row: Vec<String> = (0..twist.cols()).map(|j| twist[(i, j)].to_string()).collect();
                format!("[{}]", row.join(", "))
            })
            .collect();
        format!("{}-bundle over {} twist [{}]", fiber.name(), base.name(), rows.join(", "))
    };
    let total = Fan::new(FanData {
        name,
        rank: d + m,
        rays,
        max_cones: cones,
    })
    .map_err(FibrationError::InvalidTotal)?;
    let total_pic = total.pic_basis(0)?;

    Ok(FibrationBundle {
        fiber: ToricVariety::new(fiber),
        base: ToricVariety::new(base),
        total: ToricVariety::new(total),
        fiber_pic,
        base_pic,
        total_pic,
        twist,
        ray_map,
    })
}

impl FibrationBundle {
    pub fn fiber(&self) -> &Fan {
        self.fiber.fan()
    }

    pub fn base(&self) -> &Fan {
        self.base.fan()
    }

    pub fn total(&self) -> &Fan {
        self.total.fan()
    }

    pub fn fiber_variety(&self) -> &ToricVariety {
        &self.fiber
    }

    pub fn base_variety(&self) -> &ToricVariety {
        &self.base
    }

    pub fn total_variety(&self) -> &ToricVariety {
        &self.total
    }

    pub fn fiber_pic(&self) -> &PicBasis {
        &self.fiber_pic
    }

    pub fn base_pic(&self) -> &PicBasis {
        &self.base_pic
    }

    /// Picard basis of the total space: fiber free rays and base free rays.
    pub fn total_pic(&self) -> &PicBasis {
        &self.total_pic
    }

    pub fn twist(&self) -> &IntMatrix {
        &self.twist
    }

    pub fn ray_map(&self) -> &RayMap {
        &self.ray_map
    }

    /// Renames the total fan (the pattern cache is rebuilt lazily).
    pub fn with_total_name(mut self, name: impl Into<String>) -> Self {
        let fan = self.total.into_fan().with_name(name);
        self.total = ToricVariety::new(fan);
        self
    }

    /// `phi^* O_Z(H)`: base coefficients copied onto the lifted base rays.
    pub fn pullback_from_base(&self, h: &TDivisor) -> Result<TDivisor, FanError> {
        self.base().check_divisor(h)?;
        let mut coeffs = vec![BigInt::zero(); self.total().num_rays()];
        for (j, c) in h.coeffs().iter().enumerate() {
            coeffs[self.ray_map.base_rays[j]] = c.clone();
        }
        Ok(TDivisor::new(coeffs))
    }

    /// `L|_F` as a canonical representation on the fiber.
    ///
    /// Base-ray divisors are pullbacks and restrict trivially, so any
    /// representation of `L` may be passed in.
    pub fn restrict_to_fiber(&self, l: &TDivisor) -> Result<TDivisor, FanError> {
        self.total().check_divisor(l)?;
        let raw = self.fiber_part(l);
        self.fiber().canonical_representation(&self.fiber_pic, &raw)
    }

    /// The fiber-ray coordinates of a total-space vector, verbatim.
    pub fn fiber_part(&self, r: &TDivisor) -> TDivisor {
        TDivisor::new(
            self.ray_map
                .fiber_rays
                .iter()
                .map(|&i| r.coeffs()[i].clone())
                .collect(),
        )
    }

    /// The base-ray coordinates of a total-space vector, verbatim.
    pub fn base_part(&self, r: &TDivisor) -> TDivisor {
        TDivisor::new(
            self.ray_map
                .base_rays
                .iter()
                .map(|&j| r.coeffs()[j].clone())
                .collect(),
        )
    }

    /// The line bundle `O_X(sum a_i F_i)` whose restriction to the fiber is
    /// `O_F(sum a_i F~_i)`, written on the fiber free rays.
    pub fn lift_from_fiber(&self, l: &TDivisor) -> Result<TDivisor, FanError> {
        let canon = self.fiber().canonical_representation(&self.fiber_pic, l)?;
        let mut coeffs = vec![BigInt::zero(); self.total().num_rays()];
        for (i, c) in canon.coeffs().iter().enumerate() {
            coeffs[self.ray_map.fiber_rays[i]] = c.clone();
        }
        Ok(TDivisor::new(coeffs))
    }

    /// Base half `sum beta_j Z~_j` of the total-space Picard coordinates.
    pub fn base_component(&self, l: &TDivisor) -> Result<TDivisor, FanError> {
        let canon = self.total().canonical_representation(&self.total_pic, l)?;
        Ok(self.base_part(&canon))
    }

    /// Twist correction `D^g = sum_j (sum_k a_k g_k^j) Z~_j` on the base,
    /// where `a_k` are the coefficients of `r_fiber` on the fiber basis rays.
    pub fn twist_correction(&self, r_fiber: &TDivisor) -> TDivisor {
        let mut coeffs = vec![BigInt::zero(); self.base().num_rays()];
        for (col, &j) in self.base_pic.free_rays.iter().enumerate() {
            for (k, &b) in self.fiber_pic.basis_rays.iter().enumerate() {
                coeffs[j] += &r_fiber.coeffs()[b] * &self.twist[(k, col)];
            }
        }
        TDivisor::new(coeffs)
    }

    /// `rank K_0(X) = rank K_0(F) * rank K_0(Z)` and `P_X = P_F * P_Z`.
    pub fn rank_k0_check(&self) -> bool {
        let counts = self.total().euler_characteristic()
            == self.fiber().euler_characteristic() * self.base().euler_characteristic();
        counts && self.total().poincare_polynomial()
            == poly_mul(&self.fiber().poincare_polynomial(), &self.base().poincare_polynomial())
    }
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// A bundle recovered from a fan, plus how its total rays map back.
#[derive(Clone, Debug)]
pub struct VerifiedFibration {
    pub bundle: FibrationBundle,
    /// `input_rays[i]` is the index in the input fan of bundle total ray `i`.
    pub input_rays: Vec<usize>,
}

/// Checks that `fiber_rays` cut out a toric fiber-bundle structure on `total`
/// and recovers the fiber, the base and the twist.
///
/// Coordinates are taken in the basis of `total.max_cones()[0]`, whose fiber
/// and transversal parts become the basis cones of the recovered fiber and
/// base.
pub fn verify_fibration(total: &Fan, fiber_rays: &[usize]) -> Result<VerifiedFibration, FibrationError> {
    let n = total.rank();
    let subset: BTreeSet<usize> = fiber_rays.iter().copied().collect();
    if subset.iter().any(|&i| i >= total.num_rays()) {
        return Err(FibrationError::DegenerateSubspace { rank: 0, ambient: n });
    }
    let gens: Vec<IntVector> = subset.iter().map(|&i| total.ray(i).clone()).collect();
    let d = if gens.is_empty() {
        0
    } else {
        rank(&IntMatrix::from_rows(n, gens.clone())?)
    };
    if d == 0 || d >= n {
        return Err(FibrationError::DegenerateSubspace { rank: d, ambient: n });
    }
    for i in 0..total.num_rays() {
        if subset.contains(&i) {
            continue;
        }
        let mut with = gens.clone();
        with.push(total.ray(i).clone());
        if rank(&IntMatrix::from_rows(n, with)?) == d {
            return Err(FibrationError::UnlistedFiberRay { ray: i });
        }
    }

    // every maximal cone must split as (d fiber rays) + (n - d transversal rays)
    let mut splits: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (c, cone) in total.max_cones().iter().enumerate() {
        let nu: Vec<usize> = cone.iter().copied().filter(|i| subset.contains(i)).collect();
        let tau: Vec<usize> = cone.iter().copied().filter(|i| !subset.contains(i)).collect();
        if nu.len() != d {
            return Err(FibrationError::Decomposition { cone: c });
        }
        splits.push((nu, tau));
    }

    let fiber_idx: Vec<usize> = subset.iter().copied().collect();
    let base_idx: Vec<usize> = (0..total.num_rays()).filter(|i| !subset.contains(i)).collect();
    let (nu0, tau0) = splits[0].clone();
    // coordinates in the basis nu0 ++ tau0
    let cone0 = &total.max_cones()[0];
    let order: Vec<usize> = nu0
        .iter()
        .chain(tau0.iter())
        .map(|r| cone0.iter().position(|x| x == r).expect("ray of cone 0"))
        .collect();
    let coords = |v: &IntVector| -> IntVector {
        let raw = total.cone_coordinates(0, v);
        order.iter().map(|&k| raw[k].clone()).collect()
    };

    let local = |list: &[usize], r: usize| list.iter().position(|&x| x == r).expect("listed ray");
    let mut fiber_cones: Vec<Vec<usize>> = Vec::new();
    let mut base_cones: Vec<Vec<usize>> = Vec::new();
    let mut seen_f = BTreeSet::new();
    let mut seen_b = BTreeSet::new();
    for (nu, tau) in &splits {
        let f: Vec<usize> = nu.iter().map(|&r| local(&fiber_idx, r)).collect();
        let b: Vec<usize> = tau.iter().map(|&r| local(&base_idx, r)).collect();
        let mut fk = f.clone();
        fk.sort_unstable();
        let mut bk = b.clone();
        bk.sort_unstable();
        if seen_f.insert(fk) {
            fiber_cones.push(f);
        }
        if seen_b.insert(bk) {
            base_cones.push(b);
        }
    }

    let fiber = Fan::new(FanData {
        name: format!("{} fiber", total.name()),
        rank: d,
        rays: fiber_idx.iter().map(|&i| coords(total.ray(i))[..d].to_vec()).collect(),
        max_cones: fiber_cones.clone(),
    })
    .map_err(FibrationError::InvalidFiber)?;
    let base = Fan::new(FanData {
        name: format!("{} base", total.name()),
        rank: n - d,
        rays: base_idx.iter().map(|&i| coords(total.ray(i))[d..].to_vec()).collect(),
        max_cones: base_cones.clone(),
    })
    .map_err(|e| FibrationError::InvalidBase(e.to_string()))?;

    if total.max_cones().len() != fiber_cones.len() * base_cones.len() {
        return Err(FibrationError::ConeCount {
            total: total.max_cones().len(),
            fiber: fiber_cones.len(),
            base: base_cones.len(),
        });
    }

    let base_pic = base.pic_basis(0)?;
    let mut twist = IntMatrix::zeros(d, base_pic.free_rays.len());
    for (col, &j) in base_pic.free_rays.iter().enumerate() {
        let c = coords(total.ray(base_idx[j]));
        for k in 0..d {
            twist.set(k, col, c[k].clone());
        }
    }

    let bundle = build_fibration(fiber, base, twist, 0, 0)?.with_total_name(total.name());
    let input_rays: Vec<usize> = fiber_idx.iter().chain(base_idx.iter()).copied().collect();

    // the rebuilt fan must be the input fan in the new coordinates
    for (i, &src) in input_rays.iter().enumerate() {
        if bundle.total().ray(i) != &coords(total.ray(src)) {
            return Err(FibrationError::Decomposition { cone: 0 });
        }
    }
    let as_input = |cones: &[Vec<usize>], map: Option<&[usize]>| -> BTreeSet<Vec<usize>> {
        cones
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.iter().map(|&r| map.map_or(r, |m| m[r])).collect();
                v.sort_unstable();
                v
            })
            .collect()
    };
    if as_input(bundle.total().max_cones(), Some(&input_rays)) != as_input(total.max_cones(), None) {
        return Err(FibrationError::ConeCount {
            total: total.max_cones().len(),
            fiber: fiber_cones.len(),
            base: base_cones.len(),
        });
    }
    Ok(VerifiedFibration { bundle, input_rays })
}
