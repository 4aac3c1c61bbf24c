//! Smooth complete fans and their toric divisors.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::FanError;
use crate::lattice::{dot, solve_integer, IntMatrix, IntVector, RationalPolyhedron, Sense};

/// Number of random rational points used by the completeness check.
pub const COVERAGE_SAMPLES: usize = 20;
const COVERAGE_SEED: u64 = 0x5eed_f00d;
const MAX_RAYS: usize = 63;

/// Raw fan description as read from a file or a generator; not yet validated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanData {
    pub name: String,
    pub rank: usize,
    pub rays: Vec<IntVector>,
    pub max_cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationFailure {
    Structure(String),
    NonPrimitiveRay { ray: usize },
    NotUnimodular { cone: usize, determinant: BigInt },
    BadIntersection { first: usize, second: usize },
    FacetNotShared { cone: usize, facet: Vec<usize>, count: usize },
    DisconnectedDualGraph { unreachable_cone: usize },
    UncoveredPoint { point: IntVector },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::Structure(msg) => write!(f, "malformed: {msg}"),
            ValidationFailure::NonPrimitiveRay { ray } => write!(f, "ray {ray} is not primitive"),
            ValidationFailure::NotUnimodular { cone, determinant } => {
                write!(f, "cone {cone} has determinant {determinant}, not a lattice basis")
            }
            ValidationFailure::BadIntersection { first, second } => {
                write!(f, "cones {first} and {second} do not meet in a common face")
            }
            ValidationFailure::FacetNotShared { cone, facet, count } => write!(
                f,
                "facet {facet:?} of cone {cone} lies in {count} maximal cones instead of 2"
            ),
            ValidationFailure::DisconnectedDualGraph { unreachable_cone } => write!(
                f,
                "dual graph is disconnected (cone {unreachable_cone} unreachable from cone 0)"
            ),
            ValidationFailure::UncoveredPoint { point } => {
                let p: Vec<String> = point.iter().map(|x| x.to_string()).collect();
                write!(f, "point ({}) lies in no maximal cone", p.join(","))
            }
        }
    }
}

/// Outcome of [`validate`]: every failed invariant with the offending indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn well_formed(&self) -> bool {
        !self.failures.iter().any(|f| matches!(f, ValidationFailure::Structure(_)))
    }

    pub fn primitive(&self) -> bool {
        self.well_formed()
            && !self
                .failures
                .iter()
                .any(|f| matches!(f, ValidationFailure::NonPrimitiveRay { .. }))
    }

    pub fn smooth(&self) -> bool {
        self.primitive()
            && !self
                .failures
                .iter()
                .any(|f| matches!(f, ValidationFailure::NotUnimodular { .. }))
    }

    pub fn face_property(&self) -> bool {
        self.smooth()
            && !self
                .failures
                .iter()
                .any(|f| matches!(f, ValidationFailure::BadIntersection { .. }))
    }

    pub fn complete(&self) -> bool {
        self.smooth()
            && !self.failures.iter().any(|f| {
                matches!(
                    f,
                    ValidationFailure::FacetNotShared { .. }
                        | ValidationFailure::DisconnectedDualGraph { .. }
                        | ValidationFailure::UncoveredPoint { .. }
                )
            })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.failures.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0u64, |m, &i| m | (1u64 << i))
}

fn indices_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1u64 << i) != 0).collect()
}

/// Dual basis of a unimodular cone: `duals[i]` pairs to 1 with ray `i` of the
/// cone and to 0 with the others.
fn dual_basis(rank: usize, rays: &[IntVector]) -> Option<Vec<IntVector>> {
    let transposed = IntMatrix::from_rows(rank, rays.to_vec()).ok()?;
    (0..rank)
        .map(|i| {
            let mut e = vec![BigInt::zero(); rank];
            e[i] = BigInt::one();
            solve_integer(&transposed, &e).ok().flatten()
        })
        .collect()
}

/// Checks every standing hypothesis on a fan: primitive generators,
/// unimodular maximal cones, the face-intersection property and completeness.
pub fn validate(data: &FanData) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = data.rank;
    let failures = &mut report.failures;

    if n == 0 {
        failures.push(ValidationFailure::Structure("rank must be at least 1".into()));
    }
    if data.rays.len() > MAX_RAYS {
        failures.push(ValidationFailure::Structure(format!(
            "{} rays exceeds the supported maximum of {MAX_RAYS}",
            data.rays.len()
        )));
    }
    for (i, r) in data.rays.iter().enumerate() {
        if r.len() != n {
            failures.push(ValidationFailure::Structure(format!(
                "ray {i} has {} entries, expected {n}",
                r.len()
            )));
        } else if r.iter().all(Zero::is_zero) {
            failures.push(ValidationFailure::Structure(format!("ray {i} is zero")));
        }
    }
    let mut seen_rays = HashMap::new();
    for (i, r) in data.rays.iter().enumerate() {
        if let Some(j) = seen_rays.insert(r.clone(), i) {
            failures.push(ValidationFailure::Structure(format!("rays {j} and {i} coincide")));
        }
    }
    if data.max_cones.is_empty() {
        failures.push(ValidationFailure::Structure("no maximal cones".into()));
    }
    let mut used = vec![false; data.rays.len()];
    let mut seen_cones = HashMap::new();
    for (c, cone) in data.max_cones.iter().enumerate() {
        if cone.len() != n {
            failures.push(ValidationFailure::Structure(format!(
                "cone {c} has {} rays, expected {n}",
                cone.len()
            )));
        }
        let mut distinct = HashSet::new();
        for &i in cone {
            if i >= data.rays.len() {
                failures.push(ValidationFailure::Structure(format!(
                    "cone {c} references missing ray {i}"
                )));
            } else {
                used[i] = true;
            }
            if !distinct.insert(i) {
                failures.push(ValidationFailure::Structure(format!("cone {c} repeats ray {i}")));
            }
        }
        let mut key = cone.clone();
        key.sort_unstable();
        if let Some(d) = seen_cones.insert(key, c) {
            failures.push(ValidationFailure::Structure(format!("cones {d} and {c} coincide")));
        }
    }
    for (i, u) in used.iter().enumerate() {
        if !u {
            failures.push(ValidationFailure::Structure(format!("ray {i} lies in no maximal cone")));
        }
    }
    if !report.failures.is_empty() {
        return report;
    }

    for (i, r) in data.rays.iter().enumerate() {
        if !crate::lattice::content(r).is_one() {
            report.failures.push(ValidationFailure::NonPrimitiveRay { ray: i });
        }
    }

    let mut duals: Vec<Option<Vec<IntVector>>> = Vec::with_capacity(data.max_cones.len());
    for (c, cone) in data.max_cones.iter().enumerate() {
        let gens: Vec<IntVector> = cone.iter().map(|&i| data.rays[i].clone()).collect();
        let det = IntMatrix::from_rows(n, gens.clone())
            .expect("cone rays have the ambient rank")
            .determinant();
        if det.abs().is_one() {
            duals.push(dual_basis(n, &gens));
        } else {
            report.failures.push(ValidationFailure::NotUnimodular {
                cone: c,
                determinant: det,
            });
            duals.push(None);
        }
    }
    let all_smooth = duals.iter().all(Option::is_some);

    if all_smooth {
        for a in 0..data.max_cones.len() {
            for b in a + 1..data.max_cones.len() {
                let ok = separated(
                    data,
                    &data.max_cones[a],
                    duals[a].as_ref().expect("smooth"),
                    &data.max_cones[b],
                );
                if !ok {
                    report
                        .failures
                        .push(ValidationFailure::BadIntersection { first: a, second: b });
                }
            }
        }
    }

    check_completeness(data, &duals, &mut report);
    report
}

/// Is there a character vanishing on the shared rays, positive on the rest
/// of `sigma` and negative on the rest of `tau`?
fn separated(data: &FanData, sigma: &[usize], sigma_duals: &[IntVector], tau: &[usize]) -> bool {
    let own: Vec<usize> = (0..sigma.len()).filter(|&k| !tau.contains(&sigma[k])).collect();
    let others: Vec<usize> = tau.iter().copied().filter(|i| !sigma.contains(i)).collect();
    // Parametrize the character by its values c_k on sigma's own rays.
    let mut poly = RationalPolyhedron::new(own.len());
    for j in 0..own.len() {
        let mut e = vec![BigInt::zero(); own.len()];
        e[j] = BigInt::one();
        poly.add(e, Sense::Ge, BigInt::one()).expect("dimension");
    }
    for &w in &others {
        let coords: IntVector = own
            .iter()
            .map(|&k| dot(&sigma_duals[k], &data.rays[w]))
            .collect();
        poly.add(coords, Sense::Le, -BigInt::one()).expect("dimension");
    }
    poly.is_feasible()
}

fn check_completeness(data: &FanData, duals: &[Option<Vec<IntVector>>], report: &mut ValidationReport) {
    let cones = &data.max_cones;
    let mut facet_owners: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (c, cone) in cones.iter().enumerate() {
        for skip in 0..cone.len() {
            let mut facet: Vec<usize> = cone
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &i)| i)
                .collect();
            facet.sort_unstable();
            facet_owners.entry(facet).or_default().push(c);
        }
    }
    let mut bad: Vec<(&Vec<usize>, &Vec<usize>)> =
        facet_owners.iter().filter(|(_, o)| o.len() != 2).collect();
    bad.sort();
    for (facet, owners) in bad {
        report.failures.push(ValidationFailure::FacetNotShared {
            cone: owners[0],
            facet: facet.clone(),
            count: owners.len(),
        });
    }

    let mut adjacency = vec![Vec::new(); cones.len()];
    for owners in facet_owners.values() {
        for &a in owners {
            for &b in owners {
                if a != b {
                    adjacency[a].push(b);
                }
            }
        }
    }
    let mut reached = vec![false; cones.len()];
    let mut queue = VecDeque::from([0usize]);
    reached[0] = true;
    while let Some(c) = queue.pop_front() {
        for &d in &adjacency[c] {
            if !reached[d] {
                reached[d] = true;
                queue.push_back(d);
            }
        }
    }
    if let Some(c) = reached.iter().position(|r| !r) {
        report
            .failures
            .push(ValidationFailure::DisconnectedDualGraph { unreachable_cone: c });
    }

    if duals.iter().any(Option::is_none) {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(COVERAGE_SEED);
    for _ in 0..COVERAGE_SAMPLES {
        let point: IntVector = (0..data.rank)
            .map(|_| BigInt::from(rng.gen_range(-1000i64..=1000)))
            .collect();
        let covered = duals.iter().flatten().any(|d| {
            d.iter().all(|m| !dot(m, &point).is_negative())
        });
        if !covered {
            report.failures.push(ValidationFailure::UncoveredPoint { point });
        }
    }
}

/// A torus-invariant divisor `sum_i coeffs[i] * T_i`, indexed by the rays
/// of some fan.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TDivisor {
    coeffs: IntVector,
}

impl TDivisor {
    pub fn new(coeffs: IntVector) -> Self {
        TDivisor { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        TDivisor::new(crate::lattice::int_vector(coeffs))
    }

    pub fn zero(len: usize) -> Self {
        TDivisor::new(vec![BigInt::zero(); len])
    }

    /// `k * T_ray` on a fan with `len` rays.
    pub fn ray(len: usize, ray: usize, k: impl Into<BigInt>) -> Self {
        let mut d = TDivisor::zero(len);
        d.coeffs[ray] = k.into();
        d
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> IntVector {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, k: &BigInt) -> TDivisor {
        TDivisor::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

impl Add<&TDivisor> for &TDivisor {
    type Output = TDivisor;

    fn add(self, rhs: &TDivisor) -> TDivisor {
        assert_eq!(self.len(), rhs.len(), "divisors on different fans");
        TDivisor::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&TDivisor> for &TDivisor {
    type Output = TDivisor;

    fn sub(self, rhs: &TDivisor) -> TDivisor {
        assert_eq!(self.len(), rhs.len(), "divisors on different fans");
        TDivisor::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &TDivisor {
    type Output = TDivisor;

    fn neg(self) -> TDivisor {
        TDivisor::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for TDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

/// Picard basis attached to a maximal cone: the rays outside the cone
/// give a basis of `Pic(X)` and every cone ray's divisor is an integer
/// combination of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PicBasis {
    pub base_cone: usize,
    pub basis_rays: Vec<usize>,
    pub free_rays: Vec<usize>,
    /// Row `i` expresses `T_{basis_rays[i]}` in the free-ray divisors.
    pub relation_matrix: IntMatrix,
    /// Characters dual to `basis_rays`.
    pub dual_characters: Vec<IntVector>,
}

impl PicBasis {
    pub fn picard_number(&self) -> usize {
        self.free_rays.len()
    }
}

/// `sum v_p = sum a_i v'_i` for a primitive collection `{v_p}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveRelation {
    pub collection: Vec<usize>,
    pub support_cone_rays: Vec<usize>,
    pub coefficients: Vec<BigInt>,
}

/// A validated smooth complete fan.
#[derive(Clone, Debug)]
pub struct Fan {
    name: String,
    rank: usize,
    rays: Vec<IntVector>,
    max_cones: Vec<Vec<usize>>,
    cone_masks: Vec<u64>,
    cone_duals: Vec<Vec<IntVector>>,
    faces: Vec<Vec<usize>>,
    pic: PicBasis,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.rank == other.rank
            && self.rays == other.rays
            && self.max_cones == other.max_cones
    }
}

impl Eq for Fan {}

impl TryFrom<FanData> for Fan {
    type Error = FanError;

    fn try_from(data: FanData) -> Result<Self, FanError> {
        Fan::new(data)
    }
}

impl Fan {
    /// Validates and freezes a fan. Cone ray lists are kept in input order.
    pub fn new(data: FanData) -> Result<Fan, FanError> {
        let report = validate(&data);
        if !report.is_valid() {
            return Err(FanError::Invalid {
                name: data.name,
                report: Box::new(report),
            });
        }
        let FanData {
            name,
            rank,
            rays,
            max_cones,
        } = data;
        let cone_masks: Vec<u64> = max_cones.iter().map(|c| mask_of(c)).collect();
        let cone_duals: Vec<Vec<IntVector>> = max_cones
            .iter()
            .map(|c| {
                let gens: Vec<IntVector> = c.iter().map(|&i| rays[i].clone()).collect();
                dual_basis(rank, &gens).expect("validated cones are unimodular")
            })
            .collect();
        let mut face_masks: HashSet<u64> = HashSet::new();
        for &m in &cone_masks {
            // every subset of a simplicial cone is a face
            let mut sub = m;
            loop {
                face_masks.insert(sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & m;
            }
        }
        let mut faces: Vec<Vec<usize>> = face_masks.into_iter().map(indices_of).collect();
        faces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut fan = Fan {
            name,
            rank,
            rays,
            max_cones,
            cone_masks,
            cone_duals,
            faces,
            pic: PicBasis {
                base_cone: 0,
                basis_rays: Vec::new(),
                free_rays: Vec::new(),
                relation_matrix: IntMatrix::zeros(0, 0),
                dual_characters: Vec::new(),
            },
        };
        fan.pic = fan.pic_basis(0)?;
        Ok(fan)
    }

    pub fn from_i64(name: &str, rays: &[&[i64]], max_cones: &[&[usize]]) -> Result<Fan, FanError> {
        let rank = rays.first().map_or(0, |r| r.len());
        Fan::new(FanData {
            name: name.to_string(),
            rank,
            rays: rays.iter().map(|r| crate::lattice::int_vector(r)).collect(),
            max_cones: max_cones.iter().map(|c| c.to_vec()).collect(),
        })
    }

    pub fn to_data(&self) -> FanData {
        FanData {
            name: self.name.clone(),
            rank: self.rank,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Fan {
        self.name = name.into();
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &IntVector {
        &self.rays[i]
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// All cones as sorted ray-index sets, the zero cone first.
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn picard_number(&self) -> usize {
        self.rays.len() - self.rank
    }

    /// Picard basis for `max_cones[0]`.
    pub fn default_pic(&self) -> &PicBasis {
        &self.pic
    }

    pub fn is_face(&self, rays: &[usize]) -> bool {
        self.is_face_mask(mask_of(rays))
    }

    pub(crate) fn is_face_mask(&self, mask: u64) -> bool {
        self.cone_masks.iter().any(|&c| c & mask == mask)
    }

    pub fn check_divisor(&self, d: &TDivisor) -> Result<(), FanError> {
        if d.len() == self.rays.len() {
            Ok(())
        } else {
            Err(FanError::WrongDivisorLength {
                expected: self.rays.len(),
                found: d.len(),
            })
        }
    }

    /// `div(chi^m) = sum_i <m, v_i> T_i`.
    pub fn principal_divisor(&self, m: &[BigInt]) -> TDivisor {
        TDivisor::new(self.rays.iter().map(|v| dot(m, v)).collect())
    }

    /// `-K_X = T_1 + ... + T_l`.
    pub fn anticanonical_divisor(&self) -> TDivisor {
        TDivisor::new(vec![BigInt::one(); self.rays.len()])
    }

    pub fn canonical_class(&self) -> TDivisor {
        -&self.anticanonical_divisor()
    }

    pub fn euler_characteristic(&self) -> usize {
        self.max_cones.len()
    }

    /// Number of cones of each dimension `0..=rank`.
    pub fn cone_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.rank + 1];
        for f in &self.faces {
            counts[f.len()] += 1;
        }
        counts
    }

    /// Coefficients of `P_X(t)` in powers `t^0 .. t^{2n}`; odd ones vanish.
    pub fn poincare_polynomial(&self) -> Vec<i64> {
        let n = self.rank;
        let d = self.cone_counts();
        let mut poly = vec![0i64; 2 * n + 1];
        for k in 0..=n {
            let mut b = 0i64;
            for i in k..=n {
                let term = binomial(i as u64, k as u64) * d[n - i] as i64;
                if (i - k) % 2 == 0 {
                    b += term;
                } else {
                    b -= term;
                }
            }
            poly[2 * k] = b;
        }
        poly
    }

    pub fn pic_basis(&self, base_cone: usize) -> Result<PicBasis, FanError> {
        let cone = self.max_cones.get(base_cone).ok_or(FanError::NoSuchCone {
            index: base_cone,
            count: self.max_cones.len(),
        })?;
        let basis_rays = cone.clone();
        let free_rays: Vec<usize> = (0..self.rays.len()).filter(|i| !cone.contains(i)).collect();
        let duals = self.cone_duals[base_cone].clone();
        let mut relation = IntMatrix::zeros(basis_rays.len(), free_rays.len());
        for (i, m) in duals.iter().enumerate() {
            for (j, &f) in free_rays.iter().enumerate() {
                relation.set(i, j, -dot(m, &self.rays[f]));
            }
        }
        Ok(PicBasis {
            base_cone,
            basis_rays,
            free_rays,
            relation_matrix: relation,
            dual_characters: duals,
        })
    }

    /// The linearly equivalent divisor vanishing on the basis-cone rays.
    pub fn canonical_representation(&self, pic: &PicBasis, d: &TDivisor) -> Result<TDivisor, FanError> {
        self.check_divisor(d)?;
        let mut m = vec![BigInt::zero(); self.rank];
        for (k, &b) in pic.basis_rays.iter().enumerate() {
            for (x, y) in m.iter_mut().zip(&pic.dual_characters[k]) {
                *x += &d.coeffs[b] * y;
            }
        }
        Ok(d - &self.principal_divisor(&m))
    }

    /// Canonical representation in the default Picard basis.
    pub fn canonical(&self, d: &TDivisor) -> Result<TDivisor, FanError> {
        self.canonical_representation(&self.pic, d)
    }

    pub fn linearly_equivalent(&self, a: &TDivisor, b: &TDivisor) -> Result<bool, FanError> {
        Ok(self.canonical(a)? == self.canonical(b)?)
    }

    /// Free-ray coefficients of the canonical representation.
    pub fn picard_coordinates(&self, pic: &PicBasis, d: &TDivisor) -> Result<IntVector, FanError> {
        let c = self.canonical_representation(pic, d)?;
        Ok(pic.free_rays.iter().map(|&j| c.coeffs[j].clone()).collect())
    }

    pub fn from_picard_coordinates(&self, pic: &PicBasis, coords: &[BigInt]) -> TDivisor {
        let mut d = TDivisor::zero(self.rays.len());
        for (&j, c) in pic.free_rays.iter().zip(coords) {
            d.coeffs[j] = c.clone();
        }
        d
    }

    /// Applies the relation rows as substitutions for the basis-ray divisors.
    pub fn substitute_relations(&self, pic: &PicBasis, d: &TDivisor) -> TDivisor {
        let mut out = d.clone();
        for (i, &b) in pic.basis_rays.iter().enumerate() {
            let c = std::mem::take(&mut out.coeffs[b]);
            for (j, &f) in pic.free_rays.iter().enumerate() {
                out.coeffs[f] += &c * &pic.relation_matrix[(i, j)];
            }
        }
        out
    }

    /// Coordinates of `point` in the ray basis of a maximal cone.
    pub fn cone_coordinates(&self, cone: usize, point: &[BigInt]) -> IntVector {
        self.cone_duals[cone].iter().map(|m| dot(m, point)).collect()
    }

    /// Maximal cone containing `point`, with its coordinates in that cone's rays.
    pub fn locate(&self, point: &[BigInt]) -> Option<(usize, IntVector)> {
        self.cone_duals.iter().enumerate().find_map(|(c, duals)| {
            let coords: IntVector = duals.iter().map(|m| dot(m, point)).collect();
            coords.iter().all(|x| !x.is_negative()).then_some((c, coords))
        })
    }

    /// Batyrev's primitive collections with their primitive relations.
    pub fn primitive_collections(&self) -> Vec<PrimitiveRelation> {
        let s = self.rays.len();
        let mut found: Vec<u64> = Vec::new();
        let mut out = Vec::new();
        for size in 2..=s {
            for mask in subsets_of_size(s, size) {
                if found.iter().any(|&f| f & mask == f) {
                    continue;
                }
                if self.is_face_mask(mask) {
                    continue;
                }
                found.push(mask);
                let collection = indices_of(mask);
                let mut sum = vec![BigInt::zero(); self.rank];
                for &p in &collection {
                    for (x, y) in sum.iter_mut().zip(&self.rays[p]) {
                        *x += y;
                    }
                }
                let (cone, coords) = self.locate(&sum).expect("complete fan covers every point");
                let mut support = Vec::new();
                let mut coefficients = Vec::new();
                let mut pairs: Vec<(usize, BigInt)> = self.max_cones[cone]
                    .iter()
                    .copied()
                    .zip(coords)
                    .filter(|(_, a)| a.is_positive())
                    .collect();
                pairs.sort();
                for (r, a) in pairs {
                    support.push(r);
                    coefficients.push(a);
                }
                out.push(PrimitiveRelation {
                    collection,
                    support_cone_rays: support,
                    coefficients,
                });
            }
        }
        out
    }
}

/// All `size`-element subsets of `0..n` as bitmasks, in increasing order.
fn subsets_of_size(n: usize, size: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let mut next = if size == 0 { 0 } else { (1u64 << size) - 1 };
    let mut done = size > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = next;
        if cur == 0 {
            done = true;
            return Some(0);
        }
        // Gosper's hack
        let c = cur & cur.wrapping_neg();
        let r = cur + c;
        next = (((r ^ cur) >> 2) / c) | r;
        if next >= limit {
            done = true;
        }
        Some(cur)
    })
}

pub(crate) fn binomial(n: u64, k: u64) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}
