//! Exceptional and strongly exceptional collections of line bundles, and the
//! block construction on fibrations: interleave a fiber collection with a
//! base collection twisted by growing multiples of a base divisor.

use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::cohomology::ToricVariety;
use crate::error::CollectionError;
use crate::fan::{Fan, TDivisor};
use crate::fibration::FibrationBundle;

/// Default upper bound for the twist multiplier search.
pub const DEFAULT_T_CAP: u32 = 8;

/// Label attached to every constructed collection: fullness is not computed.
pub const FULLNESS_NOTE: &str = "full by theorem, conditional on fullness of both input collections";

/// An ordered list of pairwise distinct line bundles on one fan, stored as
/// canonical representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedCollection {
    fan: Fan,
    classes: Vec<TDivisor>,
}

impl OrderedCollection {
    pub fn new(fan: &Fan, classes: Vec<TDivisor>) -> Result<Self, CollectionError> {
        if classes.is_empty() {
            return Err(CollectionError::Empty);
        }
        let canon = classes
            .iter()
            .map(|d| fan.canonical(d))
            .collect::<Result<Vec<_>, _>>()?;
        for k in 0..canon.len() {
            if let Some(j) = (0..k).find(|&j| canon[j] == canon[k]) {
                return Err(CollectionError::Duplicate { first: j, second: k });
            }
        }
        Ok(OrderedCollection {
            fan: fan.clone(),
            classes: canon,
        })
    }

    pub fn from_i64(fan: &Fan, classes: &[&[i64]]) -> Result<Self, CollectionError> {
        OrderedCollection::new(fan, classes.iter().map(|c| TDivisor::from_i64(c)).collect())
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn classes(&self) -> &[TDivisor] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

impl fmt::Display for OrderedCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectionReport {
    pub is_exceptional: bool,
    pub is_strongly_exceptional: bool,
    pub length_equals_k0_rank: bool,
    pub gram_unitriangular: bool,
    pub length: usize,
    /// Number of maximal cones, the rank of the Grothendieck group.
    pub k0_rank: usize,
    /// `ext[j][k][i] = dim Ext^i(E_j, E_k) = h^i(E_k - E_j)`.
    pub ext: Vec<Vec<Vec<u64>>>,
    /// `gram[j][k] = chi(E_j, E_k)`.
    pub gram: Vec<Vec<i64>>,
}

impl CollectionReport {
    /// Total dimension of the Ext groups that must vanish but do not.
    pub fn obstruction(&self) -> u64 {
        let n = self.length;
        let mut total = 0u64;
        for j in 0..n {
            for k in 0..n {
                let dims = &self.ext[j][k];
                total += match j.cmp(&k) {
                    std::cmp::Ordering::Greater => dims.iter().sum::<u64>(),
                    _ => dims.iter().skip(1).sum::<u64>(),
                };
            }
        }
        total
    }

    /// Verdict lines followed by the Gram matrix.
    pub fn render_text(&self) -> String {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let mut out = format!(
            "exceptional: {}\nstrongly exceptional: {}\nlength: {} (k0 rank {}, match: {})\ngram unitriangular: {}\ngram:\n",
            yn(self.is_exceptional),
            yn(self.is_strongly_exceptional),
            self.length,
            self.k0_rank,
            yn(self.length_equals_k0_rank),
            yn(self.gram_unitriangular),
        );
        for row in &self.gram {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>4}")).collect();
            out.push_str(&cells.join(""));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for CollectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

/// Runs every Ext computation for `c` on `fan`.
pub fn check_collection(fan: &Fan, c: &OrderedCollection) -> Result<CollectionReport, CollectionError> {
    check_collection_on(&ToricVariety::new(fan.clone()), c)
}

/// As [`check_collection`], reusing the variety's sign-pattern cache.
pub fn check_collection_on(
    x: &ToricVariety,
    c: &OrderedCollection,
) -> Result<CollectionReport, CollectionError> {
    let fan = x.fan();
    for d in c.classes() {
        fan.check_divisor(d)?;
    }
    let n = c.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).collect();
    let dims: Vec<Vec<u64>> = cells
        .par_iter()
        .map(|&(j, k)| x.dims(&(&c.classes()[k] - &c.classes()[j])))
        .collect::<Result<_, _>>()?;
    let ext: Vec<Vec<Vec<u64>>> = dims.chunks(n).map(|row| row.to_vec()).collect();
    let chi = |v: &[u64]| -> i64 {
        v.iter()
            .enumerate()
            .map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    };
    let gram: Vec<Vec<i64>> = ext.iter().map(|row| row.iter().map(|v| chi(v)).collect()).collect();

    let simple = (0..n).all(|j| ext[j][j][0] == 1 && ext[j][j].iter().skip(1).all(|&d| d == 0));
    let backward = (0..n).all(|k| (0..k).all(|j| ext[k][j].iter().all(|&d| d == 0)));
    let forward = (0..n).all(|j| (j..n).all(|k| ext[j][k].iter().skip(1).all(|&d| d == 0)));
    let is_exceptional = simple && backward;
    let k0_rank = fan.max_cones().len();
    let gram_unitriangular =
        (0..n).all(|j| gram[j][j] == 1) && (0..n).all(|k| (0..k).all(|j| gram[k][j] == 0));
    Ok(CollectionReport {
        is_exceptional,
        is_strongly_exceptional: is_exceptional && forward,
        length_equals_k0_rank: n == k0_rank,
        gram_unitriangular,
        length: n,
        k0_rank,
        ext,
        gram,
    })
}

/// Tensors every member of `c` with `O(l)`.
pub fn global_twist(c: &OrderedCollection, l: &TDivisor) -> Result<OrderedCollection, CollectionError> {
    let classes = c.classes().iter().map(|d| d + l).collect();
    OrderedCollection::new(c.fan(), classes)
}

/// One value of the twist multiplier together with its verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionAttempt {
    pub t: u32,
    pub collection: OrderedCollection,
    pub report: CollectionReport,
}

/// A verified strongly exceptional collection on a fibration total space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub t: u32,
    pub collection: OrderedCollection,
    pub report: CollectionReport,
    /// `u * v` equals the number of maximal cones of the total fan.
    pub length_accounting: bool,
    pub fullness: &'static str,
}

/// The block collection for a fixed `D`: block `k = 1..u` consists of
/// `pullback(E_j + k D) + lift(L_k)` for `j = 1..v`.
pub fn block_collection(
    bundle: &FibrationBundle,
    fiber_coll: &OrderedCollection,
    base_coll: &OrderedCollection,
    d: &TDivisor,
) -> Result<OrderedCollection, CollectionError> {
    let mut classes = Vec::with_capacity(fiber_coll.len() * base_coll.len());
    for (k0, l) in fiber_coll.classes().iter().enumerate() {
        let lifted = bundle.lift_from_fiber(l)?;
        let shift = d.scaled(&BigInt::from(k0 + 1));
        for e in base_coll.classes() {
            let pulled = bundle.pullback_from_base(&(e + &shift))?;
            classes.push(&pulled + &lifted);
        }
    }
    OrderedCollection::new(bundle.total(), classes)
}

/// Searches `t = 1..=t_cap` for a strongly exceptional block collection
/// with `D = t * d_step`.
pub fn construct_fibered_collection(
    bundle: &FibrationBundle,
    fiber_coll: &OrderedCollection,
    base_coll: &OrderedCollection,
    d_step: &TDivisor,
    t_cap: u32,
) -> Result<Construction, CollectionError> {
    if !check_collection_on(bundle.fiber_variety(), fiber_coll)?.is_strongly_exceptional {
        return Err(CollectionError::InputNotStronglyExceptional { which: "fiber" });
    }
    if !check_collection_on(bundle.base_variety(), base_coll)?.is_strongly_exceptional {
        return Err(CollectionError::InputNotStronglyExceptional { which: "base" });
    }
    bundle.base().check_divisor(d_step)?;
    let length_accounting =
        fiber_coll.len() * base_coll.len() == bundle.total().max_cones().len();

    let mut best: Option<ConstructionAttempt> = None;
    for t in 1..=t_cap.max(1) {
        let d = d_step.scaled(&BigInt::from(t));
        let collection = block_collection(bundle, fiber_coll, base_coll, &d)?;
        let report = check_collection_on(bundle.total_variety(), &collection)?;
        if report.is_strongly_exceptional {
            return Ok(Construction {
                t,
                collection,
                report,
                length_accounting,
                fullness: FULLNESS_NOTE,
            });
        }
        if best.as_ref().map_or(true, |b| report.obstruction() < b.report.obstruction()) {
            best = Some(ConstructionAttempt { t, collection, report });
        }
    }
    let best = best.expect("at least one t is tried");
    Err(CollectionError::CapExhausted {
        cap: t_cap,
        best: Box::new(best),
    })
}

/// The default step: the divisor of the first base ray outside the basis cone.
pub fn default_step(bundle: &FibrationBundle) -> TDivisor {
    let base = bundle.base();
    let ray = bundle.base_pic().free_rays[0];
    TDivisor::ray(base.num_rays(), ray, 1)
}
