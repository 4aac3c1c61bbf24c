//! Standard examples: projective spaces, products, Hirzebruch surfaces and
//! P1-bundles over P2, each with a reference collection where one is known.

use crate::collections::OrderedCollection;
use crate::error::CatalogError;
use crate::fan::{Fan, FanData, TDivisor};
use crate::fibration::{build_fibration, FibrationBundle};
use crate::lattice::{IntMatrix, IntVector};

pub const MAX_PROJECTIVE_DIM: usize = 4;
pub const MAX_HIRZEBRUCH: i64 = 5;

/// A fan with its reference collection.
#[derive(Clone, Debug)]
pub struct CatalogFan {
    pub fan: Fan,
    pub collection: OrderedCollection,
}

/// A fibration with collections on fiber and base, and on the total space
/// when one is known in closed form (products only).
#[derive(Clone, Debug)]
pub struct CatalogBundle {
    pub bundle: FibrationBundle,
    pub fiber_collection: OrderedCollection,
    pub base_collection: OrderedCollection,
    pub collection: Option<OrderedCollection>,
}

/// `P^n` with rays `e_1..e_n, -(e_1 + .. + e_n)` and the collection
/// `O, O(1), .., O(n)`, where `O(1)` is the divisor of the last ray.
pub fn projective_space(n: usize) -> Result<CatalogFan, CatalogError> {
    if n == 0 || n > MAX_PROJECTIVE_DIM {
        return Err(CatalogError::Parameter(format!(
            "projective space dimension must be in 1..={MAX_PROJECTIVE_DIM}, got {n}"
        )));
    }
    let mut rays: Vec<IntVector> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }.into()).collect())
        .collect();
    rays.push(vec![(-1).into(); n]);
    let max_cones = (0..=n)
        .rev()
        .map(|skip| (0..=n).filter(|&i| i != skip).collect())
        .collect();
    let fan = Fan::new(FanData {
        name: format!("P{n}"),
        rank: n,
        rays,
        max_cones,
    })?;
    let classes = (0..=n).map(|k| TDivisor::ray(n + 1, n, k as i64)).collect();
    let collection = OrderedCollection::new(&fan, classes)?;
    Ok(CatalogFan { fan, collection })
}

/// The trivial fibration with fiber `f1` over `f2`, with the box collection
/// `E^1_i x E^2_j` ordered by `j`, then `i`.
pub fn product(f1: &CatalogFan, f2: &CatalogFan) -> Result<CatalogBundle, CatalogError> {
    if f1.fan.rank() == 0 || f2.fan.rank() == 0 {
        return Err(CatalogError::Parameter("product factors need rank at least 1".into()));
    }
    let base_free = f2.fan.pic_basis(0)?.free_rays.len();
    let bundle = build_fibration(
        f1.fan.clone(),
        f2.fan.clone(),
        IntMatrix::zeros(f1.fan.rank(), base_free),
        0,
        0,
    )?;
    let mut classes = Vec::new();
    for e2 in f2.collection.classes() {
        for e1 in f1.collection.classes() {
            classes.push(&bundle.lift_from_fiber(e1)? + &bundle.pullback_from_base(e2)?);
        }
    }
    let collection = OrderedCollection::new(bundle.total(), classes)?;
    Ok(CatalogBundle {
        fiber_collection: f1.collection.clone(),
        base_collection: f2.collection.clone(),
        collection: Some(collection),
        bundle,
    })
}

/// `P^m x P^n`.
pub fn projective_product(m: usize, n: usize) -> Result<CatalogBundle, CatalogError> {
    product(&projective_space(m)?, &projective_space(n)?)
}

/// The Hirzebruch surface `F_a`: fiber and base `P^1`, twist `[a]`.
pub fn hirzebruch(a: i64) -> Result<CatalogBundle, CatalogError> {
    if !(0..=MAX_HIRZEBRUCH).contains(&a) {
        return Err(CatalogError::Parameter(format!(
            "Hirzebruch parameter must be in 0..={MAX_HIRZEBRUCH}, got {a}"
        )));
    }
    twisted(projective_space(1)?, projective_space(1)?, a, format!("F{a}"))
}

/// A `P^1`-bundle over `P^2` with twist `[g]`.
pub fn p1_over_p2(g: i64) -> Result<CatalogBundle, CatalogError> {
    twisted(projective_space(1)?, projective_space(2)?, g, format!("P1-bundle-P2-{g}"))
}

fn twisted(fiber: CatalogFan, base: CatalogFan, g: i64, name: String) -> Result<CatalogBundle, CatalogError> {
    if g == 0 {
        let mut out = product(&fiber, &base)?;
        out.bundle = out.bundle.with_total_name(name);
        out.collection = Some(OrderedCollection::new(
            out.bundle.total(),
            out.collection.expect("products carry a collection").classes().to_vec(),
        )?);
        return Ok(out);
    }
    let bundle = build_fibration(fiber.fan, base.fan, IntMatrix::from_i64(&[&[g]]), 0, 0)?.with_total_name(name);
    Ok(CatalogBundle {
        bundle,
        fiber_collection: fiber.collection,
        base_collection: base.collection,
        collection: None,
    })
}

/// Every fan the test suites sweep over.
pub fn standard_fans() -> Result<Vec<CatalogFan>, CatalogError> {
    let mut out: Vec<CatalogFan> = (1..=MAX_PROJECTIVE_DIM).map(projective_space).collect::<Result<_, _>>()?;
    for b in standard_bundles()? {
        let fan = b.bundle.total().clone();
        if let Some(collection) = b.collection {
            out.push(CatalogFan { fan, collection });
        }
    }
    Ok(out)
}

/// Every catalog fan, with or without a reference collection.
pub fn standard_varieties() -> Result<Vec<Fan>, CatalogError> {
    let mut out: Vec<Fan> = (1..=MAX_PROJECTIVE_DIM)
        .map(|n| projective_space(n).map(|p| p.fan))
        .collect::<Result<_, _>>()?;
    out.extend(standard_bundles()?.into_iter().map(|b| b.bundle.total().clone()));
    Ok(out)
}

/// Every bundle the test suites sweep over.
pub fn standard_bundles() -> Result<Vec<CatalogBundle>, CatalogError> {
    let mut out = vec![projective_product(1, 1)?, projective_product(1, 2)?];
    for a in 1..=3 {
        out.push(hirzebruch(a)?);
    }
    out.push(p1_over_p2(1)?);
    Ok(out)
}

/// Looks up a catalog object by CLI name and parameters.
pub enum CatalogItem {
    Fan(CatalogFan),
    Bundle(CatalogBundle),
}

pub fn lookup(name: &str, params: &[i64]) -> Result<CatalogItem, CatalogError> {
    let want = |k: usize| -> Result<(), CatalogError> {
        if params.len() == k {
            Ok(())
        } else {
            Err(CatalogError::Parameter(format!("'{name}' takes {k} parameter(s), got {}", params.len())))
        }
    };
    let dim = |x: i64| usize::try_from(x).map_err(|_| CatalogError::Parameter(format!("bad dimension {x}")));
    match name {
        "projective" | "pn" => {
            want(1)?;
            Ok(CatalogItem::Fan(projective_space(dim(params[0])?)?))
        }
        "product" => {
            want(2)?;
            Ok(CatalogItem::Bundle(projective_product(dim(params[0])?, dim(params[1])?)?))
        }
        "hirzebruch" => {
            want(1)?;
            Ok(CatalogItem::Bundle(hirzebruch(params[0])?))
        }
        "p1-over-p2" => {
            want(1)?;
            Ok(CatalogItem::Bundle(p1_over_p2(params[0])?))
        }
        _ => Err(CatalogError::Parameter(format!(
            "unknown catalog entry '{name}' (known: projective N, product M N, hirzebruch A, p1-over-p2 G)"
        ))),
    }
}
