//! Versioned TOML files for fans, bundles and collections.
//!
//! ```toml
//! format = "toric-fan/1"
//! name = "P2"
//! rank = 2
//! rays = [[1, 0], [0, 1], [-1, -1]]
//! max_cones = [[0, 1], [1, 2], [2, 0]]
//! ```
//!
//! Bundle and collection files refer to fan files by path, resolved relative
//! to the referring file. All integers must fit in 64 bits.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::collections::OrderedCollection;
use crate::error::FormatError;
use crate::fan::{Fan, FanData, TDivisor};
use crate::fibration::{build_fibration, FibrationBundle, RayMap};
use crate::lattice::IntMatrix;

pub const FAN_FORMAT: &str = "toric-fan/1";
pub const BUNDLE_FORMAT: &str = "toric-bundle/1";
pub const COLLECTION_FORMAT: &str = "toric-collection/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanFile {
    pub format: String,
    pub name: String,
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    /// Present on total spaces written by `fibration build`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray_map: Option<RayMapFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayMapFile {
    pub fiber: Vec<usize>,
    pub base: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    pub format: String,
    pub fiber: PathBuf,
    pub base: PathBuf,
    pub twist: Vec<Vec<i64>>,
    #[serde(default)]
    pub fiber_basis_cone: usize,
    #[serde(default)]
    pub base_basis_cone: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionFile {
    pub format: String,
    /// Optional when the fan is supplied separately.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<PathBuf>,
    pub classes: Vec<Vec<i64>>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &str) -> Result<T, FormatError> {
    toml::from_str(text).map_err(|e| FormatError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn check_header(found: &str, expected: &'static str, path: &str) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::Header {
            path: path.to_string(),
            found: found.to_string(),
            expected,
        })
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_i64(x: &BigInt, what: &str) -> Result<i64, FormatError> {
    i64::try_from(x).map_err(|_| FormatError::Parse {
        path: what.to_string(),
        message: format!("integer {x} does not fit in 64 bits"),
    })
}

pub fn divisor_to_i64(d: &TDivisor) -> Result<Vec<i64>, FormatError> {
    d.coeffs().iter().map(|c| to_i64(c, "divisor")).collect()
}

fn resolve(base_file: &Path, reference: &Path) -> PathBuf {
    if reference.is_absolute() {
        reference.to_path_buf()
    } else {
        base_file.parent().unwrap_or(Path::new("")).join(reference)
    }
}

/// Header-checked but unvalidated fan data, for reporting on bad fans.
pub fn parse_fan_data(text: &str, path: &str) -> Result<FanData, FormatError> {
    fan_data_from_file(&parse(text, path)?, path)
}

fn fan_data_from_file(file: &FanFile, path: &str) -> Result<FanData, FormatError> {
    check_header(&file.format, FAN_FORMAT, path)?;
    Ok(FanData {
        name: file.name.clone(),
        rank: file.rank,
        rays: file
            .rays
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
        max_cones: file.max_cones.clone(),
    })
}

pub fn fan_from_file(file: &FanFile, path: &str) -> Result<Fan, FormatError> {
    Ok(Fan::new(fan_data_from_file(file, path)?)?)
}

pub fn fan_to_file(fan: &Fan) -> Result<FanFile, FormatError> {
    Ok(FanFile {
        format: FAN_FORMAT.to_string(),
        name: fan.name().to_string(),
        rank: fan.rank(),
        rays: fan
            .rays()
            .iter()
            .map(|r| r.iter().map(|x| to_i64(x, fan.name())).collect())
            .collect::<Result<_, _>>()?,
        max_cones: fan.max_cones().to_vec(),
        ray_map: None,
    })
}

/// Parses and validates a fan file's contents; `path` is used in messages.
pub fn parse_fan(text: &str, path: &str) -> Result<Fan, FormatError> {
    fan_from_file(&parse(text, path)?, path)
}

pub fn read_fan(path: &Path) -> Result<Fan, FormatError> {
    parse_fan(&read_text(path)?, &path.display().to_string())
}

pub fn fan_to_toml(fan: &Fan) -> Result<String, FormatError> {
    write_toml(&fan_to_file(fan)?)
}

/// The total fan of a bundle, annotated with where fiber and base rays went.
pub fn total_fan_to_toml(bundle: &FibrationBundle) -> Result<String, FormatError> {
    let mut file = fan_to_file(bundle.total())?;
    let RayMap { fiber_rays, base_rays } = bundle.ray_map().clone();
    file.ray_map = Some(RayMapFile {
        fiber: fiber_rays,
        base: base_rays,
    });
    write_toml(&file)
}

fn write_toml<T: Serialize>(value: &T) -> Result<String, FormatError> {
    toml::to_string(value).map_err(|e| FormatError::Parse {
        path: "<output>".to_string(),
        message: e.to_string(),
    })
}

/// Parses a bundle file; fan paths are resolved against `path`.
pub fn parse_bundle(text: &str, path: &Path) -> Result<FibrationBundle, FormatError> {
    let label = path.display().to_string();
    let file: BundleFile = parse(text, &label)?;
    check_header(&file.format, BUNDLE_FORMAT, &label)?;
    let fiber = read_fan(&resolve(path, &file.fiber))?;
    let base = read_fan(&resolve(path, &file.base))?;
    let cols = file.twist.first().map_or(0, Vec::len);
    let rows: Vec<Vec<BigInt>> = file
        .twist
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let twist = IntMatrix::from_rows(cols, rows).map_err(|e| FormatError::Parse {
        path: label.clone(),
        message: format!("twist: {e}"),
    })?;
    Ok(build_fibration(fiber, base, twist, file.fiber_basis_cone, file.base_basis_cone)?)
}

pub fn read_bundle(path: &Path) -> Result<FibrationBundle, FormatError> {
    parse_bundle(&read_text(path)?, path)
}

pub fn bundle_to_toml(bundle: &FibrationBundle, fiber_path: &Path, base_path: &Path) -> Result<String, FormatError> {
    let twist = bundle.twist();
    let file = BundleFile {
        format: BUNDLE_FORMAT.to_string(),
        fiber: fiber_path.to_path_buf(),
        base: base_path.to_path_buf(),
        twist: (0..twist.rows())
            .map(|i| (0..twist.cols()).map(|j| to_i64(&twist[(i, j)], "twist")).collect())
            .collect::<Result<_, _>>()?,
        fiber_basis_cone: bundle.fiber_pic().base_cone,
        base_basis_cone: bundle.base_pic().base_cone,
    };
    write_toml(&file)
}

/// Header-checked collection file contents without resolving the fan.
pub fn parse_collection_file(text: &str, path: &str) -> Result<CollectionFile, FormatError> {
    let file: CollectionFile = parse(text, path)?;
    check_header(&file.format, COLLECTION_FORMAT, path)?;
    Ok(file)
}

/// Parses a collection file; returns the fan it refers to and the classes.
pub fn parse_collection(text: &str, path: &Path) -> Result<(Fan, OrderedCollection), FormatError> {
    let label = path.display().to_string();
    let file = parse_collection_file(text, &label)?;
    let fan_path = file.fan.as_ref().ok_or_else(|| FormatError::Parse {
        path: label.clone(),
        message: "no 'fan' reference; pass the fan file explicitly".to_string(),
    })?;
    let fan = read_fan(&resolve(path, fan_path))?;
    let c = collection_on(&fan, &file.classes)?;
    Ok((fan, c))
}

/// Builds a collection on `fan` from coefficient rows.
pub fn collection_on(fan: &Fan, classes: &[Vec<i64>]) -> Result<OrderedCollection, FormatError> {
    let classes = classes.iter().map(|c| TDivisor::from_i64(c)).collect();
    Ok(OrderedCollection::new(fan, classes)?)
}

pub fn read_collection(path: &Path) -> Result<(Fan, OrderedCollection), FormatError> {
    parse_collection(&read_text(path)?, path)
}

pub fn collection_to_toml(c: &OrderedCollection, fan_path: &Path) -> Result<String, FormatError> {
    let file = CollectionFile {
        format: COLLECTION_FORMAT.to_string(),
        fan: Some(fan_path.to_path_buf()),
        classes: c.classes().iter().map(divisor_to_i64).collect::<Result<_, _>>()?,
    };
    write_toml(&file)
}

/// Parses a whitespace- or comma-separated coefficient list such as `"0 0 2"`.
pub fn parse_coefficients(text: &str) -> Result<TDivisor, FormatError> {
    let coeffs = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<BigInt>().map_err(|e| FormatError::Parse {
                path: "<divisor>".to_string(),
                message: format!("'{s}': {e}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TDivisor::new(coeffs))
}
