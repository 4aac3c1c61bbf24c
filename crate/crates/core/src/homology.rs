//! Support complexes of sign patterns and their reduced homology over `Q`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::fan::Fan;
use crate::lattice::{rank, IntMatrix};

/// The simplicial complex of all cones whose rays lie in a given vertex set.
/// Always contains the empty face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportComplex {
    ambient_rank: usize,
    vertices: Vec<usize>,
    /// Sorted faces, grouped by size; `faces[0]` is the empty face.
    faces: Vec<Vec<usize>>,
}

impl SupportComplex {
    /// Closes the given faces under taking subsets. `ambient_rank` fixes the
    /// top homological degree reported (`ambient_rank - 1`).
    pub fn from_faces(ambient_rank: usize, generators: &[Vec<usize>]) -> Self {
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        all.insert(Vec::new());
        for g in generators {
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            let k = g.len();
            for mask in 0u64..(1u64 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| g[i]).collect();
                all.insert(sub);
            }
        }
        let mut faces: Vec<Vec<usize>> = all.into_iter().collect();
        faces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let vertices = faces.iter().filter(|f| f.len() == 1).map(|f| f[0]).collect();
        SupportComplex {
            ambient_rank,
            vertices,
            faces,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Largest face dimension; `-1` for the empty complex.
    pub fn max_dim(&self) -> isize {
        self.faces.last().map_or(-1, |f| f.len() as isize - 1)
    }

    /// Number of faces of each dimension `q = -1 ..= ambient_rank - 1`.
    pub fn face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.ambient_rank + 1];
        for f in &self.faces {
            counts[f.len()] += 1;
        }
        counts
    }

    /// `sum_q (-1)^q f_q` including the empty face.
    pub fn reduced_euler_characteristic(&self) -> i64 {
        self.face_counts()
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { c as i64 } else { -(c as i64) })
            .sum()
    }

    fn faces_of_size(&self, size: usize) -> Vec<&Vec<usize>> {
        self.faces.iter().filter(|f| f.len() == size).collect()
    }
}

/// `Supp(r)` for the set of rays carrying a non-negative coefficient.
pub fn support_complex(fan: &Fan, nonneg_rays: &[usize]) -> SupportComplex {
    let allowed: BTreeSet<usize> = nonneg_rays.iter().copied().collect();
    let faces: Vec<Vec<usize>> = fan
        .faces()
        .iter()
        .filter(|f| f.iter().all(|i| allowed.contains(i)))
        .cloned()
        .collect();
    let vertices = faces.iter().filter(|f| f.len() == 1).map(|f| f[0]).collect();
    SupportComplex {
        ambient_rank: fan.rank(),
        vertices,
        faces,
    }
}

/// Reduced Betti numbers, `dims[q + 1]` for `q = -1 ..= n - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomologyProfile {
    dims: Vec<u64>,
}

impl HomologyProfile {
    pub fn from_dims(dims: Vec<u64>) -> Self {
        HomologyProfile { dims }
    }

    /// Dimension in degree `q`; zero outside the stored range.
    pub fn get(&self, q: isize) -> u64 {
        usize::try_from(q + 1)
            .ok()
            .and_then(|i| self.dims.get(i))
            .copied()
            .unwrap_or(0)
    }

    /// Raw storage, index `q + 1`.
    pub fn dims(&self) -> &[u64] {
        &self.dims
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 1 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Reduced homology of the join: `H_i(A*B) = sum_{p+q=i-1} H_p(A) H_q(B)`.
    pub fn join(&self, other: &HomologyProfile) -> HomologyProfile {
        let len = self.dims.len() + other.dims.len();
        let mut dims = vec![0u64; len];
        // with index k = q + 1: (p+1) + (q+1) = i + 1
        for (a, &x) in self.dims.iter().enumerate() {
            for (b, &y) in other.dims.iter().enumerate() {
                dims[a + b] += x * y;
            }
        }
        while dims.len() > 1 && *dims.last().unwrap() == 0 {
            dims.pop();
        }
        HomologyProfile { dims }
    }

    /// Same profile padded or trimmed (only zeros) to `len` entries.
    pub fn resized(&self, len: usize) -> HomologyProfile {
        let mut dims = self.dims.clone();
        if dims.len() > len {
            assert!(dims[len..].iter().all(|&d| d == 0), "truncating nonzero homology");
        }
        dims.resize(len, 0);
        HomologyProfile { dims }
    }
}

/// Reduced homology over the rationals, boundary ranks by fraction-free
/// elimination. The augmentation to the empty face is part of the chain
/// complex, so the empty complex has a single class in degree -1.
pub fn reduced_homology(c: &SupportComplex) -> HomologyProfile {
    let top = c.ambient_rank;
    // chain groups by size 0..=top (size = degree + 1)
    let groups: Vec<Vec<&Vec<usize>>> = (0..=top).map(|s| c.faces_of_size(s)).collect();
    // boundary_rank[s] = rank of d: C_{size s} -> C_{size s-1}
    let mut boundary_rank = vec![0usize; top + 2];
    for s in 1..=top {
        if groups[s].is_empty() || groups[s - 1].is_empty() {
            continue;
        }
        boundary_rank[s] = rank(&boundary_matrix(&groups[s - 1], &groups[s]));
    }
    let dims = (0..=top)
        .map(|s| (groups[s].len() - boundary_rank[s] - boundary_rank[s + 1]) as u64)
        .collect();
    HomologyProfile { dims }
}

fn boundary_matrix(lower: &[&Vec<usize>], upper: &[&Vec<usize>]) -> IntMatrix {
    let index: HashMap<&Vec<usize>, usize> = lower.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut m = IntMatrix::zeros(lower.len(), upper.len());
    for (j, face) in upper.iter().enumerate() {
        for skip in 0..face.len() {
            let sub: Vec<usize> = face
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &v)| v)
                .collect();
            let i = index[&sub];
            let sign = if skip % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            debug_assert!(m[(i, j)].is_zero());
            m.set(i, j, sign);
        }
    }
    m
}
