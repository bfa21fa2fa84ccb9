//! The copy of PGL(2,q) acting on PG(3,q) that stabilizes the pencil.
//!
//! A projectivity of the line PG(1,q) with matrix [[a,c],[b,d]] induces a
//! collineation of PG(3,q) through the symmetric-square action on the conic
//! plane plus a determinant factor on the last coordinate:
//!
//!   M(a,b,c,d) = | a^2  2ac      c^2  0       |
//!                | ab   ad+bc    cd   0       |
//!                | b^2  2bd      d^2  0       |
//!                | 0    0        0    ad-bc   |
//!
//! M fixes U4 and the plane X4 = 0, permutes the conic like PGL(2,q)
//! permutes PG(1,q), and multiplies X1 X3 - X2^2 and X4^2 by the same
//! factor (ad-bc)^2, so every member of the pencil is stabilized
//! individually. Group elements are kept as canonical parameter quadruples
//! (a,b,c,d); orbits are computed by breadth-first sweeps over the three
//! standard generator permutations.

use std::collections::{HashMap, VecDeque};

use crate::bitset::BitSet;
use crate::geometry::{Collineation, Geometry, Mat4};
use crate::gf::{Fe, Field};
use crate::{Error, Result};

/// Parameters (a,b,c,d) of one PGL(2,q) element, ad - bc != 0.
pub type Params = [Fe; 4];

/// The induced 4x4 matrix of a source element; SingularSource if ad = bc.
pub fn embed(f: &Field, p: Params) -> Result<Mat4> {
    let [a, b, c, d] = p;
    let det = f.sub(f.mul(a, d), f.mul(b, c));
    if det == Fe::ZERO {
        return Err(Error::SingularSource);
    }
    let two = f.from_int(2);
    let z = Fe::ZERO;
    Ok(Mat4([
        [f.mul(a, a), f.mul(two, f.mul(a, c)), f.mul(c, c), z],
        [
            f.mul(a, b),
            f.add(f.mul(a, d), f.mul(b, c)),
            f.mul(c, d),
            z,
        ],
        [f.mul(b, b), f.mul(two, f.mul(b, d)), f.mul(d, d), z],
        [z, z, z, det],
    ]))
}

/// Group operation on parameters, matching matrix multiplication of the
/// embedded elements: embed(compose(p1, p2)) ~ embed(p1) * embed(p2).
pub fn compose(f: &Field, p1: Params, p2: Params) -> Params {
    let [a1, b1, c1, d1] = p1;
    let [a2, b2, c2, d2] = p2;
    [
        f.add(f.mul(a1, a2), f.mul(c1, b2)),
        f.add(f.mul(b1, a2), f.mul(d1, b2)),
        f.add(f.mul(a1, c2), f.mul(c1, d2)),
        f.add(f.mul(b1, c2), f.mul(d1, d2)),
    ]
}

/// Scales so the first nonzero of (a,b,c,d) is 1: one representative per
/// projective class.
pub fn canonical_params(f: &Field, p: Params) -> Params {
    let lead = p.iter().find(|&&e| e != Fe::ZERO).expect("nonzero params");
    let inv = f.inv(*lead).expect("nonzero");
    p.map(|e| f.mul(inv, e))
}

/// The translation t -> t+1, the scaling t -> gt by a primitive g, and the
/// inversion t -> 1/t; together they generate all of PGL(2,q).
pub fn standard_generators(f: &Field) -> Vec<Params> {
    let one = f.one();
    let z = Fe::ZERO;
    let g = f.primitive_element();
    vec![[one, one, z, one], [g, z, z, one], [z, one, one, z]]
}

/// All elements generated from `gens`, as sorted canonical parameters.
pub fn closure(f: &Field, gens: &[Params]) -> Vec<Params> {
    let mut seen: std::collections::HashSet<Params> = std::collections::HashSet::new();
    let identity = canonical_params(f, [f.one(), Fe::ZERO, Fe::ZERO, f.one()]);
    let mut queue = VecDeque::from([identity]);
    seen.insert(identity);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = canonical_params(f, compose(f, x, *g));
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    let mut out: Vec<Params> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

/// An orbit partition: `orbit_of[x]` indexes into `sizes`, orbits numbered
/// by their smallest member.
#[derive(Debug, Clone)]
pub struct Orbits {
    pub orbit_of: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Orbits {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    fn from_maps(n: usize, maps: &[&[u32]]) -> Orbits {
        let mut orbit_of = vec![u32::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if orbit_of[start] != u32::MAX {
                continue;
            }
            let idx = sizes.len() as u32;
            orbit_of[start] = idx;
            let mut stack = vec![start as u32];
            let mut size = 0usize;
            while let Some(x) = stack.pop() {
                size += 1;
                for m in maps {
                    let y = m[x as usize];
                    if orbit_of[y as usize] == u32::MAX {
                        orbit_of[y as usize] = idx;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        Orbits { orbit_of, sizes }
    }

    /// True when the partition refines the given labeling: no orbit spans
    /// two label values.
    pub fn refines<T: PartialEq>(&self, labels: &[T]) -> bool {
        assert_eq!(labels.len(), self.orbit_of.len());
        let mut rep: Vec<Option<&T>> = vec![None; self.sizes.len()];
        for (x, &o) in self.orbit_of.iter().enumerate() {
            match rep[o as usize] {
                None => rep[o as usize] = Some(&labels[x]),
                Some(r) => {
                    if *r != labels[x] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

pub struct PglAction {
    order: usize,
    elements: Vec<Params>,
    generators: Vec<Collineation>,
}

impl PglAction {
    pub fn new(geo: &Geometry) -> Result<PglAction> {
        let f = geo.field();
        let q = f.q() as usize;
        let gens = standard_generators(f);
        let elements = closure(f, &gens);
        let expect = q * q * q - q;
        assert_eq!(
            elements.len(),
            expect,
            "the generators must span all of PGL(2,q)"
        );
        let generators = gens
            .iter()
            .map(|&p| geo.collineation(&embed(f, p)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(PglAction {
            order: expect,
            elements,
            generators,
        })
    }

    /// |PGL(2,q)| = q^3 - q.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> &[Params] {
        &self.elements
    }

    /// The three generator collineations with their precomputed maps.
    pub fn generators(&self) -> &[Collineation] {
        &self.generators
    }

    pub fn point_orbits(&self) -> Orbits {
        let maps: Vec<&[u32]> = self.generators.iter().map(|c| c.point_map.as_slice()).collect();
        Orbits::from_maps(self.generators[0].point_map.len(), &maps)
    }

    pub fn line_orbits(&self) -> Orbits {
        let maps: Vec<&[u32]> = self.generators.iter().map(|c| c.line_map.as_slice()).collect();
        Orbits::from_maps(self.generators[0].line_map.len(), &maps)
    }

    pub fn plane_orbits(&self) -> Orbits {
        let maps: Vec<&[u32]> = self.generators.iter().map(|c| c.plane_map.as_slice()).collect();
        Orbits::from_maps(self.generators[0].plane_map.len(), &maps)
    }

    /// A line set is invariant exactly when every generator maps it into
    /// itself.
    pub fn is_invariant_line_set(&self, s: &BitSet) -> bool {
        self.generators.iter().all(|c| {
            s.iter_ones()
                .all(|l| s.contains(c.line_map[l] as usize))
        })
    }

    /// Multiset of orbit sizes, sorted ascending; convenient for reports.
    pub fn sorted_sizes(orbits: &Orbits) -> Vec<usize> {
        let mut s = orbits.sizes.clone();
        s.sort_unstable();
        s
    }
}

/// Checks that two partitions of 0..n coincide, where one is given by
/// orbit indices and the other by arbitrary label keys.
pub fn partitions_equal<T: std::hash::Hash + Eq>(orbits: &Orbits, labels: &[T]) -> bool {
    if !orbits.refines(labels) {
        return false;
    }
    let mut distinct: HashMap<&T, ()> = HashMap::new();
    for l in labels {
        distinct.insert(l, ());
    }
    distinct.len() == orbits.count()
}
