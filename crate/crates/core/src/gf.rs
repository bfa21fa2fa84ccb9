//! GF(q) arithmetic for odd prime powers q = p^k.
//!
//! Elements are polynomials over GF(p) modulo a fixed monic irreducible of
//! degree k, stored by rank in the canonical total order: lexicographic on
//! little-endian coefficient vectors (c0, c1, ..., c_{k-1}) with c0 compared
//! first. Rank = sum of c_i * p^(k-1-i), so the native integer order of
//! ranks equals the canonical order and `Fe` comparisons are meaningful.
//! Consequence worth remembering: for k > 1 the element 1 is NOT Fe(1);
//! always go through [`Field::one`] or [`Field::from_int`].
//!
//! All binary operations are table-driven (q is desk-scale by design), but
//! the square test is defined by exponentiation a^((q-1)/2) and the tables
//! merely memoize it. Zero counts as a square. `sqrt` returns the smaller
//! of the two roots in the canonical order.

use crate::{Error, Result};

/// Element of GF(q), identified by its rank in the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
}

/// Largest supported field order; keeps the op tables at a few megabytes.
pub const MAX_Q: u64 = 1024;

/// A concrete GF(p^k) with all operation tables precomputed.
#[derive(Debug, Clone)]
pub struct Field {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, little-endian, length k+1. For k = 1 this is x.
    modulus: Vec<u32>,
    one: Fe,
    distinguished_nonsquare: Fe,
    add_t: Vec<u16>,
    mul_t: Vec<u16>,
    neg_t: Vec<u16>,
    inv_t: Vec<u16>,
    sqrt_t: Vec<u16>,
    square_t: Vec<bool>,
}

const NO_ROOT: u16 = u16::MAX;

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Built-in moduli for the extension orders the toolkit ships with.
/// Little-endian including the leading 1.
fn builtin_modulus(q: u64) -> Option<Vec<u32>> {
    match q {
        9 => Some(vec![1, 0, 1]),      // x^2 + 1 over GF(3)
        25 => Some(vec![2, 0, 1]),     // x^2 + 2 over GF(5)
        49 => Some(vec![1, 0, 1]),     // x^2 + 1 over GF(7)
        81 => Some(vec![2, 1, 0, 0, 1]), // x^4 + x + 2 over GF(3)
        121 => Some(vec![1, 0, 1]),    // x^2 + 1 over GF(11)
        169 => Some(vec![2, 0, 1]),    // x^2 + 2 over GF(13)
        _ => None,
    }
}

// Polynomial helpers over GF(p), little-endian coefficient vectors.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of a by the monic polynomial m.
fn poly_rem(p: u32, a: &[u32], m: &[u32]) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for i in 0..m.len() {
            let idx = shift + i;
            let sub = (lead * m[i]) % p;
            r[idx] = (r[idx] + p * p - sub) % p;
        }
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_divides(p: u32, d: &[u32], a: &[u32]) -> bool {
    poly_rem(p, a, d).is_empty()
}

impl Field {
    /// Builds GF(p^k). With `modulus = None` a built-in polynomial is used
    /// for k > 1 (available for q in {9, 25, 49, 81, 121, 169}); for k = 1
    /// the modulus is x. A supplied modulus must be monic of degree k and
    /// irreducible; irreducibility is checked by trial division against
    /// every monic polynomial of degree at most k/2.
    pub fn new(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<Field> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if k == 0 {
            return Err(Error::BadModulus(vec![], 0));
        }
        let q64 = (p as u64).pow(k);
        if q64 > MAX_Q {
            return Err(Error::BadInput(format!(
                "q = {q64} exceeds the supported bound {MAX_Q}"
            )));
        }
        let q = q64 as u32;
        let modulus: Vec<u32> = match modulus {
            Some(m) => m.to_vec(),
            None if k == 1 => vec![0, 1],
            None => builtin_modulus(q64).ok_or(Error::NoBuiltinModulus(q64))?,
        };
        if modulus.len() != k as usize + 1
            || modulus.last() != Some(&1)
            || modulus.iter().any(|&c| c >= p)
        {
            return Err(Error::BadModulus(modulus, k as usize));
        }
        if k > 1 {
            Self::check_irreducible(p, k, &modulus)?;
        }

        let kk = k as usize;
        let n = q as usize;
        let mut powers = vec![1u32; kk];
        for i in 1..kk {
            powers[i] = powers[i - 1] * p;
        }
        // rank digit weights: coefficient i carries weight p^(k-1-i)
        let weight = |i: usize| powers[kk - 1 - i];
        let decode = |r: u32| -> Vec<u32> {
            (0..kk).map(|i| (r / weight(i)) % p).collect()
        };
        let encode = |c: &[u32]| -> u32 {
            c.iter().enumerate().map(|(i, &ci)| ci * weight(i)).sum()
        };

        let mut add_t = vec![0u16; n * n];
        let mut neg_t = vec![0u16; n];
        for a in 0..q {
            let ca = decode(a);
            let cn: Vec<u32> = ca.iter().map(|&c| (p - c) % p).collect();
            neg_t[a as usize] = encode(&cn) as u16;
            for b in a..q {
                let cb = decode(b);
                let cs: Vec<u32> = ca.iter().zip(&cb).map(|(&x, &y)| (x + y) % p).collect();
                let s = encode(&cs) as u16;
                add_t[(a * q + b) as usize] = s;
                add_t[(b * q + a) as usize] = s;
            }
        }

        let mut mul_t = vec![0u16; n * n];
        for a in 0..q {
            let mut ca = decode(a);
            poly_trim(&mut ca);
            for b in a..q {
                let mut cb = decode(b);
                poly_trim(&mut cb);
                let prod = poly_rem(p, &poly_mul(p, &ca, &cb), &modulus);
                let mut full = prod;
                full.resize(kk, 0);
                let m = encode(&full) as u16;
                mul_t[(a * q + b) as usize] = m;
                mul_t[(b * q + a) as usize] = m;
            }
        }

        let one = {
            let mut c = vec![0u32; kk];
            c[0] = 1;
            Fe(encode(&c) as u16)
        };

        let mut field = Field {
            p,
            k,
            q,
            modulus,
            one,
            distinguished_nonsquare: Fe::ZERO,
            add_t,
            mul_t,
            neg_t,
            inv_t: vec![],
            sqrt_t: vec![],
            square_t: vec![],
        };

        field.inv_t = (0..q)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    field.pow(Fe(a as u16), (q - 2) as u64).0
                }
            })
            .collect();

        // square test by exponentiation, memoized; zero counts as a square
        let half = ((q - 1) / 2) as u64;
        field.square_t = (0..q)
            .map(|a| a == 0 || field.pow(Fe(a as u16), half) == field.one)
            .collect();
        let nonzero_squares = field.square_t.iter().skip(1).filter(|&&s| s).count();
        assert_eq!(
            nonzero_squares,
            (q as usize - 1) / 2,
            "GF({q}) must have exactly (q-1)/2 nonzero squares"
        );

        // canonical root table: first r in rank order wins
        field.sqrt_t = vec![NO_ROOT; n];
        for r in 0..q {
            let sq = field.mul(Fe(r as u16), Fe(r as u16)).0 as usize;
            if field.sqrt_t[sq] == NO_ROOT {
                field.sqrt_t[sq] = r as u16;
            }
        }
        for a in 0..n {
            assert_eq!(
                field.square_t[a],
                field.sqrt_t[a] != NO_ROOT,
                "square test and root table disagree at rank {a}"
            );
        }

        field.distinguished_nonsquare = (0..q)
            .map(|a| Fe(a as u16))
            .find(|&a| !field.is_square(a))
            .expect("every odd-order field has a non-square");

        Ok(field)
    }

    /// Builds GF(q) from the order alone, factoring q as p^k.
    pub fn from_order(q: u64) -> Result<Field> {
        let (p, k) = factor_prime_power(q)
            .ok_or_else(|| Error::BadInput(format!("{q} is not a prime power")))?;
        Field::new(p, k, None)
    }

    /// Trial division by every monic polynomial of degree <= k/2. Any
    /// factorization of a degree-k polynomial has a factor in that range.
    fn check_irreducible(p: u32, k: u32, modulus: &[u32]) -> Result<()> {
        for d in 1..=(k / 2) {
            for idx in 0..(p as u64).pow(d) {
                let mut cand = Vec::with_capacity(d as usize + 1);
                let mut rest = idx;
                for _ in 0..d {
                    cand.push((rest % p as u64) as u32);
                    rest /= p as u64;
                }
                cand.push(1);
                if poly_divides(p, &cand, modulus) {
                    return Err(Error::ReducibleModulus(modulus.to_vec(), p));
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        self.one
    }

    /// First non-square in the canonical enumeration order.
    pub fn distinguished_nonsquare(&self) -> Fe {
        self.distinguished_nonsquare
    }

    /// All q elements, zero first, ascending in the canonical order.
    pub fn enumerate(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.q).map(|r| Fe(r as u16))
    }

    /// Little-endian coefficient vector of an element.
    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let k = self.k as usize;
        let mut w = self.q;
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            w /= self.p;
            out.push((a.0 as u32 / w) % self.p);
        }
        out
    }

    /// Element with the given little-endian coefficients; shorter vectors
    /// are zero-padded at the high-degree end.
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fe> {
        if coeffs.len() > self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::BadElement(coeffs.to_vec(), self.q));
        }
        let mut w = self.q;
        let mut r = 0u32;
        for i in 0..self.k as usize {
            w /= self.p;
            r += coeffs.get(i).copied().unwrap_or(0) * w;
        }
        Ok(Fe(r as u16))
    }

    /// The image of an integer under the canonical map Z -> GF(q).
    pub fn from_int(&self, n: i64) -> Fe {
        let p = self.p as i64;
        let c = ((n % p) + p) % p;
        self.from_coeffs(&[c as u32]).expect("reduced constant is valid")
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.add_t[a.0 as usize * self.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.mul_t[a.0 as usize * self.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.neg_t[a.0 as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a == Fe::ZERO {
            return Err(Error::ZeroInversion { q: self.q });
        }
        Ok(Fe(self.inv_t[a.0 as usize]))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = self.one;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Zero counts as a square.
    #[inline]
    pub fn is_square(&self, a: Fe) -> bool {
        self.square_t[a.0 as usize]
    }

    /// Canonical square root: the smaller of the two roots in the total
    /// order, or None when `a` is a non-square.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        match self.sqrt_t[a.0 as usize] {
            NO_ROOT => None,
            r => Some(Fe(r)),
        }
    }

    /// Evaluates a polynomial with coefficients in this field.
    pub fn eval_poly(&self, coeffs: &[Fe], x: Fe) -> Fe {
        let mut acc = Fe::ZERO;
        for &c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), c);
        }
        acc
    }

    /// Smallest generator of the multiplicative group in the canonical order.
    pub fn primitive_element(&self) -> Fe {
        let n = (self.q - 1) as u64;
        let primes = prime_factors(n);
        self.enumerate()
            .skip(1)
            .find(|&a| primes.iter().all(|&r| self.pow(a, n / r) != self.one))
            .expect("cyclic group of order q-1 has a generator")
    }

    /// Compact display form: "2" in prime fields, "[1,2]" in extensions.
    pub fn fe_string(&self, a: Fe) -> String {
        let c = self.coeffs(a);
        if self.k == 1 {
            format!("{}", c[0])
        } else {
            format!(
                "[{}]",
                c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            )
        }
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Factors q = p^k with p prime, if possible.
pub fn factor_prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let fs = prime_factors(q);
    if fs.len() != 1 {
        return None;
    }
    let p = fs[0];
    let mut k = 0u32;
    let mut rest = q;
    while rest > 1 {
        if rest % p != 0 {
            return None;
        }
        rest /= p;
        k += 1;
    }
    Some((p as u32, k))
}
