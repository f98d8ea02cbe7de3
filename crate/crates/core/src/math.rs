//! Exact integer combinatorics and small finite fields.
//!
//! Every count that enters a bound is computed with arbitrary-precision
//! integers or rationals so that divisibility tests and floors are exact.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Binomial coefficient `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binom(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` as a machine integer. Panics if the value does not fit in `u64`.
pub fn binom_u64(n: u64, k: i64) -> u64 {
    binom(n, k)
        .to_u64()
        .unwrap_or_else(|| panic!("C({n}, {k}) overflows u64"))
}

/// `a / b` if `b` divides `a` exactly.
pub fn exact_div(a: &BigUint, b: &BigUint) -> Option<BigUint> {
    if b.is_zero() {
        return None;
    }
    let (quot, rem) = a.div_rem(b);
    rem.is_zero().then_some(quot)
}

pub fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Floor of a rational, as a signed big integer.
pub fn floor(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Decomposes `q = p^m` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p as u32, m))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds 2^16")]
    OrderTooLarge { p: u32, m: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("{0} is not an element of the field")]
    NotAnElement(u32),
}

/// Field element in canonical encoding: the coefficient vector
/// `(c_0, ..., c_{m-1})` read as the base-`p` number `c_0 + c_1 p + ...`.
pub type Elem = u32;

/// `GF(p^m)` realised as `GF(p)[x] / (modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    /// Monic, low-degree coefficient first, length `m + 1`.
    modulus: Vec<u32>,
    order: u32,
    /// Addition and multiplication tables, present when `order <= 256`.
    tables: Option<(Vec<u16>, Vec<u16>)>,
}

impl FieldSpec {
    /// Builds `GF(p^m)` with the lexicographically smallest monic irreducible
    /// modulus (coefficients compared from the constant term upward).
    pub fn new(p: u32, m: u32) -> Result<Self, FieldError> {
        if !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let order = (p as u64)
            .checked_pow(m)
            .filter(|&o| o <= 1 << 16)
            .ok_or(FieldError::OrderTooLarge { p, m })? as u32;
        let modulus = smallest_irreducible(p, m as usize);
        let mut field = FieldSpec {
            p,
            m,
            modulus,
            order,
            tables: None,
        };
        if order <= 256 {
            let size = (order * order) as usize;
            let (mut add, mut mul) = (Vec::with_capacity(size), Vec::with_capacity(size));
            for a in 0..order {
                for b in 0..order {
                    add.push(field.add_slow(a, b) as u16);
                    mul.push(field.mul_slow(a, b) as u16);
                }
            }
            field.tables = Some((add, mul));
        }
        Ok(field)
    }

    /// The field of order `q`, for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Self, FieldError> {
        let (p, m) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Self::new(p, m)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order
    }

    pub fn contains(&self, a: Elem) -> bool {
        a < self.order
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    fn digits(&self, mut a: Elem) -> Vec<u32> {
        let mut out = vec![0; self.m as usize];
        for d in out.iter_mut() {
            *d = a % self.p;
            a /= self.p;
        }
        out
    }

    fn encode(&self, digits: &[u32]) -> Elem {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.tables {
            Some((add, _)) => add[(a * self.order + b) as usize] as Elem,
            None => self.add_slow(a, b),
        }
    }

    fn add_slow(&self, a: Elem, b: Elem) -> Elem {
        let (x, y) = (self.digits(a), self.digits(b));
        let sum: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&sum)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let neg: Vec<u32> = self
            .digits(a)
            .iter()
            .map(|&u| (self.p - u) % self.p)
            .collect();
        self.encode(&neg)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.tables {
            Some((_, mul)) => mul[(a * self.order + b) as usize] as Elem,
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: Elem, b: Elem) -> Elem {
        let (x, y) = (self.digits(a), self.digits(b));
        let m = self.m as usize;
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &u) in x.iter().enumerate() {
            for (j, &v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
            }
        }
        // Reduce using x^m = -(c_0 + ... + c_{m-1} x^{m-1}).
        for deg in (m..prod.len()).rev() {
            let lead = prod[deg];
            if lead == 0 {
                continue;
            }
            prod[deg] = 0;
            for (i, &c) in self.modulus[..m].iter().enumerate() {
                let idx = deg - m + i;
                prod[idx] = (prod[idx] + (p - lead) * c as u64) % p;
            }
        }
        let reduced: Vec<u32> = prod[..m].iter().map(|&c| c as u32).collect();
        self.encode(&reduced)
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            return Err(FieldError::InverseOfZero);
        }
        if !self.contains(a) {
            return Err(FieldError::NotAnElement(a));
        }
        Ok(self.pow(a, self.order as u64 - 2))
    }

    /// Applies one of the four primitive operations; `b` is ignored for
    /// the unary ones.
    pub fn apply(&self, op: FieldOp, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        for x in [a, b] {
            if !self.contains(x) {
                return Err(FieldError::NotAnElement(x));
            }
        }
        Ok(match op {
            FieldOp::Add => self.add(a, b),
            FieldOp::Mul => self.mul(a, b),
            FieldOp::Neg => self.neg(a),
            FieldOp::Inv => self.inv(a)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Polynomial remainder over GF(p), coefficients low-degree first.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let p = p as u64;
    let mut rem: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = den.len() - 1;
    let lead_inv = {
        let lead = den[dd] as u64;
        (1..p).find(|x| x * lead % p == 1).expect("nonzero lead")
    };
    while rem.len() > dd {
        let top = rem.len() - 1;
        let coef = rem[top] * lead_inv % p;
        if coef != 0 {
            for (i, &d) in den.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = (rem[idx] + (p - coef) * d as u64 % p) % p;
            }
        }
        rem.pop();
    }
    rem.into_iter().map(|c| c as u32).collect()
}

fn monic_polys(p: u32, deg: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(deg as u32);
    (0..count).map(move |mut idx| {
        // Most significant digit is c_0 so iteration order is lexicographic
        // with the constant term compared first.
        let mut coeffs = vec![0u32; deg + 1];
        for i in (0..deg).rev() {
            coeffs[i] = (idx % p as u64) as u32;
            idx /= p as u64;
        }
        coeffs[deg] = 1;
        coeffs
    })
}

/// Irreducibility by trial division by every monic polynomial of degree
/// `1..=deg/2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|f| poly_rem(poly, &f, p).iter().any(|&c| c != 0)))
}

fn smallest_irreducible(p: u32, m: usize) -> Vec<u32> {
    monic_polys(p, m)
        .find(|f| is_irreducible(f, p))
        .expect("an irreducible polynomial of every degree exists")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_values() {
        assert_eq!(binom(7, 3), BigUint::from(35u32));
        assert_eq!(binom(11, 4), BigUint::from(330u32));
        for n in 0..20 {
            assert_eq!(binom(n, 0), BigUint::one());
        }
        assert_eq!(binom(5, -1), BigUint::zero());
        assert_eq!(binom(5, 6), BigUint::zero());
        assert_eq!(binom_u64(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn binom_row_sums() {
        for n in 0..=30u64 {
            let sum: BigUint = (0..=n as i64).map(|k| binom(n, k)).sum();
            assert_eq!(sum, BigUint::one() << n as usize);
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(16), Some((2, 4)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn small_fields() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f3.order(), 3);
        assert_eq!(f3.modulus(), &[0, 1]);
        assert_eq!(f3.add(2, 2), 1);

        let f4 = FieldSpec::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        // x = 2, x + 1 = 3 in canonical encoding.
        assert_eq!(f4.mul(2, 2), 3);

        let f7 = FieldSpec::new(7, 1).unwrap();
        assert_eq!(f7.inv(3).unwrap(), 5);
        assert_eq!(f7.inv(0), Err(FieldError::InverseOfZero));
    }

    #[test]
    fn gf25_modulus_is_first_rootless_quadratic() {
        // Independent route: a monic quadratic over GF(5) is irreducible iff
        // it has no root.
        let expected = (0..5u32)
            .flat_map(|c0| (0..5u32).map(move |c1| (c0, c1)))
            .find(|&(c0, c1)| (0..5u32).all(|x| (x * x + c1 * x + c0) % 5 != 0))
            .unwrap();
        let f25 = FieldSpec::new(5, 2).unwrap();
        assert_eq!(f25.order(), 25);
        assert_eq!(f25.modulus(), &[expected.0, expected.1, 1]);
        assert_eq!(f25.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(4, 1), Err(FieldError::NotPrime(4)));
        assert_eq!(FieldSpec::new(2, 17), Err(FieldError::OrderTooLarge { p: 2, m: 17 }));
        assert!(FieldSpec::new(2, 16).is_ok());
        assert_eq!(FieldSpec::of_order(6), Err(FieldError::NotPrimePower(6)));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64, 81, 121, 125, 128, 169, 243, 256] {
            let f = FieldSpec::of_order(q).unwrap();
            let els: Vec<Elem> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "GF({q}) inverse of {a}");
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn tables_agree_with_polynomial_arithmetic() {
        let f = FieldSpec::of_order(64).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.add(a, b), f.add_slow(a, b));
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
        }
        let big = FieldSpec::of_order(1024).unwrap();
        assert!(big.tables.is_none());
        assert_eq!(big.mul(big.inv(777).unwrap(), 777), 1);
    }

    #[test]
    fn apply_dispatch() {
        let f = FieldSpec::new(7, 1).unwrap();
        assert_eq!(f.apply(FieldOp::Inv, 3, 0), Ok(5));
        assert_eq!(f.apply(FieldOp::Add, 9, 0), Err(FieldError::NotAnElement(9)));
        assert_eq!(f.apply(FieldOp::Neg, 1, 0), Ok(6));
    }
}
