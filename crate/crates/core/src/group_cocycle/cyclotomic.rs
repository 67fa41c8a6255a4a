//! Exact arithmetic in the cyclotomic field `Q(ζ_N)`.
//!
//! Elements are rational coefficient vectors in the power basis
//! `1, ζ, …, ζ^{φ(N)-1}`, always reduced modulo the `N`-th cyclotomic
//! polynomial, so equality is coefficient-wise.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::phase::Phase;
use crate::scalar::C64;

/// Integer coefficients (ascending degree) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic polynomial of order 0 is undefined");
    // x^n - 1 divided by Φ_d for every proper divisor d of n.
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let lead = den[dn];
    debug_assert_eq!(lead, 1, "cyclotomic divisors are monic");
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut quot = vec![0i64; qlen];
    for k in (0..qlen).rev() {
        let c = rem[k + dn];
        quot[k] = c;
        for (i, &d) in den.iter().enumerate() {
            rem[k + i] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

fn euler_phi(n: usize) -> usize {
    (1..=n).filter(|k| num_integer::gcd(*k, n) == 1).count()
}

/// The field `Q(ζ_N)` together with the reduced power table of `ζ`.
#[derive(Debug, PartialEq, Eq)]
pub struct CyclotomicField {
    order: usize,
    degree: usize,
    /// `powers[k]` is `ζ^k` reduced to the power basis, for `0 <= k < N`.
    powers: Vec<Vec<i64>>,
}

impl CyclotomicField {
    pub fn new(order: usize) -> Arc<Self> {
        let order = order.max(1);
        let phi_poly = cyclotomic_polynomial(order);
        let degree = euler_phi(order);
        debug_assert_eq!(phi_poly.len(), degree + 1);
        let mut powers = Vec::with_capacity(order);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by ζ and reduce with the monic relation
            let mut next = vec![0i64; degree + 1];
            next[1..=degree].copy_from_slice(&cur);
            let top = next[degree];
            for i in 0..=degree {
                next[i] -= top * phi_poly[i];
            }
            next.truncate(degree);
            cur = next;
        }
        Arc::new(Self {
            order,
            degree,
            powers,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// An element of a cyclotomic field.
#[derive(Clone, PartialEq, Eq)]
pub struct Cyclotomic {
    field: Arc<CyclotomicField>,
    coeffs: Vec<BigRational>,
}

impl Cyclotomic {
    pub fn zero(field: &Arc<CyclotomicField>) -> Self {
        Self {
            field: field.clone(),
            coeffs: vec![BigRational::zero(); field.degree],
        }
    }

    pub fn one(field: &Arc<CyclotomicField>) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_rational(field: &Arc<CyclotomicField>, r: BigRational) -> Self {
        let mut z = Self::zero(field);
        z.coeffs[0] = r;
        z
    }

    pub fn from_integer(field: &Arc<CyclotomicField>, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(BigInt::from(n)))
    }

    /// `ζ_N^k`.
    pub fn root_power(field: &Arc<CyclotomicField>, k: i64) -> Self {
        let n = field.order as i64;
        let idx = k.rem_euclid(n) as usize;
        Self {
            field: field.clone(),
            coeffs: field.powers[idx]
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        }
    }

    /// Embeds a phase whose denominator divides the field order.
    pub fn from_phase(field: &Arc<CyclotomicField>, phase: Phase) -> Option<Self> {
        let n = field.order as i64;
        let q = phase.denom();
        if n % q != 0 {
            return None;
        }
        Some(Self::root_power(field, phase.numer() * (n / q)))
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `Some(q)` when all non-constant coefficients vanish.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn to_c64(&self) -> C64 {
        let n = self.field.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / n;
                C64::from_polar(c.to_f64().unwrap_or(f64::NAN), angle)
            })
            .sum()
    }

    fn check_field(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "cyclotomic elements from different fields"
        );
    }
}

impl Add for &Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check_field(rhs);
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check_field(rhs);
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check_field(rhs);
        let field = &self.field;
        let mut out = vec![BigRational::zero(); field.degree];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, &c) in field.powers[(i + j) % field.order].iter().enumerate() {
                    if c != 0 {
                        out[k] += &ab * BigRational::from_integer(BigInt::from(c));
                    }
                }
            }
        }
        Cyclotomic {
            field: field.clone(),
            coeffs: out,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic[{}](", self.field.order)?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
