//! Exact scalars: rationals, Gaussian rationals `a + bi`, and points of the
//! symplectic plane.
//!
//! Text grammar accepted by [`Gauss::parse`] (whitespace-insensitive):
//!
//! ```text
//! <rat>   ::= int | int "/" posint
//! <gauss> ::= <rat> | <rat> ("+"|"-") <rat> "i" | <rat> "i"
//! ```
//!
//! A bare `i` / `-i` is accepted as shorthand for `1i` / `-1i`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// An element `re + im·i` of the field ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gauss {
    pub re: Rational,
    pub im: Rational,
}

impl Gauss {
    pub fn new(re: Rational, im: Rational) -> Self {
        Gauss { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Gauss::new(int(n), Rational::zero())
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Gauss::new(int(re), int(im))
    }

    pub fn from_rational(r: Rational) -> Self {
        Gauss::new(r, Rational::zero())
    }

    pub fn rat(n: i64, d: i64) -> Self {
        Gauss::from_rational(rat(n, d))
    }

    pub fn i() -> Self {
        Gauss::from_ints(0, 1)
    }

    pub fn half() -> Self {
        Gauss::rat(1, 2)
    }

    pub fn conj(&self) -> Self {
        Gauss::new(self.re.clone(), -self.im.clone())
    }

    /// `re² + im²`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(Gauss::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn checked_div(&self, rhs: &Gauss) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Gauss::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Gauss::new(&self.re * r, &self.im * r)
    }

    /// Both parts are integers.
    pub fn is_gaussian_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_gauss(s)
    }
}

impl Zero for Gauss {
    fn zero() -> Self {
        Gauss::new(Rational::zero(), Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Gauss {
    fn one() -> Self {
        Gauss::from_int(1)
    }
}

impl From<i64> for Gauss {
    fn from(n: i64) -> Self {
        Gauss::from_int(n)
    }
}

impl From<Rational> for Gauss {
    fn from(r: Rational) -> Self {
        Gauss::from_rational(r)
    }
}

impl PartialOrd for Gauss {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on `(re, im)`; only used to give maps a stable iteration order.
impl Ord for Gauss {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Gauss> for &'a Gauss {
            type Output = Gauss;
            fn $m(self, rhs: &'b Gauss) -> Gauss {
                let f: fn(&Gauss, &Gauss) -> Gauss = $body;
                f(self, rhs)
            }
        }
        impl $tr<Gauss> for Gauss {
            type Output = Gauss;
            fn $m(self, rhs: Gauss) -> Gauss {
                (&self).$m(&rhs)
            }
        }
        impl<'b> $tr<&'b Gauss> for Gauss {
            type Output = Gauss;
            fn $m(self, rhs: &'b Gauss) -> Gauss {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Gauss> for &'a Gauss {
            type Output = Gauss;
            fn $m(self, rhs: Gauss) -> Gauss {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Gauss::new(&a.re + &b.re, &a.im + &b.im));
forward_binop!(Sub, sub, |a, b| Gauss::new(&a.re - &b.re, &a.im - &b.im));
forward_binop!(Mul, mul, |a, b| {
    if a.im.is_zero() && b.im.is_zero() {
        return Gauss::new(&a.re * &b.re, Rational::zero());
    }
    Gauss::new(
        &a.re * &b.re - &a.im * &b.im,
        &a.re * &b.im + &a.im * &b.re,
    )
});

impl Neg for Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re, -self.im)
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&Gauss> for Gauss {
    fn add_assign(&mut self, rhs: &Gauss) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign for Gauss {
    fn add_assign(&mut self, rhs: Gauss) {
        *self += &rhs;
    }
}

impl SubAssign<&Gauss> for Gauss {
    fn sub_assign(&mut self, rhs: &Gauss) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl SubAssign for Gauss {
    fn sub_assign(&mut self, rhs: Gauss) {
        *self -= &rhs;
    }
}

impl MulAssign<&Gauss> for Gauss {
    fn mul_assign(&mut self, rhs: &Gauss) {
        *self = &*self * rhs;
    }
}

fn fmt_rat(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit_im = |r: &Rational| -> String {
            if r.abs().is_one() {
                String::new()
            } else {
                fmt_rat(&r.abs())
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => {
                let sign = if self.im.is_negative() { "-" } else { "" };
                write!(f, "{}{}i", sign, unit_im(&self.im))
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}i", fmt_rat(&self.re), sign, unit_im(&self.im))
            }
        }
    }
}

impl fmt::Debug for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Gauss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_gauss(s)
    }
}

fn parse_rat(s: &str) -> Option<Rational> {
    if s.is_empty() {
        return None;
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let digits_ok = |t: &str, allow_sign: bool| {
        let t = if allow_sign {
            t.strip_prefix(['-', '+']).unwrap_or(t)
        } else {
            t
        };
        !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits_ok(num, true) {
        return None;
    }
    let n: BigInt = num.parse().ok()?;
    match den {
        None => Some(Rational::from_integer(n)),
        Some(d) => {
            if !digits_ok(d, false) {
                return None;
            }
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
    }
}

/// Imaginary part written before the trailing `i`; empty / sign-only means ±1.
fn parse_im(s: &str) -> Option<Rational> {
    match s {
        "" | "+" => Some(Rational::one()),
        "-" => Some(-Rational::one()),
        _ => parse_rat(s),
    }
}

fn parse_gauss(input: &str) -> Result<Gauss> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("invalid Gaussian rational {input:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return parse_rat(&s).map(Gauss::from_rational).ok_or_else(bad);
    };
    // Split at the last sign that is not the leading one.
    let split = body
        .char_indices()
        .filter(|&(k, c)| k > 0 && (c == '+' || c == '-'))
        .map(|(k, _)| k)
        .next_back();
    match split {
        None => {
            let im = parse_im(body).ok_or_else(bad)?;
            Ok(Gauss::new(Rational::zero(), im))
        }
        Some(k) => {
            let re = parse_rat(&body[..k]).ok_or_else(bad)?;
            let im = parse_im(&body[k..]).ok_or_else(bad)?;
            Ok(Gauss::new(re, im))
        }
    }
}

/// A point of ℂ² with Gaussian-rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CVec2 {
    pub x: Gauss,
    pub y: Gauss,
}

impl CVec2 {
    pub fn new(x: Gauss, y: Gauss) -> Self {
        CVec2 { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        CVec2::new(Gauss::from_int(x), Gauss::from_int(y))
    }

    pub fn zero() -> Self {
        CVec2::new(Gauss::zero(), Gauss::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, c: &Gauss) -> Self {
        CVec2::new(&self.x * c, &self.y * c)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&Gauss::from_int(n))
    }
}

impl<'b> Add<&'b CVec2> for &CVec2 {
    type Output = CVec2;
    fn add(self, rhs: &'b CVec2) -> CVec2 {
        CVec2::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Add for CVec2 {
    type Output = CVec2;
    fn add(self, rhs: CVec2) -> CVec2 {
        &self + &rhs
    }
}

impl<'b> Sub<&'b CVec2> for &CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: &'b CVec2) -> CVec2 {
        CVec2::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Sub for CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: CVec2) -> CVec2 {
        &self - &rhs
    }
}

impl Neg for &CVec2 {
    type Output = CVec2;
    fn neg(self) -> CVec2 {
        CVec2::new(-&self.x, -&self.y)
    }
}

impl Neg for CVec2 {
    type Output = CVec2;
    fn neg(self) -> CVec2 {
        -&self
    }
}

impl fmt::Display for CVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

impl fmt::Debug for CVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// ρ = (1, 1).
pub fn rho() -> CVec2 {
    CVec2::from_ints(1, 1)
}

/// ρ† = (0, 1), normalised so that ⟨ρ, ρ†⟩ = 1.
pub fn rho_dagger() -> CVec2 {
    CVec2::from_ints(0, 1)
}

/// The standard symplectic form ⟨(a,b),(c,d)⟩ = ad − bc.
pub fn symplectic(u: &CVec2, v: &CVec2) -> Gauss {
    &u.x * &v.y - &u.y * &v.x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(s: &str) -> Gauss {
        s.parse().unwrap()
    }

    #[test]
    fn symplectic_examples() {
        assert!(symplectic(&rho(), &rho()).is_zero());
        assert_eq!(symplectic(&rho(), &rho_dagger()), Gauss::one());
        let u = CVec2::from_ints(1, 2);
        let v = CVec2::new(Gauss::from_int(-2), g("-2+i"));
        assert_eq!(symplectic(&u, &v), g("2+i"));
    }

    #[test]
    fn field_examples() {
        assert_eq!(g("1+i") * g("1-i"), Gauss::from_int(2));
        assert_eq!(Gauss::i().inv().unwrap(), g("-i"));
        assert_eq!(g("2+i").checked_div(&g("1+i")).unwrap(), g("3/2-1/2i"));
        assert!(matches!(Gauss::zero().inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn parse_grammar() {
        assert_eq!(g(" 3 / 4 "), Gauss::rat(3, 4));
        assert_eq!(g("-2/6"), Gauss::rat(-1, 3));
        assert_eq!(g("1/2 - 3/5 i"), Gauss::new(rat(1, 2), rat(-3, 5)));
        assert_eq!(g("-7i"), Gauss::from_ints(0, -7));
        assert_eq!(g("-3-i"), Gauss::from_ints(-3, -1));
        assert_eq!(g("+i"), Gauss::i());
        for bad in ["", "1/0", "1/-2", "a", "1+2", "i1", "1//2", "2+3j"] {
            assert!(bad.parse::<Gauss>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn display_is_parseable() {
        for s in ["0", "-5/3", "i", "-i", "2+i", "3/2-1/2i", "-4/7i", "1-2i"] {
            let v = g(s);
            assert_eq!(g(&v.to_string()), v);
        }
        assert_eq!(g("3/2 - 1/2i").to_string(), "3/2-1/2i");
    }

    fn small_gauss() -> impl Strategy<Value = Gauss> {
        (-20i64..20, 1i64..6, -20i64..20, 1i64..6)
            .prop_map(|(a, b, c, d)| Gauss::new(rat(a, b), rat(c, d)))
    }

    fn small_vec() -> impl Strategy<Value = CVec2> {
        (small_gauss(), small_gauss()).prop_map(|(x, y)| CVec2::new(x, y))
    }

    proptest! {
        #[test]
        fn field_axioms(a in small_gauss(), b in small_gauss(), c in small_gauss()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.inv().unwrap(), Gauss::one());
            }
            prop_assert_eq!(Gauss::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn symplectic_bilinear_antisymmetric(
            u in small_vec(), v in small_vec(), w in small_vec(),
            a in small_gauss(), b in small_gauss(),
        ) {
            let lhs = symplectic(&(&u.scale(&a) + &v.scale(&b)), &w);
            let rhs = &a * &symplectic(&u, &w) + &b * &symplectic(&v, &w);
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(symplectic(&u, &v), -symplectic(&v, &u));
            prop_assert!(symplectic(&u, &u).is_zero());
        }
    }
}
