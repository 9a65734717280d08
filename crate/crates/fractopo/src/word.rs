//! Multiindices (finite words over the map indices) and eventually
//! periodic addresses.
//!
//! Addresses are the only infinite words the crate represents exactly: a
//! preperiod followed by a repeating period, kept in canonical form so that
//! address equality is structural equality.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimSystem;

/// A finite word over `{1..m}`. The empty word stands for the identity
/// composition; it is accepted by plumbing code and rejected where a genuine
/// contraction is required.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Build from 1-based letters; zero letters are rejected outright
    /// (range against a concrete system is checked at use sites).
    pub fn from_letters(letters: Vec<u8>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::LetterOutOfRange { letter: 0, m: 0 });
        }
        Ok(Word(letters))
    }

    /// Parse `"125"` (single digits) or `"1.2.12"` (dot-separated) forms.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word::empty());
        }
        let letters: Vec<u8> = if text.contains('.') {
            text.split('.')
                .map(|p| {
                    p.parse::<u8>()
                        .map_err(|_| Error::Validation(format!("bad letter {p:?} in word")))
                })
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|ch| {
                    ch.to_digit(10)
                        .filter(|&d| d >= 1)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::Validation(format!("bad letter {ch:?} in word")))
                })
                .collect::<Result<_>>()?
        };
        Word::from_letters(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: u8) {
        debug_assert!(letter > 0);
        self.0.push(letter);
    }

    pub fn child(&self, letter: u8) -> Word {
        let mut w = self.clone();
        w.push(letter);
        w
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * times);
        for _ in 0..times {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Validate every letter against a system.
    pub fn check_in(&self, system: &SimSystem) -> Result<()> {
        for &l in &self.0 {
            system.map(l)?;
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    /// Single-digit letters print packed (`"123"`); anything larger falls
    /// back to dot separation so the form stays unambiguous.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        if self.0.iter().all(|&l| l <= 9) {
            for l in &self.0 {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// How two multiindices relate as tree nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordRelation {
    Equal,
    /// The first is a proper prefix of the second.
    Prefix,
    /// The first properly extends the second.
    Extension,
    Incomparable,
}

pub fn word_relation(u: &Word, v: &Word) -> WordRelation {
    if u == v {
        WordRelation::Equal
    } else if u.is_prefix_of(v) {
        WordRelation::Prefix
    } else if v.is_prefix_of(u) {
        WordRelation::Extension
    } else {
        WordRelation::Incomparable
    }
}

/// An eventually periodic infinite word `preperiod · period · period · …`,
/// held in canonical form: the period is primitive and the preperiod is the
/// shortest one producing this infinite word. Equality of `Address` values
/// is then equality of the infinite words they denote.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Address {
    preperiod: Word,
    period: Word,
}

impl Address {
    /// Canonicalizes on construction. The period must be nonempty.
    pub fn new(preperiod: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Validation("address period must be nonempty".into()));
        }
        let mut pre = preperiod.0;
        let mut per = primitive_root(&period.0);
        // While the preperiod ends with the period's last letter, the period
        // can be rotated backwards over it: u·a (w₀·a)^∞ = u (a·w₀)^∞.
        while let Some(&last) = pre.last() {
            if last != *per.last().unwrap() {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(Address {
            preperiod: Word(pre),
            period: Word(per),
        })
    }

    pub fn periodic(period: Word) -> Result<Self> {
        Address::new(Word::empty(), period)
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    /// The letter at 0-based position `k` of the infinite word.
    pub fn letter(&self, k: usize) -> u8 {
        if k < self.preperiod.len() {
            self.preperiod.0[k]
        } else {
            let k = (k - self.preperiod.len()) % self.period.len();
            self.period.0[k]
        }
    }

    /// The finite truncation of length `len`.
    pub fn truncate(&self, len: usize) -> Word {
        Word((0..len).map(|k| self.letter(k)).collect())
    }

    /// The address of the shifted word: drops the first letter.
    pub fn shift(&self) -> Address {
        if self.preperiod.is_empty() {
            let mut per = self.period.0.clone();
            per.rotate_left(1);
            Address::new(Word::empty(), Word(per)).expect("nonempty period")
        } else {
            Address::new(Word(self.preperiod.0[1..].to_vec()), self.period.clone())
                .expect("nonempty period")
        }
    }

    /// Prepend a finite word.
    pub fn with_prefix(&self, prefix: &Word) -> Address {
        Address::new(prefix.concat(&self.preperiod), self.period.clone()).expect("nonempty period")
    }

    pub fn check_in(&self, system: &SimSystem) -> Result<()> {
        self.preperiod.check_in(system)?;
        self.period.check_in(system)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.preperiod.is_empty() {
            write!(f, "({})^inf", self.period)
        } else {
            write!(f, "{}({})^inf", self.preperiod, self.period)
        }
    }
}

/// Shortest word whose repetition gives `w`.
fn primitive_root(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    for d in 1..=n {
        if n % d == 0 && w.chunks(d).all(|chunk| chunk == &w[..d]) {
            return w[..d].to_vec();
        }
    }
    w.to_vec()
}

/// The index map π on eventually periodic addresses:
/// `π(j·ī) = S_j(fix S_i)`, the single point in the nested pieces.
pub fn eval_address(system: &SimSystem, address: &Address) -> Result<Complex64> {
    address.check_in(system)?;
    let fix = system.compose(address.period())?.fixed_point()?;
    Ok(system.compose(address.preperiod())?.apply(fix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    #[test]
    fn relation_examples() {
        let w = |s: &str| Word::parse(s).unwrap();
        assert_eq!(word_relation(&w("1"), &w("12")), WordRelation::Prefix);
        assert_eq!(word_relation(&w("12"), &w("13")), WordRelation::Incomparable);
        assert_eq!(word_relation(&w("21"), &w("21")), WordRelation::Equal);
        assert_eq!(word_relation(&w("122"), &w("12")), WordRelation::Extension);
        assert_eq!(word_relation(&Word::empty(), &w("3")), WordRelation::Prefix);
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["1", "123", "2221"] {
            assert_eq!(Word::parse(s).unwrap().to_string(), s);
        }
        let long = Word::from_letters(vec![1, 12, 3]).unwrap();
        assert_eq!(long.to_string(), "1.12.3");
        assert_eq!(Word::parse("1.12.3").unwrap(), long);
        assert_eq!(Word::parse("").unwrap(), Word::empty());
        assert!(Word::parse("105").is_err());
        assert!(Word::parse("0").is_err());
    }

    #[test]
    fn canonical_form_shortens_preperiod_and_period() {
        // "12 2̄" and "1 2̄" are the same infinite word.
        let a = Address::new(Word::parse("12").unwrap(), Word::parse("2").unwrap()).unwrap();
        assert_eq!(a.preperiod(), &Word::parse("1").unwrap());
        assert_eq!(a.period(), &Word::parse("2").unwrap());

        // Non-primitive periods reduce.
        let b = Address::periodic(Word::parse("2121").unwrap()).unwrap();
        assert_eq!(b.period(), &Word::parse("21").unwrap());

        // Rotation while shrinking: 121 (21)^inf = 1 (12)^inf... spelled out:
        // 1,2,1,2,1,2,… both ways.
        let c1 = Address::new(Word::parse("121").unwrap(), Word::parse("21").unwrap()).unwrap();
        let c2 = Address::periodic(Word::parse("12").unwrap()).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let a = Address::new(Word::parse("3122").unwrap(), Word::parse("1212").unwrap()).unwrap();
        let again = Address::new(a.preperiod().clone(), a.period().clone()).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn truncate_and_letter_agree() {
        let a = Address::new(Word::parse("31").unwrap(), Word::parse("12").unwrap()).unwrap();
        assert_eq!(a.truncate(7), Word::parse("3112121").unwrap());
    }

    #[test]
    fn eval_address_examples() {
        let sys = systems::gasket();
        // preperiod "2", period "1": S₂(fix S₁) = S₂(0) = 1/2
        let a = Address::new(Word::parse("2").unwrap(), Word::parse("1").unwrap()).unwrap();
        let p = eval_address(&sys, &a).unwrap();
        assert!((p - Complex64::new(0.5, 0.0)).norm() < 1e-14);

        // pure period "k" is fix(S_k)
        for k in 1..=3u8 {
            let a = Address::periodic(Word::from_letters(vec![k]).unwrap()).unwrap();
            let fix = sys.map(k).unwrap().fixed_point().unwrap();
            assert!((eval_address(&sys, &a).unwrap() - fix).norm() < 1e-14);
        }

        // period "12": fix of z ↦ z/4 + 1/4 is 1/3
        let a = Address::periodic(Word::parse("12").unwrap()).unwrap();
        let p = eval_address(&sys, &a).unwrap();
        assert!((p - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eval_respects_shift() {
        // π(k·α) = S_k(π(α))
        let sys = systems::gasket();
        let a = Address::new(Word::parse("12").unwrap(), Word::parse("312").unwrap()).unwrap();
        for k in 1..=3u8 {
            let shifted = a.with_prefix(&Word::from_letters(vec![k]).unwrap());
            let lhs = eval_address(&sys, &shifted).unwrap();
            let rhs = sys.map(k).unwrap().apply(eval_address(&sys, &a).unwrap());
            assert!((lhs - rhs).norm() < 1e-13);
        }
        // and shift() is the left inverse on the symbol side
        let a2 = a.with_prefix(&Word::parse("2").unwrap());
        assert_eq!(a2.shift(), a);
    }
}
