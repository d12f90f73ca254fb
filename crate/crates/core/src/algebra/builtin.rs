use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};

use super::{GradedGroup, StructureConstants};
use crate::error::{Error, Result};
use crate::scalar::{fmt_rational, int, parse_rational, Rational};

/// Built-in group constructors.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupSpec {
    /// Abelian group with the given weights (one per coordinate).
    Abelian(Vec<Rational>),
    /// Heisenberg group Hⁿ with basis X₁..Xₙ, Y₁..Yₙ, Z.
    Heisenberg(usize),
    /// H¹ graded with weights (1, α, α+1).
    HeisenbergNonstandard(Rational),
    /// Free nilpotent step-2 group of rank r: X₁..X_r, then X_ij = [X_i, X_j] for i < j.
    FreeStep2(usize),
    Product(Box<GroupSpec>, Box<GroupSpec>),
    /// t-power: weights multiplied by t.
    Power(Box<GroupSpec>, Rational),
    /// Step-3 algebra with generators e1, e2, e3 and [e2, e3] = 0.
    GradedVsStratified,
}

pub fn builtin_group(spec: &GroupSpec) -> Result<GradedGroup> {
    GradedGroup::new(spec.algebra()?, spec.to_string())
}

impl GroupSpec {
    pub fn algebra(&self) -> Result<StructureConstants> {
        match self {
            GroupSpec::Abelian(w) => {
                if w.is_empty() {
                    return Err(Error::Input("abelian group needs at least one weight".into()));
                }
                let mut w = w.clone();
                w.sort();
                StructureConstants::new(w, BTreeMap::new())
            }
            GroupSpec::Heisenberg(n) => {
                let n = *n;
                if n == 0 {
                    return Err(Error::Input("heisenberg(n) needs n >= 1".into()));
                }
                let mut w = vec![int(1); 2 * n];
                w.push(int(2));
                let pairs = (0..n).map(|j| ((j, n + j), vec![(2 * n, int(1))])).collect();
                StructureConstants::from_pairs(w, pairs)
            }
            GroupSpec::HeisenbergNonstandard(alpha) => {
                if alpha <= &Rational::one() {
                    return Err(Error::Input("non-standard Heisenberg needs alpha > 1".into()));
                }
                let w = vec![int(1), alpha.clone(), alpha + int(1)];
                StructureConstants::from_pairs(w, vec![((0, 1), vec![(2, int(1))])])
            }
            GroupSpec::FreeStep2(r) => {
                let r = *r;
                if r < 2 {
                    return Err(Error::Input("free_step2(r) needs r >= 2".into()));
                }
                let mut w = vec![int(1); r];
                let mut pairs = Vec::new();
                let mut k = r;
                for i in 0..r {
                    for j in i + 1..r {
                        w.push(int(2));
                        pairs.push(((i, j), vec![(k, int(1))]));
                        k += 1;
                    }
                }
                StructureConstants::from_pairs(w, pairs)
            }
            GroupSpec::Product(g, h) => Ok(direct_sum(&g.algebra()?, &h.algebra()?).0),
            GroupSpec::Power(g, t) => {
                if !t.is_positive() {
                    return Err(Error::Input("power exponent must be positive".into()));
                }
                g.algebra()?.scaled(t)
            }
            GroupSpec::GradedVsStratified => {
                // e1 e2 e3 | e12 e13 | f1..f5
                let w = [1, 1, 1, 2, 2, 3, 3, 3, 3, 3].iter().map(|&x| int(x)).collect();
                let one = || int(1);
                let pairs = vec![
                    ((0, 1), vec![(3, one())]),
                    ((0, 2), vec![(4, one())]),
                    ((0, 3), vec![(5, one())]),
                    ((0, 4), vec![(6, one())]),
                    ((1, 3), vec![(7, one())]),
                    ((1, 4), vec![(8, one())]),
                    ((2, 3), vec![(8, one())]),
                    ((2, 4), vec![(9, one())]),
                ];
                StructureConstants::from_pairs(w, pairs)
            }
        }
    }
}

/// Graded direct sum in adapted order. Returns the algebra and, for each new index,
/// `(f, i)` naming the factor and its index there.
pub fn direct_sum(a: &StructureConstants, b: &StructureConstants) -> (StructureConstants, Vec<(usize, usize)>) {
    direct_sum_many(&[a, b])
}

pub fn direct_sum_many(parts: &[&StructureConstants]) -> (StructureConstants, Vec<(usize, usize)>) {
    let mut origin: Vec<(Rational, usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(f, alg)| alg.weights().iter().enumerate().map(move |(i, w)| (w.clone(), f, i)))
        .collect();
    origin.sort_by(|x, y| x.0.cmp(&y.0));
    let mut pos: Vec<Vec<usize>> = parts.iter().map(|a| vec![0; a.dim()]).collect();
    for (new, (_, f, i)) in origin.iter().enumerate() {
        pos[*f][*i] = new;
    }
    let mut map: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
    for (f, alg) in parts.iter().enumerate() {
        for ((i, j), terms) in alg.terms_map() {
            map.insert((pos[f][i], pos[f][j]), terms.into_iter().map(|(k, c)| (pos[f][k], c)).collect());
        }
    }
    let weights = origin.iter().map(|o| o.0.clone()).collect();
    let sc = StructureConstants::new(weights, map).expect("direct sum of valid inputs");
    (sc, origin.into_iter().map(|(_, f, i)| (f, i)).collect())
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Abelian(w) => {
                let ws: Vec<String> = w.iter().map(fmt_rational).collect();
                write!(f, "abelian({})", ws.join(","))
            }
            GroupSpec::Heisenberg(n) => write!(f, "heisenberg({n})"),
            GroupSpec::HeisenbergNonstandard(a) => {
                write!(f, "heisenberg_nonstandard({})", fmt_rational(a))
            }
            GroupSpec::FreeStep2(r) => write!(f, "free_step2({r})"),
            GroupSpec::Product(g, h) => write!(f, "product({g},{h})"),
            GroupSpec::Power(g, t) => write!(f, "power({g},{})", fmt_rational(t)),
            GroupSpec::GradedVsStratified => write!(f, "graded_vs_stratified"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let g = p.group()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Input(format!("trailing input in group expression {s:?}")));
        }
        Ok(g)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Input(format!("expected '{}' at offset {}", c as char, self.pos)))
        }
    }

    fn number(&mut self) -> Result<Rational> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b')') {
            self.pos += 1;
        }
        parse_rational(&String::from_utf8_lossy(&self.s[start..self.pos]))
    }

    fn count(&mut self) -> Result<usize> {
        let q = self.number()?;
        if !q.is_integer() || q.is_negative() {
            return Err(Error::Input("expected a nonnegative integer".into()));
        }
        q.to_integer().try_into().map_err(|_| Error::Input("integer too large".into()))
    }

    fn group(&mut self) -> Result<GroupSpec> {
        let name = self.ident();
        let g = match name.as_str() {
            "graded_vs_stratified" => {
                if self.eat(b'(') {
                    self.expect(b')')?;
                }
                return Ok(GroupSpec::GradedVsStratified);
            }
            "abelian" => {
                self.expect(b'(')?;
                let mut w = vec![self.number()?];
                while self.eat(b',') {
                    w.push(self.number()?);
                }
                GroupSpec::Abelian(w)
            }
            "heisenberg" => {
                self.expect(b'(')?;
                GroupSpec::Heisenberg(self.count()?)
            }
            "heisenberg_nonstandard" => {
                self.expect(b'(')?;
                GroupSpec::HeisenbergNonstandard(self.number()?)
            }
            "free_step2" => {
                self.expect(b'(')?;
                GroupSpec::FreeStep2(self.count()?)
            }
            "product" => {
                self.expect(b'(')?;
                let a = self.group()?;
                self.expect(b',')?;
                let b = self.group()?;
                GroupSpec::Product(Box::new(a), Box::new(b))
            }
            "power" => {
                self.expect(b'(')?;
                let a = self.group()?;
                self.expect(b',')?;
                GroupSpec::Power(Box::new(a), self.number()?)
            }
            other => return Err(Error::Input(format!("unknown group {other:?}"))),
        };
        self.expect(b')')?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parse_round_trip() {
        for s in [
            "abelian(1,1,2)",
            "heisenberg(2)",
            "heisenberg_nonstandard(3/2)",
            "free_step2(3)",
            "product(heisenberg(1),abelian(1))",
            "power(product(free_step2(2),abelian(1/2)),3)",
            "graded_vs_stratified",
        ] {
            let g: GroupSpec = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("heisenberg(".parse::<GroupSpec>().is_err());
        assert!("foo(1)".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn free_step2_two_is_heisenberg() {
        let f = builtin_group(&GroupSpec::FreeStep2(2)).unwrap();
        let h = builtin_group(&GroupSpec::Heisenberg(1)).unwrap();
        assert_eq!(f.algebra(), h.algebra());
        assert_eq!(f.dim(), 3);
        let f4 = builtin_group(&GroupSpec::FreeStep2(4)).unwrap();
        assert_eq!(f4.dim(), 4 + 6);
    }

    #[test]
    fn power_scales_weights() {
        let g = builtin_group(&GroupSpec::Power(Box::new(GroupSpec::Heisenberg(1)), int(2))).unwrap();
        assert_eq!(g.algebra().weights(), &[int(2), int(2), int(4)]);
    }

    #[test]
    fn product_of_lines() {
        let a = GroupSpec::Abelian(vec![int(1)]);
        let p = GroupSpec::Product(Box::new(a.clone()), Box::new(a));
        assert_eq!(p.algebra().unwrap(), GroupSpec::Abelian(vec![int(1), int(1)]).algebra().unwrap());
    }

    #[test]
    fn product_keeps_adapted_order() {
        let p = GroupSpec::Product(
            Box::new(GroupSpec::HeisenbergNonstandard(int(2))),
            Box::new(GroupSpec::Abelian(vec![rat(3, 2)])),
        );
        let alg = p.algebra().unwrap();
        assert_eq!(alg.weights(), &[int(1), rat(3, 2), int(2), int(3)]);
        assert!(alg.validate().is_valid());
        assert_eq!(alg.basis_bracket(0, 2)[3], int(1));
    }

    #[test]
    fn fixture_is_valid_step3() {
        let g = builtin_group(&GroupSpec::GradedVsStratified).unwrap();
        assert_eq!(g.step(), 3);
        assert_eq!(g.dim(), 10);
    }

    #[test]
    fn invalid_params() {
        assert!(builtin_group(&GroupSpec::FreeStep2(1)).is_err());
        assert!(builtin_group(&GroupSpec::HeisenbergNonstandard(int(1))).is_err());
        assert!(builtin_group(&GroupSpec::Heisenberg(0)).is_err());
        assert!(builtin_group(&GroupSpec::Power(Box::new(GroupSpec::Heisenberg(1)), int(0))).is_err());
    }
}
