//! Sparse multivariate polynomials over exact rationals, with division by
//! rewrite rules whose leading monomials are pairwise coprime.
//!
//! Terms live in a `BTreeMap` keyed by exponent vector, so map order is the
//! lexicographic monomial order over the declared variable order and the last
//! key is the leading monomial.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::{Complex, Integer, Rational};

use crate::error::{Error, Result};

pub type Rat = Rational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn render(&self, vars: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(vars)
            .filter(|(e, _)| **e > 0)
            .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

fn owned_vars(vars: &[&str]) -> Vec<String> {
    vars.iter().map(|s| s.to_string()).collect()
}

fn add_term(terms: &mut BTreeMap<Monomial, Rat>, m: Monomial, c: Rat) {
    if c.cmp0().is_eq() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().cmp0().is_eq() {
                e.remove();
            }
        }
    }
}

impl RatPoly {
    pub fn zero(vars: &[&str]) -> Self {
        RatPoly { vars: owned_vars(vars), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &[&str], c: Rat) -> Self {
        let mut p = Self::zero(vars);
        add_term(&mut p.terms, Monomial::one(vars.len()), c);
        p
    }

    pub fn var(vars: &[&str], name: &str) -> Result<Self> {
        let idx = vars
            .iter()
            .position(|v| *v == name)
            .ok_or_else(|| Error::UnknownVariable(name.into()))?;
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(Monomial(e), Rat::from(1));
        Ok(p)
    }

    /// Builds from raw terms; zero coefficients are dropped.
    pub fn from_terms(vars: &[&str], terms: impl IntoIterator<Item = (Vec<u32>, Rat)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::BadRule(format!(
                    "exponent vector of length {} for {} variables",
                    e.len(),
                    vars.len()
                )));
            }
            add_term(&mut p.terms, Monomial(e), c);
        }
        Ok(p)
    }

    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        Parser { src: src.as_bytes(), pos: 0, vars }.parse()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.index_of(name) {
            Some(i) => self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Leading term under lex order over the declared variable order.
    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_default()
    }

    /// Constant value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::new()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Re-expresses over `vars`, which must contain every variable that occurs.
    pub fn with_vars(&self, vars: &[String]) -> Result<Self> {
        if vars == self.vars.as_slice() {
            return Ok(self.clone());
        }
        let map: Vec<Option<usize>> = self.vars.iter().map(|v| vars.iter().position(|w| w == v)).collect();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &x) in m.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => e[j] = x,
                    None => return Err(Error::UnknownVariable(self.vars[i].clone())),
                }
            }
            terms.insert(Monomial(e), c.clone());
        }
        Ok(RatPoly { vars: vars.to_vec(), terms })
    }

    pub fn reorder(&self, vars: &[&str]) -> Result<Self> {
        self.with_vars(&owned_vars(vars))
    }

    fn union_vars(a: &[String], b: &[String]) -> Vec<String> {
        let mut out = a.to_vec();
        for v in b {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    fn aligned(&self, other: &RatPoly) -> (RatPoly, RatPoly) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let u = Self::union_vars(&self.vars, &other.vars);
        (self.with_vars(&u).unwrap(), other.with_vars(&u).unwrap())
    }

    pub fn scale(&self, c: &Rat) -> RatPoly {
        let mut out = RatPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        if c.cmp0().is_eq() {
            return out;
        }
        for (m, x) in &self.terms {
            out.terms.insert(m.clone(), Rat::from(x * c));
        }
        out
    }

    fn mul_same(&self, other: &RatPoly) -> RatPoly {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                add_term(&mut terms, ma.times(mb), Rat::from(ca * cb));
            }
        }
        RatPoly { vars: self.vars.clone(), terms }
    }

    fn add_same(&self, other: &RatPoly, sign: i32) -> RatPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let c = if sign < 0 { Rat::from(-c) } else { c.clone() };
            add_term(&mut terms, m.clone(), c);
        }
        RatPoly { vars: self.vars.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> RatPoly {
        let mut acc = RatPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        add_term(&mut acc.terms, Monomial::one(self.vars.len()), Rat::from(1));
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_same(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same(&base);
            }
        }
        acc
    }

    /// Exact value at a rational assignment covering every variable.
    pub fn eval(&self, assignment: &HashMap<&str, Rat>) -> Result<Rat> {
        let vals: Vec<Option<&Rat>> = self.vars.iter().map(|v| assignment.get(v.as_str())).collect();
        let mut acc = Rat::new();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = vals[i].ok_or_else(|| Error::MissingVariable(self.vars[i].clone()))?;
                t *= v.clone().pow(e);
            }
            acc += t;
        }
        // report a missing variable even when it never occurs with nonzero exponent
        if let Some(i) = vals.iter().position(Option::is_none) {
            return Err(Error::MissingVariable(self.vars[i].clone()));
        }
        Ok(acc)
    }

    /// Numeric value at a complex assignment covering every occurring variable.
    pub fn eval_complex(&self, assignment: &HashMap<&str, Complex>, prec: u32) -> Result<Complex> {
        let n = self.vars.len();
        let mut maxe = vec![0u32; n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                maxe[i] = maxe[i].max(e);
            }
        }
        let mut powers: Vec<Vec<Complex>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![Complex::with_val(prec, 1)];
            if maxe[i] > 0 {
                let v = assignment
                    .get(self.vars[i].as_str())
                    .ok_or_else(|| Error::MissingVariable(self.vars[i].clone()))?;
                for k in 1..=maxe[i] as usize {
                    let next = Complex::with_val(prec, &row[k - 1] * v);
                    row.push(next);
                }
            }
            powers.push(row);
        }
        let mut acc = Complex::new(prec);
        for (m, c) in &self.terms {
            let mut t = Complex::with_val(prec, c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Replaces the named variables by polynomials; all results live over `target`.
    pub fn compose(&self, subs: &HashMap<&str, RatPoly>, target: &[&str]) -> Result<RatPoly> {
        self.compose_with(subs, target, None)
    }

    /// Like `compose`, reducing every intermediate product with `reducer`.
    pub fn compose_reduced(&self, subs: &HashMap<&str, RatPoly>, reducer: &Reducer) -> Result<RatPoly> {
        let target: Vec<&str> = reducer.vars.iter().map(String::as_str).collect();
        self.compose_with(subs, &target, Some(reducer))
    }

    fn compose_with(&self, subs: &HashMap<&str, RatPoly>, target: &[&str], red: Option<&Reducer>) -> Result<RatPoly> {
        let tv = owned_vars(target);
        let reduce = |p: RatPoly| match red {
            Some(r) => r.reduce(&p),
            None => p,
        };
        let mut images = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let img = match subs.get(v.as_str()) {
                Some(p) => p.with_vars(&tv)?,
                // declared but unused: any image will do
                None if self.degree_in(v) == 0 && !target.contains(&v.as_str()) => RatPoly::constant(target, Rat::from(1)),
                None => RatPoly::var(target, v)?,
            };
            images.push(img);
        }
        let mut cache: Vec<Vec<RatPoly>> = images
            .iter()
            .map(|img| vec![RatPoly::constant(target, Rat::from(1)), img.clone()])
            .collect();
        let mut acc = RatPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = RatPoly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = reduce(cache[i].last().unwrap().mul_same(&images[i]));
                    cache[i].push(next);
                }
                t = reduce(t.mul_same(&cache[i][e as usize]));
            }
            acc = acc.add_same(&t, 1);
        }
        Ok(reduce(acc))
    }

    /// Fixes one variable to a rational value (the variable stays declared).
    pub fn specialize(&self, name: &str, value: &Rat) -> RatPoly {
        let Some(i) = self.index_of(name) else { return self.clone() };
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = std::mem::take(&mut e[i]);
            add_term(&mut terms, Monomial(e), Rat::from(c * value.clone().pow(k)));
        }
        RatPoly { vars: self.vars.clone(), terms }
    }

    /// Splits into coefficients of powers of one variable: p = sum_k coeffs[k]·v^k.
    pub fn coefficients_in(&self, name: &str) -> Vec<RatPoly> {
        let Some(i) = self.index_of(name) else { return vec![self.clone()] };
        let mut out: Vec<RatPoly> = Vec::new();
        for (m, c) in &self.terms {
            let k = m.0[i] as usize;
            while out.len() <= k {
                out.push(RatPoly { vars: self.vars.clone(), terms: BTreeMap::new() });
            }
            let mut e = m.0.clone();
            e[i] = 0;
            out[k].terms.insert(Monomial(e), c.clone());
        }
        out
    }

    /// Formal partial derivative.
    pub fn derivative(&self, name: &str) -> RatPoly {
        let mut out = RatPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        let Some(i) = self.index_of(name) else { return out };
        for (m, c) in &self.terms {
            let k = m.0[i];
            if k == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            out.terms.insert(Monomial(e), Rat::from(c * k));
        }
        out
    }

    /// Multiplier that clears the listed fraction-field variables: every variable
    /// `v` in `fracs` stands for `num_v / den`, and the result is
    /// den^m · p(num/den) with m the joint degree of p in those variables.
    pub fn clear_fraction_vars(&self, fracs: &[(&str, RatPoly)], den: &RatPoly) -> Result<(RatPoly, u32)> {
        let idx: Vec<usize> = fracs
            .iter()
            .map(|(v, _)| self.index_of(v).ok_or_else(|| Error::UnknownVariable(v.to_string())))
            .collect::<Result<_>>()?;
        let deg = |m: &Monomial| idx.iter().map(|&i| m.0[i]).sum::<u32>();
        let m = self.terms.keys().map(deg).max().unwrap_or(0);
        let u = fracs
            .iter()
            .fold(Self::union_vars(&self.vars, &den.vars), |u, (_, p)| Self::union_vars(&u, &p.vars));
        let uv: Vec<&str> = u.iter().map(String::as_str).collect();
        let den = den.with_vars(&u)?;
        let nums: Vec<RatPoly> = fracs.iter().map(|(_, p)| p.with_vars(&u)).collect::<Result<_>>()?;
        let den_pows: Vec<RatPoly> = (0..=m).map(|k| den.pow(k)).collect();
        let mut acc = RatPoly::zero(&uv);
        for (mono, c) in &self.terms {
            let mut rest = mono.0.clone();
            let mut t = RatPoly::constant(&uv, c.clone());
            for (j, &i) in idx.iter().enumerate() {
                let e = std::mem::take(&mut rest[i]);
                if e > 0 {
                    t = t.mul_same(&nums[j].pow(e));
                }
            }
            let mut r = RatPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
            r.terms.insert(Monomial(rest), Rat::from(1));
            t = t.mul_same(&r.with_vars(&u)?);
            t = t.mul_same(&den_pows[(m - deg(mono)) as usize]);
            acc = acc.add_same(&t, 1);
        }
        Ok((acc, m))
    }
}

/// Exact `p op q` over the union of both variable lists.
pub fn poly_arith(p: &RatPoly, q: &RatPoly, op: ArithOp) -> RatPoly {
    let (a, b) = p.aligned(q);
    match op {
        ArithOp::Add => a.add_same(&b, 1),
        ArithOp::Sub => a.add_same(&b, -1),
        ArithOp::Mul => a.mul_same(&b),
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        poly_arith(self, rhs, ArithOp::Add)
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        poly_arith(self, rhs, ArithOp::Sub)
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        poly_arith(self, rhs, ArithOp::Mul)
    }
}

impl Add for RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: RatPoly) -> RatPoly {
        &self + &rhs
    }
}

impl Sub for RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: RatPoly) -> RatPoly {
        &self - &rhs
    }
}

impl Mul for RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: RatPoly) -> RatPoly {
        &self * &rhs
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        self.scale(&Rat::from(-1))
    }
}

impl Neg for RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        -&self
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.cmp0().is_lt();
            let a = Rat::from(c.abs_ref());
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono = m.render(&self.vars);
            if mono == "1" {
                write!(f, "{a}")?;
            } else if a == 1 {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// `lead → replacement`, i.e. the relation lead − replacement = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    lead: Monomial,
    replacement: RatPoly,
}

impl RewriteRule {
    /// Every replacement monomial must sit strictly below `lead` in lex order,
    /// which rules out monomials divisible by `lead` and guarantees termination.
    pub fn new(lead: Monomial, replacement: RatPoly) -> Result<Self> {
        if lead.0.len() != replacement.vars.len() {
            return Err(Error::BadRule("leading monomial length differs from variable count".into()));
        }
        if let Some(m) = replacement.terms.keys().find(|m| lead.divides(m)) {
            return Err(Error::BadRule(format!(
                "replacement monomial {} is divisible by the leading monomial {}",
                m.render(&replacement.vars),
                lead.render(&replacement.vars)
            )));
        }
        if let Some(m) = replacement.terms.keys().find(|m| **m > lead) {
            return Err(Error::BadRule(format!(
                "replacement monomial {} is above the leading monomial {}",
                m.render(&replacement.vars),
                lead.render(&replacement.vars)
            )));
        }
        Ok(RewriteRule { lead, replacement })
    }

    /// Orients a generator by its lex-leading term and normalizes it to coefficient 1.
    pub fn from_generator(g: &RatPoly) -> Result<Self> {
        let (m, c) = g.leading().ok_or_else(|| Error::BadRule("zero generator".into()))?;
        let m = m.clone();
        let inv = Rat::from(c.recip_ref());
        let mut tail = g.clone();
        tail.terms.remove(&m);
        Self::new(m, tail.scale(&Rat::from(-inv)))
    }

    pub fn lead(&self) -> &Monomial {
        &self.lead
    }

    pub fn replacement(&self) -> &RatPoly {
        &self.replacement
    }

    pub fn vars(&self) -> &[String] {
        &self.replacement.vars
    }

    /// The defining polynomial lead − replacement.
    pub fn generator(&self) -> RatPoly {
        let mut g = -&self.replacement;
        add_term(&mut g.terms, self.lead.clone(), Rat::from(1));
        g
    }

    pub fn describe(&self) -> String {
        format!("{} -> {}", self.lead.render(&self.replacement.vars), self.replacement)
    }
}

/// A set of rules aligned to one variable universe.
#[derive(Clone, Debug)]
pub struct Reducer {
    vars: Vec<String>,
    rules: Vec<(Monomial, RatPoly)>,
}

impl Reducer {
    pub fn new(vars: &[&str], rules: &[RewriteRule]) -> Result<Self> {
        let vars = owned_vars(vars);
        let mut aligned: Vec<(Monomial, RatPoly)> = Vec::new();
        for r in rules {
            let rv: Vec<&str> = r.vars().iter().map(String::as_str).collect();
            let mut lead = RatPoly::zero(&rv);
            lead.terms.insert(r.lead.clone(), Rat::from(1));
            let lead = lead.with_vars(&vars)?.terms.into_keys().next().unwrap();
            let repl = r.replacement.with_vars(&vars)?;
            let rule = RewriteRule::new(lead, repl)?;
            for (other, _) in &aligned {
                if !other.coprime(&rule.lead) {
                    return Err(Error::NonCoprimeRules(other.render(&vars), rule.lead.render(&vars)));
                }
            }
            aligned.push((rule.lead, rule.replacement));
        }
        Ok(Reducer { vars, rules: aligned })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Normal form: no remaining monomial is divisible by a leading monomial.
    pub fn reduce(&self, p: &RatPoly) -> RatPoly {
        let p = p.with_vars(&self.vars).expect("polynomial outside the reducer's variables");
        let mut work = p.terms;
        let mut done = BTreeMap::new();
        while let Some((m, c)) = work.pop_last() {
            match self.rules.iter().find(|(lead, _)| lead.divides(&m)) {
                Some((lead, repl)) => {
                    let q = m.quotient(lead);
                    for (rm, rc) in &repl.terms {
                        add_term(&mut work, q.times(rm), Rat::from(&c * rc));
                    }
                }
                None => {
                    done.insert(m, c);
                }
            }
        }
        RatPoly { vars: self.vars.clone(), terms: done }
    }

    pub fn mul(&self, a: &RatPoly, b: &RatPoly) -> RatPoly {
        self.reduce(&poly_arith(a, b, ArithOp::Mul))
    }
}

/// Division of `p` by `rules`; the leading monomials must be pairwise coprime.
pub fn reduce_mod(p: &RatPoly, rules: &[RewriteRule]) -> Result<RatPoly> {
    let mut u = p.vars.clone();
    for r in rules {
        u = RatPoly::union_vars(&u, r.vars());
    }
    let uv: Vec<&str> = u.iter().map(String::as_str).collect();
    Ok(Reducer::new(&uv, rules)?.reduce(p))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<RatPoly> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<RatPoly> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add_same(&self.term()?, 1);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.add_same(&self.term()?, -1);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatPoly> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul_same(&self.factor()?);
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.factor()?.as_constant().ok_or(Error::NonConstantDivisor)?;
                    if d.cmp0().is_eq() {
                        return Err(Error::DivisionByZero);
                    }
                    acc = acc.scale(&Rat::from(d.recip_ref()));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RatPoly> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let e: u32 = match s.parse() {
                Ok(e) => e,
                Err(_) => return self.err("expected exponent"),
            };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: Integer = s.parse().unwrap();
                Ok(RatPoly::constant(self.vars, Rat::from(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                RatPoly::var(self.vars, name)
            }
            _ => self.err("expected a number, variable or `(`"),
        }
    }
}

/// Outcome of one exact ideal-membership check.
#[derive(Clone, Debug)]
pub struct ExactCheck {
    pub name: String,
    /// Factor the identity was multiplied by before reduction ("1" when none).
    pub multiplier: String,
    pub remainder: RatPoly,
}

impl ExactCheck {
    pub fn is_zero(&self) -> bool {
        self.remainder.is_zero()
    }

    pub fn summary(&self) -> String {
        if self.is_zero() {
            format!("remainder 0 (multiplier {})", self.multiplier)
        } else {
            format!(
                "remainder has {} terms, total degree {} (multiplier {})",
                self.remainder.len(),
                self.remainder.total_degree(),
                self.multiplier
            )
        }
    }
}

/// Convenience constructor for small rationals.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::from((n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    const XYU: [&str; 3] = ["x", "y", "U"];

    fn p(s: &str) -> RatPoly {
        RatPoly::parse(s, &XYU).unwrap()
    }

    fn e2_rule() -> RewriteRule {
        RewriteRule::from_generator(&p("(x^2+y^2)^2 - U*x*y - 1")).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(&p("x+y") + &p("x-y"), p("2*x"));
        assert_eq!(&p("x^2+y^2") * &p("x^2+y^2"), p("x^4+2*x^2*y^2+y^4"));
        let e2 = p("(x^2+y^2)^2 - U*x*y - 1");
        assert!((&e2 - &e2).is_zero());
    }

    #[test]
    fn reduce_examples() {
        let r = e2_rule();
        assert_eq!(r.describe(), "x^4 -> -2*x^2*y^2 + x*y*U - y^4 + 1");
        assert_eq!(reduce_mod(&p("(x^2+y^2)^2"), &[r.clone()]).unwrap(), p("U*x*y+1"));
        assert!(reduce_mod(&r.generator(), &[r.clone()]).unwrap().is_zero());
        assert_eq!(reduce_mod(&p("x^3*y"), &[r]).unwrap(), p("x^3*y"));
    }

    #[test]
    fn eval_examples() {
        let e2 = p("(x^2+y^2)^2 - U*x*y - 1");
        let mut a = HashMap::new();
        a.insert("x", rat(1, 2));
        a.insert("y", rat(1, 2));
        a.insert("U", rat(-3, 1));
        assert_eq!(e2.eval(&a).unwrap(), 0);
        a.insert("x", rat(1, 1));
        a.insert("y", rat(0, 1));
        assert_eq!(e2.eval(&a).unwrap(), 0);
        a.remove("U");
        assert_eq!(e2.eval(&a), Err(Error::MissingVariable("U".into())));
    }

    #[test]
    fn non_coprime_rules_rejected() {
        let r1 = RewriteRule::from_generator(&p("x^2*y - 1")).unwrap();
        let r2 = RewriteRule::from_generator(&p("x*y^2 - U")).unwrap();
        assert!(matches!(reduce_mod(&p("x"), &[r1, r2]), Err(Error::NonCoprimeRules(..))));
    }

    #[test]
    fn rule_with_divisible_replacement_rejected() {
        let lead = Monomial(vec![2, 0, 0]);
        assert!(RewriteRule::new(lead, p("x^3")).is_err());
    }

    #[test]
    fn parser_handles_rationals_and_errors() {
        assert_eq!(p("3/6*x"), p("x/2"));
        assert!(matches!(RatPoly::parse("x/y", &XYU), Err(Error::NonConstantDivisor)));
        assert!(matches!(RatPoly::parse("z", &XYU), Err(Error::UnknownVariable(_))));
        assert!(matches!(RatPoly::parse("(x", &XYU), Err(Error::Parse { .. })));
        assert_eq!(p("-(x-y)^2"), p("-x^2+2*x*y-y^2"));
    }

    #[test]
    fn alignment_by_name() {
        let a = RatPoly::parse("a+b", &["a", "b"]).unwrap();
        let b = RatPoly::parse("b+c", &["b", "c"]).unwrap();
        let s = &a + &b;
        assert_eq!(s.vars(), ["a", "b", "c"]);
        assert_eq!(s, RatPoly::parse("a+2*b+c", &["a", "b", "c"]).unwrap());
    }

    #[test]
    fn clear_fraction_vars_homogenizes() {
        let vars = ["w", "t"];
        let g = RatPoly::parse("w^2 + w + 1", &vars).unwrap();
        let num = RatPoly::parse("t", &["t"]).unwrap();
        let den = RatPoly::parse("t+1", &["t"]).unwrap();
        let (cleared, m) = g.clear_fraction_vars(&[("w", num)], &den).unwrap();
        assert_eq!(m, 2);
        let want = RatPoly::parse("t^2 + t*(t+1) + (t+1)^2", &vars).unwrap();
        assert_eq!(cleared, want);
    }
}
