//! Colored intersection types: the finite preorders interpreting simple types.

use crate::automata::{clause_holds, Apt, Color, State};
use crate::syntax::SimpleType;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

/// Largest enumeration accepted by default.
pub const DEFAULT_ENUM_BOUND: u128 = 1 << 20;

/// `State(q)` at ground sort, `u -> r` at arrow sorts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IType {
    State(State),
    Arrow(ColoredSet, Arc<IType>),
}

/// A canonical finite set of `(color, type)` pairs: sorted, no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ColoredSet(Arc<[(Color, IType)]>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ITypeError {
    #[error("sort mismatch between {0} and {1}")]
    SortMismatch(String, String),
    #[error("enumerating sort {sort} would produce {count} types (bound {bound})")]
    TooLarge { sort: String, count: String, bound: u128 },
    #[error("bad type syntax at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

impl ColoredSet {
    pub fn new(items: impl IntoIterator<Item = (Color, IType)>) -> ColoredSet {
        let mut v: Vec<_> = items.into_iter().collect();
        v.sort();
        v.dedup();
        ColoredSet(v.into())
    }

    pub fn empty() -> ColoredSet {
        ColoredSet::default()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, (Color, IType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: Color, t: &IType) -> bool {
        self.0.binary_search_by(|(c2, t2)| (c2, t2).cmp(&(&c, t))).is_ok()
    }

    pub fn union(&self, other: &ColoredSet) -> ColoredSet {
        ColoredSet::new(self.iter().chain(other.iter()).cloned())
    }

    /// Keeps only pairs not strictly below another pair of the same color;
    /// among equivalent pairs the least in canonical order stays.
    pub fn antichain(&self) -> ColoredSet {
        let keep = |i: usize| {
            let (c, a) = &self.0[i];
            !self.0.iter().enumerate().any(|(j, (c2, b))| {
                j != i && c == c2 && a.le(b) && (!b.le(a) || j < i)
            })
        };
        ColoredSet((0..self.0.len()).filter(|&i| keep(i)).map(|i| self.0[i].clone()).collect())
    }

    /// Text form such as `{0.q1,e.({e.q0}->q1)}`.
    pub fn display<'a>(&'a self, m: &'a Apt) -> impl fmt::Display + 'a {
        ShownSet(self, m)
    }

    /// The preorder on colored sets.
    pub fn le(&self, other: &ColoredSet) -> bool {
        set_below(self, other)
    }
}

impl<'a> IntoIterator for &'a ColoredSet {
    type Item = &'a (Color, IType);
    type IntoIter = std::slice::Iter<'a, (Color, IType)>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<(Color, IType)> for ColoredSet {
    fn from_iter<I: IntoIterator<Item = (Color, IType)>>(iter: I) -> Self {
        ColoredSet::new(iter)
    }
}

impl IType {
    pub fn arrow(u: ColoredSet, r: IType) -> IType {
        IType::Arrow(u, Arc::new(r))
    }

    /// `u1 -> ... -> un -> r`.
    pub fn arrows(us: impl IntoIterator<Item = ColoredSet>, r: IType) -> IType {
        let us: Vec<_> = us.into_iter().collect();
        us.into_iter().rev().fold(r, |acc, u| IType::arrow(u, acc))
    }

    /// Peels `n` arrows; `None` if there are fewer.
    pub fn split(&self, n: usize) -> Option<(Vec<&ColoredSet>, &IType)> {
        let mut sets = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            match cur {
                IType::Arrow(u, r) => {
                    sets.push(u);
                    cur = r;
                }
                IType::State(_) => return None,
            }
        }
        Some((sets, cur))
    }

    pub fn as_state(&self) -> Option<State> {
        match self {
            IType::State(q) => Some(*q),
            IType::Arrow(..) => None,
        }
    }

    /// The preorder on types; pairs of different sorts are unrelated.
    pub fn le(&self, other: &IType) -> bool {
        below(self, other)
    }

    /// Whether this type inhabits `sort`.
    pub fn has_sort(&self, sort: &SimpleType) -> bool {
        match (self, sort) {
            (IType::State(_), SimpleType::Ground) => true,
            (IType::Arrow(u, r), SimpleType::Arrow(d, c)) => u.iter().all(|(_, t)| t.has_sort(d)) && r.has_sort(c),
            _ => false,
        }
    }

    pub fn display<'a>(&'a self, m: &'a Apt) -> impl fmt::Display + 'a {
        Shown(self, m)
    }

    /// Reads the text form produced by `display`.
    pub fn parse(text: &str, m: &Apt) -> Result<IType, ITypeError> {
        let mut p = TypeParser { s: text.as_bytes(), pos: 0, m };
        let t = p.itype()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

fn le(a: &IType, b: &IType) -> Option<bool> {
    match (a, b) {
        (IType::State(p), IType::State(q)) => Some(p == q),
        (IType::Arrow(u, r), IType::Arrow(v, s)) => {
            // contravariant in the set, covariant in the result
            let sets = set_le(v, u)?;
            let res = le(r, s)?;
            Some(sets && res)
        }
        _ => None,
    }
}

fn set_le(u: &ColoredSet, v: &ColoredSet) -> Option<bool> {
    let mut all = true;
    for (c, a) in u {
        let mut found = false;
        for (d, b) in v {
            if c == d && le(a, b)? {
                found = true;
                break;
            }
        }
        all &= found;
    }
    Some(all)
}

/// Short-circuiting `le`; types of different sorts are unrelated.
fn below(a: &IType, b: &IType) -> bool {
    match (a, b) {
        (IType::State(p), IType::State(q)) => p == q,
        (IType::Arrow(u, r), IType::Arrow(v, s)) => below(r, s) && set_below(v, u),
        _ => false,
    }
}

fn set_below(u: &ColoredSet, v: &ColoredSet) -> bool {
    Arc::ptr_eq(&u.0, &v.0) || u.iter().all(|(c, a)| v.iter().any(|(d, b)| c == d && below(a, b)))
}

/// `a ≤ b`.
pub fn subtype(a: &IType, b: &IType) -> Result<bool, ITypeError> {
    le(a, b).ok_or_else(|| ITypeError::SortMismatch(format!("{:?}", a), format!("{:?}", b)))
}

/// `u ≤ v`: every `(c, α)` of `u` is below some `(c, β)` of `v`.
pub fn subtype_set(u: &ColoredSet, v: &ColoredSet) -> Result<bool, ITypeError> {
    set_le(u, v).ok_or_else(|| ITypeError::SortMismatch(format!("{:?}", u), format!("{:?}", v)))
}

/// `□_c u`: every color raised to at least `c`.
pub fn box_color(c: Color, u: &ColoredSet) -> ColoredSet {
    u.iter().map(|(ci, a)| (c.max(*ci), a.clone())).collect()
}

/// Whether `t` belongs to the denotation of the terminal `a` of the given arity.
pub fn is_terminal_type(a: &str, arity: usize, t: &IType, m: &Apt) -> Result<bool, ITypeError> {
    let mismatch = || ITypeError::SortMismatch(format!("{:?}", t), format!("terminal {} of arity {}", a, arity));
    let (sets, res) = t.split(arity).ok_or_else(mismatch)?;
    let q = res.as_state().ok_or_else(mismatch)?;
    let mut profile = Vec::with_capacity(arity);
    for u in sets {
        let mut ground = BTreeSet::new();
        for (c, t) in u {
            match t {
                IType::State(p) => {
                    ground.insert((*c, *p));
                }
                IType::Arrow(..) => return Ok(false),
            }
        }
        profile.push(ground);
    }
    Ok(m.clauses(q, a).iter().any(|cl| clause_holds(cl, &profile, m)))
}

/// `|enumerate(sort)|`, or `None` past `u128`.
pub fn cardinality(sort: &SimpleType, states: usize, colors: usize) -> Option<u128> {
    match sort {
        SimpleType::Ground => Some(states as u128),
        SimpleType::Arrow(d, c) => {
            let exp = (colors as u128).checked_mul(cardinality(d, states, colors)?)?;
            let rest = cardinality(c, states, colors)?;
            if exp >= 127 {
                return if rest == 0 { Some(0) } else { None };
            }
            (1u128 << exp).checked_mul(rest)
        }
    }
}

/// Enumeration of the type spaces of one automaton, with a size guard and a shared cache.
#[derive(Debug)]
pub struct TypeSpace {
    states: Vec<State>,
    colors: Vec<Color>,
    bound: u128,
    cache: RwLock<HashMap<SimpleType, Arc<Vec<IType>>>>,
}

impl TypeSpace {
    pub fn new(m: &Apt) -> TypeSpace {
        TypeSpace::with_bound(m, DEFAULT_ENUM_BOUND)
    }

    pub fn with_bound(m: &Apt, bound: u128) -> TypeSpace {
        TypeSpace {
            states: m.states().collect(),
            colors: m.color_set().into_iter().collect(),
            bound,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    /// Every canonical type of `sort`, in a fixed order.
    pub fn enumerate(&self, sort: &SimpleType) -> Result<Arc<Vec<IType>>, ITypeError> {
        if let Some(v) = self.cache.read().unwrap().get(sort) {
            return Ok(v.clone());
        }
        let count = cardinality(sort, self.states.len(), self.colors.len());
        match count {
            Some(n) if n <= self.bound => {}
            _ => {
                return Err(ITypeError::TooLarge {
                    sort: sort.to_string(),
                    count: count.map_or_else(|| "more than 2^128".to_string(), |n| n.to_string()),
                    bound: self.bound,
                })
            }
        }
        let out = Arc::new(match sort {
            SimpleType::Ground => self.states.iter().map(|&q| IType::State(q)).collect(),
            SimpleType::Arrow(d, c) => {
                let sets = self.colored_sets(d)?;
                let results = self.enumerate(c)?;
                let mut v = Vec::with_capacity(sets.len() * results.len());
                for r in results.iter() {
                    for u in &sets {
                        v.push(IType::arrow(u.clone(), r.clone()));
                    }
                }
                v
            }
        });
        self.cache.write().unwrap().entry(sort.clone()).or_insert(out.clone());
        Ok(out)
    }

    /// Every colored set over `sort`, ordered by bitmask over `Col × enumerate(sort)`.
    pub fn colored_sets(&self, sort: &SimpleType) -> Result<Vec<ColoredSet>, ITypeError> {
        let pairs = self.pairs(sort)?;
        if pairs.len() >= 64 || (1u128 << pairs.len()) > self.bound {
            return Err(ITypeError::TooLarge {
                sort: format!("colored sets over {}", sort),
                count: format!("2^{}", pairs.len()),
                bound: self.bound,
            });
        }
        Ok((0..1u64 << pairs.len())
            .map(|bits| {
                ColoredSet::new(
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bits >> i & 1 == 1)
                        .map(|(_, p)| p.clone()),
                )
            })
            .collect())
    }

    /// `Col × enumerate(sort)` in canonical order.
    pub fn pairs(&self, sort: &SimpleType) -> Result<Vec<(Color, IType)>, ITypeError> {
        let ts = self.enumerate(sort)?;
        let mut v: Vec<_> = self
            .colors
            .iter()
            .flat_map(|&c| ts.iter().map(move |t| (c, t.clone())))
            .collect();
        v.sort();
        Ok(v)
    }
}

/// Convenience wrapper with the default bound and no shared cache.
pub fn enumerate(sort: &SimpleType, m: &Apt) -> Result<Vec<IType>, ITypeError> {
    Ok(TypeSpace::new(m).enumerate(sort)?.as_ref().clone())
}

struct Shown<'a>(&'a IType, &'a Apt);

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            IType::State(q) => write!(f, "{}", self.1.name(*q)),
            IType::Arrow(u, r) => write!(f, "{}->{}", ShownSet(u, self.1), Shown(r, self.1)),
        }
    }
}

struct ShownSet<'a>(&'a ColoredSet, &'a Apt);

impl fmt::Display for ShownSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (c, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match t {
                IType::State(_) => write!(f, "{}.{}", c, Shown(t, self.1))?,
                IType::Arrow(..) => write!(f, "{}.({})", c, Shown(t, self.1))?,
            }
        }
        write!(f, "}}")
    }
}

struct TypeParser<'a> {
    s: &'a [u8],
    pos: usize,
    m: &'a Apt,
}

impl TypeParser<'_> {
    fn err(&self, message: &str) -> ITypeError {
        ITypeError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.s[start..self.pos]).unwrap())
    }

    fn itype(&mut self) -> Result<IType, ITypeError> {
        if self.eat("(") {
            let t = self.itype()?;
            if !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            return Ok(t);
        }
        if self.eat("{") {
            let mut items = Vec::new();
            if !self.eat("}") {
                loop {
                    let c = self.color()?;
                    if !self.eat(".") {
                        return Err(self.err("expected `.` after color"));
                    }
                    items.push((c, self.itype()?));
                    if self.eat("}") {
                        break;
                    }
                    if !self.eat(",") {
                        return Err(self.err("expected `,` or `}`"));
                    }
                }
            }
            if !self.eat("->") {
                return Err(self.err("expected `->`"));
            }
            let r = self.itype()?;
            return Ok(IType::arrow(ColoredSet::new(items), r));
        }
        let at = self.pos;
        let missing = self.err("expected a state or `{`");
        let name = self.ident().ok_or(missing)?.to_string();
        self.m.state(&name).map(IType::State).ok_or(ITypeError::Syntax {
            offset: at,
            message: format!("unknown state `{}`", name),
        })
    }

    fn color(&mut self) -> Result<Color, ITypeError> {
        let at = self.pos;
        let missing = self.err("expected a color");
        let tok = self.ident().ok_or(missing)?;
        parse_color(tok).ok_or(ITypeError::Syntax {
            offset: at,
            message: format!("bad color `{}`", tok),
        })
    }
}

/// `e` or a natural number.
pub fn parse_color(tok: &str) -> Option<Color> {
    if tok == "e" {
        Some(Color::Eps)
    } else {
        tok.parse().ok().map(Color::Nat)
    }
}
