//! Signatures, terms, parsing, substitution, evaluation on finite algebras,
//! and exhaustive identity checking.
//!
//! Text grammar (EBNF):
//!
//! ```text
//! signature := item ("," item)*
//! item      := name "/" arity ["const"]
//! term      := var | name | name "(" term ("," term)* ")"
//! var       := "x" digit+
//! name      := letter (letter | digit | "_")*
//! ```
//!
//! Variables are indexed (`x0`, `x1`, ...), never named, so substitution has
//! no capture questions. Constants are ordinary arity-0 symbols; a bare
//! constant name is a valid term and prints without parentheses.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::FiniteAlgebra;

/// Errors from signature/term parsing, substitution and identity construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("line {line}: duplicate symbol name `{name}`")]
    DuplicateSymbol { name: String, line: usize },
    #[error("line {line}: negative arity for `{name}`")]
    NegativeArity { name: String, line: usize },
    #[error("line {line}: `{name}` is reserved for variables")]
    ReservedName { name: String, line: usize },
    #[error("line {line}: `const` marker on `{name}` which has arity {arity}")]
    ConstWithArity {
        name: String,
        arity: usize,
        line: usize,
    },
    #[error("line {line}: malformed signature item `{item}`")]
    MalformedSignature { item: String, line: usize },
    #[error("unknown symbol `{name}`")]
    UnknownSymbol { name: String },
    #[error("arity mismatch for `{symbol}`: expected {expected} arguments, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound token `{token}`")]
    UnboundToken { token: String },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("substitution expects {expected} arguments, found {found}")]
    SubstitutionLength { expected: usize, found: usize },
    #[error("identity declares {declared} variables but uses x{used}")]
    IdentityVarRange { declared: usize, used: usize },
}

/// An operation symbol: a name, an arity, and whether it is a designated constant.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OpSymbol {
    pub name: String,
    pub arity: usize,
    #[serde(rename = "const", default)]
    pub is_const: bool,
}

/// The operation alphabet of a variety: symbols with arities plus the subset
/// of arity-0 symbols designated as constants (the pointed structure, when any).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<OpSymbol>,
    by_name: HashMap<String, usize>,
}

impl Signature {
    pub fn new(symbols: Vec<OpSymbol>) -> Result<Self, TermError> {
        let mut by_name = HashMap::new();
        for (i, sym) in symbols.iter().enumerate() {
            if is_variable_name(&sym.name) {
                return Err(TermError::ReservedName {
                    name: sym.name.clone(),
                    line: 1,
                });
            }
            if sym.is_const && sym.arity != 0 {
                return Err(TermError::ConstWithArity {
                    name: sym.name.clone(),
                    arity: sym.arity,
                    line: 1,
                });
            }
            if by_name.insert(sym.name.clone(), i).is_some() {
                return Err(TermError::DuplicateSymbol {
                    name: sym.name.clone(),
                    line: 1,
                });
            }
        }
        Ok(Signature { symbols, by_name })
    }

    pub fn symbols(&self) -> &[OpSymbol] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }

    /// Designated constants in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = &OpSymbol> {
        self.symbols.iter().filter(|s| s.is_const)
    }

    /// The distinguished constant of a pointed signature: the first declared
    /// `const` symbol, if any.
    pub fn designated_constant(&self) -> Option<&OpSymbol> {
        self.constants().next()
    }

    pub fn is_pointed(&self) -> bool {
        self.designated_constant().is_some()
    }
}

fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next() == Some('x') && name.len() > 1 && chars.all(|c| c.is_ascii_digit())
}

/// Parses the comma-separated `name/arity [const]` signature format.
/// Errors carry the 1-based line number of the offending item.
pub fn parse_signature(text: &str) -> Result<Signature, TermError> {
    let mut symbols: Vec<OpSymbol> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut line = 1usize;
    for raw in text.split(',') {
        let item_line = line + raw.chars().take_while(|c| c.is_whitespace()).filter(|&c| c == '\n').count();
        line += raw.matches('\n').count();
        let item = raw.trim();
        if item.is_empty() {
            // A trailing comma or blank item is malformed unless the whole text is empty.
            if text.trim().is_empty() {
                break;
            }
            return Err(TermError::MalformedSignature {
                item: item.to_string(),
                line: item_line,
            });
        }
        let (head, is_const) = match item.strip_suffix("const") {
            Some(head) if head.ends_with(char::is_whitespace) => (head.trim_end(), true),
            _ => (item, false),
        };
        let Some((name, arity_text)) = head.split_once('/') else {
            return Err(TermError::MalformedSignature {
                item: item.to_string(),
                line: item_line,
            });
        };
        let name = name.trim();
        let arity_text = arity_text.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(TermError::MalformedSignature {
                item: item.to_string(),
                line: item_line,
            });
        }
        if is_variable_name(name) {
            return Err(TermError::ReservedName {
                name: name.to_string(),
                line: item_line,
            });
        }
        if arity_text.starts_with('-') {
            return Err(TermError::NegativeArity {
                name: name.to_string(),
                line: item_line,
            });
        }
        let arity: usize = arity_text.parse().map_err(|_| TermError::MalformedSignature {
            item: item.to_string(),
            line: item_line,
        })?;
        if is_const && arity != 0 {
            return Err(TermError::ConstWithArity {
                name: name.to_string(),
                arity,
                line: item_line,
            });
        }
        if seen.insert(name.to_string(), symbols.len()).is_some() {
            return Err(TermError::DuplicateSymbol {
                name: name.to_string(),
                line: item_line,
            });
        }
        symbols.push(OpSymbol {
            name: name.to_string(),
            arity,
            is_const,
        });
    }
    Signature::new(symbols)
}

/// A finite tree over a signature: indexed variables and symbol applications.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App(String, Vec<Term>),
}

impl Term {
    /// Shorthand for an application node.
    pub fn app(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(symbol.into(), args)
    }

    /// Shorthand for a constant (arity-0 application).
    pub fn constant(symbol: impl Into<String>) -> Term {
        Term::App(symbol.into(), Vec::new())
    }

    /// Number of variables: one past the largest index used, 0 for ground terms.
    /// Projection-style terms may leave lower indices unused.
    pub fn var_count(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, args) => args.iter().map(Term::var_count).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.var_count() == 0
    }

    /// Checks symbol membership and declared arities against a signature.
    pub fn validate(&self, sig: &Signature) -> Result<(), TermError> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(symbol, args) => {
                let Some(expected) = sig.arity_of(symbol) else {
                    return Err(TermError::UnknownSymbol {
                        name: symbol.clone(),
                    });
                };
                if expected != args.len() {
                    return Err(TermError::ArityMismatch {
                        symbol: symbol.clone(),
                        expected,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.validate(sig))
            }
        }
    }

    /// Simultaneous substitution of `args[i]` for variable `xi`.
    ///
    /// Evaluation commutes: `eval(t.substitute(args), A, a)` equals
    /// `eval(t, A, (eval(args[i], A, a))_i)`.
    pub fn substitute(&self, args: &[Term]) -> Result<Term, TermError> {
        if args.len() != self.var_count() {
            return Err(TermError::SubstitutionLength {
                expected: self.var_count(),
                found: args.len(),
            });
        }
        Ok(self.substitute_unchecked(args))
    }

    /// Substitution for a projection-style term used at a declared arity:
    /// `args` covers `x0..x{declared-1}` even when some indices are unused.
    pub fn substitute_at(&self, args: &[Term], declared: usize) -> Result<Term, TermError> {
        if args.len() != declared || self.var_count() > declared {
            return Err(TermError::SubstitutionLength {
                expected: declared.max(self.var_count()),
                found: args.len(),
            });
        }
        Ok(self.substitute_unchecked(args))
    }

    fn substitute_unchecked(&self, args: &[Term]) -> Term {
        match self {
            Term::Var(i) => args[*i].clone(),
            Term::App(symbol, sub) => Term::App(
                symbol.clone(),
                sub.iter().map(|t| t.substitute_unchecked(args)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App(symbol, args) if args.is_empty() => write!(f, "{symbol}"),
            Term::App(symbol, args) => {
                write!(f, "{symbol}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses prefix-application term syntax over a signature.
/// Round-trips with the `Display` printer on canonical (whitespace-free) strings.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, TermError> {
    let tokens = lex(text)?;
    let mut pos = 0;
    let term = parse_expr(&tokens, &mut pos, sig)?;
    if pos != tokens.len() {
        return Err(TermError::UnboundToken {
            token: tokens[pos].to_string(),
        });
    }
    Ok(term)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Name(String),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Name(s) => write!(f, "{s}"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Comma => write!(f, ","),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Token>, TermError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                tokens.push(Token::LParen);
                chars.next();
            }
            ')' => {
                tokens.push(Token::RParen);
                chars.next();
            }
            ',' => {
                tokens.push(Token::Comma);
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Name(name));
            }
            other => {
                return Err(TermError::UnboundToken {
                    token: other.to_string(),
                })
            }
        }
    }
    Ok(tokens)
}

fn parse_expr(tokens: &[Token], pos: &mut usize, sig: &Signature) -> Result<Term, TermError> {
    let Some(tok) = tokens.get(*pos) else {
        return Err(TermError::UnexpectedEnd);
    };
    let Token::Name(name) = tok else {
        return Err(TermError::UnboundToken {
            token: tok.to_string(),
        });
    };
    *pos += 1;
    if is_variable_name(name) {
        let index: usize = name[1..].parse().expect("digits checked");
        return Ok(Term::Var(index));
    }
    let Some(expected) = sig.arity_of(name) else {
        return Err(TermError::UnknownSymbol { name: name.clone() });
    };
    let mut args = Vec::new();
    if tokens.get(*pos) == Some(&Token::LParen) {
        *pos += 1;
        loop {
            args.push(parse_expr(tokens, pos, sig)?);
            match tokens.get(*pos) {
                Some(Token::Comma) => *pos += 1,
                Some(Token::RParen) => {
                    *pos += 1;
                    break;
                }
                Some(tok) => {
                    return Err(TermError::UnboundToken {
                        token: tok.to_string(),
                    })
                }
                None => return Err(TermError::UnexpectedEnd),
            }
        }
    }
    if args.len() != expected {
        return Err(TermError::ArityMismatch {
            symbol: name.clone(),
            expected,
            found: args.len(),
        });
    }
    Ok(Term::App(name.clone(), args))
}

/// One carrier element per variable index.
pub type Assignment = Vec<usize>;

/// All assignments of `vars` variables over a carrier of `size` elements,
/// in lexicographic order. `vars = 0` yields the single empty assignment.
pub fn all_assignments(size: usize, vars: usize) -> impl Iterator<Item = Assignment> {
    let total = size.checked_pow(vars as u32).expect("assignment space overflow");
    (0..total).map(move |mut index| {
        let mut a = vec![0usize; vars];
        for slot in a.iter_mut().rev() {
            *slot = index % size;
            index /= size;
        }
        a
    })
}

/// Bottom-up table-lookup evaluation.
///
/// Panics if the term is not well-formed over the algebra's signature or the
/// assignment does not cover its variables; both are caller preconditions.
pub fn eval_term(term: &Term, alg: &FiniteAlgebra, assignment: &[usize]) -> usize {
    match term {
        Term::Var(i) => {
            assert!(*i < assignment.len(), "assignment does not cover x{i}");
            assignment[*i]
        }
        Term::App(symbol, args) => {
            let values: Vec<usize> = args.iter().map(|t| eval_term(t, alg, assignment)).collect();
            alg.apply(symbol, &values)
        }
    }
}

/// The full value table of a term at a declared arity, in row-major
/// (leftmost variable most significant) assignment order.
pub fn term_table(term: &Term, alg: &FiniteAlgebra, arity: usize) -> Vec<usize> {
    assert!(term.var_count() <= arity, "term uses more than {arity} variables");
    all_assignments(alg.size(), arity)
        .map(|a| eval_term(term, alg, &a))
        .collect()
}

/// An equation `lhs = rhs` over variables `x0..x{var_count-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
    pub var_count: usize,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term, var_count: usize) -> Result<Self, TermError> {
        let used = lhs.var_count().max(rhs.var_count());
        if used > var_count {
            return Err(TermError::IdentityVarRange {
                declared: var_count,
                used: used - 1,
            });
        }
        Ok(Identity {
            lhs,
            rhs,
            var_count,
        })
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Outcome of an exhaustive identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Holds,
    /// Carries the lexicographically least counterexample assignment.
    Fails(Assignment),
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds)
    }
}

/// Checks `id` on `alg` over all `size^var_count` assignments.
pub fn check_identity(alg: &FiniteAlgebra, id: &Identity) -> CheckOutcome {
    for a in all_assignments(alg.size(), id.var_count) {
        if eval_term(&id.lhs, alg, &a) != eval_term(&id.rhs, alg, &a) {
            return CheckOutcome::Fails(a);
        }
    }
    CheckOutcome::Holds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;

    fn z3() -> FiniteAlgebra {
        builtin("cyclic", 3).unwrap()
    }

    #[test]
    fn signature_parsing() {
        let sig = parse_signature("plus/2, zero/0 const").unwrap();
        assert_eq!(sig.symbols().len(), 2);
        assert_eq!(sig.arity_of("plus"), Some(2));
        assert_eq!(sig.designated_constant().unwrap().name, "zero");

        let sig = parse_signature("p/3").unwrap();
        assert_eq!(sig.arity_of("p"), Some(3));
        assert!(!sig.is_pointed());

        match parse_signature("plus/2, plus/1") {
            Err(TermError::DuplicateSymbol { name, line }) => {
                assert_eq!(name, "plus");
                assert_eq!(line, 1);
            }
            other => panic!("expected duplicate-name error, got {other:?}"),
        }
    }

    #[test]
    fn signature_errors_carry_line_numbers() {
        let text = "plus/2,\nminus/-1";
        match parse_signature(text) {
            Err(TermError::NegativeArity { name, line }) => {
                assert_eq!(name, "minus");
                assert_eq!(line, 2);
            }
            other => panic!("expected negative-arity error, got {other:?}"),
        }
        assert!(matches!(
            parse_signature("plus"),
            Err(TermError::MalformedSignature { .. })
        ));
        assert!(matches!(
            parse_signature("x1/2"),
            Err(TermError::ReservedName { .. })
        ));
        assert!(matches!(
            parse_signature("one/1 const"),
            Err(TermError::ConstWithArity { .. })
        ));
    }

    #[test]
    fn term_parsing() {
        let sig = parse_signature("p/3").unwrap();
        let t = parse_term("p(x0,x0,x1)", &sig).unwrap();
        assert_eq!(
            t,
            Term::app("p", vec![Term::Var(0), Term::Var(0), Term::Var(1)])
        );

        let sig = parse_signature("plus/2, zero/0 const").unwrap();
        let t = parse_term("plus(x0,zero)", &sig).unwrap();
        assert_eq!(
            t,
            Term::app("plus", vec![Term::Var(0), Term::constant("zero")])
        );

        let sig = parse_signature("p/3").unwrap();
        assert!(matches!(
            parse_term("p(x0,x1)", &sig),
            Err(TermError::ArityMismatch { expected: 3, found: 2, .. })
        ));
        assert!(matches!(
            parse_term("q(x0)", &sig),
            Err(TermError::UnknownSymbol { .. })
        ));
        assert!(matches!(
            parse_term("p(x0,x1,x2))", &sig),
            Err(TermError::UnboundToken { .. })
        ));
    }

    #[test]
    fn printer_parser_round_trip() {
        let sig = parse_signature("plus/2, minus/2, zero/0 const").unwrap();
        for text in [
            "plus(x0,x1)",
            "plus(minus(x0,x1),x2)",
            "zero",
            "minus(plus(x0,zero),x0)",
            "x7",
        ] {
            let t = parse_term(text, &sig).unwrap();
            assert_eq!(t.to_string(), text);
            assert_eq!(parse_term(&t.to_string(), &sig).unwrap(), t);
        }
    }

    #[test]
    fn evaluation() {
        let alg = z3();
        // Projection ignores the algebra entirely.
        assert_eq!(eval_term(&Term::Var(1), &alg, &[5, 2]), 2);

        let plus = parse_term("plus(x0,x1)", alg.signature()).unwrap();
        assert_eq!(eval_term(&plus, &alg, &[1, 2]), 0);

        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        let nested = parse_term("plus(plus(x0,x1),x1)", z2.signature()).unwrap();
        // Exhaustive oracle: plus is xor, so the value is x0.
        for a in all_assignments(2, 2) {
            assert_eq!(eval_term(&nested, &z2, &a), a[0]);
        }
        assert_eq!(eval_term(&nested, &z2, &[1, 1]), 1);
    }

    #[test]
    fn identity_checking() {
        let alg = z3();
        let sig = alg.signature();
        let assoc = Identity::new(
            parse_term("plus(plus(x0,x1),x2)", sig).unwrap(),
            parse_term("plus(x0,plus(x1,x2))", sig).unwrap(),
            3,
        )
        .unwrap();
        assert!(check_identity(&alg, &assoc).holds());

        let bogus = Identity::new(
            parse_term("plus(x0,x1)", sig).unwrap(),
            Term::Var(0),
            2,
        )
        .unwrap();
        assert_eq!(check_identity(&alg, &bogus), CheckOutcome::Fails(vec![0, 1]));

        let refl = Identity::new(Term::Var(0), Term::Var(0), 1).unwrap();
        assert!(check_identity(&alg, &refl).holds());
    }

    #[test]
    fn substitution() {
        let sig = parse_signature("p/3, q/3, plus/2").unwrap();
        let p = parse_term("p(x0,x1,x2)", &sig).unwrap();
        let q_xyy = parse_term("q(x0,x1,x1)", &sig).unwrap();
        let composed = p
            .substitute(&[q_xyy, Term::Var(1), Term::Var(2)])
            .unwrap();
        assert_eq!(composed.to_string(), "p(q(x0,x1,x1),x1,x2)");

        let t = parse_term("plus(x0,x1)", &sig).unwrap();
        assert_eq!(
            Term::Var(0).substitute(std::slice::from_ref(&t)).unwrap(),
            t
        );

        let swapped = t.substitute(&[Term::Var(1), Term::Var(0)]).unwrap();
        assert_eq!(swapped.to_string(), "plus(x1,x0)");

        assert!(matches!(
            t.substitute(&[Term::Var(0)]),
            Err(TermError::SubstitutionLength { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn identity_var_range_enforced() {
        assert!(Identity::new(Term::Var(2), Term::Var(0), 2).is_err());
        assert!(Identity::new(Term::Var(2), Term::Var(0), 3).is_ok());
    }
}
