//! Clone generation at a fixed arity and witness search for characteristic
//! term systems.
//!
//! The arity-k clone of a finite algebra is computed as the subalgebra of
//! `A^(A^k)` generated by the k projections: a breadth-first closure that
//! applies every basic operation pointwise to tuples of already-found
//! operations. Every element carries the term that produced it, so search
//! results are self-certifying: a returned witness is a term whose full
//! defining identity set has been checked exhaustively on the algebra.
//!
//! `Absent` is only ever reported from a complete clone; a truncated closure
//! downgrades a failed search to `Unknown`.

use std::collections::HashMap;

use crate::algebra::{pack_tuple, FiniteAlgebra};
use crate::term::{check_identity, Identity, Term};

/// Default ceiling on distinct tables per arity.
pub const DEFAULT_CLONE_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloneStatus {
    Complete,
    Truncated,
}

/// A k-ary term operation: its full value table and a witnessing term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneElement {
    pub arity: usize,
    pub table: Vec<usize>,
    pub witness: Term,
}

/// The arity-k clone of an algebra, deduplicated by table, in breadth-first
/// insertion order (so witnesses have minimal depth).
#[derive(Debug, Clone)]
pub struct CloneSet {
    algebra: FiniteAlgebra,
    arity: usize,
    elements: Vec<CloneElement>,
    by_table: HashMap<Vec<usize>, usize>,
    status: CloneStatus,
}

impl CloneSet {
    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn elements(&self) -> &[CloneElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn status(&self) -> CloneStatus {
        self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == CloneStatus::Complete
    }

    pub fn position_of_table(&self, table: &[usize]) -> Option<usize> {
        self.by_table.get(table).copied()
    }

    /// Re-evaluates every witness over all assignments and compares with the
    /// stored table.
    pub fn verify_certificates(&self) -> bool {
        self.elements.iter().all(|el| {
            crate::term::term_table(&el.witness, &self.algebra, self.arity) == el.table
        })
    }
}

/// Breadth-first closure of the k projections under pointwise application of
/// the basic operations. Stops (status `Truncated`) as soon as an insertion
/// would exceed `cap`.
pub fn generate_clone(alg: &FiniteAlgebra, arity: usize, cap: usize) -> CloneSet {
    assert!(arity >= 1, "clone arity must be at least 1");
    assert!(cap >= arity, "cap must accommodate the projections");
    let size = alg.size();
    let table_len = size.pow(arity as u32);
    let mut set = CloneSet {
        algebra: alg.clone(),
        arity,
        elements: Vec::new(),
        by_table: HashMap::new(),
        status: CloneStatus::Complete,
    };
    for i in 0..arity {
        let shift = size.pow((arity - 1 - i) as u32);
        let table: Vec<usize> = (0..table_len).map(|t| (t / shift) % size).collect();
        insert(&mut set, table, Term::Var(i), cap);
    }

    let mut round_start = 0usize;
    'closure: loop {
        let len_before = set.elements.len();
        for (op_idx, sym) in alg.signature().symbols().iter().enumerate() {
            if sym.arity == 0 {
                if round_start == 0 {
                    let value = alg.apply_by_index(op_idx, &[]);
                    if !insert(
                        &mut set,
                        vec![value; table_len],
                        Term::constant(sym.name.clone()),
                        cap,
                    ) {
                        break 'closure;
                    }
                }
                continue;
            }
            let mut tuple = vec![0usize; sym.arity];
            loop {
                // Level-wise: arguments predate this round, at least one is fresh.
                if tuple.iter().any(|&i| i >= round_start) {
                    let mut table = Vec::with_capacity(table_len);
                    let mut args = vec![0usize; sym.arity];
                    for t in 0..table_len {
                        for (slot, &el) in args.iter_mut().zip(tuple.iter()) {
                            *slot = set.elements[el].table[t];
                        }
                        table.push(alg.apply_by_index(op_idx, &args));
                    }
                    if set.by_table.get(&table).is_none() {
                        let witness = Term::App(
                            sym.name.clone(),
                            tuple.iter().map(|&i| set.elements[i].witness.clone()).collect(),
                        );
                        if !insert(&mut set, table, witness, cap) {
                            break 'closure;
                        }
                    }
                }
                if !advance(&mut tuple, len_before) {
                    break;
                }
            }
        }
        if set.elements.len() == len_before {
            break;
        }
        round_start = len_before;
    }
    set
}

/// False when the cap refuses the insertion (marks the set truncated).
fn insert(set: &mut CloneSet, table: Vec<usize>, witness: Term, cap: usize) -> bool {
    if set.by_table.contains_key(&table) {
        return true;
    }
    if set.elements.len() >= cap {
        set.status = CloneStatus::Truncated;
        return false;
    }
    set.by_table.insert(table.clone(), set.elements.len());
    set.elements.push(CloneElement {
        arity: set.arity,
        table,
        witness,
    });
    true
}

fn advance(tuple: &mut [usize], base: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Values of constant-only terms, each with a witnessing ground term, in
/// breadth-first order. Empty when the signature has no arity-0 symbol.
pub fn ground_clone(alg: &FiniteAlgebra) -> Vec<(usize, Term)> {
    let mut found: Vec<(usize, Term)> = Vec::new();
    let mut seen = vec![false; alg.size()];
    for sym in alg.signature().symbols() {
        if sym.arity == 0 {
            let v = alg.constant_value(&sym.name);
            if !seen[v] {
                seen[v] = true;
                found.push((v, Term::constant(sym.name.clone())));
            }
        }
    }
    let mut round_start = 0usize;
    loop {
        let len_before = found.len();
        for (op_idx, sym) in alg.signature().symbols().iter().enumerate() {
            if sym.arity == 0 {
                continue;
            }
            let mut tuple = vec![0usize; sym.arity];
            if len_before == 0 {
                break;
            }
            loop {
                if tuple.iter().any(|&i| i >= round_start) {
                    let args: Vec<usize> = tuple.iter().map(|&i| found[i].0).collect();
                    let v = alg.apply_by_index(op_idx, &args);
                    if !seen[v] {
                        seen[v] = true;
                        let witness = Term::App(
                            sym.name.clone(),
                            tuple.iter().map(|&i| found[i].1.clone()).collect(),
                        );
                        found.push((v, witness));
                    }
                }
                if !advance(&mut tuple, len_before) {
                    break;
                }
            }
        }
        if found.len() == len_before {
            break;
        }
        round_start = len_before;
    }
    found
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("signature has no designated constant")]
    NotPointed,
    #[error("signature has no constants")]
    NoConstants,
    #[error("protomodular type {n} exceeds the engine bound of 3")]
    TypeBound { n: usize },
}

/// A certified term system together with everything needed to rebuild its
/// defining identity set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Maltsev {
        p: Term,
    },
    Biternary {
        p: Term,
        q: Term,
    },
    RightLoop {
        plus: Term,
        minus: Term,
        zero: String,
    },
    Unital {
        plus: Term,
        zero: String,
    },
    Subtraction {
        s: Term,
        zero: String,
    },
    RhoSigma {
        rho: Term,
        sigma: Term,
        zero: String,
    },
    Protomodular {
        n: usize,
        e: Vec<Term>,
        s: Vec<Term>,
        p: Term,
        bijective: bool,
    },
}

fn var(i: usize) -> Term {
    Term::Var(i)
}

fn ident(lhs: Term, rhs: Term, vars: usize) -> Identity {
    Identity::new(lhs, rhs, vars).expect("identity construction")
}

impl Witness {
    /// The full defining identity set of the variant, as named identities.
    /// For biternary systems this includes the implied `q(x,x,y) = y` as a
    /// cross-check.
    pub fn identities(&self) -> Vec<(String, Identity)> {
        match self {
            Witness::Maltsev { p } => vec![
                (
                    "cancel_left".into(),
                    ident(
                        p.substitute_at(&[var(0), var(0), var(1)], 3).unwrap(),
                        var(1),
                        2,
                    ),
                ),
                (
                    "cancel_right".into(),
                    ident(
                        p.substitute_at(&[var(0), var(1), var(1)], 3).unwrap(),
                        var(0),
                        2,
                    ),
                ),
            ],
            Witness::Biternary { p, q } => {
                let q_xyz = q.substitute_at(&[var(0), var(1), var(2)], 3).unwrap();
                let p_xyz = p.substitute_at(&[var(0), var(1), var(2)], 3).unwrap();
                vec![
                    (
                        "p_cancel".into(),
                        ident(
                            p.substitute_at(&[var(0), var(0), var(1)], 3).unwrap(),
                            var(1),
                            2,
                        ),
                    ),
                    (
                        "p_after_q".into(),
                        ident(
                            p.substitute_at(&[q_xyz.clone(), var(2), var(1)], 3).unwrap(),
                            var(0),
                            3,
                        ),
                    ),
                    (
                        "q_after_p".into(),
                        ident(
                            q.substitute_at(&[p_xyz, var(2), var(1)], 3).unwrap(),
                            var(0),
                            3,
                        ),
                    ),
                    (
                        "q_cancel_implied".into(),
                        ident(
                            q.substitute_at(&[var(0), var(0), var(1)], 3).unwrap(),
                            var(1),
                            2,
                        ),
                    ),
                ]
            }
            Witness::RightLoop { plus, minus, zero } => {
                let zero_t = Term::constant(zero.clone());
                let plus_xy = plus.substitute_at(&[var(0), var(1)], 2).unwrap();
                let minus_xy = minus.substitute_at(&[var(0), var(1)], 2).unwrap();
                vec![
                    (
                        "plus_zero".into(),
                        ident(
                            plus.substitute_at(&[var(0), zero_t.clone()], 2).unwrap(),
                            var(0),
                            1,
                        ),
                    ),
                    (
                        "minus_self".into(),
                        ident(
                            minus.substitute_at(&[var(0), var(0)], 2).unwrap(),
                            zero_t,
                            1,
                        ),
                    ),
                    (
                        "minus_plus_cancel".into(),
                        ident(
                            minus.substitute_at(&[plus_xy, var(1)], 2).unwrap(),
                            var(0),
                            2,
                        ),
                    ),
                    (
                        "plus_minus_cancel".into(),
                        ident(
                            plus.substitute_at(&[minus_xy, var(1)], 2).unwrap(),
                            var(0),
                            2,
                        ),
                    ),
                ]
            }
            Witness::Unital { plus, zero } => {
                let zero_t = Term::constant(zero.clone());
                vec![
                    (
                        "right_unit".into(),
                        ident(
                            plus.substitute_at(&[var(0), zero_t.clone()], 2).unwrap(),
                            var(0),
                            1,
                        ),
                    ),
                    (
                        "left_unit".into(),
                        ident(
                            plus.substitute_at(&[zero_t, var(0)], 2).unwrap(),
                            var(0),
                            1,
                        ),
                    ),
                ]
            }
            Witness::Subtraction { s, zero } => {
                let zero_t = Term::constant(zero.clone());
                vec![
                    (
                        "sub_self".into(),
                        ident(
                            s.substitute_at(&[var(0), var(0)], 2).unwrap(),
                            zero_t.clone(),
                            1,
                        ),
                    ),
                    (
                        "sub_zero".into(),
                        ident(s.substitute_at(&[var(0), zero_t], 2).unwrap(), var(0), 1),
                    ),
                ]
            }
            Witness::RhoSigma { rho, sigma, zero } => {
                let zero_t = Term::constant(zero.clone());
                let sigma_xy = sigma.substitute_at(&[var(0), var(1)], 2).unwrap();
                let rho_xy = rho.substitute_at(&[var(0), var(1)], 2).unwrap();
                vec![
                    (
                        "sigma_self".into(),
                        ident(
                            sigma.substitute_at(&[var(0), var(0)], 2).unwrap(),
                            zero_t.clone(),
                            1,
                        ),
                    ),
                    (
                        "rho_sigma_recover".into(),
                        ident(
                            rho.substitute_at(&[sigma_xy, var(1)], 2).unwrap(),
                            var(0),
                            2,
                        ),
                    ),
                    (
                        "sigma_rho_recover".into(),
                        ident(
                            sigma.substitute_at(&[rho_xy, var(1)], 2).unwrap(),
                            var(0),
                            2,
                        ),
                    ),
                    (
                        "rho_left_unit".into(),
                        ident(
                            rho.substitute_at(&[zero_t.clone(), var(0)], 2).unwrap(),
                            var(0),
                            1,
                        ),
                    ),
                    (
                        "rho_right_unit".into(),
                        ident(
                            rho.substitute_at(&[var(0), zero_t.clone()], 2).unwrap(),
                            var(0),
                            1,
                        ),
                    ),
                    (
                        "sigma_right_unit".into(),
                        ident(
                            sigma.substitute_at(&[var(0), zero_t], 2).unwrap(),
                            var(0),
                            1,
                        ),
                    ),
                ]
            }
            Witness::Protomodular {
                n,
                e,
                s,
                p,
                bijective,
            } => {
                let mut ids = Vec::new();
                for (i, (s_i, e_i)) in s.iter().zip(e).enumerate() {
                    ids.push((
                        format!("s{}_diagonal", i + 1),
                        ident(
                            s_i.substitute_at(&[var(0), var(0)], 2).unwrap(),
                            e_i.clone(),
                            1,
                        ),
                    ));
                }
                let s_args: Vec<Term> = s
                    .iter()
                    .map(|s_i| s_i.substitute_at(&[var(0), var(1)], 2).unwrap())
                    .chain(std::iter::once(var(1)))
                    .collect();
                ids.push((
                    "p_recovers_x".into(),
                    ident(p.substitute_at(&s_args, n + 1).unwrap(), var(0), 2),
                ));
                if *bijective {
                    let p_args: Vec<Term> = (0..=*n).map(var).collect();
                    let p_app = p.substitute_at(&p_args, n + 1).unwrap();
                    for (i, s_i) in s.iter().enumerate() {
                        ids.push((
                            format!("s{}_recovers_x{}", i + 1, i),
                            ident(
                                s_i.substitute_at(&[p_app.clone(), var(*n)], 2).unwrap(),
                                var(i),
                                n + 1,
                            ),
                        ));
                    }
                }
                ids
            }
        }
    }

    /// Role names and terms, in a fixed reporting order.
    pub fn terms(&self) -> Vec<(String, &Term)> {
        match self {
            Witness::Maltsev { p } => vec![("p".into(), p)],
            Witness::Biternary { p, q } => vec![("p".into(), p), ("q".into(), q)],
            Witness::RightLoop { plus, minus, .. } => {
                vec![("plus".into(), plus), ("minus".into(), minus)]
            }
            Witness::Unital { plus, .. } => vec![("plus".into(), plus)],
            Witness::Subtraction { s, .. } => vec![("s".into(), s)],
            Witness::RhoSigma { rho, sigma, .. } => {
                vec![("rho".into(), rho), ("sigma".into(), sigma)]
            }
            Witness::Protomodular { e, s, p, .. } => {
                let mut out = Vec::new();
                for (i, e_i) in e.iter().enumerate() {
                    out.push((format!("e{}", i + 1), e_i));
                }
                for (i, s_i) in s.iter().enumerate() {
                    out.push((format!("s{}", i + 1), s_i));
                }
                out.push(("p".into(), p));
                out
            }
        }
    }
}

/// Outcome of a witness search. `Absent` is backed by a complete clone;
/// `Unknown` means the clone was truncated before a witness appeared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchResult {
    Found(Witness),
    Absent,
    Unknown,
}

impl SearchResult {
    pub fn found(&self) -> Option<&Witness> {
        match self {
            SearchResult::Found(w) => Some(w),
            _ => None,
        }
    }
}

/// Every Found result is re-certified through the term evaluator before it is
/// returned; a failure here would mean the table search and the identity
/// semantics disagree.
fn certify(alg: &FiniteAlgebra, witness: Witness) -> SearchResult {
    for (name, id) in witness.identities() {
        assert!(
            check_identity(alg, &id).holds(),
            "witness certification failed on {}: {id}",
            name
        );
    }
    SearchResult::Found(witness)
}

fn missing(status: CloneStatus) -> SearchResult {
    match status {
        CloneStatus::Complete => SearchResult::Absent,
        CloneStatus::Truncated => SearchResult::Unknown,
    }
}

fn pack2(x: usize, y: usize, s: usize) -> usize {
    x * s + y
}

fn pack3(x: usize, y: usize, z: usize, s: usize) -> usize {
    (x * s + y) * s + z
}

/// Mal'tsev term: `p(x,x,y) = y` and `p(x,y,y) = x`.
pub fn find_maltsev(alg: &FiniteAlgebra, cap: usize) -> SearchResult {
    let clone3 = generate_clone(alg, 3, cap);
    let s = alg.size();
    for el in clone3.elements() {
        let t = &el.table;
        let ok = (0..s).all(|x| {
            (0..s).all(|y| t[pack3(x, x, y, s)] == y && t[pack3(x, y, y, s)] == x)
        });
        if ok {
            return certify(alg, Witness::Maltsev {
                p: el.witness.clone(),
            });
        }
    }
    missing(clone3.status())
}

/// Biternary system: `p(x,x,y) = y` and `p(q(x,y,z),z,y) = x = q(p(x,y,z),z,y)`.
pub fn find_biternary(alg: &FiniteAlgebra, cap: usize) -> SearchResult {
    let clone3 = generate_clone(alg, 3, cap);
    let s = alg.size();
    let cancels = |t: &[usize]| (0..s).all(|x| (0..s).all(|y| t[pack3(x, x, y, s)] == y));
    for p in clone3.elements() {
        if !cancels(&p.table) {
            continue;
        }
        for q in clone3.elements() {
            let ok = (0..s).all(|x| {
                (0..s).all(|y| {
                    (0..s).all(|z| {
                        let idx = pack3(x, y, z, s);
                        p.table[pack3(q.table[idx], z, y, s)] == x
                            && q.table[pack3(p.table[idx], z, y, s)] == x
                    })
                })
            });
            if ok {
                return certify(alg, Witness::Biternary {
                    p: p.witness.clone(),
                    q: q.witness.clone(),
                });
            }
        }
    }
    missing(clone3.status())
}

/// Right Omega-loop terms for the designated constant: `x+0 = x`, `x-x = 0`,
/// `(x+y)-y = x`, `(x-y)+y = x`.
pub fn find_right_loop(alg: &FiniteAlgebra, cap: usize) -> Result<SearchResult, SearchError> {
    let zero_sym = alg
        .signature()
        .designated_constant()
        .ok_or(SearchError::NotPointed)?
        .name
        .clone();
    let zero = alg.constant_value(&zero_sym);
    let clone2 = generate_clone(alg, 2, cap);
    let s = alg.size();
    for plus in clone2.elements() {
        if !(0..s).all(|x| plus.table[pack2(x, zero, s)] == x) {
            continue;
        }
        for minus in clone2.elements() {
            if !(0..s).all(|x| minus.table[pack2(x, x, s)] == zero) {
                continue;
            }
            let ok = (0..s).all(|x| {
                (0..s).all(|y| {
                    minus.table[pack2(plus.table[pack2(x, y, s)], y, s)] == x
                        && plus.table[pack2(minus.table[pack2(x, y, s)], y, s)] == x
                })
            });
            if ok {
                return Ok(certify(alg, Witness::RightLoop {
                    plus: plus.witness.clone(),
                    minus: minus.witness.clone(),
                    zero: zero_sym,
                }));
            }
        }
    }
    Ok(missing(clone2.status()))
}

/// Unital (Jonsson-Tarski) term: `x+0 = x = 0+x`.
pub fn find_unital(alg: &FiniteAlgebra, cap: usize) -> Result<SearchResult, SearchError> {
    let zero_sym = alg
        .signature()
        .designated_constant()
        .ok_or(SearchError::NotPointed)?
        .name
        .clone();
    let zero = alg.constant_value(&zero_sym);
    let clone2 = generate_clone(alg, 2, cap);
    let s = alg.size();
    for plus in clone2.elements() {
        let ok = (0..s)
            .all(|x| plus.table[pack2(x, zero, s)] == x && plus.table[pack2(zero, x, s)] == x);
        if ok {
            return Ok(certify(alg, Witness::Unital {
                plus: plus.witness.clone(),
                zero: zero_sym,
            }));
        }
    }
    Ok(missing(clone2.status()))
}

/// Subtraction term: `s(x,x) = 0` and `s(x,0) = x`.
pub fn find_subtraction(alg: &FiniteAlgebra, cap: usize) -> Result<SearchResult, SearchError> {
    let zero_sym = alg
        .signature()
        .designated_constant()
        .ok_or(SearchError::NotPointed)?
        .name
        .clone();
    let zero = alg.constant_value(&zero_sym);
    let clone2 = generate_clone(alg, 2, cap);
    let s = alg.size();
    for sub in clone2.elements() {
        let ok = (0..s)
            .all(|x| sub.table[pack2(x, x, s)] == zero && sub.table[pack2(x, zero, s)] == x);
        if ok {
            return Ok(certify(alg, Witness::Subtraction {
                s: sub.witness.clone(),
                zero: zero_sym,
            }));
        }
    }
    Ok(missing(clone2.status()))
}

/// Binary pair (rho, sigma) with `sigma(x,x) = 0`, `rho(sigma(x,y),y) = x`,
/// `sigma(rho(x,y),y) = x`, plus the unit laws `rho(0,x) = x = rho(x,0)` and
/// `sigma(x,0) = x` forced by the diagram conditions.
pub fn find_rho_sigma(alg: &FiniteAlgebra, cap: usize) -> Result<SearchResult, SearchError> {
    let zero_sym = alg
        .signature()
        .designated_constant()
        .ok_or(SearchError::NotPointed)?
        .name
        .clone();
    let zero = alg.constant_value(&zero_sym);
    let clone2 = generate_clone(alg, 2, cap);
    let s = alg.size();
    for rho in clone2.elements() {
        let unit = (0..s)
            .all(|x| rho.table[pack2(zero, x, s)] == x && rho.table[pack2(x, zero, s)] == x);
        if !unit {
            continue;
        }
        for sigma in clone2.elements() {
            let unit = (0..s).all(|x| {
                sigma.table[pack2(x, x, s)] == zero && sigma.table[pack2(x, zero, s)] == x
            });
            if !unit {
                continue;
            }
            let ok = (0..s).all(|x| {
                (0..s).all(|y| {
                    rho.table[pack2(sigma.table[pack2(x, y, s)], y, s)] == x
                        && sigma.table[pack2(rho.table[pack2(x, y, s)], y, s)] == x
                })
            });
            if ok {
                return Ok(certify(alg, Witness::RhoSigma {
                    rho: rho.witness.clone(),
                    sigma: sigma.witness.clone(),
                    zero: zero_sym,
                }));
            }
        }
    }
    Ok(missing(clone2.status()))
}

/// Protomodular term system of type `n`: constants `e_i`, binary `s_i` and an
/// `(n+1)`-ary `p` with `s_i(x,x) = e_i` and `p(s_1(x,z),...,s_n(x,z),z) = x`;
/// with `require_bijective` also `s_i(p(x_1,...,x_n,y),y) = x_i`.
///
/// The `e_i` range over values of constant-only terms, per the construction
/// `e_i = theta_i(e,...,e)`.
pub fn find_protomodular(
    alg: &FiniteAlgebra,
    n: usize,
    require_bijective: bool,
    cap: usize,
) -> Result<SearchResult, SearchError> {
    if n == 0 || n > 3 {
        return Err(SearchError::TypeBound { n });
    }
    if alg.signature().symbols().iter().all(|s| s.arity != 0) {
        return Err(SearchError::NoConstants);
    }
    let ground = ground_clone(alg);
    let clone2 = generate_clone(alg, 2, cap);
    let clone_p = generate_clone(alg, n + 1, cap);
    let s = alg.size();

    // Binary candidates whose diagonal is a constant-term value.
    let mut s_candidates: Vec<(usize, usize)> = Vec::new(); // (clone2 index, e value)
    for (idx, el) in clone2.elements().iter().enumerate() {
        let d0 = el.table[pack2(0, 0, s)];
        if (0..s).all(|x| el.table[pack2(x, x, s)] == d0)
            && ground.iter().any(|&(v, _)| v == d0)
        {
            s_candidates.push((idx, d0));
        }
    }

    let mut choice = vec![0usize; n];
    let mut exhausted = s_candidates.is_empty();
    while !exhausted {
        let tuple: Vec<&(usize, usize)> = choice.iter().map(|&c| &s_candidates[c]).collect();
        let s_tables: Vec<&[usize]> = tuple
            .iter()
            .map(|&&(idx, _)| clone2.elements()[idx].table.as_slice())
            .collect();
        for p in clone_p.elements() {
            let mut args = vec![0usize; n + 1];
            let recovers = (0..s).all(|x| {
                (0..s).all(|z| {
                    for (slot, table) in args.iter_mut().zip(&s_tables) {
                        *slot = table[pack2(x, z, s)];
                    }
                    args[n] = z;
                    p.table[pack_tuple(&args, s)] == x
                })
            });
            if !recovers {
                continue;
            }
            if require_bijective {
                let mut all = vec![0usize; n + 1];
                let sections = loop_all(&mut all, s, |assignment| {
                    let p_val = p.table[pack_tuple(assignment, s)];
                    let y = assignment[n];
                    s_tables
                        .iter()
                        .enumerate()
                        .all(|(i, table)| table[pack2(p_val, y, s)] == assignment[i])
                });
                if !sections {
                    continue;
                }
            }
            let witness = Witness::Protomodular {
                n,
                e: tuple
                    .iter()
                    .map(|&&(_, v)| {
                        ground
                            .iter()
                            .find(|&&(gv, _)| gv == v)
                            .map(|(_, t)| t.clone())
                            .expect("ground value has a witness")
                    })
                    .collect(),
                s: tuple
                    .iter()
                    .map(|&&(idx, _)| clone2.elements()[idx].witness.clone())
                    .collect(),
                p: p.witness.clone(),
                bijective: require_bijective,
            };
            return Ok(certify(alg, witness));
        }
        exhausted = !advance(&mut choice, s_candidates.len());
    }
    Ok(missing(
        if clone2.is_complete() && clone_p.is_complete() {
            CloneStatus::Complete
        } else {
            CloneStatus::Truncated
        },
    ))
}

/// Runs `check` on every assignment of `slots.len()` variables over `0..s`.
fn loop_all(slots: &mut [usize], s: usize, check: impl Fn(&[usize]) -> bool) -> bool {
    slots.iter_mut().for_each(|v| *v = 0);
    loop {
        if !check(slots) {
            return false;
        }
        if !advance(slots, s) {
            return true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::term::term_table;
    use std::collections::BTreeSet;

    fn tables(set: &CloneSet) -> BTreeSet<Vec<usize>> {
        set.elements().iter().map(|e| e.table.clone()).collect()
    }

    #[test]
    fn clone_of_z2_plus() {
        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        let set = generate_clone(&z2, 2, DEFAULT_CLONE_CAP);
        assert!(set.is_complete());
        let expected: BTreeSet<Vec<usize>> = [
            vec![0, 0, 0, 0], // constant 0
            vec![0, 0, 1, 1], // x0
            vec![0, 1, 0, 1], // x1
            vec![0, 1, 1, 0], // x0 + x1
        ]
        .into_iter()
        .collect();
        assert_eq!(tables(&set), expected);
        assert!(set.verify_certificates());
    }

    #[test]
    fn clone_of_chain() {
        // The meet-with-unit chain: projections, meet, and the constant.
        let c2 = builtin("chain_semilattice", 2).unwrap();
        let set = generate_clone(&c2, 2, DEFAULT_CLONE_CAP);
        assert!(set.is_complete());
        let expected: BTreeSet<Vec<usize>> = [
            vec![0, 0, 0, 0],
            vec![0, 0, 1, 1],
            vec![0, 1, 0, 1],
            vec![0, 1, 1, 1], // meet
        ]
        .into_iter()
        .collect();
        assert_eq!(tables(&set), expected);
    }

    #[test]
    fn clone_seeds_projections() {
        let z3 = builtin("cyclic", 3).unwrap();
        let set = generate_clone(&z3, 1, DEFAULT_CLONE_CAP);
        assert_eq!(set.elements()[0].witness, Term::Var(0));
        assert_eq!(set.elements()[0].table, vec![0, 1, 2]);
    }

    #[test]
    fn truncation_is_reported() {
        let z3 = builtin("cyclic", 3).unwrap();
        let set = generate_clone(&z3, 2, 3);
        assert_eq!(set.status(), CloneStatus::Truncated);
        assert_eq!(set.len(), 3);
        assert_eq!(find_maltsev(&z3, 4), SearchResult::Unknown);
    }

    #[test]
    fn maltsev_search() {
        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        match find_maltsev(&z2, DEFAULT_CLONE_CAP) {
            SearchResult::Found(Witness::Maltsev { p }) => {
                // Independent expectation: x0 xor x1 xor x2.
                let expected: Vec<usize> =
                    (0..8).map(|t| ((t >> 2) ^ (t >> 1) ^ t) & 1).collect();
                assert_eq!(term_table(&p, &z2, 3), expected);
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let c2 = builtin("chain_semilattice", 2).unwrap();
        assert_eq!(find_maltsev(&c2, DEFAULT_CLONE_CAP), SearchResult::Absent);

        let one = builtin("cyclic", 1).unwrap();
        assert!(matches!(
            find_maltsev(&one, DEFAULT_CLONE_CAP),
            SearchResult::Found(_)
        ));
    }

    #[test]
    fn biternary_search() {
        let z3 = builtin("cyclic", 3).unwrap();
        match find_biternary(&z3, DEFAULT_CLONE_CAP) {
            SearchResult::Found(Witness::Biternary { p, q }) => {
                let mut expected = Vec::new();
                for x in 0..3 {
                    for y in 0..3 {
                        for z in 0..3 {
                            expected.push((x + 3 - y + z) % 3);
                        }
                    }
                }
                assert_eq!(term_table(&p, &z3, 3), expected);
                assert_eq!(term_table(&q, &z3, 3), expected);
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let p2 = builtin("pointed_set", 2).unwrap();
        assert_eq!(find_biternary(&p2, DEFAULT_CLONE_CAP), SearchResult::Absent);

        let one = builtin("cyclic", 1).unwrap();
        assert!(matches!(
            find_biternary(&one, DEFAULT_CLONE_CAP),
            SearchResult::Found(_)
        ));
    }

    #[test]
    fn right_loop_search() {
        let z6 = builtin("cyclic", 6).unwrap();
        match find_right_loop(&z6, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::RightLoop { plus, minus, zero }) => {
                assert_eq!(zero, "zero");
                assert_eq!(term_table(&plus, &z6, 2), z6.table("plus"));
                assert_eq!(term_table(&minus, &z6, 2), z6.table("minus"));
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let p3 = builtin("pointed_set", 3).unwrap();
        assert_eq!(
            find_right_loop(&p3, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Absent
        );

        let c2 = builtin("chain_semilattice", 2).unwrap();
        assert_eq!(
            find_right_loop(&c2, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Absent
        );
    }

    #[test]
    fn unital_search() {
        let c2 = builtin("chain_semilattice", 2).unwrap();
        match find_unital(&c2, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::Unital { plus, .. }) => {
                assert_eq!(term_table(&plus, &c2, 2), vec![0, 1, 1, 1]);
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let p2 = builtin("pointed_set", 2).unwrap();
        assert_eq!(find_unital(&p2, DEFAULT_CLONE_CAP).unwrap(), SearchResult::Absent);

        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        match find_unital(&z2, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::Unital { plus, .. }) => {
                assert_eq!(term_table(&plus, &z2, 2), z2.table("plus"));
            }
            other => panic!("expected Found, got {other:?}"),
        }
    }

    #[test]
    fn subtraction_search() {
        let b2 = builtin("bool_subtraction", 2).unwrap();
        match find_subtraction(&b2, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::Subtraction { s, .. }) => {
                assert_eq!(term_table(&s, &b2, 2), b2.table("sub"));
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        match find_subtraction(&z2, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::Subtraction { s, .. }) => {
                assert_eq!(term_table(&s, &z2, 2), z2.table("plus"));
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let p2 = builtin("pointed_set", 2).unwrap();
        assert_eq!(
            find_subtraction(&p2, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Absent
        );
    }

    #[test]
    fn rho_sigma_search() {
        let z4 = builtin("cyclic", 4).unwrap();
        match find_rho_sigma(&z4, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::RhoSigma { rho, sigma, .. }) => {
                assert_eq!(term_table(&rho, &z4, 2), z4.table("plus"));
                assert_eq!(term_table(&sigma, &z4, 2), z4.table("minus"));
            }
            other => panic!("expected Found, got {other:?}"),
        }

        let p3 = builtin("pointed_set", 3).unwrap();
        assert_eq!(
            find_rho_sigma(&p3, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Absent
        );

        let one = builtin("cyclic", 1).unwrap();
        assert!(matches!(
            find_rho_sigma(&one, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Found(_)
        ));
    }

    #[test]
    fn protomodular_search() {
        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        match find_protomodular(&z2, 1, false, DEFAULT_CLONE_CAP).unwrap() {
            SearchResult::Found(Witness::Protomodular { e, s, p, .. }) => {
                assert_eq!(e[0].to_string(), "zero");
                assert_eq!(term_table(&s[0], &z2, 2), z2.table("plus"));
                assert_eq!(term_table(&p, &z2, 2), z2.table("plus"));
            }
            other => panic!("expected Found, got {other:?}"),
        }
        // The bijective variant also holds for the group witness.
        assert!(matches!(
            find_protomodular(&z2, 1, true, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Found(_)
        ));

        let c2 = builtin("chain_semilattice", 2).unwrap();
        assert_eq!(
            find_protomodular(&c2, 1, false, DEFAULT_CLONE_CAP).unwrap(),
            SearchResult::Absent
        );

        let one = builtin("cyclic", 1).unwrap();
        for n in 1..=3 {
            assert!(matches!(
                find_protomodular(&one, n, true, DEFAULT_CLONE_CAP).unwrap(),
                SearchResult::Found(_)
            ));
        }

        assert!(matches!(
            find_protomodular(&z2, 4, false, DEFAULT_CLONE_CAP),
            Err(SearchError::TypeBound { n: 4 })
        ));
    }

    #[test]
    fn ground_clone_values() {
        let z6 = builtin("cyclic", 6).unwrap();
        let ground = ground_clone(&z6);
        assert_eq!(ground.len(), 1);
        assert_eq!(ground[0].0, 0);
        assert_eq!(ground[0].1.to_string(), "zero");

        let sig = crate::term::parse_signature("succ/1, zero/0 const").unwrap();
        let counter =
            crate::algebra::FiniteAlgebra::new("count3", 3, sig, vec![vec![1, 2, 2], vec![0]])
                .unwrap();
        let ground = ground_clone(&counter);
        assert_eq!(
            ground.iter().map(|(v, _)| *v).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(ground[2].1.to_string(), "succ(succ(zero))");
    }
}
