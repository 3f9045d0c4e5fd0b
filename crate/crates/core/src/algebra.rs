//! Finite algebras, builtin families, products, pullback fibers, kernels,
//! and homomorphism enumeration.
//!
//! Carriers are always `{0..size-1}`. Operation tables are flat row-major
//! arrays: the value at tuple `(a1,...,ak)` sits at index
//! `a1*size^(k-1) + ... + ak`, so the leftmost argument is most significant.
//! Product carriers reuse the same convention: the pair `(a,b)` in `A x B`
//! has index `a*|B| + b`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::term::{OpSymbol, Signature, TermError};

#[derive(Debug, thiserror::Error)]
pub enum AlgebraError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid algebra file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid signature: {0}")]
    Signature(#[from] TermError),
    #[error("algebra size must be positive")]
    EmptyCarrier,
    #[error("table for `{symbol}` has {found} entries, expected {expected}")]
    TableLength {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("table for `{symbol}` contains {value} at index {index}, carrier size is {size}")]
    EntryOutOfRange {
        symbol: String,
        index: usize,
        value: usize,
        size: usize,
    },
    #[error("table given for `{symbol}` which is not in the signature")]
    UnknownTable { symbol: String },
    #[error("no table given for `{symbol}`")]
    MissingTable { symbol: String },
    #[error("signatures differ between `{left}` and `{right}`")]
    SignatureMismatch { left: String, right: String },
    #[error("unknown builtin family `{family}`")]
    UnknownFamily { family: String },
    #[error("parameter {n} out of bounds for builtin family `{family}`")]
    ParameterOutOfBounds { family: String, n: usize },
    #[error("map does not preserve `{symbol}` at tuple {tuple:?}")]
    NotAHomomorphism { symbol: String, tuple: Vec<usize> },
    #[error("map length {found} does not match domain size {expected}")]
    MapLength { expected: usize, found: usize },
    #[error("map value {value} outside codomain of size {size}")]
    MapValueOutOfRange { value: usize, size: usize },
    #[error("subset is not closed: `{symbol}` applied to {tuple:?} gives {value}")]
    NotClosed {
        symbol: String,
        tuple: Vec<usize>,
        value: usize,
    },
    #[error("signature has no designated constant")]
    NotPointed,
    #[error("{0} is not the value of the designated constant in the codomain")]
    WrongZero(usize),
}

/// Row-major index of a tuple over a carrier of `size` elements.
pub fn pack_tuple(tuple: &[usize], size: usize) -> usize {
    tuple.iter().fold(0, |acc, &v| acc * size + v)
}

/// Inverse of [`pack_tuple`] at a fixed arity.
pub fn unpack_tuple(mut index: usize, size: usize, arity: usize) -> Vec<usize> {
    let mut tuple = vec![0usize; arity];
    for slot in tuple.iter_mut().rev() {
        *slot = index % size;
        index /= size;
    }
    tuple
}

/// A finite algebra: carrier `{0..size-1}` plus one total table per symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    sig: Signature,
    tables: Vec<Vec<usize>>,
}

impl FiniteAlgebra {
    /// Validates table lengths (`size^arity`) and entry ranges.
    pub fn new(
        name: impl Into<String>,
        size: usize,
        sig: Signature,
        tables: Vec<Vec<usize>>,
    ) -> Result<Self, AlgebraError> {
        if size == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        assert_eq!(sig.symbols().len(), tables.len(), "one table per symbol");
        for (sym, table) in sig.symbols().iter().zip(&tables) {
            let expected = size.pow(sym.arity as u32);
            if table.len() != expected {
                return Err(AlgebraError::TableLength {
                    symbol: sym.name.clone(),
                    expected,
                    found: table.len(),
                });
            }
            if let Some(index) = table.iter().position(|&v| v >= size) {
                return Err(AlgebraError::EntryOutOfRange {
                    symbol: sym.name.clone(),
                    index,
                    value: table[index],
                    size,
                });
            }
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            sig,
            tables,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn table(&self, symbol: &str) -> &[usize] {
        let idx = self.sig.index_of(symbol).expect("symbol in signature");
        &self.tables[idx]
    }

    pub fn table_by_index(&self, index: usize) -> &[usize] {
        &self.tables[index]
    }

    /// Table lookup for `symbol` at an argument tuple.
    pub fn apply(&self, symbol: &str, args: &[usize]) -> usize {
        let idx = self
            .sig
            .index_of(symbol)
            .unwrap_or_else(|| panic!("symbol `{symbol}` not in signature"));
        self.apply_by_index(idx, args)
    }

    pub fn apply_by_index(&self, index: usize, args: &[usize]) -> usize {
        let sym = &self.sig.symbols()[index];
        assert_eq!(args.len(), sym.arity, "arity mismatch for `{}`", sym.name);
        self.tables[index][pack_tuple(args, self.size)]
    }

    /// Value of an arity-0 symbol.
    pub fn constant_value(&self, symbol: &str) -> usize {
        self.apply(symbol, &[])
    }

    /// Value of the designated constant of a pointed signature.
    pub fn zero(&self) -> Result<usize, AlgebraError> {
        let sym = self
            .sig
            .designated_constant()
            .ok_or(AlgebraError::NotPointed)?;
        Ok(self.constant_value(&sym.name))
    }

    pub fn same_signature(&self, other: &FiniteAlgebra) -> bool {
        self.sig == other.sig
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct AlgebraFile {
    name: String,
    size: usize,
    signature: Vec<OpSymbol>,
    tables: BTreeMap<String, Vec<usize>>,
}

/// Parses the JSON algebra format:
/// `{"name", "size", "signature": [{"name","arity","const"}], "tables": {symbol: flat row-major array}}`.
pub fn algebra_from_json(text: &str) -> Result<FiniteAlgebra, AlgebraError> {
    let file: AlgebraFile = serde_json::from_str(text)?;
    let sig = Signature::new(file.signature)?;
    for key in file.tables.keys() {
        if sig.index_of(key).is_none() {
            return Err(AlgebraError::UnknownTable {
                symbol: key.clone(),
            });
        }
    }
    let mut tables = Vec::with_capacity(sig.symbols().len());
    for sym in sig.symbols() {
        let table = file
            .tables
            .get(&sym.name)
            .ok_or_else(|| AlgebraError::MissingTable {
                symbol: sym.name.clone(),
            })?;
        tables.push(table.clone());
    }
    FiniteAlgebra::new(file.name, file.size, sig, tables)
}

/// Serializes an algebra in the same JSON format, with tables keyed in
/// alphabetical order so output is byte-stable.
pub fn algebra_to_json(alg: &FiniteAlgebra) -> String {
    let file = AlgebraFile {
        name: alg.name.clone(),
        size: alg.size,
        signature: alg.sig.symbols().to_vec(),
        tables: alg
            .sig
            .symbols()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), alg.tables[i].clone()))
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("algebra serialization cannot fail")
}

/// Loads and validates an algebra file.
pub fn load_algebra(path: impl AsRef<Path>) -> Result<FiniteAlgebra, AlgebraError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AlgebraError::Io {
        path: path.display().to_string(),
        source,
    })?;
    algebra_from_json(&text)
}

/// Builtin corpus families, capped at size 12.
///
/// * `cyclic`: `Z_n` with `plus`, `minus`, constant `zero`.
/// * `cyclic_plus_only`: `Z_n` with `plus` and `zero` only.
/// * `pointed_set`: bare carrier with the single constant `zero`.
/// * `chain_semilattice`: an n-chain with its meet and the meet-unit as
///   constant `zero`; the chain is ordered with 0 on top, so on the numeric
///   labels `meet(x,y) = max(x,y)` and `meet(x,0) = x`.
/// * `bool_subtraction`: `{0,1}` with `sub(x,y) = x AND NOT y` and `zero` (n = 2).
pub fn builtin(family: &str, n: usize) -> Result<FiniteAlgebra, AlgebraError> {
    const CAP: usize = 12;
    let bounds = |lo: usize, hi: usize| -> Result<(), AlgebraError> {
        if n < lo || n > hi {
            Err(AlgebraError::ParameterOutOfBounds {
                family: family.to_string(),
                n,
            })
        } else {
            Ok(())
        }
    };
    match family {
        "cyclic" => {
            bounds(1, CAP)?;
            let sig = crate::term::parse_signature("plus/2, minus/2, zero/0 const")?;
            let plus: Vec<usize> = pairs(n).map(|(a, b)| (a + b) % n).collect();
            let minus: Vec<usize> = pairs(n).map(|(a, b)| (n + a - b) % n).collect();
            FiniteAlgebra::new(format!("Z{n}"), n, sig, vec![plus, minus, vec![0]])
        }
        "cyclic_plus_only" => {
            bounds(1, CAP)?;
            let sig = crate::term::parse_signature("plus/2, zero/0 const")?;
            let plus: Vec<usize> = pairs(n).map(|(a, b)| (a + b) % n).collect();
            FiniteAlgebra::new(format!("Z{n}_plus"), n, sig, vec![plus, vec![0]])
        }
        "pointed_set" => {
            bounds(1, CAP)?;
            let sig = crate::term::parse_signature("zero/0 const")?;
            FiniteAlgebra::new(format!("P{n}"), n, sig, vec![vec![0]])
        }
        "chain_semilattice" => {
            bounds(1, CAP)?;
            let sig = crate::term::parse_signature("meet/2, zero/0 const")?;
            let meet: Vec<usize> = pairs(n).map(|(a, b)| a.max(b)).collect();
            FiniteAlgebra::new(format!("C{n}"), n, sig, vec![meet, vec![0]])
        }
        "bool_subtraction" => {
            bounds(2, 2)?;
            let sig = crate::term::parse_signature("sub/2, zero/0 const")?;
            let sub: Vec<usize> = pairs(2).map(|(a, b)| a & (1 - b)).collect();
            FiniteAlgebra::new("B2", 2, sig, vec![sub, vec![0]])
        }
        other => Err(AlgebraError::UnknownFamily {
            family: other.to_string(),
        }),
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |a| (0..n).map(move |b| (a, b)))
}

/// A table-preserving map between algebras of the same signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    pub dom: FiniteAlgebra,
    pub cod: FiniteAlgebra,
    pub map: Vec<usize>,
}

impl Homomorphism {
    /// Validates preservation of every operation table.
    pub fn new(
        dom: FiniteAlgebra,
        cod: FiniteAlgebra,
        map: Vec<usize>,
    ) -> Result<Self, AlgebraError> {
        if !dom.same_signature(&cod) {
            return Err(AlgebraError::SignatureMismatch {
                left: dom.name.clone(),
                right: cod.name.clone(),
            });
        }
        if map.len() != dom.size {
            return Err(AlgebraError::MapLength {
                expected: dom.size,
                found: map.len(),
            });
        }
        if let Some(&value) = map.iter().find(|&&v| v >= cod.size) {
            return Err(AlgebraError::MapValueOutOfRange {
                value,
                size: cod.size,
            });
        }
        let hom = Homomorphism { dom, cod, map };
        hom.check_preservation()?;
        Ok(hom)
    }

    /// Full-table preservation re-check, independent of how the map was found.
    pub fn check_preservation(&self) -> Result<(), AlgebraError> {
        for (idx, sym) in self.dom.sig.symbols().iter().enumerate() {
            for t in 0..self.dom.size.pow(sym.arity as u32) {
                let tuple = unpack_tuple(t, self.dom.size, sym.arity);
                let mapped: Vec<usize> = tuple.iter().map(|&v| self.map[v]).collect();
                if self.map[self.dom.apply_by_index(idx, &tuple)]
                    != self.cod.apply_by_index(idx, &mapped)
                {
                    return Err(AlgebraError::NotAHomomorphism {
                        symbol: sym.name.clone(),
                        tuple,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn identity(alg: &FiniteAlgebra) -> Homomorphism {
        Homomorphism {
            dom: alg.clone(),
            cod: alg.clone(),
            map: (0..alg.size).collect(),
        }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `other` after `self` (requires `self.cod == other.dom`).
    pub fn then(&self, other: &Homomorphism) -> Homomorphism {
        assert_eq!(self.cod, other.dom, "composition domain mismatch");
        Homomorphism {
            dom: self.dom.clone(),
            cod: other.cod.clone(),
            map: self.map.iter().map(|&v| other.map[v]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.cod.size];
        for &v in &self.map {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.cod.size];
        for &v in &self.map {
            if hit[v] {
                return false;
            }
            hit[v] = true;
        }
        true
    }

    /// Elements of `cod` whose preimage contains `value`... the fiber over `value`.
    pub fn preimage(&self, value: usize) -> Vec<usize> {
        (0..self.dom.size).filter(|&x| self.map[x] == value).collect()
    }
}

/// Componentwise product with row-major carrier indexing `(a,b) -> a*|B| + b`
/// and the two projection homomorphisms.
pub fn product(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
) -> Result<(FiniteAlgebra, Homomorphism, Homomorphism), AlgebraError> {
    if !a.same_signature(b) {
        return Err(AlgebraError::SignatureMismatch {
            left: a.name.clone(),
            right: b.name.clone(),
        });
    }
    let size = a.size * b.size;
    let mut tables = Vec::with_capacity(a.sig.symbols().len());
    for (idx, sym) in a.sig.symbols().iter().enumerate() {
        let mut table = Vec::with_capacity(size.pow(sym.arity as u32));
        for t in 0..size.pow(sym.arity as u32) {
            let tuple = unpack_tuple(t, size, sym.arity);
            let left: Vec<usize> = tuple.iter().map(|&p| p / b.size).collect();
            let right: Vec<usize> = tuple.iter().map(|&p| p % b.size).collect();
            table.push(a.apply_by_index(idx, &left) * b.size + b.apply_by_index(idx, &right));
        }
        tables.push(table);
    }
    let prod = FiniteAlgebra::new(
        format!("({}x{})", a.name, b.name),
        size,
        a.sig.clone(),
        tables,
    )?;
    let pi1 = Homomorphism {
        dom: prod.clone(),
        cod: a.clone(),
        map: (0..size).map(|p| p / b.size).collect(),
    };
    let pi2 = Homomorphism {
        dom: prod.clone(),
        cod: b.clone(),
        map: (0..size).map(|p| p % b.size).collect(),
    };
    Ok((prod, pi1, pi2))
}

/// A subset of a parent algebra closed under all operations, kept in parent
/// coordinates (no re-normalization); `compact` produces the standalone form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetAlgebra {
    parent: FiniteAlgebra,
    elements: Vec<usize>,
}

impl SubsetAlgebra {
    /// Validates closure under every table; `elements` is sorted and deduplicated.
    pub fn new(parent: FiniteAlgebra, mut elements: Vec<usize>) -> Result<Self, AlgebraError> {
        elements.sort_unstable();
        elements.dedup();
        for (idx, sym) in parent.sig.symbols().iter().enumerate() {
            let mut tuple_idx = vec![0usize; sym.arity];
            loop {
                let tuple: Vec<usize> = tuple_idx.iter().map(|&i| elements[i]).collect();
                let value = parent.apply_by_index(idx, &tuple);
                if elements.binary_search(&value).is_err() {
                    return Err(AlgebraError::NotClosed {
                        symbol: sym.name.clone(),
                        tuple,
                        value,
                    });
                }
                if !advance(&mut tuple_idx, elements.len()) {
                    break;
                }
            }
        }
        Ok(SubsetAlgebra { parent, elements })
    }

    /// Closure of a generating set under all operations (and constants).
    pub fn generated(parent: FiniteAlgebra, generators: &[usize]) -> SubsetAlgebra {
        let mut member = vec![false; parent.size];
        for &g in generators {
            member[g] = true;
        }
        loop {
            let mut changed = false;
            let current: Vec<usize> = (0..parent.size).filter(|&x| member[x]).collect();
            for (idx, sym) in parent.sig.symbols().iter().enumerate() {
                if sym.arity == 0 {
                    let v = parent.apply_by_index(idx, &[]);
                    if !member[v] {
                        member[v] = true;
                        changed = true;
                    }
                    continue;
                }
                if current.is_empty() {
                    continue;
                }
                let mut tuple_idx = vec![0usize; sym.arity];
                loop {
                    let tuple: Vec<usize> = tuple_idx.iter().map(|&i| current[i]).collect();
                    let v = parent.apply_by_index(idx, &tuple);
                    if !member[v] {
                        member[v] = true;
                        changed = true;
                    }
                    if !advance(&mut tuple_idx, current.len()) {
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let elements: Vec<usize> = (0..parent.size).filter(|&x| member[x]).collect();
        SubsetAlgebra { parent, elements }
    }

    pub fn parent(&self) -> &FiniteAlgebra {
        &self.parent
    }

    /// Sorted parent coordinates of the subset.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, parent_element: usize) -> bool {
        self.elements.binary_search(&parent_element).is_ok()
    }

    /// Position of a parent element within the subset ordering.
    pub fn position_of(&self, parent_element: usize) -> Option<usize> {
        self.elements.binary_search(&parent_element).ok()
    }

    /// Re-normalizes the subset to carrier `{0..len-1}` together with the
    /// inclusion homomorphism back into the parent.
    pub fn compact(&self, name: impl Into<String>) -> (FiniteAlgebra, Homomorphism) {
        let size = self.elements.len();
        let mut tables = Vec::with_capacity(self.parent.sig.symbols().len());
        for (idx, sym) in self.parent.sig.symbols().iter().enumerate() {
            let mut table = Vec::with_capacity(size.pow(sym.arity as u32));
            for t in 0..size.pow(sym.arity as u32) {
                let tuple: Vec<usize> = unpack_tuple(t, size, sym.arity)
                    .into_iter()
                    .map(|i| self.elements[i])
                    .collect();
                let value = self.parent.apply_by_index(idx, &tuple);
                table.push(self.position_of(value).expect("subset is closed"));
            }
            tables.push(table);
        }
        let alg = FiniteAlgebra::new(name, size, self.parent.sig.clone(), tables)
            .expect("compacted subset is a valid algebra");
        let inclusion = Homomorphism {
            dom: alg.clone(),
            cod: self.parent.clone(),
            map: self.elements.clone(),
        };
        (alg, inclusion)
    }
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

/// The pullback fiber `{(a,e) : alpha(a) = f(e)}` of two maps with a common
/// codomain, as a verified subset of `product(A, E)`.
pub fn pullback_fiber(
    alpha: &Homomorphism,
    f: &Homomorphism,
) -> Result<SubsetAlgebra, AlgebraError> {
    if alpha.cod != f.cod {
        return Err(AlgebraError::SignatureMismatch {
            left: alpha.cod.name.clone(),
            right: f.cod.name.clone(),
        });
    }
    let (prod, _, _) = product(&alpha.dom, &f.dom)?;
    let e_size = f.dom.size;
    let elements: Vec<usize> = (0..prod.size())
        .filter(|&p| alpha.map[p / e_size] == f.map[p % e_size])
        .collect();
    SubsetAlgebra::new(prod, elements)
}

/// The kernel `alpha^{-1}(zero)` of a homomorphism out of a pointed algebra.
/// `zero` must be the value of the designated constant in the codomain;
/// closure is verified, not assumed.
pub fn kernel(alpha: &Homomorphism, zero: usize) -> Result<SubsetAlgebra, AlgebraError> {
    let expected = alpha.cod.zero()?;
    if zero != expected {
        return Err(AlgebraError::WrongZero(zero));
    }
    let elements = alpha.preimage(zero);
    SubsetAlgebra::new(alpha.dom.clone(), elements)
}

/// All homomorphisms `A -> B` in lexicographic order on the map array,
/// truncated at `limit`. The backtracking search branches on the smallest
/// unassigned element and propagates images of constants and generated
/// elements before each branch.
pub fn find_homomorphisms(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    limit: usize,
) -> Vec<Homomorphism> {
    assert!(a.same_signature(b), "signature mismatch");
    let mut found = Vec::new();
    let mut partial: Vec<Option<usize>> = vec![None; a.size];
    search_homs(a, b, &mut partial, limit, &mut found);
    found
}

fn search_homs(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    partial: &mut Vec<Option<usize>>,
    limit: usize,
    found: &mut Vec<Homomorphism>,
) {
    if found.len() >= limit {
        return;
    }
    let saved = partial.clone();
    if !propagate(a, b, partial) {
        *partial = saved;
        return;
    }
    match partial.iter().position(|v| v.is_none()) {
        None => {
            let map: Vec<usize> = partial.iter().map(|v| v.unwrap()).collect();
            let hom = Homomorphism {
                dom: a.clone(),
                cod: b.clone(),
                map,
            };
            // Propagation guarantees preservation, but re-check anyway.
            if hom.check_preservation().is_ok() {
                found.push(hom);
            }
        }
        Some(next) => {
            for value in 0..b.size {
                partial[next] = Some(value);
                search_homs(a, b, partial, limit, found);
                if found.len() >= limit {
                    break;
                }
            }
            partial[next] = None;
        }
    }
    *partial = saved;
}

/// Closes a partial map under all operations; false on conflict.
fn propagate(a: &FiniteAlgebra, b: &FiniteAlgebra, partial: &mut [Option<usize>]) -> bool {
    loop {
        let mut changed = false;
        let assigned: Vec<usize> = (0..a.size()).filter(|&x| partial[x].is_some()).collect();
        for (idx, sym) in a.sig.symbols().iter().enumerate() {
            if sym.arity == 0 {
                let v = a.apply_by_index(idx, &[]);
                let w = b.apply_by_index(idx, &[]);
                match partial[v] {
                    None => {
                        partial[v] = Some(w);
                        changed = true;
                    }
                    Some(x) if x != w => return false,
                    _ => {}
                }
                continue;
            }
            if assigned.is_empty() {
                continue;
            }
            let mut tuple_idx = vec![0usize; sym.arity];
            loop {
                let tuple: Vec<usize> = tuple_idx.iter().map(|&i| assigned[i]).collect();
                let v = a.apply_by_index(idx, &tuple);
                let mapped: Vec<usize> = tuple.iter().map(|&x| partial[x].unwrap()).collect();
                let w = b.apply_by_index(idx, &mapped);
                match partial[v] {
                    None => {
                        partial[v] = Some(w);
                        changed = true;
                    }
                    Some(x) if x != w => return false,
                    _ => {}
                }
                if !advance(&mut tuple_idx, assigned.len()) {
                    break;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_round_trip_and_validation() {
        let z3 = builtin("cyclic", 3).unwrap();
        let text = algebra_to_json(&z3);
        let back = algebra_from_json(&text).unwrap();
        assert_eq!(z3, back);

        let bad = r#"{"name":"bad","size":3,
            "signature":[{"name":"plus","arity":2,"const":false}],
            "tables":{"plus":[0,1,2,1,2,0,2,0,7]}}"#;
        assert!(matches!(
            algebra_from_json(bad),
            Err(AlgebraError::EntryOutOfRange { value: 7, .. })
        ));

        let short = r#"{"name":"bad","size":3,
            "signature":[{"name":"plus","arity":2,"const":false}],
            "tables":{"plus":[0,1,2]}}"#;
        assert!(matches!(
            algebra_from_json(short),
            Err(AlgebraError::TableLength { expected: 9, found: 3, .. })
        ));

        let stray = r#"{"name":"bad","size":2,
            "signature":[{"name":"zero","arity":0,"const":true}],
            "tables":{"zero":[0],"plus":[0,1,1,0]}}"#;
        assert!(matches!(
            algebra_from_json(stray),
            Err(AlgebraError::UnknownTable { .. })
        ));
    }

    #[test]
    fn builtin_families() {
        let z3 = builtin("cyclic", 3).unwrap();
        assert_eq!(z3.size(), 3);
        assert_eq!(z3.apply("plus", &[1, 2]), 0);
        assert_eq!(z3.apply("minus", &[0, 1]), 2);
        assert_eq!(z3.zero().unwrap(), 0);

        let p3 = builtin("pointed_set", 3).unwrap();
        assert_eq!(p3.size(), 3);
        assert_eq!(p3.signature().symbols().len(), 1);

        let c2 = builtin("chain_semilattice", 2).unwrap();
        assert_eq!(c2.apply("meet", &[0, 1]), 1);
        assert_eq!(c2.apply("meet", &[1, 0]), 1);
        assert_eq!(c2.apply("meet", &[0, 0]), 0);

        let b2 = builtin("bool_subtraction", 2).unwrap();
        assert_eq!(b2.apply("sub", &[1, 0]), 1);
        assert_eq!(b2.apply("sub", &[1, 1]), 0);
        assert_eq!(b2.apply("sub", &[0, 1]), 0);

        assert!(matches!(
            builtin("cyclic", 13),
            Err(AlgebraError::ParameterOutOfBounds { .. })
        ));
        assert!(matches!(
            builtin("dihedral", 3),
            Err(AlgebraError::UnknownFamily { .. })
        ));
    }

    #[test]
    fn product_indexing() {
        let z2 = builtin("cyclic", 2).unwrap();
        let z3 = builtin("cyclic", 3).unwrap();
        let (prod, pi1, pi2) = product(&z2, &z3).unwrap();
        assert_eq!(prod.size(), 6);
        assert_eq!(pi1.apply(5), 1);
        assert_eq!(pi2.apply(5), 2);
        pi1.check_preservation().unwrap();
        pi2.check_preservation().unwrap();

        // Unit law: product with the one-element algebra is carrier-bijective to A.
        let triv = builtin("cyclic", 1).unwrap();
        let (prod, pi1, _) = product(&z3, &triv).unwrap();
        assert_eq!(prod.size(), z3.size());
        assert!(pi1.is_injective() && pi1.is_surjective());

        // Associativity of carriers up to re-indexing: (a,(b,c)) vs ((a,b),c).
        let (bc, _, _) = product(&z3, &z3).unwrap();
        let (a_bc, _, _) = product(&z2, &bc).unwrap();
        let (ab, _, _) = product(&z2, &z3).unwrap();
        let (ab_c, _, _) = product(&ab, &z3).unwrap();
        assert_eq!(a_bc.size(), ab_c.size());
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..3 {
                    let left = a * 9 + (b * 3 + c);
                    let right = (a * 3 + b) * 3 + c;
                    assert_eq!(left, right);
                    assert_eq!(a_bc.table("plus")[left * 18 + left], ab_c.table("plus")[right * 18 + right]);
                }
            }
        }
    }

    fn mod3_reduction() -> Homomorphism {
        let z6 = builtin("cyclic", 6).unwrap();
        let z3 = builtin("cyclic", 3).unwrap();
        Homomorphism::new(z6, z3, (0..6).map(|x| x % 3).collect()).unwrap()
    }

    #[test]
    fn pullback_fibers() {
        let alpha = mod3_reduction();
        let id3 = Homomorphism::identity(&alpha.cod);
        let fiber = pullback_fiber(&alpha, &id3).unwrap();
        assert_eq!(fiber.len(), 6);
        for &p in fiber.elements() {
            let (a, e) = (p / 3, p % 3);
            assert_eq!(a % 3, e);
        }

        // Diagonal: identical maps give the diagonal subset.
        let id6 = Homomorphism::identity(&alpha.dom);
        let diag = pullback_fiber(&id6, &id6).unwrap();
        assert_eq!(diag.len(), 6);
        assert!(diag.elements().iter().all(|&p| p / 6 == p % 6));

        // Pointed sets: only the matched basepoint pairs survive.
        let p2 = builtin("pointed_set", 2).unwrap();
        let p3 = builtin("pointed_set", 3).unwrap();
        let alpha = Homomorphism::new(p2.clone(), p3.clone(), vec![0, 1]).unwrap();
        let f = Homomorphism::new(p2, p3, vec![0, 2]).unwrap();
        let fiber = pullback_fiber(&alpha, &f).unwrap();
        assert_eq!(fiber.elements(), &[0]);
    }

    #[test]
    fn kernels() {
        let alpha = mod3_reduction();
        let k = kernel(&alpha, 0).unwrap();
        assert_eq!(k.elements(), &[0, 3]);
        assert!(matches!(kernel(&alpha, 1), Err(AlgebraError::WrongZero(1))));

        let z6 = builtin("cyclic", 6).unwrap();
        let id = Homomorphism::identity(&z6);
        assert_eq!(kernel(&id, 0).unwrap().elements(), &[0]);

        let triv = builtin("cyclic", 1).unwrap();
        let to_triv = Homomorphism::new(z6, triv, vec![0; 6]).unwrap();
        assert_eq!(kernel(&to_triv, 0).unwrap().len(), 6);
    }

    #[test]
    fn kernel_closure_failure_is_reported() {
        // A pointed signature with a unary op pushing 0 out of the would-be kernel.
        let sig = crate::term::parse_signature("f/1, zero/0 const").unwrap();
        let a = FiniteAlgebra::new("A", 2, sig.clone(), vec![vec![1, 1], vec![0]]).unwrap();
        let b = FiniteAlgebra::new("B", 2, sig, vec![vec![1, 0], vec![0]]).unwrap();
        let alpha = Homomorphism::new(a, b, vec![0, 1]).unwrap();
        assert!(matches!(
            kernel(&alpha, 0),
            Err(AlgebraError::NotClosed { .. })
        ));
    }

    #[test]
    fn homomorphism_enumeration() {
        let z2 = builtin("cyclic_plus_only", 2).unwrap();
        let z3 = builtin("cyclic_plus_only", 3).unwrap();
        let homs = find_homomorphisms(&z2, &z3, usize::MAX);
        assert_eq!(homs.len(), 1);
        assert_eq!(homs[0].map, vec![0, 0]);

        let homs = find_homomorphisms(&z2, &z2, usize::MAX);
        assert_eq!(homs.len(), 2);
        assert_eq!(homs[0].map, vec![0, 0]);
        assert_eq!(homs[1].map, vec![0, 1]);

        let z6 = builtin("cyclic", 6).unwrap();
        let homs = find_homomorphisms(&z6, &z6, usize::MAX);
        assert!(homs.iter().any(|h| h.is_identity()));
        // Lexicographic output order.
        let maps: Vec<_> = homs.iter().map(|h| h.map.clone()).collect();
        let mut sorted = maps.clone();
        sorted.sort();
        assert_eq!(maps, sorted);

        // Truncation honors the limit.
        assert_eq!(find_homomorphisms(&z6, &z6, 2).len(), 2);
    }

    #[test]
    fn subset_generation_and_compaction() {
        let z6 = builtin("cyclic", 6).unwrap();
        let sub = SubsetAlgebra::generated(z6.clone(), &[2]);
        assert_eq!(sub.elements(), &[0, 2, 4]);
        let (alg, incl) = sub.compact("Z6_even");
        assert_eq!(alg.size(), 3);
        incl.check_preservation().unwrap();
        assert_eq!(incl.map, vec![0, 2, 4]);

        assert!(SubsetAlgebra::new(z6, vec![0, 1]).is_err());
    }
}
