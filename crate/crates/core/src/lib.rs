//! A workbench for finite universal algebras.
//!
//! Given finite algebras presented by operation tables, this crate decides
//! which characteristic term systems the generated variety carries (Mal'tsev
//! terms, biternary systems, right Omega-loop terms, unital and subtraction
//! terms, protomodular term systems of a given type), constructs the set-level
//! product decompositions of split epimorphisms those systems induce, and
//! verifies every identity, bijection, diagram equation, and term translation
//! involved, exhaustively over the finite carriers.
//!
//! Everything a search returns is self-certifying: witnesses are concrete
//! terms whose defining identities are re-checked on the algebra, and
//! decompositions come with certificates listing each verified equation and
//! the least counterexample when one fails.
//!
//! The runnable examples under `examples/` demonstrate one capability each;
//! the `finalg` binary exposes the same reports on the command line.

pub mod algebra;
pub mod clones;
pub mod report;
pub mod split;
pub mod term;
pub mod translate;

pub use algebra::{
    builtin, find_homomorphisms, kernel, load_algebra, product, pullback_fiber, AlgebraError,
    FiniteAlgebra, Homomorphism, SubsetAlgebra,
};
pub use clones::{
    find_biternary, find_maltsev, find_protomodular, find_rho_sigma, find_right_loop,
    find_subtraction, find_unital, generate_clone, ground_clone, CloneElement, CloneSet,
    CloneStatus, SearchResult, Witness, DEFAULT_CLONE_CAP,
};
pub use split::{
    check_naturality, check_naturality_maps, enumerate_split_epis, fiber_bijection,
    general_component, phi_general, phi_pointed, psi_pointed, splext_morphisms,
    verify_splext_morphism, Certificate, EquationCheck, SetMap, SplExtMorphism, SplitEpi,
    SplitError, SplitExtension,
};
pub use term::{
    check_identity, eval_term, parse_signature, parse_term, term_table, Assignment, CheckOutcome,
    Identity, OpSymbol, Signature, Term, TermError,
};
