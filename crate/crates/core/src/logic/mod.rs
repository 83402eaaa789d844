//! Monadic first-order formulas, argument schemes, variant transforms and the
//! finite-model entailment oracle.

mod entail;
mod form;
mod formula;
mod parse;
mod scheme;
mod transform;

pub use entail::{entails, equivalent, is_valid, Interpretation, MAX_PREDICATES};
pub use form::{inverted_conclusion, Literal, Phrase, SentenceForm, Shape};
pub use formula::{Formula, Term};
pub use parse::{parse_formula, PLACEHOLDERS};
pub use scheme::{substitute, Binding, ConcreteArgument, Group, Scheme, SentenceRef, Site};
pub use transform::{
    apply_complex_predicate, apply_de_morgan, apply_negation_variant, de_morgan_scheme, negate_predicate, Compound,
    NegationMode,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("syntax error at token {token}: {message}")]
    Syntax { token: usize, message: String },
    #[error("unknown placeholder symbol '{symbol}' at token {token}")]
    UnknownSymbol { token: usize, symbol: String },
    #[error("free occurrence of x in '{0}'")]
    FreeVariable(String),
    #[error("placeholder alphabet of {size} symbols exceeds the exhaustive-search limit of {max}")]
    AlphabetTooLarge { size: usize, max: usize },
    #[error("invalid interpretation: {0}")]
    Interpretation(String),
    #[error("no sub-formula at {0}")]
    InvalidPath(String),
    #[error("duplex negatio needs a double negation at {0}")]
    NotDoubleNegation(String),
    #[error("placeholder '{0}' does not occur in the scheme")]
    UnknownPlaceholder(String),
    #[error("fresh symbol '{0}' already in use")]
    SymbolCollision(String),
    #[error("no negated conjunction or disjunction in {0}")]
    NoDeMorganSite(String),
    #[error("no binding for '{0}'")]
    MissingBinding(String),
    #[error("lexeme '{lexeme}' bound to both {first} and {second}")]
    NotInjective {
        lexeme: String,
        first: String,
        second: String,
    },
}
