//! Artificial argument corpus: syllogistic schemes, natural-language
//! rendering, corpus generation and language-model evaluation.

pub mod catalog;
pub mod completion;
pub mod gateway;
pub mod logic;
pub mod nlu;
pub mod pipeline;
pub mod verbalizer;
