//! Corpus processing for self-supervised pre-training of code models on
//! Java methods: cleaning, objective generation, fine-tuning datasets and
//! evaluation.

pub mod java;
pub mod clean;
pub mod seed;
pub mod ngram;
pub mod mutation;
pub mod objectives;
pub mod finetune;
pub mod eval;
pub mod pipeline;
