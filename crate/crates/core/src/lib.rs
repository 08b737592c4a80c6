//! Library for extracting, representing, and scoring visual structural
//! knowledge as code blocks.
//!
//! An image's annotations (concepts, locations, attributes, relations,
//! events) are serialized into a small code grammar, masked stage by stage
//! along a curriculum pyramid, fed through a pluggable sequence model, and
//! scored with scene-graph and situation-recognition metrics.
//!
//! Module map:
//! - [`ontology`] — synset/frame registry, category alignment, class
//!   definition emission, verbalizer mapping
//! - [`codec`] — record ⇄ code-block conversion with a slot-span map
//! - [`masking`] — stage masks, downstream prompts, focused loss masks
//! - [`weakevents`] — caption SRL parses → event structures
//! - [`curriculum`] — suite curation, replay buffer, stage scheduler
//! - [`trainer`] — masked-code model contract plus a count-based reference
//!   model and training loop
//! - [`eval`] — R@K/mR@K, situation recognition, zero-shot scoring
//! - [`synth`] — deterministic desk-scale synthetic suites for tests and
//!   demos

pub mod codec;
pub mod curriculum;
pub mod eval;
pub mod masking;
pub mod ontology;
pub mod seeds;
pub mod synth;
pub mod trainer;
pub mod weakevents;
