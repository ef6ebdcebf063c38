//! Grounded planning machinery: fluents, actions, states, indexed
//! vocabularies and the Blocksworld generator used for data synthesis.

pub mod blocksworld;
pub mod fluent;
pub mod vocab;

pub use blocksworld::{build_blocksworld_vocabulary, domain_from_id, Blocksworld};
pub use fluent::{apply_action, is_goal_satisfied, Fluent, FluentSet, GroundedAction, State};
pub use vocab::DomainVocabulary;
