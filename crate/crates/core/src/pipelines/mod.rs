// SPDX-License-Identifier: Apache-2.0

//! The LLM roles: prompt templating, critique parsing, tool feedback, the
//! pipeline bandit, and generation backends.

pub mod backend;
pub mod bandit;
pub mod critique;
pub mod feedback;
pub mod template;

pub use backend::{
    generate, ArchivingBackend, BackendError, GenParams, GenerationBackend, GenerationRequest,
    MockBackend, PromptRecord, ReplayBackend, ReplayOrder, WireBackend, WireConfig,
};
pub use bandit::{select_pipeline, update_bandit, BanditState};
pub use critique::{parse_critique, CritiqueError};
pub use feedback::{build_feedback_packet, LogPatternConfig, LogPatterns};
pub use template::{render_prompt, strip_code_fence, RoleTemplate, TemplateLibrary};
