// Copyright 2026 The sessinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use thiserror::Error;

use crate::surface::{Pos, ResolveError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("{pos}: type error: expected `{expected}`, found `{found}`{}", note_text(.note))]
    Type { pos: Pos, expected: String, found: String, note: Option<String> },
    #[error("{pos}: composition error at fork: `{left}` and `{right}` cannot be composed{}", note_text(.note))]
    Composition { pos: Pos, left: String, right: String, note: Option<String> },
    #[error("{pos}: occurs check: session `{session}` has a recursive type outside an unwind")]
    Occurs { pos: Pos, session: String },
    #[error("{pos}: cannot fold recursive type of session `{session}`: {reason}")]
    Fold { pos: Pos, session: String, reason: String },
    #[error("{pos}: ambiguous type for session `{session}`: {detail}")]
    Ambiguity { pos: Pos, session: String, detail: String },
}

fn note_text(note: &Option<String>) -> String {
    match note {
        Some(n) => format!(" ({n})"),
        None => String::new(),
    }
}

impl InferError {
    pub fn pos(&self) -> Pos {
        match self {
            InferError::Resolve(e) => e.pos,
            InferError::Type { pos, .. }
            | InferError::Composition { pos, .. }
            | InferError::Occurs { pos, .. }
            | InferError::Fold { pos, .. }
            | InferError::Ambiguity { pos, .. } => *pos,
        }
    }
}
