//! Typed story DSL.
//!
//! A [`Story`] is an ordered list of [`Event`]s over four identifier
//! vocabularies (agents, rooms, objects, containers). Stories are rendered to
//! and parsed from the fixed sentence templates used by Hi-ToM, ToMi and the
//! structured variant of ExploreToM; see [`render`] and [`parse`].

mod parse;
mod render;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_question, parse_story};
pub use render::{render_event, render_question, render_question_in, render_story};

/// Highest supported belief order (length of a question's agent chain).
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoryError {
    #[error("invalid identifier {0:?}: expected [A-Za-z0-9_]+")]
    InvalidIdentifier(String),
    #[error("sentence {index} matches no template: {text:?}")]
    UnknownSentence { index: usize, text: String },
    #[error("inconsistent presence at event {index}: {reason}")]
    InconsistentPresence { index: usize, reason: String },
    #[error("sentence {index} mixes structured and templated surface forms")]
    MixedSurfaceStyle { index: usize },
    #[error("secret-witness sentence {index} has no preceding event")]
    DanglingWitness { index: usize },
    #[error("unsupported question form: {0:?}")]
    UnknownQuestionForm(String),
    #[error("belief order {0} exceeds the maximum of {MAX_ORDER}")]
    OrderTooHigh(usize),
    #[error("chapter starting at event {0} does not begin with an Enter")]
    BadChapter(usize),
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(token: impl Into<String>) -> Result<Self, StoryError> {
                let token = token.into();
                if valid_token(&token) {
                    Ok(Self(token))
                } else {
                    Err(StoryError::InvalidIdentifier(token))
                }
            }

            /// Builds an id from its surface form, mapping spaces to underscores.
            pub fn from_surface(surface: &str) -> Result<Self, StoryError> {
                Self::new(surface.replace(' ', "_"))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            pub fn surface(&self, style: SurfaceStyle) -> String {
                style.surface(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = StoryError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl TryFrom<String> for $name {
            type Error = StoryError;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }
    };
}

id_type!(
    /// Agent name, e.g. `Olivia`.
    AgentId
);
id_type!(
    /// Room token, e.g. `playroom` or `back_room_of_the_thrift_store`.
    RoomId
);
id_type!(ObjectId);
id_type!(
    /// Container token; Hi-ToM containers carry a colour prefix (`blue_pantry`).
    ContainerId
);

/// How identifiers appear in surface text.
///
/// `Templated` (Hi-ToM, ToMi) keeps underscores verbatim. `Structured`
/// (ExploreToM) writes multi-word tokens with spaces and uses the long
/// "which is also located in" move form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceStyle {
    #[default]
    Templated,
    Structured,
}

impl SurfaceStyle {
    pub fn surface(self, token: &str) -> String {
        match self {
            SurfaceStyle::Templated => token.to_string(),
            SurfaceStyle::Structured => token.replace('_', " "),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pronoun {
    His,
    Her,
    Their,
}

impl Pronoun {
    pub fn as_str(self) -> &'static str {
        match self {
            Pronoun::His => "his",
            Pronoun::Her => "her",
            Pronoun::Their => "their",
        }
    }
}

/// Pronoun lookup used when generating `lost` distractors.
#[derive(Debug, Clone, Default)]
pub struct PronounTable {
    pub overrides: HashMap<String, Pronoun>,
    pub default: Option<Pronoun>,
}

impl PronounTable {
    pub fn pronoun_for(&self, agent: &AgentId) -> Pronoun {
        self.overrides
            .get(agent.as_str())
            .copied()
            .or(self.default)
            .unwrap_or(Pronoun::His)
    }
}

/// Distractor sentences carry no location information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verb", content = "pronoun")]
pub enum DistractorKind {
    Likes,
    Loves,
    Dislikes,
    Lost(Pronoun),
    Saw,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Enter {
        agents: Vec<AgentId>,
        room: RoomId,
    },
    Exit {
        agent: AgentId,
        room: RoomId,
    },
    /// Scene anchor: "The X is in the Y."
    Declare {
        object: ObjectId,
        container: ContainerId,
        room: RoomId,
    },
    Move {
        agent: AgentId,
        object: ObjectId,
        to: ContainerId,
        room: RoomId,
    },
    NoOp {
        agent: AgentId,
        room: RoomId,
    },
    PrivateClaim {
        speaker: AgentId,
        listener: AgentId,
        object: ObjectId,
        container: ContainerId,
    },
    PublicClaim {
        speaker: AgentId,
        object: ObjectId,
        container: ContainerId,
    },
    Distractor {
        agent: AgentId,
        kind: DistractorKind,
        subject: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    #[serde(flatten)]
    pub kind: EventKind,
    /// Agents who secretly witness this event without being in the room.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub secret_witnesses: Vec<AgentId>,
}

impl Event {
    pub fn new(kind: EventKind) -> Self {
        Event {
            kind,
            secret_witnesses: Vec::new(),
        }
    }

    pub fn with_secret_witness(mut self, agent: AgentId) -> Self {
        self.secret_witnesses.push(agent);
        self
    }

    /// The `(object, container)` this event physically places, if any.
    pub fn placement(&self) -> Option<(&ObjectId, &ContainerId)> {
        match &self.kind {
            EventKind::Declare {
                object, container, ..
            } => Some((object, container)),
            EventKind::Move { object, to, .. } => Some((object, to)),
            _ => None,
        }
    }

    pub fn is_inert(&self) -> bool {
        matches!(
            self.kind,
            EventKind::Distractor { .. } | EventKind::NoOp { .. }
        )
    }

    fn agents(&self) -> Vec<&AgentId> {
        let mut out: Vec<&AgentId> = match &self.kind {
            EventKind::Enter { agents, .. } => agents.iter().collect(),
            EventKind::Exit { agent, .. }
            | EventKind::Move { agent, .. }
            | EventKind::NoOp { agent, .. }
            | EventKind::Distractor { agent, .. } => vec![agent],
            EventKind::Declare { .. } => vec![],
            EventKind::PrivateClaim {
                speaker, listener, ..
            } => vec![speaker, listener],
            EventKind::PublicClaim { speaker, .. } => vec![speaker],
        };
        out.extend(self.secret_witnesses.iter());
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryMeta {
    #[serde(default)]
    pub dataset_tag: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Event indices at which chapters begin.
    #[serde(default)]
    pub chapter_boundaries: Vec<usize>,
    /// Set when some claim asserts a location other than the true one.
    #[serde(default)]
    pub deceptive: bool,
}

/// A validated story. Vocabularies are derived from the events in order of
/// first mention, so two stories with the same events and style are equal up
/// to `id` and `meta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub id: String,
    pub style: SurfaceStyle,
    pub events: Vec<Event>,
    pub agents: Vec<AgentId>,
    pub rooms: Vec<RoomId>,
    pub objects: Vec<ObjectId>,
    pub containers: Vec<ContainerId>,
    pub meta: StoryMeta,
}

fn push_unique<T: PartialEq + Clone>(v: &mut Vec<T>, x: &T) {
    if !v.contains(x) {
        v.push(x.clone());
    }
}

impl Story {
    /// Validates presence bookkeeping and derives vocabularies and chapters.
    pub fn new(
        id: impl Into<String>,
        style: SurfaceStyle,
        events: Vec<Event>,
    ) -> Result<Story, StoryError> {
        check_presence(&events)?;
        let mut agents = Vec::new();
        let mut rooms = Vec::new();
        let mut objects = Vec::new();
        let mut containers = Vec::new();
        for ev in &events {
            for a in ev.agents() {
                push_unique(&mut agents, a);
            }
            match &ev.kind {
                EventKind::Enter { room, .. }
                | EventKind::Exit { room, .. }
                | EventKind::NoOp { room, .. } => push_unique(&mut rooms, room),
                EventKind::Declare {
                    object,
                    container,
                    room,
                } => {
                    push_unique(&mut objects, object);
                    push_unique(&mut containers, container);
                    push_unique(&mut rooms, room);
                }
                EventKind::Move {
                    object, to, room, ..
                } => {
                    push_unique(&mut objects, object);
                    push_unique(&mut containers, to);
                    push_unique(&mut rooms, room);
                }
                EventKind::PrivateClaim {
                    object, container, ..
                }
                | EventKind::PublicClaim {
                    object, container, ..
                } => {
                    push_unique(&mut objects, object);
                    push_unique(&mut containers, container);
                }
                EventKind::Distractor { .. } => {}
            }
        }
        let chapter_boundaries = infer_chapters(&events);
        Ok(Story {
            id: id.into(),
            style,
            events,
            agents,
            rooms,
            objects,
            containers,
            meta: StoryMeta {
                chapter_boundaries,
                ..StoryMeta::default()
            },
        })
    }

    /// Re-checks every structural invariant, e.g. after deserialization.
    pub fn validate(&self) -> Result<(), StoryError> {
        let rebuilt = Story::new(self.id.clone(), self.style, self.events.clone())?;
        for &b in &self.meta.chapter_boundaries {
            match self.events.get(b) {
                Some(Event {
                    kind: EventKind::Enter { .. },
                    ..
                }) => {}
                _ => return Err(StoryError::BadChapter(b)),
            }
        }
        if rebuilt.agents != self.agents
            || rebuilt.rooms != self.rooms
            || rebuilt.objects != self.objects
            || rebuilt.containers != self.containers
        {
            return Err(StoryError::InconsistentPresence {
                index: 0,
                reason: "declared vocabulary does not match events".into(),
            });
        }
        Ok(())
    }

    /// Same events, style and vocabularies (ignores `id` and `meta`).
    pub fn same_structure(&self, other: &Story) -> bool {
        self.style == other.style
            && self.events == other.events
            && self.agents == other.agents
            && self.rooms == other.rooms
            && self.objects == other.objects
            && self.containers == other.containers
            && self.meta.chapter_boundaries == other.meta.chapter_boundaries
    }

    /// Story with every event for which `keep` returns false removed.
    pub fn retain(&self, mut keep: impl FnMut(&Event) -> bool) -> Result<Story, StoryError> {
        let events = self.events.iter().filter(|e| keep(e)).cloned().collect();
        let mut s = Story::new(self.id.clone(), self.style, events)?;
        s.meta.dataset_tag = self.meta.dataset_tag.clone();
        s.meta.seed = self.meta.seed;
        Ok(s)
    }

    /// Index of the chapter start governing event `at`.
    pub fn chapter_start(&self, at: usize) -> usize {
        self.meta
            .chapter_boundaries
            .iter()
            .copied()
            .filter(|&b| b <= at)
            .max()
            .unwrap_or(0)
    }

    pub fn has_agent(&self, a: &AgentId) -> bool {
        self.agents.contains(a)
    }

    pub fn has_object(&self, o: &ObjectId) -> bool {
        self.objects.contains(o)
    }
}

/// A chapter begins at an Enter that opens the story or whose next
/// location-relevant event is a Declare.
pub fn infer_chapters(events: &[Event]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        if !matches!(ev.kind, EventKind::Enter { .. }) {
            continue;
        }
        let next = events[i + 1..].iter().find(|e| !e.is_inert());
        if i == 0
            || matches!(
                next,
                Some(Event {
                    kind: EventKind::Declare { .. },
                    ..
                })
            )
        {
            out.push(i);
        }
    }
    out
}

fn check_presence(events: &[Event]) -> Result<(), StoryError> {
    let mut location: HashMap<&AgentId, &RoomId> = HashMap::new();
    let err = |index: usize, reason: String| StoryError::InconsistentPresence { index, reason };
    let require = |location: &HashMap<&AgentId, &RoomId>,
                   index: usize,
                   agent: &AgentId,
                   room: &RoomId|
     -> Result<(), StoryError> {
        match location.get(agent) {
            Some(r) if *r == room => Ok(()),
            Some(r) => Err(err(index, format!("{agent} is in {r}, not {room}"))),
            None => Err(err(index, format!("{agent} is not in any room"))),
        }
    };
    for (index, ev) in events.iter().enumerate() {
        match &ev.kind {
            EventKind::Enter { agents, room } => {
                if agents.is_empty() {
                    return Err(err(index, "enter with no agents".into()));
                }
                for (k, a) in agents.iter().enumerate() {
                    if agents[..k].contains(a) {
                        return Err(err(index, format!("{a} listed twice")));
                    }
                    if location.get(a) == Some(&room) {
                        return Err(err(index, format!("{a} is already in {room}")));
                    }
                }
                for a in agents {
                    location.insert(a, room);
                }
            }
            EventKind::Exit { agent, room } => {
                require(&location, index, agent, room)?;
                location.remove(agent);
            }
            EventKind::Move { agent, room, .. } | EventKind::NoOp { agent, room } => {
                require(&location, index, agent, room)?;
            }
            EventKind::PrivateClaim {
                speaker, listener, ..
            } if speaker == listener => {
                return Err(err(index, format!("{speaker} tells themselves")));
            }
            _ => {}
        }
        for (k, w) in ev.secret_witnesses.iter().enumerate() {
            if ev.secret_witnesses[..k].contains(w) {
                return Err(err(index, format!("secret witness {w} listed twice")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phrasing {
    /// "Where does A think B thinks the O is?"
    #[default]
    ThinkChain,
    /// "Where does A think that B searches for the O?"
    Search,
}

/// A k-th order belief question; k is the chain length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BeliefQuery {
    pub chain: Vec<AgentId>,
    pub object: ObjectId,
    pub phrasing: Phrasing,
}

impl BeliefQuery {
    /// Order-0 questions always use the think-chain phrasing.
    pub fn new(
        chain: Vec<AgentId>,
        object: ObjectId,
        phrasing: Phrasing,
    ) -> Result<Self, StoryError> {
        if chain.len() > MAX_ORDER {
            return Err(StoryError::OrderTooHigh(chain.len()));
        }
        let phrasing = if chain.is_empty() {
            Phrasing::ThinkChain
        } else {
            phrasing
        };
        Ok(BeliefQuery {
            chain,
            object,
            phrasing,
        })
    }

    pub fn reality(object: ObjectId) -> Self {
        BeliefQuery {
            chain: Vec::new(),
            object,
            phrasing: Phrasing::ThinkChain,
        }
    }

    pub fn order(&self) -> usize {
        self.chain.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> AgentId {
        s.parse().unwrap()
    }
    fn r(s: &str) -> RoomId {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_bad_identifiers() {
        assert!(AgentId::new("").is_err());
        assert!(RoomId::new("waiting room").is_err());
        assert!(ContainerId::new("blue_pantry").is_ok());
        assert_eq!(
            RoomId::from_surface("back room of the thrift store")
                .unwrap()
                .as_str(),
            "back_room_of_the_thrift_store"
        );
    }

    #[test]
    fn double_exit_is_rejected() {
        let events = vec![
            Event::new(EventKind::Enter {
                agents: vec![a("A")],
                room: r("hall"),
            }),
            Event::new(EventKind::Exit {
                agent: a("A"),
                room: r("hall"),
            }),
            Event::new(EventKind::Exit {
                agent: a("A"),
                room: r("hall"),
            }),
        ];
        assert!(matches!(
            Story::new("s", SurfaceStyle::Templated, events),
            Err(StoryError::InconsistentPresence { index: 2, .. })
        ));
    }

    #[test]
    fn entering_another_room_moves_the_agent() {
        let events = vec![
            Event::new(EventKind::Enter {
                agents: vec![a("A")],
                room: r("hall"),
            }),
            Event::new(EventKind::Enter {
                agents: vec![a("A")],
                room: r("study"),
            }),
            Event::new(EventKind::NoOp {
                agent: a("A"),
                room: r("hall"),
            }),
        ];
        assert!(Story::new("s", SurfaceStyle::Templated, events).is_err());
    }

    #[test]
    fn order_zero_query_normalizes_phrasing() {
        let q = BeliefQuery::new(vec![], "jeans".parse().unwrap(), Phrasing::Search).unwrap();
        assert_eq!(q.phrasing, Phrasing::ThinkChain);
        let too_deep = vec![a("A"); 5];
        assert!(BeliefQuery::new(too_deep, "jeans".parse().unwrap(), Phrasing::ThinkChain).is_err());
    }

    #[test]
    fn event_serde_shape() {
        let ev = Event::new(EventKind::Distractor {
            agent: a("Avery"),
            kind: DistractorKind::Lost(Pronoun::His),
            subject: "watch".into(),
        });
        let json = serde_json::to_string(&ev).unwrap();
        let back: Event = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ev);
    }
}
