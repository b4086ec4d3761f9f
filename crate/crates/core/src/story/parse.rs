//! Inverse of the sentence templates in `render`.
//!
//! Grammar (one sentence per line, `AG` = agent token, `T` = token that may
//! contain spaces in structured stories):
//!
//! ```text
//! AG[, AG]* and AG entered the T.
//! AG exited the T.
//! The T is in the T.
//! AG moved the T to the T.
//! AG moved the T to the T, which is also located in the T.
//! AG made no movements and stayed in the T for 1 minute.
//! AG privately told AG that the T is in the T now.
//! AG publicly claimed that the T is in the T now.
//! AG likes|loves|dislikes the T.
//! AG lost his|her|their T.
//! AG saw a T.
//! While this action was happening, AG witnessed this action in secret (and only this action).
//! ```

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;

use super::{
    AgentId, BeliefQuery, ContainerId, DistractorKind, Event, EventKind, ObjectId, Phrasing,
    Pronoun, RoomId, Story, StoryError, SurfaceStyle, MAX_ORDER,
};

const AG: &str = "[A-Za-z0-9_]+";
const TOK: &str = "[A-Za-z0-9_]+(?: [A-Za-z0-9_]+)*";

fn re(pattern: &str) -> Regex {
    Regex::new(&pattern.replace("AG", AG).replace("TOK", TOK)).expect("static pattern")
}

static ENTER: LazyLock<Regex> =
    LazyLock::new(|| re(r"^(AG(?:(?:, AG)* and AG)?) entered the (TOK)$"));
static EXIT: LazyLock<Regex> = LazyLock::new(|| re(r"^(AG) exited the (TOK)$"));
static DECLARE: LazyLock<Regex> = LazyLock::new(|| re(r"^The (TOK) is in the (TOK)$"));
static MOVE_LONG: LazyLock<Regex> = LazyLock::new(|| {
    re(r"^(AG) moved the (TOK) to the (TOK), which is also located in the (TOK)$")
});
static MOVE: LazyLock<Regex> = LazyLock::new(|| re(r"^(AG) moved the (TOK) to the (TOK)$"));
static NOOP: LazyLock<Regex> =
    LazyLock::new(|| re(r"^(AG) made no movements and stayed in the (TOK) for 1 minute$"));
static PRIVATE: LazyLock<Regex> =
    LazyLock::new(|| re(r"^(AG) privately told (AG) that the (TOK) is in the (TOK) now$"));
static PUBLIC: LazyLock<Regex> =
    LazyLock::new(|| re(r"^(AG) publicly claimed that the (TOK) is in the (TOK) now$"));
static OPINION: LazyLock<Regex> =
    LazyLock::new(|| re(r"^(AG) (likes|loves|dislikes) the (TOK)$"));
static LOST: LazyLock<Regex> = LazyLock::new(|| re(r"^(AG) lost (his|her|their) (TOK)$"));
static SAW: LazyLock<Regex> = LazyLock::new(|| re(r"^(AG) saw a (TOK)$"));
static WITNESS: LazyLock<Regex> = LazyLock::new(|| {
    re(r"^While this action was happening, (AG) witnessed this action in secret \(and only this action\)$")
});

#[derive(Debug)]
enum Raw<'a> {
    Enter(Vec<&'a str>, &'a str),
    Exit(&'a str, &'a str),
    Declare(&'a str, &'a str),
    Move {
        agent: &'a str,
        object: &'a str,
        to: &'a str,
        room: Option<&'a str>,
    },
    NoOp(&'a str, &'a str),
    Private(&'a str, &'a str, &'a str, &'a str),
    Public(&'a str, &'a str, &'a str),
    Distractor(&'a str, DistractorKind, &'a str),
    Witness(&'a str),
}

impl<'a> Raw<'a> {
    fn tokens(&self) -> Vec<&'a str> {
        match self {
            Raw::Enter(agents, room) => {
                let mut v = agents.clone();
                v.push(room);
                v
            }
            Raw::Exit(a, b) | Raw::Declare(a, b) | Raw::NoOp(a, b) => vec![a, b],
            Raw::Move {
                agent,
                object,
                to,
                room,
            } => {
                let mut v = vec![*agent, *object, *to];
                v.extend(room.iter().copied());
                v
            }
            Raw::Private(a, b, c, d) => vec![a, b, c, d],
            Raw::Public(a, b, c) => vec![a, b, c],
            Raw::Distractor(a, _, s) => vec![a, s],
            Raw::Witness(a) => vec![a],
        }
    }

    fn is_structured_form(&self) -> bool {
        matches!(self, Raw::Move { room: Some(_), .. } | Raw::Witness(_))
    }
}

fn match_sentence(s: &str) -> Option<Raw<'_>> {
    let cap = |re: &Regex| re.captures(s);
    let g = |c: &regex::Captures<'_>, i: usize| -> &str {
        let m = c.get(i).expect("group");
        &s[m.start()..m.end()]
    };
    if let Some(c) = cap(&WITNESS) {
        return Some(Raw::Witness(g(&c, 1)));
    }
    if let Some(c) = cap(&ENTER) {
        let list = g(&c, 1);
        let agents = match list.rsplit_once(" and ") {
            Some((init, last)) => {
                let mut v: Vec<&str> = init.split(", ").collect();
                v.push(last);
                v
            }
            None => vec![list],
        };
        return Some(Raw::Enter(agents, g(&c, 2)));
    }
    if let Some(c) = cap(&EXIT) {
        return Some(Raw::Exit(g(&c, 1), g(&c, 2)));
    }
    if let Some(c) = cap(&DECLARE) {
        return Some(Raw::Declare(g(&c, 1), g(&c, 2)));
    }
    if let Some(c) = cap(&MOVE_LONG) {
        return Some(Raw::Move {
            agent: g(&c, 1),
            object: g(&c, 2),
            to: g(&c, 3),
            room: Some(g(&c, 4)),
        });
    }
    if let Some(c) = cap(&MOVE) {
        return Some(Raw::Move {
            agent: g(&c, 1),
            object: g(&c, 2),
            to: g(&c, 3),
            room: None,
        });
    }
    if let Some(c) = cap(&NOOP) {
        return Some(Raw::NoOp(g(&c, 1), g(&c, 2)));
    }
    if let Some(c) = cap(&PRIVATE) {
        return Some(Raw::Private(g(&c, 1), g(&c, 2), g(&c, 3), g(&c, 4)));
    }
    if let Some(c) = cap(&PUBLIC) {
        return Some(Raw::Public(g(&c, 1), g(&c, 2), g(&c, 3)));
    }
    if let Some(c) = cap(&OPINION) {
        let kind = match g(&c, 2) {
            "likes" => DistractorKind::Likes,
            "loves" => DistractorKind::Loves,
            _ => DistractorKind::Dislikes,
        };
        return Some(Raw::Distractor(g(&c, 1), kind, g(&c, 3)));
    }
    if let Some(c) = cap(&LOST) {
        let p = match g(&c, 2) {
            "his" => Pronoun::His,
            "her" => Pronoun::Her,
            _ => Pronoun::Their,
        };
        return Some(Raw::Distractor(g(&c, 1), DistractorKind::Lost(p), g(&c, 3)));
    }
    if let Some(c) = cap(&SAW) {
        return Some(Raw::Distractor(g(&c, 1), DistractorKind::Saw, g(&c, 2)));
    }
    None
}

/// Splits period-terminated text into trimmed sentences (without the period).
fn sentences(text: &str) -> Result<Vec<&str>, StoryError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let mut parts: Vec<&str> = text.split('.').map(str::trim).collect();
    let tail = parts.pop().unwrap_or_default();
    if !tail.is_empty() {
        return Err(StoryError::UnknownSentence {
            index: parts.len(),
            text: tail.to_string(),
        });
    }
    Ok(parts)
}

/// Parses templated story text back into a [`Story`] with an empty id.
pub fn parse_story(text: &str) -> Result<Story, StoryError> {
    let sents = sentences(text)?;
    let mut raws = Vec::with_capacity(sents.len());
    for (index, s) in sents.iter().enumerate() {
        match match_sentence(s) {
            Some(r) => raws.push(r),
            None => {
                return Err(StoryError::UnknownSentence {
                    index,
                    text: format!("{s}."),
                })
            }
        }
    }

    let structured = raws
        .iter()
        .any(|r| r.is_structured_form() || r.tokens().iter().any(|t| t.contains(' ')));
    let style = if structured {
        SurfaceStyle::Structured
    } else {
        SurfaceStyle::Templated
    };
    if structured {
        for (index, r) in raws.iter().enumerate() {
            let short_move = matches!(r, Raw::Move { room: None, .. });
            if short_move || r.tokens().iter().any(|t| t.contains('_')) {
                return Err(StoryError::MixedSurfaceStyle { index });
            }
        }
    }

    let mut events: Vec<Event> = Vec::new();
    let mut location: HashMap<AgentId, RoomId> = HashMap::new();
    let mut last_enter_room: Option<RoomId> = None;
    let presence_err = |index: usize, reason: String| StoryError::InconsistentPresence { index, reason };

    for (index, raw) in raws.into_iter().enumerate() {
        let kind = match raw {
            Raw::Witness(w) => {
                let w = AgentId::from_surface(w)?;
                match events.last_mut() {
                    Some(ev) => ev.secret_witnesses.push(w),
                    None => return Err(StoryError::DanglingWitness { index }),
                }
                continue;
            }
            Raw::Enter(names, room) => {
                let room = RoomId::from_surface(room)?;
                let agents = names
                    .iter()
                    .map(|n| AgentId::from_surface(n))
                    .collect::<Result<Vec<_>, _>>()?;
                for a in &agents {
                    location.insert(a.clone(), room.clone());
                }
                last_enter_room = Some(room.clone());
                EventKind::Enter { agents, room }
            }
            Raw::Exit(agent, room) => {
                let agent = AgentId::from_surface(agent)?;
                location.remove(&agent);
                EventKind::Exit {
                    agent,
                    room: RoomId::from_surface(room)?,
                }
            }
            Raw::Declare(object, container) => {
                let room = last_enter_room.clone().ok_or_else(|| {
                    presence_err(index, "declaration before anyone entered a room".into())
                })?;
                EventKind::Declare {
                    object: ObjectId::from_surface(object)?,
                    container: ContainerId::from_surface(container)?,
                    room,
                }
            }
            Raw::Move {
                agent,
                object,
                to,
                room,
            } => {
                let agent = AgentId::from_surface(agent)?;
                let room = match room {
                    Some(r) => RoomId::from_surface(r)?,
                    None => location
                        .get(&agent)
                        .cloned()
                        .ok_or_else(|| presence_err(index, format!("{agent} is not in any room")))?,
                };
                EventKind::Move {
                    agent,
                    object: ObjectId::from_surface(object)?,
                    to: ContainerId::from_surface(to)?,
                    room,
                }
            }
            Raw::NoOp(agent, room) => EventKind::NoOp {
                agent: AgentId::from_surface(agent)?,
                room: RoomId::from_surface(room)?,
            },
            Raw::Private(s, l, o, c) => EventKind::PrivateClaim {
                speaker: AgentId::from_surface(s)?,
                listener: AgentId::from_surface(l)?,
                object: ObjectId::from_surface(o)?,
                container: ContainerId::from_surface(c)?,
            },
            Raw::Public(s, o, c) => EventKind::PublicClaim {
                speaker: AgentId::from_surface(s)?,
                object: ObjectId::from_surface(o)?,
                container: ContainerId::from_surface(c)?,
            },
            Raw::Distractor(agent, kind, subject) => {
                let subject = subject.replace(' ', "_");
                EventKind::Distractor {
                    agent: AgentId::from_surface(agent)?,
                    kind,
                    subject,
                }
            }
        };
        events.push(Event::new(kind));
    }
    Story::new(String::new(), style, events)
}

fn object_token(s: &str) -> Result<ObjectId, StoryError> {
    ObjectId::from_surface(s).map_err(|_| StoryError::UnknownQuestionForm(s.to_string()))
}

fn agent_token(s: &str, q: &str) -> Result<AgentId, StoryError> {
    if s.contains(' ') {
        return Err(StoryError::UnknownQuestionForm(q.to_string()));
    }
    AgentId::new(s).map_err(|_| StoryError::UnknownQuestionForm(q.to_string()))
}

/// Parses the three question phrasings; an optional "that" after each
/// "think"/"thinks" is accepted.
pub fn parse_question(text: &str) -> Result<BeliefQuery, StoryError> {
    let q = text.trim();
    let unknown = || StoryError::UnknownQuestionForm(q.to_string());
    let body = q.strip_suffix('?').ok_or_else(unknown)?;

    if let Some(obj) = body
        .strip_prefix("Where is the ")
        .and_then(|b| b.strip_suffix(" really"))
    {
        return Ok(BeliefQuery::reality(object_token(obj)?));
    }
    if let Some(rest) = body.strip_prefix("In which container will ") {
        let (agent, obj) = rest.split_once(" search for the ").ok_or_else(unknown)?;
        return BeliefQuery::new(vec![agent_token(agent, q)?], object_token(obj)?, Phrasing::Search);
    }
    let rest = body.strip_prefix("Where does ").ok_or_else(unknown)?;
    let (first, mut rest) = rest.split_once(' ').ok_or_else(unknown)?;
    let mut chain = vec![agent_token(first, q)?];

    if let Some(obj) = rest.strip_prefix("search for the ") {
        return BeliefQuery::new(chain, object_token(obj)?, Phrasing::Search);
    }
    rest = rest.strip_prefix("think ").ok_or_else(unknown)?;
    loop {
        rest = rest.strip_prefix("that ").unwrap_or(rest);
        if let Some(obj) = rest.strip_prefix("the ").and_then(|r| r.strip_suffix(" is")) {
            return finish(chain, object_token(obj)?, Phrasing::ThinkChain);
        }
        let (agent, after) = rest.split_once(' ').ok_or_else(unknown)?;
        chain.push(agent_token(agent, q)?);
        if let Some(obj) = after.strip_prefix("searches for the ") {
            return finish(chain, object_token(obj)?, Phrasing::Search);
        }
        rest = after.strip_prefix("thinks ").ok_or_else(unknown)?;
    }
}

fn finish(chain: Vec<AgentId>, object: ObjectId, phrasing: Phrasing) -> Result<BeliefQuery, StoryError> {
    if chain.len() > MAX_ORDER {
        return Err(StoryError::OrderTooHigh(chain.len()));
    }
    BeliefQuery::new(chain, object, phrasing)
}
