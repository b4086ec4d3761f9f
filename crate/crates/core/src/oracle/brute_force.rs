//! Independent answer oracle.
//!
//! Shares no code with the filtering path in the parent module. Presence is
//! recomputed for every (event, agent) pair by scanning backwards, each
//! nesting level is materialized as an explicit sub-story, and the final
//! sub-story is replayed through a single-agent belief state machine.

use crate::story::{AgentId, BeliefQuery, ContainerId, Event, EventKind, RoomId, Story};

use super::OracleError;

/// The room `agent` occupies just before event `at`, by backward scan.
fn room_before<'a>(story: &'a Story, at: usize, agent: &AgentId) -> Option<&'a RoomId> {
    for ev in story.events[..at].iter().rev() {
        match &ev.kind {
            EventKind::Enter { agents, room } if agents.contains(agent) => return Some(room),
            EventKind::Exit { agent: who, .. } if who == agent => return None,
            _ => {}
        }
    }
    None
}

fn sees(story: &Story, at: usize, agent: &AgentId) -> bool {
    let ev = &story.events[at];
    if ev.secret_witnesses.contains(agent) {
        return true;
    }
    let here = |room: &RoomId| room_before(story, at, agent) == Some(room);
    match &ev.kind {
        EventKind::Enter { agents, room } => agents.contains(agent) || here(room),
        EventKind::Exit { room, .. }
        | EventKind::Declare { room, .. }
        | EventKind::Move { room, .. }
        | EventKind::NoOp { room, .. } => here(room),
        EventKind::PrivateClaim {
            speaker, listener, ..
        } => speaker == agent || listener == agent,
        EventKind::PublicClaim { .. } => story.agents.contains(agent),
        EventKind::Distractor { agent: actor, .. } => {
            actor == agent
                || match room_before(story, at, actor) {
                    Some(room) => here(room),
                    None => false,
                }
        }
    }
}

/// One level of nesting: the copied events that level's agent saw, tagged
/// with their index in the original story.
type SubStory = Vec<(usize, Event)>;

fn materialize_level(story: &Story, parent: &SubStory, agent: &AgentId) -> SubStory {
    parent
        .iter()
        .filter(|(i, _)| sees(story, *i, agent))
        .cloned()
        .collect()
}

fn exit_rank(story: &Story, at: usize, who: &AgentId) -> Option<usize> {
    let chapter = story
        .meta
        .chapter_boundaries
        .iter()
        .rev()
        .find(|&&b| b <= at)
        .copied()
        .unwrap_or(0);
    let exits: Vec<&AgentId> = story.events[chapter..at]
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Exit { agent, .. } => Some(agent),
            _ => None,
        })
        .collect();
    exits.iter().rposition(|a| *a == who)
}

struct SingleAgentBelief<'a> {
    story: &'a Story,
    agent: &'a AgentId,
    object: &'a crate::story::ObjectId,
    believed: Option<ContainerId>,
}

impl SingleAgentBelief<'_> {
    fn accepts_testimony(&self, speaker: &AgentId, at: usize) -> bool {
        if speaker == self.agent {
            return false;
        }
        match (exit_rank(self.story, at, speaker), exit_rank(self.story, at, self.agent)) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(s), Some(me)) => s > me,
        }
    }

    fn observe(&mut self, at: usize, ev: &Event) {
        match &ev.kind {
            EventKind::Declare {
                object, container, ..
            } if object == self.object => self.believed = Some(container.clone()),
            EventKind::Move { object, to, .. } if object == self.object => {
                self.believed = Some(to.clone())
            }
            EventKind::PrivateClaim {
                speaker,
                listener,
                object,
                container,
            } if object == self.object && listener == self.agent => {
                if self.accepts_testimony(speaker, at) {
                    self.believed = Some(container.clone());
                }
            }
            EventKind::PublicClaim {
                speaker,
                object,
                container,
            } if object == self.object
                && self.accepts_testimony(speaker, at) => {
                    self.believed = Some(container.clone());
                }
            _ => {}
        }
    }
}

/// Same contract as [`super::answer_query`], computed independently.
pub fn brute_force_answer(story: &Story, q: &BeliefQuery) -> Result<ContainerId, OracleError> {
    if !story.objects.contains(&q.object) {
        return Err(OracleError::UnknownObject(q.object.clone()));
    }

    // Physical replay for reality and for the initial-knowledge fallback.
    let mut reality: Option<ContainerId> = None;
    let mut first_declared: Option<ContainerId> = None;
    let mut first_moved: Option<ContainerId> = None;
    for ev in &story.events {
        match &ev.kind {
            EventKind::Declare {
                object, container, ..
            } if *object == q.object => {
                reality = Some(container.clone());
                first_declared.get_or_insert_with(|| container.clone());
            }
            EventKind::Move { object, to, .. } if *object == q.object => {
                reality = Some(to.clone());
                first_moved.get_or_insert_with(|| to.clone());
            }
            _ => {}
        }
    }
    let reality = reality.ok_or_else(|| OracleError::NoLocationEvidence(q.object.clone()))?;
    for a in &q.chain {
        if !story.agents.contains(a) {
            return Err(OracleError::UnknownAgent(a.clone()));
        }
    }
    let Some(believer) = q.chain.last() else {
        return Ok(reality);
    };

    let mut level: SubStory = story.events.iter().cloned().enumerate().collect();
    for agent in &q.chain {
        level = materialize_level(story, &level, agent);
    }

    let mut machine = SingleAgentBelief {
        story,
        agent: believer,
        object: &q.object,
        believed: None,
    };
    for (at, ev) in &level {
        machine.observe(*at, ev);
    }
    machine
        .believed
        .or(first_declared)
        .or(first_moved)
        .ok_or_else(|| OracleError::NoLocationEvidence(q.object.clone()))
}
