//! Ground-truth answers for k-th order belief questions.
//!
//! Witnessing follows room co-presence: an event in a room is seen by every
//! agent present there (plus secret witnesses), a private claim only by its
//! speaker and listener, and a public claim by every agent in the story. A
//! nested view for a chain `[A1, .., Ak]` is the set of events witnessed by
//! all of `A1..Ak`; the answer is the belief of `Ak` replayed over that view.
//!
//! [`brute_force`] holds an independent implementation used for
//! cross-validation.

pub mod brute_force;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::story::{AgentId, BeliefQuery, ContainerId, Event, EventKind, ObjectId, RoomId, Story};

pub use brute_force::brute_force_answer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("no declaration or move places {0} anywhere in the story")]
    NoLocationEvidence(ObjectId),
    #[error("a nested view needs at least one agent")]
    EmptyChain,
}

/// Room occupancy immediately before each event.
#[derive(Debug, Clone)]
pub struct PresenceTimeline {
    before: Vec<HashMap<RoomId, BTreeSet<AgentId>>>,
}

impl PresenceTimeline {
    pub fn build(story: &Story) -> Self {
        let mut rooms: HashMap<RoomId, BTreeSet<AgentId>> = HashMap::new();
        let mut before = Vec::with_capacity(story.events.len());
        for ev in &story.events {
            before.push(rooms.clone());
            match &ev.kind {
                EventKind::Enter { agents, room } => {
                    for a in agents {
                        for occupants in rooms.values_mut() {
                            occupants.remove(a);
                        }
                        rooms.entry(room.clone()).or_default().insert(a.clone());
                    }
                }
                EventKind::Exit { agent, room } => {
                    if let Some(occupants) = rooms.get_mut(room) {
                        occupants.remove(agent);
                    }
                }
                _ => {}
            }
        }
        PresenceTimeline { before }
    }

    /// Agents in `room` just before event `index`.
    pub fn present(&self, index: usize, room: &RoomId) -> BTreeSet<AgentId> {
        self.before[index].get(room).cloned().unwrap_or_default()
    }

    pub fn room_of(&self, index: usize, agent: &AgentId) -> Option<&RoomId> {
        self.before[index]
            .iter()
            .find(|(_, occ)| occ.contains(agent))
            .map(|(r, _)| r)
    }
}

/// Per-event witness sets.
#[derive(Debug, Clone)]
pub struct WitnessSets(Vec<BTreeSet<AgentId>>);

impl WitnessSets {
    pub fn build(story: &Story) -> Self {
        let timeline = PresenceTimeline::build(story);
        let sets = story
            .events
            .iter()
            .enumerate()
            .map(|(i, ev)| {
                let mut set = match &ev.kind {
                    EventKind::Enter { agents, room } => {
                        let mut s = timeline.present(i, room);
                        s.extend(agents.iter().cloned());
                        s
                    }
                    EventKind::Exit { room, .. }
                    | EventKind::Declare { room, .. }
                    | EventKind::Move { room, .. }
                    | EventKind::NoOp { room, .. } => timeline.present(i, room),
                    EventKind::PrivateClaim {
                        speaker, listener, ..
                    } => [speaker.clone(), listener.clone()].into_iter().collect(),
                    EventKind::PublicClaim { .. } => story.agents.iter().cloned().collect(),
                    EventKind::Distractor { agent, .. } => match timeline.room_of(i, agent) {
                        Some(room) => timeline.present(i, room),
                        None => [agent.clone()].into_iter().collect(),
                    },
                };
                set.extend(ev.secret_witnesses.iter().cloned());
                set
            })
            .collect();
        WitnessSets(sets)
    }

    pub fn get(&self, index: usize) -> &BTreeSet<AgentId> {
        &self.0[index]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_agent(story: &Story, agent: &AgentId) -> Result<(), OracleError> {
    if story.has_agent(agent) {
        Ok(())
    } else {
        Err(OracleError::UnknownAgent(agent.clone()))
    }
}

pub fn witnessed_events(story: &Story, agent: &AgentId) -> Result<Vec<usize>, OracleError> {
    check_agent(story, agent)?;
    let w = WitnessSets::build(story);
    Ok((0..w.len()).filter(|&i| w.get(i).contains(agent)).collect())
}

/// Events that `chain[0]` knows every later chain agent also witnessed.
pub fn nested_view(story: &Story, chain: &[AgentId]) -> Result<Vec<usize>, OracleError> {
    let w = WitnessSets::build(story);
    nested_view_with(story, &w, chain)
}

fn nested_view_with(
    story: &Story,
    w: &WitnessSets,
    chain: &[AgentId],
) -> Result<Vec<usize>, OracleError> {
    let (first, rest) = chain.split_first().ok_or(OracleError::EmptyChain)?;
    check_agent(story, first)?;
    let mut view: Vec<usize> = (0..w.len()).filter(|&i| w.get(i).contains(first)).collect();
    for agent in rest {
        check_agent(story, agent)?;
        view.retain(|&i| w.get(i).contains(agent));
    }
    Ok(view)
}

/// Whether `truster` accepts testimony from `speaker` at event `at`: the
/// speaker left the current chapter's room later, or has not left at all.
pub fn trusts(story: &Story, truster: &AgentId, speaker: &AgentId, at: usize) -> bool {
    let start = story.chapter_start(at);
    let last_exit = |who: &AgentId| {
        story.events[start..at]
            .iter()
            .rposition(|e| matches!(&e.kind, EventKind::Exit { agent, .. } if agent == who))
    };
    match (last_exit(truster), last_exit(speaker)) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(t), Some(s)) => s > t,
    }
}

fn check_object(story: &Story, object: &ObjectId) -> Result<(), OracleError> {
    if !story.has_object(object) {
        return Err(OracleError::UnknownObject(object.clone()));
    }
    if !story
        .events
        .iter()
        .any(|e| matches!(e.placement(), Some((o, _)) if o == object))
    {
        return Err(OracleError::NoLocationEvidence(object.clone()));
    }
    Ok(())
}

/// Initial common knowledge: the first declaration, else the first move.
fn fallback_location(story: &Story, object: &ObjectId) -> Option<ContainerId> {
    let declared = story.events.iter().find_map(|e| match &e.kind {
        EventKind::Declare {
            object: o,
            container,
            ..
        } if o == object => Some(container.clone()),
        _ => None,
    });
    declared.or_else(|| {
        story
            .events
            .iter()
            .find_map(|e| e.placement().filter(|(o, _)| *o == object).map(|(_, c)| c.clone()))
    })
}

pub fn true_location(story: &Story, object: &ObjectId) -> Result<ContainerId, OracleError> {
    check_object(story, object)?;
    story
        .events
        .iter()
        .rev()
        .find_map(|e| e.placement().filter(|(o, _)| *o == object).map(|(_, c)| c.clone()))
        .ok_or_else(|| OracleError::NoLocationEvidence(object.clone()))
}

/// Answers a belief query; search phrasing is answered like the think chain.
pub fn answer_query(story: &Story, q: &BeliefQuery) -> Result<ContainerId, OracleError> {
    check_object(story, &q.object)?;
    let Some(believer) = q.chain.last() else {
        return true_location(story, &q.object);
    };
    let w = WitnessSets::build(story);
    let view = nested_view_with(story, &w, &q.chain)?;
    let mut belief: Option<ContainerId> = None;
    for i in view {
        let ev: &Event = &story.events[i];
        match &ev.kind {
            EventKind::Declare {
                object, container, ..
            } if *object == q.object => belief = Some(container.clone()),
            EventKind::Move { object, to, .. } if *object == q.object => belief = Some(to.clone()),
            EventKind::PrivateClaim {
                speaker,
                listener,
                object,
                container,
            } if *object == q.object
                && listener == believer
                && speaker != believer
                && trusts(story, believer, speaker, i) =>
            {
                belief = Some(container.clone())
            }
            EventKind::PublicClaim {
                speaker,
                object,
                container,
            } if *object == q.object && speaker != believer && trusts(story, believer, speaker, i) => {
                belief = Some(container.clone())
            }
            _ => {}
        }
    }
    belief
        .or_else(|| fallback_location(story, &q.object))
        .ok_or_else(|| OracleError::NoLocationEvidence(q.object.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::story::{Phrasing, SurfaceStyle};

    fn a(s: &str) -> AgentId {
        s.parse().unwrap()
    }
    fn enter(agents: &[&str], room: &str) -> Event {
        Event::new(EventKind::Enter {
            agents: agents.iter().map(|s| a(s)).collect(),
            room: room.parse().unwrap(),
        })
    }
    fn exit(agent: &str) -> Event {
        Event::new(EventKind::Exit {
            agent: a(agent),
            room: "room".parse().unwrap(),
        })
    }
    fn declare(c: &str) -> Event {
        Event::new(EventKind::Declare {
            object: "o".parse().unwrap(),
            container: c.parse().unwrap(),
            room: "room".parse().unwrap(),
        })
    }
    fn mv(agent: &str, c: &str) -> Event {
        Event::new(EventKind::Move {
            agent: a(agent),
            object: "o".parse().unwrap(),
            to: c.parse().unwrap(),
            room: "room".parse().unwrap(),
        })
    }
    fn story(events: Vec<Event>) -> Story {
        Story::new("t", SurfaceStyle::Templated, events).unwrap()
    }
    fn ask(s: &Story, chain: &[&str]) -> String {
        let q = BeliefQuery::new(
            chain.iter().map(|x| a(x)).collect(),
            "o".parse().unwrap(),
            Phrasing::ThinkChain,
        )
        .unwrap();
        answer_query(s, &q).unwrap().to_string()
    }

    #[test]
    fn absent_agent_misses_the_move() {
        let s = story(vec![enter(&["A", "B"], "room"), exit("A"), mv("B", "c2")]);
        assert_eq!(witnessed_events(&s, &a("A")).unwrap(), vec![0, 1]);
        assert!(matches!(
            witnessed_events(&s, &a("Z")),
            Err(OracleError::UnknownAgent(_))
        ));
    }

    #[test]
    fn private_claim_is_heard_only_by_the_pair() {
        let s = story(vec![
            enter(&["A", "B", "C"], "room"),
            Event::new(EventKind::PrivateClaim {
                speaker: a("A"),
                listener: a("B"),
                object: "o".parse().unwrap(),
                container: "c".parse().unwrap(),
            }),
        ]);
        assert_eq!(witnessed_events(&s, &a("B")).unwrap(), vec![0, 1]);
        assert_eq!(witnessed_events(&s, &a("C")).unwrap(), vec![0]);
    }

    #[test]
    fn secret_witness_sees_the_move() {
        let s = story(vec![
            enter(&["A"], "room"),
            mv("A", "c1").with_secret_witness(a("L")),
        ]);
        assert_eq!(witnessed_events(&s, &a("L")).unwrap(), vec![1]);
    }

    #[test]
    fn nested_view_base_and_idempotence() {
        let s = story(vec![enter(&["A", "B"], "room"), exit("A"), mv("B", "c2")]);
        assert_eq!(
            nested_view(&s, &[a("A")]).unwrap(),
            witnessed_events(&s, &a("A")).unwrap()
        );
        assert_eq!(
            nested_view(&s, &[a("A"), a("A")]).unwrap(),
            nested_view(&s, &[a("A")]).unwrap()
        );
        assert_eq!(nested_view(&s, &[]), Err(OracleError::EmptyChain));
    }

    #[test]
    fn second_order_view_drops_events_the_inner_agent_missed() {
        // Hand simulation: B leaves at 3, C moves at 4 in front of A.
        // A sees {0,1,2,3,4,5}; B sees {0,1,2,3}; A∩B = {0,1,2,3}.
        let s = story(vec![
            enter(&["A", "B", "C"], "room"),
            declare("c1"),
            mv("A", "c2"),
            exit("B"),
            mv("C", "c3"),
            exit("C"),
        ]);
        assert_eq!(nested_view(&s, &[a("A")]).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(nested_view(&s, &[a("A"), a("B")]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(ask(&s, &["A"]), "c3");
        assert_eq!(ask(&s, &["A", "B"]), "c2");
    }

    #[test]
    fn four_event_story_answers() {
        let s = story(vec![
            enter(&["A", "B"], "room"),
            declare("c1"),
            exit("A"),
            mv("B", "c2"),
        ]);
        assert_eq!(ask(&s, &[]), "c2");
        assert_eq!(ask(&s, &["A"]), "c1");
        assert_eq!(ask(&s, &["B"]), "c2");
        assert_eq!(ask(&s, &["B", "A"]), "c1");
    }

    #[test]
    fn trust_follows_exit_order() {
        let s = story(vec![
            enter(&["A", "B"], "room"),
            declare("c1"),
            exit("A"),
            exit("B"),
            enter(&["A", "B"], "waiting"),
        ]);
        assert!(trusts(&s, &a("A"), &a("B"), 4));
        assert!(!trusts(&s, &a("B"), &a("A"), 4));
        // Nobody has left yet: trust.
        assert!(trusts(&s, &a("A"), &a("B"), 2));
    }

    #[test]
    fn claims_respect_trust_and_never_move_the_speaker() {
        let claim = |s: &str, l: &str, c: &str| {
            Event::new(EventKind::PrivateClaim {
                speaker: a(s),
                listener: a(l),
                object: "o".parse().unwrap(),
                container: c.parse().unwrap(),
            })
        };
        let s = story(vec![
            enter(&["A", "B"], "room"),
            declare("c1"),
            exit("A"),
            exit("B"),
            enter(&["A", "B"], "waiting"),
            claim("B", "A", "lie"),
            claim("A", "B", "other"),
        ]);
        // A trusts B (B left later); B distrusts A.
        assert_eq!(ask(&s, &["A"]), "lie");
        assert_eq!(ask(&s, &["B"]), "c1");
        assert_eq!(ask(&s, &[]), "c1");
    }

    #[test]
    fn missing_object_errors() {
        let s = story(vec![enter(&["A"], "room")]);
        let q = BeliefQuery::reality("o".parse().unwrap());
        assert_eq!(
            answer_query(&s, &q),
            Err(OracleError::UnknownObject("o".parse().unwrap()))
        );
        let s = story(vec![
            enter(&["A", "B"], "room"),
            Event::new(EventKind::PublicClaim {
                speaker: a("A"),
                object: "o".parse().unwrap(),
                container: "c".parse().unwrap(),
            }),
        ]);
        assert_eq!(
            answer_query(&s, &q),
            Err(OracleError::NoLocationEvidence("o".parse().unwrap()))
        );
    }
}
