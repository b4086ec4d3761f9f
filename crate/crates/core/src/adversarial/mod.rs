//! Best-first search for stories that a target model finds hard, plus
//! narrative infilling and answer-bias auditing.
//!
//! Search credit `g` counts belief-divergence points: events after which
//! some agent's first-order belief about an object differs from where the
//! object really is. A step adds at most one point, so the remaining depth
//! bounds the credit still obtainable and `f = g + remaining depth` never
//! underestimates a node's best completion.

mod bias;
mod infill;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::runtime::Handle;

use crate::client::{ChatClient, ChatRequest};
use crate::eval::{extract_answer, format_prompt, is_correct, PromptStyle};
use crate::oracle::{answer_query, true_location};
use crate::story::{
    render_question_in, render_story, AgentId, BeliefQuery, ContainerId, Event, EventKind, ObjectId,
    Phrasing, RoomId, Story, StoryError, SurfaceStyle,
};

pub use bias::{audit_answer_bias, AnswerShare, BiasReport};
pub use infill::{infill_story, Infilled, InfillError, INFILL_INSTRUCTION};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Story(#[from] StoryError),
}

/// Vocabulary and legal actions available to the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchContext {
    pub agents: Vec<AgentId>,
    pub rooms: Vec<RoomId>,
    pub objects: Vec<ObjectId>,
    pub containers: Vec<ContainerId>,
    #[serde(default = "yes")]
    pub secret_witnessing: bool,
    #[serde(default)]
    pub style: SurfaceStyle,
}

fn yes() -> bool {
    true
}

fn ids<T: std::str::FromStr>(xs: &[&str]) -> Vec<T>
where
    T::Err: std::fmt::Debug,
{
    xs.iter().map(|s| s.parse().expect("valid id")).collect()
}

impl SearchContext {
    /// Three agents, two rooms, one object and three containers.
    pub fn three_agent() -> Self {
        SearchContext {
            agents: ids(&["Brody", "Lucas", "Evelyn"]),
            rooms: ids(&["back_room", "kitchen"]),
            objects: ids(&["vintage_typewriter"]),
            containers: ids(&["cardboard_box", "plastic_storage_bin", "wooden_crate"]),
            secret_witnessing: true,
            style: SurfaceStyle::Structured,
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        for (name, empty) in [
            ("agents", self.agents.is_empty()),
            ("rooms", self.rooms.is_empty()),
            ("objects", self.objects.is_empty()),
            ("containers", self.containers.is_empty()),
        ] {
            if empty {
                return Err(SearchError::Config(format!("no {name} in the action vocabulary")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_expansions: usize,
    pub max_depth: usize,
    /// Frontier size cap; lowest-priority nodes are dropped beyond it.
    pub beam: usize,
    pub min_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_expansions: 5000,
            max_depth: 8,
            beam: 64,
            min_depth: 1,
        }
    }
}

/// Estimated probability that the target answers all questions correctly.
pub trait DifficultyScorer {
    fn score(&self, story: &Story, questions: &[BeliefQuery]) -> f64;
}

/// Scores `1 - min(1, divergence_points / 3)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticScorer;

impl DifficultyScorer for SyntheticScorer {
    fn score(&self, story: &Story, _questions: &[BeliefQuery]) -> f64 {
        1.0 - (divergence_points(story) as f64 / 3.0).min(1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl DifficultyScorer for ConstantScorer {
    fn score(&self, _story: &Story, _questions: &[BeliefQuery]) -> f64 {
        self.0
    }
}

/// Fraction of questions a chat model answers correctly. Blocks on `handle`,
/// so it must run outside an async context (e.g. in `spawn_blocking`).
pub struct ModelScorer<C> {
    pub client: C,
    pub handle: Handle,
    pub model: String,
    pub style: PromptStyle,
}

impl<C: ChatClient> DifficultyScorer for ModelScorer<C> {
    fn score(&self, story: &Story, questions: &[BeliefQuery]) -> f64 {
        if questions.is_empty() {
            return 1.0;
        }
        let text = render_story(story);
        let correct = self.handle.block_on(async {
            let mut correct = 0usize;
            for q in questions {
                let Ok(truth) = answer_query(story, q) else { continue };
                let request = ChatRequest::new(
                    self.model.clone(),
                    format_prompt(&text, &render_question_in(q, story.style), self.style),
                );
                if let Ok(resp) = self.client.chat(&request).await {
                    let got = extract_answer(&resp.content, self.style).answer;
                    correct += usize::from(is_correct(&got, &truth.surface(story.style)));
                }
            }
            correct
        });
        correct as f64 / questions.len() as f64
    }
}

/// Reality, first-order and second-order questions for every placed object.
pub fn question_set(story: &Story) -> Vec<BeliefQuery> {
    let mut out = Vec::new();
    for object in &story.objects {
        if true_location(story, object).is_err() {
            continue;
        }
        out.push(BeliefQuery::reality(object.clone()));
        for a in &story.agents {
            out.push(BeliefQuery {
                chain: vec![a.clone()],
                object: object.clone(),
                phrasing: Phrasing::ThinkChain,
            });
        }
        for a in &story.agents {
            for b in story.agents.iter().filter(|b| *b != a) {
                out.push(BeliefQuery {
                    chain: vec![a.clone(), b.clone()],
                    object: object.clone(),
                    phrasing: Phrasing::ThinkChain,
                });
            }
        }
    }
    out
}

/// Whether some agent's first-order belief about some object differs from
/// reality at the end of `story`.
pub fn diverges_at_end(story: &Story) -> bool {
    story.objects.iter().any(|object| {
        let Ok(truth) = true_location(story, object) else {
            return false;
        };
        story.agents.iter().any(|a| {
            let q = BeliefQuery {
                chain: vec![a.clone()],
                object: object.clone(),
                phrasing: Phrasing::ThinkChain,
            };
            answer_query(story, &q).is_ok_and(|b| b != truth)
        })
    })
}

/// Number of events after which some first-order belief diverges.
pub fn divergence_points(story: &Story) -> usize {
    (1..=story.events.len())
        .filter(|&n| {
            Story::new("prefix", story.style, story.events[..n].to_vec())
                .map(|p| diverges_at_end(&p))
                .unwrap_or(false)
        })
        .count()
}

#[derive(Debug, Clone)]
struct Node {
    events: Vec<Event>,
    g: usize,
    f: usize,
}

impl Node {
    fn depth(&self) -> usize {
        self.events.len()
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Max-heap priority: higher f, then deeper, then higher g, then the
/// lexicographically smaller event list.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f
            .cmp(&other.f)
            .then(self.depth().cmp(&other.depth()))
            .then(self.g.cmp(&other.g))
            .then_with(|| other.events.cmp(&self.events))
    }
}

fn current_rooms(ctx: &SearchContext, events: &[Event]) -> Vec<Option<RoomId>> {
    ctx.agents
        .iter()
        .map(|a| {
            events.iter().rev().find_map(|e| match &e.kind {
                EventKind::Enter { agents, room } if agents.contains(a) => Some(Some(room.clone())),
                EventKind::Exit { agent, .. } if agent == a => Some(None),
                _ => None,
            })?
        })
        .collect()
}

fn location(events: &[Event], object: &ObjectId) -> Option<ContainerId> {
    events
        .iter()
        .rev()
        .find_map(|e| e.placement().filter(|(o, _)| *o == object).map(|(_, c)| c.clone()))
}

/// Legal single-step extensions in a fixed, deterministic order.
fn legal_actions(ctx: &SearchContext, events: &[Event]) -> Vec<Event> {
    let rooms_now = current_rooms(ctx, events);
    let last_entered = events.iter().rev().find_map(|e| match &e.kind {
        EventKind::Enter { room, .. } => Some(room.clone()),
        _ => None,
    });
    let mut out = Vec::new();
    for (i, agent) in ctx.agents.iter().enumerate() {
        for room in &ctx.rooms {
            if rooms_now[i].as_ref() != Some(room) {
                out.push(Event::new(EventKind::Enter {
                    agents: vec![agent.clone()],
                    room: room.clone(),
                }));
            }
        }
        if let Some(room) = &rooms_now[i] {
            out.push(Event::new(EventKind::Exit {
                agent: agent.clone(),
                room: room.clone(),
            }));
        }
    }
    if let Some(room) = last_entered {
        for object in &ctx.objects {
            if location(events, object).is_none() {
                for c in &ctx.containers {
                    out.push(Event::new(EventKind::Declare {
                        object: object.clone(),
                        container: c.clone(),
                        room: room.clone(),
                    }));
                }
            }
        }
    }
    for (i, agent) in ctx.agents.iter().enumerate() {
        let Some(room) = &rooms_now[i] else { continue };
        for object in &ctx.objects {
            let here = location(events, object);
            for c in ctx.containers.iter().filter(|c| Some(*c) != here.as_ref()) {
                let mv = Event::new(EventKind::Move {
                    agent: agent.clone(),
                    object: object.clone(),
                    to: c.clone(),
                    room: room.clone(),
                });
                if ctx.secret_witnessing {
                    for (j, w) in ctx.agents.iter().enumerate() {
                        if j != i && rooms_now[j].as_ref() != Some(room) {
                            out.push(mv.clone().with_secret_witness(w.clone()));
                        }
                    }
                }
                out.push(mv);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub story: Story,
    pub score: f64,
    pub divergence_points: usize,
    pub expansions: usize,
    /// The budget or frontier ran out before a score of 0 was reached.
    pub exhausted: bool,
    pub questions: Vec<BeliefQuery>,
}

struct Best {
    events: Vec<Event>,
    score: f64,
    g: usize,
}

impl Best {
    fn beaten_by(&self, events: &[Event], score: f64, g: usize) -> bool {
        score
            .total_cmp(&self.score)
            .then(self.g.cmp(&g))
            .then_with(|| events.cmp(&self.events))
            == Ordering::Less
    }
}

/// Best-first search returning the terminal story with the lowest scorer
/// output (ties: higher `g`, then lexicographically smaller events).
pub fn astar_search(
    ctx: &SearchContext,
    scorer: &dyn DifficultyScorer,
    budget: Budget,
) -> Result<SearchResult, SearchError> {
    ctx.validate()?;
    if budget.max_depth == 0 || budget.beam == 0 {
        return Err(SearchError::Config("max_depth and beam must be positive".into()));
    }
    let min_depth = budget.min_depth.clamp(1, budget.max_depth);

    let mut frontier = BinaryHeap::new();
    frontier.push(Node {
        events: Vec::new(),
        g: 0,
        f: budget.max_depth,
    });
    let mut best: Option<Best> = None;
    let mut expansions = 0usize;
    let mut solved = false;

    while expansions < budget.max_expansions {
        let Some(node) = frontier.pop() else { break };
        if node.depth() >= budget.max_depth {
            continue;
        }
        expansions += 1;
        for action in legal_actions(ctx, &node.events) {
            let mut events = node.events.clone();
            events.push(action);
            let Ok(story) = Story::new("adversarial", ctx.style, events) else {
                continue;
            };
            let g = node.g + usize::from(diverges_at_end(&story));
            let depth = story.events.len();
            if depth >= min_depth {
                let questions = question_set(&story);
                let score = scorer.score(&story, &questions);
                if best
                    .as_ref()
                    .is_none_or(|b| b.beaten_by(&story.events, score, g))
                {
                    best = Some(Best {
                        events: story.events.clone(),
                        score,
                        g,
                    });
                }
                if score <= 0.0 {
                    solved = true;
                }
            }
            if depth < budget.max_depth {
                frontier.push(Node {
                    f: g + (budget.max_depth - depth),
                    g,
                    events: story.events,
                });
            }
        }
        if solved {
            break;
        }
        if frontier.len() > budget.beam {
            let mut kept = frontier.into_sorted_vec();
            kept.drain(..kept.len() - budget.beam);
            frontier = kept.into();
        }
    }

    let best = best.ok_or_else(|| {
        SearchError::Config("budget too small to reach a terminal story".into())
    })?;
    let mut story = Story::new("adversarial", ctx.style, best.events)?;
    story.meta.dataset_tag = "adversarial".into();
    let questions = question_set(&story);
    Ok(SearchResult {
        divergence_points: divergence_points(&story),
        questions,
        story,
        score: best.score,
        expansions,
        exhausted: !solved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_scorer_reaches_three_divergences() {
        let ctx = SearchContext::three_agent();
        let r = astar_search(&ctx, &SyntheticScorer, Budget::default()).unwrap();
        assert!(r.divergence_points >= 3, "{}", r.divergence_points);
        assert!(!r.exhausted);
        assert_eq!(r.score, 0.0);
        assert!(r.expansions <= 5000);
        r.story.validate().unwrap();
        for q in &r.questions {
            answer_query(&r.story, q).unwrap();
        }
        let again = astar_search(&ctx, &SyntheticScorer, Budget::default()).unwrap();
        assert_eq!(again.story.events, r.story.events);
    }

    #[test]
    fn constant_scorer_exhausts() {
        let budget = Budget {
            max_expansions: 200,
            ..Budget::default()
        };
        let r = astar_search(&SearchContext::three_agent(), &ConstantScorer(1.0), budget).unwrap();
        assert!(r.exhausted);
        assert_eq!(r.expansions, 200);
        assert!(r.divergence_points >= 1);
    }

    #[test]
    fn depth_one_is_a_single_enter() {
        let budget = Budget {
            max_depth: 1,
            ..Budget::default()
        };
        let r = astar_search(&SearchContext::three_agent(), &SyntheticScorer, budget).unwrap();
        assert_eq!(r.story.events.len(), 1);
        assert!(matches!(r.story.events[0].kind, EventKind::Enter { .. }));
        assert_eq!(r.divergence_points, 0);
        assert!(r.exhausted);
    }

    #[test]
    fn empty_vocabulary_is_config_error() {
        let mut ctx = SearchContext::three_agent();
        ctx.agents.clear();
        assert!(matches!(
            astar_search(&ctx, &SyntheticScorer, Budget::default()),
            Err(SearchError::Config(_))
        ));
    }

    #[test]
    fn secret_witness_suppresses_divergence() {
        let ctx = SearchContext::three_agent();
        let enter = |a: &AgentId| Event::new(EventKind::Enter {
            agents: vec![a.clone()],
            room: ctx.rooms[0].clone(),
        });
        let declare = Event::new(EventKind::Declare {
            object: ctx.objects[0].clone(),
            container: ctx.containers[0].clone(),
            room: ctx.rooms[0].clone(),
        });
        let exit = Event::new(EventKind::Exit {
            agent: ctx.agents[1].clone(),
            room: ctx.rooms[0].clone(),
        });
        let mv = Event::new(EventKind::Move {
            agent: ctx.agents[0].clone(),
            object: ctx.objects[0].clone(),
            to: ctx.containers[1].clone(),
            room: ctx.rooms[0].clone(),
        });
        let base = vec![enter(&ctx.agents[0]), enter(&ctx.agents[1]), declare, exit];
        let mut plain = base.clone();
        plain.push(mv.clone());
        let mut watched = base;
        watched.push(mv.with_secret_witness(ctx.agents[1].clone()));
        let s = |ev| Story::new("t", SurfaceStyle::Structured, ev).unwrap();
        assert_eq!(divergence_points(&s(plain)), 1);
        assert_eq!(divergence_points(&s(watched)), 0);
    }
}
