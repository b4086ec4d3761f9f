//! Seeded Hi-ToM-style story and dataset generation.
//!
//! Randomness comes from ChaCha8 streams keyed by 64-bit sub-seeds, which are
//! derived from the run seed with the SplitMix64 finalizer. Both are
//! platform-independent, so a seed fully determines the output bytes.

use std::collections::HashMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::dataset::{Answered, Dataset, SampleRecord, Split};
use crate::oracle::{answer_query, brute_force_answer, OracleError};
use crate::story::{
    render_question_in, render_story, AgentId, BeliefQuery, ContainerId, DistractorKind, Event,
    EventKind, ObjectId, Phrasing, Pronoun, PronounTable, RoomId, Story, StoryError, SurfaceStyle,
    MAX_ORDER,
};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error(transparent)]
    Story(#[from] StoryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("oracles disagree on story {story_id}: {question}")]
    OracleDisagreement { story_id: String, question: String },
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed for the stream identified by `path`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const AGENT_NAMES: &[&str] = &[
    "Olivia", "Chloe", "Oliver", "Lily", "Avery", "Ella", "Mila", "Benjamin", "Gracie", "William",
    "Amelia", "Hunter", "Emily", "Ava", "Jackson", "Isabella", "Noah", "Sophia", "Liam", "Emma",
];
const ROOMS: &[&str] = &[
    "playroom", "TV_room", "kitchen", "garden", "lounge", "hall", "study", "dining_room",
    "attic", "basement", "patio", "cellar",
];
const OBJECTS: &[&str] = &[
    "tangerine", "tomato", "pumpkin", "jeans", "apple", "banana", "lettuce", "peach", "onion",
    "potato", "grapes", "melon", "cherry", "lemon", "plum", "corn",
];
const CONTAINERS: &[&str] = &[
    "blue_crate", "blue_pantry", "red_bottle", "red_drawer", "green_suitcase", "red_envelope",
    "blue_bathtub", "red_bucket", "green_basket", "blue_cupboard", "green_box", "red_treasure_chest",
    "blue_container", "green_bottle", "red_pantry", "green_drawer",
];
const LIKED: &[&str] = &[
    "blue_treasure_chest", "red_pantry", "green_bucket", "blue_suitcase", "red_box",
    "green_envelope",
];
const LOST: &[&str] = &["watch", "phone", "gloves", "keys", "wallet", "hat"];
const SEEN: &[&str] = &["monkey", "cat", "dog", "rabbit", "mouse", "bird"];

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub n_agents: usize,
    /// Each story has between 1 and `n_chapters` chapters.
    pub n_chapters: usize,
    pub agent_names: Vec<String>,
    pub rooms: Vec<String>,
    pub waiting_room: String,
    pub objects: Vec<String>,
    pub containers: Vec<String>,
    pub containers_per_story: usize,
    pub distractor_rate: f64,
    pub claim_rate: f64,
    /// Probability that an agent's turn is a move rather than a no-op.
    pub move_rate: f64,
    pub orders: Vec<usize>,
    pub samples_per_order: usize,
    pub seed: u64,
    /// Agent name to pronoun used in "lost" distractors; default "his".
    pub pronouns: HashMap<String, Pronoun>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_agents: 5,
            n_chapters: 3,
            agent_names: strings(AGENT_NAMES),
            rooms: strings(ROOMS),
            waiting_room: "waiting_room".into(),
            objects: strings(OBJECTS),
            containers: strings(CONTAINERS),
            containers_per_story: 5,
            distractor_rate: 0.3,
            claim_rate: 0.2,
            move_rate: 0.6,
            orders: (0..=MAX_ORDER).collect(),
            samples_per_order: 600,
            seed: 0,
            pronouns: HashMap::new(),
        }
    }
}

impl GenConfig {
    /// 600 samples for each order 0..=4, split 2000/400/600.
    pub fn paper(seed: u64) -> Self {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let fail = |m: String| Err(GenError::Config(m));
        if self.n_agents == 0 {
            return fail("n_agents must be at least 1".into());
        }
        if self.agent_names.len() < self.n_agents {
            return fail(format!(
                "{} agent names cannot supply {} distinct agents",
                self.agent_names.len(),
                self.n_agents
            ));
        }
        if !(1..=3).contains(&self.n_chapters) {
            return fail("n_chapters must be in 1..=3".into());
        }
        if self.rooms.is_empty() || self.objects.is_empty() {
            return fail("rooms and objects must be non-empty".into());
        }
        if self.rooms.contains(&self.waiting_room) {
            return fail("the waiting room must not be a story room".into());
        }
        if self.containers_per_story < 2 || self.containers.len() < self.containers_per_story {
            return fail("need at least 2 distinct containers per story".into());
        }
        for (name, rate) in [
            ("distractor_rate", self.distractor_rate),
            ("claim_rate", self.claim_rate),
            ("move_rate", self.move_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return fail(format!("{name} must be in [0, 1]"));
            }
        }
        if let Some(k) = self.orders.iter().find(|&&k| k > MAX_ORDER) {
            return fail(format!("order {k} exceeds {MAX_ORDER}"));
        }
        if self.n_agents < 2 && self.orders.iter().any(|&k| k >= 2) {
            return fail("orders >= 2 need at least two agents".into());
        }
        let tokens = self
            .agent_names
            .iter()
            .chain(&self.rooms)
            .chain(&self.objects)
            .chain(&self.containers)
            .chain(std::iter::once(&self.waiting_room));
        for t in tokens {
            if AgentId::new(t.as_str()).is_err() {
                return fail(format!("invalid vocabulary token {t:?}"));
            }
        }
        Ok(())
    }

    fn pronoun_table(&self) -> PronounTable {
        PronounTable {
            overrides: self.pronouns.clone(),
            default: None,
        }
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty by config validation")
}

fn distractor(rng: &mut ChaCha8Rng, agents: &[AgentId], pronouns: &PronounTable) -> Event {
    let agent = pick(rng, agents).clone();
    let (kind, subject) = match rng.random_range(0..3) {
        0 => (DistractorKind::Likes, *pick(rng, LIKED)),
        1 => (DistractorKind::Lost(pronouns.pronoun_for(&agent)), *pick(rng, LOST)),
        _ => (DistractorKind::Saw, *pick(rng, SEEN)),
    };
    Event::new(EventKind::Distractor {
        agent,
        kind,
        subject: subject.to_string(),
    })
}

/// Samples one story. Chapter skeleton: everyone enters, the object's
/// location is declared, each agent in a random order acts (move or no-op)
/// and exits, then everyone meets in the waiting room where claims happen.
pub fn sample_story(cfg: &GenConfig, seed: u64) -> Result<Story, GenError> {
    cfg.validate()?;
    let mut rng = seeded_rng(seed);
    let pronouns = cfg.pronoun_table();

    let agents: Vec<AgentId> = cfg
        .agent_names
        .choose_multiple(&mut rng, cfg.n_agents)
        .map(|n| AgentId::new(n.as_str()))
        .collect::<Result<_, _>>()?;
    let room = RoomId::new(pick(&mut rng, &cfg.rooms).as_str())?;
    let waiting = RoomId::new(cfg.waiting_room.as_str())?;
    let object = ObjectId::new(pick(&mut rng, &cfg.objects).as_str())?;
    let containers: Vec<ContainerId> = cfg
        .containers
        .choose_multiple(&mut rng, cfg.containers_per_story)
        .map(|c| ContainerId::new(c.as_str()))
        .collect::<Result<_, _>>()?;
    let mut location = pick(&mut rng, &containers).clone();
    let chapters = rng.random_range(1..=cfg.n_chapters);

    let mut events = Vec::new();
    let mut deceptive = false;
    for chapter in 0..chapters {
        let participants: Vec<AgentId> = if chapter == 0 {
            agents.clone()
        } else {
            let k = rng.random_range(agents.len().min(2)..=agents.len());
            let mut chosen: Vec<usize> = (0..agents.len()).collect::<Vec<_>>();
            chosen.shuffle(&mut rng);
            chosen.truncate(k);
            chosen.sort_unstable();
            chosen.into_iter().map(|i| agents[i].clone()).collect()
        };
        events.push(Event::new(EventKind::Enter {
            agents: participants.clone(),
            room: room.clone(),
        }));
        events.push(Event::new(EventKind::Declare {
            object: object.clone(),
            container: location.clone(),
            room: room.clone(),
        }));
        let mut exit_order = participants.clone();
        exit_order.shuffle(&mut rng);
        for agent in exit_order {
            if rng.random_bool(cfg.distractor_rate) {
                events.push(distractor(&mut rng, &agents, &pronouns));
            }
            if rng.random_bool(cfg.move_rate) {
                let choices: Vec<&ContainerId> =
                    containers.iter().filter(|c| **c != location).collect();
                location = (*pick(&mut rng, &choices)).clone();
                events.push(Event::new(EventKind::Move {
                    agent: agent.clone(),
                    object: object.clone(),
                    to: location.clone(),
                    room: room.clone(),
                }));
            } else {
                events.push(Event::new(EventKind::NoOp {
                    agent: agent.clone(),
                    room: room.clone(),
                }));
            }
            if rng.random_bool(cfg.distractor_rate) {
                events.push(distractor(&mut rng, &agents, &pronouns));
            }
            events.push(Event::new(EventKind::Exit {
                agent,
                room: room.clone(),
            }));
        }
        events.push(Event::new(EventKind::Enter {
            agents: participants.clone(),
            room: waiting.clone(),
        }));
        for speaker in &participants {
            if !rng.random_bool(cfg.claim_rate) {
                continue;
            }
            let container = pick(&mut rng, &containers).clone();
            deceptive |= container != location;
            let listeners: Vec<&AgentId> = participants.iter().filter(|a| *a != speaker).collect();
            let private = !listeners.is_empty() && rng.random_bool(0.5);
            let kind = if private {
                EventKind::PrivateClaim {
                    speaker: speaker.clone(),
                    listener: (*pick(&mut rng, &listeners)).clone(),
                    object: object.clone(),
                    container,
                }
            } else {
                EventKind::PublicClaim {
                    speaker: speaker.clone(),
                    object: object.clone(),
                    container,
                }
            };
            events.push(Event::new(kind));
        }
        if rng.random_bool(cfg.distractor_rate) {
            events.push(distractor(&mut rng, &agents, &pronouns));
        }
    }

    let mut story = Story::new(format!("hitom-{seed:016x}"), SurfaceStyle::Templated, events)?;
    story.meta.dataset_tag = "hitom".into();
    story.meta.seed = Some(seed);
    story.meta.deceptive = deceptive;
    Ok(story)
}

/// One benchmark unit: a story, a question about it and the oracle answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub dataset: Dataset,
    pub story: Story,
    pub query: BeliefQuery,
    pub story_text: String,
    pub question_text: String,
    pub answer: String,
    pub order: usize,
    pub split: Split,
}

impl Sample {
    pub fn to_record(&self) -> SampleRecord {
        SampleRecord {
            id: self.id.clone(),
            dataset: self.dataset,
            story: self.story_text.clone(),
            question: self.question_text.clone(),
            answer: self.answer.clone(),
            order: Some(self.order as u8),
            split: self.split,
        }
    }
}

impl Answered for Sample {
    fn answer(&self) -> &str {
        &self.answer
    }
}

/// Agents of the story's opening Enter.
fn first_chapter_agents(story: &Story) -> Vec<AgentId> {
    story
        .events
        .iter()
        .find_map(|e| match &e.kind {
            EventKind::Enter { agents, .. } => Some(agents.clone()),
            _ => None,
        })
        .unwrap_or_default()
}

/// Chain of `order` agents with no agent directly repeated.
pub fn sample_chain(rng: &mut ChaCha8Rng, pool: &[AgentId], order: usize) -> Result<Vec<AgentId>, GenError> {
    if order > 0 && pool.is_empty() || order > 1 && pool.len() < 2 {
        return Err(GenError::Config(format!(
            "cannot sample an order-{order} chain from {} agents",
            pool.len()
        )));
    }
    let mut chain: Vec<AgentId> = Vec::with_capacity(order);
    for _ in 0..order {
        let candidates: Vec<&AgentId> = pool.iter().filter(|a| chain.last() != Some(*a)).collect();
        chain.push((*pick(rng, &candidates)).clone());
    }
    Ok(chain)
}

/// Answers `query` with both oracles and fails if they disagree.
pub fn checked_answer(story: &Story, query: &BeliefQuery) -> Result<ContainerId, GenError> {
    let fast = answer_query(story, query)?;
    let slow = brute_force_answer(story, query)?;
    if fast != slow {
        return Err(GenError::OracleDisagreement {
            story_id: story.id.clone(),
            question: render_question_in(query, story.style),
        });
    }
    Ok(fast)
}

pub fn make_sample(story: &Story, order: usize, seed: u64) -> Result<Sample, GenError> {
    if order > MAX_ORDER {
        return Err(GenError::Config(format!("order {order} exceeds {MAX_ORDER}")));
    }
    let mut rng = seeded_rng(seed);
    let chain = sample_chain(&mut rng, &first_chapter_agents(story), order)?;
    let object = story
        .objects
        .first()
        .cloned()
        .ok_or_else(|| GenError::Config("story mentions no object".into()))?;
    let query = BeliefQuery::new(chain, object, Phrasing::ThinkChain)?;
    let answer = checked_answer(story, &query)?;
    Ok(Sample {
        id: format!("{}-o{order}", story.id),
        dataset: Dataset::Hitom,
        story: story.clone(),
        story_text: render_story(story),
        question_text: render_question_in(&query, story.style),
        answer: answer.surface(story.style),
        query,
        order,
        split: Split::Train,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplits {
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test_ood: Vec<Sample>,
}

impl DatasetSplits {
    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test_ood.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(samples: &[Sample]) -> Vec<SampleRecord> {
        samples.iter().map(Sample::to_record).collect()
    }
}

/// Generates `samples_per_order` samples for each order. Order-4 samples are
/// held out as the OOD test split; the rest are shuffled and split 5:1 into
/// train and validation (2000/400 for the default profile).
pub fn build_dataset(cfg: &GenConfig) -> Result<DatasetSplits, GenError> {
    cfg.validate()?;
    let mut pool = Vec::new();
    let mut test_ood = Vec::new();
    for &order in &cfg.orders {
        for i in 0..cfg.samples_per_order {
            let story_seed = derive_seed(cfg.seed, &[order as u64, i as u64, 0]);
            let sample_seed = derive_seed(cfg.seed, &[order as u64, i as u64, 1]);
            let story = sample_story(cfg, story_seed)?;
            let mut sample = make_sample(&story, order, sample_seed)?;
            sample.id = format!("hitom-o{order}-{i:05}");
            if order == MAX_ORDER {
                sample.dataset = Dataset::Tom4Ood;
                sample.split = Split::Test;
                test_ood.push(sample);
            } else {
                pool.push(sample);
            }
        }
    }
    let mut rng = seeded_rng(derive_seed(cfg.seed, &[u64::MAX]));
    pool.shuffle(&mut rng);
    let n_train = pool.len() * 5 / 6;
    let mut val = pool.split_off(n_train);
    let mut train = pool;
    for s in &mut train {
        s.split = Split::Train;
    }
    for s in &mut val {
        s.split = Split::Val;
    }
    Ok(DatasetSplits {
        train,
        val,
        test_ood,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> GenConfig {
        GenConfig {
            samples_per_order: 2,
            orders: vec![0, 1],
            seed,
            ..GenConfig::default()
        }
    }

    #[test]
    fn same_seed_same_story() {
        let cfg = GenConfig::default();
        assert_eq!(sample_story(&cfg, 42).unwrap(), sample_story(&cfg, 42).unwrap());
        assert_ne!(
            sample_story(&cfg, 42).unwrap().events,
            sample_story(&cfg, 43).unwrap().events
        );
    }

    #[test]
    fn zero_rates_give_plain_events() {
        let cfg = GenConfig {
            distractor_rate: 0.0,
            claim_rate: 0.0,
            ..GenConfig::default()
        };
        for seed in 0..50 {
            let s = sample_story(&cfg, seed).unwrap();
            assert!(s.events.iter().all(|e| matches!(
                e.kind,
                EventKind::Enter { .. }
                    | EventKind::Declare { .. }
                    | EventKind::Move { .. }
                    | EventKind::NoOp { .. }
                    | EventKind::Exit { .. }
            )));
        }
    }

    #[test]
    fn one_chapter_has_one_exit_per_agent() {
        let cfg = GenConfig {
            n_chapters: 1,
            ..GenConfig::default()
        };
        for seed in 0..100 {
            let s = sample_story(&cfg, seed).unwrap();
            let exits = s
                .events
                .iter()
                .filter(|e| matches!(e.kind, EventKind::Exit { .. }))
                .count();
            assert_eq!(exits, 5);
        }
    }

    #[test]
    fn chains_never_repeat_adjacent_agents() {
        let cfg = GenConfig::default();
        for seed in 0..200 {
            let story = sample_story(&cfg, seed).unwrap();
            let s = make_sample(&story, 4, seed).unwrap();
            assert!(s.query.chain.windows(2).all(|w| w[0] != w[1]));
            assert!(s.story_text.contains(&s.answer));
        }
    }

    #[test]
    fn order_zero_sample_is_reality() {
        let story = sample_story(&GenConfig::default(), 9).unwrap();
        let s = make_sample(&story, 0, 1).unwrap();
        let object = story.objects[0].as_str();
        assert_eq!(s.question_text, format!("Where is the {object} really?"));
        let last = story.events.iter().rev().find_map(|e| e.placement()).unwrap().1;
        assert_eq!(s.answer, last.as_str());
    }

    #[test]
    fn small_profile_has_no_ood_split() {
        let d = build_dataset(&small(3)).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.test_ood.is_empty());
        assert_eq!(d.train.len(), 3);
        assert_eq!(d.val.len(), 1);
    }

    #[test]
    fn config_errors() {
        let cfg = GenConfig {
            n_agents: 30,
            ..GenConfig::default()
        };
        assert!(matches!(sample_story(&cfg, 0), Err(GenError::Config(_))));
        let cfg = GenConfig {
            containers: vec!["box".into()],
            ..GenConfig::default()
        };
        assert!(matches!(build_dataset(&cfg), Err(GenError::Config(_))));
        assert!(make_sample(&sample_story(&GenConfig::default(), 0).unwrap(), 5, 0).is_err());
    }

    #[test]
    fn derived_seeds_differ_per_path() {
        assert_ne!(derive_seed(7, &[0, 0, 0]), derive_seed(7, &[0, 0, 1]));
        assert_ne!(derive_seed(7, &[1, 0]), derive_seed(7, &[0, 1]));
        assert_eq!(derive_seed(7, &[3]), derive_seed(7, &[3]));
    }
}
