use super::{BeliefQuery, DistractorKind, Event, EventKind, Phrasing, Story, SurfaceStyle};

const SECRET_WITNESS: &str = "While this action was happening, {} witnessed this action in secret (and only this action).";

/// "A", "A and B", "A, B and C".
fn join_agents(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// Renders one event plus its secret-witness sentences.
pub fn render_event(ev: &Event, style: SurfaceStyle) -> String {
    let s = |t: &str| style.surface(t);
    let main = match &ev.kind {
        EventKind::Enter { agents, room } => {
            let names: Vec<String> = agents.iter().map(|a| s(a.as_str())).collect();
            format!("{} entered the {}.", join_agents(&names), s(room.as_str()))
        }
        EventKind::Exit { agent, room } => {
            format!("{} exited the {}.", s(agent.as_str()), s(room.as_str()))
        }
        EventKind::Declare {
            object, container, ..
        } => format!("The {} is in the {}.", s(object.as_str()), s(container.as_str())),
        EventKind::Move {
            agent,
            object,
            to,
            room,
        } => match style {
            SurfaceStyle::Templated => format!(
                "{} moved the {} to the {}.",
                s(agent.as_str()),
                s(object.as_str()),
                s(to.as_str())
            ),
            SurfaceStyle::Structured => format!(
                "{} moved the {} to the {}, which is also located in the {}.",
                s(agent.as_str()),
                s(object.as_str()),
                s(to.as_str()),
                s(room.as_str())
            ),
        },
        EventKind::NoOp { agent, room } => format!(
            "{} made no movements and stayed in the {} for 1 minute.",
            s(agent.as_str()),
            s(room.as_str())
        ),
        EventKind::PrivateClaim {
            speaker,
            listener,
            object,
            container,
        } => format!(
            "{} privately told {} that the {} is in the {} now.",
            s(speaker.as_str()),
            s(listener.as_str()),
            s(object.as_str()),
            s(container.as_str())
        ),
        EventKind::PublicClaim {
            speaker,
            object,
            container,
        } => format!(
            "{} publicly claimed that the {} is in the {} now.",
            s(speaker.as_str()),
            s(object.as_str()),
            s(container.as_str())
        ),
        EventKind::Distractor {
            agent,
            kind,
            subject,
        } => {
            let agent = s(agent.as_str());
            let subject = s(subject);
            match kind {
                DistractorKind::Likes => format!("{agent} likes the {subject}."),
                DistractorKind::Loves => format!("{agent} loves the {subject}."),
                DistractorKind::Dislikes => format!("{agent} dislikes the {subject}."),
                DistractorKind::Lost(p) => format!("{agent} lost {} {subject}.", p.as_str()),
                DistractorKind::Saw => format!("{agent} saw a {subject}."),
            }
        }
    };
    let mut out = main;
    for w in &ev.secret_witnesses {
        out.push(' ');
        out.push_str(&SECRET_WITNESS.replace("{}", &s(w.as_str())));
    }
    out
}

pub fn render_story(story: &Story) -> String {
    story
        .events
        .iter()
        .map(|e| render_event(e, story.style))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_question(q: &BeliefQuery) -> String {
    render_question_in(q, SurfaceStyle::Templated)
}

pub fn render_question_in(q: &BeliefQuery, style: SurfaceStyle) -> String {
    let object = style.surface(q.object.as_str());
    let names: Vec<String> = q.chain.iter().map(|a| style.surface(a.as_str())).collect();
    match (names.as_slice(), q.phrasing) {
        ([], _) => format!("Where is the {object} really?"),
        ([first, rest @ ..], Phrasing::ThinkChain) => {
            let mut out = format!("Where does {first} think");
            for name in rest {
                out.push_str(&format!(" {name} thinks"));
            }
            out.push_str(&format!(" the {object} is?"));
            out
        }
        ([only], Phrasing::Search) => format!("Where does {only} search for the {object}?"),
        ([first, middle @ .., last], Phrasing::Search) => {
            let mut out = format!("Where does {first} think that");
            for name in middle {
                out.push_str(&format!(" {name} thinks that"));
            }
            out.push_str(&format!(" {last} searches for the {object}?"));
            out
        }
    }
}
