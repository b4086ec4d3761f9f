use proptest::prelude::*;
use tomforge_core::adversarial::{
    astar_search, divergence_points, Budget, ModelScorer, SearchContext, SyntheticScorer,
};
use tomforge_core::client::{ChatRequest, ChatResponse, FnClient};
use tomforge_core::eval::{bootstrap_ci, collapse_ratio, length_stats, mean, PromptStyle, StatsError};
use tomforge_core::oracle::true_location;
use tomforge_core::story::parse_story;

#[test]
fn collapse_of_synthetic_corpora() {
    let before: Vec<usize> = (0..500).map(|i| 100 + (i % 5) * 2 - 4).collect();
    let after: Vec<usize> = (0..500).map(|i| if i % 5 < 3 { 12 } else { 11 }).collect();
    let b = length_stats(&before, &before, 1).unwrap();
    let a = length_stats(&after, &after, 1).unwrap();
    assert_eq!(b.mean_tokens, 100.0);
    assert!((a.mean_tokens - 11.6).abs() < 1e-9);
    let r = collapse_ratio(b.mean_tokens, a.mean_tokens).unwrap();
    assert!((r - 0.884).abs() <= 0.0005, "{r}");
    assert!(matches!(collapse_ratio(0.0, 1.0), Err(StatsError::NonPositiveBaseline(_))));
    assert!(matches!(mean(&[]), Err(StatsError::EmptyInput)));
}

proptest! {
    #[test]
    fn bootstrap_interval_brackets_the_mean(values in prop::collection::vec(0.0f64..1000.0, 1..60), seed in any::<u64>()) {
        let m = mean(&values).unwrap();
        let (lo, hi) = bootstrap_ci(&values, 200, 0.9, seed).unwrap();
        prop_assert!(lo <= m && m <= hi);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo >= min - 1e-9 && hi <= max + 1e-9);
        prop_assert_eq!((lo, hi), bootstrap_ci(&values, 200, 0.9, seed).unwrap());
    }
}

/// A model that always reports the object's true location.
fn reality_model() -> FnClient<impl Fn(&ChatRequest) -> Result<ChatResponse, tomforge_core::client::ClientError>> {
    FnClient(|r: &ChatRequest| {
        let text = r.user_text();
        let story_text = text
            .strip_prefix("Story: ")
            .and_then(|t| t.split("\n Question: ").next())
            .unwrap();
        let story = parse_story(story_text).unwrap();
        let truth = true_location(&story, &story.objects[0]).unwrap();
        Ok(ChatResponse::text(format!("<think>t</think><answer>{}</answer>", truth.surface(story.style))))
    })
}

#[test]
fn model_scored_search_finds_false_beliefs() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let scorer = ModelScorer {
        client: reality_model(),
        handle: rt.handle().clone(),
        model: "mock".into(),
        style: PromptStyle::Rl,
    };
    let budget = Budget { max_expansions: 300, max_depth: 6, ..Budget::default() };
    let ctx = SearchContext::three_agent();
    let found = astar_search(&ctx, &scorer, budget).unwrap();
    assert!(found.score < 1.0);
    assert!(found.divergence_points >= 1);
    let again = astar_search(&ctx, &scorer, budget).unwrap();
    assert_eq!(found.story.events, again.story.events);
}

#[test]
fn synthetic_search_reaches_three_divergences() {
    let found = astar_search(&SearchContext::three_agent(), &SyntheticScorer, Budget::default()).unwrap();
    assert!(found.expansions <= 5000);
    assert!(divergence_points(&found.story) >= 3);
    assert_eq!(found.divergence_points, divergence_points(&found.story));
    assert!(!found.exhausted);
}
