#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::oracle::{answer_query, brute_force_answer};
use tomforge_core::story::{parse_story, render_story, BeliefQuery};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(story) = parse_story(text) else { return };
    let again = parse_story(&render_story(&story)).expect("rendered stories parse");
    assert!(again.same_structure(&story));
    for object in &story.objects {
        let q = BeliefQuery::reality(object.clone());
        assert_eq!(answer_query(&story, &q).ok(), brute_force_answer(&story, &q).ok());
        for agent in &story.agents {
            let q = BeliefQuery { chain: vec![agent.clone()], ..q.clone() };
            assert_eq!(answer_query(&story, &q).ok(), brute_force_answer(&story, &q).ok());
        }
    }
});
