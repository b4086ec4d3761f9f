//! Reference stories with known answers, taken from published benchmark
//! examples. Used by tests, the acceptance suite and as fuzz seeds.

/// Three-chapter Hi-ToM story with five agents.
pub const TANGERINE_STORY: &str = "Olivia, Chloe, Oliver, Lily and Avery entered the playroom. The tangerine is in the blue_crate. Lily likes the blue_treasure_chest. Olivia moved the tangerine to the blue_pantry. Olivia likes the red_pantry. Olivia exited the playroom. Chloe made no movements and stayed in the playroom for 1 minute. Avery lost his watch. Chloe exited the playroom. Oliver made no movements and stayed in the playroom for 1 minute. Oliver exited the playroom. Lily moved the tangerine to the red_bottle. Lily exited the playroom. Avery moved the tangerine to the blue_crate. Avery exited the playroom. Olivia, Chloe, Oliver, Lily and Avery entered the waiting_room. Olivia, Lily and Oliver entered the playroom. The tangerine is in the blue_crate. Olivia moved the tangerine to the blue_pantry. Olivia exited the playroom. Lily made no movements and stayed in the playroom for 1 minute. Lily exited the playroom. Oliver made no movements and stayed in the playroom for 1 minute. Oliver exited the playroom. Olivia, Lily and Oliver entered the waiting_room. Olivia saw a monkey. Olivia, Oliver, Lily and Avery entered the playroom. The tangerine is in the blue_pantry. Olivia made no movements and stayed in the playroom for 1 minute. Olivia exited the playroom. Oliver lost his phone. Oliver moved the tangerine to the red_drawer. Oliver exited the playroom. Lily moved the tangerine to the green_suitcase. Lily exited the playroom. Avery made no movements and stayed in the playroom for 1 minute. Avery exited the playroom. Oliver lost his gloves. Olivia, Oliver, Lily and Avery entered the waiting_room.";
pub const TANGERINE_QUESTION: &str =
    "Where does Oliver think Chloe thinks Lily thinks Avery thinks the tangerine is?";
pub const TANGERINE_ANSWER: &str = "blue_pantry";

/// ToMi unexpected-transfer story (sentence terminators restored).
pub const JEANS_STORY: &str = "Amelia entered the hall. Mila loves the plum. Hunter loves the tomato. Mila entered the lounge. Hunter entered the hall. The jeans is in the container. Amelia moved the jeans to the treasure_chest. Hunter exited the hall. Amelia exited the hall. Hunter entered the hall.";
pub const JEANS_QUESTION: &str = "Where does Amelia think that Hunter searches for the jeans?";
pub const JEANS_ANSWER: &str = "treasure_chest";

/// ExploreToM structured story with a secret witness.
pub const TYPEWRITER_STORY: &str = "Brody entered the back room of the thrift store. Brody moved the vintage typewriter to the cardboard box, which is also located in the back room of the thrift store. While this action was happening, Lucas witnessed this action in secret (and only this action). Evelyn entered the back room of the thrift store. Lucas entered the back room of the thrift store. Evelyn moved the vintage typewriter to the plastic storage bin, which is also located in the back room of the thrift store.";
pub const TYPEWRITER_QUESTION: &str =
    "In which container will Evelyn search for the vintage typewriter?";
pub const TYPEWRITER_ANSWER: &str = "plastic storage bin";

/// Naturalistic rewrite of [`TYPEWRITER_STORY`].
pub const TYPEWRITER_INFILLED: &str = "The back room of the thrift store was quiet and dimly lit, with cardboard boxes stacked against the walls and morning sunlight barely peeking through the grimy high window. The air was thick with the smell of old fabrics and forgotten items, and the silence was almost palpable, broken only by the faint hum of the old store. As Brody entered the back room, the soft creak of the door seemed to amplify in the stillness, a solitary sound that broke the morning calm. In a move that didn't escape Lucas's watchful gaze, the vintage typewriter glided off its perch, landing softly within the corrugated walls of a cardboard box in the corner. With a gentle creak, the back room door swung open for Evelyn, who swept in with a purposeful stride, closely followed by Lucas. The back room was once again quiet, the only sign of activity being the soft clinking of the plastic storage bin's lid as Evelyn securely placed the vintage typewriter inside, her task complete.";

/// Single-chapter story with a private claim in the waiting room.
pub const TOMATO_STORY: &str = "Ella, Mila, Benjamin, Gracie and William entered the TV_room. The tomato is in the red_envelope. Ella made no movements and stayed in the TV_room for 1 minute. Ella lost his phone. Ella exited the TV_room. Mila moved the tomato to the blue_bathtub. Mila exited the TV_room. Benjamin made no movements and stayed in the TV_room for 1 minute. Benjamin exited the TV_room. Gracie moved the tomato to the red_bucket. Gracie exited the TV_room. William moved the tomato to the red_envelope. William exited the TV_room. Benjamin saw a cat. Ella, Mila, Benjamin, Gracie and William entered the waiting_room. Benjamin privately told Ella that the tomato is in the blue_bathtub now.";
pub const TOMATO_QUESTION: &str =
    "Where does Gracie think William thinks Benjamin thinks Ella thinks the tomato is?";
pub const TOMATO_ANSWER: &str = "red_envelope";
