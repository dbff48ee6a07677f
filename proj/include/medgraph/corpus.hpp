#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace medgraph {

enum class EntityClass { Attribute, Disease, Examination, Medicine, Symptom };
enum class MentionState { Mention, Deny };
enum class Speaker { Patient, Doctor };

const char* to_string(EntityClass c);
const char* to_string(MentionState s);
const char* to_string(Speaker s);

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

EntityClass entity_class_from(const std::string& s);  // throws CorpusError
MentionState mention_state_from(const std::string& s);
Speaker speaker_from(const std::string& s);

struct EntityMention {
    std::string label;  // canonical: trimmed, ASCII-lowercased
    EntityClass cls = EntityClass::Symptom;
    MentionState state = MentionState::Mention;
    bool operator==(const EntityMention&) const = default;
};

struct Utterance {
    Speaker speaker = Speaker::Patient;
    std::string text;  // may be empty
    std::vector<EntityMention> mentions;
    bool operator==(const Utterance&) const = default;
};

struct Dialogue {
    std::string id;
    std::vector<Utterance> turns;
    bool operator==(const Dialogue&) const = default;
};

// One dialogue per line:
// {"dialogue_id": "...", "turns": [{"speaker": "patient"|"doctor",
//   "text": "...", "entities": [{"label","class","state"}, ...]}, ...]}
// Labels are canonicalized; duplicate labels within one utterance collapse
// to the last state given. Throws CorpusError with the offending line number.
std::vector<Dialogue> parse_corpus(std::istream& in);
std::vector<Dialogue> parse_corpus_file(const std::string& path);
Dialogue parse_dialogue_line(const std::string& line);

// One JSON line, keys in a stable (alphabetical) order; empty text omitted.
std::string serialize_dialogue(const Dialogue& d);

// Warnings only: label tagged with conflicting classes, dialogue without
// any entities, doctor-side deny states (unusual but permitted).
std::vector<std::string> validate_dialogue(const Dialogue& d);

}  // namespace medgraph
