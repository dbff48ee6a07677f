#include "medgraph/corpus.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "medgraph/util.hpp"

namespace medgraph {

using nlohmann::json;

const char* to_string(EntityClass c) {
    switch (c) {
        case EntityClass::Attribute: return "attribute";
        case EntityClass::Disease: return "disease";
        case EntityClass::Examination: return "examination";
        case EntityClass::Medicine: return "medicine";
        case EntityClass::Symptom: return "symptom";
    }
    return "symptom";
}

const char* to_string(MentionState s) {
    return s == MentionState::Mention ? "mention" : "deny";
}

const char* to_string(Speaker s) {
    return s == Speaker::Patient ? "patient" : "doctor";
}

EntityClass entity_class_from(const std::string& s) {
    if (s == "attribute") return EntityClass::Attribute;
    if (s == "disease") return EntityClass::Disease;
    if (s == "examination") return EntityClass::Examination;
    if (s == "medicine") return EntityClass::Medicine;
    if (s == "symptom") return EntityClass::Symptom;
    throw CorpusError("unknown entity class \"" + s + "\"");
}

MentionState mention_state_from(const std::string& s) {
    if (s == "mention") return MentionState::Mention;
    if (s == "deny") return MentionState::Deny;
    throw CorpusError("unknown state \"" + s + "\"");
}

Speaker speaker_from(const std::string& s) {
    if (s == "patient") return Speaker::Patient;
    if (s == "doctor") return Speaker::Doctor;
    throw CorpusError("unknown speaker \"" + s + "\"");
}

namespace {

Dialogue dialogue_from_json(const json& rec) {
    if (!rec.is_object()) throw CorpusError("record is not an object");
    Dialogue d;
    if (!rec.contains("dialogue_id") || !rec["dialogue_id"].is_string()) {
        throw CorpusError("missing dialogue_id");
    }
    d.id = rec["dialogue_id"].get<std::string>();
    if (!rec.contains("turns") || !rec["turns"].is_array() || rec["turns"].empty()) {
        throw CorpusError("dialogue \"" + d.id + "\" has an empty turn list");
    }
    for (const auto& t : rec["turns"]) {
        Utterance u;
        if (!t.contains("speaker") || !t["speaker"].is_string()) {
            throw CorpusError("turn without speaker");
        }
        u.speaker = speaker_from(t["speaker"].get<std::string>());
        if (t.contains("text")) {
            if (!t["text"].is_string()) throw CorpusError("text is not a string");
            u.text = t["text"].get<std::string>();
        }
        if (t.contains("entities")) {
            if (!t["entities"].is_array()) throw CorpusError("entities is not an array");
            // Duplicate labels collapse to the last state given for them.
            std::map<std::string, std::size_t> seen;
            for (const auto& e : t["entities"]) {
                EntityMention m;
                if (!e.contains("label") || !e["label"].is_string()) {
                    throw CorpusError("entity without label");
                }
                m.label = canonical_label(e["label"].get<std::string>());
                if (m.label.empty()) throw CorpusError("empty entity label");
                if (!e.contains("class") || !e["class"].is_string()) {
                    throw CorpusError("entity \"" + m.label + "\" without class");
                }
                m.cls = entity_class_from(e["class"].get<std::string>());
                if (!e.contains("state") || !e["state"].is_string()) {
                    throw CorpusError("entity \"" + m.label + "\" without state");
                }
                m.state = mention_state_from(e["state"].get<std::string>());
                auto it = seen.find(m.label);
                if (it != seen.end()) {
                    u.mentions[it->second] = m;
                } else {
                    seen.emplace(m.label, u.mentions.size());
                    u.mentions.push_back(m);
                }
            }
        }
        d.turns.push_back(std::move(u));
    }
    return d;
}

}  // namespace

Dialogue parse_dialogue_line(const std::string& line) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::exception& e) {
        throw CorpusError(std::string("malformed record: ") + e.what());
    }
    return dialogue_from_json(rec);
}

std::vector<Dialogue> parse_corpus(std::istream& in) {
    std::vector<Dialogue> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(parse_dialogue_line(line));
        } catch (const CorpusError& e) {
            throw CorpusError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Dialogue> parse_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file \"" + path + "\"");
    return parse_corpus(in);
}

std::string serialize_dialogue(const Dialogue& d) {
    json rec;
    rec["dialogue_id"] = d.id;
    rec["turns"] = json::array();
    for (const auto& u : d.turns) {
        json t;
        t["speaker"] = to_string(u.speaker);
        if (!u.text.empty()) t["text"] = u.text;
        t["entities"] = json::array();
        for (const auto& m : u.mentions) {
            t["entities"].push_back(
                {{"class", to_string(m.cls)}, {"label", m.label}, {"state", to_string(m.state)}});
        }
        rec["turns"].push_back(std::move(t));
    }
    return rec.dump();
}

std::vector<std::string> validate_dialogue(const Dialogue& d) {
    std::vector<std::string> warnings;
    std::map<std::string, EntityClass> classes;
    std::set<std::string> conflict_reported;
    bool any_entity = false;
    for (const auto& u : d.turns) {
        for (const auto& m : u.mentions) {
            any_entity = true;
            auto [it, inserted] = classes.emplace(m.label, m.cls);
            if (!inserted && it->second != m.cls && conflict_reported.insert(m.label).second) {
                warnings.push_back("class conflict: \"" + m.label + "\"");
            }
            if (u.speaker == Speaker::Doctor && m.state == MentionState::Deny) {
                warnings.push_back("doctor deny: \"" + m.label + "\"");
            }
        }
    }
    if (!any_entity) warnings.push_back("no entities");
    return warnings;
}

}  // namespace medgraph
