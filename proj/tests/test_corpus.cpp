#include <doctest.h>

#include <sstream>
#include <string>

#include "medgraph/corpus.hpp"

#include "helpers.hpp"

using namespace medgraph;

namespace {

Dialogue sample_dialogue() {
    Dialogue d;
    d.id = "s1";
    d.turns = {
        {Speaker::Patient,
         "I have a cough and chills.",
         {{"cough", EntityClass::Symptom, MentionState::Mention},
          {"chills", EntityClass::Symptom, MentionState::Mention}}},
        {Speaker::Doctor, "Any fever?", {{"fever", EntityClass::Symptom, MentionState::Mention}}},
        {Speaker::Patient, "No fever.", {{"fever", EntityClass::Symptom, MentionState::Deny}}},
        {Speaker::Doctor, "", {{"x-ray", EntityClass::Examination, MentionState::Mention}}},
    };
    return d;
}

}  // namespace

TEST_CASE("dialogue serialization round trips") {
    Dialogue d = sample_dialogue();
    Dialogue back = parse_dialogue_line(serialize_dialogue(d));
    CHECK(back == d);
    // Stable output: serializing the round-tripped value changes nothing.
    CHECK(serialize_dialogue(back) == serialize_dialogue(d));
}

TEST_CASE("labels are canonicalized and the last state wins") {
    std::string line = R"({"dialogue_id":"x","turns":[{"speaker":"patient","text":"",
        "entities":[{"label":"  Cough ","class":"symptom","state":"mention"},
                    {"label":"cough","class":"symptom","state":"deny"}]}]})";
    // Collapse the newline-split raw string back into one line.
    std::string oneline;
    for (char c : line)
        if (c != '\n') oneline += c;
    Dialogue d = parse_dialogue_line(oneline);
    REQUIRE(d.turns.size() == 1);
    REQUIRE(d.turns[0].mentions.size() == 1);
    CHECK(d.turns[0].mentions[0].label == "cough");
    CHECK(d.turns[0].mentions[0].state == MentionState::Deny);
}

TEST_CASE("parse errors carry the line number") {
    std::istringstream in(
        R"({"dialogue_id":"a","turns":[{"speaker":"patient","entities":[]}]})"
        "\n"
        R"({"dialogue_id":"b","turns":[{"speaker":"patient","entities":[{"label":"x","class":"symptom","state":"negate"}]}]})"
        "\n");
    try {
        parse_corpus(in);
        FAIL("expected a corpus error");
    } catch (const CorpusError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("negate") != std::string::npos);
    }
}

TEST_CASE("structural mistakes are rejected") {
    CHECK_THROWS_AS(parse_dialogue_line("not json"), CorpusError);
    CHECK_THROWS_AS(parse_dialogue_line(R"({"turns":[]})"), CorpusError);
    CHECK_THROWS_AS(parse_dialogue_line(R"({"dialogue_id":"a","turns":[]})"), CorpusError);
    CHECK_THROWS_AS(
        parse_dialogue_line(
            R"({"dialogue_id":"a","turns":[{"speaker":"nurse","entities":[]}]})"),
        CorpusError);
    CHECK_THROWS_AS(
        parse_dialogue_line(
            R"({"dialogue_id":"a","turns":[{"speaker":"patient","entities":[{"label":"  ","class":"symptom","state":"mention"}]}]})"),
        CorpusError);
}

TEST_CASE("validation flags suspicious but parseable content") {
    std::string line =
        R"({"dialogue_id":"w","turns":[)"
        R"({"speaker":"patient","entities":[{"label":"cough","class":"symptom","state":"mention"}]},)"
        R"({"speaker":"doctor","entities":[{"label":"cough","class":"disease","state":"deny"}]}]})";
    Dialogue d = parse_dialogue_line(line);
    auto warnings = validate_dialogue(d);
    REQUIRE(warnings.size() == 2);
    bool conflict = false, doctor_deny = false;
    for (const std::string& w : warnings) {
        if (w.find("class conflict") != std::string::npos) conflict = true;
        if (w.find("doctor deny") != std::string::npos) doctor_deny = true;
    }
    CHECK(conflict);
    CHECK(doctor_deny);

    Dialogue bare = parse_dialogue_line(
        R"({"dialogue_id":"b","turns":[{"speaker":"patient","entities":[]}]})");
    auto bare_warnings = validate_dialogue(bare);
    REQUIRE(bare_warnings.size() == 1);
    CHECK(bare_warnings[0] == "no entities");
}

TEST_CASE("the bundled fixture corpus loads") {
    auto dialogues = parse_corpus_file(data_path("fixture_corpus.jsonl"));
    REQUIRE(dialogues.size() == 3);
    CHECK(dialogues[0].id == "d1");
    CHECK(dialogues[2].turns[1].mentions[0].state == MentionState::Deny);
}
