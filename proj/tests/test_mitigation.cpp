#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "medgraph/mitigation.hpp"

#include "helpers.hpp"

using namespace medgraph;

namespace {

std::vector<Dialogue> fixture() { return parse_corpus_file(data_path("fixture_corpus.jsonl")); }

Dialogue doctor_doc(const std::string& id, const std::string& text, const std::string& label) {
    Dialogue d;
    d.id = id;
    d.turns = {{Speaker::Doctor, text, {{label, EntityClass::Symptom, MentionState::Mention}}}};
    return d;
}

}  // namespace

TEST_CASE("tokenizer lowercases words and splits ideographs") {
    CHECK(tokenize("Patient has Fever!") == std::vector<std::string>{"patient", "has", "fever"});
    CHECK(tokenize("x_ray-2 done") == std::vector<std::string>{"x_ray", "2", "done"});
    CHECK(tokenize("咳嗽 fever") == std::vector<std::string>{"咳", "嗽", "fever"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  ,,  ").empty());
}

TEST_CASE("similarity of identical and disjoint texts") {
    std::vector<std::string> docs = {"the cough is dry", "the cough is wet",
                                     "fever spikes at night"};
    TfIdfModel model = TfIdfModel::fit(docs);
    SparseVec a = model.transform(docs[0]);
    SparseVec b = model.transform(docs[0]);
    CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(model.transform(docs[0]), model.transform(docs[2])) == doctest::Approx(0.0));
}

TEST_CASE("similarity matches the frozen hand-computed value") {
    std::vector<std::string> docs = {"the cough is dry", "the cough is wet",
                                     "fever spikes at night"};
    TfIdfModel model = TfIdfModel::fit(docs);
    double got = cosine(model.transform(docs[0]), model.transform(docs[1]));
    CHECK(got == doctest::Approx(0.63439580373585769).epsilon(1e-12));
}

TEST_CASE("transform rejects empty text and handles unseen vocabulary") {
    TfIdfModel model = TfIdfModel::fit({"alpha beta", "beta gamma"});
    CHECK_THROWS(model.transform(""));
    CHECK(model.transform("zeta theta").empty());
}

TEST_CASE("exemplar ranking matches the frozen medoid ordering") {
    std::vector<Dialogue> corpus = {
        doctor_doc("m1", "the cough is dry", "cough"),
        doctor_doc("m2", "the cough is wet", "cough"),
        doctor_doc("m3", "a dry cough at night", "cough"),
        doctor_doc("m4", "fever spikes at night", "cough"),
    };
    ResponseKnowledge rk = ResponseKnowledge::build(corpus, 4);
    auto ex = rk.exemplars("cough");
    REQUIRE(ex.size() == 4);
    CHECK(ex[0].text == "the cough is dry");
    CHECK(ex[0].score == doctest::Approx(0.34998711128372334).epsilon(1e-12));
    CHECK(ex[1].text == "a dry cough at night");
    CHECK(ex[1].score == doctest::Approx(0.2991115245017591).epsilon(1e-12));
    CHECK(ex[2].text == "the cough is wet");
    CHECK(ex[2].score == doctest::Approx(0.27030743648884853).epsilon(1e-12));
    CHECK(ex[3].text == "fever spikes at night");
    CHECK(ex[3].score == doctest::Approx(0.12720658507192198).epsilon(1e-12));

    ResponseKnowledge top2 = ResponseKnowledge::build(corpus, 2);
    CHECK(top2.exemplars("cough").size() == 2);
    CHECK(top2.exemplars("cough")[0].text == "the cough is dry");
}

TEST_CASE("a single response scores one and input order does not matter") {
    std::vector<Dialogue> corpus = {doctor_doc("s1", "take deep breaths", "cough")};
    ResponseKnowledge rk = ResponseKnowledge::build(corpus, 3);
    REQUIRE(rk.exemplars("cough").size() == 1);
    CHECK(rk.exemplars("cough")[0].score == doctest::Approx(1.0));

    std::vector<Dialogue> corpus2 = {
        doctor_doc("o1", "the cough is dry", "cough"),
        doctor_doc("o2", "a dry cough at night", "cough"),
        doctor_doc("o3", "the cough is wet", "cough"),
        doctor_doc("o4", "fever spikes at night", "cough"),
    };
    ResponseKnowledge reordered = ResponseKnowledge::build(corpus2, 4);
    std::vector<Dialogue> corpus1 = {
        doctor_doc("m1", "the cough is dry", "cough"),
        doctor_doc("m2", "the cough is wet", "cough"),
        doctor_doc("m3", "a dry cough at night", "cough"),
        doctor_doc("m4", "fever spikes at night", "cough"),
    };
    ResponseKnowledge original = ResponseKnowledge::build(corpus1, 4);
    CHECK(original.exemplars("cough") == reordered.exemplars("cough"));
}

TEST_CASE("exemplars come from doctor mention turns only") {
    ResponseKnowledge rk = ResponseKnowledge::build(fixture(), 3);
    // Patient-spoken pneumonia mentions never become exemplars.
    auto pneumonia = rk.exemplars("pneumonia");
    REQUIRE(pneumonia.size() == 1);
    CHECK(pneumonia[0].text == "A cough with fever can point to pneumonia.");
    // The doctor's denied mention in d3 still contributes an exemplar.
    CHECK(rk.exemplars("cough").size() == 1);
    CHECK(rk.exemplars("fever").empty());
}

TEST_CASE("response knowledge round trips through its file form") {
    ResponseKnowledge rk = ResponseKnowledge::build(fixture(), 3);
    std::string text = rk.save_string();
    CHECK(text == rk.save_string());
    ResponseKnowledge back = ResponseKnowledge::load_string(text);
    CHECK(back == rk);
    CHECK_THROWS(ResponseKnowledge::load_string("{"));
}

TEST_CASE("isolated plans bridge through the strongest intermediate") {
    KnowledgeGraph kg =
        KnowledgeGraph::build(parse_corpus_file(data_path("bridge_chain_corpus.jsonl")), 0.01);
    ResponseKnowledge rk = ResponseKnowledge::build(
        parse_corpus_file(data_path("bridge_chain_corpus.jsonl")), 3);  // all patient turns: empty
    CHECK(rk.by_entity().empty());

    HallucinationEvent ev;
    ev.turn = 1;
    ev.kind = HallucinationKind::Isolated;
    ev.subject = "pneumonia";
    ClarifyingPlan plan =
        plan_clarification_from_record(ev, kg, rk, {"bloating", "acid reflux"});
    REQUIRE(plan.bridges.size() == 1);
    CHECK(plan.bridges[0].label == "cough");
    CHECK(plan.bridges[0].score == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(plan.question == "Do you have a cough?");
    CHECK(plan.exemplars.empty());
    CHECK(plan.target == "pneumonia");
}

TEST_CASE("isolated plans fall back to a direct question without bridges") {
    KnowledgeGraph kg = KnowledgeGraph::build(fixture(), 0.01);
    ResponseKnowledge rk = ResponseKnowledge::build(fixture(), 3);
    HallucinationEvent ev;
    ev.turn = 2;
    ev.kind = HallucinationKind::Isolated;
    ev.subject = "bronchitis";
    ClarifyingPlan plan = plan_clarification_from_record(ev, kg, rk, {});
    CHECK(plan.bridges.empty());
    CHECK(plan.question ==
          "Can you tell me more about the bronchitis? [guidance: A lingering cough with "
          "fever suggests bronchitis.]");
}

TEST_CASE("denial plans reuse the subject's exemplars") {
    KnowledgeGraph kg = KnowledgeGraph::build(fixture(), 0.01);
    ResponseKnowledge rk = ResponseKnowledge::build(fixture(), 3);
    HallucinationEvent ev;
    ev.turn = 4;
    ev.kind = HallucinationKind::Denial;
    ev.subject = "pneumonia";
    ClarifyingPlan plan = plan_clarification_from_record(ev, kg, rk, {"cough"});
    REQUIRE(plan.exemplars.size() == 1);
    CHECK(plan.bridges.empty());
    CHECK(plan.question ==
          "Earlier we discussed pneumonia. To confirm: do you currently have pneumonia? "
          "[guidance: A cough with fever can point to pneumonia.]");
}

TEST_CASE("contradiction plans cite both turns and emphasized attributes") {
    KnowledgeGraph kg = KnowledgeGraph::build(fixture(), 0.01);
    ResponseKnowledge rk = ResponseKnowledge::build(fixture(), 3);
    HallucinationEvent ev;
    ev.turn = 5;
    ev.kind = HallucinationKind::Contradiction;
    ev.subject = "fever";
    ev.first_turn = 2;
    ev.second_turn = 5;
    ClarifyingPlan plan = plan_clarification_from_record(ev, kg, rk, {});
    CHECK(plan.emphasized_attributes ==
          std::vector<std::string>{"duration", "medical history"});
    CHECK(plan.exemplars.empty());
    CHECK(plan.question ==
          "Earlier (turn 2) you mentioned fever, later (turn 5) you denied it - which "
          "reflects your duration and medical history?");
    CHECK(plan.question == render_question(plan, TemplateSet::defaults()));
}

TEST_CASE("an empty template is an error") {
    KnowledgeGraph kg = KnowledgeGraph::build(fixture(), 0.01);
    ResponseKnowledge rk = ResponseKnowledge::build(fixture(), 3);
    HallucinationEvent ev;
    ev.kind = HallucinationKind::Denial;
    ev.subject = "pneumonia";
    ClarifyingPlan plan = plan_clarification_from_record(ev, kg, rk, {});
    TemplateSet broken;
    broken.denial = "";
    CHECK_THROWS(render_question(plan, broken));
}

TEST_CASE("template overrides load from a file") {
    std::string path = "tpl_override_test.json";
    {
        std::ofstream out(path);
        out << R"({"denial":"Still {target}?"})" << "\n";
    }
    TemplateSet tpl = TemplateSet::load_file(path);
    std::remove(path.c_str());
    CHECK(tpl.denial == "Still {target}?");
    CHECK(tpl.isolated_bridge == TemplateSet::defaults().isolated_bridge);
}
