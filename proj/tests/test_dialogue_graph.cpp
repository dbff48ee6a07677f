#include <doctest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "medgraph/dialogue_graph.hpp"
#include "medgraph/entropy.hpp"
#include "medgraph/harness.hpp"

#include "helpers.hpp"

using namespace medgraph;

namespace {

KnowledgeGraph synthetic_kg() {
    return KnowledgeGraph::build(make_synthetic_corpus(), 0.01);
}

Utterance mention(Speaker sp, const std::string& label) {
    return {sp, "about " + label, {{label, EntityClass::Symptom, MentionState::Mention}}};
}

Utterance deny(Speaker sp, const std::string& label) {
    return {sp, "not " + label, {{label, EntityClass::Symptom, MentionState::Deny}}};
}

// From-scratch recomputation of the session entropy: present labels, edge
// weight = sum of both directed knowledge graph weights, components by DFS.
double batch_h1(const KnowledgeGraph& kg, const std::set<std::string>& present) {
    std::map<std::string, double> degree;
    for (const std::string& u : present) degree[u] = 0.0;
    for (const std::string& u : present)
        for (const std::string& v : present) {
            if (u >= v) continue;
            double w = 0.0;
            if (auto x = kg.edge_weight(u, v)) w += *x;
            if (auto x = kg.edge_weight(v, u)) w += *x;
            if (w > 0.0) {
                degree[u] += w;
                degree[v] += w;
            }
        }
    auto connected = [&](const std::string& u, const std::string& v) {
        return kg.edge_weight(u, v) || kg.edge_weight(v, u);
    };
    std::set<std::string> seen;
    std::vector<std::vector<double>> comps;
    for (const std::string& root : present) {
        if (seen.count(root)) continue;
        std::vector<std::string> stack{root};
        std::vector<double> degs;
        seen.insert(root);
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            degs.push_back(degree[cur]);
            for (const std::string& other : present)
                if (!seen.count(other) && connected(cur, other)) {
                    seen.insert(other);
                    stack.push_back(other);
                }
        }
        comps.push_back(degs);
    }
    return entropy::structural_entropy(comps);
}

}  // namespace

TEST_CASE("a fresh session starts empty") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    REQUIRE(session.snapshots().size() == 1);
    CHECK(session.current().turn == -1);
    CHECK(session.current().n == 0);
    CHECK(session.current().h1 == 0.0);
    CHECK(session.current().components.empty());
}

TEST_CASE("mentions pull in knowledge graph edges with summed weights") {
    KnowledgeGraph kg =
        KnowledgeGraph::build(parse_corpus_file(data_path("fixture_corpus.jsonl")), 0.01);
    DialogueSession session(kg);
    Utterance u{Speaker::Patient,
                "cough and fever",
                {{"cough", EntityClass::Symptom, MentionState::Mention},
                 {"fever", EntityClass::Symptom, MentionState::Mention}}};
    auto [snap, rec] = session.apply_utterance(u);
    CHECK(snap.n == 2);
    CHECK(snap.h1 == doctest::Approx(1.0).epsilon(1e-15));  // one weighted edge
    CHECK(session.degree("fever") == doctest::Approx(1.0 + 1.0 / 3).epsilon(1e-12));
    REQUIRE(rec.changes.size() == 2);
    CHECK(rec.changes[0].kind == ChangeKind::AddNode);
    CHECK(rec.changes[1].kind == ChangeKind::AddNode);
    CHECK(rec.changes[1].insertion_degree == doctest::Approx(1.0 + 1.0 / 3).epsilon(1e-12));
}

TEST_CASE("session entropy always matches a from-scratch recomputation") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    std::set<std::string> present;
    auto check_after = [&](const Utterance& u) {
        auto [snap, rec] = session.apply_utterance(u);
        for (const NodeChange& c : rec.changes) {
            if (c.kind == ChangeKind::AddNode || c.kind == ChangeKind::FlipToPresent)
                present.insert(c.label);
            if (c.kind == ChangeKind::RemoveNode) present.erase(c.label);
        }
        CHECK(snap.h1 == doctest::Approx(batch_h1(kg, present)).epsilon(1e-9));
    };
    check_after(mention(Speaker::Patient, "a1"));
    check_after(mention(Speaker::Doctor, "a2"));
    check_after(mention(Speaker::Patient, "a3"));
    check_after(mention(Speaker::Patient, "m1"));
    check_after(mention(Speaker::Doctor, "b2"));
    check_after(deny(Speaker::Patient, "a2"));
    check_after(mention(Speaker::Patient, "a2"));
    check_after(deny(Speaker::Patient, "m1"));
    check_after(mention(Speaker::Patient, "b1"));
}

TEST_CASE("replaying the same utterances gives identical snapshots") {
    KnowledgeGraph kg = synthetic_kg();
    std::vector<Utterance> script = {mention(Speaker::Patient, "a1"),
                                     mention(Speaker::Doctor, "a2"),
                                     mention(Speaker::Patient, "a3"),
                                     deny(Speaker::Patient, "a2")};
    DialogueSession s1(kg), s2(kg);
    for (const Utterance& u : script) {
        s1.apply_utterance(u);
        s2.apply_utterance(u);
    }
    REQUIRE(s1.snapshots().size() == s2.snapshots().size());
    for (std::size_t i = 0; i < s1.snapshots().size(); ++i)
        CHECK(serialize_snapshot(s1.snapshots()[i]) == serialize_snapshot(s2.snapshots()[i]));
}

TEST_CASE("removing and re-adding a node restores the entropy") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    session.apply_utterance(mention(Speaker::Patient, "a1"));
    session.apply_utterance(mention(Speaker::Patient, "a2"));
    session.apply_utterance(mention(Speaker::Patient, "a3"));
    double before = session.current().h1;
    // Weighted path: edges 0.75 and 0.5, degrees (0.75, 1.25, 0.5) over 2.5.
    CHECK(before == doctest::Approx(1.4854752972273343).epsilon(1e-12));

    session.apply_utterance(deny(Speaker::Patient, "a2"));
    CHECK(session.current().h1 == doctest::Approx(0.0));  // two isolated survivors
    CHECK(session.current().components.size() == 2);
    CHECK(session.is_negated("a2"));
    CHECK_FALSE(session.is_present("a2"));

    session.apply_utterance(mention(Speaker::Patient, "a2"));
    CHECK(session.current().h1 == doctest::Approx(before).epsilon(1e-12));
    CHECK(session.current().components.size() == 1);
    CHECK_FALSE(session.is_negated("a2"));
}

TEST_CASE("removals capture the affected component before surgery") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    session.apply_utterance(mention(Speaker::Patient, "a1"));
    session.apply_utterance(mention(Speaker::Patient, "a2"));
    session.apply_utterance(mention(Speaker::Patient, "a3"));
    auto [snap, rec] = session.apply_utterance(deny(Speaker::Patient, "a2"));
    REQUIRE(rec.changes.size() == 1);
    const NodeChange& c = rec.changes[0];
    CHECK(c.kind == ChangeKind::RemoveNode);
    CHECK(c.component_labels == std::vector<std::string>{"a1", "a2", "a3"});
    REQUIRE(c.component_adj.size() == 3);
    CHECK(c.component_adj[0] == std::vector<std::size_t>{1});       // a1 - a2
    CHECK(c.component_adj[1] == std::vector<std::size_t>{0, 2});    // a2 - a1, a3
    CHECK(c.components_before == 1);
    CHECK(c.components_after == 2);
    CHECK(c.n_before == 3);
    CHECK(c.n_after == 2);
}

TEST_CASE("denying an absent entity only records the negation") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    auto [snap, rec] = session.apply_utterance(deny(Speaker::Patient, "a1"));
    REQUIRE(rec.changes.size() == 1);
    CHECK(rec.changes[0].kind == ChangeKind::RecordNegated);
    CHECK(snap.n == 0);
    CHECK(session.is_negated("a1"));

    auto [snap2, rec2] = session.apply_utterance(mention(Speaker::Patient, "a1"));
    CHECK(rec2.changes[0].kind == ChangeKind::FlipToPresent);
    CHECK(snap2.n == 1);
}

TEST_CASE("mentioning a present entity is a no-op") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    session.apply_utterance(mention(Speaker::Patient, "a1"));
    auto [snap, rec] = session.apply_utterance(mention(Speaker::Patient, "a1"));
    CHECK(rec.changes[0].kind == ChangeKind::NoOp);
    CHECK(snap.n == 1);
}

TEST_CASE("labels outside the backing graph are skipped and reported") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    auto [snap, rec] = session.apply_utterance(mention(Speaker::Patient, "plasma tv"));
    CHECK(snap.n == 0);
    CHECK(rec.changes.empty());
    REQUIRE(rec.unknown_labels.size() == 1);
    CHECK(rec.unknown_labels[0] == "plasma tv");
}

TEST_CASE("the state history records every mention and deny in order") {
    KnowledgeGraph kg = synthetic_kg();
    DialogueSession session(kg);
    session.apply_utterance(mention(Speaker::Patient, "a1"));
    session.apply_utterance(deny(Speaker::Patient, "a1"));
    session.apply_utterance(mention(Speaker::Doctor, "a1"));
    const auto& hist = session.state_history().at("a1");
    REQUIRE(hist.size() == 3);
    CHECK(hist[0].state == MentionState::Mention);
    CHECK(hist[0].turn == 0);
    CHECK(hist[1].state == MentionState::Deny);
    CHECK(hist[2].speaker == Speaker::Doctor);
    CHECK(hist[2].turn == 2);
}
