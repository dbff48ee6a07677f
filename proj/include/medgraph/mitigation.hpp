#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "medgraph/corpus.hpp"
#include "medgraph/detector.hpp"
#include "medgraph/knowledge_graph.hpp"

namespace medgraph {

// Sparse unit vector: (token, weight) pairs sorted by token.
using SparseVec = std::vector<std::pair<std::string, double>>;

// ASCII word characters form lowercased tokens; CJK codepoints tokenize one
// character at a time; other non-ASCII letters stick to the current word.
std::vector<std::string> tokenize(const std::string& text);

// TF-IDF over a document set: idf = ln((1+N)/(1+df)) + 1, tf = raw count,
// vectors L2-normalized. Tokens unseen at fit time are dropped.
class TfIdfModel {
public:
    static TfIdfModel fit(const std::vector<std::string>& docs);
    // Throws on empty text; returns an empty vector when no token is
    // covered by the fitted vocabulary (flagging zero coverage).
    SparseVec transform(const std::string& text) const;
    std::size_t vocabulary_size() const { return idf_.size(); }

private:
    std::map<std::string, double> idf_;
};

double cosine(const SparseVec& a, const SparseVec& b);

struct ResponseExemplar {
    std::string text;
    double score = 0.0;  // mean similarity to the other responses
    bool operator==(const ResponseExemplar&) const = default;
};

// Per-entity exemplar doctor responses: for each entity, the doctor
// utterances annotated with it, ranked by mean pairwise cosine (a single
// response scores 1.0), top k kept. Immutable after build.
class ResponseKnowledge {
public:
    static ResponseKnowledge build(const std::vector<Dialogue>& dialogues, std::size_t k);

    std::size_t k() const { return k_; }
    const std::map<std::string, std::vector<ResponseExemplar>>& by_entity() const {
        return by_entity_;
    }
    std::vector<ResponseExemplar> exemplars(const std::string& label) const;

    std::string save_string() const;
    void save_file(const std::string& path) const;
    static ResponseKnowledge load_string(const std::string& text);
    static ResponseKnowledge load_file(const std::string& path);

    bool operator==(const ResponseKnowledge&) const = default;

private:
    std::size_t k_ = 3;
    std::map<std::string, std::vector<ResponseExemplar>> by_entity_;
};

// Per-kind question templates with {target}/{bridge}/{turn_i}/{turn_j}/
// {attribute} slots.
struct TemplateSet {
    std::string isolated_bridge = "Do you have a {bridge}?";
    std::string isolated_direct = "Can you tell me more about the {target}?";
    std::string denial =
        "Earlier we discussed {target}. To confirm: do you currently have {target}?";
    std::string contradiction =
        "Earlier (turn {turn_i}) you mentioned {target}, later (turn {turn_j}) you denied "
        "it - which reflects your {attribute}?";

    static TemplateSet defaults() { return {}; }
    static TemplateSet load_file(const std::string& path);
};

struct ClarifyingPlan {
    HallucinationEvent event;
    std::string target;
    std::vector<Bridge> bridges;               // isolated events only
    std::vector<ResponseExemplar> exemplars;
    std::vector<std::string> emphasized_attributes;  // contradictions only
    std::string question;
};

// Builds the clarification plan for an event: isolated subjects get bridge
// candidates between the present anchors and the subject (question about
// the top bridge when one exists, else about the subject); denials get the
// subject's exemplars and a re-inquiry; contradictions cite the two
// conflicting turns and emphasize duration and medical history.
ClarifyingPlan plan_clarification(const HallucinationEvent& event, const KnowledgeGraph& kg,
                                  const ResponseKnowledge& rk, const DialogueSession& g,
                                  const TemplateSet& templates = TemplateSet::defaults());

// Same planning from a detached event record (no live session): anchors as
// recorded at event time, conflict turns from the event itself.
ClarifyingPlan plan_clarification_from_record(
    const HallucinationEvent& event, const KnowledgeGraph& kg, const ResponseKnowledge& rk,
    const std::vector<std::string>& anchors,
    const TemplateSet& templates = TemplateSet::defaults());

// Deterministic template fill; the top exemplar is appended as clearly
// delimited guidance when present. Throws when the kind's template is empty.
std::string render_question(const ClarifyingPlan& plan, const TemplateSet& templates);

}  // namespace medgraph
