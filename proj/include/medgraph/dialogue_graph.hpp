#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "medgraph/corpus.hpp"
#include "medgraph/knowledge_graph.hpp"

namespace medgraph {

struct GraphSnapshot {
    int turn = -1;  // -1 for the pre-dialogue snapshot
    std::size_t n = 0;
    double vol = 0.0;
    double h1 = 0.0;
    // Sorted labels per component, components sorted by first label; covers
    // every present node including isolated ones.
    std::vector<std::vector<std::string>> components;
};

enum class ChangeKind {
    AddNode,        // first appearance, added as present
    FlipToPresent,  // was negated, mentioned again
    RemoveNode,     // was present, denied
    RecordNegated,  // denied while absent or already negated
    NoOp,           // mentioned while already present
};

struct NodeChange {
    ChangeKind kind = ChangeKind::NoOp;
    std::string label;
    double insertion_degree = 0.0;  // weighted degree at insertion (adds/flips)
    std::size_t n_before = 0, n_after = 0;
    double h1_before = 0.0, h1_after = 0.0;
    std::size_t components_before = 0, components_after = 0;
    // Removals carry the affected pre-removal component so the detector can
    // reason about it without replaying: sorted labels plus the unit-weight
    // adjacency (indices into component_labels).
    std::vector<std::string> component_labels;
    std::vector<std::vector<std::size_t>> component_adj;
};

struct ChangeRecord {
    int turn = 0;
    Speaker speaker = Speaker::Patient;
    std::vector<NodeChange> changes;
    std::vector<std::string> unknown_labels;  // skipped, not in the backing graph
};

struct StateEvent {
    int turn = 0;
    Speaker speaker = Speaker::Patient;
    MentionState state = MentionState::Mention;
};

// Per-session dynamic entity graph: a subgraph of the backing knowledge
// graph over currently present entities, with per-turn snapshots and a full
// entity state history. Single-writer; distinct sessions are independent.
class DialogueSession {
public:
    explicit DialogueSession(const KnowledgeGraph& kg);

    // Applies mentions in order: a mention makes the entity present and
    // pulls in every knowledge-graph edge (either direction) to present
    // nodes; a deny removes a present entity (and marks it negated) or just
    // records the negated state. Unknown labels are skipped and reported in
    // the change record. Appends one snapshot.
    std::pair<GraphSnapshot, ChangeRecord> apply_utterance(const Utterance& u);

    const KnowledgeGraph& kg() const { return *kg_; }
    const std::vector<GraphSnapshot>& snapshots() const { return snapshots_; }
    const GraphSnapshot& current() const { return snapshots_.back(); }
    const std::map<std::string, std::vector<StateEvent>>& state_history() const {
        return history_;
    }

    bool is_present(const std::string& label) const;
    bool is_negated(const std::string& label) const;
    // Weighted degree (sum of incident edge weights, both directions).
    double degree(const std::string& label) const;
    std::vector<std::vector<std::string>> components() const;

private:
    GraphSnapshot make_snapshot(int turn) const;

    const KnowledgeGraph* kg_;
    int next_turn_ = 0;
    // Present-node adjacency; edge weight = sum of both directed knowledge
    // graph weights between the endpoints.
    std::map<std::string, std::map<std::string, double>> adj_;
    std::map<std::string, bool> negated_;  // negated entities not in adj_
    std::map<std::string, std::vector<StateEvent>> history_;
    std::vector<GraphSnapshot> snapshots_;
};

// Line-delimited snapshot export: {"components","h1","n","turn","vol"}.
std::string serialize_snapshot(const GraphSnapshot& s);

}  // namespace medgraph
