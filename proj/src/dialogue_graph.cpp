#include "medgraph/dialogue_graph.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "medgraph/entropy.hpp"

namespace medgraph {

DialogueSession::DialogueSession(const KnowledgeGraph& kg) : kg_(&kg) {
    snapshots_.push_back(make_snapshot(-1));
}

bool DialogueSession::is_present(const std::string& label) const {
    return adj_.count(label) != 0;
}

bool DialogueSession::is_negated(const std::string& label) const {
    auto it = negated_.find(label);
    return it != negated_.end() && it->second;
}

double DialogueSession::degree(const std::string& label) const {
    auto it = adj_.find(label);
    if (it == adj_.end()) return 0.0;
    double d = 0.0;
    for (const auto& [nb, w] : it->second) d += w;
    return d;
}

std::vector<std::vector<std::string>> DialogueSession::components() const {
    std::vector<std::vector<std::string>> out;
    std::set<std::string> seen;
    for (const auto& [label, nbs] : adj_) {
        if (seen.count(label) != 0) continue;
        std::vector<std::string> comp;
        std::vector<std::string> stack{label};
        seen.insert(label);
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            comp.push_back(cur);
            for (const auto& [nb, w] : adj_.at(cur)) {
                if (seen.insert(nb).second) stack.push_back(nb);
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

GraphSnapshot DialogueSession::make_snapshot(int turn) const {
    GraphSnapshot s;
    s.turn = turn;
    s.n = adj_.size();
    s.components = components();
    std::vector<std::vector<double>> degree_sets;
    degree_sets.reserve(s.components.size());
    for (const auto& comp : s.components) {
        std::vector<double> degs;
        degs.reserve(comp.size());
        for (const auto& label : comp) {
            const double d = degree(label);
            s.vol += d;
            degs.push_back(d);
        }
        degree_sets.push_back(std::move(degs));
    }
    s.h1 = entropy::structural_entropy(degree_sets);
    return s;
}

std::pair<GraphSnapshot, ChangeRecord> DialogueSession::apply_utterance(const Utterance& u) {
    ChangeRecord record;
    record.turn = next_turn_++;
    record.speaker = u.speaker;

    for (const auto& m : u.mentions) {
        if (!kg_->has_entity(m.label)) {
            record.unknown_labels.push_back(m.label);
            continue;
        }
        NodeChange change;
        change.label = m.label;
        const GraphSnapshot before = make_snapshot(record.turn);
        change.n_before = before.n;
        change.h1_before = before.h1;
        change.components_before = before.components.size();

        if (m.state == MentionState::Mention) {
            if (is_present(m.label)) {
                change.kind = ChangeKind::NoOp;
            } else {
                change.kind = is_negated(m.label) ? ChangeKind::FlipToPresent
                                                  : ChangeKind::AddNode;
                auto& row = adj_[m.label];
                for (auto& [other, others_row] : adj_) {
                    if (other == m.label) continue;
                    double w = 0.0;
                    if (auto ow = kg_->edge_weight(m.label, other)) w += *ow;
                    if (auto iw = kg_->edge_weight(other, m.label)) w += *iw;
                    if (w > 0.0) {
                        row[other] = w;
                        others_row[m.label] = w;
                        change.insertion_degree += w;
                    }
                }
                negated_[m.label] = false;
            }
            history_[m.label].push_back({record.turn, u.speaker, MentionState::Mention});
        } else {  // Deny
            if (is_present(m.label)) {
                change.kind = ChangeKind::RemoveNode;
                // Capture the affected component before the removal.
                for (const auto& comp : components()) {
                    if (std::find(comp.begin(), comp.end(), m.label) != comp.end()) {
                        change.component_labels = comp;
                        break;
                    }
                }
                std::map<std::string, std::size_t> index;
                for (std::size_t i = 0; i < change.component_labels.size(); ++i) {
                    index[change.component_labels[i]] = i;
                }
                change.component_adj.assign(change.component_labels.size(), {});
                for (std::size_t i = 0; i < change.component_labels.size(); ++i) {
                    for (const auto& [nb, w] : adj_.at(change.component_labels[i])) {
                        change.component_adj[i].push_back(index.at(nb));
                    }
                }
                for (const auto& [nb, w] : adj_.at(m.label)) {
                    adj_.at(nb).erase(m.label);
                }
                adj_.erase(m.label);
            } else {
                change.kind = ChangeKind::RecordNegated;
            }
            negated_[m.label] = true;
            history_[m.label].push_back({record.turn, u.speaker, MentionState::Deny});
        }

        const GraphSnapshot after = make_snapshot(record.turn);
        change.n_after = after.n;
        change.h1_after = after.h1;
        change.components_after = after.components.size();
        record.changes.push_back(std::move(change));
    }

    snapshots_.push_back(make_snapshot(record.turn));
    return {snapshots_.back(), record};
}

std::string serialize_snapshot(const GraphSnapshot& s) {
    nlohmann::json rec;
    rec["turn"] = s.turn;
    rec["n"] = s.n;
    rec["vol"] = s.vol;
    rec["h1"] = s.h1;
    rec["components"] = s.components;
    return rec.dump();
}

}  // namespace medgraph
