#include "medgraph/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "medgraph/entropy.hpp"

namespace medgraph {

using entropy::kEps;

const char* to_string(HallucinationKind k) {
    switch (k) {
        case HallucinationKind::Isolated: return "isolated";
        case HallucinationKind::Denial: return "denial";
        case HallucinationKind::Contradiction: return "contradiction";
    }
    return "isolated";
}

const char* to_string(Agreement a) {
    switch (a) {
        case Agreement::Agree: return "agree";
        case Agreement::EntropyOnlyDiffers: return "entropy_only_differs";
        case Agreement::NotApplicable: return "not_applicable";
    }
    return "not_applicable";
}

HallucinationKind hallucination_kind_from(const std::string& s) {
    if (s == "isolated") return HallucinationKind::Isolated;
    if (s == "denial") return HallucinationKind::Denial;
    if (s == "contradiction") return HallucinationKind::Contradiction;
    throw std::invalid_argument("unknown hallucination kind \"" + s + "\"");
}

EntropyVerdict classify_by_entropy(double pre_h1, double post_h1, std::size_t n,
                                   const std::vector<double>& degrees,
                                   HallucinationKind connectivity_kind) {
    (void)pre_h1;  // evidence only; the thresholds need the post value
    if (n < 2) throw std::invalid_argument("classify_by_entropy: n < 2");
    if (degrees.size() != n + 1) {
        throw std::invalid_argument(
            "classify_by_entropy: expected survivor degrees plus removed degree");
    }
    const std::size_t removed_degree =
        static_cast<std::size_t>(std::lround(degrees.back()));
    std::vector<double> survivors(degrees.begin(), degrees.end() - 1);
    double sum_d = 0.0;
    for (double d : survivors) sum_d += d;
    const double vol_post = sum_d - static_cast<double>(removed_degree);
    const double vol_pre = sum_d + static_cast<double>(removed_degree);

    std::optional<double> ceiling = entropy::denial_upper_bound(survivors, vol_pre);
    if (auto iso = entropy::isolation_upper_bound(survivors, removed_degree)) {
        if (!ceiling || *iso > *ceiling) ceiling = iso;
    }

    // n survivors cannot stay connected on fewer than n-1 unit edges.
    if (vol_post < 2.0 * static_cast<double>(n - 1) - kEps) {
        return {HallucinationKind::Denial, true};
    }
    if (ceiling && post_h1 <= *ceiling + kEps) {
        return {HallucinationKind::Denial, true};
    }
    if (post_h1 >= entropy::connected_floor(n) - kEps) {
        return {HallucinationKind::Contradiction, true};
    }
    return {connectivity_kind, false};
}

namespace {

// Survivor component count within the recorded pre-removal component.
std::size_t survivor_components(const NodeChange& change, std::size_t removed_index) {
    const std::size_t m = change.component_labels.size();
    std::vector<bool> seen(m, false);
    seen[removed_index] = true;
    std::size_t count = 0;
    for (std::size_t start = 0; start < m; ++start) {
        if (seen[start]) continue;
        ++count;
        std::vector<std::size_t> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t nb : change.component_adj[cur]) {
                if (nb != removed_index && !seen[nb]) {
                    seen[nb] = true;
                    stack.push_back(nb);
                }
            }
        }
    }
    return count;
}

// Unit-weight entropies and degree list for the recorded component.
struct UnitRemoval {
    double pre_h1 = 0.0;
    double post_h1 = 0.0;
    std::vector<double> degrees;  // survivors first, removed node last
};

UnitRemoval unit_removal_view(const NodeChange& change, std::size_t removed_index) {
    UnitRemoval view;
    const std::size_t m = change.component_labels.size();
    std::vector<double> pre(m);
    for (std::size_t i = 0; i < m; ++i) {
        pre[i] = static_cast<double>(change.component_adj[i].size());
    }
    view.pre_h1 = entropy::component_entropy(pre);

    for (std::size_t i = 0; i < m; ++i) {
        if (i != removed_index) view.degrees.push_back(pre[i]);
    }
    view.degrees.push_back(pre[removed_index]);

    // Post-removal unit structural entropy over the survivor components.
    std::vector<bool> seen(m, false);
    seen[removed_index] = true;
    std::vector<std::vector<double>> comps;
    for (std::size_t start = 0; start < m; ++start) {
        if (seen[start]) continue;
        std::vector<std::size_t> stack{start};
        seen[start] = true;
        std::vector<double> degs;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            double d = 0.0;
            for (std::size_t nb : change.component_adj[cur]) {
                if (nb == removed_index) continue;
                d += 1.0;
                if (!seen[nb]) {
                    seen[nb] = true;
                    stack.push_back(nb);
                }
            }
            degs.push_back(d);
        }
        comps.push_back(std::move(degs));
    }
    view.post_h1 = entropy::structural_entropy(comps);
    return view;
}

struct HistoryFacts {
    std::optional<int> last_patient_mention;  // before the current turn
    std::optional<int> last_mention;          // any speaker, before current
    std::optional<Speaker> last_mention_speaker;
    std::optional<int> last_deny;  // before current
};

HistoryFacts history_before(const std::map<std::string, std::vector<StateEvent>>& history,
                            const std::string& label, int turn) {
    HistoryFacts facts;
    auto it = history.find(label);
    if (it == history.end()) return facts;
    for (const auto& ev : it->second) {
        if (ev.turn >= turn) break;
        if (ev.state == MentionState::Mention) {
            facts.last_mention = ev.turn;
            facts.last_mention_speaker = ev.speaker;
            if (ev.speaker == Speaker::Patient) facts.last_patient_mention = ev.turn;
        } else {
            facts.last_deny = ev.turn;
        }
    }
    return facts;
}

}  // namespace

std::vector<HallucinationEvent> observe(
    const GraphSnapshot& prev, const GraphSnapshot& next, const ChangeRecord& change,
    const std::map<std::string, std::vector<StateEvent>>& history) {
    if (next.turn != change.turn || prev.turn >= next.turn) {
        throw std::invalid_argument("observe: snapshots not consecutive with the change");
    }
    std::vector<HallucinationEvent> events;
    if (change.speaker != Speaker::Patient) return events;

    for (const auto& c : change.changes) {
        HallucinationEvent ev;
        ev.turn = change.turn;
        ev.subject = c.label;
        ev.delta_n = static_cast<long long>(c.n_after) - static_cast<long long>(c.n_before);
        ev.delta_h1 = c.h1_after - c.h1_before;
        ev.components_before = c.components_before;
        ev.components_after = c.components_after;
        ev.agreement = Agreement::NotApplicable;
        const HistoryFacts facts = history_before(history, c.label, change.turn);

        switch (c.kind) {
            case ChangeKind::AddNode: {
                if (c.insertion_degree <= kEps && c.n_before >= 1) {
                    ev.kind = HallucinationKind::Isolated;
                    events.push_back(ev);
                }
                break;
            }
            case ChangeKind::FlipToPresent: {
                // Mentioning an entity that stood negated contradicts the
                // recorded state no matter what the graph does.
                ev.kind = HallucinationKind::Contradiction;
                ev.first_turn = facts.last_deny;
                ev.second_turn = change.turn;
                events.push_back(ev);
                break;
            }
            case ChangeKind::RemoveNode: {
                const bool patient_said_it = facts.last_patient_mention.has_value();
                const bool doctor_probe_answer =
                    !patient_said_it && facts.last_mention_speaker.has_value() &&
                    *facts.last_mention_speaker == Speaker::Doctor &&
                    *facts.last_mention == change.turn - 1;
                if (doctor_probe_answer) break;  // normal triage answer

                const auto removed_it =
                    std::find(c.component_labels.begin(), c.component_labels.end(), c.label);
                const std::size_t removed_index = static_cast<std::size_t>(
                    removed_it - c.component_labels.begin());
                const std::size_t survivors = c.component_labels.size() - 1;
                const std::size_t parts = survivor_components(c, removed_index);
                const HallucinationKind graph_kind = parts >= 2
                                                         ? HallucinationKind::Denial
                                                         : HallucinationKind::Contradiction;
                ev.kind = graph_kind;
                if (patient_said_it) {
                    ev.kind = HallucinationKind::Contradiction;
                    ev.first_turn = facts.last_patient_mention;
                    ev.second_turn = change.turn;
                } else if (graph_kind == HallucinationKind::Contradiction) {
                    ev.first_turn = facts.last_mention;
                    ev.second_turn = change.turn;
                }
                if (survivors >= 2) {
                    const UnitRemoval view = unit_removal_view(c, removed_index);
                    const EntropyVerdict verdict =
                        classify_by_entropy(view.pre_h1, view.post_h1, survivors,
                                            view.degrees, graph_kind);
                    ev.agreement = (verdict.from_thresholds && verdict.kind == graph_kind)
                                       ? Agreement::Agree
                                       : Agreement::EntropyOnlyDiffers;
                }
                events.push_back(ev);
                break;
            }
            case ChangeKind::RecordNegated: {
                if (facts.last_patient_mention.has_value()) {
                    ev.kind = HallucinationKind::Contradiction;
                    ev.first_turn = facts.last_patient_mention;
                    ev.second_turn = change.turn;
                    events.push_back(ev);
                }
                break;
            }
            case ChangeKind::NoOp:
                break;
        }
    }
    return events;
}

std::string serialize_event(const HallucinationEvent& e) {
    nlohmann::json rec;
    rec["turn"] = e.turn;
    rec["kind"] = to_string(e.kind);
    rec["subject"] = e.subject;
    rec["delta_n"] = e.delta_n;
    rec["delta_h1"] = e.delta_h1;
    rec["components_before"] = e.components_before;
    rec["components_after"] = e.components_after;
    rec["agreement"] = to_string(e.agreement);
    if (e.first_turn) rec["first_turn"] = *e.first_turn;
    if (e.second_turn) rec["second_turn"] = *e.second_turn;
    return rec.dump();
}

}  // namespace medgraph
