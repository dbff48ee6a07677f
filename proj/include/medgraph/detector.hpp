#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medgraph/dialogue_graph.hpp"

namespace medgraph {

enum class HallucinationKind { Isolated, Denial, Contradiction };
enum class Agreement { Agree, EntropyOnlyDiffers, NotApplicable };

const char* to_string(HallucinationKind k);
const char* to_string(Agreement a);
HallucinationKind hallucination_kind_from(const std::string& s);

struct HallucinationEvent {
    int turn = 0;
    HallucinationKind kind = HallucinationKind::Isolated;
    std::string subject;
    // Evidence from the triggering change.
    long long delta_n = 0;
    double delta_h1 = 0.0;
    std::size_t components_before = 0, components_after = 0;
    Agreement agreement = Agreement::NotApplicable;
    // For contradictions grounded in the state history: the earlier
    // conflicting turn and the current one.
    std::optional<int> first_turn, second_turn;
};

// Entropy-threshold classification of a node removal on a unit-weight
// graph. degrees carries the affected component's pre-removal unit degrees
// with the REMOVED node's degree last (n + 1 entries, n = survivor count).
//
// Decision: the remainder is a Denial (split) when its volume is below the
// spanning-tree minimum 2(n-1) or its entropy is at or below the split
// ceiling (the larger of denial_upper_bound and isolation_upper_bound);
// otherwise a Contradiction when its entropy reaches connected_floor(n).
// If neither test is conclusive the connectivity verdict is returned with
// from_thresholds = false so callers can flag the disagreement.
struct EntropyVerdict {
    HallucinationKind kind = HallucinationKind::Denial;
    bool from_thresholds = false;
};
EntropyVerdict classify_by_entropy(double pre_h1, double post_h1, std::size_t n,
                                   const std::vector<double>& degrees,
                                   HallucinationKind connectivity_kind);

// Emits hallucination events for one applied utterance. Only patient turns
// produce events:
//   - a brand-new entity inserted with degree 0 while the graph was
//     non-empty is Isolated;
//   - a removal whose component survivors stay connected (or vanish) is a
//     Contradiction, a removal that splits them is a Denial;
//   - state-history rule: mentioning a currently-negated entity, or denying
//     an entity the patient previously mentioned, is a Contradiction
//     regardless of graph effect;
//   - a next-turn patient deny of a doctor-introduced entity is a normal
//     triage answer and exempt, unless the patient had mentioned it before.
// agreement cross-checks the connectivity verdict against the
// entropy-threshold classifier on removals with >= 2 survivors and is
// NotApplicable elsewhere. Throws if the snapshots are not consecutive or
// not produced by the given change.
std::vector<HallucinationEvent> observe(
    const GraphSnapshot& prev, const GraphSnapshot& next, const ChangeRecord& change,
    const std::map<std::string, std::vector<StateEvent>>& history);

// Line-delimited event export (alphabetical keys).
std::string serialize_event(const HallucinationEvent& e);

}  // namespace medgraph
