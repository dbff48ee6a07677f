#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "medgraph/corpus.hpp"
#include "medgraph/detector.hpp"
#include "medgraph/knowledge_graph.hpp"
#include "medgraph/mitigation.hpp"
#include "medgraph/util.hpp"

namespace medgraph {

struct Injection {
    HallucinationKind kind = HallucinationKind::Isolated;
    std::string subject;
    int turn = 0;
    bool operator==(const Injection&) const = default;
};

struct PatientScenario {
    std::string id;
    std::set<std::string> truth;  // entities the simulated patient actually has
    Dialogue dialogue;            // base dialogue with the injected turn appended
    Injection injection;
    std::uint64_t seed = 0;
    bool operator==(const PatientScenario&) const = default;
};

std::string serialize_scenario(const PatientScenario& s);
PatientScenario parse_scenario_line(const std::string& line);
std::vector<PatientScenario> parse_scenarios_file(const std::string& path);

// Deterministic two-cluster training corpus: chain a1-...-a6, chain
// b1-...-b6, and a bridge entity m1 linked to a4 and b2. Two dialogues per
// chain edge (one per mention order), each with a doctor turn usable as an
// exemplar response.
std::vector<Dialogue> make_synthetic_corpus();

// Seeded walk along one cluster chain, 3-5 turns, speakers alternating
// patient/doctor, one fresh entity per turn.
Dialogue make_base_dialogue(DetRng& rng, std::size_t index);

// Appends one hallucinated patient turn to the base dialogue:
//   Isolated      - mention of a graph entity unmentioned in the base and
//                   without any edge to a base entity (subject not in truth);
//   Denial        - deny of a doctor-introduced cut vertex (introduced at
//                   least two turns earlier, never patient-mentioned);
//   Contradiction - deny of a patient-mentioned non-cut entity.
// The truth set is the base dialogue's mentioned entities. Deterministic
// under seed; throws when no admissible subject exists.
PatientScenario inject_hallucination(const Dialogue& base, HallucinationKind kind,
                                     const KnowledgeGraph& kg, std::uint64_t seed);

// count seeded scenarios over seeded base walks, kinds sampled uniformly.
std::vector<PatientScenario> generate_scenarios(const KnowledgeGraph& kg,
                                                std::size_t count, std::uint64_t seed);

// Truth-set oracle: mentions the target if the scenario patient has it,
// denies it otherwise.
Utterance scripted_patient(const PatientScenario& scenario, const std::string& target);

struct TranscriptEntry {
    Speaker speaker = Speaker::Patient;
    std::string text;
    std::vector<EntityMention> mentions;
    bool operator==(const TranscriptEntry&) const = default;
};
std::string serialize_transcript_entry(const TranscriptEntry& t);

struct SessionMetrics {
    double delta_ge = 0.0;  // structural entropy: final minus at first event
    bool success = false;
    std::size_t clarifying_turns = 0;
    std::size_t events = 0;
    std::vector<TranscriptEntry> transcript;
};

// Replays the scenario dialogue through a session with detection; with
// mitigation on, each event triggers a clarifying exchange (planned
// question, scripted patient answer, repair): isolated subjects are
// connected via a confirmed bridge or excluded after denial, denied
// subjects are re-asked and restored or upheld, contradictions are
// reconciled to the truth-set state. A resolved subject never re-triggers.
// With mitigation off the events are only recorded. Throws if
// max_clarifying_turns < 1. The seed is echoed into outputs by callers;
// the replay itself is deterministic.
SessionMetrics simulate_session(const KnowledgeGraph& kg, const ResponseKnowledge& rk,
                                const PatientScenario& scenario,
                                std::size_t max_clarifying_turns, std::uint64_t seed,
                                bool mitigate = true,
                                const TemplateSet& templates = TemplateSet::defaults());

struct PrfScores {
    double p = 0.0, r = 0.0, f1 = 0.0;
};
struct PrfReport {
    PrfScores overall;
    std::map<EntityClass, PrfScores> per_class;
};

// Micro-averaged precision/recall/F1 over aligned turn lists; labels are
// matched per turn, per-class scores filter each side by its annotated
// class. Empty turns contribute nothing; zero denominators give 0 by
// convention. Throws on length mismatch.
PrfReport entity_prf(const std::vector<std::vector<EntityMention>>& predicted,
                     const std::vector<std::vector<EntityMention>>& gold);

struct AggregateMetrics {
    double mean_delta_ge = 0.0;
    double success_rate = 0.0;
};
AggregateMetrics aggregate_metrics(const std::vector<SessionMetrics>& sessions);

}  // namespace medgraph
