#include "medgraph/harness.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "medgraph/dialogue_graph.hpp"

namespace medgraph {

using nlohmann::json;

std::string serialize_scenario(const PatientScenario& s) {
    json j;
    j["dialogue"] = json::parse(serialize_dialogue(s.dialogue));
    j["id"] = s.id;
    j["injection"] = {{"kind", to_string(s.injection.kind)},
                      {"subject", s.injection.subject},
                      {"turn", s.injection.turn}};
    j["seed"] = s.seed;
    j["truth"] = std::vector<std::string>(s.truth.begin(), s.truth.end());
    return j.dump();
}

PatientScenario parse_scenario_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw CorpusError(std::string("bad scenario json: ") + e.what());
    }
    if (!j.is_object()) throw CorpusError("scenario line is not an object");
    try {
        PatientScenario s;
        s.id = j.at("id").get<std::string>();
        s.dialogue = parse_dialogue_line(j.at("dialogue").dump());
        const json& inj = j.at("injection");
        s.injection.kind = hallucination_kind_from(inj.at("kind").get<std::string>());
        s.injection.subject = canonical_label(inj.at("subject").get<std::string>());
        s.injection.turn = inj.at("turn").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
        for (const json& t : j.at("truth")) s.truth.insert(canonical_label(t.get<std::string>()));
        if (s.injection.turn < 0 ||
            static_cast<std::size_t>(s.injection.turn) >= s.dialogue.turns.size())
            throw CorpusError("injection turn out of range");
        return s;
    } catch (const json::exception& e) {
        throw CorpusError(std::string("bad scenario field: ") + e.what());
    }
}

std::vector<PatientScenario> parse_scenarios_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open " + path);
    std::vector<PatientScenario> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(parse_scenario_line(line));
        } catch (const CorpusError& e) {
            throw CorpusError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

namespace {

const std::vector<std::string>& chain_a() {
    static const std::vector<std::string> c = {"a1", "a2", "a3", "a4", "a5", "a6"};
    return c;
}
const std::vector<std::string>& chain_b() {
    static const std::vector<std::string> c = {"b1", "b2", "b3", "b4", "b5", "b6"};
    return c;
}

EntityClass synthetic_class(const std::string& label) {
    if (label == "m1") return EntityClass::Examination;
    return label[0] == 'a' ? EntityClass::Symptom : EntityClass::Disease;
}

Dialogue edge_dialogue(const std::string& x, const std::string& y) {
    Dialogue d;
    d.id = "syn-" + x + "-" + y;
    Utterance p1{Speaker::Patient, "I have " + x + ".",
                 {{x, synthetic_class(x), MentionState::Mention}}};
    Utterance doc{Speaker::Doctor,
                  "Patients with " + x + " often also report " + y + ". Do you have " + y + "?",
                  {{y, synthetic_class(y), MentionState::Mention}}};
    Utterance p2{Speaker::Patient, "Yes, I also have " + y + ".",
                 {{y, synthetic_class(y), MentionState::Mention}}};
    d.turns = {p1, doc, p2};
    return d;
}

}  // namespace

std::vector<Dialogue> make_synthetic_corpus() {
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i + 1 < chain_a().size(); ++i)
        edges.emplace_back(chain_a()[i], chain_a()[i + 1]);
    for (std::size_t i = 0; i + 1 < chain_b().size(); ++i)
        edges.emplace_back(chain_b()[i], chain_b()[i + 1]);
    edges.emplace_back("a4", "m1");
    edges.emplace_back("m1", "b2");
    std::vector<Dialogue> out;
    for (const auto& [x, y] : edges) {
        out.push_back(edge_dialogue(x, y));
        out.push_back(edge_dialogue(y, x));
    }
    return out;
}

Dialogue make_base_dialogue(DetRng& rng, std::size_t index) {
    const auto& chain = rng.next_below(2) == 0 ? chain_a() : chain_b();
    std::size_t len = 3 + rng.next_below(3);
    std::size_t start = rng.next_below(chain.size() - len + 1);
    bool backward = rng.next_below(2) == 1;
    Dialogue d;
    d.id = "base-" + std::to_string(index);
    for (std::size_t i = 0; i < len; ++i) {
        const std::string& e = backward ? chain[start + len - 1 - i] : chain[start + i];
        Utterance u;
        u.speaker = i % 2 == 0 ? Speaker::Patient : Speaker::Doctor;
        u.text = u.speaker == Speaker::Patient ? "I have " + e + "."
                                               : "Do you also have " + e + "?";
        u.mentions = {{e, synthetic_class(e), MentionState::Mention}};
        d.turns.push_back(std::move(u));
    }
    return d;
}

namespace {

struct BaseFacts {
    std::set<std::string> mentioned;          // any speaker, mention state
    std::set<std::string> patient_mentioned;  // mention state by the patient
    std::map<std::string, int> last_mention;
    std::map<std::string, Speaker> first_speaker;
};

BaseFacts scan_base(const Dialogue& base) {
    BaseFacts f;
    for (std::size_t t = 0; t < base.turns.size(); ++t) {
        const Utterance& u = base.turns[t];
        for (const EntityMention& m : u.mentions) {
            if (m.state != MentionState::Mention) continue;
            if (f.mentioned.insert(m.label).second) f.first_speaker[m.label] = u.speaker;
            if (u.speaker == Speaker::Patient) f.patient_mentioned.insert(m.label);
            f.last_mention[m.label] = static_cast<int>(t);
        }
    }
    return f;
}

// Whether removing label disconnects its component of the session graph.
bool is_cut_vertex(const DialogueSession& session, const std::string& label) {
    for (const auto& comp : session.components()) {
        if (std::find(comp.begin(), comp.end(), label) == comp.end()) continue;
        if (comp.size() <= 2) return false;
        std::set<std::string> members(comp.begin(), comp.end());
        std::set<std::string> seen;
        std::deque<std::string> queue;
        for (const std::string& m : comp)
            if (m != label) {
                queue.push_back(m);
                seen.insert(m);
                break;
            }
        while (!queue.empty()) {
            std::string cur = queue.front();
            queue.pop_front();
            for (const auto& nb : session.kg().undirected_neighbors(cur)) {
                if (nb.label == label || !members.count(nb.label)) continue;
                if (!session.is_present(nb.label)) continue;
                if (seen.insert(nb.label).second) queue.push_back(nb.label);
            }
        }
        return seen.size() != comp.size() - 1;
    }
    return false;
}

}  // namespace

PatientScenario inject_hallucination(const Dialogue& base, HallucinationKind kind,
                                     const KnowledgeGraph& kg, std::uint64_t seed) {
    if (base.turns.size() < 2)
        throw std::runtime_error("base dialogue too short to inject into");
    BaseFacts facts = scan_base(base);
    if (facts.mentioned.empty()) throw std::runtime_error("base dialogue has no mentions");

    DialogueSession session(kg);
    for (const Utterance& u : base.turns) session.apply_utterance(u);

    int deny_turn = static_cast<int>(base.turns.size());
    std::vector<std::string> candidates;
    switch (kind) {
        case HallucinationKind::Isolated:
            for (const auto& [label, ent] : kg.entities()) {
                (void)ent;
                if (facts.mentioned.count(label)) continue;
                bool linked = false;
                for (const std::string& m : facts.mentioned)
                    if (kg.edge_weight(label, m) || kg.edge_weight(m, label)) {
                        linked = true;
                        break;
                    }
                if (!linked) candidates.push_back(label);
            }
            break;
        case HallucinationKind::Denial:
            for (const auto& [label, sp] : facts.first_speaker) {
                if (sp != Speaker::Doctor || facts.patient_mentioned.count(label)) continue;
                // A deny right after the introduction would read as a triage
                // answer, not a hallucination.
                if (facts.last_mention.at(label) > deny_turn - 2) continue;
                if (session.is_present(label) && is_cut_vertex(session, label))
                    candidates.push_back(label);
            }
            break;
        case HallucinationKind::Contradiction:
            for (const std::string& label : facts.patient_mentioned)
                if (session.is_present(label) && !is_cut_vertex(session, label))
                    candidates.push_back(label);
            break;
    }
    if (candidates.empty())
        throw std::runtime_error(std::string("no admissible subject for ") + to_string(kind) +
                                 " in " + base.id);

    DetRng rng(seed);
    const std::string subject = candidates[rng.next_below(candidates.size())];

    EntityClass cls = EntityClass::Symptom;
    if (kg.has_entity(subject)) {
        cls = kg.entities().at(subject).cls;
    } else {
        for (const Utterance& u : base.turns)
            for (const EntityMention& m : u.mentions)
                if (m.label == subject) cls = m.cls;
    }
    Utterance injected;
    injected.speaker = Speaker::Patient;
    if (kind == HallucinationKind::Isolated) {
        injected.text = "Could it be " + subject + "?";
        injected.mentions = {{subject, cls, MentionState::Mention}};
    } else {
        injected.text = kind == HallucinationKind::Denial
                            ? "Actually, I don't have " + subject + "."
                            : "Actually, I never had " + subject + ".";
        injected.mentions = {{subject, cls, MentionState::Deny}};
    }

    PatientScenario s;
    s.id = base.id + "-" + to_string(kind);
    s.truth = facts.mentioned;
    s.dialogue = base;
    s.dialogue.turns.push_back(std::move(injected));
    s.injection = {kind, subject, deny_turn};
    s.seed = seed;
    return s;
}

std::vector<PatientScenario> generate_scenarios(const KnowledgeGraph& kg,
                                                std::size_t count, std::uint64_t seed) {
    static const HallucinationKind kKinds[] = {HallucinationKind::Isolated,
                                               HallucinationKind::Denial,
                                               HallucinationKind::Contradiction};
    DetRng rng(seed);
    std::vector<PatientScenario> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::optional<PatientScenario> made;
        for (std::size_t attempt = 0; attempt < 8 && !made; ++attempt) {
            Dialogue base = make_base_dialogue(rng, i * 8 + attempt);
            HallucinationKind kind = kKinds[rng.next_below(3)];
            std::uint64_t sseed = rng.next();
            try {
                made = inject_hallucination(base, kind, kg, sseed);
            } catch (const std::runtime_error&) {
                // base admits no subject of this kind; draw another walk
            }
        }
        if (!made) throw std::runtime_error("scenario generation stalled");
        out.push_back(std::move(*made));
    }
    return out;
}

Utterance scripted_patient(const PatientScenario& scenario, const std::string& target) {
    EntityClass cls = EntityClass::Symptom;
    bool found = false;
    for (const Utterance& u : scenario.dialogue.turns) {
        for (const EntityMention& m : u.mentions)
            if (m.label == target) {
                cls = m.cls;
                found = true;
                break;
            }
        if (found) break;
    }
    Utterance u;
    u.speaker = Speaker::Patient;
    if (scenario.truth.count(target)) {
        u.text = "Yes, I have " + target + ".";
        u.mentions = {{target, cls, MentionState::Mention}};
    } else {
        u.text = "No, I don't have " + target + ".";
        u.mentions = {{target, cls, MentionState::Deny}};
    }
    return u;
}

std::string serialize_transcript_entry(const TranscriptEntry& t) {
    json j;
    j["speaker"] = to_string(t.speaker);
    j["text"] = t.text;
    json ms = json::array();
    for (const EntityMention& m : t.mentions)
        ms.push_back({{"class", to_string(m.cls)},
                      {"label", m.label},
                      {"state", to_string(m.state)}});
    j["mentions"] = std::move(ms);
    return j.dump();
}

SessionMetrics simulate_session(const KnowledgeGraph& kg, const ResponseKnowledge& rk,
                                const PatientScenario& scenario,
                                std::size_t max_clarifying_turns, std::uint64_t seed,
                                bool mitigate, const TemplateSet& templates) {
    if (max_clarifying_turns < 1)
        throw std::invalid_argument("max_clarifying_turns must be >= 1");
    (void)seed;  // replay is deterministic; the seed is echoed by callers

    SessionMetrics metrics;
    DialogueSession session(kg);
    std::set<std::string> resolved;
    std::deque<HallucinationEvent> pending;
    std::optional<double> h1_at_first_event;

    auto step = [&](const Utterance& u) {
        GraphSnapshot prev = session.current();
        auto [snap, rec] = session.apply_utterance(u);
        metrics.transcript.push_back({u.speaker, u.text, u.mentions});
        for (HallucinationEvent& ev : observe(prev, snap, rec, session.state_history())) {
            if (resolved.count(ev.subject)) continue;
            if (!h1_at_first_event) h1_at_first_event = snap.h1;
            ++metrics.events;
            pending.push_back(std::move(ev));
        }
    };

    auto handle = [&](const HallucinationEvent& ev) {
        if (metrics.clarifying_turns >= max_clarifying_turns) return;
        ++metrics.clarifying_turns;
        ClarifyingPlan plan = plan_clarification(ev, kg, rk, session, templates);
        const std::string& subject = ev.subject;
        switch (ev.kind) {
            case HallucinationKind::Isolated: {
                if (!plan.bridges.empty()) {
                    const std::string& bridge = plan.bridges.front().label;
                    EntityClass bcls = kg.has_entity(bridge) ? kg.entities().at(bridge).cls
                                                             : EntityClass::Symptom;
                    step({Speaker::Doctor, plan.question,
                          {{bridge, bcls, MentionState::Mention}}});
                    Utterance answer = scripted_patient(scenario, bridge);
                    if (answer.mentions.front().state == MentionState::Mention) {
                        // Bridge confirmed: the subject is now connected.
                        resolved.insert(subject);
                        metrics.success = true;
                        step(answer);
                    } else {
                        step(answer);  // bridge denied and removed again
                        resolved.insert(subject);
                        step({Speaker::Doctor, "Understood, let's set " + subject + " aside.",
                              {{subject, answer.mentions.front().cls, MentionState::Deny}}});
                        metrics.success = true;
                    }
                } else {
                    EntityClass scls = kg.has_entity(subject) ? kg.entities().at(subject).cls
                                                              : EntityClass::Symptom;
                    step({Speaker::Doctor, plan.question,
                          {{subject, scls, MentionState::Mention}}});
                    Utterance answer = scripted_patient(scenario, subject);
                    resolved.insert(subject);
                    bool denied = answer.mentions.front().state == MentionState::Deny;
                    step(answer);
                    // A confirmed but unconnected subject stays unresolved.
                    if (denied) metrics.success = true;
                }
                break;
            }
            case HallucinationKind::Denial: {
                EntityClass scls = kg.has_entity(subject) ? kg.entities().at(subject).cls
                                                          : EntityClass::Symptom;
                step({Speaker::Doctor, plan.question, {{subject, scls, MentionState::Mention}}});
                Utterance answer = scripted_patient(scenario, subject);
                resolved.insert(subject);
                step(answer);
                metrics.success = true;  // restored and confirmed, or upheld
                break;
            }
            case HallucinationKind::Contradiction: {
                step({Speaker::Doctor, plan.question, {}});
                Utterance answer = scripted_patient(scenario, subject);
                resolved.insert(subject);
                step(answer);
                metrics.success = true;  // reconciled to the scripted truth
                break;
            }
        }
    };

    for (const Utterance& u : scenario.dialogue.turns) {
        step(u);
        while (mitigate && !pending.empty()) {
            HallucinationEvent ev = pending.front();
            pending.pop_front();
            if (resolved.count(ev.subject)) continue;
            handle(ev);
        }
    }

    metrics.delta_ge = h1_at_first_event ? session.current().h1 - *h1_at_first_event : 0.0;
    return metrics;
}

namespace {

PrfScores prf_from_counts(double tp, double fp, double fn) {
    PrfScores s;
    s.p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    s.r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    s.f1 = s.p + s.r > 0 ? 2 * s.p * s.r / (s.p + s.r) : 0.0;
    return s;
}

}  // namespace

PrfReport entity_prf(const std::vector<std::vector<EntityMention>>& predicted,
                     const std::vector<std::vector<EntityMention>>& gold) {
    if (predicted.size() != gold.size())
        throw std::invalid_argument("prediction/gold turn counts differ");

    double tp = 0, fp = 0, fn = 0;
    std::map<EntityClass, std::array<double, 3>> by_class;  // tp, fp, fn
    for (std::size_t t = 0; t < predicted.size(); ++t) {
        std::set<std::string> pred_all, gold_all;
        std::map<EntityClass, std::set<std::string>> pred_c, gold_c;
        for (const EntityMention& m : predicted[t]) {
            pred_all.insert(m.label);
            pred_c[m.cls].insert(m.label);
        }
        for (const EntityMention& m : gold[t]) {
            gold_all.insert(m.label);
            gold_c[m.cls].insert(m.label);
        }
        for (const std::string& l : pred_all)
            gold_all.count(l) ? ++tp : ++fp;
        for (const std::string& l : gold_all)
            if (!pred_all.count(l)) ++fn;
        std::set<EntityClass> classes;
        for (const auto& [c, s] : pred_c) {
            (void)s;
            classes.insert(c);
        }
        for (const auto& [c, s] : gold_c) {
            (void)s;
            classes.insert(c);
        }
        for (EntityClass c : classes) {
            const auto& ps = pred_c[c];
            const auto& gs = gold_c[c];
            auto& counts = by_class[c];
            for (const std::string& l : ps) gs.count(l) ? ++counts[0] : ++counts[1];
            for (const std::string& l : gs)
                if (!ps.count(l)) ++counts[2];
        }
    }

    PrfReport report;
    report.overall = prf_from_counts(tp, fp, fn);
    for (const auto& [c, counts] : by_class)
        report.per_class[c] = prf_from_counts(counts[0], counts[1], counts[2]);
    return report;
}

AggregateMetrics aggregate_metrics(const std::vector<SessionMetrics>& sessions) {
    if (sessions.empty()) throw std::invalid_argument("no sessions to aggregate");
    AggregateMetrics agg;
    for (const SessionMetrics& s : sessions) {
        agg.mean_delta_ge += s.delta_ge;
        agg.success_rate += s.success ? 1.0 : 0.0;
    }
    agg.mean_delta_ge /= static_cast<double>(sessions.size());
    agg.success_rate /= static_cast<double>(sessions.size());
    return agg;
}

}  // namespace medgraph
