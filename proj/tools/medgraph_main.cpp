#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "medgraph/corpus.hpp"
#include "medgraph/detector.hpp"
#include "medgraph/dialogue_graph.hpp"
#include "medgraph/entropy.hpp"
#include "medgraph/harness.hpp"
#include "medgraph/knowledge_graph.hpp"
#include "medgraph/mitigation.hpp"

using nlohmann::json;
using namespace medgraph;

namespace {

// JSON lines go to the given path, or to stdout when the path is empty.
class LineSink {
public:
    explicit LineSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot write " + path);
        }
    }
    void line(const std::string& s) { (file_.is_open() ? file_ : std::cout) << s << "\n"; }
    bool to_file() const { return file_.is_open(); }

private:
    std::ofstream file_;
};

std::vector<std::string> anchors_of(const GraphSnapshot& snap, const std::string& subject) {
    std::vector<std::string> out;
    for (const auto& comp : snap.components)
        for (const std::string& label : comp)
            if (label != subject) out.push_back(label);
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_build_kg(const std::string& corpus_path, double threshold,
                 const std::string& out_path) {
    auto dialogues = parse_corpus_file(corpus_path);
    KnowledgeGraph kg = KnowledgeGraph::build(dialogues, threshold);
    if (out_path.empty()) {
        std::cout << kg.save_string() << "\n";
    } else {
        kg.save_file(out_path);
        json summary{{"edges", kg.edges().size()},
                     {"entities", kg.entities().size()},
                     {"threshold", kg.threshold()}};
        std::cout << summary.dump() << "\n";
    }
    return 0;
}

int cmd_build_rk(const std::string& corpus_path, std::size_t k, const std::string& out_path) {
    auto dialogues = parse_corpus_file(corpus_path);
    ResponseKnowledge rk = ResponseKnowledge::build(dialogues, k);
    if (out_path.empty()) {
        std::cout << rk.save_string() << "\n";
    } else {
        rk.save_file(out_path);
        json summary{{"entities", rk.by_entity().size()}, {"k", rk.k()}};
        std::cout << summary.dump() << "\n";
    }
    return 0;
}

int cmd_detect(const std::string& kg_path, const std::string& dialogues_path,
               const std::string& events_path, const std::string& snapshots_path) {
    KnowledgeGraph kg = KnowledgeGraph::load_file(kg_path);
    auto dialogues = parse_corpus_file(dialogues_path);
    LineSink events(events_path);
    std::unique_ptr<LineSink> snaps;
    if (!snapshots_path.empty()) snaps = std::make_unique<LineSink>(snapshots_path);

    std::size_t total = 0;
    for (const Dialogue& d : dialogues) {
        DialogueSession session(kg);
        for (const Utterance& u : d.turns) {
            GraphSnapshot prev = session.current();
            auto [snap, rec] = session.apply_utterance(u);
            for (const HallucinationEvent& ev :
                 observe(prev, snap, rec, session.state_history())) {
                json j = json::parse(serialize_event(ev));
                j["anchors"] = anchors_of(snap, ev.subject);
                j["dialogue_id"] = d.id;
                events.line(j.dump());
                ++total;
            }
        }
        if (snaps)
            for (const GraphSnapshot& s : session.snapshots()) {
                json j = json::parse(serialize_snapshot(s));
                j["dialogue_id"] = d.id;
                snaps->line(j.dump());
            }
    }
    if (events.to_file()) {
        json summary{{"dialogues", dialogues.size()}, {"events", total}};
        std::cout << summary.dump() << "\n";
    }
    return 0;
}

int cmd_predict(const std::string& kg_path, const std::string& dialogues_path,
                std::size_t top_k, double decay) {
    KnowledgeGraph kg = KnowledgeGraph::load_file(kg_path);
    auto dialogues = parse_corpus_file(dialogues_path);
    for (const Dialogue& d : dialogues) {
        std::map<std::string, int> last;
        for (std::size_t t = 0; t < d.turns.size(); ++t)
            for (const EntityMention& m : d.turns[t].mentions)
                if (m.state == MentionState::Mention && kg.has_entity(m.label))
                    last[m.label] = static_cast<int>(t);
        json preds = json::array();
        if (!last.empty()) {
            std::vector<std::pair<std::string, int>> history(last.begin(), last.end());
            PredictionResult res = related_entities(kg, history, top_k, decay);
            for (const ScoredEntity& se : res.ranked)
                preds.push_back({{"label", se.label}, {"score", se.score}});
        }
        json j{{"dialogue_id", d.id}, {"predictions", preds}};
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int cmd_clarify(const std::string& kg_path, const std::string& rk_path,
                const std::string& events_path, const std::string& templates_path,
                const std::string& out_path) {
    KnowledgeGraph kg = KnowledgeGraph::load_file(kg_path);
    ResponseKnowledge rk = ResponseKnowledge::load_file(rk_path);
    TemplateSet tpl =
        templates_path.empty() ? TemplateSet::defaults() : TemplateSet::load_file(templates_path);

    std::ifstream in(events_path);
    if (!in) throw std::runtime_error("cannot open " + events_path);
    LineSink out(out_path);
    std::string line;
    std::size_t lineno = 0;
    std::size_t plans = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
            HallucinationEvent ev;
            ev.turn = j.at("turn").get<int>();
            ev.kind = hallucination_kind_from(j.at("kind").get<std::string>());
            ev.subject = j.at("subject").get<std::string>();
            if (j.contains("first_turn") && !j["first_turn"].is_null())
                ev.first_turn = j["first_turn"].get<int>();
            if (j.contains("second_turn") && !j["second_turn"].is_null())
                ev.second_turn = j["second_turn"].get<int>();
            std::vector<std::string> anchors;
            if (j.contains("anchors"))
                for (const json& a : j["anchors"]) anchors.push_back(a.get<std::string>());

            ClarifyingPlan plan = plan_clarification_from_record(ev, kg, rk, anchors, tpl);
            json bridges = json::array();
            for (const Bridge& b : plan.bridges)
                bridges.push_back({{"label", b.label}, {"score", b.score}});
            json exemplars = json::array();
            for (const ResponseExemplar& e : plan.exemplars)
                exemplars.push_back({{"score", e.score}, {"text", e.text}});
            json p{{"bridges", bridges},
                   {"emphasized_attributes", plan.emphasized_attributes},
                   {"exemplars", exemplars},
                   {"kind", to_string(plan.event.kind)},
                   {"question", plan.question},
                   {"subject", plan.event.subject},
                   {"turn", plan.event.turn}};
            if (j.contains("dialogue_id")) p["dialogue_id"] = j["dialogue_id"];
            out.line(p.dump());
            ++plans;
        } catch (const json::exception& e) {
            throw std::runtime_error("events line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.to_file()) {
        json summary{{"plans", plans}};
        std::cout << summary.dump() << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& kg_path, const std::string& rk_path,
                 const std::string& scenarios_path, std::size_t max_turns, std::uint64_t seed,
                 bool mitigate, const std::string& templates_path,
                 const std::string& transcript_path) {
    KnowledgeGraph kg = KnowledgeGraph::load_file(kg_path);
    ResponseKnowledge rk = ResponseKnowledge::load_file(rk_path);
    TemplateSet tpl =
        templates_path.empty() ? TemplateSet::defaults() : TemplateSet::load_file(templates_path);
    auto scenarios = parse_scenarios_file(scenarios_path);
    if (scenarios.empty()) throw std::runtime_error("no scenarios in " + scenarios_path);

    std::unique_ptr<LineSink> transcripts;
    if (!transcript_path.empty()) transcripts = std::make_unique<LineSink>(transcript_path);

    std::vector<SessionMetrics> all;
    for (const PatientScenario& sc : scenarios) {
        SessionMetrics m = simulate_session(kg, rk, sc, max_turns, seed, mitigate, tpl);
        json j{{"clarifying_turns", m.clarifying_turns},
               {"delta_ge", m.delta_ge},
               {"events", m.events},
               {"id", sc.id},
               {"seed", sc.seed},
               {"success", m.success}};
        std::cout << j.dump() << "\n";
        if (transcripts) {
            json lines = json::array();
            for (const TranscriptEntry& t : m.transcript)
                lines.push_back(json::parse(serialize_transcript_entry(t)));
            json tj{{"id", sc.id}, {"transcript", lines}};
            transcripts->line(tj.dump());
        }
        all.push_back(std::move(m));
    }
    AggregateMetrics agg = aggregate_metrics(all);
    json summary{{"mean_delta_ge", agg.mean_delta_ge},
                 {"scenarios", all.size()},
                 {"success_rate", agg.success_rate}};
    std::cout << summary.dump() << "\n";
    return 0;
}

json prf_json(const PrfScores& s) {
    return json{{"f1", s.f1}, {"p", s.p}, {"r", s.r}};
}

int cmd_eval_prf(const std::string& pred_path, const std::string& gold_path) {
    auto pred = parse_corpus_file(pred_path);
    auto gold = parse_corpus_file(gold_path);
    if (pred.size() != gold.size())
        throw std::runtime_error("prediction/gold dialogue counts differ");
    std::vector<std::vector<EntityMention>> p, g;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].turns.size() != gold[i].turns.size())
            throw std::runtime_error("dialogue " + gold[i].id + ": turn counts differ");
        for (const Utterance& u : pred[i].turns) p.push_back(u.mentions);
        for (const Utterance& u : gold[i].turns) g.push_back(u.mentions);
    }
    PrfReport report = entity_prf(p, g);
    json per_class = json::object();
    for (const auto& [cls, scores] : report.per_class)
        per_class[to_string(cls)] = prf_json(scores);
    json j{{"overall", prf_json(report.overall)}, {"per_class", per_class}};
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_verify_bounds(std::size_t n_max) {
    entropy::SeparationReport report = entropy::verify_separation(n_max);
    for (const entropy::SeparationRow& row : report.rows) {
        json j{{"degrees", row.degrees}, {"lower", row.lower},   {"margin", row.margin},
               {"n", row.n},             {"pass", row.pass},     {"upper", row.upper}};
        std::cout << j.dump() << "\n";
    }
    json summary{{"floor_monotone", report.floor_monotone},
                 {"rows", report.rows.size()},
                 {"violations", report.violations}};
    std::cout << summary.dump() << "\n";
    return report.violations == 0 && report.floor_monotone ? 0 : 2;
}

int cmd_gen_scenarios(std::size_t count, std::uint64_t seed, const std::string& out_path,
                      const std::string& corpus_out, const std::string& dialogues_out) {
    auto corpus = make_synthetic_corpus();
    KnowledgeGraph kg = KnowledgeGraph::build(corpus, 0.01);
    auto scenarios = generate_scenarios(kg, count, seed);
    if (!corpus_out.empty()) {
        LineSink sink(corpus_out);
        for (const Dialogue& d : corpus) sink.line(serialize_dialogue(d));
    }
    if (!dialogues_out.empty()) {
        LineSink sink(dialogues_out);
        for (const PatientScenario& sc : scenarios) sink.line(serialize_dialogue(sc.dialogue));
    }
    LineSink out(out_path);
    for (const PatientScenario& sc : scenarios) out.line(serialize_scenario(sc));
    if (out.to_file()) {
        json summary{{"count", scenarios.size()}, {"seed", seed}};
        std::cout << summary.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entity graph toolkit for medical dialogues"};
    app.require_subcommand(1);

    std::string corpus_path, out_path;
    double threshold = 0.01;
    auto* build_kg = app.add_subcommand("build-kg", "build the co-occurrence entity graph");
    build_kg->add_option("corpus", corpus_path, "corpus JSONL file")->required();
    build_kg->add_option("--threshold", threshold, "minimum edge weight")
        ->capture_default_str();
    build_kg->add_option("--out", out_path, "output path (stdout when omitted)");

    std::string rk_corpus, rk_out;
    std::size_t rk_k = 3;
    auto* build_rk = app.add_subcommand("build-rk", "build exemplar doctor responses");
    build_rk->add_option("corpus", rk_corpus, "corpus JSONL file")->required();
    build_rk->add_option("--k", rk_k, "exemplars kept per entity")->capture_default_str();
    build_rk->add_option("--out", rk_out, "output path (stdout when omitted)");

    std::string det_kg, det_dialogues, det_events, det_snapshots;
    auto* detect = app.add_subcommand("detect", "detect hallucination events in dialogues");
    detect->add_option("--kg", det_kg, "graph file from build-kg")->required();
    detect->add_option("dialogues", det_dialogues, "corpus JSONL file")->required();
    detect->add_option("--events", det_events, "events output (stdout when omitted)");
    detect->add_option("--snapshots", det_snapshots, "per-turn snapshot output");

    std::string pred_kg, pred_dialogues;
    std::size_t pred_k = 5;
    double pred_decay = 0.5;
    auto* predict = app.add_subcommand("predict", "rank likely next entities per dialogue");
    predict->add_option("--kg", pred_kg, "graph file from build-kg")->required();
    predict->add_option("dialogues", pred_dialogues, "corpus JSONL file")->required();
    predict->add_option("--top-k", pred_k, "ranked entities kept")->capture_default_str();
    predict->add_option("--decay", pred_decay, "recency decay in (0,1]")->capture_default_str();

    std::string cl_kg, cl_rk, cl_events, cl_templates, cl_out;
    auto* clarify = app.add_subcommand("clarify", "plan clarifying questions for events");
    clarify->add_option("--kg", cl_kg, "graph file from build-kg")->required();
    clarify->add_option("--rk", cl_rk, "responses file from build-rk")->required();
    clarify->add_option("--events", cl_events, "events JSONL from detect")->required();
    clarify->add_option("--templates", cl_templates, "question template overrides");
    clarify->add_option("--out", cl_out, "plan output (stdout when omitted)");

    std::string sim_kg, sim_rk, sim_scenarios, sim_templates, sim_transcript;
    std::size_t sim_max_turns = 3;
    std::uint64_t sim_seed = 0;
    bool sim_no_mitigation = false;
    auto* simulate = app.add_subcommand("simulate", "replay scenarios with mitigation");
    simulate->add_option("--kg", sim_kg, "graph file from build-kg")->required();
    simulate->add_option("--rk", sim_rk, "responses file from build-rk")->required();
    simulate->add_option("--scenarios", sim_scenarios, "scenario JSONL file")->required();
    simulate->add_option("--max-turns", sim_max_turns, "clarifying turns per session")
        ->capture_default_str();
    simulate->add_option("--seed", sim_seed, "session seed")->capture_default_str();
    simulate->add_flag("--no-mitigation", sim_no_mitigation, "detect only, never intervene");
    simulate->add_option("--templates", sim_templates, "question template overrides");
    simulate->add_option("--transcript", sim_transcript, "transcript JSONL output");

    auto* eval = app.add_subcommand("eval", "evaluation utilities");
    eval->require_subcommand(1);
    std::string prf_pred, prf_gold;
    auto* prf = eval->add_subcommand("prf", "entity precision/recall/F1");
    prf->add_option("--pred", prf_pred, "predicted corpus JSONL")->required();
    prf->add_option("--gold", prf_gold, "gold corpus JSONL")->required();

    std::size_t vb_n_max = 7;
    auto* verify = app.add_subcommand("verify-bounds", "check the split/connected separation");
    verify->add_option("--n-max", vb_n_max, "largest survivor count")->capture_default_str();

    std::size_t gen_count = 10;
    std::uint64_t gen_seed = 0;
    std::string gen_out, gen_corpus_out, gen_dialogues_out;
    auto* gen = app.add_subcommand("gen-scenarios", "generate synthetic patient scenarios");
    gen->add_option("--count", gen_count, "scenarios to generate")->capture_default_str();
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "scenario output (stdout when omitted)");
    gen->add_option("--corpus-out", gen_corpus_out, "also write the synthetic corpus");
    gen->add_option("--dialogues-out", gen_dialogues_out,
                    "also write the scenario dialogues as a plain corpus");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (build_kg->parsed()) return cmd_build_kg(corpus_path, threshold, out_path);
        if (build_rk->parsed()) return cmd_build_rk(rk_corpus, rk_k, rk_out);
        if (detect->parsed()) return cmd_detect(det_kg, det_dialogues, det_events, det_snapshots);
        if (predict->parsed()) return cmd_predict(pred_kg, pred_dialogues, pred_k, pred_decay);
        if (clarify->parsed())
            return cmd_clarify(cl_kg, cl_rk, cl_events, cl_templates, cl_out);
        if (simulate->parsed())
            return cmd_simulate(sim_kg, sim_rk, sim_scenarios, sim_max_turns, sim_seed,
                                !sim_no_mitigation, sim_templates, sim_transcript);
        if (prf->parsed()) return cmd_eval_prf(prf_pred, prf_gold);
        if (verify->parsed()) return cmd_verify_bounds(vb_n_max);
        if (gen->parsed())
            return cmd_gen_scenarios(gen_count, gen_seed, gen_out, gen_corpus_out,
                                     gen_dialogues_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
