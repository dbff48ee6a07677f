#include "medgraph/knowledge_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace medgraph {

using nlohmann::json;

KnowledgeGraph KnowledgeGraph::build(const std::vector<Dialogue>& dialogues,
                                     double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw std::invalid_argument("build: threshold outside [0, 1]");
    }
    KnowledgeGraph kg;
    kg.threshold_ = threshold;

    std::map<std::pair<std::string, std::string>, std::uint32_t> cooc;
    for (const auto& d : dialogues) {
        // First mention-state turn per label within this dialogue.
        std::map<std::string, int> first_turn;
        for (std::size_t t = 0; t < d.turns.size(); ++t) {
            for (const auto& m : d.turns[t].mentions) {
                if (m.state != MentionState::Mention) continue;
                auto [it, inserted] = first_turn.emplace(m.label, static_cast<int>(t));
                if (inserted) {
                    auto [eit, fresh] = kg.entities_.emplace(m.label, KgEntity{m.cls, 0});
                    (void)fresh;
                    ++eit->second.freq;
                }
            }
        }
        for (const auto& [li, ti] : first_turn) {
            for (const auto& [lj, tj] : first_turn) {
                if (li != lj && ti <= tj) ++cooc[{li, lj}];
            }
        }
    }
    if (kg.entities_.empty()) {
        throw std::invalid_argument("build: corpus has no mention-state entities");
    }
    for (const auto& [key, count] : cooc) {
        const double weight =
            static_cast<double>(count) / static_cast<double>(kg.entities_.at(key.first).freq);
        if (weight < threshold) continue;
        kg.edges_.emplace(key, KgEdge{count, weight});
    }
    return kg;
}

bool KnowledgeGraph::has_entity(const std::string& label) const {
    return entities_.count(label) != 0;
}

std::optional<double> KnowledgeGraph::edge_weight(const std::string& src,
                                                  const std::string& dst) const {
    auto it = edges_.find({src, dst});
    if (it == edges_.end()) return std::nullopt;
    return it->second.weight;
}

std::vector<KnowledgeGraph::Neighbor> KnowledgeGraph::out_neighbors(
    const std::string& label) const {
    std::vector<Neighbor> out;
    for (auto it = edges_.lower_bound({label, std::string()});
         it != edges_.end() && it->first.first == label; ++it) {
        out.push_back({it->first.second, it->second.weight});
    }
    return out;
}

std::vector<KnowledgeGraph::Neighbor> KnowledgeGraph::undirected_neighbors(
    const std::string& label) const {
    std::map<std::string, double> best;
    for (auto it = edges_.lower_bound({label, std::string()});
         it != edges_.end() && it->first.first == label; ++it) {
        double& w = best[it->first.second];
        w = std::max(w, it->second.weight);
    }
    for (const auto& [key, edge] : edges_) {
        if (key.second == label) {
            double& w = best[key.first];
            w = std::max(w, edge.weight);
        }
    }
    std::vector<Neighbor> out;
    out.reserve(best.size());
    for (const auto& [l, w] : best) out.push_back({l, w});
    return out;
}

std::string KnowledgeGraph::save_string() const {
    json doc;
    doc["version"] = 1;
    doc["threshold"] = threshold_;
    doc["entities"] = json::array();
    for (const auto& [label, ent] : entities_) {
        doc["entities"].push_back(
            {{"class", to_string(ent.cls)}, {"freq", ent.freq}, {"label", label}});
    }
    doc["edges"] = json::array();
    for (const auto& [key, edge] : edges_) {
        doc["edges"].push_back({{"cooc", edge.cooc},
                                {"dst", key.second},
                                {"src", key.first},
                                {"weight", edge.weight}});
    }
    return doc.dump();
}

void KnowledgeGraph::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
    out << save_string() << '\n';
}

KnowledgeGraph KnowledgeGraph::load_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed graph file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || doc["version"] != 1) {
        throw std::runtime_error("graph file version mismatch");
    }
    KnowledgeGraph kg;
    kg.threshold_ = doc.at("threshold").get<double>();
    if (kg.threshold_ < 0.0 || kg.threshold_ > 1.0) {
        throw std::runtime_error("graph file threshold outside [0, 1]");
    }
    for (const auto& e : doc.at("entities")) {
        const auto label = e.at("label").get<std::string>();
        KgEntity ent{entity_class_from(e.at("class").get<std::string>()),
                     e.at("freq").get<std::uint32_t>()};
        if (ent.freq == 0) throw std::runtime_error("entity \"" + label + "\" with freq 0");
        if (!kg.entities_.emplace(label, ent).second) {
            throw std::runtime_error("duplicate entity \"" + label + "\"");
        }
    }
    for (const auto& e : doc.at("edges")) {
        const auto src = e.at("src").get<std::string>();
        const auto dst = e.at("dst").get<std::string>();
        KgEdge edge{e.at("cooc").get<std::uint32_t>(), e.at("weight").get<double>()};
        if (src == dst) throw std::runtime_error("self-loop on \"" + src + "\"");
        auto sit = kg.entities_.find(src);
        if (sit == kg.entities_.end() || kg.entities_.count(dst) == 0) {
            throw std::runtime_error("edge endpoint missing: " + src + " -> " + dst);
        }
        const double expect =
            static_cast<double>(edge.cooc) / static_cast<double>(sit->second.freq);
        if (std::abs(edge.weight - expect) > 1e-9 || edge.weight <= 0.0 ||
            edge.weight > 1.0 + 1e-9) {
            throw std::runtime_error("inconsistent edge weight: " + src + " -> " + dst);
        }
        if (!kg.edges_.emplace(std::make_pair(src, dst), edge).second) {
            throw std::runtime_error("duplicate edge: " + src + " -> " + dst);
        }
    }
    return kg;
}

KnowledgeGraph KnowledgeGraph::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_string(buf.str());
}

PredictionResult related_entities(const KnowledgeGraph& kg,
                                  const std::vector<std::pair<std::string, int>>& history,
                                  std::size_t k, double decay) {
    if (k < 1) throw std::invalid_argument("related_entities: k < 1");
    if (decay <= 0.0 || decay > 1.0) {
        throw std::invalid_argument("related_entities: decay outside (0, 1]");
    }
    std::set<std::string> in_history;
    int latest = 0;
    for (const auto& [label, turn] : history) {
        if (!kg.has_entity(label)) {
            throw std::invalid_argument("related_entities: unknown entity \"" + label + "\"");
        }
        in_history.insert(label);
        latest = std::max(latest, turn);
    }

    struct Candidate {
        double score = 0.0;
        int contrib_turn = 0;
    };
    std::map<std::string, Candidate> scores;
    for (const auto& [label, turn] : history) {
        const double age_factor = std::pow(decay, static_cast<double>(latest - turn));
        for (const auto& nb : kg.out_neighbors(label)) {
            if (in_history.count(nb.label) != 0) continue;
            const double s = nb.weight * age_factor;
            auto [it, fresh] = scores.emplace(nb.label, Candidate{s, turn});
            if (!fresh) {
                if (s > it->second.score + 1e-15) {
                    it->second = {s, turn};
                } else if (s > it->second.score - 1e-15) {
                    it->second.contrib_turn = std::max(it->second.contrib_turn, turn);
                }
            }
        }
    }

    std::vector<std::pair<std::string, Candidate>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.score != b.second.score) return a.second.score > b.second.score;
        if (a.second.contrib_turn != b.second.contrib_turn) {
            return a.second.contrib_turn > b.second.contrib_turn;
        }
        return a.first < b.first;
    });
    PredictionResult result;
    result.history = history;
    for (const auto& [label, cand] : ranked) {
        if (result.ranked.size() == k) break;
        result.ranked.push_back({label, cand.score});
    }
    return result;
}

std::vector<Bridge> find_bridges(const KnowledgeGraph& kg, const std::string& isolated,
                                 const std::set<std::string>& anchors,
                                 std::size_t max_hops) {
    if (anchors.count(isolated) != 0) {
        throw std::invalid_argument("find_bridges: isolated entity is an anchor");
    }
    if (max_hops < 2) throw std::invalid_argument("find_bridges: max_hops < 2");
    if (!kg.has_entity(isolated)) return {};

    // Best path product reachable in <= h hops, by hop count; paths never
    // pass through the opposite endpoint set.
    auto sweep = [&](const std::set<std::string>& sources,
                     const std::set<std::string>& banned) {
        std::vector<std::map<std::string, double>> layers(max_hops + 1);
        for (const auto& s : sources) {
            if (kg.has_entity(s)) layers[0][s] = 1.0;
        }
        for (std::size_t h = 1; h <= max_hops; ++h) {
            layers[h] = layers[h - 1];
            for (const auto& [label, score] : layers[h - 1]) {
                if (banned.count(label) != 0) continue;
                for (const auto& nb : kg.undirected_neighbors(label)) {
                    if (banned.count(nb.label) != 0) continue;
                    const double cand = score * nb.weight;
                    auto [it, fresh] = layers[h].emplace(nb.label, cand);
                    if (!fresh && cand > it->second) it->second = cand;
                }
            }
        }
        return layers;
    };
    const auto from_anchors = sweep(anchors, {isolated});
    const auto from_isolated = sweep({isolated}, anchors);

    std::map<std::string, double> best;
    for (std::size_t h1 = 1; h1 + 1 <= max_hops; ++h1) {
        const std::size_t h2 = max_hops - h1;
        for (const auto& [label, sa] : from_anchors[h1]) {
            if (label == isolated || anchors.count(label) != 0) continue;
            auto it = from_isolated[h2].find(label);
            if (it == from_isolated[h2].end()) continue;
            const double score = sa * it->second;
            auto [bit, fresh] = best.emplace(label, score);
            if (!fresh && score > bit->second) bit->second = score;
        }
    }
    std::vector<Bridge> out;
    out.reserve(best.size());
    for (const auto& [label, score] : best) out.push_back({label, score});
    std::sort(out.begin(), out.end(), [](const Bridge& a, const Bridge& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.label < b.label;
    });
    return out;
}

}  // namespace medgraph
