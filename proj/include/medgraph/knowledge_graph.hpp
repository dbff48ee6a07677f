#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "medgraph/corpus.hpp"

namespace medgraph {

struct KgEntity {
    EntityClass cls = EntityClass::Symptom;
    std::uint32_t freq = 0;  // dialogues with a mention-state occurrence
    bool operator==(const KgEntity&) const = default;
};

struct KgEdge {
    std::uint32_t cooc = 0;  // dialogues where src's first mention <= dst's
    double weight = 0.0;     // cooc / freq(src)
    bool operator==(const KgEdge&) const = default;
};

// Static directed co-occurrence graph over corpus entities. Immutable after
// build/load; safe to share across threads.
class KnowledgeGraph {
public:
    // freq(e) counts dialogues with a mention-state occurrence of e (any
    // speaker); cooc(i,j) counts dialogues where i's first mention turn is
    // <= j's (same turn counts both directions), once per dialogue;
    // weight = cooc/freq(src); edges below the threshold are dropped.
    // Throws on threshold outside [0,1] or a corpus without mentions.
    static KnowledgeGraph build(const std::vector<Dialogue>& dialogues, double threshold);

    double threshold() const { return threshold_; }
    const std::map<std::string, KgEntity>& entities() const { return entities_; }
    const std::map<std::pair<std::string, std::string>, KgEdge>& edges() const {
        return edges_;
    }

    bool has_entity(const std::string& label) const;
    std::optional<double> edge_weight(const std::string& src, const std::string& dst) const;

    struct Neighbor {
        std::string label;
        double weight = 0.0;
    };
    // Out-edges sorted by label.
    std::vector<Neighbor> out_neighbors(const std::string& label) const;
    // Direction-agnostic adjacency; parallel directed edges keep the larger
    // weight. Sorted by label.
    std::vector<Neighbor> undirected_neighbors(const std::string& label) const;

    // Stable JSON form: entities and edges sorted lexically, keys sorted.
    std::string save_string() const;
    void save_file(const std::string& path) const;
    // Validates structure on load: version, endpoint existence, weight ==
    // cooc/freq within 1e-9, weights in (0,1], no self-loops.
    static KnowledgeGraph load_string(const std::string& text);
    static KnowledgeGraph load_file(const std::string& path);

    bool operator==(const KnowledgeGraph&) const = default;

private:
    double threshold_ = 0.0;
    std::map<std::string, KgEntity> entities_;
    std::map<std::pair<std::string, std::string>, KgEdge> edges_;
};

struct ScoredEntity {
    std::string label;
    double score = 0.0;
    bool operator==(const ScoredEntity&) const = default;
};

struct PredictionResult {
    std::vector<ScoredEntity> ranked;
    std::vector<std::pair<std::string, int>> history;  // query context echo
};

// Likely next entities given the mention history ((label, turn) pairs):
// score(e) = max over history h of weight(h->e) * decay^(latest_turn - turn_h),
// history entities excluded, ties broken by the contributing mention's
// recency then label. Throws on unknown history entities, k < 1, or decay
// outside (0, 1].
PredictionResult related_entities(const KnowledgeGraph& kg,
                                  const std::vector<std::pair<std::string, int>>& history,
                                  std::size_t k, double decay);

struct Bridge {
    std::string label;
    double score = 0.0;
    bool operator==(const Bridge&) const = default;
};

// Intermediate entities linking any anchor to the isolated entity within
// max_hops edges (direction-agnostic), scored by the best product of edge
// weights along the path, sorted by score then label. Empty when no bridge
// exists. Throws if isolated is an anchor or max_hops < 2.
std::vector<Bridge> find_bridges(const KnowledgeGraph& kg, const std::string& isolated,
                                 const std::set<std::string>& anchors,
                                 std::size_t max_hops);

}  // namespace medgraph
