#include "medgraph/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "medgraph/kernels.hpp"

namespace medgraph {

using nlohmann::json;

namespace {

bool is_cjk(char32_t cp) {
    return (cp >= 0x2E80 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
           (cp >= 0x20000 && cp <= 0x2FA1F);
}

// Minimal UTF-8 decode; malformed bytes fall back to single-byte codepoints.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t j) { return static_cast<unsigned char>(s[j]); };
    const unsigned char b0 = byte(i);
    std::size_t len = 1;
    char32_t cp = b0;
    if ((b0 & 0x80u) == 0) {
        len = 1;
    } else if ((b0 & 0xE0u) == 0xC0u && i + 1 < s.size()) {
        len = 2;
        cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0u) == 0xE0u && i + 2 < s.size()) {
        len = 3;
        cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8u) == 0xF0u && i + 3 < s.size()) {
        len = 4;
        cp = b0 & 0x07u;
    }
    for (std::size_t j = 1; j < len; ++j) {
        if ((byte(i + j) & 0xC0u) != 0x80u) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (byte(i + j) & 0x3Fu);
    }
    const std::size_t start = i;
    i += len;
    (void)start;
    return cp;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string word;
    const auto flush = [&] {
        if (!word.empty()) {
            tokens.push_back(word);
            word.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t at = i;
        const char32_t cp = decode_utf8(text, i);
        if (cp < 0x80) {
            const char c = static_cast<char>(cp);
            if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
                word.push_back(c);
            } else if (c >= 'A' && c <= 'Z') {
                word.push_back(static_cast<char>(c - 'A' + 'a'));
            } else {
                flush();
            }
        } else if (is_cjk(cp)) {
            flush();
            tokens.push_back(text.substr(at, i - at));
        } else {
            word.append(text, at, i - at);
        }
    }
    flush();
    return tokens;
}

TfIdfModel TfIdfModel::fit(const std::vector<std::string>& docs) {
    TfIdfModel model;
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::set<std::string> seen;
        for (const auto& tok : tokenize(doc)) seen.insert(tok);
        for (const auto& tok : seen) ++df[tok];
    }
    const double n = static_cast<double>(docs.size());
    for (const auto& [tok, count] : df) {
        model.idf_[tok] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    }
    return model;
}

SparseVec TfIdfModel::transform(const std::string& text) const {
    if (text.empty()) throw std::invalid_argument("transform: empty text");
    std::map<std::string, double> tf;
    for (const auto& tok : tokenize(text)) {
        auto it = idf_.find(tok);
        if (it != idf_.end()) tf[tok] += it->second;
    }
    double norm = 0.0;
    for (const auto& [tok, w] : tf) norm += w * w;
    SparseVec vec;
    if (norm <= 0.0) return vec;  // zero token coverage
    norm = std::sqrt(norm);
    vec.reserve(tf.size());
    for (const auto& [tok, w] : tf) vec.emplace_back(tok, w / norm);
    return vec;
}

double cosine(const SparseVec& a, const SparseVec& b) {
    // Gather matching coordinates, then one dense dot product.
    std::vector<double> xa, xb;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (b[j].first < a[i].first) {
            ++j;
        } else {
            xa.push_back(a[i].second);
            xb.push_back(b[j].second);
            ++i;
            ++j;
        }
    }
    if (xa.empty()) return 0.0;
    return kernels::dot(xa.data(), xb.data(), xa.size());
}

ResponseKnowledge ResponseKnowledge::build(const std::vector<Dialogue>& dialogues,
                                           std::size_t k) {
    if (k < 1) throw std::invalid_argument("build: k < 1");
    ResponseKnowledge rk;
    rk.k_ = k;

    // Doctor utterances per entity, in corpus order.
    std::map<std::string, std::vector<std::string>> responses;
    std::vector<std::string> all_texts;
    for (const auto& d : dialogues) {
        for (const auto& u : d.turns) {
            if (u.speaker != Speaker::Doctor || u.text.empty() || u.mentions.empty()) {
                continue;
            }
            all_texts.push_back(u.text);
            for (const auto& m : u.mentions) responses[m.label].push_back(u.text);
        }
    }
    const TfIdfModel model = TfIdfModel::fit(all_texts);

    for (const auto& [label, texts] : responses) {
        std::vector<ResponseExemplar> ranked;
        if (texts.size() == 1) {
            ranked.push_back({texts[0], 1.0});
        } else {
            std::vector<SparseVec> vecs;
            vecs.reserve(texts.size());
            for (const auto& t : texts) vecs.push_back(model.transform(t));
            for (std::size_t i = 0; i < texts.size(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < texts.size(); ++j) {
                    if (j != i) acc += cosine(vecs[i], vecs[j]);
                }
                ranked.push_back({texts[i], acc / static_cast<double>(texts.size() - 1)});
            }
            std::sort(ranked.begin(), ranked.end(),
                      [](const ResponseExemplar& a, const ResponseExemplar& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.text < b.text;
                      });
        }
        if (ranked.size() > k) ranked.resize(k);
        rk.by_entity_.emplace(label, std::move(ranked));
    }
    return rk;
}

std::vector<ResponseExemplar> ResponseKnowledge::exemplars(const std::string& label) const {
    auto it = by_entity_.find(label);
    return it == by_entity_.end() ? std::vector<ResponseExemplar>{} : it->second;
}

std::string ResponseKnowledge::save_string() const {
    json doc;
    doc["version"] = 1;
    doc["k"] = k_;
    doc["responses"] = json::array();
    for (const auto& [label, exemplars] : by_entity_) {
        json entry;
        entry["entity"] = label;
        entry["exemplars"] = json::array();
        for (const auto& e : exemplars) {
            entry["exemplars"].push_back({{"score", e.score}, {"text", e.text}});
        }
        doc["responses"].push_back(std::move(entry));
    }
    return doc.dump();
}

void ResponseKnowledge::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
    out << save_string() << '\n';
}

ResponseKnowledge ResponseKnowledge::load_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed response file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || doc["version"] != 1) {
        throw std::runtime_error("response file version mismatch");
    }
    ResponseKnowledge rk;
    rk.k_ = doc.at("k").get<std::size_t>();
    for (const auto& entry : doc.at("responses")) {
        std::vector<ResponseExemplar> exemplars;
        double prev = 2.0;
        for (const auto& e : entry.at("exemplars")) {
            ResponseExemplar ex{e.at("text").get<std::string>(),
                                e.at("score").get<double>()};
            if (ex.score > prev + 1e-9) {
                throw std::runtime_error("response file scores not sorted");
            }
            prev = ex.score;
            exemplars.push_back(std::move(ex));
        }
        if (!rk.by_entity_.emplace(entry.at("entity").get<std::string>(), std::move(exemplars))
                 .second) {
            throw std::runtime_error("duplicate response entity");
        }
    }
    return rk;
}

ResponseKnowledge ResponseKnowledge::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open response file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_string(buf.str());
}

TemplateSet TemplateSet::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open template file \"" + path + "\"");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed template file: ") + e.what());
    }
    TemplateSet t;
    if (doc.contains("isolated_bridge")) t.isolated_bridge = doc["isolated_bridge"];
    if (doc.contains("isolated_direct")) t.isolated_direct = doc["isolated_direct"];
    if (doc.contains("denial")) t.denial = doc["denial"];
    if (doc.contains("contradiction")) t.contradiction = doc["contradiction"];
    return t;
}

namespace {

std::string fill_slot(std::string text, const std::string& slot, const std::string& value) {
    const std::string needle = "{" + slot + "}";
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

std::string render_question(const ClarifyingPlan& plan, const TemplateSet& templates) {
    std::string tpl;
    switch (plan.event.kind) {
        case HallucinationKind::Isolated:
            tpl = plan.bridges.empty() ? templates.isolated_direct : templates.isolated_bridge;
            break;
        case HallucinationKind::Denial:
            tpl = templates.denial;
            break;
        case HallucinationKind::Contradiction:
            tpl = templates.contradiction;
            break;
    }
    if (tpl.empty()) {
        throw std::runtime_error(std::string("missing template for kind ") +
                                 to_string(plan.event.kind));
    }
    std::string q = fill_slot(std::move(tpl), "target", plan.target);
    if (!plan.bridges.empty()) q = fill_slot(std::move(q), "bridge", plan.bridges[0].label);
    if (plan.event.first_turn) {
        q = fill_slot(std::move(q), "turn_i", std::to_string(*plan.event.first_turn));
    }
    if (plan.event.second_turn) {
        q = fill_slot(std::move(q), "turn_j", std::to_string(*plan.event.second_turn));
    }
    if (!plan.emphasized_attributes.empty()) {
        q = fill_slot(std::move(q), "attribute", join(plan.emphasized_attributes, " and "));
    }
    if (!plan.exemplars.empty()) {
        q += " [guidance: " + plan.exemplars[0].text + "]";
    }
    return q;
}

ClarifyingPlan plan_clarification_from_record(
    const HallucinationEvent& event, const KnowledgeGraph& kg, const ResponseKnowledge& rk,
    const std::vector<std::string>& anchors, const TemplateSet& templates) {
    ClarifyingPlan plan;
    plan.event = event;
    plan.target = event.subject;
    switch (event.kind) {
        case HallucinationKind::Isolated: {
            std::set<std::string> anchor_set(anchors.begin(), anchors.end());
            anchor_set.erase(event.subject);
            if (!anchor_set.empty()) {
                plan.bridges = find_bridges(kg, event.subject, anchor_set, 2);
            }
            plan.exemplars = plan.bridges.empty() ? rk.exemplars(event.subject)
                                                  : rk.exemplars(plan.bridges[0].label);
            break;
        }
        case HallucinationKind::Denial: {
            plan.exemplars = rk.exemplars(event.subject);
            break;
        }
        case HallucinationKind::Contradiction: {
            plan.emphasized_attributes = {"duration", "medical history"};
            break;
        }
    }
    plan.question = render_question(plan, templates);
    return plan;
}

ClarifyingPlan plan_clarification(const HallucinationEvent& event, const KnowledgeGraph& kg,
                                  const ResponseKnowledge& rk, const DialogueSession& g,
                                  const TemplateSet& templates) {
    std::vector<std::string> anchors;
    for (const auto& comp : g.current().components) {
        for (const auto& label : comp) {
            if (label != event.subject) anchors.push_back(label);
        }
    }
    HallucinationEvent ev = event;
    if (ev.kind == HallucinationKind::Contradiction && !ev.first_turn) {
        // Pure graph contradiction: cite the last recorded mention.
        auto hit = g.state_history().find(ev.subject);
        if (hit != g.state_history().end()) {
            for (const auto& se : hit->second) {
                if (se.turn < ev.turn && se.state == MentionState::Mention) {
                    ev.first_turn = se.turn;
                }
            }
        }
        ev.second_turn = ev.turn;
    }
    return plan_clarification_from_record(ev, kg, rk, anchors, templates);
}

}  // namespace medgraph
