#include <cstdio>

#include <json.hpp>

#include "dopi/adapters.hpp"
#include "dopi/error.hpp"
#include "dopi/text.hpp"

namespace dopi {

using nlohmann::json;

namespace {

std::string id_list(const std::set<SymptomId>& ids) {
    if (ids.empty()) return "none";
    std::vector<std::string> parts;
    for (const auto& s : ids) parts.push_back(s.str());
    return join(parts, ", ");
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

} // namespace

AdviceTemplates AdviceTemplates::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto line = line_of_offset(text, e.byte);
        throw ParseError("advice templates, line " + std::to_string(line) + ": " + e.what(), line);
    }
    AdviceTemplates t;
    if (doc.contains("generic")) t.generic = doc.at("generic").get<std::string>();
    if (doc.contains("diseases"))
        for (const auto& [id, tmpl] : doc.at("diseases").items()) t.per_disease[DiseaseId(id)] = tmpl.get<std::string>();
    return t;
}

AdviceTemplates AdviceTemplates::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

std::string fill_advice(const std::string& tmpl, const DiseaseId& disease, double confidence,
                        const SymptomRecorder& recorder) {
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.2f", confidence);
    auto out = replace_all(tmpl, "{disease}", disease.str());
    out = replace_all(out, "{confidence}", conf);
    out = replace_all(out, "{present}", id_list(recorder.present));
    return replace_all(out, "{absent}", id_list(recorder.absent));
}

UpdateProposal polarity_proposal(const SymptomRecorder& recorder, const DiseaseId& disease, bool links) {
    UpdateProposal p;
    for (const auto& s : recorder.present) p.deltas.push_back({{s, disease}, +1.0});
    for (const auto& s : recorder.absent) p.deltas.push_back({{s, disease}, -1.0});
    if (links) {
        const std::vector<SymptomId> present(recorder.present.begin(), recorder.present.end());
        for (std::size_t a = 0; a < present.size(); ++a) {
            for (std::size_t b = a + 1; b < present.size(); ++b) p.deltas.push_back({{present[a], present[b]}, +1.0});
            for (const auto& s : recorder.absent) p.deltas.push_back({{present[a], s}, -1.0});
        }
    }
    return p;
}

ExpertOutput rule_based_diagnose(const SymptomRecorder& recorder, const DiseaseRanking& ranking,
                                 const AdviceTemplates& templates) {
    if (ranking.empty()) throw DataError("EMPTY_RANKING", "cannot diagnose from an empty ranking");
    const auto& top = ranking.top();
    auto it = templates.per_disease.find(top.disease);
    const auto& tmpl = it == templates.per_disease.end() ? templates.generic : it->second;
    return {top.disease, fill_advice(tmpl, top.disease, top.similarity, recorder),
            polarity_proposal(recorder, top.disease)};
}

ExpertOutput RemoteExpert::diagnose(const SymptomRecorder& recorder, const DiseaseRanking& ranking) const {
    if (ranking.empty()) throw DataError("EMPTY_RANKING", "cannot diagnose from an empty ranking");
    json payload{{"present", json::array()}, {"absent", json::array()}, {"candidates", json::array()}};
    for (const auto& s : recorder.present) payload["present"].push_back(s.str());
    for (const auto& s : recorder.absent) payload["absent"].push_back(s.str());
    for (std::size_t r = 0; r < std::min<std::size_t>(5, ranking.entries.size()); ++r)
        payload["candidates"].push_back({{"disease", ranking.entries[r].disease.str()},
                                         {"similarity", ranking.entries[r].similarity}});

    const auto reply = remote_complete(
        config_,
        "You are a medical expert. Given the patient's confirmed and ruled-out symptoms and the candidate "
        "conditions, reply with a JSON object {\"disease\": <one candidate id>, \"advice\": <treatment advice>}.",
        payload.dump());

    std::optional<DiseaseId> chosen;
    std::string advice = reply;
    try {
        const auto doc = json::parse(reply);
        if (doc.is_object() && doc.contains("disease") && doc.at("disease").is_string()) {
            chosen = DiseaseId(doc.at("disease").get<std::string>());
            if (doc.contains("advice") && doc.at("advice").is_string()) advice = doc.at("advice").get<std::string>();
        }
    } catch (const json::exception&) {
        // Free text: take the earliest candidate id mentioned.
        std::size_t best = std::string::npos;
        for (const auto& e : ranking.entries) {
            const auto pos = reply.find(e.disease.str());
            if (pos < best) {
                best = pos;
                chosen = e.disease;
            }
        }
    }
    const bool listed = chosen && std::any_of(ranking.entries.begin(), ranking.entries.end(),
                                              [&](const auto& e) { return e.disease == *chosen; });
    if (!listed) throw DataError("EXPERT_INVALID", "remote expert did not name a ranked disease");
    return {*chosen, advice, {}};
}

} // namespace dopi
