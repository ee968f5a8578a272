#pragma once

#include <json.hpp>

#include "dopi/knowledge_graph.hpp"
#include "dopi/session.hpp"

namespace dopi {

using nlohmann::json;

template <typename Tag>
void to_json(json& j, const Token<Tag>& t) { j = t.str(); }

template <typename Tag>
void from_json(const json& j, Token<Tag>& t) {
    if (!j.is_string() || j.get_ref<const std::string&>().empty())
        throw nlohmann::detail::type_error::create(302, "expected a non-empty id string", &j);
    t = Token<Tag>(j.get<std::string>());
}

void to_json(json& j, const CaseRecord& c);
void from_json(const json& j, CaseRecord& c);
void to_json(json& j, const EdgeDelta& d);
void from_json(const json& j, EdgeDelta& d);
void to_json(json& j, const UpdateProposal& p);
void from_json(const json& j, UpdateProposal& p);
void to_json(json& j, const NoiseSchedule& n);
void from_json(const json& j, NoiseSchedule& n);
void to_json(json& j, const EngineConfig& c);
// Starts from defaults; only keys present in `j` are read.
void from_json(const json& j, EngineConfig& c);
void apply_overrides(EngineConfig& c, const json& overrides);
void to_json(json& j, const QuestionBatch& b);
void from_json(const json& j, QuestionBatch& b);
void to_json(json& j, const AnswerSet& a);
void from_json(const json& j, AnswerSet& a);
void to_json(json& j, const Exchange& e);
void from_json(const json& j, Exchange& e);
void to_json(json& j, const RankedDisease& r);
void from_json(const json& j, RankedDisease& r);
void to_json(json& j, const DiseaseRanking& r);
void from_json(const json& j, DiseaseRanking& r);
void to_json(json& j, const SymptomRecorder& r);
void from_json(const json& j, SymptomRecorder& r);
void to_json(json& j, const Session& s);
void from_json(const json& j, Session& s);
void to_json(json& j, const Diagnosis& d);
void from_json(const json& j, Diagnosis& d);

// FNV-1a over the compact dump, as 16 hex digits.
std::string fingerprint(const json& j);

} // namespace dopi
