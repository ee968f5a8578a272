#include "dopi/codec.hpp"

#include <cstdio>

#include "dopi/error.hpp"

namespace dopi {

namespace {

template <typename T>
json id_list(const T& ids) {
    json out = json::array();
    for (const auto& id : ids) out.push_back(id.str());
    return out;
}

} // namespace

void to_json(json& j, const CaseRecord& c) {
    j = json{{"disease", c.disease}, {"symptoms", id_list(c.symptoms)}};
}

void from_json(const json& j, CaseRecord& c) {
    c.disease = j.at("disease").get<DiseaseId>();
    c.symptoms.clear();
    for (const auto& s : j.at("symptoms")) c.symptoms.insert(s.get<SymptomId>());
}

void to_json(json& j, const EdgeDelta& d) {
    j = json{{"s", d.edge.symptom}, {"delta", d.delta}};
    if (const auto* disease = std::get_if<DiseaseId>(&d.edge.target))
        j["d"] = *disease;
    else
        j["s2"] = std::get<SymptomId>(d.edge.target);
}

void from_json(const json& j, EdgeDelta& d) {
    d.edge.symptom = j.at("s").get<SymptomId>();
    if (j.contains("d"))
        d.edge.target = j.at("d").get<DiseaseId>();
    else
        d.edge.target = j.at("s2").get<SymptomId>();
    d.delta = j.at("delta").get<double>();
}

void to_json(json& j, const UpdateProposal& p) {
    j = json{{"session_id", p.session_id}, {"deltas", p.deltas}};
}

void from_json(const json& j, UpdateProposal& p) {
    p.session_id = j.at("session_id").get<std::string>();
    p.deltas = j.at("deltas").get<std::vector<EdgeDelta>>();
}

void to_json(json& j, const NoiseSchedule& n) {
    const char* decay = n.decay == NoiseSchedule::Decay::Inverse       ? "inverse"
                        : n.decay == NoiseSchedule::Decay::Exponential ? "exponential"
                                                                       : "constant";
    j = json{{"sigma0", n.sigma0}, {"decay", decay}, {"rate", n.rate}};
}

void from_json(const json& j, NoiseSchedule& n) {
    if (j.contains("sigma0")) n.sigma0 = j.at("sigma0").get<double>();
    if (j.contains("rate")) n.rate = j.at("rate").get<double>();
    if (j.contains("decay")) {
        const auto d = j.at("decay").get<std::string>();
        if (d == "inverse") n.decay = NoiseSchedule::Decay::Inverse;
        else if (d == "exponential") n.decay = NoiseSchedule::Decay::Exponential;
        else if (d == "constant") n.decay = NoiseSchedule::Decay::Constant;
        else throw DataError("BAD_CONFIG", "unknown noise decay '" + d + "'");
    }
}

void to_json(json& j, const EngineConfig& c) {
    j = json{{"epsilon_stop", c.epsilon_stop},
             {"max_rounds", c.max_rounds},
             {"batch_size", c.batch_size},
             {"noise", c.noise},
             {"top_n_diseases", c.top_n_diseases ? json(*c.top_n_diseases) : json(nullptr)},
             {"seed", c.seed},
             {"selection", to_string(c.selection)},
             {"cold_start_fallback", c.cold_start_fallback},
             {"propose_symptom_links", c.propose_symptom_links}};
}

void apply_overrides(EngineConfig& c, const json& o) {
    if (!o.is_object()) throw DataError("BAD_CONFIG", "engine config must be a JSON object");
    if (o.contains("epsilon_stop")) c.epsilon_stop = o.at("epsilon_stop").get<double>();
    if (o.contains("max_rounds")) c.max_rounds = o.at("max_rounds").get<std::size_t>();
    if (o.contains("batch_size")) c.batch_size = o.at("batch_size").get<std::size_t>();
    if (o.contains("noise")) from_json(o.at("noise"), c.noise);
    if (o.contains("sigma0")) c.noise.sigma0 = o.at("sigma0").get<double>();
    if (o.contains("top_n_diseases")) {
        const auto& t = o.at("top_n_diseases");
        c.top_n_diseases = t.is_null() ? std::nullopt : std::optional<std::size_t>(t.get<std::size_t>());
    }
    if (o.contains("seed")) c.seed = o.at("seed").get<std::uint64_t>();
    if (o.contains("selection")) c.selection = selection_from_string(o.at("selection").get<std::string>());
    if (o.contains("cold_start_fallback")) c.cold_start_fallback = o.at("cold_start_fallback").get<bool>();
    if (o.contains("propose_symptom_links")) c.propose_symptom_links = o.at("propose_symptom_links").get<bool>();
}

void from_json(const json& j, EngineConfig& c) {
    c = EngineConfig{};
    apply_overrides(c, j);
}

void to_json(json& j, const QuestionBatch& b) {
    j = json{{"round", b.round}, {"symptoms", id_list(b.symptoms)}};
}

void from_json(const json& j, QuestionBatch& b) {
    b.round = j.at("round").get<std::size_t>();
    b.symptoms = j.at("symptoms").get<std::vector<SymptomId>>();
}

void to_json(json& j, const AnswerSet& a) {
    j = json::object();
    for (const auto& [s, v] : a) j[s.str()] = to_string(v);
}

void from_json(const json& j, AnswerSet& a) {
    if (!j.is_object()) throw DataError("BAD_ANSWER", "answers must be an object of symptom -> answer");
    a.clear();
    for (const auto& [k, v] : j.items()) {
        if (k.empty()) throw DataError("BAD_ANSWER", "empty symptom id in answers");
        a.emplace(SymptomId(k), answer_from_string(v.get<std::string>()));
    }
}

void to_json(json& j, const Exchange& e) {
    j = json{{"batch", e.batch}, {"answers", e.answers}};
}

void from_json(const json& j, Exchange& e) {
    e.batch = j.at("batch").get<QuestionBatch>();
    from_json(j.at("answers"), e.answers);
}

void to_json(json& j, const RankedDisease& r) {
    j = json{{"disease", r.disease}, {"similarity", r.similarity}};
}

void from_json(const json& j, RankedDisease& r) {
    r.disease = j.at("disease").get<DiseaseId>();
    r.similarity = j.at("similarity").get<double>();
}

void to_json(json& j, const DiseaseRanking& r) { j = r.entries; }

void from_json(const json& j, DiseaseRanking& r) { r.entries = j.get<std::vector<RankedDisease>>(); }

void to_json(json& j, const SymptomRecorder& r) {
    j = json{{"present", id_list(r.present)}, {"absent", id_list(r.absent)}, {"asked", id_list(r.asked)}};
}

void from_json(const json& j, SymptomRecorder& r) {
    r = SymptomRecorder{};
    for (const auto& s : j.at("present")) r.present.insert(s.get<SymptomId>());
    for (const auto& s : j.at("absent")) r.absent.insert(s.get<SymptomId>());
    for (const auto& s : j.at("asked")) r.asked.insert(s.get<SymptomId>());
}

void to_json(json& j, const Session& s) {
    j = json{{"id", s.id},
             {"graph_version", s.graph_version},
             {"config", s.config},
             {"initial", id_list(s.initial)},
             {"recorder", s.recorder},
             {"round", s.round},
             {"state", to_string(s.state)},
             {"stop_reason", to_string(s.stop_reason)},
             {"ranking", s.ranking},
             {"history", s.history},
             {"outstanding", s.outstanding ? json(*s.outstanding) : json(nullptr)}};
}

void from_json(const json& j, Session& s) {
    s = Session{};
    s.id = j.at("id").get<std::string>();
    s.graph_version = j.at("graph_version").get<std::uint64_t>();
    from_json(j.at("config"), s.config);
    for (const auto& x : j.at("initial")) s.initial.insert(x.get<SymptomId>());
    s.recorder = j.at("recorder").get<SymptomRecorder>();
    s.round = j.at("round").get<std::size_t>();
    s.state = state_from_string(j.at("state").get<std::string>());
    s.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    s.ranking = j.at("ranking").get<DiseaseRanking>();
    s.history = j.at("history").get<std::vector<Exchange>>();
    if (!j.at("outstanding").is_null()) s.outstanding = j.at("outstanding").get<QuestionBatch>();
}

void to_json(json& j, const Diagnosis& d) {
    j = json{{"disease", d.disease},
             {"confidence", d.confidence},
             {"advice", d.advice_text},
             {"provenance", d.provenance},
             {"update_proposal", d.update_proposal}};
}

void from_json(const json& j, Diagnosis& d) {
    d.disease = j.at("disease").get<DiseaseId>();
    d.confidence = j.at("confidence").get<double>();
    d.advice_text = j.at("advice").get<std::string>();
    d.provenance = j.at("provenance").get<std::string>();
    d.update_proposal = j.at("update_proposal").get<UpdateProposal>();
}

std::string fingerprint(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace dopi
