#include <algorithm>
#include <cstdio>

#include "dopi/codec.hpp"
#include "dopi/error.hpp"
#include "dopi/eval.hpp"
#include "dopi/parallel.hpp"

namespace dopi {

namespace {

struct PolicyPlan {
    EngineConfig engine;
    PatientConfig patient;
    bool ask = true;
};

PolicyPlan plan_for(const PolicySpec& spec, const CorpusManifest& manifest) {
    PolicyPlan plan{manifest.engine, manifest.patient, true};
    switch (spec.id) {
    case PolicyId::Dopi:
        break;
    case PolicyId::GreedyNoNoise:
        plan.engine.noise.sigma0 = 0.0;
        break;
    case PolicyId::RandomQuestion:
        plan.engine.selection = Selection::Random;
        break;
    case PolicyId::NoQuestion:
        plan.ask = false;
        break;
    }
    apply_overrides(plan.engine, spec.engine_overrides);
    plan.engine.validate();
    if (spec.misjudgment_rate) plan.patient.misjudgment_rate = *spec.misjudgment_rate;
    plan.patient.validate();
    return plan;
}

std::string plan_fingerprint(const PolicySpec& spec, const PolicyPlan& plan) {
    auto engine = json(plan.engine);
    engine.erase("seed");
    return fingerprint(json{{"policy", to_string(spec.id)},
                            {"ask", plan.ask},
                            {"engine", engine},
                            {"misjudgment_rate", plan.patient.misjudgment_rate}});
}

} // namespace

const char* to_string(PolicyId p) {
    switch (p) {
    case PolicyId::Dopi: return "dopi";
    case PolicyId::GreedyNoNoise: return "greedy_no_noise";
    case PolicyId::RandomQuestion: return "random_question";
    case PolicyId::NoQuestion: return "no_question";
    }
    return "dopi";
}

PolicyId policy_from_string(const std::string& s) {
    for (auto p : {PolicyId::Dopi, PolicyId::GreedyNoNoise, PolicyId::RandomQuestion, PolicyId::NoQuestion})
        if (s == to_string(p)) return p;
    throw DataError("UNKNOWN_POLICY", "unknown policy '" + s + "'");
}

const PolicyResult& EvalReport::policy(const std::string& id) const {
    for (const auto& p : policies)
        if (p.id == id) return p;
    throw DataError("UNKNOWN_POLICY", "report has no policy '" + id + "'");
}

EvalReport run_benchmark(const Corpus& corpus, std::span<const PolicySpec> policies, const KnowledgeGraph& g,
                         const ExpertModel& expert, const BenchmarkOptions& options) {
    if (corpus.manifest.graph_version != g.version())
        throw DataError("GRAPH_VERSION", "corpus '" + corpus.manifest.corpus_id + "' references graph version " +
                                             std::to_string(corpus.manifest.graph_version) +
                                             " but the supplied graph is version " + std::to_string(g.version()));
    for (const auto& t : corpus.transcripts)
        if (t.graph_version != g.version())
            throw DataError("GRAPH_VERSION", "transcript " + t.id + " references graph version " +
                                                 std::to_string(t.graph_version) + " but the supplied graph is version " +
                                                 std::to_string(g.version()));
    if (corpus.transcripts.empty()) throw DataError("EMPTY_INPUT", "corpus has no transcripts");
    if (policies.empty()) throw DataError("EMPTY_INPUT", "no policies to evaluate");

    EvalReport report;
    report.corpus_id = corpus.manifest.corpus_id;
    report.graph_version = g.version();
    report.engine_seed = options.seed.value_or(corpus.manifest.engine.seed);
    report.patient_seed = options.seed.value_or(corpus.manifest.patient.seed);

    for (const auto& spec : policies) {
        const auto plan = plan_for(spec, corpus.manifest);
        std::vector<CaseOutcome> outcomes(corpus.transcripts.size());
        parallel_for(corpus.transcripts.size(), options.threads, [&](std::size_t i) {
            const auto& t = corpus.transcripts[i];
            auto engine = plan.engine;
            auto patient_config = plan.patient;
            engine.seed = options.seed ? derive_seed(*options.seed, i) : t.engine_seed;
            patient_config.seed = options.seed ? derive_seed(~*options.seed, i) : t.patient_seed;
            SimulatedPatient patient(t.truth, patient_config);
            const auto run = run_consultation(g, patient, engine, expert, t.id, plan.ask, t.initial_disclosure);
            outcomes[i] = {t.id,
                           run.diagnosis.disease,
                           t.truth.disease,
                           {run.session.round, 1},
                           {t.doctor_question_rounds, t.doctor_answer_rounds},
                           run.session.stop_reason};
        });
        std::stable_sort(outcomes.begin(), outcomes.end(),
                         [](const auto& a, const auto& b) { return a.case_id < b.case_id; });

        std::vector<std::pair<DiseaseId, DiseaseId>> pairs;
        std::vector<RoundCounts> model;
        std::vector<RoundCounts> reference;
        PolicyResult result;
        for (const auto& o : outcomes) {
            pairs.emplace_back(o.predicted, o.truth);
            model.push_back(o.model);
            reference.push_back(o.reference);
            ++result.rounds_hist[o.model.questions];
        }
        result.id = spec.name();
        result.policy = to_string(spec.id);
        result.accuracy = diagnostic_accuracy(pairs);
        result.qa_ratio = qa_ratio(model);
        result.interrogation_distance = interrogation_distance(model, reference);
        result.n = outcomes.size();
        result.config_fingerprint = plan_fingerprint(spec, plan);
        result.outcomes = std::move(outcomes);
        report.policies.push_back(std::move(result));
    }
    return report;
}

std::string report_to_json(const EvalReport& report, bool include_outcomes) {
    json policies = json::array();
    for (const auto& p : report.policies) {
        json hist = json::object();
        for (const auto& [rounds, count] : p.rounds_hist) hist[std::to_string(rounds)] = count;
        json entry{{"id", p.id},
                   {"policy", p.policy},
                   {"accuracy", p.accuracy},
                   {"qa_ratio", p.qa_ratio},
                   {"interrogation_distance", p.interrogation_distance},
                   {"n", p.n},
                   {"rounds_hist", std::move(hist)},
                   {"config_fingerprint", p.config_fingerprint}};
        if (include_outcomes) {
            json cases = json::array();
            for (const auto& o : p.outcomes)
                cases.push_back({{"case_id", o.case_id},
                                 {"predicted", o.predicted},
                                 {"truth", o.truth},
                                 {"questions", o.model.questions},
                                 {"answers", o.model.answers},
                                 {"reference_questions", o.reference.questions},
                                 {"reference_answers", o.reference.answers},
                                 {"stop_reason", to_string(o.stop_reason)}});
            entry["outcomes"] = std::move(cases);
        }
        policies.push_back(std::move(entry));
    }
    json doc{{"corpus_id", report.corpus_id},
             {"graph_version", report.graph_version},
             {"seeds", {{"engine", report.engine_seed}, {"patient", report.patient_seed}}},
             {"policies", std::move(policies)}};
    return doc.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::size_t width = 6;
    for (const auto& p : report.policies) width = std::max(width, p.id.size());

    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %6s  %8s  %9s  %8s  %11s\n", static_cast<int>(width), "policy", "n",
                  "accuracy", "qa_ratio", "distance", "mean_rounds");
    out += buf;
    out += std::string(width + 53, '-') + "\n";
    for (const auto& p : report.policies) {
        double rounds = 0.0;
        for (const auto& [r, count] : p.rounds_hist) rounds += static_cast<double>(r * count);
        rounds /= static_cast<double>(std::max<std::size_t>(p.n, 1));
        std::snprintf(buf, sizeof buf, "%-*s  %6zu  %8.4f  %9.4f  %8.4f  %11.2f\n", static_cast<int>(width),
                      p.id.c_str(), p.n, p.accuracy, p.qa_ratio, p.interrogation_distance, rounds);
        out += buf;
    }
    return out;
}

} // namespace dopi
