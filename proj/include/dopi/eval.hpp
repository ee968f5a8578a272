#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dopi/dialogue.hpp"
#include "dopi/interfaces.hpp"
#include "dopi/knowledge_graph.hpp"

namespace dopi {

// Question rounds and answer/diagnosis turns of one consultation.
struct RoundCounts {
    std::size_t questions = 0;
    std::size_t answers = 0;

    friend bool operator==(const RoundCounts&, const RoundCounts&) = default;
};

// (predicted, truth) pairs; share of exact matches.
double diagnostic_accuracy(std::span<const std::pair<DiseaseId, DiseaseId>> results);
// Mean of questions / answers per session.
double qa_ratio(std::span<const RoundCounts> sessions);
// Mean squared gap between model counts and reference counts.
double interrogation_distance(std::span<const RoundCounts> model, std::span<const RoundCounts> reference);

enum class PolicyId { Dopi, GreedyNoNoise, RandomQuestion, NoQuestion };

const char* to_string(PolicyId p);
PolicyId policy_from_string(const std::string& s);

struct PolicySpec {
    PolicyId id = PolicyId::Dopi;
    // Applied on top of the corpus engine config after the policy's own changes.
    nlohmann::json engine_overrides = nlohmann::json::object();
    std::optional<double> misjudgment_rate;
    // Report label; defaults to the policy name.
    std::string label;

    std::string name() const { return label.empty() ? to_string(id) : label; }
};

struct CaseOutcome {
    std::string case_id;
    DiseaseId predicted;
    DiseaseId truth;
    RoundCounts model;
    RoundCounts reference;
    StopReason stop_reason = StopReason::None;

    friend bool operator==(const CaseOutcome&, const CaseOutcome&) = default;
};

struct PolicyResult {
    std::string id;
    std::string policy;
    double accuracy = 0.0;
    double qa_ratio = 0.0;
    double interrogation_distance = 0.0;
    std::size_t n = 0;
    // rounds asked -> number of cases
    std::map<std::size_t, std::size_t> rounds_hist;
    std::string config_fingerprint;
    std::vector<CaseOutcome> outcomes;

    friend bool operator==(const PolicyResult&, const PolicyResult&) = default;
};

struct EvalReport {
    std::string corpus_id;
    std::uint64_t graph_version = 0;
    std::uint64_t engine_seed = 0;
    std::uint64_t patient_seed = 0;
    std::vector<PolicyResult> policies;

    const PolicyResult& policy(const std::string& id) const;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct BenchmarkOptions {
    unsigned threads = 1;
    // When set, per-case seeds are derived from it instead of read from the transcripts.
    std::optional<std::uint64_t> seed;
};

// Replays every transcript's initial disclosure under each policy against a
// fresh simulated patient and compares round counts with the transcript's.
EvalReport run_benchmark(const Corpus& corpus, std::span<const PolicySpec> policies, const KnowledgeGraph& g,
                         const ExpertModel& expert, const BenchmarkOptions& options = {});

std::string report_to_json(const EvalReport& report, bool include_outcomes = false);
std::string report_table(const EvalReport& report);

} // namespace dopi
