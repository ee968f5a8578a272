#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dopi/ids.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/recorder.hpp"
#include "dopi/scoring.hpp"

namespace dopi {

enum class Answer { Present, Absent, Unsure };
using AnswerSet = std::map<SymptomId, Answer>;

enum class SessionState { ReadyToAsk, AwaitingAnswers, Finalized };

// Why a session stopped asking.
enum class StopReason { None, Threshold, MaxRounds, Exhausted, Forced };

// How the next batch is chosen. Random is the uninformed baseline.
enum class Selection { Scored, Random };

struct EngineConfig {
    double epsilon_stop = 0.8;
    std::size_t max_rounds = 10;
    std::size_t batch_size = 3;
    NoiseSchedule noise;
    std::optional<std::size_t> top_n_diseases; // unset: all diseases
    std::uint64_t seed = 0;
    Selection selection = Selection::Scored;
    // When every similarity is zero, rank candidates by summed raw weight.
    bool cold_start_fallback = true;
    // Also emit symptom-symptom deltas in update proposals.
    bool propose_symptom_links = false;

    void validate() const;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct QuestionBatch {
    std::vector<SymptomId> symptoms;
    std::size_t round = 0;

    friend bool operator==(const QuestionBatch&, const QuestionBatch&) = default;
};

struct Exchange {
    QuestionBatch batch;
    AnswerSet answers;

    friend bool operator==(const Exchange&, const Exchange&) = default;
};

struct Session {
    std::string id;
    std::uint64_t graph_version = 0;
    EngineConfig config;
    std::set<SymptomId> initial;
    SymptomRecorder recorder;
    std::size_t round = 0;
    SessionState state = SessionState::ReadyToAsk;
    StopReason stop_reason = StopReason::None;
    DiseaseRanking ranking;
    std::vector<Exchange> history;
    std::optional<QuestionBatch> outstanding;

    friend bool operator==(const Session&, const Session&) = default;
};

struct Diagnosis {
    DiseaseId disease;
    double confidence = 0.0;
    std::string advice_text;
    UpdateProposal update_proposal;
    // Which expert produced it; "fallback" when the configured one failed.
    std::string provenance;

    friend bool operator==(const Diagnosis&, const Diagnosis&) = default;
};

const char* to_string(Answer a);
const char* to_string(SessionState s);
const char* to_string(StopReason r);
const char* to_string(Selection s);
Answer answer_from_string(const std::string& s);
SessionState state_from_string(const std::string& s);
StopReason stop_reason_from_string(const std::string& s);
Selection selection_from_string(const std::string& s);

} // namespace dopi
