#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dopi/ids.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/recorder.hpp"

namespace dopi {

using Rng = std::mt19937_64;

// Binary indicator of confirmed-present symptoms over the graph's symptom order.
struct PatientVector {
    std::vector<double> values;
};

struct RankedDisease {
    DiseaseId disease;
    double similarity = 0.0;

    friend bool operator==(const RankedDisease&, const RankedDisease&) = default;
};

// Sorted by similarity descending, then disease id ascending.
struct DiseaseRanking {
    std::vector<RankedDisease> entries;

    bool empty() const noexcept { return entries.empty(); }
    const RankedDisease& top() const { return entries.front(); }
    double top_similarity() const { return entries.empty() ? 0.0 : entries.front().similarity; }

    friend bool operator==(const DiseaseRanking&, const DiseaseRanking&) = default;
};

// Candidate symptom -> importance score. Iteration order is by symptom id.
using SymptomScoreSet = std::map<SymptomId, double>;

// Standard deviation of the score perturbation as a function of the 1-based round.
struct NoiseSchedule {
    enum class Decay { Inverse, Exponential, Constant };

    double sigma0 = 0.05;
    Decay decay = Decay::Inverse;
    double rate = 0.5; // Exponential only: sigma0 * exp(-rate * (round - 1))

    double sigma(std::size_t round) const;

    friend bool operator==(const NoiseSchedule&, const NoiseSchedule&) = default;
};

PatientVector patient_vector(const SymptomRecorder& recorder, const KnowledgeGraph& g);

// (d . p) / (|d| |p|), clamped to [0, 1]; 0 when either vector is all zero.
double cosine_similarity(std::span<const double> patient, std::span<const double> disease);
double cosine_similarity(const PatientVector& patient, const DiseaseVector& disease);

DiseaseRanking rank_diseases(const KnowledgeGraph& g, const PatientVector& patient);

// Score(j) = sum_i w_ji * S_i over the first `top_n` ranked diseases (all when
// unset), for every symptom the recorder does not know yet.
SymptomScoreSet score_symptoms(const KnowledgeGraph& g, const DiseaseRanking& ranking,
                               const SymptomRecorder& recorder,
                               std::optional<std::size_t> top_n = std::nullopt);

// Sum of raw edge weights per unknown symptom. Used when every S_i is zero.
SymptomScoreSet raw_weight_scores(const KnowledgeGraph& g, const SymptomRecorder& recorder);

// Adds N(0, sigma(round)^2) to each score, one draw per symptom in id order.
SymptomScoreSet perturb_scores(const SymptomScoreSet& scores, std::size_t round,
                               const NoiseSchedule& schedule, Rng& rng);

// Highest min(batch_size, |scores|) symptoms, ties by id ascending.
std::vector<SymptomId> select_candidates(const SymptomScoreSet& scores, std::size_t batch_size = 3);

} // namespace dopi
