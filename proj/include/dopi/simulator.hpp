#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>

#include "dopi/knowledge_graph.hpp"
#include "dopi/scoring.hpp"
#include "dopi/session.hpp"

namespace dopi {

enum class DisclosureMode { TopWeight, RandomSubset };

struct PatientConfig {
    // Symptoms volunteered up front; `disclosure_fraction` wins when set.
    std::size_t disclosure_count = 2;
    std::optional<double> disclosure_fraction;
    DisclosureMode mode = DisclosureMode::TopWeight;
    // Probability of flipping an answer; must stay below 1.
    double misjudgment_rate = 0.0;
    std::uint64_t seed = 0;

    void validate() const;

    friend bool operator==(const PatientConfig&, const PatientConfig&) = default;
};

// Ground-truth patient. Answers honestly unless misjudgment is enabled.
class SimulatedPatient {
public:
    SimulatedPatient(CaseRecord truth, PatientConfig config);

    const CaseRecord& truth() const noexcept { return truth_; }
    const PatientConfig& config() const noexcept { return config_; }

    // TopWeight: the highest-weight truth symptoms for truth.disease, ties by id.
    // RandomSubset: a uniform subset drawn from the seed.
    std::set<SymptomId> initial_complaint(const KnowledgeGraph& g) const;

    // Uses the patient's own answer stream.
    Answer answer(const SymptomId& symptom);
    AnswerSet answer_batch(const QuestionBatch& batch);

private:
    CaseRecord truth_;
    PatientConfig config_;
    Rng rng_;
};

std::size_t disclosure_size(const PatientConfig& config, std::size_t truth_size);

// Membership test on truth.symptoms, flipped with probability misjudgment_rate.
// Always consumes exactly one uniform draw from `rng`.
Answer answer(const SimulatedPatient& patient, const SymptomId& symptom, Rng& rng);

} // namespace dopi
