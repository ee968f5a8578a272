#include "dopi/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "dopi/error.hpp"

namespace dopi {

void PatientConfig::validate() const {
    if (!(misjudgment_rate >= 0.0 && misjudgment_rate < 1.0))
        throw DataError("BAD_CONFIG", "misjudgment_rate must lie in [0, 1)");
    if (disclosure_fraction && !(*disclosure_fraction >= 0.0 && *disclosure_fraction <= 1.0))
        throw DataError("BAD_CONFIG", "disclosure fraction must lie in [0, 1]");
}

SimulatedPatient::SimulatedPatient(CaseRecord truth, PatientConfig config)
    : truth_(std::move(truth)), config_(config), rng_(config.seed) {
    config_.validate();
}

std::size_t disclosure_size(const PatientConfig& config, std::size_t truth_size) {
    if (config.disclosure_fraction)
        return std::min(truth_size, static_cast<std::size_t>(std::llround(*config.disclosure_fraction * static_cast<double>(truth_size))));
    return std::min(truth_size, config.disclosure_count);
}

std::set<SymptomId> SimulatedPatient::initial_complaint(const KnowledgeGraph& g) const {
    for (const auto& s : truth_.symptoms)
        if (!g.contains(s)) throw DataError("UNKNOWN_SYMPTOM", "case symptom '" + s.str() + "' is not in the graph");

    const auto n = disclosure_size(config_, truth_.symptoms.size());
    std::vector<SymptomId> order(truth_.symptoms.begin(), truth_.symptoms.end());
    if (config_.mode == DisclosureMode::RandomSubset) {
        Rng rng(config_.seed ^ 0x9e3779b97f4a7c15ull);
        std::shuffle(order.begin(), order.end(), rng);
    } else {
        const auto disease = g.disease_index(truth_.disease);
        auto weight = [&](const SymptomId& s) { return disease ? g.weight(*g.symptom_index(s), *disease) : 0.0; };
        std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) { return weight(a) > weight(b); });
    }
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n)};
}

Answer answer(const SimulatedPatient& patient, const SymptomId& symptom, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool flip = unit(rng) < patient.config().misjudgment_rate;
    const bool has = patient.truth().symptoms.contains(symptom);
    return (has != flip) ? Answer::Present : Answer::Absent;
}

Answer SimulatedPatient::answer(const SymptomId& symptom) { return dopi::answer(*this, symptom, rng_); }

AnswerSet SimulatedPatient::answer_batch(const QuestionBatch& batch) {
    AnswerSet out;
    for (const auto& s : batch.symptoms) out[s] = answer(s);
    return out;
}

} // namespace dopi
