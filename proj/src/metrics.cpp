#include <cmath>

#include "dopi/error.hpp"
#include "dopi/eval.hpp"

namespace dopi {

double diagnostic_accuracy(std::span<const std::pair<DiseaseId, DiseaseId>> results) {
    if (results.empty()) throw DataError("EMPTY_INPUT", "diagnostic accuracy needs at least one result");
    std::size_t correct = 0;
    for (const auto& [predicted, truth] : results)
        if (predicted == truth) ++correct;
    return static_cast<double>(correct) / static_cast<double>(results.size());
}

double qa_ratio(std::span<const RoundCounts> sessions) {
    if (sessions.empty()) throw DataError("EMPTY_INPUT", "Q&A ratio needs at least one session");
    double total = 0.0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (sessions[i].answers == 0)
            throw DataError("ZERO_ANSWERS", "session " + std::to_string(i) + " has no answer rounds");
        total += static_cast<double>(sessions[i].questions) / static_cast<double>(sessions[i].answers);
    }
    return total / static_cast<double>(sessions.size());
}

double interrogation_distance(std::span<const RoundCounts> model, std::span<const RoundCounts> reference) {
    if (model.size() != reference.size())
        throw DataError("LENGTH_MISMATCH", "got " + std::to_string(model.size()) + " model runs but " +
                                               std::to_string(reference.size()) + " references");
    if (model.empty()) throw DataError("EMPTY_INPUT", "interrogation distance needs at least one pair");
    double total = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double dq = static_cast<double>(model[i].questions) - static_cast<double>(reference[i].questions);
        const double da = static_cast<double>(model[i].answers) - static_cast<double>(reference[i].answers);
        total += dq * dq + da * da;
    }
    return total / static_cast<double>(model.size());
}

} // namespace dopi
