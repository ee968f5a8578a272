#pragma once

#include <set>
#include <string>

#include "dopi/session.hpp"

namespace dopi {

// Dialogue mechanics: term alignment, question rendering, answer parsing.
class GuidanceModel {
public:
    virtual ~GuidanceModel() = default;

    virtual std::string id() const = 0;
    virtual std::set<SymptomId> align(const std::string& text) const = 0;
    virtual std::string render_question(const QuestionBatch& batch) const = 0;
    // Keys of the result are always a subset of the batch.
    virtual AnswerSet parse_answer(const std::string& text, const QuestionBatch& batch) const = 0;
};

struct ExpertOutput {
    DiseaseId disease;
    std::string advice;
    UpdateProposal hints;
};

// Produces the final diagnosis. The returned disease must appear in the ranking.
class ExpertModel {
public:
    virtual ~ExpertModel() = default;

    virtual std::string id() const = 0;
    virtual ExpertOutput diagnose(const SymptomRecorder& recorder, const DiseaseRanking& ranking) const = 0;
};

} // namespace dopi
