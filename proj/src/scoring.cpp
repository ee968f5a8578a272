#include "dopi/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "dopi/error.hpp"

namespace dopi {

double NoiseSchedule::sigma(std::size_t round) const {
    if (round == 0) throw DataError("BAD_ROUND", "noise rounds are 1-based");
    if (!(sigma0 > 0.0)) return 0.0;
    switch (decay) {
    case Decay::Inverse:
        return sigma0 / static_cast<double>(round);
    case Decay::Exponential:
        return sigma0 * std::exp(-std::max(rate, 0.0) * static_cast<double>(round - 1));
    case Decay::Constant:
        return sigma0;
    }
    return sigma0;
}

PatientVector patient_vector(const SymptomRecorder& recorder, const KnowledgeGraph& g) {
    auto check = [&g](const SymptomId& s) {
        if (!g.contains(s)) throw DataError("UNKNOWN_SYMPTOM", "unknown symptom '" + s.str() + "'");
    };
    for (const auto& s : recorder.absent) check(s);
    for (const auto& s : recorder.asked) check(s);

    PatientVector p;
    p.values.assign(g.symptom_count(), 0.0);
    for (const auto& s : recorder.present) {
        check(s);
        p.values[*g.symptom_index(s)] = 1.0;
    }
    return p;
}

double cosine_similarity(std::span<const double> patient, std::span<const double> disease) {
    if (patient.size() != disease.size())
        throw DataError("DIMENSION_MISMATCH", "vector dimensions differ: " + std::to_string(patient.size()) +
                                                  " vs " + std::to_string(disease.size()));
    double dot = 0.0;
    double pp = 0.0;
    double dd = 0.0;
    for (std::size_t k = 0; k < patient.size(); ++k) {
        dot += patient[k] * disease[k];
        pp += patient[k] * patient[k];
        dd += disease[k] * disease[k];
    }
    if (pp == 0.0 || dd == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(pp) * std::sqrt(dd)), 0.0, 1.0);
}

double cosine_similarity(const PatientVector& patient, const DiseaseVector& disease) {
    return cosine_similarity(std::span<const double>(patient.values), std::span<const double>(disease.values));
}

DiseaseRanking rank_diseases(const KnowledgeGraph& g, const PatientVector& patient) {
    if (patient.values.size() != g.symptom_count())
        throw DataError("DIMENSION_MISMATCH", "patient vector was not built against this graph");

    DiseaseRanking ranking;
    ranking.entries.reserve(g.disease_count());
    std::vector<double> column(g.symptom_count());
    for (std::size_t i = 0; i < g.disease_count(); ++i) {
        for (std::size_t k = 0; k < g.symptom_count(); ++k) column[k] = g.weight(k, i);
        ranking.entries.push_back({g.diseases()[i], cosine_similarity(patient.values, column)});
    }
    std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& a, const auto& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.disease < b.disease;
    });
    return ranking;
}

SymptomScoreSet score_symptoms(const KnowledgeGraph& g, const DiseaseRanking& ranking,
                               const SymptomRecorder& recorder, std::optional<std::size_t> top_n) {
    if (top_n && *top_n == 0) throw DataError("BAD_TOP_N", "top_n_diseases must be positive");
    const std::size_t n = std::min(top_n.value_or(ranking.entries.size()), ranking.entries.size());

    std::vector<std::pair<std::size_t, double>> influence;
    influence.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto i = g.disease_index(ranking.entries[r].disease);
        if (!i) throw DataError("UNKNOWN_DISEASE", "ranking names unknown disease '" +
                                                       ranking.entries[r].disease.str() + "'");
        influence.emplace_back(*i, ranking.entries[r].similarity);
    }

    SymptomScoreSet scores;
    for (std::size_t j = 0; j < g.symptom_count(); ++j) {
        const auto& s = g.symptoms()[j];
        if (recorder.known(s)) continue;
        double score = 0.0;
        for (const auto& [i, similarity] : influence) score += g.weight(j, i) * similarity;
        scores.emplace(s, score);
    }
    return scores;
}

SymptomScoreSet raw_weight_scores(const KnowledgeGraph& g, const SymptomRecorder& recorder) {
    SymptomScoreSet scores;
    for (std::size_t j = 0; j < g.symptom_count(); ++j) {
        const auto& s = g.symptoms()[j];
        if (recorder.known(s)) continue;
        double total = 0.0;
        for (std::size_t i = 0; i < g.disease_count(); ++i) total += g.weight(j, i);
        scores.emplace(s, total);
    }
    return scores;
}

SymptomScoreSet perturb_scores(const SymptomScoreSet& scores, std::size_t round,
                               const NoiseSchedule& schedule, Rng& rng) {
    const double sigma = schedule.sigma(round);
    if (sigma == 0.0) return scores;
    std::normal_distribution<double> noise(0.0, sigma);
    SymptomScoreSet out;
    for (const auto& [s, score] : scores) out.emplace_hint(out.end(), s, score + noise(rng));
    return out;
}

std::vector<SymptomId> select_candidates(const SymptomScoreSet& scores, std::size_t batch_size) {
    if (batch_size == 0) throw DataError("BAD_BATCH", "batch size must be at least 1");
    std::vector<std::pair<SymptomId, double>> ordered(scores.begin(), scores.end());
    const auto take = std::min(batch_size, ordered.size());
    std::partial_sort(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(take), ordered.end(),
                      [](const auto& a, const auto& b) {
                          if (a.second != b.second) return a.second > b.second;
                          return a.first < b.first;
                      });
    std::vector<SymptomId> out;
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) out.push_back(ordered[r].first);
    return out;
}

} // namespace dopi
