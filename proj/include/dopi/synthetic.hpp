#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "dopi/knowledge_graph.hpp"

namespace dopi {

// Diseases come in clusters that share `shared_core` symptoms; the rest of
// each signature is drawn from a common peripheral pool, disjoint within a
// cluster. No two signatures share more than `max_overlap` symptoms.
struct SyntheticSpec {
    std::size_t diseases = 50;
    std::size_t symptoms = 200;
    std::size_t signature_size = 8;
    std::size_t cluster_size = 5;
    std::size_t shared_core = 3;
    std::size_t max_overlap = 3;
    // Training cases keep every core symptom and each peripheral one with
    // probability `peripheral_rate`; every peripheral shows up at least once.
    std::size_t training_cases_per_disease = 5;
    double peripheral_rate = 0.85;
    // Test patients carry the full signature.
    std::size_t test_cases_per_disease = 4;
    std::uint64_t seed = 2024;

    void validate() const;
};

struct SyntheticBenchmark {
    std::map<DiseaseId, std::set<SymptomId>> signatures;
    std::vector<CaseRecord> training;
    std::vector<CaseRecord> test;
};

SyntheticBenchmark make_synthetic_benchmark(const SyntheticSpec& spec);

std::size_t max_signature_overlap(const std::map<DiseaseId, std::set<SymptomId>>& signatures);

} // namespace dopi
