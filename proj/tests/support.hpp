#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dopi/knowledge_graph.hpp"

namespace dopi::testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return DOPI_TEST_DATA_DIR; }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("dopi-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string sym(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%02zu", k);
    return buf;
}

inline std::string dis(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "d%02zu", i);
    return buf;
}

// Each disease gets the listed symptoms with weight 1 (one case per disease).
inline KnowledgeGraph uniform_graph(const std::map<std::string, std::vector<std::string>>& signatures) {
    std::vector<CaseRecord> cases;
    for (const auto& [d, symptoms] : signatures) {
        CaseRecord c{DiseaseId(d), {}};
        for (const auto& s : symptoms) c.symptoms.insert(SymptomId(s));
        cases.push_back(std::move(c));
    }
    return build_graph(cases);
}

// Random dense-ish graph with weights drawn from a few discrete levels so ties happen.
inline KnowledgeGraph random_graph(std::mt19937_64& rng, std::size_t max_symptoms, std::size_t max_diseases,
                                   double density = 0.4) {
    std::uniform_int_distribution<std::size_t> ns(2, max_symptoms);
    std::uniform_int_distribution<std::size_t> nd(1, max_diseases);
    const auto n_s = ns(rng);
    const auto n_d = nd(rng);
    std::vector<SymptomId> symptoms;
    std::vector<DiseaseId> diseases;
    for (std::size_t k = 0; k < n_s; ++k) symptoms.emplace_back(sym(k));
    for (std::size_t i = 0; i < n_d; ++i) diseases.emplace_back(dis(i));
    KnowledgeGraph g(symptoms, diseases, rng() % 7);
    std::bernoulli_distribution edge(density);
    std::uniform_int_distribution<int> level(1, 8);
    for (std::size_t k = 0; k < n_s; ++k)
        for (std::size_t i = 0; i < n_d; ++i)
            if (edge(rng)) g.set_weight(k, i, level(rng) / 8.0);
    return g;
}

} // namespace dopi::testing
