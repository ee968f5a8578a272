#include "dopi/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "dopi/error.hpp"

namespace dopi {

namespace {

using Rng64 = std::mt19937_64;

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, i);
    return buf;
}

std::size_t overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t n = 0;
    for (auto x : a) n += static_cast<std::size_t>(std::count(b.begin(), b.end(), x));
    return n;
}

// One attempt at assigning signatures; empty on failure.
std::vector<std::vector<std::size_t>> draw_signatures(const SyntheticSpec& spec, Rng64& rng) {
    const std::size_t clusters = (spec.diseases + spec.cluster_size - 1) / spec.cluster_size;
    const std::size_t core_total = clusters * spec.shared_core;
    const std::size_t peripheral = spec.signature_size - spec.shared_core;

    std::vector<std::size_t> usage(spec.symptoms, 0);
    std::vector<std::vector<std::size_t>> sigs;
    for (std::size_t d = 0; d < spec.diseases; ++d) {
        const std::size_t cluster = d / spec.cluster_size;
        std::vector<std::size_t> sig;
        for (std::size_t c = 0; c < spec.shared_core; ++c) sig.push_back(cluster * spec.shared_core + c);

        std::vector<std::size_t> taken_in_cluster;
        for (std::size_t other = cluster * spec.cluster_size; other < d; ++other)
            taken_in_cluster.insert(taken_in_cluster.end(), sigs[other].begin(), sigs[other].end());

        std::vector<std::size_t> pool;
        for (std::size_t s = core_total; s < spec.symptoms; ++s)
            if (std::find(taken_in_cluster.begin(), taken_in_cluster.end(), s) == taken_in_cluster.end())
                pool.push_back(s);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::stable_sort(pool.begin(), pool.end(), [&](auto a, auto b) { return usage[a] < usage[b]; });

        for (auto s : pool) {
            if (sig.size() == spec.shared_core + peripheral) break;
            sig.push_back(s);
            bool ok = true;
            for (const auto& other : sigs)
                if (overlap(sig, other) > spec.max_overlap) ok = false;
            if (!ok) sig.pop_back();
        }
        if (sig.size() != spec.signature_size) return {};
        for (auto s : sig) ++usage[s];
        sigs.push_back(std::move(sig));
    }
    return sigs;
}

} // namespace

void SyntheticSpec::validate() const {
    if (diseases == 0 || symptoms == 0) throw DataError("BAD_CONFIG", "synthetic benchmark needs diseases and symptoms");
    if (cluster_size == 0) throw DataError("BAD_CONFIG", "cluster_size must be positive");
    if (shared_core > signature_size) throw DataError("BAD_CONFIG", "shared_core exceeds signature_size");
    if (cluster_size > 1 && shared_core > max_overlap)
        throw DataError("BAD_CONFIG", "shared_core exceeds max_overlap");
    const std::size_t clusters = (diseases + cluster_size - 1) / cluster_size;
    if (clusters * shared_core + cluster_size * (signature_size - shared_core) > symptoms)
        throw DataError("BAD_CONFIG", "not enough symptoms for the requested signatures");
    if (training_cases_per_disease == 0) throw DataError("BAD_CONFIG", "training_cases_per_disease must be positive");
    if (!(peripheral_rate >= 0.0 && peripheral_rate <= 1.0))
        throw DataError("BAD_CONFIG", "peripheral_rate must lie in [0, 1]");
}

SyntheticBenchmark make_synthetic_benchmark(const SyntheticSpec& spec) {
    spec.validate();
    Rng64 rng(spec.seed);

    std::vector<std::vector<std::size_t>> sigs;
    for (int attempt = 0; attempt < 100 && sigs.empty(); ++attempt) sigs = draw_signatures(spec, rng);
    if (sigs.empty()) throw DataError("BAD_CONFIG", "could not satisfy the signature overlap bound");

    SyntheticBenchmark out;
    std::bernoulli_distribution keep(spec.peripheral_rate);
    for (std::size_t d = 0; d < spec.diseases; ++d) {
        const DiseaseId disease(numbered("dis", d));
        auto& signature = out.signatures[disease];
        for (auto s : sigs[d]) signature.insert(SymptomId(numbered("sym", s)));

        std::vector<CaseRecord> cases(spec.training_cases_per_disease, CaseRecord{disease, {}});
        for (std::size_t k = 0; k < sigs[d].size(); ++k) {
            const SymptomId symptom(numbered("sym", sigs[d][k]));
            bool seen = false;
            for (auto& c : cases) {
                if (k < spec.shared_core || keep(rng)) {
                    c.symptoms.insert(symptom);
                    seen = true;
                }
            }
            if (!seen) {
                std::uniform_int_distribution<std::size_t> pick(0, cases.size() - 1);
                cases[pick(rng)].symptoms.insert(symptom);
            }
        }
        out.training.insert(out.training.end(), cases.begin(), cases.end());
        for (std::size_t t = 0; t < spec.test_cases_per_disease; ++t) out.test.push_back({disease, signature});
    }
    return out;
}

std::size_t max_signature_overlap(const std::map<DiseaseId, std::set<SymptomId>>& signatures) {
    std::size_t worst = 0;
    for (auto a = signatures.begin(); a != signatures.end(); ++a) {
        for (auto b = std::next(a); b != signatures.end(); ++b) {
            std::size_t n = 0;
            for (const auto& s : a->second) n += b->second.count(s);
            worst = std::max(worst, n);
        }
    }
    return worst;
}

} // namespace dopi
