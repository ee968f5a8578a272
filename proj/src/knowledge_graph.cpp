#include "dopi/knowledge_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dopi/error.hpp"

namespace dopi {

KnowledgeGraph::KnowledgeGraph(std::vector<SymptomId> symptoms, std::vector<DiseaseId> diseases,
                               std::uint64_t version)
    : symptoms_(std::move(symptoms)), diseases_(std::move(diseases)), version_(version) {
    for (std::size_t k = 0; k < symptoms_.size(); ++k) {
        if (symptoms_[k].empty()) throw DataError("EMPTY_ID", "empty symptom id");
        if (!symptom_pos_.emplace(symptoms_[k], k).second)
            throw DataError("DUPLICATE_ID", "duplicate symptom id '" + symptoms_[k].str() + "'");
    }
    for (std::size_t i = 0; i < diseases_.size(); ++i) {
        if (diseases_[i].empty()) throw DataError("EMPTY_ID", "empty disease id");
        if (!disease_pos_.emplace(diseases_[i], i).second)
            throw DataError("DUPLICATE_ID", "duplicate disease id '" + diseases_[i].str() + "'");
    }
    sd_weights_.assign(symptoms_.size() * diseases_.size(), 0.0);
    sd_present_.assign(symptoms_.size() * diseases_.size(), 0);
}

std::optional<std::size_t> KnowledgeGraph::symptom_index(const SymptomId& id) const {
    auto it = symptom_pos_.find(id);
    if (it == symptom_pos_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> KnowledgeGraph::disease_index(const DiseaseId& id) const {
    auto it = disease_pos_.find(id);
    if (it == disease_pos_.end()) return std::nullopt;
    return it->second;
}

namespace {

void check_weight(double w) {
    if (!(w >= 0.0 && w <= 1.0))
        throw DataError("WEIGHT_RANGE", "edge weight " + std::to_string(w) + " outside [0, 1]");
}

} // namespace

void KnowledgeGraph::set_weight(std::size_t symptom, std::size_t disease, double w) {
    check_weight(w);
    const auto at = symptom * diseases_.size() + disease;
    sd_weights_.at(at) = w;
    sd_present_.at(at) = 1;
}

std::size_t KnowledgeGraph::edge_count() const {
    return static_cast<std::size_t>(std::count(sd_present_.begin(), sd_present_.end(), 1));
}

std::optional<double> KnowledgeGraph::link_weight(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    auto it = ss_weights_.find({a, b});
    if (it == ss_weights_.end()) return std::nullopt;
    return it->second;
}

void KnowledgeGraph::set_link_weight(std::size_t a, std::size_t b, double w) {
    check_weight(w);
    if (a == b) throw DataError("SELF_LINK", "symptom link must join two distinct symptoms");
    if (a >= symptoms_.size() || b >= symptoms_.size())
        throw DataError("UNKNOWN_SYMPTOM", "symptom link endpoint out of range");
    if (a > b) std::swap(a, b);
    ss_weights_[{a, b}] = w;
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.version_ == b.version_ && a.symptoms_ == b.symptoms_ && a.diseases_ == b.diseases_ &&
           a.sd_weights_ == b.sd_weights_ && a.sd_present_ == b.sd_present_ &&
           a.ss_weights_ == b.ss_weights_;
}

KnowledgeGraph build_graph(std::span<const CaseRecord> cases, const BuildOptions& options) {
    if (cases.empty()) throw DataError("EMPTY_DATASET", "empty dataset");
    if (!(options.smoothing >= 0.0) || !std::isfinite(options.smoothing))
        throw DataError("BAD_SMOOTHING", "smoothing must be a finite non-negative number");

    std::set<SymptomId> symptom_set;
    std::set<DiseaseId> disease_set;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        if (cases[c].disease.empty())
            throw DataError("BAD_CASE", "case " + std::to_string(c) + " has no disease");
        if (cases[c].symptoms.empty())
            throw DataError("BAD_CASE", "case " + std::to_string(c) + " has an empty symptom list");
        disease_set.insert(cases[c].disease);
        symptom_set.insert(cases[c].symptoms.begin(), cases[c].symptoms.end());
    }

    KnowledgeGraph g({symptom_set.begin(), symptom_set.end()},
                     {disease_set.begin(), disease_set.end()});

    std::vector<double> disease_cases(g.disease_count(), 0.0);
    std::map<std::pair<std::size_t, std::size_t>, double> counts;
    std::map<std::pair<std::size_t, std::size_t>, double> co_counts;
    std::vector<double> symptom_cases(g.symptom_count(), 0.0);
    for (const auto& rec : cases) {
        const auto i = *g.disease_index(rec.disease);
        disease_cases[i] += 1.0;
        std::vector<std::size_t> ks;
        for (const auto& s : rec.symptoms) {
            const auto k = *g.symptom_index(s);
            counts[{k, i}] += 1.0;
            symptom_cases[k] += 1.0;
            ks.push_back(k);
        }
        if (options.symptom_links) {
            for (std::size_t x = 0; x < ks.size(); ++x)
                for (std::size_t y = x + 1; y < ks.size(); ++y)
                    co_counts[{std::min(ks[x], ks[y]), std::max(ks[x], ks[y])}] += 1.0;
        }
    }

    for (const auto& [key, count] : counts) {
        const auto [k, i] = key;
        g.set_weight(k, i, (count + options.smoothing) / (disease_cases[i] + options.smoothing));
    }
    // Link weight: cases containing both / cases containing either.
    for (const auto& [key, both] : co_counts) {
        const double either = symptom_cases[key.first] + symptom_cases[key.second] - both;
        g.set_link_weight(key.first, key.second, both / either);
    }
    return g;
}

DiseaseVector disease_vector(const KnowledgeGraph& g, const DiseaseId& disease) {
    const auto i = g.disease_index(disease);
    if (!i) throw DataError("UNKNOWN_DISEASE", "unknown disease '" + disease.str() + "'");
    DiseaseVector v;
    v.values.resize(g.symptom_count());
    for (std::size_t k = 0; k < g.symptom_count(); ++k) v.values[k] = g.weight(k, *i);
    return v;
}

KnowledgeGraph apply_update(const KnowledgeGraph& g, const UpdateProposal& proposal,
                            const UpdateOptions& options) {
    if (!(options.step > 0.0) || !std::isfinite(options.step))
        throw DataError("BAD_STEP", "update step must be positive");

    // Resolve everything before touching the copy so a bad delta leaves no trace.
    struct Resolved {
        std::size_t symptom;
        std::size_t target;
        bool link;
        double delta;
    };
    std::vector<Resolved> resolved;
    resolved.reserve(proposal.deltas.size());
    for (const auto& d : proposal.deltas) {
        if (!std::isfinite(d.delta))
            throw DataError("BAD_DELTA", "non-finite delta on symptom '" + d.edge.symptom.str() + "'");
        const auto k = g.symptom_index(d.edge.symptom);
        if (!k) throw DataError("UNKNOWN_SYMPTOM", "unknown symptom '" + d.edge.symptom.str() + "'");
        if (const auto* disease = std::get_if<DiseaseId>(&d.edge.target)) {
            const auto i = g.disease_index(*disease);
            if (!i) throw DataError("UNKNOWN_DISEASE", "unknown disease '" + disease->str() + "'");
            resolved.push_back({*k, *i, false, d.delta});
        } else {
            const auto& other = std::get<SymptomId>(d.edge.target);
            const auto j = g.symptom_index(other);
            if (!j) throw DataError("UNKNOWN_SYMPTOM", "unknown symptom '" + other.str() + "'");
            if (*j == *k)
                throw DataError("SELF_LINK", "symptom link to itself: '" + other.str() + "'");
            resolved.push_back({*k, *j, true, d.delta});
        }
    }

    KnowledgeGraph next = g;
    for (const auto& r : resolved) {
        if (r.link) {
            const auto current = next.link_weight(r.symptom, r.target);
            if (!current && !options.allow_edge_creation) continue;
            next.set_link_weight(r.symptom, r.target,
                                 std::clamp(current.value_or(0.0) + options.step * r.delta, 0.0, 1.0));
        } else {
            if (!next.has_edge(r.symptom, r.target) && !options.allow_edge_creation) continue;
            next.set_weight(r.symptom, r.target,
                            std::clamp(next.weight(r.symptom, r.target) + options.step * r.delta, 0.0, 1.0));
        }
    }
    next.set_version(g.version() + 1);
    return next;
}

} // namespace dopi
