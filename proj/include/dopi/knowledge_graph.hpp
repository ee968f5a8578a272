#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "dopi/ids.hpp"

namespace dopi {

// Ground-truth "disease + symptom list" tuple.
struct CaseRecord {
    DiseaseId disease;
    std::set<SymptomId> symptoms;

    friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

// d_ik = w_ki over the graph's symptom order.
struct DiseaseVector {
    std::vector<double> values;
};

// Identifies a symptom-disease edge or an (unordered) symptom-symptom edge.
struct EdgeRef {
    SymptomId symptom;
    std::variant<DiseaseId, SymptomId> target;

    friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

struct EdgeDelta {
    EdgeRef edge;
    double delta = 0.0;

    friend bool operator==(const EdgeDelta&, const EdgeDelta&) = default;
};

struct UpdateProposal {
    std::vector<EdgeDelta> deltas;
    std::string session_id;

    friend bool operator==(const UpdateProposal&, const UpdateProposal&) = default;
};

// Weighted symptom-disease graph. Symptom order defines the dimensions of
// patient and disease vectors; it never changes after construction.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(std::vector<SymptomId> symptoms, std::vector<DiseaseId> diseases,
                   std::uint64_t version = 0);

    const std::vector<SymptomId>& symptoms() const noexcept { return symptoms_; }
    const std::vector<DiseaseId>& diseases() const noexcept { return diseases_; }
    std::size_t symptom_count() const noexcept { return symptoms_.size(); }
    std::size_t disease_count() const noexcept { return diseases_.size(); }

    std::optional<std::size_t> symptom_index(const SymptomId& id) const;
    std::optional<std::size_t> disease_index(const DiseaseId& id) const;
    bool contains(const SymptomId& id) const { return symptom_index(id).has_value(); }
    bool contains(const DiseaseId& id) const { return disease_index(id).has_value(); }

    // Weight of edge (symptom k, disease i); 0 when the edge does not exist.
    double weight(std::size_t symptom, std::size_t disease) const {
        return sd_weights_[symptom * diseases_.size() + disease];
    }
    bool has_edge(std::size_t symptom, std::size_t disease) const {
        return sd_present_[symptom * diseases_.size() + disease] != 0;
    }
    void set_weight(std::size_t symptom, std::size_t disease, double w);
    std::size_t edge_count() const;

    // Symptom-symptom links, keyed by (lower index, higher index).
    const std::map<std::pair<std::size_t, std::size_t>, double>& symptom_links() const noexcept {
        return ss_weights_;
    }
    std::optional<double> link_weight(std::size_t a, std::size_t b) const;
    void set_link_weight(std::size_t a, std::size_t b, double w);

    std::uint64_t version() const noexcept { return version_; }
    void set_version(std::uint64_t v) noexcept { version_ = v; }

    friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

private:
    std::vector<SymptomId> symptoms_;
    std::vector<DiseaseId> diseases_;
    std::unordered_map<SymptomId, std::size_t> symptom_pos_;
    std::unordered_map<DiseaseId, std::size_t> disease_pos_;
    std::vector<double> sd_weights_;
    std::vector<std::uint8_t> sd_present_;
    std::map<std::pair<std::size_t, std::size_t>, double> ss_weights_;
    std::uint64_t version_ = 0;
};

struct BuildOptions {
    double smoothing = 0.0;
    // Also derive symptom-symptom links (co-occurrence over union).
    bool symptom_links = false;
};

// w_ki = (cases of disease i with symptom k + smoothing) / (cases of i + smoothing),
// for every observed (k, i) pair. Nodes are sorted lexicographically.
KnowledgeGraph build_graph(std::span<const CaseRecord> cases, const BuildOptions& options = {});

DiseaseVector disease_vector(const KnowledgeGraph& g, const DiseaseId& disease);

struct UpdateOptions {
    double step = 0.05;
    bool allow_edge_creation = false;
};

// Returns a new graph with every delta applied as clamp(w + step * delta, 0, 1)
// and version + 1. Unknown nodes reject the whole proposal. Deltas on edges
// that do not exist are skipped unless edge creation is enabled.
KnowledgeGraph apply_update(const KnowledgeGraph& g, const UpdateProposal& proposal,
                            const UpdateOptions& options = {});

inline constexpr int kGraphFormatVersion = 1;

std::string graph_to_json(const KnowledgeGraph& g);
KnowledgeGraph graph_from_json(const std::string& text);
void save_graph(const KnowledgeGraph& g, const std::filesystem::path& destination);
KnowledgeGraph load_graph(const std::filesystem::path& source);

// Case files: a JSON array or JSON Lines of {"disease": ..., "symptoms": [...]}.
std::vector<CaseRecord> cases_from_json(const std::string& text);
std::vector<CaseRecord> load_cases(const std::filesystem::path& source);
std::string cases_to_json(std::span<const CaseRecord> cases);

} // namespace dopi
