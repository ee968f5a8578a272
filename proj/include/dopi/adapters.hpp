#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dopi/interfaces.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/remote.hpp"

namespace dopi {

// Colloquial phrase -> symptom, plus an optional colloquial rendering per
// symptom. Phrases are stored normalized (see normalize_text).
class TermAliasTable {
public:
    // Throws when the normalized phrase already maps to another symptom.
    void add_alias(const std::string& phrase, const SymptomId& symptom);
    // Rendering used in questions; also registered as an alias.
    void set_phrase(const SymptomId& symptom, const std::string& phrase);

    // Checks every target against the graph and registers each canonical id
    // as an alias of itself where no explicit alias claims it.
    void bind(const KnowledgeGraph& g);
    bool bound() const noexcept { return bound_; }

    std::optional<SymptomId> lookup(const std::string& phrase) const;
    // Colloquial phrase when one exists, the canonical id otherwise.
    std::string display(const SymptomId& symptom) const;

    struct Match {
        std::size_t begin; // token offsets, [begin, end)
        std::size_t end;
        SymptomId symptom;
    };
    // Greedy left-to-right longest match over already-normalized tokens.
    std::vector<Match> scan(const std::vector<std::string>& tokens) const;

    const std::map<std::string, SymptomId>& aliases() const noexcept { return aliases_; }

    static TermAliasTable from_json(const std::string& text);
    static TermAliasTable load(const std::filesystem::path& path);

private:
    std::map<std::string, SymptomId> aliases_;
    std::set<std::string> explicit_;
    std::map<SymptomId, std::string> phrases_;
    std::size_t max_tokens_ = 0;
    bool bound_ = false;
};

// Affirmation/negation cues and rendering templates for one language.
struct CueLexicon {
    std::vector<std::string> affirm;
    std::vector<std::string> negate;
    std::vector<std::string> unsure;
    // Marks a cue as applying to every symptom of the batch ("all", "none").
    std::vector<std::string> all;
    // Words that end a clause, in addition to , ; . ! ? and newlines.
    std::vector<std::string> clause_breaks;

    std::string question_template = "Have you noticed {list}?";
    std::string list_separator = ", ";
    std::string list_last_separator = " or ";
    std::string complaint_template = "I have been having {list}.";
    std::string complaint_last_separator = " and ";
    std::string complaint_empty = "I just don't feel well.";
    std::string affirm_template = "Yes, I have {symptom}.";
    std::string negate_template = "No, I don't have {symptom}.";
    std::string unsure_template = "I'm not sure about {symptom}.";

    static CueLexicon from_json(const std::string& text);
    static CueLexicon load(const std::filesystem::path& path);
};

std::set<SymptomId> align_terms(const TermAliasTable& table, const std::string& text);

std::string render_list(const std::vector<std::string>& items, const CueLexicon& lexicon);
std::string render_question(const QuestionBatch& batch, const TermAliasTable& table, const CueLexicon& lexicon);

// Per-clause cue matching. Batch symptoms without a cue come back Unsure.
AnswerSet parse_answer(const std::string& text, const QuestionBatch& batch, const TermAliasTable& table,
                       const CueLexicon& lexicon);

class RuleBasedGuidance final : public GuidanceModel {
public:
    RuleBasedGuidance(TermAliasTable table, CueLexicon lexicon)
        : table_(std::move(table)), lexicon_(std::move(lexicon)) {}

    std::string id() const override { return "rule_based"; }
    std::set<SymptomId> align(const std::string& text) const override { return align_terms(table_, text); }
    std::string render_question(const QuestionBatch& batch) const override {
        return dopi::render_question(batch, table_, lexicon_);
    }
    AnswerSet parse_answer(const std::string& text, const QuestionBatch& batch) const override {
        return dopi::parse_answer(text, batch, table_, lexicon_);
    }

    const TermAliasTable& table() const noexcept { return table_; }
    const CueLexicon& lexicon() const noexcept { return lexicon_; }

private:
    TermAliasTable table_;
    CueLexicon lexicon_;
};

// Placeholders: {disease} {confidence} {present} {absent}.
struct AdviceTemplates {
    std::string generic =
        "Most likely condition: {disease} (similarity {confidence}). Reported symptoms: {present}. "
        "Not present: {absent}. Please confirm with a clinician.";
    std::map<DiseaseId, std::string> per_disease;

    static AdviceTemplates from_json(const std::string& text);
    static AdviceTemplates load(const std::filesystem::path& path);
};

std::string fill_advice(const std::string& tmpl, const DiseaseId& disease, double confidence,
                        const SymptomRecorder& recorder);

// Top-ranked disease, templated advice, +1/-1 polarity hints.
ExpertOutput rule_based_diagnose(const SymptomRecorder& recorder, const DiseaseRanking& ranking,
                                 const AdviceTemplates& templates);

// +1 for present symptoms and -1 for absent ones on their edge to `disease`;
// with `links`, +1 between present pairs and -1 between present and absent.
UpdateProposal polarity_proposal(const SymptomRecorder& recorder, const DiseaseId& disease, bool links = false);

class RuleBasedExpert final : public ExpertModel {
public:
    explicit RuleBasedExpert(AdviceTemplates templates = {}) : templates_(std::move(templates)) {}

    std::string id() const override { return "rule_based"; }
    ExpertOutput diagnose(const SymptomRecorder& recorder, const DiseaseRanking& ranking) const override {
        return rule_based_diagnose(recorder, ranking, templates_);
    }

private:
    AdviceTemplates templates_;
};

// Chat-completion backed expert. Throws when the reply does not name a
// disease from the ranking; the engine then falls back to the rule-based path.
class RemoteExpert final : public ExpertModel {
public:
    explicit RemoteExpert(RemoteAdapterConfig config) : config_(std::move(config)) {}

    std::string id() const override { return "remote"; }
    ExpertOutput diagnose(const SymptomRecorder& recorder, const DiseaseRanking& ranking) const override;

private:
    RemoteAdapterConfig config_;
};

// Renders questions through a chat-completion endpoint; alignment and parsing
// stay rule-based. Any transport failure falls back to the rule-based text.
class RemoteGuidance final : public GuidanceModel {
public:
    RemoteGuidance(RemoteAdapterConfig config, RuleBasedGuidance base)
        : config_(std::move(config)), base_(std::move(base)) {}

    std::string id() const override { return "remote"; }
    std::set<SymptomId> align(const std::string& text) const override { return base_.align(text); }
    std::string render_question(const QuestionBatch& batch) const override;
    AnswerSet parse_answer(const std::string& text, const QuestionBatch& batch) const override {
        return base_.parse_answer(text, batch);
    }

private:
    RemoteAdapterConfig config_;
    RuleBasedGuidance base_;
};

} // namespace dopi
