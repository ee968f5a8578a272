#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dopi/adapters.hpp"
#include "dopi/interfaces.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/session.hpp"
#include "dopi/simulator.hpp"

namespace dopi {

// Outcome of one closed-loop consultation between the engine and a simulated patient.
struct ConsultationRun {
    std::set<SymptomId> initial;
    Session session;
    Diagnosis diagnosis;
};

// Initial complaint, question/answer cycles until the engine stops, then the
// expert. With ask = false the session is finalized before any question.
ConsultationRun run_consultation(const KnowledgeGraph& g, SimulatedPatient& patient, const EngineConfig& config,
                                 const ExpertModel& expert, const std::string& session_id, bool ask = true,
                                 std::optional<std::set<SymptomId>> initial = std::nullopt);

enum class Role { Doctor, Patient };
enum class TurnKind { Complaint, Question, Answer, Diagnosis };

struct Turn {
    Role role = Role::Patient;
    TurnKind kind = TurnKind::Complaint;
    std::string text;
    // Complaint: disclosed symptoms. Question: the asked batch.
    std::vector<SymptomId> symptoms;
    // Answer turns only.
    AnswerSet answers;

    friend bool operator==(const Turn&, const Turn&) = default;
};

struct DialogueTranscript {
    std::string id;
    std::uint64_t graph_version = 0;
    CaseRecord truth;
    std::set<SymptomId> initial_disclosure;
    std::vector<Turn> turns;
    Diagnosis final;
    StopReason stop_reason = StopReason::None;
    std::size_t doctor_question_rounds = 0; // Q^d
    std::size_t doctor_answer_rounds = 0;   // A^d
    std::uint64_t engine_seed = 0;
    std::uint64_t patient_seed = 0;

    friend bool operator==(const DialogueTranscript&, const DialogueTranscript&) = default;
};

struct CorpusManifest {
    std::string corpus_id;
    std::uint64_t graph_version = 0;
    EngineConfig engine;
    PatientConfig patient;
    std::string renderer;
    std::vector<std::string> splits{"full"};

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct Corpus {
    CorpusManifest manifest;
    std::vector<DialogueTranscript> transcripts;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Patient-side wording for complaints and answers.
class PatientVoice {
public:
    PatientVoice() = default;
    PatientVoice(TermAliasTable table, CueLexicon lexicon) : table_(std::move(table)), lexicon_(std::move(lexicon)) {}

    std::string complaint(const std::set<SymptomId>& disclosed) const;
    std::string reply(const QuestionBatch& batch, const AnswerSet& answers) const;

private:
    TermAliasTable table_;
    CueLexicon lexicon_;
};

struct DialogueRenderers {
    const GuidanceModel& doctor;
    const PatientVoice& patient;
    const ExpertModel& expert;
};

DialogueTranscript generate_dialogue(const CaseRecord& truth, const KnowledgeGraph& g, const EngineConfig& engine,
                                     const PatientConfig& patient, const DialogueRenderers& renderers,
                                     const std::string& id = "dialogue-0");

// Per-case seeds are derived from the manifest seeds and the case index.
std::uint64_t derive_seed(std::uint64_t base, std::size_t index);

Corpus generate_corpus(std::span<const CaseRecord> cases, const KnowledgeGraph& g, const EngineConfig& engine,
                       const PatientConfig& patient, const DialogueRenderers& renderers, std::string corpus_id,
                       unsigned threads = 1);

// Checks the transcript invariants; throws DataError describing the first violation.
void validate_transcript(const DialogueTranscript& t, std::uint64_t graph_version);

std::string transcript_to_json_line(const DialogueTranscript& t);
DialogueTranscript transcript_from_json_line(const std::string& line, std::size_t line_no = 0);
std::string manifest_to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const std::string& text);

// <dir>/manifest.json and <dir>/transcripts.jsonl.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus(const std::filesystem::path& dir);

struct SplitResult {
    Corpus corpus;
    std::vector<std::string> warnings;
};

// Keeps transcripts whose initial disclosure has at most one symptom.
SplitResult make_low_information_split(const Corpus& corpus);

const char* to_string(Role r);
const char* to_string(TurnKind k);

} // namespace dopi
