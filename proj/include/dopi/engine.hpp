#pragma once

#include <optional>
#include <set>
#include <string>

#include "dopi/interfaces.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/session.hpp"

namespace dopi {

// Records the complaint, ranks diseases, and finalizes immediately when the
// best similarity already reaches epsilon_stop.
Session start_session(const KnowledgeGraph& g, const std::set<SymptomId>& initial_symptoms,
                      const EngineConfig& config, std::string session_id = {});

// Chooses the next batch and moves the session to AwaitingAnswers. Returns
// nullopt when no unknown symptom remains; the session is then Finalized.
std::optional<QuestionBatch> next_questions(Session& session, const KnowledgeGraph& g);

// Applies answers to the outstanding batch and re-ranks. Symptoms of the batch
// without an answer count as Unsure. Throws without modifying the session when
// an answer names a symptom outside the batch.
void record_answers(Session& session, const KnowledgeGraph& g, const AnswerSet& answers);

// Stops questioning now and keeps the current ranking.
void force_finalize(Session& session);

// Runs the expert on a finalized session. Falls back to the rule-based
// expert when the configured one throws or names a disease outside the ranking.
Diagnosis finalize(const Session& session, const ExpertModel& expert);

// +1 for present symptoms and -1 for absent ones on their edge to `disease`.
UpdateProposal default_update_proposal(const Session& session, const DiseaseId& disease);

// Randomness used for round `round` of a session seeded with `seed`.
Rng round_rng(std::uint64_t seed, std::size_t round);

// JSON Lines: one {session_id, seq, kind, payload} event per question batch,
// answer set and the diagnosis.
std::string export_transcript(const Session& session, const std::optional<Diagnosis>& diagnosis);

} // namespace dopi
