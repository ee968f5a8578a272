#include "dopi/engine.hpp"

#include <algorithm>
#include <cmath>

#include "dopi/adapters.hpp"
#include "dopi/codec.hpp"
#include "dopi/error.hpp"

namespace dopi {

namespace {

void check_graph(const Session& session, const KnowledgeGraph& g) {
    if (session.graph_version != g.version())
        throw DataError("GRAPH_VERSION", "session " + session.id + " is bound to graph version " +
                                             std::to_string(session.graph_version) + ", got version " +
                                             std::to_string(g.version()));
}

DiseaseRanking rerank(const Session& session, const KnowledgeGraph& g) {
    return rank_diseases(g, patient_vector(session.recorder, g));
}

SymptomScoreSet candidate_scores(const Session& session, const KnowledgeGraph& g) {
    auto scores = score_symptoms(g, session.ranking, session.recorder, session.config.top_n_diseases);
    if (session.config.cold_start_fallback) {
        const bool no_evidence = std::all_of(session.ranking.entries.begin(), session.ranking.entries.end(),
                                             [](const auto& e) { return e.similarity == 0.0; });
        if (no_evidence) scores = raw_weight_scores(g, session.recorder);
    }
    return scores;
}

std::vector<SymptomId> random_candidates(const Session& session, const KnowledgeGraph& g, Rng& rng) {
    std::vector<SymptomId> unknown;
    for (const auto& s : g.symptoms())
        if (!session.recorder.known(s)) unknown.push_back(s);
    std::shuffle(unknown.begin(), unknown.end(), rng);
    unknown.resize(std::min(unknown.size(), session.config.batch_size));
    return unknown;
}

} // namespace

void EngineConfig::validate() const {
    if (!(epsilon_stop > 0.0 && epsilon_stop <= 1.0))
        throw DataError("BAD_CONFIG", "epsilon_stop must lie in (0, 1]");
    if (max_rounds < 1) throw DataError("BAD_CONFIG", "max_rounds must be at least 1");
    if (batch_size < 1) throw DataError("BAD_CONFIG", "batch_size must be at least 1");
    if (!(noise.sigma0 >= 0.0) || !std::isfinite(noise.sigma0))
        throw DataError("BAD_CONFIG", "noise sigma0 must be a finite non-negative number");
    if (top_n_diseases && *top_n_diseases == 0)
        throw DataError("BAD_CONFIG", "top_n_diseases must be positive");
}

Rng round_rng(std::uint64_t seed, std::size_t round) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(round), 0x646f7069u};
    return Rng(seq);
}

Session start_session(const KnowledgeGraph& g, const std::set<SymptomId>& initial_symptoms,
                      const EngineConfig& config, std::string session_id) {
    config.validate();
    for (const auto& s : initial_symptoms)
        if (!g.contains(s)) throw DataError("UNKNOWN_SYMPTOM", "unknown symptom '" + s.str() + "'");

    Session session;
    session.id = std::move(session_id);
    session.graph_version = g.version();
    session.config = config;
    session.initial = initial_symptoms;
    session.recorder.present = initial_symptoms;
    session.ranking = rerank(session, g);
    if (!session.ranking.empty() && session.ranking.top_similarity() >= config.epsilon_stop) {
        session.state = SessionState::Finalized;
        session.stop_reason = StopReason::Threshold;
    }
    return session;
}

std::optional<QuestionBatch> next_questions(Session& session, const KnowledgeGraph& g) {
    check_graph(session, g);
    if (session.state != SessionState::ReadyToAsk)
        throw StateError("next_questions called in state " + std::string(to_string(session.state)));
    if (session.round >= session.config.max_rounds)
        throw StateError("session " + session.id + " already used all rounds");

    const auto round = session.round + 1;
    auto rng = round_rng(session.config.seed, round);
    std::vector<SymptomId> chosen;
    if (session.config.selection == Selection::Random) {
        chosen = random_candidates(session, g, rng);
    } else {
        const auto scores = perturb_scores(candidate_scores(session, g), round, session.config.noise, rng);
        chosen = select_candidates(scores, session.config.batch_size);
    }

    if (chosen.empty()) {
        session.state = SessionState::Finalized;
        session.stop_reason = StopReason::Exhausted;
        return std::nullopt;
    }

    QuestionBatch batch{std::move(chosen), round};
    session.round = round;
    session.state = SessionState::AwaitingAnswers;
    session.recorder.asked.insert(batch.symptoms.begin(), batch.symptoms.end());
    session.outstanding = batch;
    return batch;
}

void record_answers(Session& session, const KnowledgeGraph& g, const AnswerSet& answers) {
    check_graph(session, g);
    if (session.state != SessionState::AwaitingAnswers || !session.outstanding)
        throw StateError("record_answers called in state " + std::string(to_string(session.state)));

    const auto& batch = *session.outstanding;
    for (const auto& [symptom, _] : answers)
        if (std::find(batch.symptoms.begin(), batch.symptoms.end(), symptom) == batch.symptoms.end())
            throw DataError("UNASKED_SYMPTOM", "answer for unasked symptom '" + symptom.str() + "'");

    Exchange exchange{batch, {}};
    for (const auto& s : batch.symptoms) {
        auto it = answers.find(s);
        const auto a = it == answers.end() ? Answer::Unsure : it->second;
        exchange.answers.emplace(s, a);
        if (a == Answer::Present) session.recorder.present.insert(s);
        if (a == Answer::Absent) session.recorder.absent.insert(s);
    }
    session.history.push_back(std::move(exchange));
    session.outstanding.reset();
    session.ranking = rerank(session, g);

    if (!session.ranking.empty() && session.ranking.top_similarity() >= session.config.epsilon_stop) {
        session.state = SessionState::Finalized;
        session.stop_reason = StopReason::Threshold;
    } else if (session.round >= session.config.max_rounds) {
        session.state = SessionState::Finalized;
        session.stop_reason = StopReason::MaxRounds;
    } else {
        session.state = SessionState::ReadyToAsk;
    }
}

void force_finalize(Session& session) {
    if (session.state == SessionState::Finalized) return;
    session.state = SessionState::Finalized;
    session.stop_reason = StopReason::Forced;
    session.outstanding.reset();
}

UpdateProposal default_update_proposal(const Session& session, const DiseaseId& disease) {
    auto p = polarity_proposal(session.recorder, disease, session.config.propose_symptom_links);
    p.session_id = session.id;
    return p;
}

Diagnosis finalize(const Session& session, const ExpertModel& expert) {
    if (session.state != SessionState::Finalized)
        throw StateError("finalize called in state " + std::string(to_string(session.state)));
    if (session.ranking.empty()) throw DataError("EMPTY_RANKING", "cannot diagnose against a graph without diseases");

    auto similarity_of = [&](const DiseaseId& d) -> std::optional<double> {
        for (const auto& e : session.ranking.entries)
            if (e.disease == d) return e.similarity;
        return std::nullopt;
    };

    Diagnosis dx;
    std::optional<ExpertOutput> out;
    try {
        out = expert.diagnose(session.recorder, session.ranking);
        if (!similarity_of(out->disease)) out.reset();
        dx.provenance = expert.id();
    } catch (const std::exception&) {
        out.reset();
    }
    if (!out) {
        out = rule_based_diagnose(session.recorder, session.ranking, AdviceTemplates{});
        dx.provenance = "fallback";
    }

    dx.disease = out->disease;
    dx.confidence = *similarity_of(out->disease);
    dx.advice_text = std::move(out->advice);

    // Expert hints are kept only where they stay inside what the session learned.
    auto known = [&](const SymptomId& s) { return session.recorder.present.contains(s) || session.recorder.absent.contains(s); };
    UpdateProposal hints;
    for (const auto& d : out->hints.deltas) {
        const auto* other = std::get_if<SymptomId>(&d.edge.target);
        if (known(d.edge.symptom) && (!other || known(*other))) hints.deltas.push_back(d);
    }
    dx.update_proposal = hints.deltas.empty() ? default_update_proposal(session, dx.disease) : std::move(hints);
    dx.update_proposal.session_id = session.id;
    return dx;
}

std::string export_transcript(const Session& session, const std::optional<Diagnosis>& diagnosis) {
    std::string out;
    std::size_t seq = 0;
    auto emit = [&](const char* kind, nlohmann::json payload) {
        nlohmann::json ev{{"session_id", session.id}, {"seq", seq++}, {"kind", kind}, {"payload", std::move(payload)}};
        out += ev.dump() + "\n";
    };
    for (const auto& ex : session.history) {
        emit("question", ex.batch);
        emit("answer", nlohmann::json{{"round", ex.batch.round}, {"answers", ex.answers}});
    }
    if (session.outstanding) emit("question", *session.outstanding);
    if (diagnosis) emit("diagnosis", *diagnosis);
    return out;
}

const char* to_string(Answer a) {
    switch (a) {
    case Answer::Present: return "present";
    case Answer::Absent: return "absent";
    case Answer::Unsure: return "unsure";
    }
    return "unsure";
}

const char* to_string(SessionState s) {
    switch (s) {
    case SessionState::ReadyToAsk: return "ready_to_ask";
    case SessionState::AwaitingAnswers: return "awaiting_answers";
    case SessionState::Finalized: return "finalized";
    }
    return "finalized";
}

const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::None: return "none";
    case StopReason::Threshold: return "threshold";
    case StopReason::MaxRounds: return "max_rounds";
    case StopReason::Exhausted: return "exhausted";
    case StopReason::Forced: return "forced";
    }
    return "none";
}

const char* to_string(Selection s) { return s == Selection::Random ? "random" : "scored"; }

Answer answer_from_string(const std::string& s) {
    if (s == "present") return Answer::Present;
    if (s == "absent") return Answer::Absent;
    if (s == "unsure") return Answer::Unsure;
    throw DataError("BAD_ANSWER", "unknown answer value '" + s + "'");
}

SessionState state_from_string(const std::string& s) {
    if (s == "ready_to_ask") return SessionState::ReadyToAsk;
    if (s == "awaiting_answers") return SessionState::AwaitingAnswers;
    if (s == "finalized") return SessionState::Finalized;
    throw DataError("BAD_STATE", "unknown session state '" + s + "'");
}

StopReason stop_reason_from_string(const std::string& s) {
    for (auto r : {StopReason::None, StopReason::Threshold, StopReason::MaxRounds, StopReason::Exhausted, StopReason::Forced})
        if (s == to_string(r)) return r;
    throw DataError("BAD_STATE", "unknown stop reason '" + s + "'");
}

Selection selection_from_string(const std::string& s) {
    if (s == "scored") return Selection::Scored;
    if (s == "random") return Selection::Random;
    throw DataError("BAD_CONFIG", "unknown selection '" + s + "'");
}

} // namespace dopi
