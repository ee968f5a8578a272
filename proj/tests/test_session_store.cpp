#include <gtest/gtest.h>

#include <fstream>

#include "dopi/adapters.hpp"
#include "dopi/engine.hpp"
#include "dopi/error.hpp"
#include "dopi/session_store.hpp"
#include "dopi/text.hpp"
#include "support.hpp"

using namespace dopi;
using dopi::testing::TempDir;
using dopi::testing::uniform_graph;

namespace {

KnowledgeGraph clinic() {
    return uniform_graph({{"flu", {"fever", "ache", "chills", "cough"}},
                          {"cold", {"fever", "sneeze", "runny", "cough"}},
                          {"strep", {"fever", "sore", "swollen", "pain"}}});
}

EngineConfig noisy() {
    EngineConfig c;
    c.seed = 99;
    c.noise.sigma0 = 0.2;
    c.epsilon_stop = 0.95;
    return c;
}

// Runs a session to completion, logging exactly what the service logs, and
// returns the session after each logged event (index 0 = after start).
std::vector<Session> drive(SessionStore& store, const KnowledgeGraph& g, const ExpertModel& expert,
                           const std::set<SymptomId>& truth, const std::string& id) {
    std::vector<Session> states;
    auto entry = store.create(start_session(g, {SymptomId("fever")}, noisy(), id));
    std::lock_guard lock(entry->mu);
    auto& s = entry->session;
    states.push_back(s);
    while (true) {
        if (s.state == SessionState::ReadyToAsk) {
            store.append(*entry, events::question(next_questions(s, g)));
            states.push_back(s);
        }
        if (s.state == SessionState::Finalized) break;
        AnswerSet a;
        for (const auto& x : s.outstanding->symptoms) a[x] = truth.contains(x) ? Answer::Present : Answer::Absent;
        record_answers(s, g, a);
        store.append(*entry, events::answers(a));
        states.push_back(s);
    }
    entry->diagnosis = finalize(s, expert);
    store.append(*entry, events::diagnosis(*entry->diagnosis));
    states.push_back(s);
    return states;
}

GraphLookup single(const KnowledgeGraph& g) {
    return [&g](std::uint64_t v) -> const KnowledgeGraph& {
        if (v != g.version()) throw DataError("GRAPH_VERSION", "unexpected version");
        return g;
    };
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::vector<std::string> out;
    std::ifstream in(p);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines, std::size_t n,
                 const std::string& tail = {}) {
    std::ofstream out(p, std::ios::trunc);
    for (std::size_t i = 0; i < n; ++i) out << lines[i] << "\n";
    out << tail;
}

UpdateProposal bump(const char* s, const char* d, double v, const char* session = "p") {
    return {{EdgeDelta{EdgeRef{SymptomId(s), DiseaseId(d)}, v}}, session};
}

} // namespace

TEST(EventLog, ReplayRebuildsTheSession) {
    TempDir dir;
    const auto g = clinic();
    SessionStore store(dir.path());
    const auto states = drive(store, g, RuleBasedExpert{}, {SymptomId("fever"), SymptomId("sore"), SymptomId("pain")}, "abc");
    const auto log = read_event_log(dir / "sessions/abc.jsonl");
    ASSERT_EQ(log.size(), states.size());
    const auto replayed = replay_events(log, single(g));
    EXPECT_EQ(replayed.session, states.back());
    ASSERT_TRUE(replayed.diagnosis);
    EXPECT_EQ(*replayed.diagnosis, finalize(states.back(), RuleBasedExpert{}));
}

TEST(EventLog, TamperedBatchIsDetected) {
    TempDir dir;
    const auto g = clinic();
    SessionStore store(dir.path());
    drive(store, g, RuleBasedExpert{}, {SymptomId("fever")}, "t");
    auto log = read_event_log(dir / "sessions/t.jsonl");
    ASSERT_EQ(log[1]["kind"], "question");
    log[1]["batch"]["symptoms"][0] = "pain";
    log[1]["batch"]["symptoms"][1] = "sore";
    log[1]["batch"]["symptoms"][2] = "swollen";
    try {
        replay_events(log, single(g));
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.code(), "REPLAY");
    }
    EXPECT_THROW(replay_events({}, single(g)), DataError);
    EXPECT_THROW(replay_events({log[2]}, single(g)), DataError);
}

TEST(EventLog, TornFinalLineIsDropped) {
    TempDir dir;
    const auto path = dir / "x.jsonl";
    write_lines(path, {R"({"kind":"start"})", R"({"kind":"force"})"}, 2, R"({"kind":"ans)");
    EXPECT_EQ(read_event_log(path).size(), 2u);
    write_lines(path, {R"({"kind":"start"})", R"({"kind)", R"({"kind":"force"})"}, 3);
    try {
        read_event_log(path);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Recovery, EveryKillPointRestoresTheLoggedState) {
    TempDir origin;
    const auto g = clinic();
    const RuleBasedExpert expert;
    const std::set<SymptomId> truth{SymptomId("fever"), SymptomId("ache"), SymptomId("cough")};
    std::vector<Session> states;
    {
        SessionStore store(origin.path());
        states = drive(store, g, expert, truth, "s1");
    }
    const auto lines = read_lines(origin / "sessions/s1.jsonl");
    ASSERT_EQ(lines.size(), states.size());

    for (std::size_t kept = 1; kept <= lines.size(); ++kept) {
        for (bool torn : {false, true}) {
            if (torn && kept == lines.size()) continue;
            TempDir dir;
            std::filesystem::create_directories(dir / "sessions");
            // A torn write leaves half of the next event behind.
            const auto tail = torn ? lines[kept].substr(0, lines[kept].size() / 2) : std::string{};
            write_lines(dir / "sessions/s1.jsonl", lines, kept, tail);

            SessionStore store(dir.path());
            const auto rec = store.recover(single(g), expert);
            EXPECT_TRUE(rec.warnings.empty());
            ASSERT_EQ(rec.sessions, 1u);
            auto entry = store.find("s1");
            ASSERT_TRUE(entry);
            // A session stopped before its next question gets asked during recovery.
            const bool asks = states[kept - 1].state == SessionState::ReadyToAsk;
            const auto& expected = states[asks ? kept : kept - 1];
            EXPECT_EQ(entry->session, expected) << "kept " << kept;
            if (asks) {
                EXPECT_EQ(read_lines(dir / "sessions/s1.jsonl").at(kept), lines[kept]);
            }
            if (expected.state == SessionState::Finalized) {
                ASSERT_TRUE(entry->diagnosis);
                EXPECT_EQ(*entry->diagnosis, finalize(expected, expert));
                // A stopped session whose diagnosis was lost is diagnosed during recovery.
                EXPECT_EQ(rec.finalized.size(), kept == lines.size() ? 0u : 1u);
            } else {
                EXPECT_FALSE(entry->diagnosis);
            }

            SessionStore again(dir.path());
            const auto second = again.recover(single(g), expert);
            EXPECT_TRUE(second.warnings.empty()) << "kept " << kept;
            EXPECT_TRUE(second.finalized.empty());
            ASSERT_TRUE(again.find("s1"));
            EXPECT_EQ(again.find("s1")->session, entry->session);
        }
    }
}

TEST(Recovery, RecoveredSessionContinuesLikeTheOriginal) {
    TempDir origin;
    const auto g = clinic();
    const RuleBasedExpert expert;
    const std::set<SymptomId> truth{SymptomId("fever"), SymptomId("sneeze")};
    std::vector<Session> states;
    {
        SessionStore store(origin.path());
        states = drive(store, g, expert, truth, "s2");
    }
    const auto lines = read_lines(origin / "sessions/s2.jsonl");
    ASSERT_GE(lines.size(), 4u);
    TempDir dir;
    std::filesystem::create_directories(dir / "sessions");
    write_lines(dir / "sessions/s2.jsonl", lines, 2);
    SessionStore store(dir.path());
    store.recover(single(g), expert);
    auto entry = store.find("s2");
    ASSERT_TRUE(entry);
    auto& s = entry->session;
    ASSERT_EQ(s.state, SessionState::AwaitingAnswers);
    while (s.state != SessionState::Finalized) {
        if (s.state == SessionState::AwaitingAnswers) {
            AnswerSet a;
            for (const auto& x : s.outstanding->symptoms) a[x] = truth.contains(x) ? Answer::Present : Answer::Absent;
            record_answers(s, g, a);
        } else if (!next_questions(s, g)) {
            break;
        }
    }
    EXPECT_EQ(s, states.back());
}

TEST(Recovery, UnreadableLogIsReportedAndSkipped) {
    TempDir dir;
    std::filesystem::create_directories(dir / "sessions");
    write_lines(dir / "sessions/bad.jsonl", {R"({"kind":"answers"})", "{}"}, 2);
    SessionStore store(dir.path());
    const auto rec = store.recover(single(clinic()), RuleBasedExpert{});
    EXPECT_EQ(rec.sessions, 0u);
    EXPECT_EQ(rec.warnings.size(), 1u);
}

TEST(Store, MemoryOnlyAndIds) {
    SessionStore store;
    const auto g = clinic();
    store.create(start_session(g, {SymptomId("fever")}, noisy(), "a"));
    EXPECT_THROW(store.create(start_session(g, {}, noisy(), "a")), StateError);
    EXPECT_EQ(store.size(), 1u);
    EXPECT_EQ(store.live_sessions(g.version()), 1u);
    EXPECT_EQ(store.live_sessions(g.version() + 1), 0u);
    EXPECT_FALSE(store.find("zzz"));
    const auto id = random_session_id();
    EXPECT_EQ(id.size(), 32u);
    EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
    EXPECT_NE(id, random_session_id());
}

TEST(Updates, EmptyQueueKeepsVersion) {
    SessionStore store;
    UpdateQueue queue;
    auto g = clinic();
    const auto out = apply_pending_updates(store, queue, g);
    EXPECT_FALSE(out.deferred);
    EXPECT_EQ(out.applied, 0u);
    EXPECT_EQ(g.version(), 0u);
}

TEST(Updates, BatchProducesOneVersion) {
    SessionStore store;
    UpdateQueue queue;
    auto g = clinic();
    const auto before = g;
    queue.push(bump("ache", "flu", -1.0));
    queue.push(bump("ache", "flu", -1.0));
    const auto out = apply_pending_updates(store, queue, g);
    EXPECT_EQ(out.applied, 2u);
    EXPECT_EQ(g.version(), 1u);
    const auto k = *g.symptom_index(SymptomId("ache"));
    const auto i = *g.disease_index(DiseaseId("flu"));
    EXPECT_DOUBLE_EQ(g.weight(k, i), 0.9);
    EXPECT_EQ(queue.size(), 0u);
    EXPECT_EQ(before.version(), 0u);
}

TEST(Updates, DeferredWhileSessionsAreLive) {
    SessionStore store;
    UpdateQueue queue;
    auto g = clinic();
    store.create(start_session(g, {SymptomId("fever")}, noisy(), "live"));
    queue.push(bump("ache", "flu", -1.0));
    const auto out = apply_pending_updates(store, queue, g, true);
    EXPECT_TRUE(out.deferred);
    EXPECT_EQ(queue.size(), 1u);
    EXPECT_EQ(g.version(), 0u);
    const auto forced = apply_pending_updates(store, queue, g, false);
    EXPECT_EQ(forced.applied, 1u);
    EXPECT_EQ(g.version(), 1u);
}

TEST(Updates, StaleProposalsGoToTheAudit) {
    SessionStore store;
    UpdateQueue queue;
    auto g = clinic();
    queue.push(bump("ache", "measles", 1.0, "old"));
    queue.push(bump("ache", "flu", -1.0, "fresh"));
    const auto out = apply_pending_updates(store, queue, g);
    EXPECT_EQ(out.applied, 1u);
    ASSERT_EQ(out.skipped.size(), 1u);
    EXPECT_EQ(out.skipped[0].session_id, "old");
    EXPECT_EQ(g.version(), 1u);

    queue.push(bump("ghost", "flu", 1.0, "older"));
    const auto only_stale = apply_pending_updates(store, queue, g);
    EXPECT_EQ(only_stale.applied, 0u);
    EXPECT_EQ(only_stale.skipped.size(), 1u);
    EXPECT_EQ(g.version(), 1u);
    EXPECT_EQ(queue.size(), 0u);
}

TEST(Updates, QueueSurvivesRestart) {
    TempDir dir;
    {
        UpdateQueue queue(dir / "queue.json");
        queue.push(bump("ache", "flu", 1.0, "a"));
        queue.push(bump("cough", "cold", -1.0, "b"));
        queue.drain(1);
    }
    UpdateQueue again(dir / "queue.json");
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(again.pending()[0], bump("cough", "cold", -1.0, "b"));
}
