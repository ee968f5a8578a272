#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopi/interfaces.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/session.hpp"

namespace dopi {

// One line of a session's append-only log. Replaying the events through the
// engine rebuilds the session.
namespace events {
nlohmann::json start(const Session& s);
// Batch asked, or nullopt when nothing was left to ask.
nlohmann::json question(const std::optional<QuestionBatch>& batch);
nlohmann::json answers(const AnswerSet& a);
nlohmann::json force();
nlohmann::json diagnosis(const Diagnosis& d);
} // namespace events

using GraphLookup = std::function<const KnowledgeGraph&(std::uint64_t version)>;

struct ReplayResult {
    Session session;
    std::optional<Diagnosis> diagnosis;
};

// Throws DataError when an event contradicts what the engine computes.
ReplayResult replay_events(const std::vector<nlohmann::json>& log, const GraphLookup& graphs);

// Reads a JSON Lines event log. A truncated or unparsable final line (torn
// write) is dropped; damage anywhere else is an error.
std::vector<nlohmann::json> read_event_log(const std::filesystem::path& path);

// 128 random bits as 32 hex digits.
std::string random_session_id();

class SessionStore {
public:
    struct Entry {
        std::mutex mu;
        Session session;
        std::optional<Diagnosis> diagnosis;
    };

    // Without a state directory the store is memory-only.
    explicit SessionStore(std::optional<std::filesystem::path> state_dir = std::nullopt);

    // Registers a freshly started session and logs its start event.
    std::shared_ptr<Entry> create(Session session);
    std::shared_ptr<Entry> find(const std::string& id) const;
    // Caller holds entry->mu.
    void append(const Entry& entry, const nlohmann::json& event);

    std::size_t size() const;
    // Sessions bound to `version` that are still asking or awaiting answers.
    std::size_t live_sessions(std::uint64_t version) const;

    struct Recovery {
        std::size_t sessions = 0;
        // Diagnoses produced during recovery for sessions that had stopped
        // before their diagnosis reached the log.
        std::vector<Diagnosis> finalized;
        std::vector<std::string> warnings;
    };
    // Rebuilds every session found in the state directory. Unreadable logs
    // are reported and skipped.
    Recovery recover(const GraphLookup& graphs, const ExpertModel& expert);

    const std::optional<std::filesystem::path>& state_dir() const noexcept { return dir_; }

private:
    std::filesystem::path log_path(const std::string& id) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
    std::mutex log_mu_;
};

// Proposals waiting for application, in arrival order; optionally persisted.
class UpdateQueue {
public:
    explicit UpdateQueue(std::optional<std::filesystem::path> file = std::nullopt);

    void push(const UpdateProposal& p);
    std::vector<UpdateProposal> pending() const;
    std::size_t size() const;
    // Drops the first `n` proposals.
    void drain(std::size_t n);

private:
    void persist() const;

    std::optional<std::filesystem::path> file_;
    mutable std::mutex mu_;
    std::deque<UpdateProposal> queue_;
};

struct AuditRecord {
    std::string session_id;
    std::string reason;
};

struct ApplyOutcome {
    bool deferred = false;
    std::size_t applied = 0;
    std::vector<AuditRecord> skipped;
    std::uint64_t version = 0;
};

// Applies every pending proposal in order and produces one new graph version.
// With `defer` set and a live session bound to the current version nothing
// happens. An empty queue leaves the version unchanged. Proposals naming
// unknown nodes are skipped and reported.
ApplyOutcome apply_pending_updates(const SessionStore& store, UpdateQueue& queue, KnowledgeGraph& graph,
                                   bool defer = true, const UpdateOptions& options = {});

} // namespace dopi
