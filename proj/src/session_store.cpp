#include "dopi/session_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "dopi/codec.hpp"
#include "dopi/engine.hpp"
#include "dopi/error.hpp"
#include "dopi/text.hpp"

namespace dopi {

namespace events {

json start(const Session& s) {
    json initial = json::array();
    for (const auto& x : s.initial) initial.push_back(x.str());
    return json{{"kind", "start"},
                {"id", s.id},
                {"graph_version", s.graph_version},
                {"config", s.config},
                {"initial", std::move(initial)}};
}

json question(const std::optional<QuestionBatch>& batch) {
    return json{{"kind", "question"}, {"batch", batch ? json(*batch) : json(nullptr)}};
}

json answers(const AnswerSet& a) { return json{{"kind", "answers"}, {"answers", a}}; }

json force() { return json{{"kind", "force"}}; }

json diagnosis(const Diagnosis& d) { return json{{"kind", "diagnosis"}, {"diagnosis", d}}; }

} // namespace events

ReplayResult replay_events(const std::vector<json>& log, const GraphLookup& graphs) {
    if (log.empty()) throw DataError("REPLAY", "event log is empty");
    const auto& first = log.front();
    if (first.value("kind", "") != "start") throw DataError("REPLAY", "event log does not begin with a start event");

    ReplayResult out;
    try {
        const auto& g = graphs(first.at("graph_version").get<std::uint64_t>());
        std::set<SymptomId> initial;
        for (const auto& s : first.at("initial")) initial.insert(s.get<SymptomId>());
        out.session = start_session(g, initial, first.at("config").get<EngineConfig>(), first.at("id").get<std::string>());

        for (std::size_t i = 1; i < log.size(); ++i) {
            const auto& ev = log[i];
            const auto kind = ev.at("kind").get<std::string>();
            if (kind == "question") {
                const auto batch = next_questions(out.session, g);
                const auto& logged = ev.at("batch");
                const bool same = logged.is_null() ? !batch : (batch && logged.get<QuestionBatch>() == *batch);
                if (!same)
                    throw DataError("REPLAY", "event " + std::to_string(i) + ": question batch differs from the engine's");
            } else if (kind == "answers") {
                AnswerSet a;
                from_json(ev.at("answers"), a);
                record_answers(out.session, g, a);
            } else if (kind == "force") {
                force_finalize(out.session);
            } else if (kind == "diagnosis") {
                out.diagnosis = ev.at("diagnosis").get<Diagnosis>();
            } else {
                throw DataError("REPLAY", "event " + std::to_string(i) + ": unknown kind '" + kind + "'");
            }
        }
    } catch (const json::exception& e) {
        throw DataError("REPLAY", std::string("malformed event: ") + e.what());
    }
    return out;
}

std::vector<json> read_event_log(const std::filesystem::path& path) {
    std::vector<std::string> lines;
    {
        std::istringstream in(read_file(path));
        std::string line;
        while (std::getline(in, line))
            if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    std::vector<json> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            out.push_back(json::parse(lines[i]));
        } catch (const json::parse_error& e) {
            if (i + 1 == lines.size()) break; // torn final write
            throw ParseError(path.string() + ", event " + std::to_string(i + 1) + ": " + e.what(), i + 1);
        }
    }
    return out;
}

namespace {

// Cuts a log back to its first `events` lines so later appends start on a
// clean line. No-op when nothing follows them.
void trim_torn_tail(const std::filesystem::path& path, std::size_t events) {
    const auto text = read_file(path);
    std::istringstream in(text);
    std::string kept, line;
    std::size_t n = 0;
    while (n < events && std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        kept += line + "\n";
        ++n;
    }
    if (kept.size() < text.size()) write_file_atomically(path, kept);
}

} // namespace

std::string random_session_id() {
    static thread_local std::random_device device;
    char buf[33];
    for (int i = 0; i < 4; ++i) std::snprintf(buf + i * 8, 9, "%08x", static_cast<unsigned>(device()));
    return std::string(buf, 32);
}

SessionStore::SessionStore(std::optional<std::filesystem::path> state_dir) : dir_(std::move(state_dir)) {
    if (dir_) std::filesystem::create_directories(*dir_ / "sessions");
}

std::filesystem::path SessionStore::log_path(const std::string& id) const { return *dir_ / "sessions" / (id + ".jsonl"); }

std::shared_ptr<SessionStore::Entry> SessionStore::create(Session session) {
    auto entry = std::make_shared<Entry>();
    entry->session = std::move(session);
    {
        std::unique_lock lock(mu_);
        if (!entries_.emplace(entry->session.id, entry).second)
            throw StateError("session id " + entry->session.id + " already exists");
    }
    append(*entry, events::start(entry->session));
    return entry;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : it->second;
}

void SessionStore::append(const Entry& entry, const json& event) {
    if (!dir_) return;
    std::lock_guard lock(log_mu_);
    std::ofstream out(log_path(entry.session.id), std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw DataError("IO_ERROR", "cannot append to the log of session " + entry.session.id);
}

std::size_t SessionStore::size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

std::size_t SessionStore::live_sessions(std::uint64_t version) const {
    std::vector<std::shared_ptr<Entry>> all;
    {
        std::shared_lock lock(mu_);
        for (const auto& [_, e] : entries_) all.push_back(e);
    }
    std::size_t n = 0;
    for (const auto& e : all) {
        std::lock_guard lock(e->mu);
        if (e->session.graph_version == version && e->session.state != SessionState::Finalized) ++n;
    }
    return n;
}

SessionStore::Recovery SessionStore::recover(const GraphLookup& graphs, const ExpertModel& expert) {
    Recovery out;
    if (!dir_) return out;
    std::vector<std::filesystem::path> logs;
    for (const auto& f : std::filesystem::directory_iterator(*dir_ / "sessions"))
        if (f.path().extension() == ".jsonl") logs.push_back(f.path());
    std::sort(logs.begin(), logs.end());

    for (const auto& path : logs) {
        try {
            const auto log = read_event_log(path);
            if (log.empty()) continue;
            auto replayed = replay_events(log, graphs);
            trim_torn_tail(path, log.size());
            auto entry = std::make_shared<Entry>();
            entry->session = std::move(replayed.session);
            entry->diagnosis = std::move(replayed.diagnosis);
            // Stopped between an answer and the next question.
            if (entry->session.state == SessionState::ReadyToAsk)
                append(*entry, events::question(next_questions(entry->session, graphs(entry->session.graph_version))));
            if (entry->session.state == SessionState::Finalized && !entry->diagnosis) {
                entry->diagnosis = finalize(entry->session, expert);
                append(*entry, events::diagnosis(*entry->diagnosis));
                out.finalized.push_back(*entry->diagnosis);
            }
            std::unique_lock lock(mu_);
            entries_[entry->session.id] = entry;
            ++out.sessions;
        } catch (const Error& e) {
            out.warnings.push_back(path.filename().string() + ": " + e.what());
        }
    }
    return out;
}

UpdateQueue::UpdateQueue(std::optional<std::filesystem::path> file) : file_(std::move(file)) {
    if (!file_ || !std::filesystem::exists(*file_)) return;
    const auto text = read_file(*file_);
    try {
        for (const auto& p : json::parse(text)) queue_.push_back(p.get<UpdateProposal>());
    } catch (const json::exception& e) {
        throw ParseError(file_->string() + ": " + e.what());
    }
}

void UpdateQueue::persist() const {
    if (!file_) return;
    json doc = json::array();
    for (const auto& p : queue_) doc.push_back(p);
    write_file_atomically(*file_, doc.dump() + "\n");
}

void UpdateQueue::push(const UpdateProposal& p) {
    std::lock_guard lock(mu_);
    queue_.push_back(p);
    persist();
}

std::vector<UpdateProposal> UpdateQueue::pending() const {
    std::lock_guard lock(mu_);
    return {queue_.begin(), queue_.end()};
}

std::size_t UpdateQueue::size() const {
    std::lock_guard lock(mu_);
    return queue_.size();
}

void UpdateQueue::drain(std::size_t n) {
    std::lock_guard lock(mu_);
    queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(std::min(n, queue_.size())));
    persist();
}

ApplyOutcome apply_pending_updates(const SessionStore& store, UpdateQueue& queue, KnowledgeGraph& graph, bool defer,
                                   const UpdateOptions& options) {
    ApplyOutcome out;
    out.version = graph.version();
    const auto proposals = queue.pending();
    if (proposals.empty()) return out;
    if (defer && store.live_sessions(graph.version()) > 0) {
        out.deferred = true;
        return out;
    }

    KnowledgeGraph next = graph;
    for (const auto& p : proposals) {
        try {
            next = apply_update(next, p, options);
            ++out.applied;
        } catch (const DataError& e) {
            out.skipped.push_back({p.session_id, e.what()});
        }
    }
    if (out.applied > 0) {
        next.set_version(graph.version() + 1);
        graph = std::move(next);
    }
    queue.drain(proposals.size());
    out.version = graph.version();
    return out;
}

} // namespace dopi
